//! Depth-first search for matrices X with X*·A·X ≡ B (mod p^e).
//!
//! Solutions mod p are found by a column-by-column search. A solution mod
//! p^e (e ≥ 1) lifts to p^(e+1) exactly along an affine subspace of
//! (Z/p)^N, because the quadratic correction term vanishes modulo p^(e+1):
//!
//! f(X + p^e·Δ) ≡ f(X) + p^e·(Δ*AX + X*AΔ)   (mod p^(e+1))
//!
//! so each lifting step is a linear system over F_p. Determinant targets
//! linearise the same way through tr(adj(X)·Δ).
//!
//! At p = 2 the diagonal of Δ*AX + X*AΔ is even, so a node at level e
//! instead carries its diagonal congruences modulo 2^(e+1). These are
//! well defined on X mod 2^e, and lifting stays linear because the
//! quadratic term Σ A_ll·|Δ_li|² reduces to a linear form over F_2. The
//! search therefore
//! visits every solution tree node exactly once, which makes exhaustion a
//! proof that no solution exists modulo p^(deepest + 1).

use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::arith::{ContentConvention, GaussMatrix, GaussianInt};
use crate::error::{Error, Result};

/// A Gaussian residue (re, im); `im` stays 0 for quadratic systems.
pub type Residue = (i128, i128);

/// Condition imposed on solutions modulo p.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level1Filter {
    /// Some entry is a unit (in the given content convention).
    UnitEntry(ContentConvention),
    /// det X is a unit.
    UnitDeterminant,
}

/// How a search ended.
#[derive(Clone, Debug, PartialEq)]
pub enum SearchEnd<T> {
    Accepted { value: T, level: u32 },
    /// No solution exists modulo p^level.
    Exhausted { level: u32 },
    /// Survivors reached the precision cap without being accepted.
    PrecisionCap,
    Budget,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchReport<T> {
    pub end: SearchEnd<T>,
    pub nodes: u64,
    pub deepest: u32,
}

/// The congruence X*·A·X ≡ B with optional det X ≡ target.
#[derive(Clone, Debug)]
pub struct CongruenceSystem {
    hermitian: bool,
    k: usize,
    p: i128,
    max_e: u32,
    pow: Vec<i128>,
    a: Vec<Residue>,
    b: Vec<Residue>,
    det_target: Option<Residue>,
    filter: Level1Filter,
}

const LEVEL1_VECTOR_CAP: u128 = 1 << 22;

fn reduce(x: &BigInt, modulus: i128) -> i128 {
    x.mod_floor(&BigInt::from(modulus)).to_i128().expect("reduced residue fits")
}

impl CongruenceSystem {
    pub fn new(
        hermitian: bool,
        a: &GaussMatrix,
        b: &GaussMatrix,
        det_target: Option<&GaussianInt>,
        p: u64,
        max_e: u32,
        filter: Level1Filter,
    ) -> Result<Self> {
        let k = a.dim();
        if b.dim() != k {
            return Err(Error::DimensionMismatch("A and B differ in size".into()));
        }
        if k > 8 {
            return Err(Error::Unsupported("local search limited to rank ≤ 8".into()));
        }
        if max_e == 0 {
            return Err(Error::InvalidArgument("precision must be ≥ 1".into()));
        }
        let mut pow = vec![1i128];
        for _ in 0..=max_e + 1 {
            let next = pow.last().unwrap().checked_mul(p as i128).filter(|&v| v < (1i128 << 62));
            match next {
                Some(v) => pow.push(v),
                None => {
                    return Err(Error::Overflow(format!("{p}^{} exceeds 62 bits", max_e + 2)))
                }
            }
        }
        let modulus = pow[max_e as usize + 2];
        let conv = |g: &GaussianInt| (reduce(&g.re, modulus), reduce(&g.im, modulus));
        Ok(CongruenceSystem {
            hermitian,
            k,
            p: p as i128,
            max_e,
            a: a.entries().iter().map(conv).collect(),
            b: b.entries().iter().map(conv).collect(),
            det_target: det_target.map(conv),
            pow,
            filter,
        })
    }

    pub fn p(&self) -> u64 {
        self.p as u64
    }

    pub fn max_e(&self) -> u32 {
        self.max_e
    }

    fn parts(&self) -> usize {
        if self.hermitian {
            2
        } else {
            1
        }
    }

    /// Run the search. `accept` sees every node (X mod p^level) and may
    /// stop the search by returning a value.
    pub fn search<T>(
        &self,
        budget: u64,
        mut accept: impl FnMut(&[Residue], u32) -> Option<T>,
    ) -> SearchReport<T> {
        let mut st = State { nodes: 0, deepest: 0, capped: false, budget_hit: false };
        let mut found = None;
        let flow = self.level1(&mut st, budget, &mut |sys, st, x| {
            sys.visit(x, 1, st, budget, &mut accept, &mut found)
        });
        let end = match (flow, found) {
            (_, Some((value, level))) => SearchEnd::Accepted { value, level },
            _ if st.budget_hit => SearchEnd::Budget,
            _ if st.capped => SearchEnd::PrecisionCap,
            // at p = 2 a level-e node already fixes the diagonal mod 2^(e+1)
            _ => SearchEnd::Exhausted { level: st.deepest + 1 + u32::from(self.p == 2) },
        };
        SearchReport { end, nodes: st.nodes, deepest: st.deepest }
    }

    fn visit<T>(
        &self,
        x: &[Residue],
        level: u32,
        st: &mut State,
        budget: u64,
        accept: &mut impl FnMut(&[Residue], u32) -> Option<T>,
        found: &mut Option<(T, u32)>,
    ) -> ControlFlow<()> {
        st.nodes += 1;
        st.deepest = st.deepest.max(level);
        if st.nodes > budget {
            st.budget_hit = true;
            return ControlFlow::Break(());
        }
        if let Some(v) = accept(x, level) {
            *found = Some((v, level));
            return ControlFlow::Break(());
        }
        if level >= self.max_e {
            st.capped = true;
            return ControlFlow::Continue(());
        }
        let Some((particular, kernel)) = self.lift_system(x, level) else {
            return ControlFlow::Continue(());
        };
        let p = self.p;
        let step = self.pow[level as usize];
        let parts = self.parts();
        let mut coeffs = vec![0i128; kernel.len()];
        loop {
            let mut delta = particular.clone();
            for (c, kv) in coeffs.iter().zip(&kernel) {
                if *c != 0 {
                    for (d, v) in delta.iter_mut().zip(kv) {
                        *d = (*d + c * v) % p;
                    }
                }
            }
            let child: Vec<Residue> = x
                .iter()
                .enumerate()
                .map(|(idx, &(re, im))| {
                    let dre = delta[idx * parts];
                    let dim = if parts == 2 { delta[idx * parts + 1] } else { 0 };
                    (re + step * dre, im + step * dim)
                })
                .collect();
            self.visit(&child, level + 1, st, budget, accept, found)?;
            // next coefficient vector in lexicographic order
            let mut i = coeffs.len();
            loop {
                if i == 0 {
                    return ControlFlow::Continue(());
                }
                i -= 1;
                coeffs[i] += 1;
                if coeffs[i] < p {
                    break;
                }
                coeffs[i] = 0;
            }
        }
    }

    /// Affine space of Δ mod p lifting `x` from p^e to p^(e+1).
    fn lift_system(&self, x: &[Residue], e: u32) -> Option<(Vec<i128>, Vec<Vec<i128>>)> {
        let k = self.k;
        let p = self.p;
        let q1 = self.pow[e as usize + 1];
        let qe = self.pow[e as usize];
        let parts = self.parts();
        let nvars = k * k * parts;
        let two_adic = self.p == 2;
        let f = self.residual(x, self.pow[e as usize + 2]);
        let xm: Vec<Residue> = x.iter().map(|&v| cmod(v, p)).collect();
        let am: Vec<Residue> = self.a.iter().map(|&v| cmod(v, p)).collect();
        let y = matmul(&am, &xm, k, p);

        let mut rows: Vec<Vec<i128>> = Vec::new();
        let mut rhs: Vec<i128> = Vec::new();
        let units: &[Residue] = if parts == 2 { &[(1, 0), (0, 1)] } else { &[(1, 0)] };
        for i in 0..k {
            if two_adic {
                // Re(Δ*AX)_ii + [e = 1]·Σ_l A_ll·(Re Δ_li + Im Δ_li) ≡ −f_ii / 2^(e+1)
                let c = f[i * k + i].0;
                debug_assert!(c % (2 * qe) == 0);
                let mut row = vec![0i128; nvars];
                for l in 0..k {
                    for (u_idx, &u) in units.iter().enumerate() {
                        let mut v = cmul(conj(u), y[l * k + i]).0;
                        if e == 1 {
                            v += am[l * k + l].0;
                        }
                        row[(l * k + i) * parts + u_idx] = v.rem_euclid(p);
                    }
                }
                rows.push(row);
                rhs.push((-(c / (2 * qe))).rem_euclid(p));
            }
            for j in i..k {
                if two_adic && i == j {
                    continue;
                }
                let c = cmod(f[i * k + j], q1);
                debug_assert!(c.0 % qe == 0 && c.1 % qe == 0);
                let c = (c.0 / qe, c.1 / qe);
                let eq_parts = if self.hermitian && i != j { 2 } else { 1 };
                for part in 0..eq_parts {
                    let mut row = vec![0i128; nvars];
                    for l in 0..k {
                        for m in 0..k {
                            for (u_idx, &u) in units.iter().enumerate() {
                                // contribution of Δ = u·E_lm to entry (i, j)
                                let mut val: Residue = (0, 0);
                                if i == m {
                                    val = cadd(val, cmul(conj(u), y[l * k + j]));
                                }
                                if j == m {
                                    val = cadd(val, cmul(conj(y[l * k + i]), u));
                                }
                                let v = if part == 0 { val.0 } else { val.1 };
                                row[(l * k + m) * parts + u_idx] = v.rem_euclid(p);
                            }
                        }
                    }
                    rows.push(row);
                    let cv = if part == 0 { c.0 } else { c.1 };
                    rhs.push((-cv).rem_euclid(p));
                }
            }
        }
        if let Some(target) = self.det_target {
            let d = det_mod(x, k, q1);
            let diff = (d.0 - target.0).rem_euclid(q1);
            let diff_im = (d.1 - target.1).rem_euclid(q1);
            debug_assert!(diff % qe == 0 && diff_im % qe == 0);
            let c = (diff / qe, diff_im / qe);
            let adj = adjugate_mod(&xm, k, p);
            for part in 0..parts {
                let mut row = vec![0i128; nvars];
                for l in 0..k {
                    for m in 0..k {
                        for (u_idx, &u) in units.iter().enumerate() {
                            let val = cmul(adj[m * k + l], u);
                            let v = if part == 0 { val.0 } else { val.1 };
                            row[(l * k + m) * parts + u_idx] = v.rem_euclid(p);
                        }
                    }
                }
                rows.push(row);
                let cv = if part == 0 { c.0 } else { c.1 };
                rhs.push((-cv).rem_euclid(p));
            }
        }
        solve_mod_p(rows, rhs, nvars, p)
    }

    /// X*AX − B reduced mod `modulus`.
    fn residual(&self, x: &[Residue], modulus: i128) -> Vec<Residue> {
        let k = self.k;
        let ax = matmul(&self.a, x, k, modulus);
        let mut out = vec![(0, 0); k * k];
        for i in 0..k {
            for j in 0..k {
                let mut acc = (0, 0);
                for l in 0..k {
                    acc = cmod(cadd(acc, cmul(conj(x[l * k + i]), ax[l * k + j])), modulus);
                }
                out[i * k + j] = cmod(csub(acc, self.b[i * k + j]), modulus);
            }
        }
        out
    }

    fn level1<F>(&self, st: &mut State, budget: u64, on_solution: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&Self, &mut State, &[Residue]) -> ControlFlow<()>,
    {
        let k = self.k;
        let p = self.p;
        let parts = self.parts();
        let total = (p as u128).pow((k * parts) as u32);
        if total > LEVEL1_VECTOR_CAP {
            st.budget_hit = true;
            return ControlFlow::Break(());
        }
        let am: Vec<Residue> = self.a.iter().map(|&v| cmod(v, p)).collect();
        let bm: Vec<Residue> = self.b.iter().map(|&v| cmod(v, p)).collect();
        // at p = 2 norms are taken mod 4, which is well defined on X mod 2
        let norm_mod = if p == 2 { 4 } else { p };
        let a4: Vec<Residue> = self.a.iter().map(|&v| cmod(v, norm_mod)).collect();
        let b4: Vec<Residue> = self.b.iter().map(|&v| cmod(v, norm_mod)).collect();
        let mut vectors: Vec<Vec<Residue>> = Vec::with_capacity(total as usize);
        for idx in 0..total {
            let mut r = idx;
            let mut v = vec![(0i128, 0i128); k];
            for slot in v.iter_mut() {
                let re = (r % p as u128) as i128;
                r /= p as u128;
                let im = if parts == 2 {
                    let t = (r % p as u128) as i128;
                    r /= p as u128;
                    t
                } else {
                    0
                };
                *slot = (re, im);
            }
            vectors.push(v);
        }
        let columns: Vec<Vec<usize>> = (0..k)
            .map(|j| {
                (0..vectors.len())
                    .filter(|&i| {
                        form_value(&a4, &vectors[i], &vectors[i], k, norm_mod) == b4[j * k + j]
                    })
                    .collect()
            })
            .collect();
        let mut chosen: Vec<usize> = Vec::with_capacity(k);
        self.level1_dfs(&am, &bm, &vectors, &columns, &mut chosen, st, budget, on_solution)
    }

    #[allow(clippy::too_many_arguments)]
    fn level1_dfs<F>(
        &self,
        am: &[Residue],
        bm: &[Residue],
        vectors: &[Vec<Residue>],
        columns: &[Vec<usize>],
        chosen: &mut Vec<usize>,
        st: &mut State,
        budget: u64,
        on_solution: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&Self, &mut State, &[Residue]) -> ControlFlow<()>,
    {
        let k = self.k;
        let p = self.p;
        let j = chosen.len();
        if j == k {
            let mut x = vec![(0, 0); k * k];
            for (c, &vi) in chosen.iter().enumerate() {
                for r in 0..k {
                    x[r * k + c] = vectors[vi][r];
                }
            }
            if !self.level1_ok(&x) {
                return ControlFlow::Continue(());
            }
            return on_solution(self, st, &x);
        }
        for &cand in &columns[j] {
            if st.nodes > budget {
                st.budget_hit = true;
                return ControlFlow::Break(());
            }
            let ok = chosen
                .iter()
                .enumerate()
                .all(|(i, &vi)| form_value(am, &vectors[vi], &vectors[cand], k, p) == bm[i * k + j]);
            if ok {
                chosen.push(cand);
                let flow = self.level1_dfs(am, bm, vectors, columns, chosen, st, budget, on_solution);
                chosen.pop();
                flow?;
            }
        }
        ControlFlow::Continue(())
    }

    fn level1_ok(&self, x: &[Residue]) -> bool {
        let p = self.p;
        if let Some(t) = self.det_target {
            if det_mod(x, self.k, p) != cmod(t, p) {
                return false;
            }
        }
        match self.filter {
            Level1Filter::UnitDeterminant => det_mod(x, self.k, p) != (0, 0),
            Level1Filter::UnitEntry(conv) => {
                let rational = x.iter().any(|&(re, im)| re % p != 0 || im % p != 0);
                match conv {
                    ContentConvention::Rational => rational,
                    ContentConvention::Gaussian if self.hermitian && p == 2 => {
                        x.iter().any(|&(re, im)| (re - im).rem_euclid(2) != 0)
                    }
                    ContentConvention::Gaussian => rational,
                }
            }
        }
    }
}

struct State {
    nodes: u64,
    deepest: u32,
    capped: bool,
    budget_hit: bool,
}

fn conj(a: Residue) -> Residue {
    (a.0, -a.1)
}

fn cadd(a: Residue, b: Residue) -> Residue {
    (a.0 + b.0, a.1 + b.1)
}

fn csub(a: Residue, b: Residue) -> Residue {
    (a.0 - b.0, a.1 - b.1)
}

fn cmul(a: Residue, b: Residue) -> Residue {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cmod(a: Residue, m: i128) -> Residue {
    (a.0.rem_euclid(m), a.1.rem_euclid(m))
}

fn matmul(a: &[Residue], b: &[Residue], k: usize, m: i128) -> Vec<Residue> {
    let mut out = vec![(0, 0); k * k];
    for i in 0..k {
        for j in 0..k {
            let mut acc = (0, 0);
            for l in 0..k {
                acc = cmod(cadd(acc, cmul(a[i * k + l], b[l * k + j])), m);
            }
            out[i * k + j] = acc;
        }
    }
    out
}

/// v*·A·w mod m for column vectors.
fn form_value(a: &[Residue], v: &[Residue], w: &[Residue], k: usize, m: i128) -> Residue {
    let mut acc = (0, 0);
    for l in 0..k {
        let mut aw = (0, 0);
        for c in 0..k {
            aw = cmod(cadd(aw, cmul(a[l * k + c], w[c])), m);
        }
        acc = cmod(cadd(acc, cmul(conj(v[l]), aw)), m);
    }
    acc
}

/// Determinant mod m by dynamic programming over column subsets.
pub(crate) fn det_mod(x: &[Residue], k: usize, m: i128) -> Residue {
    let mut dp = vec![(0i128, 0i128); 1 << k];
    dp[0] = (1, 0);
    for mask in 0usize..(1 << k) {
        let row = mask.count_ones() as usize;
        if row >= k || dp[mask] == (0, 0) {
            continue;
        }
        for c in 0..k {
            if mask & (1 << c) != 0 {
                continue;
            }
            let above = (mask >> (c + 1)).count_ones();
            let term = cmod(cmul(dp[mask], x[row * k + c]), m);
            let next = mask | (1 << c);
            dp[next] = if above % 2 == 0 {
                cmod(cadd(dp[next], term), m)
            } else {
                cmod(csub(dp[next], term), m)
            };
        }
    }
    dp[(1 << k) - 1]
}

fn adjugate_mod(x: &[Residue], k: usize, m: i128) -> Vec<Residue> {
    if k == 1 {
        return vec![(1, 0)];
    }
    let mut out = vec![(0, 0); k * k];
    for i in 0..k {
        for j in 0..k {
            // cofactor of (j, i)
            let minor: Vec<Residue> = (0..k)
                .filter(|&r| r != j)
                .flat_map(|r| (0..k).filter(move |&c| c != i).map(move |c| (r, c)))
                .map(|(r, c)| x[r * k + c])
                .collect();
            let d = det_mod(&minor, k - 1, m);
            out[i * k + j] = if (i + j) % 2 == 0 { d } else { cmod((-d.0, -d.1), m) };
        }
    }
    out
}

fn inv_mod_p(a: i128, p: i128) -> i128 {
    let (mut t, mut new_t, mut r, mut new_r) = (0i128, 1i128, p, a.rem_euclid(p));
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    t.rem_euclid(p)
}

/// Solve rows·Δ = rhs over F_p: particular solution and a kernel basis.
pub(crate) fn solve_mod_p(
    mut rows: Vec<Vec<i128>>,
    mut rhs: Vec<i128>,
    nvars: usize,
    p: i128,
) -> Option<(Vec<i128>, Vec<Vec<i128>>)> {
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..nvars {
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][c] % p != 0) else {
            continue;
        };
        rows.swap(r, pr);
        rhs.swap(r, pr);
        let inv = inv_mod_p(rows[r][c], p);
        for v in rows[r].iter_mut() {
            *v = (*v * inv) % p;
        }
        rhs[r] = (rhs[r] * inv) % p;
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let f = rows[i][c];
                for j in 0..nvars {
                    rows[i][j] = (rows[i][j] - f * rows[r][j]).rem_euclid(p);
                }
                rhs[i] = (rhs[i] - f * rhs[r]).rem_euclid(p);
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    if rhs[r..].iter().any(|&v| v != 0) {
        return None;
    }
    let mut particular = vec![0i128; nvars];
    for (i, &c) in pivots.iter().enumerate() {
        particular[c] = rhs[i];
    }
    let free: Vec<usize> = (0..nvars).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&f| {
            let mut v = vec![0i128; nvars];
            v[f] = 1;
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = (-rows[i][f]).rem_euclid(p);
            }
            v
        })
        .collect();
    Some((particular, kernel))
}

/// Residues back to an exact matrix with entries in [0, modulus).
pub fn residues_to_matrix(x: &[Residue], k: usize) -> GaussMatrix {
    GaussMatrix::new(k, x.iter().map(|&(re, im)| GaussianInt::new(re, im)).collect())
        .expect("k*k residues")
}
