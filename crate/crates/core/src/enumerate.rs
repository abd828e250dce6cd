//! Exact enumeration of integral solutions of M*·G·M = n²·G.
//!
//! The search runs over rows. If M*GM = n²G then M·adj(G)·M* = n²·adj(G),
//! so the conjugated rows w_i = r_i* are vectors of adj(G)-norm
//! n²·adj(G)_ii with prescribed pairings. Candidate rows come from a
//! Fincke–Pohst enumeration of the real form attached to adj(G); sorting
//! them lexicographically and backtracking row by row yields solutions
//! directly in row-major lexicographic order, which is what makes
//! streaming possible.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{is_primitive, ContentConvention, GaussMatrix, GaussianInt, Matrix};
use crate::error::{Error, Result};
use crate::forms::{Form, FormKind};

/// Which determinants are accepted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetFilter {
    /// det M = n^k: the special orthogonal or special unitary group.
    #[default]
    Special,
    /// det M = ±n^k (or a unit times n^k): the full group.
    Any,
}

/// Knobs for [`solve_scaled_isometry`] and friends.
#[derive(Clone, Copy, Debug, Default)]
pub struct EnumerateOptions {
    pub det: DetFilter,
    pub convention: ContentConvention,
    /// Stop after this many solutions (the first ones in canonical order).
    pub limit: Option<usize>,
    /// Thread count; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

/// Search statistics.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EnumerateStats {
    /// Backtracking nodes visited.
    pub nodes: u64,
    /// Candidate rows per row index.
    pub candidates: Vec<usize>,
    /// Leaves rejected by the determinant filter.
    pub rejected_det: u64,
    /// Leaves rejected by the content filter.
    pub rejected_content: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Solutions at one level, in row-major lexicographic order.
#[derive(Clone, Debug)]
pub struct SolutionSet {
    pub form: Form,
    pub n: u64,
    pub solutions: Vec<GaussMatrix>,
    /// False when `limit` cut the search short.
    pub complete: bool,
    pub stats: EnumerateStats,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// JSON report. Wall time is left out unless asked for, so that
    /// reports of identical runs compare equal byte for byte.
    pub fn to_json(&self, with_timing: bool) -> Value {
        let mut v = json!({
            "form": self.form.to_json(),
            "n": self.n,
            "count": self.solutions.len(),
            "complete": self.complete,
            "stats": self.stats,
            "solutions": self.solutions.iter().map(|m| m.to_json()).collect::<Vec<_>>(),
        });
        if with_timing {
            v["wall_ms"] = json!(self.stats.elapsed.as_secs_f64() * 1e3);
        }
        v
    }
}

/// Summary returned by [`stream_solutions`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StreamSummary {
    pub emitted: u64,
    pub stats: EnumerateStats,
}

/// A candidate row, stored as the conjugate column w with A·w precomputed.
#[derive(Clone, Debug)]
struct Cand {
    /// Row entries (re, im) in row order.
    row: Vec<(i64, i64)>,
    /// adj(G)·w as (re, im).
    aw: Vec<(i128, i128)>,
    /// w itself.
    w: Vec<(i64, i64)>,
}

/// w_i*·A·w_j.
fn pairing(a: &Cand, b: &Cand) -> (i128, i128) {
    let mut re = 0i128;
    let mut im = 0i128;
    for (x, y) in a.w.iter().zip(&b.aw) {
        // conj(x)·y
        re += x.0 as i128 * y.0 + x.1 as i128 * y.1;
        im += x.0 as i128 * y.1 - x.1 as i128 * y.0;
    }
    (re, im)
}

fn small(x: &BigInt, what: &str) -> Result<i64> {
    x.to_i64().ok_or_else(|| Error::Overflow(what.to_string()))
}

/// All u ∈ Z^d with uᵗ·R·u = target, for positive definite integral R.
///
/// Coordinate bounds come from the f64 LDLᵀ-type decomposition
/// Q(u) = Σ q_ii (u_i + Σ_{j>i} q_ij u_j)², widened by a relative slack so
/// that rounding never drops a lattice point; every output is then
/// checked exactly.
pub fn short_vectors_exact(r: &[Vec<i64>], target: i128) -> Vec<Vec<i64>> {
    let d = r.len();
    if target < 0 {
        return Vec::new();
    }
    let mut q: Vec<Vec<f64>> = r.iter().map(|row| row.iter().map(|&x| x as f64).collect()).collect();
    for i in 0..d {
        for j in i + 1..d {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for l in i + 1..d {
            for m in l..d {
                q[l][m] -= q[l][i] * q[i][m];
            }
        }
    }
    let c = target as f64;
    let slack = 1e-7 * (c + 1.0) * (d as f64 + 1.0);
    let mut out = Vec::new();
    let mut x = vec![0i64; d];
    fn rec(
        i: usize,
        rem: f64,
        q: &[Vec<f64>],
        x: &mut Vec<i64>,
        slack: f64,
        r: &[Vec<i64>],
        target: i128,
        out: &mut Vec<Vec<i64>>,
    ) {
        let d = q.len();
        let center: f64 = -(i + 1..d).map(|j| q[i][j] * x[j] as f64).sum::<f64>();
        let radius = ((rem + slack).max(0.0) / q[i][i]).sqrt();
        let lo = (center - radius - 1e-9).ceil() as i64;
        let hi = (center + radius + 1e-9).floor() as i64;
        for v in lo..=hi {
            x[i] = v;
            let t = v as f64 - center;
            let next = rem - q[i][i] * t * t;
            if next < -slack {
                continue;
            }
            if i == 0 {
                let mut acc = 0i128;
                for a in 0..d {
                    for b in 0..d {
                        acc += r[a][b] as i128 * x[a] as i128 * x[b] as i128;
                    }
                }
                if acc == target {
                    out.push(x.clone());
                }
            } else {
                rec(i - 1, next, q, x, slack, r, target, out);
            }
        }
        x[i] = 0;
    }
    if d == 0 {
        if target == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(d - 1, c, &q, &mut x, slack, r, target, &mut out);
    out
}

/// Precomputed search data for one (form, n).
struct Plan {
    k: usize,
    /// Candidate lists, one per row (shared when the diagonal repeats).
    cands: Vec<Vec<Cand>>,
    /// Required pairings n²·adj(G)_ij.
    targets: Vec<Vec<(i128, i128)>>,
}

impl Plan {
    fn new(form: &Form, n: u64) -> Result<Plan> {
        if n == 0 {
            return Err(Error::InvalidArgument("level n must be positive".into()));
        }
        let k = form.rank();
        let hermitian = form.kind() == FormKind::Hermitian;
        let adj_g = form.gram().adjugate();
        let mut adj = vec![vec![(0i64, 0i64); k]; k];
        for i in 0..k {
            for j in 0..k {
                let e = adj_g.get(i, j);
                adj[i][j] = (small(&e.re, "adjugate entry")?, small(&e.im, "adjugate entry")?);
            }
        }
        let n2 = (n as i128) * (n as i128);
        let targets: Vec<Vec<(i128, i128)>> = adj
            .iter()
            .map(|row| row.iter().map(|&(re, im)| (n2 * re as i128, n2 * im as i128)).collect())
            .collect();
        // real form on (x, y) with w = x + iy: [[Re A, −Im A], [Im A, Re A]]
        let d = if hermitian { 2 * k } else { k };
        let mut real = vec![vec![0i64; d]; d];
        for i in 0..k {
            for j in 0..k {
                let (re, im) = adj[i][j];
                real[i][j] = re;
                if hermitian {
                    real[i][k + j] = -im;
                    real[k + i][j] = im;
                    real[k + i][k + j] = re;
                }
            }
        }
        let mut cache: Vec<(i128, Vec<Cand>)> = Vec::new();
        let mut cands = Vec::with_capacity(k);
        for i in 0..k {
            let t = targets[i][i].0;
            if let Some((_, c)) = cache.iter().find(|(tt, _)| *tt == t) {
                cands.push(c.clone());
                continue;
            }
            let mut list: Vec<Cand> = short_vectors_exact(&real, t)
                .into_iter()
                .map(|u| {
                    let w: Vec<(i64, i64)> =
                        (0..k).map(|s| (u[s], if hermitian { u[k + s] } else { 0 })).collect();
                    let aw = (0..k)
                        .map(|s| {
                            let mut re = 0i128;
                            let mut im = 0i128;
                            for (a, x) in adj[s].iter().zip(&w) {
                                re += a.0 as i128 * x.0 as i128 - a.1 as i128 * x.1 as i128;
                                im += a.0 as i128 * x.1 as i128 + a.1 as i128 * x.0 as i128;
                            }
                            (re, im)
                        })
                        .collect();
                    let row = w.iter().map(|&(re, im)| (re, -im)).collect();
                    Cand { row, aw, w }
                })
                .collect();
            list.sort_by(|a, b| a.row.cmp(&b.row));
            cache.push((t, list.clone()));
            cands.push(list);
        }
        Ok(Plan { k, cands, targets })
    }

    fn matrix(&self, rows: &[usize]) -> GaussMatrix {
        Matrix::from_fn(self.k, |i, j| {
            let (re, im) = self.cands[i][rows[i]].row[j];
            GaussianInt::new(re, im)
        })
    }
}

/// Per-task accumulator.
#[derive(Default)]
struct Acc {
    nodes: u64,
    rejected_det: u64,
    rejected_content: u64,
    found: Vec<GaussMatrix>,
    count: u64,
}

struct Search<'a> {
    plan: &'a Plan,
    form: &'a Form,
    opts: EnumerateOptions,
    keep: bool,
    cap: Option<u64>,
    n2: GaussianInt,
    nk: GaussianInt,
}

impl Search<'_> {
    fn leaf(&self, rows: &[usize], acc: &mut Acc) {
        let m = self.plan.matrix(rows);
        let gram = self.form.gram();
        let lhs = m.adjoint().mul(gram).mul(&m);
        assert!(lhs == gram.scale(&self.n2), "enumerated matrix fails the exact isometry check");
        let det = m.det();
        let det_ok = match self.opts.det {
            DetFilter::Special => det == self.nk,
            DetFilter::Any => det.norm() == self.nk.norm(),
        };
        if !det_ok {
            acc.rejected_det += 1;
            return;
        }
        if !is_primitive(&m, self.opts.convention) {
            acc.rejected_content += 1;
            return;
        }
        acc.count += 1;
        if self.keep {
            acc.found.push(m);
        }
    }

    fn full(&self, acc: &Acc) -> bool {
        self.cap.is_some_and(|c| acc.count >= c)
    }

    /// Backtrack below a fixed first row.
    fn run(&self, first: usize) -> Acc {
        let plan = self.plan;
        let k = plan.k;
        let mut acc = Acc::default();
        let mut rows = vec![first];
        acc.nodes += 1;
        if k == 1 {
            self.leaf(&rows, &mut acc);
            return acc;
        }
        // live[j]: candidates for row j compatible with every chosen row
        let initial: Vec<Vec<u32>> = (1..k)
            .map(|j| {
                let c0 = &plan.cands[0][first];
                (0..plan.cands[j].len() as u32)
                    .filter(|&t| pairing(c0, &plan.cands[j][t as usize]) == plan.targets[0][j])
                    .collect()
            })
            .collect();
        self.descend(1, &mut rows, initial, &mut acc);
        acc
    }

    fn descend(&self, depth: usize, rows: &mut Vec<usize>, live: Vec<Vec<u32>>, acc: &mut Acc) {
        let plan = self.plan;
        let k = plan.k;
        // live[0] is for row `depth`
        for &t in &live[0] {
            if self.full(acc) {
                return;
            }
            acc.nodes += 1;
            rows.push(t as usize);
            if depth + 1 == k {
                self.leaf(rows, acc);
            } else {
                let chosen = &plan.cands[depth][t as usize];
                let mut next = Vec::with_capacity(k - depth - 1);
                let mut dead = false;
                for (off, list) in live[1..].iter().enumerate() {
                    let j = depth + 1 + off;
                    let filtered: Vec<u32> = list
                        .iter()
                        .copied()
                        .filter(|&c| pairing(chosen, &plan.cands[j][c as usize]) == plan.targets[depth][j])
                        .collect();
                    if filtered.is_empty() {
                        dead = true;
                        break;
                    }
                    next.push(filtered);
                }
                if !dead {
                    self.descend(depth + 1, rows, next, acc);
                }
            }
            rows.pop();
        }
    }
}

fn with_pool<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Drive the search over batches of first rows, in order. `emit` receives
/// each finished batch's solutions and returns false to stop.
fn drive(
    form: &Form,
    n: u64,
    opts: EnumerateOptions,
    keep: bool,
    mut emit: impl FnMut(Vec<GaussMatrix>, u64) -> std::result::Result<bool, Error> + Send,
) -> Result<(EnumerateStats, bool)> {
    let start = Instant::now();
    let plan = Plan::new(form, n)?;
    let k = form.rank() as u32;
    let nb = BigInt::from(n);
    let search = Search {
        plan: &plan,
        form,
        opts,
        keep,
        cap: opts.limit.map(|l| l as u64),
        n2: GaussianInt::from(&nb * &nb),
        nk: GaussianInt::from(num_traits::Pow::pow(&nb, k)),
    };
    let stats = EnumerateStats {
        candidates: plan.cands.iter().map(|c| c.len()).collect(),
        ..Default::default()
    };
    let firsts = plan.cands.first().map_or(0, |c| c.len());
    let batch = opts.workers.unwrap_or_else(rayon::current_num_threads).max(1) * 8;
    let search_ref = &search;
    let (mut stats, complete) = with_pool(opts.workers, move || -> Result<(EnumerateStats, bool)> {
        let mut stats = stats;
        let mut total = 0u64;
        let mut begin = 0;
        while begin < firsts {
            let end = (begin + batch).min(firsts);
            let accs: Vec<Acc> = (begin..end).into_par_iter().map(|f| search_ref.run(f)).collect();
            for acc in accs {
                stats.nodes += acc.nodes;
                stats.rejected_det += acc.rejected_det;
                stats.rejected_content += acc.rejected_content;
                let mut found = acc.found;
                let mut count = acc.count;
                let mut full = false;
                if let Some(limit) = opts.limit {
                    let room = (limit as u64).saturating_sub(total);
                    if count >= room {
                        count = room;
                        found.truncate(room as usize);
                        full = true;
                    }
                }
                total += count;
                if !emit(found, count)? || full {
                    return Ok((stats, false));
                }
            }
            begin = end;
        }
        Ok((stats, true))
    })??;
    stats.elapsed = start.elapsed();
    Ok((stats, complete))
}

/// All M with M*·G·M = n²·G, content 1 and the requested determinant,
/// sorted in row-major lexicographic order.
pub fn solve_scaled_isometry(form: &Form, n: u64, opts: EnumerateOptions) -> Result<SolutionSet> {
    let mut solutions = Vec::new();
    let (stats, complete) = drive(form, n, opts, true, |batch, _| {
        solutions.extend(batch);
        Ok(true)
    })?;
    Ok(SolutionSet { form: form.clone(), n, solutions, complete, stats })
}

/// Number of solutions, without keeping them.
pub fn count_solutions(form: &Form, n: u64, opts: EnumerateOptions) -> Result<u64> {
    let mut total = 0;
    drive(form, n, opts, false, |_, c| {
        total += c;
        Ok(true)
    })?;
    Ok(total)
}

/// Whether any solution exists.
pub fn has_solution(form: &Form, n: u64, opts: EnumerateOptions) -> Result<bool> {
    Ok(count_solutions(form, n, EnumerateOptions { limit: Some(1), ..opts })? > 0)
}

/// Emit every solution once, in canonical order, holding at most one batch
/// of first rows in memory. A sink error stops the search.
pub fn stream_solutions<F>(form: &Form, n: u64, opts: EnumerateOptions, mut sink: F) -> Result<StreamSummary>
where
    F: FnMut(&GaussMatrix) -> std::result::Result<(), String> + Send,
{
    let mut emitted = 0u64;
    let (stats, _) = drive(form, n, opts, true, |batch, _| {
        for m in &batch {
            sink(m).map_err(|message| Error::Sink { emitted, message })?;
            emitted += 1;
        }
        Ok(true)
    })?;
    Ok(StreamSummary { emitted, stats })
}

/// Flattened entries followed by n, as one CSV line. Gaussian entries are
/// written a+bi.
pub fn csv_row(m: &GaussMatrix, n: u64) -> String {
    let mut parts: Vec<String> = m
        .entries()
        .iter()
        .map(|g| {
            if g.im.is_zero() {
                g.re.to_string()
            } else {
                format!("{}{:+}i", g.re, g.im)
            }
        })
        .collect();
    parts.push(n.to_string());
    parts.join(",")
}
