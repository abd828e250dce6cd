//! Double-coset volumes Card(U·a·U / U) for split SL₂ and SL₃ over Q_p.
//!
//! The affine Weyl group of SL_r is the coroot lattice ⋊ S_r, acting on
//! {x ∈ R^r : Σx = 0} by x ↦ σ·x + λ. Lengths count the walls x_i − x_j ∈ Z
//! separating the fundamental alcove from its image. The volume formula is
//!
//!   Card(U·w·U / U) = Σ_{y ∈ W₀wW₀} q^l(y) / Σ_{y ∈ W₀} q^l(y).
//!
//! An independent count comes from lattices: cosets g·SL_r(Z_p) are the
//! covolume-one lattices g·Z_p^r, sorted by elementary divisors.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::arith::is_prime;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootSystem {
    A1,
    A2,
}

impl RootSystem {
    /// Size r of the matrices in SL_r.
    pub fn size(self) -> usize {
        match self {
            RootSystem::A1 => 2,
            RootSystem::A2 => 3,
        }
    }

    /// Simple affine reflections: s₀ (the affine one), s₁, …, s_{r−1}.
    pub fn generator_count(self) -> usize {
        self.size()
    }
}

/// x ↦ σ·x + λ with (σ·x)_i = x_{σ(i)}, plus a weight per generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineWeylElement {
    pub system: RootSystem,
    /// Coroot lattice vector (sums to zero).
    pub translation: Vec<i64>,
    /// Permutation of coordinates.
    pub finite: Vec<usize>,
    /// d(s_i) for s₀, s₁, …; all 1 in the split case.
    pub weights: Vec<u32>,
}

impl AffineWeylElement {
    pub fn identity(system: RootSystem) -> Self {
        let r = system.size();
        AffineWeylElement {
            system,
            translation: vec![0; r],
            finite: (0..r).collect(),
            weights: vec![1; system.generator_count()],
        }
    }

    /// Translation by a coroot vector, e.g. (m, −m) for diag(p^m, p^(−m)).
    pub fn translation(system: RootSystem, lambda: &[i64]) -> Result<Self> {
        if lambda.len() != system.size() {
            return Err(Error::DimensionMismatch(format!("{system:?} needs {} coordinates", system.size())));
        }
        if lambda.iter().sum::<i64>() != 0 {
            return Err(Error::InvalidArgument("translation must sum to zero".into()));
        }
        Ok(AffineWeylElement { translation: lambda.to_vec(), ..Self::identity(system) })
    }

    /// Simple reflection i: s₀ is the reflection in x₁ − x_r = 1, s_i
    /// swaps coordinates i and i+1.
    pub fn generator(system: RootSystem, i: usize) -> Self {
        let r = system.size();
        let mut w = Self::identity(system);
        if i == 0 {
            w.finite.swap(0, r - 1);
            w.translation[0] = 1;
            w.translation[r - 1] = -1;
        } else {
            w.finite.swap(i - 1, i);
        }
        w
    }

    /// Element of W₀ from a permutation.
    pub fn finite_element(system: RootSystem, perm: &[usize]) -> Self {
        AffineWeylElement { finite: perm.to_vec(), ..Self::identity(system) }
    }

    pub fn with_weights(mut self, weights: &[u32]) -> Self {
        self.weights = weights.to_vec();
        self
    }

    /// self ∘ other.
    pub fn compose(&self, other: &Self) -> Self {
        let r = self.finite.len();
        let finite = (0..r).map(|i| other.finite[self.finite[i]]).collect();
        let translation = (0..r).map(|i| self.translation[i] + other.translation[self.finite[i]]).collect();
        AffineWeylElement { system: self.system, translation, finite, weights: self.weights.clone() }
    }

    /// The point ρ/r of the fundamental alcove, scaled by 2r to be integral.
    fn base_point(r: usize) -> Vec<i64> {
        (0..r).map(|i| r as i64 - 1 - 2 * i as i64).collect()
    }

    /// Image of the scaled base point.
    fn image_point(&self) -> Vec<i64> {
        let r = self.finite.len();
        let x = Self::base_point(r);
        let s = 2 * r as i64;
        (0..r).map(|i| x[self.finite[i]] + s * self.translation[i]).collect()
    }

    /// Number of walls x_i − x_j ∈ Z between the fundamental alcove and
    /// its image under self.
    pub fn length(&self) -> u64 {
        let r = self.finite.len();
        let s = 2 * r as i64;
        let x = Self::base_point(r);
        let y = self.image_point();
        let mut total = 0;
        for i in 0..r {
            for j in i + 1..r {
                let a = (x[i] - x[j]).div_euclid(s);
                let b = (y[i] - y[j]).div_euclid(s);
                total += (a - b).unsigned_abs();
            }
        }
        total
    }

    /// A reduced word, found by repeatedly stripping a left descent.
    pub fn reduced_word(&self) -> Vec<usize> {
        let mut word = Vec::new();
        let mut cur = self.clone();
        while cur.length() > 0 {
            let l = cur.length();
            let i = (0..self.system.generator_count())
                .find(|&i| Self::generator(self.system, i).compose(&cur).length() < l)
                .expect("a nontrivial element has a descent");
            word.push(i);
            cur = Self::generator(self.system, i).compose(&cur);
        }
        word
    }

    /// Whether λ is weakly decreasing, the positive chamber.
    pub fn is_dominant(&self) -> bool {
        self.translation.windows(2).all(|w| w[0] >= w[1])
    }

    /// Translation by the dominant representative of the W₀-orbit of λ.
    /// Same double coset W₀wW₀ as self.
    pub fn dominant(&self) -> Self {
        let mut lambda = self.translation.clone();
        lambda.sort_unstable_by(|a, b| b.cmp(a));
        AffineWeylElement { translation: lambda, ..Self::identity(self.system) }.with_weights(&self.weights)
    }

    fn key(&self) -> (Vec<i64>, Vec<usize>) {
        (self.translation.clone(), self.finite.clone())
    }
}

/// Σ d(s_i) along a reduced word.
pub fn weighted_length(w: &AffineWeylElement) -> u64 {
    w.reduced_word().iter().map(|&i| u64::from(w.weights[i])).sum()
}

/// Word lengths of every element of length at most `max`, by breadth-first
/// search on the generators. Independent of the alcove count.
pub fn word_lengths(system: RootSystem, max: u32) -> Vec<(AffineWeylElement, u32)> {
    let gens: Vec<_> = (0..system.generator_count()).map(|i| AffineWeylElement::generator(system, i)).collect();
    let start = AffineWeylElement::identity(system);
    let mut dist: HashMap<(Vec<i64>, Vec<usize>), u32> = HashMap::from([(start.key(), 0)]);
    let mut out = vec![(start.clone(), 0)];
    let mut queue = VecDeque::from([(start, 0u32)]);
    while let Some((w, d)) = queue.pop_front() {
        if d == max {
            continue;
        }
        for g in &gens {
            let next = g.compose(&w);
            if !dist.contains_key(&next.key()) {
                dist.insert(next.key(), d + 1);
                out.push((next.clone(), d + 1));
                queue.push_back((next, d + 1));
            }
        }
    }
    out
}

fn permutations(r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(r - 1) {
        for pos in 0..r {
            let mut q = p.clone();
            q.insert(pos, r - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// The finite Weyl group W₀ = S_r.
pub fn finite_weyl(system: RootSystem) -> Vec<AffineWeylElement> {
    permutations(system.size()).iter().map(|p| AffineWeylElement::finite_element(system, p)).collect()
}

fn poincare_sum<'a>(elems: impl Iterator<Item = &'a AffineWeylElement>, q: &BigInt) -> BigInt {
    elems.map(|y| q.pow(weighted_length(y) as u32)).sum()
}

/// The double coset W₀·w·W₀ as a sorted, duplicate-free list.
pub fn double_coset(w: &AffineWeylElement) -> Vec<AffineWeylElement> {
    let w0 = finite_weyl(w.system);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for u in &w0 {
        for v in &w0 {
            let y = u.compose(w).compose(v).with_weights(&w.weights);
            if seen.insert(y.key()) {
                out.push(y);
            }
        }
    }
    out.sort_by_key(|y| y.key());
    out
}

/// Card(U·w·U / U) from the length formula. Non-dominant w is replaced by
/// its dominant representative first.
pub fn double_coset_size(w: &AffineWeylElement, q: u64) -> Result<BigRational> {
    if q < 2 {
        return Err(Error::InvalidArgument("residue field size must be at least 2".into()));
    }
    let qb = BigInt::from(q);
    let w = w.dominant();
    let num = poincare_sum(double_coset(&w).iter(), &qb);
    let den = poincare_sum(finite_weyl(w.system).iter(), &qb);
    Ok(BigRational::new(num, den))
}

/// Groups for the lattice oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleGroup {
    /// a = diag(p^m, p^(−m)) in SL₂.
    SL2,
    /// a = diag(p^m, 1, p^(−m)) in SL₃.
    SL3,
}

fn prime_arg(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p.to_string()));
    }
    Ok(())
}

/// Elementary divisors of an integer matrix, as exponents of p, from gcds
/// of minors.
fn elementary_exponents(m: &[Vec<i128>], p: u64) -> Vec<u32> {
    let r = m.len();
    let v = |x: i128| -> u32 {
        let mut x = x.unsigned_abs();
        let mut e = 0;
        while x % p as u128 == 0 {
            x /= p as u128;
            e += 1;
        }
        e
    };
    // valuation of the gcd of all j×j minors
    let mut prev = 0u32;
    let mut out = Vec::with_capacity(r);
    for size in 1..=r {
        let mut best = u32::MAX;
        let subsets: Vec<Vec<usize>> = (0..1usize << r)
            .filter(|s| s.count_ones() as usize == size)
            .map(|s| (0..r).filter(|i| s >> i & 1 == 1).collect())
            .collect();
        for rows in &subsets {
            for cols in &subsets {
                let d = small_det(m, rows, cols);
                if d != 0 {
                    best = best.min(v(d));
                }
            }
        }
        out.push(best - prev);
        prev = best;
    }
    out
}

fn small_det(m: &[Vec<i128>], rows: &[usize], cols: &[usize]) -> i128 {
    match rows.len() {
        1 => m[rows[0]][cols[0]],
        2 => m[rows[0]][cols[0]] * m[rows[1]][cols[1]] - m[rows[0]][cols[1]] * m[rows[1]][cols[0]],
        _ => {
            let mut acc = 0;
            for (k, &c) in cols.iter().enumerate() {
                let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let sign = if k % 2 == 0 { 1 } else { -1 };
                acc += sign * m[rows[0]][c] * small_det(m, &rows[1..], &rest);
            }
            acc
        }
    }
}

/// Count of left cosets gU inside U·a·U by listing lattices.
///
/// p^m·g·Z_p^r runs over the sublattices of Z_p^r whose quotient has the
/// elementary divisors of p^m·a. Each such sublattice has a unique upper
/// triangular Hermite basis with diagonal p^(e_i) and entries above the
/// diagonal reduced modulo the diagonal entry of their row; these bases are
/// listed and their elementary divisors checked. `budget` caps the number
/// of bases examined.
pub fn direct_coset_count(p: u64, m: u32, group: OracleGroup, budget: u64) -> Result<u64> {
    prime_arg(p)?;
    let (r, target): (usize, Vec<u32>) = match group {
        OracleGroup::SL2 => (2, vec![0, 2 * m]),
        OracleGroup::SL3 => (3, vec![0, m, 2 * m]),
    };
    let total: u32 = target.iter().sum();
    let mut count = 0u64;
    let mut examined = 0u64;
    // diagonal exponent vectors summing to `total`
    let mut diags = Vec::new();
    let mut cur = vec![0u32; r];
    fn split(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[i] = e;
            split(i + 1, left - e, cur, out);
        }
    }
    split(0, total, &mut cur, &mut diags);
    for diag in diags {
        let pe: Vec<i128> = diag.iter().map(|&e| (p as i128).pow(e)).collect();
        // free entries (i, j), i < j, ranging over 0..p^(e_i)
        let slots: Vec<(usize, usize)> = (0..r).flat_map(|i| (i + 1..r).map(move |j| (i, j))).collect();
        let sizes: Vec<i128> = slots.iter().map(|&(i, _)| pe[i]).collect();
        let combos: i128 = sizes.iter().product();
        if examined as i128 + combos > budget as i128 {
            return Err(Error::BudgetExceeded(format!(
                "examined {examined} Hermite bases, {count} cosets so far"
            )));
        }
        for idx in 0..combos {
            examined += 1;
            let mut m = vec![vec![0i128; r]; r];
            for i in 0..r {
                m[i][i] = pe[i];
            }
            let mut rest = idx;
            for (&(i, j), &sz) in slots.iter().zip(&sizes) {
                m[i][j] = rest % sz;
                rest /= sz;
            }
            let mut ed = elementary_exponents(&m, p);
            ed.sort_unstable();
            if ed == target {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Sizes along a sequence, with the lower bound and growth checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub q: u64,
    /// Formula values as strings (exact rationals).
    pub sizes: Vec<String>,
    pub lengths: Vec<u64>,
    /// Every non-identity element gives a size ≥ q.
    pub lower_bound_ok: bool,
    /// Sizes strictly increase along the sequence.
    pub strictly_increasing: bool,
}

pub fn growth_check(seq: &[AffineWeylElement], q: u64) -> Result<GrowthReport> {
    if seq.is_empty() {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    let sizes: Vec<BigRational> = seq.iter().map(|w| double_coset_size(w, q)).collect::<Result<_>>()?;
    let qb = BigRational::from_integer(BigInt::from(q));
    let lower_bound_ok = seq.iter().zip(&sizes).all(|(w, s)| w.dominant().length() == 0 || *s >= qb);
    let strictly_increasing = sizes.windows(2).all(|w| w[0] < w[1]);
    Ok(GrowthReport {
        q,
        sizes: sizes.iter().map(|s| s.to_string()).collect(),
        lengths: seq.iter().map(|w| w.dominant().length()).collect(),
        lower_bound_ok,
        strictly_increasing,
    })
}

/// Both sides of (1/c)·Card(VgV/V) ≤ Card(UgU/U) ≤ c·Card(VgV/V).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComparisonBounds {
    pub card_u: u64,
    pub card_v: u64,
    pub index: u64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

pub fn compact_open_comparison(card_u: u64, card_v: u64, index: u64) -> ComparisonBounds {
    let (u, v, c) = (card_u as u128, card_v as u128, index as u128);
    ComparisonBounds { card_u, card_v, index, lower_ok: v <= c * u, upper_ok: u <= c * v }
}

/// Counts for U = SL₂(Z_p), V = its level-p principal congruence subgroup
/// and g = diag(p^m, p^(−m)), computed inside SL₂(Z/p^N) with N = 2m + 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CongruenceScenario {
    pub p: u64,
    pub m: u32,
    pub modulus_exponent: u32,
    /// [U : V] = |SL₂(F_p)|.
    pub index: u64,
    /// Card(UgU/U) = [U : U ∩ gUg⁻¹].
    pub card_u: u64,
    /// Card(VgV/V) = [V : V ∩ gVg⁻¹].
    pub card_v: u64,
}

/// Number of (a, b, c, d) mod p^N with ad − bc = 1, a in `a_set`, b in
/// `b_set`, c in `c_set`, and d ≡ 1 mod p when `d_one`.
fn count_sl2(p: u64, n: u32, a_set: &[u64], b_set: &[u64], c_set: &[u64], d_one: bool) -> u64 {
    let q = p.pow(n);
    let mut total = 0u64;
    for &a in a_set {
        let va = {
            let mut x = a;
            let mut e = 0;
            while e < n && x % p == 0 {
                x /= p;
                e += 1;
            }
            e
        };
        let a_inv = if va == 0 {
            Some(crate::arith::mod_inverse(&BigInt::from(a), &BigInt::from(q)).expect("unit"))
        } else {
            None
        };
        for &b in b_set {
            for &c in c_set {
                let t = (1 + (b as u128 * c as u128) % q as u128) % q as u128;
                match &a_inv {
                    Some(inv) => {
                        let inv: u128 = inv.try_into().expect("small");
                        let d = (inv * t) % q as u128;
                        if !d_one || d % p as u128 == 1 % p as u128 {
                            total += 1;
                        }
                    }
                    None => {
                        // a·d ≡ t has p^va solutions when p^va | t
                        let pv = (p as u128).pow(va);
                        if t % pv == 0 {
                            debug_assert!(!d_one);
                            total += pv as u64;
                        }
                    }
                }
            }
        }
    }
    total
}

pub fn congruence_scenario(p: u64, m: u32) -> Result<CongruenceScenario> {
    prime_arg(p)?;
    let n = 2 * m + 1;
    let q = p
        .checked_pow(n)
        .filter(|q| q.checked_pow(3).is_some_and(|c| c <= 1 << 32))
        .ok_or_else(|| Error::BudgetExceeded(format!("SL2(Z/{p}^{n}) is too large to list")))?;
    let all: Vec<u64> = (0..q).collect();
    let ones: Vec<u64> = (0..q).filter(|x| x % p == 1 % p).collect();
    let zeros: Vec<u64> = (0..q).filter(|x| x % p == 0).collect();
    let b_deep = |e: u32| -> Vec<u64> { (0..q).filter(|x| x % p.pow(e.min(n)) == 0).collect() };
    let size_u = count_sl2(p, n, &all, &all, &all, false);
    let size_u_cap = count_sl2(p, n, &all, &b_deep(2 * m), &all, false);
    let size_v = count_sl2(p, n, &ones, &zeros, &zeros, true);
    let size_v_cap = count_sl2(p, n, &ones, &b_deep(2 * m + 1), &zeros, true);
    let index = size_u / size_v;
    Ok(CongruenceScenario {
        p,
        m,
        modulus_exponent: n,
        index,
        card_u: size_u / size_u_cap,
        card_v: size_v / size_v_cap,
    })
}

/// Exact integer value of a rational known to be integral.
pub fn as_integer(x: &BigRational) -> Option<BigInt> {
    x.is_integer().then(|| x.to_integer())
}

/// |SL₂(F_p)| = p(p² − 1).
pub fn sl2_order(p: u64) -> u64 {
    p * (p * p - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(system: RootSystem, l: &[i64]) -> AffineWeylElement {
        AffineWeylElement::translation(system, l).unwrap()
    }

    fn int(x: BigRational) -> u64 {
        as_integer(&x).unwrap().try_into().unwrap()
    }

    #[test]
    fn lengths() {
        use RootSystem::*;
        assert_eq!(AffineWeylElement::identity(A1).length(), 0);
        for i in 0..2 {
            assert_eq!(AffineWeylElement::generator(A1, i).length(), 1);
        }
        assert_eq!(t(A1, &[1, -1]).length(), 2);
        assert_eq!(weighted_length(&t(A1, &[1, -1])), 2);
        // dominant λ: l(t_λ) = Σ over positive roots of ⟨λ, α⟩
        assert_eq!(t(A2, &[1, 0, -1]).length(), 4);
        assert_eq!(t(A2, &[2, -1, -1]).length(), 6);
    }

    #[test]
    fn alcove_count_matches_word_search() {
        for system in [RootSystem::A1, RootSystem::A2] {
            let words = word_lengths(system, 8);
            assert!(words.len() > 10);
            for (w, d) in words {
                assert_eq!(w.length(), u64::from(d), "{w:?}");
                assert_eq!(w.reduced_word().len() as u32, d);
            }
        }
    }

    #[test]
    fn generators_are_involutions() {
        for system in [RootSystem::A1, RootSystem::A2] {
            for i in 0..system.generator_count() {
                let g = AffineWeylElement::generator(system, i);
                assert_eq!(g.compose(&g), AffineWeylElement::identity(system));
            }
        }
    }

    #[test]
    fn unequal_weights_follow_the_word() {
        let w = t(RootSystem::A1, &[1, -1]).with_weights(&[3, 1]);
        let word = w.reduced_word();
        let expect: u64 = word.iter().map(|&i| [3u64, 1][i]).sum();
        assert_eq!(weighted_length(&w), expect);
        assert_eq!(expect, 4);
    }

    #[test]
    fn formula_values() {
        assert_eq!(int(double_coset_size(&AffineWeylElement::identity(RootSystem::A1), 5).unwrap()), 1);
        assert_eq!(int(double_coset_size(&t(RootSystem::A1, &[1, -1]), 2).unwrap()), 6);
        // non-dominant input is normalised
        assert_eq!(
            double_coset_size(&t(RootSystem::A1, &[-2, 2]), 3).unwrap(),
            double_coset_size(&t(RootSystem::A1, &[2, -2]), 3).unwrap()
        );
        for m in 1..5u32 {
            for q in [2u64, 3, 5] {
                // SL₂: q^(2m−1)·(q + 1)
                let want = q.pow(2 * m - 1) * (q + 1);
                assert_eq!(int(double_coset_size(&t(RootSystem::A1, &[m as i64, -(m as i64)]), q).unwrap()), want);
            }
        }
    }

    #[test]
    fn oracle_small_cases() {
        assert_eq!(direct_coset_count(2, 0, OracleGroup::SL2, 1000).unwrap(), 1);
        assert_eq!(direct_coset_count(2, 1, OracleGroup::SL2, 1000).unwrap(), 6);
        assert!(matches!(direct_coset_count(3, 3, OracleGroup::SL3, 10), Err(Error::BudgetExceeded(_))));
        assert!(direct_coset_count(4, 1, OracleGroup::SL2, 1000).is_err());
    }

    #[test]
    fn formula_equals_oracle() {
        for p in [2u64, 3, 5] {
            for m in 0..4u32 {
                let w = t(RootSystem::A1, &[m as i64, -(m as i64)]);
                assert_eq!(
                    int(double_coset_size(&w, p).unwrap()),
                    direct_coset_count(p, m, OracleGroup::SL2, 1 << 24).unwrap(),
                    "SL2 p={p} m={m}"
                );
            }
        }
        for p in [2u64, 3] {
            let w = t(RootSystem::A2, &[1, 0, -1]);
            assert_eq!(
                int(double_coset_size(&w, p).unwrap()),
                direct_coset_count(p, 1, OracleGroup::SL3, 1 << 24).unwrap(),
                "SL3 p={p}"
            );
        }
    }

    #[test]
    fn growth() {
        let seq: Vec<_> = (1..=4).map(|m| t(RootSystem::A1, &[m, -m])).collect();
        let r = growth_check(&seq, 2).unwrap();
        assert!(r.lower_bound_ok && r.strictly_increasing);
        let seq: Vec<_> = (1..=3).map(|m| t(RootSystem::A2, &[m, 0, -m])).collect();
        let r = growth_check(&seq, 3).unwrap();
        assert!(r.lower_bound_ok && r.strictly_increasing);
        let r = growth_check(&[AffineWeylElement::identity(RootSystem::A2)], 3).unwrap();
        assert!(r.lower_bound_ok);
        assert_eq!(r.sizes, vec!["1".to_string()]);
    }

    #[test]
    fn congruence_subgroup_comparison() {
        let s = congruence_scenario(2, 1).unwrap();
        assert_eq!(s.index, 6);
        assert_eq!(s.card_u, 6);
        let b = compact_open_comparison(s.card_u, s.card_v, s.index);
        assert!(b.lower_ok && b.upper_ok);
        let s = congruence_scenario(3, 2).unwrap();
        assert_eq!(s.index, sl2_order(3));
        assert_eq!(s.card_u, direct_coset_count(3, 2, OracleGroup::SL2, 1 << 20).unwrap());
        let b = compact_open_comparison(s.card_u, s.card_v, s.index);
        assert!(b.lower_ok && b.upper_ok);
        let id = congruence_scenario(5, 0).unwrap();
        assert_eq!((id.card_u, id.card_v), (1, 1));
    }

    proptest! {
        #[test]
        fn length_is_subadditive(a in -3i64..4, b in -3i64..4, c in -3i64..4, d in -3i64..4, i in 0usize..6, j in 0usize..6) {
            let perms = permutations(3);
            let x = t(RootSystem::A2, &[a, b, -a - b]).compose(&AffineWeylElement::finite_element(RootSystem::A2, &perms[i]));
            let y = t(RootSystem::A2, &[c, d, -c - d]).compose(&AffineWeylElement::finite_element(RootSystem::A2, &perms[j]));
            prop_assert!(x.compose(&y).length() <= x.length() + y.length());
        }

        #[test]
        fn conjugating_a_translation_keeps_its_length(a in -4i64..5, b in -4i64..5, i in 0usize..6) {
            let perms = permutations(3);
            let u = AffineWeylElement::finite_element(RootSystem::A2, &perms[i]);
            let mut inv = vec![0; 3];
            for (k, &v) in perms[i].iter().enumerate() {
                inv[v] = k;
            }
            let u_inv = AffineWeylElement::finite_element(RootSystem::A2, &inv);
            let x = t(RootSystem::A2, &[a, b, -a - b]);
            let conj = u.compose(&x).compose(&u_inv);
            prop_assert_eq!(conj.finite.clone(), vec![0, 1, 2]);
            prop_assert_eq!(conj.length(), x.dominant().length());
        }
    }
}
