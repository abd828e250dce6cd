//! Genus comparison: rational invariants plus p-adic witnesses at bad primes.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Pow, Signed, Zero};
use serde::Serialize;

use super::{real_part, Form, FormKind, PAdicBasisChange};
use crate::arith::{val_big, IntMatrix};
use crate::error::{Error, Result};
use crate::padic::{residues_to_matrix, CongruenceSystem, Level1Filter, SearchEnd};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenusOptions {
    /// Witness precision; default 2·v_p(det) + 3 per prime.
    pub precision: Option<u32>,
    /// Node budget of each p-adic witness search.
    pub budget: u64,
}

impl Default for GenusOptions {
    fn default() -> Self {
        GenusOptions { precision: None, budget: 200_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "invariant", rename_all = "snake_case")]
pub enum DistinctReason {
    /// det Q / det Q′ is not a rational square.
    DeterminantClass,
    Signature,
    HasseWitt { p: u64 },
    /// No g with gᵗQg ≡ Q′ and det g a unit exists modulo p^precision.
    Local { p: u64, precision: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum GenusVerdict {
    SameGenus { witnesses: Vec<PAdicBasisChange> },
    Distinct { reason: DistinctReason },
    Undetermined { p: u64, precision: u32, nodes: u64 },
}

/// Hilbert symbol (a, b)_p of nonzero integers.
pub fn hilbert_symbol(a: &BigInt, b: &BigInt, p: u64) -> i32 {
    assert!(!a.is_zero() && !b.is_zero(), "Hilbert symbol of zero");
    let split = |x: &BigInt| {
        let v = val_big(x, p).expect("nonzero");
        (v, x / BigInt::from(p).pow(v))
    };
    let (alpha, u) = split(a);
    let (beta, v) = split(b);
    if p == 2 {
        let eps = |x: &BigInt| ((x.mod_floor(&BigInt::from(4)) - 1) / 2) == BigInt::from(1);
        let omega = |x: &BigInt| {
            let r = x.mod_floor(&BigInt::from(8));
            r == BigInt::from(3) || r == BigInt::from(5)
        };
        let mut odd = eps(&u) && eps(&v);
        odd ^= alpha % 2 == 1 && omega(&v);
        odd ^= beta % 2 == 1 && omega(&u);
        return if odd { -1 } else { 1 };
    }
    let mut s = if (alpha * beta) % 2 == 1 && (p % 4 == 3) { -1 } else { 1 };
    if beta % 2 == 1 {
        s *= super::reduce::legendre(&u, p);
    }
    if alpha % 2 == 1 {
        s *= super::reduce::legendre(&v, p);
    }
    s
}

/// Square-class representatives of a rational diagonalisation.
fn rational_diagonal(f: &Form) -> Vec<BigInt> {
    let minors = f.leading_minors();
    let mut out = vec![minors[0].clone()];
    out.extend(minors.windows(2).map(|w| &w[0] * &w[1]));
    out
}

fn hasse_witt(diag: &[BigInt], p: u64) -> i32 {
    let mut s = 1;
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            s *= hilbert_symbol(&diag[i], &diag[j], p);
        }
    }
    s
}

fn is_square(x: &BigInt) -> bool {
    !x.is_negative() && {
        let r = x.sqrt();
        &r * &r == *x
    }
}

/// Decide whether two positive-definite quadratic forms lie in the same
/// genus.
///
/// Rational equivalence is decided by the determinant class, signature and
/// Hasse–Witt invariants at the combined bad primes. At 2 and at each prime
/// dividing a determinant a change of basis g_p with g_pᵗ·Q·g_p ≡ Q′ is
/// searched for; at every other prime both forms are unimodular with
/// square-class determinant ratio, hence equivalent.
pub fn genus_equivalent(f: &Form, g: &Form, opts: GenusOptions) -> Result<GenusVerdict> {
    if f.kind() != FormKind::Quadratic || g.kind() != FormKind::Quadratic {
        return Err(Error::Unsupported("genus comparison of hermitian forms".into()));
    }
    if f.rank() != g.rank() {
        return Err(Error::DimensionMismatch(format!("ranks {} and {}", f.rank(), g.rank())));
    }
    // both forms are positive definite by construction, so signatures agree
    if !is_square(&(f.det() * g.det())) {
        return Ok(GenusVerdict::Distinct { reason: DistinctReason::DeterminantClass });
    }
    let primes: BTreeSet<u64> = f.bad_primes()?.union(&g.bad_primes()?).copied().collect();
    let (df, dg) = (rational_diagonal(f), rational_diagonal(g));
    for &p in &primes {
        if hasse_witt(&df, p) != hasse_witt(&dg, p) {
            return Ok(GenusVerdict::Distinct { reason: DistinctReason::HasseWitt { p } });
        }
    }
    let (qf, qg) = (real_part(f.gram()), real_part(g.gram()));
    let det = f.det();
    let mut witnesses = Vec::new();
    for &p in &primes {
        if p != 2 && !(&det % p).is_zero() {
            continue;
        }
        let e = opts.precision.unwrap_or_else(|| 2 * val_big(&det, p).unwrap_or(0) + 3);
        match local_witness(&qf, &qg, p, e, opts.budget)? {
            LocalSearch::Found(w) => witnesses.push(w),
            LocalSearch::Impossible => {
                return Ok(GenusVerdict::Distinct { reason: DistinctReason::Local { p, precision: e } })
            }
            LocalSearch::Budget(nodes) => {
                return Ok(GenusVerdict::Undetermined { p, precision: e, nodes })
            }
        }
    }
    Ok(GenusVerdict::SameGenus { witnesses })
}

enum LocalSearch {
    Found(PAdicBasisChange),
    Impossible,
    Budget(u64),
}

fn local_witness(a: &IntMatrix, b: &IntMatrix, p: u64, e: u32, budget: u64) -> Result<LocalSearch> {
    let q = BigInt::from(p).pow(e);
    if a.entries().iter().zip(b.entries()).all(|(x, y)| (x - y).mod_floor(&q).is_zero()) {
        return Ok(LocalSearch::Found(PAdicBasisChange { p, e, g: IntMatrix::identity(a.dim()) }));
    }
    let sys = CongruenceSystem::new(
        false,
        &a.to_gaussian(),
        &b.to_gaussian(),
        None,
        p,
        e,
        Level1Filter::UnitDeterminant,
    )?;
    let k = a.dim();
    let report = sys.search(budget, |x, level| (level == e).then(|| x.to_vec()));
    match report.end {
        SearchEnd::Accepted { value, .. } => {
            let g = real_part(&residues_to_matrix(&value, k));
            let w = PAdicBasisChange { p, e, g };
            if !w.transforms(a, b) || !w.is_invertible() {
                return Err(Error::SelfCheck(format!("genus witness at {p} failed verification")));
            }
            Ok(LocalSearch::Found(w))
        }
        SearchEnd::Exhausted { .. } => Ok(LocalSearch::Impossible),
        SearchEnd::Budget | SearchEnd::PrecisionCap => Ok(LocalSearch::Budget(report.nodes)),
    }
}
