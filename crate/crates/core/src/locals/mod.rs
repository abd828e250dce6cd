//! Local solvability of M*·G·M = n²·G over Z_p with a unit entry and
//! det M = n^k, with certified witnesses or exhaustion certificates.

mod certificate;
mod witness;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Pow, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::{is_prime, prime_factors_u64, v_p, val_big, ContentConvention, GaussMatrix, GaussianInt};
use crate::error::{Error, Result};
use crate::forms::{real_part, Form, FormKind};
use crate::padic::{residues_to_matrix, CongruenceSystem, Level1Filter, SearchEnd};

pub use certificate::LiftCertificate;
use certificate::CertContext;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalOptions {
    /// Node budget of the lifting search.
    pub budget: u64,
    /// Largest precision the search may reach; default chosen per prime.
    pub max_e: Option<u32>,
    pub convention: ContentConvention,
}

impl Default for LocalOptions {
    fn default() -> Self {
        LocalOptions { budget: 200_000, max_e: None, convention: ContentConvention::Rational }
    }
}

/// How a yes-witness was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessRoute {
    /// n·Id, valid when p ∤ n.
    Scalar,
    /// Conjugated unipotent in a hyperbolic basis (odd good p, rank ≥ 5).
    Hyperbolic,
    /// Split torus element on an isotropic plane.
    Torus,
    /// Lifting search.
    Search,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalOutcome {
    Yes {
        /// Integer matrix; exact when `precision` is `None`, else meaningful
        /// modulo p^precision.
        witness: GaussMatrix,
        precision: Option<u32>,
        route: WitnessRoute,
        certificate: LiftCertificate,
    },
    /// No solution with a unit entry exists modulo p^exhausted_precision.
    No { exhausted_precision: u32 },
    Unknown { reason: String, nodes: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalVerdict {
    pub p: u64,
    pub n: u64,
    pub kind: FormKind,
    /// 2·v_p(n) + v_p(2·det) + 1, plus 2 at p = 2.
    pub e0: u32,
    pub outcome: LocalOutcome,
}

impl LocalVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self.outcome, LocalOutcome::Yes { .. })
    }

    pub fn is_no(&self) -> bool {
        matches!(self.outcome, LocalOutcome::No { .. })
    }

    pub fn label(&self) -> &'static str {
        match self.outcome {
            LocalOutcome::Yes { .. } => "yes",
            LocalOutcome::No { .. } => "no",
            LocalOutcome::Unknown { .. } => "unknown",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "p": self.p, "n": self.n, "e0": self.e0, "verdict": self.label() });
        match &self.outcome {
            LocalOutcome::Yes { witness, precision, route, certificate } => {
                v["witness"] = match self.kind {
                    FormKind::Quadratic => real_part(witness).to_json(),
                    FormKind::Hermitian => witness.to_json(),
                };
                v["precision"] = json!(precision);
                v["route"] = json!(route);
                v["certificate"] = json!(certificate);
            }
            LocalOutcome::No { exhausted_precision } => {
                v["exhausted_precision"] = json!(exhausted_precision);
            }
            LocalOutcome::Unknown { reason, nodes } => {
                v["reason"] = json!(reason);
                v["nodes"] = json!(nodes);
            }
        }
        v
    }
}

/// 2·v_p(n) + v_p(2·det G) + 1, with two extra levels at p = 2.
pub fn base_precision(form: &Form, n: u64, p: u64) -> u32 {
    let m = val_big(&BigInt::from(n), p).unwrap_or(0);
    let vd = val_big(&(BigInt::from(2) * form.det()), p).unwrap_or(0);
    2 * m + vd + 1 + if p == 2 { 2 } else { 0 }
}

fn unit_entry(w: &GaussMatrix, p: u64, convention: ContentConvention, kind: FormKind) -> bool {
    let pb = BigInt::from(p);
    w.entries().iter().any(|g| match (convention, kind, p) {
        (ContentConvention::Gaussian, FormKind::Hermitian, 2) => (&g.re - &g.im).is_odd(),
        _ => !(g.re.mod_floor(&pb).is_zero() && g.im.mod_floor(&pb).is_zero()),
    })
}

/// Decide whether some M ∈ M_k(Z_p) (resp. M_k(Z_p[i])) has
/// M*GM = n²G, det M = n^k and a unit entry.
pub fn local_solvable(form: &Form, n: u64, p: u64, opts: LocalOptions) -> Result<LocalVerdict> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p.to_string()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be ≥ 1".into()));
    }
    let k = form.rank();
    let m = v_p(n, p)?;
    let e0 = base_precision(form, n, p);
    let verdict = |outcome| LocalVerdict { p, n, kind: form.kind(), e0, outcome };
    let ctx = CertContext::new(form, p);
    if m == 0 {
        let witness = GaussMatrix::scalar(k, GaussianInt::from(n as i64));
        let certificate = ctx.certify(&witness, n).ok_or_else(|| {
            Error::SelfCheck("n·Id failed its own certificate".into())
        })?;
        return Ok(verdict(LocalOutcome::Yes { witness, precision: None, route: WitnessRoute::Scalar, certificate }));
    }
    let mut tried: Vec<(GaussMatrix, WitnessRoute)> = Vec::new();
    if form.kind() == FormKind::Quadratic && k >= 5 && p != 2 && !form.bad_primes()?.contains(&p) {
        tried.push((witness::hyperbolic_witness(form, n, p, m)?, WitnessRoute::Hyperbolic));
    }
    let torus_precision = ctx.min_level(m) + k as u32 * m + 8;
    if let Some(w) = witness::torus_witness(form, n, p, m, torus_precision) {
        tried.push((w, WitnessRoute::Torus));
    }
    for (w, route) in tried {
        if let Some(out) = accept_witness(form, &ctx, w, n, p, route, opts.convention) {
            return Ok(verdict(out));
        }
    }
    Ok(verdict(search(form, &ctx, n, p, m, e0, opts)?))
}

/// Certify and self-check a candidate witness.
fn accept_witness(
    form: &Form,
    ctx: &CertContext,
    w: GaussMatrix,
    n: u64,
    p: u64,
    route: WitnessRoute,
    convention: ContentConvention,
) -> Option<LocalOutcome> {
    if !unit_entry(&w, p, convention, form.kind()) {
        return None;
    }
    let certificate = ctx.certify(&w, n)?;
    let precision = match (certificate.residual_valuation, certificate.det_valuation) {
        (None, None) => None,
        (Some(t), None) => Some(t),
        (None, Some(d)) => Some(d),
        (Some(t), Some(d)) => Some(t.min(d)),
    };
    let out = LocalOutcome::Yes { witness: w, precision, route, certificate };
    verify_yes(form, n, p, &out).then_some(out)
}

/// Exact re-multiplication check of a yes-verdict.
pub fn verify_yes(form: &Form, n: u64, p: u64, outcome: &LocalOutcome) -> bool {
    let LocalOutcome::Yes { witness, precision, .. } = outcome else {
        return false;
    };
    let k = form.rank();
    let nb = BigInt::from(n);
    let lhs = witness.adjoint().mul(form.gram()).mul(witness);
    let rhs = form.gram().scale(&GaussianInt::from(&nb * &nb));
    let det_diff = witness.det() - GaussianInt::from(nb.pow(k as u32));
    let zero_mod = |g: &GaussianInt| match precision {
        None => g.re.is_zero() && g.im.is_zero(),
        Some(e) => {
            let q = BigInt::from(p).pow(*e);
            g.re.mod_floor(&q).is_zero() && g.im.mod_floor(&q).is_zero()
        }
    };
    let eq_ok = lhs.sub(&rhs).entries().iter().all(zero_mod);
    let unit = witness.entries().iter().any(|g| {
        let pb = BigInt::from(p);
        !(g.re.mod_floor(&pb).is_zero() && g.im.mod_floor(&pb).is_zero())
    });
    eq_ok && zero_mod(&det_diff) && unit
}

fn search(
    form: &Form,
    ctx: &CertContext,
    n: u64,
    p: u64,
    m: u32,
    e0: u32,
    opts: LocalOptions,
) -> Result<LocalOutcome> {
    let k = form.rank();
    let need = ctx.min_level(m);
    let max_e = opts.max_e.unwrap_or_else(|| e0.max(need) + 2).max(1);
    let nb = BigInt::from(n);
    let target = GaussianInt::from((&nb).pow(k as u32));
    let sys = match CongruenceSystem::new(
        form.kind() == FormKind::Hermitian,
        form.gram(),
        &form.gram().scale(&GaussianInt::from(&nb * &nb)),
        Some(&target),
        p,
        max_e,
        Level1Filter::UnitEntry(opts.convention),
    ) {
        Ok(s) => s,
        Err(Error::Overflow(msg)) => return Ok(LocalOutcome::Unknown { reason: msg, nodes: 0 }),
        Err(e) => return Err(e),
    };
    let report = sys.search(opts.budget, |x, level| {
        if level < need {
            return None;
        }
        let w = residues_to_matrix(x, k);
        accept_witness(form, ctx, w, n, p, WitnessRoute::Search, opts.convention)
    });
    Ok(match report.end {
        SearchEnd::Accepted { value, .. } => value,
        SearchEnd::Exhausted { level } => LocalOutcome::No { exhausted_precision: level },
        SearchEnd::PrecisionCap => LocalOutcome::Unknown {
            reason: format!("survivors at {p}^{max_e} without a lifting certificate"),
            nodes: report.nodes,
        },
        SearchEnd::Budget => LocalOutcome::Unknown {
            reason: format!("node budget {} exhausted", opts.budget),
            nodes: report.nodes,
        },
    })
}

/// Local verdicts at every prime dividing n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalProfile {
    pub n: u64,
    pub verdicts: Vec<LocalVerdict>,
}

impl LocalProfile {
    /// `Some(true)` if every verdict is yes, `Some(false)` if some verdict is
    /// no, `None` otherwise.
    pub fn member(&self) -> Option<bool> {
        if self.verdicts.iter().any(LocalVerdict::is_no) {
            Some(false)
        } else if self.verdicts.iter().all(LocalVerdict::is_yes) {
            Some(true)
        } else {
            None
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "member": self.member(),
            "verdicts": self.verdicts.iter().map(LocalVerdict::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Run [`local_solvable`] at each prime divisor of n (in parallel, merged
/// in increasing prime order).
pub fn local_profile(form: &Form, n: u64, opts: LocalOptions) -> Result<LocalProfile> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be ≥ 1".into()));
    }
    let primes = prime_factors_u64(n);
    let verdicts = primes
        .par_iter()
        .map(|&p| local_solvable(form, n, p, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalProfile { n, verdicts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::IntMatrix;

    fn id(k: usize) -> Form {
        Form::identity(FormKind::Quadratic, k).unwrap()
    }

    #[test]
    fn scalar_witness_when_p_does_not_divide_n() {
        let v = local_solvable(&id(3), 5, 3, LocalOptions::default()).unwrap();
        match v.outcome {
            LocalOutcome::Yes { witness, precision, route, .. } => {
                assert_eq!(witness, GaussMatrix::scalar(3, GaussianInt::from(5)));
                assert_eq!(precision, None);
                assert_eq!(route, WitnessRoute::Scalar);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sum_of_three_squares_obstruction_at_two() {
        let v = local_solvable(&id(3), 2, 2, LocalOptions::default()).unwrap();
        assert!(v.is_no(), "{v:?}");
        let prof = local_profile(&id(3), 6, LocalOptions::default()).unwrap();
        assert_eq!(prof.member(), Some(false));
    }

    #[test]
    fn hyperbolic_witness_for_rank_five() {
        let f = id(5);
        let v = local_solvable(&f, 9, 3, LocalOptions::default()).unwrap();
        match &v.outcome {
            LocalOutcome::Yes { witness, precision, route, .. } => {
                assert_eq!(*route, WitnessRoute::Hyperbolic);
                assert!(precision.unwrap() >= 5);
                // the witness is n·g with g of exact denominator p^2
                let content = witness.entries().iter().filter_map(|g| val_big(&g.re, 3)).min();
                assert_eq!(content, Some(0));
                assert!(verify_yes(&f, 9, 3, &v.outcome));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn profiles() {
        assert_eq!(local_profile(&id(3), 1, LocalOptions::default()).unwrap().member(), Some(true));
        let prof = local_profile(&id(3), 15, LocalOptions::default()).unwrap();
        assert_eq!(prof.verdicts.iter().map(|v| v.p).collect::<Vec<_>>(), vec![3, 5]);
        assert_eq!(prof.member(), Some(true), "{prof:?}");
    }

    #[test]
    fn rank_five_two_adic_torus() {
        for n in [2u64, 4, 8, 16] {
            let v = local_solvable(&id(5), n, 2, LocalOptions::default()).unwrap();
            assert!(v.is_yes(), "n = {n}: {v:?}");
            assert!(verify_yes(&id(5), n, 2, &v.outcome));
        }
    }

    #[test]
    fn hermitian_local_checks() {
        let h = Form::identity(FormKind::Hermitian, 2).unwrap();
        for (n, p) in [(3u64, 3u64), (5, 5), (2, 2)] {
            let v = local_solvable(&h, n, p, LocalOptions::default()).unwrap();
            assert!(!matches!(v.outcome, LocalOutcome::Unknown { .. }) || p == 2, "{v:?}");
            if v.is_yes() {
                assert!(verify_yes(&h, n, p, &v.outcome));
            }
        }
    }

    #[test]
    fn non_diagonal_forms() {
        let f = Form::quadratic(&IntMatrix::from_rows(&[[2, 1, 0], [1, 2, 1], [0, 1, 2]]).unwrap()).unwrap();
        for (n, p) in [(3u64, 3u64), (5, 5), (7, 7), (2, 2)] {
            let v = local_solvable(&f, n, p, LocalOptions::default()).unwrap();
            if v.is_yes() {
                assert!(verify_yes(&f, n, p, &v.outcome));
            }
        }
    }
}
