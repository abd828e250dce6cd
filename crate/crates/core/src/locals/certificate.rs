//! Hensel-type certificate that an approximate solution lifts to Z_p.
//!
//! For M with M*GM − n²G of valuation t, the correction
//! M ← M·(I + X) with X = −adj(G)·(M*GM − n²G) / (2n²·det G) is a
//! multiplicative Newton step. Writing a = t − 2v_p(n) and
//! κ = v_p(2) + v_p(det G) − v_p(adj G), the iteration converges whenever
//! a > 2κ, and the limit agrees with M modulo p^(a−κ) relative to n.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Pow, Zero};
use serde::Serialize;

use crate::arith::{mod_inverse, val_big, val_matrix, val_scalar, GaussMatrix, GaussianInt};
use crate::forms::{Form, FormKind};

/// Data showing that a witness modulo p^e lifts to an exact p-adic solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LiftCertificate {
    /// v_p(W*GW − n²G); `None` when the equation holds exactly.
    pub residual_valuation: Option<u32>,
    /// v_p(det W − n^k); `None` when exact.
    pub det_valuation: Option<u32>,
    /// κ = v_p(2) + v_p(det G) − v_p(adj G).
    pub kappa: u32,
    /// A sign fix by an integral reflection is available (quadratic forms).
    pub reflection: bool,
    /// Residual valuation after two Newton steps; `None` when exact.
    pub lifted_valuation: Option<u32>,
}

/// Per-form constants reused across witnesses.
#[derive(Clone, Debug)]
pub(crate) struct CertContext {
    pub kind: FormKind,
    pub k: usize,
    pub gram: GaussMatrix,
    pub adj: GaussMatrix,
    pub det: BigInt,
    pub p: u64,
    pub kappa: u32,
    pub reflection: bool,
}

impl CertContext {
    pub fn new(form: &Form, p: u64) -> CertContext {
        let gram = form.gram().clone();
        let adj = gram.adjugate();
        let det = form.det();
        let v2 = u32::from(p == 2);
        let kappa = v2 + val_big(&det, p).unwrap_or(0) - val_matrix(&adj, p).unwrap_or(0);
        let reflection = form.kind() == FormKind::Quadratic && has_integral_reflection(&gram, p);
        CertContext { kind: form.kind(), k: form.rank(), gram, adj, det, p, kappa, reflection }
    }

    /// Precision s that the determinant and the congruence must reach to
    /// pin det of the lifted solution to exactly n^k.
    pub fn sign_margin(&self) -> u32 {
        let v2 = u32::from(self.p == 2);
        match self.kind {
            FormKind::Quadratic => 1 + v2,
            FormKind::Hermitian => 1 + v2 + val_big(&BigInt::from(self.k), self.p).unwrap_or(0),
        }
    }

    /// Smallest level at which a node can satisfy [`certify`]'s inequalities.
    pub fn min_level(&self, m: u32) -> u32 {
        let s = self.sign_margin();
        let base = 2 * m + 2 * self.kappa + 1;
        if self.reflection {
            base
        } else {
            base.max(2 * m + self.kappa + s).max(self.k as u32 * m + s)
        }
    }

    fn residual(&self, w: &GaussMatrix, n2: &GaussianInt) -> GaussMatrix {
        w.adjoint().mul(&self.gram).mul(w).sub(&self.gram.scale(n2))
    }

    /// Check the lifting inequalities for `w` at level n.
    pub fn certify(&self, w: &GaussMatrix, n: u64) -> Option<LiftCertificate> {
        let p = self.p;
        let m = val_big(&BigInt::from(n), p).unwrap_or(0);
        let n2 = GaussianInt::from(BigInt::from(n) * BigInt::from(n));
        let t = val_matrix(&self.residual(w, &n2), p);
        let nk = GaussianInt::from(BigInt::from(n).pow(self.k as u32));
        let d = val_scalar(&(w.det() - nk), p);
        let s = self.sign_margin();
        if let Some(t) = t {
            if t < 2 * m {
                return None;
            }
            let a = t - 2 * m;
            if a <= 2 * self.kappa {
                return None;
            }
            if !self.reflection && a - self.kappa < s {
                return None;
            }
        }
        if let Some(d) = d {
            if !self.reflection && d < self.k as u32 * m + s {
                return None;
            }
        }
        let lifted = match t {
            None => None,
            Some(t) => {
                let mut cur = w.clone();
                let precision = 3 * t + 8;
                for _ in 0..2 {
                    cur = self.newton_step(&cur, n, &n2, precision);
                }
                Some(val_matrix(&self.residual(&cur, &n2), p).unwrap_or(precision).min(precision))
            }
        };
        Some(LiftCertificate {
            residual_valuation: t,
            det_valuation: d,
            kappa: self.kappa,
            reflection: self.reflection,
            lifted_valuation: lifted,
        })
    }

    /// One multiplicative Newton step, reduced mod p^precision.
    fn newton_step(&self, w: &GaussMatrix, n: u64, n2: &GaussianInt, precision: u32) -> GaussMatrix {
        let p = self.p;
        let q = BigInt::from(p).pow(precision);
        let num = self.adj.mul(&self.residual(w, n2));
        let denom = BigInt::from(2) * BigInt::from(n) * BigInt::from(n) * &self.det;
        let s0 = val_big(&denom, p).expect("nonzero");
        let ps0 = BigInt::from(p).pow(s0);
        let unit_inv = mod_inverse(&(&denom / &ps0), &q).expect("unit part");
        let x = num.map(|g| {
            let re = (&g.re / &ps0) * &unit_inv;
            let im = (&g.im / &ps0) * &unit_inv;
            debug_assert!((&g.re % &ps0).is_zero() && (&g.im % &ps0).is_zero());
            GaussianInt::new(re.mod_floor(&q), im.mod_floor(&q))
        });
        w.sub(&w.mul(&x)).map(|g| GaussianInt::new(g.re.mod_floor(&q), g.im.mod_floor(&q)))
    }
}

/// Whether some e_i or e_i + e_j gives a reflection x ↦ x − 2B(v,x)/q(v)·v
/// with p-integral coefficients.
fn has_integral_reflection(gram: &GaussMatrix, p: u64) -> bool {
    let k = gram.dim();
    let v2 = u32::from(p == 2);
    let mut candidates: Vec<Vec<i64>> = Vec::new();
    for i in 0..k {
        let mut v = vec![0; k];
        v[i] = 1;
        candidates.push(v);
        for j in i + 1..k {
            let mut v = vec![0; k];
            v[i] = 1;
            v[j] = 1;
            candidates.push(v);
        }
    }
    candidates.iter().any(|v| {
        let gv: Vec<BigInt> = (0..k)
            .map(|r| (0..k).map(|c| &gram.get(r, c).re * BigInt::from(v[c])).sum())
            .collect();
        let qv: BigInt = (0..k).map(|r| &gv[r] * BigInt::from(v[r])).sum();
        if qv.is_zero() {
            return false;
        }
        let vq = val_big(&qv, p).unwrap_or(0);
        let vgv = gv.iter().filter_map(|x| val_big(x, p)).min();
        match vgv {
            None => true,
            Some(vg) => v2 + vg >= vq,
        }
    })
}
