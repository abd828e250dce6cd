//! Positive-definite integral quadratic and hermitian forms.

mod genus;
mod reduce;

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::arith::{prime_factors, GaussMatrix, IntMatrix, Matrix};
use crate::error::{Error, Result};

pub use genus::{genus_equivalent, hilbert_symbol, DistinctReason, GenusOptions, GenusVerdict};
pub use reduce::{
    hyperbolic_reduce, padic_diagonalize, sqrt_mod_prime_power, sum_of_two_squares_padic,
    HyperbolicReduction, PAdicBasisChange,
};

/// Quadratic forms live over Z, hermitian forms over Z[i].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    Quadratic,
    Hermitian,
}

impl FormKind {
    /// Real coordinates per matrix entry.
    pub fn parts(self) -> usize {
        match self {
            FormKind::Quadratic => 1,
            FormKind::Hermitian => 2,
        }
    }
}

/// A positive-definite form given by its Gram matrix.
///
/// Quadratic Gram matrices are stored with zero imaginary parts so that
/// both kinds share one representation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Form {
    kind: FormKind,
    gram: GaussMatrix,
}

/// Whether every leading principal minor of `gram` is positive.
///
/// Hermitian minors are real; they are computed exactly over Z[i].
pub fn is_positive_definite(kind: FormKind, gram: &GaussMatrix) -> Result<bool> {
    check_shape(kind, gram)?;
    Ok(leading_minors(gram).iter().all(|d| d.is_positive()))
}

fn check_shape(kind: FormKind, gram: &GaussMatrix) -> Result<()> {
    if kind == FormKind::Quadratic && gram.entries().iter().any(|g| !g.im.is_zero()) {
        return Err(Error::InvalidArgument("quadratic Gram matrix must be real".into()));
    }
    if !gram.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    Ok(())
}

fn leading_minors(gram: &GaussMatrix) -> Vec<BigInt> {
    (1..=gram.dim()).map(|i| gram.leading(i).det().re).collect()
}

impl Form {
    pub fn new(kind: FormKind, gram: GaussMatrix) -> Result<Form> {
        if gram.dim() == 0 {
            return Err(Error::InvalidArgument("rank must be positive".into()));
        }
        if !is_positive_definite(kind, &gram)? {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Form { kind, gram })
    }

    pub fn quadratic(gram: &IntMatrix) -> Result<Form> {
        Form::new(FormKind::Quadratic, gram.to_gaussian())
    }

    pub fn hermitian(gram: GaussMatrix) -> Result<Form> {
        Form::new(FormKind::Hermitian, gram)
    }

    /// The standard form x₁² + … + x_k² (or |z₁|² + … + |z_k|²).
    pub fn identity(kind: FormKind, k: usize) -> Result<Form> {
        Form::new(kind, GaussMatrix::identity(k))
    }

    /// Quadratic form from integer rows, e.g. `Form::from_rows(&[[2, 1], [1, 2]])`.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Form> {
        Form::quadratic(&IntMatrix::from_rows(rows)?)
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.gram.dim()
    }

    pub fn gram(&self) -> &GaussMatrix {
        &self.gram
    }

    /// Integer Gram matrix of a quadratic form.
    pub fn quadratic_gram(&self) -> Option<IntMatrix> {
        (self.kind == FormKind::Quadratic).then(|| real_part(&self.gram))
    }

    /// det(gram), a positive rational integer for both kinds.
    pub fn det(&self) -> BigInt {
        self.gram.det().re
    }

    pub fn leading_minors(&self) -> Vec<BigInt> {
        leading_minors(&self.gram)
    }

    /// Short human-readable label, e.g. `quadratic[[2,1],[1,2]]`.
    pub fn label(&self) -> String {
        let gram = match self.kind {
            FormKind::Quadratic => real_part(&self.gram).to_json(),
            FormKind::Hermitian => self.gram.to_json(),
        };
        format!("{}{}", kind_name(self.kind), gram)
    }

    pub fn to_json(&self) -> Value {
        let gram = match self.kind {
            FormKind::Quadratic => real_part(&self.gram).to_json(),
            FormKind::Hermitian => self.gram.to_json(),
        };
        json!({ "kind": kind_name(self.kind), "gram": gram })
    }

    pub fn from_json(v: &Value) -> Result<Form> {
        let kind = match v.get("kind").and_then(Value::as_str) {
            Some("quadratic") => FormKind::Quadratic,
            Some("hermitian") => FormKind::Hermitian,
            Some(other) => return Err(Error::Parse(format!("unknown form kind {other:?}"))),
            None => return Err(Error::Parse("form needs a \"kind\"".into())),
        };
        let gram = v.get("gram").ok_or_else(|| Error::Parse("form needs a \"gram\"".into()))?;
        let gram = match kind {
            FormKind::Quadratic => IntMatrix::from_json(gram)?.to_gaussian(),
            FormKind::Hermitian => GaussMatrix::from_json(gram)?,
        };
        Form::new(kind, gram)
    }

    /// Upper-triangular C with C*·C = gram.
    pub fn real_embedding(&self, tol: f64) -> Result<RealEmbedding> {
        let k = self.rank();
        let g = DMatrix::from_fn(k, k, |i, j| {
            let e = self.gram.get(i, j);
            Complex64::new(to_f64(&e.re), to_f64(&e.im))
        });
        let chol = nalgebra::Cholesky::new(g.clone()).ok_or(Error::NotPositiveDefinite)?;
        let c = chol.l().adjoint();
        let residual = (c.adjoint() * &c - g).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if residual > tol {
            return Err(Error::ResidualTooLarge { residual, cap: tol });
        }
        Ok(RealEmbedding { c, residual })
    }

    /// A finite set of primes containing 2, every prime dividing det(gram)
    /// and every prime dividing a pivot of the rational LDLᵀ
    /// decomposition (the pivots are ratios of leading minors).
    pub fn bad_primes(&self) -> Result<BTreeSet<u64>> {
        let mut out = BTreeSet::from([2u64]);
        for d in self.leading_minors() {
            out.extend(prime_factors(&d)?);
        }
        Ok(out)
    }
}

fn kind_name(kind: FormKind) -> &'static str {
    match kind {
        FormKind::Quadratic => "quadratic",
        FormKind::Hermitian => "hermitian",
    }
}

pub(crate) fn real_part(m: &GaussMatrix) -> IntMatrix {
    Matrix::new(m.dim(), m.entries().iter().map(|g| g.re.clone()).collect()).expect("square")
}

pub(crate) fn to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

impl Serialize for Form {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Form {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Form::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// Cholesky factor of a Gram matrix.
#[derive(Clone, Debug)]
pub struct RealEmbedding {
    /// Upper triangular, C*·C = gram up to `residual`.
    pub c: DMatrix<Complex64>,
    /// ‖C*C − gram‖∞.
    pub residual: f64,
}
