//! Exact arithmetic: rational and Gaussian integers, square matrices over
//! them, contents, denominators and p-adic valuations.
//!
//! Nothing in here touches floating point.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Element of the ring Z[i].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GaussianInt {
    pub re: BigInt,
    pub im: BigInt,
}

impl GaussianInt {
    pub fn new(re: impl Into<BigInt>, im: impl Into<BigInt>) -> Self {
        GaussianInt { re: re.into(), im: im.into() }
    }

    pub fn i() -> Self {
        GaussianInt::new(0, 1)
    }

    pub fn conj(&self) -> Self {
        GaussianInt { re: self.re.clone(), im: -&self.im }
    }

    /// a² + b².
    pub fn norm(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Exact quotient, or `None` when `other` does not divide `self`.
    pub fn checked_div(&self, other: &GaussianInt) -> Option<GaussianInt> {
        let n = other.norm();
        if n.is_zero() {
            return None;
        }
        let num = self * &other.conj();
        if (&num.re % &n).is_zero() && (&num.im % &n).is_zero() {
            Some(GaussianInt { re: num.re / &n, im: num.im / n })
        } else {
            None
        }
    }

    /// True when 1+i divides this element, i.e. re ≡ im mod 2.
    pub fn divisible_by_one_plus_i(&self) -> bool {
        ((&self.re - &self.im) % 2i32).is_zero()
    }
}

impl fmt::Debug for GaussianInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GaussianInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -&self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl From<i64> for GaussianInt {
    fn from(v: i64) -> Self {
        GaussianInt::new(v, 0)
    }
}

impl From<BigInt> for GaussianInt {
    fn from(v: BigInt) -> Self {
        GaussianInt { re: v, im: BigInt::zero() }
    }
}

impl<'a> Add<&'a GaussianInt> for &'a GaussianInt {
    type Output = GaussianInt;
    fn add(self, o: &GaussianInt) -> GaussianInt {
        GaussianInt { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'a> Sub<&'a GaussianInt> for &'a GaussianInt {
    type Output = GaussianInt;
    fn sub(self, o: &GaussianInt) -> GaussianInt {
        GaussianInt { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a> Mul<&'a GaussianInt> for &'a GaussianInt {
    type Output = GaussianInt;
    fn mul(self, o: &GaussianInt) -> GaussianInt {
        GaussianInt {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Add for GaussianInt {
    type Output = GaussianInt;
    fn add(self, o: GaussianInt) -> GaussianInt {
        &self + &o
    }
}

impl Sub for GaussianInt {
    type Output = GaussianInt;
    fn sub(self, o: GaussianInt) -> GaussianInt {
        &self - &o
    }
}

impl Mul for GaussianInt {
    type Output = GaussianInt;
    fn mul(self, o: GaussianInt) -> GaussianInt {
        &self * &o
    }
}

impl Neg for GaussianInt {
    type Output = GaussianInt;
    fn neg(self) -> GaussianInt {
        GaussianInt { re: -self.re, im: -self.im }
    }
}

impl Zero for GaussianInt {
    fn zero() -> Self {
        GaussianInt::new(0, 0)
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussianInt {
    fn one() -> Self {
        GaussianInt::new(1, 0)
    }
}

/// Coefficient ring of a matrix: Z or Z[i].
pub trait Scalar:
    Clone
    + Eq
    + Ord
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
{
    /// Complex conjugation (identity on Z).
    fn conj(&self) -> Self;
    /// Exact division; `None` if the quotient is not in the ring.
    fn checked_div(&self, other: &Self) -> Option<Self>;
    /// Rational-integer coordinates (one for Z, two for Z[i]).
    fn int_parts(&self) -> Vec<&BigInt>;
    fn from_int(v: BigInt) -> Self;
    /// Coordinates over Z, padded to `Self::PARTS` entries.
    const PARTS: usize;
    fn from_parts(parts: &[BigInt]) -> Self;
}

impl Scalar for BigInt {
    fn conj(&self) -> Self {
        self.clone()
    }
    fn checked_div(&self, other: &Self) -> Option<Self> {
        if other.is_zero() {
            return None;
        }
        let (q, r) = self.div_rem(other);
        r.is_zero().then_some(q)
    }
    fn int_parts(&self) -> Vec<&BigInt> {
        vec![self]
    }
    fn from_int(v: BigInt) -> Self {
        v
    }
    const PARTS: usize = 1;
    fn from_parts(parts: &[BigInt]) -> Self {
        parts[0].clone()
    }
}

impl Scalar for GaussianInt {
    fn conj(&self) -> Self {
        GaussianInt::conj(self)
    }
    fn checked_div(&self, other: &Self) -> Option<Self> {
        GaussianInt::checked_div(self, other)
    }
    fn int_parts(&self) -> Vec<&BigInt> {
        vec![&self.re, &self.im]
    }
    fn from_int(v: BigInt) -> Self {
        GaussianInt { re: v, im: BigInt::zero() }
    }
    const PARTS: usize = 2;
    fn from_parts(parts: &[BigInt]) -> Self {
        GaussianInt { re: parts[0].clone(), im: parts[1].clone() }
    }
}

/// Square matrix stored row-major.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix<T> {
    dim: usize,
    entries: Vec<T>,
}

pub type IntMatrix = Matrix<BigInt>;
pub type GaussMatrix = Matrix<GaussianInt>;

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = self.entries.chunks(self.dim.max(1)).collect();
        f.debug_list().entries(rows).finish()
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn new(dim: usize, entries: Vec<T>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        Ok(Matrix { dim, entries })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Matrix { dim, entries }
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch("ragged rows".into()));
            }
            entries.extend(r.iter().map(|&v| T::from_int(BigInt::from(v))));
        }
        Matrix::new(dim, entries)
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, T::one())
    }

    pub fn scalar(dim: usize, c: T) -> Self {
        Matrix::from_fn(dim, |i, j| if i == j { c.clone() } else { T::zero() })
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let dim = diag.len();
        Matrix::from_fn(dim, |i, j| if i == j { diag[i].clone() } else { T::zero() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.dim).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> Self {
        Matrix { dim: self.dim, entries: self.entries.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.dim, |i, j| self.get(j, i).clone())
    }

    /// Conjugate transpose M*.
    pub fn adjoint(&self) -> Self {
        Matrix::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Matrix::from_fn(self.dim, |i, j| self.get(i, j).clone() + other.get(i, j).clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Matrix::from_fn(self.dim, |i, j| self.get(i, j).clone() - other.get(i, j).clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let k = self.dim;
        Matrix::from_fn(k, |i, j| {
            let mut acc = T::zero();
            for l in 0..k {
                acc = acc + self.get(i, l).clone() * other.get(l, j).clone();
            }
            acc
        })
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| *self.get(i, j) == self.get(j, i).conj()))
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> T {
        let k = self.dim;
        let mut a = self.entries.clone();
        let mut sign = false;
        let mut prev = T::one();
        for c in 0..k {
            if a[c * k + c].is_zero() {
                match (c + 1..k).find(|&r| !a[r * k + c].is_zero()) {
                    Some(r) => {
                        for j in 0..k {
                            a.swap(c * k + j, r * k + j);
                        }
                        sign = !sign;
                    }
                    None => return T::zero(),
                }
            }
            for i in c + 1..k {
                for j in c + 1..k {
                    let v = a[i * k + j].clone() * a[c * k + c].clone()
                        - a[i * k + c].clone() * a[c * k + j].clone();
                    a[i * k + j] = v.checked_div(&prev).expect("Bareiss division is exact");
                }
            }
            prev = a[c * k + c].clone();
        }
        let d = a[k * k - 1].clone();
        if sign {
            -d
        } else {
            d
        }
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det_cofactor(&self) -> T {
        fn rec<T: Scalar>(m: &[T], k: usize) -> T {
            if k == 1 {
                return m[0].clone();
            }
            let mut acc = T::zero();
            for c in 0..k {
                if m[c].is_zero() {
                    continue;
                }
                let minor: Vec<T> = (1..k)
                    .flat_map(|i| (0..k).filter(move |&j| j != c).map(move |j| (i, j)))
                    .map(|(i, j)| m[i * k + j].clone())
                    .collect();
                let term = m[c].clone() * rec(&minor, k - 1);
                acc = if c % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        }
        rec(&self.entries, self.dim)
    }

    /// Minor with row `r` and column `c` removed (None when dim = 1).
    pub fn minor(&self, r: usize, c: usize) -> Option<Self> {
        if self.dim == 1 {
            return None;
        }
        let entries = (0..self.dim)
            .filter(|&i| i != r)
            .flat_map(|i| (0..self.dim).filter(move |&j| j != c).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        Some(Matrix { dim: self.dim - 1, entries })
    }

    /// Adjugate: adj(M)·M = det(M)·Id.
    pub fn adjugate(&self) -> Self {
        if self.dim == 1 {
            return Matrix::identity(1);
        }
        Matrix::from_fn(self.dim, |i, j| {
            let d = self.minor(j, i).expect("dim > 1").det();
            if (i + j) % 2 == 0 {
                d
            } else {
                -d
            }
        })
    }

    /// Leading principal k×k submatrix.
    pub fn leading(&self, k: usize) -> Self {
        Matrix::from_fn(k, |i, j| self.get(i, j).clone())
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let d = self.dim + other.dim;
        Matrix::from_fn(d, |i, j| match (i < self.dim, j < self.dim) {
            (true, true) => self.get(i, j).clone(),
            (false, false) => other.get(i - self.dim, j - self.dim).clone(),
            _ => T::zero(),
        })
    }
}

impl IntMatrix {
    pub fn to_gaussian(&self) -> GaussMatrix {
        Matrix {
            dim: self.dim,
            entries: self.entries.iter().map(|v| GaussianInt::from_int(v.clone())).collect(),
        }
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.dim).map(|i| self.row(i).iter().map(|v| v.to_i64()).collect()).collect()
    }
}

/// Which notion of "coprime entries" a Z[i]-matrix must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContentConvention {
    /// No rational prime divides every coordinate.
    #[default]
    Rational,
    /// No Gaussian prime divides every entry; stricter only at 1+i.
    Gaussian,
}

/// Largest positive integer dividing every coordinate of every entry.
pub fn content_z<T: Scalar>(m: &Matrix<T>) -> Result<BigInt> {
    let mut g = BigInt::zero();
    for e in m.entries() {
        for part in e.int_parts() {
            g = g.gcd(part);
        }
    }
    if g.is_zero() {
        Err(Error::ZeroMatrix)
    } else {
        Ok(g)
    }
}

/// Whether the entries of `m` are coprime in the given convention.
pub fn is_primitive<T: Scalar>(m: &Matrix<T>, convention: ContentConvention) -> bool {
    match content_z(m) {
        Ok(g) if g.is_one() => match convention {
            ContentConvention::Rational => true,
            ContentConvention::Gaussian => {
                if T::PARTS == 1 {
                    true
                } else {
                    !m.entries().iter().all(|e| {
                        let p = e.int_parts();
                        ((p[0] - p[1]) % 2i32).is_zero()
                    })
                }
            }
        },
        _ => false,
    }
}

/// Smallest e ≥ 1 with (e/d)·M integral, i.e. d / gcd(content(M), d).
pub fn denominator<T: Scalar>(m: &Matrix<T>, d: &BigInt) -> BigInt {
    assert!(d.is_positive(), "level must be positive");
    match content_z(m) {
        Ok(c) => d / c.gcd(d),
        Err(_) => BigInt::one(),
    }
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// p-adic valuation of a positive integer.
pub fn v_p(n: u64, p: u64) -> Result<u32> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p.to_string()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("valuation of 0".into()));
    }
    let mut n = n;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    Ok(v)
}

/// p-adic valuation of a big integer; `None` for zero (infinite valuation).
pub fn val_big(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        n = q;
        v += 1;
    }
}

/// Minimum valuation over all coordinates of a scalar (None if zero).
pub fn val_scalar<T: Scalar>(x: &T, p: u64) -> Option<u32> {
    x.int_parts().into_iter().filter_map(|c| val_big(c, p)).min()
}

/// Minimum valuation over all entries of a matrix (None if zero).
pub fn val_matrix<T: Scalar>(m: &Matrix<T>, p: u64) -> Option<u32> {
    m.entries().iter().filter_map(|e| val_scalar(e, p)).min()
}

/// Prime divisors (sorted, distinct) of a nonzero integer.
pub fn prime_factors(n: &BigInt) -> Result<Vec<u64>> {
    let mut n = n.abs();
    if n.is_zero() {
        return Err(Error::InvalidArgument("cannot factor 0".into()));
    }
    let mut out = Vec::new();
    let mut d = 2u64;
    while d < 1_000_000 {
        let db = BigInt::from(d);
        if &db * &db > n {
            break;
        }
        if (&n % &db).is_zero() {
            out.push(d);
            while (&n % &db).is_zero() {
                n /= &db;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if !n.is_one() {
        match n.to_u64() {
            Some(r) if is_prime(r) => out.push(r),
            _ => {
                return Err(Error::Unsupported(format!(
                    "factoring cofactor {n} beyond trial division range"
                )))
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Distinct prime divisors of a positive u64.
pub fn prime_factors_u64(n: u64) -> Vec<u64> {
    prime_factors(&BigInt::from(n)).expect("u64 factorization always succeeds")
}

/// Modular inverse of `a` modulo `m` (m ≥ 2), if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// JSON encoding of matrix entries: numbers, decimal strings for large
/// values, and `[re, im]` pairs for Gaussian integers.
pub trait JsonScalar: Scalar {
    fn from_json(v: &Value) -> Result<Self>;
    fn to_json(&self) -> Value;
}

fn int_from_json(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::Parse(format!("non-integer entry {n}"))),
        Value::String(s) => s.trim().parse().map_err(|_| Error::Parse(format!("bad integer {s:?}"))),
        other => Err(Error::Parse(format!("expected integer, got {other}"))),
    }
}

fn int_to_json(v: &BigInt) -> Value {
    const SAFE: i64 = 1 << 53;
    match v.to_i64() {
        Some(x) if x.abs() < SAFE => Value::from(x),
        _ => Value::String(v.to_string()),
    }
}

impl JsonScalar for BigInt {
    fn from_json(v: &Value) -> Result<Self> {
        int_from_json(v)
    }
    fn to_json(&self) -> Value {
        int_to_json(self)
    }
}

impl JsonScalar for GaussianInt {
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Array(a) if a.len() == 2 => {
                Ok(GaussianInt { re: int_from_json(&a[0])?, im: int_from_json(&a[1])? })
            }
            Value::Number(_) | Value::String(_) => Ok(GaussianInt::from_int(int_from_json(v)?)),
            other => Err(Error::Parse(format!("expected [re, im], got {other}"))),
        }
    }
    fn to_json(&self) -> Value {
        Value::Array(vec![int_to_json(&self.re), int_to_json(&self.im)])
    }
}

impl<T: JsonScalar> Matrix<T> {
    pub fn from_json(v: &Value) -> Result<Self> {
        let rows = v.as_array().ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in rows {
            let r = r.as_array().ok_or_else(|| Error::Parse("row must be an array".into()))?;
            if r.len() != dim {
                return Err(Error::DimensionMismatch("matrix literal is not square".into()));
            }
            for e in r {
                entries.push(T::from_json(e)?);
            }
        }
        Matrix::new(dim, entries)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            (0..self.dim)
                .map(|i| Value::Array(self.row(i).iter().map(JsonScalar::to_json).collect()))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn content_examples() {
        assert_eq!(content_z(&IntMatrix::scalar(3, BigInt::from(3))).unwrap(), BigInt::from(3));
        assert_eq!(content_z(&m(&[&[2, 4], &[6, 8]])).unwrap(), BigInt::from(2));
        let q = m(&[&[1, 2, 2], &[2, 1, -2], &[-2, 2, -1]]);
        assert_eq!(content_z(&q).unwrap(), BigInt::one());
        assert_eq!(content_z(&IntMatrix::scalar(2, BigInt::zero())), Err(Error::ZeroMatrix));
    }

    #[test]
    fn denominator_examples() {
        let n = BigInt::from(7);
        assert_eq!(denominator(&IntMatrix::scalar(3, n.clone()), &n), BigInt::one());
        assert_eq!(denominator(&IntMatrix::identity(3), &BigInt::one()), BigInt::one());
        let q = m(&[&[1, 2, 2], &[2, 1, -2], &[-2, 2, -1]]);
        assert_eq!(denominator(&q, &BigInt::from(3)), BigInt::from(3));
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(v_p(12, 2), Ok(2));
        assert_eq!(v_p(12, 3), Ok(1));
        assert_eq!(v_p(7, 5), Ok(0));
        assert!(matches!(v_p(12, 4), Err(Error::NotPrime(_))));
    }

    #[test]
    fn gaussian_content_convention() {
        // (1+i)·M' with M' primitive: rational content 1, but 1+i divides every entry.
        let e = |a, b| GaussianInt::new(a, b);
        let g = GaussMatrix::new(2, vec![e(1, 1), e(-1, 1), e(1, 1), e(1, -1)]).unwrap();
        assert!(is_primitive(&g, ContentConvention::Rational));
        assert!(!is_primitive(&g, ContentConvention::Gaussian));
    }

    #[test]
    fn adjugate_identity() {
        let a = m(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let d = a.det();
        assert_eq!(a.adjugate().mul(&a), IntMatrix::scalar(3, d));
    }

    #[test]
    fn prime_helpers() {
        assert!(is_prime(10007));
        assert!(!is_prime(1));
        assert!(!is_prime(10005));
        assert_eq!(prime_factors(&BigInt::from(360)).unwrap(), vec![2, 3, 5]);
        assert_eq!(mod_inverse(&BigInt::from(3), &BigInt::from(7)), Some(BigInt::from(5)));
    }

    #[test]
    fn json_literals() {
        let v: Value = serde_json::json!([[1, "123456789012345678901234567890"], [0, -2]]);
        let a = IntMatrix::from_json(&v).unwrap();
        assert_eq!(a.get(0, 1).to_string(), "123456789012345678901234567890");
        assert_eq!(a.to_json(), v);
        let g: Value = serde_json::json!([[[1, 2], [0, 0]], [[0, 0], [3, -1]]]);
        let b = GaussMatrix::from_json(&g).unwrap();
        assert_eq!(*b.get(1, 1), GaussianInt::new(3, -1));
        assert!(IntMatrix::from_json(&serde_json::json!([[1, 2]])).is_err());
    }

    fn small_matrix(k: usize) -> impl Strategy<Value = IntMatrix> {
        proptest::collection::vec(-9i64..=9, k * k)
            .prop_map(move |v| IntMatrix::new(k, v.into_iter().map(BigInt::from).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn bareiss_matches_cofactor(a in small_matrix(3), b in small_matrix(4)) {
            prop_assert_eq!(a.det(), a.det_cofactor());
            prop_assert_eq!(b.det(), b.det_cofactor());
        }

        #[test]
        fn gaussian_det_matches_cofactor(v in proptest::collection::vec((-5i64..=5, -5i64..=5), 9)) {
            let g = GaussMatrix::new(3, v.into_iter().map(|(a, b)| GaussianInt::new(a, b)).collect()).unwrap();
            prop_assert_eq!(g.det(), g.det_cofactor());
        }

        #[test]
        fn norm_is_multiplicative(a in -1000i64..1000, b in -1000i64..1000, c in -1000i64..1000, d in -1000i64..1000) {
            let x = GaussianInt::new(a, b);
            let y = GaussianInt::new(c, d);
            prop_assert_eq!((&x * &y).norm(), x.norm() * y.norm());
            prop_assert_eq!(x.conj().conj(), x);
        }

        #[test]
        fn denominator_scaling(a in small_matrix(2), c in 1i64..6, q in 1i64..6) {
            prop_assume!(!a.is_zero());
            let d = BigInt::from(c * q);
            let c = BigInt::from(c);
            let scaled = a.scale(&c);
            prop_assert_eq!(denominator(&scaled, &d), denominator(&a, &(&d / c.gcd(&d))));
            let den = denominator(&a, &d);
            prop_assert!((&d % &den).is_zero());
        }
    }
}
