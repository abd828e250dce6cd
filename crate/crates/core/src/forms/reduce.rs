//! Diagonal and hyperbolic normal forms over Z/p^e for odd good primes.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::Serialize;

use super::{real_part, Form, FormKind};
use crate::arith::{is_prime, mod_inverse, IntMatrix, Matrix};
use crate::error::{Error, Result};

/// An element of GL(k, Z/p^e), i.e. a change of basis known to precision e.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PAdicBasisChange {
    pub p: u64,
    pub e: u32,
    /// Columns are the new basis vectors, entries reduced into [0, p^e).
    #[serde(serialize_with = "serialize_int_matrix")]
    pub g: IntMatrix,
}

pub(crate) fn serialize_int_matrix<S: serde::Serializer>(
    m: &IntMatrix,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    m.to_json().serialize(s)
}

impl PAdicBasisChange {
    pub fn modulus(&self) -> BigInt {
        BigInt::from(self.p).pow(self.e)
    }

    pub fn is_invertible(&self) -> bool {
        !(self.g.det().mod_floor(&BigInt::from(self.p))).is_zero()
    }

    /// Whether gᵗ·a·g ≡ b (mod p^e).
    pub fn transforms(&self, a: &IntMatrix, b: &IntMatrix) -> bool {
        let q = self.modulus();
        let lhs = self.g.transpose().mul(a).mul(&self.g);
        lhs.entries().iter().zip(b.entries()).all(|(x, y)| (x - y).mod_floor(&q).is_zero())
    }
}

fn check_odd_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p.to_string()));
    }
    if p == 2 {
        return Err(Error::Unsupported("p = 2 has no diagonal normal form".into()));
    }
    Ok(())
}

pub(crate) fn legendre(a: &BigInt, p: u64) -> i32 {
    let pb = BigInt::from(p);
    let r = a.mod_floor(&pb);
    if r.is_zero() {
        return 0;
    }
    if r.modpow(&BigInt::from((p - 1) / 2), &pb).is_one() {
        1
    } else {
        -1
    }
}

fn sqrt_mod_p(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    let pw = |b: u64, mut e: u64| {
        let (mut acc, mut b) = (1u128, b as u128 % p as u128);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p as u128;
            }
            b = b * b % p as u128;
            e >>= 1;
        }
        acc as u64
    };
    if pw(a, (p - 1) / 2) != 1 {
        return None;
    }
    // Tonelli–Shanks
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..p).find(|&z| pw(z, (p - 1) / 2) == p - 1)?;
    let mulm = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let (mut m, mut c, mut t, mut r) = (s, pw(z, q), pw(a, q), pw(a, (q + 1) / 2));
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mulm(t2, t2);
            i += 1;
        }
        let b = pw(c, 1u64 << (m - i - 1));
        m = i;
        c = mulm(b, b);
        t = mulm(t, c);
        r = mulm(r, b);
    }
    Some(r.min(p - r))
}

/// A square root of the unit `a` modulo p^e (p odd), lifted by Newton's
/// method from the smaller root modulo p.
pub fn sqrt_mod_prime_power(a: &BigInt, p: u64, e: u32) -> Result<Option<BigInt>> {
    check_odd_prime(p)?;
    let pb = BigInt::from(p);
    let q = (&pb).pow(e);
    let a = a.mod_floor(&q);
    let a_p = (&a % &pb).to_u64().expect("reduced mod p");
    if a_p == 0 {
        return Err(Error::InvalidArgument("square root of a non-unit".into()));
    }
    let Some(r0) = sqrt_mod_p(a_p, p) else {
        return Ok(None);
    };
    let mut r = BigInt::from(r0);
    let mut prec = 1;
    while prec < e {
        prec = (2 * prec).min(e);
        let inv = mod_inverse(&(BigInt::from(2) * &r), &q).expect("2r is a unit");
        r = (&r - (&r * &r - &a) * inv).mod_floor(&q);
    }
    debug_assert!((&r * &r - &a).mod_floor(&q).is_zero());
    Ok(Some(r))
}

/// (a, b) with a² + b² ≡ u (mod p^e): a search for b modulo p making
/// u − b² a nonzero square, then a Hensel lift of its root.
pub fn sum_of_two_squares_padic(u: &BigInt, p: u64, e: u32) -> Result<(BigInt, BigInt)> {
    check_odd_prime(p)?;
    if e == 0 {
        return Err(Error::InvalidArgument("precision must be ≥ 1".into()));
    }
    if legendre(u, p) == 0 {
        return Err(Error::InvalidArgument(format!("{u} is not a unit mod {p}")));
    }
    let q = BigInt::from(p).pow(e);
    for b in 0..p {
        let b = BigInt::from(b);
        let c = (u - &b * &b).mod_floor(&q);
        if legendre(&c, p) == 1 {
            let a = sqrt_mod_prime_power(&c, p, e)?.expect("quadratic residue has a root");
            return Ok((a, b));
        }
    }
    unreachable!("every unit is a sum of two squares modulo an odd prime")
}

fn odd_good_prime(f: &Form, p: u64) -> Result<IntMatrix> {
    check_odd_prime(p)?;
    let q = f
        .quadratic_gram()
        .ok_or_else(|| Error::Unsupported("p-adic reduction of hermitian forms".into()))?;
    if (f.det() % p).is_zero() {
        return Err(Error::BadPrime(p));
    }
    Ok(q)
}

/// gᵗ·a·g mod q.
fn congruent(a: &IntMatrix, g: &IntMatrix, q: &BigInt) -> IntMatrix {
    g.transpose().mul(a).mul(g).map(|x| x.mod_floor(q))
}

/// Change of basis g with gᵗ·gram·g diagonal mod p^e, all entries units.
pub fn padic_diagonalize(f: &Form, p: u64, e: u32) -> Result<(PAdicBasisChange, Vec<BigInt>)> {
    let gram = odd_good_prime(f, p)?;
    if e == 0 {
        return Err(Error::InvalidArgument("precision must be ≥ 1".into()));
    }
    let k = gram.dim();
    let pb = BigInt::from(p);
    let q = (&pb).pow(e);
    let unit = |x: &BigInt| !x.mod_floor(&pb).is_zero();
    let mut g = IntMatrix::identity(k);
    for c in 0..k {
        let a = congruent(&gram, &g, &q);
        if let Some(r) = (c..k).find(|&r| unit(a.get(r, r))) {
            g = swap_columns(&g, c, r);
        } else {
            // all remaining diagonal entries vanish mod p: e_i + e_j has
            // norm 2·a_ij, a unit as soon as a_ij is
            let (i, j) = (c..k)
                .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
                .find(|&(i, j)| unit(a.get(i, j)))
                .ok_or(Error::BadPrime(p))?;
            g = add_column(&g, i, j, &BigInt::one(), &q);
            g = swap_columns(&g, c, i);
        }
        let a = congruent(&gram, &g, &q);
        let inv = mod_inverse(a.get(c, c), &q).expect("pivot is a unit");
        for r in c + 1..k {
            let factor = (-(a.get(r, c) * &inv)).mod_floor(&q);
            g = add_column(&g, r, c, &factor, &q);
        }
    }
    let d = congruent(&gram, &g, &q);
    let diag: Vec<BigInt> = (0..k).map(|i| d.get(i, i).clone()).collect();
    let ok = (0..k).all(|i| (0..k).all(|j| i == j || d.get(i, j).is_zero()));
    if !ok || !diag.iter().all(unit) {
        return Err(Error::SelfCheck("diagonalisation did not reach a unit diagonal".into()));
    }
    Ok((PAdicBasisChange { p, e, g }, diag))
}

fn swap_columns(g: &IntMatrix, a: usize, b: usize) -> IntMatrix {
    let k = g.dim();
    let perm = |j: usize| if j == a { b } else if j == b { a } else { j };
    Matrix::from_fn(k, |i, j| g.get(i, perm(j)).clone())
}

/// Column `dst` += factor · column `src`, mod q.
fn add_column(g: &IntMatrix, dst: usize, src: usize, factor: &BigInt, q: &BigInt) -> IntMatrix {
    let k = g.dim();
    Matrix::from_fn(k, |i, j| {
        if j == dst {
            (g.get(i, dst) + factor * g.get(i, src)).mod_floor(q)
        } else {
            g.get(i, j).clone()
        }
    })
}

/// Result of rewriting a form as H ⊕ H ⊕ diag(tail) modulo p^e, where H is
/// the hyperbolic plane with Gram matrix [[0,1],[1,0]].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HyperbolicReduction {
    pub change: PAdicBasisChange,
    /// Unit diagonal of the remaining (k − 4)-dimensional block.
    pub tail: Vec<BigInt>,
}

impl HyperbolicReduction {
    /// The Gram matrix gᵗ·gram·g is congruent to.
    pub fn target(&self) -> IntMatrix {
        let h = IntMatrix::from_rows(&[[0, 1], [1, 0]]).expect("2x2");
        h.direct_sum(&h).direct_sum(&IntMatrix::diagonal(&self.tail))
    }
}

/// Three orthogonal vectors with unit norms d₀, d₁, d₂ span H ⊕ ⟨−β⟩.
///
/// Returns coefficient columns (over the input vectors) of the hyperbolic
/// pair and of the orthogonal complement vector, together with −β.
fn hyperbolic_triple(d: [&BigInt; 3], p: u64, e: u32) -> Result<([[BigInt; 3]; 3], BigInt)> {
    let q = BigInt::from(p).pow(e);
    let md = |x: BigInt| x.mod_floor(&q);
    let inv = |x: &BigInt| mod_inverse(x, &q).expect("unit");
    // two of three units share a square class
    let (i, j, t) = [(0, 1, 2), (0, 2, 1), (1, 2, 0)]
        .into_iter()
        .find(|&(i, j, _)| legendre(&(d[i] * d[j]), p) == 1)
        .expect("pigeonhole on square classes");
    let s = sqrt_mod_prime_power(&md(d[j] * inv(d[i])), p, e)?.expect("same square class");
    let s_inv = inv(&s);
    let alpha = d[i].clone();
    let beta = d[t].clone();
    let (a, b) = sum_of_two_squares_padic(&md(-(&beta * inv(&alpha))), p, e)?;
    let beta_inv = inv(&beta);
    // basis x = u_i, y = u_j / s, z = u_t
    let combo = |cx: BigInt, cy: BigInt, cz: BigInt| {
        let mut v = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
        v[i] = md(cx);
        v[j] = md(cy * &s_inv);
        v[t] = md(cz);
        v
    };
    let v1 = combo(a.clone(), b.clone(), BigInt::one());
    let v2 = combo(-(&b * &beta_inv), &a * &beta_inv, beta_inv.clone());
    let v3 = combo(&a - &b, &a + &b, BigInt::one());
    Ok(([v1, v2, v3], md(-beta)))
}

/// Change of basis to x₁x₂ + x₃x₄ + (diagonal unit form) modulo p^e.
///
/// Requires a quadratic form of rank ≥ 5 and an odd prime not dividing
/// det(gram). The result is re-verified by exact multiplication.
pub fn hyperbolic_reduce(f: &Form, p: u64, e: u32) -> Result<HyperbolicReduction> {
    if f.kind() != FormKind::Quadratic {
        return Err(Error::Unsupported("hyperbolic reduction of hermitian forms".into()));
    }
    let k = f.rank();
    if k < 5 {
        return Err(Error::InvalidArgument(format!("rank {k} < 5")));
    }
    if p == 2 {
        return Err(Error::BadPrime(2));
    }
    if f.bad_primes()?.contains(&p) {
        return Err(Error::BadPrime(p));
    }
    let gram = real_part(f.gram());
    let (diag_change, d) = padic_diagonalize(f, p, e)?;
    let q = BigInt::from(p).pow(e);
    // basis vectors in diagonal coordinates
    let unit_vec = |i: usize| {
        let mut v = vec![BigInt::zero(); k];
        v[i] = BigInt::one();
        v
    };
    let lin = |coef: &[BigInt; 3], vs: [&Vec<BigInt>; 3]| -> Vec<BigInt> {
        (0..k)
            .map(|r| (0..3).fold(BigInt::zero(), |acc, c| acc + &coef[c] * &vs[c][r]).mod_floor(&q))
            .collect()
    };
    let (c1, minus_beta) = hyperbolic_triple([&d[0], &d[1], &d[2]], p, e)?;
    let (e0, e1, e2) = (unit_vec(0), unit_vec(1), unit_vec(2));
    let v1 = lin(&c1[0], [&e0, &e1, &e2]);
    let v2 = lin(&c1[1], [&e0, &e1, &e2]);
    let v3 = lin(&c1[2], [&e0, &e1, &e2]);
    let (c2, minus_beta2) = hyperbolic_triple([&minus_beta, &d[3], &d[4]], p, e)?;
    let (e3, e4) = (unit_vec(3), unit_vec(4));
    let w1 = lin(&c2[0], [&v3, &e3, &e4]);
    let w2 = lin(&c2[1], [&v3, &e3, &e4]);
    let w3 = lin(&c2[2], [&v3, &e3, &e4]);
    let mut cols = vec![v1, v2, w1, w2, w3];
    cols.extend((5..k).map(unit_vec));
    let t = Matrix::from_fn(k, |r, c| cols[c][r].clone());
    let g = diag_change.g.mul(&t).map(|x| x.mod_floor(&q));
    let mut tail = vec![minus_beta2];
    tail.extend(d[5..].iter().cloned());
    let out = HyperbolicReduction { change: PAdicBasisChange { p, e, g }, tail };
    if !out.change.transforms(&gram, &out.target()) || !out.change.is_invertible() {
        return Err(Error::SelfCheck(format!("hyperbolic basis mod {p}^{e} failed re-multiplication")));
    }
    Ok(out)
}
