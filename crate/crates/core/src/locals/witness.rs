//! Explicit local witnesses for p | n.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Zero};

use crate::arith::{mod_inverse, GaussMatrix, GaussianInt, IntMatrix, Matrix};
use crate::forms::{hyperbolic_reduce, Form, FormKind};
use crate::error::Result;

fn reduce_matrix(m: &GaussMatrix, q: &BigInt) -> GaussMatrix {
    m.map(|g| GaussianInt::new(g.re.mod_floor(q), g.im.mod_floor(q)))
}

/// n·g·u·g⁻¹ in the hyperbolic basis x₁x₂ + x₃x₄ + q″, with
/// g = diag(p^m, p^(−m), 1, …, 1) and the unipotent u fixing q, moved back
/// to the original coordinates modulo p^e.
pub(crate) fn hyperbolic_witness(form: &Form, n: u64, p: u64, m: u32) -> Result<GaussMatrix> {
    let k = form.rank();
    let e = (k as u32 + 2) * m + 6;
    let red = hyperbolic_reduce(form, p, e)?;
    let q = BigInt::from(p).pow(e);
    let nb = BigInt::from(n);
    let n_prime = &nb / BigInt::from(p).pow(m);
    // u: x ↦ (x₁, x₂ + x₃, x₃, x₄ − x₁, x₅, …); conjugating by g scales
    // entry (1,2) by p^(−m) and entry (3,0) by p^(−m).
    let mut w = IntMatrix::scalar(k, nb.clone());
    w.set(1, 2, n_prime.clone());
    w.set(3, 0, -n_prime);
    let g = &red.change.g;
    let det_inv = mod_inverse(&g.det(), &q).expect("basis change is invertible");
    let g_inv = g.adjugate().map(|x| (x * &det_inv).mod_floor(&q));
    let moved = g.mul(&w).mul(&g_inv);
    Ok(reduce_matrix(&moved.to_gaussian(), &q))
}

/// Torus witness n·(I + (p^m − 1)·P_x + (p^(−m) − 1)·P_y) for an isotropic
/// pair x, y with ⟨x, y⟩ = 1, where P_x v = ⟨y, v⟩·x and P_y v = ⟨x, v⟩·y.
///
/// Returns `None` when no nonsingular isotropic vector is found, which
/// happens for anisotropic forms and for hermitian forms at p = 2.
pub(crate) fn torus_witness(form: &Form, n: u64, p: u64, m: u32, precision: u32) -> Option<GaussMatrix> {
    let q = BigInt::from(p).pow(precision);
    let (x, y) = isotropic_pair(form, p, precision)?;
    let k = form.rank();
    let gram = form.gram();
    let nb = BigInt::from(n);
    let pm = BigInt::from(p).pow(m);
    let n_prime = &nb / &pm;
    let col = |v: &[GaussianInt]| Matrix::from_fn(k, |i, j| if j == 0 { v[i].clone() } else { GaussianInt::zero() });
    // outer products x·(y*G) and y·(x*G) as k×k matrices
    let px = col(&x).mul(&col(&y).adjoint()).mul(gram);
    let py = col(&y).mul(&col(&x).adjoint()).mul(gram);
    let a = GaussianInt::from(&nb * (&pm - BigInt::one()));
    let b = GaussianInt::from(&n_prime * (BigInt::one() - &pm));
    let w = GaussMatrix::scalar(k, GaussianInt::from(nb)).add(&px.scale(&a)).add(&py.scale(&b));
    Some(reduce_matrix(&w, &q))
}

fn ginv(w: &GaussianInt, q: &BigInt) -> Option<GaussianInt> {
    let ninv = mod_inverse(&w.norm(), q)?;
    let c = w.conj();
    Some(GaussianInt::new((&c.re * &ninv).mod_floor(q), (&c.im * &ninv).mod_floor(q)))
}

fn gmod(w: &GaussianInt, q: &BigInt) -> GaussianInt {
    GaussianInt::new(w.re.mod_floor(q), w.im.mod_floor(q))
}

/// ⟨v, w⟩ = v*·G·w.
fn pairing(gram: &GaussMatrix, v: &[GaussianInt], w: &[GaussianInt]) -> GaussianInt {
    let k = gram.dim();
    let mut acc = GaussianInt::zero();
    for i in 0..k {
        for j in 0..k {
            acc = acc + v[i].conj() * gram.get(i, j).clone() * w[j].clone();
        }
    }
    acc
}

fn gram_times(gram: &GaussMatrix, v: &[GaussianInt]) -> Vec<GaussianInt> {
    let k = gram.dim();
    (0..k)
        .map(|i| (0..k).fold(GaussianInt::zero(), |acc, j| acc + gram.get(i, j).clone() * v[j].clone()))
        .collect()
}

const VECTOR_CAP: u64 = 1 << 20;

/// Isotropic x, y modulo p^e with ⟨x, x⟩ ≡ ⟨y, y⟩ ≡ 0 and ⟨x, y⟩ ≡ 1.
fn isotropic_pair(form: &Form, p: u64, e: u32) -> Option<(Vec<GaussianInt>, Vec<GaussianInt>)> {
    let hermitian = form.kind() == FormKind::Hermitian;
    if hermitian && p == 2 {
        return None;
    }
    let gram = form.gram();
    let k = form.rank();
    let q = BigInt::from(p).pow(e);
    let pb = BigInt::from(p);
    // starting residues: mod p, or mod 8 at p = 2 so that Hensel applies
    let base: u64 = if p == 2 { 8 } else { p };
    let parts = if hermitian { 2 } else { 1 };
    let total = (base as u128).checked_pow((k * parts) as u32)?;
    if total > VECTOR_CAP as u128 {
        return None;
    }
    let baseb = BigInt::from(base);
    let unit = |g: &GaussianInt| !(g.norm() % &pb).is_zero();
    let mut found = None;
    for idx in 0..total as u64 {
        let mut r = idx;
        let mut v = Vec::with_capacity(k);
        for _ in 0..k {
            let re = (r % base) as i64;
            r /= base;
            let im = if hermitian {
                let t = (r % base) as i64;
                r /= base;
                t
            } else {
                0
            };
            v.push(GaussianInt::new(re, im));
        }
        if !(pairing(gram, &v, &v).re % &baseb).is_zero() {
            continue;
        }
        let gv = gram_times(gram, &v);
        if let Some(i) = (0..k).find(|&i| unit(&gv[i])) {
            found = Some((v, i));
            break;
        }
    }
    let (mut x, i) = found?;
    // Newton on coordinate i: h(x + s·w·e_i) = h(x) + 2s·N(w) + s²·N(w)·G_ii
    // (w = (Gx)_i; for quadratic forms N(w) = w² and the step is s·w).
    for _ in 0..(2 * e + 4) {
        let h = pairing(gram, &x, &x).re.mod_floor(&q);
        if h.is_zero() {
            break;
        }
        let w = gram_times(gram, &x)[i].clone();
        let nw = w.norm();
        let (num, den) = if p == 2 { (&h / 2, nw) } else { (h, BigInt::from(2) * nw) };
        let s = (-(num * mod_inverse(&den, &q)?)).mod_floor(&q);
        x[i] = gmod(&(x[i].clone() + GaussianInt::from(s) * w), &q);
    }
    if !pairing(gram, &x, &x).re.mod_floor(&q).is_zero() {
        return None;
    }
    // y₀ with ⟨x, y₀⟩ = 1 and ⟨y₀, y₀⟩ even at p = 2
    let mut candidates: Vec<Vec<GaussianInt>> = Vec::new();
    for a in 0..k {
        let mut v = vec![GaussianInt::zero(); k];
        v[a] = GaussianInt::one();
        candidates.push(v.clone());
        for b in a + 1..k {
            let mut v2 = v.clone();
            v2[b] = GaussianInt::one();
            candidates.push(v2);
        }
    }
    for z in candidates {
        let Some(c) = ginv(&pairing(gram, &x, &z), &q) else { continue };
        let y0: Vec<GaussianInt> = z.iter().map(|t| gmod(&(t.clone() * c.clone()), &q)).collect();
        let h0 = pairing(gram, &y0, &y0).re.mod_floor(&q);
        let half = if p == 2 {
            if h0.is_odd() {
                continue;
            }
            &h0 / 2
        } else {
            (&h0 * mod_inverse(&BigInt::from(2), &q)?).mod_floor(&q)
        };
        let y: Vec<GaussianInt> = y0
            .iter()
            .zip(&x)
            .map(|(a, b)| gmod(&(a.clone() - GaussianInt::from(half.clone()) * b.clone()), &q))
            .collect();
        let ok = pairing(gram, &y, &y).re.mod_floor(&q).is_zero()
            && gmod(&(pairing(gram, &x, &y) - GaussianInt::one()), &q).is_zero();
        if ok {
            return Some((x, y));
        }
    }
    None
}
