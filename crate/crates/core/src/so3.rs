//! Rotations of odd denominator n from integer quaternions of norm n.

use std::collections::{BTreeSet, HashSet};
use std::ops::Mul;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{IntMatrix, Matrix};
use crate::enumerate::{EnumerateStats, SolutionSet};
use crate::error::{Error, Result};
use crate::forms::{Form, FormKind};

/// a + b·i + c·j + d·k with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Quaternion {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl Quaternion {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>, d: impl Into<BigInt>) -> Self {
        Quaternion { a: a.into(), b: b.into(), c: c.into(), d: d.into() }
    }

    pub fn norm(&self) -> BigInt {
        &self.a * &self.a + &self.b * &self.b + &self.c * &self.c + &self.d * &self.d
    }

    pub fn conj(&self) -> Self {
        Quaternion { a: self.a.clone(), b: -&self.b, c: -&self.c, d: -&self.d }
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c).gcd(&self.d).is_one()
    }

    pub fn coefficients(&self) -> [&BigInt; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    /// The eight units ±1, ±i, ±j, ±k.
    pub fn units() -> Vec<Quaternion> {
        let mut out = Vec::with_capacity(8);
        for s in [1i64, -1] {
            out.push(Quaternion::new(s, 0, 0, 0));
            out.push(Quaternion::new(0, s, 0, 0));
            out.push(Quaternion::new(0, 0, s, 0));
            out.push(Quaternion::new(0, 0, 0, s));
        }
        out
    }
}

impl Mul for &Quaternion {
    type Output = Quaternion;

    fn mul(self, o: &Quaternion) -> Quaternion {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        let (e, f, g, h) = (&o.a, &o.b, &o.c, &o.d);
        Quaternion {
            a: a * e - b * f - c * g - d * h,
            b: a * f + b * e + c * h - d * g,
            c: a * g - b * h + c * e + d * f,
            d: a * h + b * g - c * f + d * e,
        }
    }
}

/// Primitive integer 4-tuples of norm n, sorted.
fn quaternions_i64(n: u64) -> Result<Vec<[i64; 4]>> {
    if n == 0 {
        return Err(Error::InvalidArgument("norm must be positive".into()));
    }
    if n > 1 << 60 {
        return Err(Error::Overflow(format!("norm {n}")));
    }
    let r = n.sqrt() as i64;
    let n = n as i64;
    let mut out: Vec<[i64; 4]> = (-r..=r)
        .into_par_iter()
        .flat_map_iter(|a| {
            let mut local = Vec::new();
            let ra = n - a * a;
            for b in -r..=r {
                let rb = ra - b * b;
                if rb < 0 {
                    continue;
                }
                for c in -r..=r {
                    let rc = rb - c * c;
                    if rc < 0 {
                        continue;
                    }
                    let d = rc.sqrt();
                    if d * d != rc {
                        continue;
                    }
                    for d in if d == 0 { vec![0] } else { vec![-d, d] } {
                        if a.gcd(&b).gcd(&c).gcd(&d) == 1 {
                            local.push([a, b, c, d]);
                        }
                    }
                }
            }
            local
        })
        .collect();
    out.sort();
    Ok(out)
}

/// All primitive (a, b, c, d) with a² + b² + c² + d² = n, sorted.
pub fn quaternions_of_norm(n: u64) -> Result<Vec<Quaternion>> {
    Ok(quaternions_i64(n)?.into_iter().map(|[a, b, c, d]| Quaternion::new(a, b, c, d)).collect())
}

/// Numerator of the rotation v ↦ x·v·x̄ / N(x) of the pure quaternions,
/// in the basis i, j, k.
pub fn quat_to_rotation(x: &Quaternion) -> IntMatrix {
    let (a, b, c, d) = (&x.a, &x.b, &x.c, &x.d);
    let two = BigInt::from(2);
    let (aa, bb, cc, dd) = (a * a, b * b, c * c, d * d);
    let rows = [
        [&aa + &bb - &cc - &dd, &two * (b * c - a * d), &two * (a * c + b * d)],
        [&two * (a * d + b * c), &aa - &bb + &cc - &dd, &two * (c * d - a * b)],
        [&two * (b * d - a * c), &two * (a * b + c * d), &aa - &bb - &cc + &dd],
    ];
    Matrix::from_fn(3, |i, j| rows[i][j].clone())
}

/// The 24 signed permutation matrices of determinant 1.
pub fn rotation_group_z() -> Vec<IntMatrix> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(24);
    for p in perms {
        for signs in 0..8u32 {
            let m = Matrix::from_fn(3, |i, j| {
                if p[i] == j {
                    BigInt::from(if signs >> i & 1 == 1 { -1 } else { 1 })
                } else {
                    BigInt::zero()
                }
            });
            if m.det().is_positive() {
                out.push(m);
            }
        }
    }
    out
}

/// Row-major 3×3 integer matrix.
pub type Rot = [i64; 9];

fn rot_i64(q: &[i64; 4]) -> Rot {
    let [a, b, c, d] = *q;
    let (aa, bb, cc, dd) = (a * a, b * b, c * c, d * d);
    [
        aa + bb - cc - dd,
        2 * (b * c - a * d),
        2 * (a * c + b * d),
        2 * (a * d + b * c),
        aa - bb + cc - dd,
        2 * (c * d - a * b),
        2 * (b * d - a * c),
        2 * (a * b + c * d),
        aa - bb - cc + dd,
    ]
}

fn mul3(x: &Rot, y: &Rot) -> Rot {
    let mut out = [0i64; 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = (0..3).map(|l| x[3 * i + l] * y[3 * l + j]).sum();
        }
    }
    out
}

fn det3(m: &Rot) -> i128 {
    let m: Vec<i128> = m.iter().map(|&v| v as i128).collect();
    m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6])
}

fn to_int_matrix(m: &Rot) -> IntMatrix {
    Matrix::from_fn(3, |i, j| BigInt::from(m[3 * i + j]))
}

/// Distinct images of the primitive quaternions of norm n, before any
/// symmetrisation.
pub fn quaternion_image(n: u64) -> Result<Vec<IntMatrix>> {
    Ok(image_i64(n)?.iter().map(to_int_matrix).collect())
}

fn image_i64(n: u64) -> Result<Vec<Rot>> {
    if n > 3_000_000_000 {
        return Err(Error::Overflow(format!("entries of size n² for n = {n}")));
    }
    let set: BTreeSet<Rot> = quaternions_i64(n)?.iter().map(rot_i64).collect();
    Ok(set.into_iter().collect())
}

/// Numerators of the denominator-n rotations for odd n, sorted row-major:
/// the quaternion image closed under left and right multiplication by
/// SO(3, Z).
///
/// The closure is needed because rotations such as the quarter turns come
/// from quaternions like 1 + i of even norm, which the odd-norm image never
/// reaches. Every matrix is checked for MᵗM = n²·I, det = n³ and content 1.
pub fn rotation_numerators(n: u64) -> Result<Vec<Rot>> {
    if n.is_even() {
        return Err(Error::InvalidArgument("construction requires odd n".into()));
    }
    // quarter turns about the z and x axes generate SO(3, Z)
    let gens: [Rot; 2] = [[0, -1, 0, 1, 0, 0, 0, 0, 1], [1, 0, 0, 0, 0, -1, 0, 1, 0]];
    let image = image_i64(n)?;
    let mut seen: HashSet<Rot> = image.iter().copied().collect();
    let mut queue = image;
    while let Some(m) = queue.pop() {
        for g in &gens {
            for next in [mul3(g, &m), mul3(&m, g)] {
                if seen.insert(next) {
                    queue.push(next);
                }
            }
        }
    }
    let mut out: Vec<Rot> = seen.into_iter().collect();
    out.sort();
    let n2 = (n as i64) * (n as i64);
    let n3 = (n as i128).pow(3);
    for m in &out {
        let mt = [m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]];
        if mul3(&mt, m) != [n2, 0, 0, 0, n2, 0, 0, 0, n2] || det3(m) != n3 {
            return Err(Error::SelfCheck("quaternion rotation is not a scaled rotation".into()));
        }
        if m.iter().fold(0i64, |g, v| g.gcd(v)) != 1 {
            return Err(Error::SelfCheck(format!("quaternion rotation at n = {n} has content above 1")));
        }
    }
    Ok(out)
}

/// [`rotation_numerators`] as a solution set for the form x² + y² + z².
pub fn denominator_n_rotations(n: u64) -> Result<SolutionSet> {
    let solutions = rotation_numerators(n)?.iter().map(|m| to_int_matrix(m).to_gaussian()).collect();
    Ok(SolutionSet {
        form: Form::identity(FormKind::Quadratic, 3)?,
        n,
        solutions,
        complete: true,
        stats: EnumerateStats::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::content_z;
    use proptest::prelude::*;

    fn m(rows: &[[i64; 3]]) -> IntMatrix {
        IntMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn small_norms() {
        assert_eq!(quaternions_of_norm(1).unwrap().len(), 8);
        assert_eq!(quaternions_of_norm(2).unwrap().len(), 24);
        assert_eq!(quaternions_of_norm(3).unwrap().len(), 32);
        // odd n: r4(n) = 8·σ(n)
        assert_eq!(quaternions_of_norm(5).unwrap().len(), 48);
        // 9: r4(9) = 104, minus the 8 vectors 3·unit
        assert_eq!(quaternions_of_norm(9).unwrap().len(), 96);
    }

    #[test]
    fn rotation_formula_examples() {
        assert_eq!(quat_to_rotation(&Quaternion::new(1, 0, 0, 0)), IntMatrix::identity(3));
        assert_eq!(quat_to_rotation(&Quaternion::new(1, 1, 1, 0)), m(&[[1, 2, 2], [2, 1, -2], [-2, 2, -1]]));
        assert_eq!(quat_to_rotation(&Quaternion::new(0, 1, 0, 0)), m(&[[1, 0, 0], [0, -1, 0], [0, 0, -1]]));
        assert_eq!(quat_to_rotation(&Quaternion::new(2, 1, 0, 0)), m(&[[5, 0, 0], [0, 3, -4], [0, 4, 3]]));
    }

    #[test]
    fn image_sizes() {
        // ±x give the same rotation and nothing else collapses
        assert_eq!(quaternion_image(1).unwrap().len(), 4);
        assert_eq!(quaternion_image(3).unwrap().len(), 16);
        assert!(denominator_n_rotations(2).is_err());
        assert_eq!(denominator_n_rotations(1).unwrap().len(), 24);
        assert_eq!(denominator_n_rotations(3).unwrap().len(), 96);
    }

    #[test]
    fn rotation_of_a_product() {
        // conjugation is multiplicative: R(uy) = R(u)·R(y), scaled by norms
        for x in quaternions_of_norm(15).unwrap() {
            for u in Quaternion::units() {
                assert_eq!(quat_to_rotation(&(&u * &x)), quat_to_rotation(&u).mul(&quat_to_rotation(&x)));
            }
            let neg = Quaternion { a: -&x.a, b: -&x.b, c: -&x.c, d: -&x.d };
            assert_eq!(quat_to_rotation(&neg), quat_to_rotation(&x));
        }
    }

    #[test]
    fn machine_and_big_integer_formulas_agree() {
        for q in quaternions_i64(21).unwrap() {
            let x = Quaternion::new(q[0], q[1], q[2], q[3]);
            assert_eq!(to_int_matrix(&rot_i64(&q)), quat_to_rotation(&x));
        }
    }

    #[test]
    fn closure_matches_two_sided_products() {
        let group = rotation_group_z();
        let mut want = BTreeSet::new();
        for m in quaternion_image(7).unwrap() {
            for u in &group {
                for v in &group {
                    want.insert(u.mul(&m).mul(v));
                }
            }
        }
        let got: Vec<IntMatrix> = rotation_numerators(7).unwrap().iter().map(to_int_matrix).collect();
        assert_eq!(got, want.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn group_has_24_elements() {
        let g = rotation_group_z();
        assert_eq!(g.len(), 24);
        for u in &g {
            assert_eq!(u.transpose().mul(u), IntMatrix::identity(3));
        }
    }

    proptest! {
        #[test]
        fn rotation_is_orthogonal(a in -30i64..30, b in -30i64..30, c in -30i64..30, d in -30i64..30) {
            let x = Quaternion::new(a, b, c, d);
            let n = x.norm();
            prop_assume!(!n.is_zero());
            let r = quat_to_rotation(&x);
            prop_assert_eq!(r.transpose().mul(&r), IntMatrix::scalar(3, &n * &n));
            prop_assert_eq!(r.det(), &n * &n * &n);
            if x.is_primitive() && n.is_odd() {
                prop_assert!(content_z(&r).unwrap().is_one());
            }
        }

        #[test]
        fn product_norm(a in -9i64..9, b in -9i64..9, c in -9i64..9, d in -9i64..9,
                        e in -9i64..9, f in -9i64..9, g in -9i64..9, h in -9i64..9) {
            let x = Quaternion::new(a, b, c, d);
            let y = Quaternion::new(e, f, g, h);
            prop_assert_eq!((&x * &y).norm(), x.norm() * y.norm());
            prop_assert_eq!(&x * &x.conj(), Quaternion::new(x.norm(), 0, 0, 0));
        }
    }
}
