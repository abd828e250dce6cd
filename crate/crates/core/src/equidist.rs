//! Empirical measures on the compact real group and their distance to Haar.
//!
//! Test functions are monomials in the matrix entries (real and imaginary
//! parts in the unitary case) and spherical caps for rotations of R³.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::GaussMatrix;
use crate::enumerate::SolutionSet;
use crate::error::{Error, Result};
use crate::forms::{to_f64, Form, FormKind};
use crate::so3::Rot;

/// Hard cap on ‖G*G − I‖∞ for an embedded sample.
pub const RESIDUAL_CAP: f64 = 1e-8;

/// Half-width of the band around a cap boundary inside which a point
/// counts with weight ½.
pub const CAP_BOUNDARY: f64 = 1e-12;

const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Orthogonal,
    Unitary,
}

impl From<FormKind> for GroupKind {
    fn from(k: FormKind) -> Self {
        match k {
            FormKind::Quadratic => GroupKind::Orthogonal,
            FormKind::Hermitian => GroupKind::Unitary,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SampleSource {
    Solutions { form: String, n: u64 },
    Haar { seed: u64 },
}

/// Points of SO(k) or SU(k), stored as flat coordinates.
#[derive(Clone, Debug)]
pub struct EmpiricalSample {
    pub kind: GroupKind,
    pub k: usize,
    pub source: SampleSource,
    /// max over the sample of ‖G*G − I‖∞.
    pub orthogonality_residual: f64,
    coords: Vec<f64>,
}

impl EmpiricalSample {
    /// Build from matrices; computes the residual.
    pub fn from_matrices(kind: GroupKind, k: usize, mats: &[DMatrix<Complex64>], source: SampleSource) -> Result<Self> {
        let mut coords = Vec::with_capacity(mats.len() * k * k * 2);
        let mut residual: f64 = 0.0;
        for m in mats {
            if m.nrows() != k || m.ncols() != k {
                return Err(Error::DimensionMismatch(format!("expected {k}×{k}")));
            }
            residual = residual.max(unitarity_residual(m));
            push_coords(&mut coords, kind, m);
        }
        Ok(EmpiricalSample { kind, k, source, orthogonality_residual: residual, coords })
    }

    /// Real coordinates per sample: k² entries, or k² real parts followed
    /// by k² imaginary parts.
    pub fn width(&self) -> usize {
        match self.kind {
            GroupKind::Orthogonal => self.k * self.k,
            GroupKind::Unitary => 2 * self.k * self.k,
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.width().max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.coords[i * w..(i + 1) * w]
    }

    pub fn matrix(&self, i: usize) -> DMatrix<Complex64> {
        let c = self.coords(i);
        let kk = self.k * self.k;
        DMatrix::from_fn(self.k, self.k, |r, s| {
            let idx = r * self.k + s;
            let im = if self.kind == GroupKind::Unitary { c[kk + idx] } else { 0.0 };
            Complex64::new(c[idx], im)
        })
    }

    /// Name of coordinate `c`: g11, or re11 / im11 in the unitary case.
    pub fn coord_name(&self, c: usize) -> String {
        let kk = self.k * self.k;
        let idx = c % kk;
        let (i, j) = (idx / self.k + 1, idx % self.k + 1);
        match (self.kind, c >= kk) {
            (GroupKind::Orthogonal, _) => format!("g{i}{j}"),
            (GroupKind::Unitary, false) => format!("re{i}{j}"),
            (GroupKind::Unitary, true) => format!("im{i}{j}"),
        }
    }
}

fn push_coords(out: &mut Vec<f64>, kind: GroupKind, m: &DMatrix<Complex64>) {
    let k = m.nrows();
    for i in 0..k {
        for j in 0..k {
            out.push(m[(i, j)].re);
        }
    }
    if kind == GroupKind::Unitary {
        for i in 0..k {
            for j in 0..k {
                out.push(m[(i, j)].im);
            }
        }
    }
}

fn unitarity_residual(m: &DMatrix<Complex64>) -> f64 {
    let k = m.nrows();
    let p = m.adjoint() * m - DMatrix::<Complex64>::identity(k, k);
    p.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn gauss_to_complex(m: &GaussMatrix, scale: f64) -> DMatrix<Complex64> {
    let k = m.dim();
    DMatrix::from_fn(k, k, |i, j| {
        let e = m.get(i, j);
        Complex64::new(to_f64(&e.re) / scale, to_f64(&e.im) / scale)
    })
}

/// Map each M to C·(M/n)·C⁻¹ where C*C = G, which lands in SO(k) or SU(k).
pub fn embed_solutions(form: &Form, set: &SolutionSet) -> Result<EmpiricalSample> {
    if set.is_empty() {
        return Err(Error::EmptySample);
    }
    let scale = form.gram().entries().iter().map(|g| to_f64(&g.norm()).sqrt()).fold(1.0, f64::max);
    let emb = form.real_embedding(RESIDUAL_CAP * scale)?;
    let c = emb.c;
    let c_inv = c.clone().try_inverse().ok_or(Error::NotPositiveDefinite)?;
    let n = set.n as f64;
    let mats: Vec<DMatrix<Complex64>> =
        set.solutions.par_iter().map(|m| &c * gauss_to_complex(m, n) * &c_inv).collect();
    let sample = EmpiricalSample::from_matrices(
        form.kind().into(),
        form.rank(),
        &mats,
        SampleSource::Solutions { form: form.label(), n: set.n },
    )?;
    check_residual(sample)
}

/// Rotations M/n from integer numerators for x² + y² + z²; no change of
/// basis is needed.
pub fn embed_rotations(n: u64, numerators: &[Rot]) -> Result<EmpiricalSample> {
    if numerators.is_empty() {
        return Err(Error::EmptySample);
    }
    let nf = n as f64;
    let mut coords = Vec::with_capacity(numerators.len() * 9);
    let mut residual: f64 = 0.0;
    for m in numerators {
        let g: Vec<f64> = m.iter().map(|&v| v as f64 / nf).collect();
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|l| g[3 * l + i] * g[3 * l + j]).sum();
                residual = residual.max((dot - f64::from(u8::from(i == j))).abs());
            }
        }
        coords.extend(g);
    }
    let sample = EmpiricalSample {
        kind: GroupKind::Orthogonal,
        k: 3,
        source: SampleSource::Solutions { form: "x^2+y^2+z^2".into(), n },
        orthogonality_residual: residual,
        coords,
    };
    check_residual(sample)
}

fn check_residual(s: EmpiricalSample) -> Result<EmpiricalSample> {
    if s.orthogonality_residual > RESIDUAL_CAP {
        return Err(Error::ResidualTooLarge { residual: s.orthogonality_residual, cap: RESIDUAL_CAP });
    }
    Ok(s)
}

/// One Haar-distributed element of SO(k) or SU(k): QR of a Gaussian
/// matrix with the diagonal of R made positive, then one column rescaled
/// by the conjugate determinant.
fn haar_one(k: usize, kind: GroupKind, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(k, k, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = if kind == GroupKind::Unitary { StandardNormal.sample(rng) } else { 0.0 };
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..k {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..k {
            q[(i, j)] *= phase;
        }
    }
    let det = q.determinant();
    let fix = det.conj() / det.norm();
    for i in 0..k {
        q[(i, 0)] *= fix;
    }
    q
}

/// `count` independent Haar samples. Sample i is drawn from its own
/// ChaCha8 stream, so the output does not depend on the thread count.
pub fn haar_sample(k: usize, count: usize, seed: u64, kind: GroupKind) -> Result<EmpiricalSample> {
    if count == 0 {
        return Err(Error::EmptySample);
    }
    if k == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mats: Vec<DMatrix<Complex64>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            haar_one(k, kind, &mut rng)
        })
        .collect();
    let sample = EmpiricalSample::from_matrices(kind, k, &mats, SampleSource::Haar { seed })?;
    check_residual(sample)
}

/// Product of coordinates raised to the given powers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monomial {
    /// (coordinate, power) with power ≥ 1, increasing coordinates.
    pub factors: Vec<(usize, u32)>,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|f| f.1).sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.factors.iter().map(|&(c, p)| x[c].powi(p as i32)).product()
    }

    pub fn id(&self, sample: &EmpiricalSample) -> String {
        self.factors
            .iter()
            .map(|&(c, p)| if p == 1 { sample.coord_name(c) } else { format!("{}^{p}", sample.coord_name(c)) })
            .collect::<Vec<_>>()
            .join("*")
    }

    /// Whether a Haar symmetry of the group flips the sign of this
    /// monomial, forcing its integral to vanish.
    ///
    /// G ↦ D₁GD₂ with diagonal signs of product 1 multiplies the monomial
    /// by Π s_i^(row degree) · Π t_j^(column degree); some choice gives −1
    /// unless the row and column degrees all have the same parity. In the
    /// unitary case G ↦ Ḡ also flips every imaginary part.
    pub fn odd_under_symmetry(&self, k: usize, kind: GroupKind) -> bool {
        let kk = k * k;
        let mut rows = vec![0u32; k];
        let mut cols = vec![0u32; k];
        let mut im = 0u32;
        for &(c, p) in &self.factors {
            let idx = c % kk;
            rows[idx / k] += p;
            cols[idx % k] += p;
            if c >= kk {
                im += p;
            }
        }
        if kind == GroupKind::Unitary && im % 2 == 1 {
            return true;
        }
        let first = rows[0] % 2;
        !rows.iter().chain(&cols).all(|r| r % 2 == first)
    }
}

/// All monomials of degree 1..=max_degree in `width` coordinates, by
/// degree and then lexicographically.
pub fn monomials(width: usize, max_degree: u32) -> Vec<Monomial> {
    fn rec(start: usize, width: usize, left: u32, cur: &mut Vec<(usize, u32)>, out: &mut Vec<Monomial>) {
        if left == 0 {
            out.push(Monomial { factors: cur.clone() });
            return;
        }
        for c in start..width {
            for p in (1..=left).rev() {
                cur.push((c, p));
                rec(c + 1, width, left - p, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    for d in 1..=max_degree {
        let mut level = Vec::new();
        rec(0, width, d, &mut Vec::new(), &mut level);
        level.sort();
        out.extend(level);
    }
    out
}

/// Where a reference value came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ReferenceSource {
    /// Zero by a sign symmetry of Haar measure.
    ExactSymmetry,
    /// Closed-form value, such as the area of a spherical cap.
    ExactFormula,
    MonteCarlo { samples: usize, std_error: f64 },
    /// Supplied by the caller.
    Table,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatEntry {
    pub id: String,
    pub empirical: f64,
    pub reference: f64,
    pub source: ReferenceSource,
    pub gap: f64,
}

impl StatEntry {
    fn new(id: String, empirical: f64, reference: f64, source: ReferenceSource) -> Self {
        StatEntry { id, empirical, reference, source, gap: (empirical - reference).abs() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub entries: Vec<StatEntry>,
}

impl DiscrepancyReport {
    pub fn sup_gap(&self) -> f64 {
        self.entries.iter().map(|e| e.gap).fold(0.0, f64::max)
    }

    /// Largest Monte Carlo standard error among the references.
    pub fn max_std_error(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| match e.source {
                ReferenceSource::MonteCarlo { std_error, .. } => std_error,
                _ => 0.0,
            })
            .fold(0.0, f64::max)
    }

    /// Every stored gap equals |empirical − reference|.
    pub fn is_consistent(&self) -> bool {
        self.entries.iter().all(|e| e.gap == (e.empirical - e.reference).abs())
    }
}

/// Haar reference for [`weyl_discrepancy`].
#[derive(Clone, Copy, Debug)]
pub enum Reference<'a> {
    /// Monte Carlo averages over a sample.
    Sample(&'a EmpiricalSample),
    /// Values keyed by monomial id.
    Table(&'a BTreeMap<String, f64>),
}

/// Per-monomial (Σ f, Σ f²), chunked and merged in order so that the
/// result does not depend on scheduling.
fn moments(sample: &EmpiricalSample, monos: &[Monomial]) -> Vec<(f64, f64)> {
    let n = sample.len();
    let chunks: Vec<Vec<(f64, f64)>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![(0.0, 0.0); monos.len()];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let x = sample.coords(i);
                for (a, m) in acc.iter_mut().zip(monos) {
                    let v = m.eval(x);
                    a.0 += v;
                    a.1 += v * v;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![(0.0, 0.0); monos.len()];
    for c in chunks {
        for (t, v) in total.iter_mut().zip(c) {
            t.0 += v.0;
            t.1 += v.1;
        }
    }
    total
}

/// |sample average − Haar integral| for every entry monomial of degree at
/// most `max_degree` (1 to 4).
pub fn weyl_discrepancy(sample: &EmpiricalSample, reference: Reference<'_>, max_degree: u32) -> Result<DiscrepancyReport> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(1..=4).contains(&max_degree) {
        return Err(Error::InvalidArgument(format!("degree {max_degree} outside 1..=4")));
    }
    let monos = monomials(sample.width(), max_degree);
    let emp = moments(sample, &monos);
    let n = sample.len() as f64;
    let refs = match reference {
        Reference::Sample(r) => {
            if r.is_empty() {
                return Err(Error::EmptySample);
            }
            if r.k != sample.k || r.kind != sample.kind {
                return Err(Error::DimensionMismatch("reference sample has another group".into()));
            }
            Some((r, moments(r, &monos)))
        }
        Reference::Table(_) => None,
    };
    let mut entries = Vec::with_capacity(monos.len());
    for (idx, m) in monos.iter().enumerate() {
        let id = m.id(sample);
        let empirical = emp[idx].0 / n;
        let (reference_value, source) = if m.odd_under_symmetry(sample.k, sample.kind) {
            (0.0, ReferenceSource::ExactSymmetry)
        } else {
            match (&refs, reference) {
                (Some((r, mom)), _) => {
                    let rn = r.len() as f64;
                    let mean = mom[idx].0 / rn;
                    let var = (mom[idx].1 / rn - mean * mean).max(0.0);
                    let std_error = (var / rn).sqrt();
                    (mean, ReferenceSource::MonteCarlo { samples: r.len(), std_error })
                }
                (None, Reference::Table(t)) => {
                    let v = *t.get(&id).ok_or_else(|| Error::InvalidArgument(format!("no reference for {id}")))?;
                    (v, ReferenceSource::Table)
                }
                (None, Reference::Sample(_)) => unreachable!(),
            }
        };
        entries.push(StatEntry::new(id, empirical, reference_value, source));
    }
    Ok(DiscrepancyReport { entries })
}

/// Fraction of the images G·direction inside each cap of angular radius θ
/// around `direction`, against the normalised area (1 − cos θ)/2. Points
/// within [`CAP_BOUNDARY`] of the rim count ½.
pub fn cap_discrepancy(sample: &EmpiricalSample, direction: &[f64], cap_angles: &[f64]) -> Result<DiscrepancyReport> {
    if sample.k != 3 || sample.kind != GroupKind::Orthogonal {
        return Err(Error::Unsupported("caps are defined for rotations of R³".into()));
    }
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if direction.len() != 3 {
        return Err(Error::DimensionMismatch("direction must have 3 coordinates".into()));
    }
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("direction has norm {norm}, expected 1")));
    }
    // cosine of the angle between G·d and d
    let cosines: Vec<f64> = (0..sample.len())
        .map(|i| {
            let g = sample.coords(i);
            (0..3).map(|r| direction[r] * (0..3).map(|c| g[3 * r + c] * direction[c]).sum::<f64>()).sum()
        })
        .collect();
    let n = cosines.len() as f64;
    let mut entries = Vec::with_capacity(cap_angles.len());
    for &theta in cap_angles {
        let ct = theta.cos();
        let fraction = if theta >= std::f64::consts::PI {
            1.0
        } else if theta <= 0.0 {
            0.0
        } else {
            let weight: f64 = cosines
                .iter()
                .map(|&c| {
                    if (c - ct).abs() <= CAP_BOUNDARY {
                        0.5
                    } else if c > ct {
                        1.0
                    } else {
                        0.0
                    }
                })
                .sum();
            weight / n
        };
        let area = ((1.0 - ct) / 2.0).clamp(0.0, 1.0);
        entries.push(StatEntry::new(format!("cap({theta:.6})"), fraction, area, ReferenceSource::ExactFormula));
    }
    Ok(DiscrepancyReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{solve_scaled_isometry, EnumerateOptions};
    use crate::so3::rotation_numerators;

    fn id3() -> Form {
        Form::identity(FormKind::Quadratic, 3).unwrap()
    }

    fn so3z() -> EmpiricalSample {
        embed_solutions(&id3(), &solve_scaled_isometry(&id3(), 1, EnumerateOptions::default()).unwrap()).unwrap()
    }

    fn find<'a>(r: &'a DiscrepancyReport, id: &str) -> &'a StatEntry {
        r.entries.iter().find(|e| e.id == id).unwrap()
    }

    #[test]
    fn monomial_counts() {
        // C(w + d, d) − 1 monomials of degree 1..=d in w variables
        assert_eq!(monomials(9, 1).len(), 9);
        assert_eq!(monomials(9, 2).len(), 54);
        assert_eq!(monomials(9, 4).len(), 714);
        assert_eq!(monomials(2, 3).len(), 9);
    }

    #[test]
    fn symmetry_zeros() {
        let ms = monomials(9, 2);
        let odd: Vec<bool> = ms.iter().map(|m| m.odd_under_symmetry(3, GroupKind::Orthogonal)).collect();
        // of degree 2 only the nine squares survive
        assert_eq!(odd.iter().filter(|o| !**o).count(), 9);
        // degree 3: g11·g22·g33 has every row and column degree odd
        let det_term = Monomial { factors: vec![(0, 1), (4, 1), (8, 1)] };
        assert!(!det_term.odd_under_symmetry(3, GroupKind::Orthogonal));
    }

    #[test]
    fn identity_is_far_from_haar() {
        let s = EmpiricalSample::from_matrices(
            GroupKind::Orthogonal,
            3,
            &[DMatrix::identity(3, 3)],
            SampleSource::Haar { seed: 0 },
        )
        .unwrap();
        let r = weyl_discrepancy(&s, Reference::Table(&BTreeMap::new()), 1).unwrap();
        assert_eq!(find(&r, "g11").gap, 1.0);
        assert!(r.is_consistent());
    }

    #[test]
    fn signed_permutations_average_to_zero() {
        let s = so3z();
        assert_eq!(s.len(), 24);
        assert_eq!(s.orthogonality_residual, 0.0);
        let r = weyl_discrepancy(&s, Reference::Table(&BTreeMap::new()), 1).unwrap();
        assert!(r.entries.iter().all(|e| e.gap == 0.0));
    }

    #[test]
    fn haar_moments() {
        let s = haar_sample(3, 100_000, 7, GroupKind::Orthogonal).unwrap();
        assert!(s.orthogonality_residual < 1e-12);
        let r = weyl_discrepancy(&s, Reference::Sample(&s), 2).unwrap();
        let monos = monomials(9, 2);
        let mom = moments(&s, &monos);
        let n = s.len() as f64;
        for (m, (sum, sq)) in monos.iter().zip(&mom) {
            let mean = sum / n;
            let se = ((sq / n - mean * mean) / n).sqrt();
            if m.degree() == 1 {
                assert!(mean.abs() < 4.0 * se, "{} {mean}", m.id(&s));
            }
        }
        let g11sq = find(&r, "g11^2");
        let se = match g11sq.source {
            ReferenceSource::MonteCarlo { std_error, .. } => std_error,
            _ => panic!("expected a Monte Carlo reference"),
        };
        assert!((g11sq.reference - 1.0 / 3.0).abs() < 4.0 * se);
        let column: f64 = ["g11^2", "g21^2", "g31^2"].iter().map(|id| find(&r, id).reference).sum();
        assert!((column - 1.0).abs() < 1e-12);
        // self comparison
        assert!(r
            .entries
            .iter()
            .filter(|e| matches!(e.source, ReferenceSource::MonteCarlo { .. }))
            .all(|e| e.gap == 0.0));
    }

    #[test]
    fn haar_is_reproducible_and_special() {
        let a = haar_sample(4, 50, 11, GroupKind::Unitary).unwrap();
        let b = haar_sample(4, 50, 11, GroupKind::Unitary).unwrap();
        assert_eq!(a.coords, b.coords);
        for i in 0..a.len() {
            let d = a.matrix(i).determinant();
            assert!((d - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        }
        let c = haar_sample(3, 50, 12, GroupKind::Orthogonal).unwrap();
        for i in 0..c.len() {
            assert!((c.matrix(i).determinant().re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn discrepancy_ignores_order() {
        let s = embed_rotations(7, &rotation_numerators(7).unwrap()).unwrap();
        let mut rev = rotation_numerators(7).unwrap();
        rev.reverse();
        let t = embed_rotations(7, &rev).unwrap();
        let h = haar_sample(3, 2000, 1, GroupKind::Orthogonal).unwrap();
        let a = weyl_discrepancy(&s, Reference::Sample(&h), 2).unwrap();
        let b = weyl_discrepancy(&t, Reference::Sample(&h), 2).unwrap();
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert!((x.empirical - y.empirical).abs() < 1e-12);
        }
    }

    #[test]
    fn embedding_agrees_with_direct_rotations() {
        let set = solve_scaled_isometry(&id3(), 5, EnumerateOptions::default()).unwrap();
        let e = embed_solutions(&id3(), &set).unwrap();
        let d = embed_rotations(5, &rotation_numerators(5).unwrap()).unwrap();
        assert_eq!(e.len(), d.len());
        assert!(e.orthogonality_residual < 1e-12);
    }

    #[test]
    fn non_diagonal_form_embeds_orthogonally() {
        let rows = [[2, 1, 0, 0, 0], [1, 2, 0, 0, 0], [0, 0, 1, 0, 0], [0, 0, 0, 1, 0], [0, 0, 0, 0, 1]];
        let f = Form::from_rows(&rows).unwrap();
        let set = solve_scaled_isometry(&f, 1, EnumerateOptions::default()).unwrap();
        // 12 isometries of the hexagonal plane times 48 of Z³, half with det 1
        assert_eq!(set.len(), 12 * 48 / 2);
        let e = embed_solutions(&f, &set).unwrap();
        assert!(e.orthogonality_residual < 1e-12);
    }

    #[test]
    fn hermitian_embedding() {
        let f = Form::hermitian(GaussMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => 2.into(),
            (1, 1) => 3.into(),
            (0, 1) => crate::arith::GaussianInt::new(1, 1),
            _ => crate::arith::GaussianInt::new(1, -1),
        }))
        .unwrap();
        let set = solve_scaled_isometry(&f, 1, EnumerateOptions::default()).unwrap();
        let e = embed_solutions(&f, &set).unwrap();
        assert_eq!(e.kind, GroupKind::Unitary);
        assert!(e.orthogonality_residual < 1e-12);
    }

    #[test]
    fn caps() {
        let s = so3z();
        let r = cap_discrepancy(&s, &[1.0, 0.0, 0.0], &[std::f64::consts::FRAC_PI_2, std::f64::consts::PI]).unwrap();
        assert_eq!(r.entries[0].empirical, 0.5);
        assert!(r.entries[0].gap < 1e-15);
        assert_eq!(r.entries[1].empirical, 1.0);
        assert!(cap_discrepancy(&s, &[1.0, 1.0, 0.0], &[1.0]).is_err());
        let id = EmpiricalSample::from_matrices(
            GroupKind::Orthogonal,
            3,
            &[DMatrix::identity(3, 3)],
            SampleSource::Haar { seed: 0 },
        )
        .unwrap();
        let r = cap_discrepancy(&id, &[0.0, 0.0, 1.0], &[std::f64::consts::PI]).unwrap();
        assert_eq!((r.entries[0].empirical, r.entries[0].reference, r.entries[0].gap), (1.0, 1.0, 0.0));
    }

    #[test]
    fn bad_inputs() {
        let s = so3z();
        assert!(weyl_discrepancy(&s, Reference::Sample(&s), 5).is_err());
        assert!(haar_sample(3, 0, 1, GroupKind::Orthogonal).is_err());
        assert_eq!(embed_rotations(3, &[]).unwrap_err(), Error::EmptySample);
    }
}
