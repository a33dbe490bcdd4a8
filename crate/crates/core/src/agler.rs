//! Operator-class membership, Agler-norm bounds and interior perturbations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::cdomain::{contains, eval_pencil, eval_pencil_operator, interior_grid, operator_pencil_margin, DomainComponent, DomainSpec};
use crate::error::{Error, Result};
use crate::numlin::{min_eigenvalue, polar_decompose, spectral_norm, C64, CMatrix, Lu};
use crate::ratcalc::{
    lift_to_polydisk, ratfun_eval_at_matrix, sup_norm_boundary, LaurentPoly, LiftedFunction, MatRatFun1,
    PointFunction, Poly1, SupRegion,
};

/// Slack on `‖γⱼ(T)‖ ≤ 1`.
pub const MEMBER_TOL: f64 = 1e-12;
/// Pencil margin needed for strict membership.
pub const STRICT_TOL: f64 = 1e-9;
/// Attempts before random sampling in rejection mode falls back to normal mode.
pub const REJECTION_BUDGET: usize = 1000;
/// Margin kept by eigenvalues drawn for normal-mode samples.
const SAMPLE_EIGEN_MARGIN: f64 = 1e-6;
const SAMPLE_GRID: usize = 48;
const BOUNDARY_GRID: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    /// Smallest LU pivot of `P₊ⱼ(T)` relative to its 1-norm; 0 when singular.
    pub pivot_margins: Vec<f64>,
    /// `‖γⱼ(T)‖`, infinite when `P₊ⱼ(T)` is singular.
    pub gamma_norms: Vec<f64>,
    /// Smallest eigenvalue of `P₊(T)*P₊(T) − P₋(T)*P₋(T)`.
    pub pencil_margin: f64,
    pub member: bool,
    pub strict_member: bool,
    /// Membership by pencil eigenvalues matches membership by γ-norms.
    pub characterizations_agree: bool,
}

pub fn in_class(spec: &DomainSpec, t: &CMatrix) -> Result<ClassReport> {
    let blocks = eval_pencil_operator(spec, t)?;
    let mut pivot_margins = Vec::with_capacity(blocks.len());
    let mut gamma_norms = Vec::with_capacity(blocks.len());
    let mut pencil_member = true;
    let slack = (1.0 + MEMBER_TOL) * (1.0 + MEMBER_TOL);
    for (p, m) in &blocks {
        match Lu::new(p) {
            Ok(lu) => {
                pivot_margins.push(lu.min_pivot() / p.norm_one().max(f64::MIN_POSITIVE));
                gamma_norms.push(spectral_norm(&lu.solve(m)?)?);
                let h = &(&p.adjoint() * p).scale_real(slack) - &(&m.adjoint() * m);
                pencil_member &= min_eigenvalue(&h)? >= 0.0;
            }
            Err(Error::Singular { .. }) => {
                pivot_margins.push(0.0);
                gamma_norms.push(f64::INFINITY);
                pencil_member = false;
            }
            Err(e) => return Err(e),
        }
    }
    let pencil_margin = operator_pencil_margin(&blocks)?;
    let member = gamma_norms.iter().all(|&g| g <= 1.0 + MEMBER_TOL);
    let invertible = pivot_margins.iter().all(|&p| p > 0.0);
    Ok(ClassReport {
        pivot_margins,
        gamma_norms,
        pencil_margin,
        member,
        strict_member: invertible && pencil_margin >= STRICT_TOL,
        characterizations_agree: member == pencil_member,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    Normal,
    Rejection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSample {
    pub t: CMatrix,
    /// Rejection sampling ran out of attempts and a normal sample was returned.
    pub fell_back: bool,
}

fn gaussian_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let data = (0..n * n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect();
    CMatrix::from_vec(n, n, data).expect("square data")
}

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> Result<CMatrix> {
    Ok(polar_decompose(&gaussian_matrix(n, rng))?.u)
}

fn normal_sample(points: &[C64], dim: usize, rng: &mut ChaCha8Rng) -> Result<CMatrix> {
    let u = random_unitary(dim, rng)?;
    let lam: Vec<C64> = (0..dim).map(|_| points[rng.random_range(0..points.len())]).collect();
    Ok(&(&u * &CMatrix::from_diag(&lam)) * &u.adjoint())
}

/// Random strict member of the class; deterministic in `seed`.
pub fn random_class_member(spec: &DomainSpec, dim: usize, seed: u64, mode: SampleMode) -> Result<ClassSample> {
    if dim == 0 {
        return Err(Error::Precondition("dimension must be at least 1".into()));
    }
    let points = interior_grid(spec, SAMPLE_GRID, SAMPLE_EIGEN_MARGIN);
    if points.is_empty() {
        return Err(Error::InvalidDomain("no interior grid points found; the domain may be empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = normal_sample(&points, dim, &mut rng)?;
    if mode == SampleMode::Normal {
        return Ok(ClassSample { t: base, fell_back: false });
    }
    let scale = spec.bounding_disk().map_or(1.0, |(_, r)| r);
    for _ in 0..REJECTION_BUDGET {
        let t0 = normal_sample(&points, dim, &mut rng)?;
        let e = gaussian_matrix(dim, &mut rng);
        let size: f64 = rng.random_range(0.0..0.25) * scale / spectral_norm(&e)?.max(f64::MIN_POSITIVE);
        let t = &t0 + &e.scale_real(size);
        if in_class(spec, &t)?.strict_member {
            return Ok(ClassSample { t, fell_back: false });
        }
    }
    Ok(ClassSample { t: base, fell_back: true })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub m: CMatrix,
    /// Entries `a₁, …, a_{k+l}` of `M^k + M^{−l}`, one per row.
    pub predicted: Vec<f64>,
}

/// The `(k+l) × (k+l)` matrix attaining `‖z^k + z^{−l}‖` on `A_{1,r}`.
pub fn witness_kl(k: usize, l: usize, r: f64) -> Result<Witness> {
    if k == 0 || l == 0 || !(r > 0.0 && r < 1.0) {
        return Err(Error::Precondition("need k, l >= 1 and 0 < r < 1".into()));
    }
    let n = k + l;
    let mut m = CMatrix::zeros(n, n);
    // 1-based (i, i+1) entries
    for i in 1..n {
        m[(i - 1, i)] = C64::new(if i <= k { 1.0 } else { r }, 0.0);
    }
    m[(n - 1, 0)] = C64::new(r, 0.0);
    let (lo, hi) = (k.min(l), k.max(l));
    let predicted = (1..=n)
        .map(|i| {
            if i <= lo {
                r.powi(i as i32 - 1) + r.powi(-((l + 1 - i) as i32))
            } else if i <= hi + 1 {
                r.powi(lo as i32) + r.powi(-((l - lo) as i32))
            } else {
                r.powi((n + 1 - i) as i32) + r.powi(-((i - k - 1) as i32))
            }
        })
        .collect();
    Ok(Witness { m, predicted })
}

/// A function given either as a rational matrix function or a Laurent polynomial.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainFunction {
    Rational(MatRatFun1),
    Laurent(LaurentPoly),
}

impl DomainFunction {
    pub fn eval_matrix(&self, t: &CMatrix) -> Result<CMatrix> {
        match self {
            DomainFunction::Rational(f) => ratfun_eval_at_matrix(f, t),
            DomainFunction::Laurent(f) => f.eval_matrix(t),
        }
    }

    pub fn eval(&self, z: C64) -> Result<CMatrix> {
        match self {
            DomainFunction::Rational(f) => f.eval(z),
            DomainFunction::Laurent(f) => Ok(CMatrix::scalar(f.eval(z))),
        }
    }

    /// The same function over a monic monomial denominator when Laurent.
    pub fn to_ratfun(&self) -> Result<MatRatFun1> {
        match self {
            DomainFunction::Rational(f) => Ok(f.clone()),
            DomainFunction::Laurent(f) => {
                let shift = (-f.kmin()).max(0) as usize;
                let mut num = vec![C64::new(0.0, 0.0); shift.saturating_add_signed(f.kmin() as isize)];
                num.extend_from_slice(f.coeffs());
                MatRatFun1::scalar(Poly1::new(num), Poly1::monomial(C64::new(1.0, 0.0), shift))
            }
        }
    }
}

impl PointFunction for DomainFunction {
    fn arity(&self) -> usize {
        1
    }
    fn eval_at(&self, z: &[C64]) -> Result<CMatrix> {
        self.eval(z[0])
    }
}

fn norm_of(m: &CMatrix) -> Result<f64> {
    if m.shape() == (1, 1) {
        Ok(m[(0, 0)].norm())
    } else {
        spectral_norm(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerSource {
    ClassSample,
    BoundaryPoint,
    Witness,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBound {
    pub bound: f64,
    pub witness: CMatrix,
    pub source: LowerSource,
    /// Samples whose evaluation failed.
    pub skipped: usize,
    /// The scalar boundary estimate on its own.
    pub boundary_sup: f64,
}

/// Dimensions `{1, 2, 3}` plus `k + l` for `z^k + z^{−l}`.
pub fn default_dims(f: &DomainFunction) -> Vec<usize> {
    let mut dims = vec![1, 2, 3];
    if let DomainFunction::Laurent(l) = f {
        if let Some((k, l)) = l.as_kl() {
            let n = (k + l) as usize;
            if !dims.contains(&n) {
                dims.push(n);
            }
        }
    }
    dims
}

fn sample_seed(seed: u64, dim: usize, i: usize) -> u64 {
    seed ^ (dim as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (i as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9)
}

/// Lower bound for the Agler norm from strict class samples, boundary points
/// and (for `z^k + z^{−l}` on a centered annulus) the explicit witness.
pub fn agler_lower_bound(
    f: &DomainFunction,
    spec: &DomainSpec,
    samples: usize,
    dims: &[usize],
    seed: u64,
) -> Result<LowerBound> {
    let jobs: Vec<(usize, usize)> = dims.iter().flat_map(|&d| (0..samples).map(move |i| (d, i))).collect();
    let results: Vec<Option<(f64, CMatrix)>> = jobs
        .par_iter()
        .map(|&(d, i)| {
            let mode = if i % 2 == 0 { SampleMode::Normal } else { SampleMode::Rejection };
            let t = random_class_member(spec, d, sample_seed(seed, d, i), mode).ok()?.t;
            let v = norm_of(&f.eval_matrix(&t).ok()?).ok()?;
            v.is_finite().then_some((v, t))
        })
        .collect();
    let mut skipped = 0;
    let mut best: Option<(f64, CMatrix, LowerSource)> = None;
    for r in results {
        match r {
            None => skipped += 1,
            Some((v, t)) => {
                if best.as_ref().is_none_or(|b| v > b.0) {
                    best = Some((v, t, LowerSource::ClassSample));
                }
            }
        }
    }
    let boundary = sup_norm_boundary(f, SupRegion::DomainBoundary(spec), BOUNDARY_GRID)?;
    if best.as_ref().is_none_or(|b| boundary.value > b.0) {
        best = Some((boundary.value, CMatrix::scalar(boundary.argmax[0]), LowerSource::BoundaryPoint));
    }
    if let (DomainFunction::Laurent(lp), Some((outer, inner))) = (f, spec.as_centered_annulus()) {
        if let Some((k, l)) = lp.as_kl() {
            let w = witness_kl(k as usize, l as usize, inner / outer)?;
            let t = w.m.scale_real(outer);
            if let Ok(v) = f.eval_matrix(&t).and_then(|x| norm_of(&x)) {
                if best.as_ref().is_none_or(|b| v > b.0) {
                    best = Some((v, t, LowerSource::Witness));
                }
            }
        }
    }
    let (bound, witness, source) = best.expect("boundary estimate always present");
    Ok(LowerBound { bound, witness, source, skipped, boundary_sup: boundary.value })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperBound {
    pub bound: f64,
    pub argmax: Vec<C64>,
    pub lift: LiftedFunction,
    /// Set for `k ≥ 3`, where the torus sup of the lift is not known to bound its Agler norm.
    pub sup_norm_surrogate: bool,
}

/// Torus sup of a given lift.
pub fn quotient_upper_bound_for_lift(g: LiftedFunction, grid: usize) -> Result<UpperBound> {
    let est = sup_norm_boundary(&g, SupRegion::Torus, grid)?;
    let surrogate = g.k() >= 3;
    Ok(UpperBound { bound: est.value, argmax: est.argmax, lift: g, sup_norm_surrogate: surrogate })
}

/// Torus sup of the standard polydisk lift of `F`.
pub fn quotient_upper_bound(f: &MatRatFun1, spec: &DomainSpec, grid: usize) -> Result<UpperBound> {
    quotient_upper_bound_for_lift(lift_to_polydisk(f, spec)?, grid)
}

/// `k + k(k−1)/√3`.
pub fn psi_cb_bound(k: usize) -> f64 {
    let k = k as f64;
    k + k * (k - 1.0) / 3f64.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerturbMode {
    /// `(1−ε)T + εpI` on a domain without holes.
    Convex { p: C64 },
    /// Three-way spectral split for one disk with a ring of holes.
    Multihole,
    /// Two-way spectral split for a disk with a single hole.
    Decentered,
}

/// Relative tolerance for the equal-tangent-length condition of the multihole shape.
const RING_TOL: f64 = 1e-9;

fn disk_and_holes(spec: &DomainSpec) -> Result<(C64, f64, Vec<(C64, f64)>)> {
    let mut it = spec.components.iter();
    let Some(&DomainComponent::Disk { center, radius }) = it.next() else {
        return Err(Error::Precondition("shape needs exactly one disk first".into()));
    };
    let mut holes = Vec::new();
    for c in it {
        match *c {
            DomainComponent::Hole { center: a, radius: r } => holes.push((a - center, r)),
            _ => return Err(Error::Precondition("shape allows one disk followed by holes only".into())),
        }
    }
    if holes.is_empty() {
        return Err(Error::Precondition("shape needs at least one hole".into()));
    }
    for &(a, r) in &holes {
        if a.norm() + r >= radius {
            return Err(Error::Precondition("every hole must lie inside the disk".into()));
        }
    }
    Ok((center, radius, holes))
}

/// Rescale the singular values of `T − cI` by `factor(σ)` and translate back.
fn spectral_rescale(t: &CMatrix, c: C64, factor: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let shifted = t.add_identity(-c);
    let pol = polar_decompose(&shifted)?;
    let v = &pol.right_vectors;
    let w = &pol.u * v; // left singular vectors
    let sig: Vec<C64> = pol.singular_values.iter().map(|&s| C64::new(factor(s) * s, 0.0)).collect();
    Ok((&(&w * &CMatrix::from_diag(&sig)) * &v.adjoint()).add_identity(c))
}

/// Move a class member towards the strict interior.
pub fn perturb_interior(spec: &DomainSpec, t: &CMatrix, eps: f64, mode: PerturbMode) -> Result<CMatrix> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition("eps must lie in (0, 1)".into()));
    }
    if !t.is_square() {
        return Err(Error::Shape("T must be square".into()));
    }
    match mode {
        PerturbMode::Convex { p } => {
            if spec.k1() != spec.k2() {
                return Err(Error::Precondition("convex mode needs a domain without holes".into()));
            }
            if !contains(spec, p, true) {
                return Err(Error::Precondition(format!("p = {p} is not strictly inside the domain")));
            }
            Ok(&t.scale_real(1.0 - eps) + &CMatrix::identity(t.rows()).scale(p * eps))
        }
        PerturbMode::Multihole => {
            let (center, radius, holes) = disk_and_holes(spec)?;
            let (a2, r2) = holes[0];
            let d0sq = a2.norm_sqr() - r2 * r2;
            if d0sq <= 0.0 {
                return Err(Error::Precondition(
                    "multihole mode needs |α|² − r² > 0 (hole not covering the disk center); use decentered mode".into(),
                ));
            }
            for &(a, r) in &holes[1..] {
                if ((a.norm_sqr() - r * r) - d0sq).abs() > RING_TOL * d0sq.max(1.0) {
                    return Err(Error::Precondition("holes do not share a common tangent length".into()));
                }
            }
            let d0 = d0sq.sqrt();
            let d1 = 0.5 * (radius + holes.iter().map(|&(a, r)| r + a.norm()).fold(0.0, f64::max));
            spectral_rescale(t, center, |s| {
                if s <= d0 {
                    1.0 - eps
                } else if s <= d1 {
                    1.0 + eps
                } else {
                    1.0 - eps
                }
            })
        }
        PerturbMode::Decentered => {
            let (center, radius, holes) = disk_and_holes(spec)?;
            if holes.len() != 1 {
                return Err(Error::Precondition("decentered mode needs exactly one hole".into()));
            }
            let (a, r) = holes[0];
            if a.norm() >= r {
                return Err(Error::Precondition(
                    "decentered mode needs the hole to cover the disk center; use multihole mode".into(),
                ));
            }
            let d1 = 0.5 * (radius + r + a.norm());
            spectral_rescale(t, center, |s| if s <= d1 { 1.0 + eps } else { 1.0 - eps })
        }
    }
}

/// Scalar pencil margin `min_j |P₊ⱼ(z)|² − |P₋ⱼ(z)|²`.
pub fn scalar_margin(spec: &DomainSpec, z: C64) -> f64 {
    let pen = eval_pencil(spec, z);
    pen.pplus.iter().zip(&pen.pminus).map(|(p, m)| p.norm_sqr() - m.norm_sqr()).fold(f64::INFINITY, f64::min)
}
