//! Domains built from disks, holes and half-planes.
//!
//! A domain is the intersection of an ordered list of components: closed
//! disks first, then complements of open disks ("holes"), then closed
//! half-planes `Re(e^{iθ} z) ≤ r`. Each component carries a Möbius
//! coordinate γⱼ sending it onto the closed unit disk, and the diagonal
//! pencils `P₊`, `P₋` with `P₋(z) P₊(z)⁻¹ = diag(γ₁(z), …, γ_k(z))`.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numlin::{inverse, min_eigenvalue, C64, CMatrix};

/// Relative slack used by the closed/strict membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

mod c64_pair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainComponent {
    /// `|z − center| ≤ radius`
    Disk {
        #[serde(with = "c64_pair")]
        center: C64,
        radius: f64,
    },
    /// `|z − center| ≥ radius` (on the Riemann sphere)
    Hole {
        #[serde(with = "c64_pair")]
        center: C64,
        radius: f64,
    },
    /// `Re(e^{iθ} z) ≤ offset`
    #[serde(rename = "halfplane")]
    HalfPlane { theta: f64, offset: f64 },
}

/// An affine polynomial `slope·z + intercept`; the diagonal entries of `P±`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub slope: C64,
    pub intercept: C64,
}

impl Affine {
    pub fn eval(&self, z: C64) -> C64 {
        self.slope * z + self.intercept
    }

    pub fn eval_matrix(&self, t: &CMatrix) -> CMatrix {
        t.scale(self.slope).add_identity(self.intercept)
    }
}

impl DomainComponent {
    pub fn disk(center: C64, radius: f64) -> Self {
        DomainComponent::Disk { center, radius }
    }

    pub fn hole(center: C64, radius: f64) -> Self {
        DomainComponent::Hole { center, radius }
    }

    pub fn half_plane(theta: f64, offset: f64) -> Self {
        DomainComponent::HalfPlane { theta: normalize_angle(theta), offset }
    }

    fn rank(&self) -> u8 {
        match self {
            DomainComponent::Disk { .. } => 0,
            DomainComponent::Hole { .. } => 1,
            DomainComponent::HalfPlane { .. } => 2,
        }
    }

    /// The `(P₊, P₋)` diagonal entries for this component.
    pub fn pencil_entries(&self) -> (Affine, Affine) {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        match *self {
            DomainComponent::Disk { center, radius } => (
                Affine { slope: zero, intercept: C64::new(radius, 0.0) },
                Affine { slope: one, intercept: -center },
            ),
            DomainComponent::Hole { center, radius } => (
                Affine { slope: one, intercept: -center },
                Affine { slope: zero, intercept: C64::new(radius, 0.0) },
            ),
            DomainComponent::HalfPlane { theta, offset } => {
                let e = C64::from_polar(1.0, theta);
                (
                    Affine { slope: e, intercept: C64::new(-offset - 1.0, 0.0) },
                    Affine { slope: e, intercept: C64::new(-offset + 1.0, 0.0) },
                )
            }
        }
    }

    /// γ for this component: `P₋ / P₊`.
    pub fn gamma(&self) -> MobiusMap {
        let (p, m) = self.pencil_entries();
        MobiusMap { a: m.slope, b: m.intercept, c: p.slope, d: p.intercept }
    }

    /// Signed membership slack: positive inside, zero on the boundary.
    fn slack(&self, z: C64) -> f64 {
        match *self {
            DomainComponent::Disk { center, radius } => radius - (z - center).norm(),
            DomainComponent::Hole { center, radius } => (z - center).norm() - radius,
            DomainComponent::HalfPlane { theta, offset } => {
                offset - (C64::from_polar(1.0, theta) * z).re
            }
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            DomainComponent::Disk { radius, .. } | DomainComponent::Hole { radius, .. } => {
                radius.max(1.0)
            }
            DomainComponent::HalfPlane { offset, .. } => offset.abs().max(1.0),
        }
    }

    pub fn contains(&self, z: C64, strict: bool) -> bool {
        let tol = MEMBERSHIP_TOL * self.scale();
        let s = self.slack(z);
        if strict {
            s > tol
        } else {
            s >= -tol
        }
    }

    /// Signed distance-like margin used when assigning poles: positive means
    /// `z` lies strictly outside the component.
    pub(crate) fn outside_margin(&self, z: C64) -> f64 {
        -self.slack(z)
    }
}

pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Ordered component list. Construction does not validate; see [`validate_domain`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainSpec {
    pub components: Vec<DomainComponent>,
}

impl<'de> Deserialize<'de> for DomainSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            components: Vec<DomainComponent>,
        }
        let raw = Raw::deserialize(d)?;
        Ok(DomainSpec::new(raw.components))
    }
}

impl DomainSpec {
    /// Half-plane angles are normalized into `[0, 2π)`.
    pub fn new(components: Vec<DomainComponent>) -> Self {
        let components = components
            .into_iter()
            .map(|c| match c {
                DomainComponent::HalfPlane { theta, offset } => {
                    DomainComponent::HalfPlane { theta: normalize_angle(theta), offset }
                }
                other => other,
            })
            .collect();
        DomainSpec { components }
    }

    /// `A_{R,r} = {r ≤ |z| ≤ R}`.
    pub fn annulus(outer: f64, inner: f64) -> Self {
        DomainSpec::new(vec![
            DomainComponent::disk(C64::new(0.0, 0.0), outer),
            DomainComponent::hole(C64::new(0.0, 0.0), inner),
        ])
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn k1(&self) -> usize {
        self.components.iter().filter(|c| matches!(c, DomainComponent::Disk { .. })).count()
    }

    pub fn k2(&self) -> usize {
        self.k1() + self.components.iter().filter(|c| matches!(c, DomainComponent::Hole { .. })).count()
    }

    /// Outer and inner radius when this is a centered annulus `{Disk(0,R), Hole(0,r)}`.
    pub fn as_centered_annulus(&self) -> Option<(f64, f64)> {
        match self.components.as_slice() {
            [DomainComponent::Disk { center: c1, radius: big }, DomainComponent::Hole { center: c2, radius: small }]
                if c1.norm() == 0.0 && c2.norm() == 0.0 && small < big =>
            {
                Some((*big, *small))
            }
            _ => None,
        }
    }

    pub fn component(&self, j: usize) -> Result<&DomainComponent> {
        self.components.get(j).ok_or(Error::IndexOutOfRange { index: j, k: self.k() })
    }

    /// The first disk bounds the domain.
    pub fn bounding_disk(&self) -> Option<(C64, f64)> {
        self.components.iter().find_map(|c| match *c {
            DomainComponent::Disk { center, radius } => Some((center, radius)),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    /// A component appears after one of a later kind.
    Ordering { index: usize },
    NonPositiveRadius { index: usize },
    NegativeOffset { index: usize },
    NonFinite { index: usize },
    NoDisk,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::Ordering { index } => {
                write!(f, "component {index}: out of order (disks, then holes, then half-planes)")
            }
            ValidationIssue::NonPositiveRadius { index } => {
                write!(f, "component {index}: radius must be > 0")
            }
            ValidationIssue::NegativeOffset { index } => {
                write!(f, "component {index}: half-plane offset must be >= 0")
            }
            ValidationIssue::NonFinite { index } => write!(f, "component {index}: non-finite parameter"),
            ValidationIssue::NoDisk => write!(f, "no Disk component: the domain would be unbounded"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.issues.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl From<ValidationReport> for Error {
    fn from(r: ValidationReport) -> Self {
        Error::InvalidDomain(r.to_string())
    }
}

/// Local checks only; an empty intersection is not detected here.
pub fn validate_domain(spec: &DomainSpec) -> std::result::Result<(), ValidationReport> {
    let mut issues = Vec::new();
    let mut max_rank = 0;
    for (index, c) in spec.components.iter().enumerate() {
        let rank = c.rank();
        if rank < max_rank {
            issues.push(ValidationIssue::Ordering { index });
        }
        max_rank = max_rank.max(rank);
        match *c {
            DomainComponent::Disk { center, radius } | DomainComponent::Hole { center, radius } => {
                if !(center.re.is_finite() && center.im.is_finite() && radius.is_finite()) {
                    issues.push(ValidationIssue::NonFinite { index });
                } else if radius <= 0.0 {
                    issues.push(ValidationIssue::NonPositiveRadius { index });
                }
            }
            DomainComponent::HalfPlane { theta, offset } => {
                if !(theta.is_finite() && offset.is_finite()) {
                    issues.push(ValidationIssue::NonFinite { index });
                } else if offset < 0.0 {
                    issues.push(ValidationIssue::NegativeOffset { index });
                }
            }
        }
    }
    if spec.k1() == 0 {
        issues.push(ValidationIssue::NoDisk);
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(ValidationReport { issues })
    }
}

/// `z ↦ (a z + b) / (c z + d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl MobiusMap {
    pub fn determinant(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, z: C64) -> C64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// `(aT + bI)(cT + dI)⁻¹`; the two factors commute.
    pub fn apply_matrix(&self, t: &CMatrix) -> Result<CMatrix> {
        let num = t.scale(self.a).add_identity(self.b);
        let den = t.scale(self.c).add_identity(self.d);
        Ok(&num * &inverse(&den)?)
    }
}

pub fn mobius_gamma(spec: &DomainSpec, j: usize) -> Result<MobiusMap> {
    Ok(spec.component(j)?.gamma())
}

/// Values of the diagonal pencils at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilPair {
    pub pplus: Vec<C64>,
    pub pminus: Vec<C64>,
}

impl PencilPair {
    pub fn pplus_matrix(&self) -> CMatrix {
        CMatrix::from_diag(&self.pplus)
    }

    pub fn pminus_matrix(&self) -> CMatrix {
        CMatrix::from_diag(&self.pminus)
    }

    /// Entrywise `P₋/P₊`, or `None` where `P₊` vanishes.
    pub fn ratios(&self) -> Vec<Option<C64>> {
        self.pplus
            .iter()
            .zip(&self.pminus)
            .map(|(p, m)| if p.norm() == 0.0 { None } else { Some(m / p) })
            .collect()
    }
}

pub fn eval_pencil(spec: &DomainSpec, z: C64) -> PencilPair {
    let (pplus, pminus) = spec
        .components
        .iter()
        .map(|c| {
            let (p, m) = c.pencil_entries();
            (p.eval(z), m.eval(z))
        })
        .unzip();
    PencilPair { pplus, pminus }
}

/// Per-component operator pencil values `(P₊ⱼ(T), P₋ⱼ(T))`.
pub fn eval_pencil_operator(spec: &DomainSpec, t: &CMatrix) -> Result<Vec<(CMatrix, CMatrix)>> {
    if !t.is_square() {
        return Err(Error::Shape("operator argument must be square".into()));
    }
    Ok(spec
        .components
        .iter()
        .map(|c| {
            let (p, m) = c.pencil_entries();
            (p.eval_matrix(t), m.eval_matrix(t))
        })
        .collect())
}

/// Smallest eigenvalue of `P₊(T)*P₊(T) − P₋(T)*P₋(T)` (block diagonal over components).
pub fn operator_pencil_margin(blocks: &[(CMatrix, CMatrix)]) -> Result<f64> {
    let mut margin = f64::INFINITY;
    for (p, m) in blocks {
        let h = &(&p.adjoint() * p) - &(&m.adjoint() * m);
        margin = margin.min(min_eigenvalue(&h)?);
    }
    Ok(margin)
}

/// Geometric membership test; `strict` asks for the interior.
pub fn contains(spec: &DomainSpec, z: C64, strict: bool) -> bool {
    spec.components.iter().all(|c| c.contains(z, strict))
}

/// Component list for `Ω̌ = γ̌⁻¹(closed polydisk)` with `γ̌ = √(k−1) γ`.
///
/// Disks shrink by `1/√(k−1)`, holes grow by `√(k−1)`. Half-planes are kept
/// for `k = 2`; for `k ≥ 3` each becomes the disk `{|γⱼ| ≤ (k−1)^{-1/2}}` and
/// is listed with the other disks so the result stays correctly ordered.
pub fn check_domain(spec: &DomainSpec) -> Result<DomainSpec> {
    let k = spec.k();
    if k < 2 {
        return Err(Error::Precondition(format!("the scaled domain needs k >= 2, got k = {k}")));
    }
    let s = ((k - 1) as f64).sqrt();
    let c = 1.0 / s;
    let mut disks = Vec::new();
    let mut holes = Vec::new();
    let mut planes = Vec::new();
    for comp in &spec.components {
        match *comp {
            DomainComponent::Disk { center, radius } => {
                disks.push(DomainComponent::disk(center, radius / s))
            }
            DomainComponent::Hole { center, radius } => {
                holes.push(DomainComponent::hole(center, radius * s))
            }
            DomainComponent::HalfPlane { theta, offset } => {
                if k == 2 {
                    planes.push(*comp);
                } else {
                    // |(w+1)/(w−1)| ≤ c with w = e^{iθ}z − offset is an Apollonius disk in w
                    let c2 = c * c;
                    let w_center = -(1.0 + c2) / (1.0 - c2);
                    let w_radius = 2.0 * c / (1.0 - c2);
                    let center = C64::from_polar(1.0, -theta) * C64::new(w_center + offset, 0.0);
                    disks.push(DomainComponent::disk(center, w_radius));
                }
            }
        }
    }
    disks.extend(holes);
    disks.extend(planes);
    Ok(DomainSpec::new(disks))
}

/// Boundary points of each component that also lie in the other components.
///
/// Circles are sampled uniformly in angle starting at angle 0. Half-plane
/// boundary lines are sampled uniformly over the chord range covering the
/// bounding disk.
pub fn boundary_samples(spec: &DomainSpec, n_per_component: usize) -> Result<Vec<(usize, C64)>> {
    if n_per_component < 4 {
        return Err(Error::Precondition("need at least 4 samples per component".into()));
    }
    let mut out = Vec::new();
    for j in 0..spec.k() {
        for i in 0..n_per_component {
            let z = component_boundary_point(spec, j, i as f64 / n_per_component as f64)?;
            let keep = spec
                .components
                .iter()
                .enumerate()
                .all(|(l, other)| l == j || other.contains(z, false));
            if keep {
                out.push((j, z));
            }
        }
    }
    Ok(out)
}

/// Point on the boundary of component `j` at parameter `t ∈ [0, 1)`.
pub fn component_boundary_point(spec: &DomainSpec, j: usize, t: f64) -> Result<C64> {
    match *spec.component(j)? {
        DomainComponent::Disk { center, radius } | DomainComponent::Hole { center, radius } => {
            Ok(center + C64::from_polar(radius, TAU * t))
        }
        DomainComponent::HalfPlane { theta, offset } => {
            let (bc, br) = spec
                .bounding_disk()
                .ok_or_else(|| Error::InvalidDomain("no Disk component".into()))?;
            let e = C64::from_polar(1.0, theta);
            let mid = (e * bc).im;
            let s = mid - br + 2.0 * br * t;
            Ok(e.conj() * C64::new(offset, s))
        }
    }
}

/// Scan a `grid × grid` lattice over the bounding disk's square for an
/// interior point. `None` means nothing was found, not that the domain is empty.
pub fn empty_probe(spec: &DomainSpec, grid: usize) -> Option<C64> {
    let (center, radius) = spec.bounding_disk()?;
    let grid = grid.max(2);
    for iy in 0..grid {
        for ix in 0..grid {
            let x = -radius + 2.0 * radius * (ix as f64 + 0.5) / grid as f64;
            let y = -radius + 2.0 * radius * (iy as f64 + 0.5) / grid as f64;
            let z = center + C64::new(x, y);
            if contains(spec, z, true) {
                return Some(z);
            }
        }
    }
    None
}

/// Interior lattice points with scalar pencil margin at least `min_margin`.
pub(crate) fn interior_grid(spec: &DomainSpec, grid: usize, min_margin: f64) -> Vec<C64> {
    let Some((center, radius)) = spec.bounding_disk() else {
        return Vec::new();
    };
    let mut pts = Vec::new();
    for iy in 0..grid {
        for ix in 0..grid {
            let x = -radius + 2.0 * radius * (ix as f64 + 0.5) / grid as f64;
            let y = -radius + 2.0 * radius * (iy as f64 + 0.5) / grid as f64;
            let z = center + C64::new(x, y);
            if !contains(spec, z, true) {
                continue;
            }
            let pen = eval_pencil(spec, z);
            let m = pen
                .pplus
                .iter()
                .zip(&pen.pminus)
                .map(|(p, q)| p.norm_sqr() - q.norm_sqr())
                .fold(f64::INFINITY, f64::min);
            if m >= min_margin {
                pts.push(z);
            }
        }
    }
    pts
}
