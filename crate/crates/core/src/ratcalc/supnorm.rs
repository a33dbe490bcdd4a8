use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::cdomain::{component_boundary_point, DomainSpec};
use crate::error::{Error, Result};
use crate::numlin::{spectral_norm, C64, CMatrix};

use super::laurent::LaurentPoly;
use super::lift::LiftedFunction;
use super::poly::MatRatFun1;

/// Local refinement rounds around the grid maximizer.
pub const SUP_REFINE_ROUNDS: usize = 3;

/// Something that can be evaluated at a point of `ℂ^arity`.
pub trait PointFunction: Sync {
    fn arity(&self) -> usize;
    fn eval_at(&self, z: &[C64]) -> Result<CMatrix>;
}

impl PointFunction for LiftedFunction {
    fn arity(&self) -> usize {
        self.k()
    }
    fn eval_at(&self, z: &[C64]) -> Result<CMatrix> {
        self.eval_point(z)
    }
}

impl PointFunction for MatRatFun1 {
    fn arity(&self) -> usize {
        1
    }
    fn eval_at(&self, z: &[C64]) -> Result<CMatrix> {
        self.eval(z[0])
    }
}

impl PointFunction for LaurentPoly {
    fn arity(&self) -> usize {
        1
    }
    fn eval_at(&self, z: &[C64]) -> Result<CMatrix> {
        Ok(CMatrix::scalar(self.eval(z[0])))
    }
}

/// Adapter for closures of one complex variable.
pub struct ScalarFn<F>(pub F);

impl<F: Fn(C64) -> Result<CMatrix> + Sync> PointFunction for ScalarFn<F> {
    fn arity(&self) -> usize {
        1
    }
    fn eval_at(&self, z: &[C64]) -> Result<CMatrix> {
        (self.0)(z[0])
    }
}

#[derive(Debug, Clone, Copy)]
pub enum SupRegion<'a> {
    /// The distinguished boundary `𝕋^k`, `k` = the function's arity.
    Torus,
    /// Boundary arcs of a domain.
    DomainBoundary(&'a DomainSpec),
    /// The circle `|z| = ρ`.
    Circle(f64),
}

/// Grid maximum after refinement; a lower estimate of the supremum.
#[derive(Debug, Clone, PartialEq)]
pub struct SupEstimate {
    pub value: f64,
    pub argmax: Vec<C64>,
}

fn norm_of(m: &CMatrix) -> Result<f64> {
    if m.shape() == (1, 1) {
        Ok(m[(0, 0)].norm())
    } else {
        spectral_norm(m)
    }
}

/// A region parameterized by real coordinates, each periodic with period 1
/// except the leading component index for domain boundaries.
struct Param<'a> {
    region: SupRegion<'a>,
    dims: usize,
}

impl Param<'_> {
    /// `(component, t)` for boundaries, angles as turns otherwise.
    fn point(&self, comp: usize, t: &[f64]) -> Result<Option<Vec<C64>>> {
        match self.region {
            SupRegion::Torus => Ok(Some(t.iter().map(|&x| C64::from_polar(1.0, TAU * x)).collect())),
            SupRegion::Circle(rho) => Ok(Some(vec![C64::from_polar(rho, TAU * t[0])])),
            SupRegion::DomainBoundary(spec) => {
                let z = component_boundary_point(spec, comp, t[0].rem_euclid(1.0))?;
                let on = spec
                    .components
                    .iter()
                    .enumerate()
                    .all(|(l, other)| l == comp || other.contains(z, false));
                Ok(on.then(|| vec![z]))
            }
        }
    }
}

/// Evaluate at one sample: `None` if the sample is not on the region.
fn sample(f: &dyn PointFunction, p: &Param<'_>, comp: usize, t: &[f64]) -> Result<Option<(f64, Vec<C64>)>> {
    match p.point(comp, t)? {
        None => Ok(None),
        Some(z) => {
            let v = norm_of(&f.eval_at(&z)?)?;
            if !v.is_finite() {
                return Err(Error::Precondition(format!("non-finite value at {z:?}")));
            }
            Ok(Some((v, z)))
        }
    }
}

/// Deterministic reduction: larger value wins, ties go to the earlier sample.
fn better(a: &Option<(f64, usize)>, v: f64, idx: usize) -> bool {
    match a {
        None => true,
        Some((bv, bi)) => v > *bv || (v == *bv && idx < *bi),
    }
}

/// Sup-norm lower estimate over the sample grid plus `rounds` refinement passes.
pub fn sup_norm_with(
    f: &dyn PointFunction,
    region: SupRegion<'_>,
    grid: usize,
    rounds: usize,
) -> Result<SupEstimate> {
    if grid == 0 {
        return Err(Error::Precondition("grid density must be positive".into()));
    }
    let (dims, comps) = match region {
        SupRegion::Torus => (f.arity(), 1),
        SupRegion::Circle(rho) => {
            if !(rho > 0.0) || f.arity() != 1 {
                return Err(Error::Precondition("circle sampling needs ρ > 0 and a function of one variable".into()));
            }
            (1, 1)
        }
        SupRegion::DomainBoundary(spec) => {
            if f.arity() != 1 {
                return Err(Error::Precondition("boundary sampling needs a function of one variable".into()));
            }
            (1, spec.k())
        }
    };
    let p = Param { region, dims };
    let per_comp = grid.checked_pow(dims as u32).ok_or_else(|| Error::Precondition("grid too large".into()))?;
    let total = per_comp * comps;
    let params = |idx: usize| -> (usize, Vec<f64>) {
        let comp = idx / per_comp;
        let mut rest = idx % per_comp;
        let mut t = vec![0.0; p.dims];
        for x in t.iter_mut() {
            *x = (rest % grid) as f64 / grid as f64;
            rest /= grid;
        }
        (comp, t)
    };
    let values: Vec<Result<Option<(f64, Vec<C64>)>>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let (comp, t) = params(idx);
            sample(f, &p, comp, &t)
        })
        .collect();
    let mut best: Option<(f64, usize)> = None;
    let mut best_z = Vec::new();
    for (idx, v) in values.into_iter().enumerate() {
        if let Some((val, z)) = v? {
            if better(&best, val, idx) {
                best = Some((val, idx));
                best_z = z;
            }
        }
    }
    let Some((mut best_v, best_idx)) = best else {
        return Err(Error::Precondition("no sample point lies on the region".into()));
    };
    let (comp, mut center) = params(best_idx);
    let mut h = 1.0 / grid as f64;
    for _ in 0..rounds {
        h /= 2.0;
        let offsets: Vec<Vec<f64>> = (0..3usize.pow(p.dims as u32))
            .map(|mut code| {
                (0..p.dims)
                    .map(|_| {
                        let o = (code % 3) as f64 - 1.0;
                        code /= 3;
                        o * h
                    })
                    .collect()
            })
            .collect();
        let mut next = center.clone();
        for off in offsets {
            let t: Vec<f64> = center.iter().zip(&off).map(|(a, b)| a + b).collect();
            if let Some((val, z)) = sample(f, &p, comp, &t)? {
                if val > best_v {
                    best_v = val;
                    best_z = z;
                    next = t;
                }
            }
        }
        center = next;
    }
    Ok(SupEstimate { value: best_v, argmax: best_z })
}

/// [`sup_norm_with`] using the default refinement depth.
pub fn sup_norm_boundary(f: &dyn PointFunction, region: SupRegion<'_>, grid: usize) -> Result<SupEstimate> {
    sup_norm_with(f, region, grid, SUP_REFINE_ROUNDS)
}
