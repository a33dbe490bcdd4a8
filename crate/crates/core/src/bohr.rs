//! Weighted ℓ¹ coefficient norms and exact Bohr-radius certificates.
//!
//! The bidisk certificate uses the rational inner function `ñ/q` with
//! `q = det(I − D·diag(z₁, z₂))` and `ñ` its reflection; when the weighted
//! coefficient sum at radius `ρ` exceeds one, the bidisk Bohr radius is
//! below `ρ`. All coefficient arithmetic is exact.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numlin::{inverse, spectral_norm, CMatrix, C64};
use crate::ratcalc::{LaurentPoly, MultiPoly};

/// Default bidisk Bohr-radius lower estimate used by the spectral chain.
pub const DEFAULT_K2_EST: f64 = 0.3006;
/// Upper bound on the annulus spectral constant.
pub const PSI_UPPER: f64 = 1.0 + std::f64::consts::SQRT_2;
pub const CHAIN_TOL: f64 = 1e-9;
/// Margin by which the float estimate must exceed one during the search.
pub const IMPROVE_MARGIN: f64 = 1e-6;
/// Radius grid denominator for certified radii.
pub const RHO_GRID: u32 = 10_000;
/// Candidates are kept at spectral norm at most `1 − NORM_SLACK`.
pub const NORM_SLACK: f64 = 1e-7;

pub const REFERENCE_D: [[&str; 2]; 2] =
    [["0.854373111798292", "-0.518782521594128"], ["0.518794363700548", "0.848187547437653"]];
pub const REFERENCE_RHO: &str = "3177/10000";
pub const REFERENCE_DEG: u32 = 12;

pub type ExactMatrix2 = [[BigRational; 2]; 2];

/// Parses `p/q`, an integer, or a decimal (optionally with exponent) exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = BigInt::from_str(&format!("{int}{frac}")).map_err(|_| bad())?;
    let ten = BigInt::from(10);
    let shift = exp - frac.len() as i32;
    let mut v = if shift >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-shift) as usize))
    };
    if neg {
        v = -v;
    }
    Ok(v)
}

/// Always `p/q`, also for integers.
pub fn format_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact decimal rounding of a float to 15 places.
pub fn round_decimal(x: f64) -> BigRational {
    parse_rational(&format!("{x:.15}")).expect("formatted float parses")
}

pub fn reference_d() -> ExactMatrix2 {
    REFERENCE_D.map(|row| row.map(|e| parse_rational(e).expect("reference entry")))
}

pub fn reference_rho() -> BigRational {
    parse_rational(REFERENCE_RHO).expect("reference radius")
}

pub fn matrix_to_f64(d: &ExactMatrix2) -> [[f64; 2]; 2] {
    [[rational_to_f64(&d[0][0]), rational_to_f64(&d[0][1])], [rational_to_f64(&d[1][0]), rational_to_f64(&d[1][1])]]
}

/// Closed-form spectral norm of a real 2×2 matrix.
fn norm2(d: &[[f64; 2]; 2]) -> Result<f64> {
    let fro2: f64 = d.iter().flatten().map(|x| x * x).sum();
    let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0);
    Ok((0.5 * (fro2 + disc.sqrt())).sqrt())
}

/// Sparse exact bivariate polynomial; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExactPoly2 {
    terms: BTreeMap<(u32, u32), BigRational>,
}

impl ExactPoly2 {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_dense(c: &[Vec<BigRational>]) -> Self {
        let mut p = Self::new();
        for (i, row) in c.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                p.add_term(i as u32, j as u32, v.clone());
            }
        }
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((i, j)).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> BigRational {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), BigRational> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn mul(&self, other: &ExactPoly2) -> ExactPoly2 {
        let mut out = ExactPoly2::new();
        for (&(a, b), x) in &self.terms {
            for (&(c, d), y) in &other.terms {
                out.add_term(a + c, b + d, x * y);
            }
        }
        out
    }

    pub fn to_float(&self) -> MultiPoly {
        let mut p = MultiPoly::new(2);
        for (&(i, j), v) in &self.terms {
            p.add_term(vec![i, j], C64::new(rational_to_f64(v), 0.0)).expect("two variables");
        }
        p
    }
}

/// Exact `Σ_{α ∈ [0,deg]²} |c_α| ρ^{|α|}`.
pub fn l1hat_polydisk_exact(c: &ExactPoly2, rho: &BigRational, deg: u32) -> BigRational {
    let mut by_degree: BTreeMap<u32, BigRational> = BTreeMap::new();
    for (&(i, j), v) in c.terms() {
        if i <= deg && j <= deg {
            *by_degree.entry(i + j).or_insert_with(BigRational::zero) += v.abs();
        }
    }
    by_degree.into_iter().map(|(t, a)| a * num_traits::pow(rho.clone(), t as usize)).sum()
}

/// Float `Σ |c_α| ρ^{|α|}` over the box `[0, deg]^k`.
pub fn l1hat_polydisk(c: &MultiPoly, rho: f64, deg: u32) -> f64 {
    c.terms()
        .iter()
        .filter(|(a, _)| a.iter().all(|&e| e <= deg))
        .map(|(a, v)| v.norm() * rho.powi(a.iter().sum::<u32>() as i32))
        .sum()
}

/// Laurent coefficients together with the annulus `r < |z| < R`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusCoeffs {
    pub coeffs: LaurentPoly,
    pub outer: f64,
    pub inner: f64,
}

impl AnnulusCoeffs {
    pub fn new(coeffs: LaurentPoly, outer: f64, inner: f64) -> Result<Self> {
        if !(inner > 0.0 && inner < outer && outer.is_finite()) {
            return Err(Error::InvalidDomain(format!("annulus needs 0 < r < R, got R = {outer}, r = {inner}")));
        }
        Ok(AnnulusCoeffs { coeffs, outer, inner })
    }
}

/// `Σ_{k≥0} |a_k| (Rρ)^k + Σ_{k<0} |a_k| ρ^{−k} r^k`.
pub fn l1hat_annulus(f: &AnnulusCoeffs, rho: f64) -> f64 {
    annulus_weighted(&f.coeffs, f.outer, f.inner, rho)
}

fn annulus_weighted(a: &LaurentPoly, outer: f64, inner: f64, rho: f64) -> f64 {
    a.iter()
        .map(|(k, c)| {
            let w = if k >= 0 { (outer * rho).powi(k as i32) } else { (rho / inner).powi((-k) as i32) };
            c.norm() * w
        })
        .sum()
}

/// Exact Taylor coefficients of `ñ/q` on `[0,deg]²`, indexed `[α₁][α₂]`.
pub fn k2_coeffs_exact(d: &ExactMatrix2, deg: u32) -> Vec<Vec<BigRational>> {
    let det = &d[0][0] * &d[1][1] - &d[0][1] * &d[1][0];
    let n = deg as usize + 1;
    let numer = |i: usize, j: usize| -> BigRational {
        match (i, j) {
            (0, 0) => det.clone(),
            (0, 1) => -d[0][0].clone(),
            (1, 0) => -d[1][1].clone(),
            (1, 1) => BigRational::one(),
            _ => BigRational::zero(),
        }
    };
    let mut c = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut v = numer(i, j);
            if i > 0 {
                v += &d[0][0] * &c[i - 1][j];
            }
            if j > 0 {
                v += &d[1][1] * &c[i][j - 1];
            }
            if i > 0 && j > 0 {
                v -= &det * &c[i - 1][j - 1];
            }
            c[i][j] = v;
        }
    }
    c
}

/// Float counterpart of [`k2_coeffs_exact`].
pub fn k2_coeffs_float(d: &[[f64; 2]; 2], deg: u32) -> Vec<Vec<f64>> {
    let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
    let n = deg as usize + 1;
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut v = match (i, j) {
                (0, 0) => det,
                (0, 1) => -d[0][0],
                (1, 0) => -d[1][1],
                (1, 1) => 1.0,
                _ => 0.0,
            };
            if i > 0 {
                v += d[0][0] * c[i - 1][j];
            }
            if j > 0 {
                v += d[1][1] * c[i][j - 1];
            }
            if i > 0 && j > 0 {
                v -= det * c[i - 1][j - 1];
            }
            c[i][j] = v;
        }
    }
    c
}

/// `|c|` summed along anti-diagonals: entry `t` is `Σ_{|α|=t} |c_α|`.
fn degree_sums<T: Clone + Zero + Signed>(c: &[Vec<T>]) -> Vec<T> {
    let n = c.len();
    let mut out = vec![T::zero(); 2 * n.max(1) - 1];
    for (i, row) in c.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[i + j] = out[i + j].clone() + v.abs();
        }
    }
    out
}

fn horner<T: Clone + Zero + for<'a> std::ops::Mul<&'a T, Output = T>>(a: &[T], x: &T) -> T {
    a.iter().rev().fold(T::zero(), |acc, v| acc * x + v.clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct K2Certificate {
    pub d: ExactMatrix2,
    pub rho: BigRational,
    pub deg: u32,
    pub sum: BigRational,
    pub certified: bool,
    pub coeffs: Vec<Vec<BigRational>>,
}

/// Machine-readable certificate, rationals written as `p/q` strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct K2Report {
    pub rho: String,
    #[serde(rename = "S")]
    pub s: String,
    pub certified: bool,
    pub deg: u32,
    #[serde(rename = "D")]
    pub d: [[String; 2]; 2],
}

impl K2Certificate {
    pub fn report(&self) -> K2Report {
        K2Report {
            rho: format_rational(&self.rho),
            s: format_rational(&self.sum),
            certified: self.certified,
            deg: self.deg,
            d: self.d.clone().map(|row| row.map(|e| format_rational(&e))),
        }
    }

    pub fn coeff_poly(&self) -> ExactPoly2 {
        ExactPoly2::from_dense(&self.coeffs)
    }
}

impl K2Report {
    /// Recomputes the certificate from the recorded `D`, `ρ` and degree.
    pub fn recheck(&self) -> Result<K2Certificate> {
        let mut d: Vec<BigRational> = Vec::with_capacity(4);
        for row in &self.d {
            for e in row {
                d.push(parse_rational(e)?);
            }
        }
        let d = [[d[0].clone(), d[1].clone()], [d[2].clone(), d[3].clone()]];
        k2_certificate(&d, &parse_rational(&self.rho)?, self.deg)
    }
}

fn check_contractive(d: &ExactMatrix2) -> Result<()> {
    let nrm = norm2(&matrix_to_f64(d))?;
    if nrm.is_nan() || nrm >= 1.0 {
        return Err(Error::Precondition(format!("‖D‖ = {nrm} must be below 1")));
    }
    Ok(())
}

/// Exact weighted coefficient sum of the inner function built from `d`.
/// `certified` is the exact comparison `S > 1`.
pub fn k2_certificate(d: &ExactMatrix2, rho: &BigRational, deg: u32) -> Result<K2Certificate> {
    check_contractive(d)?;
    if !rho.is_positive() {
        return Err(Error::Precondition("ρ must be positive".into()));
    }
    let coeffs = k2_coeffs_exact(d, deg);
    let sum = horner(&degree_sums(&coeffs), rho);
    let certified = sum > BigRational::one();
    Ok(K2Certificate { d: d.clone(), rho: rho.clone(), deg, sum, certified, coeffs })
}

/// Smallest `p/grid` whose exact sum exceeds one, or `None` when even
/// `(grid−1)/grid` fails. The sum increases with `ρ`, so bisection suffices.
pub fn smallest_certified_rho(d: &ExactMatrix2, deg: u32, grid: u32) -> Result<Option<K2Certificate>> {
    check_contractive(d)?;
    let coeffs = k2_coeffs_exact(d, deg);
    let sums = degree_sums(&coeffs);
    let den = BigInt::from(grid);
    let at = |p: u32| BigRational::new(BigInt::from(p), den.clone());
    let ok = |p: u32| horner(&sums, &at(p)) > BigRational::one();
    if grid < 2 || !ok(grid - 1) {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0u32, grid - 1); // ok(hi), !ok(lo) by convention
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let rho = at(hi);
    let sum = horner(&sums, &rho);
    Ok(Some(K2Certificate { d: d.clone(), rho, deg, certified: true, sum, coeffs }))
}

/// Float sum `S(ρ)` for a float matrix.
pub fn k2_sum_float(d: &[[f64; 2]; 2], rho: f64, deg: u32) -> f64 {
    horner(&degree_sums(&k2_coeffs_float(d, deg)), &rho)
}

/// Smallest `ρ ∈ (0, 1)` with float `S(ρ) > 1 + margin`, by bisection.
pub fn threshold_rho_float(d: &[[f64; 2]; 2], deg: u32, margin: f64) -> Option<f64> {
    let sums = degree_sums(&k2_coeffs_float(d, deg));
    let s = |r: f64| horner(&sums, &r);
    let target = 1.0 + margin;
    if !(s(1.0) > target) {
        return None;
    }
    if s(0.0) > target {
        return Some(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if s(mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct K2Improvement {
    pub certificate: K2Certificate,
    pub seed_certificate: Option<K2Certificate>,
    pub improved: bool,
    pub evaluations: usize,
}

fn project(d: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let cap = 1.0 - NORM_SLACK;
    match norm2(&d) {
        Ok(n) if n > cap => d.map(|row| row.map(|e| e * cap / n)),
        _ => d,
    }
}

fn to_exact(d: [[f64; 2]; 2]) -> ExactMatrix2 {
    d.map(|row| row.map(round_decimal))
}

fn unpack(x: &[f64; 4]) -> [[f64; 2]; 2] {
    [[x[0], x[1]], [x[2], x[3]]]
}

fn objective(x: &[f64; 4], deg: u32) -> f64 {
    threshold_rho_float(&project(unpack(x)), deg, IMPROVE_MARGIN).unwrap_or(1.0)
}

/// Derivative-free search for a matrix whose certificate holds at a smaller
/// radius than the seed's. The float objective is the bisected threshold
/// radius; the returned certificate is always the exact one for the
/// rounded, projected best candidate, falling back to the seed.
///
/// `budget` counts objective evaluations; zero certifies the seed only.
pub fn k2_improve(seed: [[f64; 2]; 2], budget: usize, deg: u32, grid: u32) -> Result<K2Improvement> {
    if norm2(&seed)? >= 1.0 {
        return Err(Error::Precondition("seed matrix must be a strict contraction".into()));
    }
    let seed_exact = to_exact(project(seed));
    let seed_cert = smallest_certified_rho(&seed_exact, deg, grid)?;
    let mut evaluations = 0;
    let mut best = seed_cert.clone();
    if budget > 0 {
        let x0 = [seed[0][0], seed[0][1], seed[1][0], seed[1][1]];
        let (x, used) = nelder_mead(x0, 0.05, budget, |x| objective(x, deg));
        evaluations = used;
        let cand = to_exact(project(unpack(&x)));
        if let Some(c) = smallest_certified_rho(&cand, deg, grid)? {
            if best.as_ref().is_none_or(|b| c.rho < b.rho) {
                best = Some(c);
            }
        }
    }
    let improved = match (&best, &seed_cert) {
        (Some(b), Some(s)) => b.rho < s.rho,
        (Some(_), None) => true,
        _ => false,
    };
    let certificate = match best {
        Some(c) => c,
        None => {
            return Err(Error::NoConvergence { what: "certificate search", iterations: evaluations });
        }
    };
    Ok(K2Improvement { certificate, seed_certificate: seed_cert, improved, evaluations })
}

/// Nelder–Mead on four variables with a hard evaluation budget. The initial
/// simplex is evaluated in parallel; ties are broken lexicographically on the
/// coordinates so the run is deterministic.
fn nelder_mead<F>(x0: [f64; 4], step: f64, budget: usize, f: F) -> ([f64; 4], usize)
where
    F: Fn(&[f64; 4]) -> f64 + Sync,
{
    let mut pts: Vec<[f64; 4]> = vec![x0];
    for i in 0..4 {
        let mut p = x0;
        p[i] += step;
        pts.push(p);
    }
    pts.truncate(budget.max(1));
    let vals: Vec<f64> = pts.par_iter().map(&f).collect();
    let mut used = pts.len();
    let mut simplex: Vec<([f64; 4], f64)> = pts.into_iter().zip(vals).collect();
    let order = |a: &([f64; 4], f64), b: &([f64; 4], f64)| {
        a.1.total_cmp(&b.1).then_with(|| {
            a.0.iter().zip(&b.0).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        })
    };
    if simplex.len() < 5 {
        simplex.sort_by(order);
        return (simplex[0].0, used);
    }
    let comb = |a: &[f64; 4], b: &[f64; 4], t: f64| -> [f64; 4] { std::array::from_fn(|i| a[i] + t * (b[i] - a[i])) };
    while used < budget {
        simplex.sort_by(order);
        let centroid: [f64; 4] = std::array::from_fn(|i| simplex[..4].iter().map(|p| p.0[i]).sum::<f64>() / 4.0);
        let worst = simplex[4];
        let xr = comb(&centroid, &worst.0, -1.0);
        let fr = f(&xr);
        used += 1;
        if fr < simplex[0].1 {
            if used < budget {
                let xe = comb(&centroid, &worst.0, -2.0);
                let fe = f(&xe);
                used += 1;
                simplex[4] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else {
                simplex[4] = (xr, fr);
            }
            continue;
        }
        if fr < simplex[3].1 {
            simplex[4] = (xr, fr);
            continue;
        }
        if used >= budget {
            break;
        }
        let xc = if fr < worst.1 { comb(&centroid, &xr, 0.5) } else { comb(&centroid, &worst.0, 0.5) };
        let fc = f(&xc);
        used += 1;
        if fc < worst.1.min(fr) {
            simplex[4] = (xc, fc);
            continue;
        }
        // shrink towards the best vertex
        let best = simplex[0].0;
        let n = (budget - used).min(4);
        let shrunk: Vec<[f64; 4]> = simplex[1..=n].iter().map(|p| comb(&best, &p.0, 0.5)).collect();
        let vals: Vec<f64> = shrunk.par_iter().map(&f).collect();
        used += n;
        for (k, (x, v)) in shrunk.into_iter().zip(vals).enumerate() {
            simplex[k + 1] = (x, v);
        }
    }
    simplex.sort_by(order);
    (simplex[0].0, used)
}

/// Laurent data obtained by substituting `(z/R, r/z)` into a bidisk series.
#[derive(Debug, Clone, PartialEq)]
pub struct Pushforward {
    pub coeffs: LaurentPoly,
    /// `Σ_{k≥0} |a_k| R^k ρ^k`.
    pub s_plus: f64,
    /// `Σ_{k<0} |a_k| r^k ρ^{−k}`.
    pub s_minus: f64,
    /// Termwise majorants of `s_plus` and `s_minus`.
    pub s_plus_bound: f64,
    pub s_minus_bound: f64,
    /// `max(ρ, r/(Rρ))`.
    pub s: f64,
    /// `Σ |c_α| s^{|α|}`.
    pub combined: f64,
}

/// `a_k = Σ_{α₁−α₂=k} c_α r^{α₂} / R^{α₁}` over the box `[0, deg]²`.
pub fn k1k2_pushforward(c: &MultiPoly, outer: f64, inner: f64, rho: f64, deg: u32) -> Result<Pushforward> {
    if c.k() != 2 {
        return Err(Error::Shape("bivariate coefficients expected".into()));
    }
    if !(inner > 0.0 && inner < outer) {
        return Err(Error::InvalidDomain(format!("annulus needs 0 < r < R, got R = {outer}, r = {inner}")));
    }
    if !(rho > 0.0) {
        return Err(Error::Precondition("ρ must be positive".into()));
    }
    let t = inner / (outer * rho);
    let s = rho.max(t);
    let mut a: BTreeMap<i64, C64> = BTreeMap::new();
    let (mut s_plus_bound, mut s_minus_bound, mut combined) = (0.0, 0.0, 0.0);
    for (alpha, &v) in c.terms() {
        let (a1, a2) = (alpha[0], alpha[1]);
        if a1 > deg || a2 > deg {
            continue;
        }
        *a.entry(a1 as i64 - a2 as i64).or_insert(C64::new(0.0, 0.0)) +=
            v * inner.powi(a2 as i32) / outer.powi(a1 as i32);
        let m = v.norm();
        if a1 >= a2 {
            s_plus_bound += m * t.powi(a2 as i32) * rho.powi(a1 as i32);
        } else {
            s_minus_bound += m * t.powi(a1 as i32) * rho.powi(a2 as i32);
        }
        combined += m * s.powi((a1 + a2) as i32);
    }
    let coeffs = match (a.keys().next(), a.keys().next_back()) {
        (Some(&lo), Some(&hi)) => LaurentPoly::new(lo, (lo..=hi).map(|k| a.get(&k).copied().unwrap_or_default()).collect()),
        _ => LaurentPoly::zero(),
    };
    let nonneg = coeffs.window(0, i64::MAX.min(coeffs.kmax().max(0)));
    let neg = if coeffs.kmin() < 0 { coeffs.window(coeffs.kmin(), -1) } else { LaurentPoly::zero() };
    let s_plus = annulus_weighted(&nonneg, outer, inner, rho);
    let s_minus = annulus_weighted(&neg, outer, inner, rho);
    Ok(Pushforward { coeffs, s_plus, s_minus, s_plus_bound, s_minus_bound, s, combined })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    /// `‖f(T)‖`.
    pub lhs: f64,
    /// `Σ_{k≥0}|a_k|‖T‖^k + Σ_{k<0}|a_k|‖T⁻¹‖^{−k}`.
    pub middle: f64,
    /// Weighted ℓ¹ norm on the enlarged annulus.
    pub rhs: f64,
    /// Whether `‖T‖ ≤ R̃ρ` and `‖T⁻¹‖ ≤ ρ/r̃`, so that `middle ≤ rhs` applies.
    pub weights_apply: bool,
    pub pass: bool,
    pub psi_upper: f64,
}

/// Replays the Banach-algebra chain for one `(f, T)` pair on the annulus
/// `r < |z| < R` enlarged to `(R/K, K·r)` with `K = k2_est`.
pub fn banach_chain_check(
    f: &LaurentPoly,
    t: &CMatrix,
    rho: f64,
    outer: f64,
    inner: f64,
    k2_est: f64,
) -> Result<ChainCheck> {
    if !(k2_est > 0.0 && k2_est <= 1.0) {
        return Err(Error::Precondition(format!("K₂ estimate {k2_est} outside (0, 1]")));
    }
    let lhs = spectral_norm(&f.eval_matrix(t)?)?;
    let nt = spectral_norm(t)?;
    let ninv = if f.kmin() < 0 { spectral_norm(&inverse(t)?)? } else { 0.0 };
    let middle: f64 = f
        .iter()
        .map(|(k, c)| c.norm() * if k >= 0 { nt.powi(k as i32) } else { ninv.powi((-k) as i32) })
        .sum();
    let (rt, it) = (outer / k2_est, k2_est * inner);
    let rhs = annulus_weighted(f, rt, it, rho);
    let weights_apply = nt <= rt * rho && (f.kmin() >= 0 || ninv <= rho / it);
    let pass = lhs <= middle + CHAIN_TOL && (!weights_apply || middle <= rhs + CHAIN_TOL);
    Ok(ChainCheck { lhs, middle, rhs, weights_apply, pass, psi_upper: PSI_UPPER })
}
