use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numlin::{inverse, C64, CMatrix};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Successive trapezoid estimates must agree to this (relative to the largest coefficient).
pub const LAURENT_AGREEMENT_TOL: f64 = 1e-10;
/// Sample-count cap for coefficient extraction.
pub const LAURENT_MAX_SAMPLES: usize = 1 << 16;

/// `Σ_{k=kmin}^{kmax} a_k z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly {
    kmin: i64,
    coeffs: Vec<C64>,
}

impl LaurentPoly {
    /// Strips zero end coefficients; the zero function has `kmin = 0` and no coefficients.
    pub fn new(kmin: i64, coeffs: Vec<C64>) -> Self {
        let Some(first) = coeffs.iter().position(|&c| c != ZERO) else {
            return LaurentPoly { kmin: 0, coeffs: Vec::new() };
        };
        let last = coeffs.iter().rposition(|&c| c != ZERO).unwrap_or(first);
        LaurentPoly { kmin: kmin + first as i64, coeffs: coeffs[first..=last].to_vec() }
    }

    pub fn zero() -> Self {
        LaurentPoly { kmin: 0, coeffs: Vec::new() }
    }

    pub fn monomial(c: C64, k: i64) -> Self {
        LaurentPoly::new(k, vec![c])
    }

    /// `z^k + z^{-l}`
    pub fn kl(k: u32, l: u32) -> Self {
        let one = C64::new(1.0, 0.0);
        let mut v = vec![ZERO; (k + l + 1) as usize];
        v[0] += one;
        v[(k + l) as usize] += one;
        LaurentPoly::new(-(l as i64), v)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn kmin(&self) -> i64 {
        self.kmin
    }

    pub fn kmax(&self) -> i64 {
        self.kmin + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> C64 {
        if k < self.kmin {
            return ZERO;
        }
        self.coeffs.get((k - self.kmin) as usize).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, &c)| (self.kmin + i as i64, c))
    }

    /// `(k, l)` when the function is exactly `z^k + z^{-l}` with `k, l ≥ 1`.
    pub fn as_kl(&self) -> Option<(u32, u32)> {
        let one = C64::new(1.0, 0.0);
        let (lo, hi) = (self.kmin, self.kmax());
        if self.is_zero() || lo >= 0 || hi <= 0 {
            return None;
        }
        let only_ends = self.iter().all(|(k, c)| if k == lo || k == hi { c == one } else { c == ZERO });
        only_ends.then_some((hi as u32, (-lo) as u32))
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.iter().map(|(k, c)| c * z.powi(k as i32)).sum()
    }

    /// `Σ_{k≥0} a_k T^k + Σ_{k<0} a_k (T⁻¹)^{−k}`.
    pub fn eval_matrix(&self, t: &CMatrix) -> Result<CMatrix> {
        if !t.is_square() {
            return Err(Error::Shape("Laurent argument must be square".into()));
        }
        let n = t.rows();
        let mut acc = CMatrix::zeros(n, n);
        if self.kmax() >= 0 && !self.is_zero() {
            let mut pw = CMatrix::identity(n);
            for k in 0..=self.kmax() {
                if k > 0 {
                    pw = &pw * t;
                }
                let c = self.coeff(k);
                if c != ZERO {
                    acc = &acc + &pw.scale(c);
                }
            }
        }
        if self.kmin < 0 {
            let tinv = inverse(t)?;
            let mut pw = CMatrix::identity(n);
            for k in 1..=(-self.kmin) {
                pw = &pw * &tinv;
                let c = self.coeff(-k);
                if c != ZERO {
                    acc = &acc + &pw.scale(c);
                }
            }
        }
        Ok(acc)
    }

    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || other.is_zero() {
            return LaurentPoly::zero();
        }
        let mut c = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        LaurentPoly::new(self.kmin + other.kmin, c)
    }

    /// Coefficients restricted to `[lo, hi]`.
    pub fn window(&self, lo: i64, hi: i64) -> LaurentPoly {
        if hi < lo {
            return LaurentPoly::zero();
        }
        LaurentPoly::new(lo, (lo..=hi).map(|k| self.coeff(k)).collect())
    }

    /// `Σ |a_k| ρ^k`, the weighted ℓ¹ norm on the circle of radius `ρ`.
    pub fn weighted_l1(&self, rho: f64) -> f64 {
        self.iter().map(|(k, c)| c.norm() * rho.powi(k as i32)).sum()
    }
}

pub fn laurent_eval(f: &LaurentPoly, z: C64) -> C64 {
    f.eval(z)
}

pub fn laurent_eval_matrix(f: &LaurentPoly, t: &CMatrix) -> Result<CMatrix> {
    f.eval_matrix(t)
}

/// Fejér mean `Σ_{|k|≤2n} (1 − |k|/(2n+1)) a_k z^k`.
pub fn fejer_means(f: &LaurentPoly, n: usize) -> LaurentPoly {
    let m = 2 * n as i64;
    let denom = (2 * n + 1) as f64;
    let lo = f.kmin().max(-m);
    let hi = f.kmax().min(m);
    if f.is_zero() || hi < lo {
        return LaurentPoly::zero();
    }
    LaurentPoly::new(
        lo,
        (lo..=hi).map(|k| f.coeff(k) * (1.0 - k.unsigned_abs() as f64 / denom)).collect(),
    )
}

#[derive(Serialize, Deserialize)]
struct LaurentFile {
    kmin: i64,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for LaurentPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LaurentFile { kmin: self.kmin, coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = LaurentFile::deserialize(d)?;
        Ok(LaurentPoly::new(f.kmin, f.coeffs.into_iter().map(|[a, b]| C64::new(a, b)).collect()))
    }
}

/// Matrix Laurent coefficients `A_k`, `k ∈ [kmin, kmax]`, of `f` on the circle
/// `|z| = √(rR)` by the trapezoid rule, doubling the sample count until two
/// successive estimates agree.
pub fn laurent_coeffs_matrix<F>(
    f: F,
    outer: f64,
    inner: f64,
    window: (i64, i64),
    n_start: usize,
) -> Result<Vec<CMatrix>>
where
    F: Fn(C64) -> Result<CMatrix>,
{
    let (kmin, kmax) = window;
    if kmax < kmin {
        return Err(Error::Precondition("empty coefficient window".into()));
    }
    if !(inner > 0.0 && outer > inner) {
        return Err(Error::Precondition("need 0 < inner < outer".into()));
    }
    let rho = (inner * outer).sqrt();
    let span = (kmax - kmin + 1) as usize;
    let mut n = n_start.max(2 * span).max(16).next_power_of_two();
    let mut samples: Vec<CMatrix> = Vec::with_capacity(n);
    for j in 0..n {
        samples.push(f(C64::from_polar(rho, TAU * j as f64 / n as f64))?);
    }
    let mut prev = trapezoid(&samples, rho, kmin, kmax);
    loop {
        if 2 * n > LAURENT_MAX_SAMPLES {
            return Err(Error::NoConvergence { what: "Laurent coefficient extraction", iterations: n });
        }
        // interleave the new odd-index samples
        let mut next = Vec::with_capacity(2 * n);
        for (j, s) in samples.into_iter().enumerate() {
            next.push(s);
            next.push(f(C64::from_polar(rho, TAU * (2 * j + 1) as f64 / (2 * n) as f64))?);
        }
        samples = next;
        n *= 2;
        let cur = trapezoid(&samples, rho, kmin, kmax);
        let scale = 1.0 + cur.iter().map(CMatrix::max_abs).fold(0.0, f64::max);
        let diff = cur.iter().zip(&prev).map(|(a, b)| (a - b).max_abs()).fold(0.0, f64::max);
        if diff <= LAURENT_AGREEMENT_TOL * scale {
            return Ok(cur);
        }
        prev = cur;
    }
}

fn trapezoid(samples: &[CMatrix], rho: f64, kmin: i64, kmax: i64) -> Vec<CMatrix> {
    let n = samples.len();
    let (r, c) = samples[0].shape();
    (kmin..=kmax)
        .map(|k| {
            let mut acc = CMatrix::zeros(r, c);
            for (j, s) in samples.iter().enumerate() {
                let phase = C64::from_polar(1.0, -TAU * ((j as i64 * k).rem_euclid(n as i64)) as f64 / n as f64);
                acc = &acc + &s.scale(phase);
            }
            acc.scale_real(rho.powi(-k as i32) / n as f64)
        })
        .collect()
}

/// Scalar version of [`laurent_coeffs_matrix`].
pub fn laurent_coeffs_of_realization<F>(
    f: F,
    outer: f64,
    inner: f64,
    window: (i64, i64),
    n_start: usize,
) -> Result<LaurentPoly>
where
    F: Fn(C64) -> Result<C64>,
{
    let coeffs = laurent_coeffs_matrix(|z| f(z).map(CMatrix::scalar), outer, inner, window, n_start)?;
    Ok(LaurentPoly::new(window.0, coeffs.iter().map(|m| m[(0, 0)]).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratcalc::{ratfun_eval_at_matrix, MatRatFun1, Poly1};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn normalization_strips_ends() {
        let f = LaurentPoly::new(-3, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(f.kmin(), -2);
        assert_eq!(f.kmax(), 0);
        assert!(LaurentPoly::new(4, vec![c(0.0, 0.0)]).is_zero());
    }

    #[test]
    fn fejer_examples() {
        let one = LaurentPoly::monomial(c(1.0, 0.0), 0);
        for n in 0..5 {
            assert_eq!(fejer_means(&one, n), one);
        }
        let z = LaurentPoly::monomial(c(1.0, 0.0), 1);
        assert_eq!(fejer_means(&z, 1).coeff(1), c(1.0 - 1.0 / 3.0, 0.0));
        assert!(fejer_means(&z, 0).is_zero());
        let f = LaurentPoly::kl(2, 3);
        let big = fejer_means(&f, 1000);
        assert!((big.coeff(-3) - c(1.0, 0.0)).norm() < 2e-3);
    }

    #[test]
    fn eval_examples() {
        let f = LaurentPoly::kl(1, 1);
        assert_eq!(f.eval(c(2.0, 0.0)), c(2.5, 0.0));
        assert_eq!(f.as_kl(), Some((1, 1)));
        let m = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.5, 0.0]]);
        let via_laurent = f.eval_matrix(&m).unwrap();
        let rf = MatRatFun1::scalar(Poly1::from_real(&[1.0, 0.0, 1.0]), Poly1::from_real(&[0.0, 1.0])).unwrap();
        let via_rat = ratfun_eval_at_matrix(&rf, &m).unwrap();
        assert!((&via_laurent - &via_rat).max_abs() < 1e-14);

        let u = CMatrix::from_rows(&[vec![c(0.0, 1.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.6, 0.8)]]).unwrap();
        let inv = LaurentPoly::monomial(c(1.0, 0.0), -1).eval_matrix(&u).unwrap();
        assert!((&inv - &u.adjoint()).max_abs() < 1e-15);
        assert!(f.eval_matrix(&CMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn coefficients_of_z_plus_inverse() {
        let f = laurent_coeffs_of_realization(|z| Ok(z + 1.0 / z), 1.0, 0.5, (-4, 4), 8).unwrap();
        for k in -4..=4i64 {
            let want = if k.abs() == 1 { 1.0 } else { 0.0 };
            assert!((f.coeff(k) - c(want, 0.0)).norm() <= 1e-10, "k = {k}");
        }
    }

    #[test]
    fn coefficients_match_geometric_series() {
        // 1/(z − β) with |β| = 2 > R: a_k = −β^{−k−1} for k ≥ 0
        let beta = c(0.0, 2.0);
        let f = laurent_coeffs_of_realization(|z| Ok(1.0 / (z - beta)), 1.0, 0.5, (-3, 6), 8).unwrap();
        for k in -3..=6i64 {
            let want = if k >= 0 { -beta.powi(-(k as i32) - 1) } else { c(0.0, 0.0) };
            assert!((f.coeff(k) - want).norm() <= 1e-10, "k = {k}");
        }
    }

    #[test]
    fn json_roundtrip() {
        let f = LaurentPoly::kl(3, 2);
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"kmin\":-2"));
        assert_eq!(serde_json::from_str::<LaurentPoly>(&s).unwrap(), f);
    }
}
