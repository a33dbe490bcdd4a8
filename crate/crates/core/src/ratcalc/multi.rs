use std::collections::BTreeMap;
use std::ops::{Mul, Sub};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numlin::C64;

/// Sparse polynomial in `k` variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MultiPoly {
    k: usize,
    terms: BTreeMap<Vec<u32>, C64>,
}

impl MultiPoly {
    pub fn new(k: usize) -> Self {
        MultiPoly { k, terms: BTreeMap::new() }
    }

    pub fn from_terms(k: usize, terms: impl IntoIterator<Item = (Vec<u32>, C64)>) -> Result<Self> {
        let mut p = MultiPoly::new(k);
        for (a, c) in terms {
            p.add_term(a, c)?;
        }
        Ok(p)
    }

    pub fn add_term(&mut self, alpha: Vec<u32>, c: C64) -> Result<()> {
        if alpha.len() != self.k {
            return Err(Error::Shape(format!("exponent of length {} in {} variables", alpha.len(), self.k)));
        }
        let e = self.terms.entry(alpha).or_insert(C64::new(0.0, 0.0));
        *e += c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coeff(&self, alpha: &[u32]) -> C64 {
        self.terms.get(alpha).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, C64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, z: &[C64]) -> Result<C64> {
        if z.len() != self.k {
            return Err(Error::Shape(format!("expected {} coordinates", self.k)));
        }
        Ok(self
            .terms
            .iter()
            .map(|(a, c)| c * a.iter().zip(z).map(|(&e, &x)| x.powi(e as i32)).product::<C64>())
            .sum())
    }

    /// `Σ |c_α| ρ^{|α|}`.
    pub fn weighted_l1(&self, rho: f64) -> f64 {
        self.terms
            .iter()
            .map(|(a, c)| c.norm() * rho.powi(a.iter().sum::<u32>() as i32))
            .sum()
    }

    fn to_dense2(&self, deg: u32) -> Vec<Vec<C64>> {
        let n = deg as usize + 1;
        let mut out = vec![vec![C64::new(0.0, 0.0); n]; n];
        for (a, &c) in &self.terms {
            if a[0] <= deg && a[1] <= deg {
                out[a[0] as usize][a[1] as usize] = c;
            }
        }
        out
    }
}

/// Taylor coefficients `c_{ij}`, `0 ≤ i, j ≤ deg`, of `num/den` in two
/// variables, generic over the scalar field. Inputs are dense `(deg+1)²`
/// arrays indexed `[i][j]`; entries beyond the box are irrelevant.
pub fn taylor_ratio2_dense<T>(num: &[Vec<T>], den: &[Vec<T>], deg: usize) -> Result<Vec<Vec<T>>>
where
    T: Clone + Zero + for<'a> Sub<&'a T, Output = T> + for<'a> Mul<&'a T, Output = T> + DivBy,
{
    let get = |m: &[Vec<T>], i: usize, j: usize| -> T {
        m.get(i).and_then(|r| r.get(j)).cloned().unwrap_or_else(T::zero)
    };
    let d0 = get(den, 0, 0);
    if d0.is_zero() {
        return Err(Error::Precondition("denominator has zero constant term".into()));
    }
    // sparse list of nonzero den entries (excluding the constant) inside the box
    let mut den_terms = Vec::new();
    for i in 0..=deg {
        for j in 0..=deg {
            if (i, j) != (0, 0) {
                let v = get(den, i, j);
                if !v.is_zero() {
                    den_terms.push((i, j, v));
                }
            }
        }
    }
    let mut c: Vec<Vec<T>> = vec![vec![T::zero(); deg + 1]; deg + 1];
    for i in 0..=deg {
        for j in 0..=deg {
            let mut s = get(num, i, j);
            for (bi, bj, v) in &den_terms {
                if *bi <= i && *bj <= j {
                    s = s - &(v.clone() * &c[i - bi][j - bj]);
                }
            }
            c[i][j] = s.div_by(&d0);
        }
    }
    Ok(c)
}

/// Division used by [`taylor_ratio2_dense`]; separate so that both `C64` and
/// exact rationals qualify without extra bounds.
pub trait DivBy {
    fn div_by(self, d: &Self) -> Self;
}

impl DivBy for C64 {
    fn div_by(self, d: &Self) -> Self {
        self / d
    }
}

impl DivBy for num_rational::BigRational {
    fn div_by(self, d: &Self) -> Self {
        self / d
    }
}

/// Coefficients of `num/den` over the box `[0, deg]²`.
pub fn taylor_coeffs_ratio2(num: &MultiPoly, den: &MultiPoly, deg: u32) -> Result<MultiPoly> {
    if num.k() != 2 || den.k() != 2 {
        return Err(Error::Shape("bivariate polynomials expected".into()));
    }
    let c = taylor_ratio2_dense(&num.to_dense2(deg), &den.to_dense2(deg), deg as usize)?;
    let mut out = MultiPoly::new(2);
    for (i, row) in c.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            if !v.is_zero() {
                out.terms.insert(vec![i as u32, j as u32], v);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn ratio_of_equal_polynomials_is_one() {
        let p = MultiPoly::from_terms(2, [(vec![0, 0], c(2.0)), (vec![1, 2], c(-1.0))]).unwrap();
        let q = taylor_coeffs_ratio2(&p, &p, 6).unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(q.coeff(&[0, 0]), c(1.0));
    }

    #[test]
    fn geometric_series() {
        let one = MultiPoly::from_terms(2, [(vec![0, 0], c(1.0))]).unwrap();
        let den = MultiPoly::from_terms(2, [(vec![0, 0], c(1.0)), (vec![1, 0], c(-1.0))]).unwrap();
        let q = taylor_coeffs_ratio2(&one, &den, 5).unwrap();
        assert_eq!(q.len(), 6);
        for a in 0..=5 {
            assert_eq!(q.coeff(&[a, 0]), c(1.0));
        }
    }

    #[test]
    fn zero_constant_term_rejected() {
        let one = MultiPoly::from_terms(2, [(vec![0, 0], c(1.0))]).unwrap();
        let den = MultiPoly::from_terms(2, [(vec![1, 0], c(1.0))]).unwrap();
        assert!(taylor_coeffs_ratio2(&one, &den, 3).is_err());
    }

    #[test]
    fn exact_mode_residual_vanishes() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let num = vec![vec![r(1, 3), r(-2, 5)], vec![r(7, 2), r(0, 1)]];
        let den = vec![vec![r(1, 1), r(-1, 4)], vec![r(-1, 3), r(1, 7)]];
        let deg = 8;
        let cc = taylor_ratio2_dense(&num, &den, deg).unwrap();
        for i in 0..=deg {
            for j in 0..=deg {
                let mut s = r(0, 1);
                for bi in 0..=i.min(1) {
                    for bj in 0..=j.min(1) {
                        s += &den[bi][bj] * &cc[i - bi][j - bj];
                    }
                }
                let want = if i <= 1 && j <= 1 { num[i][j].clone() } else { r(0, 1) };
                assert_eq!(s, want, "({i},{j})");
            }
        }
    }

    #[test]
    fn add_term_drops_cancelled_entries() {
        let mut p = MultiPoly::new(2);
        p.add_term(vec![1, 1], c(2.0)).unwrap();
        p.add_term(vec![1, 1], c(-2.0)).unwrap();
        assert!(p.is_empty());
        assert!(p.add_term(vec![1], c(1.0)).is_err());
    }
}
