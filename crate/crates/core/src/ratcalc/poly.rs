use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numlin::{C64, CMatrix, Lu};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Relative distance under which computed roots are merged into one
/// multiple root. Aberth iterates split a root of multiplicity μ by roughly
/// `ε^{1/μ}`, so this has to be loose.
pub const ROOT_CLUSTER_TOL: f64 = 1e-5;

/// Tolerance for cancelling a common root of numerator and denominator.
pub const CANCEL_TOL: f64 = 1e-9;

/// Univariate polynomial, coefficients ascending in `z`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly1 {
    coeffs: Vec<C64>,
}

impl Poly1 {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        Poly1 { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly1::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Poly1 { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly1::constant(ONE)
    }

    pub fn constant(c: C64) -> Self {
        Poly1::new(vec![c])
    }

    pub fn monomial(c: C64, n: usize) -> Self {
        let mut v = vec![ZERO; n + 1];
        v[n] = c;
        Poly1::new(v)
    }

    /// `slope·z + intercept`
    pub fn linear(slope: C64, intercept: C64) -> Self {
        Poly1::new(vec![intercept, slope])
    }

    /// Monic `Π (z − rᵢ)`.
    pub fn from_roots(roots: &[C64]) -> Self {
        roots.iter().fold(Poly1::one(), |acc, &r| &acc * &Poly1::linear(ONE, -r))
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> C64 {
        self.coeffs.get(i).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// Horner evaluation at a square matrix.
    pub fn eval_matrix(&self, t: &CMatrix) -> CMatrix {
        let n = t.rows();
        let mut acc = CMatrix::zeros(n, n);
        for &c in self.coeffs.iter().rev() {
            acc = (&acc * t).add_identity(c);
        }
        acc
    }

    pub fn scale(&self, s: C64) -> Self {
        Poly1::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn pow(&self, n: usize) -> Self {
        (0..n).fold(Poly1::one(), |acc, _| &acc * self)
    }

    /// Drop leading coefficients below `tol · max|coeff|`.
    pub fn trim_relative(&self, tol: f64) -> Self {
        let cutoff = tol * self.max_abs_coeff();
        let mut c = self.coeffs.clone();
        while c.last().is_some_and(|x| x.norm() <= cutoff) {
            c.pop();
        }
        Poly1::new(c)
    }

    /// Quotient and remainder; `divisor` must be nonzero.
    pub fn div_rem(&self, divisor: &Poly1) -> Result<(Poly1, Poly1)> {
        let dd = divisor
            .degree()
            .ok_or_else(|| Error::Precondition("division by the zero polynomial".into()))?;
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly1::zero(), self.clone()));
        }
        let mut quot = vec![ZERO; rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let q = rem[i + dd] / lead;
            quot[i] = q;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= q * dc;
            }
        }
        rem.truncate(dd);
        Ok((Poly1::new(quot), Poly1::new(rem)))
    }

    /// Coefficients of `w ↦ p(β + w)`.
    pub fn taylor_shift(&self, beta: C64) -> Poly1 {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let hi = c[j + 1];
                c[j] += beta * hi;
            }
        }
        Poly1::new(c)
    }

    /// All complex roots (with repetition), Aberth–Ehrlich iteration.
    pub fn roots(&self) -> Result<Vec<C64>> {
        let Some(deg) = self.degree() else {
            return Err(Error::Precondition("roots of the zero polynomial".into()));
        };
        let zeros_at_origin = self.coeffs.iter().take_while(|&&c| c == ZERO).count();
        let mut out = vec![ZERO; zeros_at_origin];
        let reduced: Vec<C64> = self.coeffs[zeros_at_origin..].to_vec();
        let n = deg - zeros_at_origin;
        if n == 0 {
            return Ok(out);
        }
        let lead = reduced[n];
        let monic: Vec<C64> = reduced.iter().map(|&c| c / lead).collect();
        if n == 1 {
            out.push(-monic[0]);
            return Ok(out);
        }
        let p = Poly1::new(monic.clone());
        let dp = p.derivative();
        // Cauchy bound for the initial circle
        let bound = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let radius = monic[0].norm().powf(1.0 / n as f64).clamp(1e-3, bound);
        let mut z: Vec<C64> = (0..n)
            .map(|i| C64::from_polar(radius, std::f64::consts::TAU * i as f64 / n as f64 + 0.4))
            .collect();
        let mut done = false;
        for _ in 0..2000 {
            let mut max_step: f64 = 0.0;
            for i in 0..n {
                let pv = p.eval(z[i]);
                if pv == ZERO {
                    continue;
                }
                let ratio = pv / dp.eval(z[i]);
                let mut s = ZERO;
                for j in 0..n {
                    if j != i {
                        s += ONE / (z[i] - z[j]);
                    }
                }
                let w = ratio / (ONE - ratio * s);
                if w.re.is_finite() && w.im.is_finite() {
                    z[i] -= w;
                    max_step = max_step.max(w.norm() / (1.0 + z[i].norm()));
                }
            }
            if max_step < 1e-15 {
                done = true;
                break;
            }
        }
        if !done {
            // multiple roots converge slowly; accept if residuals are tiny
            let scale = monic.iter().map(|c| c.norm()).sum::<f64>();
            let ok = z.iter().all(|&r| p.eval(r).norm() <= 1e-9 * scale * (1.0 + r.norm()).powi(n as i32));
            if !ok {
                return Err(Error::NoConvergence { what: "polynomial root finder", iterations: 2000 });
            }
        }
        out.extend(z);
        Ok(out)
    }

    pub fn derivative(&self) -> Poly1 {
        Poly1::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }
}

/// Distinct roots with multiplicities, merging numerically split clusters.
pub fn clustered_roots(p: &Poly1) -> Result<Vec<(C64, usize)>> {
    let roots = p.roots()?;
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let mut members = vec![roots[i]];
        used[i] = true;
        for j in (i + 1)..roots.len() {
            if !used[j] && (roots[j] - roots[i]).norm() <= ROOT_CLUSTER_TOL * (1.0 + roots[i].norm()) {
                used[j] = true;
                members.push(roots[j]);
            }
        }
        let mean = members.iter().sum::<C64>() / members.len() as f64;
        out.push((mean, members.len()));
    }
    Ok(out)
}

impl<'a> Add<&'a Poly1> for &'a Poly1 {
    type Output = Poly1;
    fn add(self, rhs: &'a Poly1) -> Poly1 {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly1::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<'a> Sub<&'a Poly1> for &'a Poly1 {
    type Output = Poly1;
    fn sub(self, rhs: &'a Poly1) -> Poly1 {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly1::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<'a> Mul<&'a Poly1> for &'a Poly1 {
    type Output = Poly1;
    fn mul(self, rhs: &'a Poly1) -> Poly1 {
        if self.is_zero() || rhs.is_zero() {
            return Poly1::zero();
        }
        let mut c = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly1::new(c)
    }
}

/// Scalar rational function with a monic denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct RatFun1 {
    num: Poly1,
    den: Poly1,
}

impl RatFun1 {
    /// Normalizes the denominator to be monic and cancels common roots.
    pub fn new(num: Poly1, den: Poly1) -> Result<Self> {
        let f = MatRatFun1::new(vec![vec![num]], den)?;
        Ok(RatFun1 { num: f.num[0][0].clone(), den: f.den })
    }

    pub fn polynomial(p: Poly1) -> Self {
        RatFun1 { num: p, den: Poly1::one() }
    }

    pub fn num(&self) -> &Poly1 {
        &self.num
    }

    pub fn den(&self) -> &Poly1 {
        &self.den
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.num.eval(z) / self.den.eval(z)
    }

    pub fn to_matrix(&self) -> MatRatFun1 {
        MatRatFun1 { num: vec![vec![self.num.clone()]], den: self.den.clone() }
    }
}

/// Matrix of polynomials over one common monic denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct MatRatFun1 {
    num: Vec<Vec<Poly1>>,
    den: Poly1,
}

impl MatRatFun1 {
    pub fn new(num: Vec<Vec<Poly1>>, den: Poly1) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Precondition("zero denominator".into()));
        }
        let n_in = num.first().map_or(0, |r| r.len());
        if num.is_empty() || n_in == 0 || num.iter().any(|r| r.len() != n_in) {
            return Err(Error::Shape("numerator must be a non-empty rectangular matrix".into()));
        }
        let lead = den.leading();
        let inv = ONE / lead;
        let mut f = MatRatFun1 {
            num: num.into_iter().map(|r| r.into_iter().map(|p| p.scale(inv)).collect()).collect(),
            den: den.scale(inv),
        };
        f.cancel_common_roots()?;
        Ok(f)
    }

    /// No reduction or normalization; `den` must already be monic.
    pub(crate) fn from_parts_unchecked(num: Vec<Vec<Poly1>>, den: Poly1) -> Self {
        MatRatFun1 { num, den }
    }

    pub fn scalar(num: Poly1, den: Poly1) -> Result<Self> {
        MatRatFun1::new(vec![vec![num]], den)
    }

    pub fn polynomial(p: Poly1) -> Self {
        MatRatFun1 { num: vec![vec![p]], den: Poly1::one() }
    }

    pub fn zero(n_out: usize, n_in: usize) -> Self {
        MatRatFun1 { num: vec![vec![Poly1::zero(); n_in]; n_out], den: Poly1::one() }
    }

    pub fn n_out(&self) -> usize {
        self.num.len()
    }

    pub fn n_in(&self) -> usize {
        self.num[0].len()
    }

    pub fn den(&self) -> &Poly1 {
        &self.den
    }

    pub fn num(&self) -> &[Vec<Poly1>] {
        &self.num
    }

    pub fn entry(&self, i: usize, j: usize) -> Result<RatFun1> {
        RatFun1::new(self.num[i][j].clone(), self.den.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().flatten().all(Poly1::is_zero)
    }

    /// Largest numerator degree over all entries (`None` if all vanish).
    pub fn num_degree(&self) -> Option<usize> {
        self.num.iter().flatten().filter_map(Poly1::degree).max()
    }

    fn cancel_common_roots(&mut self) -> Result<()> {
        if self.den.degree().unwrap_or(0) == 0 || self.is_zero() {
            return Ok(());
        }
        let roots = clustered_roots(&self.den)?;
        for (beta, mult) in roots {
            for _ in 0..mult {
                let cancellable = self.num.iter().flatten().all(|p| {
                    let scale = p.coeffs().iter().map(|c| c.norm()).sum::<f64>()
                        * (1.0 + beta.norm()).powi(p.coeffs().len() as i32);
                    p.eval(beta).norm() <= CANCEL_TOL * scale.max(f64::MIN_POSITIVE)
                });
                if !cancellable {
                    break;
                }
                let lin = Poly1::linear(ONE, -beta);
                let (dq, _) = self.den.div_rem(&lin)?;
                self.den = dq;
                for p in self.num.iter_mut().flatten() {
                    *p = p.div_rem(&lin)?.0;
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, z: C64) -> Result<CMatrix> {
        let d = self.den.eval(z);
        if d == ZERO {
            return Err(Error::Singular { pivot: 0.0, threshold: 0.0 });
        }
        let rows: Vec<Vec<C64>> =
            self.num.iter().map(|r| r.iter().map(|p| p.eval(z) / d).collect()).collect();
        CMatrix::from_rows(&rows)
    }

    pub fn add(&self, other: &MatRatFun1) -> Result<MatRatFun1> {
        if (self.n_out(), self.n_in()) != (other.n_out(), other.n_in()) {
            return Err(Error::Shape("adding rational matrices of different shapes".into()));
        }
        if self.den == other.den {
            let num = self
                .num
                .iter()
                .zip(&other.num)
                .map(|(a, b)| a.iter().zip(b).map(|(p, q)| p + q).collect())
                .collect();
            return Ok(MatRatFun1 { num, den: self.den.clone() });
        }
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(a, b)| a.iter().zip(b).map(|(p, q)| &(p * &other.den) + &(q * &self.den)).collect())
            .collect();
        Ok(MatRatFun1 { num, den: &self.den * &other.den })
    }

    /// The function as a Laurent polynomial, when it is 1×1 with a monomial denominator.
    pub fn as_laurent(&self) -> Option<super::LaurentPoly> {
        if self.n_out() != 1 || self.n_in() != 1 {
            return None;
        }
        let l = self.den.degree()?;
        if self.den.coeffs()[..l].iter().any(|c| *c != ZERO) {
            return None;
        }
        Some(super::LaurentPoly::new(-(l as i64), self.num[0][0].coeffs().to_vec()))
    }
}

/// `F(T)` as the `(n_out·d) × (n_in·d)` block matrix `(I ⊗ den(T))⁻¹ num(T)`.
pub fn ratfun_eval_at_matrix(f: &MatRatFun1, t: &CMatrix) -> Result<CMatrix> {
    if !t.is_square() {
        return Err(Error::Shape("matrix argument must be square".into()));
    }
    let d = t.rows();
    let lu = Lu::new(&f.den.eval_matrix(t))?;
    let mut out = CMatrix::zeros(f.n_out() * d, f.n_in() * d);
    for (p, row) in f.num.iter().enumerate() {
        for (q, poly) in row.iter().enumerate() {
            if poly.is_zero() {
                continue;
            }
            let block = lu.solve(&poly.eval_matrix(t))?;
            out.set_block(p * d, q * d, &block);
        }
    }
    Ok(out)
}

/// On-disk form of a scalar rational function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatFunFile {
    pub num: Vec<[f64; 2]>,
    pub den: Vec<[f64; 2]>,
}

impl RatFunFile {
    pub fn to_ratfun(&self) -> Result<MatRatFun1> {
        let p = |v: &[[f64; 2]]| Poly1::new(v.iter().map(|&[a, b]| C64::new(a, b)).collect());
        MatRatFun1::scalar(p(&self.num), p(&self.den))
    }

    pub fn from_ratfun(f: &RatFun1) -> Self {
        let v = |p: &Poly1| p.coeffs().iter().map(|c| [c.re, c.im]).collect();
        RatFunFile { num: v(f.num()), den: v(f.den()) }
    }
}
