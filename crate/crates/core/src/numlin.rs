//! Dense complex linear algebra.
//!
//! Everything here works on small dense matrices (tens of rows at most):
//! LU with partial pivoting, spectral norm by power iteration, cyclic Jacobi
//! for Hermitian eigenproblems, and the polar decomposition built on top of it.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative pivot threshold below which a matrix is treated as singular.
pub const SINGULAR_PIVOT_TOL: f64 = 1e-13;

const POWER_ITER_TOL: f64 = 1e-12;
const POWER_ITER_MAX: usize = 10_000;
const JACOBI_MAX_SWEEPS: usize = 100;
const HERMITIAN_TOL: f64 = 1e-10;

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Shape(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(CMatrix { rows: r, cols: c, data: rows.concat() })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let data = rows.iter().flat_map(|row| row.iter().map(|&x| C64::new(x, 0.0))).collect();
        CMatrix { rows: r, cols: c, data }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn scalar(z: C64) -> Self {
        CMatrix { rows: 1, cols: 1, data: vec![z] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    /// `self + s I`.
    pub fn add_identity(&self, s: C64) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            out[(i, i)] += s;
        }
        out
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let orow = other.row(l);
                let base = i * other.cols;
                for (j, &b) in orow.iter().enumerate() {
                    out.data[base + j] += a * b;
                }
            }
        }
        Ok(out)
    }

    fn check_same_shape(&self, other: &CMatrix, op: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "cannot {} {}x{} and {}x{}",
                op, self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_shape(other, "add")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(CMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn try_sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_shape(other, "subtract")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(CMatrix { rows: self.rows, cols: self.cols, data })
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut out = Self::zeros(r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for p in 0..other.rows {
                    for q in 0..other.cols {
                        out[(i * other.rows + p, j * other.cols + q)] = a * other[(p, q)];
                    }
                }
            }
        }
        out
    }

    /// Block-diagonal matrix from square or rectangular blocks.
    pub fn block_diag(blocks: &[CMatrix]) -> CMatrix {
        let r: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(r, c);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// `[[a, b], [c, d]]` as one matrix.
    pub fn from_blocks(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> Result<CMatrix> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(Error::Shape("inconsistent 2x2 block layout".into()));
        }
        let mut out = Self::zeros(a.rows + c.rows, a.cols + b.cols);
        out.set_block(0, 0, a);
        out.set_block(0, a.cols, b);
        out.set_block(a.rows, 0, c);
        out.set_block(a.rows, a.cols, d);
        Ok(out)
    }

    pub fn vstack(top: &CMatrix, bottom: &CMatrix) -> Result<CMatrix> {
        if top.cols != bottom.cols {
            return Err(Error::Shape("vstack column mismatch".into()));
        }
        let mut data = top.data.clone();
        data.extend_from_slice(&bottom.data);
        Ok(CMatrix { rows: top.rows + bottom.rows, cols: top.cols, data })
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &CMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMatrix {
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Integer power by repeated squaring (square matrices only).
    pub fn powi(&self, n: u32) -> Result<CMatrix> {
        if !self.is_square() {
            return Err(Error::Shape("power of a non-square matrix".into()));
        }
        let mut result = CMatrix::identity(self.rows);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.matmul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base)?;
            }
        }
        Ok(result)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

// The operator impls panic on shape mismatch; the `try_*` methods are the
// fallible versions.
impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &'a CMatrix) -> CMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &'a CMatrix) -> CMatrix {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &'a CMatrix) -> CMatrix {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.map(|z| -z)
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let rows: Vec<Vec<C64>> =
            rows.into_iter().map(|r| r.into_iter().map(|[a, b]| C64::new(a, b)).collect()).collect();
        CMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}

/// LU factorization with partial pivoting, `P A = L U` packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    min_pivot: f64,
    max_pivot: f64,
}

impl Lu {
    pub fn new(a: &CMatrix) -> Result<Lu> {
        if !a.is_square() {
            return Err(Error::Shape(format!("LU of a {}x{} matrix", a.rows, a.cols)));
        }
        let n = a.rows;
        let threshold = SINGULAR_PIVOT_TOL * a.norm_one();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot: f64 = 0.0;
        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmag <= threshold || pmag == 0.0 {
                return Err(Error::Singular { pivot: pmag, threshold });
            }
            min_pivot = min_pivot.min(pmag);
            max_pivot = max_pivot.max(pmag);
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Lu { lu, perm, min_pivot, max_pivot })
    }

    /// Ratio of the largest to the smallest pivot magnitude.
    pub fn pivot_condition(&self) -> f64 {
        if self.lu.rows == 0 {
            1.0
        } else {
            self.max_pivot / self.min_pivot
        }
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix> {
        let n = self.lu.rows;
        if b.rows != n {
            return Err(Error::Shape(format!("right-hand side has {} rows, expected {}", b.rows, n)));
        }
        let m = b.cols;
        let mut x = CMatrix::zeros(n, m);
        for i in 0..n {
            for j in 0..m {
                x[(i, j)] = b[(self.perm[i], j)];
            }
        }
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..m {
                    let v = x[(k, j)];
                    x[(i, j)] -= l * v;
                }
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let u = self.lu[(i, k)];
                if u == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..m {
                    let v = x[(k, j)];
                    x[(i, j)] -= u * v;
                }
            }
            let d = self.lu[(i, i)];
            for j in 0..m {
                x[(i, j)] /= d;
            }
        }
        Ok(x)
    }
}

/// Solution of `A X = B` together with a cheap conditioning indicator.
#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub x: CMatrix,
    /// max |pivot| / min |pivot| of the LU factorization.
    pub condition_estimate: f64,
}

pub fn solve_linear(a: &CMatrix, b: &CMatrix) -> Result<LinearSolution> {
    let lu = Lu::new(a)?;
    let x = lu.solve(b)?;
    Ok(LinearSolution { x, condition_estimate: lu.pivot_condition() })
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    Lu::new(a)?.solve(&CMatrix::identity(a.rows))
}

/// Largest singular value, by power iteration on the smaller Gram matrix.
pub fn spectral_norm(a: &CMatrix) -> Result<f64> {
    if a.rows == 0 || a.cols == 0 {
        return Ok(0.0);
    }
    if a.rows == 1 || a.cols == 1 {
        return Ok(a.frobenius_norm());
    }
    let gram = if a.cols <= a.rows { &a.adjoint() * a } else { a * &a.adjoint() };
    let n = gram.rows;
    if gram.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let ones = vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let power = match power_iteration(&gram, ones) {
        Ok(Some(lambda)) => Ok(lambda),
        Ok(None) => {
            // all-ones start lies in the kernel; restart on the heaviest column
            let j = (0..n).fold(0, |b, i| if gram[(i, i)].re > gram[(b, b)].re { i } else { b });
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            power_iteration(&gram, e).map(|l| l.unwrap_or(0.0))
        }
        Err(e) => Err(e),
    };
    let lambda = match power {
        Ok(l) => l,
        // close but distinct top eigenvalues stall the iteration; Jacobi does not care
        Err(Error::NoConvergence { .. }) => {
            hermitian_eigen(&gram)?.values.last().copied().unwrap_or(0.0)
        }
        Err(e) => return Err(e),
    };
    Ok(lambda.max(0.0).sqrt())
}

fn mat_vec(m: &CMatrix, v: &[C64]) -> Vec<C64> {
    (0..m.rows).map(|i| m.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Returns `None` when the start vector is annihilated.
fn power_iteration(gram: &CMatrix, mut v: Vec<C64>) -> Result<Option<f64>> {
    let scale = gram.max_abs();
    let mut previous = f64::NAN;
    for _ in 0..POWER_ITER_MAX {
        let w = mat_vec(gram, &v);
        let rayleigh: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
        let wn = vec_norm(&w);
        if wn <= 1e-300 || (wn <= 1e-15 * scale && previous.is_nan()) {
            return Ok(None);
        }
        if (rayleigh - previous).abs() <= POWER_ITER_TOL * rayleigh.abs() {
            // ‖Gv‖ ≥ v*Gv and both are lower bounds of the top eigenvalue
            return Ok(Some(wn));
        }
        previous = rayleigh;
        v = w.into_iter().map(|z| z / wn).collect();
    }
    Err(Error::NoConvergence { what: "power iteration", iterations: POWER_ITER_MAX })
}

/// Eigen-decomposition `H = U diag(values) U*` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(h: &CMatrix) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::Shape("eigenproblem of a non-square matrix".into()));
    }
    let n = h.rows;
    let hnorm = h.frobenius_norm();
    let asym = (h - &h.adjoint()).frobenius_norm();
    if asym > HERMITIAN_TOL * hnorm.max(f64::MIN_POSITIVE) {
        return Err(Error::Precondition(format!("matrix is not Hermitian (defect {asym:.3e})")));
    }
    // work on the exactly Hermitian part
    let mut a = (h + &h.adjoint()).scale_real(0.5);
    let mut u = CMatrix::identity(n);
    let off = |a: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let target = 1e-15 * hnorm.max(f64::MIN_POSITIVE);
    let mut converged = off(&a) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { what: "Jacobi eigensolver", iterations: sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut u, p, q);
            }
        }
        converged = off(&a) <= target;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new_j)] = u[(i, old_j)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// One complex Jacobi rotation annihilating `a[p][q]`; accumulates into `u`.
fn jacobi_rotate(a: &mut CMatrix, u: &mut CMatrix, p: usize, q: usize) {
    let n = a.rows;
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // J = diag(1, conj(phase)) on (p,q) followed by the real rotation.
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;
    // A <- A J
    for i in 0..n {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * jpp + aiq * jqp;
        a[(i, q)] = aip * jpq + aiq * jqq;
    }
    // A <- J* A
    for j in 0..n {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = jpp.conj() * apj + jqp.conj() * aqj;
        a[(q, j)] = jpq.conj() * apj + jqq.conj() * aqj;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    for i in 0..n {
        let uip = u[(i, p)];
        let uiq = u[(i, q)];
        u[(i, p)] = uip * jpp + uiq * jqp;
        u[(i, q)] = uip * jpq + uiq * jqq;
    }
}

/// `T = U P` with `P = (T*T)^{1/2}`.
#[derive(Debug, Clone)]
pub struct Polar {
    pub u: CMatrix,
    pub p: CMatrix,
    /// Eigenvalues of `P` (ascending) and the matching eigenvectors, kept so
    /// callers can build spectral projections of `|T|`.
    pub singular_values: Vec<f64>,
    pub right_vectors: CMatrix,
}

pub fn polar_decompose(t: &CMatrix) -> Result<Polar> {
    if !t.is_square() {
        return Err(Error::Shape("polar decomposition of a non-square matrix".into()));
    }
    let n = t.rows;
    let eig = hermitian_eigen(&(&t.adjoint() * t))?;
    let sigma: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let v = eig.vectors;
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let rank_tol = 1e-12 * smax.max(f64::MIN_POSITIVE);

    // left vectors u_i = T v_i / sigma_i on the range, Gram-Schmidt completion elsewhere
    let tv = t * &v;
    let mut left: Vec<Option<Vec<C64>>> = vec![None; n];
    for i in (0..n).rev() {
        if sigma[i] > rank_tol {
            left[i] = Some((0..n).map(|r| tv[(r, i)] / sigma[i]).collect());
        }
    }
    let mut basis: Vec<Vec<C64>> = left.iter().flatten().cloned().collect();
    let mut candidates = (0..n).map(|e| {
        let mut x = vec![C64::new(0.0, 0.0); n];
        x[e] = C64::new(1.0, 0.0);
        x
    });
    for slot in left.iter_mut() {
        if slot.is_some() {
            continue;
        }
        loop {
            let mut x = candidates.next().expect("standard basis spans the space");
            for b in &basis {
                let proj: C64 = b.iter().zip(&x).map(|(bi, xi)| bi.conj() * xi).sum();
                for (xi, bi) in x.iter_mut().zip(b) {
                    *xi -= proj * bi;
                }
            }
            let nx = vec_norm(&x);
            if nx > 1e-8 {
                let x: Vec<C64> = x.into_iter().map(|z| z / nx).collect();
                basis.push(x.clone());
                *slot = Some(x);
                break;
            }
        }
    }
    let mut w = CMatrix::zeros(n, n);
    for (i, col) in left.iter().enumerate() {
        let col = col.as_ref().expect("filled above");
        for r in 0..n {
            w[(r, i)] = col[r];
        }
    }
    let vh = v.adjoint();
    let u = &w * &vh;
    let sig_c: Vec<C64> = sigma.iter().map(|&s| C64::new(s, 0.0)).collect();
    let p = &(&v * &CMatrix::from_diag(&sig_c)) * &vh;
    Ok(Polar { u, p, singular_values: sigma, right_vectors: v })
}

/// Minimum eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(h: &CMatrix) -> Result<f64> {
    let eig = hermitian_eigen(h)?;
    Ok(eig.values.first().copied().unwrap_or(f64::INFINITY))
}
