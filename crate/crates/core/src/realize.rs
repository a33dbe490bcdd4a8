//! Colligations `[[A, B], [C, D]]` and the realization
//! `F(z) = D + C P₋(z)_m (P₊(z)_m − A P₋(z)_m)⁻¹ B`.
//!
//! State indices are component-major: state `j·m + i` belongs to component
//! `j`. Operator arguments extend blocks as `X ⊗ I_d`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cdomain::{contains, eval_pencil, eval_pencil_operator, operator_pencil_margin, DomainSpec};
use crate::error::{Error, Result};
use crate::numlin::{spectral_norm, C64, CMatrix, Lu};
use crate::ratcalc::{laurent_coeffs_matrix, laurent_coeffs_of_realization, LaurentPoly};

/// Slack allowed when calling a colligation contractive.
pub const CONTRACTION_TOL: f64 = 1e-12;
/// Minimum eigenvalue of `P₊(T)*P₊(T) − P₋(T)*P₋(T)` required for the gain bound.
pub const STRICT_MARGIN: f64 = 1e-9;
/// Slack in `‖F(T)‖ ≤ gain`.
pub const GAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Colligation {
    k: usize,
    m: usize,
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
    d: CMatrix,
    gain: f64,
}

impl Colligation {
    pub fn new(k: usize, m: usize, a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> Result<Self> {
        let s = k * m;
        let (n_out, n_in) = d.shape();
        if k == 0 || m == 0 {
            return Err(Error::Shape("k and m must be positive".into()));
        }
        if a.shape() != (s, s) || b.shape() != (s, n_in) || c.shape() != (n_out, s) {
            return Err(Error::Shape(format!(
                "expected A {s}x{s}, B {s}x{n_in}, C {n_out}x{s}; got A {:?}, B {:?}, C {:?}",
                a.shape(),
                b.shape(),
                c.shape()
            )));
        }
        let top = CMatrix::from_blocks(&a, &b, &c, &d)?;
        let gain = spectral_norm(&top)?;
        Ok(Colligation { k, m, a, b, c, d, gain })
    }

    pub fn k(&self) -> usize {
        self.k
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n_in(&self) -> usize {
        self.d.cols()
    }
    pub fn n_out(&self) -> usize {
        self.d.rows()
    }
    pub fn a(&self) -> &CMatrix {
        &self.a
    }
    pub fn b(&self) -> &CMatrix {
        &self.b
    }
    pub fn c(&self) -> &CMatrix {
        &self.c
    }
    pub fn d(&self) -> &CMatrix {
        &self.d
    }
    /// `‖[[A, B], [C, D]]‖`.
    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn block_matrix(&self) -> CMatrix {
        CMatrix::from_blocks(&self.a, &self.b, &self.c, &self.d).expect("shapes checked at construction")
    }

    /// Same colligation with all blocks multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Colligation> {
        Colligation::new(
            self.k,
            self.m,
            self.a.scale_real(s),
            self.b.scale_real(s),
            self.c.scale_real(s),
            self.d.scale_real(s),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct ColligationFile {
    k: usize,
    m: usize,
    n_in: usize,
    n_out: usize,
    #[serde(rename = "A")]
    a: CMatrix,
    #[serde(rename = "B")]
    b: CMatrix,
    #[serde(rename = "C")]
    c: CMatrix,
    #[serde(rename = "D")]
    d: CMatrix,
}

impl Serialize for Colligation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ColligationFile {
            k: self.k,
            m: self.m,
            n_in: self.n_in(),
            n_out: self.n_out(),
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            d: self.d.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Colligation {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let f = ColligationFile::deserialize(de)?;
        let s = f.k * f.m;
        // empty JSON arrays lose their column count
        let fix = |m: CMatrix, r: usize, c: usize| if r * c == 0 { CMatrix::zeros(r, c) } else { m };
        let a = fix(f.a, s, s);
        let b = fix(f.b, s, f.n_in);
        let c = fix(f.c, f.n_out, s);
        let d = fix(f.d, f.n_out, f.n_in);
        if d.shape() != (f.n_out, f.n_in) {
            return Err(serde::de::Error::custom("D does not match n_out × n_in"));
        }
        Colligation::new(f.k, f.m, a, b, c, d).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColligationReport {
    pub gain: f64,
    pub is_contraction: bool,
}

pub fn validate_colligation(c: &Colligation) -> ColligationReport {
    ColligationReport { gain: c.gain, is_contraction: c.gain <= 1.0 + CONTRACTION_TOL }
}

/// Random colligation with Gaussian blocks rescaled to the given gain.
pub fn random_colligation(
    k: usize,
    m: usize,
    n_in: usize,
    n_out: usize,
    gain: f64,
    seed: u64,
) -> Result<Colligation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = |r: usize, c: usize| {
        let data = (0..r * c)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            })
            .collect();
        CMatrix::from_vec(r, c, data)
    };
    let s = k * m;
    let raw = Colligation::new(k, m, gauss(s, s)?, gauss(s, n_in)?, gauss(n_out, s)?, gauss(n_out, n_in)?)?;
    raw.scaled(gain / raw.gain)
}

/// `T` together with its per-component pencil values.
#[derive(Debug, Clone)]
pub struct OperatorArgument {
    t: CMatrix,
    blocks: Vec<(CMatrix, CMatrix)>,
    margin: f64,
}

impl OperatorArgument {
    /// Fails if some `P₊ⱼ(T)` is singular.
    pub fn new(spec: &DomainSpec, t: CMatrix) -> Result<Self> {
        let blocks = eval_pencil_operator(spec, &t)?;
        for (p, _) in &blocks {
            Lu::new(p)?;
        }
        let margin = operator_pencil_margin(&blocks)?;
        Ok(OperatorArgument { t, blocks, margin })
    }

    pub fn t(&self) -> &CMatrix {
        &self.t
    }
    pub fn dim(&self) -> usize {
        self.t.rows()
    }
    pub fn blocks(&self) -> &[(CMatrix, CMatrix)] {
        &self.blocks
    }
    /// Smallest eigenvalue of `P₊(T)*P₊(T) − P₋(T)*P₋(T)`.
    pub fn margin(&self) -> f64 {
        self.margin
    }
}

fn check_k(c: &Colligation, spec: &DomainSpec) -> Result<()> {
    if c.k != spec.k() {
        return Err(Error::Shape(format!("colligation has k = {}, domain has k = {}", c.k, spec.k())));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarValue {
    pub value: CMatrix,
    /// False when `z` lies outside the closed domain (evaluation still proceeds).
    pub in_domain: bool,
}

pub fn eval_realization_scalar(c: &Colligation, spec: &DomainSpec, z: C64) -> Result<ScalarValue> {
    check_k(c, spec)?;
    let pen = eval_pencil(spec, z);
    let expand = |v: &[C64]| -> Vec<C64> { v.iter().flat_map(|&x| std::iter::repeat_n(x, c.m)).collect() };
    let pp = expand(&pen.pplus);
    let pm = expand(&pen.pminus);
    let s = c.k * c.m;
    let mut w = CMatrix::zeros(s, s);
    for i in 0..s {
        for j in 0..s {
            w[(i, j)] = -c.a[(i, j)] * pm[j];
        }
        w[(i, i)] += pp[i];
    }
    let x = Lu::new(&w)?.solve(&c.b)?;
    let mut zx = x;
    for i in 0..s {
        for j in 0..zx.cols() {
            zx[(i, j)] *= pm[i];
        }
    }
    Ok(ScalarValue { value: &c.d + &(&c.c * &zx), in_domain: contains(spec, z, false) })
}

/// Pieces shared by the operator evaluation and the defect identity.
struct OperatorParts {
    zp: CMatrix,
    zm: CMatrix,
    ae: CMatrix,
    be: CMatrix,
    ce: CMatrix,
    de: CMatrix,
    /// `(Z₊ − A_e Z₋)⁻¹ B_e`
    x: CMatrix,
}

fn operator_parts(c: &Colligation, spec: &DomainSpec, t: &OperatorArgument) -> Result<OperatorParts> {
    check_k(c, spec)?;
    let d = t.dim();
    let id_m = CMatrix::identity(c.m);
    let id_d = CMatrix::identity(d);
    let zp = CMatrix::block_diag(&t.blocks.iter().map(|(p, _)| id_m.kron(p)).collect::<Vec<_>>());
    let zm = CMatrix::block_diag(&t.blocks.iter().map(|(_, q)| id_m.kron(q)).collect::<Vec<_>>());
    let ae = c.a.kron(&id_d);
    let be = c.b.kron(&id_d);
    let ce = c.c.kron(&id_d);
    let de = c.d.kron(&id_d);
    let w = &zp - &(&ae * &zm);
    let x = Lu::new(&w)?.solve(&be)?;
    Ok(OperatorParts { zp, zm, ae, be, ce, de, x })
}

/// `D_e + C_e Z₋ (Z₊ − A_e Z₋)⁻¹ B_e`.
pub fn eval_realization_operator(c: &Colligation, spec: &DomainSpec, t: &OperatorArgument) -> Result<CMatrix> {
    let p = operator_parts(c, spec, t)?;
    Ok(&p.de + &(&p.ce * &(&p.zm * &p.x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

fn require_strict(t: &OperatorArgument) -> Result<()> {
    if t.margin < STRICT_MARGIN {
        return Err(Error::Precondition(format!(
            "pencil inequality not strict: minimum eigenvalue {:.3e} < {STRICT_MARGIN:e}",
            t.margin
        )));
    }
    Ok(())
}

/// `‖F(T)‖ ≤ ‖[[A, B], [C, D]]‖` for `T` strictly inside the class.
pub fn gain_bound_check(c: &Colligation, spec: &DomainSpec, t: &OperatorArgument) -> Result<GainCheck> {
    require_strict(t)?;
    let f = eval_realization_operator(c, spec, t)?;
    let lhs = spectral_norm(&f)?;
    Ok(GainCheck { lhs, rhs: c.gain, pass: lhs <= c.gain + GAIN_TOL })
}

/// Norm of `(I − F*F) − (V*[[P, Q], [Q*, R]]V + B_e*W^{-*}(Z₊*Z₊ − Z₋*Z₋)W⁻¹B_e)`.
pub fn defect_identity_residual(c: &Colligation, spec: &DomainSpec, t: &OperatorArgument) -> Result<f64> {
    require_strict(t)?;
    let p = operator_parts(c, spec, t)?;
    let f = &p.de + &(&p.ce * &(&p.zm * &p.x));
    let n_in = p.be.cols();
    let s = p.ae.rows();
    let lhs = (&f.adjoint() * &f).scale_real(-1.0).add_identity(C64::new(1.0, 0.0));
    let pp = (&(&p.ae.adjoint() * &p.ae) + &(&p.ce.adjoint() * &p.ce)).scale_real(-1.0).add_identity(C64::new(1.0, 0.0));
    let q = (&(&p.ae.adjoint() * &p.be) + &(&p.ce.adjoint() * &p.de)).scale_real(-1.0);
    let r = (&(&p.be.adjoint() * &p.be) + &(&p.de.adjoint() * &p.de)).scale_real(-1.0).add_identity(C64::new(1.0, 0.0));
    let mid = CMatrix::from_blocks(&pp, &q, &q.adjoint(), &r)?;
    let v = CMatrix::vstack(&(&p.zm * &p.x), &CMatrix::identity(n_in))?;
    let pos = &(&p.zp.adjoint() * &p.zp) - &(&p.zm.adjoint() * &p.zm);
    debug_assert_eq!(pos.rows(), s);
    let rhs = &(&(&v.adjoint() * &mid) * &v) + &(&(&p.x.adjoint() * &pos) * &p.x);
    spectral_norm(&(&lhs - &rhs))
}

/// `F = γⱼ` realized with `m = 1`, `A = 0`, `B = eⱼ`, `C = eⱼ*`, `D = 0`.
pub fn mobius_colligation(spec: &DomainSpec, j: usize) -> Result<Colligation> {
    let k = spec.k();
    spec.component(j)?;
    let mut b = CMatrix::zeros(k, 1);
    b[(j, 0)] = C64::new(1.0, 0.0);
    Colligation::new(k, 1, CMatrix::zeros(k, k), b.clone(), b.adjoint(), CMatrix::zeros(1, 1))
}

/// `y = F·u` on `[kmin, kmax]`, from the Laurent data of `F` on `A_{R,r}`.
pub fn transfer_apply<F>(f: F, outer: f64, inner: f64, u: &LaurentPoly, window: (i64, i64)) -> Result<LaurentPoly>
where
    F: Fn(C64) -> Result<C64>,
{
    let (lo, hi) = window;
    if u.is_zero() || hi < lo {
        return Ok(LaurentPoly::zero());
    }
    let fw = (lo - u.kmax(), hi - u.kmin());
    let fc = laurent_coeffs_of_realization(f, outer, inner, fw, 64)?;
    Ok(LaurentPoly::new(lo, (lo..=hi).map(|k| u.iter().map(|(j, uj)| fc.coeff(k - j) * uj).sum()).collect()))
}

/// Outcome of running the difference system behind a two-component annulus colligation.
#[derive(Debug, Clone, Serialize)]
pub struct SigmaDemo {
    pub y: LaurentPoly,
    /// Max residual of the two state equations over the window.
    pub state_residual: f64,
    /// Max difference between `y_k` and the output equation over the window.
    pub output_residual: f64,
}

/// Feed `u` through the system
/// `R x_k = [A(x_{k−1}, r x̃_k) + B u_k]₁`, `x̃_{k−1} = [A(x_{k−1}, r x̃_k) + B u_k]₂`,
/// `y_k = C(x_{k−1}, r x̃_k) + D u_k` whose transfer function is the realization on
/// the annulus; states come from the Laurent data of `(P₊ − A P₋)⁻¹ B`.
pub fn sigma_demo(c: &Colligation, outer: f64, inner: f64, u: &LaurentPoly, window: (i64, i64)) -> Result<SigmaDemo> {
    if c.k != 2 || c.n_in() != 1 || c.n_out() != 1 {
        return Err(Error::Precondition("the demo needs a scalar two-component colligation".into()));
    }
    let spec = DomainSpec::annulus(outer, inner);
    let (lo, hi) = window;
    if hi < lo || u.is_zero() {
        return Err(Error::Precondition("empty window or zero input".into()));
    }
    let y = transfer_apply(
        |z| Ok(eval_realization_scalar(c, &spec, z)?.value[(0, 0)]),
        outer,
        inner,
        u,
        window,
    )?;
    // state transfer X(z) = (P₊ − A P₋)⁻¹ B, sampled through a unit input
    let s = 2 * c.m;
    let state_fn = |z: C64| -> Result<CMatrix> {
        let pen = eval_pencil(&spec, z);
        let mut w = CMatrix::zeros(s, s);
        for i in 0..s {
            let comp = i / c.m;
            for j in 0..s {
                w[(i, j)] = -c.a[(i, j)] * pen.pminus[j / c.m];
            }
            w[(i, i)] += pen.pplus[comp];
        }
        Lu::new(&w)?.solve(&c.b)
    };
    let xlo = lo - 1 - u.kmax();
    let xhi = hi + 1 - u.kmin();
    let xhat = laurent_coeffs_matrix(state_fn, outer, inner, (xlo, xhi), 64)?;
    let state = |k: i64| -> CMatrix {
        let mut acc = CMatrix::zeros(s, 1);
        for (j, uj) in u.iter() {
            let idx = k - j;
            if idx >= xlo && idx <= xhi {
                acc = &acc + &xhat[(idx - xlo) as usize].scale(uj);
            }
        }
        acc
    };
    let m = c.m;
    let mut state_residual: f64 = 0.0;
    let mut output_residual: f64 = 0.0;
    for k in lo..=hi {
        let xk = state(k);
        let xprev = state(k - 1);
        // v = (x_{k−1}, r x̃_k)
        let mut v = CMatrix::zeros(s, 1);
        for i in 0..m {
            v[(i, 0)] = xprev[(i, 0)];
            v[(m + i, 0)] = xk[(m + i, 0)] * inner;
        }
        let rhs = &(&c.a * &v) + &c.b.scale(u.coeff(k));
        for i in 0..m {
            state_residual = state_residual.max((xk[(i, 0)] * outer - rhs[(i, 0)]).norm());
            state_residual = state_residual.max((xprev[(m + i, 0)] - rhs[(m + i, 0)]).norm());
        }
        let yk = (&c.c * &v)[(0, 0)] + c.d[(0, 0)] * u.coeff(k);
        output_residual = output_residual.max((yk - y.coeff(k)).norm());
    }
    Ok(SigmaDemo { y, state_residual, output_residual })
}
