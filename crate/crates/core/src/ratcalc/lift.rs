use std::collections::BTreeMap;

use crate::cdomain::{DomainSpec, MobiusMap};
use crate::error::{Error, Result};
use crate::numlin::{spectral_norm, C64, CMatrix, Lu};

use super::poly::{clustered_roots, MatRatFun1, Poly1};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Safety margin for assigning a pole to a component.
pub const POLE_MARGIN: f64 = 1e-9;
/// Relative commutator bound for tuple arguments.
pub const COMMUTATION_TOL: f64 = 1e-10;
/// Leading coefficients below this (relative) are dropped after Möbius precomposition.
const COMPOSE_TRIM: f64 = 1e-14;
/// Poles this close (relative) to the point `γⱼ` sends to infinity are moved onto it,
/// so the precomposed denominator drops degree exactly instead of keeping a tiny
/// leading coefficient.
pub const POLE_SNAP_TOL: f64 = 1e-7;

/// The finite point mapped to infinity by component `j`'s coordinate, if any.
fn gamma_pole(spec: &DomainSpec, j: usize) -> Option<C64> {
    let g = spec.components[j].gamma();
    (g.c != ZERO).then(|| -g.d / g.c)
}

/// Index of the component whose complement receives pole `beta`.
fn assign_pole(spec: &DomainSpec, beta: C64) -> Result<usize> {
    let err_in = Error::PoleInDomain { re: beta.re, im: beta.im };
    let mut ambiguous = false;
    for (j, comp) in spec.components.iter().enumerate() {
        let m = comp.outside_margin(beta);
        if m > POLE_MARGIN {
            return Ok(j);
        }
        if m > -POLE_MARGIN {
            ambiguous = true;
        }
    }
    if ambiguous {
        Err(Error::AmbiguousPole { re: beta.re, im: beta.im })
    } else {
        Err(err_in)
    }
}

/// First `count` Taylor coefficients of `a / b` at 0, `b(0) ≠ 0`.
fn series_div(a: &Poly1, b: &Poly1, count: usize) -> Vec<C64> {
    let b0 = b.coeff(0);
    let mut out: Vec<C64> = Vec::with_capacity(count);
    for i in 0..count {
        let mut s = a.coeff(i);
        for j in 1..=i {
            s -= b.coeff(j) * out[i - j];
        }
        out.push(s / b0);
    }
    out
}

/// Split `F` into `Σⱼ Fⱼ`, each `Fⱼ` carrying the poles in the complement of
/// component `j`; the polynomial part goes to the first component.
pub fn partial_fractions_grouped(f: &MatRatFun1, spec: &DomainSpec) -> Result<Vec<MatRatFun1>> {
    let k = spec.k();
    if k == 0 {
        return Err(Error::InvalidDomain("domain has no components".into()));
    }
    let (n_out, n_in) = (f.n_out(), f.n_in());
    let mut poles = if f.den().degree().unwrap_or(0) == 0 { Vec::new() } else { clustered_roots(f.den())? };
    let mut owner = Vec::with_capacity(poles.len());
    for (beta, _) in poles.iter_mut() {
        let j = assign_pole(spec, *beta)?;
        if let Some(star) = gamma_pole(spec, j) {
            if (*beta - star).norm() <= POLE_SNAP_TOL * (1.0 + star.norm()) {
                *beta = star;
            }
        }
        owner.push(j);
    }

    // polynomial part and proper remainder
    let mut quot = vec![vec![Poly1::zero(); n_in]; n_out];
    let mut rem = vec![vec![Poly1::zero(); n_in]; n_out];
    for p in 0..n_out {
        for q in 0..n_in {
            let (a, b) = f.num()[p][q].div_rem(f.den())?;
            quot[p][q] = a;
            rem[p][q] = b;
        }
    }

    // principal part of each pole: coefficient of (z−β)^{−s}, s = 1..μ
    let mut principal: Vec<Vec<Vec<Vec<C64>>>> = Vec::with_capacity(poles.len());
    for (i, &(beta, mu)) in poles.iter().enumerate() {
        let others: Vec<C64> = poles
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != i)
            .flat_map(|(_, &(b, m))| std::iter::repeat_n(b, m))
            .collect();
        let others_shift = Poly1::from_roots(&others).taylor_shift(beta);
        let per_entry = rem
            .iter()
            .map(|row| {
                row.iter()
                    .map(|r| {
                        let g = series_div(&r.taylor_shift(beta), &others_shift, mu);
                        // g_i multiplies (z−β)^{i−μ}
                        (1..=mu).map(|s| g[mu - s]).collect()
                    })
                    .collect()
            })
            .collect();
        principal.push(per_entry);
    }

    let mut parts = Vec::with_capacity(k);
    for j in 0..k {
        let mine: Vec<usize> = (0..poles.len()).filter(|&i| owner[i] == j).collect();
        let den_roots: Vec<C64> =
            mine.iter().flat_map(|&i| std::iter::repeat_n(poles[i].0, poles[i].1)).collect();
        let den = Poly1::from_roots(&den_roots);
        let mut num = vec![vec![Poly1::zero(); n_in]; n_out];
        for &i in &mine {
            let (beta, mu) = poles[i];
            let rest: Vec<C64> = mine
                .iter()
                .filter(|&&l| l != i)
                .flat_map(|&l| std::iter::repeat_n(poles[l].0, poles[l].1))
                .collect();
            let rest_poly = Poly1::from_roots(&rest);
            let lin = Poly1::linear(ONE, -beta);
            for p in 0..n_out {
                for q in 0..n_in {
                    let mut acc = Poly1::zero();
                    for s in 1..=mu {
                        let c = principal[i][p][q][s - 1];
                        if c != ZERO {
                            acc = &acc + &lin.pow(mu - s).scale(c);
                        }
                    }
                    num[p][q] = &num[p][q] + &(&acc * &rest_poly);
                }
            }
        }
        if j == 0 {
            for p in 0..n_out {
                for q in 0..n_in {
                    num[p][q] = &num[p][q] + &(&quot[p][q] * &den);
                }
            }
        }
        parts.push(MatRatFun1::from_parts_unchecked(num, den));
    }
    Ok(parts)
}

/// `p ∘ g` over the common power `e`: `Σ pᵢ (aw+b)ⁱ (cw+d)^{e−i}`.
fn compose_homogeneous(p: &Poly1, e: usize, pow_num: &[Poly1], pow_den: &[Poly1]) -> Poly1 {
    let mut acc = Poly1::zero();
    for (i, &c) in p.coeffs().iter().enumerate() {
        if c != ZERO {
            acc = &acc + &(&pow_num[i] * &pow_den[e - i]).scale(c);
        }
    }
    acc
}

/// `F ∘ g` computed on coefficient lists.
pub fn compose_mobius(f: &MatRatFun1, g: &MobiusMap) -> Result<MatRatFun1> {
    let e = f.num_degree().unwrap_or(0).max(f.den().degree().unwrap_or(0));
    let lin_num = Poly1::linear(g.a, g.b);
    let lin_den = Poly1::linear(g.c, g.d);
    let mut pow_num = vec![Poly1::one()];
    let mut pow_den = vec![Poly1::one()];
    for i in 1..=e {
        pow_num.push(&pow_num[i - 1] * &lin_num);
        pow_den.push(&pow_den[i - 1] * &lin_den);
    }
    let den = compose_homogeneous(f.den(), e, &pow_num, &pow_den).trim_relative(COMPOSE_TRIM);
    let num: Vec<Vec<Poly1>> = f
        .num()
        .iter()
        .map(|row| {
            row.iter()
                .map(|p| compose_homogeneous(p, e, &pow_num, &pow_den).trim_relative(COMPOSE_TRIM))
                .collect()
        })
        .collect();
    MatRatFun1::new(num, den)
}

/// `G(z₁,…,z_k) = Σⱼ Hⱼ(zⱼ) + Σ c_α z^α` on the closed polydisk.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedFunction {
    k: usize,
    parts: Vec<(usize, MatRatFun1)>,
    corrections: Vec<(Vec<u32>, C64)>,
}

impl LiftedFunction {
    pub fn new(k: usize, parts: Vec<(usize, MatRatFun1)>) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::Precondition("lifted function needs at least one part".into()));
        };
        let shape = (first.n_out(), first.n_in());
        for (j, h) in &parts {
            if *j >= k {
                return Err(Error::IndexOutOfRange { index: *j, k });
            }
            if (h.n_out(), h.n_in()) != shape {
                return Err(Error::Shape("lifted parts disagree in shape".into()));
            }
            if h.den().degree().unwrap_or(0) > 0 {
                for (root, _) in clustered_roots(h.den())? {
                    if root.norm() <= 1.0 + POLE_MARGIN {
                        return Err(Error::Precondition(format!(
                            "lifted part {j} has a pole at {root} in the closed unit disk"
                        )));
                    }
                }
            }
        }
        Ok(LiftedFunction { k, parts, corrections: Vec::new() })
    }

    /// Add scalar monomials `c·z^α`; only for 1×1 functions.
    pub fn with_corrections(mut self, terms: Vec<(Vec<u32>, C64)>) -> Result<Self> {
        if self.shape() != (1, 1) {
            return Err(Error::Shape("correction terms need a scalar function".into()));
        }
        if terms.iter().any(|(a, _)| a.len() != self.k) {
            return Err(Error::Shape("correction exponent has the wrong arity".into()));
        }
        self.corrections.extend(terms);
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.parts[0].1.n_out(), self.parts[0].1.n_in())
    }

    pub fn parts(&self) -> &[(usize, MatRatFun1)] {
        &self.parts
    }

    pub fn corrections(&self) -> &[(Vec<u32>, C64)] {
        &self.corrections
    }

    /// Collect the Taylor data of a polynomial lift; `None` if some `Hⱼ` is not a polynomial.
    pub fn polynomial_terms(&self) -> Option<BTreeMap<Vec<u32>, C64>> {
        if self.shape() != (1, 1) {
            return None;
        }
        let mut terms: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
        for (j, h) in &self.parts {
            if h.den().degree().unwrap_or(0) > 0 {
                return None;
            }
            let scale = ONE / h.den().leading();
            for (i, &c) in h.num()[0][0].coeffs().iter().enumerate() {
                let mut alpha = vec![0u32; self.k];
                if i > 0 {
                    alpha[*j] = i as u32;
                }
                *terms.entry(alpha).or_insert(ZERO) += c * scale;
            }
        }
        for (alpha, c) in &self.corrections {
            *terms.entry(alpha.clone()).or_insert(ZERO) += *c;
        }
        terms.retain(|_, c| *c != ZERO);
        Some(terms)
    }

    pub fn eval_point(&self, z: &[C64]) -> Result<CMatrix> {
        if z.len() != self.k {
            return Err(Error::Shape(format!("expected {} coordinates, got {}", self.k, z.len())));
        }
        let (r, c) = self.shape();
        let mut acc = CMatrix::zeros(r, c);
        for (j, h) in &self.parts {
            acc = &acc + &h.eval(z[*j])?;
        }
        for (alpha, coef) in &self.corrections {
            let v: C64 = alpha.iter().zip(z).map(|(&a, &zi)| zi.powi(a as i32)).product();
            acc = acc.add_identity(coef * v);
        }
        Ok(acc)
    }

    /// `Σⱼ Hⱼ(Tⱼ)` as an `(n_out·d) × (n_in·d)` block matrix.
    pub fn eval_operators(&self, ts: &[CMatrix]) -> Result<CMatrix> {
        if ts.len() != self.k {
            return Err(Error::Shape(format!("expected {} operators, got {}", self.k, ts.len())));
        }
        let d = ts[0].rows();
        if ts.iter().any(|t| t.shape() != (d, d)) {
            return Err(Error::Shape("operators must be square of a common size".into()));
        }
        for i in 0..ts.len() {
            for j in (i + 1)..ts.len() {
                let comm = &(&ts[i] * &ts[j]) - &(&ts[j] * &ts[i]);
                let bound = COMMUTATION_TOL * spectral_norm(&ts[i])? * spectral_norm(&ts[j])?;
                if spectral_norm(&comm)? > bound {
                    return Err(Error::Precondition(format!("operators {i} and {j} do not commute")));
                }
            }
        }
        let (r, c) = self.shape();
        let mut acc = CMatrix::zeros(r * d, c * d);
        for (j, h) in &self.parts {
            acc = &acc + &super::poly::ratfun_eval_at_matrix(h, &ts[*j])?;
        }
        for (alpha, coef) in &self.corrections {
            let mut m = CMatrix::identity(d);
            for (t, &a) in ts.iter().zip(alpha) {
                m = &m * &t.powi(a)?;
            }
            acc = &acc + &m.scale(*coef);
        }
        Ok(acc)
    }
}

/// Point in `ℂ^k` or a tuple of commuting square matrices.
#[derive(Debug, Clone, Copy)]
pub enum LiftArgument<'a> {
    Point(&'a [C64]),
    Operators(&'a [CMatrix]),
}

pub fn eval_lifted(g: &LiftedFunction, arg: LiftArgument<'_>) -> Result<CMatrix> {
    match arg {
        LiftArgument::Point(z) => g.eval_point(z),
        LiftArgument::Operators(ts) => g.eval_operators(ts),
    }
}

/// `G` with `Hⱼ = Fⱼ ∘ γⱼ⁻¹`, so that `G(γ(z)) = F(z)` on the domain.
pub fn lift_to_polydisk(f: &MatRatFun1, spec: &DomainSpec) -> Result<LiftedFunction> {
    let parts = partial_fractions_grouped(f, spec)?;
    let mut lifted = Vec::with_capacity(parts.len());
    for (j, fj) in parts.into_iter().enumerate() {
        let ginv = spec.components[j].gamma().inverse();
        lifted.push((j, compose_mobius(&fj, &ginv)?));
    }
    LiftedFunction::new(spec.k(), lifted)
}

/// `γ(z) = (γ₁(z), …, γ_k(z))`.
pub fn gamma_point(spec: &DomainSpec, z: C64) -> Vec<C64> {
    spec.components.iter().map(|c| c.gamma().apply(z)).collect()
}

/// `(γ₁(T), …, γ_k(T))`; fails if some `P₊ⱼ(T)` is singular.
pub fn gamma_operators(spec: &DomainSpec, t: &CMatrix) -> Result<Vec<CMatrix>> {
    spec.components
        .iter()
        .map(|c| {
            let g = c.gamma();
            let num = t.scale(g.a).add_identity(g.b);
            let den = t.scale(g.c).add_identity(g.d);
            let lu = Lu::new(&den)?;
            lu.solve(&num)
        })
        .collect()
}
