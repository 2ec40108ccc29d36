//! Linearizing transformations.
//!
//! For `g = R_q ∘ (id + a)` (or `V = L_λ + a`) the linearization `h` solves
//! `R_q ∘ (id + a) ∘ h = h ∘ R_q` (resp. `V ∘ h = Dh · L_λ`). It is computed
//! two independent ways: as the tree sum `h_i = z_i + Σ_T S^T D_T z_i`, and
//! by the classical degree-by-degree recursion.

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::armould::{Armould, Kind, LinearizingArmould, Spectrum};
use crate::coarmould::Coarmould;
use crate::error::{Error, Result};
use crate::forest::{enumerate_trees, ForestFilter};
use crate::multi_index::MultiIndex;
use crate::scalar::Scalar;
use crate::series::{Series, SeriesTuple};

#[derive(Clone, Debug)]
pub struct ProblemSpec<C> {
    spectrum: Spectrum<C>,
    a: SeriesTuple<C>,
}

impl<C: Scalar> ProblemSpec<C> {
    /// Validates shapes, the nonlinear-part condition and non-resonance for
    /// every `n ∈ N` with `|n| ≤ K − 1` (the divisors met through degree `K`).
    pub fn new(spectrum: Spectrum<C>, a: SeriesTuple<C>) -> Result<Self> {
        if spectrum.dim() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: spectrum.dim(),
            });
        }
        if !a.is_nonlinear_part() {
            return Err(Error::NotNonlinearPart(
                "every component must have order ≥ 2".into(),
            ));
        }
        spectrum.check_nonresonant(a.cap().saturating_sub(1))?;
        Ok(ProblemSpec { spectrum, a })
    }

    pub fn kind(&self) -> Kind {
        self.spectrum.kind()
    }

    pub fn spectrum(&self) -> &Spectrum<C> {
        &self.spectrum
    }

    pub fn nonlinear(&self) -> &SeriesTuple<C> {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn cap(&self) -> u32 {
        self.a.cap()
    }

    pub fn to_c64(&self) -> ProblemSpec<Complex64> {
        ProblemSpec {
            spectrum: self.spectrum.to_c64(),
            a: self.a.map(Scalar::to_c64),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Tree,
    Recursive,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Tree => "tree",
            Method::Recursive => "recursive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    /// Trees enumerated (tree method) or coefficients solved (recursion).
    pub items_considered: usize,
    /// Trees with a non-zero contribution.
    pub contributing_trees: usize,
    pub max_armould_modulus: f64,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct LinearizationResult<C> {
    pub h: SeriesTuple<C>,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

impl<C: Scalar> LinearizationResult<C> {
    pub fn to_json(&self) -> Value {
        json!({
            "method": self.method.as_str(),
            "h": self.h.to_json(),
            "diagnostics": {
                "items_considered": self.diagnostics.items_considered,
                "contributing_trees": self.diagnostics.contributing_trees,
                "max_armould_modulus": self.diagnostics.max_armould_modulus,
                "residual": self.diagnostics.residual,
            }
        })
    }
}

/// `h_i = z_i + Σ_T S^T β_{i,T} z^{‖T‖ + e_i}` over trees with decorations in
/// the support of `a`, `|‖T‖| ≤ K − 1`, pruned by the necessary conditions
/// for non-vanishing.
pub fn linearize_tree<C: Scalar>(spec: &ProblemSpec<C>) -> Result<LinearizationResult<C>> {
    let dim = spec.dim();
    let cap = spec.cap();
    let coarmould = Coarmould::from_series(&spec.a)?;
    let support = coarmould.nonlinear_part().support();
    let trees = if support.is_empty() || cap < 2 {
        Vec::new()
    } else {
        enumerate_trees(&support, cap - 1, ForestFilter::NvCandidates)?
    };
    let armould = LinearizingArmould::new(spec.spectrum.clone());

    let contributions = trees
        .par_iter()
        .map(|t| -> Result<Option<(MultiIndex, C, Vec<C>)>> {
            let beta = coarmould.tree_coefficients(t)?;
            if beta.iter().all(Scalar::is_zero) {
                return Ok(None);
            }
            let s = armould.value(&t.clone().into())?;
            Ok(Some((t.weight(), s, beta)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut terms: Vec<Vec<(MultiIndex, C)>> = (0..dim)
        .map(|i| vec![(MultiIndex::unit(dim, i), C::one())])
        .collect();
    let mut contributing = 0;
    let mut max_s: f64 = 0.0;
    for (w, s, beta) in contributions.into_iter().flatten() {
        contributing += 1;
        max_s = max_s.max(s.modulus());
        for (i, b) in beta.into_iter().enumerate() {
            if !b.is_zero() {
                terms[i].push((w.plus_unit(i), s.clone() * b));
            }
        }
    }
    let h = SeriesTuple::new(
        terms
            .into_iter()
            .map(|t| Series::from_terms(dim, cap, t))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let residual = conjugacy_residual(spec, &h)?;
    Ok(LinearizationResult {
        h,
        method: Method::Tree,
        diagnostics: Diagnostics {
            items_considered: trees.len(),
            contributing_trees: contributing,
            max_armould_modulus: max_s,
            residual,
        },
    })
}

/// Degree-by-degree solution of the conjugacy equation:
/// `(q^m − q_i) c = q_i [a_i ∘ h]_m` or `(λ·m − λ_i) c = [a_i ∘ h]_m`.
pub fn linearize_recursive<C: Scalar>(spec: &ProblemSpec<C>) -> Result<LinearizationResult<C>> {
    let dim = spec.dim();
    let cap = spec.cap();
    let mut terms: Vec<Vec<(MultiIndex, C)>> = (0..dim)
        .map(|i| vec![(MultiIndex::unit(dim, i), C::one())])
        .collect();
    let mut solved = 0;
    for d in 2..=cap {
        // h is exact through degree d − 1, which fixes [a_i ∘ h] in degree d.
        let h = SeriesTuple::new(
            terms
                .iter()
                .map(|t| Series::from_terms(dim, d, t.clone()))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let a = spec.a.with_cap(d);
        for i in 0..dim {
            let comp = a.component(i).compose(&h)?.homogeneous_part(d);
            for (m, rhs) in comp.terms() {
                let n = m - &MultiIndex::unit(dim, i);
                let (num, den) = match spec.kind() {
                    Kind::Diffeo => {
                        let qi = spec.spectrum.values()[i].clone();
                        let qm = spec.spectrum.power(m)?;
                        (qi.clone() * rhs.clone(), qm - qi)
                    }
                    Kind::Field => {
                        let li = spec.spectrum.values()[i].clone();
                        (rhs.clone(), spec.spectrum.dot(m) - li)
                    }
                };
                let c = num.checked_div(&den).ok_or(Error::Resonance { at: n })?;
                solved += 1;
                terms[i].push((m.clone(), c));
            }
        }
    }
    let h = SeriesTuple::new(
        terms
            .into_iter()
            .map(|t| Series::from_terms(dim, cap, t))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let residual = conjugacy_residual(spec, &h)?;
    Ok(LinearizationResult {
        h,
        method: Method::Recursive,
        diagnostics: Diagnostics {
            items_considered: solved,
            contributing_trees: 0,
            max_armould_modulus: 0.0,
            residual,
        },
    })
}

/// Componentwise defect of the conjugacy equation, through degree `K`:
/// `q_i (h_i + a_i∘h) − h_i(qz)` or `λ_i h_i + a_i∘h − L_λ h_i`.
pub fn residual_series<C: Scalar>(
    spec: &ProblemSpec<C>,
    h: &SeriesTuple<C>,
) -> Result<SeriesTuple<C>> {
    if h.dim() != spec.dim() || h.cap() != spec.cap() {
        return Err(Error::InvalidParameter(
            "h must share the dimension and cap of the problem".into(),
        ));
    }
    if !h.is_tangent_to_identity() {
        return Err(Error::NotTangentToIdentity);
    }
    let a_of_h = spec.a.compose(h)?;
    let sp = &spec.spectrum;
    let mut out = Vec::with_capacity(spec.dim());
    for i in 0..spec.dim() {
        let hi = h.component(i);
        let ai = a_of_h.component(i);
        let weighted = reweight(hi, |m| match sp.kind() {
            Kind::Diffeo => sp.power(m),
            Kind::Field => Ok(sp.dot(m)),
        })?;
        let own = sp.values()[i].clone();
        let r = match sp.kind() {
            Kind::Diffeo => hi.add(ai)?.scale(&own).sub(&weighted)?,
            Kind::Field => hi.scale(&own).add(ai)?.sub(&weighted)?,
        };
        out.push(r);
    }
    SeriesTuple::new(out)
}

fn reweight<C: Scalar>(
    phi: &Series<C>,
    f: impl Fn(&MultiIndex) -> Result<C>,
) -> Result<Series<C>> {
    let terms = phi
        .terms()
        .map(|(m, c)| Ok((m.clone(), c.clone() * f(m)?)))
        .collect::<Result<Vec<_>>>()?;
    Series::from_terms(phi.dim(), phi.cap(), terms)
}

/// Largest coefficient modulus of [`residual_series`].
pub fn conjugacy_residual<C: Scalar>(spec: &ProblemSpec<C>, h: &SeriesTuple<C>) -> Result<f64> {
    Ok(residual_series(spec, h)?.max_modulus())
}

/// `M = (1/b) max_i Σ_m |a_{i,m}| b^{|m|}`: an upper bound for `|a_i|` on the
/// closed polydisc of radius `b`, divided by `b`.
pub fn majorant_constant<C: Scalar>(a: &SeriesTuple<C>, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::InvalidParameter(format!("radius b = {b} must be > 0")));
    }
    let mut best: f64 = 0.0;
    for s in a.components() {
        let sum: f64 = s
            .terms()
            .map(|(m, c)| c.modulus() * b.powi(m.total() as i32))
            .sum();
        best = best.max(sum);
    }
    Ok(best / b)
}

#[derive(Clone, Debug)]
pub struct MajorantBound {
    pub m: f64,
    pub b: f64,
    pub big_b: f64,
    /// Inverse of `g_i(z) = z_i − (1/B) 𝒜(Bz)`, `𝒜 = Σ_{k≥2} M Z^k / b^{k−1}`.
    pub w: SeriesTuple<Complex64>,
}

/// The majorant `w` of the linearization for nonlinear parts bounded by `M`
/// on the polydisc of radius `b`, given `|S^T| ≤ B^{|‖T‖|}`.
pub fn majorant_bound(dim: usize, cap: u32, m: f64, b: f64, big_b: f64) -> Result<MajorantBound> {
    if !(big_b >= 1.0) {
        return Err(Error::InvalidParameter(format!("B = {big_b} must be ≥ 1")));
    }
    if !(b > 0.0) || !(m >= 0.0) {
        return Err(Error::InvalidParameter("need b > 0 and M ≥ 0".into()));
    }
    let coeffs: Vec<f64> = (0..=cap)
        .map(|k| {
            if k < 2 {
                0.0
            } else {
                m * (big_b / b).powi(k as i32 - 1)
            }
        })
        .collect();
    let tail = power_series_of_sum(&coeffs, dim, cap);
    let g = SeriesTuple::new(
        (0..dim)
            .map(|i| Series::variable(dim, cap, i).sub(&tail))
            .collect::<Result<Vec<_>>>()?,
    )?;
    Ok(MajorantBound {
        m,
        b,
        big_b,
        w: g.invert_tangent_identity()?,
    })
}

/// `Σ_k c_k Z^k` with `Z = z_1 + ⋯ + z_ν`.
fn power_series_of_sum(coeffs: &[f64], dim: usize, cap: u32) -> Series<Complex64> {
    let z_sum = (0..dim).fold(Series::zero(dim, cap), |acc, i| {
        acc.add(&Series::variable(dim, cap, i)).expect("same shape")
    });
    let mut power = Series::constant(dim, cap, Complex64::new(1.0, 0.0));
    let mut out = Series::zero(dim, cap);
    for (k, &c) in coeffs.iter().enumerate().take(cap as usize + 1) {
        if k > 0 {
            power = power.mul(&z_sum).expect("same shape");
        }
        if c != 0.0 {
            out = out.add(&power.scale(&Complex64::new(c, 0.0))).expect("same shape");
        }
    }
    out
}

/// Taylor coefficients of `Ψ_{α,1}(z) = (1 + z − √(1 − 2(1+2α)z + z²)) / (2(1+α))`.
pub fn psi_one_dimensional(alpha: f64, cap: u32) -> Vec<f64> {
    let n = cap as usize + 1;
    let mut p = vec![0.0; n.max(3)];
    p[0] = 1.0;
    p[1] = -2.0 * (1.0 + 2.0 * alpha);
    p[2] = 1.0;
    // s² = p with s_0 = 1.
    let mut s = vec![0.0; n];
    s[0] = 1.0;
    for k in 1..n {
        let cross: f64 = (1..k).map(|j| s[j] * s[k - j]).sum();
        s[k] = (p[k] - cross) / 2.0;
    }
    let mut out = vec![0.0; n];
    for k in 0..n {
        let lin = match k {
            0 | 1 => 1.0,
            _ => 0.0,
        };
        out[k] = (lin - s[k]) / (2.0 * (1.0 + alpha));
    }
    out
}

/// `Ψ_{α,ν,i}(z) = z_i + (1/ν)(Ψ_{αν,1}(Z) − Z)`, the inverse of
/// `φ_{α,ν,i}(z) = z_i − α Σ_{k≥2} Z^k`.
pub fn psi_closed_form(alpha: f64, dim: usize, cap: u32) -> Result<SeriesTuple<Complex64>> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("α = {alpha} must be > 0")));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be ≥ 1".into()));
    }
    let mut c = psi_one_dimensional(alpha * dim as f64, cap);
    if c.len() > 1 {
        c[1] -= 1.0;
    }
    for x in &mut c {
        *x /= dim as f64;
    }
    let shift = power_series_of_sum(&c, dim, cap);
    SeriesTuple::new(
        (0..dim)
            .map(|i| Series::variable(dim, cap, i).add(&shift))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// `φ_{α,ν,i}(z) = z_i − α Σ_{k=2}^{K} Z^k`.
pub fn phi_alpha(alpha: f64, dim: usize, cap: u32) -> Result<SeriesTuple<Complex64>> {
    let coeffs: Vec<f64> = (0..=cap).map(|k| if k < 2 { 0.0 } else { alpha }).collect();
    let tail = power_series_of_sum(&coeffs, dim, cap);
    SeriesTuple::new(
        (0..dim)
            .map(|i| Series::variable(dim, cap, i).sub(&tail))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// `(r_m f)(z) = f(mz)/m`: multiplies the coefficient of `z^n` by `m^{|n|−1}`.
pub fn rescale<C: Scalar>(m: &C, f: &SeriesTuple<C>) -> Result<SeriesTuple<C>> {
    if !m.is_nonneg_real() || m.is_zero() {
        return Err(Error::InvalidParameter("rescaling factor must be > 0".into()));
    }
    if !f.is_tangent_to_identity() {
        return Err(Error::NotTangentToIdentity);
    }
    let comps = f
        .components()
        .iter()
        .map(|s| {
            reweight(s, |n| {
                m.pow_int(n.total() - 1)
                    .ok_or_else(|| Error::InvalidParameter("zero rescaling".into()))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SeriesTuple::new(comps)
}
