//! Armoulds: scalar functions on forests, and tree expansions `Σ_F A^F D_F(a)`.

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coarmould::{Coarmould, HomogeneousOperator};
use crate::error::{Error, Result};
use crate::forest::{enumerate_forests, Forest, ForestFilter};
use crate::multi_index::MultiIndex;
use crate::scalar::Scalar;
use crate::series::Series;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    /// `g = R_q ∘ (id + a)`, spectrum `q`.
    Diffeo,
    /// `V = L_λ + a`, spectrum `λ`.
    Field,
}

impl FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diffeo" => Ok(Kind::Diffeo),
            "field" => Ok(Kind::Field),
            other => Err(Error::Parse(format!("unknown kind {other:?}"))),
        }
    }
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Diffeo => "diffeo",
            Kind::Field => "field",
        }
    }
}

/// Multipliers `q` of a diffeomorphism or eigenvalues `λ` of a vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<C> {
    kind: Kind,
    values: Vec<C>,
}

impl<C: Scalar> Spectrum<C> {
    pub fn new(kind: Kind, values: Vec<C>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty spectrum".into()));
        }
        if kind == Kind::Diffeo && values.iter().any(|q| q.is_negligible_divisor()) {
            return Err(Error::InvalidParameter("multipliers must be non-zero".into()));
        }
        Ok(Spectrum { kind, values })
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[C] {
        &self.values
    }

    pub fn to_c64(&self) -> Spectrum<Complex64> {
        Spectrum {
            kind: self.kind,
            values: self.values.iter().map(Scalar::to_c64).collect(),
        }
    }

    /// `q^n` (diffeo kind; negative exponents allowed).
    pub fn power(&self, n: &MultiIndex) -> Result<C> {
        let mut acc = C::one();
        for (q, &e) in self.values.iter().zip(n.entries()) {
            let p = q
                .pow_int(e as i64)
                .ok_or_else(|| Error::Resonance { at: n.clone() })?;
            acc = acc * p;
        }
        Ok(acc)
    }

    /// `λ·n` (field kind).
    pub fn dot(&self, n: &MultiIndex) -> C {
        self.values
            .iter()
            .zip(n.entries())
            .fold(C::zero(), |acc, (l, &e)| acc + l.clone() * C::from_i64(e as i64))
    }

    /// The small divisor attached to `n`: `q^n − 1` or `λ·n`. Fails on an
    /// exactly vanishing (float: sub-normal) divisor.
    pub fn divisor(&self, n: &MultiIndex) -> Result<C> {
        if n.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: n.dim(),
            });
        }
        let d = match self.kind {
            Kind::Diffeo => self.power(n)? - C::one(),
            Kind::Field => self.dot(n),
        };
        if d.is_negligible_divisor() {
            Err(Error::Resonance { at: n.clone() })
        } else {
            Ok(d)
        }
    }

    /// Non-resonance for every `n ∈ N` with `|n| ≤ cap`.
    pub fn check_nonresonant(&self, cap: u32) -> Result<()> {
        for n in MultiIndex::decorations_up_to(self.dim(), cap as i64) {
            self.divisor(&n)?;
        }
        Ok(())
    }

    /// Frequencies `λ`: the values themselves for a field, the principal
    /// branch `Log(q_j)/(2πi)` for a diffeomorphism.
    pub fn frequencies(&self) -> Vec<Complex64> {
        match self.kind {
            Kind::Field => self.values.iter().map(Scalar::to_c64).collect(),
            Kind::Diffeo => self
                .values
                .iter()
                .map(|q| q.to_c64().ln() / Complex64::new(0.0, 2.0 * PI))
                .collect(),
        }
    }
}

/// A scalar function on forests.
pub trait Armould<C>: Sync {
    fn value(&self, f: &Forest) -> Result<C>;
}

impl<C, F> Armould<C> for F
where
    F: Fn(&Forest) -> Result<C> + Sync,
{
    fn value(&self, f: &Forest) -> Result<C> {
        self(f)
    }
}

/// `S^F(q) = ∏_σ 1/(q^{σ̂} − 1)` or `S̃^F(λ) = ∏_σ 1/(λ·σ̂)` on `F⁺`, zero elsewhere.
#[derive(Clone, Debug)]
pub struct LinearizingArmould<C> {
    spectrum: Spectrum<C>,
}

impl<C: Scalar> LinearizingArmould<C> {
    pub fn new(spectrum: Spectrum<C>) -> Self {
        LinearizingArmould { spectrum }
    }

    pub fn spectrum(&self) -> &Spectrum<C> {
        &self.spectrum
    }
}

impl<C: Scalar> Armould<C> for LinearizingArmould<C> {
    fn value(&self, f: &Forest) -> Result<C> {
        if !f.is_fplus() {
            return Ok(C::zero());
        }
        let mut denom = C::one();
        for w in f.sigma_hats() {
            denom = denom * self.spectrum.divisor(&w)?;
        }
        C::one()
            .checked_div(&denom)
            .ok_or_else(|| Error::Resonance { at: f.weight(self.spectrum.dim()) })
    }
}

/// `S^F(q)`.
pub fn s_diffeo<C: Scalar>(f: &Forest, q: &Spectrum<C>) -> Result<C> {
    if q.kind() != Kind::Diffeo {
        return Err(Error::InvalidParameter("expected multipliers q".into()));
    }
    LinearizingArmould::new(q.clone()).value(f)
}

/// `S̃^F(λ)`.
pub fn s_field<C: Scalar>(f: &Forest, lambda: &Spectrum<C>) -> Result<C> {
    if lambda.kind() != Kind::Field {
        return Err(Error::InvalidParameter("expected eigenvalues λ".into()));
    }
    LinearizingArmould::new(lambda.clone()).value(f)
}

/// `K^F = A^{#F} B^{|‖F‖|}`.
#[derive(Clone, Debug)]
pub struct GeometricArmould<C> {
    a: C,
    b: C,
}

impl<C: Scalar> GeometricArmould<C> {
    pub fn new(a: C, b: C) -> Result<Self> {
        if b.is_zero() {
            return Err(Error::InvalidParameter("B must be non-zero".into()));
        }
        Ok(GeometricArmould { a, b })
    }
}

impl<C: Scalar> Armould<C> for GeometricArmould<C> {
    fn value(&self, f: &Forest) -> Result<C> {
        let a = self.a.pow_int(f.size() as i64).expect("non-negative power");
        let b = self
            .b
            .pow_int(f.abs_weight())
            .ok_or_else(|| Error::InvalidParameter("B must be non-zero".into()))?;
        Ok(a * b)
    }
}

/// `I^F = 1` iff `h(F) ≤ 1`.
pub fn elementary_i<C: Scalar>(f: &Forest) -> Result<C> {
    Ok(if f.height() <= 1 { C::one() } else { C::zero() })
}

/// `J^F = 1` iff `#F = 1`.
pub fn elementary_j<C: Scalar>(f: &Forest) -> Result<C> {
    Ok(if f.size() == 1 { C::one() } else { C::zero() })
}

/// The operator `Σ_F A^F D_F(a)` restricted to `|‖F‖| ≤ K`, which determines
/// its action on every coefficient of degree `≤ K`.
pub struct TreeExpansion<C> {
    dim: usize,
    cap: u32,
    terms: Vec<(Forest, C, Arc<HomogeneousOperator<C>>)>,
    forests_considered: usize,
}

impl<C: Scalar> TreeExpansion<C> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// `(F, A^F, D_F)` for every contributing forest, in enumeration order.
    pub fn terms(&self) -> &[(Forest, C, Arc<HomogeneousOperator<C>>)] {
        &self.terms
    }

    pub fn forests_considered(&self) -> usize {
        self.forests_considered
    }

    pub fn apply(&self, phi: &Series<C>) -> Result<Series<C>> {
        if phi.cap() > self.cap {
            return Err(Error::CapMismatch {
                left: self.cap,
                right: phi.cap(),
            });
        }
        let mut out = Series::zero(phi.dim(), phi.cap());
        for (_, coeff, op) in &self.terms {
            out = out.add(&op.apply(phi)?.scale(coeff))?;
        }
        Ok(out)
    }
}

/// Materializes `Σ_F A^F D_F(a)` over forests with decorations in the
/// support of `a` and `|‖F‖| ≤ cap`. Forests with a zero operator or a zero
/// armould value are dropped.
pub fn tree_expand<C: Scalar>(
    armould: &dyn Armould<C>,
    coarmould: &Coarmould<C>,
    cap: u32,
) -> Result<TreeExpansion<C>> {
    let dim = coarmould.dim();
    let support = coarmould.nonlinear_part().support();
    let forests = if support.is_empty() {
        vec![Forest::empty()]
    } else {
        enumerate_forests(&support, cap, ForestFilter::All)?
    };
    let considered = forests.len();
    let evaluated: Vec<Option<(Forest, C, Arc<HomogeneousOperator<C>>)>> = forests
        .into_par_iter()
        .map(|f| -> Result<_> {
            let op = coarmould.recursive(&f)?;
            if op.is_zero() {
                return Ok(None);
            }
            let v = armould.value(&f)?;
            if v.is_zero() {
                return Ok(None);
            }
            Ok(Some((f, v, op)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TreeExpansion {
        dim,
        cap,
        terms: evaluated.into_iter().flatten().collect(),
        forests_considered: considered,
    })
}
