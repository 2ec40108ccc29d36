//! Truncated multivariate formal power series.
//!
//! A [`Series`] stores the coefficients of total degree `≤ cap` of a formal
//! series in `ν` variables. Every public operation is exact on all
//! coefficients of degree `≤ cap` provided the inputs are exact through that
//! degree and every substituted series has no constant term. The one
//! exception is [`SeriesTuple::derive`] with a constant-term vector field,
//! which reports its exactness degree in [`Derived::exact_through`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Series<C> {
    dim: usize,
    cap: u32,
    terms: BTreeMap<MultiIndex, C>,
}

fn accumulate<C: Scalar>(map: &mut BTreeMap<MultiIndex, C>, m: MultiIndex, c: C) {
    match map.get_mut(&m) {
        Some(slot) => *slot = slot.clone() + c,
        None => {
            map.insert(m, c);
        }
    }
}

fn strip_zeros<C: Scalar>(map: &mut BTreeMap<MultiIndex, C>) {
    map.retain(|_, c| !c.is_zero());
}

impl<C: Scalar> Series<C> {
    pub fn zero(dim: usize, cap: u32) -> Self {
        assert!(dim >= 1, "dimension must be ≥ 1");
        Series {
            dim,
            cap,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a series from `(exponent, coefficient)` pairs. Repeated exponents
    /// are summed and terms above the cap are dropped.
    pub fn from_terms<I>(dim: usize, cap: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, C)>,
    {
        let mut out = Series::zero(dim, cap);
        for (m, c) in terms {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
            if !m.is_nonneg() {
                return Err(Error::InvalidExponent(m));
            }
            if m.total() <= cap as i64 {
                accumulate(&mut out.terms, m, c);
            }
        }
        strip_zeros(&mut out.terms);
        Ok(out)
    }

    pub fn monomial(dim: usize, cap: u32, m: MultiIndex, c: C) -> Result<Self> {
        Series::from_terms(dim, cap, [(m, c)])
    }

    pub fn constant(dim: usize, cap: u32, c: C) -> Self {
        Series::from_terms(dim, cap, [(MultiIndex::zero(dim), c)]).expect("valid constant")
    }

    /// The coordinate function `z_i` (0-based `i`).
    pub fn variable(dim: usize, cap: u32, i: usize) -> Self {
        Series::from_terms(dim, cap, [(MultiIndex::unit(dim, i), C::one())])
            .expect("valid coordinate")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn coeff(&self, m: &MultiIndex) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// Non-zero terms in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total order: minimal `|m|` over non-zero terms, `None` for the zero series.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.total() as u32).min()
    }

    /// Homogeneous part of degree exactly `d`.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        Series {
            dim: self.dim,
            cap: self.cap,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.total() == d as i64)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Same coefficients, new cap (dropping terms above it).
    pub fn with_cap(&self, cap: u32) -> Self {
        Series {
            dim: self.dim,
            cap,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.total() <= cap as i64)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn map<D: Scalar>(&self, f: impl Fn(&C) -> D) -> Series<D> {
        let mut terms: BTreeMap<MultiIndex, D> = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), f(c)))
            .collect();
        strip_zeros(&mut terms);
        Series {
            dim: self.dim,
            cap: self.cap,
            terms,
        }
    }

    pub(crate) fn check_compatible(&self, other: &Series<C>) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.cap != other.cap {
            return Err(Error::CapMismatch {
                left: self.cap,
                right: other.cap,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Series<C>) -> Result<Self> {
        self.check_compatible(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            accumulate(&mut terms, m.clone(), c.clone());
        }
        strip_zeros(&mut terms);
        Ok(Series { terms, ..self.clone_shape() })
    }

    pub fn sub(&self, other: &Series<C>) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c.clone())
    }

    pub fn scale(&self, s: &C) -> Self {
        self.map(|c| c.clone() * s.clone())
    }

    fn clone_shape(&self) -> Self {
        Series::zero(self.dim, self.cap)
    }

    /// Product truncated to total degree `≤ cap`.
    pub fn mul(&self, other: &Series<C>) -> Result<Self> {
        self.check_compatible(other)?;
        let cap = self.cap as i64;
        let mut terms = BTreeMap::new();
        // Bucket the right factor by degree so that truncation prunes early.
        let mut by_degree: Vec<Vec<(&MultiIndex, &C)>> = vec![Vec::new(); self.cap as usize + 1];
        for (m, c) in &other.terms {
            by_degree[m.total() as usize].push((m, c));
        }
        for (m1, c1) in &self.terms {
            let room = cap - m1.total();
            for bucket in by_degree.iter().take(room as usize + 1) {
                for (m2, c2) in bucket {
                    accumulate(&mut terms, m1 + m2, c1.clone() * (*c2).clone());
                }
            }
        }
        strip_zeros(&mut terms);
        Ok(Series { terms, ..self.clone_shape() })
    }

    /// `∂φ/∂z_i` (0-based `i`); exact through degree `cap - 1`.
    pub fn partial(&self, i: usize) -> Self {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let k = m.get(i);
            if k > 0 {
                let mut e = m.entries().to_vec();
                e[i] -= 1;
                terms.insert(MultiIndex::new(e), c.clone() * C::from_i64(k as i64));
            }
        }
        Series { terms, ..self.clone_shape() }
    }

    /// The composition `φ ∘ v`, truncated at the cap.
    pub fn compose(&self, v: &SeriesTuple<C>) -> Result<Self> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.dim(),
            });
        }
        for (i, vi) in v.components().iter().enumerate() {
            self.check_compatible(vi)?;
            if vi.order() == Some(0) {
                return Err(Error::ConstantTerm { component: i });
            }
        }
        let mut powers = PowerCache::new(v);
        let mut out = Series::zero(self.dim, self.cap);
        for (m, c) in &self.terms {
            let mut prod = Series::constant(self.dim, self.cap, c.clone());
            for (j, &k) in m.entries().iter().enumerate() {
                if k > 0 {
                    prod = prod.mul(powers.get(j, k as u32))?;
                }
                if prod.is_empty() {
                    break;
                }
            }
            for (mm, cc) in prod.terms {
                accumulate(&mut out.terms, mm, cc);
            }
        }
        strip_zeros(&mut out.terms);
        Ok(out)
    }

    /// `true` iff `|φ_n| ≤ ψ_n` for every `n` (here `self` is `ψ`).
    pub fn majorizes(&self, phi: &Series<C>) -> Result<bool> {
        self.check_compatible(phi)?;
        for (m, c) in &self.terms {
            if !c.is_nonneg_real() {
                return Err(Error::NegativeMajorant(m.clone()));
            }
        }
        Ok(phi
            .terms
            .iter()
            .all(|(m, c)| modulus_le(c, &self.coeff(m))))
    }

    /// Largest coefficient modulus.
    pub fn max_modulus(&self) -> f64 {
        self.terms.values().map(|c| c.modulus()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(SeriesJson {
            dimension: self.dim,
            cap: self.cap,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| TermJson {
                    exponent: m.entries().to_vec(),
                    re: c.re_json(),
                    im: c.im_json(),
                })
                .collect(),
        })
        .expect("series serialization")
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let raw: SeriesJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in raw.terms {
            if t.exponent.is_empty() {
                return Err(Error::Parse("empty exponent".into()));
            }
            let m = MultiIndex::new(t.exponent);
            if m.total() > raw.cap as i64 {
                return Err(Error::InvalidExponent(m));
            }
            terms.push((m, C::from_json_parts(&t.re, &t.im)?));
        }
        Series::from_terms(raw.dimension, raw.cap, terms)
    }
}

/// `|c| ≤ bound` for a non-negative real `bound`, decided without rounding in
/// exact mode.
fn modulus_le<C: Scalar>(c: &C, bound: &C) -> bool {
    if C::EXACT {
        let diff = match c.abs_value() {
            Some(abs) => bound.clone() - abs,
            None => bound.clone() * bound.clone() - c.squared_norm(),
        };
        diff.is_nonneg_real()
    } else {
        c.modulus() <= bound.to_c64().re
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    dimension: usize,
    cap: u32,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exponent: Vec<i32>,
    re: Value,
    im: Value,
}

/// Powers `v_j^k`, computed on demand.
struct PowerCache<'a, C> {
    v: &'a SeriesTuple<C>,
    powers: Vec<Vec<Series<C>>>,
}

impl<'a, C: Scalar> PowerCache<'a, C> {
    fn new(v: &'a SeriesTuple<C>) -> Self {
        let powers = v
            .components()
            .iter()
            .map(|s| vec![Series::constant(s.dim, s.cap, C::one())])
            .collect();
        PowerCache { v, powers }
    }

    fn get(&mut self, j: usize, k: u32) -> &Series<C> {
        while self.powers[j].len() <= k as usize {
            let next = self.powers[j]
                .last()
                .unwrap()
                .mul(&self.v.components()[j])
                .expect("compatible");
            self.powers[j].push(next);
        }
        &self.powers[j][k as usize]
    }
}

/// A ν-tuple of series sharing dimension and cap: diffeomorphisms, vector
/// fields, nonlinear parts.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTuple<C> {
    components: Vec<Series<C>>,
}

/// Result of [`SeriesTuple::derive`].
#[derive(Clone, Debug, PartialEq)]
pub struct Derived<C> {
    pub series: Series<C>,
    /// Every coefficient of degree `≤ exact_through` is exact.
    pub exact_through: u32,
}

impl<C: Scalar> SeriesTuple<C> {
    pub fn new(components: Vec<Series<C>>) -> Result<Self> {
        let dim = components.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("empty series tuple".into()));
        }
        let cap = components[0].cap;
        for s in &components {
            if s.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim,
                });
            }
            if s.cap != cap {
                return Err(Error::CapMismatch {
                    left: cap,
                    right: s.cap,
                });
            }
        }
        Ok(SeriesTuple { components })
    }

    pub fn identity(dim: usize, cap: u32) -> Self {
        SeriesTuple {
            components: (0..dim).map(|i| Series::variable(dim, cap, i)).collect(),
        }
    }

    pub fn zero(dim: usize, cap: u32) -> Self {
        SeriesTuple {
            components: (0..dim).map(|_| Series::zero(dim, cap)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn cap(&self) -> u32 {
        self.components[0].cap
    }

    pub fn components(&self) -> &[Series<C>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Series<C> {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<Series<C>> {
        self.components
    }

    pub fn map<D: Scalar>(&self, f: impl Fn(&C) -> D + Copy) -> SeriesTuple<D> {
        SeriesTuple {
            components: self.components.iter().map(|s| s.map(f)).collect(),
        }
    }

    pub fn with_cap(&self, cap: u32) -> Self {
        SeriesTuple {
            components: self.components.iter().map(|s| s.with_cap(cap)).collect(),
        }
    }

    pub fn add(&self, other: &SeriesTuple<C>) -> Result<Self> {
        self.zip_with(other, Series::add)
    }

    pub fn sub(&self, other: &SeriesTuple<C>) -> Result<Self> {
        self.zip_with(other, Series::sub)
    }

    fn zip_with(
        &self,
        other: &SeriesTuple<C>,
        f: impl Fn(&Series<C>, &Series<C>) -> Result<Series<C>>,
    ) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesTuple { components })
    }

    /// Membership in the space of nonlinear parts: every component has order
    /// `≥ 2` (exponents of non-zero terms then automatically satisfy
    /// `n + e_i ∈ N^ν` for `n = m − e_i`).
    pub fn is_nonlinear_part(&self) -> bool {
        self.components
            .iter()
            .all(|s| s.order().map_or(true, |o| o >= 2))
    }

    /// Component `i` equals `z_i` plus a series of order `≥ 2`.
    pub fn is_tangent_to_identity(&self) -> bool {
        let dim = self.dim();
        self.components.iter().enumerate().all(|(i, s)| {
            let rest = s
                .sub(&Series::variable(dim, s.cap, i))
                .expect("compatible shapes");
            rest.order().map_or(true, |o| o >= 2)
        })
    }

    /// `self ∘ v`, componentwise.
    pub fn compose(&self, v: &SeriesTuple<C>) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|s| s.compose(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesTuple { components })
    }

    /// The derivation `X_v φ = Σ v_i ∂φ/∂z_i` with `v = self`.
    ///
    /// The output is capped at `K`; it is exact through `K` when every `v_i`
    /// has order `≥ 1`, and through `K − 1` otherwise.
    pub fn derive(&self, phi: &Series<C>) -> Result<Derived<C>> {
        if self.dim() != phi.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: phi.dim,
            });
        }
        let mut out = Series::zero(phi.dim, phi.cap);
        let mut min_order = u32::MAX;
        for (i, vi) in self.components.iter().enumerate() {
            vi.check_compatible(phi)?;
            if let Some(o) = vi.order() {
                min_order = min_order.min(o);
            }
            out = out.add(&vi.mul(&phi.partial(i))?)?;
        }
        let exact_through = if min_order >= 1 {
            phi.cap
        } else {
            phi.cap.saturating_sub(1)
        };
        Ok(Derived {
            series: out,
            exact_through,
        })
    }

    /// Composition inverse of a tangent-to-identity tuple, exact through the cap.
    pub fn invert_tangent_identity(&self) -> Result<Self> {
        if !self.is_tangent_to_identity() {
            return Err(Error::NotTangentToIdentity);
        }
        let dim = self.dim();
        let cap = self.cap();
        let id = SeriesTuple::identity(dim, cap);
        let nonlinear = self.sub(&id)?;
        // w = id − a∘w gains one exact degree per sweep.
        let mut w = id.clone();
        for _ in 1..cap.max(1) {
            let next = id.sub(&nonlinear.compose(&w)?)?;
            if next == w {
                break;
            }
            w = next;
        }
        Ok(w)
    }

    /// Largest coefficient modulus over all components.
    pub fn max_modulus(&self) -> f64 {
        self.components
            .iter()
            .map(Series::max_modulus)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.components.iter().map(Series::to_json).collect())
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Parse("series tuple must be a JSON array".into()))?;
        SeriesTuple::new(arr.iter().map(Series::from_json).collect::<Result<Vec<_>>>()?)
    }
}
