//! The coarmould `F ↦ D_F(a)`.
//!
//! `D_F(a)` is a homogeneous differential operator of order `deg F`:
//! `z^{‖F‖} Σ_p c_p δ^p`, where `δ^p z^m = Γ(p, m) z^m` and
//! `Γ(p, m) = ∏_j m_j!/(m_j − p_j)!`. It is stored as a table of
//! derivative profiles `p` (with `|p| = deg F`) and coefficients.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::forest::{enumerate_forests_with, nv_candidate, Forest, Tree};
use crate::multi_index::MultiIndex;
use crate::scalar::{relative_gap, Scalar};
use crate::series::{Series, SeriesTuple};

/// `Γ(p, m)`: the eigenvalue of `δ^p` on `z^m`.
pub fn gamma_factor<C: Scalar>(profile: &MultiIndex, m: &MultiIndex) -> C {
    let mut acc = C::one();
    for (&p, &mj) in profile.entries().iter().zip(m.entries()) {
        if p > mj {
            return C::zero();
        }
        for k in 0..p {
            acc = acc * C::from_i64((mj - k) as i64);
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousOperator<C> {
    dim: usize,
    weight: MultiIndex,
    degree: u32,
    terms: BTreeMap<MultiIndex, C>,
}

impl<C: Scalar> HomogeneousOperator<C> {
    pub fn new(
        weight: MultiIndex,
        degree: u32,
        terms: impl IntoIterator<Item = (MultiIndex, C)>,
    ) -> Result<Self> {
        let dim = weight.dim();
        let mut map: BTreeMap<MultiIndex, C> = BTreeMap::new();
        for (p, c) in terms {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            if !p.is_nonneg() || p.total() != degree as i64 {
                return Err(Error::InvalidProfile { profile: p, degree });
            }
            let slot = map.entry(p).or_insert_with(C::zero);
            *slot = slot.clone() + c;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(HomogeneousOperator {
            dim,
            weight,
            degree,
            terms: map,
        })
    }

    pub fn identity(dim: usize) -> Self {
        HomogeneousOperator::new(MultiIndex::zero(dim), 0, [(MultiIndex::zero(dim), C::one())])
            .expect("identity")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight(&self) -> &MultiIndex {
        &self.weight
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, profile: &MultiIndex) -> C {
        self.terms.get(profile).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Eigenvalue-like scalar with `op z^m = λ z^{m + weight}`.
    pub fn monomial_factor(&self, m: &MultiIndex) -> C {
        self.terms
            .iter()
            .fold(C::zero(), |acc, (p, c)| acc + c.clone() * gamma_factor::<C>(p, m))
    }

    /// Action on a series, truncated at its cap.
    pub fn apply(&self, phi: &Series<C>) -> Result<Series<C>> {
        if phi.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: phi.dim(),
            });
        }
        let mut out = Vec::new();
        for (m, c) in phi.terms() {
            let target = m + &self.weight;
            if target.total() > phi.cap() as i64 {
                continue;
            }
            let f = self.monomial_factor(m);
            if f.is_zero() {
                continue;
            }
            if !target.is_nonneg() {
                return Err(Error::InvalidExponent(target));
            }
            out.push((target, f * c.clone()));
        }
        Series::from_terms(self.dim, phi.cap(), out)
    }

    pub fn to_json(&self) -> Value {
        #[derive(Serialize)]
        struct Term {
            profile: Vec<i32>,
            re: Value,
            im: Value,
        }
        #[derive(Serialize)]
        struct Dump {
            weight: Vec<i32>,
            degree: u32,
            terms: Vec<Term>,
        }
        serde_json::to_value(Dump {
            weight: self.weight.entries().to_vec(),
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(p, c)| Term {
                    profile: p.entries().to_vec(),
                    re: c.re_json(),
                    im: c.im_json(),
                })
                .collect(),
        })
        .expect("operator serialization")
    }
}

/// The coefficients `a_{i,n}` of a nonlinear part, `a_i = Σ_n a_{i,n} z^{n+e_i}`.
#[derive(Clone, Debug)]
pub struct NonlinearPart<C> {
    dim: usize,
    coeffs: BTreeMap<(usize, MultiIndex), C>,
    generic: bool,
}

impl<C: Scalar> NonlinearPart<C> {
    pub fn from_series(a: &SeriesTuple<C>) -> Result<Self> {
        if !a.is_nonlinear_part() {
            return Err(Error::NotNonlinearPart(
                "every component must have order ≥ 2".into(),
            ));
        }
        let dim = a.dim();
        let mut coeffs = BTreeMap::new();
        for (i, s) in a.components().iter().enumerate() {
            for (m, c) in s.terms() {
                let n = m - &MultiIndex::unit(dim, i);
                coeffs.insert((i, n), c.clone());
            }
        }
        Ok(NonlinearPart {
            dim,
            coeffs,
            generic: false,
        })
    }

    /// `a_{i,n} = 1` for every admissible pair (`n ∈ N`, `n + e_i ≥ 0`).
    pub fn generic(dim: usize) -> Self {
        NonlinearPart {
            dim,
            coeffs: BTreeMap::new(),
            generic: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeff(&self, i: usize, n: &MultiIndex) -> C {
        if self.generic {
            let admissible = n.is_decoration() && n.plus_unit(i).is_nonneg();
            return if admissible { C::one() } else { C::zero() };
        }
        self.coeffs
            .get(&(i, n.clone()))
            .cloned()
            .unwrap_or_else(C::zero)
    }

    /// Decorations `n` with some `a_{i,n} ≠ 0`, sorted.
    pub fn support(&self) -> Vec<MultiIndex> {
        let mut out: Vec<MultiIndex> = self.coeffs.keys().map(|(_, n)| n.clone()).collect();
        out.sort();
        out.dedup();
        out
    }

    /// `max_i Σ_m |a_{i,m}| b^{|m|}`.
    pub fn weighted_l1(&self, b: f64) -> f64 {
        let mut per = vec![0.0; self.dim];
        for ((i, n), c) in &self.coeffs {
            per[*i] += c.modulus() * b.powi((n.total() + 1) as i32);
        }
        per.into_iter().fold(0.0, f64::max)
    }
}

type Cache<C> = RwLock<HashMap<Forest, Arc<HomogeneousOperator<C>>>>;

/// Memoized evaluation of `D_F(a)` for a fixed `a`.
pub struct Coarmould<C> {
    a: NonlinearPart<C>,
    cache: Cache<C>,
}

impl<C: Scalar> Coarmould<C> {
    pub fn new(a: NonlinearPart<C>) -> Self {
        Coarmould {
            a,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn from_series(a: &SeriesTuple<C>) -> Result<Self> {
        Ok(Coarmould::new(NonlinearPart::from_series(a)?))
    }

    pub fn nonlinear_part(&self) -> &NonlinearPart<C> {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.dim
    }

    fn check_forest(&self, f: &Forest) -> Result<()> {
        match f.dim() {
            Some(d) if d != self.a.dim => Err(Error::DimensionMismatch {
                expected: self.a.dim,
                found: d,
            }),
            _ => Ok(()),
        }
    }

    /// `D_F(a)` from the recursive definition: `D_∅ = Id`,
    /// `D_{n◁G} = Σ_i (D_G(a_{i,n} z^{n+e_i})) ∂_i`, and the symmetrised
    /// product over the trees of a forest.
    pub fn recursive(&self, f: &Forest) -> Result<Arc<HomogeneousOperator<C>>> {
        self.check_forest(f)?;
        Ok(self.recursive_unchecked(f))
    }

    fn recursive_unchecked(&self, f: &Forest) -> Arc<HomogeneousOperator<C>> {
        if let Some(op) = self.cache.read().expect("cache lock").get(f) {
            return op.clone();
        }
        let op = Arc::new(self.compute(f));
        self.cache
            .write()
            .expect("cache lock")
            .entry(f.clone())
            .or_insert(op)
            .clone()
    }

    fn compute(&self, f: &Forest) -> HomogeneousOperator<C> {
        let dim = self.a.dim;
        if f.is_empty() {
            return HomogeneousOperator::identity(dim);
        }
        if let Some(t) = f.as_tree() {
            let beta = self.tree_coefficients_unchecked(t);
            let terms = beta
                .into_iter()
                .enumerate()
                .map(|(i, c)| (MultiIndex::unit(dim, i), c));
            return HomogeneousOperator::new(t.weight(), 1, terms).expect("tree operator");
        }
        // Product of the linear symbols Σ_i β_{i,T} x_i over the expanded trees.
        let mut poly: BTreeMap<MultiIndex, C> = BTreeMap::new();
        poly.insert(MultiIndex::zero(dim), C::one());
        let mut denom = C::one();
        for (t, d) in f.trees() {
            let beta = self.tree_coefficients_unchecked(t);
            for k in 1..=*d {
                denom = denom * C::from_i64(k as i64);
                let mut next: BTreeMap<MultiIndex, C> = BTreeMap::new();
                for (p, c) in &poly {
                    for (i, b) in beta.iter().enumerate() {
                        if b.is_zero() {
                            continue;
                        }
                        let slot = next.entry(p.plus_unit(i)).or_insert_with(C::zero);
                        *slot = slot.clone() + c.clone() * b.clone();
                    }
                }
                poly = next;
            }
        }
        let terms = poly.into_iter().map(|(p, c)| (p, c / denom.clone()));
        HomogeneousOperator::new(f.weight(dim), f.degree() as u32, terms).expect("forest operator")
    }

    /// `β_{i,T}` with `D_T z_i = β_{i,T} z^{‖T‖ + e_i}`.
    pub fn tree_coefficients(&self, t: &Tree) -> Result<Vec<C>> {
        if t.dim() != self.a.dim {
            return Err(Error::DimensionMismatch {
                expected: self.a.dim,
                found: t.dim(),
            });
        }
        let op = self.recursive_unchecked(&Forest::from(t.clone()));
        Ok((0..self.a.dim)
            .map(|i| op.coeff(&MultiIndex::unit(self.a.dim, i)))
            .collect())
    }

    fn tree_coefficients_unchecked(&self, t: &Tree) -> Vec<C> {
        let dim = self.a.dim;
        let n = t.decoration();
        let children = t.children();
        let inner = if children.is_empty() {
            None
        } else {
            Some(self.recursive_unchecked(children))
        };
        (0..dim)
            .map(|i| {
                let a = self.a.coeff(i, n);
                if a.is_zero() {
                    return C::zero();
                }
                let target = n.plus_unit(i);
                match &inner {
                    None => a,
                    Some(op) => a * op.monomial_factor(&target),
                }
            })
            .collect()
    }

    /// `D_F(a)` from the closed formula: a sum over colourings `j: V_F → [ν]`
    /// of `∏_σ Γ(j|succ(σ), N(σ) + e_{j(σ)}) a_{j(σ), N(σ)}`, times
    /// `δ^{j|roots}` and divided by `sym(F)`.
    pub fn closed(&self, f: &Forest) -> Result<HomogeneousOperator<C>> {
        self.check_forest(f)?;
        let dim = self.a.dim;
        let roots: Vec<Vec<C>> = f.expanded().map(|t| self.coloured_tree(t)).collect();
        let mut terms: Vec<(MultiIndex, C)> = Vec::new();
        for_each_colouring(dim, roots.len(), |colours| {
            let mut prod = C::one();
            for (k, &c) in colours.iter().enumerate() {
                prod = prod * roots[k][c].clone();
                if prod.is_zero() {
                    return;
                }
            }
            terms.push((profile_of(dim, colours), prod));
        });
        let sym = C::from_big(&f.symmetry_factor());
        let terms = terms.into_iter().map(|(p, c)| (p, c / sym.clone()));
        HomogeneousOperator::new(f.weight(dim), f.degree() as u32, terms)
    }

    /// For each root colour `i`, the sum over colourings of the rest of the
    /// tree of the product of vertex factors.
    fn coloured_tree(&self, t: &Tree) -> Vec<C> {
        let dim = self.a.dim;
        let n = t.decoration();
        let kids: Vec<Vec<C>> = t.children().expanded().map(|c| self.coloured_tree(c)).collect();
        (0..dim)
            .map(|i| {
                let a = self.a.coeff(i, n);
                if a.is_zero() {
                    return C::zero();
                }
                let target = n.plus_unit(i);
                let mut sum = C::zero();
                for_each_colouring(dim, kids.len(), |colours| {
                    let g: C = gamma_factor(&profile_of(dim, colours), &target);
                    if g.is_zero() {
                        return;
                    }
                    let mut prod = g;
                    for (k, &c) in colours.iter().enumerate() {
                        prod = prod * kids[k][c].clone();
                    }
                    sum = sum.clone() + prod;
                });
                a * sum
            })
            .collect()
    }

    /// Checks `D_F(φψ) = Σ_{F = F′F″} (D_{F′}φ)(D_{F″}ψ)`.
    pub fn verify_coseparativity(
        &self,
        f: &Forest,
        phi: &Series<C>,
        psi: &Series<C>,
    ) -> Result<IdentityCheck> {
        let lhs = self.recursive(f)?.apply(&phi.mul(psi)?)?;
        let mut rhs = Series::zero(phi.dim(), phi.cap());
        for (f1, f2) in f.factorizations() {
            let l = self.recursive(&f1)?.apply(phi)?;
            let r = self.recursive(&f2)?.apply(psi)?;
            rhs = rhs.add(&l.mul(&r)?)?;
        }
        Ok(IdentityCheck::compare(&lhs, &rhs))
    }

    /// Checks `D_{F₁} ∘ D_{F₂} = Σ_F k(F₁, F₂, F) D_F` on every monomial of
    /// degree `≤ cap`, comparing the scalar factors without truncation.
    pub fn verify_product_rule(&self, f1: &Forest, f2: &Forest, cap: u32) -> Result<IdentityCheck> {
        let dim = self.a.dim;
        let ks: Vec<(Arc<HomogeneousOperator<C>>, C)> = product_rule_multiplicities(f1, f2)?
            .iter()
            .map(|(f, k)| Ok((self.recursive(f)?, C::from_i64(*k as i64))))
            .collect::<Result<_>>()?;
        let d1 = self.recursive(f1)?;
        let d2 = self.recursive(f2)?;
        // Both sides are polynomials in m of total degree at most #F1 + #F2,
        // so the grid |m| <= #F1 + #F2 already determines them.
        let top = cap.min((f1.size() + f2.size()) as u32);
        let mut check = IdentityCheck::default();
        for deg in 0..=top {
            for m in MultiIndex::monomials_of_degree(dim, deg) {
                let inner = d2.monomial_factor(&m);
                let lhs = if inner.is_zero() {
                    C::zero()
                } else {
                    inner * d1.monomial_factor(&(&m + d2.weight()))
                };
                let rhs = ks
                    .iter()
                    .fold(C::zero(), |acc, (d, k)| acc + k.clone() * d.monomial_factor(&m));
                check.merge(IdentityCheck::compare_scalars(&lhs, &rhs));
            }
        }
        Ok(check)
    }
}

/// Calls `f` on every map `[len] → [dim]`, in lexicographic order.
fn for_each_colouring(dim: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut colours = vec![0usize; len];
    loop {
        f(&colours);
        let mut k = len;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            colours[k] += 1;
            if colours[k] < dim {
                break;
            }
            colours[k] = 0;
        }
    }
}

fn profile_of(dim: usize, colours: &[usize]) -> MultiIndex {
    let mut p = vec![0i32; dim];
    for &c in colours {
        p[c] += 1;
    }
    MultiIndex::new(p)
}

/// Outcome of comparing two sides of an identity: exact equality in exact
/// mode, maximal relative coefficient gap otherwise.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IdentityCheck {
    pub exact_mismatch: bool,
    pub max_relative_gap: f64,
}

/// Float-mode tolerance for structural identities.
pub const FLOAT_IDENTITY_TOL: f64 = 1e-10;

impl IdentityCheck {
    pub fn compare<C: Scalar>(lhs: &Series<C>, rhs: &Series<C>) -> Self {
        let mut gap: f64 = 0.0;
        for (m, _) in lhs.terms().chain(rhs.terms()) {
            gap = gap.max(relative_gap(lhs.coeff(m).to_c64(), rhs.coeff(m).to_c64()));
        }
        IdentityCheck {
            exact_mismatch: C::EXACT && lhs != rhs,
            max_relative_gap: gap,
        }
    }

    pub fn compare_scalars<C: Scalar>(lhs: &C, rhs: &C) -> Self {
        if C::EXACT {
            IdentityCheck {
                exact_mismatch: lhs != rhs,
                max_relative_gap: 0.0,
            }
        } else {
            IdentityCheck {
                exact_mismatch: false,
                max_relative_gap: relative_gap(lhs.to_c64(), rhs.to_c64()),
            }
        }
    }

    pub fn merge(&mut self, other: IdentityCheck) {
        self.exact_mismatch |= other.exact_mismatch;
        self.max_relative_gap = self.max_relative_gap.max(other.max_relative_gap);
    }

    pub fn holds(&self) -> bool {
        !self.exact_mismatch && self.max_relative_gap <= FLOAT_IDENTITY_TOL
    }
}

/// `k(F₁, F₂, F)`: the number of admissible cuts `c` of `F` with
/// `P^c(F) = F₁` and `R^c(F) = F₂`, for every `F` where it is non-zero.
///
/// Every such `F` is obtained by attaching each tree of `F₁` either as a
/// new root or below a vertex of `F₂`; the candidates are generated that way
/// and `k` is then counted on the cuts of each candidate.
pub fn product_rule_multiplicities(f1: &Forest, f2: &Forest) -> Result<BTreeMap<Forest, u64>> {
    let pieces: Vec<&Tree> = f1.expanded().collect();
    let slots = f2.size() + 1;
    let mut candidates = std::collections::BTreeSet::new();
    let mut choice = vec![0usize; pieces.len()];
    loop {
        // Slot 0 is a new root; slot v ≥ 1 is the (v−1)-th vertex of F₂ in preorder.
        let mut extras: Vec<Vec<Tree>> = vec![Vec::new(); slots];
        for (t, &s) in pieces.iter().zip(&choice) {
            extras[s].push((*t).clone());
        }
        let mut counter = 1;
        let mut trees: Vec<Tree> = f2
            .expanded()
            .map(|t| attach(t, &extras, &mut counter))
            .collect::<Result<_>>()?;
        trees.extend(extras[0].iter().cloned());
        candidates.insert(Forest::from_trees(trees));

        let mut k = choice.len();
        loop {
            if k == 0 {
                let mut out = BTreeMap::new();
                for f in candidates {
                    let n = f
                        .admissible_cuts()
                        .into_iter()
                        .filter(|c| &c.pruned == f1 && &c.remaining == f2)
                        .count() as u64;
                    if n > 0 {
                        out.insert(f, n);
                    }
                }
                return Ok(out);
            }
            k -= 1;
            choice[k] += 1;
            if choice[k] < slots {
                break;
            }
            choice[k] = 0;
        }
    }
}

fn attach(t: &Tree, extras: &[Vec<Tree>], counter: &mut usize) -> Result<Tree> {
    let id = *counter;
    *counter += 1;
    let mut kids: Vec<Tree> = t
        .children()
        .expanded()
        .map(|c| attach(c, extras, counter))
        .collect::<Result<_>>()?;
    kids.extend(extras[id].iter().cloned());
    Tree::graft(t.decoration().clone(), Forest::from_trees(kids))
}

#[cfg(test)]
fn decorations_of(f: &Forest) -> Vec<(usize, MultiIndex)> {
    fn walk(t: &Tree, depth: usize, out: &mut Vec<(usize, MultiIndex)>) {
        out.push((depth, t.decoration().clone()));
        for c in t.children().expanded() {
            walk(c, depth + 1, out);
        }
    }
    let mut out = Vec::new();
    for t in f.expanded() {
        walk(t, 0, &mut out);
    }
    out
}

/// Memoized universal-vanishing oracle in dimension `ν`.
///
/// `D_F(a)` is a polynomial in the `a_{i,n}` with non-negative rational
/// coefficients, so it vanishes for every `a` iff it vanishes at the point
/// where every admissible coefficient equals one. The evaluation is exact.
pub struct VanishingOracle {
    inner: Coarmould<crate::scalar::Exact>,
}

impl VanishingOracle {
    pub fn new(dim: usize) -> Self {
        VanishingOracle {
            inner: Coarmould::new(NonlinearPart::generic(dim)),
        }
    }

    pub fn is_universally_vanishing(&self, f: &Forest) -> Result<bool> {
        Ok(self.inner.recursive(f)?.is_zero())
    }

    /// Every non-vanishing forest with decorations in `decorations` and
    /// `|‖F‖| ≤ weight_cap`, in enumeration order. Trees and factors of a
    /// non-vanishing forest are non-vanishing, so candidates are built from
    /// non-vanishing parts only.
    pub fn enumerate(&self, decorations: &[MultiIndex], weight_cap: u32) -> Result<Vec<Forest>> {
        enumerate_forests_with(
            decorations,
            weight_cap,
            |t| Ok(nv_candidate(t) && !self.is_universally_vanishing(&Forest::from(t.clone()))?),
            |f| Ok(f.degree() <= 1 || !self.is_universally_vanishing(f)?),
        )
    }
}

/// One-shot form of [`VanishingOracle::is_universally_vanishing`].
pub fn is_universally_vanishing(f: &Forest, dim: usize) -> Result<bool> {
    VanishingOracle::new(dim).is_universally_vanishing(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    fn mi(v: &[i32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn z_squared(cap: u32) -> Coarmould<Exact> {
        let a = SeriesTuple::new(vec![Series::monomial(1, cap, mi(&[2]), Exact::one()).unwrap()])
            .unwrap();
        Coarmould::from_series(&a).unwrap()
    }

    fn op(weight: i32, degree: u32, profile: i32, c: Exact) -> HomogeneousOperator<Exact> {
        HomogeneousOperator::new(mi(&[weight]), degree, [(mi(&[profile]), c)]).unwrap()
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_factor::<Exact>(&mi(&[2, 0]), &mi(&[3, 1])), Exact::from_i64(6));
        assert_eq!(gamma_factor::<Exact>(&mi(&[1, 2]), &mi(&[3, 1])), Exact::from_i64(0));
        assert_eq!(gamma_factor::<Exact>(&mi(&[0, 0]), &mi(&[0, 0])), Exact::from_i64(1));
    }

    #[test]
    fn recursive_examples() {
        let d = z_squared(6);
        let e: Forest = Forest::empty();
        assert_eq!(*d.recursive(&e).unwrap(), HomogeneousOperator::identity(1));
        let leaf: Forest = "[1]".parse().unwrap();
        assert_eq!(*d.recursive(&leaf).unwrap(), op(1, 1, 1, Exact::one()));
        let bamboo: Forest = "(1)<([1])".parse().unwrap();
        assert_eq!(*d.recursive(&bamboo).unwrap(), op(2, 1, 1, Exact::from_i64(2)));
        let pair: Forest = "[1]*[1]".parse().unwrap();
        assert_eq!(*d.recursive(&pair).unwrap(), op(2, 2, 2, Exact::from_ratio(1, 2)));
    }

    #[test]
    fn closed_examples() {
        let d = z_squared(6);
        for s in ["[1]", "(1)<([1])", "[1]*[1]", "(1)<([1]*[1])"] {
            let f: Forest = s.parse().unwrap();
            assert_eq!(d.closed(&f).unwrap(), *d.recursive(&f).unwrap(), "{s}");
        }
    }

    #[test]
    fn application_examples() {
        let z3 = Series::monomial(1, 6, mi(&[3]), Exact::one()).unwrap();
        assert_eq!(HomogeneousOperator::identity(1).apply(&z3).unwrap(), z3);
        let zsd = op(1, 1, 1, Exact::one());
        assert_eq!(
            zsd.apply(&z3).unwrap(),
            Series::monomial(1, 6, mi(&[4]), Exact::from_i64(3)).unwrap()
        );
        let half = op(2, 2, 2, Exact::from_ratio(1, 2));
        let z2 = Series::monomial(1, 6, mi(&[2]), Exact::one()).unwrap();
        assert_eq!(
            half.apply(&z2).unwrap(),
            Series::monomial(1, 6, mi(&[4]), Exact::one()).unwrap()
        );
    }

    #[test]
    fn profiles_must_match_degree() {
        let bad = HomogeneousOperator::<Exact>::new(mi(&[1]), 2, [(mi(&[1]), Exact::one())]);
        assert!(matches!(bad, Err(Error::InvalidProfile { .. })));
    }

    #[test]
    fn vanishing_examples() {
        let bamboo: Forest = "(1)<([1])".parse().unwrap();
        assert!(!is_universally_vanishing(&bamboo, 1).unwrap());
        let t: Forest = "(-1,2,0)<([1,1,-1])".parse().unwrap();
        assert!(is_universally_vanishing(&t, 3).unwrap());
        assert!(!is_universally_vanishing(&Forest::empty(), 2).unwrap());
    }

    #[test]
    fn coseparativity_examples() {
        let d = z_squared(6);
        let z = Series::variable(1, 6, 0);
        for s in ["∅", "[1]", "[1]*[1]"] {
            let f: Forest = s.parse().unwrap();
            assert!(d.verify_coseparativity(&f, &z, &z).unwrap().holds(), "{s}");
        }
    }

    #[test]
    fn product_rule_for_two_leaves() {
        let leaf: Forest = "[1]".parse().unwrap();
        let ks = product_rule_multiplicities(&leaf, &leaf).unwrap();
        let bamboo: Forest = "(1)<([1])".parse().unwrap();
        let pair: Forest = "[1]*[1]".parse().unwrap();
        assert_eq!(ks.get(&bamboo), Some(&1));
        assert_eq!(ks.get(&pair), Some(&2));
        assert_eq!(ks.len(), 2);
        assert!(z_squared(6).verify_product_rule(&leaf, &leaf, 6).unwrap().holds());
    }

    #[test]
    fn trivial_product_rules() {
        let f: Forest = "(1)<([2]*[1])".parse().unwrap();
        let e = Forest::empty();
        let left = product_rule_multiplicities(&e, &f).unwrap();
        assert_eq!(left.into_iter().collect::<Vec<_>>(), vec![(f.clone(), 1)]);
        let right = product_rule_multiplicities(&f, &e).unwrap();
        assert_eq!(right.into_iter().collect::<Vec<_>>(), vec![(f, 1)]);
    }

    #[test]
    fn operator_dump() {
        let v = op(2, 2, 2, Exact::from_ratio(1, 2)).to_json();
        assert_eq!(
            v.to_string(),
            r#"{"degree":2,"terms":[{"im":"0","profile":[2],"re":"1/2"}],"weight":[2]}"#
        );
    }

    #[test]
    fn nv_enumeration_matches_filtered_sweep() {
        let decos = MultiIndex::decorations_up_to(2, 4);
        let oracle = VanishingOracle::new(2);
        let all = crate::forest::enumerate_forests(&decos, 4, crate::forest::ForestFilter::All).unwrap();
        let filtered: Vec<Forest> = all
            .into_iter()
            .filter(|f| !oracle.is_universally_vanishing(f).unwrap())
            .collect();
        assert_eq!(oracle.enumerate(&decos, 4).unwrap(), filtered);
    }
    /// Definition-level count over every forest with the combined decorations.
    fn brute_multiplicities(f1: &Forest, f2: &Forest) -> Result<BTreeMap<Forest, u64>> {
        let mut decos: Vec<MultiIndex> = Vec::new();
        let mut target_multiset: BTreeMap<MultiIndex, usize> = BTreeMap::new();
        for f in [f1, f2] {
            for (_, n) in decorations_of(f) {
                decos.push(n.clone());
                *target_multiset.entry(n).or_insert(0) += 1;
            }
        }
        let weight = (f1.abs_weight() + f2.abs_weight()) as u32;
        let mut out = BTreeMap::new();
        if decos.is_empty() {
            out.insert(Forest::empty(), 1);
            return Ok(out);
        }
        let candidates = crate::forest::enumerate_forests(&decos, weight, crate::forest::ForestFilter::All)?;
        for f in candidates {
            if f.abs_weight() != weight as i64 {
                continue;
            }
            let mut ms: BTreeMap<MultiIndex, usize> = BTreeMap::new();
            for (_, n) in decorations_of(&f) {
                *ms.entry(n).or_insert(0) += 1;
            }
            if ms != target_multiset {
                continue;
            }
            let k = f
                .admissible_cuts()
                .into_iter()
                .filter(|c| &c.pruned == f1 && &c.remaining == f2)
                .count() as u64;
            if k > 0 {
                out.insert(f, k);
            }
        }
        Ok(out)
    }

    #[test]
    fn grafted_multiplicities_match_brute_force() {
        let decos = [mi(&[2, -1]), mi(&[1, 0]), mi(&[0, 1])];
        let forests = crate::forest::enumerate_forests(&decos, 3, crate::forest::ForestFilter::All).unwrap();
        for f1 in &forests {
            for f2 in &forests {
                if f1.abs_weight() + f2.abs_weight() <= 4 {
                    assert_eq!(
                        product_rule_multiplicities(f1, f2).unwrap(),
                        brute_multiplicities(f1, f2).unwrap(),
                        "{f1} {f2}"
                    );
                }
            }
        }
    }
}
