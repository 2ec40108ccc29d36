//! Invariant suites shared by the command-line front end.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::armould::Spectrum;
use crate::bruno::{armould_bound_check, counting_check, BrunoDiagnostics};
use crate::coarmould::{Coarmould, VanishingOracle, FLOAT_IDENTITY_TOL};
use crate::error::{Error, Result};
use crate::forest::{enumerate_forests, Forest, ForestFilter};
use crate::linearizer::{
    conjugacy_residual, linearize_tree, majorant_bound, majorant_constant, ProblemSpec,
};
use crate::multi_index::MultiIndex;
use crate::scalar::Scalar;
use crate::series::{Series, SeriesTuple};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    ClosedVsRecursive,
    Coseparativity,
    ProductRule,
    VanishingHierarchy,
    CutVanish,
    Counting,
    ArmouldBounds,
    Majorant,
    Residual,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::ClosedVsRecursive,
        Check::Coseparativity,
        Check::ProductRule,
        Check::VanishingHierarchy,
        Check::CutVanish,
        Check::Counting,
        Check::ArmouldBounds,
        Check::Majorant,
        Check::Residual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::ClosedVsRecursive => "closed-vs-recursive",
            Check::Coseparativity => "coseparativity",
            Check::ProductRule => "product-rule",
            Check::VanishingHierarchy => "vanishing-hierarchy",
            Check::CutVanish => "cut-vanish",
            Check::Counting => "counting",
            Check::ArmouldBounds => "armould-bounds",
            Check::Majorant => "majorant",
            Check::Residual => "residual",
        }
    }
}

impl FromStr for Check {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown check {s:?}")))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses `all` or a comma-separated list of check names.
pub fn parse_checks(s: &str) -> Result<Vec<Check>> {
    if s.trim() == "all" {
        return Ok(Check::ALL.to_vec());
    }
    s.split(',').map(|x| x.trim().parse()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub check: String,
    pub passed: bool,
    pub cases: usize,
    pub violations: usize,
    pub detail: String,
}

impl CheckOutcome {
    fn new(check: Check, cases: usize, violations: usize, detail: String) -> Self {
        CheckOutcome {
            check: check.name().into(),
            passed: violations == 0,
            cases,
            violations,
            detail,
        }
    }
}

/// Sweep sizes used by [`run_checks`].
#[derive(Clone, Copy, Debug)]
pub struct SweepLimits {
    /// Weight cap for operator identities.
    pub operator_weight: u32,
    /// Weight cap for the small-divisor estimates.
    pub estimate_weight: u32,
    /// Largest `k` in the counting check.
    pub counting_kmax: u32,
}

impl Default for SweepLimits {
    fn default() -> Self {
        SweepLimits {
            operator_weight: 4,
            estimate_weight: 6,
            counting_kmax: 10,
        }
    }
}

/// Two fixed test polynomials of degree `≤ 2`.
pub fn probe_series<C: Scalar>(dim: usize, cap: u32) -> (Series<C>, Series<C>) {
    let mut phi = vec![(MultiIndex::zero(dim), C::from_i64(1))];
    let mut psi = vec![(MultiIndex::zero(dim), C::from_i64(-2))];
    for i in 0..dim {
        phi.push((MultiIndex::unit(dim, i), C::from_i64(i as i64 + 1)));
        psi.push((MultiIndex::unit(dim, i), C::from_ratio(1, i as i64 + 2)));
        for j in i..dim {
            let m = &MultiIndex::unit(dim, i) + &MultiIndex::unit(dim, j);
            phi.push((m.clone(), C::from_ratio(1, (i + j + 1) as i64)));
            psi.push((m, C::from_i64((i * 3 + j) as i64 % 5 - 2)));
        }
    }
    (
        Series::from_terms(dim, cap, phi).expect("probe"),
        Series::from_terms(dim, cap, psi).expect("probe"),
    )
}

/// `D_closed(F) = D_recursive(F)` on every forest.
pub fn check_closed_vs_recursive<C: Scalar>(
    coarmould: &Coarmould<C>,
    forests: &[Forest],
) -> Result<CheckOutcome> {
    let mut bad = Vec::new();
    for f in forests {
        let rec = coarmould.recursive(f)?;
        let closed = coarmould.closed(f)?;
        let same = if C::EXACT {
            *rec == closed
        } else {
            operator_gap(&rec, &closed) <= FLOAT_IDENTITY_TOL
        };
        if !same {
            bad.push(f.to_string());
        }
    }
    Ok(CheckOutcome::new(
        Check::ClosedVsRecursive,
        forests.len(),
        bad.len(),
        first_few(&bad),
    ))
}

fn operator_gap<C: Scalar>(
    a: &crate::coarmould::HomogeneousOperator<C>,
    b: &crate::coarmould::HomogeneousOperator<C>,
) -> f64 {
    if a.weight() != b.weight() || a.degree() != b.degree() {
        return f64::INFINITY;
    }
    a.terms()
        .chain(b.terms())
        .map(|(p, _)| crate::scalar::relative_gap(a.coeff(p).to_c64(), b.coeff(p).to_c64()))
        .fold(0.0, f64::max)
}

fn first_few(items: &[String]) -> String {
    if items.is_empty() {
        return String::new();
    }
    let shown: Vec<&str> = items.iter().take(5).map(String::as_str).collect();
    format!("e.g. {}", shown.join(", "))
}

/// `D_F(φψ) = Σ_{F=F′F″} D_{F′}φ · D_{F″}ψ` on fixed probes.
pub fn check_coseparativity<C: Scalar>(
    coarmould: &Coarmould<C>,
    forests: &[Forest],
    cap: u32,
) -> Result<CheckOutcome> {
    let (phi, psi) = probe_series::<C>(coarmould.dim(), cap);
    let mut bad = Vec::new();
    for f in forests {
        if !coarmould.verify_coseparativity(f, &phi, &psi)?.holds() {
            bad.push(f.to_string());
        }
    }
    Ok(CheckOutcome::new(
        Check::Coseparativity,
        forests.len(),
        bad.len(),
        first_few(&bad),
    ))
}

/// `D_{F₁} ∘ D_{F₂} = Σ k(F₁,F₂,F) D_F` for all pairs with total weight ≤ `weight`.
pub fn check_product_rule<C: Scalar>(
    coarmould: &Coarmould<C>,
    forests: &[Forest],
    weight: u32,
) -> Result<CheckOutcome> {
    let weights: Vec<i64> = forests.iter().map(Forest::abs_weight).collect();
    let pairs: Vec<(usize, usize)> = (0..forests.len())
        .flat_map(|i| (0..forests.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| weights[i] + weights[j] <= weight as i64)
        .collect();
    let verdicts = pairs
        .par_iter()
        .map(|&(i, j)| {
            let check = coarmould.verify_product_rule(&forests[i], &forests[j], weight)?;
            Ok((!check.holds()).then(|| format!("({}, {})", forests[i], forests[j])))
        })
        .collect::<Result<Vec<_>>>()?;
    let bad: Vec<String> = verdicts.into_iter().flatten().collect();
    Ok(CheckOutcome::new(Check::ProductRule, pairs.len(), bad.len(), first_few(&bad)))
}

/// Not universally vanishing implies membership in `F⁺`.
pub fn check_vanishing_hierarchy(oracle: &VanishingOracle, forests: &[Forest]) -> Result<CheckOutcome> {
    let mut bad = Vec::new();
    for f in forests {
        if !oracle.is_universally_vanishing(f)? && !f.is_fplus() {
            bad.push(f.to_string());
        }
    }
    Ok(CheckOutcome::new(
        Check::VanishingHierarchy,
        forests.len(),
        bad.len(),
        first_few(&bad),
    ))
}

/// For non-vanishing `F` and every cut `c`: `P^c(F)` and `R^c(F)` are
/// non-vanishing and `|‖R^c(F)‖| ≥ #c − deg F`.
pub fn check_cut_vanish(oracle: &VanishingOracle, forests: &[Forest]) -> Result<CheckOutcome> {
    let mut cases = 0;
    let mut bad = Vec::new();
    for f in forests {
        if oracle.is_universally_vanishing(f)? {
            continue;
        }
        for cut in f.admissible_cuts() {
            cases += 1;
            let closure = !oracle.is_universally_vanishing(&cut.pruned)?
                && !oracle.is_universally_vanishing(&cut.remaining)?;
            let count =
                cut.remaining.abs_weight() >= cut.selected.len() as i64 - f.degree() as i64;
            let sizes = cut.pruned.size() + cut.remaining.size() == f.size()
                && cut.selected.len() == cut.pruned.degree();
            if !(closure && count && sizes) {
                bad.push(format!("{f} cut at {:?}", cut.selected));
            }
        }
    }
    Ok(CheckOutcome::new(Check::CutVanish, cases, bad.len(), first_few(&bad)))
}

/// Non-vanishing forests among `forests`.
pub fn nv_forests(oracle: &VanishingOracle, forests: &[Forest]) -> Result<Vec<Forest>> {
    let mut out = Vec::new();
    for f in forests {
        if !oracle.is_universally_vanishing(f)? {
            out.push(f.clone());
        }
    }
    Ok(out)
}

pub fn check_counting<C: Scalar>(
    spectrum: &Spectrum<C>,
    nv: &[Forest],
    kmax: u32,
) -> Result<CheckOutcome> {
    let mut bad = Vec::new();
    for f in nv {
        if !counting_check(f, spectrum, kmax)?.holds {
            bad.push(f.to_string());
        }
    }
    Ok(CheckOutcome::new(Check::Counting, nv.len(), bad.len(), first_few(&bad)))
}

pub fn check_armould_bounds<C: Scalar>(spectrum: &Spectrum<C>, nv: &[Forest]) -> Result<CheckOutcome> {
    let mut bad = Vec::new();
    for f in nv {
        if !armould_bound_check(f, spectrum)?.holds {
            bad.push(f.to_string());
        }
    }
    Ok(CheckOutcome::new(Check::ArmouldBounds, nv.len(), bad.len(), first_few(&bad)))
}

/// `|h_i| ≺ w_i` for the float tree-method `h`, with `B` from the Bruno
/// diagnostics at `kmax = K` and `M` from the coefficient sum at radius 1.
pub fn check_majorant(spec: &ProblemSpec<Complex64>) -> Result<CheckOutcome> {
    let h = linearize_tree(spec)?.h;
    let diag = BrunoDiagnostics::compute(spec.spectrum(), spec.cap().max(1))?;
    let m = majorant_constant(spec.nonlinear(), 1.0)?;
    let bound = majorant_bound(spec.dim(), spec.cap(), m, 1.0, diag.big_b)?;
    let mut bad = Vec::new();
    for i in 0..spec.dim() {
        if !bound.w.component(i).majorizes(h.component(i))? {
            bad.push(format!("component {}", i + 1));
        }
    }
    Ok(CheckOutcome::new(
        Check::Majorant,
        spec.dim(),
        bad.len(),
        format!("B = {:.6}, M = {:.6} {}", diag.big_b, m, first_few(&bad)),
    ))
}

/// Residual of a candidate `h` (exactly zero in rational mode).
pub fn check_residual<C: Scalar>(spec: &ProblemSpec<C>, h: &SeriesTuple<C>) -> Result<CheckOutcome> {
    let r = conjugacy_residual(spec, h)?;
    let scale = 1.0 + h.max_modulus();
    let ok = if C::EXACT { r == 0.0 } else { r <= 1e-9 * scale };
    Ok(CheckOutcome::new(
        Check::Residual,
        1,
        usize::from(!ok),
        format!("residual = {r:e}"),
    ))
}

/// Runs the selected suites for one problem. Operator identities use the
/// problem's own nonlinear part; vanishing and estimate sweeps use its
/// support as the decoration alphabet.
pub fn run_checks<C: Scalar>(
    spec: &ProblemSpec<C>,
    checks: &[Check],
    h: Option<&SeriesTuple<C>>,
    limits: SweepLimits,
) -> Result<Vec<CheckOutcome>> {
    let dim = spec.dim();
    let coarmould = Coarmould::from_series(spec.nonlinear())?;
    let support = coarmould.nonlinear_part().support();
    let oracle = VanishingOracle::new(dim);
    let sweep = |w: u32| -> Result<Vec<Forest>> {
        if support.is_empty() {
            Ok(vec![Forest::empty()])
        } else {
            enumerate_forests(&support, w, ForestFilter::All)
        }
    };
    let op_weight = limits.operator_weight.min(spec.cap());
    let mut out = Vec::new();
    for &check in checks {
        let outcome = match check {
            Check::ClosedVsRecursive => check_closed_vs_recursive(&coarmould, &sweep(op_weight)?)?,
            Check::Coseparativity => {
                check_coseparativity(&coarmould, &sweep(op_weight)?, spec.cap())?
            }
            Check::ProductRule => check_product_rule(&coarmould, &sweep(op_weight)?, op_weight)?,
            Check::VanishingHierarchy => {
                check_vanishing_hierarchy(&oracle, &sweep(limits.estimate_weight)?)?
            }
            Check::CutVanish => check_cut_vanish(&oracle, &sweep(op_weight)?)?,
            Check::Counting => {
                let nv = nv_forests(&oracle, &sweep(limits.estimate_weight)?)?;
                check_counting(spec.spectrum(), &nv, limits.counting_kmax)?
            }
            Check::ArmouldBounds => {
                let nv = nv_forests(&oracle, &sweep(limits.estimate_weight)?)?;
                check_armould_bounds(spec.spectrum(), &nv)?
            }
            Check::Majorant => check_majorant(&spec.to_c64())?,
            Check::Residual => match h {
                Some(h) => check_residual(spec, h)?,
                None => check_residual(spec, &linearize_tree(spec)?.h)?,
            },
        };
        out.push(outcome);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::armould::Kind;
    use crate::scalar::Exact;

    fn sample() -> ProblemSpec<Exact> {
        let sp = Spectrum::new(Kind::Diffeo, vec![Exact::from_i64(2), Exact::from_i64(3)]).unwrap();
        let a = SeriesTuple::new(vec![
            Series::from_terms(2, 5, vec![(MultiIndex::new(vec![0, 2]), Exact::from_i64(1))]).unwrap(),
            Series::from_terms(2, 5, vec![(MultiIndex::new(vec![2, 0]), Exact::from_ratio(1, 2))]).unwrap(),
        ])
        .unwrap();
        ProblemSpec::new(sp, a).unwrap()
    }

    #[test]
    fn check_names_round_trip() {
        for c in Check::ALL {
            assert_eq!(c.name().parse::<Check>().unwrap(), c);
        }
        assert_eq!(parse_checks("all").unwrap().len(), 9);
        assert!(parse_checks("counting,nope").is_err());
    }

    #[test]
    fn all_suites_pass_on_sample() {
        let limits = SweepLimits { operator_weight: 3, estimate_weight: 4, counting_kmax: 6 };
        let out = run_checks(&sample(), &Check::ALL, None, limits).unwrap();
        for o in &out {
            assert!(o.passed, "{o:?}");
        }
    }

    #[test]
    fn wrong_h_fails_residual() {
        let spec = sample();
        let h = SeriesTuple::identity(2, 5);
        let out = run_checks(&spec, &[Check::Residual], Some(&h), SweepLimits::default()).unwrap();
        assert!(!out[0].passed);
    }
}
