//! Small divisors, Bruno sums and the explicit bounds built on them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::armould::{Armould, Kind, LinearizingArmould, Spectrum};
use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::multi_index::MultiIndex;
use crate::scalar::{Scalar, RESONANCE_GUARD};

/// Euclidean distance from a complex number to the nearest integer.
pub fn distance_to_integers(z: Complex64) -> f64 {
    let f = z.re.floor();
    let dx = (z.re - f).min(f + 1.0 - z.re);
    dx.hypot(z.im)
}

fn small_divisor(kind: Kind, lambda: &[Complex64], n: &MultiIndex) -> f64 {
    let dot = lambda
        .iter()
        .zip(n.entries())
        .fold(Complex64::new(0.0, 0.0), |acc, (l, &e)| acc + l * e as f64);
    match kind {
        Kind::Diffeo => distance_to_integers(dot),
        Kind::Field => dot.norm(),
    }
}

/// `Ω(1), …, Ω(kmax)`, where `Ω(k) = min {1} ∪ {d(n·λ, Z) : n ∈ N, |n| ≤ k}`
/// for a diffeomorphism and `min {1} ∪ {|n·λ|}` for a vector field.
pub fn omega_sequence<C: Scalar>(spectrum: &Spectrum<C>, kmax: u32) -> Result<Vec<f64>> {
    let lambda = spectrum.frequencies();
    let mut current: f64 = 1.0;
    let mut out = Vec::with_capacity(kmax as usize);
    for t in 1..=kmax {
        for n in MultiIndex::decorations_of_total(spectrum.dim(), t) {
            spectrum.divisor(&n)?;
            let d = small_divisor(spectrum.kind(), &lambda, &n);
            if d < RESONANCE_GUARD {
                return Err(Error::Resonance { at: n });
            }
            current = current.min(d);
        }
        out.push(current);
    }
    Ok(out)
}

/// `Ω(k)` for a single `k ≥ 1`.
pub fn omega<C: Scalar>(spectrum: &Spectrum<C>, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be ≥ 1".into()));
    }
    Ok(*omega_sequence(spectrum, k)?.last().expect("k ≥ 1"))
}

/// Comparison functions for a diffeomorphism:
/// `α(k) = min {1} ∪ {|e^{2πi(m·λ − λ_j)} − 1|}` and
/// `ε(k) = min {1} ∪ {|q^m − q_j|}` over `2 ≤ |m| ≤ k+1`, `j ∈ [ν]`.
/// A resonant pair shows up as a zero value. `None` for vector fields.
pub fn alpha_epsilon_sequence<C: Scalar>(
    spectrum: &Spectrum<C>,
    kmax: u32,
) -> Option<Vec<(f64, f64)>> {
    if spectrum.kind() != Kind::Diffeo {
        return None;
    }
    let dim = spectrum.dim();
    let lambda = spectrum.frequencies();
    let q: Vec<Complex64> = spectrum.values().iter().map(Scalar::to_c64).collect();
    let (mut alpha, mut eps) = (1.0f64, 1.0f64);
    let mut out = Vec::with_capacity(kmax as usize);
    for t in 2..=kmax + 1 {
        for m in MultiIndex::monomials_of_degree(dim, t) {
            let ml = lambda
                .iter()
                .zip(m.entries())
                .fold(Complex64::new(0.0, 0.0), |acc, (l, &e)| acc + l * e as f64);
            let qm = q
                .iter()
                .zip(m.entries())
                .fold(Complex64::new(1.0, 0.0), |acc, (x, &e)| acc * x.powi(e));
            for j in 0..dim {
                let phase = (ml - lambda[j]) * Complex64::new(0.0, 2.0 * PI);
                alpha = alpha.min((phase.exp() - 1.0).norm());
                eps = eps.min((qm - q[j]).norm());
            }
        }
        out.push((alpha, eps));
    }
    Some(out)
}

/// `Σ_{k=1}^{kmax} (1/k − 1/(k+1)) log(1/Ω(k))` for `omegas = [Ω(1), …]`.
pub fn bruno_partial(omegas: &[f64]) -> f64 {
    omegas
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let k = (i + 1) as f64;
            (1.0 / k - 1.0 / (k + 1.0)) * (1.0 / w).ln()
        })
        .sum()
}

/// `log(1/Ω(kmax))/(kmax+1)`: a lower bound for the tail of the Bruno series
/// (Ω is non-increasing), and its exact value when Ω is constant from `kmax` on.
pub fn bruno_tail_lower(omegas: &[f64]) -> f64 {
    match omegas.last() {
        None => 0.0,
        Some(w) => (1.0 / w).ln() / (omegas.len() as f64 + 1.0),
    }
}

/// `Σ_{k=1}^{k0} log(k+2)/(k(k+1))`, summed from the small end.
pub fn gamma_partial(k0: u64) -> f64 {
    (1..=k0)
        .rev()
        .map(|k| {
            let k = k as f64;
            (k + 2.0).ln() / (k * (k + 1.0))
        })
        .sum()
}

/// Bounds for `Σ_{k>k0} (1/k − 1/(k+1)) log(k+2)`.
///
/// Summation by parts gives `log(k0+3)/(k0+1) + Σ_{k≥k0+2} log(1 + 1/(k+1))/k`;
/// bounding `x/(1+x) ≤ log(1+x) ≤ x` and telescoping yields
/// `[½(1/(k0+2) + 1/(k0+3)), 1/(k0+1)]` for the remaining sum.
pub fn gamma_tail_bounds(k0: u64) -> (f64, f64) {
    let k = k0 as f64;
    let head = (k + 3.0).ln() / (k + 1.0);
    (
        head + 0.5 * (1.0 / (k + 2.0) + 1.0 / (k + 3.0)),
        head + 1.0 / (k + 1.0),
    )
}

/// `γ = Σ_{k≥1} (1/k − 1/(k+1)) log(k+2)` with absolute error `≤ tol`
/// (plus floating-point rounding of the partial sum).
pub fn gamma_constant(tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be > 0")));
    }
    let mut k0: u64 = 16;
    loop {
        let (lo, hi) = gamma_tail_bounds(k0);
        if (hi - lo) / 2.0 <= tol || k0 >= 1 << 30 {
            return Ok(gamma_partial(k0) + (lo + hi) / 2.0);
        }
        k0 *= 2;
    }
}

/// `b / (B ν (4Mν + 2))`.
pub fn radius_lower_bound(b: f64, m: f64, dim: usize, big_b: f64) -> Result<f64> {
    if !(b > 0.0) || !(m >= 0.0) || dim == 0 || !(big_b >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "radius bound needs b > 0, M ≥ 0, ν ≥ 1, B ≥ 1 (got b={b}, M={m}, ν={dim}, B={big_b})"
        )));
    }
    let nu = dim as f64;
    Ok(b / (big_b * nu * (4.0 * m * nu + 2.0)))
}

/// `κ_β = 1 + 2β − 2√(β(1+β))`, evaluated as `1/(1 + 2β + 2√(β(1+β)))`.
pub fn kappa(beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("β = {beta} must be > 0")));
    }
    Ok(1.0 / (1.0 + 2.0 * beta + 2.0 * (beta * (1.0 + beta)).sqrt()))
}

/// `1/(4β+1) > κ_β > 1/(4β+2)`.
pub fn kappa_sandwich_holds(beta: f64) -> Result<bool> {
    let k = kappa(beta)?;
    Ok(1.0 / (4.0 * beta + 1.0) > k && k > 1.0 / (4.0 * beta + 2.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountingReport {
    pub abs_weight: i64,
    /// `#W_k(F)` for `k = 0, …, kmax`.
    pub counts: Vec<usize>,
    pub holds: bool,
}

/// Checks `#W_k(F) (k+1) ≤ |‖F‖|` for `k = 0, …, kmax`, where `W_k(F)` is the
/// set of vertices whose small divisor is below `Ω(k)/(k+2)` (`Ω(0) = 1`).
pub fn counting_check<C: Scalar>(
    f: &Forest,
    spectrum: &Spectrum<C>,
    kmax: u32,
) -> Result<CountingReport> {
    let omegas = omega_sequence(spectrum, kmax)?;
    let lambda = spectrum.frequencies();
    let divisors: Vec<f64> = f
        .sigma_hats()
        .iter()
        .map(|w| small_divisor(spectrum.kind(), &lambda, w))
        .collect();
    let weight = f.abs_weight();
    let mut counts = Vec::with_capacity(kmax as usize + 1);
    let mut holds = true;
    for k in 0..=kmax {
        let om = if k == 0 { 1.0 } else { omegas[k as usize - 1] };
        let threshold = om / (k as f64 + 2.0);
        let c = divisors.iter().filter(|&&d| d < threshold).count();
        holds &= (c as i64) * (k as i64 + 1) <= weight;
        counts.push(c);
    }
    Ok(CountingReport {
        abs_weight: weight,
        counts,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArmouldBoundReport {
    /// `log |S^F|` (`-∞` when the value vanishes).
    pub log_value: f64,
    /// `|‖F‖| (L_K/K + Σ_{k<K} (1/k − 1/(k+1)) L_k)`, `K = |‖F‖|`.
    pub log_bound: f64,
    pub holds: bool,
}

/// Finite form of `|S^F| ≤ B^{|‖F‖|}` with `L_k = log((k+2)/Ω(k))`.
pub fn armould_bound_check<C: Scalar>(
    f: &Forest,
    spectrum: &Spectrum<C>,
) -> Result<ArmouldBoundReport> {
    let value = LinearizingArmould::new(spectrum.to_c64()).value(f)?;
    let log_value = value.norm().ln();
    let k_cap = f.abs_weight();
    if k_cap == 0 {
        return Ok(ArmouldBoundReport {
            log_value,
            log_bound: 0.0,
            holds: log_value <= 0.0,
        });
    }
    let omegas = omega_sequence(spectrum, k_cap as u32)?;
    let l = |k: usize| ((k as f64 + 2.0) / omegas[k - 1]).ln();
    let kk = k_cap as usize;
    let mut rate = l(kk) / kk as f64;
    for k in 1..kk {
        rate += (1.0 / k as f64 - 1.0 / (k as f64 + 1.0)) * l(k);
    }
    let log_bound = k_cap as f64 * rate;
    Ok(ArmouldBoundReport {
        log_value,
        log_bound,
        holds: log_value <= log_bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxModulusReport {
    pub points: usize,
    pub violations: usize,
}

/// Samples `z` on an `n × n` grid over `[−½, ½] × [−2, 2]` and checks
/// `|e^{2πiz} − 1| > 1/3` when `|Im z| > ½`, `≥ d(z, Z)` otherwise.
pub fn max_modulus_check(n: usize) -> MaxModulusReport {
    let n = n.max(2);
    let mut violations = 0;
    for a in 0..n {
        let x = -0.5 + a as f64 / (n - 1) as f64;
        for b in 0..n {
            let y = -2.0 + 4.0 * b as f64 / (n - 1) as f64;
            let z = Complex64::new(x, y);
            let lhs = ((z * Complex64::new(0.0, 2.0 * PI)).exp() - 1.0).norm();
            let ok = if y.abs() > 0.5 {
                lhs > 1.0 / 3.0
            } else {
                lhs >= distance_to_integers(z)
            };
            if !ok {
                violations += 1;
            }
        }
    }
    MaxModulusReport {
        points: n * n,
        violations,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusInfo {
    pub b: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub radius: f64,
}

/// Per-`k` small-divisor table with Bruno sums and the constants derived
/// from them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BrunoDiagnostics {
    pub kind: &'static str,
    pub spectrum: Vec<[f64; 2]>,
    pub kmax: u32,
    pub omega: Vec<f64>,
    pub alpha: Option<Vec<f64>>,
    pub epsilon: Option<Vec<f64>>,
    /// Running partial sums of the Bruno series, `k = 1, …, kmax`.
    pub partial_sums: Vec<f64>,
    pub bruno_partial: f64,
    pub bruno_tail_lower: f64,
    /// `bruno_partial + bruno_tail_lower`.
    pub bruno_estimate: f64,
    pub gamma: f64,
    /// `e^{γ + bruno_partial}`.
    pub big_b_partial: f64,
    /// `e^{γ + bruno_estimate}`.
    #[serde(rename = "B")]
    pub big_b: f64,
    pub tail_note: String,
    pub radius: Option<RadiusInfo>,
}

pub const GAMMA_TOL: f64 = 1e-12;

impl BrunoDiagnostics {
    pub fn compute<C: Scalar>(spectrum: &Spectrum<C>, kmax: u32) -> Result<Self> {
        if kmax == 0 {
            return Err(Error::InvalidParameter("kmax must be ≥ 1".into()));
        }
        let omega = omega_sequence(spectrum, kmax)?;
        let ae = alpha_epsilon_sequence(spectrum, kmax);
        let mut partial_sums = Vec::with_capacity(omega.len());
        for k in 1..=omega.len() {
            partial_sums.push(bruno_partial(&omega[..k]));
        }
        let partial = *partial_sums.last().expect("kmax ≥ 1");
        let tail = bruno_tail_lower(&omega);
        let gamma = gamma_constant(GAMMA_TOL)?;
        Ok(BrunoDiagnostics {
            kind: spectrum.kind().as_str(),
            spectrum: spectrum
                .values()
                .iter()
                .map(|v| {
                    let z = v.to_c64();
                    [z.re, z.im]
                })
                .collect(),
            kmax,
            alpha: ae.as_ref().map(|v| v.iter().map(|p| p.0).collect()),
            epsilon: ae.as_ref().map(|v| v.iter().map(|p| p.1).collect()),
            omega,
            partial_sums,
            bruno_partial: partial,
            bruno_tail_lower: tail,
            bruno_estimate: partial + tail,
            gamma,
            big_b_partial: (gamma + partial).exp(),
            big_b: (gamma + partial + tail).exp(),
            tail_note: format!(
                "bruno_partial sums k ≤ {kmax} and is a lower bound of the Bruno series; \
                 bruno_estimate adds log(1/Ω(kmax))/(kmax+1), exact when Ω is constant from \
                 kmax on and a lower bound otherwise. B = exp(γ + bruno_estimate) bounds |S^F| \
                 for |‖F‖| ≤ kmax + 1."
            ),
            radius: None,
        })
    }

    /// Adds the radius bound `b / (B ν (4Mν + 2))` using `B = big_b`.
    pub fn with_radius(mut self, b: f64, m: f64) -> Result<Self> {
        let radius = radius_lower_bound(b, m, self.spectrum.len(), self.big_b)?;
        self.radius = Some(RadiusInfo { b, m, radius });
        Ok(self)
    }

    /// Rows `(k, Ω, α, ε, partial sum)`.
    pub fn table(&self) -> Vec<(u32, f64, Option<f64>, Option<f64>, f64)> {
        (0..self.omega.len())
            .map(|i| {
                (
                    i as u32 + 1,
                    self.omega[i],
                    self.alpha.as_ref().map(|a| a[i]),
                    self.epsilon.as_ref().map(|e| e[i]),
                    self.partial_sums[i],
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn distances() {
        assert_eq!(distance_to_integers(c(0.25)), 0.25);
        assert_eq!(distance_to_integers(c(-0.75)), 0.25);
        assert!((distance_to_integers(Complex64::new(2.0, 0.3)) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn omega_examples() {
        let field = Spectrum::new(Kind::Field, vec![c(1.0)]).unwrap();
        assert!(omega_sequence(&field, 10).unwrap().iter().all(|&w| w == 1.0));
        let q2 = Spectrum::new(Kind::Diffeo, vec![c(2.0)]).unwrap();
        let expected = 2f64.ln() / (2.0 * PI);
        for w in omega_sequence(&q2, 10).unwrap() {
            assert!((w - expected).abs() < 1e-15);
        }
        let resonant = Spectrum::new(Kind::Field, vec![c(1.0), c(-1.0)]).unwrap();
        assert!(matches!(omega(&resonant, 2), Err(Error::Resonance { .. })));
    }

    #[test]
    fn epsilon_first_value() {
        let q2 = Spectrum::new(Kind::Diffeo, vec![c(2.0)]).unwrap();
        let ae = alpha_epsilon_sequence(&q2, 1).unwrap();
        assert_eq!(ae[0].1, 1.0);
        let field = Spectrum::new(Kind::Field, vec![c(1.0)]).unwrap();
        assert!(alpha_epsilon_sequence(&field, 3).is_none());
    }

    #[test]
    fn bruno_sums() {
        assert_eq!(bruno_partial(&[1.0; 20]), 0.0);
        let two_term = bruno_partial(&[1.0, 0.5]);
        assert!((two_term - (0.5 - 1.0 / 3.0) * 2f64.ln()).abs() < 1e-15);
        let w = 0.2;
        let s = bruno_partial(&[w; 100]);
        assert!((s - (1.0 / w).ln() * 100.0 / 101.0).abs() < 1e-13);
        assert!((s + bruno_tail_lower(&[w; 100]) - (1.0 / w).ln()).abs() < 1e-13);
    }

    #[test]
    fn gamma_first_term_and_monotonicity() {
        assert!((gamma_partial(1) - 3f64.ln() / 2.0).abs() < 1e-15);
        let mut prev = 0.0;
        for k in 1..50 {
            let g = gamma_partial(k);
            assert!(g > prev);
            prev = g;
        }
        let (lo, hi) = gamma_tail_bounds(10);
        let g = gamma_constant(1e-9).unwrap();
        assert!(gamma_partial(10) + lo <= g + 1e-9 && g - 1e-9 <= gamma_partial(10) + hi);
        assert!(gamma_constant(0.0).is_err());
    }

    #[test]
    fn radius_examples() {
        assert_eq!(radius_lower_bound(1.0, 1.0, 1, 1.0).unwrap(), 1.0 / 6.0);
        assert_eq!(radius_lower_bound(3.0, 0.0, 2, 5.0).unwrap(), 3.0 / (2.0 * 2.0 * 5.0));
        assert!(radius_lower_bound(1.0, 1.0, 1, 0.5).is_err());
    }

    #[test]
    fn kappa_examples() {
        assert!((kappa(1.0).unwrap() - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((kappa(2.0).unwrap() - (5.0 - 2.0 * 6f64.sqrt())).abs() < 1e-15);
        assert!(kappa(1e-12).unwrap() > 0.99);
        assert!(kappa_sandwich_holds(1.0).unwrap());
        assert!(kappa(0.0).is_err());
    }

    #[test]
    fn max_modulus_samples() {
        let z = Complex64::new(0.0, 1.0);
        let v = ((z * Complex64::new(0.0, 2.0 * PI)).exp() - 1.0).norm();
        assert!((v - (1.0 - (-2.0 * PI).exp())).abs() < 1e-15);
        assert_eq!(max_modulus_check(41).violations, 0);
    }
}
