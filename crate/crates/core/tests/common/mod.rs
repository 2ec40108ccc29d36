#![allow(dead_code)]

use armlin::scalar::relative_gap;
use armlin::{Exact, MultiIndex, ProblemSpec, ProblemSpecFile, Scalar, Series, SeriesTuple};
use num_complex::Complex64;
use proptest::test_runner::{RngAlgorithm, TestRng};
use proptest::prelude::Rng;
use serde_json::{json, Value};

pub const GOLDEN: f64 = 1.618_033_988_749_895;

/// One entry of the linearization test matrix.
pub struct MatrixSpec {
    pub name: &'static str,
    pub file: ProblemSpecFile,
    /// Whether the spectrum and coefficients are exact rationals.
    pub rational: bool,
}

impl MatrixSpec {
    pub fn rational(&self) -> Option<ProblemSpec<Exact>> {
        if !self.rational {
            return None;
        }
        let mut f = self.file.clone();
        f.mode = "rational".into();
        match f.load().expect(self.name) {
            armlin::LoadedSpec::Rational(s) => Some(s),
            armlin::LoadedSpec::Float(_) => unreachable!(),
        }
    }

    pub fn float(&self) -> ProblemSpec<Complex64> {
        let mut f = self.file.clone();
        f.mode = "float".into();
        f.load().expect(self.name).to_float()
    }
}

fn num(s: &str) -> Value {
    match s.parse::<f64>() {
        Ok(x) if !s.contains('/') => json!(x),
        _ => json!(s),
    }
}

/// `spectrum`: `(re, im)` strings; `terms`: `(component, exponent, re, im)`.
fn spec(
    name: &'static str,
    kind: &str,
    spectrum: &[(&str, &str)],
    terms: &[(usize, &[i32], &str, &str)],
    truncation: u32,
    rational: bool,
) -> MatrixSpec {
    let part = |s: &str| if rational { json!(s) } else { num(s) };
    let file = ProblemSpecFile {
        kind: kind.into(),
        dimension: spectrum.len(),
        spectrum: spectrum.iter().map(|(r, i)| [part(r), part(i)]).collect(),
        nonlinear: terms
            .iter()
            .map(|(c, e, r, i)| armlin::problem::NonlinearTerm {
                component: *c,
                exponent: e.to_vec(),
                coeff: [part(r), part(i)],
            })
            .collect(),
        truncation,
        mode: "float".into(),
    };
    MatrixSpec { name, file, rational }
}

/// Twelve problems covering both kinds, `ν ∈ {1,2,3}` and `K ≤ 8`.
pub fn test_matrix() -> Vec<MatrixSpec> {
    let phi = GOLDEN.to_string();
    let theta = GOLDEN - 1.0;
    let rot = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * theta);
    let (rot_re, rot_im) = (rot.re.to_string(), rot.im.to_string());
    let leak = |s: String| -> &'static str { Box::leak(s.into_boxed_str()) };
    vec![
        spec("diffeo q=2, a=z^2", "diffeo", &[("2", "0")], &[(1, &[2], "1", "0")], 8, true),
        spec("field l=1, a=z^2", "field", &[("1", "0")], &[(1, &[2], "1", "0")], 8, true),
        spec(
            "diffeo q=(2,3)",
            "diffeo",
            &[("2", "0"), ("3", "0")],
            &[(1, &[0, 2], "1", "0"), (2, &[2, 1], "-1/2", "0")],
            6,
            true,
        ),
        spec(
            "field l=(1,golden)",
            "field",
            &[("1", "0"), (leak(phi), "0")],
            &[(1, &[0, 2], "1", "0"), (2, &[1, 1], "0.5", "0"), (1, &[3, 0], "-0.25", "0")],
            6,
            false,
        ),
        spec(
            "diffeo q=3, a=z^2+z^3",
            "diffeo",
            &[("3", "0")],
            &[(1, &[2], "1", "0"), (1, &[3], "1", "0")],
            8,
            true,
        ),
        spec(
            "field l=(2,3)",
            "field",
            &[("2", "0"), ("3", "0")],
            &[(1, &[1, 1], "1", "0"), (2, &[2, 0], "1", "0"), (2, &[0, 3], "2/3", "0")],
            6,
            true,
        ),
        spec(
            "diffeo q=(2,3,5)",
            "diffeo",
            &[("2", "0"), ("3", "0"), ("5", "0")],
            &[(1, &[0, 1, 1], "1", "0"), (3, &[2, 0, 0], "-1", "0"), (2, &[1, 0, 1], "1/3", "0")],
            5,
            true,
        ),
        spec(
            "field l=(3,5,7)",
            "field",
            &[("3", "0"), ("5", "0"), ("7", "0")],
            &[(2, &[1, 1, 0], "1", "0"), (3, &[0, 2, 0], "1/2", "0"), (1, &[0, 0, 2], "2", "0")],
            5,
            true,
        ),
        spec(
            "diffeo q=(1+i,2)",
            "diffeo",
            &[("1", "1"), ("2", "0")],
            &[(1, &[0, 2], "1", "1"), (2, &[1, 1], "1/2", "0")],
            5,
            true,
        ),
        spec(
            "diffeo q=e^(2 pi i theta), golden theta",
            "diffeo",
            &[(leak(rot_re), leak(rot_im))],
            &[(1, &[2], "1", "0"), (1, &[3], "0.5", "-0.5")],
            8,
            false,
        ),
        spec(
            "field l=i",
            "field",
            &[("0", "1")],
            &[(1, &[2], "1", "0"), (1, &[3], "0", "1")],
            8,
            true,
        ),
        spec(
            "diffeo q=(1/2,1/3)",
            "diffeo",
            &[("1/2", "0"), ("1/3", "0")],
            &[(1, &[1, 1], "1", "0"), (2, &[2, 0], "-1", "0"), (2, &[0, 2], "1/4", "0")],
            6,
            true,
        ),
    ]
}

/// Largest coefficientwise relative gap between two float tuples.
pub fn max_relative_gap(a: &SeriesTuple<Complex64>, b: &SeriesTuple<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for (x, y) in a.components().iter().zip(b.components()) {
        for (m, _) in x.terms().chain(y.terms()) {
            worst = worst.max(relative_gap(x.coeff(m), y.coeff(m)));
        }
    }
    worst
}

pub fn rng(seed: u8) -> TestRng {
    TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32])
}

/// Small rational in `{-3, …, 3} / {1, 2, 3}`, never zero.
pub fn small_rational<C: Scalar>(rng: &mut TestRng) -> C {
    loop {
        let p = (rng.next_u32() % 7) as i64 - 3;
        let q = (rng.next_u32() % 3) as i64 + 1;
        if p != 0 {
            return C::from_ratio(p, q);
        }
    }
}

/// A random nonlinear part with `terms` monomials per component, degrees in `2..=max_degree`.
pub fn random_nonlinear<C: Scalar>(
    rng: &mut TestRng,
    dim: usize,
    cap: u32,
    max_degree: u32,
    terms: usize,
) -> SeriesTuple<C> {
    let comps = (0..dim)
        .map(|_| {
            let mut ts = Vec::new();
            for _ in 0..terms {
                let deg = 2 + rng.next_u32() % (max_degree - 1);
                let monos = MultiIndex::monomials_of_degree(dim, deg);
                let m = monos[rng.next_u32() as usize % monos.len()].clone();
                ts.push((m, small_rational::<C>(rng)));
            }
            Series::from_terms(dim, cap, ts).unwrap()
        })
        .collect();
    SeriesTuple::new(comps).unwrap()
}

/// A random polynomial with a constant term, used as a test function.
pub fn random_polynomial<C: Scalar>(rng: &mut TestRng, dim: usize, cap: u32, terms: usize) -> Series<C> {
    let mut ts = vec![(MultiIndex::zero(dim), small_rational::<C>(rng))];
    for _ in 0..terms {
        let deg = rng.next_u32() % (cap + 1);
        let monos = MultiIndex::monomials_of_degree(dim, deg);
        let m = monos[rng.next_u32() as usize % monos.len()].clone();
        ts.push((m, small_rational::<C>(rng)));
    }
    Series::from_terms(dim, cap, ts).unwrap()
}

/// `z ↦ f(B z)`: the coefficient of `z^m` is multiplied by `B^{|m|}`.
pub fn scale_argument<C: Scalar>(f: &Series<C>, b: &C) -> Series<C> {
    let ts = f
        .terms()
        .map(|(m, c)| (m.clone(), c.clone() * b.pow_int(m.total()).unwrap()))
        .collect::<Vec<_>>();
    Series::from_terms(f.dim(), f.cap(), ts).unwrap()
}

/// Every decoration of `ν` variables with `1 ≤ |n| ≤ max_total`.
pub fn all_decorations(dim: usize, max_total: i64) -> Vec<MultiIndex> {
    MultiIndex::decorations_up_to(dim, max_total)
}
