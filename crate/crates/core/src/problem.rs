//! JSON problem files.
//!
//! ```json
//! {"kind": "diffeo", "dimension": 1, "spectrum": [[2, 0]],
//!  "nonlinear": [{"component": 1, "exponent": [2], "coeff": [1, 0]}],
//!  "truncation": 6, "mode": "rational"}
//! ```
//!
//! Components are 1-based. In rational mode coefficients may be written as
//! `"p/q"` strings; in float mode they are numbers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::armould::{Kind, Spectrum};
use crate::error::{Error, Result};
use crate::linearizer::ProblemSpec;
use crate::multi_index::MultiIndex;
use crate::scalar::{Exact, Scalar};
use crate::series::{Series, SeriesTuple};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpecFile {
    pub kind: String,
    pub dimension: usize,
    pub spectrum: Vec<[Value; 2]>,
    #[serde(default)]
    pub nonlinear: Vec<NonlinearTerm>,
    pub truncation: u32,
    #[serde(default = "default_mode")]
    pub mode: String,
}

fn default_mode() -> String {
    "float".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearTerm {
    pub component: usize,
    pub exponent: Vec<i32>,
    pub coeff: [Value; 2],
}

/// A validated problem in the requested arithmetic.
#[derive(Clone, Debug)]
pub enum LoadedSpec {
    Rational(ProblemSpec<Exact>),
    Float(ProblemSpec<Complex64>),
}

impl LoadedSpec {
    pub fn dim(&self) -> usize {
        match self {
            LoadedSpec::Rational(s) => s.dim(),
            LoadedSpec::Float(s) => s.dim(),
        }
    }

    pub fn cap(&self) -> u32 {
        match self {
            LoadedSpec::Rational(s) => s.cap(),
            LoadedSpec::Float(s) => s.cap(),
        }
    }

    pub fn mode(&self) -> &'static str {
        match self {
            LoadedSpec::Rational(_) => "rational",
            LoadedSpec::Float(_) => "float",
        }
    }

    pub fn to_float(&self) -> ProblemSpec<Complex64> {
        match self {
            LoadedSpec::Rational(s) => s.to_c64(),
            LoadedSpec::Float(s) => s.clone(),
        }
    }
}

impl ProblemSpecFile {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Shape checks that do not depend on the arithmetic.
    fn check_shape(&self) -> Result<Kind> {
        let kind: Kind = self.kind.parse()?;
        if self.dimension == 0 {
            return Err(Error::Parse("dimension must be ≥ 1".into()));
        }
        if self.spectrum.len() != self.dimension {
            return Err(Error::Parse(format!(
                "spectrum has {} entries, dimension is {}",
                self.spectrum.len(),
                self.dimension
            )));
        }
        for (k, t) in self.nonlinear.iter().enumerate() {
            if t.component == 0 || t.component > self.dimension {
                return Err(Error::Parse(format!(
                    "nonlinear[{k}].component = {} is outside 1..={}",
                    t.component, self.dimension
                )));
            }
            if t.exponent.len() != self.dimension {
                return Err(Error::Parse(format!(
                    "nonlinear[{k}].exponent has length {}, dimension is {}",
                    t.exponent.len(),
                    self.dimension
                )));
            }
            let m = MultiIndex::new(t.exponent.clone());
            if !m.is_nonneg() || m.total() < 2 {
                return Err(Error::Parse(format!(
                    "nonlinear[{k}].exponent {m} must be non-negative with total degree ≥ 2"
                )));
            }
        }
        Ok(kind)
    }

    fn build<C: Scalar>(&self, kind: Kind) -> Result<ProblemSpec<C>> {
        let values = self
            .spectrum
            .iter()
            .map(|[re, im]| C::from_json_parts(re, im))
            .collect::<Result<Vec<_>>>()?;
        let spectrum = Spectrum::new(kind, values)?;
        let dim = self.dimension;
        let mut comps: Vec<Vec<(MultiIndex, C)>> = vec![Vec::new(); dim];
        for t in &self.nonlinear {
            let c = C::from_json_parts(&t.coeff[0], &t.coeff[1])?;
            comps[t.component - 1].push((MultiIndex::new(t.exponent.clone()), c));
        }
        let a = SeriesTuple::new(
            comps
                .into_iter()
                .map(|terms| Series::from_terms(dim, self.truncation, terms))
                .collect::<Result<Vec<_>>>()?,
        )?;
        ProblemSpec::new(spectrum, a)
    }

    pub fn load(&self) -> Result<LoadedSpec> {
        let kind = self.check_shape()?;
        match self.mode.as_str() {
            "rational" => Ok(LoadedSpec::Rational(self.build(kind)?)),
            "float" => Ok(LoadedSpec::Float(self.build(kind)?)),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_rational_sample() {
        let text = r#"{"kind":"diffeo","dimension":1,"spectrum":[[2,0]],
            "nonlinear":[{"component":1,"exponent":[2],"coeff":["1","0"]}],
            "truncation":3,"mode":"rational"}"#;
        let spec = ProblemSpecFile::from_json_str(text).unwrap().load().unwrap();
        assert_eq!(spec.mode(), "rational");
        assert_eq!(spec.cap(), 3);
    }

    #[test]
    fn rejects_bad_fields() {
        let bad_component = r#"{"kind":"field","dimension":1,"spectrum":[[1,0]],
            "nonlinear":[{"component":2,"exponent":[2],"coeff":[1,0]}],"truncation":3}"#;
        assert!(matches!(
            ProblemSpecFile::from_json_str(bad_component).unwrap().load(),
            Err(Error::Parse(_))
        ));
        let linear = r#"{"kind":"field","dimension":1,"spectrum":[[1,0]],
            "nonlinear":[{"component":1,"exponent":[1],"coeff":[1,0]}],"truncation":3}"#;
        assert!(ProblemSpecFile::from_json_str(linear).unwrap().load().is_err());
        assert!(ProblemSpecFile::from_json_str("{\"kind\":").is_err());
    }

    #[test]
    fn resonance_surfaces_as_its_own_error() {
        let text = r#"{"kind":"diffeo","dimension":2,"spectrum":[[2,0],[4,0]],
            "nonlinear":[{"component":2,"exponent":[2,0],"coeff":[1,0]}],
            "truncation":3,"mode":"rational"}"#;
        let err = ProblemSpecFile::from_json_str(text).unwrap().load().unwrap_err();
        assert!(matches!(err, Error::Resonance { .. }));
    }
}
