//! Tree-expansion linearization of analytic germs with small divisors.
//!
//! The crate is organised bottom-up:
//!
//! * [`series`]: truncated multivariate power series and their composition;
//! * [`forest`]: decorated rooted forests, admissible cuts and enumeration;
//! * [`coarmould`]: the differential operators `D_F(a)` attached to forests;
//! * [`armould`]: scalar weights on forests and the tree expansion `Σ A^F D_F`;
//! * [`linearizer`]: linearizing transformations and majorant series;
//! * [`bruno`]: small-divisor sequences, Bruno sums and explicit bounds;
//! * [`problem`]: JSON problem files;
//! * [`verify`]: invariant suites over forest sweeps.

pub mod armould;
pub mod bruno;
pub mod coarmould;
pub mod error;
pub mod forest;
pub mod linearizer;
pub mod multi_index;
pub mod problem;
pub mod scalar;
pub mod series;
pub mod verify;

pub use armould::{tree_expand, Armould, Kind, LinearizingArmould, Spectrum, TreeExpansion};
pub use bruno::BrunoDiagnostics;
pub use coarmould::{Coarmould, HomogeneousOperator, NonlinearPart, VanishingOracle};
pub use error::{Error, Result};
pub use linearizer::{linearize_recursive, linearize_tree, LinearizationResult, Method, ProblemSpec};
pub use forest::{enumerate_forests, enumerate_trees, Cut, Forest, ForestFilter, Tree};
pub use multi_index::MultiIndex;
pub use problem::{LoadedSpec, ProblemSpecFile};
pub use scalar::{Exact, Scalar};
pub use series::{Derived, Series, SeriesTuple};
