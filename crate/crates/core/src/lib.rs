//! Numerical toolkit for sparse domination and two-weight commutator bounds
//! on finite spaces of homogeneous type.
//!
//! The crate builds finite quasi-metric measure spaces, certifies systems of
//! dyadic cubes on them, evaluates maximal operators, maximal commutators and
//! sparse operators, runs the stopping-time sparse domination of the maximal
//! commutator, and checks the weighted inequalities that surround it.
//!
//! Every supremum over balls runs over the finite list of canonical balls, so
//! all characteristics are exact maxima. Operator norms are estimated from
//! below by probing.

pub mod dyadic;
pub mod error;
pub mod generators;
pub mod operators;
pub mod report;
pub mod space;
pub mod sparse;
pub mod suite;
pub mod verify;
pub mod weights;

pub use dyadic::{AdjacentSystems, DyadicCube, DyadicSystem};
pub use error::{Error, Result};
pub use generators::FunctionSpec;
pub use operators::OperatorResult;
pub use report::{CheckKind, CheckRow, Report};
pub use space::{Ball, PointFunction, QuasiMetricSpace, Role, SpaceKind, SpaceParams};
pub use sparse::{DominationCertificate, SparseFamily};
pub use suite::{ScenarioConfig, SuiteKind};
pub use weights::{BloomWeight, Weight};
