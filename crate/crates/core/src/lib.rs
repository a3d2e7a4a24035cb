//! Fixed-function iteration on families of bounded functions sampled on
//! finite domains, and a split-matrix fluence map optimization solver built
//! on the same fixed-point machinery.
//!
//! * [`function_space`]: domains, functions, and the three distances.
//! * [`operators`]: self-maps and the contraction-type condition checkers.
//! * [`iteration`]: Picard iteration in the Banach, Reich and α-ψ regimes.
//! * [`sparse`], [`fmo`]: the dose matrix and the two-loop solver.
//! * [`phantom`]: deterministic synthetic instances.
//! * [`cli`]: file formats and the command-line driver.

pub mod cli;
pub mod error;
pub mod fmo;
pub mod function_space;
pub mod iteration;
pub mod operators;
pub mod phantom;
pub mod sparse;

pub use error::{Error, Result};
pub use function_space::{DiscreteFunction, Domain, DomainPoint, MetricKind};
pub use iteration::{IterationConfig, IterationMode, IterationReport};
pub use operators::{AlphaFunction, ConditionReport, OperatorSpec, PsiSpec};
