//! Exact verification and simulation of the exchangeable fragmentation-coalescence
//! process whose reversible law is the two-parameter Poisson-Dirichlet distribution.
//!
//! Formulas are generic over [`Scalar`]: instantiate with [`Rational`] for exact
//! checks or with `f64` for simulation. The aliases below name the usual choices.

pub mod chain;
pub mod eppf;
pub mod error;
pub mod exact;
pub mod partitions;
pub mod quadrature;
pub mod rates;
pub mod samplers;
pub mod scalar;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use partitions::{PartitionShape, SetPartition};
pub use scalar::{format_rational, parse_rational, Rational, Scalar};

pub type ExactParams = eppf::Params<Rational>;
pub type FloatParams = eppf::Params<f64>;
pub type ExactRateTable = rates::RateTable<Rational>;
pub type FloatRateTable = rates::RateTable<f64>;
pub type ExactGenerator = chain::Generator<Rational>;
pub type FloatGenerator = chain::Generator<f64>;
pub type ExactDist = chain::DistVector<Rational>;
pub type FloatDist = chain::DistVector<f64>;
