//! Resampling-based ironing: turn any black-box welfare approximation
//! algorithm for single-parameter agents into a Bayesian incentive compatible
//! mechanism.
//!
//! The crate is organised bottom-up:
//!
//! - [`prior`], [`rng`], [`model`] and [`algorithm`]: shared domain types
//!   (finite-support product priors, seeded random streams, allocations, cost
//!   models and the algorithm-oracle interface).
//! - [`algorithms`]: a zoo of concrete oracles the reduction is exercised on.
//! - [`ideal`]: exact interim curves, the probability-space hull and the
//!   ironed algorithm over finite-support priors.
//! - [`oracle`]: the sampling-based reduction (discretization, estimation,
//!   statistical ironing, stair mixing).
//! - [`payments`], [`verify`]: payment rules and audits.
//! - [`counterexamples`]: executable negative examples.

pub mod algorithm;
pub mod algorithms;
pub mod counterexamples;
pub mod error;
pub mod ideal;
pub mod model;
pub mod oracle;
pub mod payments;
pub mod prior;
pub mod rng;
pub mod verify;

pub use algorithm::{Algorithm, Lottery, Structure, ValueKernel};
pub use error::{Error, Result};
pub use ideal::{CumulativeCurve, CurveMode, InterimCurve, IntervalSet, ValueInterval};
pub use model::{brute_force_opt, welfare, Allocation, CostModel, ValuationProfile};
pub use oracle::{EstimatedRule, PieceStructure, StairSets};
pub use payments::MechanismOutcome;
pub use prior::{DiscreteDistribution, ProductPrior};
pub use rng::RandomStream;
pub use verify::AuditReport;
