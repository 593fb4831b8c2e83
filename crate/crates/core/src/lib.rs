//! Risk pooling under the Cramér–Lundberg model: allocation matrices, pooled
//! claim laws, ruin probabilities and convex-order checks.

pub mod cli;
pub mod distributions;
pub mod linalg;
pub mod order_checks;
pub mod pool_model;
pub mod pooled_losses;
pub mod ruin;
pub mod scalar;
pub mod special;

pub use scalar::{Real, Scalar};

/// Exact rational used for finite-support computations.
pub type Rational = num_rational::Ratio<i64>;

pub type Severity = distributions::SeverityModel<f64>;
pub type Severity32 = distributions::SeverityModel<f32>;
pub type Pool = pool_model::PoolSpec<f64>;
pub type Pool32 = pool_model::PoolSpec<f32>;
pub type Allocation = pool_model::AllocationMatrix<f64>;
pub type ExactAllocation = pool_model::AllocationMatrix<Rational>;
pub type ExactLaw = distributions::DiscreteLaw<Rational>;
pub type Curve = ruin::RuinCurve<f64>;
