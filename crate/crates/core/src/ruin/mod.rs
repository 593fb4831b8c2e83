//! Infinite-time ruin probabilities.
//!
//! Four routes: the exponential closed form, the mixture-of-exponentials
//! closed form, the Pollaczek–Khinchine representation evaluated by Panjer
//! recursion with two-sided discretization bounds, and Monte Carlo on the
//! maximal aggregate loss.

pub mod closed_form;
pub mod curves;
pub mod monte_carlo;
pub mod panjer;

use thiserror::Error;

use crate::distributions::DistributionError;
use crate::pooled_losses::SurplusError;

pub use closed_form::{mixture_expansion, ruin_exponential, ruin_mixture_exponential, MixtureExpansion};
pub use curves::{ruin_curves, Bounds, CurveOptions, KappaGrid, Method, MethodChoice, ParticipantCurves, RuinCurve};
pub use monte_carlo::{mc_curve, ruin_monte_carlo, McConfig, McEstimate};
pub use panjer::{ruin_pk_panjer, PanjerConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuinError {
    #[error("{method} needs {needs}, got {law}")]
    MethodMismatch {
        method: &'static str,
        needs: &'static str,
        law: String,
    },
    #[error("net profit condition fails (rho = {rho})")]
    NetProfit { rho: f64 },
    #[error("no sign change bracketing Lundberg root {index} in ({lo}, {hi})")]
    RootBracketing { index: usize, lo: f64, hi: f64 },
    #[error("coefficient system is singular")]
    SingularCoefficients,
    #[error("grid needs {needed} atoms, cap is {cap}")]
    GridOverflow { needed: usize, cap: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Surplus(#[from] SurplusError),
}
