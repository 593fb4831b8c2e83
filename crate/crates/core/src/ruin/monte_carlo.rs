//! Monte Carlo ruin on the embedded claim-epoch chain.
//!
//! A path is summarized by its maximal aggregate loss `M = sup_t (S_t − c t)`,
//! observed at claim instants only (the loss falls between claims). Ruin
//! from reserve `κ` happens iff `M > κ`, so one run yields the whole curve.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::Sampler;
use crate::pooled_losses::SurplusSpec;
use crate::scalar::Real;

use super::curves::{Bounds, Method, RuinCurve};
use super::RuinError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub paths: usize,
    pub horizon_claims: usize,
    pub seed: u64,
    /// Light-tail part of the safe ceiling, in units of `mean / θ`.
    pub ceiling_multiple: f64,
    /// Heavy-tail part of the safe ceiling: the reserve `u` at which
    /// `E[(X − u)_+] / (θ E[X])` drops to this level.
    pub tail_delta: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            paths: 100_000,
            horizon_claims: 10_000,
            seed: 0x5eed_2024,
            ceiling_multiple: 30.0,
            tail_delta: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub psi: f64,
    /// Half-width of the 95% normal interval.
    pub half_width: f64,
}

/// Distance above the running maximum loss beyond which a path is treated
/// as safe.
fn safe_ceiling<T: Real>(spec: &SurplusSpec<T>, cfg: &McConfig) -> f64 {
    let mean = spec.claim.mean().to_f64_lossy();
    let theta = spec.theta().to_f64_lossy();
    let light = cfg.ceiling_multiple * mean / theta;
    // asymptotic ψ(u) ≈ E[(X − u)_+] / (θ E[X]) for subexponential claims
    let target = T::lit(cfg.tail_delta * theta * mean);
    let sl = |u: f64| spec.claim.stop_loss(T::lit(u));
    if sl(light) <= target {
        return light;
    }
    let (mut lo, mut hi) = (light, light * 2.0);
    let mut guard = 0;
    while sl(hi) > target && guard < 200 {
        lo = hi;
        hi *= 2.0;
        guard += 1;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if sl(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Maximal loss per path, capped at `cap` (any value above `cap` means
/// ruin for every reserve of interest).
fn simulate_max_losses<T: Real>(spec: &SurplusSpec<T>, cap: f64, cfg: &McConfig) -> Vec<f64> {
    let sampler = Sampler::new(&spec.claim);
    let lambda = spec.intensity.to_f64_lossy();
    let c = spec.premium_rate.to_f64_lossy();
    let drift_per_exp = c / lambda;
    let ceiling = safe_ceiling(spec, cfg);
    (0..cfg.paths as u64)
        .into_par_iter()
        .map(|path| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(path);
            let (mut loss, mut max_loss) = (0.0f64, 0.0f64);
            for _ in 0..cfg.horizon_claims {
                let e: f64 = Exp1.sample(&mut rng);
                loss += sampler.sample(&mut rng) - drift_per_exp * e;
                if loss > max_loss {
                    max_loss = loss;
                    if max_loss > cap {
                        break;
                    }
                }
                if max_loss - loss >= ceiling {
                    break;
                }
            }
            max_loss
        })
        .collect()
}

/// Estimates `ψ(κ)` on every grid point from one batch of paths.
///
/// Paths that reach the claim horizon undecided count as survivors, so
/// truncation can only bias the estimate downwards.
pub fn mc_curve<T: Real>(spec: &SurplusSpec<T>, kappa_grid: &[T], cfg: &McConfig) -> Result<RuinCurve<T>, RuinError> {
    if cfg.paths == 0 {
        return Err(RuinError::Config("paths must be >= 1".into()));
    }
    let rho = spec.rho();
    if !(rho < T::one()) {
        return Err(RuinError::NetProfit { rho: rho.to_f64_lossy() });
    }
    let kappas: Vec<f64> = kappa_grid.iter().map(|k| k.to_f64_lossy()).collect();
    let cap = kappas.iter().copied().fold(0.0, f64::max);
    let mut maxima = simulate_max_losses(spec, cap, cfg);
    maxima.sort_by(|a, b| a.partial_cmp(b).expect("finite losses"));
    let n = maxima.len() as f64;
    let mut psi = Vec::with_capacity(kappas.len());
    let mut half = Vec::with_capacity(kappas.len());
    for &k in &kappas {
        let ruined = maxima.len() - maxima.partition_point(|&m| m <= k);
        let p = ruined as f64 / n;
        psi.push(T::lit(p));
        half.push(T::lit(1.96 * (p * (1.0 - p) / n).sqrt()));
    }
    Ok(RuinCurve {
        kappa: kappa_grid.to_vec(),
        psi,
        bounds: Bounds::Confidence { half_width: half },
        method: Method::MonteCarlo,
        span: None,
    })
}

/// Single-reserve estimate.
pub fn ruin_monte_carlo<T: Real>(spec: &SurplusSpec<T>, kappa: T, cfg: &McConfig) -> Result<McEstimate, RuinError> {
    let curve = mc_curve(spec, &[kappa], cfg)?;
    let Bounds::Confidence { half_width } = &curve.bounds else {
        unreachable!("monte carlo curves carry confidence bounds")
    };
    Ok(McEstimate {
        psi: curve.psi[0].to_f64_lossy(),
        half_width: half_width[0].to_f64_lossy(),
    })
}
