//! Pollaczek–Khinchine route: `ψ(κ) = P(L > κ)` where `L` is a geometric sum
//! of ladder heights drawn from the equilibrium claim law. Discretizing the
//! ladder law downwards and upwards brackets `ψ` from both sides.

use serde::{Deserialize, Serialize};

use crate::distributions::{equilibrium_discretize_upto, DiscretizedDist, Rounding};
use crate::pooled_losses::SurplusSpec;
use crate::scalar::Real;

use super::curves::{Bounds, Method, RuinCurve};
use super::RuinError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PanjerConfig {
    /// Grid span; `None` means `mean / span_divisor`.
    pub h: Option<f64>,
    pub span_divisor: f64,
    pub epsilon: f64,
    pub atom_cap: usize,
}

impl Default for PanjerConfig {
    fn default() -> Self {
        Self {
            h: None,
            span_divisor: 500.0,
            epsilon: 1e-10,
            atom_cap: 2_000_000,
        }
    }
}

impl PanjerConfig {
    pub fn span_for<T: Real>(&self, spec: &SurplusSpec<T>) -> T {
        match self.h {
            Some(h) => T::lit(h),
            None => spec.claim.mean() / T::lit(self.span_divisor),
        }
    }
}

/// Cumulative distribution `P(L ≤ k h)` for `k = 0..=max_index`, with `L` a
/// geometric(ρ) sum of iid copies of the lattice law `f`.
///
/// The recursion is the Panjer scheme for the geometric counting law,
/// evaluated in scatter form so the inner loop is a contiguous axpy.
fn geometric_compound_cdf<T: Real>(rho: T, f: &DiscretizedDist<T>, max_index: usize) -> Vec<T> {
    let atoms = &f.atoms;
    let f0 = atoms.first().copied().unwrap_or_else(T::zero);
    let denom = T::one() - rho * f0;
    let scale = rho / denom;
    let mut acc = vec![T::zero(); max_index + 1];
    let mut cdf = Vec::with_capacity(max_index + 1);
    let mut running = T::zero();
    let tail = &atoms[1.min(atoms.len())..];
    for k in 0..=max_index {
        let g = if k == 0 {
            (T::one() - rho) / denom
        } else {
            scale * acc[k]
        };
        running += g;
        cdf.push(running);
        let end = (k + 1 + tail.len()).min(max_index + 1);
        if end > k + 1 {
            for (slot, &fj) in acc[k + 1..end].iter_mut().zip(tail) {
                *slot += g * fj;
            }
        }
    }
    cdf
}

fn lattice_index<T: Real>(kappa: T, span: T) -> usize {
    (kappa / span + T::lit(1e-9)).floor().to_usize().unwrap_or(0)
}

/// Ruin curve with two-sided bounds; `psi` is their midpoint.
pub fn ruin_pk_panjer<T: Real>(
    spec: &SurplusSpec<T>,
    kappa_grid: &[T],
    config: &PanjerConfig,
) -> Result<RuinCurve<T>, RuinError> {
    let rho = spec.rho();
    if !(rho < T::one()) {
        return Err(RuinError::NetProfit { rho: rho.to_f64_lossy() });
    }
    let span = config.span_for(spec);
    if !(span > T::zero() && span.is_finite()) {
        return Err(RuinError::Config(format!("span {span} must be > 0")));
    }
    if kappa_grid.iter().any(|k| *k < T::zero()) {
        return Err(RuinError::Config("reserves must be >= 0".into()));
    }
    let kappa_max = kappa_grid.iter().copied().fold(T::zero(), T::max);
    let max_index = lattice_index(kappa_max, span) + 1;
    if max_index > config.atom_cap {
        return Err(RuinError::GridOverflow {
            needed: max_index,
            cap: config.atom_cap,
        });
    }
    let eps = T::lit(config.epsilon);
    let low = equilibrium_discretize_upto(&spec.claim, span, eps, Rounding::Lower, max_index)?;
    let up = equilibrium_discretize_upto(&spec.claim, span, eps, Rounding::Upper, max_index)?;
    let cdf_low = geometric_compound_cdf(rho, &low, max_index);
    let cdf_up = geometric_compound_cdf(rho, &up, max_index);

    let mut lower = Vec::with_capacity(kappa_grid.len());
    let mut upper = Vec::with_capacity(kappa_grid.len());
    let mut psi = Vec::with_capacity(kappa_grid.len());
    for &kappa in kappa_grid {
        let k = lattice_index(kappa, span).min(max_index);
        // stochastically smaller ladder heights give the smaller tail
        let lo = (T::one() - cdf_low[k]).max(T::zero());
        let hi = (T::one() - cdf_up[k]).min(T::one()).max(lo);
        lower.push(lo);
        upper.push(hi);
        psi.push((lo + hi) / T::lit(2.0));
    }
    Ok(RuinCurve {
        kappa: kappa_grid.to_vec(),
        psi,
        bounds: Bounds::Sandwich { lower, upper },
        method: Method::Panjer,
        span: Some(span),
    })
}
