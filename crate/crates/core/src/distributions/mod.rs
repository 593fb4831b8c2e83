//! Claim-severity laws and the primitives built on them.
//!
//! [`SeverityModel`] is the parametric/discrete law used throughout; the
//! exact finite law [`DiscreteLaw`] backs the atom paths and works over any
//! [`Scalar`](crate::scalar::Scalar). Equilibrium discretization for the
//! Panjer route lives in [`discretize`], sampling in [`sampler`].

pub mod discrete;
pub mod discretize;
pub mod sampler;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::special::{gamma_p, gamma_q, std_normal_cdf};

pub use discrete::DiscreteLaw;
pub use discretize::{equilibrium_discretize, equilibrium_discretize_upto, DiscretizedDist, Rounding};
pub use sampler::Sampler;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("law has non-positive or non-finite mean")]
    UnboundedMean,
    #[error("truncation mass {0} outside (0, 1e-3]")]
    BadTruncation(f64),
    #[error("discretization needs more than {cap} atoms")]
    AtomCapExceeded { cap: usize },
}

/// A claim-size law on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeverityModel<T> {
    Exponential { rate: T },
    /// `ln X ~ N(mu, sigma2)`.
    #[serde(rename = "lognormal", alias = "log_normal")]
    LogNormal { mu: T, sigma2: T },
    Gamma { shape: T, rate: T },
    /// `(value, probability)` pairs.
    DiscreteAtoms { atoms: Vec<(T, T)> },
    /// `X = scale_K · B_K` with `P(K = k) = weight_k`.
    ScaledMixture { components: Vec<MixtureComponent<T>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent<T> {
    pub weight: T,
    pub scale: T,
    pub base: Box<SeverityModel<T>>,
}

/// Structural fingerprint of a normalized law `X / E[X]`.
///
/// Two severities belong to a common scale family exactly when their keys
/// compare equal.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeKey<T> {
    Exponential,
    Gamma { shape: T },
    LogNormal { sigma2: T },
    Discrete(Vec<(T, T)>),
    /// Mixtures and anything else: no structural criterion.
    Unclassified,
}

impl<T: Real> SeverityModel<T> {
    pub fn exponential(rate: T) -> Result<Self, DistributionError> {
        let m = Self::Exponential { rate };
        m.validate()?;
        Ok(m)
    }

    pub fn lognormal(mu: T, sigma2: T) -> Result<Self, DistributionError> {
        let m = Self::LogNormal { mu, sigma2 };
        m.validate()?;
        Ok(m)
    }

    pub fn gamma(shape: T, rate: T) -> Result<Self, DistributionError> {
        let m = Self::Gamma { shape, rate };
        m.validate()?;
        Ok(m)
    }

    pub fn discrete(atoms: Vec<(T, T)>) -> Result<Self, DistributionError> {
        let m = Self::DiscreteAtoms { atoms };
        m.validate()?;
        Ok(m)
    }

    /// Point mass at zero. Only valid as the base of a zero-scale component.
    pub fn zero() -> Self {
        Self::DiscreteAtoms {
            atoms: vec![(T::zero(), T::one())],
        }
    }

    /// Builds a scaled mixture, folding every zero-scale component (and every
    /// zero-weight one) into a single atom at 0.
    pub fn mixture(
        components: impl IntoIterator<Item = (T, T, SeverityModel<T>)>,
    ) -> Result<Self, DistributionError> {
        let mut zero_mass = T::zero();
        let mut kept = Vec::new();
        for (weight, scale, base) in components {
            if weight < T::zero() || scale < T::zero() || !weight.is_finite() || !scale.is_finite()
            {
                return Err(DistributionError::InvalidParameter(format!(
                    "mixture component weight {weight}, scale {scale}"
                )));
            }
            if weight.is_zero() {
                continue;
            }
            if scale.is_zero() {
                zero_mass += weight;
            } else {
                kept.push(MixtureComponent {
                    weight,
                    scale,
                    base: Box::new(base),
                });
            }
        }
        if zero_mass > T::zero() {
            kept.insert(
                0,
                MixtureComponent {
                    weight: zero_mass,
                    scale: T::zero(),
                    base: Box::new(Self::zero()),
                },
            );
        }
        let m = Self::ScaledMixture { components: kept };
        m.validate()?;
        Ok(m)
    }

    /// Checks parameter ranges, normalization and mean positivity.
    pub fn validate(&self) -> Result<(), DistributionError> {
        self.validate_inner(false)
    }

    fn validate_inner(&self, allow_zero_mean: bool) -> Result<(), DistributionError> {
        let bad = |msg: String| Err(DistributionError::InvalidParameter(msg));
        match self {
            Self::Exponential { rate } => {
                if !(*rate > T::zero() && rate.is_finite()) {
                    return bad(format!("exponential rate {rate} must be > 0"));
                }
            }
            Self::LogNormal { mu, sigma2 } => {
                if !mu.is_finite() || !(*sigma2 > T::zero() && sigma2.is_finite()) {
                    return bad(format!("lognormal mu {mu}, sigma2 {sigma2}"));
                }
            }
            Self::Gamma { shape, rate } => {
                if !(*shape > T::zero() && *rate > T::zero() && shape.is_finite() && rate.is_finite())
                {
                    return bad(format!("gamma shape {shape}, rate {rate}"));
                }
            }
            Self::DiscreteAtoms { atoms } => {
                if atoms.iter().any(|(v, p)| !v.is_finite() || !p.is_finite() || p.is_zero()) {
                    return bad("discrete atoms must be finite with probability in (0, 1]".into());
                }
                DiscreteLaw::new(atoms.iter().copied())?;
            }
            Self::ScaledMixture { components } => {
                if components.is_empty() {
                    return bad("mixture needs at least one component".into());
                }
                let mut total = T::zero();
                for c in components {
                    if c.weight < T::zero() || c.weight > T::one() || c.scale < T::zero() {
                        return bad(format!(
                            "mixture component weight {}, scale {}",
                            c.weight, c.scale
                        ));
                    }
                    total += c.weight;
                    c.base.validate_inner(c.scale.is_zero())?;
                }
                if (total - T::one()).abs() > T::normalization_tol() {
                    return Err(DistributionError::NotNormalized {
                        sum: total.to_f64_lossy(),
                    });
                }
                return Ok(());
            }
        }
        let m = self.mean();
        if !m.is_finite() || m < T::zero() || (m.is_zero() && !allow_zero_mean) {
            return Err(DistributionError::UnboundedMean);
        }
        Ok(())
    }

    pub fn mean(&self) -> T {
        match self {
            Self::Exponential { rate } => rate.recip(),
            Self::LogNormal { mu, sigma2 } => (*mu + *sigma2 / T::lit(2.0)).exp(),
            Self::Gamma { shape, rate } => *shape / *rate,
            Self::DiscreteAtoms { atoms } => atoms.iter().map(|&(v, p)| v * p).sum(),
            Self::ScaledMixture { components } => components
                .iter()
                .filter(|c| !c.scale.is_zero())
                .map(|c| c.weight * c.scale * c.base.mean())
                .sum(),
        }
    }

    pub fn second_moment(&self) -> T {
        match self {
            Self::Exponential { rate } => T::lit(2.0) / (*rate * *rate),
            Self::LogNormal { mu, sigma2 } => (T::lit(2.0) * (*mu + *sigma2)).exp(),
            Self::Gamma { shape, rate } => *shape * (*shape + T::one()) / (*rate * *rate),
            Self::DiscreteAtoms { atoms } => atoms.iter().map(|&(v, p)| v * v * p).sum(),
            Self::ScaledMixture { components } => components
                .iter()
                .filter(|c| !c.scale.is_zero())
                .map(|c| c.weight * c.scale * c.scale * c.base.second_moment())
                .sum(),
        }
    }

    pub fn variance(&self) -> T {
        let m = self.mean();
        (self.second_moment() - m * m).max(T::zero())
    }

    /// `P(X ≤ x)`, right-continuous.
    pub fn cdf(&self, x: T) -> T {
        match self {
            Self::DiscreteAtoms { atoms } => atoms
                .iter()
                .filter(|(v, _)| *v <= x)
                .map(|&(_, p)| p)
                .sum::<T>()
                .min(T::one()),
            Self::ScaledMixture { components } => components
                .iter()
                .map(|c| {
                    if c.scale.is_zero() {
                        if x >= T::zero() {
                            c.weight
                        } else {
                            T::zero()
                        }
                    } else {
                        c.weight * c.base.cdf(x / c.scale)
                    }
                })
                .sum::<T>()
                .min(T::one()),
            _ => {
                if x <= T::zero() {
                    T::zero()
                } else {
                    self.continuous_cdf(x)
                }
            }
        }
    }

    fn continuous_cdf(&self, x: T) -> T {
        match self {
            Self::Exponential { rate } => -(-*rate * x).exp_m1(),
            Self::LogNormal { mu, sigma2 } => std_normal_cdf((x.ln() - *mu) / sigma2.sqrt()),
            Self::Gamma { shape, rate } => gamma_p(*shape, *rate * x),
            _ => unreachable!("continuous_cdf called on a non-continuous law"),
        }
    }

    /// `P(X > x)`, evaluated without cancellation in the tails.
    pub fn survival(&self, x: T) -> T {
        if x < T::zero() {
            return T::one();
        }
        match self {
            Self::Exponential { rate } => (-*rate * x).exp(),
            Self::LogNormal { mu, sigma2 } => {
                if x.is_zero() {
                    T::one()
                } else {
                    std_normal_cdf((*mu - x.ln()) / sigma2.sqrt())
                }
            }
            Self::Gamma { shape, rate } => gamma_q(*shape, *rate * x),
            Self::DiscreteAtoms { atoms } => atoms
                .iter()
                .filter(|(v, _)| *v > x)
                .map(|&(_, p)| p)
                .sum(),
            Self::ScaledMixture { components } => components
                .iter()
                .filter(|c| !c.scale.is_zero())
                .map(|c| c.weight * c.base.survival(x / c.scale))
                .sum(),
        }
    }

    /// Stop-loss transform `E[(X − t)_+]`.
    pub fn stop_loss(&self, t: T) -> T {
        if t <= T::zero() {
            return self.mean() - t;
        }
        match self {
            Self::Exponential { rate } => (-*rate * t).exp() / *rate,
            Self::LogNormal { mu, sigma2 } => {
                let sigma = sigma2.sqrt();
                let d1 = (*mu + *sigma2 - t.ln()) / sigma;
                let d2 = d1 - sigma;
                (self.mean() * std_normal_cdf(d1) - t * std_normal_cdf(d2)).max(T::zero())
            }
            Self::Gamma { shape, rate } => {
                let rt = *rate * t;
                (*shape / *rate * gamma_q(*shape + T::one(), rt) - t * gamma_q(*shape, rt))
                    .max(T::zero())
            }
            Self::DiscreteAtoms { atoms } => atoms
                .iter()
                .map(|&(v, p)| (v - t).max(T::zero()) * p)
                .sum(),
            Self::ScaledMixture { components } => components
                .iter()
                .filter(|c| !c.scale.is_zero())
                .map(|c| c.weight * c.scale * c.base.stop_loss(t / c.scale))
                .sum(),
        }
    }

    /// Smallest `x` with `cdf(x) ≥ p`, found by bracketing and bisection.
    pub fn quantile(&self, p: T) -> T {
        if p <= self.cdf(T::zero()) {
            return T::zero();
        }
        if let Self::DiscreteAtoms { atoms } = self {
            let law = DiscreteLaw::from_unchecked(atoms.clone());
            let mut acc = T::zero();
            for &(v, q) in law.atoms() {
                acc += q;
                if acc >= p - T::normalization_tol() {
                    return v;
                }
            }
            return law.max_value();
        }
        let target = T::one() - p;
        let mut hi = self.mean().max(T::min_positive_value());
        let mut guard = 0;
        while self.survival(hi) > target && guard < 2000 {
            hi = hi * T::lit(2.0);
            guard += 1;
        }
        let mut lo = T::zero();
        for _ in 0..200 {
            let mid = (lo + hi) / T::lit(2.0);
            if self.survival(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= T::epsilon() * hi {
                break;
            }
        }
        hi
    }

    /// Law of `c·X` for `c > 0`.
    pub fn scaled(&self, c: T) -> Self {
        match self {
            Self::Exponential { rate } => Self::Exponential { rate: *rate / c },
            Self::LogNormal { mu, sigma2 } => Self::LogNormal {
                mu: *mu + c.ln(),
                sigma2: *sigma2,
            },
            Self::Gamma { shape, rate } => Self::Gamma {
                shape: *shape,
                rate: *rate / c,
            },
            Self::DiscreteAtoms { atoms } => Self::DiscreteAtoms {
                atoms: atoms.iter().map(|&(v, p)| (v * c, p)).collect(),
            },
            Self::ScaledMixture { components } => Self::ScaledMixture {
                components: components
                    .iter()
                    .map(|k| MixtureComponent {
                        weight: k.weight,
                        scale: k.scale * c,
                        base: k.base.clone(),
                    })
                    .collect(),
            },
        }
    }

    /// `X / E[X]`.
    pub fn normalized(&self) -> Self {
        self.scaled(self.mean().recip())
    }

    /// Flattens into the exact finite law if every leaf is discrete.
    pub fn as_discrete(&self) -> Option<DiscreteLaw<T>> {
        match self {
            Self::DiscreteAtoms { atoms } => Some(DiscreteLaw::from_unchecked(atoms.clone())),
            Self::ScaledMixture { components } => {
                let mut parts = Vec::with_capacity(components.len());
                for c in components {
                    let law = if c.scale.is_zero() {
                        DiscreteLaw::point(T::zero())
                    } else {
                        c.base.as_discrete()?.scaled(&c.scale)
                    };
                    parts.push((c.weight, law));
                }
                Some(DiscreteLaw::mixture(parts.iter().map(|(w, l)| (*w, l))))
            }
            _ => None,
        }
    }

    /// Decomposes a mixture of exponentials as `(zero_mass, [(weight, rate)])`.
    ///
    /// Nested mixtures are flattened and equal rates are merged, so the
    /// returned rates are strictly increasing. `None` if any leaf is not
    /// exponential (a point mass at 0 is allowed).
    pub fn exponential_components(&self) -> Option<(T, Vec<(T, T)>)> {
        let mut zero = T::zero();
        let mut comps = Vec::new();
        self.collect_exponential(T::one(), T::one(), &mut zero, &mut comps)?;
        comps.sort_by(|a: &(T, T), b| a.1.partial_cmp(&b.1).expect("finite rates"));
        let mut merged: Vec<(T, T)> = Vec::with_capacity(comps.len());
        for (w, r) in comps {
            match merged.last_mut() {
                Some(last) if (last.1 - r).abs() <= T::lit(1e-12) * r => last.0 += w,
                _ => merged.push((w, r)),
            }
        }
        Some((zero, merged))
    }

    fn collect_exponential(
        &self,
        weight: T,
        scale: T,
        zero: &mut T,
        out: &mut Vec<(T, T)>,
    ) -> Option<()> {
        if scale.is_zero() {
            *zero += weight;
            return Some(());
        }
        match self {
            Self::Exponential { rate } => out.push((weight, *rate / scale)),
            Self::DiscreteAtoms { atoms } if atoms.iter().all(|(v, _)| v.is_zero()) => {
                *zero += weight
            }
            Self::ScaledMixture { components } => {
                for c in components {
                    c.base
                        .collect_exponential(weight * c.weight, scale * c.scale, zero, out)?;
                }
            }
            _ => return None,
        }
        Some(())
    }

    /// Fingerprint of the normalized law, for the scale-family test.
    pub fn shape_key(&self) -> ShapeKey<T> {
        match self {
            Self::Exponential { .. } => ShapeKey::Exponential,
            Self::Gamma { shape, .. } => ShapeKey::Gamma { shape: *shape },
            Self::LogNormal { sigma2, .. } => ShapeKey::LogNormal { sigma2: *sigma2 },
            Self::DiscreteAtoms { atoms } => {
                let m = self.mean();
                let law = DiscreteLaw::from_unchecked(atoms.iter().map(|&(v, p)| (v / m, p)).collect());
                ShapeKey::Discrete(law.atoms().to_vec())
            }
            Self::ScaledMixture { .. } => ShapeKey::Unclassified,
        }
    }

    pub fn is_exponential_mixture(&self) -> bool {
        self.exponential_components().is_some()
    }
}

impl<T: Real> ShapeKey<T> {
    /// Equality up to a relative tolerance on parameters.
    pub fn matches(&self, other: &Self, tol: T) -> bool {
        let close = |a: T, b: T| (a - b).abs() <= tol * a.abs().max(b.abs()).max(T::one());
        match (self, other) {
            (Self::Exponential, Self::Exponential) => true,
            (Self::Gamma { shape: a }, Self::Gamma { shape: b }) => close(*a, *b),
            (Self::LogNormal { sigma2: a }, Self::LogNormal { sigma2: b }) => close(*a, *b),
            (Self::Discrete(a), Self::Discrete(b)) => {
                a.len() == b.len()
                    && a.iter()
                        .zip(b)
                        .all(|(x, y)| close(x.0, y.0) && close(x.1, y.1))
            }
            _ => false,
        }
    }
}
