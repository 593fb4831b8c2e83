use crate::scalar::Real;

use super::{DistributionError, SeverityModel};

/// Which endpoint of each grid cell receives the cell's mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    /// Left endpoint: the result is stochastically smaller.
    Lower,
    /// Right endpoint: the result is stochastically larger.
    Upper,
}

/// Arithmetic law on `{0, h, 2h, …}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedDist<T> {
    pub span: T,
    pub atoms: Vec<T>,
    pub rounding: Rounding,
    /// Mass beyond the last atom that was not represented.
    pub truncation_mass: T,
}

impl<T: Real> DiscretizedDist<T> {
    pub fn total_mass(&self) -> T {
        self.atoms.iter().copied().sum()
    }

    /// `P(X ≤ x)` read off the lattice.
    pub fn cdf(&self, x: T) -> T {
        if x < T::zero() {
            return T::zero();
        }
        let k = (x / self.span + T::lit(1e-9)).floor().to_usize().unwrap_or(usize::MAX);
        self.atoms.iter().take(k.saturating_add(1)).copied().sum()
    }
}

const DEFAULT_ATOM_CAP: usize = 2_000_000;

/// Discretizes the equilibrium (integrated-tail) law of `d`, whose cdf is
/// `1 − E[(X − x)_+]/E[X]`.
///
/// The grid is extended until the unrepresented tail is at most `epsilon`.
pub fn equilibrium_discretize<T: Real>(
    d: &SeverityModel<T>,
    span: T,
    epsilon: T,
    rounding: Rounding,
) -> Result<DiscretizedDist<T>, DistributionError> {
    let dist = equilibrium_discretize_upto(d, span, epsilon, rounding, DEFAULT_ATOM_CAP)?;
    if dist.truncation_mass > epsilon {
        return Err(DistributionError::AtomCapExceeded {
            cap: DEFAULT_ATOM_CAP,
        });
    }
    Ok(dist)
}

/// Like [`equilibrium_discretize`] but stops at index `max_index` even if
/// the tail is heavier than `epsilon`.
///
/// Lower rounding folds the residual tail into the last atom, which keeps the
/// law proper and still stochastically below the target. Upper rounding leaves
/// it out (a defective law with mass at infinity), which keeps it above.
pub fn equilibrium_discretize_upto<T: Real>(
    d: &SeverityModel<T>,
    span: T,
    epsilon: T,
    rounding: Rounding,
    max_index: usize,
) -> Result<DiscretizedDist<T>, DistributionError> {
    let mean = d.mean();
    if !(mean > T::zero() && mean.is_finite()) {
        return Err(DistributionError::UnboundedMean);
    }
    if !(span > T::zero() && span.is_finite()) {
        return Err(DistributionError::InvalidParameter(format!("span {span} must be > 0")));
    }
    if !(epsilon > T::zero() && epsilon <= T::lit(1e-3)) {
        return Err(DistributionError::BadTruncation(epsilon.to_f64_lossy()));
    }

    // tail(k) = P(X_e > k h)
    let tail = |k: usize| d.stop_loss(span * T::from_usize_lossy(k)) / mean;
    let mut atoms = Vec::new();
    let mut prev = T::one();
    let mut k = 0usize;
    if rounding == Rounding::Upper {
        atoms.push(T::zero());
    }
    let residual = loop {
        if prev <= epsilon || atoms.len() > max_index {
            break prev;
        }
        let next = tail(k + 1);
        atoms.push((prev - next).max(T::zero()));
        prev = next;
        k += 1;
    };
    if atoms.len() > max_index + 1 {
        atoms.truncate(max_index + 1);
    }
    let mut truncation_mass = residual;
    if rounding == Rounding::Lower && residual > T::zero() {
        if let Some(last) = atoms.last_mut() {
            *last += residual;
        }
        truncation_mass = T::zero();
    }
    Ok(DiscretizedDist {
        span,
        atoms,
        rounding,
        truncation_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exponential_is_its_own_equilibrium() {
        let alpha = 0.8;
        let d = SeverityModel::exponential(alpha).unwrap();
        let h = 0.01;
        let lo = equilibrium_discretize(&d, h, 1e-10, Rounding::Lower).unwrap();
        for (k, &p) in lo.atoms.iter().take(2000).enumerate() {
            let x = k as f64 * h;
            let cell = (-alpha * x).exp() - (-alpha * (x + h)).exp();
            assert_abs_diff_eq!(p, cell, epsilon = 1e-12);
        }
        assert!(lo.total_mass() >= 1.0 - 1e-10);
    }

    #[test]
    fn point_mass_gives_uniform_atoms() {
        let c = 2.0;
        let d = SeverityModel::discrete(vec![(c, 1.0)]).unwrap();
        let h = 0.05;
        let lo = equilibrium_discretize(&d, h, 1e-10, Rounding::Lower).unwrap();
        assert_eq!(lo.atoms.len(), 40);
        for &p in &lo.atoms {
            assert_abs_diff_eq!(p, h / c, epsilon = 1e-14);
        }
    }

    #[test]
    fn lower_and_upper_sandwich_the_exact_cdf() {
        let d = SeverityModel::exponential(1.3).unwrap();
        let h = 0.02;
        let lo = equilibrium_discretize(&d, h, 1e-10, Rounding::Lower).unwrap();
        let up = equilibrium_discretize(&d, h, 1e-10, Rounding::Upper).unwrap();
        assert_eq!(up.atoms[0], 0.0);
        for k in 0..500 {
            let x = k as f64 * h + h / 2.0;
            let exact = d.cdf(x);
            assert!(lo.cdf(x) >= exact - 1e-13);
            assert!(up.cdf(x) <= exact + 1e-13);
        }
    }

    #[test]
    fn capped_grid_keeps_bounds_one_sided() {
        let d = SeverityModel::lognormal(0.0, 2.0).unwrap();
        let lo = equilibrium_discretize_upto(&d, 0.01, 1e-10, Rounding::Lower, 100).unwrap();
        let up = equilibrium_discretize_upto(&d, 0.01, 1e-10, Rounding::Upper, 100).unwrap();
        assert_eq!(lo.atoms.len(), 101);
        assert_abs_diff_eq!(lo.total_mass(), 1.0, epsilon = 1e-12);
        assert!(up.truncation_mass > 0.1);
        assert_abs_diff_eq!(up.total_mass() + up.truncation_mass, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_truncation() {
        let d = SeverityModel::exponential(1.0).unwrap();
        assert!(matches!(
            equilibrium_discretize(&d, 0.1, 0.5, Rounding::Lower),
            Err(DistributionError::BadTruncation(_))
        ));
    }
}
