use crate::linalg::{self, Solution};
use crate::pooled_losses::SurplusSpec;
use crate::scalar::Real;

use super::RuinError;

/// `ψ(κ) = Σ_k C_k exp(−r_k κ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureExpansion<T> {
    pub coefficients: Vec<T>,
    /// Strictly increasing.
    pub exponents: Vec<T>,
}

impl<T: Real> MixtureExpansion<T> {
    pub fn eval(&self, kappa: T) -> T {
        self.coefficients
            .iter()
            .zip(&self.exponents)
            .map(|(&c, &r)| c * (-r * kappa).exp())
            .sum()
    }

    pub fn total(&self) -> T {
        self.coefficients.iter().copied().sum()
    }
}

/// `ψ(κ) = λ/(αc) · exp(−(α − λ/c) κ)` for exponential claims.
pub fn ruin_exponential<T: Real>(spec: &SurplusSpec<T>, kappa: T) -> Result<T, RuinError> {
    let (zero, comps) = spec.claim.exponential_components().ok_or_else(|| mismatch(spec, "exponential claims"))?;
    if !zero.is_zero() || comps.len() != 1 {
        return Err(mismatch(spec, "a single exponential claim law"));
    }
    let alpha = comps[0].1;
    let (lambda, c) = (spec.intensity, spec.premium_rate);
    if c * alpha <= lambda {
        return Err(RuinError::NetProfit {
            rho: (lambda / (alpha * c)).to_f64_lossy(),
        });
    }
    Ok(lambda / (alpha * c) * (-(alpha - lambda / c) * kappa).exp())
}

fn mismatch<T: Real>(spec: &SurplusSpec<T>, needs: &'static str) -> RuinError {
    RuinError::MethodMismatch {
        method: "closed form",
        needs,
        law: describe(&spec.claim),
    }
}

pub(crate) fn describe<T: Real>(law: &crate::distributions::SeverityModel<T>) -> String {
    use crate::distributions::SeverityModel::*;
    match law {
        Exponential { .. } => "exponential".into(),
        LogNormal { .. } => "lognormal".into(),
        Gamma { .. } => "gamma".into(),
        DiscreteAtoms { .. } => "discrete".into(),
        ScaledMixture { .. } => "scaled mixture".into(),
    }
}

/// Lundberg roots and coefficients for a mixture of exponential claims.
///
/// With claim density `Σ p_k β_k e^{−β_k x}` the adjustment equation
/// `λ(Σ p_k β_k/(β_k − r) − 1) = c r` has one root in each of
/// `(0, β_1), (β_1, β_2), …`. The coefficients then solve
/// `Σ_k C_k β_j/(β_j − r_k) = 1` for every `j`.
pub fn mixture_expansion<T: Real>(spec: &SurplusSpec<T>) -> Result<MixtureExpansion<T>, RuinError> {
    let (zero, comps) = spec
        .claim
        .exponential_components()
        .ok_or_else(|| mismatch(spec, "a mixture of exponential claims"))?;
    // a zero atom only thins the claim process
    let keep = T::one() - zero;
    if keep <= T::zero() {
        return Err(mismatch(spec, "a non-degenerate claim law"));
    }
    let lambda = spec.intensity * keep;
    let c = spec.premium_rate;
    let weights: Vec<T> = comps.iter().map(|&(w, _)| w / keep).collect();
    let rates: Vec<T> = comps.iter().map(|&(_, r)| r).collect();
    let mean: T = weights.iter().zip(&rates).map(|(&w, &b)| w / b).sum();
    if c <= lambda * mean {
        return Err(RuinError::NetProfit {
            rho: (lambda * mean / c).to_f64_lossy(),
        });
    }

    let h = |r: T| {
        let s: T = weights.iter().zip(&rates).map(|(&p, &b)| p * b / (b - r)).sum();
        lambda * (s - T::one()) - c * r
    };
    let dh = |r: T| {
        let s: T = weights
            .iter()
            .zip(&rates)
            .map(|(&p, &b)| p * b / ((b - r) * (b - r)))
            .sum();
        lambda * s - c
    };

    let m = rates.len();
    let mut roots = Vec::with_capacity(m);
    let width = T::lit(1e-12);
    for k in 0..m {
        // h < 0 just right of the left end, h > 0 just left of the pole
        let (mut lo, mut hi) = (if k == 0 { T::zero() } else { rates[k - 1] }, rates[k]);
        let (lo0, hi0) = (lo, hi);
        let mut iterations = 0;
        while hi - lo > width * hi.max(T::one()) && iterations < 400 {
            let mid = (lo + hi) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = h(mid);
            if !v.is_finite() {
                return Err(RuinError::RootBracketing {
                    index: k,
                    lo: lo0.to_f64_lossy(),
                    hi: hi0.to_f64_lossy(),
                });
            }
            if v < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
            iterations += 1;
        }
        let mut r = (lo + hi) / T::lit(2.0);
        for _ in 0..4 {
            let step = h(r) / dh(r);
            let next = r - step;
            if !(next.is_finite() && next > lo0 && next < hi0) || h(next).abs() > h(r).abs() {
                break;
            }
            r = next;
        }
        if !(r > lo0 && r < hi0) {
            return Err(RuinError::RootBracketing {
                index: k,
                lo: lo0.to_f64_lossy(),
                hi: hi0.to_f64_lossy(),
            });
        }
        roots.push(r);
    }

    let matrix: Vec<Vec<T>> = rates
        .iter()
        .map(|&b| roots.iter().map(|&r| b / (b - r)).collect())
        .collect();
    let coefficients = match linalg::solve(matrix, vec![T::one(); m]) {
        Solution::Unique(x) => x,
        _ => return Err(RuinError::SingularCoefficients),
    };
    Ok(MixtureExpansion {
        coefficients,
        exponents: roots,
    })
}

/// Evaluates the mixture expansion at `κ` and returns it alongside.
pub fn ruin_mixture_exponential<T: Real>(
    spec: &SurplusSpec<T>,
    kappa: T,
) -> Result<(T, MixtureExpansion<T>), RuinError> {
    let e = mixture_expansion(spec)?;
    Ok((e.eval(kappa), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::SeverityModel;
    use approx::assert_relative_eq;

    fn spec(lambda: f64, claim: SeverityModel<f64>) -> SurplusSpec<f64> {
        let c = 1.4 * lambda * claim.mean();
        SurplusSpec::new(c, lambda, claim, 0.0).unwrap()
    }

    #[test]
    fn exponential_reference_values() {
        let s = spec(2.0, SeverityModel::exponential(0.5).unwrap());
        assert_relative_eq!(ruin_exponential(&s, 0.0).unwrap(), 2.0 / (0.5 * 5.6), max_relative = 1e-14);
        let decay: f64 = 0.5 - 2.0 / 5.6;
        assert_relative_eq!(decay, 0.142_857_1, max_relative = 1e-6);
        assert_relative_eq!(
            ruin_exponential(&s, 3.0).unwrap(),
            (2.0 / 2.8) * (-decay * 3.0).exp(),
            max_relative = 1e-14
        );
        assert!(ruin_exponential(&s, 1e4).unwrap() < 1e-300);
    }

    #[test]
    fn single_component_reduces_to_exponential() {
        let s = spec(3.0, SeverityModel::exponential(1.7).unwrap());
        let e = mixture_expansion(&s).unwrap();
        assert_eq!(e.exponents.len(), 1);
        for &k in &[0.0, 0.5, 2.0, 10.0] {
            assert_relative_eq!(e.eval(k), ruin_exponential(&s, k).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_atom_does_not_change_ruin() {
        let y = SeverityModel::exponential(0.5).unwrap();
        let thinned = SeverityModel::mixture([(2.0 / 3.0, 0.0, y.clone()), (1.0 / 3.0, 1.0, y.clone())]).unwrap();
        let plain = SurplusSpec::new(5.6, 2.0, y, 0.0).unwrap();
        let thin = SurplusSpec::new(5.6, 6.0, thinned, 0.0).unwrap();
        let e = mixture_expansion(&thin).unwrap();
        for &k in &[0.0, 1.0, 7.0] {
            assert_relative_eq!(e.eval(k), ruin_exponential(&plain, k).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn expansion_sanity_and_interlacing() {
        let claim = SeverityModel::mixture([
            (0.2, 1.0, SeverityModel::exponential(0.3).unwrap()),
            (0.5, 1.0, SeverityModel::exponential(2.0).unwrap()),
            (0.3, 1.0, SeverityModel::exponential(9.0).unwrap()),
        ])
        .unwrap();
        let s = spec(4.0, claim);
        let e = mixture_expansion(&s).unwrap();
        assert_relative_eq!(e.total(), s.rho(), max_relative = 1e-10);
        let poles = [0.3, 2.0, 9.0];
        assert!(e.exponents[0] > 0.0 && e.exponents[0] < poles[0]);
        for k in 1..3 {
            assert!(e.exponents[k] > poles[k - 1] && e.exponents[k] < poles[k]);
        }
        assert!(e.coefficients.iter().all(|&c| c > 0.0));
    }

    #[test]
    fn rejects_non_exponential_claims() {
        let s = spec(1.0, SeverityModel::lognormal(0.0, 1.0).unwrap());
        assert!(matches!(mixture_expansion(&s), Err(RuinError::MethodMismatch { .. })));
        assert!(matches!(ruin_exponential(&s, 0.0), Err(RuinError::MethodMismatch { .. })));
    }
}
