//! Per-occurrence payments after pooling and the surplus processes fed to the
//! ruin solvers.
//!
//! Under pooling every claim in the pool, whoever suffers it, triggers a
//! payment `a[i][J] · Y_J` by participant `i`, where `J` is the claimant. The
//! pool clock runs at `λ• = Σ λ_j` and `P(J = j) = λ_j / λ•`.

use thiserror::Error;

use crate::distributions::{DiscreteLaw, DistributionError, SeverityModel};
use crate::pool_model::{AllocationMatrix, PoolSpec};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurplusError {
    #[error("net profit condition fails: premium rate {premium} <= expected claim rate {claims}")]
    NetProfit { premium: f64, claims: f64 },
    #[error("invalid surplus parameters: {0}")]
    Invalid(String),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

/// Compound-Poisson surplus `κ + c t − Σ_{k ≤ N_t} X_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurplusSpec<T> {
    pub premium_rate: T,
    pub intensity: T,
    pub claim: SeverityModel<T>,
    pub reserve: T,
}

impl<T: Real> SurplusSpec<T> {
    /// Validates parameters and the strict net profit condition.
    pub fn new(premium_rate: T, intensity: T, claim: SeverityModel<T>, reserve: T) -> Result<Self, SurplusError> {
        if !(premium_rate > T::zero() && intensity > T::zero() && reserve >= T::zero()) {
            return Err(SurplusError::Invalid(format!(
                "premium {premium_rate}, intensity {intensity}, reserve {reserve}"
            )));
        }
        claim.validate()?;
        let claims = intensity * claim.mean();
        if premium_rate <= claims {
            return Err(SurplusError::NetProfit {
                premium: premium_rate.to_f64_lossy(),
                claims: claims.to_f64_lossy(),
            });
        }
        Ok(Self {
            premium_rate,
            intensity,
            claim,
            reserve,
        })
    }

    /// `ρ = λ E[X] / c`, which is also `ψ(0)`.
    pub fn rho(&self) -> T {
        self.intensity * self.claim.mean() / self.premium_rate
    }

    /// Relative safety margin `θ = c / (λ E[X]) − 1`.
    pub fn theta(&self) -> T {
        self.rho().recip() - T::one()
    }

    pub fn with_reserve(&self, reserve: T) -> Self {
        Self {
            reserve,
            ..self.clone()
        }
    }
}

/// Law of participant `i`'s payment per pool claim.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledClaimDist<T> {
    pub law: SeverityModel<T>,
    /// `λ_j / λ•`.
    pub weights: Vec<T>,
    /// `a[i][j]`.
    pub scales: Vec<T>,
    pub mean: T,
    pub variance: T,
}

/// Builds `Z_i`, the mixture of `a[i][j] Y_j` with weights `λ_j / λ•`.
pub fn build_pooled_claim<T: Real>(
    pool: &PoolSpec<T>,
    a: &AllocationMatrix<T>,
    i: usize,
) -> PooledClaimDist<T> {
    let total = pool.total_intensity();
    let weights: Vec<T> = pool.participants.iter().map(|p| p.lambda / total).collect();
    let scales: Vec<T> = a.row(i).to_vec();
    let law = SeverityModel::mixture(
        pool.participants
            .iter()
            .zip(&weights)
            .zip(&scales)
            .map(|((p, &w), &s)| (w, s, p.severity.clone())),
    )
    .expect("pool weights are normalized");
    PooledClaimDist {
        mean: law.mean(),
        variance: law.variance(),
        law,
        weights,
        scales,
    }
}

/// `Y′_i`: participant `i`'s own claim seen on the pool clock, that is `Y_i`
/// with probability `λ_i / λ•` and 0 otherwise.
pub fn build_thinned_standalone<T: Real>(pool: &PoolSpec<T>, i: usize) -> SeverityModel<T> {
    let p = &pool.participants[i];
    let keep = p.lambda / pool.total_intensity();
    if keep >= T::one() {
        return p.severity.clone();
    }
    SeverityModel::mixture([
        (T::one() - keep, T::zero(), p.severity.clone()),
        (keep, T::one(), p.severity.clone()),
    ])
    .expect("thinning weights are normalized")
}

/// `(c_i, λ_i, Y_i, κ_i)`.
pub fn standalone_surplus_spec<T: Real>(pool: &PoolSpec<T>, i: usize) -> Result<SurplusSpec<T>, SurplusError> {
    let p = &pool.participants[i];
    SurplusSpec::new(
        pool.premium_rates()[i],
        p.lambda,
        p.severity.clone(),
        p.kappa,
    )
}

/// `(c_i, λ•, Y′_i, κ_i)`: same ruin probability as the stand-alone process.
pub fn thinned_surplus_spec<T: Real>(pool: &PoolSpec<T>, i: usize) -> Result<SurplusSpec<T>, SurplusError> {
    SurplusSpec::new(
        pool.premium_rates()[i],
        pool.total_intensity(),
        build_thinned_standalone(pool, i),
        pool.participants[i].kappa,
    )
}

/// `(c_i, λ•, Z_i, κ_i)`.
pub fn pooled_surplus_spec<T: Real>(
    pool: &PoolSpec<T>,
    a: &AllocationMatrix<T>,
    i: usize,
) -> Result<SurplusSpec<T>, SurplusError> {
    SurplusSpec::new(
        pool.premium_rates()[i],
        pool.total_intensity(),
        build_pooled_claim(pool, a, i).law,
        pool.participants[i].kappa,
    )
}

/// Pool-level process `(Σ c_i, λ•, F_X, Σ κ_i)`.
pub fn aggregate_surplus_spec<T: Real>(pool: &PoolSpec<T>) -> Result<SurplusSpec<T>, SurplusError> {
    let total = pool.total_intensity();
    let claim = if pool.len() == 1 {
        pool.participants[0].severity.clone()
    } else {
        SeverityModel::mixture(
            pool.participants
                .iter()
                .map(|p| (p.lambda / total, T::one(), p.severity.clone())),
        )?
    };
    SurplusSpec::new(
        pool.premium_rates().into_iter().sum(),
        total,
        claim,
        pool.participants.iter().map(|p| p.kappa).sum(),
    )
}

/// `Z_i` for finite severities, computed exactly in the field `Q`.
pub fn pooled_claim_exact<Q: Scalar>(
    lambda: &[Q],
    laws: &[DiscreteLaw<Q>],
    a: &AllocationMatrix<Q>,
    i: usize,
) -> DiscreteLaw<Q> {
    let total = lambda.iter().fold(Q::zero(), |acc, l| acc + l.clone());
    let scaled: Vec<(Q, DiscreteLaw<Q>)> = lambda
        .iter()
        .zip(laws)
        .enumerate()
        .map(|(j, (l, law))| (l.clone() / total.clone(), law.scaled(a.get(i, j))))
        .collect();
    DiscreteLaw::mixture(scaled.iter().map(|(w, law)| (w.clone(), law)))
}

/// `Y′_i` for finite severities, computed exactly.
pub fn thinned_standalone_exact<Q: Scalar>(lambda: &[Q], laws: &[DiscreteLaw<Q>], i: usize) -> DiscreteLaw<Q> {
    let total = lambda.iter().fold(Q::zero(), |acc, l| acc + l.clone());
    laws[i].thinned(&(lambda[i].clone() / total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pool_model::{build_mean_proportional, complete_alternative, Participant};
    use approx::assert_relative_eq;
    use num_rational::Ratio;

    fn illustration_pool() -> PoolSpec<f64> {
        let ps = [(2.0, 0.5), (1.0, 2.0), (3.0, 1.0)]
            .iter()
            .map(|&(l, r)| Participant::new(l, SeverityModel::exponential(r).unwrap(), 0.0))
            .collect();
        PoolSpec::new(ps, 0.4).unwrap()
    }

    #[test]
    fn pooled_claim_under_mean_proportional_is_exponential_mixture() {
        let pool = illustration_pool();
        let a = build_mean_proportional(&pool);
        let z = build_pooled_claim(&pool, &a, 0);
        let (zero, comps) = z.law.exponential_components().unwrap();
        assert_eq!(zero, 0.0);
        let expect = [(3.0 / 6.0, 1.0 / (8.0 / 15.0)), (2.0 / 6.0, 0.5 / (8.0 / 15.0)), (1.0 / 6.0, 2.0 / (8.0 / 15.0))];
        let mut expect = expect.to_vec();
        expect.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        for ((w, r), (ew, er)) in comps.iter().zip(&expect) {
            assert_relative_eq!(*w, *ew, max_relative = 1e-12);
            assert_relative_eq!(*r, *er, max_relative = 1e-12);
        }
        assert_relative_eq!(z.mean, 2.0 * 2.0 / 6.0, max_relative = 1e-12);
    }

    #[test]
    fn fair_matrix_preserves_means_and_totals() {
        let pool = illustration_pool();
        let a = complete_alternative(&pool, &[(0, 0, 0.8), (1, 1, 0.4), (2, 2, 0.7), (0, 1, 0.1)]).unwrap();
        let total = pool.total_intensity();
        let mut sum = 0.0;
        for i in 0..3 {
            let z = build_pooled_claim(&pool, &a, i);
            let y = build_thinned_standalone(&pool, i);
            assert_relative_eq!(z.mean, y.mean(), max_relative = 1e-12);
            sum += z.mean * total;
        }
        let loads: f64 = pool.lambdas().iter().zip(pool.means()).map(|(l, b)| l * b).sum();
        assert_relative_eq!(sum, loads, max_relative = 1e-12);
    }

    #[test]
    fn identity_pooling_is_thinning() {
        let pool = illustration_pool();
        let a = AllocationMatrix::identity(3);
        for i in 0..3 {
            let z = build_pooled_claim(&pool, &a, i).law;
            let y = build_thinned_standalone(&pool, i);
            for &t in &[0.0, 0.3, 1.0, 4.0] {
                assert_relative_eq!(z.stop_loss(t), y.stop_loss(t), max_relative = 1e-14);
                assert_relative_eq!(z.cdf(t), y.cdf(t), max_relative = 1e-14);
            }
        }
        let y = build_thinned_standalone(&pool, 0);
        assert_relative_eq!(y.cdf(0.0), 1.0 - 2.0 / 6.0, max_relative = 1e-14);
    }

    #[test]
    fn surplus_specs() {
        let pool = illustration_pool();
        let s = standalone_surplus_spec(&pool, 0).unwrap();
        assert_relative_eq!(s.premium_rate, 5.6, max_relative = 1e-14);
        assert_eq!(s.intensity, 2.0);
        let agg = aggregate_surplus_spec(&pool).unwrap();
        assert_eq!(agg.intensity, 6.0);
        assert_relative_eq!(agg.premium_rate, 10.5, max_relative = 1e-14);
        assert_relative_eq!(agg.claim.mean(), (4.0 + 0.5 + 3.0) / 6.0, max_relative = 1e-14);
        let a = build_mean_proportional(&pool);
        for i in 0..3 {
            let p = pooled_surplus_spec(&pool, &a, i).unwrap();
            assert_relative_eq!(p.rho(), 1.0 / 1.4, max_relative = 1e-12);
        }
    }

    #[test]
    fn unfair_matrix_can_break_net_profit() {
        let pool = illustration_pool();
        // participant 2 pays everything
        let rows = vec![vec![0.0; 3], vec![1.0; 3], vec![0.0; 3]];
        let a = AllocationMatrix::new(rows).unwrap();
        assert!(matches!(
            pooled_surplus_spec(&pool, &a, 1),
            Err(SurplusError::NetProfit { .. })
        ));
    }

    #[test]
    fn single_participant_is_unchanged() {
        let ps = vec![Participant::new(2.0, SeverityModel::gamma(2.0, 1.0).unwrap(), 1.0)];
        let pool = PoolSpec::new(ps, 0.4).unwrap();
        assert_eq!(build_thinned_standalone(&pool, 0), pool.participants[0].severity);
        let agg = aggregate_surplus_spec(&pool).unwrap();
        assert_eq!(agg, standalone_surplus_spec(&pool, 0).unwrap());
    }

    #[test]
    fn exact_pooled_laws() {
        let q = |n: i64, d: i64| Ratio::new(n, d);
        let y1 = DiscreteLaw::new([(q(0, 1), q(1, 2)), (q(2, 1), q(1, 2))]).unwrap();
        let y2 = DiscreteLaw::point(q(2, 1));
        let a = AllocationMatrix::new(vec![vec![q(0, 1), q(1, 2)], vec![q(1, 1), q(1, 2)]]).unwrap();
        let lambda = [q(1, 1), q(1, 1)];
        let laws = [y1, y2];
        let z2 = pooled_claim_exact(&lambda, &laws, &a, 1);
        assert_eq!(z2.atoms(), &[(q(0, 1), q(1, 4)), (q(1, 1), q(1, 2)), (q(2, 1), q(1, 4))]);
        let y1p = thinned_standalone_exact(&lambda, &laws, 0);
        assert_eq!(y1p.atoms(), &[(q(0, 1), q(3, 4)), (q(2, 1), q(1, 4))]);
    }
}
