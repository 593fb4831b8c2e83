use std::cmp::Ordering;

use crate::scalar::Scalar;

use super::DistributionError;

/// Finitely supported law on `[0, ∞)`, generic over any ordered field so that
/// stop-loss tables can be evaluated exactly on rationals.
///
/// Atoms are kept sorted by value with duplicates merged.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw<Q> {
    atoms: Vec<(Q, Q)>,
}

impl<Q: Scalar> DiscreteLaw<Q> {
    /// Validates and normalizes `(value, probability)` pairs.
    ///
    /// Zero-probability atoms are dropped; probabilities must lie in `[0, 1]`
    /// and sum to one within [`Scalar::normalization_tol`].
    pub fn new(atoms: impl IntoIterator<Item = (Q, Q)>) -> Result<Self, DistributionError> {
        let mut raw: Vec<(Q, Q)> = Vec::new();
        let mut total = Q::zero();
        for (value, prob) in atoms {
            if value < Q::zero() {
                return Err(DistributionError::InvalidParameter(format!(
                    "atom value {value} is negative"
                )));
            }
            if prob < Q::zero() || prob > Q::one() {
                return Err(DistributionError::InvalidParameter(format!(
                    "atom probability {prob} outside [0, 1]"
                )));
            }
            total = total + prob.clone();
            if !prob.is_zero() {
                raw.push((value, prob));
            }
        }
        if raw.is_empty() {
            return Err(DistributionError::InvalidParameter(
                "discrete law needs at least one atom".into(),
            ));
        }
        if (total.clone() - Q::one()).abs() > Q::normalization_tol() {
            return Err(DistributionError::NotNormalized {
                sum: total.to_f64_lossy(),
            });
        }
        Ok(Self::from_unchecked(raw))
    }

    /// Point mass at `value`.
    pub fn point(value: Q) -> Self {
        Self {
            atoms: vec![(value, Q::one())],
        }
    }

    pub(crate) fn from_unchecked(mut raw: Vec<(Q, Q)>) -> Self {
        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let mut atoms: Vec<(Q, Q)> = Vec::with_capacity(raw.len());
        for (value, prob) in raw {
            match atoms.last_mut() {
                Some(last) if last.0 == value => last.1 = last.1.clone() + prob,
                _ => atoms.push((value, prob)),
            }
        }
        Self { atoms }
    }

    pub fn atoms(&self) -> &[(Q, Q)] {
        &self.atoms
    }

    pub fn mean(&self) -> Q {
        self.atoms
            .iter()
            .fold(Q::zero(), |acc, (v, p)| acc + v.clone() * p.clone())
    }

    pub fn second_moment(&self) -> Q {
        self.atoms.iter().fold(Q::zero(), |acc, (v, p)| {
            acc + v.clone() * v.clone() * p.clone()
        })
    }

    /// Right-continuous cdf.
    pub fn cdf(&self, x: &Q) -> Q {
        self.atoms
            .iter()
            .take_while(|(v, _)| v <= x)
            .fold(Q::zero(), |acc, (_, p)| acc + p.clone())
    }

    /// `E[(X - t)_+]`, exact in the field arithmetic.
    pub fn stop_loss(&self, t: &Q) -> Q {
        self.atoms.iter().fold(Q::zero(), |acc, (v, p)| {
            acc + (v.clone() - t.clone()).positive_part() * p.clone()
        })
    }

    pub fn max_value(&self) -> Q {
        self.atoms
            .last()
            .map(|(v, _)| v.clone())
            .unwrap_or_else(Q::zero)
    }

    /// Support points; the stop-loss transform is linear between them.
    pub fn kinks(&self) -> impl Iterator<Item = &Q> {
        self.atoms.iter().map(|(v, _)| v)
    }

    /// Law of `c·X` for `c ≥ 0`.
    pub fn scaled(&self, c: &Q) -> Self {
        Self::from_unchecked(
            self.atoms
                .iter()
                .map(|(v, p)| (v.clone() * c.clone(), p.clone()))
                .collect(),
        )
    }

    /// Mixture `Σ w_k · law_k`; weights are assumed to sum to one.
    pub fn mixture<'a>(parts: impl IntoIterator<Item = (Q, &'a DiscreteLaw<Q>)>) -> Self
    where
        Q: 'a,
    {
        let mut raw = Vec::new();
        for (w, law) in parts {
            if w.is_zero() {
                continue;
            }
            for (v, p) in &law.atoms {
                raw.push((v.clone(), w.clone() * p.clone()));
            }
        }
        Self::from_unchecked(raw)
    }

    /// `B·X` with `B ~ Bernoulli(keep)` independent of `X`.
    pub fn thinned(&self, keep: &Q) -> Self {
        let zero = Self::point(Q::zero());
        Self::mixture([(Q::one() - keep.clone(), &zero), (keep.clone(), self)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn q(n: i64, d: i64) -> Q {
        Ratio::new(n, d)
    }

    #[test]
    fn merges_and_sorts_atoms() {
        let law = DiscreteLaw::new([(q(2, 1), q(1, 4)), (q(0, 1), q(1, 2)), (q(2, 1), q(1, 4))])
            .unwrap();
        assert_eq!(law.atoms(), &[(q(0, 1), q(1, 2)), (q(2, 1), q(1, 2))]);
        assert_eq!(law.mean(), q(1, 1));
    }

    #[test]
    fn rejects_unnormalized_and_negative() {
        assert!(matches!(
            DiscreteLaw::new([(q(1, 1), q(1, 2))]),
            Err(DistributionError::NotNormalized { .. })
        ));
        assert!(DiscreteLaw::new([(q(-1, 1), q(1, 1))]).is_err());
        assert!(DiscreteLaw::<f64>::new([(1.0, 0.5), (2.0, 0.5 + 1e-13)]).is_ok());
    }

    #[test]
    fn stop_loss_is_exact_on_rationals() {
        // {0: 1/4, 1: 1/2, 2: 1/4}
        let z = DiscreteLaw::new([(q(0, 1), q(1, 4)), (q(1, 1), q(1, 2)), (q(2, 1), q(1, 4))])
            .unwrap();
        assert_eq!(z.stop_loss(&q(1, 2)), q(5, 8));
        assert_eq!(z.stop_loss(&q(0, 1)), z.mean());
        assert_eq!(z.stop_loss(&q(3, 2)), q(1, 8));
        assert_eq!(z.stop_loss(&q(2, 1)), q(0, 1));
    }

    #[test]
    fn thinning_keeps_the_mean_proportional() {
        let y = DiscreteLaw::new([(q(0, 1), q(1, 2)), (q(2, 1), q(1, 2))]).unwrap();
        let thin = y.thinned(&q(1, 2));
        assert_eq!(thin.atoms(), &[(q(0, 1), q(3, 4)), (q(2, 1), q(1, 4))]);
        assert_eq!(thin.mean(), q(1, 2));
    }
}
