//! Random scenario generators shared by the property and acceptance suites.
#![allow(dead_code)]

use poolruin::distributions::SeverityModel;
use poolruin::pool_model::{AllocationMatrix, Participant, PoolSpec};
use rand::Rng;

pub fn random_base<R: Rng>(rng: &mut R) -> SeverityModel<f64> {
    match rng.random_range(0..4) {
        0 => SeverityModel::exponential(rng.random_range(0.1..5.0)).unwrap(),
        1 => SeverityModel::gamma(rng.random_range(0.3..4.0), rng.random_range(0.2..3.0)).unwrap(),
        2 => SeverityModel::lognormal(rng.random_range(-1.0..1.0), rng.random_range(0.05..2.0)).unwrap(),
        _ => {
            let k = rng.random_range(1..=6);
            let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
            let s: f64 = w.iter().sum();
            let atoms = w.iter().map(|&p| (rng.random_range(0.0..10.0), p / s)).collect();
            SeverityModel::discrete(atoms).unwrap()
        }
    }
}

/// A base law or a scaled mixture of a few of them, possibly with a zero atom.
pub fn random_severity<R: Rng>(rng: &mut R) -> SeverityModel<f64> {
    if rng.random_bool(0.6) {
        return random_base(rng);
    }
    let k = rng.random_range(2..=3);
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    SeverityModel::mixture(w.iter().map(|&p| {
        let scale = if rng.random_bool(0.15) { 0.0 } else { rng.random_range(0.1..3.0) };
        (p / s, scale, random_base(rng))
    }))
    .unwrap()
}

/// A balanced nonnegative matrix (row sums equal column sums), zero on the
/// diagonal: a symmetric part plus a few directed cycles.
fn balanced_flows<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    let mut s = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(0.7) {
                let v = rng.random_range(0.0..1.0);
                s[i][j] = v;
                s[j][i] = v;
            }
        }
    }
    for _ in 0..rng.random_range(0..=3) {
        let len = rng.random_range(2..=n);
        let mut nodes: Vec<usize> = (0..n).collect();
        for k in 0..len {
            let pick = rng.random_range(k..n);
            nodes.swap(k, pick);
        }
        let v = rng.random_range(0.0..1.0);
        for k in 0..len {
            s[nodes[k]][nodes[(k + 1) % len]] += v;
        }
    }
    s
}

/// Random matrix satisfying full allocation and fairness and, when `capacity`
/// is set, the capacity constraint too.
///
/// Writes the expected claim flow `x_ij = λ_j a_ij b_j` as `diag(m) − rowsum(S) + S`
/// with `S` balanced and `m_i = λ_i b_i`, so both margins of `x` equal `m`.
pub fn random_fair_matrix<R: Rng>(rng: &mut R, lambda: &[f64], b: &[f64], capacity: bool) -> AllocationMatrix<f64> {
    let n = lambda.len();
    let m: Vec<f64> = lambda.iter().zip(b).map(|(l, b)| l * b).collect();
    let s = balanced_flows(rng, n);
    let mut scale = f64::INFINITY;
    for i in 0..n {
        let row: f64 = s[i].iter().sum();
        if row > 0.0 {
            scale = scale.min(m[i] / row);
        }
        for j in 0..n {
            if capacity && s[i][j] > 0.0 {
                scale = scale.min(lambda[j] * b[i] / s[i][j]);
            }
        }
    }
    if !scale.is_finite() {
        scale = 0.0;
    }
    let scale = scale * rng.random_range(0.0..1.0);
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        let out: f64 = s[i].iter().map(|v| v * scale).sum();
        for j in 0..n {
            rows[i][j] = if i == j {
                ((m[i] - out) / m[i]).clamp(0.0, 1.0)
            } else {
                (s[i][j] * scale / m[j]).clamp(0.0, 1.0)
            };
        }
    }
    AllocationMatrix::new(rows).unwrap()
}

/// Pool from one scale family: exponential, or LogNormal with common `σ²`.
pub fn random_scale_family_pool<R: Rng>(rng: &mut R, homogeneous: bool) -> PoolSpec<f64> {
    let n = rng.random_range(2..=4);
    let lognormal = rng.random_bool(0.5);
    let sigma2 = rng.random_range(0.1..1.5);
    let common = rng.random_range(0.5..5.0);
    let ps = (0..n)
        .map(|_| {
            let lambda = if homogeneous { common } else { rng.random_range(0.5..5.0) };
            let sev = if lognormal {
                SeverityModel::lognormal(rng.random_range(-1.0..1.0), sigma2).unwrap()
            } else {
                SeverityModel::exponential(rng.random_range(0.2..3.0)).unwrap()
            };
            Participant::new(lambda, sev, 0.0)
        })
        .collect();
    PoolSpec::new(ps, 0.4).unwrap()
}
