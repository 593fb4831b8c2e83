//! Participants, premiums and allocation matrices.
//!
//! An allocation matrix `A = (a[i][j])` says which fraction of participant
//! `j`'s claim is paid by participant `i`. Indices are 0-based in the API;
//! reports render them 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::{DistributionError, SeverityModel, ShapeKey};
use crate::linalg::{self, Solution};
use crate::scalar::{Real, Scalar};

/// Absolute tolerance on fairness and capacity residuals.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PoolError {
    #[error("pool has no participants")]
    Empty,
    #[error("participant {index}: {reason}")]
    InvalidParticipant { index: usize, reason: String },
    #[error("safety loading must be > 0, got {0}")]
    NonPositiveLoading(f64),
    #[error("matrix must be {expected}x{expected}")]
    Dimension { expected: usize },
    #[error("entry ({}, {}) = {value} outside [0, 1]", .i + 1, .j + 1)]
    EntryOutOfRange { i: usize, j: usize, value: f64 },
    #[error("fixed entry ({}, {}) given twice", .i + 1, .j + 1)]
    DuplicateFixed { i: usize, j: usize },
    #[error("constraints determine only {rank} of {unknowns} free entries")]
    Underdetermined { rank: usize, unknowns: usize },
    #[error("fixed entries contradict full allocation and fairness (residual {residual})")]
    Inconsistent { residual: f64 },
    #[error("completed entry ({}, {}) = {value} outside [0, 1]", .i + 1, .j + 1)]
    CompletedOutOfRange { i: usize, j: usize, value: f64 },
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de> + num_traits::Zero"))]
pub struct Participant<T> {
    /// Claim intensity.
    pub lambda: T,
    pub severity: SeverityModel<T>,
    /// Initial reserve.
    #[serde(default = "zero")]
    pub kappa: T,
}

fn zero<T: num_traits::Zero>() -> T {
    T::zero()
}

impl<T: Real> Participant<T> {
    pub fn new(lambda: T, severity: SeverityModel<T>, kappa: T) -> Self {
        Self {
            lambda,
            severity,
            kappa,
        }
    }

    /// Mean claim size `b_i`.
    pub fn mean_claim(&self) -> T {
        self.severity.mean()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de> + num_traits::Zero"))]
pub struct PoolSpec<T> {
    pub participants: Vec<Participant<T>>,
    /// Common safety loading.
    pub eta: T,
}

impl<T: Real> PoolSpec<T> {
    pub fn new(participants: Vec<Participant<T>>, eta: T) -> Result<Self, PoolError> {
        let pool = Self { participants, eta };
        pool.check()?;
        Ok(pool)
    }

    pub fn check(&self) -> Result<(), PoolError> {
        if self.participants.is_empty() {
            return Err(PoolError::Empty);
        }
        if !(self.eta > T::zero() && self.eta.is_finite()) {
            return Err(PoolError::NonPositiveLoading(self.eta.to_f64_lossy()));
        }
        for (index, p) in self.participants.iter().enumerate() {
            let fail = |reason: String| PoolError::InvalidParticipant { index, reason };
            if !(p.lambda > T::zero() && p.lambda.is_finite()) {
                return Err(fail(format!("claim intensity {} must be > 0", p.lambda)));
            }
            if !(p.kappa >= T::zero() && p.kappa.is_finite()) {
                return Err(fail(format!("initial reserve {} must be >= 0", p.kappa)));
            }
            p.severity
                .validate()
                .map_err(|e| fail(format!("severity: {e}")))?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.participants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.participants.is_empty()
    }

    pub fn lambdas(&self) -> Vec<T> {
        self.participants.iter().map(|p| p.lambda).collect()
    }

    pub fn means(&self) -> Vec<T> {
        self.participants.iter().map(Participant::mean_claim).collect()
    }

    /// Pool claim intensity `λ• = Σ λ_i`.
    pub fn total_intensity(&self) -> T {
        self.participants.iter().map(|p| p.lambda).sum()
    }

    pub fn premium_rates(&self) -> Vec<T> {
        self.participants
            .iter()
            .map(|p| premium_rate(p, self.eta))
            .collect()
    }

    pub fn has_homogeneous_frequencies(&self) -> bool {
        let l0 = self.participants[0].lambda;
        self.participants
            .iter()
            .all(|p| (p.lambda - l0).abs() <= T::lit(1e-12) * l0)
    }
}

/// Expected-value premium `(1 + η) λ_i b_i`.
pub fn premium_rate<T: Real>(p: &Participant<T>, eta: T) -> T {
    (T::one() + eta) * p.lambda * p.mean_claim()
}

/// Square matrix of transfer ratios with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AllocationMatrix<Q> {
    rows: Vec<Vec<Q>>,
}

impl<Q: Scalar> AllocationMatrix<Q> {
    pub fn new(rows: Vec<Vec<Q>>) -> Result<Self, PoolError> {
        let n = rows.len();
        if n == 0 {
            return Err(PoolError::Empty);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(PoolError::Dimension { expected: n });
            }
            for (j, v) in row.iter().enumerate() {
                if *v < Q::zero() || *v > Q::one() {
                    return Err(PoolError::EntryOutOfRange {
                        i,
                        j,
                        value: v.to_f64_lossy(),
                    });
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Q::one() } else { Q::zero() })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<Q>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.rows[i]
    }

    pub fn column_sums(&self) -> Vec<Q> {
        let n = self.n();
        (0..n)
            .map(|j| {
                self.rows
                    .iter()
                    .fold(Q::zero(), |acc, r| acc + r[j].clone())
            })
            .collect()
    }

    pub fn map<R, F: Fn(&Q) -> R>(&self, f: F) -> AllocationMatrix<R> {
        AllocationMatrix {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(&f).collect())
                .collect(),
        }
    }

    pub fn to_f64(&self) -> AllocationMatrix<f64> {
        self.map(Scalar::to_f64_lossy)
    }
}

impl<Q: Scalar> fmt::Display for AllocationMatrix<Q> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{:.7}", v.to_f64_lossy())).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// `a[i][j] = λ_i b_i / Σ_k λ_k b_k` for every column `j`.
pub fn mean_proportional<Q: Scalar>(lambda: &[Q], b: &[Q]) -> AllocationMatrix<Q> {
    let loads: Vec<Q> = lambda
        .iter()
        .zip(b)
        .map(|(l, m)| l.clone() * m.clone())
        .collect();
    let total = loads.iter().fold(Q::zero(), |acc, v| acc + v.clone());
    let rows = loads
        .iter()
        .map(|l| vec![l.clone() / total.clone(); lambda.len()])
        .collect();
    AllocationMatrix { rows }
}

pub fn build_mean_proportional<T: Real>(pool: &PoolSpec<T>) -> AllocationMatrix<T> {
    mean_proportional(&pool.lambdas(), &pool.means())
}

/// All entries `1/n`.
pub fn build_uniform<Q: Scalar>(n: usize) -> AllocationMatrix<Q> {
    let v = Q::one() / Q::from_usize(n).expect("pool size fits the scalar");
    AllocationMatrix {
        rows: vec![vec![v; n]; n],
    }
}

/// Completes a partially specified matrix using full allocation and
/// actuarial fairness.
///
/// `fixed` holds 0-based `(i, j, value)` triples. The remaining entries are
/// the unique solution of the `2n` linear constraints; the solution is
/// rejected, not clipped, if any entry leaves `[0, 1]`.
pub fn complete_alternative_from<Q: Scalar>(
    lambda: &[Q],
    b: &[Q],
    fixed: &[(usize, usize, Q)],
) -> Result<AllocationMatrix<Q>, PoolError> {
    let n = lambda.len();
    if n == 0 {
        return Err(PoolError::Empty);
    }
    let mut known: Vec<Vec<Option<Q>>> = vec![vec![None; n]; n];
    for (i, j, v) in fixed {
        let (i, j) = (*i, *j);
        if i >= n || j >= n {
            return Err(PoolError::Dimension { expected: n });
        }
        if *v < Q::zero() || *v > Q::one() {
            return Err(PoolError::EntryOutOfRange {
                i,
                j,
                value: v.to_f64_lossy(),
            });
        }
        if known[i][j].is_some() {
            return Err(PoolError::DuplicateFixed { i, j });
        }
        known[i][j] = Some(v.clone());
    }

    let load: Vec<Q> = lambda
        .iter()
        .zip(b)
        .map(|(l, x)| l.clone() * x.clone())
        .collect();
    pin_forced_zeros(&mut known, &load);

    let mut index = vec![vec![usize::MAX; n]; n];
    let mut free = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if known[i][j].is_none() {
                index[i][j] = free.len();
                free.push((i, j));
            }
        }
    }
    let m = free.len();

    let mut matrix = Vec::with_capacity(2 * n);
    let mut rhs = Vec::with_capacity(2 * n);
    // column sums
    for j in 0..n {
        let mut row = vec![Q::zero(); m];
        let mut r = Q::one();
        for i in 0..n {
            match &known[i][j] {
                Some(v) => r = r - v.clone(),
                None => row[index[i][j]] = Q::one(),
            }
        }
        matrix.push(row);
        rhs.push(r);
    }
    // fairness rows
    for i in 0..n {
        let mut row = vec![Q::zero(); m];
        let mut r = load[i].clone();
        for j in 0..n {
            match &known[i][j] {
                Some(v) => r = r - load[j].clone() * v.clone(),
                None => row[index[i][j]] = load[j].clone(),
            }
        }
        matrix.push(row);
        rhs.push(r);
    }

    let x = if m == 0 {
        match linalg::solve(matrix.iter().map(|_| vec![]).collect(), rhs) {
            Solution::Inconsistent { residual } => {
                return Err(PoolError::Inconsistent {
                    residual: residual.to_f64_lossy(),
                })
            }
            _ => Vec::new(),
        }
    } else {
        match linalg::solve(matrix, rhs) {
            Solution::Unique(x) => x,
            Solution::Underdetermined { rank, unknowns } => {
                return Err(PoolError::Underdetermined { rank, unknowns })
            }
            Solution::Inconsistent { residual } => {
                return Err(PoolError::Inconsistent {
                    residual: residual.to_f64_lossy(),
                })
            }
        }
    };

    let slack = Q::normalization_tol();
    let mut rows = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            rows[i][j] = match &known[i][j] {
                Some(v) => v.clone(),
                None => {
                    let v = x[index[i][j]].clone();
                    if v < -slack.clone() || v > Q::one() + slack.clone() {
                        return Err(PoolError::CompletedOutOfRange {
                            i,
                            j,
                            value: v.to_f64_lossy(),
                        });
                    }
                    // rounding noise only; genuine violations were rejected above
                    Q::min_of(Q::max_of(v, Q::zero()), Q::one())
                }
            };
        }
    }
    Ok(AllocationMatrix { rows })
}

/// Entries are non-negative, so a column whose fixed entries already sum to
/// one, or a fairness row with no load left to place, has zeros everywhere
/// else. Linear algebra alone cannot see this.
fn pin_forced_zeros<Q: Scalar>(known: &mut [Vec<Option<Q>>], load: &[Q]) {
    let n = known.len();
    let slack = Q::normalization_tol();
    loop {
        let mut changed = false;
        for j in 0..n {
            let fixed_sum = (0..n).fold(Q::zero(), |acc, i| {
                acc + known[i][j].clone().unwrap_or_else(Q::zero)
            });
            let has_free = (0..n).any(|i| known[i][j].is_none());
            if has_free && (Q::one() - fixed_sum).abs() <= slack {
                for row in known.iter_mut() {
                    if row[j].is_none() {
                        row[j] = Some(Q::zero());
                    }
                }
                changed = true;
            }
        }
        for (i, row) in known.iter_mut().enumerate() {
            let placed = (0..n).fold(Q::zero(), |acc, j| {
                acc + load[j].clone() * row[j].clone().unwrap_or_else(Q::zero)
            });
            let has_free = row.iter().any(Option::is_none);
            let left = load[i].clone() - placed;
            if has_free && left.abs() <= slack.clone() * Q::max_of(load[i].clone(), Q::one()) {
                for v in row.iter_mut().filter(|v| v.is_none()) {
                    *v = Some(Q::zero());
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

pub fn complete_alternative<T: Real>(
    pool: &PoolSpec<T>,
    fixed: &[(usize, usize, T)],
) -> Result<AllocationMatrix<T>, PoolError> {
    complete_alternative_from(&pool.lambdas(), &pool.means(), fixed)
}

/// `λ_i b_i − Σ_j λ_j a[i][j] b_j` for every row.
pub fn fairness_residuals<Q: Scalar>(lambda: &[Q], b: &[Q], a: &AllocationMatrix<Q>) -> Vec<Q> {
    let n = a.n();
    (0..n)
        .map(|i| {
            let shared = (0..n).fold(Q::zero(), |acc, j| {
                acc + lambda[j].clone() * a.get(i, j).clone() * b[j].clone()
            });
            lambda[i].clone() * b[i].clone() - shared
        })
        .collect()
}

/// Capacity excess `a[i][j] b_j − b_i` for every pair where it exceeds `tol`.
pub fn capacity_violations<Q: Scalar>(
    b: &[Q],
    a: &AllocationMatrix<Q>,
    tol: &Q,
) -> Vec<CapacityViolation<Q>> {
    let n = a.n();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let excess = a.get(i, j).clone() * b[j].clone() - b[i].clone();
            if excess > *tol {
                out.push(CapacityViolation { i, j, excess });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnCheck<T> {
    pub column: usize,
    pub sum: T,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityViolation<T> {
    pub i: usize,
    pub j: usize,
    pub excess: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScaleFamily {
    Pass(String),
    Fail(String),
    NotApplicable(String),
}

impl ScaleFamily {
    pub fn holds(&self) -> bool {
        matches!(self, Self::Pass(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport<T> {
    pub full_allocation: Vec<ColumnCheck<T>>,
    pub fairness: Vec<T>,
    pub fairness_tol: T,
    pub capacity: Vec<CapacityViolation<T>>,
    pub scale_family: ScaleFamily,
    /// Net profit of the pooled surplus of each participant.
    pub net_profit: Vec<bool>,
}

impl<T: Real> ValidationReport<T> {
    pub fn full_allocation_holds(&self) -> bool {
        self.full_allocation.iter().all(|c| c.pass)
    }

    pub fn fairness_holds(&self) -> bool {
        self.fairness.iter().all(|r| r.abs() <= self.fairness_tol)
    }

    pub fn capacity_holds(&self) -> bool {
        self.capacity.is_empty()
    }

    /// Full allocation and fairness: the matrix is a well-formed fair rule.
    pub fn is_well_formed(&self) -> bool {
        self.full_allocation_holds() && self.fairness_holds()
    }

    /// Fairness, capacity and scale family all hold.
    pub fn assumptions_hold(&self) -> bool {
        self.is_well_formed() && self.capacity_holds() && self.scale_family.holds()
    }
}

impl<T: Real> fmt::Display for ValidationReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
        writeln!(f, "full allocation: {}", verdict(self.full_allocation_holds()))?;
        for c in self.full_allocation.iter().filter(|c| !c.pass) {
            writeln!(f, "  column {} sums to {}", c.column + 1, c.sum)?;
        }
        writeln!(f, "fairness: {}", verdict(self.fairness_holds()))?;
        for (i, r) in self.fairness.iter().enumerate() {
            writeln!(f, "  row {} residual {:e}", i + 1, r.to_f64_lossy())?;
        }
        writeln!(f, "capacity: {}", verdict(self.capacity_holds()))?;
        for v in &self.capacity {
            writeln!(
                f,
                "  ({}, {}) exceeds by {:.7}",
                v.i + 1,
                v.j + 1,
                v.excess.to_f64_lossy()
            )?;
        }
        match &self.scale_family {
            ScaleFamily::Pass(r) => writeln!(f, "scale family: pass ({r})")?,
            ScaleFamily::Fail(r) => writeln!(f, "scale family: FAIL ({r})")?,
            ScaleFamily::NotApplicable(r) => writeln!(f, "scale family: n/a ({r})")?,
        }
        let np: Vec<&str> = self.net_profit.iter().map(|&b| verdict(b)).collect();
        writeln!(f, "net profit: {}", np.join(" "))
    }
}

/// Structural scale-family test on the participants' severities.
pub fn scale_family<T: Real>(pool: &PoolSpec<T>) -> ScaleFamily {
    let keys: Vec<ShapeKey<T>> = pool
        .participants
        .iter()
        .map(|p| p.severity.shape_key())
        .collect();
    if keys.iter().any(|k| matches!(k, ShapeKey::Unclassified)) {
        return ScaleFamily::NotApplicable("mixture severities have no structural criterion".into());
    }
    let tol = T::lit(1e-12);
    if keys.iter().all(|k| k.matches(&keys[0], tol)) {
        let what = match &keys[0] {
            ShapeKey::Exponential => "all exponential".to_string(),
            ShapeKey::Gamma { shape } => format!("all gamma with shape {shape}"),
            ShapeKey::LogNormal { sigma2 } => format!("all lognormal with sigma2 {sigma2}"),
            ShapeKey::Discrete(_) => "normalized discrete laws coincide".to_string(),
            ShapeKey::Unclassified => unreachable!(),
        };
        ScaleFamily::Pass(what)
    } else {
        ScaleFamily::Fail("normalized severities differ".into())
    }
}

/// Checks full allocation, fairness, capacity, scale family and net profit.
pub fn validate<T: Real>(pool: &PoolSpec<T>, a: &AllocationMatrix<T>, tol: T) -> ValidationReport<T> {
    assert_eq!(pool.len(), a.n(), "matrix and pool sizes differ");
    let lambda = pool.lambdas();
    let b = pool.means();
    let full_allocation = a
        .column_sums()
        .into_iter()
        .enumerate()
        .map(|(column, sum)| ColumnCheck {
            column,
            sum,
            pass: (sum - T::one()).abs() <= tol,
        })
        .collect();
    let fairness = fairness_residuals(&lambda, &b, a);
    let capacity = capacity_violations(&b, a, &tol);
    let net_profit = pool
        .premium_rates()
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let pooled_rate: T = (0..a.n()).map(|j| lambda[j] * *a.get(i, j) * b[j]).sum();
            c > pooled_rate
        })
        .collect();
    ValidationReport {
        full_allocation,
        fairness,
        fairness_tol: tol,
        capacity,
        scale_family: scale_family(pool),
        net_profit,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharingRule {
    MeanProportional,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Feasibility {
    pub feasible: bool,
    /// First violating 0-based pair `(i, j)`.
    pub witness: Option<(usize, usize)>,
}

/// Closed-form capacity condition for the named rule.
///
/// Mean-proportional: `λ_i b_j ≤ Σ_k λ_k b_k`. Uniform: `b_j ≤ n b_i`.
pub fn capacity_feasibility<T: Real>(pool: &PoolSpec<T>, rule: SharingRule) -> Feasibility {
    let lambda = pool.lambdas();
    let b = pool.means();
    let n = pool.len();
    let total: T = lambda.iter().zip(&b).map(|(&l, &m)| l * m).sum();
    let nn = T::from_usize_lossy(n);
    let slack = T::lit(1e-12);
    for i in 0..n {
        for j in 0..n {
            let ok = match rule {
                SharingRule::MeanProportional => lambda[i] * b[j] <= total * (T::one() + slack),
                SharingRule::Uniform => b[j] <= nn * b[i] * (T::one() + slack),
            };
            if !ok {
                return Feasibility {
                    feasible: false,
                    witness: Some((i, j)),
                };
            }
        }
    }
    Feasibility {
        feasible: true,
        witness: None,
    }
}
