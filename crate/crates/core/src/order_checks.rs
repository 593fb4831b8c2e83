//! Convex-order checks through stop-loss transforms.
//!
//! `X ≼cx Y` iff `E X = E Y` and `E[(X − t)_+] ≤ E[(Y − t)_+]` for all `t`.
//! For finite laws both transforms are piecewise linear with kinks at the
//! atoms, so checking the union of supports is exact. Other laws are compared
//! on a dense grid with local refinement.

use std::fmt::Write as _;

use thiserror::Error;

use crate::distributions::{DiscreteLaw, SeverityModel};
use crate::pool_model::{AllocationMatrix, PoolSpec};
use crate::pooled_losses::{build_pooled_claim, build_thinned_standalone};
use crate::ruin::curves::format_sig9;
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrderError {
    #[error("transfer matrix needs b_i <= b_j, got b_{} = {bi} > b_{} = {bj}", .i + 1, .j + 1)]
    MeansOutOfOrder { i: usize, j: usize, bi: f64, bj: f64 },
    #[error("transfer matrix needs two distinct participants within the pool")]
    BadPair,
    #[error("the chain condition is stated for equal claim frequencies")]
    HeterogeneousFrequencies,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StopLossComparison<T> {
    pub grid: Vec<T>,
    pub lhs: Vec<T>,
    pub rhs: Vec<T>,
    pub mean_gap: T,
    pub tol: T,
    pub dominated: bool,
    /// First `(t, lhs − rhs)` exceeding the tolerance.
    pub first_violation: Option<(T, T)>,
}

impl<T: Scalar> StopLossComparison<T> {
    fn assemble(grid: Vec<T>, lhs: Vec<T>, rhs: Vec<T>, mean_gap: T, tol: T) -> Self {
        let first_violation = grid
            .iter()
            .zip(lhs.iter().zip(&rhs))
            .map(|(t, (l, r))| (t.clone(), l.clone() - r.clone()))
            .find(|(_, gap)| *gap > tol);
        let dominated = mean_gap <= tol && first_violation.is_none();
        Self {
            grid,
            lhs,
            rhs,
            mean_gap,
            tol,
            dominated,
            first_violation,
        }
    }

    /// `(lhs, rhs)` at a grid point, if present.
    pub fn at(&self, t: &T) -> Option<(T, T)> {
        self.grid
            .iter()
            .position(|g| g == t)
            .map(|k| (self.lhs[k].clone(), self.rhs[k].clone()))
    }

    /// `t,lhs,rhs,gap` rows with `gap = lhs − rhs`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,lhs,rhs,gap\n");
        for ((t, l), r) in self.grid.iter().zip(&self.lhs).zip(&self.rhs) {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                format_sig9(t.to_f64_lossy()),
                format_sig9(l.to_f64_lossy()),
                format_sig9(r.to_f64_lossy()),
                format_sig9((l.clone() - r.clone()).to_f64_lossy())
            );
        }
        out
    }
}

/// Grid used for laws without a finite support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    /// Extra points inserted around each near-violation.
    pub refine: usize,
    /// Upper end of the grid is the `1 − tail_prob` quantile.
    pub tail_prob: f64,
    /// Tolerance for the exact atom path.
    pub exact_tol: f64,
    /// Tolerance for the grid path.
    pub grid_tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 2000,
            refine: 16,
            tail_prob: 1e-6,
            exact_tol: 1e-9,
            grid_tol: 1e-6,
        }
    }
}

/// Exact check for finite laws over any ordered field.
pub fn convex_order_dominates_exact<S: Scalar>(
    x: &DiscreteLaw<S>,
    y: &DiscreteLaw<S>,
    tol: &S,
) -> StopLossComparison<S> {
    let mut grid: Vec<S> = std::iter::once(S::zero())
        .chain(x.kinks().cloned())
        .chain(y.kinks().cloned())
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("ordered field"));
    grid.dedup();
    let lhs = grid.iter().map(|t| x.stop_loss(t)).collect();
    let rhs = grid.iter().map(|t| y.stop_loss(t)).collect();
    let mean_gap = (x.mean() - y.mean()).abs();
    StopLossComparison::assemble(grid, lhs, rhs, mean_gap, tol.clone())
}

/// Checks `x ≼cx y`, exactly when both laws are finite and on a refined
/// grid of analytic stop-loss values otherwise.
pub fn convex_order_dominates<T: Real>(
    x: &SeverityModel<T>,
    y: &SeverityModel<T>,
    spec: &GridSpec,
) -> StopLossComparison<T> {
    if let (Some(dx), Some(dy)) = (x.as_discrete(), y.as_discrete()) {
        return convex_order_dominates_exact(&dx, &dy, &T::lit(spec.exact_tol));
    }
    let tol = T::lit(spec.grid_tol);
    let p = T::one() - T::lit(spec.tail_prob);
    let top = x.quantile(p).max(y.quantile(p)).max(T::min_positive_value());
    let n = spec.points.max(2);
    let mut grid: Vec<T> = (0..n)
        .map(|k| top * T::from_usize_lossy(k) / T::from_usize_lossy(n - 1))
        .collect();
    // a few points past the quantile catch late crossings in heavy tails
    let mut t = top;
    for _ in 0..12 {
        t = t * T::lit(2.0);
        grid.push(t);
    }
    for law in [x, y] {
        if let Some(d) = law.as_discrete() {
            grid.extend(d.kinks().copied());
        }
    }
    sort_dedup(&mut grid);

    let slack = |t: T| y.stop_loss(t) - x.stop_loss(t);
    let scores: Vec<T> = grid.iter().map(|&t| slack(t)).collect();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite"));
    let mut extra = Vec::new();
    for &k in order.iter().take(32) {
        let lo = grid[k.saturating_sub(1)];
        let hi = grid[(k + 1).min(grid.len() - 1)];
        for r in 1..=spec.refine {
            extra.push(lo + (hi - lo) * T::from_usize_lossy(r) / T::from_usize_lossy(spec.refine + 1));
        }
    }
    grid.extend(extra);
    sort_dedup(&mut grid);

    let lhs = grid.iter().map(|&t| x.stop_loss(t)).collect();
    let rhs = grid.iter().map(|&t| y.stop_loss(t)).collect();
    let mean_gap = (x.mean() - y.mean()).abs();
    StopLossComparison::assemble(grid, lhs, rhs, mean_gap, tol)
}

fn sort_dedup<T: Real>(v: &mut Vec<T>) {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    v.dedup();
}

/// `Z_i ≼cx Y′_i`: the pooled payment against the thinned stand-alone claim.
pub fn check_pooled_dominance<T: Real>(
    pool: &PoolSpec<T>,
    a: &AllocationMatrix<T>,
    i: usize,
    spec: &GridSpec,
) -> StopLossComparison<T> {
    let z = build_pooled_claim(pool, a, i).law;
    let y = build_thinned_standalone(pool, i);
    convex_order_dominates(&z, &y, spec)
}

/// The test matrix that moves the fraction `b_i/b_j` of `j`'s claims to `i`
/// and all of `i`'s claims to `j`; bystanders keep their own.
pub fn build_transfer_matrix<S: Scalar>(i: usize, j: usize, b: &[S]) -> Result<AllocationMatrix<S>, OrderError> {
    let n = b.len();
    if i == j || i >= n || j >= n {
        return Err(OrderError::BadPair);
    }
    if b[i] > b[j] {
        return Err(OrderError::MeansOutOfOrder {
            i,
            j,
            bi: b[i].to_f64_lossy(),
            bj: b[j].to_f64_lossy(),
        });
    }
    let alpha = b[i].clone() / b[j].clone();
    let mut rows = vec![vec![S::zero(); n]; n];
    for (l, row) in rows.iter_mut().enumerate() {
        if l != i && l != j {
            row[l] = S::one();
        }
    }
    rows[i][j] = alpha.clone();
    rows[j][j] = S::one() - alpha;
    rows[j][i] = S::one();
    Ok(AllocationMatrix::new(rows).expect("entries lie in [0, 1]"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport<T> {
    /// Participant with the smaller mean.
    pub i: usize,
    pub j: usize,
    /// `Y_j / b_j` against `Y_i / b_i`.
    pub comparison: StopLossComparison<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport<T> {
    /// Participants by increasing mean claim.
    pub order: Vec<usize>,
    pub pairs: Vec<PairReport<T>>,
}

impl<T: Scalar> ChainReport<T> {
    pub fn holds(&self) -> bool {
        self.pairs.iter().all(|p| p.comparison.dominated)
    }
}

/// For every pair with `b_i ≤ b_j`, checks `Y_j/b_j ≼cx Y_i/b_i`, the
/// necessary condition on normalized severities under equal frequencies.
pub fn normalized_chain_check<T: Real>(pool: &PoolSpec<T>, spec: &GridSpec) -> Result<ChainReport<T>, OrderError> {
    if !pool.has_homogeneous_frequencies() {
        return Err(OrderError::HeterogeneousFrequencies);
    }
    let b = pool.means();
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&x, &y| b[x].partial_cmp(&b[y]).expect("finite means"));
    let normalized: Vec<SeverityModel<T>> = pool.participants.iter().map(|p| p.severity.normalized()).collect();
    let mut pairs = Vec::new();
    for i in 0..pool.len() {
        for j in 0..pool.len() {
            if i != j && b[i] <= b[j] {
                pairs.push(PairReport {
                    i,
                    j,
                    comparison: convex_order_dominates(&normalized[j], &normalized[i], spec),
                });
            }
        }
    }
    Ok(ChainReport { order, pairs })
}
