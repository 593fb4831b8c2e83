use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::pool_model::{AllocationMatrix, PoolSpec};
use crate::pooled_losses::{pooled_surplus_spec, standalone_surplus_spec, SurplusSpec};
use crate::scalar::Real;

use super::closed_form::{describe, mixture_expansion, ruin_exponential};
use super::monte_carlo::{mc_curve, McConfig};
use super::panjer::{ruin_pk_panjer, PanjerConfig};
use super::RuinError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Exponential,
    MixtureExponential,
    Panjer,
    MonteCarlo,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Exponential => "closed_exponential",
            Self::MixtureExponential => "closed_mixture",
            Self::Panjer => "panjer",
            Self::MonteCarlo => "mc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// What the caller asks for; `Auto` picks a closed form when the claim law
/// allows one and Panjer otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    #[default]
    Auto,
    Closed,
    Panjer,
    Mc,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Bounds<T> {
    Exact,
    Sandwich { lower: Vec<T>, upper: Vec<T> },
    Confidence { half_width: Vec<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuinCurve<T> {
    pub kappa: Vec<T>,
    pub psi: Vec<T>,
    pub bounds: Bounds<T>,
    pub method: Method,
    /// Lattice span for the Panjer route.
    pub span: Option<T>,
}

impl<T: Real> RuinCurve<T> {
    /// Pointwise uncertainty: bound width, CI half-width, or zero.
    pub fn width(&self) -> Option<Vec<T>> {
        match &self.bounds {
            Bounds::Exact => None,
            Bounds::Sandwich { lower, upper } => Some(upper.iter().zip(lower).map(|(&u, &l)| u - l).collect()),
            Bounds::Confidence { half_width } => Some(half_width.clone()),
        }
    }

    pub fn tolerance(&self) -> Vec<T> {
        self.width().unwrap_or_else(|| vec![T::zero(); self.psi.len()])
    }

    /// Lower and upper envelopes (the estimate itself when exact).
    pub fn envelopes(&self) -> (Vec<T>, Vec<T>) {
        match &self.bounds {
            Bounds::Exact => (self.psi.clone(), self.psi.clone()),
            Bounds::Sandwich { lower, upper } => (lower.clone(), upper.clone()),
            Bounds::Confidence { half_width } => (
                self.psi.iter().zip(half_width).map(|(&p, &h)| (p - h).max(T::zero())).collect(),
                self.psi.iter().zip(half_width).map(|(&p, &h)| (p + h).min(T::one())).collect(),
            ),
        }
    }

    pub fn is_non_increasing(&self, tol: T) -> bool {
        self.psi.windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

/// `steps` equal intervals on `[min, max]`, that is `steps + 1` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaGrid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl KappaGrid {
    pub fn points<T: Real>(&self) -> Vec<T> {
        if self.steps == 0 {
            return vec![T::lit(self.min)];
        }
        (0..=self.steps)
            .map(|k| T::lit(self.min + (self.max - self.min) * k as f64 / self.steps as f64))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurveOptions {
    pub panjer: PanjerConfig,
    pub mc: McConfig,
}

/// Ruin curve of one surplus process by the requested method.
pub fn curve_for_spec<T: Real>(
    spec: &SurplusSpec<T>,
    grid: &[T],
    choice: MethodChoice,
    opts: &CurveOptions,
) -> Result<RuinCurve<T>, RuinError> {
    let closed = |spec: &SurplusSpec<T>| -> Result<RuinCurve<T>, RuinError> {
        let (zero, comps) = spec.claim.exponential_components().ok_or_else(|| RuinError::MethodMismatch {
            method: "closed form",
            needs: "exponential or mixture-of-exponential claims",
            law: describe(&spec.claim),
        })?;
        if zero.is_zero() && comps.len() == 1 {
            let psi = grid.iter().map(|&k| ruin_exponential(spec, k)).collect::<Result<_, _>>()?;
            Ok(RuinCurve {
                kappa: grid.to_vec(),
                psi,
                bounds: Bounds::Exact,
                method: Method::Exponential,
                span: None,
            })
        } else {
            let e = mixture_expansion(spec)?;
            Ok(RuinCurve {
                kappa: grid.to_vec(),
                psi: grid.iter().map(|&k| e.eval(k)).collect(),
                bounds: Bounds::Exact,
                method: Method::MixtureExponential,
                span: None,
            })
        }
    };
    match choice {
        MethodChoice::Closed => closed(spec),
        MethodChoice::Panjer => ruin_pk_panjer(spec, grid, &opts.panjer),
        MethodChoice::Mc => mc_curve(spec, grid, &opts.mc),
        MethodChoice::Auto => {
            if spec.claim.is_exponential_mixture() {
                closed(spec)
            } else {
                ruin_pk_panjer(spec, grid, &opts.panjer)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantCurves<T> {
    /// 0-based.
    pub participant: usize,
    pub standalone: RuinCurve<T>,
    pub pooled: RuinCurve<T>,
}

impl<T: Real> ParticipantCurves<T> {
    /// Largest `pooled − stand-alone` difference and where it occurs.
    pub fn worst_excess(&self) -> (T, T) {
        let mut worst = (T::neg_infinity(), T::zero());
        for (k, (&p, &s)) in self.pooled.psi.iter().zip(&self.standalone.psi).enumerate() {
            if p - s > worst.0 {
                worst = (p - s, self.pooled.kappa[k]);
            }
        }
        worst
    }

    /// Pooled never above stand-alone beyond the combined method tolerance.
    pub fn pooling_benefits(&self) -> bool {
        let tp = self.pooled.tolerance();
        let ts = self.standalone.tolerance();
        self.pooled
            .psi
            .iter()
            .zip(&self.standalone.psi)
            .enumerate()
            .all(|(k, (&p, &s))| p <= s + tp[k].max(ts[k]) + T::lit(1e-12))
    }

    /// Reserves where the pooled envelope lies strictly above the
    /// stand-alone one, so the reversal survives method error.
    pub fn reversal_points(&self) -> Vec<T> {
        let (p_low, _) = self.pooled.envelopes();
        let (_, s_up) = self.standalone.envelopes();
        self.pooled
            .kappa
            .iter()
            .enumerate()
            .filter(|&(k, _)| p_low[k] > s_up[k] + T::lit(1e-12))
            .map(|(_, &kappa)| kappa)
            .collect()
    }
}

/// Stand-alone and pooled curves for every participant on a shared grid.
pub fn ruin_curves<T: Real>(
    pool: &PoolSpec<T>,
    a: &AllocationMatrix<T>,
    choice: MethodChoice,
    grid: &[T],
    opts: &CurveOptions,
) -> Result<Vec<ParticipantCurves<T>>, RuinError> {
    (0..pool.len())
        .map(|i| {
            let standalone = curve_for_spec(&standalone_surplus_spec(pool, i)?, grid, choice, opts)?;
            let pooled = curve_for_spec(&pooled_surplus_spec(pool, a, i)?, grid, choice, opts)?;
            Ok(ParticipantCurves {
                participant: i,
                standalone,
                pooled,
            })
        })
        .collect()
}

/// `%g`-style rendering with nine significant digits.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if !(-5..9).contains(&exp) {
        let s = format!("{x:.8e}");
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        format!("{}e{}", trim(mantissa.to_string()), e)
    } else {
        let decimals = (8 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    }
}

pub const CURVE_CSV_HEADER: &str = "kappa,psi,lower,upper,method,participant,mode";

/// CSV rows for a set of participant curves; participants are 1-based.
pub fn curves_to_csv<T: Real>(curves: &[ParticipantCurves<T>]) -> String {
    let mut out = String::new();
    out.push_str(CURVE_CSV_HEADER);
    out.push('\n');
    for pc in curves {
        for (mode, curve) in [("standalone", &pc.standalone), ("pooled", &pc.pooled)] {
            let (lower, upper) = match &curve.bounds {
                Bounds::Exact => (None, None),
                _ => {
                    let (l, u) = curve.envelopes();
                    (Some(l), Some(u))
                }
            };
            for (k, (&kappa, &psi)) in curve.kappa.iter().zip(&curve.psi).enumerate() {
                let cell = |v: &Option<Vec<T>>| v.as_ref().map(|v| format_sig9(v[k].to_f64_lossy())).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    format_sig9(kappa.to_f64_lossy()),
                    format_sig9(psi.to_f64_lossy()),
                    cell(&lower),
                    cell(&upper),
                    curve.method,
                    pc.participant + 1,
                    mode
                );
            }
        }
    }
    out
}
