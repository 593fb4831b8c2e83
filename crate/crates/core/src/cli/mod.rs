//! Command implementations behind the `poolruin` binary.
//!
//! Every command writes human-readable lines to `out` and CSV either to files
//! under an output directory or, for `ruin`, to `out` when none is given.

pub mod scenario;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::order_checks::{check_pooled_dominance, normalized_chain_check, GridSpec, StopLossComparison};
use crate::pool_model::{validate, ValidationReport, DEFAULT_TOL};
use crate::ruin::curves::{curves_to_csv, CURVE_CSV_HEADER};
use crate::ruin::{ruin_curves, MethodChoice, ParticipantCurves, RuinError};

pub use scenario::{embedded, figure_scenarios, Expectations, FixedEntry, MatrixSpec, Resolved, Scenario, EMBEDDED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_ASSUMPTION: i32 = 2;
pub const EXIT_METHOD: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Method(String),
    #[error("{0}")]
    Compute(String),
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Method(_) => EXIT_METHOD,
            _ => EXIT_PARSE,
        }
    }
}

impl From<RuinError> for CliError {
    fn from(e: RuinError) -> Self {
        match e {
            RuinError::MethodMismatch { .. } => Self::Method(e.to_string()),
            other => Self::Compute(other.to_string()),
        }
    }
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, body)?;
    Ok(path)
}

/// `check,row,col,value,limit,pass` rows, indices 1-based.
pub fn validation_csv(report: &ValidationReport<f64>) -> String {
    let mut s = String::from("check,row,col,value,limit,pass\n");
    for c in &report.full_allocation {
        s += &format!("full_allocation,,{},{},1,{}\n", c.column + 1, c.sum, c.pass);
    }
    for (i, r) in report.fairness.iter().enumerate() {
        let pass = r.abs() <= report.fairness_tol;
        s += &format!("fairness,{},,{},{},{}\n", i + 1, r, report.fairness_tol, pass);
    }
    for v in &report.capacity {
        s += &format!("capacity,{},{},{},0,false\n", v.i + 1, v.j + 1, v.excess);
    }
    let sf = report.scale_family.holds();
    s += &format!("scale_family,,,,,{sf}\n");
    for (i, &ok) in report.net_profit.iter().enumerate() {
        s += &format!("net_profit,{},,,,{ok}\n", i + 1);
    }
    s
}

/// Prints the validation report; exit 0 only when every check passes and 2
/// when any assumption fails. `dump` replaces the report by the normalized
/// scenario.
pub fn cmd_validate(
    resolved: &Resolved,
    dump: bool,
    out_dir: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let report = validate(&resolved.pool, &resolved.matrix, DEFAULT_TOL);
    if dump {
        out.write_all(resolved.scenario.to_normalized_toml().as_bytes())?;
    } else {
        writeln!(out, "scenario {}", resolved.scenario.name)?;
        writeln!(out, "matrix:\n{}", resolved.matrix)?;
        write!(out, "{report}")?;
    }
    if let Some(dir) = out_dir {
        write_file(dir, &format!("{}_validation.csv", resolved.scenario.name), &validation_csv(&report))?;
    }
    Ok(if report.assumptions_hold() { EXIT_OK } else { EXIT_ASSUMPTION })
}

fn curves_for(resolved: &Resolved, choice: MethodChoice, seed: Option<u64>) -> Result<Vec<ParticipantCurves<f64>>, CliError> {
    let mut opts = resolved.options();
    if let Some(seed) = seed {
        opts.mc.seed = seed;
    }
    Ok(ruin_curves(&resolved.pool, &resolved.matrix, choice, &resolved.grid(), &opts)?)
}

/// Stand-alone and pooled curves for every requested method as one CSV.
pub fn cmd_ruin(
    resolved: &Resolved,
    method: Option<MethodChoice>,
    seed: Option<u64>,
    out_dir: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let methods = method.map_or_else(|| resolved.scenario.methods.clone(), |m| vec![m]);
    let mut csv = format!("{CURVE_CSV_HEADER}\n");
    for choice in methods {
        let curves = curves_for(resolved, choice, seed)?;
        csv.extend(curves_to_csv(&curves).lines().skip(1).map(|l| format!("{l}\n")));
    }
    let target = match (out_dir, &resolved.scenario.output) {
        (Some(dir), _) => Some(dir.join(format!("{}.csv", resolved.scenario.name))),
        (None, Some(path)) => Some(PathBuf::from(path)),
        (None, None) => None,
    };
    match target {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(&path, csv)?;
            writeln!(out, "wrote {}", path.display())?;
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expected {
    Benefit,
    Reversal,
    Unstated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub scenario: String,
    /// 1-based.
    pub participant: usize,
    pub expected: Expected,
    pub benefits: bool,
    pub reversal_points: Vec<f64>,
    pub worst_excess: (f64, f64),
}

impl Verdict {
    pub fn ok(&self) -> bool {
        match self.expected {
            Expected::Benefit => self.benefits,
            Expected::Reversal => !self.reversal_points.is_empty(),
            Expected::Unstated => true,
        }
    }

    fn line(&self) -> String {
        let observed = if self.benefits {
            "pooled <= stand-alone everywhere".to_string()
        } else if let Some(first) = self.reversal_points.first() {
            format!(
                "pooled > stand-alone at {} points from kappa {first}",
                self.reversal_points.len()
            )
        } else {
            format!("inconclusive, worst excess {:.3e} at kappa {}", self.worst_excess.0, self.worst_excess.1)
        };
        let expected = match self.expected {
            Expected::Benefit => "expected benefit",
            Expected::Reversal => "expected reversal",
            Expected::Unstated => "no expectation",
        };
        let status = if self.ok() { "ok" } else { "MISMATCH" };
        format!("{} participant {}: {observed} ({expected}) {status}", self.scenario, self.participant)
    }
}

pub fn verdicts(scenario: &Scenario, curves: &[ParticipantCurves<f64>]) -> Vec<Verdict> {
    let expect = scenario.expect.clone().unwrap_or_default();
    curves
        .iter()
        .map(|c| {
            let p = c.participant + 1;
            let expected = if expect.benefit.contains(&p) {
                Expected::Benefit
            } else if expect.reversal.contains(&p) {
                Expected::Reversal
            } else {
                Expected::Unstated
            };
            Verdict {
                scenario: scenario.name.clone(),
                participant: p,
                expected,
                benefits: c.pooling_benefits(),
                reversal_points: c.reversal_points(),
                worst_excess: c.worst_excess(),
            }
        })
        .collect()
}

/// Curves and verdicts for both sharing rules of figure `n`.
pub fn cmd_reproduce(
    figure: u8,
    method: Option<MethodChoice>,
    seed: Option<u64>,
    out_dir: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(i32, Vec<Verdict>), CliError> {
    let scenarios = figure_scenarios(figure).ok_or_else(|| CliError::Parse(format!("figure {figure} is not one of 1..=5")))?;
    let mut all = Vec::new();
    for s in scenarios {
        let resolved = s.resolve()?;
        let curves = curves_for(&resolved, method.unwrap_or(MethodChoice::Auto), seed)?;
        if let Some(dir) = out_dir {
            let path = write_file(dir, &format!("{}.csv", resolved.scenario.name), &curves_to_csv(&curves))?;
            writeln!(out, "wrote {}", path.display())?;
        }
        for v in verdicts(&resolved.scenario, &curves) {
            writeln!(out, "{}", v.line())?;
            all.push(v);
        }
    }
    let code = if all.iter().all(Verdict::ok) { EXIT_OK } else { EXIT_ASSUMPTION };
    Ok((code, all))
}

fn comparison_line(c: &StopLossComparison<f64>) -> String {
    if c.dominated {
        "holds".into()
    } else if let Some((t, gap)) = c.first_violation {
        format!("fails: stop-loss gap {gap:.6e} at t = {t}")
    } else {
        format!("fails: means differ by {:.6e}", c.mean_gap)
    }
}

/// Convex-order checks of each pooled claim against its thinned stand-alone
/// claim, plus the normalized chain when frequencies coincide.
pub fn cmd_order_check(resolved: &Resolved, out_dir: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let spec = GridSpec::default();
    let name = &resolved.scenario.name;
    for i in 0..resolved.pool.len() {
        let cmp = check_pooled_dominance(&resolved.pool, &resolved.matrix, i, &spec);
        writeln!(out, "participant {}: Z <=cx Y' {}", i + 1, comparison_line(&cmp))?;
        if let Some(dir) = out_dir {
            write_file(dir, &format!("{name}_order_p{}.csv", i + 1), &cmp.to_csv())?;
        }
    }
    match normalized_chain_check(&resolved.pool, &spec) {
        Ok(chain) => {
            let order: Vec<String> = chain.order.iter().map(|k| (k + 1).to_string()).collect();
            writeln!(out, "chain by mean claim: {}", order.join(" <= "))?;
            for p in &chain.pairs {
                writeln!(
                    out,
                    "  Y{}/b{} <=cx Y{}/b{} {}",
                    p.j + 1,
                    p.j + 1,
                    p.i + 1,
                    p.i + 1,
                    comparison_line(&p.comparison)
                )?;
                if let Some(dir) = out_dir {
                    write_file(dir, &format!("{name}_chain_{}_{}.csv", p.i + 1, p.j + 1), &p.comparison.to_csv())?;
                }
            }
        }
        Err(e) => writeln!(out, "chain check skipped: {e}")?,
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolved(name: &str) -> Resolved {
        embedded(name).unwrap().resolve().unwrap()
    }

    #[test]
    fn validate_exit_codes() {
        let mut buf = Vec::new();
        assert_eq!(cmd_validate(&resolved("fig1_alt"), false, None, &mut buf).unwrap(), EXIT_OK);
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains("FAIL"), "{text}");

        let mut buf = Vec::new();
        assert_eq!(cmd_validate(&resolved("fig2_mp"), false, None, &mut buf).unwrap(), EXIT_ASSUMPTION);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("(3, 1)") && text.contains("(3, 2)"), "{text}");
    }

    #[test]
    fn dump_reparses() {
        let r = resolved("fig5_alt");
        let mut buf = Vec::new();
        cmd_validate(&r, true, None, &mut buf).unwrap();
        let back = Scenario::from_toml(std::str::from_utf8(&buf).unwrap(), "dump").unwrap();
        assert_eq!(back, r.scenario);
    }

    #[test]
    fn forced_closed_form_on_lognormal_is_a_method_error() {
        let err = cmd_ruin(&resolved("fig4_mp"), Some(MethodChoice::Closed), None, None, &mut io::sink()).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_METHOD);
    }

    #[test]
    fn ruin_csv_to_writer() {
        let mut buf = Vec::new();
        cmd_ruin(&resolved("fig1_mp"), None, None, None, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CURVE_CSV_HEADER));
        // 41 reserves, 3 participants, 2 modes
        assert_eq!(lines.count(), 41 * 3 * 2);
    }

    #[test]
    fn order_check_on_counterexamples() {
        // dominance survives although the scale family fails
        for name in ["counterexample_1", "counterexample_2"] {
            let r = resolved(name);
            assert_eq!(cmd_validate(&r, false, None, &mut io::sink()).unwrap(), EXIT_ASSUMPTION);
            let mut buf = Vec::new();
            cmd_order_check(&r, None, &mut buf).unwrap();
            let text = String::from_utf8(buf).unwrap();
            assert!(text.contains("participant 1: Z <=cx Y' holds"), "{text}");
            assert!(text.contains("participant 2: Z <=cx Y' holds"), "{text}");
        }
    }

    #[test]
    fn order_check_writes_csv() {
        let dir = tempfile::tempdir().unwrap();
        cmd_order_check(&resolved("counterexample_1"), Some(dir.path()), &mut io::sink()).unwrap();
        let csv = fs::read_to_string(dir.path().join("counterexample_1_order_p2.csv")).unwrap();
        assert!(csv.starts_with("t,lhs,rhs,gap\n0,1,1,0\n"), "{csv}");
        assert!(dir.path().join("counterexample_1_chain_1_2.csv").exists());
    }
}
