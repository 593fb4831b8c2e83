use serde::{Deserialize, Serialize};

use crate::pool_model::{build_mean_proportional, build_uniform, complete_alternative, AllocationMatrix, PoolSpec};
use crate::ruin::{CurveOptions, KappaGrid, McConfig, MethodChoice, PanjerConfig};

use super::CliError;

/// One entry pinned before completing the alternative matrix (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedEntry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum MatrixSpec {
    Explicit { rows: Vec<Vec<f64>> },
    MeanProportional,
    Uniform,
    Alternative { fixed: Vec<FixedEntry> },
}

/// What a figure is expected to show, by 1-based participant.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub benefit: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reversal: Vec<usize>,
}

fn default_methods() -> Vec<MethodChoice> {
    vec![MethodChoice::Auto]
}

fn default_grid() -> KappaGrid {
    KappaGrid {
        min: 0.0,
        max: 20.0,
        steps: 40,
    }
}

/// A scenario file. Field order matters for serialization: plain values
/// come before tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodChoice>,
    /// CSV destination used when no output directory is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default = "default_grid")]
    pub kappa_grid: KappaGrid,
    pub pool: PoolSpec<f64>,
    pub matrix: MatrixSpec,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub panjer: PanjerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectations>,
}

/// A scenario with its pool checked and matrix built.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub scenario: Scenario,
    pub pool: PoolSpec<f64>,
    pub matrix: AllocationMatrix<f64>,
}

impl Resolved {
    pub fn grid(&self) -> Vec<f64> {
        self.scenario.kappa_grid.points()
    }

    pub fn options(&self) -> CurveOptions {
        CurveOptions {
            panjer: self.scenario.panjer,
            mc: self.scenario.mc,
        }
    }
}

impl Scenario {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(format!("{origin}: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    /// Every default spelled out; parses back to an equal value.
    pub fn to_normalized_toml(&self) -> String {
        toml::to_string(self).expect("scenario fields are all representable")
    }

    pub fn resolve(self) -> Result<Resolved, CliError> {
        let located = |what: &str, e: &dyn std::fmt::Display| CliError::Parse(format!("{}: {what}: {e}", self.name));
        self.pool.check().map_err(|e| located("pool", &e))?;
        if self.kappa_grid.min < 0.0 || self.kappa_grid.max < self.kappa_grid.min {
            return Err(located("kappa_grid", &"needs 0 <= min <= max"));
        }
        let n = self.pool.len();
        let matrix = match &self.matrix {
            MatrixSpec::Explicit { rows } => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(located("matrix", &format!("rows must form a {n}x{n} matrix")));
                }
                AllocationMatrix::new(rows.clone()).map_err(|e| located("matrix", &e))?
            }
            MatrixSpec::MeanProportional => build_mean_proportional(&self.pool),
            MatrixSpec::Uniform => build_uniform(n),
            MatrixSpec::Alternative { fixed } => {
                let mut zero_based = Vec::with_capacity(fixed.len());
                for f in fixed {
                    if f.row == 0 || f.col == 0 || f.row > n || f.col > n {
                        return Err(located(
                            "matrix.fixed",
                            &format!("entry ({}, {}) outside 1..={n}", f.row, f.col),
                        ));
                    }
                    zero_based.push((f.row - 1, f.col - 1, f.value));
                }
                complete_alternative(&self.pool, &zero_based).map_err(|e| located("matrix", &e))?
            }
        };
        Ok(Resolved {
            pool: self.pool.clone(),
            matrix,
            scenario: self,
        })
    }
}

/// Scenario files shipped with the crate.
pub const EMBEDDED: &[(&str, &str)] = &[
    ("fig1_mp", include_str!("../../scenarios/fig1_mp.toml")),
    ("fig1_alt", include_str!("../../scenarios/fig1_alt.toml")),
    ("fig2_mp", include_str!("../../scenarios/fig2_mp.toml")),
    ("fig2_alt", include_str!("../../scenarios/fig2_alt.toml")),
    ("fig3_mp", include_str!("../../scenarios/fig3_mp.toml")),
    ("fig3_alt", include_str!("../../scenarios/fig3_alt.toml")),
    ("fig4_mp", include_str!("../../scenarios/fig4_mp.toml")),
    ("fig4_alt", include_str!("../../scenarios/fig4_alt.toml")),
    ("fig5_mp", include_str!("../../scenarios/fig5_mp.toml")),
    ("fig5_alt", include_str!("../../scenarios/fig5_alt.toml")),
    ("counterexample_1", include_str!("../../scenarios/counterexample_1.toml")),
    ("counterexample_2", include_str!("../../scenarios/counterexample_2.toml")),
];

pub fn embedded(name: &str) -> Option<Scenario> {
    EMBEDDED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, text)| Scenario::from_toml(text, n).expect("embedded scenarios parse"))
}

/// The two scenarios behind figure `n`, mean-proportional first.
pub fn figure_scenarios(n: u8) -> Option<[Scenario; 2]> {
    if !(1..=5).contains(&n) {
        return None;
    }
    Some([
        embedded(&format!("fig{n}_mp"))?,
        embedded(&format!("fig{n}_alt"))?,
    ])
}
