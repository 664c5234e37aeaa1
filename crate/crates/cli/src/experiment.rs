//! Ensemble experiment files.
//!
//! ```toml
//! family = "star"                # or "regular" with `vertices` and `degree`
//! edges = 6
//! condition = "equitransmitting" # or "neumann"
//! length_min = 1.0               # optional, default 1
//! length_max = 2.0               # optional, default 2
//! seed = 42                      # optional, default 0
//! graphs = 4                     # optional, default 1
//! kmin = 0.1                     # optional
//! kmax = 20.0                    # optional, default kmin + 40π/(mean total length)
//! orders = [0.5, 1, 2, inf]      # optional
//! s_values = [0, 0.5, 1]         # optional
//!
//! [trend]                        # optional size scan
//! source = "fixed_variance"      # or "spectral"
//! sizes = [16, 64, 256, 1024]    # bond counts, or edge / vertex counts
//! variance = 1.0                 # fixed_variance only
//! samples = 10000                # fixed_variance only
//! ```

use std::path::Path;

use qgraph_core::ensemble::GraphFamily;
use qgraph_core::scattering::ConditionKind;
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::graph_file::toml_error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FamilyName {
    Star,
    Regular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ConditionName {
    Neumann,
    Equitransmitting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendKind {
    FixedVariance,
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrendConfig {
    pub source: TrendKind,
    pub sizes: Vec<usize>,
    #[serde(default = "default_variance")]
    pub variance: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_variance() -> f64 {
    1.0
}

fn default_samples() -> usize {
    10_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    family: FamilyName,
    edges: Option<usize>,
    vertices: Option<usize>,
    degree: Option<usize>,
    condition: ConditionName,
    length_min: Option<f64>,
    length_max: Option<f64>,
    seed: Option<u64>,
    graphs: Option<usize>,
    kmin: Option<f64>,
    kmax: Option<f64>,
    orders: Option<Vec<f64>>,
    s_values: Option<Vec<f64>>,
    trend: Option<TrendConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub family: GraphFamily,
    pub condition: ConditionKind,
    pub length_min: f64,
    pub length_max: f64,
    pub seed: Option<u64>,
    pub graphs: usize,
    pub kmin: Option<f64>,
    pub kmax: Option<f64>,
    pub orders: Option<Vec<f64>>,
    pub s_values: Option<Vec<f64>>,
    pub trend: Option<TrendConfig>,
}

impl Experiment {
    /// Mean total length of a sampled graph.
    pub fn mean_total_length(&self) -> f64 {
        let edges = match self.family {
            GraphFamily::Star { edges } => edges,
            GraphFamily::Regular { vertices, degree } => vertices * degree / 2,
        };
        edges as f64 * 0.5 * (self.length_min + self.length_max)
    }
}

fn invalid(message: impl Into<String>) -> CliError {
    CliError::Validation {
        invariant: "experiment",
        message: message.into(),
    }
}

pub fn parse_experiment_str(text: &str) -> CliResult<Experiment> {
    let raw: RawExperiment = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    let family = match raw.family {
        FamilyName::Star => GraphFamily::Star {
            edges: raw.edges.ok_or_else(|| invalid("a star family needs `edges`"))?,
        },
        FamilyName::Regular => GraphFamily::Regular {
            vertices: raw.vertices.ok_or_else(|| invalid("a regular family needs `vertices`"))?,
            degree: raw.degree.ok_or_else(|| invalid("a regular family needs `degree`"))?,
        },
    };
    let condition = match raw.condition {
        ConditionName::Neumann => ConditionKind::Neumann,
        ConditionName::Equitransmitting => ConditionKind::EquiTransmitting,
    };
    let length_min = raw.length_min.unwrap_or(1.0);
    let length_max = raw.length_max.unwrap_or(2.0);
    if !(length_min > 0.0 && length_min < length_max && length_max.is_finite()) {
        return Err(invalid(format!("length range [{length_min}, {length_max}] needs 0 < min < max")));
    }
    let graphs = raw.graphs.unwrap_or(1);
    if graphs == 0 {
        return Err(invalid("`graphs` must be at least 1"));
    }
    if let Some(t) = &raw.trend {
        if t.sizes.is_empty() || t.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("trend sizes must be nonempty and increasing"));
        }
        if t.source == TrendKind::FixedVariance && (t.samples == 0 || !(t.variance >= 0.0)) {
            return Err(invalid("fixed-variance trends need samples > 0 and variance >= 0"));
        }
    }
    Ok(Experiment {
        family,
        condition,
        length_min,
        length_max,
        seed: raw.seed,
        graphs,
        kmin: raw.kmin,
        kmax: raw.kmax,
        orders: raw.orders,
        s_values: raw.s_values,
        trend: raw.trend,
    })
}

pub fn parse_experiment_file(path: &Path) -> CliResult<Experiment> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_experiment_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_experiment() {
        let e = parse_experiment_str(
            "family = \"star\"\nedges = 6\ncondition = \"equitransmitting\"\norders = [1, inf]\n[trend]\nsource = \"fixed_variance\"\nsizes = [16, 64]\n",
        )
        .unwrap();
        assert_eq!(e.family, GraphFamily::Star { edges: 6 });
        assert_eq!(e.orders, Some(vec![1.0, f64::INFINITY]));
        assert_eq!(e.trend.as_ref().unwrap().samples, 10_000);
        assert_eq!(e.mean_total_length(), 9.0);
    }

    #[test]
    fn rejects_incomplete_or_invalid() {
        assert!(matches!(
            parse_experiment_str("family = \"regular\"\nvertices = 10\ncondition = \"neumann\"\n"),
            Err(CliError::Validation { .. })
        ));
        assert!(matches!(
            parse_experiment_str("family = \"star\"\nedges = 4\ncondition = \"neumann\"\nlength_min = 0\n"),
            Err(CliError::Validation { .. })
        ));
        match parse_experiment_str("family = \"tree\"\nedges = 4\ncondition = \"neumann\"\n") {
            Err(CliError::Parse { line, field, .. }) => assert_eq!((line, field.as_str()), (1, "family")),
            other => panic!("{other:?}"),
        }
    }
}
