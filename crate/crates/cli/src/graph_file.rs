//! Graph description files.
//!
//! ```toml
//! vertices = 3                        # optional, defaults to largest index + 1
//! edges = [[0, 1, 1.0], [0, 2, 1.41]] # [i, j, length]
//!
//! [conditions]
//! default = "neumann"                 # used for every vertex not listed
//! 0 = "equitransmitting"
//! 2 = { matrix = [[1.0, 0.0]] }       # row-major (re, im) pairs, degree² of them
//! ```
//!
//! Every vertex needs a condition, either its own entry or `default`.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use qgraph_core::graph::MetricGraph;
use qgraph_core::scattering::{validate_scattering, CMatrix, ConditionKind, VertexConditions, VertexScattering, UNITARITY_TOL};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    vertices: Option<Spanned<usize>>,
    edges: Spanned<Vec<Spanned<RawEdge>>>,
    conditions: Option<BTreeMap<String, Spanned<RawCondition>>>,
}

#[derive(Debug, Deserialize)]
struct RawEdge(usize, usize, Number);

/// TOML keeps integers and floats apart; lengths and entries accept both.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub(crate) enum Number {
    Int(i64),
    Float(f64),
}

impl Number {
    pub(crate) fn value(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Float(x) => x,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawCondition {
    Named(String),
    Matrix { matrix: Vec<[Number; 2]> },
}

/// 1-based line of a byte offset.
pub(crate) fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Key assigned on the given line, or the nearest enclosing one above it.
fn field_at(text: &str, line: usize) -> String {
    let lines: Vec<&str> = text.lines().collect();
    let mut key = None;
    let mut table = None;
    for l in lines[..line.min(lines.len())].iter().rev() {
        let l = l.trim();
        if l.starts_with('[') && !l.starts_with("[[") && l.ends_with(']') && !l.contains('=') {
            table = Some(l.trim_matches(|c| c == '[' || c == ']').trim().to_string());
            break;
        }
        if key.is_none() {
            if let Some((k, _)) = l.split_once('=') {
                let k = k.trim().trim_matches('"');
                if !k.is_empty() && !k.contains(['[', ',']) {
                    key = Some(k.to_string());
                }
            }
        }
    }
    match (table, key) {
        (Some(t), Some(k)) => format!("{t}.{k}"),
        (Some(t), None) => t,
        (None, Some(k)) => k,
        (None, None) => "<document>".into(),
    }
}

pub(crate) fn toml_error(text: &str, err: toml::de::Error) -> CliError {
    let line = err.span().map(|s| line_of(text, s.start)).unwrap_or(1);
    CliError::Parse {
        line,
        field: field_at(text, line),
        message: err.message().trim().to_string(),
    }
}

fn validation(invariant: &'static str, message: impl Into<String>) -> CliError {
    CliError::Validation {
        invariant,
        message: message.into(),
    }
}

/// Maps graph and condition errors onto the invariant they violate.
fn core_validation(err: qgraph_core::Error) -> CliError {
    use qgraph_core::Error as E;
    let invariant = match &err {
        E::EmptyGraph => "nonempty edge list",
        E::LoopEdge { .. } => "no loops",
        E::DuplicateEdge { .. } => "no multiple edges",
        E::NonpositiveLength { .. } => "positive lengths",
        E::VertexOutOfRange { .. } => "vertex range",
        E::DisconnectedGraph { .. } => "connectivity",
        E::IsolatedVertex { .. } => "no isolated vertices",
        E::UnsupportedDegree(_) => "unsupported degree",
        E::DegreeMismatch { .. } => "degree mismatch",
        E::MissingCondition(_) => "missing condition",
        E::NotUnitary { .. } => "unitarity",
        _ => return CliError::Core(err),
    };
    validation(invariant, err.to_string())
}

fn explicit_matrix(vertex: usize, degree: usize, pairs: &[[Number; 2]]) -> CliResult<VertexScattering> {
    if pairs.len() != degree * degree {
        return Err(validation(
            "degree mismatch",
            format!(
                "vertex {vertex} has degree {degree} and needs {} (re, im) pairs, found {}",
                degree * degree,
                pairs.len()
            ),
        ));
    }
    let m = CMatrix::from_row_iterator(degree, degree, pairs.iter().map(|[re, im]| Complex64::new(re.value(), im.value())));
    let sc = VertexScattering::explicit(m);
    let report = validate_scattering(&sc, UNITARITY_TOL);
    if !report.unitary {
        return Err(validation(
            "unitarity",
            format!("matrix at vertex {vertex} has unitarity residual {:e}", report.unitarity_residual),
        ));
    }
    Ok(sc)
}

pub fn parse_graph_str(text: &str) -> CliResult<(MetricGraph, VertexConditions)> {
    let raw: RawGraph = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    let mut edges = Vec::with_capacity(raw.edges.get_ref().len());
    for (k, e) in raw.edges.get_ref().iter().enumerate() {
        let RawEdge(i, j, len) = e.get_ref();
        let length = len.value();
        if !length.is_finite() {
            return Err(CliError::Parse {
                line: line_of(text, e.span().start),
                field: format!("edges[{k}]"),
                message: format!("length {length} is not finite"),
            });
        }
        edges.push((*i, *j, length));
    }
    let vertex_count = match &raw.vertices {
        Some(v) => *v.get_ref(),
        None => edges.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0),
    };
    let graph = MetricGraph::new(vertex_count, &edges).map_err(core_validation)?;

    let conditions = raw.conditions.unwrap_or_default();
    let mut default = None;
    let mut per_vertex: BTreeMap<usize, &Spanned<RawCondition>> = BTreeMap::new();
    for (key, cond) in &conditions {
        if key == "default" {
            default = Some(cond);
            continue;
        }
        match key.parse::<usize>() {
            Ok(v) if v < vertex_count => {
                per_vertex.insert(v, cond);
            }
            _ => {
                return Err(CliError::Parse {
                    line: line_of(text, cond.span().start),
                    field: format!("conditions.{key}"),
                    message: format!("expected `default` or a vertex index below {vertex_count}"),
                })
            }
        }
    }

    let mut matrices = Vec::with_capacity(vertex_count);
    for v in 0..vertex_count {
        let cond = per_vertex
            .get(&v)
            .copied()
            .or(default)
            .ok_or_else(|| validation("missing condition", format!("vertex {v} has no condition and no default is set")))?;
        let degree = graph.degree(v);
        let m = match cond.get_ref() {
            RawCondition::Named(name) => {
                let kind = match name.as_str() {
                    "neumann" => ConditionKind::Neumann,
                    "equitransmitting" => ConditionKind::EquiTransmitting,
                    other => {
                        return Err(CliError::Parse {
                            line: line_of(text, cond.span().start),
                            field: format!("conditions.{v}"),
                            message: format!("unknown condition `{other}`; expected neumann, equitransmitting or {{ matrix = ... }}"),
                        })
                    }
                };
                VertexScattering::of_kind(kind, degree).map_err(|e| match e {
                    qgraph_core::Error::UnsupportedDegree(d) => validation(
                        "unsupported degree",
                        format!("vertex {v}: no equi-transmitting matrix of degree {d} (degree - 1 must be an odd prime)"),
                    ),
                    other => core_validation(other),
                })?
            }
            RawCondition::Matrix { matrix } => explicit_matrix(v, degree, matrix)?,
        };
        matrices.push(m);
    }
    let conds = VertexConditions::new(&graph, matrices).map_err(core_validation)?;
    Ok((graph, conds))
}

pub fn parse_graph_file(path: &Path) -> CliResult<(MetricGraph, VertexConditions)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_graph_str(&text)
}
