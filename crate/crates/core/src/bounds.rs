//! Entropic lower bounds and the per-eigenfunction audit.
//!
//! Bounds from the maximal entry modulus `η` of a unitary with `U a = a`
//! (symmetrized entropies, `ν = 1/(1-s)`):
//!
//! `R̃_s(a) ≥ -ln η`, `H̃_s(a) ≥ ½ ln_ν(η⁻²)`,
//!
//! applied to powers of `U(κ)`, to regular equi-transmitting graphs through
//! the girth, and to the star center matrix. Unsymmetrized bounds come from
//! the variance `D = -1 + B Σ w²`.

use crate::entropy::{
    alpha_log, entropy, max_entropy_value, renyi, symmetrized, variance, Family, WeightVector,
};
use crate::error::{Error, Result};
use crate::evolution::{EigenRecord, GraphEvolution};
use crate::graph::{girth, Girth, MetricGraph};
use crate::scattering::{validate_scattering, ConditionKind, VertexConditions, VertexScattering};
use crate::star::a_column_from_bonds;

/// Default margin below which an applicable row fails.
pub const BOUND_TOLERANCE: f64 = -1e-9;

fn nu(s: f64) -> f64 {
    1.0 / (1.0 - s)
}

fn check_s(s: f64, family: Family) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::UnsupportedOrder(format!("s = {s} outside [0, 1]")));
    }
    if family == Family::Tsallis && s == 1.0 {
        return Err(Error::UnsupportedOrder("symmetrized Tsallis bound at s = 1".into()));
    }
    Ok(())
}

/// `-ln η` or `½ ln_ν(η⁻²)`.
pub fn mu_bound(eta: f64, s: f64, family: Family) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0 + 1e-12) {
        return Err(Error::BadRange(format!("eta = {eta} outside (0, 1]")));
    }
    check_s(s, family)?;
    let eta = eta.min(1.0);
    match family {
        Family::Renyi => Ok(-eta.ln()),
        Family::Tsallis => Ok(0.5 * alpha_log(eta.powi(-2), nu(s))?),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBound {
    pub t: usize,
    pub eta: f64,
    pub bound: f64,
}

/// Best bound over `η^(1), …, η^(t_max)` given as a list.
pub fn best_power_bound(etas: &[f64], s: f64, family: Family) -> Result<PowerBound> {
    let mut best: Option<PowerBound> = None;
    for (k, &eta) in etas.iter().enumerate() {
        let bound = mu_bound(eta, s, family)?;
        if best.is_none_or(|b| bound > b.bound) {
            best = Some(PowerBound { t: k + 1, eta, bound });
        }
    }
    best.ok_or_else(|| Error::BadRange("t_max must be at least 1".into()))
}

pub fn power_mu_bound(
    g: &MetricGraph,
    conds: &VertexConditions,
    kappa: f64,
    t_max: usize,
    s: f64,
    family: Family,
) -> Result<PowerBound> {
    if t_max == 0 {
        return Err(Error::BadRange("t_max must be at least 1".into()));
    }
    let etas = GraphEvolution::new(g, conds)?
        .evolution_matrix(kappa)
        .max_entry_moduli(t_max);
    best_power_bound(&etas, s, family)
}

/// `⌈g/2⌉` for graphs with cycles, otherwise twice the diameter.
pub fn default_t_max(g: &MetricGraph) -> usize {
    match girth(g) {
        Girth::Finite(n) => n.div_ceil(2),
        Girth::Acyclic => (2 * g.diameter()).max(1),
    }
}

/// `(g/4) ln d` or `½ ln_ν(d^{g/2})` for a `(d+1)`-regular equi-transmitting graph.
pub fn girth_bound(d: usize, g: Girth, s: f64, family: Family) -> Result<f64> {
    let Girth::Finite(n) = g else {
        return Err(Error::NotApplicable("graph has no cycles".into()));
    };
    if d < 2 {
        return Err(Error::NotApplicable(format!("d = {d} must be at least 2")));
    }
    check_s(s, family)?;
    let d = d as f64;
    let n = n as f64;
    match family {
        Family::Renyi => Ok(n / 4.0 * d.ln()),
        Family::Tsallis => Ok(0.5 * alpha_log(d.powf(n / 2.0), nu(s))?),
    }
}

/// Whether every vertex matrix is equi-transmitting.
pub fn all_equi_transmitting(conds: &VertexConditions) -> bool {
    conds.iter().all(|m| validate_scattering(m, 1e-10).equi_transmitting)
}

/// Girth bound after checking regularity and the vertex conditions.
pub fn graph_girth_bound(g: &MetricGraph, conds: &VertexConditions, s: f64, family: Family) -> Result<f64> {
    let degree = g
        .regular_degree()
        .ok_or_else(|| Error::NotApplicable("graph is not regular".into()))?;
    if !all_equi_transmitting(conds) {
        return Err(Error::NotApplicable("vertex conditions are not equi-transmitting".into()));
    }
    girth_bound(degree.saturating_sub(1), girth(g), s, family)
}

/// `4 R̃_s / ln V`, the empirical counterpart of the large-girth constant.
pub fn large_girth_ratio(symmetrized_renyi: f64, vertex_count: usize) -> f64 {
    4.0 * symmetrized_renyi / (vertex_count as f64).ln()
}

/// Bound on the edge-amplitude entropies from the center matrix alone.
pub fn center_matrix_bound(center: &VertexScattering, s: f64, family: Family) -> Result<f64> {
    mu_bound(center.max_modulus(), s, family)
}

pub fn star_center_bound(g: &MetricGraph, conds: &VertexConditions, s: f64, family: Family) -> Result<f64> {
    let c = g.star_center().ok_or(Error::NotAStar)?;
    center_matrix_bound(conds.at(c), s, family)
}

/// `-ln(1 - 2/E)` or `½ ln_ν(E²/(E-2)²)`, for `E ≥ 4`.
pub fn neumann_star_bound(e: usize, s: f64, family: Family) -> Result<f64> {
    if e < 4 {
        return Err(Error::NotApplicable(format!("Neumann closed form needs E >= 4, got {e}")));
    }
    check_s(s, family)?;
    let e = e as f64;
    match family {
        Family::Renyi => Ok(-(1.0 - 2.0 / e).ln()),
        Family::Tsallis => Ok(0.5 * alpha_log((e / (e - 2.0)).powi(2), nu(s))?),
    }
}

/// `½ ln(E-1)` or `½ ln_ν(E-1)`.
pub fn equi_star_bound(e: usize, s: f64, family: Family) -> Result<f64> {
    if e < 2 {
        return Err(Error::NotApplicable(format!("equi-transmitting center needs E >= 2, got {e}")));
    }
    check_s(s, family)?;
    Ok(0.5 * alpha_log((e - 1) as f64, if family == Family::Renyi { 1.0 } else { nu(s) })?)
}

/// `(ln(B-2) + ln 2) / (2 ln B)`, the normalized bond-vector bound for an
/// equi-transmitting star with `B = 2E` bonds.
pub fn equi_star_normalized_bound(b: usize) -> f64 {
    let b = b as f64;
    ((b - 2.0).ln() + std::f64::consts::LN_2) / (2.0 * b.ln())
}

/// `(-ln η₀ + ln 2) / ln B` for any star center.
pub fn star_normalized_bound(eta0: f64, b: usize) -> f64 {
    (-eta0.ln() + std::f64::consts::LN_2) / (b as f64).ln()
}

/// `max w ≤ (1 + √((B-1)D)) / B`.
pub fn max_weight_bound(d: f64, b: usize) -> f64 {
    let bf = b as f64;
    (1.0 + ((bf - 1.0) * d.max(0.0)).sqrt()) / bf
}

/// Rényi bound from the variance; piecewise in `α`.
pub fn variance_renyi_bound(d: f64, b: usize, alpha: f64) -> f64 {
    let bf = b as f64;
    let d = d.max(0.0);
    let spike = (1.0 + ((bf - 1.0) * d).sqrt()).ln();
    if alpha <= 2.0 {
        bf.ln() - d.ln_1p()
    } else if alpha.is_infinite() {
        bf.ln() - spike
    } else {
        bf.ln() - d.ln_1p() / (alpha - 1.0) - (alpha - 2.0) / (alpha - 1.0) * spike
    }
}

/// Tsallis bound from the variance; piecewise in `α`, zero at `α = ∞`.
pub fn variance_tsallis_bound(d: f64, b: usize, alpha: f64) -> f64 {
    let bf = b as f64;
    let d = d.max(0.0);
    if alpha <= 2.0 {
        let ratio = bf / (1.0 + d);
        if alpha == 1.0 {
            ratio.ln()
        } else {
            ((1.0 - alpha) * ratio.ln()).exp_m1() / (1.0 - alpha)
        }
    } else if alpha.is_infinite() {
        0.0
    } else {
        let spike = 1.0 + ((bf - 1.0) * d).sqrt();
        let power_sum = bf.powf(1.0 - alpha) * (1.0 + d) * spike.powf(alpha - 2.0);
        (1.0 - power_sum) / (alpha - 1.0)
    }
}

pub fn variance_bound(d: f64, b: usize, alpha: f64, family: Family) -> f64 {
    match family {
        Family::Renyi => variance_renyi_bound(d, b, alpha),
        Family::Tsallis => variance_tsallis_bound(d, b, alpha),
    }
}

/// Which order a row is indexed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderKind {
    S,
    Alpha,
}

impl OrderKind {
    pub fn name(self) -> &'static str {
        match self {
            OrderKind::S => "s",
            OrderKind::Alpha => "alpha",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub bound_id: &'static str,
    pub family: Family,
    pub order_kind: OrderKind,
    pub order: f64,
    pub bound_value: f64,
    pub entropy_value: f64,
    /// `entropy_value - bound_value`.
    pub margin: f64,
    pub applicable: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub kappa: f64,
    pub multiplicity: usize,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn applicable(&self) -> impl Iterator<Item = &BoundRow> {
        self.rows.iter().filter(|r| r.applicable)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundRow> {
        self.rows.iter().filter(|r| r.applicable && !r.pass)
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn min_margin(&self) -> f64 {
        self.applicable().map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditOptions {
    pub s_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
    /// `None` uses [`default_t_max`].
    pub t_max: Option<usize>,
    /// Audit records whose eigenvalue is not simple.
    pub include_degenerate: bool,
    pub tolerance: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            s_values: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            alpha_values: vec![0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, f64::INFINITY],
            t_max: None,
            include_degenerate: false,
            tolerance: BOUND_TOLERANCE,
        }
    }
}

struct Rows {
    rows: Vec<BoundRow>,
    tolerance: f64,
}

impl Rows {
    fn push(&mut self, bound_id: &'static str, family: Family, order_kind: OrderKind, order: f64, bound: Option<f64>, value: f64) {
        let (bound_value, applicable) = match bound {
            Some(b) => (b, true),
            None => (f64::NAN, false),
        };
        let margin = value - bound_value;
        self.rows.push(BoundRow {
            bound_id,
            family,
            order_kind,
            order,
            bound_value,
            entropy_value: value,
            margin,
            applicable,
            pass: !applicable || margin >= self.tolerance,
        });
    }
}

const FAMILIES: [Family; 2] = [Family::Renyi, Family::Tsallis];

/// Evaluates every bound applicable to `rec` on the configured order grids.
/// Inapplicable bounds appear as rows with `applicable = false`.
pub fn audit(rec: &EigenRecord, g: &MetricGraph, conds: &VertexConditions, opts: &AuditOptions) -> Result<BoundReport> {
    let family_u = GraphEvolution::new(g, conds)?;
    let w = WeightVector::from_amplitudes(&rec.amplitudes)?;
    let b = w.len();
    let ln_b = (b as f64).ln();
    let t_max = opts.t_max.unwrap_or_else(|| default_t_max(g)).max(1);
    let etas = family_u.evolution_matrix(rec.kappa).max_entry_moduli(t_max);

    let star = g.star_center().map(|c| (c, conds.at(c)));
    let column = match star {
        Some(_) => Some(a_column_from_bonds(g, rec)?.weights()?),
        None => None,
    };
    let center_kind = star.map(|(_, m)| m.kind);
    let center_equi = star.is_some_and(|(_, m)| validate_scattering(m, 1e-10).equi_transmitting);
    let edges = g.edge_count();

    let mut rows = Rows {
        rows: Vec::new(),
        tolerance: opts.tolerance,
    };

    for &s in &opts.s_values {
        for family in FAMILIES {
            if check_s(s, family).is_err() {
                continue;
            }
            let value = symmetrized(&w, s, family)?;
            rows.push("mu", family, OrderKind::S, s, Some(mu_bound(etas[0], s, family)?), value);
            let best = best_power_bound(&etas, s, family)?;
            rows.push("power_mu", family, OrderKind::S, s, Some(best.bound), value);
            if family == Family::Renyi {
                rows.push("power_mu_normalized", family, OrderKind::S, s, Some(best.bound / ln_b), value / ln_b);
            }
            let girth = graph_girth_bound(g, conds, s, family).ok();
            rows.push("girth", family, OrderKind::S, s, girth, value);

            if let (Some((_, center)), Some(col)) = (star, column.as_ref()) {
                let col_value = symmetrized(col, s, family)?;
                rows.push("star_center", family, OrderKind::S, s, Some(center_matrix_bound(center, s, family)?), col_value);
                let neumann = (center_kind == Some(ConditionKind::Neumann))
                    .then(|| neumann_star_bound(edges, s, family).ok())
                    .flatten();
                rows.push("star_neumann", family, OrderKind::S, s, neumann, col_value);
                let equi = center_equi.then(|| equi_star_bound(edges, s, family).ok()).flatten();
                rows.push("star_equi", family, OrderKind::S, s, equi, col_value);
                if family == Family::Renyi {
                    let normalized = if center_equi {
                        equi_star_normalized_bound(b)
                    } else {
                        star_normalized_bound(center.max_modulus(), b)
                    };
                    rows.push("star_bond_normalized", family, OrderKind::S, s, Some(normalized), value / ln_b);
                }
            }
        }
    }

    let d = variance(&w);
    let column_variance = column.as_ref().map(|c| (variance(c), c.len()));
    for &alpha in &opts.alpha_values {
        for family in FAMILIES {
            let value = entropy(&w, alpha, family);
            rows.push("variance", family, OrderKind::Alpha, alpha, Some(variance_bound(d, b, alpha, family)), value);
            if let (Some(col), Some((dc, e))) = (column.as_ref(), column_variance) {
                rows.push(
                    "variance_star_column",
                    family,
                    OrderKind::Alpha,
                    alpha,
                    Some(variance_bound(dc, e, alpha, family)),
                    entropy(col, alpha, family),
                );
            }
        }
    }
    rows.push(
        "max_weight",
        Family::Renyi,
        OrderKind::Alpha,
        f64::INFINITY,
        Some(-max_weight_bound(d, b).ln()),
        renyi(&w, f64::INFINITY),
    );

    Ok(BoundReport {
        kappa: rec.kappa,
        multiplicity: rec.multiplicity,
        rows: rows.rows,
    })
}

/// Audits a list of records, skipping degenerate ones unless requested.
pub fn audit_records(
    records: &[EigenRecord],
    g: &MetricGraph,
    conds: &VertexConditions,
    opts: &AuditOptions,
) -> Result<Vec<BoundReport>> {
    use rayon::prelude::*;
    records
        .par_iter()
        .filter(|r| opts.include_degenerate || r.is_simple())
        .map(|r| audit(r, g, conds, opts))
        .collect()
}

/// Normalized entropy, `value / ln B` or `value / ln_α B`.
pub fn normalized_entropy(value: f64, b: usize, alpha: f64, family: Family) -> f64 {
    value / max_entropy_value(b, alpha, family)
}
