use std::f64::consts::PI;
use std::path::PathBuf;

use qgraph_core::bounds::{audit, center_matrix_bound, AuditOptions};
use qgraph_core::ensemble::{
    asymptotic_scan, averaged_bound_check, collect_ensemble, fit_affine_inverse_log, fit_inverse_log,
    window_width_for_roots, EnsembleSpec, TrendSource, WeightStatistics, RNG_ALGORITHM,
};
use qgraph_core::entropy::{conjugate_orders, entropy, max_entropy_value, symmetrized, variance, Family, WeightVector};
use qgraph_core::evolution::{find_spectrum, SpectralScan};
use qgraph_core::graph::MetricGraph;
use qgraph_core::scattering::{ConditionKind, VertexConditions};
use qgraph_core::spectrum::ScanOptions;
use qgraph_core::star::{entropy_shift_check, star_spectrum, symmetrized_shift_check};

use crate::config::{Command, RunConfig, DEFAULT_KMIN, DEFAULT_ROOTS};
use crate::error::{CliError, CliResult};
use crate::experiment::{parse_experiment_file, Experiment, TrendKind};
use crate::graph_file::parse_graph_file;
use crate::output::{num, order_label, Artifacts};

/// Averaged-inequality margins below this fail an ensemble run.
const AVERAGED_TOLERANCE: f64 = -1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// 0 on success, 2 when an applicable bound failed.
    pub status: i32,
    pub artifacts: Vec<PathBuf>,
}

pub fn run(cfg: &RunConfig) -> CliResult<RunOutcome> {
    cfg.validate()?;
    let mut out = Artifacts::new(&cfg.out, cfg.command.name())?;
    out.line("command", cfg.command.name());
    out.line("input", cfg.input.display());
    let status = match cfg.command {
        Command::Ensemble => run_ensemble(cfg, &mut out)?,
        command => {
            let (g, c) = parse_graph_file(&cfg.input)?;
            out.line("vertices", g.vertex_count());
            out.line("bonds", g.bond_count());
            out.line("total_length", g.total_length());
            let window = Window::resolve(cfg, g.total_length(), &mut out)?;
            match command {
                Command::Spectrum => run_spectrum(&g, &c, &window, &mut out)?,
                Command::Entropy => run_entropy(cfg, &g, &c, &window, &mut out)?,
                Command::Bounds => run_bounds(cfg, &g, &c, &window, &mut out)?,
                Command::Star => run_star(cfg, &g, &c, &window, &mut out)?,
                Command::Ensemble => unreachable!(),
            }
        }
    };
    out.line("exit_status", status);
    Ok(RunOutcome {
        status,
        artifacts: out.finish()?,
    })
}

fn echo(out: &mut Artifacts, key: &str, value: impl std::fmt::Display, defaulted: bool) {
    if defaulted {
        out.line(key, format!("{value} (default)"));
    } else {
        out.line(key, value);
    }
}

fn list(values: &[f64]) -> String {
    values.iter().map(|&v| order_label(v)).collect::<Vec<_>>().join(",")
}

struct Window {
    kmin: f64,
    kmax: f64,
    scan: ScanOptions,
}

impl Window {
    fn resolve(cfg: &RunConfig, total_length: f64, out: &mut Artifacts) -> CliResult<Self> {
        Self::from_parts(cfg, cfg.kmin, cfg.kmax, total_length, out)
    }

    fn from_parts(cfg: &RunConfig, kmin: Option<f64>, kmax: Option<f64>, total_length: f64, out: &mut Artifacts) -> CliResult<Self> {
        let lo = kmin.unwrap_or(DEFAULT_KMIN);
        let hi = kmax.unwrap_or(lo + window_width_for_roots(total_length, DEFAULT_ROOTS));
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(CliError::Config(format!("κ window ({lo}, {hi}] is invalid")));
        }
        echo(out, "kmin", lo, kmin.is_none());
        echo(out, "kmax", hi, kmax.is_none());
        let step = cfg.grid_step.unwrap_or(PI / (8.0 * total_length));
        echo(out, "grid_step", step, cfg.grid_step.is_none());
        echo(out, "tol", cfg.tolerance(), cfg.tol.is_none());
        Ok(Window {
            kmin: lo,
            kmax: hi,
            scan: ScanOptions {
                grid_step: cfg.grid_step,
                tolerance: cfg.tolerance(),
                ..ScanOptions::default()
            },
        })
    }

    fn scan(&self, g: &MetricGraph, c: &VertexConditions, out: &mut Artifacts) -> CliResult<SpectralScan> {
        let scan = find_spectrum(g, c, self.kmin, self.kmax, &self.scan)?;
        out.line("roots", scan.records.len());
        out.line("simple_roots", scan.simple_records().count());
        out.line("scan_warnings", scan.warnings.len());
        for w in &scan.warnings {
            out.line("warning", format!("{w:?}"));
        }
        Ok(scan)
    }
}

fn run_spectrum(g: &MetricGraph, c: &VertexConditions, window: &Window, out: &mut Artifacts) -> CliResult<i32> {
    let scan = window.scan(g, c, out)?;
    let mut rows = Vec::new();
    for rec in &scan.records {
        for (b, a) in rec.amplitudes.iter().enumerate() {
            rows.push(vec![
                num("kappa", rec.kappa)?,
                num("residual", rec.residual)?,
                rec.multiplicity.to_string(),
                b.to_string(),
                num("re_a", a.re)?,
                num("im_a", a.im)?,
            ]);
        }
    }
    let kappas: Vec<String> = scan.records.iter().map(|r| format!("{:.10}", r.kappa)).collect();
    out.line("kappa", kappas.join(" "));
    out.csv(None, &["kappa", "residual", "multiplicity", "bond_index", "re_a", "im_a"], &rows)?;
    Ok(0)
}

fn echo_grids(cfg: &RunConfig, out: &mut Artifacts) {
    echo(out, "orders", list(&cfg.alpha_values()), cfg.orders.is_none());
    echo(out, "s_values", list(&cfg.s_grid()), cfg.s_values.is_none());
}

fn entropy_rows(kappa: f64, w: &WeightVector, alphas: &[f64], s_values: &[f64]) -> CliResult<Vec<Vec<String>>> {
    let b = w.len();
    let mut rows = Vec::new();
    let mut push = |family: &str, order: String, value: f64, denom: f64| -> CliResult<()> {
        rows.push(vec![
            num("kappa", kappa)?,
            family.to_string(),
            order,
            num("value", value)?,
            num("normalized_value", value / denom)?,
        ]);
        Ok(())
    };
    for &a in alphas {
        let r = entropy(w, a, Family::Renyi);
        push("renyi", order_label(a), r, max_entropy_value(b, a, Family::Renyi))?;
        if a.is_finite() {
            push("tsallis", order_label(a), entropy(w, a, Family::Tsallis), max_entropy_value(b, a, Family::Tsallis))?;
        }
    }
    for &s in s_values {
        let value = symmetrized(w, s, Family::Renyi)?;
        push("renyi_symmetrized", order_label(s), value, (b as f64).ln())?;
        if s < 1.0 {
            let (a, beta) = conjugate_orders(s)?;
            let denom = 0.5 * (max_entropy_value(b, a, Family::Tsallis) + max_entropy_value(b, beta, Family::Tsallis));
            push("tsallis_symmetrized", order_label(s), symmetrized(w, s, Family::Tsallis)?, denom)?;
        }
    }
    push("variance", String::new(), variance(w), b as f64 - 1.0)?;
    Ok(rows)
}

fn run_entropy(cfg: &RunConfig, g: &MetricGraph, c: &VertexConditions, window: &Window, out: &mut Artifacts) -> CliResult<i32> {
    echo_grids(cfg, out);
    let scan = window.scan(g, c, out)?;
    let (alphas, s_values) = (cfg.alpha_values(), cfg.s_grid());
    let mut rows = Vec::new();
    let mut shannon = Vec::new();
    for rec in scan.simple_records() {
        let w = WeightVector::from_amplitudes(&rec.amplitudes)?;
        shannon.push(entropy(&w, 1.0, Family::Renyi) / (w.len() as f64).ln());
        rows.extend(entropy_rows(rec.kappa, &w, &alphas, &s_values)?);
    }
    if !shannon.is_empty() {
        out.line("mean_normalized_shannon", shannon.iter().sum::<f64>() / shannon.len() as f64);
        out.line("min_normalized_shannon", shannon.iter().copied().fold(f64::INFINITY, f64::min));
    }
    out.csv(None, &["kappa", "family", "order_or_s", "value", "normalized_value"], &rows)?;
    Ok(0)
}

fn audit_options(cfg: &RunConfig, alphas: Vec<f64>, s_values: Vec<f64>) -> AuditOptions {
    AuditOptions {
        s_values,
        alpha_values: alphas,
        t_max: cfg.tmax,
        ..AuditOptions::default()
    }
}

fn run_bounds(cfg: &RunConfig, g: &MetricGraph, c: &VertexConditions, window: &Window, out: &mut Artifacts) -> CliResult<i32> {
    echo_grids(cfg, out);
    let t_max = cfg.tmax.unwrap_or_else(|| qgraph_core::bounds::default_t_max(g));
    echo(out, "tmax", t_max, cfg.tmax.is_none());
    let opts = audit_options(cfg, cfg.alpha_values(), cfg.s_grid());
    out.line("bound_tolerance", opts.tolerance);
    let scan = window.scan(g, c, out)?;
    let mut rows = Vec::new();
    let (mut applicable, mut failures) = (0usize, 0usize);
    let mut worst: Option<(f64, String)> = None;
    for rec in scan.simple_records() {
        let report = audit(rec, g, c, &opts)?;
        for row in report.applicable() {
            applicable += 1;
            if !row.pass {
                failures += 1;
            }
            if worst.as_ref().is_none_or(|(m, _)| row.margin < *m) {
                worst = Some((
                    row.margin,
                    format!("{} {} {}={} at kappa {}", row.bound_id, row.family.name(), row.order_kind.name(), order_label(row.order), rec.kappa),
                ));
            }
            rows.push(vec![
                num("kappa", rec.kappa)?,
                rec.multiplicity.to_string(),
                row.bound_id.to_string(),
                row.family.name().to_string(),
                row.order_kind.name().to_string(),
                order_label(row.order),
                num("bound_value", row.bound_value)?,
                num("entropy_value", row.entropy_value)?,
                num("margin", row.margin)?,
                row.pass.to_string(),
            ]);
        }
    }
    out.line("applicable_rows", applicable);
    out.line("failures", failures);
    if let Some((m, which)) = worst {
        out.line("min_margin", format!("{m:e} ({which})"));
    }
    out.csv(
        None,
        &["kappa", "multiplicity", "bound_id", "family", "order_kind", "order", "bound_value", "entropy_value", "margin", "pass"],
        &rows,
    )?;
    Ok(if failures > 0 { 2 } else { 0 })
}

fn run_star(cfg: &RunConfig, g: &MetricGraph, c: &VertexConditions, window: &Window, out: &mut Artifacts) -> CliResult<i32> {
    let center = g.star_center().ok_or(qgraph_core::Error::NotAStar)?;
    if (0..g.vertex_count()).any(|v| v != center && c.at(v).kind != ConditionKind::Neumann) {
        return Err(CliError::Config("the star command needs Neumann conditions at the pendant vertices".into()));
    }
    echo_grids(cfg, out);
    let lengths: Vec<f64> = g.incident_edges(center).iter().map(|&e| g.edges()[e].length).collect();
    let sigma = c.at(center);
    out.line("center", center);
    out.line("center_condition", sigma.kind.name());
    let spectrum = star_spectrum(&lengths, sigma, window.kmin, window.kmax, &window.scan)?;
    out.line("roots", spectrum.columns.len());
    out.line("scan_warnings", spectrum.warnings.len());
    let (alphas, s_values) = (cfg.alpha_values(), cfg.s_grid());
    let mut rows = Vec::new();
    let mut max_gap: f64 = 0.0;
    let mut min_center_margin = f64::INFINITY;
    let mut simple = 0;
    for col in spectrum.columns.iter().filter(|col| col.is_simple()) {
        simple += 1;
        let mut push = |family: &str, order: f64, check: qgraph_core::star::ShiftCheck| -> CliResult<()> {
            max_gap = max_gap.max(check.gap);
            rows.push(vec![
                num("kappa", col.kappa)?,
                col.multiplicity.to_string(),
                family.to_string(),
                order_label(order),
                num("bond_value", check.lhs)?,
                num("shifted_column_value", check.rhs)?,
                num("shift_gap", check.gap)?,
            ]);
            Ok(())
        };
        for &a in &alphas {
            push("renyi", a, entropy_shift_check(col, a, Family::Renyi)?)?;
            if a > 0.0 && a.is_finite() {
                push("tsallis", a, entropy_shift_check(col, a, Family::Tsallis)?)?;
            }
        }
        let weights = col.weights()?;
        for &s in &s_values {
            push("renyi_symmetrized", s, symmetrized_shift_check(col, s)?)?;
            let margin = symmetrized(&weights, s, Family::Renyi)? - center_matrix_bound(sigma, s, Family::Renyi)?;
            min_center_margin = min_center_margin.min(margin);
        }
    }
    out.line("simple_roots", simple);
    out.line("max_shift_gap", format!("{max_gap:e}"));
    let status = if min_center_margin.is_finite() {
        out.line("min_center_bound_margin", format!("{min_center_margin:e}"));
        if min_center_margin < AuditOptions::default().tolerance {
            2
        } else {
            0
        }
    } else {
        0
    };
    out.csv(
        None,
        &["kappa", "multiplicity", "family", "order_or_s", "bond_value", "shifted_column_value", "shift_gap"],
        &rows,
    )?;
    Ok(status)
}

fn stats_rows(prefix: &str, stats: &WeightStatistics, rows: &mut Vec<Vec<String>>) -> CliResult<()> {
    let mut push = |key: &str, order: String, value: f64| -> CliResult<()> {
        rows.push(vec![prefix.to_string(), key.to_string(), order, num(key, value)?]);
        Ok(())
    };
    push("bonds", String::new(), stats.bonds as f64)?;
    push("count", String::new(), stats.count as f64)?;
    push("mean_variance", String::new(), stats.mean_variance)?;
    push("mean_variance_direct", String::new(), stats.mean_variance_direct)?;
    push("mean_linear_entropy", String::new(), stats.mean_linear_entropy)?;
    for &(a, v) in &stats.renyi {
        push("mean_renyi", order_label(a), v)?;
        push("normalized_mean_renyi", order_label(a), v / max_entropy_value(stats.bonds, a, Family::Renyi))?;
    }
    for &(a, v) in &stats.tsallis {
        push("mean_tsallis", order_label(a), v)?;
        push("normalized_mean_tsallis", order_label(a), v / max_entropy_value(stats.bonds, a, Family::Tsallis))?;
    }
    for &(s, v) in &stats.symmetrized_renyi {
        push("mean_symmetrized_renyi", order_label(s), v)?;
    }
    for &(s, v) in &stats.symmetrized_tsallis {
        push("mean_symmetrized_tsallis", order_label(s), v)?;
    }
    Ok(())
}

fn ensemble_spec(cfg: &RunConfig, exp: &Experiment, out: &mut Artifacts) -> CliResult<EnsembleSpec> {
    let window = Window::from_parts(
        cfg,
        cfg.kmin.or(exp.kmin),
        cfg.kmax.or(exp.kmax),
        exp.mean_total_length(),
        out,
    )?;
    let alphas = cfg.orders.clone().or_else(|| exp.orders.clone()).unwrap_or_else(|| cfg.alpha_values());
    let s_values = cfg.s_values.clone().or_else(|| exp.s_values.clone()).unwrap_or_else(|| cfg.s_grid());
    if alphas.iter().any(|a| !(*a >= 0.0)) || s_values.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(CliError::Config("orders must be nonnegative and s values in [0, 1]".into()));
    }
    echo(out, "orders", list(&alphas), cfg.orders.is_none() && exp.orders.is_none());
    echo(out, "s_values", list(&s_values), cfg.s_values.is_none() && exp.s_values.is_none());
    let seed = cfg.seed.or(exp.seed);
    echo(out, "seed", seed.unwrap_or(0), seed.is_none());
    out.line("rng", RNG_ALGORITHM);
    out.line("family", format!("{:?}", exp.family));
    out.line("condition", exp.condition.name());
    out.line("lengths", format!("uniform [{}, {}]", exp.length_min, exp.length_max));
    out.line("graphs", exp.graphs);
    let mut spec = EnsembleSpec::new(exp.family, exp.condition, seed.unwrap_or(0), window.kmin, window.kmax);
    spec.length_min = exp.length_min;
    spec.length_max = exp.length_max;
    spec.graphs = exp.graphs;
    spec.scan = window.scan;
    spec.audit = audit_options(cfg, alphas, s_values);
    Ok(spec)
}

fn run_ensemble(cfg: &RunConfig, out: &mut Artifacts) -> CliResult<i32> {
    let exp = parse_experiment_file(&cfg.input)?;
    let spec = ensemble_spec(cfg, &exp, out)?;
    let summary = collect_ensemble(&spec)?;
    let mut status = 0;
    let mut rows = Vec::new();
    let mut push = |section: &str, key: &str, order: String, value: f64| -> CliResult<()> {
        rows.push(vec![section.to_string(), key.to_string(), order, num(key, value)?]);
        Ok(())
    };
    push("summary", "seed", String::new(), spec.seed as f64)?;
    push("summary", "graphs", String::new(), summary.graphs as f64)?;
    push("summary", "count", String::new(), summary.count as f64)?;
    push("summary", "degenerate", String::new(), summary.degenerate as f64)?;
    push("audit", "rows", String::new(), summary.audit_rows as f64)?;
    push("audit", "failures", String::new(), summary.audit_failures as f64)?;
    push("audit", "pass_rate", String::new(), summary.audit_pass_rate())?;
    if summary.min_margin.is_finite() {
        push("audit", "min_margin", String::new(), summary.min_margin)?;
    }
    out.line("eigenfunctions", summary.count);
    out.line("degenerate", summary.degenerate);
    out.line("scan_warnings", summary.warnings.len());
    out.line("audit_rows", summary.audit_rows);
    out.line("audit_failures", summary.audit_failures);
    if summary.audit_failures > 0 {
        status = 2;
    }
    if let Some(stats) = &summary.bonds {
        let check = averaged_bound_check(stats)?;
        for row in &check.rows {
            push("averaged", row.inequality.name(), order_label(row.alpha), row.margin)?;
        }
        push("averaged", "linear_identity_gap", String::new(), check.linear_identity_gap)?;
        stats_rows("bond", stats, &mut rows)?;
        out.line("mean_variance", stats.mean_variance);
        out.line("averaged_min_margin", format!("{:e}", check.min_margin()));
        out.line("linear_identity_gap", format!("{:e}", check.linear_identity_gap));
        if check.min_margin() < AVERAGED_TOLERANCE {
            status = 2;
        }
    }
    if let Some(stats) = &summary.star_columns {
        stats_rows("star_column", stats, &mut rows)?;
    }
    out.csv(None, &["section", "key", "order", "value"], &rows)?;

    if let Some(trend) = &exp.trend {
        let source = match trend.source {
            TrendKind::FixedVariance => TrendSource::FixedVariance {
                variance: trend.variance,
                samples: trend.samples,
                seed: spec.seed,
            },
            TrendKind::Spectral => TrendSource::Spectral(spec.clone()),
        };
        let alphas = &spec.audit.alpha_values;
        let table = asymptotic_scan(&source, &trend.sizes, alphas)?;
        let mut trows = Vec::new();
        for row in &table {
            let star_bound = if row.bonds >= 4 { num("star_bound", row.star_bound)? } else { String::new() };
            let series = row
                .normalized_renyi
                .iter()
                .map(|p| ("renyi", p))
                .chain(row.normalized_tsallis.iter().map(|p| ("tsallis", p)));
            for (family, &(a, v)) in series {
                trows.push(vec![
                    row.bonds.to_string(),
                    row.count.to_string(),
                    num("mean_variance", row.mean_variance)?,
                    family.to_string(),
                    order_label(a),
                    num("normalized_mean", v)?,
                    num("variance_bound", row.variance_bound)?,
                    star_bound.clone(),
                ]);
            }
        }
        out.csv(
            Some("trend"),
            &["bonds", "count", "mean_variance", "family", "order", "normalized_mean", "variance_bound", "star_bound"],
            &trows,
        )?;
        let deficits: Vec<(usize, f64)> = table.iter().filter_map(|r| r.deficit(1.0).map(|d| (r.bonds, d))).collect();
        if deficits.len() >= 2 {
            let fit = fit_inverse_log(&deficits)?;
            let affine = fit_affine_inverse_log(&deficits)?;
            out.line(
                "deficit_fit",
                format!("1 - <R_1>/ln B ≈ {:.6}/ln B, max relative residual {:.4}", fit.c, fit.max_relative_residual),
            );
            out.line(
                "deficit_affine_fit",
                format!("{:.6} + {:.6}/ln B, max relative residual {:.4}", affine.a, affine.b, affine.max_relative_residual),
            );
        }
    }
    Ok(status)
}
