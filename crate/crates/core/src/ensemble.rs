//! Seeded graph ensembles, averaged entropies and the averaged inequalities.
//!
//! Every random draw comes from `ChaCha8Rng` seeded with the ensemble seed;
//! graph `k` of an ensemble reads stream `k`, so results do not depend on
//! thread scheduling. Per-record work runs in parallel, but all sums are
//! accumulated sequentially in record order.

use rand::distr::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::bounds::{audit, variance_renyi_bound, AuditOptions};
use crate::entropy::{
    alpha_log, entropy, max_entropy_value, symmetrized, tsallis, variance, variance_direct, Family, WeightVector,
};
use crate::error::{Error, Result};
use crate::evolution::find_spectrum;
use crate::graph::{build_metric_graph, star_metric_graph, MetricGraph};
use crate::scattering::{ConditionKind, VertexConditions};
use crate::spectrum::{ScanOptions, ScanWarning};
use crate::star::a_column_from_bonds;

/// Recorded alongside every summary so runs can be reproduced elsewhere.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng";

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn length_distribution(min: f64, max: f64) -> Result<Uniform<f64>> {
    if !(min > 0.0 && min < max && max.is_finite()) {
        return Err(Error::BadRange(format!("length range [{min}, {max}]")));
    }
    Uniform::new_inclusive(min, max).map_err(|e| Error::BadRange(e.to_string()))
}

/// `count` independent uniform lengths on `[min, max]`.
pub fn sample_lengths(count: usize, seed: u64, min: f64, max: f64) -> Result<Vec<f64>> {
    sample_lengths_with(&mut rng_for(seed, 0), count, min, max)
}

fn sample_lengths_with(rng: &mut ChaCha8Rng, count: usize, min: f64, max: f64) -> Result<Vec<f64>> {
    let dist = length_distribution(min, max)?;
    Ok((0..count).map(|_| dist.sample(rng)).collect())
}

/// Uniformly paired stubs, redrawn until the result is simple and connected.
fn random_regular_with(rng: &mut ChaCha8Rng, vertices: usize, degree: usize, min: f64, max: f64) -> Result<MetricGraph> {
    if degree == 0 || degree >= vertices || (vertices * degree) % 2 == 1 {
        return Err(Error::BadRange(format!(
            "no simple {degree}-regular graph on {vertices} vertices"
        )));
    }
    let dist = length_distribution(min, max)?;
    let mut stubs: Vec<usize> = (0..vertices).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
    for _ in 0..10_000 {
        stubs.shuffle(rng);
        let mut pairs: Vec<(usize, usize)> = stubs.chunks(2).map(|p| (p[0].min(p[1]), p[0].max(p[1]))).collect();
        if pairs.iter().any(|(i, j)| i == j) {
            continue;
        }
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let edges: Vec<(usize, usize, f64)> = pairs.iter().map(|&(i, j)| (i, j, dist.sample(rng))).collect();
        if let Ok(g) = build_metric_graph(&edges) {
            return Ok(g);
        }
    }
    Err(Error::BadRange(format!(
        "could not draw a simple connected {degree}-regular graph on {vertices} vertices"
    )))
}

pub fn random_regular_graph(vertices: usize, degree: usize, seed: u64, min: f64, max: f64) -> Result<MetricGraph> {
    random_regular_with(&mut rng_for(seed, 0), vertices, degree, min, max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphFamily {
    Star { edges: usize },
    Regular { vertices: usize, degree: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub family: GraphFamily,
    /// Applied at the star center, or at every vertex of a regular graph.
    pub condition: ConditionKind,
    pub length_min: f64,
    pub length_max: f64,
    pub seed: u64,
    /// Number of independently drawn graphs pooled together.
    pub graphs: usize,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub scan: ScanOptions,
    pub audit: AuditOptions,
}

impl EnsembleSpec {
    /// Defaults: lengths uniform on `[1, 2]`, one graph, default grids.
    pub fn new(family: GraphFamily, condition: ConditionKind, seed: u64, kappa_min: f64, kappa_max: f64) -> Self {
        EnsembleSpec {
            family,
            condition,
            length_min: 1.0,
            length_max: 2.0,
            seed,
            graphs: 1,
            kappa_min,
            kappa_max,
            scan: ScanOptions::default(),
            audit: AuditOptions::default(),
        }
    }

    /// Graph `k` of the ensemble with its vertex conditions.
    pub fn sample_graph(&self, k: usize) -> Result<(MetricGraph, VertexConditions)> {
        let mut rng = rng_for(self.seed, k as u64);
        match self.family {
            GraphFamily::Star { edges } => {
                if edges == 0 {
                    return Err(Error::BadRange("star needs at least one edge".into()));
                }
                let g = star_metric_graph(&sample_lengths_with(&mut rng, edges, self.length_min, self.length_max)?)?;
                let c = VertexConditions::star(&g, self.condition)?;
                Ok((g, c))
            }
            GraphFamily::Regular { vertices, degree } => {
                let g = random_regular_with(&mut rng, vertices, degree, self.length_min, self.length_max)?;
                let c = VertexConditions::uniform(&g, self.condition)?;
                Ok((g, c))
            }
        }
    }
}

/// Approximate `κ` width holding `roots` spectral points, `roots · π / ℒ`.
pub fn window_width_for_roots(total_length: f64, roots: usize) -> f64 {
    roots as f64 * std::f64::consts::PI / total_length
}

/// Averages over weight vectors of one common length.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightStatistics {
    pub bonds: usize,
    pub count: usize,
    /// `⟨D⟩` from `-1 + B Σ w²`.
    pub mean_variance: f64,
    /// `⟨D⟩` from `B⁻¹ Σ (B w - 1)²`.
    pub mean_variance_direct: f64,
    /// `⟨H₂⟩`.
    pub mean_linear_entropy: f64,
    /// `(α, ⟨R_α⟩)`.
    pub renyi: Vec<(f64, f64)>,
    /// `(α, ⟨H_α⟩)`, orders in `(0, ∞)` only.
    pub tsallis: Vec<(f64, f64)>,
    /// `(s, ⟨R̃_s⟩)`.
    pub symmetrized_renyi: Vec<(f64, f64)>,
    /// `(s, ⟨H̃_s⟩)`, `s < 1` only.
    pub symmetrized_tsallis: Vec<(f64, f64)>,
}

impl WeightStatistics {
    pub fn mean_renyi(&self, alpha: f64) -> Option<f64> {
        self.renyi.iter().find(|(a, _)| *a == alpha).map(|p| p.1)
    }

    pub fn mean_tsallis(&self, alpha: f64) -> Option<f64> {
        self.tsallis.iter().find(|(a, _)| *a == alpha).map(|p| p.1)
    }
}

struct PerVector {
    variance: f64,
    variance_direct: f64,
    linear: f64,
    renyi: Vec<f64>,
    tsallis: Vec<f64>,
    sym_renyi: Vec<f64>,
    sym_tsallis: Vec<f64>,
}

fn tsallis_orders(alphas: &[f64]) -> Vec<f64> {
    alphas.iter().copied().filter(|a| *a > 0.0 && a.is_finite()).collect()
}

fn tsallis_s(s_values: &[f64]) -> Vec<f64> {
    s_values.iter().copied().filter(|s| *s < 1.0).collect()
}

fn mean_columns(rows: &[Vec<f64>], keys: &[f64]) -> Vec<(f64, f64)> {
    let n = rows.len() as f64;
    keys.iter()
        .enumerate()
        .map(|(k, &key)| (key, rows.iter().map(|r| r[k]).sum::<f64>() / n))
        .collect()
}

/// Means of all entropies on the given grids.
pub fn weight_statistics(weights: &[WeightVector], alphas: &[f64], s_values: &[f64]) -> Result<WeightStatistics> {
    let first = weights.first().ok_or(Error::EmptyEnsemble)?;
    let b = first.len();
    if let Some(bad) = weights.iter().find(|w| w.len() != b) {
        return Err(Error::DimensionMismatch {
            expected: b,
            found: bad.len(),
        });
    }
    let t_orders = tsallis_orders(alphas);
    let t_s = tsallis_s(s_values);
    let per: Vec<PerVector> = weights
        .par_iter()
        .map(|w| -> Result<PerVector> {
            Ok(PerVector {
                variance: variance(w),
                variance_direct: variance_direct(w),
                linear: tsallis(w, 2.0),
                renyi: alphas.iter().map(|&a| entropy(w, a, Family::Renyi)).collect(),
                tsallis: t_orders.iter().map(|&a| entropy(w, a, Family::Tsallis)).collect(),
                sym_renyi: s_values
                    .iter()
                    .map(|&s| symmetrized(w, s, Family::Renyi))
                    .collect::<Result<_>>()?,
                sym_tsallis: t_s
                    .iter()
                    .map(|&s| symmetrized(w, s, Family::Tsallis))
                    .collect::<Result<_>>()?,
            })
        })
        .collect::<Result<_>>()?;
    let n = per.len() as f64;
    let mean = |f: fn(&PerVector) -> f64| per.iter().map(f).sum::<f64>() / n;
    let column = |f: fn(&PerVector) -> &Vec<f64>| per.iter().map(|p| f(p).clone()).collect::<Vec<_>>();
    Ok(WeightStatistics {
        bonds: b,
        count: per.len(),
        mean_variance: mean(|p| p.variance),
        mean_variance_direct: mean(|p| p.variance_direct),
        mean_linear_entropy: mean(|p| p.linear),
        renyi: mean_columns(&column(|p| &p.renyi), alphas),
        tsallis: mean_columns(&column(|p| &p.tsallis), &t_orders),
        symmetrized_renyi: mean_columns(&column(|p| &p.sym_renyi), s_values),
        symmetrized_tsallis: mean_columns(&column(|p| &p.sym_tsallis), &t_s),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub rng_algorithm: &'static str,
    pub seed: u64,
    pub graphs: usize,
    /// Simple-eigenvalue records entering the averages.
    pub count: usize,
    pub degenerate: usize,
    /// Bond-vector averages; `None` when no record was found.
    pub bonds: Option<WeightStatistics>,
    /// Edge-amplitude averages for star ensembles.
    pub star_columns: Option<WeightStatistics>,
    pub audit_rows: usize,
    pub audit_failures: usize,
    pub min_margin: f64,
    pub warnings: Vec<ScanWarning>,
}

impl EnsembleSummary {
    pub fn audit_pass_rate(&self) -> f64 {
        if self.audit_rows == 0 {
            1.0
        } else {
            1.0 - self.audit_failures as f64 / self.audit_rows as f64
        }
    }
}

/// Runs spectrum, entropies and audits over every graph of the ensemble.
pub fn collect_ensemble(spec: &EnsembleSpec) -> Result<EnsembleSummary> {
    if spec.graphs == 0 {
        return Err(Error::BadRange("ensemble needs at least one graph".into()));
    }
    let mut bond_weights = Vec::new();
    let mut column_weights = Vec::new();
    let mut degenerate = 0;
    let mut audit_rows = 0;
    let mut audit_failures = 0;
    let mut min_margin = f64::INFINITY;
    let mut warnings = Vec::new();
    let star = matches!(spec.family, GraphFamily::Star { .. });

    let per_graph: Vec<_> = (0..spec.graphs)
        .into_par_iter()
        .map(|k| -> Result<_> {
            let (g, c) = spec.sample_graph(k)?;
            let scan = find_spectrum(&g, &c, spec.kappa_min, spec.kappa_max, &spec.scan)?;
            let simple: Vec<_> = scan.records.iter().filter(|r| r.is_simple()).cloned().collect();
            let degenerate = scan.records.len() - simple.len();
            let results: Vec<_> = simple
                .par_iter()
                .map(|rec| -> Result<_> {
                    let w = WeightVector::from_amplitudes(&rec.amplitudes)?;
                    let col = if star { Some(a_column_from_bonds(&g, rec)?.weights()?) } else { None };
                    let report = audit(rec, &g, &c, &spec.audit)?;
                    Ok((w, col, report))
                })
                .collect::<Result<_>>()?;
            Ok((results, degenerate, scan.warnings))
        })
        .collect::<Result<_>>()?;

    for (results, deg, warn) in per_graph {
        degenerate += deg;
        warnings.extend(warn);
        for (w, col, report) in results {
            bond_weights.push(w);
            column_weights.extend(col);
            audit_rows += report.applicable().count();
            audit_failures += report.failures().count();
            min_margin = min_margin.min(report.min_margin());
        }
    }

    let stats = |ws: &[WeightVector]| -> Result<Option<WeightStatistics>> {
        if ws.is_empty() {
            Ok(None)
        } else {
            weight_statistics(ws, &spec.audit.alpha_values, &spec.audit.s_values).map(Some)
        }
    };
    Ok(EnsembleSummary {
        rng_algorithm: RNG_ALGORITHM,
        seed: spec.seed,
        graphs: spec.graphs,
        count: bond_weights.len(),
        degenerate,
        bonds: stats(&bond_weights)?,
        star_columns: stats(&column_weights)?,
        audit_rows,
        audit_failures,
        min_margin,
        warnings,
    })
}

/// Which averaged inequality a row checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AveragedInequality {
    /// `⟨R_α⟩/ln B ≥ 1 - ln(1+⟨D⟩)/ln B`, `α ∈ [0, 2]`.
    RenyiLowOrder,
    /// The same with the min-entropy correction, `α ∈ [2, ∞]`.
    RenyiHighOrder,
    /// `⟨H_α⟩ ≥ ln_α(B/(1+⟨D⟩))`, `α ∈ (0, 2]`.
    Tsallis,
    /// `⟨H_α⟩/ln_α B ≥ 1 - ln_α(1/(1+⟨D⟩))/ln_α(1/B)`, `α ∈ (0, 2]`.
    TsallisNormalized,
}

impl AveragedInequality {
    pub fn name(self) -> &'static str {
        match self {
            AveragedInequality::RenyiLowOrder => "renyi_alpha_le_2",
            AveragedInequality::RenyiHighOrder => "renyi_alpha_ge_2",
            AveragedInequality::Tsallis => "tsallis",
            AveragedInequality::TsallisNormalized => "tsallis_normalized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedRow {
    pub inequality: AveragedInequality,
    pub alpha: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragedCheck {
    pub rows: Vec<AveragedRow>,
    /// `⟨H₂⟩ - (1 - (1+⟨D⟩)/B)`, zero up to rounding.
    pub linear_identity_gap: f64,
}

impl AveragedCheck {
    pub fn min_margin(&self) -> f64 {
        self.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }
}

/// Margins of the averaged inequalities for every order in the statistics.
pub fn averaged_bound_check(stats: &WeightStatistics) -> Result<AveragedCheck> {
    if stats.count == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let b = stats.bonds;
    let bf = b as f64;
    let ln_b = bf.ln();
    let d = stats.mean_variance;
    let mut rows = Vec::new();
    let mut push = |inequality, alpha, lhs: f64, rhs: f64| {
        rows.push(AveragedRow {
            inequality,
            alpha,
            lhs,
            rhs,
            margin: lhs - rhs,
        })
    };
    for &(alpha, r) in &stats.renyi {
        if alpha <= 2.0 {
            push(AveragedInequality::RenyiLowOrder, alpha, r / ln_b, 1.0 - d.ln_1p() / ln_b);
        }
        if alpha >= 2.0 {
            push(AveragedInequality::RenyiHighOrder, alpha, r / ln_b, variance_renyi_bound(d, b, alpha) / ln_b);
        }
    }
    for &(alpha, h) in &stats.tsallis {
        if alpha <= 2.0 {
            push(AveragedInequality::Tsallis, alpha, h, alpha_log(bf / (1.0 + d), alpha)?);
            let normalized = 1.0 - alpha_log(1.0 / (1.0 + d), alpha)? / alpha_log(1.0 / bf, alpha)?;
            push(
                AveragedInequality::TsallisNormalized,
                alpha,
                h / max_entropy_value(b, alpha, Family::Tsallis),
                normalized,
            );
        }
    }
    Ok(AveragedCheck {
        rows,
        linear_identity_gap: stats.mean_linear_entropy - (1.0 - (1.0 + d) / bf),
    })
}

/// Dirichlet(1) weights: normalized exponential masses.
pub fn random_weights<R: Rng + ?Sized>(b: usize, rng: &mut R) -> WeightVector {
    loop {
        let masses: Vec<f64> = (0..b).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        if let Ok(w) = WeightVector::new(masses) {
            return w;
        }
    }
}

/// Weights with variance exactly `d`: exponential masses `x` tilted to
/// `w ∝ x^t`, with `t` found by bisection. `D` grows from zero at `t = 0`
/// towards `B - 1`, and `t ≈ 1` for large `B` and `d = 1`, where the
/// untilted masses already have variance close to one.
pub fn fixed_variance_weights<R: Rng + ?Sized>(b: usize, d: f64, rng: &mut R) -> Result<WeightVector> {
    if b < 2 || !(0.0..(b as f64) - 1.0).contains(&d) {
        return Err(Error::BadRange(format!("variance {d} outside [0, {})", b as f64 - 1.0)));
    }
    let logs: Vec<f64> = (0..b).map(|_| rng.sample::<f64, _>(Exp1).ln()).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tilted = |t: f64| WeightVector::new(logs.iter().map(|l| (t * (l - top)).exp()).collect());
    let (mut lo, mut hi) = (0.0, 1.0);
    while variance(&tilted(hi)?) < d {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::BadRange(format!("could not reach variance {d} with {b} weights")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if variance(&tilted(mid)?) < d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (wl, wh) = (tilted(lo)?, tilted(hi)?);
    Ok(if (variance(&wl) - d).abs() <= (variance(&wh) - d).abs() { wl } else { wh })
}

/// How weight vectors are produced in a synthetic ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticWeights {
    Dirichlet,
    FixedVariance(f64),
}

/// `count` synthetic weight vectors of length `b`; chunk `k` of 1024 draws
/// reads stream `k`.
pub fn synthetic_ensemble(b: usize, count: usize, seed: u64, kind: SyntheticWeights) -> Result<Vec<WeightVector>> {
    const CHUNK: usize = 1024;
    let chunks: Vec<Vec<WeightVector>> = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(seed, k as u64);
            let n = CHUNK.min(count - k * CHUNK);
            (0..n)
                .map(|_| match kind {
                    SyntheticWeights::Dirichlet => Ok(random_weights(b, &mut rng)),
                    SyntheticWeights::FixedVariance(d) => fixed_variance_weights(b, d, &mut rng),
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrendSource {
    /// Synthetic weights of fixed variance; sizes are bond counts.
    FixedVariance { variance: f64, samples: usize, seed: u64 },
    /// Spectral ensembles; sizes replace the edge count of a star or the
    /// vertex count of a regular family.
    Spectral(EnsembleSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendRow {
    pub bonds: usize,
    pub count: usize,
    pub mean_variance: f64,
    /// `(α, ⟨R_α⟩/ln B)`.
    pub normalized_renyi: Vec<(f64, f64)>,
    /// `(α, ⟨H_α⟩/ln_α B)`.
    pub normalized_tsallis: Vec<(f64, f64)>,
    /// `1 - ln(1+⟨D⟩)/ln B`.
    pub variance_bound: f64,
    /// `(ln(B-2) + ln 2)/(2 ln B)`.
    pub star_bound: f64,
}

impl TrendRow {
    /// `1 - ⟨R_α⟩/ln B`.
    pub fn deficit(&self, alpha: f64) -> Option<f64> {
        self.normalized_renyi.iter().find(|(a, _)| *a == alpha).map(|p| 1.0 - p.1)
    }
}

/// Normalized averages for each size in increasing order.
pub fn asymptotic_scan(source: &TrendSource, sizes: &[usize], alphas: &[f64]) -> Result<Vec<TrendRow>> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) || sizes.is_empty() {
        return Err(Error::BadRange("sizes must be nonempty and increasing".into()));
    }
    sizes
        .iter()
        .map(|&size| {
            let stats = match source {
                TrendSource::FixedVariance { variance, samples, seed } => {
                    let ws = synthetic_ensemble(size, *samples, *seed ^ size as u64, SyntheticWeights::FixedVariance(*variance))?;
                    weight_statistics(&ws, alphas, &[])?
                }
                TrendSource::Spectral(spec) => {
                    let mut spec = spec.clone();
                    spec.family = match spec.family {
                        GraphFamily::Star { .. } => GraphFamily::Star { edges: size },
                        GraphFamily::Regular { degree, .. } => GraphFamily::Regular { vertices: size, degree },
                    };
                    spec.audit.alpha_values = alphas.to_vec();
                    collect_ensemble(&spec)?.bonds.ok_or(Error::EmptyEnsemble)?
                }
            };
            let b = stats.bonds;
            let normalize = |pairs: &[(f64, f64)], family| {
                pairs
                    .iter()
                    .map(|&(a, v)| (a, v / max_entropy_value(b, a, family)))
                    .collect::<Vec<_>>()
            };
            Ok(TrendRow {
                bonds: b,
                count: stats.count,
                mean_variance: stats.mean_variance,
                normalized_renyi: normalize(&stats.renyi, Family::Renyi),
                normalized_tsallis: normalize(&stats.tsallis, Family::Tsallis),
                variance_bound: 1.0 - stats.mean_variance.ln_1p() / (b as f64).ln(),
                star_bound: crate::bounds::equi_star_normalized_bound(b),
            })
        })
        .collect()
}

/// Least-squares fit `y ≈ c / ln B` through the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseLogFit {
    pub c: f64,
    /// `max |y - c/ln B| / |y|`.
    pub max_relative_residual: f64,
}

pub fn fit_inverse_log(points: &[(usize, f64)]) -> Result<InverseLogFit> {
    if points.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let x: Vec<f64> = points.iter().map(|&(b, _)| 1.0 / (b as f64).ln()).collect();
    let sxy: f64 = points.iter().zip(&x).map(|(p, x)| p.1 * x).sum();
    let sxx: f64 = x.iter().map(|x| x * x).sum();
    let c = sxy / sxx;
    let max_relative_residual = points
        .iter()
        .zip(&x)
        .map(|(p, x)| (p.1 - c * x).abs() / p.1.abs())
        .fold(0.0, f64::max);
    Ok(InverseLogFit {
        c,
        max_relative_residual,
    })
}

/// Least-squares fit `y ≈ a + b / ln B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineInverseLogFit {
    pub a: f64,
    pub b: f64,
    pub max_relative_residual: f64,
}

pub fn fit_affine_inverse_log(points: &[(usize, f64)]) -> Result<AffineInverseLogFit> {
    if points.len() < 2 {
        return Err(Error::BadRange("affine fit needs at least two sizes".into()));
    }
    let n = points.len() as f64;
    let x: Vec<f64> = points.iter().map(|&(b, _)| 1.0 / (b as f64).ln()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().zip(&x).map(|(p, x)| (x - mx) * (p.1 - my)).sum();
    let sxx: f64 = x.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_relative_residual = points
        .iter()
        .zip(&x)
        .map(|(p, x)| (p.1 - intercept - slope * x).abs() / p.1.abs())
        .fold(0.0, f64::max);
    Ok(AffineInverseLogFit {
        a: intercept,
        b: slope,
        max_relative_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths_are_reproducible_and_in_range() {
        let a = sample_lengths(50, 7, 1.0, 2.0).unwrap();
        assert_eq!(a, sample_lengths(50, 7, 1.0, 2.0).unwrap());
        assert_ne!(a, sample_lengths(50, 8, 1.0, 2.0).unwrap());
        assert!(a.iter().all(|l| (1.0..=2.0).contains(l)));
        assert!(matches!(sample_lengths(3, 1, 2.0, 1.0), Err(Error::BadRange(_))));
        assert!(matches!(sample_lengths(3, 1, 0.0, 1.0), Err(Error::BadRange(_))));
    }

    #[test]
    fn random_regular_graphs() {
        let g = random_regular_graph(10, 3, 4, 1.0, 2.0).unwrap();
        assert!(g.is_regular(3));
        assert_eq!(g.edge_count(), 15);
        assert_eq!(g, random_regular_graph(10, 3, 4, 1.0, 2.0).unwrap());
        assert!(random_regular_graph(5, 3, 1, 1.0, 2.0).is_err());
    }

    #[test]
    fn fixed_variance_is_exact() {
        let mut rng = rng_for(3, 0);
        for b in [4usize, 16, 64] {
            for d in [0.0, 0.5, 1.0, 2.5] {
                let w = fixed_variance_weights(b, d, &mut rng).unwrap();
                assert!((variance(&w) - d).abs() < 1e-12, "b={b} d={d}");
                assert!(w.as_slice().iter().all(|x| *x >= 0.0));
            }
        }
        assert!(fixed_variance_weights(4, 3.0, &mut rng).is_err());
    }

    #[test]
    fn uniform_ensemble_is_tight_at_two() {
        let ws = vec![WeightVector::uniform(16); 5];
        let stats = weight_statistics(&ws, &[2.0], &[0.0]).unwrap();
        let check = averaged_bound_check(&stats).unwrap();
        for row in &check.rows {
            assert!(row.margin.abs() < 1e-12, "{row:?}");
        }
        assert!(check.linear_identity_gap.abs() < 1e-15);
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(weight_statistics(&[], &[1.0], &[0.0]), Err(Error::EmptyEnsemble));
        let mut stats = weight_statistics(&[WeightVector::uniform(3)], &[1.0], &[]).unwrap();
        stats.count = 0;
        assert_eq!(averaged_bound_check(&stats), Err(Error::EmptyEnsemble));
    }

    #[test]
    fn synthetic_ensembles_are_reproducible() {
        let a = synthetic_ensemble(8, 2100, 11, SyntheticWeights::Dirichlet).unwrap();
        let b = synthetic_ensemble(8, 2100, 11, SyntheticWeights::Dirichlet).unwrap();
        assert_eq!(a.len(), 2100);
        assert_eq!(a, b);
    }

    #[test]
    fn inverse_log_fits() {
        let pts: Vec<(usize, f64)> = [16usize, 64, 256, 1024].iter().map(|&b| (b, 0.7 / (b as f64).ln())).collect();
        let fit = fit_inverse_log(&pts).unwrap();
        assert!((fit.c - 0.7).abs() < 1e-12 && fit.max_relative_residual < 1e-12);
        let pts: Vec<(usize, f64)> = [16usize, 64, 256].iter().map(|&b| (b, 0.1 + 0.7 / (b as f64).ln())).collect();
        let fit = fit_affine_inverse_log(&pts).unwrap();
        assert!((fit.a - 0.1).abs() < 1e-12 && (fit.b - 0.7).abs() < 1e-12);
    }

    #[test]
    fn empty_window_gives_empty_summary() {
        let spec = EnsembleSpec::new(GraphFamily::Star { edges: 3 }, ConditionKind::Neumann, 1, 0.1, 0.2);
        let summary = collect_ensemble(&spec).unwrap();
        assert_eq!(summary.count, 0);
        assert!(summary.bonds.is_none());
        assert_eq!(summary.rng_algorithm, "ChaCha8Rng");
    }

    #[test]
    fn star_ensemble_means_respect_center_bound() {
        let mut spec = EnsembleSpec::new(GraphFamily::Star { edges: 6 }, ConditionKind::EquiTransmitting, 5, 0.1, 6.0);
        spec.graphs = 2;
        let summary = collect_ensemble(&spec).unwrap();
        assert!(summary.count > 10);
        assert_eq!(summary.audit_failures, 0);
        let cols = summary.star_columns.as_ref().unwrap();
        for &(_, mean) in &cols.symmetrized_renyi {
            assert!(mean >= 0.5 * 5f64.ln() - 1e-9);
        }
        let bonds = summary.bonds.as_ref().unwrap();
        assert!((bonds.mean_variance - bonds.mean_variance_direct).abs() < 1e-12);
        assert_eq!(summary, collect_ensemble(&spec).unwrap());
    }

    #[test]
    fn trend_rows_are_normalized() {
        let source = TrendSource::FixedVariance {
            variance: 1.0,
            samples: 200,
            seed: 9,
        };
        let rows = asymptotic_scan(&source, &[16, 64, 256], &[0.5, 1.0, 2.0, f64::INFINITY]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].star_bound < w[0].star_bound);
        }
        for row in &rows {
            assert!((row.mean_variance - 1.0).abs() < 1e-10);
            for &(_, v) in row.normalized_renyi.iter().chain(&row.normalized_tsallis) {
                assert!(v <= 1.0 + 1e-9);
            }
        }
        assert!(matches!(asymptotic_scan(&source, &[64, 16], &[1.0]), Err(Error::BadRange(_))));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn averaged_inequalities_hold(seed in 0u64..1000, b in 2usize..40, d_frac in 0.0f64..1.0) {
            let alphas = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, f64::INFINITY];
            for kind in [SyntheticWeights::Dirichlet, SyntheticWeights::FixedVariance(d_frac * (b as f64 - 1.0) * 0.5)] {
                let ws = synthetic_ensemble(b, 64, seed, kind).unwrap();
                let stats = weight_statistics(&ws, &alphas, &[0.0, 0.5]).unwrap();
                let check = averaged_bound_check(&stats).unwrap();
                proptest::prop_assert!(check.min_margin() >= -1e-9, "{:?}", check.rows);
                proptest::prop_assert!(check.linear_identity_gap.abs() < 1e-12);
            }
        }
    }
}
