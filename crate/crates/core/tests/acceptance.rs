//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use qgraph_core::bounds::{audit, equi_star_normalized_bound, AuditOptions};
use qgraph_core::ensemble::{
    averaged_bound_check, fit_affine_inverse_log, fit_inverse_log, asymptotic_scan, random_weights,
    sample_lengths, synthetic_ensemble, weight_statistics, window_width_for_roots, SyntheticWeights,
    TrendSource,
};
use qgraph_core::entropy::{
    alpha_log, renyi, symmetrized, tsallis, tsallis_log_form, tsallis_power_form, Family, WeightVector,
};
use qgraph_core::evolution::{evolution_matrix, find_spectrum, riesz_inequality_check, EigenRecord};
use qgraph_core::graph::{build_metric_graph, star_metric_graph, MetricGraph};
use qgraph_core::linalg::{l2_distance, mat_vec};
use qgraph_core::scattering::{
    equi_transmitting_matrix, neumann_matrix, unitarity_residual, CMatrix, ConditionKind, VertexConditions,
};
use qgraph_core::spectrum::ScanOptions;
use qgraph_core::star::{a_column_from_bonds, entropy_shift_check, lift_amplitudes, star_spectrum, AColumn};

type Outcome = Result<String, String>;

const ALPHAS: [f64; 8] = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, f64::INFINITY];
const S_VALUES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn first_roots(g: &MetricGraph, kmax: f64, n: usize) -> Result<Vec<f64>, String> {
    let c = VertexConditions::uniform(g, ConditionKind::Neumann).map_err(|e| e.to_string())?;
    let scan = find_spectrum(g, &c, 0.1, kmax, &ScanOptions::default()).map_err(|e| e.to_string())?;
    let roots: Vec<f64> = scan.records.iter().map(|r| r.kappa).take(n).collect();
    if roots.len() < n {
        return Err(format!("found {} roots, expected {n}", roots.len()));
    }
    Ok(roots)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let l = 1.3;
    let interval = first_roots(&star_metric_graph(&[l]).unwrap(), 10.5 * PI / l, 10)?;
    let pair = first_roots(&star_metric_graph(&[l, l]).unwrap(), 10.5 * PI / (2.0 * l), 10)?;
    let mut worst: f64 = 0.0;
    for (n, (k1, k2)) in interval.iter().zip(&pair).enumerate() {
        let n = (n + 1) as f64;
        worst = worst.max((k1 - n * PI / l).abs()).max((k2 - n * PI / (2.0 * l)).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        worst <= 1e-8 && secs < 5.0,
        format!("max |Δκ| = {worst:.2e} over 2×10 roots, {secs:.2} s"),
    )
}

fn random_graph(rng: &mut ChaCha8Rng) -> (MetricGraph, VertexConditions) {
    let lengths = |rng: &mut ChaCha8Rng, n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(0.5..3.0)).collect() };
    match rng.random_range(0..4) {
        0 => {
            let e = rng.random_range(1..12);
            let g = star_metric_graph(&lengths(rng, e)).unwrap();
            let c = VertexConditions::star(&g, ConditionKind::Neumann).unwrap();
            (g, c)
        }
        1 => {
            let e = [4usize, 6, 8, 12, 14][rng.random_range(0..5)];
            let g = star_metric_graph(&lengths(rng, e)).unwrap();
            let c = VertexConditions::star(&g, ConditionKind::EquiTransmitting).unwrap();
            (g, c)
        }
        2 => {
            let ls = lengths(rng, 10);
            let mut edges = Vec::new();
            for i in 0..5 {
                for j in i + 1..5 {
                    edges.push((i, j, ls[edges.len()]));
                }
            }
            let g = build_metric_graph(&edges).unwrap();
            let kind = if rng.random_bool(0.5) {
                ConditionKind::Neumann
            } else {
                ConditionKind::EquiTransmitting
            };
            let c = VertexConditions::uniform(&g, kind).unwrap();
            (g, c)
        }
        _ => {
            let seed = rng.random::<u64>();
            let g = qgraph_core::ensemble::random_regular_graph(10, 3, seed, 0.5, 3.0).unwrap();
            let c = VertexConditions::uniform(&g, ConditionKind::Neumann).unwrap();
            (g, c)
        }
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (g, c) = random_graph(&mut rng);
        let kappa = rng.random_range(0.01..60.0);
        worst = worst.max(unitarity_residual(&evolution_matrix(&g, &c, kappa).unwrap().matrix));
        for v in c.iter() {
            worst = worst.max(unitarity_residual(&v.matrix));
        }
    }
    for d in 1..=30 {
        worst = worst.max(unitarity_residual(&neumann_matrix(d).matrix));
    }
    for d in [4usize, 6, 8, 12, 14, 18, 20, 24, 30, 32] {
        worst = worst.max(unitarity_residual(&equi_transmitting_matrix(d).unwrap().matrix));
    }
    ensure(worst <= 1e-12, format!("max unitarity residual {worst:.2e} over 1000 samples"))
}

/// Dirichlet, sparse and spiked weight vectors with `B ≤ 64`.
fn weight_sample(seed: u64, n: usize) -> Vec<WeightVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let b = rng.random_range(2..=64);
            match k % 3 {
                0 => random_weights(b, &mut rng),
                1 => {
                    let masses: Vec<f64> = (0..b)
                        .map(|_| if rng.random_bool(0.4) { 0.0 } else { rng.random::<f64>() })
                        .collect();
                    WeightVector::new(masses).unwrap_or_else(|_| WeightVector::uniform(b))
                }
                _ => {
                    let masses: Vec<f64> = (0..b).map(|_| rng.random::<f64>().powi(8)).collect();
                    WeightVector::new(masses).unwrap()
                }
            }
        })
        .collect()
}

fn criterion_3() -> Outcome {
    let sample = weight_sample(3, 10_000);
    let (mut collision, mut linear, mut two_form, mut product): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for w in &sample {
        let b = w.len() as f64;
        let x = w.as_slice();
        let sum_sq: f64 = x.iter().map(|v| v * v).sum();
        let d = x.iter().map(|v| (b * v - 1.0).powi(2)).sum::<f64>() / b;
        collision = collision.max((renyi(w, 2.0) - (b.ln() - d.ln_1p())).abs());
        collision = collision.max((renyi(w, 2.0) + sum_sq.ln()).abs());
        linear = linear.max((tsallis(w, 2.0) - (1.0 - (1.0 + d) / b)).abs());
        for alpha in [0.25, 0.5, 0.9, 1.0, 1.1, 1.5, 2.0, 3.0, 5.0] {
            two_form = two_form.max((tsallis(w, alpha) - tsallis_log_form(w, alpha)).abs());
            if (alpha - 1.0f64).abs() > 0.05 {
                two_form = two_form.max((tsallis(w, alpha) - tsallis_power_form(w, alpha)).abs());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..10_000 {
        let (x, y) = (rng.random_range(0.2..5.0), rng.random_range(0.2..5.0));
        let alpha: f64 = rng.random_range(0.0..3.0);
        let (lx, ly, lxy) = (
            alpha_log(x, alpha).unwrap(),
            alpha_log(y, alpha).unwrap(),
            alpha_log(x * y, alpha).unwrap(),
        );
        let gap = (lxy - (lx + ly + (1.0 - alpha) * lx * ly)).abs() / (1.0 + lxy.abs());
        product = product.max(gap);
    }
    let worst = collision.max(linear).max(two_form).max(product);
    ensure(
        worst <= 1e-12,
        format!(
            "collision {collision:.1e}, linear {linear:.1e}, Tsallis forms {two_form:.1e}, α-log product {product:.1e} (relative)"
        ),
    )
}

fn criterion_4() -> Outcome {
    let sample = weight_sample(3, 10_000);
    let orders = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0, f64::INFINITY];
    let mut slack = f64::INFINITY;
    for w in &sample {
        let values: Vec<f64> = orders.iter().map(|&a| renyi(w, a)).collect();
        for pair in values.windows(2) {
            slack = slack.min(pair[0] - pair[1]);
        }
        let (rmax, rmin) = (values[0], values[values.len() - 1]);
        for v in &values {
            slack = slack.min(v - rmin).min(rmax - v);
        }
    }
    ensure(slack >= -1e-12, format!("min slack {slack:.2e} over 10⁴ vectors and 12 orders"))
}

fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| {
        let d = r[(i, i)];
        d / d.norm()
    }));
    q * phases
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = f64::INFINITY;
    let mut worst_unitarity: f64 = 0.0;
    for k in 0..10_000 {
        let n = rng.random_range(1..=16);
        let u = haar_unitary(n, &mut rng);
        worst_unitarity = worst_unitarity.max(unitarity_residual(&u));
        let a: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let q = match k % 10 {
            0 => 1.0,
            1 => 2.0,
            _ => rng.random_range(1.0..=2.0),
        };
        worst = worst.min(riesz_inequality_check(&u, &a, q).map_err(|e| e.to_string())?);
    }
    ensure(
        worst >= -1e-12 && worst_unitarity < 1e-12,
        format!("min margin {worst:.2e} over 10⁴ triples"),
    )
}

struct SpectralCase {
    name: String,
    graph: MetricGraph,
    conditions: VertexConditions,
    records: Vec<EigenRecord>,
    star: Option<ConditionKind>,
}

fn spectral_case(name: &str, graph: MetricGraph, conditions: VertexConditions, star: Option<ConditionKind>) -> SpectralCase {
    let kmax = 0.1 + window_width_for_roots(graph.total_length(), 45);
    let scan = find_spectrum(&graph, &conditions, 0.1, kmax, &ScanOptions::default()).unwrap();
    SpectralCase {
        name: name.to_string(),
        records: scan.simple_records().cloned().collect(),
        graph,
        conditions,
        star,
    }
}

fn spectral_cases() -> Vec<SpectralCase> {
    let mut cases = Vec::new();
    for (kind, edges) in [
        (ConditionKind::Neumann, [4usize, 8, 16]),
        (ConditionKind::EquiTransmitting, [4, 6, 12]),
    ] {
        for e in edges {
            let g = star_metric_graph(&sample_lengths(e, 100 + e as u64, 1.0, 2.0).unwrap()).unwrap();
            let c = VertexConditions::star(&g, kind).unwrap();
            cases.push(spectral_case(&format!("{} star E={e}", kind.name()), g, c, Some(kind)));
        }
    }
    let ls = sample_lengths(10, 55, 1.0, 2.0).unwrap();
    let mut edges = Vec::new();
    for i in 0..5 {
        for j in i + 1..5 {
            edges.push((i, j, ls[edges.len()]));
        }
    }
    let g = build_metric_graph(&edges).unwrap();
    let c = VertexConditions::uniform(&g, ConditionKind::EquiTransmitting).unwrap();
    cases.push(spectral_case("equitransmitting K5", g, c, None));
    cases
}

/// `scan_secs` is the time spent finding the spectra; the audit time is added.
fn criterion_6(cases: &[SpectralCase], scan_secs: f64) -> Outcome {
    let start = Instant::now();
    let opts = AuditOptions::default();
    let mut lines = Vec::new();
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for case in cases {
        let mut rows = 0;
        for rec in &case.records {
            let report = audit(rec, &case.graph, &case.conditions, &opts).map_err(|e| e.to_string())?;
            rows += report.applicable().count();
            worst = worst.min(report.min_margin());
            ok &= report.passed();
        }
        ok &= case.records.len() >= 30;
        lines.push(format!("{} {}/{rows}", case.name, case.records.len()));
    }
    let secs = scan_secs + start.elapsed().as_secs_f64();
    ok &= worst >= -1e-9 && secs < 120.0;
    ensure(
        ok,
        format!("min margin {worst:.2e}, {secs:.1} s; eigenfunctions/bound rows: {}", lines.join(", ")),
    )
}

fn star_columns(case: &SpectralCase) -> Vec<AColumn> {
    case.records
        .iter()
        .map(|r| a_column_from_bonds(&case.graph, r).unwrap())
        .collect()
}

fn criterion_7(cases: &[SpectralCase]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for case in cases.iter().filter(|c| c.star.is_some()) {
        for col in star_columns(case) {
            count += 1;
            for &alpha in &ALPHAS {
                worst = worst.max(entropy_shift_check(&col, alpha, Family::Renyi).unwrap().gap);
                if alpha.is_finite() {
                    worst = worst.max(entropy_shift_check(&col, alpha, Family::Tsallis).unwrap().gap);
                }
            }
        }
    }
    ensure(worst <= 1e-12, format!("max gap {worst:.2e} over {count} star eigenfunctions"))
}

fn criterion_8(cases: &[SpectralCase]) -> Outcome {
    let mut spectrum_gap: f64 = 0.0;
    let mut lift_residual: f64 = 0.0;
    for case in cases.iter().filter(|c| c.star.is_some()) {
        let center = case.graph.star_center().unwrap();
        let lengths: Vec<f64> = case
            .graph
            .incident_edges(center)
            .iter()
            .map(|&e| case.graph.edges()[e].length)
            .collect();
        let kmax = 0.1 + window_width_for_roots(case.graph.total_length(), 45);
        let full = find_spectrum(&case.graph, &case.conditions, 0.1, kmax, &ScanOptions::default()).unwrap();
        let reduced = star_spectrum(&lengths, case.conditions.at(center), 0.1, kmax, &ScanOptions::default()).unwrap();
        if full.records.len() != reduced.columns.len() {
            return Err(format!(
                "{}: {} full roots vs {} reduced",
                case.name,
                full.records.len(),
                reduced.columns.len()
            ));
        }
        for (r, col) in full.records.iter().zip(&reduced.columns) {
            spectrum_gap = spectrum_gap.max((r.kappa - col.kappa).abs());
            if col.is_simple() {
                let a = lift_amplitudes(col);
                let u = evolution_matrix(&case.graph, &case.conditions, col.kappa).unwrap().matrix;
                lift_residual = lift_residual.max(l2_distance(&mat_vec(&u, &a), &a));
            }
        }
    }
    ensure(
        spectrum_gap <= 1e-8 && lift_residual <= 1e-10,
        format!("max |Δκ| {spectrum_gap:.2e}, max ‖Ua − a‖ {lift_residual:.2e}"),
    )
}

fn criterion_9() -> Outcome {
    let mut ok = true;
    let mut bound_column = Vec::new();
    let mut worst_column = f64::INFINITY;
    let mut worst_bond = f64::INFINITY;
    for e in [4usize, 6, 12, 14] {
        let g = star_metric_graph(&sample_lengths(e, 900 + e as u64, 1.0, 2.0).unwrap()).unwrap();
        let c = VertexConditions::star(&g, ConditionKind::EquiTransmitting).unwrap();
        let case = spectral_case("", g, c, Some(ConditionKind::EquiTransmitting));
        let b = 2 * e;
        let f = equi_star_normalized_bound(b);
        bound_column.push(f);
        let half_log = 0.5 * ((e - 1) as f64).ln();
        for rec in &case.records {
            let col = a_column_from_bonds(&case.graph, rec).unwrap().weights().unwrap();
            let bond = WeightVector::from_amplitudes(&rec.amplitudes).unwrap();
            for s in S_VALUES {
                worst_column = worst_column.min(symmetrized(&col, s, Family::Renyi).unwrap() - half_log);
                worst_bond = worst_bond.min(symmetrized(&bond, s, Family::Renyi).unwrap() / (b as f64).ln() - f);
            }
        }
        ok &= case.records.len() >= 30;
    }
    // The closed form rises from B = 8 to B = 12 and decreases from there on.
    let tail_decreasing = bound_column[1..].windows(2).all(|w| w[1] < w[0]);
    let limit = (equi_star_normalized_bound(1 << 40) - 0.5).abs();
    ok &= worst_column >= -1e-9 && worst_bond >= -1e-9 && tail_decreasing && limit < 0.02;
    ensure(
        ok,
        format!(
            "column margin {worst_column:.2e}, bond margin {worst_bond:.2e}, bound column {:?}, |f(2^40) − ½| = {limit:.3}",
            bound_column.iter().map(|f| format!("{f:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn criterion_10(cases: &[SpectralCase]) -> Outcome {
    let alphas = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, f64::INFINITY];
    let mut worst = f64::INFINITY;
    let mut identity: f64 = 0.0;
    let mut ensembles = Vec::new();
    for kind in [SyntheticWeights::Dirichlet, SyntheticWeights::FixedVariance(1.0), SyntheticWeights::FixedVariance(4.0)] {
        ensembles.push(synthetic_ensemble(16, 10_000, 10, kind).unwrap());
    }
    for case in cases {
        ensembles.push(
            case.records
                .iter()
                .map(|r| WeightVector::from_amplitudes(&r.amplitudes).unwrap())
                .collect(),
        );
    }
    for ws in &ensembles {
        let stats = weight_statistics(ws, &alphas, &S_VALUES).map_err(|e| e.to_string())?;
        let check = averaged_bound_check(&stats).map_err(|e| e.to_string())?;
        worst = worst.min(check.min_margin());
        identity = identity.max(check.linear_identity_gap.abs());
    }
    ensure(
        worst >= -1e-9 && identity <= 1e-12,
        format!("min margin {worst:.2e}, ⟨H₂⟩ identity gap {identity:.2e} over {} ensembles", ensembles.len()),
    )
}

fn criterion_11() -> Outcome {
    let source = TrendSource::FixedVariance {
        variance: 1.0,
        samples: 10_000,
        seed: 11,
    };
    let rows = asymptotic_scan(&source, &[16, 64, 256, 1024], &[1.0]).map_err(|e| e.to_string())?;
    let points: Vec<(usize, f64)> = rows.iter().map(|r| (r.bonds, r.deficit(1.0).unwrap())).collect();
    let fit = fit_inverse_log(&points).map_err(|e| e.to_string())?;
    let affine = fit_affine_inverse_log(&points).map_err(|e| e.to_string())?;
    ensure(
        fit.max_relative_residual < 0.1,
        format!(
            "c = {:.4}, max relative residual {:.2}% (affine: a = {:.2e}, b = {:.4}); deficits {:?}",
            fit.c,
            100.0 * fit.max_relative_residual,
            affine.a,
            affine.b,
            points.iter().map(|p| format!("{:.4}", p.1)).collect::<Vec<_>>()
        ),
    )
}

fn main() {
    // `cargo test -- --list` passes this to every target.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let start = Instant::now();
    let cases = spectral_cases();
    let crit6 = criterion_6(&cases, start.elapsed().as_secs_f64());

    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "analytic spectra", criterion_1()),
        (2, "unitarity", criterion_2()),
        (3, "exact identities", criterion_3()),
        (4, "Rényi monotonicity and sandwich", criterion_4()),
        (5, "Riesz inequality", criterion_5()),
        (6, "bound audits", crit6),
        (7, "bond/edge shift identities", criterion_7(&cases)),
        (8, "reduced star cross-check", criterion_8(&cases)),
        (9, "equi-transmitting star bounds", criterion_9()),
        (10, "averaged inequalities", criterion_10(&cases)),
        (11, "asymptotic trend", criterion_11()),
    ];
    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(d) => println!("criterion {n:>2} PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {d}")
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
