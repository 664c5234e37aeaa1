//! The bond evolution matrix `U(κ)`, its spectrum and eigenvectors.
//!
//! Entry `(b, b')` is nonzero only when bond `b'` ends where bond `b` starts,
//! at some vertex `v`, and then equals `σ^(v)[out(b), in(b')] · exp(iκ L_{b'})`.
//! Eigenfunctions of the graph Laplacian with eigenvalue `κ²` correspond to
//! solutions of `U(κ) a = a`, where `a_b` is the amplitude of the wave leaving
//! the origin of `b`:
//!
//! `f_e(x_b) = a_b exp(iκ x_b) + a_{b̄} exp(iκ (L_e - x_b))`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::linalg::{identity_minus, l2_distance, mat_vec, max_modulus, null_vector, p_norm};
use crate::scattering::{CMatrix, ConditionKind, VertexConditions};
use crate::spectrum::{scan_roots, ScanOptions, ScanWarning, UnitaryFamily};

/// `U(κ)` at a fixed `κ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionMatrix {
    pub kappa: f64,
    pub matrix: CMatrix,
}

impl EvolutionMatrix {
    /// `U(κ)^t`.
    pub fn power(&self, t: usize) -> CMatrix {
        assert!(t >= 1, "power must be positive");
        let mut acc = self.matrix.clone();
        for _ in 1..t {
            acc = &acc * &self.matrix;
        }
        acc
    }

    /// Largest entry modulus of `U^t` for `t = 1..=t_max`.
    pub fn max_entry_moduli(&self, t_max: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(t_max);
        let mut acc = self.matrix.clone();
        for t in 1..=t_max {
            if t > 1 {
                acc = &acc * &self.matrix;
            }
            out.push(max_modulus(&acc));
        }
        out
    }
}

/// Scattering structure of a graph, reusable across `κ`.
#[derive(Debug, Clone)]
pub struct GraphEvolution<'a> {
    graph: &'a MetricGraph,
    conditions: &'a VertexConditions,
    // (row bond, column bond, σ entry, column bond length)
    entries: Vec<(usize, usize, Complex64, f64)>,
}

impl<'a> GraphEvolution<'a> {
    pub fn new(graph: &'a MetricGraph, conditions: &'a VertexConditions) -> Result<Self> {
        conditions.check(graph)?;
        let mut entries = Vec::new();
        for v in 0..graph.vertex_count() {
            let sigma = &conditions.at(v).matrix;
            let incident = graph.incident_edges(v);
            for (r, &e_out) in incident.iter().enumerate() {
                let row = graph.outgoing_bond(v, e_out);
                for (c, &e_in) in incident.iter().enumerate() {
                    let col = graph.incoming_bond(v, e_in);
                    entries.push((row, col, sigma[(r, c)], graph.edges()[e_in].length));
                }
            }
        }
        Ok(GraphEvolution {
            graph,
            conditions,
            entries,
        })
    }

    pub fn graph(&self) -> &MetricGraph {
        self.graph
    }

    pub fn conditions(&self) -> &VertexConditions {
        self.conditions
    }

    pub fn evolution_matrix(&self, kappa: f64) -> EvolutionMatrix {
        EvolutionMatrix {
            kappa,
            matrix: self.at(kappa),
        }
    }
}

impl UnitaryFamily for GraphEvolution<'_> {
    fn dim(&self) -> usize {
        self.graph.bond_count()
    }

    fn at(&self, kappa: f64) -> CMatrix {
        let b = self.graph.bond_count();
        let mut m = CMatrix::zeros(b, b);
        for &(row, col, s, len) in &self.entries {
            m[(row, col)] = s * Complex64::from_polar(1.0, kappa * len);
        }
        m
    }

    fn phase_rate(&self) -> f64 {
        2.0 * self.graph.total_length()
    }
}

pub fn evolution_matrix(g: &MetricGraph, conds: &VertexConditions, kappa: f64) -> Result<EvolutionMatrix> {
    if !(kappa > 0.0) {
        return Err(Error::NonpositiveArgument(kappa));
    }
    Ok(GraphEvolution::new(g, conds)?.evolution_matrix(kappa))
}

/// Smallest singular value of `I - U(κ)`.
pub fn secular_gap(g: &MetricGraph, conds: &VertexConditions, kappa: f64) -> Result<f64> {
    Ok(GraphEvolution::new(g, conds)?.secular_gap(kappa))
}

/// An eigenvector of `U(κ)` with eigenvalue one.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenRecord {
    pub kappa: f64,
    /// Unit vector, first non-negligible entry real and positive.
    pub amplitudes: Vec<Complex64>,
    /// `‖U(κ) a - a‖₂`.
    pub residual: f64,
    /// Singular values of `I - U(κ)` below ten times the solver tolerance.
    pub multiplicity: usize,
}

impl EigenRecord {
    pub fn is_simple(&self) -> bool {
        self.multiplicity == 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralScan {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub grid_step: f64,
    pub tolerance: f64,
    pub records: Vec<EigenRecord>,
    pub warnings: Vec<ScanWarning>,
}

impl SpectralScan {
    pub fn simple_records(&self) -> impl Iterator<Item = &EigenRecord> {
        self.records.iter().filter(|r| r.is_simple())
    }
}

/// Eigenvector of a unitary family at a spectral point.
pub fn eigen_record<F: UnitaryFamily + ?Sized>(family: &F, kappa: f64, tolerance: f64) -> Result<EigenRecord> {
    let u = family.at(kappa);
    let nv = null_vector(&identity_minus(&u), 10.0 * tolerance);
    if nv.gap > tolerance {
        return Err(Error::NotAnEigenvalue {
            kappa,
            gap: nv.gap,
            tolerance,
        });
    }
    let residual = l2_distance(&mat_vec(&u, &nv.vector), &nv.vector);
    Ok(EigenRecord {
        kappa,
        amplitudes: nv.vector,
        residual,
        multiplicity: nv.multiplicity.max(1),
    })
}

pub fn eigenvector_at(g: &MetricGraph, conds: &VertexConditions, kappa: f64, tolerance: f64) -> Result<EigenRecord> {
    eigen_record(&GraphEvolution::new(g, conds)?, kappa, tolerance)
}

/// Scans a unitary family and attaches eigenvectors to every root.
pub fn scan_family<F: UnitaryFamily + ?Sized>(
    family: &F,
    kappa_min: f64,
    kappa_max: f64,
    opts: &ScanOptions,
) -> Result<SpectralScan> {
    let scan = scan_roots(family, kappa_min, kappa_max, opts)?;
    let records = scan
        .roots
        .par_iter()
        .map(|root| eigen_record(family, root.kappa, opts.tolerance))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralScan {
        kappa_min,
        kappa_max,
        grid_step: opts.grid_step.unwrap_or_else(|| family.default_grid_step()),
        tolerance: opts.tolerance,
        records,
        warnings: scan.warnings,
    })
}

/// Eigenvalues `κ²` with `κ` in `(kappa_min, kappa_max]` and their bond vectors.
pub fn find_spectrum(
    g: &MetricGraph,
    conds: &VertexConditions,
    kappa_min: f64,
    kappa_max: f64,
    opts: &ScanOptions,
) -> Result<SpectralScan> {
    scan_family(&GraphEvolution::new(g, conds)?, kappa_min, kappa_max, opts)
}

/// Largest entry modulus of `U(κ)^t`.
pub fn max_entry_modulus_power(g: &MetricGraph, conds: &VertexConditions, kappa: f64, t: usize) -> Result<f64> {
    if t == 0 {
        return Err(Error::BadRange("power must be at least 1".into()));
    }
    Ok(max_modulus(&evolution_matrix(g, conds, kappa)?.power(t)))
}

/// Checks the vertex matching relations vertex by vertex from the scattering
/// matrices, without assembling `U`. At Neumann vertices the reconstructed
/// eigenfunction must also be continuous with vanishing derivative sum.
/// Tolerances are relative to `‖a‖₂`.
pub fn verify_vertex_conditions(g: &MetricGraph, conds: &VertexConditions, rec: &EigenRecord, tol: f64) -> bool {
    let a = &rec.amplitudes;
    if a.len() != g.bond_count() || conds.check(g).is_err() {
        return false;
    }
    let scale = p_norm(a, 2.0).max(f64::MIN_POSITIVE);
    let k = rec.kappa;
    for v in 0..g.vertex_count() {
        let sigma = conds.at(v);
        let incident = g.incident_edges(v);
        // amplitude of each incoming wave on arrival at v
        let arriving: Vec<Complex64> = incident
            .iter()
            .map(|&e| a[g.incoming_bond(v, e)] * Complex64::from_polar(1.0, k * g.edges()[e].length))
            .collect();
        for (r, &e_out) in incident.iter().enumerate() {
            let predicted: Complex64 = (0..incident.len()).map(|c| sigma.matrix[(r, c)] * arriving[c]).sum();
            if (a[g.outgoing_bond(v, e_out)] - predicted).norm() > tol * scale {
                return false;
            }
        }
        if sigma.kind == ConditionKind::Neumann {
            // value and outward derivative / (iκ) of f on each incident edge at v
            let values: Vec<Complex64> = incident
                .iter()
                .zip(&arriving)
                .map(|(&e, &inc)| a[g.outgoing_bond(v, e)] + inc)
                .collect();
            let derivative_sum: Complex64 = incident
                .iter()
                .zip(&arriving)
                .map(|(&e, &inc)| a[g.outgoing_bond(v, e)] - inc)
                .sum();
            if values.iter().any(|f| (f - values[0]).norm() > tol * scale) {
                return false;
            }
            if derivative_sum.norm() > tol * scale {
                return false;
            }
        }
    }
    true
}

/// Margins of the Riesz-type inequalities for a unitary `u` and `1 ≤ q ≤ 2`:
/// `η^{(2-q)/q} ‖a‖_q - ‖u a‖_p` and `η^{(2-q)/q} ‖u a‖_q - ‖a‖_p` with
/// `1/p + 1/q = 1` and `η` the largest entry modulus. Returns the smaller.
pub fn riesz_inequality_check(u: &CMatrix, a: &[Complex64], q: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&q) {
        return Err(Error::BadRange(format!("q must lie in [1, 2], got {q}")));
    }
    if a.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::ZeroVector);
    }
    if u.ncols() != a.len() {
        return Err(Error::DimensionMismatch {
            expected: u.ncols(),
            found: a.len(),
        });
    }
    let p = if q == 1.0 { f64::INFINITY } else { q / (q - 1.0) };
    let factor = max_modulus(u).powf((2.0 - q) / q);
    let ua = mat_vec(u, a);
    let forward = factor * p_norm(a, q) - p_norm(&ua, p);
    let twin = factor * p_norm(&ua, q) - p_norm(a, p);
    Ok(forward.min(twin))
}
