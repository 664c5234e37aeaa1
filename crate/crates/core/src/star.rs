//! Star graphs: the reduced `E × E` eigenproblem for the edge amplitudes and
//! the lift back to bond coefficients.
//!
//! With Neumann ends, the eigenfunction on edge `e` is `A_e cos(κ(x - L_e))`,
//! `x` measured from the center. In the bond convention of the evolution
//! module (amplitude of the wave leaving the origin of a bond) this gives
//! `a = ½ A_e e^{-iκL_e}` on the bond leaving the center and `a = ½ A_e` on
//! the bond arriving at it, so the outgoing relation at the center becomes
//! `A = e^{iκL} σ⁰ e^{iκL} A`.

use num_complex::Complex64;

use crate::entropy::{alpha_log, renyi, symmetrized, tsallis, Family, WeightVector};
use crate::error::{Error, Result};
use crate::evolution::{scan_family, EigenRecord};
use crate::graph::MetricGraph;
use crate::linalg::fix_phase;
use crate::scattering::{CMatrix, VertexScattering};
use crate::spectrum::{ScanOptions, ScanWarning, UnitaryFamily};

/// Edge amplitudes of a star eigenfunction.
#[derive(Debug, Clone, PartialEq)]
pub struct AColumn {
    pub kappa: f64,
    pub lengths: Vec<f64>,
    /// Unit vector, first non-negligible entry real and positive.
    pub amplitudes: Vec<Complex64>,
    pub residual: f64,
    pub multiplicity: usize,
}

impl AColumn {
    pub fn edge_count(&self) -> usize {
        self.amplitudes.len()
    }

    /// `ϖ_e = |A_e|² / ‖A‖²`.
    pub fn weights(&self) -> Result<WeightVector> {
        WeightVector::from_amplitudes(&self.amplitudes)
    }

    pub fn is_simple(&self) -> bool {
        self.multiplicity == 1
    }

    /// `A_e cos(κ(x - L_e))` at distance `x` from the center.
    pub fn edge_value(&self, e: usize, x: f64) -> Complex64 {
        self.amplitudes[e] * (self.kappa * (x - self.lengths[e])).cos()
    }
}

/// `κ ↦ e^{iκL} σ⁰ e^{iκL}`.
#[derive(Debug, Clone)]
pub struct StarFamily {
    lengths: Vec<f64>,
    sigma: CMatrix,
}

impl StarFamily {
    pub fn new(lengths: &[f64], center: &VertexScattering) -> Result<Self> {
        if center.degree() != lengths.len() || center.matrix.ncols() != lengths.len() {
            return Err(Error::DimensionMismatch {
                expected: lengths.len(),
                found: center.degree(),
            });
        }
        if let Some((edge, &length)) = lengths.iter().enumerate().find(|(_, l)| !(**l > 0.0)) {
            return Err(Error::NonpositiveLength { edge, length });
        }
        Ok(StarFamily {
            lengths: lengths.to_vec(),
            sigma: center.matrix.clone(),
        })
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }
}

impl UnitaryFamily for StarFamily {
    fn dim(&self) -> usize {
        self.lengths.len()
    }

    fn at(&self, kappa: f64) -> CMatrix {
        let phase: Vec<Complex64> = self.lengths.iter().map(|l| Complex64::from_polar(1.0, kappa * l)).collect();
        CMatrix::from_fn(self.dim(), self.dim(), |r, c| phase[r] * self.sigma[(r, c)] * phase[c])
    }

    fn phase_rate(&self) -> f64 {
        2.0 * self.lengths.iter().sum::<f64>()
    }
}

pub fn star_reduced_unitary(lengths: &[f64], center: &VertexScattering, kappa: f64) -> Result<CMatrix> {
    if !(kappa > 0.0) {
        return Err(Error::NonpositiveArgument(kappa));
    }
    Ok(StarFamily::new(lengths, center)?.at(kappa))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarSpectrum {
    pub columns: Vec<AColumn>,
    pub warnings: Vec<ScanWarning>,
}

fn column_from_record(lengths: &[f64], rec: EigenRecord) -> AColumn {
    AColumn {
        kappa: rec.kappa,
        lengths: lengths.to_vec(),
        amplitudes: rec.amplitudes,
        residual: rec.residual,
        multiplicity: rec.multiplicity,
    }
}

/// Spectral points in `(kappa_min, kappa_max]` from the reduced problem.
pub fn star_spectrum(
    lengths: &[f64],
    center: &VertexScattering,
    kappa_min: f64,
    kappa_max: f64,
    opts: &ScanOptions,
) -> Result<StarSpectrum> {
    let family = StarFamily::new(lengths, center)?;
    let scan = scan_family(&family, kappa_min, kappa_max, opts)?;
    Ok(StarSpectrum {
        columns: scan.records.into_iter().map(|r| column_from_record(lengths, r)).collect(),
        warnings: scan.warnings,
    })
}

/// Unit bond vector on a star built by `star_metric_graph`, where edge `e`
/// owns bond `2e` (center to end) and `2e + 1` (end to center).
pub fn lift_amplitudes(col: &AColumn) -> Vec<Complex64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut a = Vec::with_capacity(2 * col.edge_count());
    for (amp, len) in col.amplitudes.iter().zip(&col.lengths) {
        a.push(amp * Complex64::from_polar(scale, -col.kappa * len));
        a.push(amp * scale);
    }
    a
}

/// Edge amplitudes of a bond eigenvector on any star graph, read off the
/// bonds arriving at the center.
pub fn a_column_from_bonds(g: &MetricGraph, rec: &EigenRecord) -> Result<AColumn> {
    let center = g.star_center().ok_or(Error::NotAStar)?;
    if rec.amplitudes.len() != g.bond_count() {
        return Err(Error::DimensionMismatch {
            expected: g.bond_count(),
            found: rec.amplitudes.len(),
        });
    }
    let incident = g.incident_edges(center);
    let mut amplitudes: Vec<Complex64> = incident.iter().map(|&e| rec.amplitudes[g.incoming_bond(center, e)]).collect();
    let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    amplitudes.iter_mut().for_each(|z| *z /= norm);
    fix_phase(&mut amplitudes);
    Ok(AColumn {
        kappa: rec.kappa,
        lengths: incident.iter().map(|&e| g.edges()[e].length).collect(),
        amplitudes,
        residual: rec.residual,
        multiplicity: rec.multiplicity,
    })
}

/// Largest `|f'_e(L_e)| / κ` over the edges, from the lifted bond amplitudes.
/// Vanishes for a genuine eigenfunction with Neumann ends.
pub fn end_derivative_residual(col: &AColumn) -> f64 {
    let a = lift_amplitudes(col);
    (0..col.edge_count())
        .map(|e| {
            let phase = Complex64::from_polar(1.0, col.kappa * col.lengths[e]);
            (a[2 * e] * phase - a[2 * e + 1]).norm()
        })
        .fold(0.0, f64::max)
}

/// Both sides of a shift identity between bond and edge entropies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

impl ShiftCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        ShiftCheck {
            lhs,
            rhs,
            gap: (lhs - rhs).abs(),
        }
    }
}

/// `R_α(a) = R_α(A) + ln 2` or `H_α(a) = 2^{1-α} H_α(A) + ln_α 2`, with `a`
/// the lifted bond vector.
pub fn entropy_shift_check(col: &AColumn, alpha: f64, family: Family) -> Result<ShiftCheck> {
    let edge = col.weights()?;
    let bond = WeightVector::from_amplitudes(&lift_amplitudes(col))?;
    match family {
        Family::Renyi => Ok(ShiftCheck::new(renyi(&bond, alpha), renyi(&edge, alpha) + std::f64::consts::LN_2)),
        Family::Tsallis => {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::UnsupportedOrder(format!("Tsallis shift at order {alpha}")));
            }
            let rhs = 2f64.powf(1.0 - alpha) * tsallis(&edge, alpha) + alpha_log(2.0, alpha)?;
            Ok(ShiftCheck::new(tsallis(&bond, alpha), rhs))
        }
    }
}

/// `R̃_s(a) = R̃_s(A) + ln 2`.
pub fn symmetrized_shift_check(col: &AColumn, s: f64) -> Result<ShiftCheck> {
    let edge = col.weights()?;
    let bond = WeightVector::from_amplitudes(&lift_amplitudes(col))?;
    Ok(ShiftCheck::new(
        symmetrized(&bond, s, Family::Renyi)?,
        symmetrized(&edge, s, Family::Renyi)? + std::f64::consts::LN_2,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{find_spectrum, GraphEvolution};
    use crate::graph::star_metric_graph;
    use crate::linalg::{l2_distance, mat_vec};
    use crate::scattering::{equi_transmitting_matrix, neumann_matrix, unitarity_residual, ConditionKind, VertexConditions};
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

    #[test]
    fn single_edge_reduced_matrix() {
        let m = star_reduced_unitary(&[1.0], &neumann_matrix(1), 0.8).unwrap();
        assert!((m[(0, 0)] - Complex64::from_polar(1.0, 1.6)).norm() < 1e-15);
        assert!(matches!(
            star_reduced_unitary(&[1.0, 2.0], &neumann_matrix(3), 0.8),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn reduced_matrix_is_unitary() {
        let lengths = [1.1, 1.37, 1.52, 1.9, 1.23];
        let sigma = equi_transmitting_matrix(6).unwrap();
        let m = star_reduced_unitary(&[1.1, 1.37, 1.52, 1.9, 1.23, 1.61], &sigma, 3.3).unwrap();
        assert!(unitarity_residual(&m) <= 1e-12);
        let m = star_reduced_unitary(&lengths, &neumann_matrix(5), 17.0).unwrap();
        assert!(unitarity_residual(&m) <= 1e-12);
    }

    #[test]
    fn closed_form_spectra() {
        let one = star_spectrum(&[1.0], &neumann_matrix(1), 0.1, 10.0, &ScanOptions::default()).unwrap();
        let ks: Vec<f64> = one.columns.iter().map(|c| c.kappa).collect();
        assert_eq!(ks.len(), 3);
        for (n, k) in ks.iter().enumerate() {
            assert!((k - (n + 1) as f64 * PI).abs() < 1e-8);
        }
        let two = star_spectrum(&[1.0, 1.0], &neumann_matrix(2), 0.1, 10.0, &ScanOptions::default()).unwrap();
        let ks: Vec<f64> = two.columns.iter().map(|c| c.kappa).collect();
        assert_eq!(ks.len(), 6);
        for (n, k) in ks.iter().enumerate() {
            assert!((k - (n + 1) as f64 * PI / 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn reduced_and_full_spectra_agree() {
        let lengths = [1.0, 1.2247, 1.4142, 1.7321];
        let g = star_metric_graph(&lengths).unwrap();
        let conds = VertexConditions::star(&g, ConditionKind::Neumann).unwrap();
        let opts = ScanOptions::default();
        let reduced = star_spectrum(&lengths, &neumann_matrix(4), 0.1, 12.0, &opts).unwrap();
        let full = find_spectrum(&g, &conds, 0.1, 12.0, &opts).unwrap();
        assert_eq!(reduced.columns.len(), full.records.len());
        let family = GraphEvolution::new(&g, &conds).unwrap();
        for (col, rec) in reduced.columns.iter().zip(&full.records) {
            assert!((col.kappa - rec.kappa).abs() < 1e-8);
            let lifted = lift_amplitudes(col);
            let u = family.at(col.kappa);
            assert!(l2_distance(&mat_vec(&u, &lifted), &lifted) < 1e-10);
            let back = a_column_from_bonds(&g, rec).unwrap();
            let overlap: Complex64 = back.amplitudes.iter().zip(&col.amplitudes).map(|(x, y)| x.conj() * y).sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-8);
            assert!(end_derivative_residual(col) < 1e-12);
        }
    }

    #[test]
    fn lift_examples() {
        let col = AColumn {
            kappa: 2.3,
            lengths: vec![1.4],
            amplitudes: vec![Complex64::new(1.0, 0.0)],
            residual: 0.0,
            multiplicity: 1,
        };
        let w = WeightVector::from_amplitudes(&lift_amplitudes(&col)).unwrap();
        assert!((w.as_slice()[0] - 0.5).abs() < 1e-15 && (w.as_slice()[1] - 0.5).abs() < 1e-15);
        let col = AColumn {
            kappa: 0.9,
            lengths: vec![1.0, 1.5],
            amplitudes: vec![Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(0.0, FRAC_1_SQRT_2)],
            residual: 0.0,
            multiplicity: 1,
        };
        let a = lift_amplitudes(&col);
        for e in 0..2 {
            assert!((a[2 * e].norm() - a[2 * e + 1].norm()).abs() < 1e-15);
        }
        let r2 = entropy_shift_check(&col, 2.0, Family::Renyi).unwrap();
        assert!((r2.lhs - 4f64.ln()).abs() < 1e-14 && r2.gap < 1e-14);
        let t2 = entropy_shift_check(&col, 2.0, Family::Tsallis).unwrap();
        let h2_edge = 0.5;
        assert!((t2.rhs - (0.5 * h2_edge + 0.5)).abs() < 1e-15 && t2.gap < 1e-14);
        let h1 = entropy_shift_check(&col, 1.0, Family::Renyi).unwrap();
        assert!((h1.lhs - 2.0 * LN_2).abs() < 1e-14);
    }

    #[test]
    fn edge_form_satisfies_the_end_condition() {
        let lengths = [1.0, 1.3, 1.8, 1.1, 1.45];
        let spec = star_spectrum(&lengths, &neumann_matrix(5), 0.1, 6.0, &ScanOptions::default()).unwrap();
        assert!(!spec.columns.is_empty());
        for col in &spec.columns {
            assert!(end_derivative_residual(col) < 1e-12);
            let h = 1e-6;
            for e in 0..lengths.len() {
                let slope = (col.edge_value(e, lengths[e]) - col.edge_value(e, lengths[e] - h)).norm() / h;
                assert!(slope < 1e-4 * col.kappa * col.kappa);
            }
        }
    }
}
