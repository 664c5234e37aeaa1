//! Dense complex helpers shared by the spectral code.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::scattering::CMatrix;

/// Right singular data of a square matrix near its kernel.
#[derive(Debug, Clone)]
pub struct NullVector {
    /// Smallest singular value.
    pub gap: f64,
    /// Unit right singular vector of the smallest singular value, with the
    /// phase convention of [`fix_phase`] applied.
    pub vector: Vec<Complex64>,
    /// Number of singular values at or below the multiplicity threshold.
    pub multiplicity: usize,
}

/// Smallest singular value.
pub fn smallest_singular_value(m: &CMatrix) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn null_vector(m: &CMatrix, multiplicity_threshold: f64) -> NullVector {
    let svd = m.clone().svd(false, true);
    let values = &svd.singular_values;
    let (k, gap) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (k, s)| if s < best.1 { (k, s) } else { best });
    let v_t = svd.v_t.expect("requested V^H");
    let mut vector: Vec<Complex64> = v_t.row(k).iter().map(|z| z.conj()).collect();
    let norm = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    vector.iter_mut().for_each(|z| *z /= norm);
    fix_phase(&mut vector);
    NullVector {
        gap,
        vector,
        multiplicity: values.iter().filter(|&&s| s <= multiplicity_threshold).count(),
    }
}

/// Entries with modulus below this fraction of the largest are treated as
/// zero when choosing the reference phase.
const PHASE_ZERO: f64 = 1e-8;

/// Rotates `v` so its first non-negligible entry is real and positive.
pub fn fix_phase(v: &mut [Complex64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    if let Some(z0) = v.iter().find(|z| z.norm() > PHASE_ZERO * max).copied() {
        let rot = z0.conj() / z0.norm();
        v.iter_mut().for_each(|z| *z *= rot);
    }
}

/// Eigenphases in `[0, 2π)`.
pub fn eigenphases(m: &CMatrix) -> Vec<f64> {
    let eig = m
        .clone()
        .schur()
        .eigenvalues()
        .expect("complex Schur form is triangular");
    eig.iter().map(|z| z.arg().rem_euclid(TAU)).collect()
}

/// `‖a‖_p` for `p ≥ 1`, `p = ∞` allowed.
pub fn p_norm(a: &[Complex64], p: f64) -> f64 {
    let max = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if p.is_infinite() || max == 0.0 {
        return max;
    }
    // scaled to avoid overflow for large p
    max * a.iter().map(|z| (z.norm() / max).powf(p)).sum::<f64>().powf(1.0 / p)
}

pub fn max_modulus(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn mat_vec(m: &CMatrix, a: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)] * a[c]).sum())
        .collect()
}

pub fn l2_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `I - m`.
pub fn identity_minus(m: &CMatrix) -> CMatrix {
    CMatrix::identity(m.nrows(), m.ncols()) - m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_norms() {
        let a = [Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)];
        assert!((p_norm(&a, 2.0) - 5.0).abs() < 1e-15);
        assert!((p_norm(&a, 1.0) - 7.0).abs() < 1e-15);
        assert_eq!(p_norm(&a, f64::INFINITY), 4.0);
        assert!((p_norm(&a, 400.0) - 4.0).abs() < 1e-2);
    }

    #[test]
    fn phase_convention() {
        let mut v = vec![Complex64::new(0.0, 1e-20), Complex64::new(0.0, -2.0), Complex64::new(1.0, 1.0)];
        fix_phase(&mut v);
        assert!((v[1] - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eigenphases_of_diagonal_unitary() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::from_polar(1.0, 0.5),
            Complex64::from_polar(1.0, -0.5),
        ]));
        let mut ph = eigenphases(&m);
        ph.sort_by(f64::total_cmp);
        assert!((ph[0] - 0.5).abs() < 1e-14);
        assert!((ph[1] - (TAU - 0.5)).abs() < 1e-14);
    }

    #[test]
    fn null_vector_of_rank_deficient_matrix() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
            ],
        );
        let nv = null_vector(&m, 1e-10);
        assert!(nv.gap < 1e-14);
        assert_eq!(nv.multiplicity, 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((nv.vector[0] - Complex64::new(s, 0.0)).norm() < 1e-14);
        assert!((nv.vector[1] - Complex64::new(s, 0.0)).norm() < 1e-14);
    }
}
