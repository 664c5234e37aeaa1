//! Weight vectors and entropy functionals.
//!
//! Masses below `ZERO_THRESHOLD · max` are set to exact zeros when a weight
//! vector is built, so every functional sees the same vector
//! (`0^α = 0`, `0 ln 0 = 0`).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative threshold below which a weight counts as zero.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// Probability vector `w_b = |a_b|² / ‖a‖₂²`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Normalizes nonnegative masses to a probability vector, zeroing masses
    /// below the threshold first.
    pub fn new(mut masses: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = masses.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::NonpositiveArgument(bad));
        }
        let cut = ZERO_THRESHOLD * masses.iter().copied().fold(0.0, f64::max);
        masses.iter_mut().filter(|m| **m <= cut).for_each(|m| *m = 0.0);
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroVector);
        }
        masses.iter_mut().for_each(|m| *m /= total);
        Ok(WeightVector(masses))
    }

    pub fn from_amplitudes(a: &[Complex64]) -> Result<Self> {
        Self::new(a.iter().map(|z| z.norm_sqr()).collect())
    }

    pub fn uniform(b: usize) -> Self {
        WeightVector(vec![1.0 / b as f64; b])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `B`, the number of entries including zeros.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    /// Nonzero weights.
    pub fn support(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied().filter(|&w| w > 0.0)
    }

    pub fn rank(&self) -> usize {
        self.support().count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Renyi,
    Tsallis,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Renyi => "renyi",
            Family::Tsallis => "tsallis",
        }
    }
}

pub fn shannon(w: &WeightVector) -> f64 {
    -w.support().map(|x| x * x.ln()).sum::<f64>()
}

/// `Σ w^α - 1 = Σ w (w^{α-1} - 1)`, accurate when `α` is near one.
fn power_sum_minus_one(w: &WeightVector, alpha: f64) -> f64 {
    w.support().map(|x| x * ((alpha - 1.0) * x.ln()).exp_m1()).sum()
}

/// `ln Σ w^α` for finite `α > 0`. Once the sum drops below one half it is
/// rescaled by the largest weight so large orders do not underflow.
fn log_power_sum(w: &WeightVector, alpha: f64) -> f64 {
    let s = power_sum_minus_one(w, alpha);
    if s > -0.5 {
        return s.ln_1p();
    }
    let m = w.max();
    alpha * m.ln() + w.support().map(|x| (x / m).powf(alpha)).sum::<f64>().ln()
}

/// Rényi entropy for `α ∈ [0, ∞]`: `ln rank` at zero, Shannon at one and
/// `-ln max w` at infinity.
pub fn renyi(w: &WeightVector, alpha: f64) -> f64 {
    assert!(alpha >= 0.0, "Rényi order must be nonnegative, got {alpha}");
    if alpha == 0.0 {
        (w.rank() as f64).ln()
    } else if alpha == 1.0 {
        shannon(w)
    } else if alpha.is_infinite() {
        -w.max().ln()
    } else {
        log_power_sum(w, alpha) / (1.0 - alpha)
    }
}

pub fn min_entropy(w: &WeightVector) -> f64 {
    renyi(w, f64::INFINITY)
}

pub fn max_entropy(w: &WeightVector) -> f64 {
    renyi(w, 0.0)
}

/// Tsallis entropy `(Σ w^α - 1) / (1 - α)`; Shannon at one, zero at infinity.
pub fn tsallis(w: &WeightVector, alpha: f64) -> f64 {
    assert!(alpha >= 0.0, "Tsallis order must be nonnegative, got {alpha}");
    if alpha == 1.0 {
        shannon(w)
    } else if alpha.is_infinite() {
        0.0
    } else if alpha == 0.0 {
        w.rank() as f64 - 1.0
    } else {
        power_sum_minus_one(w, alpha) / (1.0 - alpha)
    }
}

/// Tsallis entropy in the form `Σ w ln_α(1/w)`.
pub fn tsallis_log_form(w: &WeightVector, alpha: f64) -> f64 {
    w.support().map(|x| x * ln_alpha(1.0 / x, alpha)).sum()
}

/// Tsallis entropy from the plain power sum, `α ≠ 1`.
pub fn tsallis_power_form(w: &WeightVector, alpha: f64) -> f64 {
    (w.support().map(|x| x.powf(alpha)).sum::<f64>() - 1.0) / (1.0 - alpha)
}

fn ln_alpha(xi: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        xi.ln()
    } else {
        ((1.0 - alpha) * xi.ln()).exp_m1() / (1.0 - alpha)
    }
}

/// `ln_α ξ = (ξ^{1-α} - 1) / (1 - α)`, `ln ξ` at `α = 1`.
pub fn alpha_log(xi: f64, alpha: f64) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::NonpositiveArgument(xi));
    }
    if !alpha.is_finite() {
        return Err(Error::UnsupportedOrder(format!("alpha-logarithm of order {alpha}")));
    }
    Ok(ln_alpha(xi, alpha))
}

/// `(1/(1-s), 1/(1+s))` for `s ∈ [0, 1]`; the first is infinite at `s = 1`.
pub fn conjugate_orders(s: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::UnsupportedOrder(format!("s = {s} outside [0, 1]")));
    }
    let alpha = if s == 1.0 { f64::INFINITY } else { 1.0 / (1.0 - s) };
    Ok((alpha, 1.0 / (1.0 + s)))
}

/// Half-sum of the entropies at the conjugate orders of `s`. The Rényi value
/// at `s = 1` is `(R_min + R_max) / 2`; Tsallis requires `s < 1`.
pub fn symmetrized(w: &WeightVector, s: f64, family: Family) -> Result<f64> {
    let (alpha, beta) = conjugate_orders(s)?;
    match family {
        Family::Renyi if s == 1.0 => Ok(0.5 * (min_entropy(w) + max_entropy(w))),
        Family::Renyi => Ok(0.5 * (renyi(w, alpha) + renyi(w, beta))),
        Family::Tsallis if s == 1.0 => Err(Error::UnsupportedOrder(
            "symmetrized Tsallis entropy at s = 1".into(),
        )),
        Family::Tsallis => Ok(0.5 * (tsallis(w, alpha) + tsallis(w, beta))),
    }
}

/// Entropy of a single order in the given family.
pub fn entropy(w: &WeightVector, alpha: f64, family: Family) -> f64 {
    match family {
        Family::Renyi => renyi(w, alpha),
        Family::Tsallis => tsallis(w, alpha),
    }
}

/// Largest possible value over `b` entries: `ln B` or `ln_α B`.
pub fn max_entropy_value(b: usize, alpha: f64, family: Family) -> f64 {
    match family {
        Family::Renyi => (b as f64).ln(),
        Family::Tsallis if alpha.is_infinite() => 0.0,
        Family::Tsallis => ln_alpha(b as f64, alpha),
    }
}

/// `D = -1 + B Σ w²`.
pub fn variance(w: &WeightVector) -> f64 {
    let b = w.len() as f64;
    -1.0 + b * w.as_slice().iter().map(|x| x * x).sum::<f64>()
}

/// `D = B⁻¹ Σ (B w_b - 1)²`.
pub fn variance_direct(w: &WeightVector) -> f64 {
    let b = w.len() as f64;
    w.as_slice().iter().map(|x| (b * x - 1.0).powi(2)).sum::<f64>() / b
}
