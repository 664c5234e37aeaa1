//! Root scanning for one-parameter unitary families `κ ↦ U(κ)`.
//!
//! Spectral points are the `κ` at which `U(κ)` has eigenvalue one. Every
//! family handled here has the form `U(κ) = D(κ) S D'(κ)` with `D, D'`
//! diagonal phase matrices `exp(iκL)` for positive lengths, so each
//! eigenphase increases strictly with `κ` and
//! `det U(κ) = det U(0) · exp(iκ r)` with `r` the phase rate.
//!
//! The scan samples the eigenphases on a grid. With `W(κ)` the sum of the
//! eigenphases reduced to `[0, 2π)`, the number of eigenphases passing
//! through zero on `(a, b]` is exactly `(r (b - a) - W(b) + W(a)) / 2π`.
//! Cells holding several roots are bisected until each holds one, which is
//! then located by Brent's method on the real secular function
//!
//! `Z(κ) = det(I - U(κ)) / ((-i)^B exp(iκ r / 2) √det U(0)) = Π sin(θ_n / 2)`,
//!
//! which changes sign exactly where one eigenphase crosses zero. Clusters
//! that stay unresolved below the refinement width are degenerate roots and
//! are located by golden-section minimisation of the smallest singular value
//! of `I - U(κ)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eigenphases, identity_minus, smallest_singular_value};
use crate::scattering::CMatrix;

pub trait UnitaryFamily: Sync {
    fn dim(&self) -> usize;

    fn at(&self, kappa: f64) -> CMatrix;

    /// `r` in `det U(κ) = det U(0) exp(iκ r)`; the sum of all bond lengths
    /// entering the phase factors.
    fn phase_rate(&self) -> f64;

    /// One eighth of the mean root spacing `2π / r`.
    fn default_grid_step(&self) -> f64 {
        PI / (4.0 * self.phase_rate())
    }

    /// Smallest singular value of `I - U(κ)`; vanishes exactly at roots.
    fn secular_gap(&self, kappa: f64) -> f64 {
        smallest_singular_value(&identity_minus(&self.at(kappa)))
    }
}

/// Gap below which a refined point is accepted as a root.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Width at which refinement stops.
pub const REFINE_WIDTH: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    /// Grid spacing; `None` uses [`UnitaryFamily::default_grid_step`].
    pub grid_step: Option<f64>,
    /// Largest accepted secular gap at a refined root.
    pub tolerance: f64,
    pub refine_width: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            grid_step: None,
            tolerance: DEFAULT_TOLERANCE,
            refine_width: REFINE_WIDTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScanWarning {
    /// More than one root fell into a single grid cell.
    WindowTooCoarse {
        kappa_lo: f64,
        kappa_hi: f64,
        roots: usize,
    },
    /// A refined point whose secular gap exceeds the tolerance.
    RejectedRoot { kappa: f64, gap: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub kappa: f64,
    pub gap: f64,
    /// Number of eigenphase crossings merged into this root; above one only
    /// for clusters narrower than the refinement width.
    pub crossings: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootScan {
    pub roots: Vec<Root>,
    pub warnings: Vec<ScanWarning>,
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    kappa: f64,
    phase_sum: f64,
    secular: f64,
}

// Eigenphases closer than this to zero make the count ambiguous; the
// sample point is nudged instead.
const PHASE_GUARD: f64 = 1e-9;

struct Scanner<'a, F: UnitaryFamily + ?Sized> {
    family: &'a F,
    sqrt_det0: Complex64,
    opts: &'a ScanOptions,
}

impl<'a, F: UnitaryFamily + ?Sized> Scanner<'a, F> {
    fn new(family: &'a F, opts: &'a ScanOptions) -> Self {
        let det0 = family.at(0.0).determinant();
        Scanner {
            family,
            sqrt_det0: det0.sqrt(),
            opts,
        }
    }

    fn secular_of(&self, u: &CMatrix, kappa: f64) -> f64 {
        let n = u.nrows() as i32;
        let det = identity_minus(u).determinant();
        let norm = Complex64::new(0.0, -1.0).powi(n)
            * Complex64::from_polar(1.0, 0.5 * kappa * self.family.phase_rate())
            * self.sqrt_det0;
        (det / norm).re
    }

    fn secular(&self, kappa: f64) -> f64 {
        self.secular_of(&self.family.at(kappa), kappa)
    }

    /// Samples near `kappa`, moving by multiples of `nudge` when an
    /// eigenphase sits on zero.
    fn sample(&self, kappa: f64, nudge: f64) -> Sample {
        for k in 0..64 {
            let shift = if k % 2 == 0 { k / 2 } else { -(k / 2 + 1) } as f64;
            let at = kappa + shift * nudge;
            let u = self.family.at(at);
            let phases = eigenphases(&u);
            let closest = phases
                .iter()
                .map(|&t| t.min(TAU - t))
                .fold(f64::INFINITY, f64::min);
            if closest > PHASE_GUARD {
                return Sample {
                    kappa: at,
                    phase_sum: phases.iter().sum(),
                    secular: self.secular_of(&u, at),
                };
            }
        }
        // Only reachable for a root of very high multiplicity sitting on
        // the grid; the count may then be off and the caller flags it.
        let u = self.family.at(kappa);
        Sample {
            kappa,
            phase_sum: eigenphases(&u).iter().sum(),
            secular: self.secular_of(&u, kappa),
        }
    }

    fn crossings(&self, lo: &Sample, hi: &Sample) -> usize {
        let x = (self.family.phase_rate() * (hi.kappa - lo.kappa) - (hi.phase_sum - lo.phase_sum)) / TAU;
        x.round().max(0.0) as usize
    }

    fn isolate(&self, lo: Sample, hi: Sample, count: usize, out: &mut Vec<(Sample, Sample, usize)>) {
        if count == 0 {
            return;
        }
        let width = hi.kappa - lo.kappa;
        if count == 1 || width <= self.opts.refine_width {
            out.push((lo, hi, count));
            return;
        }
        let mid = self.sample(lo.kappa + 0.5 * width, 1e-3 * width);
        let left = self.crossings(&lo, &mid).min(count);
        self.isolate(lo, mid, left, out);
        self.isolate(mid, hi, count - left, out);
    }

    fn refine(&self, lo: &Sample, hi: &Sample, count: usize) -> Root {
        let kappa = if count == 1 && lo.secular * hi.secular < 0.0 {
            brent(|k| self.secular(k), lo.kappa, hi.kappa, lo.secular, hi.secular, 1e-3 * self.opts.refine_width)
        } else {
            golden_section(|k| self.family.secular_gap(k), lo.kappa, hi.kappa, self.opts.refine_width)
        };
        Root {
            kappa,
            gap: self.family.secular_gap(kappa),
            crossings: count,
        }
    }
}

/// All roots of `U(κ) a = a` with `κ` in `(kappa_min, kappa_max]`, sorted.
pub fn scan_roots<F: UnitaryFamily + ?Sized>(
    family: &F,
    kappa_min: f64,
    kappa_max: f64,
    opts: &ScanOptions,
) -> Result<RootScan> {
    if !(kappa_min > 0.0 && kappa_max > kappa_min && kappa_max.is_finite()) {
        return Err(Error::BadRange(format!(
            "need 0 < kappa_min < kappa_max, got ({kappa_min}, {kappa_max})"
        )));
    }
    let step = opts.grid_step.unwrap_or_else(|| family.default_grid_step());
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::BadRange(format!("grid step must be positive, got {step}")));
    }
    let cells = ((kappa_max - kappa_min) / step).ceil().max(1.0) as usize;
    let h = (kappa_max - kappa_min) / cells as f64;
    let scanner = Scanner::new(family, opts);

    let samples: Vec<Sample> = (0..=cells)
        .into_par_iter()
        .map(|i| scanner.sample(kappa_min + i as f64 * h, 1e-6 * h))
        .collect();

    let per_cell: Vec<(Vec<Root>, Vec<ScanWarning>)> = samples
        .par_windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let count = scanner.crossings(&lo, &hi);
            let mut warnings = Vec::new();
            if count > 1 {
                warnings.push(ScanWarning::WindowTooCoarse {
                    kappa_lo: lo.kappa,
                    kappa_hi: hi.kappa,
                    roots: count,
                });
            }
            let mut brackets = Vec::new();
            scanner.isolate(lo, hi, count, &mut brackets);
            let mut roots = Vec::new();
            for (a, b, c) in brackets {
                let root = scanner.refine(&a, &b, c);
                if root.gap <= opts.tolerance {
                    roots.push(root);
                } else {
                    warnings.push(ScanWarning::RejectedRoot {
                        kappa: root.kappa,
                        gap: root.gap,
                    });
                }
            }
            (roots, warnings)
        })
        .collect();

    let mut roots = Vec::new();
    let mut warnings = Vec::new();
    for (r, w) in per_cell {
        roots.extend(r);
        warnings.extend(w);
    }
    // a nudged first sample can reach below the window
    roots.retain(|r| r.kappa > kappa_min && r.kappa <= kappa_max);
    roots.sort_by(|a, b| a.kappa.total_cmp(&b.kappa));
    Ok(RootScan { roots, warnings })
}

/// Brent's bracketed root finder; `fa` and `fb` must differ in sign.
pub fn brent(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, xtol: f64) -> f64 {
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut bisected = true;
    for _ in 0..200 {
        if fb == 0.0 || (b - a).abs() <= xtol {
            return b;
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let outside = !((s > lo.min(b)) && (s < lo.max(b)));
        let slow = if bisected {
            (s - b).abs() >= (b - c).abs() / 2.0 || (b - c).abs() < xtol
        } else {
            (s - b).abs() >= (c - d).abs() / 2.0 || (c - d).abs() < xtol
        };
        if outside || slow {
            s = 0.5 * (a + b);
            bisected = true;
        } else {
            bisected = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    b
}

/// Golden-section minimiser on `[a, b]`, stopping at interval width `tol`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
        if x1 == x2 {
            break;
        }
    }
    0.5 * (a + b)
}
