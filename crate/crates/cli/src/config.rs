use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use qgraph_core::bounds::AuditOptions;
use qgraph_core::spectrum::DEFAULT_TOLERANCE;

use crate::error::{CliError, CliResult};

pub const DEFAULT_KMIN: f64 = 0.1;
/// Default windows hold about this many spectral points.
pub const DEFAULT_ROOTS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Spectral points and bond eigenvectors.
    Spectrum,
    /// Rényi, Tsallis and symmetrized entropies of every eigenvector.
    Entropy,
    /// Audit of every applicable entropy lower bound.
    Bounds,
    /// Edge-amplitude spectra of a star with bond/edge entropy comparison.
    Star,
    /// Seeded ensemble experiment described by an experiment file.
    Ensemble,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Entropy => "entropy",
            Command::Bounds => "bounds",
            Command::Star => "star",
            Command::Ensemble => "ensemble",
        }
    }
}

/// Quantum graph spectra, eigenvector entropies and entropic bound audits.
///
/// Exit status: 0 on success, 2 when an applicable bound fails, 1 on errors.
#[derive(Debug, Clone, Parser)]
#[command(name = "qgraph", version, allow_negative_numbers = true)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Graph description file, or experiment file for `ensemble`.
    pub input: PathBuf,
    /// Lower end of the κ window [default: 0.1].
    #[arg(long)]
    pub kmin: Option<f64>,
    /// Upper end of the κ window [default: kmin + 40π/(total length)].
    #[arg(long)]
    pub kmax: Option<f64>,
    /// Scan grid spacing [default: π/(8 · total length)].
    #[arg(long = "grid-step")]
    pub grid_step: Option<f64>,
    /// Largest accepted secular gap at a root [default: 1e-8].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Comma-separated α grid; `inf` allowed [default: 0.25,0.5,1,1.5,2,3,5,inf].
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<f64>>,
    /// Comma-separated s grid in [0, 1] [default: 0,0.25,0.5,0.75,1].
    #[arg(long = "s-values", value_delimiter = ',')]
    pub s_values: Option<Vec<f64>>,
    /// Largest power t of U(κ) in the η^(t) bounds [default: ⌈girth/2⌉].
    #[arg(long)]
    pub tmax: Option<usize>,
    /// Ensemble seed, overriding the experiment file [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

impl RunConfig {
    /// Rejects malformed overrides before any computation starts.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if let Some(k) = self.kmin {
            if !(k.is_finite() && k > 0.0) {
                return bad(format!("--kmin must be positive and finite, got {k}"));
            }
        }
        if let Some(k) = self.kmax {
            if !k.is_finite() || k <= self.kmin.unwrap_or(DEFAULT_KMIN) {
                return bad(format!("--kmax must be finite and exceed kmin, got {k}"));
            }
        }
        if let Some(h) = self.grid_step {
            if !(h.is_finite() && h > 0.0) {
                return bad(format!("--grid-step must be positive, got {h}"));
            }
        }
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return bad(format!("--tol must be positive, got {t}"));
            }
        }
        if let Some(orders) = &self.orders {
            if orders.is_empty() || orders.iter().any(|a| !(*a >= 0.0)) {
                return bad("--orders must be a nonempty list of nonnegative numbers".into());
            }
        }
        if let Some(s) = &self.s_values {
            if s.is_empty() || s.iter().any(|s| !(0.0..=1.0).contains(s)) {
                return bad("--s-values must be a nonempty list in [0, 1]".into());
            }
        }
        if self.tmax == Some(0) {
            return bad("--tmax must be at least 1".into());
        }
        Ok(())
    }

    pub fn tolerance(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOLERANCE)
    }

    pub fn alpha_values(&self) -> Vec<f64> {
        self.orders.clone().unwrap_or_else(|| AuditOptions::default().alpha_values)
    }

    pub fn s_grid(&self) -> Vec<f64> {
        self.s_values.clone().unwrap_or_else(|| AuditOptions::default().s_values)
    }
}
