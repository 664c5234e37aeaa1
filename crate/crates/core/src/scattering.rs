//! Vertex scattering matrices.
//!
//! The matrix at vertex `v` maps amplitudes arriving at `v` to amplitudes
//! leaving `v`. Row `r` belongs to the bond leaving `v` along the `r`-th
//! incident edge and column `c` to the bond arriving along the `c`-th incident
//! edge, with incident edges taken in canonical order (see
//! [`MetricGraph::incident_edges`]). Diagonal entries are back-scattering.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::MetricGraph;

pub type CMatrix = DMatrix<Complex64>;

/// Family a vertex matrix was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    /// Continuity plus vanishing sum of outgoing derivatives.
    Neumann,
    /// No back-scattering, equal transmission to every other bond.
    EquiTransmitting,
    /// User-supplied unitary matrix.
    Explicit,
}

impl ConditionKind {
    pub fn name(self) -> &'static str {
        match self {
            ConditionKind::Neumann => "neumann",
            ConditionKind::EquiTransmitting => "equitransmitting",
            ConditionKind::Explicit => "explicit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexScattering {
    pub kind: ConditionKind,
    pub matrix: CMatrix,
}

impl VertexScattering {
    pub fn degree(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn explicit(matrix: CMatrix) -> Self {
        VertexScattering {
            kind: ConditionKind::Explicit,
            matrix,
        }
    }

    pub fn of_kind(kind: ConditionKind, degree: usize) -> Result<Self> {
        match kind {
            ConditionKind::Neumann => Ok(neumann_matrix(degree)),
            ConditionKind::EquiTransmitting => equi_transmitting_matrix(degree),
            ConditionKind::Explicit => Err(Error::UnsupportedOrder(
                "explicit matrices must be supplied".into(),
            )),
        }
    }

    /// Largest entry modulus.
    pub fn max_modulus(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Neumann (Kirchhoff) matrix with entries `2/d - δ`.
pub fn neumann_matrix(d: usize) -> VertexScattering {
    let off = 2.0 / d as f64;
    VertexScattering {
        kind: ConditionKind::Neumann,
        matrix: CMatrix::from_fn(d, d, |r, c| {
            Complex64::new(if r == c { off - 1.0 } else { off }, 0.0)
        }),
    }
}

fn is_odd_prime(p: i64) -> bool {
    if p < 3 || p % 2 == 0 {
        return false;
    }
    let mut k = 3;
    while k * k <= p {
        if p % k == 0 {
            return false;
        }
        k += 2;
    }
    true
}

fn pow_mod(base: i64, mut exp: i64, m: i64) -> i64 {
    let m = m as i128;
    let mut acc: i128 = 1;
    let mut b = (base as i128).rem_euclid(m);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as i64
}

/// Legendre symbol `(a | p)` by Euler's criterion.
pub fn legendre_symbol(a: i64, p: i64) -> Result<i8> {
    if !is_odd_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let a = a.rem_euclid(p);
    if a == 0 {
        return Ok(0);
    }
    Ok(if pow_mod(a, (p - 1) / 2, p) == 1 { 1 } else { -1 })
}

/// Paley conference matrix of order `p + 1`, indexed by `{∞} ∪ F_p` with `∞`
/// first. For `p ≡ 3 (mod 4)` it is skew-symmetric, for `p ≡ 1 (mod 4)`
/// symmetric; in both cases `C Cᵀ = p I`.
pub fn paley_conference_matrix(p: i64) -> Result<DMatrix<f64>> {
    if !is_odd_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let n = p as usize + 1;
    let column_sign = if p % 4 == 3 { -1.0 } else { 1.0 };
    let mut c = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        c[(0, k)] = 1.0;
        c[(k, 0)] = column_sign;
    }
    for a in 0..p {
        for b in 0..p {
            c[(a as usize + 1, b as usize + 1)] = f64::from(legendre_symbol(a - b, p)?);
        }
    }
    Ok(c)
}

/// Equi-transmitting matrix for `d - 1` an odd prime: the Paley conference
/// matrix of order `d` scaled by `1/√(d-1)`. Zero diagonal, every off-diagonal
/// modulus `1/√(d-1)`.
pub fn equi_transmitting_matrix(d: usize) -> Result<VertexScattering> {
    let p = d as i64 - 1;
    if d < 3 || !is_odd_prime(p) {
        return Err(Error::UnsupportedDegree(d));
    }
    let c = paley_conference_matrix(p)?;
    let scale = 1.0 / (p as f64).sqrt();
    Ok(VertexScattering {
        kind: ConditionKind::EquiTransmitting,
        matrix: c.map(|x| Complex64::new(x * scale, 0.0)),
    })
}

/// `max |(M†M - I)_{ij}|`.
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    let n = m.ncols();
    let gram = m.adjoint() * m;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringReport {
    pub degree: usize,
    pub unitarity_residual: f64,
    pub unitary: bool,
    pub max_modulus: f64,
    pub zero_diagonal: bool,
    pub equi_transmitting: bool,
}

pub fn validate_scattering(m: &VertexScattering, tol: f64) -> ScatteringReport {
    let d = m.matrix.nrows();
    if d != m.matrix.ncols() {
        return ScatteringReport {
            degree: d,
            unitarity_residual: f64::INFINITY,
            unitary: false,
            max_modulus: m.max_modulus(),
            zero_diagonal: false,
            equi_transmitting: false,
        };
    }
    let residual = unitarity_residual(&m.matrix);
    let zero_diagonal = (0..d).all(|k| m.matrix[(k, k)].norm() <= tol);
    let equi_transmitting = d >= 2 && zero_diagonal && {
        let target = 1.0 / ((d - 1) as f64).sqrt();
        (0..d).all(|r| (0..d).all(|c| r == c || (m.matrix[(r, c)].norm() - target).abs() <= tol))
    };
    ScatteringReport {
        degree: d,
        unitarity_residual: residual,
        unitary: residual <= tol,
        max_modulus: m.max_modulus(),
        zero_diagonal,
        equi_transmitting,
    }
}

/// One scattering matrix per vertex, indexed by vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexConditions {
    vertices: Vec<VertexScattering>,
}

/// Unitarity tolerance applied when conditions are attached to a graph.
pub const UNITARITY_TOL: f64 = 1e-10;

impl VertexConditions {
    /// Attaches `matrices[v]` to vertex `v`, checking sizes and unitarity.
    pub fn new(g: &MetricGraph, matrices: Vec<VertexScattering>) -> Result<Self> {
        if matrices.len() < g.vertex_count() {
            return Err(Error::MissingCondition(matrices.len()));
        }
        if matrices.len() > g.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: g.vertex_count(),
                found: matrices.len(),
            });
        }
        let conds = VertexConditions { vertices: matrices };
        conds.check(g)?;
        for (v, m) in conds.vertices.iter().enumerate() {
            let residual = unitarity_residual(&m.matrix);
            if residual > UNITARITY_TOL {
                return Err(Error::NotUnitary { vertex: v, residual });
            }
        }
        Ok(conds)
    }

    /// The same family at every vertex.
    pub fn uniform(g: &MetricGraph, kind: ConditionKind) -> Result<Self> {
        Self::from_kinds(g, |_| kind)
    }

    pub fn from_kinds(g: &MetricGraph, kind: impl Fn(usize) -> ConditionKind) -> Result<Self> {
        let matrices = (0..g.vertex_count())
            .map(|v| VertexScattering::of_kind(kind(v), g.degree(v)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(g, matrices)
    }

    /// Star conditions: `center` at the star center, Neumann at the pendant ends.
    pub fn star(g: &MetricGraph, center: ConditionKind) -> Result<Self> {
        let c = g.star_center().ok_or(Error::NotAStar)?;
        Self::from_kinds(g, |v| if v == c { center } else { ConditionKind::Neumann })
    }

    /// Sizes match degrees and every vertex is covered.
    pub fn check(&self, g: &MetricGraph) -> Result<()> {
        for v in 0..g.vertex_count() {
            let m = self.vertices.get(v).ok_or(Error::MissingCondition(v))?;
            let size = m.matrix.nrows();
            if size != g.degree(v) || m.matrix.ncols() != size {
                return Err(Error::DegreeMismatch {
                    vertex: v,
                    degree: g.degree(v),
                    size,
                });
            }
        }
        Ok(())
    }

    pub fn at(&self, v: usize) -> &VertexScattering {
        &self.vertices[v]
    }

    pub fn iter(&self) -> impl Iterator<Item = &VertexScattering> {
        self.vertices.iter()
    }

    pub fn all_of_kind(&self, kind: ConditionKind) -> bool {
        self.vertices.iter().all(|m| m.kind == kind)
    }
}
