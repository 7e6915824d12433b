//! Finite-scale experiments on sequences of pleated surfaces: the convex /
//! even dichotomy for families of bending weights, and periodic pleatings
//! whose holonomy shortens the translation length of a slightly bent curve.

mod family;
mod periodic;

use thiserror::Error;

use crate::hypgeom::LorentzMap;
use crate::lam2::LamError;
use crate::pleat::PleatError;

pub use family::{
    flat_image_check, run_dichotomy, ArcReport, DichotomyReport, FamilyLeaf, FamilySpec, IndexVerdict,
    LimitClass, WeightPath, EVEN_RESIDUAL_TOL, EXTRAPOLATION_INDEX,
};
pub use periodic::{
    periodic_holonomy, quasigeodesic_experiment, LevelSummary, PeriodicPleating, QuasiGeodesicReport,
    QuasiGeodesicSweep,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeqError {
    #[error("leaf {id}: weight path gives {weight} at index {n}, outside (0, π]")]
    WeightOutOfRange { id: String, n: u64, weight: f64 },
    #[error("index range {0}..={1} is empty")]
    EmptyRange(u64, u64),
    #[error("every index of the family fails local convexity")]
    NoAdmissibleIndex,
    #[error("the lamination is empty")]
    EmptyLamination,
    #[error("isometry is {kind}, not loxodromic (cosh of displacement {cosh})")]
    NotLoxodromic { kind: &'static str, cosh: f64 },
    #[error("translation length must be positive, got {0}")]
    BadPeriod(f64),
    #[error("leaf {0} passes through the basepoint")]
    LeafThroughBasepoint(String),
    #[error("equivariance fails by {0:e}")]
    NotEquivariant(f64),
    #[error(transparent)]
    Lamination(#[from] LamError),
    #[error(transparent)]
    Pleat(#[from] PleatError),
}

/// Translation length of a loxodromic isometry, `log` of the largest
/// eigenvalue modulus of its matrix.
///
/// With eigenvalues `e^{±d}`, `e^{±iφ}`, the traces give
/// `tr G = 2(cosh d + cos φ)` and `tr G² = 2(cosh 2d + cos 2φ)`, so
/// `A = cosh d` and `B = cos φ` are the roots of
/// `x² − s x + (s² − q)/2` with `s = tr G / 2`, `q = (tr G² + 4) / 4`.
pub fn translation_length(g: &LorentzMap) -> Result<f64, SeqError> {
    let m = g.matrix();
    let s = m.trace() / 2.0;
    let q = ((m * m).trace() + 4.0) / 4.0;
    let disc = (2.0 * q - s * s).max(0.0).sqrt();
    let a = (s + disc) / 2.0;
    let b = (s - disc) / 2.0;
    if a <= 1.0 + 1e-9 {
        let kind = if b < 1.0 - 1e-9 {
            "elliptic"
        } else if g.distance(&LorentzMap::identity()) <= 1e-9 {
            "the identity"
        } else {
            "parabolic"
        };
        return Err(SeqError::NotLoxodromic { kind, cosh: a });
    }
    Ok(a.acosh())
}
