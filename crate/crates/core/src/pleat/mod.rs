//! Pleated surfaces obtained by bending the H² slice along a finite weighted
//! lamination, their support planes, convexity tests, bending measures and
//! polygonal approximations.

mod approx;
mod chord;
mod convexity;
mod surface;

use thiserror::Error;

use crate::hypgeom::GeomError;
use crate::lam2::LamError;

pub use approx::{
    approx_report, check_approximation, polygonal_approximation, projection_meets_subarc,
    ApproxEntry, ApproxReport, ApproxViolation, PolygonalApproximation, length_bound,
};
pub use chord::{chord_comparison, ChordComparison};
pub use convexity::{
    coplanarity_residual, is_convex, is_even, supports_surface, witness_margin, Convexity,
    ConvexityCertificate,
};
pub use surface::{
    bending_measure, build_pleated, BendSide, BendingData, PleatedSurface, SupportPlanes,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PleatError {
    #[error("leaf {id}: bending weight {weight} outside (0, π]")]
    WeightOutOfRange { id: String, weight: f64 },
    #[error("surface is not locally convex: flat {flat} leaves the support half-space of flat {plane} by {excess:e}")]
    Unsupported { plane: usize, flat: usize, excess: f64 },
    #[error("ε must be < (log 3)/2 ≈ 0.5493 and positive, got {0}")]
    SpacingOutOfRange(f64),
    #[error("δ must be positive, got {0}")]
    AngleOutOfRange(f64),
    #[error("α must lie in (0, π/2), got {0}")]
    AlphaOutOfRange(f64),
    #[error("s must lie in (0, min(1, (log 3)/2)), got {0}")]
    SOutOfRange(f64),
    #[error("bending {bending} of the segment is not below π/2")]
    OutOfRegime { bending: f64 },
    #[error("leaf points evaluated from the two sides disagree by {0:e}")]
    EdgeMismatch(f64),
    #[error(transparent)]
    Lamination(#[from] LamError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
}
