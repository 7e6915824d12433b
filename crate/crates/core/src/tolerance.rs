//! Tolerances and numeric defaults shared by every module.
//!
//! | name | value | used for |
//! |------|-------|----------|
//! | [`CONSTRUCTION_TOL`] | 1e-10 | accepting points/planes built from raw coordinates |
//! | [`INVARIANT_TOL`] | 1e-9 | Lorentz drift, fixed-point and coincidence checks |
//! | [`SIDE_DEAD_ZONE`] | 1e-9 | `side_of` zero band |
//! | [`SUPPORT_TOL`] | 1e-8 | one-sidedness of flats with respect to a plane |
//! | [`PREDICATE_TOL`] | 1e-6 | user-facing geometric predicates |
//! | [`TRANSVERSALITY_MIN_ANGLE`] | 1e-6 rad | smallest accepted crossing angle |
//! | [`PI_COMPARE_TOL`] | 1e-12 | comparing weights against π |
//!
//! Command defaults: δ = 0.05, ε = 0.25, window R = 5.0, tol = 1e-6, tail = 10.

pub const CONSTRUCTION_TOL: f64 = 1e-10;
pub const INVARIANT_TOL: f64 = 1e-9;
pub const SIDE_DEAD_ZONE: f64 = 1e-9;
pub const SUPPORT_TOL: f64 = 1e-8;
pub const PREDICATE_TOL: f64 = 1e-6;
pub const TRANSVERSALITY_MIN_ANGLE: f64 = 1e-6;
pub const PI_COMPARE_TOL: f64 = 1e-12;

/// Margin required of an interior witness of the convex region cut out by
/// the support planes.
pub const INTERIOR_MARGIN: f64 = 1e-4;

pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_EPSILON: f64 = 0.25;
pub const DEFAULT_WINDOW: f64 = 5.0;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_TAIL: usize = 10;

/// Upper bound (exclusive) on the sample spacing of a (δ, ε)-approximation:
/// (log 3) / 2 ≈ 0.5493.
pub fn max_spacing() -> f64 {
    3f64.ln() / 2.0
}

/// Default spacing parameter `s` for approximation reports.
pub fn default_spacing() -> f64 {
    0.5f64.min(max_spacing() - 1e-3)
}
