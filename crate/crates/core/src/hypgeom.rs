//! Hyperboloid-model primitives for H² ⊂ H³.
//!
//! Everything lives in Minkowski space R^{3,1} with coordinates `(t, x, y, z)`
//! and the form `⟨a, b⟩ = -a_t b_t + a_x b_x + a_y b_y + a_z b_z`. Points of
//! H³ are the upper sheet `⟨p, p⟩ = -1, t > 0`; the hyperbolic plane H² is the
//! slice `z = 0`. Planes are unit spacelike normals `u`, and the half-space
//! attached to a plane is `{x : ⟨x, u⟩ ≤ 0}`. Isometries are 4×4 matrices `G`
//! with `GᵀJG = J`, so angles, sides and distances are all inner products.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tolerance::{CONSTRUCTION_TOL, INVARIANT_TOL, SIDE_DEAD_ZONE};

pub type Vec4 = Vector4<f64>;
pub type Mat4 = Matrix4<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("not a point of the upper hyperboloid sheet (⟨p,p⟩ = {norm}, t = {t})")]
    InvalidPoint { norm: f64, t: f64 },
    #[error("distance argument {arg} is below 1; points are not on the same sheet")]
    InvalidDistance { arg: f64 },
    #[error("plane normal is not unit spacelike (⟨u,u⟩ = {norm})")]
    InvalidPlane { norm: f64 },
    #[error("planes are disjoint or tangent at infinity (⟨u,v⟩ = {inner})")]
    DisjointPlanes { inner: f64 },
    #[error("degenerate geodesic: ideal endpoints coincide or are not null")]
    DegenerateGeodesic,
    #[error("matrix is not an orientation-preserving Lorentz transformation (drift {drift:e})")]
    NotLorentz { drift: f64 },
}

/// Minkowski form diag(-1, 1, 1, 1).
pub fn minkowski_metric() -> Mat4 {
    Mat4::from_diagonal(&Vec4::new(-1.0, 1.0, 1.0, 1.0))
}

#[inline]
pub fn mink_inner(a: &Vec4, b: &Vec4) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

#[inline]
pub fn mink_norm_sq(a: &Vec4) -> f64 {
    mink_inner(a, a)
}

/// Unit normal of the base plane `z = 0`.
pub fn e_z() -> Vec4 {
    Vec4::new(0.0, 0.0, 0.0, 1.0)
}

/// A point of H³ on the upper sheet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec4")]
pub struct MinkowskiPoint(Vec4);

impl TryFrom<Vec4> for MinkowskiPoint {
    type Error = GeomError;
    fn try_from(v: Vec4) -> Result<Self, GeomError> {
        Self::new(v)
    }
}

impl MinkowskiPoint {
    pub fn new(coords: Vec4) -> Result<Self, GeomError> {
        let norm = mink_norm_sq(&coords);
        let scale = coords[0].abs().max(1.0);
        if !(coords[0] > 0.0) || (norm + 1.0).abs() > CONSTRUCTION_TOL * scale * scale {
            return Err(GeomError::InvalidPoint { norm, t: coords[0] });
        }
        Ok(Self(coords))
    }

    /// Rescale a timelike future-pointing vector onto the sheet.
    pub fn from_timelike(v: Vec4) -> Result<Self, GeomError> {
        let norm = mink_norm_sq(&v);
        if !(norm < 0.0) || !(v[0] > 0.0) {
            return Err(GeomError::InvalidPoint { norm, t: v[0] });
        }
        Ok(Self(v / (-norm).sqrt()))
    }

    pub(crate) fn from_timelike_unchecked(v: Vec4) -> Self {
        let norm = mink_norm_sq(&v);
        Self(v / (-norm).sqrt())
    }

    pub fn basepoint() -> Self {
        Self(Vec4::new(1.0, 0.0, 0.0, 0.0))
    }

    /// Point of the H² slice at distance `r` from the basepoint in direction `phi`.
    pub fn polar(r: f64, phi: f64) -> Self {
        Self(Vec4::new(r.cosh(), r.sinh() * phi.cos(), r.sinh() * phi.sin(), 0.0))
    }

    pub fn coords(&self) -> &Vec4 {
        &self.0
    }

    /// Klein-disk coordinates of a point of the H² slice.
    pub fn klein(&self) -> (f64, f64) {
        (self.0[1] / self.0[0], self.0[2] / self.0[0])
    }

    pub fn from_klein(x: f64, y: f64) -> Result<Self, GeomError> {
        Self::from_timelike(Vec4::new(1.0, x, y, 0.0))
    }

    /// Polar coordinates `(r, phi)` of a point of the H² slice.
    pub fn to_polar(&self) -> (f64, f64) {
        let rho = (self.0[1] * self.0[1] + self.0[2] * self.0[2]).sqrt();
        (rho.asinh(), self.0[2].atan2(self.0[1]))
    }

    pub fn in_slice(&self) -> bool {
        self.0[3].abs() <= INVARIANT_TOL * self.0[0]
    }

    /// Geodesic `exp_p(t v)` for a unit tangent vector `v` at `p`.
    pub fn exp(&self, v: &Vec4, t: f64) -> Self {
        Self::from_timelike_unchecked(self.0 * t.cosh() + v * t.sinh())
    }

    /// Unit tangent vector at `self` pointing towards `q`, if `q ≠ self`.
    pub fn direction_to(&self, q: &MinkowskiPoint) -> Option<Vec4> {
        let v = q.0 + self.0 * mink_inner(&q.0, &self.0);
        let n = mink_norm_sq(&v);
        (n > 1e-30).then(|| v / n.sqrt())
    }
}

/// Hyperbolic distance; arguments marginally below 1 are clamped to 0.
pub fn hyp_dist(p: &MinkowskiPoint, q: &MinkowskiPoint) -> Result<f64, GeomError> {
    let arg = -mink_inner(&p.0, &q.0);
    if arg < 1.0 - 1e-6 {
        return Err(GeomError::InvalidDistance { arg });
    }
    if arg < 1.0 {
        return Ok(0.0);
    }
    // 2 asinh(|p - q| / 2) is arccosh(arg) without the cancellation near 1.
    let chord = mink_norm_sq(&(p.0 - q.0)).max(0.0).sqrt();
    Ok(2.0 * (chord / 2.0).asinh())
}

/// A totally geodesic plane with its co-orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperPlane(Vec4);

impl HyperPlane {
    pub fn new(normal: Vec4) -> Result<Self, GeomError> {
        let norm = mink_norm_sq(&normal);
        let scale = normal.amax().max(1.0);
        if (norm - 1.0).abs() > CONSTRUCTION_TOL * scale * scale {
            return Err(GeomError::InvalidPlane { norm });
        }
        Ok(Self(normal))
    }

    pub fn from_spacelike(v: Vec4) -> Result<Self, GeomError> {
        let norm = mink_norm_sq(&v);
        if !(norm > 0.0) {
            return Err(GeomError::InvalidPlane { norm });
        }
        Ok(Self(v / norm.sqrt()))
    }

    pub(crate) fn from_spacelike_unchecked(v: Vec4) -> Self {
        Self(v / mink_norm_sq(&v).sqrt())
    }

    pub fn normal(&self) -> &Vec4 {
        &self.0
    }

    pub fn flipped(&self) -> Self {
        Self(-self.0)
    }

    /// `⟨p, u⟩`, which is `sinh` of the signed distance from `p` to the plane.
    pub fn eval(&self, p: &MinkowskiPoint) -> f64 {
        mink_inner(&p.0, &self.0)
    }

    /// Same plane with the same co-orientation, within `tol`.
    pub fn coincides(&self, other: &HyperPlane, tol: f64) -> bool {
        (self.0 - other.0).amax() <= tol * self.0.amax().max(1.0)
    }

    /// Same plane, either co-orientation.
    pub fn same_plane(&self, other: &HyperPlane, tol: f64) -> bool {
        self.coincides(other, tol) || self.coincides(&other.flipped(), tol)
    }
}

/// Dihedral angle between two co-oriented planes.
///
/// Equal to `arccos⟨u, v⟩`, evaluated as `2 atan2(|u - v|, |u + v|)` to stay
/// accurate for nearly identical planes. Identical planes give 0 and
/// identical planes with opposite co-orientation give π.
pub fn plane_angle(u: &HyperPlane, v: &HyperPlane) -> Result<f64, GeomError> {
    let c = mink_inner(&u.0, &v.0);
    if u.coincides(v, INVARIANT_TOL) {
        return Ok(0.0);
    }
    if u.coincides(&v.flipped(), INVARIANT_TOL) {
        return Ok(std::f64::consts::PI);
    }
    if c.abs() >= 1.0 - 1e-12 {
        return Err(GeomError::DisjointPlanes { inner: c });
    }
    let diff = mink_norm_sq(&(u.0 - v.0)).max(0.0).sqrt();
    let sum = mink_norm_sq(&(u.0 + v.0)).max(0.0).sqrt();
    Ok(2.0 * diff.atan2(sum))
}

pub fn planes_intersect(u: &HyperPlane, v: &HyperPlane) -> bool {
    plane_angle(u, v).is_ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Negative,
    On,
    Positive,
}

/// Sign of `⟨p, u⟩` with a dead zone of 1e-9.
pub fn side_of(p: &MinkowskiPoint, u: &HyperPlane) -> Side {
    let v = u.eval(p);
    if v.abs() <= SIDE_DEAD_ZONE {
        Side::On
    } else if v < 0.0 {
        Side::Negative
    } else {
        Side::Positive
    }
}

/// Ideal point `(1, cos θ, sin θ, 0)` of the H² slice.
pub fn ideal_point(theta: f64) -> Vec4 {
    Vec4::new(1.0, theta.cos(), theta.sin(), 0.0)
}

/// Rescale a future-pointing null vector to `t = 1`.
pub fn normalize_ideal(v: &Vec4) -> Vec4 {
    v / v[0]
}

/// A complete geodesic of H³, given by its two ideal endpoints (order matters
/// for the orientation of rotations about it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperGeodesic {
    start: Vec4,
    end: Vec4,
}

impl HyperGeodesic {
    pub fn new(start: Vec4, end: Vec4) -> Result<Self, GeomError> {
        if !(start[0] > 0.0) || !(end[0] > 0.0) {
            return Err(GeomError::DegenerateGeodesic);
        }
        let a = normalize_ideal(&start);
        let b = normalize_ideal(&end);
        if mink_norm_sq(&a).abs() > 1e-8 || mink_norm_sq(&b).abs() > 1e-8 {
            return Err(GeomError::DegenerateGeodesic);
        }
        if mink_inner(&a, &b) > -1e-12 {
            return Err(GeomError::DegenerateGeodesic);
        }
        Ok(Self { start: a, end: b })
    }

    /// Geodesic of the H² slice joining the ideal points at angles `t1`, `t2`.
    pub fn from_angles(t1: f64, t2: f64) -> Result<Self, GeomError> {
        Self::new(ideal_point(t1), ideal_point(t2))
    }

    pub fn start(&self) -> &Vec4 {
        &self.start
    }

    pub fn end(&self) -> &Vec4 {
        &self.end
    }

    pub fn reversed(&self) -> Self {
        Self { start: self.end, end: self.start }
    }

    /// Point of the geodesic closest to the basepoint.
    pub fn midpoint(&self) -> MinkowskiPoint {
        let c = -mink_inner(&self.start, &self.end);
        // (a e^{s} + b e^{-s}) / sqrt(2c), with s balancing the t-components
        let s = 0.5 * (self.end[0] / self.start[0]).ln();
        MinkowskiPoint::from_timelike_unchecked(
            (self.start * s.exp() + self.end * (-s).exp()) / (2.0 * c).sqrt(),
        )
    }

    /// Arclength parametrisation through `midpoint()`, oriented towards `end`.
    pub fn point_at(&self, s: f64) -> MinkowskiPoint {
        let m = self.midpoint();
        let v = self.unit_tangent_at(&m);
        m.exp(&v, s)
    }

    /// Unit tangent at a point of the geodesic, pointing towards `end`.
    pub fn unit_tangent_at(&self, p: &MinkowskiPoint) -> Vec4 {
        let v = self.end + p.0 * mink_inner(&self.end, &p.0);
        v / mink_norm_sq(&v).sqrt()
    }

    /// Orthogonal projection of `v` onto the span of the two endpoints.
    fn project_span(&self, v: &Vec4) -> Vec4 {
        let c = mink_inner(&self.start, &self.end);
        let alpha = mink_inner(v, &self.end) / c;
        let beta = mink_inner(v, &self.start) / c;
        self.start * alpha + self.end * beta
    }

    /// Oriented orthonormal frame `(n, m)` of the spacelike complement of the
    /// geodesic's span, with `det[start, end, n, m] > 0`. For geodesics of the
    /// H² slice `m` is `e_z` and `n` lies in the slice.
    pub fn normal_frame(&self) -> (Vec4, Vec4) {
        let candidates = [
            e_z(),
            Vec4::new(0.0, 1.0, 0.0, 0.0),
            Vec4::new(0.0, 0.0, 1.0, 0.0),
            Vec4::new(1.0, 0.0, 0.0, 0.0),
        ];
        let complement = |v: &Vec4| v - self.project_span(v);
        let mut m = None;
        for c in &candidates {
            let w = complement(c);
            let n2 = mink_norm_sq(&w);
            if n2 > 0.1 {
                m = Some(w / n2.sqrt());
                break;
            }
        }
        let m = m.unwrap_or_else(|| {
            let w = complement(&candidates[1]);
            w / mink_norm_sq(&w).sqrt()
        });
        let mut best: Option<Vec4> = None;
        let mut best_norm = 0.0;
        for c in &candidates {
            let w = complement(c);
            let w = w - m * mink_inner(&w, &m);
            let n2 = mink_norm_sq(&w);
            if n2 > best_norm {
                best_norm = n2;
                best = Some(w / n2.sqrt());
            }
        }
        let mut n = best.expect("complement of a timelike 2-plane is 2-dimensional");
        let det = Mat4::from_columns(&[self.start, self.end, n, m]).determinant();
        if det < 0.0 {
            n = -n;
        }
        (n, m)
    }
}

/// An orientation-preserving isometry of H³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzMap(Mat4);

impl LorentzMap {
    pub fn new(matrix: Mat4) -> Result<Self, GeomError> {
        let g = Self(matrix);
        let drift = g.drift();
        let scale = matrix.amax().max(1.0);
        if drift > INVARIANT_TOL * scale * scale {
            return Err(GeomError::NotLorentz { drift });
        }
        if matrix[(0, 0)] <= 0.0 || matrix.determinant() <= 0.0 {
            return Err(GeomError::NotLorentz { drift });
        }
        Ok(g)
    }

    pub fn identity() -> Self {
        Self(Mat4::identity())
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    /// Max-norm of `GᵀJG − J`.
    pub fn drift(&self) -> f64 {
        let j = minkowski_metric();
        (self.0.transpose() * j * self.0 - j).amax()
    }

    pub fn compose(&self, other: &LorentzMap) -> LorentzMap {
        Self(self.0 * other.0)
    }

    /// `J Gᵀ J`, exact for Lorentz matrices.
    pub fn inverse(&self) -> LorentzMap {
        let j = minkowski_metric();
        Self(j * self.0.transpose() * j)
    }

    pub fn apply_vec(&self, v: &Vec4) -> Vec4 {
        self.0 * v
    }

    /// Image of a point, renormalised onto the sheet.
    pub fn apply_point(&self, p: &MinkowskiPoint) -> MinkowskiPoint {
        MinkowskiPoint::from_timelike_unchecked(self.0 * p.0)
    }

    pub fn apply_plane(&self, u: &HyperPlane) -> HyperPlane {
        HyperPlane::from_spacelike_unchecked(self.0 * u.0)
    }

    pub fn apply_geodesic(&self, g: &HyperGeodesic) -> HyperGeodesic {
        HyperGeodesic {
            start: normalize_ideal(&(self.0 * g.start)),
            end: normalize_ideal(&(self.0 * g.end)),
        }
    }

    /// Minkowski Gram–Schmidt on the columns, pulling the matrix back onto
    /// the Lorentz group.
    pub fn renormalized(&self) -> LorentzMap {
        let mut cols: Vec<Vec4> = (0..4).map(|i| self.0.column(i).into_owned()).collect();
        let n0 = (-mink_norm_sq(&cols[0])).sqrt();
        cols[0] /= n0;
        for i in 1..4 {
            let mut c = cols[i];
            for cj in &cols[..i] {
                c -= cj * (mink_inner(&c, cj) / mink_norm_sq(cj));
            }
            cols[i] = c / mink_norm_sq(&c).sqrt();
        }
        Self(Mat4::from_columns(&cols))
    }

    /// Max-norm distance between matrices.
    pub fn distance(&self, other: &LorentzMap) -> f64 {
        (self.0 - other.0).amax()
    }

    /// Hyperbolic translation of length `d` along the x-axis of the slice.
    pub fn translation_x(d: f64) -> LorentzMap {
        let (c, s) = (d.cosh(), d.sinh());
        #[rustfmt::skip]
        let m = Mat4::new(
            c, s, 0.0, 0.0,
            s, c, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        );
        Self(m)
    }

    /// Euclidean rotation by `phi` about the t-axis in the (x, y) coordinates.
    pub fn rotation_xy(phi: f64) -> LorentzMap {
        let (c, s) = (phi.cos(), phi.sin());
        #[rustfmt::skip]
        let m = Mat4::new(
            1.0, 0.0, 0.0, 0.0,
            0.0, c, -s, 0.0,
            0.0, s, c, 0.0,
            0.0, 0.0, 0.0, 1.0,
        );
        Self(m)
    }
}

/// Rotation by `theta` in the oriented spacelike 2-plane `(n, m)`, fixing its
/// orthogonal complement: `n ↦ cos θ n + sin θ m`, `m ↦ -sin θ n + cos θ m`.
pub(crate) fn rotation_in_frame(n: &Vec4, m: &Vec4, theta: f64) -> LorentzMap {
    let j = minkowski_metric();
    let (c, s) = (theta.cos(), theta.sin());
    let nj = (j * n).transpose();
    let mj = (j * m).transpose();
    let mat = Mat4::identity() + (n * nj + m * mj) * (c - 1.0) + (m * nj - n * mj) * s;
    LorentzMap(mat)
}

/// Rotation by `theta` about the geodesic `g`, in the frame of
/// [`HyperGeodesic::normal_frame`].
pub fn rotation_about_geodesic(g: &HyperGeodesic, theta: f64) -> Result<LorentzMap, GeomError> {
    if mink_inner(&g.start, &g.end) > -1e-12 {
        return Err(GeomError::DegenerateGeodesic);
    }
    let (n, m) = g.normal_frame();
    Ok(rotation_in_frame(&n, &m, theta))
}
