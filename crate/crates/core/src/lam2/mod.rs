//! Finite weighted geodesic laminations of the H² slice, transverse arcs and
//! atomic arc measures.
//!
//! A leaf is a complete geodesic given by the angles of its two ideal
//! endpoints on the circle at infinity. Leaves of a lamination are pairwise
//! disjoint, which for chords of the disk means their endpoints do not
//! interleave. Each leaf carries a positive weight, and the transverse measure
//! of an arc is the sum of the weights of the leaves it crosses.

mod hausdorff;
mod tree;

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypgeom::{hyp_dist, ideal_point, mink_inner, HyperGeodesic, MinkowskiPoint, Vec4};
use crate::tolerance::{SIDE_DEAD_ZONE, TRANSVERSALITY_MIN_ANGLE};

pub use hausdorff::{directed_window_gap, distance_to_window, windowed_hausdorff, WindowSegment};
pub use tree::{complement_components, ComplementTree, IdealArc, NodeId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LamError {
    #[error("leaf {id}: weight {weight} must be positive and finite")]
    BadWeight { id: String, weight: f64 },
    #[error("leaf {id}: ideal endpoints coincide")]
    DegenerateLeaf { id: String },
    #[error("duplicate leaf id {0}")]
    DuplicateId(String),
    #[error("leaves {a} and {b} intersect transversely")]
    Intersecting { a: String, b: String },
    #[error("leaves {a} and {b} have the same support")]
    Coincident { a: String, b: String },
    #[error("arc endpoints coincide")]
    DegenerateArc,
    #[error("arc endpoint is not in the H² slice")]
    OffSlice,
    #[error("arc endpoint lies on leaf {0}")]
    EndpointOnLeaf(String),
    #[error("arc meets leaf {id} at angle {angle:e} rad, below the transversality threshold")]
    NearTangent { id: String, angle: f64 },
    #[error("point lies on leaf {0}")]
    OnLeaf(String),
    #[error("arcs do not cross the same leaves (only in first: {only_first:?}, only in second: {only_second:?})")]
    NotHomotopic {
        only_first: Vec<String>,
        only_second: Vec<String>,
    },
}

/// A weighted complete geodesic of the H² slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLeaf")]
pub struct Leaf2 {
    pub id: String,
    theta1: f64,
    theta2: f64,
    pub weight: f64,
}

#[derive(Deserialize)]
struct RawLeaf {
    id: String,
    theta1: f64,
    theta2: f64,
    weight: f64,
}

impl TryFrom<RawLeaf> for Leaf2 {
    type Error = LamError;
    fn try_from(r: RawLeaf) -> Result<Self, LamError> {
        Self::new(r.id, r.theta1, r.theta2, r.weight)
    }
}

impl Leaf2 {
    pub fn new(id: impl Into<String>, theta1: f64, theta2: f64, weight: f64) -> Result<Self, LamError> {
        let id = id.into();
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(LamError::BadWeight { id, weight });
        }
        let (t1, t2) = (theta1.rem_euclid(TAU), theta2.rem_euclid(TAU));
        if angle_gap(t1, t2) < 1e-9 {
            return Err(LamError::DegenerateLeaf { id });
        }
        Ok(Self { id, theta1: t1, theta2: t2, weight })
    }

    pub fn with_weight(&self, weight: f64) -> Result<Self, LamError> {
        Self::new(self.id.clone(), self.theta1, self.theta2, weight)
    }

    pub fn angles(&self) -> (f64, f64) {
        (self.theta1, self.theta2)
    }

    pub fn geodesic(&self) -> HyperGeodesic {
        HyperGeodesic::from_angles(self.theta1, self.theta2).expect("validated leaf")
    }

    /// Unit spacelike normal of the leaf inside the slice,
    /// `(cos h, cos m, sin m, 0) / |sin h|` with `m`, `h` the half-sum and
    /// half-difference of the endpoint angles.
    pub fn normal(&self) -> Vec4 {
        let m = 0.5 * (self.theta1 + self.theta2);
        let h = 0.5 * (self.theta2 - self.theta1);
        Vec4::new(h.cos(), m.cos(), m.sin(), 0.0) / h.sin().abs()
    }

    /// Point of the leaf nearest to the basepoint.
    pub fn closest_point(&self) -> MinkowskiPoint {
        self.geodesic().midpoint()
    }
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// `true` if `x` lies strictly inside the counter-clockwise arc from `a` to `b`.
fn strictly_between_ccw(a: f64, b: f64, x: f64) -> bool {
    let span = (b - a).rem_euclid(TAU);
    let off = (x - a).rem_euclid(TAU);
    off > 1e-12 && off < span - 1e-12
}

/// Pairwise disjoint weighted leaves.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Leaf2>", into = "Vec<Leaf2>")]
pub struct FiniteLamination2 {
    leaves: Vec<Leaf2>,
}

impl TryFrom<Vec<Leaf2>> for FiniteLamination2 {
    type Error = LamError;
    fn try_from(leaves: Vec<Leaf2>) -> Result<Self, LamError> {
        Self::new(leaves)
    }
}

impl From<FiniteLamination2> for Vec<Leaf2> {
    fn from(l: FiniteLamination2) -> Self {
        l.leaves
    }
}

impl FiniteLamination2 {
    pub fn new(leaves: Vec<Leaf2>) -> Result<Self, LamError> {
        let mut ids = BTreeSet::new();
        for leaf in &leaves {
            // re-validate: deserialised leaves bypass `Leaf2::new`
            let checked = Leaf2::new(leaf.id.clone(), leaf.theta1, leaf.theta2, leaf.weight)?;
            if checked != *leaf {
                return Err(LamError::DegenerateLeaf { id: leaf.id.clone() });
            }
            if !ids.insert(leaf.id.clone()) {
                return Err(LamError::DuplicateId(leaf.id.clone()));
            }
        }
        for (i, a) in leaves.iter().enumerate() {
            for b in &leaves[i + 1..] {
                check_disjoint(a, b)?;
            }
        }
        Ok(Self { leaves })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn leaves(&self) -> &[Leaf2] {
        &self.leaves
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn leaf(&self, id: &str) -> Option<&Leaf2> {
        self.leaves.iter().find(|l| l.id == id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.leaves.iter().position(|l| l.id == id)
    }

    /// Same supports, weights replaced through `f(id, weight)`.
    pub fn reweighted(&self, mut f: impl FnMut(&str, f64) -> f64) -> Result<Self, LamError> {
        let leaves = self
            .leaves
            .iter()
            .map(|l| l.with_weight(f(&l.id, l.weight)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { leaves })
    }

    pub fn total_weight(&self) -> f64 {
        self.leaves.iter().fold(0.0, |acc, l| acc + l.weight)
    }
}

fn check_disjoint(a: &Leaf2, b: &Leaf2) -> Result<(), LamError> {
    let shared = |x: f64, y: f64| angle_gap(x, y) < 1e-12;
    let (a1, a2) = (a.theta1, a.theta2);
    let (b1, b2) = (b.theta1, b.theta2);
    if (shared(a1, b1) && shared(a2, b2)) || (shared(a1, b2) && shared(a2, b1)) {
        return Err(LamError::Coincident { a: a.id.clone(), b: b.id.clone() });
    }
    let in1 = strictly_between_ccw(a1, a2, b1);
    let in2 = strictly_between_ccw(a1, a2, b2);
    let on1 = shared(b1, a1) || shared(b1, a2);
    let on2 = shared(b2, a1) || shared(b2, a2);
    // an endpoint shared with `a` is neither inside nor outside
    if !on1 && !on2 && in1 != in2 {
        return Err(LamError::Intersecting { a: a.id.clone(), b: b.id.clone() });
    }
    Ok(())
}

/// A geodesic segment of the H² slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawArc")]
pub struct Arc2 {
    from: MinkowskiPoint,
    to: MinkowskiPoint,
}

#[derive(Deserialize)]
struct RawArc {
    from: MinkowskiPoint,
    to: MinkowskiPoint,
}

impl TryFrom<RawArc> for Arc2 {
    type Error = LamError;
    fn try_from(r: RawArc) -> Result<Self, LamError> {
        Self::new(r.from, r.to)
    }
}

impl Arc2 {
    pub fn new(from: MinkowskiPoint, to: MinkowskiPoint) -> Result<Self, LamError> {
        if !from.in_slice() || !to.in_slice() {
            return Err(LamError::OffSlice);
        }
        let d = hyp_dist(&from, &to).map_err(|_| LamError::OffSlice)?;
        if d < 1e-12 {
            return Err(LamError::DegenerateArc);
        }
        Ok(Self { from, to })
    }

    /// Arc between two points given in polar coordinates `(r, φ)`, where a
    /// polar point is `(cosh r, sinh r cos φ, sinh r sin φ, 0)`.
    pub fn from_polar(r1: f64, phi1: f64, r2: f64, phi2: f64) -> Result<Self, LamError> {
        Self::new(MinkowskiPoint::polar(r1, phi1), MinkowskiPoint::polar(r2, phi2))
    }

    pub fn from(&self) -> &MinkowskiPoint {
        &self.from
    }

    pub fn to(&self) -> &MinkowskiPoint {
        &self.to
    }

    pub fn length(&self) -> f64 {
        hyp_dist(&self.from, &self.to).expect("validated arc")
    }

    /// Point at arclength fraction `s ∈ [0, 1]`.
    pub fn point_at(&self, s: f64) -> MinkowskiPoint {
        let d = self.length();
        let a = self.from.coords();
        let b = self.to.coords();
        let v = (a * ((1.0 - s) * d).sinh() + b * (s * d).sinh()) / d.sinh();
        MinkowskiPoint::new(v)
            .unwrap_or_else(|_| MinkowskiPoint::from_timelike(v).expect("interpolant is timelike"))
    }

    /// Unit tangent at arclength fraction `s`, pointing towards `to`.
    pub fn tangent_at(&self, s: f64) -> Vec4 {
        let d = self.length();
        let a = self.from.coords();
        let b = self.to.coords();
        (b * (s * d).cosh() - a * ((1.0 - s) * d).cosh()) / d.sinh()
    }

    pub fn sub_arc(&self, s0: f64, s1: f64) -> Result<Arc2, LamError> {
        Arc2::new(self.point_at(s0), self.point_at(s1))
    }

    pub fn reversed(&self) -> Arc2 {
        Arc2 { from: self.to, to: self.from }
    }
}

/// One transverse intersection of an arc with a leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub leaf: usize,
    pub id: String,
    /// Arclength fraction along the arc, in (0, 1).
    pub param: f64,
    /// Angle between the arc and the leaf, in (0, π/2].
    pub angle: f64,
}

/// Ordered transverse intersections of `k` with the leaves of `lam`.
pub fn crossings(k: &Arc2, lam: &FiniteLamination2) -> Result<Vec<Crossing>, LamError> {
    let d = k.length();
    let mut out = Vec::new();
    for (i, leaf) in lam.leaves.iter().enumerate() {
        let n = leaf.normal();
        let a = mink_inner(k.from.coords(), &n);
        let b = mink_inner(k.to.coords(), &n);
        if a.abs() <= SIDE_DEAD_ZONE || b.abs() <= SIDE_DEAD_ZONE {
            return Err(LamError::EndpointOnLeaf(leaf.id.clone()));
        }
        if a.signum() == b.signum() {
            continue;
        }
        // sinh((1-s)d) a + sinh(sd) b = 0  ⇔  tanh(sd) = a sinh d / (a cosh d - b)
        let ratio = a * d.sinh() / (a * d.cosh() - b);
        let s = ratio.atanh() / d;
        let t = k.tangent_at(s);
        let c = mink_inner(&t, &n);
        let along = crate::hypgeom::mink_norm_sq(&(t - n * c)).max(0.0).sqrt();
        let angle = c.abs().atan2(along);
        if angle < TRANSVERSALITY_MIN_ANGLE {
            return Err(LamError::NearTangent { id: leaf.id.clone(), angle });
        }
        out.push(Crossing { leaf: i, id: leaf.id.clone(), param: s, angle });
    }
    out.sort_by(|x, y| x.param.total_cmp(&y.param));
    Ok(out)
}

/// `∫_k dλ` for the atomic measure of `lam`: the sum of the crossed weights.
pub fn arc_measure(k: &Arc2, lam: &FiniteLamination2) -> Result<f64, LamError> {
    // folded from +0.0: an empty `sum` of floats is -0.0
    Ok(crossings(k, lam)?.iter().fold(0.0, |acc, c| acc + lam.leaves[c.leaf].weight))
}

/// Compare the measures of two arcs that cross the same set of leaves.
pub fn homotopic_measure_invariance_check(
    k: &Arc2,
    k2: &Arc2,
    lam: &FiniteLamination2,
) -> Result<bool, LamError> {
    let ids = |c: Vec<Crossing>| c.into_iter().map(|c| c.id).collect::<BTreeSet<_>>();
    let first = ids(crossings(k, lam)?);
    let second = ids(crossings(k2, lam)?);
    if first != second {
        return Err(LamError::NotHomotopic {
            only_first: first.difference(&second).cloned().collect(),
            only_second: second.difference(&first).cloned().collect(),
        });
    }
    Ok(arc_measure(k, lam)? == arc_measure(k2, lam)?)
}

/// Ideal point of the slice at angle `theta` (re-exported for callers that
/// build leaves from coordinates).
pub fn boundary_point(theta: f64) -> Vec4 {
    ideal_point(theta)
}

/// Ideal endpoint angles of the geodesic orthogonal to the x-axis at signed
/// distance `x0` from the basepoint.
pub fn orthogonal_leaf_angles(x0: f64) -> (f64, f64) {
    let y = 1.0 / x0.cosh();
    let x = x0.tanh();
    (y.atan2(x), (-y).atan2(x))
}

/// Angle of the ideal point of a null vector of the slice.
pub fn ideal_angle(v: &Vec4) -> f64 {
    v[2].atan2(v[1]).rem_euclid(TAU)
}
