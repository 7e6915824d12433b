//! Local convexity (every flat on one side of every flat's plane) and the
//! interior of the intersection of the support half-spaces.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;

use super::PleatedSurface;
use crate::hypgeom::{mink_inner, HyperPlane, MinkowskiPoint, Vec4};
use crate::lam2::{IdealArc, NodeId};
use crate::tolerance::{INTERIOR_MARGIN, SUPPORT_TOL};

/// Outcome of [`is_convex`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ConvexityCertificate {
    /// Every flat lies in every support half-space and `witness` is at depth
    /// at least `margin` inside all of them. `fuchsian_flat` marks the
    /// unbent case, whose intersection of half-spaces is a half-space.
    Convex { witness: MinkowskiPoint, margin: f64, fuchsian_flat: bool },
    /// The flats are on one side of every plane but the half-spaces have no
    /// interior point with the required margin.
    NoInterior { best_margin: f64 },
    /// Flat `flat` pokes out of the half-space of flat `plane`.
    Violated { plane: NodeId, flat: NodeId, excess: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convexity {
    pub convex: bool,
    pub certificate: ConvexityCertificate,
}

/// Largest value of `⟨x, u⟩` over the closure of flat `node`, with `x`
/// scaled to `t = 1` at ideal points.
///
/// The pulled-back functional `⟨x, M⁻¹u⟩` is affine in Klein coordinates and
/// the flat is convex there, so its maximum is attained on the ideal boundary
/// of the flat (arcs of the circle plus the endpoints of its boundary leaves).
pub(crate) fn flat_excess(ps: &PleatedSurface, node: NodeId, u: &HyperPlane) -> f64 {
    FlatBoundary::new(ps, node).excess(ps, u)
}

/// Ideal boundary of a flat: arcs of the circle and endpoints of its
/// boundary leaves.
struct FlatBoundary {
    node: NodeId,
    arcs: Vec<IdealArc>,
    endpoints: Vec<f64>,
}

impl FlatBoundary {
    fn new(ps: &PleatedSurface, node: NodeId) -> Self {
        let tree = ps.tree();
        let mut bounding: Vec<usize> = tree.child_leaves(node).to_vec();
        bounding.extend(tree.entry_leaf(node));
        let endpoints = bounding
            .iter()
            .flat_map(|&l| {
                let (a, b) = ps.lamination().leaves()[l].angles();
                [a, b]
            })
            .collect();
        Self { node, arcs: tree.ideal_arcs(node), endpoints }
    }

    fn excess(&self, ps: &PleatedSurface, u: &HyperPlane) -> f64 {
        let v = ps.component_inverse(self.node).apply_vec(u.normal());
        let at = |theta: f64| -v[0] + v[1] * theta.cos() + v[2] * theta.sin();
        let peak = v[2].atan2(v[1]);
        let mut best = f64::NEG_INFINITY;
        for arc in &self.arcs {
            best = best.max(at(arc.start)).max(at(arc.end()));
            if arc.contains(peak) {
                best = best.max(-v[0] + v[1].hypot(v[2]));
            }
        }
        self.endpoints.iter().fold(best, |b, &t| b.max(at(t)))
    }
}

/// The worst (plane, flat, excess) over all pairs, if any flat leaves a
/// half-space by more than the support tolerance.
pub(crate) fn worst_support_violation(ps: &PleatedSurface) -> Option<(NodeId, NodeId, f64)> {
    let mut worst: Option<(NodeId, NodeId, f64)> = None;
    for q in 0..ps.node_count() {
        let flat = FlatBoundary::new(ps, q);
        for p in (0..ps.node_count()).filter(|&p| p != q) {
            let e = flat.excess(ps, ps.component_plane(p));
            if e > SUPPORT_TOL && worst.is_none_or(|w| e > w.2) {
                worst = Some((p, q, e));
            }
        }
    }
    worst
}

/// `true` if every flat lies in the half-space of `u` (within the support
/// tolerance).
pub fn supports_surface(ps: &PleatedSurface, u: &HyperPlane) -> bool {
    (0..ps.node_count()).all(|q| flat_excess(ps, q, u) <= SUPPORT_TOL)
}

/// Search for a point `q` with `⟨q, u_P⟩ ≤ -margin` for every flat plane.
///
/// Writing `q = (1, k)` with `|k| < 1` turns the constraints into
/// `u_x k_x + u_y k_y + u_z k_z + s ≤ u_t`; the largest feasible `s` is found
/// by linear programming, with the unit ball imposed through tangent cuts.
/// Since `q̂ = q / sqrt(1 - |k|²)` has `⟨q̂, u⟩ ≤ -s / sqrt(1 - |k|²) ≤ -s`,
/// the returned margin is a lower bound for the normalised witness.
pub(crate) fn interior_witness(ps: &PleatedSurface) -> (MinkowskiPoint, f64) {
    const RHO: f64 = 0.999;
    const RHO_ACCEPT: f64 = 0.9995;
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let kx = problem.add_var(0.0, (-1.0, 1.0));
    let ky = problem.add_var(0.0, (-1.0, 1.0));
    let kz = problem.add_var(0.0, (-1.0, 1.0));
    let s = problem.add_var(1.0, (-4.0, 1.0));
    for p in 0..ps.node_count() {
        let u = ps.component_plane(p).normal();
        problem.add_constraint([(kx, u[1]), (ky, u[2]), (kz, u[3]), (s, 1.0)], ComparisonOp::Le, u[0]);
    }
    let mut solution = match problem.solve() {
        Ok(sol) => sol,
        Err(_) => return (MinkowskiPoint::basepoint(), f64::NEG_INFINITY),
    };
    for _ in 0..400 {
        let k = Vec4::new(0.0, solution[kx], solution[ky], solution[kz]);
        let r = k.norm();
        // tangent cuts converge slowly along the sphere; the point is pulled
        // back to radius RHO below and its margin recomputed exactly
        if r <= RHO_ACCEPT {
            break;
        }
        let dir = k / r;
        solution = match solution.add_constraint(
            [(kx, dir[1]), (ky, dir[2]), (kz, dir[3])],
            ComparisonOp::Le,
            RHO,
        ) {
            Ok(sol) => sol,
            Err(_) => return (MinkowskiPoint::basepoint(), f64::NEG_INFINITY),
        };
    }
    let mut k = Vec4::new(0.0, solution[kx], solution[ky], solution[kz]);
    if k.norm() > RHO {
        k *= RHO / k.norm();
    }
    let q = MinkowskiPoint::from_timelike(Vec4::new(1.0, k[1], k[2], k[3]))
        .expect("|k| < 1 gives a timelike vector");
    (q, witness_margin(ps, &q))
}

/// `min_P -⟨q, u_P⟩`.
pub fn witness_margin(ps: &PleatedSurface, q: &MinkowskiPoint) -> f64 {
    (0..ps.node_count())
        .map(|p| -mink_inner(q.coords(), ps.component_plane(p).normal()))
        .fold(f64::INFINITY, f64::min)
}

/// Convexity of the pleated surface: every flat lies in the support
/// half-space of every flat, and the intersection of those half-spaces has
/// an interior point at depth [`INTERIOR_MARGIN`].
pub fn is_convex(ps: &PleatedSurface) -> Convexity {
    if let Some((plane, flat, excess)) = worst_support_violation(ps) {
        return Convexity {
            convex: false,
            certificate: ConvexityCertificate::Violated { plane, flat, excess },
        };
    }
    let (witness, margin) = interior_witness(ps);
    if margin >= INTERIOR_MARGIN {
        Convexity {
            convex: true,
            certificate: ConvexityCertificate::Convex {
                witness,
                margin,
                fuchsian_flat: ps.lamination().is_empty(),
            },
        }
    } else {
        Convexity { convex: false, certificate: ConvexityCertificate::NoInterior { best_margin: margin } }
    }
}

/// Largest `|⟨f̂(x), u_base⟩|` over the standard sample of the surface.
pub fn coplanarity_residual(ps: &PleatedSurface) -> f64 {
    let base = ps.base_plane();
    ps.sample_points(2.5, 10, 24)
        .iter()
        .map(|(p, n)| base.eval(&ps.component_map(*n).apply_point(p)).abs())
        .fold(0.0, f64::max)
}

/// Even surface: locally convex with all flats in one plane. The unbent
/// surface is excluded.
pub fn is_even(ps: &PleatedSurface) -> bool {
    !ps.lamination().is_empty()
        && worst_support_violation(ps).is_none()
        && coplanarity_residual(ps) <= SUPPORT_TOL
}
