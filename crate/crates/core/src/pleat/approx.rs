//! Polygonal approximations of a bent arc and their angle sums.
//!
//! Along an arc `k` crossing leaves `ℓ1, …, ℓm` the support planes form a
//! path: the plane of the flat before `ℓ1`, the pencil of `ℓ1` turning to the
//! plane of the next flat, and so on. A position on this path is a *walk*
//! coordinate `τ ∈ [0, m]`; integers are flat planes and `j - 1 + f` with
//! `f ∈ (0, 1)` is the pencil of `ℓj` turned by the fraction `f` of its weight.
//!
//! The construction samples the arc with spacing below `ε`, pairs consecutive
//! samples, inserts at most three intermediate support planes when a pair
//! does not form an approximation on its own, and finally subdivides every
//! angle of at least `δ` by walking through the pencils in between.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use super::convexity::{flat_excess, worst_support_violation};
use super::{PleatError, PleatedSurface};
use crate::hypgeom::{
    hyp_dist, mink_inner, mink_norm_sq, plane_angle, HyperPlane, MinkowskiPoint, Vec4,
};
use crate::lam2::{crossings, Arc2, Crossing, NodeId};
use crate::tolerance::{max_spacing, INVARIANT_TOL, SUPPORT_TOL};

/// One sample point of the arc with a support plane at its image.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxEntry {
    /// Arclength fraction along the arc.
    pub param: f64,
    pub point: MinkowskiPoint,
    pub plane: HyperPlane,
    /// Position on the support-plane path.
    pub walk: f64,
}

/// How consecutive samples were resolved before subdivision.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfigurationCounts {
    /// Planes meet and the projection of their intersection meets the subarc.
    pub direct: usize,
    /// Planes disjoint.
    pub disjoint: usize,
    /// Planes meet but the projection misses the subarc.
    pub missed: usize,
    /// Gaps where no anchor was found and the pencil walk was used outright.
    pub fallback: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolygonalApproximation {
    pub arc: Arc2,
    pub delta: f64,
    pub epsilon: f64,
    pub entries: Vec<ApproxEntry>,
    pub configurations: ConfigurationCounts,
}

impl PolygonalApproximation {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Dihedral angles between consecutive planes.
    pub fn angles(&self) -> Vec<f64> {
        self.entries
            .windows(2)
            .map(|w| plane_angle(&w[0].plane, &w[1].plane).unwrap_or(f64::NAN))
            .collect()
    }

    pub fn angle_sum(&self) -> f64 {
        self.angles().iter().sum()
    }

    pub fn max_angle(&self) -> f64 {
        self.angles().into_iter().fold(0.0, f64::max)
    }

    /// Largest distance between consecutive sample points.
    pub fn max_spacing(&self) -> f64 {
        let l = self.arc.length();
        self.entries.windows(2).map(|w| (w[1].param - w[0].param) * l).fold(0.0, f64::max)
    }
}

/// `(4/ε)(π/δ + 1)·l + 4(π/δ + 1)`.
pub fn length_bound(epsilon: f64, delta: f64, length: f64) -> f64 {
    let c = PI / delta + 1.0;
    4.0 / epsilon * c * length + 4.0 * c
}

/// Support-plane path along an arc.
struct Walk<'a> {
    ps: &'a PleatedSurface,
    arc: Arc2,
    cross: Vec<Crossing>,
    /// `nodes[j]` is the flat after `j` crossings.
    nodes: Vec<NodeId>,
}

impl<'a> Walk<'a> {
    fn new(ps: &'a PleatedSurface, arc: &Arc2) -> Result<Self, PleatError> {
        let cross = crossings(arc, ps.lamination())?;
        let mut nodes = vec![ps.locate(arc.from())?];
        for c in &cross {
            let cur = *nodes.last().expect("nonempty");
            let (near, far) = (ps.near_node(c.leaf), ps.far_node(c.leaf));
            debug_assert!(cur == near || cur == far);
            nodes.push(if cur == near { far } else { near });
        }
        Ok(Self { ps, arc: *arc, cross, nodes })
    }

    fn weight(&self, j: usize) -> f64 {
        self.ps.lamination().leaves()[self.cross[j - 1].leaf].weight
    }

    /// Entry at a point of the arc that lies in flat `nodes[j]`.
    fn flat_entry(&self, param: f64, j: usize) -> ApproxEntry {
        ApproxEntry {
            param,
            point: self.arc.point_at(param),
            plane: *self.ps.component_plane(self.nodes[j]),
            walk: j as f64,
        }
    }

    /// Entry at the `j`-th crossing (1-based) with the pencil turned by the
    /// fraction `f` from the flat before to the flat after.
    fn pencil_entry(&self, j: usize, f: f64) -> ApproxEntry {
        let c = &self.cross[j - 1];
        let w = self.weight(j);
        let after = self.nodes[j];
        let forward = self.ps.tree().entry_leaf(after) == Some(c.leaf);
        let s = if forward { f * w } else { (1.0 - f) * w };
        ApproxEntry {
            param: c.param,
            point: self.arc.point_at(c.param),
            plane: self.ps.pencil_plane(c.leaf, s),
            walk: (j - 1) as f64 + f,
        }
    }

    /// Sample points `i / N` with `N = ⌊l/ε⌋ + 1`, nudged off the leaves.
    fn samples(&self, epsilon: f64) -> Vec<ApproxEntry> {
        let l = self.arc.length();
        let n = (l / epsilon).floor() as usize + 1;
        let nudge = 1e-7 / l;
        (0..=n)
            .map(|i| {
                let mut param = i as f64 / n as f64;
                if i > 0 && i < n {
                    for c in &self.cross {
                        if (param - c.param).abs() < nudge {
                            param = if param >= c.param { c.param + nudge } else { c.param - nudge };
                        }
                    }
                }
                let j = self.cross.iter().filter(|c| c.param < param).count();
                self.flat_entry(param, j)
            })
            .collect()
    }

    /// Pencil positions strictly between two entries, used as anchors.
    fn anchors_between(&self, a: &ApproxEntry, b: &ApproxEntry) -> Vec<ApproxEntry> {
        let mut out = Vec::new();
        for j in 1..=self.cross.len() {
            for f in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let tau = (j - 1) as f64 + f;
                if tau > a.walk + 1e-12 && tau < b.walk - 1e-12 {
                    out.push(self.pencil_entry(j, f));
                }
            }
        }
        out
    }

    /// Do the planes of `a` and `b` form a polygonal approximation of the
    /// subarc between them?
    fn pair_valid(&self, a: &ApproxEntry, b: &ApproxEntry) -> bool {
        pair_forms_approximation(self.ps, &self.cross, a, b)
    }

    /// At most three anchors making `a → b` an approximation.
    fn resolve(&self, a: &ApproxEntry, b: &ApproxEntry) -> Option<Vec<ApproxEntry>> {
        if self.pair_valid(a, b) {
            return Some(Vec::new());
        }
        let single = |x: &ApproxEntry, y: &ApproxEntry| -> Option<Vec<ApproxEntry>> {
            if self.pair_valid(x, y) {
                return Some(Vec::new());
            }
            self.anchors_between(x, y)
                .into_iter()
                .find(|z| self.pair_valid(x, z) && self.pair_valid(z, y))
                .map(|z| vec![z])
        };
        let candidates = self.anchors_between(a, b);
        if let Some(y) = candidates.iter().find(|y| self.pair_valid(a, y) && self.pair_valid(y, b)) {
            return Some(vec![y.clone()]);
        }
        for y in &candidates {
            if let (Some(left), Some(right)) = (single(a, y), single(y, b)) {
                let mut out = left;
                out.push(y.clone());
                out.extend(right);
                return Some(out);
            }
        }
        None
    }

    /// Walk the pencils from `a` to `b` with steps below `delta`, returning
    /// the entries strictly after `a` and strictly before `b`.
    fn pencil_walk(&self, a: &ApproxEntry, b: &ApproxEntry, delta: f64) -> Vec<ApproxEntry> {
        let mut out = Vec::new();
        for j in 1..=self.cross.len() {
            let lo = (j - 1) as f64;
            let f0 = (a.walk - lo).max(0.0);
            let f1 = (b.walk - lo).min(1.0);
            if f1 <= f0 + 1e-15 {
                continue;
            }
            let span = f1 - f0;
            let q = ((self.weight(j) * span / delta).floor() as usize) + 1;
            for step in 1..=q {
                let f = f0 + span * step as f64 / q as f64;
                let tau = lo + f;
                if (tau - b.walk).abs() < 1e-12 {
                    continue;
                }
                out.push(self.pencil_entry(j, f.min(1.0)));
            }
        }
        out
    }
}

/// Geometric test of the pair condition, with exact shortcuts for identical
/// planes and planes sharing a leaf crossed between the two points.
fn pair_forms_approximation(
    ps: &PleatedSurface,
    cross: &[Crossing],
    a: &ApproxEntry,
    b: &ApproxEntry,
) -> bool {
    if a.plane.coincides(&b.plane, INVARIANT_TOL) {
        return true;
    }
    let (lo, hi) = (a.param.min(b.param) - 1e-12, a.param.max(b.param) + 1e-12);
    for c in cross.iter().filter(|c| c.param >= lo && c.param <= hi) {
        let g = ps.leaf_image(c.leaf);
        let inside = |u: &HyperPlane| {
            mink_inner(g.start(), u.normal()).abs() <= INVARIANT_TOL
                && mink_inner(g.end(), u.normal()).abs() <= INVARIANT_TOL
        };
        if inside(&a.plane) && inside(&b.plane) {
            return true;
        }
    }
    if plane_angle(&a.plane, &b.plane).is_err() {
        return false;
    }
    projection_meets_subarc(ps, &a.plane, &b.plane, &a.point, &b.point)
}

/// Does the nearest-point projection of the line `Π_u ∩ Π_v` onto the
/// surface meet the segment `[x, y]` of H²?
///
/// The line is sampled around its point nearest to `f̂` of the segment's
/// midpoint; sign changes of the pulled-back curve across the geodesic
/// through `x` and `y` are refined by bisection and the crossing point is
/// tested for membership in the segment.
pub fn projection_meets_subarc(
    ps: &PleatedSurface,
    u: &HyperPlane,
    v: &HyperPlane,
    x: &MinkowskiPoint,
    y: &MinkowskiPoint,
) -> bool {
    let Some(line) = plane_intersection(u, v) else {
        return false;
    };
    let seg_len = match hyp_dist(x, y) {
        Ok(d) if d > 1e-12 => d,
        _ => return false,
    };
    let mid = Arc2::new(*x, *y).map(|a| a.point_at(0.5)).unwrap_or(*x);
    let Ok(fmid) = ps.evaluate(&mid) else {
        return false;
    };
    let (center, tangent) = line.frame_near(fmid.coords());
    // normal of the geodesic through x and y inside the slice
    let n = {
        let (px, py) = (x.coords(), y.coords());
        let w = Vec4::new(
            px[1] * py[2] - px[2] * py[1],
            -(px[2] * py[0] - px[0] * py[2]),
            -(px[0] * py[1] - px[1] * py[0]),
            0.0,
        );
        // Euclidean cross product of the (t, x, y) parts with the t sign
        // flipped, so that ⟨w, x⟩ = ⟨w, y⟩ = 0
        w / mink_norm_sq(&w).max(1e-300).sqrt()
    };
    let pull = |t: f64| {
        let q = MinkowskiPoint::from_timelike_unchecked(center * t.cosh() + tangent * t.sinh());
        ps.nearest_point(&q).0
    };
    let side = |t: f64| mink_inner(pull(t).coords(), &n);
    let on_segment = |p: &MinkowskiPoint| match (hyp_dist(x, p), hyp_dist(p, y)) {
        (Ok(d1), Ok(d2)) => d1 + d2 <= seg_len + 1e-7,
        _ => false,
    };
    const T: f64 = 8.0;
    const STEPS: usize = 320;
    let ts: Vec<f64> = (0..=STEPS).map(|i| -T + 2.0 * T * i as f64 / STEPS as f64).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| side(t)).collect();
    for i in 0..STEPS {
        let (mut a, mut b) = (ts[i], ts[i + 1]);
        let (mut fa, fb) = (vals[i], vals[i + 1]);
        if fa == 0.0 && on_segment(&pull(a)) {
            return true;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            let fm = side(m);
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        if on_segment(&pull(0.5 * (a + b))) {
            return true;
        }
    }
    false
}

/// The geodesic `{u, v}^⊥ ∩ H³`.
struct Line {
    u: Vec4,
    v: Vec4,
}

fn plane_intersection(u: &HyperPlane, v: &HyperPlane) -> Option<Line> {
    let c = mink_inner(u.normal(), v.normal());
    if c.abs() >= 1.0 - 1e-12 {
        return None;
    }
    Some(Line { u: *u.normal(), v: *v.normal() })
}

impl Line {
    fn project(&self, x: &Vec4) -> Vec4 {
        let c = mink_inner(&self.u, &self.v);
        let (xu, xv) = (mink_inner(x, &self.u), mink_inner(x, &self.v));
        let det = 1.0 - c * c;
        let a = (xu - c * xv) / det;
        let b = (xv - c * xu) / det;
        x - self.u * a - self.v * b
    }

    /// Point of the line nearest to `p` and the unit tangent there.
    fn frame_near(&self, p: &Vec4) -> (Vec4, Vec4) {
        let center = self.project(p);
        let center = center / (-mink_norm_sq(&center)).sqrt();
        let mut best = Vec4::zeros();
        let mut best_norm = 0.0;
        for i in 0..4 {
            let mut e = Vec4::zeros();
            e[i] = 1.0;
            let w = self.project(&e);
            let w = w + center * mink_inner(&w, &center);
            let n2 = mink_norm_sq(&w);
            if n2 > best_norm {
                best_norm = n2;
                best = w;
            }
        }
        (center, best / best_norm.sqrt())
    }
}

fn validate(delta: f64, epsilon: f64) -> Result<(), PleatError> {
    if !(epsilon > 0.0 && epsilon < max_spacing()) {
        return Err(PleatError::SpacingOutOfRange(epsilon));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(PleatError::AngleOutOfRange(delta));
    }
    Ok(())
}

/// A `(δ, ε)`-approximation of `f̂(k)`: consecutive angles below `δ`, sample
/// spacing below `ε`, and length at most [`length_bound`].
pub fn polygonal_approximation(
    ps: &PleatedSurface,
    k: &Arc2,
    delta: f64,
    epsilon: f64,
) -> Result<PolygonalApproximation, PleatError> {
    validate(delta, epsilon)?;
    if let Some((plane, flat, excess)) = worst_support_violation(ps) {
        return Err(PleatError::Unsupported { plane, flat, excess });
    }
    let walk = Walk::new(ps, k)?;
    let samples = walk.samples(epsilon);

    // configurations: anchor every consecutive pair of samples
    let mut counts = ConfigurationCounts::default();
    let mut anchored: Vec<(ApproxEntry, bool)> = vec![(samples[0].clone(), true)];
    for pair in samples.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let resolved = if walk.pair_valid(a, b) {
            counts.direct += 1;
            Some(Vec::new())
        } else {
            if plane_angle(&a.plane, &b.plane).is_err() {
                counts.disjoint += 1;
            } else {
                counts.missed += 1;
            }
            walk.resolve(a, b)
        };
        match resolved {
            Some(extra) => {
                for e in extra {
                    anchored.push((e, true));
                }
                anchored.push((b.clone(), true));
            }
            None => {
                counts.fallback += 1;
                anchored.push((b.clone(), false));
            }
        }
    }

    // subdivision: keep a step only if it is valid and below δ
    let mut entries = vec![anchored[0].0.clone()];
    for w in anchored.windows(2) {
        let (a, (b, valid)) = (&w[0].0, (&w[1].0, w[1].1));
        let small = plane_angle(&a.plane, &b.plane).is_ok_and(|t| t < delta);
        if !(valid && small) {
            entries.extend(walk.pencil_walk(a, b, delta));
        }
        entries.push(b.clone());
    }
    Ok(PolygonalApproximation { arc: *k, delta, epsilon, entries, configurations: counts })
}

/// A failed property of a polygonal approximation; `index` refers to the
/// entry (or the first entry of the pair) concerned.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ApproxViolation {
    Unordered { index: usize },
    NotThroughPoint { index: usize, offset: f64 },
    NotSupport { index: usize, excess: f64 },
    DisjointPlanes { index: usize },
    PencilOrder { index: usize },
    ProjectionMisses { index: usize },
    AngleTooLarge { index: usize, angle: f64 },
    SpacingTooLarge { index: usize, spacing: f64 },
    TooLong { length: usize, bound: f64 },
}

/// Check the defining properties of a polygonal approximation together with
/// the `(δ, ε)` bounds and the length bound.
pub fn check_approximation(ps: &PleatedSurface, approx: &PolygonalApproximation) -> Vec<ApproxViolation> {
    let mut out = Vec::new();
    let e = &approx.entries;
    let l = approx.arc.length();
    let cross = crossings(&approx.arc, ps.lamination()).unwrap_or_default();
    for (i, entry) in e.iter().enumerate() {
        if i > 0 && entry.param < e[i - 1].param - 1e-12 {
            out.push(ApproxViolation::Unordered { index: i });
        }
        let image = ps.evaluate(&entry.point);
        let offset = image.map(|p| entry.plane.eval(&p).abs()).unwrap_or(f64::INFINITY);
        if offset > SUPPORT_TOL {
            out.push(ApproxViolation::NotThroughPoint { index: i, offset });
        }
        let excess = (0..ps.node_count()).map(|q| flat_excess(ps, q, &entry.plane)).fold(f64::NEG_INFINITY, f64::max);
        if excess > SUPPORT_TOL {
            out.push(ApproxViolation::NotSupport { index: i, excess });
        }
    }
    for i in 0..e.len().saturating_sub(1) {
        let (a, b) = (&e[i], &e[i + 1]);
        match plane_angle(&a.plane, &b.plane) {
            Err(_) => out.push(ApproxViolation::DisjointPlanes { index: i }),
            Ok(angle) => {
                if angle >= approx.delta {
                    out.push(ApproxViolation::AngleTooLarge { index: i, angle });
                }
                if !pair_forms_approximation(ps, &cross, a, b) {
                    out.push(ApproxViolation::ProjectionMisses { index: i });
                }
            }
        }
        let spacing = (b.param - a.param) * l;
        if spacing >= approx.epsilon {
            out.push(ApproxViolation::SpacingTooLarge { index: i, spacing });
        }
    }
    for i in 1..e.len().saturating_sub(1) {
        let same = (e[i - 1].param - e[i].param).abs() < 1e-12 && (e[i].param - e[i + 1].param).abs() < 1e-12;
        if same && !pencil_ordered(ps, &e[i - 1], &e[i], &e[i + 1]) {
            out.push(ApproxViolation::PencilOrder { index: i });
        }
    }
    let bound = length_bound(approx.epsilon, approx.delta, l);
    if e.len() as f64 > bound {
        out.push(ApproxViolation::TooLong { length: e.len(), bound });
    }
    out
}

/// `Π_i` meets the interior of `H⁺_{i+1} − H⁺_{i−1}`: some point of `Π_i` near
/// `f̂(x_i)` is strictly inside the next half-space and strictly outside the
/// previous one.
fn pencil_ordered(ps: &PleatedSurface, prev: &ApproxEntry, cur: &ApproxEntry, next: &ApproxEntry) -> bool {
    let Ok(p) = ps.evaluate(&cur.point) else {
        return false;
    };
    let u = cur.plane.normal();
    // orthonormal basis of the tangent plane of Π_i at p
    let mut basis: Vec<Vec4> = Vec::new();
    for i in 0..4 {
        let mut w = Vec4::zeros();
        w[i] = 1.0;
        w += p.coords() * mink_inner(&w, p.coords());
        w -= u * mink_inner(&w, u);
        for b in &basis {
            w -= b * mink_inner(&w, b);
        }
        let n2 = mink_norm_sq(&w);
        if n2 > 1e-6 && basis.len() < 2 {
            basis.push(w / n2.sqrt());
        }
    }
    (0..32).any(|k| {
        let phi = std::f64::consts::TAU * k as f64 / 32.0;
        let d = basis[0] * phi.cos() + basis[1] * phi.sin();
        let q = p.exp(&d, 0.5);
        next.plane.eval(&q) < -1e-12 && prev.plane.eval(&q) > 1e-12
    })
}

/// Angle sum of an `(α, s)`-approximation against the exact bending measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxReport {
    pub angle_sum: f64,
    pub exact_measure: f64,
    pub error: f64,
    pub length: usize,
    pub bound: f64,
    /// `error / (α · l(k))`.
    pub ratio: f64,
    pub alpha: f64,
    pub s: f64,
    pub arc_length: f64,
    pub configurations: ConfigurationCounts,
}

/// Build the `(α, s)`-approximation (`δ = α`, `ε = s`) and compare its angle
/// sum with the bending measure.
pub fn approx_report(ps: &PleatedSurface, k: &Arc2, alpha: f64, s: f64) -> Result<ApproxReport, PleatError> {
    if !(alpha > 0.0 && alpha < FRAC_PI_2) {
        return Err(PleatError::AlphaOutOfRange(alpha));
    }
    if !(s > 0.0 && s < max_spacing().min(1.0)) {
        return Err(PleatError::SOutOfRange(s));
    }
    let approx = polygonal_approximation(ps, k, alpha, s)?;
    let exact = super::bending_measure(ps, k)?;
    let angle_sum = approx.angle_sum();
    let error = (angle_sum - exact).abs();
    let l = k.length();
    Ok(ApproxReport {
        angle_sum,
        exact_measure: exact,
        error,
        length: approx.len(),
        bound: length_bound(s, alpha, l),
        ratio: error / (alpha * l),
        alpha,
        s,
        arc_length: l,
        configurations: approx.configurations,
    })
}
