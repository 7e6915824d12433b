//! The folding construction: one isometry per complementary component.

use serde::{Deserialize, Serialize};

use super::PleatError;
use crate::hypgeom::{
    e_z, hyp_dist, mink_inner, rotation_in_frame, HyperGeodesic, HyperPlane, LorentzMap,
    MinkowskiPoint, Vec4,
};
use crate::lam2::{arc_measure, Arc2, ComplementTree, FiniteLamination2, LamError, NodeId};
use crate::tolerance::{INVARIANT_TOL, PI_COMPARE_TOL};

/// Direction in which flats are folded off the base plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BendSide {
    Plus,
    Minus,
}

impl BendSide {
    pub fn sign(self) -> f64 {
        match self {
            BendSide::Plus => 1.0,
            BendSide::Minus => -1.0,
        }
    }
}

/// A lamination with weights in (0, π] and a bending side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBendingData")]
pub struct BendingData {
    lamination: FiniteLamination2,
    side: BendSide,
}

#[derive(Deserialize)]
struct RawBendingData {
    lamination: FiniteLamination2,
    side: BendSide,
}

impl TryFrom<RawBendingData> for BendingData {
    type Error = PleatError;
    fn try_from(raw: RawBendingData) -> Result<Self, PleatError> {
        Self::new(raw.lamination, raw.side)
    }
}

impl BendingData {
    pub fn new(lamination: FiniteLamination2, side: BendSide) -> Result<Self, PleatError> {
        for leaf in lamination.leaves() {
            if !(leaf.weight > 0.0) || leaf.weight > std::f64::consts::PI + PI_COMPARE_TOL {
                return Err(PleatError::WeightOutOfRange { id: leaf.id.clone(), weight: leaf.weight });
            }
        }
        Ok(Self { lamination, side })
    }

    pub fn lamination(&self) -> &FiniteLamination2 {
        &self.lamination
    }

    pub fn side(&self) -> BendSide {
        self.side
    }
}

/// Support planes at a point of the surface.
#[derive(Debug, Clone, PartialEq)]
pub enum SupportPlanes {
    /// Interior point of a flat.
    Single(HyperPlane),
    /// Point on a bending leaf: the planes `pencil_plane(leaf, s)` for
    /// `s ∈ [0, weight]`, from the near flat to the far flat.
    Pencil { leaf: usize, weight: f64, near: HyperPlane, far: HyperPlane },
}

/// A bent copy of the H² slice in H³.
#[derive(Debug, Clone)]
pub struct PleatedSurface {
    data: BendingData,
    tree: ComplementTree,
    maps: Vec<LorentzMap>,
    inverses: Vec<LorentzMap>,
    planes: Vec<HyperPlane>,
}

/// Fold the base plane along every leaf.
///
/// The component beyond leaves `ℓ1, …, ℓk` (in crossing order from the root)
/// gets `R_ℓ1(εw1) ⋯ R_ℓk(εwk)`, each rotation taken about the leaf in base
/// coordinates. This equals composing rotations about the successively bent
/// leaf images, because `R_{Mℓ} = M R_ℓ M⁻¹`.
pub fn build_pleated(data: BendingData) -> PleatedSurface {
    let tree = ComplementTree::new(&data.lamination);
    let n = tree.node_count();
    let mut maps = vec![LorentzMap::identity(); n];
    let eps = data.side.sign();
    for node in tree.topological_order().into_iter().skip(1) {
        let leaf = tree.entry_leaf(node).expect("non-root node");
        let parent = tree.parent(node).expect("non-root node");
        let w = data.lamination.leaves()[leaf].weight;
        let rot = rotation_in_frame(tree.far_normal(leaf), &e_z(), eps * w);
        maps[node] = maps[parent].compose(&rot).renormalized();
    }
    let base = HyperPlane::from_spacelike_unchecked(-e_z() * eps);
    let planes = maps.iter().map(|m| m.apply_plane(&base)).collect();
    let inverses = maps.iter().map(LorentzMap::inverse).collect();
    PleatedSurface { data, tree, maps, inverses, planes }
}

impl PleatedSurface {
    pub fn data(&self) -> &BendingData {
        &self.data
    }

    pub fn lamination(&self) -> &FiniteLamination2 {
        &self.data.lamination
    }

    pub fn tree(&self) -> &ComplementTree {
        &self.tree
    }

    pub fn node_count(&self) -> usize {
        self.tree.node_count()
    }

    pub fn component_map(&self, node: NodeId) -> &LorentzMap {
        &self.maps[node]
    }

    pub(crate) fn component_inverse(&self, node: NodeId) -> &LorentzMap {
        &self.inverses[node]
    }

    /// Plane containing the image of `node`, co-oriented so the surface lies
    /// on its non-positive side.
    pub fn component_plane(&self, node: NodeId) -> &HyperPlane {
        &self.planes[node]
    }

    pub fn base_plane(&self) -> HyperPlane {
        HyperPlane::from_spacelike_unchecked(-e_z() * self.data.side.sign())
    }

    pub fn near_node(&self, leaf: usize) -> NodeId {
        self.tree.parent(leaf + 1).expect("leaf nodes have parents")
    }

    pub fn far_node(&self, leaf: usize) -> NodeId {
        leaf + 1
    }

    /// Member of the pencil of support planes along `leaf`: the near flat's
    /// plane turned by `s ∈ [0, w]` about the leaf image.
    pub fn pencil_plane(&self, leaf: usize, s: f64) -> HyperPlane {
        let rot = rotation_in_frame(self.tree.far_normal(leaf), &e_z(), self.data.side.sign() * s);
        let m = self.maps[self.near_node(leaf)].compose(&rot);
        m.apply_plane(&self.base_plane())
    }

    /// Image of a leaf under the pleated map.
    pub fn leaf_image(&self, leaf: usize) -> HyperGeodesic {
        let g = self.lamination().leaves()[leaf].geodesic();
        self.maps[self.near_node(leaf)].apply_geodesic(&g)
    }

    pub fn locate(&self, p: &MinkowskiPoint) -> Result<NodeId, LamError> {
        self.tree.locate(p, self.lamination())
    }

    /// `f̂(p)`. Points on a leaf are mapped from both sides and the images
    /// must agree.
    pub fn evaluate(&self, p: &MinkowskiPoint) -> Result<MinkowskiPoint, PleatError> {
        match self.locate(p) {
            Ok(node) => Ok(self.maps[node].apply_point(p)),
            Err(LamError::OnLeaf(id)) => {
                let leaf = self.lamination().index_of(&id).expect("leaf from this lamination");
                let near = self.maps[self.near_node(leaf)].apply_point(p);
                let far = self.maps[self.far_node(leaf)].apply_point(p);
                let gap = hyp_dist(&near, &far)?;
                if gap > INVARIANT_TOL {
                    return Err(PleatError::EdgeMismatch(gap));
                }
                Ok(near)
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Support planes at `f̂(p)`; requires the flats to lie on one side of
    /// every flat's plane.
    pub fn support_planes_at(&self, p: &MinkowskiPoint) -> Result<SupportPlanes, PleatError> {
        if let Some((plane, flat, excess)) = super::convexity::worst_support_violation(self) {
            return Err(PleatError::Unsupported { plane, flat, excess });
        }
        match self.locate(p) {
            Ok(node) => Ok(SupportPlanes::Single(self.planes[node])),
            Err(LamError::OnLeaf(id)) => {
                let leaf = self.lamination().index_of(&id).expect("leaf from this lamination");
                Ok(SupportPlanes::Pencil {
                    leaf,
                    weight: self.lamination().leaves()[leaf].weight,
                    near: self.planes[self.near_node(leaf)],
                    far: self.planes[self.far_node(leaf)],
                })
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Preimage in H² of the point of the surface nearest to `q`, with the
    /// distance. Candidates are the orthogonal projections onto each flat's
    /// plane (kept if they land in that flat) and the nearest points on each
    /// leaf image.
    pub fn nearest_point(&self, q: &MinkowskiPoint) -> (MinkowskiPoint, f64) {
        let mut best: Option<(MinkowskiPoint, f64)> = None;
        let mut consider = |p: MinkowskiPoint, d: f64| {
            if best.as_ref().is_none_or(|b| d < b.1) {
                best = Some((p, d));
            }
        };
        for node in 0..self.node_count() {
            let local = self.inverses[node].apply_vec(q.coords());
            let foot = Vec4::new(local[0], local[1], local[2], 0.0);
            let p = MinkowskiPoint::from_timelike_unchecked(foot);
            if self.tree.locate_closed(&p) == node || self.tree.node_count() == 1 {
                consider(p, local[3].abs().asinh());
            }
        }
        for (i, leaf) in self.lamination().leaves().iter().enumerate() {
            let local = self.inverses[self.near_node(i)].apply_vec(q.coords());
            let g = leaf.geodesic();
            let p0 = g.midpoint();
            let t = g.unit_tangent_at(&p0);
            let a = -mink_inner(&local, p0.coords());
            let b = mink_inner(&local, &t);
            let foot = MinkowskiPoint::from_timelike_unchecked(p0.coords() * a + t * b);
            let lp = MinkowskiPoint::from_timelike_unchecked(local);
            consider(foot, hyp_dist(&lp, &foot).unwrap_or(0.0));
        }
        best.expect("at least one flat")
    }

    /// Sample points of H² for spot checks: a polar grid of the given radius
    /// plus points just off both sides of every leaf, each with its component.
    pub fn sample_points(&self, radius: f64, rings: usize, spokes: usize) -> Vec<(MinkowskiPoint, NodeId)> {
        let mut out = Vec::new();
        let mut push = |p: MinkowskiPoint| {
            if let Ok(n) = self.locate(&p) {
                out.push((p, n));
            }
        };
        push(MinkowskiPoint::basepoint());
        for i in 1..=rings {
            let r = radius * i as f64 / rings as f64;
            for j in 0..spokes {
                let phi = std::f64::consts::TAU * (j as f64 + 0.5 * (i % 2) as f64) / spokes as f64;
                push(MinkowskiPoint::polar(r, phi));
            }
        }
        for i in 0..self.lamination().len() {
            let g = self.lamination().leaves()[i].geodesic();
            let n = self.tree.far_normal(i);
            for s in [-2.0, -1.0, 0.0, 1.0, 2.0] {
                let p = g.point_at(s);
                let dir = n + p.coords() * mink_inner(n, p.coords());
                push(p.exp(&dir, 1e-3));
                push(p.exp(&dir, -1e-3));
            }
        }
        out
    }
}

/// Bending measure of `f̂(k)`: the sum of the weights of the leaves `k`
/// crosses. For finite laminations this is the infimum over polygonal
/// approximations; [`super::approx_report`] measures the gap empirically.
pub fn bending_measure(ps: &PleatedSurface, k: &Arc2) -> Result<f64, PleatError> {
    Ok(arc_measure(k, ps.lamination())?)
}
