//! The tree of complementary components of a finite lamination.
//!
//! Disjoint complete geodesics always separate H², so the components of
//! `H² − |L|` form a tree whose edges are the leaves. The tree is rooted at the
//! component containing a reference point (the basepoint, nudged off any leaf
//! through it). Each leaf is co-oriented by its *far normal*, for which the
//! reference point lies on the negative side; node `i + 1` is the component
//! just beyond leaf `i`.

use std::f64::consts::TAU;

use serde::Serialize;

use super::{FiniteLamination2, LamError};
use crate::hypgeom::{ideal_point, mink_inner, MinkowskiPoint, Vec4};
use crate::tolerance::SIDE_DEAD_ZONE;

pub type NodeId = usize;

/// Counter-clockwise arc of the ideal circle from `start` spanning `span`
/// radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdealArc {
    pub start: f64,
    pub span: f64,
}

impl IdealArc {
    pub fn end(&self) -> f64 {
        self.start + self.span
    }

    pub fn contains(&self, theta: f64) -> bool {
        (theta - self.start).rem_euclid(TAU) <= self.span
    }
}

#[derive(Debug, Clone)]
pub struct ComplementTree {
    reference: MinkowskiPoint,
    far_normals: Vec<Vec4>,
    far_arcs: Vec<IdealArc>,
    parent_leaf: Vec<Option<usize>>,
    depth: Vec<usize>,
    children: Vec<Vec<usize>>,
}

/// Build the complement tree of `lam`.
pub fn complement_components(lam: &FiniteLamination2) -> ComplementTree {
    ComplementTree::new(lam)
}

impl ComplementTree {
    pub fn new(lam: &FiniteLamination2) -> Self {
        let reference = reference_point(lam);
        let far_normals: Vec<Vec4> = lam
            .leaves()
            .iter()
            .map(|l| {
                let n = l.normal();
                if mink_inner(reference.coords(), &n) > 0.0 {
                    -n
                } else {
                    n
                }
            })
            .collect();
        let far_arcs = lam
            .leaves()
            .iter()
            .zip(&far_normals)
            .map(|(l, n)| {
                let (a, b) = l.angles();
                let span = (b - a).rem_euclid(TAU);
                let mid = a + 0.5 * span;
                if mink_inner(&ideal_point(mid), n) > 0.0 {
                    IdealArc { start: a, span }
                } else {
                    IdealArc { start: b, span: TAU - span }
                }
            })
            .collect::<Vec<_>>();

        // ancestors of leaf i: leaves whose far side contains leaf i
        let m = lam.len();
        let ancestors: Vec<Vec<usize>> = (0..m)
            .map(|i| {
                let mid = lam.leaves()[i].closest_point();
                (0..m)
                    .filter(|&j| j != i && mink_inner(mid.coords(), &far_normals[j]) > 0.0)
                    .collect()
            })
            .collect();
        let depth: Vec<usize> = ancestors.iter().map(Vec::len).collect();
        let parent_leaf: Vec<Option<usize>> = ancestors
            .iter()
            .map(|a| a.iter().copied().max_by_key(|&j| depth[j]))
            .collect();
        let mut children = vec![Vec::new(); m + 1];
        for (i, p) in parent_leaf.iter().enumerate() {
            children[p.map_or(0, |j| j + 1)].push(i);
        }
        Self { reference, far_normals, far_arcs, parent_leaf, depth, children }
    }

    pub fn node_count(&self) -> usize {
        self.far_normals.len() + 1
    }

    pub fn edge_count(&self) -> usize {
        self.far_normals.len()
    }

    pub fn reference_point(&self) -> &MinkowskiPoint {
        &self.reference
    }

    /// Normal of leaf `i` with the reference point on its negative side.
    pub fn far_normal(&self, leaf: usize) -> &Vec4 {
        &self.far_normals[leaf]
    }

    /// Ideal arc bounding the far side of leaf `i`.
    pub fn far_arc(&self, leaf: usize) -> IdealArc {
        self.far_arcs[leaf]
    }

    /// Leaf crossed to enter `node` from its parent (`None` for the root).
    pub fn entry_leaf(&self, node: NodeId) -> Option<usize> {
        node.checked_sub(1)
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        let leaf = self.entry_leaf(node)?;
        Some(self.parent_leaf[leaf].map_or(0, |j| j + 1))
    }

    /// Leaves bounding `node` on its far side.
    pub fn child_leaves(&self, node: NodeId) -> &[usize] {
        &self.children[node]
    }

    pub fn depth(&self, node: NodeId) -> usize {
        self.entry_leaf(node).map_or(0, |l| self.depth[l] + 1)
    }

    /// Leaves crossed from the root to `node`, in crossing order.
    pub fn path_leaves(&self, node: NodeId) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.entry_leaf(node);
        while let Some(l) = cur {
            out.push(l);
            cur = self.parent_leaf[l];
        }
        out.reverse();
        out
    }

    /// Nodes in an order where every parent precedes its children.
    pub fn topological_order(&self) -> Vec<NodeId> {
        let mut order = vec![0];
        let mut i = 0;
        while i < order.len() {
            let n = order[i];
            order.extend(self.children[n].iter().map(|l| l + 1));
            i += 1;
        }
        order
    }

    /// Component containing `p`.
    pub fn locate(&self, p: &MinkowskiPoint, lam: &FiniteLamination2) -> Result<NodeId, LamError> {
        let mut best: Option<usize> = None;
        for (i, n) in self.far_normals.iter().enumerate() {
            let s = mink_inner(p.coords(), n);
            if s.abs() <= SIDE_DEAD_ZONE {
                return Err(LamError::OnLeaf(lam.leaves()[i].id.clone()));
            }
            if s > 0.0 && best.is_none_or(|b| self.depth[i] > self.depth[b]) {
                best = Some(i);
            }
        }
        Ok(best.map_or(0, |i| i + 1))
    }

    /// Component containing `p`, tolerating points on a leaf: such points are
    /// assigned to the component on the near side of that leaf.
    pub fn locate_closed(&self, p: &MinkowskiPoint) -> NodeId {
        let mut best: Option<usize> = None;
        for (i, n) in self.far_normals.iter().enumerate() {
            if mink_inner(p.coords(), n) > SIDE_DEAD_ZONE
                && best.is_none_or(|b| self.depth[i] > self.depth[b])
            {
                best = Some(i);
            }
        }
        best.map_or(0, |i| i + 1)
    }

    /// Ideal boundary of `node`: the arcs of the circle at infinity adjacent to
    /// the component, i.e. its entry arc minus the far arcs of its children.
    pub fn ideal_arcs(&self, node: NodeId) -> Vec<IdealArc> {
        let kids = &self.children[node];
        let outer = match self.entry_leaf(node) {
            Some(l) => self.far_arcs[l],
            None => match kids.first() {
                Some(&k) => IdealArc { start: self.far_arcs[k].start, span: TAU },
                None => return vec![IdealArc { start: 0.0, span: TAU }],
            },
        };
        let mut holes: Vec<(f64, f64)> = kids
            .iter()
            .map(|&k| {
                let a = self.far_arcs[k];
                ((a.start - outer.start).rem_euclid(TAU), a.span)
            })
            .map(|(off, span)| if off > outer.span && off > TAU - 1e-12 { (0.0, span) } else { (off, span) })
            .collect();
        holes.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out = Vec::new();
        let mut cursor = 0.0;
        for (off, span) in holes {
            if off - cursor > 1e-12 {
                out.push(IdealArc { start: outer.start + cursor, span: off - cursor });
            }
            cursor = cursor.max(off + span);
        }
        if outer.span - cursor > 1e-12 {
            out.push(IdealArc { start: outer.start + cursor, span: outer.span - cursor });
        }
        out
    }

    /// `true` if node `inner` lies in the subtree rooted at `outer`.
    pub fn is_descendant(&self, inner: NodeId, outer: NodeId) -> bool {
        let mut cur = Some(inner);
        while let Some(n) = cur {
            if n == outer {
                return true;
            }
            cur = self.parent(n);
        }
        false
    }
}

fn reference_point(lam: &FiniteLamination2) -> MinkowskiPoint {
    let mut p = MinkowskiPoint::basepoint();
    // step off any leaf through the basepoint; a small shift never lands on
    // another leaf because the leaves are finitely many
    for _ in 0..8 {
        let hit = lam
            .leaves()
            .iter()
            .find(|l| mink_inner(p.coords(), &l.normal()).abs() <= 1e-6);
        match hit {
            None => return p,
            Some(l) => {
                let n = l.normal();
                let v = n + p.coords() * mink_inner(&n, p.coords());
                let v = v / crate::hypgeom::mink_norm_sq(&v).sqrt();
                p = p.exp(&(-v), 1e-3);
            }
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lam2::Leaf2;
    use std::f64::consts::PI;

    fn lam(spec: &[(f64, f64)]) -> FiniteLamination2 {
        FiniteLamination2::new(
            spec.iter()
                .enumerate()
                .map(|(i, &(a, b))| Leaf2::new(format!("l{i}"), a, b, 1.0).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn empty_lamination_is_a_single_node() {
        let t = complement_components(&FiniteLamination2::empty());
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.locate(&MinkowskiPoint::polar(3.0, 1.0), &FiniteLamination2::empty()).unwrap(), 0);
        assert_eq!(t.ideal_arcs(0), vec![IdealArc { start: 0.0, span: TAU }]);
    }

    #[test]
    fn nested_leaves_form_a_chain() {
        // three nested arcs around angle 0, seen from the basepoint
        let l = lam(&[(-1.2, 1.2), (-0.8, 0.8), (-0.4, 0.4)]);
        let t = complement_components(&l);
        assert_eq!(t.node_count(), 4);
        assert_eq!(t.parent(1), Some(0));
        assert_eq!(t.parent(2), Some(1));
        assert_eq!(t.parent(3), Some(2));
        assert_eq!(t.path_leaves(3), vec![0, 1, 2]);
        assert_eq!(t.locate(&MinkowskiPoint::basepoint(), &l).unwrap(), 0);
        assert_eq!(t.locate(&MinkowskiPoint::polar(6.0, 0.0), &l).unwrap(), 3);
    }

    #[test]
    fn siblings_share_the_root() {
        let l = lam(&[(0.0, 0.5), (2.0, 2.5), (4.0, 4.5)]);
        let t = complement_components(&l);
        for n in 1..4 {
            assert_eq!(t.parent(n), Some(0));
        }
        let arcs = t.ideal_arcs(0);
        assert_eq!(arcs.len(), 3);
        let total: f64 = arcs.iter().map(|a| a.span).sum();
        assert!((total - (TAU - 1.5)).abs() < 1e-12);
    }

    #[test]
    fn leaf_through_basepoint_moves_reference() {
        let l = lam(&[(0.0, PI)]);
        let t = complement_components(&l);
        assert!(mink_inner(t.reference_point().coords(), t.far_normal(0)) < -1e-4);
        assert!(matches!(t.locate(&MinkowskiPoint::polar(1.0, 0.0), &l), Err(LamError::OnLeaf(_))));
    }

    #[test]
    fn ideal_arcs_partition_the_circle() {
        let l = lam(&[(-1.2, 1.2), (-0.8, -0.1), (0.1, 0.8), (2.0, 3.0), (2.2, 2.5)]);
        let t = complement_components(&l);
        let total: f64 = (0..t.node_count()).flat_map(|n| t.ideal_arcs(n)).map(|a| a.span).sum();
        assert!((total - TAU).abs() < 1e-12);
        // every arc's midpoint locates (far out) to its own node
        for n in 0..t.node_count() {
            for a in t.ideal_arcs(n) {
                let mid = a.start + 0.5 * a.span;
                let p = MinkowskiPoint::polar(12.0, mid);
                assert_eq!(t.locate(&p, &l).unwrap(), n);
            }
        }
    }
}
