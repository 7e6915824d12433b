//! Seeded random instances: laminations, convex bending data and arcs.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::hypgeom::MinkowskiPoint;
use crate::lam2::{crossings, orthogonal_leaf_angles, Arc2, FiniteLamination2, Leaf2};
use crate::pleat::{build_pleated, is_convex, BendSide, BendingData, PleatedSurface};
use crate::rquotient::{AbstractLamination, AbstractLeaf};

/// Smallest weight drawn by the generators.
pub const MIN_WEIGHT: f64 = 0.05;

fn interleaved(a: (f64, f64), b: (f64, f64)) -> bool {
    let inside = |t: f64, (lo, hi): (f64, f64)| (t - lo).rem_euclid(TAU) < (hi - lo).rem_euclid(TAU);
    inside(b.0, a) != inside(b.1, a)
}

fn angular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Up to `max_leaves` pairwise disjoint leaves with uniform random ideal
/// endpoints kept at least `0.02` apart, and weights drawn by `weight`.
pub fn random_lamination<R: Rng>(rng: &mut R, max_leaves: usize, mut weight: impl FnMut(&mut R) -> f64) -> FiniteLamination2 {
    let m = rng.gen_range(0..=max_leaves);
    let mut ends: Vec<(f64, f64)> = Vec::new();
    let mut attempts = 0;
    while ends.len() < m && attempts < 400 {
        attempts += 1;
        let a = rng.gen_range(0.0..TAU);
        let b = (a + rng.gen_range(0.3..(TAU - 0.3))).rem_euclid(TAU);
        let far = ends.iter().all(|&(p, q)| {
            !interleaved((p, q), (a, b)) && [p, q].iter().all(|&t| angular_gap(t, a) > 0.02 && angular_gap(t, b) > 0.02)
        });
        if far {
            ends.push((a, b));
        }
    }
    let leaves = ends
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| Leaf2::new(format!("l{i}"), a, b, weight(rng)).expect("separated endpoints"))
        .collect();
    FiniteLamination2::new(leaves).expect("non-interleaved leaves are disjoint")
}

/// Convex bending data with at most `max_leaves` leaves and weights in
/// `(MIN_WEIGHT, π]`. Weights are drawn uniformly and shrunk towards
/// `MIN_WEIGHT` until the surface is convex; if even that fails the leaves
/// are redrawn.
pub fn random_convex_bending<R: Rng>(rng: &mut R, max_leaves: usize) -> PleatedSurface {
    loop {
        let lam = random_lamination(rng, max_leaves, |r| r.gen_range(MIN_WEIGHT..=PI).max(MIN_WEIGHT + 1e-3));
        let side = if rng.gen_bool(0.5) { BendSide::Plus } else { BendSide::Minus };
        let mut scale = 1.0;
        for _ in 0..12 {
            let lam_s = lam
                .reweighted(|_, w| MIN_WEIGHT + 1e-3 + (w - MIN_WEIGHT - 1e-3) * scale)
                .expect("positive weights");
            let ps = build_pleated(BendingData::new(lam_s, side).expect("weights in range"));
            if is_convex(&ps).convex {
                return ps;
            }
            scale *= 0.6;
        }
    }
}

/// A geodesic arc inside the disc of radius `radius` whose endpoints avoid
/// the leaves and whose crossings are transverse.
pub fn random_arc<R: Rng>(rng: &mut R, lam: &FiniteLamination2, radius: f64) -> Arc2 {
    loop {
        let p = MinkowskiPoint::polar(rng.gen_range(0.0..radius), rng.gen_range(0.0..TAU));
        let q = MinkowskiPoint::polar(rng.gen_range(0.0..radius), rng.gen_range(0.0..TAU));
        let Ok(k) = Arc2::new(p, q) else { continue };
        if k.length() < 0.1 {
            continue;
        }
        let clear = lam
            .leaves()
            .iter()
            .all(|l| crate::hypgeom::mink_inner(p.coords(), &l.normal()).abs() > 1e-6
                && crate::hypgeom::mink_inner(q.coords(), &l.normal()).abs() > 1e-6);
        if clear && crossings(&k, lam).is_ok_and(|c| c.iter().all(|c| c.angle > 1e-3)) {
            return k;
        }
    }
}

/// Two or three leaves orthogonal to the x-axis, packed closer together than
/// the sample spacing, with small weights; paired with an arc along the axis
/// crossing them all. These are the configurations where a polygonal
/// approximation loses bending to sampling.
pub fn random_close_leaves<R: Rng>(rng: &mut R) -> (PleatedSurface, Arc2) {
    let count = rng.gen_range(2..=3);
    let mut x = rng.gen_range(-0.5..0.0);
    let mut leaves = Vec::new();
    for i in 0..count {
        let (a, b) = orthogonal_leaf_angles(x);
        leaves.push(Leaf2::new(format!("c{i}"), a, b, rng.gen_range(0.01..0.2)).expect("distinct endpoints"));
        x += rng.gen_range(0.02..0.12);
    }
    let lam = FiniteLamination2::new(leaves).expect("orthogonal leaves are disjoint");
    let side = if rng.gen_bool(0.5) { BendSide::Plus } else { BendSide::Minus };
    let ps = build_pleated(BendingData::new(lam, side).expect("small weights"));
    let o = MinkowskiPoint::basepoint();
    let ex = crate::hypgeom::Vec4::new(0.0, 1.0, 0.0, 0.0);
    let k = Arc2::new(o.exp(&ex, rng.gen_range(-1.5..-0.8)), o.exp(&ex, rng.gen_range(0.6..1.5)))
        .expect("distinct endpoints");
    (ps, k)
}

/// Abstract lamination with up to `max_leaves` leaves drawn from a pool of
/// `pool` ids and weights `k / 8` for `k` in `1..=steps`, exact in binary.
/// Leaves with an even index are closed. Small pools and step counts make
/// R-equivalent pairs common.
pub fn random_abstract<R: Rng>(rng: &mut R, max_leaves: usize, pool: usize, steps: u32) -> AbstractLamination {
    let m = rng.gen_range(0..=max_leaves.min(pool));
    let mut ids: Vec<usize> = (0..pool).collect();
    for i in 0..m {
        let j = rng.gen_range(i..pool);
        ids.swap(i, j);
    }
    let leaves = ids[..m]
        .iter()
        .map(|&i| AbstractLeaf {
            id: format!("a{i}"),
            closed: i % 2 == 0,
            weight: rng.gen_range(1..=steps) as f64 / 8.0,
        })
        .collect();
    AbstractLamination::new(leaves).expect("distinct ids, positive weights")
}
