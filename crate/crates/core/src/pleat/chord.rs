//! Comparing the bent image of a segment with the chord joining its ends.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use super::{is_convex, PleatError, PleatedSurface};
use crate::hypgeom::{hyp_dist, mink_norm_sq, MinkowskiPoint, Vec4};
use crate::lam2::{crossings, Arc2};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChordComparison {
    /// Length of `[a, b]`, equal to the length of its bent image.
    pub intrinsic: f64,
    /// Distance in H³ between `f̂(a)` and `f̂(b)`.
    pub chord: f64,
    /// Sum of the angles the bent path and the chord make at their two
    /// common endpoints.
    pub exterior_angle_sum: f64,
    /// Sum of the turning angles of the bent path at its interior vertices.
    pub path_turning: f64,
    /// Bending measure of `[a, b]`.
    pub bending: f64,
}

fn angle_between(u: &Vec4, v: &Vec4) -> f64 {
    let diff = mink_norm_sq(&(u - v)).max(0.0).sqrt();
    let sum = mink_norm_sq(&(u + v)).max(0.0).sqrt();
    2.0 * diff.atan2(sum)
}

/// Compare `f̂([a, b])` with the geodesic chord `[f̂(a), f̂(b)]`.
pub fn chord_comparison(
    ps: &PleatedSurface,
    a: &MinkowskiPoint,
    b: &MinkowskiPoint,
) -> Result<ChordComparison, PleatError> {
    let c = is_convex(ps);
    if !c.convex {
        if let super::ConvexityCertificate::Violated { plane, flat, excess } = c.certificate {
            return Err(PleatError::Unsupported { plane, flat, excess });
        }
    }
    let arc = Arc2::new(*a, *b)?;
    let cross = crossings(&arc, ps.lamination())?;
    let bending: f64 = cross.iter().map(|c| ps.lamination().leaves()[c.leaf].weight).sum();
    if bending >= FRAC_PI_2 {
        return Err(PleatError::OutOfRegime { bending });
    }
    let mut vertices = vec![ps.evaluate(a)?];
    for c in &cross {
        vertices.push(ps.evaluate(&arc.point_at(c.param))?);
    }
    vertices.push(ps.evaluate(b)?);

    let fa = vertices[0];
    let fb = *vertices.last().expect("two endpoints");
    let chord = hyp_dist(&fa, &fb)?;
    let dir = |p: &MinkowskiPoint, q: &MinkowskiPoint| p.direction_to(q).expect("distinct vertices");

    let mut path_turning = 0.0;
    for w in vertices.windows(3) {
        let back = dir(&w[1], &w[0]);
        let fwd = dir(&w[1], &w[2]);
        // exterior angle = π − interior angle = angle between -back and fwd
        path_turning += angle_between(&(-back), &fwd);
    }
    let mut exterior_angle_sum = 0.0;
    if chord > 0.0 {
        let n = vertices.len();
        exterior_angle_sum += angle_between(&dir(&fa, &vertices[1]), &dir(&fa, &fb));
        exterior_angle_sum += angle_between(&dir(&fb, &vertices[n - 2]), &dir(&fb, &fa));
    }
    Ok(ChordComparison { intrinsic: arc.length(), chord, exterior_angle_sum, path_turning, bending })
}
