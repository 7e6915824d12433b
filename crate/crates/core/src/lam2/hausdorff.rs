//! Hausdorff distance between lamination supports inside a metric ball.

use super::{FiniteLamination2, Leaf2};
use crate::hypgeom::{hyp_dist, mink_inner, MinkowskiPoint, Vec4};

/// The part of a leaf inside `B(basepoint, R)`: the geodesic
/// `p0 cosh s + T sinh s` for `s ∈ [-half, half]`, with `p0` the point of the
/// leaf nearest the basepoint.
#[derive(Debug, Clone, Copy)]
pub struct WindowSegment {
    pub center: MinkowskiPoint,
    pub tangent: Vec4,
    pub half: f64,
}

impl WindowSegment {
    pub fn of_leaf(leaf: &Leaf2, radius: f64) -> Option<Self> {
        let g = leaf.geodesic();
        let p0 = g.midpoint();
        let d0 = hyp_dist(&MinkowskiPoint::basepoint(), &p0).ok()?;
        if d0 >= radius {
            return None;
        }
        let half = (radius.cosh() / d0.cosh()).acosh();
        let tangent = g.unit_tangent_at(&p0);
        Some(Self { center: p0, tangent, half })
    }

    pub fn point(&self, s: f64) -> MinkowskiPoint {
        self.center.exp(&self.tangent, s)
    }
}

/// Exact distance from `p` to a window segment.
pub fn distance_to_window(p: &MinkowskiPoint, seg: &WindowSegment) -> f64 {
    // -⟨p, γ(s)⟩ = a cosh s + b sinh s, minimised at tanh s = -b / a
    let a = -mink_inner(p.coords(), seg.center.coords());
    let b = -mink_inner(p.coords(), &seg.tangent);
    let s = (-b / a).clamp(-1.0, 1.0).atanh().clamp(-seg.half, seg.half);
    hyp_dist(p, &seg.point(s)).unwrap_or(0.0)
}

fn windows(lam: &FiniteLamination2, radius: f64) -> Vec<WindowSegment> {
    lam.leaves().iter().filter_map(|l| WindowSegment::of_leaf(l, radius)).collect()
}

fn distance_to_set(p: &MinkowskiPoint, set: &[WindowSegment]) -> f64 {
    set.iter().map(|s| distance_to_window(p, s)).fold(f64::INFINITY, f64::min)
}

/// sup over points of `from` of the distance to `to`, with a point where it
/// is attained.
fn directed(from: &[WindowSegment], to: &[WindowSegment], spacing: f64) -> (f64, Option<MinkowskiPoint>) {
    let mut best: (f64, Option<MinkowskiPoint>) = (0.0, None);
    for seg in from {
        let f = |s: f64| distance_to_set(&seg.point(s), to);
        let mut keep = |s: f64, v: f64| {
            if best.1.is_none() || v > best.0 {
                best = (v, Some(seg.point(s)));
            }
        };
        let n = ((2.0 * seg.half / spacing).ceil() as usize).max(2);
        let h = 2.0 * seg.half / n as f64;
        let vals: Vec<f64> = (0..=n).map(|i| f(-seg.half + i as f64 * h)).collect();
        for i in 0..=n {
            let left = if i == 0 { f64::NEG_INFINITY } else { vals[i - 1] };
            let right = if i == n { f64::NEG_INFINITY } else { vals[i + 1] };
            keep(-seg.half + i as f64 * h, vals[i]);
            if vals[i] >= left && vals[i] >= right {
                let lo = (-seg.half + (i as f64 - 1.0) * h).max(-seg.half);
                let hi = (-seg.half + (i as f64 + 1.0) * h).min(seg.half);
                let (s, v) = golden_max(&f, lo, hi);
                keep(s, v);
            }
        }
    }
    best
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        if b - a < 1e-12 {
            break;
        }
    }
    [(c, fc), (d, fd), (a, f(a)), (b, f(b))]
        .into_iter()
        .fold((a, f64::NEG_INFINITY), |m, p| if p.1 > m.1 { p } else { m })
}

/// Largest distance from a point of `|from| ∩ B(o, R)` to `|to| ∩ B(o, R)`,
/// with the point of `|from|` where it is attained (`None` if `from` misses
/// the window). The distance is `+∞` if `to` misses the window and `from`
/// does not.
pub fn directed_window_gap(
    from: &FiniteLamination2,
    to: &FiniteLamination2,
    radius: f64,
) -> (f64, Option<MinkowskiPoint>) {
    let wf = windows(from, radius);
    let wt = windows(to, radius);
    if wf.is_empty() {
        return (0.0, None);
    }
    if wt.is_empty() {
        return (f64::INFINITY, Some(wf[0].center));
    }
    directed(&wf, &wt, 1e-3 * radius)
}

/// Hausdorff distance between `|la| ∩ B(o, R)` and `|lb| ∩ B(o, R)`.
///
/// Returns 0 if both windows are empty and `+∞` if exactly one is. Each leaf
/// segment is sampled with spacing at most `1e-3 · R` and local maxima are
/// refined by golden-section search; distances to the other support are exact.
pub fn windowed_hausdorff(la: &FiniteLamination2, lb: &FiniteLamination2, radius: f64) -> f64 {
    let wa = windows(la, radius);
    let wb = windows(lb, radius);
    match (wa.is_empty(), wb.is_empty()) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return f64::INFINITY,
        _ => {}
    }
    let spacing = 1e-3 * radius;
    directed(&wa, &wb, spacing).0.max(directed(&wb, &wa, spacing).0)
}
