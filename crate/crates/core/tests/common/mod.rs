//! Helpers shared by the integration tests: independent oracles and golden
//! files.

#![allow(dead_code)]

use std::path::PathBuf;

use bendlab::hypgeom::{MinkowskiPoint, Vec4};
use bendlab::lam2::{Arc2, FiniteLamination2};

/// Leaves crossed by `k`, found in the Klein model where both the arc and the
/// leaves are straight chords. Returned in order along the arc.
pub fn klein_crossed(k: &Arc2, lam: &FiniteLamination2) -> Vec<String> {
    let (p, q) = (k.from().klein(), k.to().klein());
    let mut hits: Vec<(f64, String)> = Vec::new();
    for l in lam.leaves() {
        let (t1, t2) = l.angles();
        let (a, b) = ((t1.cos(), t1.sin()), (t2.cos(), t2.sin()));
        // p + s (q - p) = a + u (b - a)
        let d = (q.0 - p.0, q.1 - p.1);
        let e = (b.0 - a.0, b.1 - a.1);
        let den = d.0 * e.1 - d.1 * e.0;
        if den.abs() < 1e-15 {
            continue;
        }
        let w = (a.0 - p.0, a.1 - p.1);
        let s = (w.0 * e.1 - w.1 * e.0) / den;
        let u = (w.0 * d.1 - w.1 * d.0) / den;
        if (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&u) {
            hits.push((s, l.id.clone()));
        }
    }
    hits.sort_by(|x, y| x.0.total_cmp(&y.0));
    hits.into_iter().map(|h| h.1).collect()
}

/// Geodesic arc along the x-axis of the slice between signed distances `a`
/// and `b` from the basepoint.
pub fn x_arc(a: f64, b: f64) -> Arc2 {
    let o = MinkowskiPoint::basepoint();
    let ex = Vec4::new(0.0, 1.0, 0.0, 0.0);
    Arc2::new(o.exp(&ex, a), o.exp(&ex, b)).unwrap()
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Load a golden JSON value, writing `current` first when the file is
/// missing or `BENDLAB_BLESS` is set.
pub fn golden(name: &str, current: &serde_json::Value) -> serde_json::Value {
    let path = golden_path(name);
    if std::env::var_os("BENDLAB_BLESS").is_some() || !path.exists() {
        let text = serde_json::to_string_pretty(current).unwrap() + "\n";
        std::fs::write(&path, text).unwrap();
    }
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}
