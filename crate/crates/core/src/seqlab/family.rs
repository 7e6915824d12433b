//! Families of bending data indexed by `n`, and the classification of their
//! limits as convex or even.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SeqError;
use crate::lam2::{arc_measure, crossings, Arc2, FiniteLamination2, Leaf2};
use crate::pleat::{
    build_pleated, coplanarity_residual, is_convex, witness_margin, BendSide, BendingData, ConvexityCertificate,
    PleatedSurface,
};
use crate::tolerance::{INTERIOR_MARGIN, PI_COMPARE_TOL};
use crate::traintrack::loglog_slope;

/// Index at which the coplanarity residual of an even family is judged.
pub const EXTRAPOLATION_INDEX: f64 = 1e4;

/// Largest extrapolated coplanarity residual accepted for an even limit.
pub const EVEN_RESIDUAL_TOL: f64 = 1e-6;

/// `n ↦ w(n)` for `n ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightPath {
    Constant { weight: f64 },
    /// `target · n / (n + 1)`.
    HarmonicApproach { target: f64 },
    /// `target · (1 − ratio^n)`.
    GeometricApproach { target: f64, ratio: f64 },
    /// `high` at even `n`, `low` at odd `n`; has no limit.
    Oscillating { low: f64, high: f64 },
}

impl WeightPath {
    pub fn weight(&self, n: u64) -> f64 {
        let x = n as f64;
        match *self {
            WeightPath::Constant { weight } => weight,
            WeightPath::HarmonicApproach { target } => target * x / (x + 1.0),
            WeightPath::GeometricApproach { target, ratio } => target * (1.0 - ratio.powf(x)),
            WeightPath::Oscillating { low, high } => {
                if n.is_multiple_of(2) {
                    high
                } else {
                    low
                }
            }
        }
    }

    /// Limit of the path, `None` if it has none.
    pub fn target(&self) -> Option<f64> {
        match *self {
            WeightPath::Constant { weight } => Some(weight),
            WeightPath::HarmonicApproach { target } | WeightPath::GeometricApproach { target, .. } => Some(target),
            WeightPath::Oscillating { low, high } => (low == high).then_some(low),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyLeaf {
    pub id: String,
    pub theta1: f64,
    pub theta2: f64,
    pub path: WeightPath,
}

/// Fixed leaf geometry with weights varying along `first..=last`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub leaves: Vec<FamilyLeaf>,
    pub first: u64,
    pub last: u64,
    pub side: BendSide,
}

impl FamilySpec {
    pub fn lamination_at(&self, n: u64) -> Result<FiniteLamination2, SeqError> {
        let leaves = self
            .leaves
            .iter()
            .map(|l| {
                let w = l.path.weight(n);
                if !(w > 0.0 && w <= PI + PI_COMPARE_TOL) {
                    return Err(SeqError::WeightOutOfRange { id: l.id.clone(), n, weight: w });
                }
                Ok(Leaf2::new(l.id.clone(), l.theta1, l.theta2, w.min(PI))?)
            })
            .collect::<Result<Vec<_>, SeqError>>()?;
        Ok(FiniteLamination2::new(leaves)?)
    }

    pub fn surface_at(&self, n: u64) -> Result<PleatedSurface, SeqError> {
        Ok(build_pleated(BendingData::new(self.lamination_at(n)?, self.side)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitClass {
    Convex,
    Even,
    NonConvergent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexVerdict {
    pub n: u64,
    pub convex: bool,
    /// `"convex"`, `"no-interior"` or `"violated"`.
    pub certificate: &'static str,
    pub margin: Option<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcReport {
    /// `arc_measure` of the arc at every admitted index.
    pub trace: Vec<f64>,
    /// Sum of the target weights of the crossed leaves.
    pub limit: f64,
    pub terminal_error: f64,
    pub converges: bool,
    /// Crossed leaves whose target weight is π.
    pub dirac_pi: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyReport {
    pub indices: Vec<IndexVerdict>,
    /// Indices dropped because a flat leaves another flat's support
    /// half-space.
    pub excluded: Vec<u64>,
    pub classification: LimitClass,
    /// Whether the last index of the range is admitted and confirms the
    /// classification: coplanarity for an even limit, a stable interior
    /// witness for a convex one.
    pub verified: bool,
    pub terminal_residual: f64,
    /// Coplanarity residual extrapolated to [`EXTRAPOLATION_INDEX`].
    pub extrapolated_residual: f64,
    pub terminal_margin: Option<f64>,
    pub arcs: Vec<ArcReport>,
}

/// Residual at `EXTRAPOLATION_INDEX` from the power law fitted to the tail,
/// never above the last observed value.
fn extrapolate(points: &[(f64, f64)]) -> f64 {
    let Some(&(n_last, r_last)) = points.last() else {
        return f64::INFINITY;
    };
    if r_last == 0.0 || n_last >= EXTRAPOLATION_INDEX {
        return r_last;
    }
    match loglog_slope(points) {
        Some(p) if p < 0.0 => (r_last * (EXTRAPOLATION_INDEX / n_last).powf(p)).min(r_last),
        _ => r_last,
    }
}

/// Run a family along its index range and classify its limit by the
/// weight-path targets, then check the terminal index against that class.
///
/// Indices whose surface is not locally convex are excluded; indices whose
/// support half-spaces only lack an interior (the even case) are kept.
pub fn run_dichotomy(spec: &FamilySpec, arcs: &[Arc2], tail: usize, tol: f64) -> Result<DichotomyReport, SeqError> {
    if spec.first > spec.last || spec.first == 0 {
        return Err(SeqError::EmptyRange(spec.first, spec.last));
    }
    let mut indices = Vec::new();
    let mut excluded = Vec::new();
    let mut surfaces: Vec<(u64, PleatedSurface, Option<crate::hypgeom::MinkowskiPoint>)> = Vec::new();
    for n in spec.first..=spec.last {
        let ps = spec.surface_at(n)?;
        let c = is_convex(&ps);
        let (certificate, margin, witness) = match c.certificate {
            ConvexityCertificate::Convex { margin, witness, .. } => ("convex", Some(margin), Some(witness)),
            ConvexityCertificate::NoInterior { best_margin } => ("no-interior", Some(best_margin), None),
            ConvexityCertificate::Violated { .. } => ("violated", None, None),
        };
        if certificate == "violated" {
            excluded.push(n);
            continue;
        }
        indices.push(IndexVerdict { n, convex: c.convex, certificate, margin, residual: coplanarity_residual(&ps) });
        surfaces.push((n, ps, witness));
    }
    if surfaces.is_empty() {
        return Err(SeqError::NoAdmissibleIndex);
    }

    let targets: Vec<Option<f64>> = spec.leaves.iter().map(|l| l.path.target()).collect();
    let classification = if targets.iter().any(Option::is_none) {
        LimitClass::NonConvergent
    } else if targets.iter().all(|t| (t.unwrap() - PI).abs() <= PI_COMPARE_TOL) && !targets.is_empty() {
        LimitClass::Even
    } else {
        LimitClass::Convex
    };

    let tail_start = indices.len().saturating_sub(tail.max(2));
    let tail_points: Vec<(f64, f64)> = indices[tail_start..].iter().map(|v| (v.n as f64, v.residual)).collect();
    let terminal = indices.last().expect("non-empty");
    let terminal_residual = terminal.residual;
    let extrapolated_residual = extrapolate(&tail_points);
    let terminal_margin = terminal.margin;

    let terminal_admitted = terminal.n == spec.last;
    let verified = terminal_admitted
        && match classification {
        LimitClass::Even => extrapolated_residual <= EVEN_RESIDUAL_TOL,
        LimitClass::Convex => {
            let (_, _, witness) = &surfaces[surfaces.len() - 1];
            match (witness, surfaces.len()) {
                (Some(w), k) if k >= 2 => witness_margin(&surfaces[k - 2].1, w) >= INTERIOR_MARGIN,
                (Some(_), _) => true,
                (None, _) => false,
            }
        }
        LimitClass::NonConvergent => false,
    };

    let mut arc_reports = Vec::with_capacity(arcs.len());
    for k in arcs {
        let mut trace = Vec::with_capacity(surfaces.len());
        for (_, ps, _) in &surfaces {
            trace.push(arc_measure(k, ps.lamination())?);
        }
        let crossed = crossings(k, surfaces[0].1.lamination())?;
        let mut limit = 0.0;
        let mut dirac_pi = Vec::new();
        for c in &crossed {
            let t = targets[c.leaf].unwrap_or(f64::NAN);
            limit += t;
            if (t - PI).abs() <= PI_COMPARE_TOL {
                dirac_pi.push(c.id.clone());
            }
        }
        let terminal_error = (trace.last().expect("non-empty") - limit).abs();
        arc_reports.push(ArcReport { trace, limit, terminal_error, converges: terminal_error <= tol, dirac_pi });
    }

    Ok(DichotomyReport {
        indices,
        excluded,
        classification,
        verified,
        terminal_residual,
        extrapolated_residual,
        terminal_margin,
        arcs: arc_reports,
    })
}

/// Largest distance of the sampled surface from the base plane.
pub fn flat_image_check(ps: &PleatedSurface) -> Result<f64, SeqError> {
    if ps.lamination().is_empty() {
        return Err(SeqError::EmptyLamination);
    }
    Ok(coplanarity_residual(ps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypgeom::{MinkowskiPoint, Vec4};
    use crate::lam2::orthogonal_leaf_angles;

    fn orth(id: &str, x0: f64, path: WeightPath) -> FamilyLeaf {
        let (theta1, theta2) = orthogonal_leaf_angles(x0);
        FamilyLeaf { id: id.into(), theta1, theta2, path }
    }

    fn x_arc(a: f64, b: f64) -> Arc2 {
        let o = MinkowskiPoint::basepoint();
        let ex = Vec4::new(0.0, 1.0, 0.0, 0.0);
        Arc2::new(o.exp(&ex, a), o.exp(&ex, b)).unwrap()
    }

    #[test]
    fn weight_paths() {
        assert_eq!(WeightPath::HarmonicApproach { target: 2.0 }.weight(3), 1.5);
        assert_eq!(WeightPath::GeometricApproach { target: PI, ratio: 0.5 }.weight(80), PI);
        assert_eq!(WeightPath::Oscillating { low: 0.1, high: 0.2 }.target(), None);
        let bad = FamilySpec {
            leaves: vec![orth("a", 0.5, WeightPath::Constant { weight: 3.5 })],
            first: 1,
            last: 3,
            side: BendSide::Plus,
        };
        assert!(matches!(bad.lamination_at(1), Err(SeqError::WeightOutOfRange { .. })));
    }

    #[test]
    fn constant_family_is_convex() {
        let spec = FamilySpec {
            leaves: vec![
                orth("a", -0.8, WeightPath::Constant { weight: 0.4 }),
                orth("b", 0.7, WeightPath::Constant { weight: 0.4 }),
            ],
            first: 1,
            last: 12,
            side: BendSide::Plus,
        };
        let arcs = [x_arc(-1.5, 1.5), x_arc(0.0, 1.5)];
        let r = run_dichotomy(&spec, &arcs, 10, 1e-6).unwrap();
        assert_eq!(r.classification, LimitClass::Convex);
        assert!(r.verified);
        assert!(r.excluded.is_empty());
        assert_eq!(r.arcs[0].limit, 0.8);
        assert_eq!(r.arcs[1].limit, 0.4);
        assert!(r.arcs.iter().all(|a| a.converges && a.dirac_pi.is_empty()));
    }

    #[test]
    fn harmonic_pi_family_is_even_with_decaying_residual() {
        let spec = FamilySpec {
            leaves: vec![orth("a", 0.3, WeightPath::HarmonicApproach { target: PI })],
            first: 1,
            last: 40,
            side: BendSide::Minus,
        };
        let r = run_dichotomy(&spec, &[x_arc(-1.0, 1.0)], 10, 1e-6).unwrap();
        assert_eq!(r.classification, LimitClass::Even);
        assert_eq!(r.arcs[0].dirac_pi, vec!["a".to_string()]);
        // residual ~ C/n, so it decreases along the range
        for w in r.indices.windows(2) {
            assert!(w[1].residual <= w[0].residual * 1.1);
        }
        let tail: Vec<_> = r.indices[30..].iter().map(|v| (v.n as f64, v.residual)).collect();
        let p = loglog_slope(&tail).unwrap();
        assert!((p + 1.0).abs() < 0.1, "{p}");
    }

    #[test]
    fn mixed_targets_below_pi_converge_to_mixed_sums() {
        let spec = FamilySpec {
            leaves: vec![
                orth("a", -0.8, WeightPath::GeometricApproach { target: 1.2, ratio: 0.5 }),
                orth("b", 0.9, WeightPath::Constant { weight: 0.4 }),
            ],
            first: 1,
            last: 40,
            side: BendSide::Plus,
        };
        let r = run_dichotomy(&spec, &[x_arc(-1.5, 1.5), x_arc(-1.5, 0.0)], 10, 1e-9).unwrap();
        assert_eq!(r.classification, LimitClass::Convex);
        assert!(r.verified);
        assert!((r.arcs[0].limit - 1.6).abs() < 1e-15);
        assert!(r.arcs.iter().all(|a| a.converges));
    }

    #[test]
    fn a_pi_target_beside_a_lighter_leaf_loses_convexity() {
        // the flap beyond a π-fold is reflected onto the whole other side and
        // pokes out of the support half-space of the lighter fold
        let spec = FamilySpec {
            leaves: vec![
                orth("a", -0.8, WeightPath::GeometricApproach { target: PI, ratio: 0.5 }),
                orth("b", 0.9, WeightPath::Constant { weight: 0.4 }),
            ],
            first: 1,
            last: 30,
            side: BendSide::Plus,
        };
        let r = run_dichotomy(&spec, &[x_arc(-1.5, 1.5)], 10, 1e-6).unwrap();
        assert_eq!(r.classification, LimitClass::Convex);
        assert_eq!(r.indices[0].certificate, "convex");
        assert_eq!(r.excluded.last(), Some(&30));
        assert!(!r.verified);
        assert_eq!(r.arcs[0].dirac_pi, vec!["a".to_string()]);
    }

    #[test]
    fn traces_match_arc_measure() {
        let spec = FamilySpec {
            leaves: vec![
                orth("a", -0.8, WeightPath::HarmonicApproach { target: 0.5 }),
                orth("b", 0.7, WeightPath::GeometricApproach { target: 0.3, ratio: 0.7 }),
            ],
            first: 3,
            last: 9,
            side: BendSide::Plus,
        };
        let k = x_arc(-1.5, 1.0);
        let r = run_dichotomy(&spec, &[k], 10, 1e-6).unwrap();
        for (v, t) in r.indices.iter().zip(&r.arcs[0].trace) {
            assert_eq!(*t, arc_measure(&k, &spec.lamination_at(v.n).unwrap()).unwrap());
        }
    }

    #[test]
    fn oscillating_path_is_non_convergent() {
        let spec = FamilySpec {
            leaves: vec![orth("a", 0.0, WeightPath::Oscillating { low: 0.2, high: 0.6 })],
            first: 1,
            last: 6,
            side: BendSide::Plus,
        };
        let r = run_dichotomy(&spec, &[], 10, 1e-6).unwrap();
        assert_eq!(r.classification, LimitClass::NonConvergent);
        assert!(!r.verified);
    }

    #[test]
    fn flat_image_examples() {
        let (a, b) = orthogonal_leaf_angles(0.2);
        let (c, d) = orthogonal_leaf_angles(-1.0);
        let make = |w1: f64, w2: f64| {
            let lam = FiniteLamination2::new(vec![
                Leaf2::new("a", a, b, w1).unwrap(),
                Leaf2::new("c", c, d, w2).unwrap(),
            ])
            .unwrap();
            build_pleated(BendingData::new(lam, BendSide::Plus).unwrap())
        };
        assert!(flat_image_check(&make(PI, PI)).unwrap() <= 1e-9);
        assert!(flat_image_check(&make(PI, PI - 1e-3)).unwrap() > 1e-4);
        let empty = build_pleated(BendingData::new(FiniteLamination2::empty(), BendSide::Plus).unwrap());
        assert_eq!(flat_image_check(&empty), Err(SeqError::EmptyLamination));
    }
}
