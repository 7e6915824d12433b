//! Measured laminations modulo truncation of closed-leaf weights at π.
//!
//! Laminations here are abstract atomic measures: a list of leaf ids, each
//! marked closed or not, with a positive weight. Test arcs are finite lists
//! of crossings, and `∫_k dλ` is the weighted count of crossings. Two
//! laminations are R-equivalent when they agree after every closed-leaf
//! weight above π is replaced by π.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypgeom::MinkowskiPoint;
use crate::lam2::{directed_window_gap, windowed_hausdorff, FiniteLamination2};
use crate::tolerance::PI_COMPARE_TOL;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RqError {
    #[error("duplicate leaf id {0}")]
    DuplicateId(String),
    #[error("leaf {id}: weight {weight} is not positive")]
    BadWeight { id: String, weight: f64 },
    #[error("arc crosses {0} with multiplicity 0")]
    ZeroMultiplicity(String),
    #[error("arc pool lacks single-crossing arcs for {0:?}; cannot decide")]
    CannotDecide(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbstractLeaf {
    pub id: String,
    pub closed: bool,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<AbstractLeaf>", into = "Vec<AbstractLeaf>")]
pub struct AbstractLamination {
    leaves: Vec<AbstractLeaf>,
}

impl TryFrom<Vec<AbstractLeaf>> for AbstractLamination {
    type Error = RqError;
    fn try_from(leaves: Vec<AbstractLeaf>) -> Result<Self, RqError> {
        Self::new(leaves)
    }
}

impl From<AbstractLamination> for Vec<AbstractLeaf> {
    fn from(l: AbstractLamination) -> Self {
        l.leaves
    }
}

impl AbstractLamination {
    pub fn new(leaves: Vec<AbstractLeaf>) -> Result<Self, RqError> {
        let mut ids = BTreeSet::new();
        for l in &leaves {
            if !ids.insert(l.id.as_str()) {
                return Err(RqError::DuplicateId(l.id.clone()));
            }
            if !(l.weight > 0.0) || !l.weight.is_finite() {
                return Err(RqError::BadWeight { id: l.id.clone(), weight: l.weight });
            }
        }
        Ok(Self { leaves })
    }

    /// Shorthand for `(id, closed, weight)` triples.
    pub fn from_triples<'a>(items: impl IntoIterator<Item = (&'a str, bool, f64)>) -> Result<Self, RqError> {
        Self::new(
            items
                .into_iter()
                .map(|(id, closed, weight)| AbstractLeaf { id: id.to_string(), closed, weight })
                .collect(),
        )
    }

    pub fn leaves(&self) -> &[AbstractLeaf] {
        &self.leaves
    }

    pub fn weight(&self, id: &str) -> Option<f64> {
        self.leaves.iter().find(|l| l.id == id).map(|l| l.weight)
    }

    pub fn weight_map(&self) -> BTreeMap<&str, f64> {
        self.leaves.iter().map(|l| (l.id.as_str(), l.weight)).collect()
    }
}

/// An R-class, stored as its representative with closed-leaf weights ≤ π.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RClass {
    canonical: AbstractLamination,
}

impl RClass {
    pub fn canonical(&self) -> &AbstractLamination {
        &self.canonical
    }
}

/// Replace every closed-leaf weight above π by π.
pub fn truncate(lam: &AbstractLamination) -> RClass {
    let leaves = lam
        .leaves
        .iter()
        .map(|l| AbstractLeaf {
            weight: if l.closed { l.weight.min(PI) } else { l.weight },
            ..l.clone()
        })
        .collect();
    RClass { canonical: AbstractLamination { leaves } }
}

pub fn r_equivalent(a: &AbstractLamination, b: &AbstractLamination) -> bool {
    truncate(a).canonical.weight_map() == truncate(b).canonical.weight_map()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PiMode {
    StrictlyGreater,
    AtLeast,
}

/// Closed leaves whose weight passes the π threshold.
pub fn pi_part(lam: &AbstractLamination, mode: PiMode) -> BTreeSet<String> {
    lam.leaves
        .iter()
        .filter(|l| {
            l.closed
                && match mode {
                    PiMode::StrictlyGreater => l.weight > PI + PI_COMPARE_TOL,
                    PiMode::AtLeast => l.weight >= PI - PI_COMPARE_TOL,
                }
        })
        .map(|l| l.id.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, u32)>", into = "Vec<(String, u32)>")]
pub struct TestArc {
    crossings: Vec<(String, u32)>,
}

impl TryFrom<Vec<(String, u32)>> for TestArc {
    type Error = RqError;
    fn try_from(c: Vec<(String, u32)>) -> Result<Self, RqError> {
        Self::new(c)
    }
}

impl From<TestArc> for Vec<(String, u32)> {
    fn from(a: TestArc) -> Self {
        a.crossings
    }
}

impl TestArc {
    pub fn new(crossings: Vec<(String, u32)>) -> Result<Self, RqError> {
        if let Some((id, _)) = crossings.iter().find(|c| c.1 == 0) {
            return Err(RqError::ZeroMultiplicity(id.clone()));
        }
        Ok(Self { crossings })
    }

    pub fn single(id: &str) -> Self {
        Self { crossings: vec![(id.to_string(), 1)] }
    }

    pub fn crossings(&self) -> &[(String, u32)] {
        &self.crossings
    }

    pub fn crosses_any(&self, ids: &BTreeSet<String>) -> bool {
        self.crossings.iter().any(|(id, _)| ids.contains(id))
    }

    fn is_single(&self) -> Option<&str> {
        match self.crossings.as_slice() {
            [(id, 1)] => Some(id),
            _ => None,
        }
    }
}

/// `∫_k dλ = Σ multiplicity · weight`; ids absent from `λ` contribute 0.
pub fn arc_integral(k: &TestArc, lam: &AbstractLamination) -> f64 {
    k.crossings.iter().map(|(id, m)| *m as f64 * lam.weight(id).unwrap_or(0.0)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcTrace {
    pub arc: TestArc,
    pub crosses_pi_part: bool,
    /// `∫_k dλ′` for the truncated candidate.
    pub limit: f64,
    pub trace: Vec<f64>,
    /// Largest `|∫_k dλ_n − limit|` over the tail; only required to be
    /// small on arcs avoiding the π-part.
    pub tail_error: f64,
    pub tail_inf: f64,
    pub converges: bool,
    pub liminf_ok: bool,
}

impl ArcTrace {
    pub fn passed(&self) -> bool {
        self.liminf_ok && (self.crosses_pi_part || self.converges)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientConvergenceReport {
    pub passed: bool,
    pub pi_part: Vec<String>,
    pub arcs: Vec<ArcTrace>,
    /// Index into `arcs` of the first failing arc.
    pub witness: Option<usize>,
}

/// Check that `λ_n → λ` in the quotient along the given arcs: arcs avoiding
/// the π-part of `λ′` must have `∫_k dλ_n → ∫_k dλ′`, and every arc must have
/// `inf_tail ∫_k dλ_n ≥ ∫_k dλ′ − tol`.
pub fn quotient_convergence_check(
    sequence: &[AbstractLamination],
    candidate: &AbstractLamination,
    arcs: &[TestArc],
    tol: f64,
    tail: usize,
) -> QuotientConvergenceReport {
    let limit_lam = truncate(candidate).canonical;
    let pi = pi_part(&limit_lam, PiMode::AtLeast);
    let start = sequence.len().saturating_sub(tail.max(1));
    let arcs: Vec<ArcTrace> = arcs
        .iter()
        .map(|k| {
            let limit = arc_integral(k, &limit_lam);
            let trace: Vec<f64> = sequence.iter().map(|l| arc_integral(k, l)).collect();
            let tail_vals = &trace[start..];
            let tail_error = tail_vals.iter().map(|v| (v - limit).abs()).fold(0.0, f64::max);
            let tail_inf = tail_vals.iter().copied().fold(f64::INFINITY, f64::min);
            ArcTrace {
                arc: k.clone(),
                crosses_pi_part: k.crosses_any(&pi),
                limit,
                converges: !tail_vals.is_empty() && tail_error <= tol,
                liminf_ok: !tail_vals.is_empty() && tail_inf >= limit - tol,
                trace,
                tail_error,
                tail_inf,
            }
        })
        .collect();
    let witness = arcs.iter().position(|a| !a.passed());
    QuotientConvergenceReport { passed: witness.is_none(), pi_part: pi.into_iter().collect(), arcs, witness }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Separation {
    Equal,
    Separated { arc: TestArc, gap: f64 },
}

/// An arc of `pool` on which the canonical representatives of two classes
/// have different integrals, preferring arcs that avoid both π-parts, then
/// the largest difference, then the fewest crossings.
pub fn separation_witness(a: &RClass, b: &RClass, pool: &[TestArc]) -> Result<Separation, RqError> {
    let (la, lb) = (&a.canonical, &b.canonical);
    if la.weight_map() == lb.weight_map() {
        return Ok(Separation::Equal);
    }
    let singles: BTreeSet<&str> = pool.iter().filter_map(TestArc::is_single).collect();
    let missing: Vec<String> = la
        .leaves
        .iter()
        .chain(&lb.leaves)
        .map(|l| l.id.as_str())
        .filter(|id| !singles.contains(id))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(String::from)
        .collect();
    if !missing.is_empty() {
        return Err(RqError::CannotDecide(missing));
    }
    let mut pis = pi_part(la, PiMode::AtLeast);
    pis.extend(pi_part(lb, PiMode::AtLeast));
    let best = pool
        .iter()
        .map(|k| (k, (arc_integral(k, la) - arc_integral(k, lb)).abs()))
        .filter(|(_, g)| *g > 0.0)
        .max_by(|x, y| {
            let key = |p: &(&TestArc, f64)| !p.0.crosses_any(&pis);
            key(x)
                .cmp(&key(y))
                .then(x.1.total_cmp(&y.1))
                .then(y.0.crossings.len().cmp(&x.0.crossings.len()))
        });
    match best {
        Some((k, gap)) => Ok(Separation::Separated { arc: k.clone(), gap }),
        // the single-crossing arcs always see a weight difference
        None => unreachable!("differing weights show up on a single-crossing arc"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum InclusionVerdict {
    Pass,
    /// A point of the target support at distance `gap` from the terminal
    /// lamination.
    Fail { witness: MinkowskiPoint, gap: f64 },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionReport {
    pub verdict: InclusionVerdict,
    /// Largest distance from `|target|` to `|λ_n|` inside the window, per n.
    pub gaps: Vec<f64>,
    /// Windowed Hausdorff distance between consecutive supports.
    pub steps: Vec<f64>,
}

/// Check `|target| ⊂ lim |λ_n|` inside the ball of radius `radius`.
///
/// The supports are first required to settle: the last windowed Hausdorff
/// step must be at most `tol`. Then the target passes if the gap trace is
/// non-increasing over the tail (10% slack) and ends at most `tol`.
pub fn support_inclusion_check(
    sequence: &[FiniteLamination2],
    target: &FiniteLamination2,
    radius: f64,
    tol: f64,
    tail: usize,
) -> InclusionReport {
    let mut gaps = Vec::with_capacity(sequence.len());
    let mut last_witness = None;
    for l in sequence {
        let (g, w) = directed_window_gap(target, l, radius);
        gaps.push(g);
        last_witness = w;
    }
    let start = sequence.len().saturating_sub(tail.max(2));
    let steps: Vec<f64> = sequence[start..].windows(2).map(|w| windowed_hausdorff(&w[0], &w[1], radius)).collect();
    let verdict = match steps.last() {
        None => InclusionVerdict::Inconclusive { reason: "need at least two laminations".into() },
        Some(&s) if !(s <= tol) => InclusionVerdict::Inconclusive {
            reason: format!("supports have not settled: last windowed Hausdorff step {s:e}"),
        },
        Some(_) => {
            let tail_gaps = &gaps[start..];
            let monotone = tail_gaps.windows(2).all(|w| w[1] <= w[0] * 1.1 + tol);
            let last = *gaps.last().expect("non-empty");
            if last <= tol && monotone {
                InclusionVerdict::Pass
            } else {
                match last_witness {
                    Some(witness) if last > tol => InclusionVerdict::Fail { witness, gap: last },
                    _ => InclusionVerdict::Inconclusive { reason: "gap trace is not monotone".into() },
                }
            }
        }
    };
    InclusionReport { verdict, gaps, steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lam2::{distance_to_window, Leaf2, WindowSegment};

    fn lam(items: &[(&str, bool, f64)]) -> AbstractLamination {
        AbstractLamination::from_triples(items.iter().copied()).unwrap()
    }

    #[test]
    fn truncation_only_touches_heavy_closed_leaves() {
        let l = lam(&[("a", true, 0.3), ("b", false, 2.0)]);
        assert_eq!(truncate(&l).canonical(), &l);
        let l = lam(&[("c", true, 4.0), ("d", false, 4.0)]);
        let t = truncate(&l);
        assert_eq!(t.canonical().weight("c"), Some(PI));
        assert_eq!(t.canonical().weight("d"), Some(4.0));
    }

    #[test]
    fn equivalence_examples() {
        let a = lam(&[("c", true, 3.5), ("d", false, 0.3)]);
        let b = lam(&[("c", true, 5.0), ("d", false, 0.3)]);
        assert!(r_equivalent(&a, &a));
        assert!(r_equivalent(&a, &b));
        let a = lam(&[("c", true, 3.0)]);
        let b = lam(&[("c", true, 3.1)]);
        assert!(!r_equivalent(&a, &b));
    }

    #[test]
    fn pi_part_modes() {
        assert!(pi_part(&lam(&[("d", false, 4.0)]), PiMode::AtLeast).is_empty());
        let l = lam(&[("p", true, PI), ("q", true, 3.5), ("o", false, 4.0)]);
        assert_eq!(pi_part(&l, PiMode::AtLeast), BTreeSet::from(["p".into(), "q".into()]));
        assert_eq!(pi_part(&l, PiMode::StrictlyGreater), BTreeSet::from(["q".into()]));
    }

    #[test]
    fn arc_integral_is_atomic() {
        let l = lam(&[("a", false, 0.3)]);
        assert_eq!(arc_integral(&TestArc::new(vec![]).unwrap(), &l), 0.0);
        assert_eq!(arc_integral(&TestArc::new(vec![("a".into(), 2)]).unwrap(), &l), 0.6);
        assert_eq!(arc_integral(&TestArc::single("zz"), &l), 0.0);
        assert!(TestArc::new(vec![("a".into(), 0)]).is_err());
    }

    fn pool() -> Vec<TestArc> {
        vec![
            TestArc::single("c"),
            TestArc::single("d"),
            TestArc::single("e"),
            TestArc::new(vec![("c".into(), 1), ("d".into(), 1)]).unwrap(),
        ]
    }

    fn indices() -> impl Iterator<Item = f64> {
        (1..=40).map(|k| 2f64.powi(k))
    }

    #[test]
    fn two_sided_approach_to_pi_converges() {
        let limit = lam(&[("c", true, PI), ("d", false, 0.3)]);
        for sign in [1.0, -1.0] {
            let seq: Vec<_> = indices().map(|n| lam(&[("c", true, PI + sign / n), ("d", false, 0.3)])).collect();
            let r = quotient_convergence_check(&seq, &limit, &pool(), 1e-6, 10);
            assert!(r.passed, "{r:?}");
            assert_eq!(r.pi_part, vec!["c".to_string()]);
        }
        let constant = vec![limit.clone(); 12];
        assert!(quotient_convergence_check(&constant, &limit, &pool(), 1e-6, 10).passed);
    }

    #[test]
    fn wrong_open_weight_fails_with_witness() {
        let limit = lam(&[("c", true, PI), ("d", false, 0.3)]);
        let seq: Vec<_> = indices().map(|n| lam(&[("c", true, PI), ("d", false, 0.5 + 1.0 / n)])).collect();
        let r = quotient_convergence_check(&seq, &limit, &pool(), 1e-6, 10);
        assert!(!r.passed);
        let w = &r.arcs[r.witness.unwrap()];
        assert_eq!(w.arc, TestArc::single("d"));
    }

    #[test]
    fn separation_examples() {
        let a = truncate(&lam(&[("c", true, 3.5), ("d", false, 0.3)]));
        let b = truncate(&lam(&[("c", true, 5.0), ("d", false, 0.5)]));
        assert_eq!(separation_witness(&a, &a, &pool()).unwrap(), Separation::Equal);
        match separation_witness(&a, &b, &pool()).unwrap() {
            Separation::Separated { arc, gap } => {
                assert_eq!(arc, TestArc::single("d"));
                assert!((gap - 0.2).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        // different π-parts: only the symmetric-difference leaf separates
        let a = truncate(&lam(&[("c", true, 4.0), ("d", false, 0.3)]));
        let b = truncate(&lam(&[("e", true, 4.0), ("d", false, 0.3)]));
        match separation_witness(&a, &b, &pool()).unwrap() {
            Separation::Separated { arc, gap } => {
                assert!(arc == TestArc::single("c") || arc == TestArc::single("e"));
                assert_eq!(gap, PI);
            }
            other => panic!("{other:?}"),
        }
        let short = vec![TestArc::single("c")];
        assert!(matches!(separation_witness(&a, &b, &short), Err(RqError::CannotDecide(_))));
    }

    fn geo(items: &[(&str, f64, f64)]) -> FiniteLamination2 {
        FiniteLamination2::new(items.iter().map(|&(id, a, b)| Leaf2::new(id, a, b, 1.0).unwrap()).collect()).unwrap()
    }

    #[test]
    fn support_inclusion_examples() {
        let target = geo(&[("x", 0.5, 2.5), ("y", 3.5, 5.0)]);
        let constant = vec![target.clone(); 5];
        let r = support_inclusion_check(&constant, &target, 5.0, 1e-6, 10);
        assert_eq!(r.verdict, InclusionVerdict::Pass);
        assert!(r.gaps.iter().all(|g| *g < 1e-9));

        let seq: Vec<_> = (10..=32)
            .map(|k| {
                let h = 2f64.powi(-k);
                geo(&[("x", 0.5 + h, 2.5 - h), ("y", 3.5, 5.0 + h)])
            })
            .collect();
        let r = support_inclusion_check(&seq, &target, 5.0, 1e-6, 10);
        assert_eq!(r.verdict, InclusionVerdict::Pass, "{:?}", r.gaps);
        // gap halves with h
        let g = &r.gaps;
        assert!((g[5] / g[6] - 2.0).abs() < 0.1, "{g:?}");

        let missing = vec![geo(&[("x", 0.5, 2.5)]); 5];
        match support_inclusion_check(&missing, &target, 5.0, 1e-6, 10).verdict {
            InclusionVerdict::Fail { witness, gap } => {
                assert!(gap > 0.1);
                let y = Leaf2::new("y", 3.5, 5.0, 1.0).unwrap();
                let seg = WindowSegment::of_leaf(&y, 5.0).unwrap();
                assert!(distance_to_window(&witness, &seg) < 1e-9);
            }
            other => panic!("{other:?}"),
        }

        let wobble: Vec<_> = (0..6).map(|i| geo(&[("x", 0.5 + 0.1 * (i % 2) as f64, 2.5)])).collect();
        assert!(matches!(
            support_inclusion_check(&wobble, &target, 5.0, 1e-6, 10).verdict,
            InclusionVerdict::Inconclusive { .. }
        ));
    }
}
