//! Combinatorial train tracks, branch measures and the intersection number of
//! a measure with a curve carried by a loop subtrack.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackError {
    #[error("duplicate branch id {0}")]
    DuplicateBranch(String),
    #[error("duplicate switch id {0}")]
    DuplicateSwitch(String),
    #[error("unknown branch id {0}")]
    UnknownBranch(String),
    #[error("branch {branch} has {starts} start end(s) and {ends} terminal end(s) placed; need one of each")]
    EndCount { branch: String, starts: usize, ends: usize },
    #[error("switch {0} has an empty side")]
    IsolatedSwitch(String),
    #[error("measure has no weight for branch {0}")]
    MissingBranch(String),
    #[error("branch {branch} has negative weight {weight}")]
    NegativeWeight { branch: String, weight: f64 },
    #[error("switch condition fails at switch {0}")]
    SwitchCondition(String),
    #[error("subtrack is not a loop carrier: {0}")]
    NotLoopCarrier(String),
    #[error("subtrack switch {0} lost every end on one side")]
    NotSubtrack(String),
}

/// Arithmetic needed of branch weights. Reals compare with an absolute
/// tolerance of 1e-12, rationals exactly.
pub trait Weight: Clone + Debug + PartialOrd + Zero + std::ops::Mul<Output = Self> {
    fn balanced(a: &Self, b: &Self) -> bool;
    fn half(&self) -> Self;
    fn to_f64(&self) -> f64;
}

impl Weight for f64 {
    fn balanced(a: &Self, b: &Self) -> bool {
        (a - b).abs() <= 1e-12
    }
    fn half(&self) -> Self {
        self / 2.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Weight for Ratio<i64> {
    fn balanced(a: &Self, b: &Self) -> bool {
        a == b
    }
    fn half(&self) -> Self {
        self / Ratio::from_integer(2)
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndKind {
    Start,
    End,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchEnd {
    pub branch: String,
    pub end: EndKind,
}

impl BranchEnd {
    pub fn start(branch: &str) -> Self {
        Self { branch: branch.to_string(), end: EndKind::Start }
    }

    pub fn end(branch: &str) -> Self {
        Self { branch: branch.to_string(), end: EndKind::End }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Switch {
    pub id: String,
    pub side_a: Vec<BranchEnd>,
    pub side_b: Vec<BranchEnd>,
}

impl Switch {
    fn ends(&self) -> impl Iterator<Item = &BranchEnd> {
        self.side_a.iter().chain(&self.side_b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTrack", into = "RawTrack")]
pub struct TrainTrack {
    branches: Vec<String>,
    switches: Vec<Switch>,
}

#[derive(Serialize, Deserialize)]
struct RawTrack {
    branches: Vec<String>,
    switches: Vec<Switch>,
}

impl TryFrom<RawTrack> for TrainTrack {
    type Error = TrackError;
    fn try_from(raw: RawTrack) -> Result<Self, TrackError> {
        Self::new(raw.branches, raw.switches)
    }
}

impl From<TrainTrack> for RawTrack {
    fn from(t: TrainTrack) -> Self {
        RawTrack { branches: t.branches, switches: t.switches }
    }
}

impl TrainTrack {
    pub fn new(branches: Vec<String>, switches: Vec<Switch>) -> Result<Self, TrackError> {
        let mut seen = BTreeSet::new();
        for b in &branches {
            if !seen.insert(b.as_str()) {
                return Err(TrackError::DuplicateBranch(b.clone()));
            }
        }
        let mut switch_ids = BTreeSet::new();
        let mut counts: BTreeMap<&str, (usize, usize)> = branches.iter().map(|b| (b.as_str(), (0, 0))).collect();
        for s in &switches {
            if !switch_ids.insert(s.id.as_str()) {
                return Err(TrackError::DuplicateSwitch(s.id.clone()));
            }
            if s.side_a.is_empty() || s.side_b.is_empty() {
                return Err(TrackError::IsolatedSwitch(s.id.clone()));
            }
            for e in s.ends() {
                let c = counts
                    .get_mut(e.branch.as_str())
                    .ok_or_else(|| TrackError::UnknownBranch(e.branch.clone()))?;
                match e.end {
                    EndKind::Start => c.0 += 1,
                    EndKind::End => c.1 += 1,
                }
            }
        }
        for (b, (starts, ends)) in counts {
            if starts != 1 || ends != 1 {
                return Err(TrackError::EndCount { branch: b.to_string(), starts, ends });
            }
        }
        Ok(Self { branches, switches })
    }

    pub fn branches(&self) -> &[String] {
        &self.branches
    }

    pub fn switches(&self) -> &[Switch] {
        &self.switches
    }

    pub fn has_branch(&self, id: &str) -> bool {
        self.branches.iter().any(|b| b == id)
    }
}

/// Nonnegative weights on the branches of a track.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BranchMeasure<W> {
    pub weights: BTreeMap<String, W>,
}

impl<W: Weight> BranchMeasure<W> {
    pub fn new(weights: impl IntoIterator<Item = (impl Into<String>, W)>) -> Self {
        Self { weights: weights.into_iter().map(|(k, w)| (k.into(), w)).collect() }
    }

    pub fn zero(track: &TrainTrack) -> Self {
        Self::new(track.branches.iter().map(|b| (b.as_str(), W::zero())))
    }

    pub fn scaled(&self, t: &W) -> Self {
        Self { weights: self.weights.iter().map(|(k, w)| (k.clone(), w.clone() * t.clone())).collect() }
    }

    /// `a·self + b·other` over the union of ids.
    pub fn combine(&self, a: &W, other: &Self, b: &W) -> Self {
        let mut out: BTreeMap<String, W> = BTreeMap::new();
        for (k, w) in &self.weights {
            out.insert(k.clone(), w.clone() * a.clone());
        }
        for (k, w) in &other.weights {
            let e = out.entry(k.clone()).or_insert_with(W::zero);
            *e = e.clone() + w.clone() * b.clone();
        }
        Self { weights: out }
    }

    fn get(&self, id: &str) -> Result<&W, TrackError> {
        self.weights.get(id).ok_or_else(|| TrackError::MissingBranch(id.to_string()))
    }
}

fn check_ids<W: Weight>(track: &TrainTrack, m: &BranchMeasure<W>) -> Result<(), TrackError> {
    for (id, w) in &m.weights {
        if !track.has_branch(id) {
            return Err(TrackError::UnknownBranch(id.clone()));
        }
        if *w < W::zero() {
            return Err(TrackError::NegativeWeight { branch: id.clone(), weight: w.to_f64() });
        }
    }
    for b in &track.branches {
        m.get(b)?;
    }
    Ok(())
}

fn side_sum<W: Weight>(side: &[BranchEnd], m: &BranchMeasure<W>) -> Result<W, TrackError> {
    side.iter().try_fold(W::zero(), |acc, e| Ok(acc + m.get(&e.branch)?.clone()))
}

/// `true` iff the switch condition holds at every switch.
pub fn validate_measure<W: Weight>(track: &TrainTrack, m: &BranchMeasure<W>) -> Result<bool, TrackError> {
    check_ids(track, m)?;
    for s in &track.switches {
        if !W::balanced(&side_sum(&s.side_a, m)?, &side_sum(&s.side_b, m)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Measure of any tie of `branch`.
pub fn tie_measure<W: Weight>(track: &TrainTrack, m: &BranchMeasure<W>, branch: &str) -> Result<W, TrackError> {
    if !track.has_branch(branch) {
        return Err(TrackError::UnknownBranch(branch.to_string()));
    }
    Ok(m.get(branch)?.clone())
}

/// A set of branches such that every switch it touches keeps at least one
/// end on each side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subtrack {
    branches: BTreeSet<String>,
}

impl Subtrack {
    pub fn new(track: &TrainTrack, ids: impl IntoIterator<Item = impl Into<String>>) -> Result<Self, TrackError> {
        let branches: BTreeSet<String> = ids.into_iter().map(Into::into).collect();
        for b in &branches {
            if !track.has_branch(b) {
                return Err(TrackError::UnknownBranch(b.clone()));
            }
        }
        let sub = Self { branches };
        for s in &track.switches {
            let a = sub.kept(&s.side_a);
            let b = sub.kept(&s.side_b);
            if (a > 0) != (b > 0) {
                return Err(TrackError::NotSubtrack(s.id.clone()));
            }
        }
        Ok(sub)
    }

    pub fn branches(&self) -> &BTreeSet<String> {
        &self.branches
    }

    pub fn contains(&self, id: &str) -> bool {
        self.branches.contains(id)
    }

    fn kept(&self, side: &[BranchEnd]) -> usize {
        side.iter().filter(|e| self.contains(&e.branch)).count()
    }

    fn touches(&self, s: &Switch) -> bool {
        s.ends().any(|e| self.contains(&e.branch))
    }

    /// The subtrack as a train track in its own right.
    pub fn restrict(&self, track: &TrainTrack) -> Result<TrainTrack, TrackError> {
        let keep = |side: &[BranchEnd]| side.iter().filter(|e| self.contains(&e.branch)).cloned().collect();
        let switches = track
            .switches
            .iter()
            .filter(|s| self.touches(s))
            .map(|s| Switch { id: s.id.clone(), side_a: keep(&s.side_a), side_b: keep(&s.side_b) })
            .collect();
        let branches = track.branches.iter().filter(|b| self.contains(b)).cloned().collect();
        TrainTrack::new(branches, switches)
    }

    /// Checks that the subtrack is a single cycle passing straight through
    /// each of its switches, so it carries one simple closed curve with
    /// weight one on every branch.
    pub fn check_loop_carrier(&self, track: &TrainTrack) -> Result<(), TrackError> {
        if self.branches.is_empty() {
            return Err(TrackError::NotLoopCarrier("no branches".into()));
        }
        // switch id of each (branch, end)
        let mut at: BTreeMap<(&str, EndKind), &Switch> = BTreeMap::new();
        for s in track.switches.iter().filter(|s| self.touches(s)) {
            if self.kept(&s.side_a) != 1 || self.kept(&s.side_b) != 1 {
                return Err(TrackError::NotLoopCarrier(format!("switch {} is not traversed straight through", s.id)));
            }
            for e in s.ends().filter(|e| self.contains(&e.branch)) {
                at.insert((e.branch.as_str(), e.end), s);
            }
        }
        // follow the cycle from the first branch
        let first = self.branches.iter().next().expect("non-empty").as_str();
        let mut visited = BTreeSet::new();
        let mut branch = first;
        let mut leaving = EndKind::End;
        loop {
            if !visited.insert(branch) {
                break;
            }
            let s = at[&(branch, leaving)];
            let (here, there) = if s.side_a.iter().any(|e| e.branch == branch && e.end == leaving) {
                (&s.side_a, &s.side_b)
            } else {
                (&s.side_b, &s.side_a)
            };
            debug_assert!(here.iter().any(|e| e.branch == branch));
            let next = there.iter().find(|e| self.contains(&e.branch)).expect("one kept end per side");
            branch = next.branch.as_str();
            leaving = match next.end {
                EndKind::Start => EndKind::End,
                EndKind::End => EndKind::Start,
            };
        }
        if visited.len() != self.branches.len() {
            return Err(TrackError::NotLoopCarrier(format!(
                "the cycle through {first} covers {} of {} branches",
                visited.len(),
                self.branches.len()
            )));
        }
        Ok(())
    }
}

/// Branches outside `sub` with at least one end at a switch of `sub`. Each
/// branch is listed once even when both of its ends meet the subtrack.
pub fn incident_branches(track: &TrainTrack, sub: &Subtrack) -> BTreeSet<String> {
    track
        .switches
        .iter()
        .filter(|s| sub.touches(s))
        .flat_map(|s| s.ends())
        .filter(|e| !sub.contains(&e.branch))
        .map(|e| e.branch.clone())
        .collect()
}

/// `i(c, m) = ½ Σ_{j ∈ J} m(b_j)` for the curve `c` carried by the loop
/// subtrack `sub`, where `J` is [`incident_branches`].
pub fn carried_intersection<W: Weight>(
    track: &TrainTrack,
    sub: &Subtrack,
    m: &BranchMeasure<W>,
) -> Result<W, TrackError> {
    sub.check_loop_carrier(track)?;
    if !validate_measure(track, m)? {
        let s = track
            .switches
            .iter()
            .find(|s| {
                !matches!((side_sum(&s.side_a, m), side_sum(&s.side_b, m)), (Ok(a), Ok(b)) if W::balanced(&a, &b))
            })
            .expect("some switch fails");
        return Err(TrackError::SwitchCondition(s.id.clone()));
    }
    let sum = incident_branches(track, sub)
        .iter()
        .try_fold(W::zero(), |acc, b| Ok::<_, TrackError>(acc + m.get(b)?.clone()))?;
    Ok(sum.half())
}

/// Per-branch tail behaviour of a measure sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchVerdict {
    pub branch: String,
    pub converges: bool,
    /// Largest `|m_n(b) - m(b)|` over the tail window.
    pub tail_error: f64,
    /// Least-squares slope of `log |m_n(b) - m(b)|` against `log n` over the
    /// tail, `None` when the errors vanish. About -1 for a `1/n` approach.
    pub decay_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchConvergenceReport {
    pub converged: bool,
    pub branches: Vec<BranchVerdict>,
    pub excluded: Vec<String>,
}

/// Tail convergence `m_n(b) → m(b)` on every branch outside `excluded`.
/// Sequence terms are indexed `n = 1, 2, …`; the last `tail` terms must all
/// lie within `tol` of the limit.
pub fn branch_convergence_check(
    track: &TrainTrack,
    sequence: &[BranchMeasure<f64>],
    limit: &BranchMeasure<f64>,
    excluded: &BTreeSet<String>,
    tol: f64,
    tail: usize,
) -> Result<BranchConvergenceReport, TrackError> {
    check_ids(track, limit)?;
    for m in sequence {
        check_ids(track, m)?;
    }
    let start = sequence.len().saturating_sub(tail.max(1));
    let mut branches = Vec::new();
    for b in track.branches.iter().filter(|b| !excluded.contains(*b)) {
        let target = limit.weights[b];
        let errs: Vec<(f64, f64)> = sequence[start..]
            .iter()
            .enumerate()
            .map(|(i, m)| (((start + i + 1) as f64), (m.weights[b] - target).abs()))
            .collect();
        let tail_error = errs.iter().map(|e| e.1).fold(0.0, f64::max);
        branches.push(BranchVerdict {
            branch: b.clone(),
            converges: !sequence.is_empty() && tail_error <= tol,
            tail_error,
            decay_exponent: loglog_slope(&errs),
        });
    }
    Ok(BranchConvergenceReport {
        converged: branches.iter().all(|v| v.converges),
        branches,
        excluded: excluded.iter().cloned().collect(),
    })
}

pub(crate) fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// The three-branch track used throughout the tests: `b1` enters switch
/// `s1` alone and leaves as `b2`, `b3`; both rejoin at `s2` and continue as
/// `b1`. Its measures satisfy `b1 = b2 + b3`.
pub fn three_branch_track() -> TrainTrack {
    TrainTrack::new(
        vec!["b1".into(), "b2".into(), "b3".into()],
        vec![
            Switch {
                id: "s1".into(),
                side_a: vec![BranchEnd::end("b1")],
                side_b: vec![BranchEnd::start("b2"), BranchEnd::start("b3")],
            },
            Switch {
                id: "s2".into(),
                side_a: vec![BranchEnd::end("b2"), BranchEnd::end("b3")],
                side_b: vec![BranchEnd::start("b1")],
            },
        ],
    )
    .expect("fixture is a valid track")
}
