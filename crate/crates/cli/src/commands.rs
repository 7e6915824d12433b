use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use bendlab::hypgeom::{HyperPlane, MinkowskiPoint};
use bendlab::lam2::{crossings, FiniteLamination2};
use bendlab::pleat::{
    approx_report, bending_measure, build_pleated, check_approximation, is_convex, polygonal_approximation,
    ApproxReport, ApproxViolation, BendSide, BendingData, Convexity, PleatError, PleatedSurface,
};
use bendlab::rquotient::{
    quotient_convergence_check, r_equivalent, separation_witness, truncate, AbstractLamination,
    QuotientConvergenceReport, Separation, TestArc,
};
use bendlab::seqlab::{quasigeodesic_experiment, run_dichotomy, FamilySpec};
use bendlab::tolerance::max_spacing;
use bendlab::traintrack::{
    branch_convergence_check, carried_intersection, validate_measure, BranchConvergenceReport, BranchMeasure,
    Subtrack, TrainTrack,
};

use crate::io::{emit, emit_json, read_arcs, read_json, QuasiGeodesicInput};

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Violation,
}

impl Verdict {
    fn from_pass(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Violation
        }
    }
}

fn surface(lamination: &Path, side: BendSide) -> Result<PleatedSurface> {
    let lam: FiniteLamination2 = read_json(lamination)?;
    let data = BendingData::new(lam, side).context("pleat")?;
    Ok(build_pleated(data))
}

#[derive(Serialize)]
struct ArcBending {
    measure: f64,
    crossed: Vec<String>,
}

#[derive(Serialize)]
struct BendReport {
    side: BendSide,
    leaves: usize,
    convexity: Convexity,
    arcs: Vec<ArcBending>,
}

pub fn bend(lamination: &Path, side: BendSide, arcs: &Path, out: Option<&Path>) -> Result<Verdict> {
    let ps = surface(lamination, side)?;
    let arcs = read_arcs(arcs)?;
    let arcs = arcs
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let measure = bending_measure(&ps, k).context("pleat").with_context(|| format!("arc {i}"))?;
            let crossed = crossings(k, ps.lamination())
                .context("lam2")
                .with_context(|| format!("arc {i}"))?
                .into_iter()
                .map(|c| c.id)
                .collect();
            Ok(ArcBending { measure, crossed })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = BendReport { side, leaves: ps.lamination().len(), convexity: is_convex(&ps), arcs };
    emit_json(out, "bend.json", &report)?;
    Ok(Verdict::Pass)
}

/// Reject `(δ, ε)` before anything is built.
pub fn validate_delta_epsilon(delta: f64, epsilon: f64) -> Result<(), PleatError> {
    if !(epsilon > 0.0 && epsilon < max_spacing()) {
        return Err(PleatError::SpacingOutOfRange(epsilon));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(PleatError::AngleOutOfRange(delta));
    }
    // the report compares against α = δ, which must stay below π/2
    if delta >= FRAC_PI_2 {
        return Err(PleatError::AlphaOutOfRange(delta));
    }
    Ok(())
}

#[derive(Serialize)]
struct ApproxPlane {
    param: f64,
    point: MinkowskiPoint,
    plane: HyperPlane,
}

#[derive(Serialize)]
struct ApproxArc {
    report: ApproxReport,
    violations: Vec<ApproxViolation>,
    planes: Vec<ApproxPlane>,
}

#[derive(Serialize)]
struct ApproxOutput {
    delta: f64,
    epsilon: f64,
    arcs: Vec<ApproxArc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

const APPROX_CSV_HEADER: &str = "arc,angle_sum,exact_measure,error,length,bound,ratio,alpha,s,arc_length,\
direct,disjoint,missed,fallback,violations";

pub fn approx(
    lamination: &Path,
    side: BendSide,
    arcs: &Path,
    delta: f64,
    epsilon: f64,
    format: Format,
    out: Option<&Path>,
) -> Result<Verdict> {
    validate_delta_epsilon(delta, epsilon).context("pleat")?;
    let ps = surface(lamination, side)?;
    let arcs = read_arcs(arcs)?;
    let mut results = Vec::with_capacity(arcs.len());
    for (i, k) in arcs.iter().enumerate() {
        let ctx = || format!("arc {i}");
        let approx = polygonal_approximation(&ps, k, delta, epsilon).context("pleat").with_context(ctx)?;
        let report = approx_report(&ps, k, delta, epsilon).context("pleat").with_context(ctx)?;
        let violations = check_approximation(&ps, &approx);
        let planes =
            approx.entries.iter().map(|e| ApproxPlane { param: e.param, point: e.point, plane: e.plane }).collect();
        results.push(ApproxArc { report, violations, planes });
    }
    let ok = results.iter().all(|a| a.violations.is_empty());
    match format {
        Format::Json => emit_json(out, "approx.json", &ApproxOutput { delta, epsilon, arcs: results })?,
        Format::Csv => {
            let mut body = String::from(APPROX_CSV_HEADER);
            body.push('\n');
            for (i, a) in results.iter().enumerate() {
                let r = &a.report;
                let c = &r.configurations;
                writeln!(
                    body,
                    "{i},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.angle_sum,
                    r.exact_measure,
                    r.error,
                    r.length,
                    r.bound,
                    r.ratio,
                    r.alpha,
                    r.s,
                    r.arc_length,
                    c.direct,
                    c.disjoint,
                    c.missed,
                    c.fallback,
                    a.violations.len()
                )?;
            }
            emit(out, "approx.csv", &body)?;
        }
    }
    Ok(Verdict::from_pass(ok))
}

pub const FOLD_CSV_HEADER: &str = "component,t,x,y,z";

/// Sample the bent surface: one CSV row per point of H³ with the
/// complementary component it comes from.
pub fn fold(
    lamination: &Path,
    side: BendSide,
    radius: f64,
    rings: usize,
    spokes: usize,
    out: Option<&Path>,
) -> Result<Verdict> {
    anyhow::ensure!(radius > 0.0 && radius.is_finite(), "radius must be positive, got {radius}");
    anyhow::ensure!(rings > 0 && spokes > 0, "rings and spokes must be positive");
    let ps = surface(lamination, side)?;
    let mut body = String::from(FOLD_CSV_HEADER);
    body.push('\n');
    for (p, node) in ps.sample_points(radius, rings, spokes) {
        let c = ps.component_map(node).apply_point(&p);
        let c = c.coords();
        writeln!(body, "{node},{:?},{:?},{:?},{:?}", c[0], c[1], c[2], c[3])?;
    }
    emit(out, "fold.csv", &body)?;
    Ok(Verdict::Pass)
}

pub fn dichotomy(family: &Path, arcs: Option<&Path>, tail: usize, tol: f64, out: Option<&Path>) -> Result<Verdict> {
    anyhow::ensure!(tol > 0.0, "tol must be positive, got {tol}");
    let spec: FamilySpec = read_json(family)?;
    let arcs = match arcs {
        Some(p) => read_arcs(p)?,
        None => Vec::new(),
    };
    let report = run_dichotomy(&spec, &arcs, tail, tol).context("seqlab")?;
    emit_json(out, "dichotomy.json", &report)?;
    Ok(Verdict::from_pass(report.verified))
}

pub fn quasigeo(input: &Path, out: Option<&Path>) -> Result<Verdict> {
    let input: QuasiGeodesicInput = read_json(input)?;
    let sweep = quasigeodesic_experiment(&input.pleatings()?);
    emit_json(out, "quasigeo.json", &sweep)?;
    Ok(Verdict::from_pass(sweep.ratio_ok && sweep.trend_ok))
}

/// Single-crossing arcs over every leaf id, the pool that always decides.
fn default_pool<'a>(lams: impl IntoIterator<Item = &'a AbstractLamination>) -> Vec<TestArc> {
    let ids: BTreeSet<&str> = lams.into_iter().flat_map(|l| l.leaves().iter().map(|x| x.id.as_str())).collect();
    ids.into_iter().map(TestArc::single).collect()
}

fn pool_or_default<'a>(
    pool: Option<&Path>,
    lams: impl IntoIterator<Item = &'a AbstractLamination>,
) -> Result<Vec<TestArc>> {
    match pool {
        Some(p) => read_json(p),
        None => Ok(default_pool(lams)),
    }
}

#[derive(Serialize)]
struct CompareReport {
    equivalent: bool,
    canonical_a: AbstractLamination,
    canonical_b: AbstractLamination,
    witness: Option<Separation>,
}

pub fn rq_compare(a: &Path, b: &Path, pool: Option<&Path>, out: Option<&Path>) -> Result<Verdict> {
    let la: AbstractLamination = read_json(a)?;
    let lb: AbstractLamination = read_json(b)?;
    let pool = pool_or_default(pool, [&la, &lb])?;
    let (ca, cb) = (truncate(&la), truncate(&lb));
    let equivalent = r_equivalent(&la, &lb);
    let witness = match separation_witness(&ca, &cb, &pool).context("rquotient")? {
        Separation::Equal => None,
        s => Some(s),
    };
    let report = CompareReport {
        equivalent,
        canonical_a: ca.canonical().clone(),
        canonical_b: cb.canonical().clone(),
        witness,
    };
    emit_json(out, "rq-compare.json", &report)?;
    Ok(Verdict::from_pass(equivalent))
}

#[derive(Deserialize)]
pub struct ConvergenceInput {
    pub sequence: Vec<AbstractLamination>,
    pub candidate: AbstractLamination,
}

pub fn rq_converge(input: &Path, pool: Option<&Path>, tol: f64, tail: usize, out: Option<&Path>) -> Result<Verdict> {
    anyhow::ensure!(tol > 0.0, "tol must be positive, got {tol}");
    let input: ConvergenceInput = read_json(input)?;
    anyhow::ensure!(!input.sequence.is_empty(), "the sequence is empty");
    let pool = pool_or_default(pool, input.sequence.iter().chain([&input.candidate]))?;
    let report: QuotientConvergenceReport =
        quotient_convergence_check(&input.sequence, &input.candidate, &pool, tol, tail);
    emit_json(out, "rq-converge.json", &report)?;
    Ok(Verdict::from_pass(report.passed))
}

#[derive(Deserialize)]
pub struct TrackInput {
    pub track: TrainTrack,
    pub measures: Vec<BranchMeasure<f64>>,
    /// Loop subtrack carrying the curve whose intersection is reported.
    #[serde(default)]
    pub subtrack: Option<Vec<String>>,
    /// Limit measure for a convergence check of `measures` as a sequence.
    #[serde(default)]
    pub limit: Option<BranchMeasure<f64>>,
    #[serde(default)]
    pub excluded: BTreeSet<String>,
}

#[derive(Serialize)]
struct MeasureVerdict {
    valid: bool,
    carried_intersection: Option<f64>,
}

#[derive(Serialize)]
struct TrackReport {
    measures: Vec<MeasureVerdict>,
    convergence: Option<BranchConvergenceReport>,
}

pub fn tt_check(input: &Path, tol: f64, tail: usize, out: Option<&Path>) -> Result<Verdict> {
    anyhow::ensure!(tol > 0.0, "tol must be positive, got {tol}");
    let input: TrackInput = read_json(input)?;
    let sub = match &input.subtrack {
        Some(ids) => {
            let sub = Subtrack::new(&input.track, ids.iter()).context("traintrack")?;
            sub.check_loop_carrier(&input.track).context("traintrack")?;
            Some(sub)
        }
        None => None,
    };
    let mut measures = Vec::with_capacity(input.measures.len());
    for (i, m) in input.measures.iter().enumerate() {
        let valid = validate_measure(&input.track, m).context("traintrack").with_context(|| format!("measure {i}"))?;
        let carried = match (&sub, valid) {
            (Some(s), true) => Some(
                carried_intersection(&input.track, s, m).context("traintrack").with_context(|| format!("measure {i}"))?,
            ),
            _ => None,
        };
        measures.push(MeasureVerdict { valid, carried_intersection: carried });
    }
    let convergence = match &input.limit {
        Some(limit) => Some(
            branch_convergence_check(&input.track, &input.measures, limit, &input.excluded, tol, tail)
                .context("traintrack")?,
        ),
        None => None,
    };
    let ok = measures.iter().all(|m| m.valid) && convergence.as_ref().is_none_or(|c| c.converged);
    emit_json(out, "tt-check.json", &TrackReport { measures, convergence })?;
    Ok(Verdict::from_pass(ok))
}

/// Report destination for the `--out` flag.
pub fn out_path(out: &Option<PathBuf>) -> Option<&Path> {
    out.as_deref()
}
