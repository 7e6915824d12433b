//! Pleatings invariant under a hyperbolic translation of the slice along the
//! x-axis, their holonomy, and the comparison of translation lengths.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use super::{translation_length, SeqError};
use crate::hypgeom::{e_z, hyp_dist, mink_inner, rotation_in_frame, LorentzMap, MinkowskiPoint, Vec4};
use crate::lam2::{ideal_angle, FiniteLamination2, LamError, Leaf2};
use crate::pleat::{build_pleated, BendSide, BendingData, PleatError};
use crate::tolerance::PI_COMPARE_TOL;

/// Translates of the seeds on either side used to build `f̂` for the
/// equivariance check.
const TRANSLATES: i32 = 2;

/// Tolerance on `f̂(a·x) = r(a)·f̂(x)`.
const EQUIVARIANCE_TOL: f64 = 1e-8;

/// Seed leaves repeated by the translation `a` of length `period` along the
/// x-axis, bent to one side.
#[derive(Debug, Clone)]
pub struct PeriodicPleating {
    period: f64,
    seeds: Vec<Leaf2>,
    side: BendSide,
    /// (axis parameter in (0, period), seed index, translate k) of every leaf
    /// crossing the axis between the basepoint and its image.
    crossed: Vec<(f64, usize, i32)>,
    holonomy: LorentzMap,
}

fn translate_leaf(leaf: &Leaf2, k: i32, period: f64, id: String) -> Result<Leaf2, LamError> {
    let a = LorentzMap::translation_x(k as f64 * period);
    let (t1, t2) = leaf.angles();
    let e1 = a.apply_vec(&crate::hypgeom::ideal_point(t1));
    let e2 = a.apply_vec(&crate::hypgeom::ideal_point(t2));
    Leaf2::new(id, ideal_angle(&e1), ideal_angle(&e2), leaf.weight)
}

impl PeriodicPleating {
    pub fn new(period: f64, seeds: Vec<Leaf2>, side: BendSide) -> Result<Self, SeqError> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(SeqError::BadPeriod(period));
        }
        for s in &seeds {
            if !(s.weight > 0.0 && s.weight <= std::f64::consts::PI + PI_COMPARE_TOL) {
                return Err(PleatError::WeightOutOfRange { id: s.id.clone(), weight: s.weight }.into());
            }
        }
        let mut pp = Self { period, seeds, side, crossed: Vec::new(), holonomy: LorentzMap::identity() };
        // disjointness over three fundamental domains
        pp.translates(1)?;
        for (i, s) in pp.seeds.iter().enumerate() {
            let n = s.normal();
            // γ(t) = (cosh t, sinh t, 0, 0) meets the leaf where tanh t = n_t / n_x
            if n[1].abs() <= n[0].abs() {
                continue;
            }
            let t = (n[0] / n[1]).atanh();
            let k = -(t / period).floor() as i32;
            let tk = t + k as f64 * period;
            if tk < 1e-9 || tk > period - 1e-9 {
                return Err(SeqError::LeafThroughBasepoint(s.id.clone()));
            }
            pp.crossed.push((tk, i, k));
        }
        pp.crossed.sort_by(|a, b| a.0.total_cmp(&b.0));
        let eps = side.sign();
        let mut m = LorentzMap::identity();
        for &(_, i, k) in &pp.crossed {
            let a = LorentzMap::translation_x(k as f64 * period);
            let mut n = a.apply_vec(&pp.seeds[i].normal());
            if mink_inner(MinkowskiPoint::basepoint().coords(), &n) > 0.0 {
                n = -n;
            }
            m = m.compose(&rotation_in_frame(&n, &e_z(), eps * pp.seeds[i].weight));
        }
        pp.holonomy = m.compose(&LorentzMap::translation_x(period)).renormalized();
        Ok(pp)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn seeds(&self) -> &[Leaf2] {
        &self.seeds
    }

    pub fn side(&self) -> BendSide {
        self.side
    }

    pub fn translation(&self) -> LorentzMap {
        LorentzMap::translation_x(self.period)
    }

    /// Sum of the weights of the seeds crossed by one period of the axis.
    pub fn intersection(&self) -> f64 {
        self.crossed.iter().map(|&(_, i, _)| self.seeds[i].weight).sum()
    }

    /// The seeds and their translates by `a^k`, `|k| ≤ reach`.
    pub fn translates(&self, reach: i32) -> Result<FiniteLamination2, LamError> {
        let mut leaves = Vec::new();
        for k in -reach..=reach {
            for s in &self.seeds {
                leaves.push(translate_leaf(s, k, self.period, format!("{}@{k}", s.id))?);
            }
        }
        FiniteLamination2::new(leaves)
    }

    /// Largest `d(f̂(a·x), r(a)·f̂(x))` over sample points `x` of the strip
    /// `[-L, 0]` along the axis, so that `x` and `a·x` cover the two
    /// fundamental domains meeting at the basepoint. `f̂` is built from
    /// enough translates to cover them.
    ///
    /// Far translates are avoided on purpose: their ideal endpoints cluster
    /// within `e^-d` of each other while angles carry an absolute error near
    /// `1e-16`, and rotations about them amplify that by about `cosh² d`.
    pub fn equivariance_defect(&self) -> Result<f64, SeqError> {
        let lam = self.translates(TRANSLATES)?;
        let ps = build_pleated(BendingData::new(lam, self.side)?);
        let a = self.translation();
        let ey = Vec4::new(0.0, 0.0, 1.0, 0.0);
        let mut worst: f64 = 0.0;
        for i in 0..16 {
            let s = -self.period * (0.025 + 0.95 * i as f64 / 15.0);
            for v in [-1.0, -0.4, 0.3, 0.9] {
                let x = LorentzMap::translation_x(s).apply_point(&MinkowskiPoint::basepoint().exp(&ey, v));
                let lhs = ps.evaluate(&a.apply_point(&x))?;
                let rhs = self.holonomy.apply_point(&ps.evaluate(&x)?);
                worst = worst.max(hyp_dist(&lhs, &rhs).map_err(PleatError::from)?);
            }
        }
        Ok(worst)
    }
}

/// Holonomy `r(a)` of the periodic pleating: the rotations about the leaves
/// crossed between the basepoint and its image, in order, followed by `a`.
/// Fails if the equivariantly extended pleated map does not intertwine `a`
/// and `r(a)` on sample points.
pub fn periodic_holonomy(pp: &PeriodicPleating) -> Result<LorentzMap, SeqError> {
    let defect = pp.equivariance_defect()?;
    if defect > EQUIVARIANCE_TOL {
        return Err(SeqError::NotEquivariant(defect));
    }
    Ok(pp.holonomy)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiGeodesicReport {
    pub epsilon: f64,
    /// `i(c, λ)`.
    pub intersection: f64,
    /// `l(c)`, the period.
    pub l_c: f64,
    /// `l(c*)`, translation length of the holonomy.
    pub l_c_star: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub epsilon: f64,
    /// Empirical `C_ε`: the largest ratio at this level.
    pub c_eps: f64,
    /// Empirical `A_ε`. With `C_ε` the largest ratio, `A_ε = 0` already
    /// satisfies `l(c) ≤ C_ε (l(c*) + A_ε)` on the sample.
    pub a_eps: f64,
    pub instances: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiGeodesicSweep {
    pub reports: Vec<QuasiGeodesicReport>,
    /// Sorted by decreasing ε.
    pub levels: Vec<LevelSummary>,
    pub excluded: Vec<(f64, String)>,
    /// Every ratio is at least `1 − 1e-9`.
    pub ratio_ok: bool,
    /// `C_ε` does not grow by more than 5% from one level to the next
    /// smaller one.
    pub trend_ok: bool,
}

/// Compare `l(c)` with `l(c*)` over a family of periodic pleatings, each
/// tagged with its bending level `ε`. Instances with `i(c, λ) > ε` or
/// `ε ≥ π/2`, or whose holonomy fails, are excluded.
pub fn quasigeodesic_experiment(instances: &[(f64, PeriodicPleating)]) -> QuasiGeodesicSweep {
    let mut reports = Vec::new();
    let mut excluded = Vec::new();
    for (eps, pp) in instances {
        let i = pp.intersection();
        if !(*eps >= 0.0 && *eps < FRAC_PI_2) || i > eps + PI_COMPARE_TOL {
            excluded.push((*eps, format!("out of regime: i(c, λ) = {i}, ε = {eps}")));
            continue;
        }
        let l_star = periodic_holonomy(pp).and_then(|r| translation_length(&r));
        match l_star {
            Ok(l_c_star) => reports.push(QuasiGeodesicReport {
                epsilon: *eps,
                intersection: i,
                l_c: pp.period(),
                l_c_star,
                ratio: pp.period() / l_c_star,
            }),
            Err(e) => excluded.push((*eps, e.to_string())),
        }
    }
    reports.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    let mut levels: Vec<LevelSummary> = Vec::new();
    for r in &reports {
        match levels.last_mut() {
            Some(l) if l.epsilon == r.epsilon => {
                l.c_eps = l.c_eps.max(r.ratio);
                l.instances += 1;
            }
            _ => levels.push(LevelSummary { epsilon: r.epsilon, c_eps: r.ratio, a_eps: 0.0, instances: 1 }),
        }
    }
    let ratio_ok = reports.iter().all(|r| r.ratio >= 1.0 - 1e-9);
    let trend_ok = levels.windows(2).all(|w| w[1].c_eps <= w[0].c_eps * 1.05);
    QuasiGeodesicSweep { reports, levels, excluded, ratio_ok, trend_ok }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lam2::orthogonal_leaf_angles;

    fn orth(id: &str, x0: f64, w: f64) -> Leaf2 {
        let (a, b) = orthogonal_leaf_angles(x0);
        Leaf2::new(id, a, b, w).unwrap()
    }

    #[test]
    fn no_seeds_gives_the_translation() {
        let pp = PeriodicPleating::new(1.5, vec![], BendSide::Plus).unwrap();
        let r = periodic_holonomy(&pp).unwrap();
        assert!(r.distance(&LorentzMap::translation_x(1.5)) < 1e-12);
        assert_eq!(pp.intersection(), 0.0);
    }

    #[test]
    fn orthogonal_seed_holonomy_is_equivariant() {
        for side in [BendSide::Plus, BendSide::Minus] {
            let pp = PeriodicPleating::new(2.0, vec![orth("a", 0.7, 0.5)], side).unwrap();
            let r = periodic_holonomy(&pp).unwrap();
            assert!(pp.equivariance_defect().unwrap() < 1e-9);
            // r(a) = R(w) a with R the rotation about the seed leaf
            let g = pp.seeds()[0].geodesic();
            let rot = crate::hypgeom::rotation_about_geodesic(&g, 0.5).unwrap();
            // the sign of the turn depends on the orientation of g
            let expected = [rot, rot.inverse()]
                .iter().map(|m| m.compose(&pp.translation()).distance(&r)).fold(f64::INFINITY, f64::min);
            assert!(expected < 1e-9, "{expected}");
        }
    }

    #[test]
    fn bending_shortens_translation_length() {
        let l = 2.0;
        let mut prev = l;
        for w in [0.1, 0.5, 1.0] {
            let pp = PeriodicPleating::new(l, vec![orth("a", 0.4, w)], BendSide::Plus).unwrap();
            let d = translation_length(&periodic_holonomy(&pp).unwrap()).unwrap();
            // translation composed with a rotation about a perpendicular axis:
            // cosh(d/2) = cosh(l/2) cos(w/2)
            let oracle = 2.0 * ((l / 2.0).cosh() * (w / 2.0).cos()).acosh();
            assert!((d - oracle).abs() < 1e-9, "{d} vs {oracle}");
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn oblique_seeds_stay_equivariant() {
        let seeds = vec![Leaf2::new("p", 1.2, 4.9, 0.3).unwrap(), Leaf2::new("q", 0.9, 5.2, 0.2).unwrap()];
        match PeriodicPleating::new(3.0, seeds, BendSide::Minus) {
            Ok(pp) => assert!(pp.equivariance_defect().unwrap() < 1e-8),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn intersecting_translates_are_rejected() {
        // a leaf long enough to meet its own translate
        let seeds = vec![Leaf2::new("p", 0.2, 3.0, 0.3).unwrap()];
        assert!(matches!(PeriodicPleating::new(0.3, seeds, BendSide::Plus), Err(SeqError::Lamination(_))));
    }

    #[test]
    fn epsilon_ladder() {
        let mut inst = vec![(0.0, PeriodicPleating::new(2.0, vec![], BendSide::Plus).unwrap())];
        for eps in [0.3, 0.1, 0.03] {
            inst.push((eps, PeriodicPleating::new(2.0, vec![orth("a", 0.5, eps)], BendSide::Plus).unwrap()));
            inst.push((
                eps,
                PeriodicPleating::new(2.0, vec![orth("a", 0.3, eps / 2.0), orth("b", 1.3, eps / 2.0)], BendSide::Plus)
                    .unwrap(),
            ));
        }
        inst.push((0.1, PeriodicPleating::new(2.0, vec![orth("a", 0.5, 0.3)], BendSide::Plus).unwrap()));
        let sweep = quasigeodesic_experiment(&inst);
        assert_eq!(sweep.excluded.len(), 1);
        assert!(sweep.ratio_ok);
        assert!(sweep.trend_ok);
        let c: Vec<f64> = sweep.levels.iter().map(|l| l.c_eps).collect();
        assert_eq!(sweep.levels.last().unwrap().epsilon, 0.0);
        assert!((c[3] - 1.0).abs() < 1e-12);
        assert!(c[2] < c[0]);
    }
}
