//! Single-facility location in the Euclidean plane.
//!
//! Agents report their preferred locations; the mechanism places one
//! facility. Two mechanisms take a recommended location:
//!
//! * [`mbb`] clamps the recommendation into the minimum bounding box of the
//!   reports, coordinate by coordinate (egalitarian cost).
//! * [`cmp`] appends `floor(lambda * n)` copies of the recommendation to
//!   each coordinate and takes the median (utilitarian cost).
//!
//! Both are money-free; their outcomes carry zero payments.

mod mec;
mod weiszfeld;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::{make_report, MechanismOutcome, Objective, QualityReport};

pub use mec::min_enclosing_circle;
pub use weiszfeld::geometric_median;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Agent locations. Always non-empty with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct FacilityInstance {
    points: Vec<Point2>,
}

impl FacilityInstance {
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("facility instance needs at least one point"));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::domain(format!("point {i} has a non-finite coordinate")));
        }
        Ok(FacilityInstance { points })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.y).collect()
    }

    /// `(min corner, max corner)` of the axis-aligned bounding box.
    pub fn bounding_box(&self) -> (Point2, Point2) {
        let mut lo = self.points[0];
        let mut hi = self.points[0];
        for p in &self.points[1..] {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    pub fn contains_in_box(&self, p: Point2) -> bool {
        let (lo, hi) = self.bounding_box();
        lo.x <= p.x && p.x <= hi.x && lo.y <= p.y && p.y <= hi.y
    }
}

/// Which element of an even-length multiset is its median.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum TieBreak {
    #[default]
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmpConfig {
    lambda: f64,
    pub tie_break: TieBreak,
}

impl CmpConfig {
    pub fn new(lambda: f64, tie_break: TieBreak) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::domain(format!("lambda must lie in [0, 1), got {lambda}")));
        }
        Ok(CmpConfig { lambda, tie_break })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `floor(lambda * n)`.
    pub fn copies(&self, n: usize) -> usize {
        (self.lambda * n as f64).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FacilityObjective {
    Egalitarian,
    Utilitarian,
}

impl FacilityObjective {
    pub fn cost(self, inst: &FacilityInstance, a: Point2) -> f64 {
        match self {
            FacilityObjective::Egalitarian => egalitarian_cost(inst, a),
            FacilityObjective::Utilitarian => utilitarian_cost(inst, a),
        }
    }

    pub fn optimum(self, inst: &FacilityInstance) -> Result<(Point2, f64)> {
        match self {
            FacilityObjective::Egalitarian => Ok(opt_egalitarian(inst)),
            FacilityObjective::Utilitarian => opt_utilitarian(inst),
        }
    }
}

pub fn egalitarian_cost(inst: &FacilityInstance, a: Point2) -> f64 {
    inst.points.iter().map(|p| p.dist(a)).fold(0.0, f64::max)
}

pub fn utilitarian_cost(inst: &FacilityInstance, a: Point2) -> f64 {
    inst.points.iter().map(|p| p.dist(a)).sum()
}

/// Clamps `a_hat` into `[min xs, max xs]`.
pub fn minmax_p(xs: &[f64], a_hat: f64) -> f64 {
    assert!(!xs.is_empty(), "minmax_p on an empty list");
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    a_hat.clamp(lo, hi)
}

/// Median of `xs` plus `copies` copies of `extra`. Even-length multisets
/// return the lower or upper middle element, never an average.
pub fn median_with_copies(xs: &[f64], extra: f64, copies: usize, tie: TieBreak) -> f64 {
    let mut all: Vec<f64> = Vec::with_capacity(xs.len() + copies);
    all.extend_from_slice(xs);
    all.extend(std::iter::repeat_n(extra, copies));
    assert!(!all.is_empty(), "median of an empty multiset");
    all.sort_by(f64::total_cmp);
    let len = all.len();
    let idx = match tie {
        TieBreak::Low => (len - 1) / 2,
        TieBreak::High => len / 2,
    };
    all[idx]
}

/// Plain coordinatewise median (no recommendation copies).
pub fn coordinatewise_median(inst: &FacilityInstance, tie: TieBreak) -> Point2 {
    Point2::new(
        median_with_copies(&inst.xs(), 0.0, 0, tie),
        median_with_copies(&inst.ys(), 0.0, 0, tie),
    )
}

/// Location chosen by the Minimum Bounding Box rule.
pub fn mbb_point(inst: &FacilityInstance, a_hat: Point2) -> Point2 {
    Point2::new(minmax_p(&inst.xs(), a_hat.x), minmax_p(&inst.ys(), a_hat.y))
}

/// Location chosen by the Coordinatewise Median with Predictions rule.
pub fn cmp_point(inst: &FacilityInstance, a_hat: Point2, cfg: &CmpConfig) -> Point2 {
    let k = cfg.copies(inst.len());
    Point2::new(
        median_with_copies(&inst.xs(), a_hat.x, k, cfg.tie_break),
        median_with_copies(&inst.ys(), a_hat.y, k, cfg.tie_break),
    )
}

fn facility_report(
    inst: &FacilityInstance,
    objective: FacilityObjective,
    facility: Point2,
    a_hat: Point2,
    optimum: (Point2, f64),
) -> Result<QualityReport> {
    let (a_star, opt) = optimum;
    let eta = (opt > 0.0).then(|| eta_from(inst, objective, a_star, opt, a_hat));
    make_report(
        Objective::Minimize,
        objective.cost(inst, facility),
        opt,
        objective.cost(inst, a_hat),
        eta,
    )
}

/// Minimum Bounding Box mechanism, evaluated against the egalitarian optimum.
pub fn mbb(inst: &FacilityInstance, a_hat: Point2) -> Result<MechanismOutcome<Point2>> {
    let facility = mbb_point(inst, a_hat);
    let report = facility_report(
        inst,
        FacilityObjective::Egalitarian,
        facility,
        a_hat,
        opt_egalitarian(inst),
    )?;
    Ok(MechanismOutcome::money_free(facility, inst.len(), report))
}

/// Coordinatewise Median with Predictions, evaluated against the
/// utilitarian optimum.
pub fn cmp(
    inst: &FacilityInstance,
    a_hat: Point2,
    cfg: &CmpConfig,
) -> Result<MechanismOutcome<Point2>> {
    let facility = cmp_point(inst, a_hat, cfg);
    let report = facility_report(
        inst,
        FacilityObjective::Utilitarian,
        facility,
        a_hat,
        opt_utilitarian(inst)?,
    )?;
    Ok(MechanismOutcome::money_free(facility, inst.len(), report))
}

/// Center and radius of the minimum enclosing circle. The radius is the
/// egalitarian cost at the returned center.
pub fn opt_egalitarian(inst: &FacilityInstance) -> (Point2, f64) {
    let c = min_enclosing_circle(inst.points());
    (c.center, egalitarian_cost(inst, c.center))
}

/// Geometric median and its utilitarian cost.
pub fn opt_utilitarian(inst: &FacilityInstance) -> Result<(Point2, f64)> {
    let p = geometric_median(inst.points())?;
    Ok((p, utilitarian_cost(inst, p)))
}

fn eta_from(
    inst: &FacilityInstance,
    objective: FacilityObjective,
    a_star: Point2,
    opt: f64,
    a_hat: Point2,
) -> f64 {
    let d = a_star.dist(a_hat);
    match objective {
        FacilityObjective::Egalitarian => d / opt,
        FacilityObjective::Utilitarian => inst.len() as f64 * d / opt,
    }
}

/// Normalized distance between the optimum and the recommendation:
/// `d(a*, a_hat) / Opt` (egalitarian) or `n d(a*, a_hat) / Opt` (utilitarian).
pub fn eta(inst: &FacilityInstance, a_hat: Point2, objective: FacilityObjective) -> Result<f64> {
    let (a_star, opt) = objective.optimum(inst)?;
    if opt <= 0.0 {
        return Err(Error::domain("prediction error undefined when the optimum is 0"));
    }
    Ok(eta_from(inst, objective, a_star, opt, a_hat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn inst(pts: &[(f64, f64)]) -> FacilityInstance {
        FacilityInstance::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap()
    }

    fn worst_max() -> FacilityInstance {
        inst(&[(0.0, 1.0), (1.0, 0.0), (-FRAC_1_SQRT_2, -FRAC_1_SQRT_2)])
    }

    fn corners() -> FacilityInstance {
        inst(&[(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)])
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(FacilityInstance::new(vec![]).is_err());
        assert!(FacilityInstance::new(vec![Point2::new(f64::NAN, 0.0)]).is_err());
        assert!(CmpConfig::new(1.0, TieBreak::Low).is_err());
        assert!(CmpConfig::new(-0.1, TieBreak::Low).is_err());
    }

    #[test]
    fn egalitarian_examples() {
        assert_abs_diff_eq!(egalitarian_cost(&worst_max(), Point2::new(0.0, 0.0)), 1.0, epsilon = 1e-12);
        let p = Point2::new(3.0, -2.0);
        assert_eq!(egalitarian_cost(&inst(&[(3.0, -2.0)]), p), 0.0);
        assert_eq!(egalitarian_cost(&inst(&[(0.0, 0.0), (2.0, 0.0)]), Point2::new(1.0, 0.0)), 1.0);
    }

    #[test]
    fn utilitarian_examples() {
        let c = corners();
        assert_abs_diff_eq!(
            utilitarian_cost(&c, Point2::new(0.0, 1.0)),
            2.0 + 2.0 * 5f64.sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(utilitarian_cost(&c, Point2::new(0.0, 0.0)), 4.0 * SQRT_2, epsilon = 1e-12);
        assert_eq!(utilitarian_cost(&inst(&[(1.5, 2.5)]), Point2::new(1.5, 2.5)), 0.0);
    }

    #[test]
    fn minmax_p_examples() {
        assert_eq!(minmax_p(&[1.0, 3.0, 5.0], 4.0), 4.0);
        assert_eq!(minmax_p(&[1.0, 3.0, 5.0], 0.0), 1.0);
        assert_eq!(minmax_p(&[1.0, 3.0, 5.0], 9.0), 5.0);
        assert_eq!(minmax_p(&[2.0], 7.0), 2.0);
    }

    #[test]
    fn median_picks_an_element() {
        assert_eq!(median_with_copies(&[1.0, 4.0], 0.0, 0, TieBreak::Low), 1.0);
        assert_eq!(median_with_copies(&[1.0, 4.0], 0.0, 0, TieBreak::High), 4.0);
        assert_eq!(median_with_copies(&[1.0, 4.0, 9.0], 0.0, 0, TieBreak::High), 4.0);
        // copies shift the median toward the recommendation
        assert_eq!(median_with_copies(&[1.0, 4.0, 9.0], 9.0, 1, TieBreak::Low), 4.0);
        assert_eq!(median_with_copies(&[1.0, 4.0, 9.0], 9.0, 2, TieBreak::Low), 9.0);
    }

    #[test]
    fn mbb_tight_instance() {
        let a_hat = Point2::new(0.3, 0.3);
        let out = mbb(&worst_max(), a_hat).unwrap();
        assert_eq!(out.alternative, a_hat);
        let expected = 1.0 + 0.3 * SQRT_2;
        assert_abs_diff_eq!(out.report.ratio, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(out.report.rho_hat, expected, epsilon = 1e-9);
        assert_eq!(out.payments, vec![0.0; 3]);
    }

    #[test]
    fn mbb_clamps_outside_coordinates() {
        let i = inst(&[(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(mbb_point(&i, Point2::new(2.0, 0.5)), Point2::new(1.0, 0.5));
        assert_eq!(mbb_point(&i, Point2::new(0.25, 0.75)), Point2::new(0.25, 0.75));
    }

    #[test]
    fn cmp_on_corners_with_high_ties() {
        let cfg = CmpConfig::new(0.75, TieBreak::High).unwrap();
        let out = cmp(&corners(), Point2::new(0.0, 1.0), &cfg).unwrap();
        assert_eq!(out.alternative, Point2::new(0.0, 1.0));
        let expected = (5f64.sqrt() + 1.0) / (2.0 * SQRT_2);
        assert_abs_diff_eq!(out.report.ratio, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(out.report.rho_hat, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(out.report.eta.unwrap(), FRAC_1_SQRT_2, epsilon = 1e-9);
    }

    #[test]
    fn cmp_on_worst_sum() {
        // 3 agents at (0,1), 2 at (1,0), 1 at (-1,0)
        let i = inst(&[
            (0.0, 1.0),
            (0.0, 1.0),
            (0.0, 1.0),
            (1.0, 0.0),
            (1.0, 0.0),
            (-1.0, 0.0),
        ]);
        let cfg = CmpConfig::new(0.0, TieBreak::Low).unwrap();
        let out = cmp(&i, Point2::new(1.0, 0.0), &cfg).unwrap();
        assert_eq!(out.alternative, Point2::new(0.0, 0.0));
        assert_abs_diff_eq!(out.report.mech_value, 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.report.opt_value, 3.0 * SQRT_2, epsilon = 1e-9);
        assert_abs_diff_eq!(out.report.ratio, SQRT_2, epsilon = 1e-9);
    }

    #[test]
    fn cmp_singleton() {
        let cfg = CmpConfig::new(0.0, TieBreak::Low).unwrap();
        let i = inst(&[(5.0, 5.0)]);
        assert_eq!(cmp_point(&i, Point2::new(-3.0, 8.0), &cfg), Point2::new(5.0, 5.0));
        let out = cmp(&i, Point2::new(-3.0, 8.0), &cfg).unwrap();
        // zero optimum, zero mechanism cost, positive advice cost
        assert_eq!(out.report.ratio, 1.0);
        assert_eq!(out.report.rho_hat, f64::INFINITY);
        assert_eq!(out.report.eta, None);
    }

    #[test]
    fn optimum_examples() {
        let (c, r) = opt_egalitarian(&worst_max());
        assert_abs_diff_eq!(c.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-12);
        let (c, r) = opt_egalitarian(&inst(&[(0.0, 0.0), (2.0, 0.0)]));
        assert_eq!((c, r), (Point2::new(1.0, 0.0), 1.0));

        let (p, v) = opt_utilitarian(&inst(&[(0.0, 0.0), (1.0, 0.0), (5.0, 0.0)])).unwrap();
        assert_abs_diff_eq!(p.x, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v, 5.0, epsilon = 1e-9);
        let (p, v) = opt_utilitarian(&corners()).unwrap();
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v, 4.0 * SQRT_2, epsilon = 1e-9);
    }

    #[test]
    fn eta_examples() {
        let a_hat = Point2::new(0.0, 1.0);
        let e = eta(&corners(), a_hat, FacilityObjective::Egalitarian).unwrap();
        assert_abs_diff_eq!(e, FRAC_1_SQRT_2, epsilon = 1e-9);
        let u = eta(&corners(), a_hat, FacilityObjective::Utilitarian).unwrap();
        assert_abs_diff_eq!(u, FRAC_1_SQRT_2, epsilon = 1e-9);
        let (a_star, _) = opt_egalitarian(&corners());
        assert_eq!(eta(&corners(), a_star, FacilityObjective::Egalitarian).unwrap(), 0.0);
        let single = inst(&[(1.0, 1.0)]);
        assert!(eta(&single, a_hat, FacilityObjective::Utilitarian).is_err());
    }
}
