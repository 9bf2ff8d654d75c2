//! Named adversarial instances and seeded random samplers.
//!
//! Samplers draw the recommendation from two branches with equal
//! probability: a (possibly perturbed) optimum, or a uniformly random
//! feasible outcome. Uniform advice alone almost never hits the optimum, so
//! the consistency regime would go untested.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::auctions::{mu_opt, BundleAllocation, MultiUnitInstance};
use crate::error::{Error, Result};
use crate::facility::{opt_egalitarian, opt_utilitarian, FacilityInstance, Point2};
use crate::house::{gen_house_lb, gen_ttc_lb, opt_matching, Matching, Normalization, ValuationMatrix};
use crate::report::Seed;
use crate::scheduling::{gen_jump_example, gen_lb_case1, gen_lb_case2, makespan, opt_makespan, Assignment, SchedulingInstance, BRUTE_FORCE_CAP};

pub const DEFAULT_EPS: f64 = 1e-6;

/// Kebab-case names accepted by [`NamedKind::from_str`].
pub const NAMED_KEYS: [&str; 8] = [
    "fl-worst-max",
    "fl-worst-sum",
    "fl-sum1",
    "sched-lb1",
    "sched-lb2",
    "sched-jump",
    "house-lb-unit-range",
    "house-lb-unit-sum",
];

/// Family of a named instance, without its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedKind {
    FlWorstMax,
    FlWorstSum,
    FlSum1,
    SchedLb1,
    SchedLb2,
    SchedJump,
    HouseLbUnitRange,
    HouseLbUnitSum,
}

impl FromStr for NamedKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use NamedKind::*;
        let kinds = [FlWorstMax, FlWorstSum, FlSum1, SchedLb1, SchedLb2, SchedJump, HouseLbUnitRange, HouseLbUnitSum];
        NAMED_KEYS
            .iter()
            .position(|k| *k == s)
            .map(|i| kinds[i])
            .ok_or_else(|| Error::domain(format!("unknown instance {s:?}; expected one of {}", NAMED_KEYS.join(", "))))
    }
}

impl fmt::Display for NamedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(NAMED_KEYS[*self as usize])
    }
}

/// A named family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedKey {
    /// Three agents on the unit circle; advice on the diagonal at distance
    /// `rho_hat - 1` from the center.
    FlWorstMax { rho_hat: f64 },
    /// One agent at (-1,0), `m` at (0,1), `m - 1` at (1,0); advice (1,0).
    FlWorstSum { m: usize },
    /// The four corners of [-1,1]^2 with advice (0,1).
    FlSum1,
    SchedLb1 { n: usize, rho_hat: f64, beta: f64, eps: f64 },
    SchedLb2 { n: usize, rho_hat: f64, beta: f64, eps: f64 },
    SchedJump { n: usize, eps: f64 },
    /// Without `rho_hat`, the Θ(n) worst case; with it, the family whose
    /// ratio equals `rho_hat` as `eps -> 0`.
    HouseLbUnitRange { n: usize, rho_hat: Option<f64>, eps: f64 },
    HouseLbUnitSum { n: usize, rho_hat: Option<f64>, eps: f64 },
}

impl NamedKey {
    pub fn kind(&self) -> NamedKind {
        match self {
            NamedKey::FlWorstMax { .. } => NamedKind::FlWorstMax,
            NamedKey::FlWorstSum { .. } => NamedKind::FlWorstSum,
            NamedKey::FlSum1 => NamedKind::FlSum1,
            NamedKey::SchedLb1 { .. } => NamedKind::SchedLb1,
            NamedKey::SchedLb2 { .. } => NamedKind::SchedLb2,
            NamedKey::SchedJump { .. } => NamedKind::SchedJump,
            NamedKey::HouseLbUnitRange { .. } => NamedKind::HouseLbUnitRange,
            NamedKey::HouseLbUnitSum { .. } => NamedKind::HouseLbUnitSum,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NamedInstance {
    Facility { instance: FacilityInstance, advice: Point2 },
    Scheduling { instance: SchedulingInstance, advice: Assignment },
    /// Predicted and actual cost matrices; no recommendation.
    SchedulingPair { predicted: SchedulingInstance, actual: SchedulingInstance },
    House { values: ValuationMatrix, endowment: Matching },
}

pub fn build(key: NamedKey) -> Result<NamedInstance> {
    match key {
        NamedKey::FlWorstMax { rho_hat } => {
            if !(1.0..=1.0 + SQRT_2).contains(&rho_hat) {
                return Err(Error::domain(format!(
                    "worst-max needs 1 <= rho_hat <= 1 + sqrt(2) so the advice stays in the bounding box, got {rho_hat}"
                )));
            }
            let d = (rho_hat - 1.0) * FRAC_1_SQRT_2;
            Ok(NamedInstance::Facility {
                instance: FacilityInstance::new(vec![
                    Point2::new(0.0, 1.0),
                    Point2::new(1.0, 0.0),
                    Point2::new(-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
                ])?,
                advice: Point2::new(d, d),
            })
        }
        NamedKey::FlWorstSum { m } => {
            if m < 2 {
                return Err(Error::domain(format!("worst-sum needs m >= 2, got {m}")));
            }
            let mut pts = vec![Point2::new(-1.0, 0.0)];
            pts.extend(std::iter::repeat_n(Point2::new(0.0, 1.0), m));
            pts.extend(std::iter::repeat_n(Point2::new(1.0, 0.0), m - 1));
            Ok(NamedInstance::Facility {
                instance: FacilityInstance::new(pts)?,
                advice: Point2::new(1.0, 0.0),
            })
        }
        NamedKey::FlSum1 => Ok(NamedInstance::Facility {
            instance: FacilityInstance::new(vec![
                Point2::new(1.0, 1.0),
                Point2::new(-1.0, 1.0),
                Point2::new(-1.0, -1.0),
                Point2::new(1.0, -1.0),
            ])?,
            advice: Point2::new(0.0, 1.0),
        }),
        NamedKey::SchedLb1 { n, rho_hat, beta, eps } => {
            let (instance, advice) = gen_lb_case1(n, rho_hat, beta, eps)?;
            Ok(NamedInstance::Scheduling { instance, advice })
        }
        NamedKey::SchedLb2 { n, rho_hat, beta, eps } => {
            let (instance, advice) = gen_lb_case2(n, rho_hat, beta, eps)?;
            Ok(NamedInstance::Scheduling { instance, advice })
        }
        NamedKey::SchedJump { n, eps } => {
            let (predicted, actual) = gen_jump_example(n, eps)?;
            Ok(NamedInstance::SchedulingPair { predicted, actual })
        }
        NamedKey::HouseLbUnitRange { n, rho_hat, eps } => house(n, rho_hat, Normalization::UnitRange, eps),
        NamedKey::HouseLbUnitSum { n, rho_hat, eps } => house(n, rho_hat, Normalization::UnitSum, eps),
    }
}

fn house(n: usize, rho_hat: Option<f64>, norm: Normalization, eps: f64) -> Result<NamedInstance> {
    let (values, endowment) = match rho_hat {
        Some(r) => gen_ttc_lb(n, r, norm, eps)?,
        None => gen_house_lb(n, norm, eps)?,
    };
    Ok(NamedInstance::House { values, endowment })
}

/// Uniform point in `[lo, hi]^2`.
fn uniform_point(rng: &mut impl Rng, lo: f64, hi: f64) -> Point2 {
    Point2::new(rng.random_range(lo..hi), rng.random_range(lo..hi))
}

/// `n` agents uniform on the unit square. Advice is uniform on
/// `[-0.5, 1.5]^2` or, with probability 1/2, one of the two optima, exact
/// or with a small Gaussian shift.
pub fn sample_facility(rng: &mut impl Rng, n: usize) -> Result<(FacilityInstance, Point2)> {
    let inst = FacilityInstance::new((0..n).map(|_| uniform_point(rng, 0.0, 1.0)).collect())?;
    let advice = if rng.random_bool(0.5) {
        uniform_point(rng, -0.5, 1.5)
    } else {
        let opt = if rng.random_bool(0.5) {
            opt_egalitarian(&inst).0
        } else {
            opt_utilitarian(&inst)?.0
        };
        if rng.random_bool(0.5) {
            opt
        } else {
            let shift = Normal::new(0.0, 0.05).expect("valid normal");
            Point2::new(opt.x + shift.sample(rng), opt.y + shift.sample(rng))
        }
    };
    Ok((inst, advice))
}

/// Costs uniform on `[1, 10)`. Advice is a uniform assignment or the
/// brute-force optimum, in half of those cases with one random job moved to
/// its best other machine.
pub fn sample_scheduling(rng: &mut impl Rng, n: usize, m: usize) -> Result<(SchedulingInstance, Assignment)> {
    check_enumeration(n, m)?;
    let costs = (0..n * m).map(|_| rng.random_range(1.0..10.0)).collect();
    let inst = SchedulingInstance::new(n, m, costs)?;
    let advice = if rng.random_bool(0.5) {
        Assignment::new((0..m).map(|_| rng.random_range(0..n)).collect())
    } else {
        let (mut a, _) = opt_makespan(&inst)?;
        if m > 0 && rng.random_bool(0.5) {
            a = perturb_job(&inst, a, rng.random_range(0..m));
        }
        a
    };
    Ok((inst, advice))
}

/// Moves `job` to the other machine that yields the smallest makespan.
fn perturb_job(inst: &SchedulingInstance, a: Assignment, job: usize) -> Assignment {
    let cur = a.machine_of[job];
    let mut best: Option<(f64, Assignment)> = None;
    for i in (0..inst.machines()).filter(|&i| i != cur) {
        let mut v = a.machine_of.clone();
        v[job] = i;
        let b = Assignment::new(v);
        let span = makespan(inst, &b).expect("same shape");
        if best.as_ref().is_none_or(|(s, _)| span < *s) {
            best = Some((span, b));
        }
    }
    best.map_or(a, |(_, b)| b)
}

fn check_enumeration(n: usize, m: usize) -> Result<()> {
    let size = (n as f64).powi(m as i32);
    if size > BRUTE_FORCE_CAP as f64 {
        return Err(Error::SizeCap(format!("{n}^{m} assignments exceed the oracle cap of {BRUTE_FORCE_CAP}")));
    }
    Ok(())
}

/// Uniform valuations normalized as requested (`n >= 2` for unit-range).
/// Advice is a uniform permutation or the optimal matching, in half of
/// those cases with two agents' houses swapped.
pub fn sample_house(rng: &mut impl Rng, n: usize, norm: Normalization) -> Result<(ValuationMatrix, Matching)> {
    if norm == Normalization::UnitRange && n < 2 {
        return Err(Error::domain("unit-range valuations need n >= 2"));
    }
    let rows = (0..n)
        .map(|_| {
            let mut r: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            match norm {
                Normalization::UnitRange => {
                    let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    for v in &mut r {
                        *v = (*v - lo) / (hi - lo);
                    }
                }
                Normalization::UnitSum => {
                    let s: f64 = r.iter().sum();
                    for v in &mut r {
                        *v /= s;
                    }
                }
                Normalization::None => {}
            }
            r
        })
        .collect();
    let values = ValuationMatrix::new(rows, norm)?;
    let endowment = if rng.random_bool(0.5) {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(rng);
        Matching::new(p)?
    } else {
        let (opt, _) = opt_matching(&values)?;
        if n >= 2 && rng.random_bool(0.5) {
            let mut p = opt.house_of().to_vec();
            let i = rng.random_range(0..n);
            let j = (i + rng.random_range(1..n)) % n;
            p.swap(i, j);
            Matching::new(p)?
        } else {
            opt
        }
    };
    Ok((values, endowment))
}

/// Random monotone curves: increments are uniform, sorted ascending
/// (convex), descending (concave), or left unsorted, each with probability
/// 1/3. Advice is a uniform random feasible allocation or the optimum, in
/// half of those cases with one item moved between bidders.
pub fn sample_multi_unit(rng: &mut impl Rng, n: usize, m: usize) -> Result<(MultiUnitInstance, BundleAllocation)> {
    if n == 0 {
        return Err(Error::domain("needs at least one bidder"));
    }
    let curves = (0..n)
        .map(|_| {
            let mut inc: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            match rng.random_range(0..3) {
                0 => inc.sort_by(f64::total_cmp),
                1 => inc.sort_by(|a, b| b.total_cmp(a)),
                _ => {}
            }
            let mut c = Vec::with_capacity(m + 1);
            c.push(0.0);
            let mut acc = 0.0;
            for d in inc {
                acc += d;
                c.push(acc);
            }
            c
        })
        .collect();
    let inst = MultiUnitInstance::new(m, curves)?;
    let advice = if rng.random_bool(0.5) {
        let total = rng.random_range(0..=m);
        let mut count_of = vec![0; n];
        for _ in 0..total {
            count_of[rng.random_range(0..n)] += 1;
        }
        BundleAllocation::new(count_of)
    } else {
        let (mut a, _) = mu_opt(&inst)?;
        if n >= 2 && rng.random_bool(0.5) {
            let from = rng.random_range(0..n);
            if a.count_of[from] > 0 {
                let to = (from + rng.random_range(1..n)) % n;
                a.count_of[from] -= 1;
                a.count_of[to] += 1;
            }
        }
        a
    };
    Ok((inst, advice))
}

/// Setting selector for [`sample_random`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    Facility,
    Scheduling,
    House(Normalization),
    MultiUnit,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    Facility(FacilityInstance, Point2),
    Scheduling(SchedulingInstance, Assignment),
    House(ValuationMatrix, Matching),
    MultiUnit(MultiUnitInstance, BundleAllocation),
}

/// Seeded entry point over the per-setting samplers. `m` is the number of
/// jobs or items and is ignored for facility and house settings.
pub fn sample_random(setting: Setting, n: usize, m: usize, seed: Seed) -> Result<Sample> {
    let mut rng = seed.rng();
    Ok(match setting {
        Setting::Facility => {
            let (i, a) = sample_facility(&mut rng, n)?;
            Sample::Facility(i, a)
        }
        Setting::Scheduling => {
            let (i, a) = sample_scheduling(&mut rng, n, m)?;
            Sample::Scheduling(i, a)
        }
        Setting::House(norm) => {
            let (v, e) = sample_house(&mut rng, n, norm)?;
            Sample::House(v, e)
        }
        Setting::MultiUnit => {
            let (i, a) = sample_multi_unit(&mut rng, n, m)?;
            Sample::MultiUnit(i, a)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facility::mbb;
    use approx::assert_abs_diff_eq;

    #[test]
    fn names_round_trip() {
        for k in NAMED_KEYS {
            assert_eq!(k.parse::<NamedKind>().unwrap().to_string(), k);
        }
        assert!("fl-worst".parse::<NamedKind>().is_err());
    }

    #[test]
    fn worst_max_layout() {
        let NamedInstance::Facility { instance, advice } = build(NamedKey::FlWorstMax { rho_hat: 1.5 }).unwrap() else {
            panic!("facility expected");
        };
        assert_eq!(instance.len(), 3);
        assert_abs_diff_eq!(advice.x, advice.y);
        assert_abs_diff_eq!(advice.dist(Point2::new(0.0, 0.0)), 0.5, epsilon = 1e-15);
        let out = mbb(&instance, advice).unwrap();
        assert_abs_diff_eq!(out.report.ratio, 1.5, epsilon = 1e-9);
        assert!(build(NamedKey::FlWorstMax { rho_hat: 3.0 }).is_err());
    }

    #[test]
    fn worst_sum_layout() {
        let NamedInstance::Facility { instance, advice } = build(NamedKey::FlWorstSum { m: 3 }).unwrap() else {
            panic!("facility expected");
        };
        assert_eq!(instance.len(), 6);
        assert_eq!(advice, Point2::new(1.0, 0.0));
        let at = |p: Point2| instance.points().iter().filter(|&&q| q == p).count();
        assert_eq!(at(Point2::new(0.0, 1.0)), 3);
        assert_eq!(at(Point2::new(1.0, 0.0)), 2);
        assert_eq!(at(Point2::new(-1.0, 0.0)), 1);
        assert!(build(NamedKey::FlWorstSum { m: 1 }).is_err());
    }

    #[test]
    fn scheduling_keys_delegate() {
        let key = NamedKey::SchedLb1 { n: 3, rho_hat: 2.0, beta: 1.0, eps: DEFAULT_EPS };
        let NamedInstance::Scheduling { instance, advice } = build(key).unwrap() else {
            panic!("scheduling expected");
        };
        assert_eq!((instance, advice), gen_lb_case1(3, 2.0, 1.0, DEFAULT_EPS).unwrap());
        assert!(matches!(
            build(NamedKey::SchedJump { n: 3, eps: 0.1 }).unwrap(),
            NamedInstance::SchedulingPair { .. }
        ));
    }

    #[test]
    fn facility_sampler_is_deterministic() {
        let a = sample_random(Setting::Facility, 10, 0, Seed(3)).unwrap();
        let b = sample_random(Setting::Facility, 10, 0, Seed(3)).unwrap();
        let c = sample_random(Setting::Facility, 10, 0, Seed(4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unit_sum_rows() {
        let mut rng = Seed(11).rng();
        for _ in 0..50 {
            let (v, e) = sample_house(&mut rng, 6, Normalization::UnitSum).unwrap();
            for i in 0..6 {
                assert!((v.row(i).iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
            assert_eq!(e.len(), 6);
        }
    }

    #[test]
    fn scheduling_perturbed_optimum_is_near_optimal() {
        let mut rng = Seed(5).rng();
        let mut rhos = Vec::new();
        while rhos.len() < 1000 {
            let n = rng.random_range(2..=4);
            let m = rng.random_range(1..=5);
            // replay the sampler's advice branch by hand on the same instance
            let costs = (0..n * m).map(|_| rng.random_range(1.0..10.0)).collect();
            let inst = SchedulingInstance::new(n, m, costs).unwrap();
            let (mut a, opt) = opt_makespan(&inst).unwrap();
            if rng.random_bool(0.5) {
                a = perturb_job(&inst, a, rng.random_range(0..m));
            }
            rhos.push(makespan(&inst, &a).unwrap() / opt);
        }
        rhos.sort_by(f64::total_cmp);
        assert!(rhos[0] >= 1.0 - 1e-12);
        assert!(rhos[499] <= 1.0 + 1e-12, "median {}", rhos[499]);
        assert!(rhos[899] <= 2.0, "90th percentile {}", rhos[899]);
    }

    #[test]
    fn samplers_respect_invariants() {
        let mut rng = Seed(9).rng();
        for _ in 0..100 {
            let (inst, a) = sample_multi_unit(&mut rng, 3, 7).unwrap();
            a.check(&inst).unwrap();
            let (inst, a) = sample_scheduling(&mut rng, 3, 4).unwrap();
            a.check(&inst).unwrap();
            let (v, _) = sample_house(&mut rng, 4, Normalization::UnitRange).unwrap();
            assert_eq!(v.normalization(), Normalization::UnitRange);
        }
        assert!(matches!(sample_scheduling(&mut rng, 10, 10), Err(Error::SizeCap(_))));
    }
}
