//! Randomized strategyproofness auditor.
//!
//! Each trial samples an instance and a recommendation, picks one agent as
//! the deviator and compares its true utility under truthful reporting with
//! its true utility under at least 16 sampled misreports. Any gain above
//! [`GAIN_TOL`] is a violation.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::auctions::{vcg_payments_over_range, BundleRange, ExtendedRange, MirRange, MultiUnitInstance};
use crate::error::{Error, Result};
use crate::facility::{cmp_point, mbb_point, CmpConfig, FacilityInstance, Point2, TieBreak};
use crate::house::{ttc_allocate, Matching, Normalization, ValuationMatrix};
use crate::instances::{sample_house, sample_multi_unit, sample_scheduling};
use crate::report::Seed;
use crate::scheduling::{asg_payments, AsgConfig, SchedulingInstance};

pub const GAIN_TOL: f64 = 1e-9;

/// Violations kept in the report; the count covers all of them.
const KEEP_VIOLATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AuditSetting {
    FacilityMbb,
    FacilityCmp,
    Scheduling,
    House,
    MultiUnit,
}

const SETTING_NAMES: [&str; 5] = ["facility-mbb", "facility-cmp", "scheduling", "house", "multi-unit"];

impl AuditSetting {
    pub const ALL: [AuditSetting; 5] = [
        AuditSetting::FacilityMbb,
        AuditSetting::FacilityCmp,
        AuditSetting::Scheduling,
        AuditSetting::House,
        AuditSetting::MultiUnit,
    ];

    fn has_payments(self) -> bool {
        matches!(self, AuditSetting::Scheduling | AuditSetting::MultiUnit)
    }
}

impl FromStr for AuditSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SETTING_NAMES
            .iter()
            .position(|n| *n == s)
            .map(|i| AuditSetting::ALL[i])
            .ok_or_else(|| Error::domain(format!("unknown setting {s:?}; expected one of {}", SETTING_NAMES.join(", "))))
    }
}

impl fmt::Display for AuditSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(SETTING_NAMES[*self as usize])
    }
}

/// Deliberate payment corruption, used to check that the auditor can see
/// a broken mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum PaymentFault {
    #[default]
    None,
    SignFlip,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub instance: usize,
    pub agent: usize,
    pub misreport: String,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub setting: String,
    pub seed: u64,
    pub trials: usize,
    pub misreports: usize,
    pub violation_count: usize,
    /// The first violations by trial index.
    pub violations: Vec<Violation>,
    /// Largest gain seen, floored at 0.
    pub max_gain: f64,
}

pub fn audit_sp(setting: AuditSetting, seed: Seed, trials: usize) -> Result<AuditReport> {
    audit_sp_with_fault(setting, seed, trials, PaymentFault::None)
}

pub fn audit_sp_with_fault(setting: AuditSetting, seed: Seed, trials: usize, fault: PaymentFault) -> Result<AuditReport> {
    if trials == 0 {
        return Err(Error::domain("trials must be >= 1"));
    }
    if fault != PaymentFault::None && !setting.has_payments() {
        return Err(Error::domain(format!("{setting} has no payments to corrupt")));
    }
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed.derive(t as u64).rng();
            let probes = match setting {
                AuditSetting::FacilityMbb => facility_trial(&mut rng, false)?,
                AuditSetting::FacilityCmp => facility_trial(&mut rng, true)?,
                AuditSetting::Scheduling => scheduling_trial(&mut rng, fault)?,
                AuditSetting::House => house_trial(&mut rng)?,
                AuditSetting::MultiUnit => multi_unit_trial(&mut rng, fault)?,
            };
            Ok((t, probes))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = AuditReport {
        setting: setting.to_string(),
        seed: seed.0,
        trials,
        misreports: 0,
        violation_count: 0,
        violations: Vec::new(),
        max_gain: 0.0,
    };
    for (t, probes) in per_trial {
        report.misreports += probes.len();
        for p in probes {
            report.max_gain = report.max_gain.max(p.gain);
            if p.gain > GAIN_TOL {
                report.violation_count += 1;
                if report.violations.len() < KEEP_VIOLATIONS {
                    report.violations.push(Violation {
                        instance: t,
                        agent: p.agent,
                        misreport: p.description,
                        gain: p.gain,
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Utility gain of one misreport over truth-telling.
struct Probe {
    agent: usize,
    description: String,
    gain: f64,
}

fn facility_trial(rng: &mut ChaCha8Rng, median: bool) -> Result<Vec<Probe>> {
    let n = rng.random_range(1..=15);
    let pts: Vec<Point2> = (0..n)
        .map(|_| Point2::new(rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    // advice from outside the box, inside it, or on an agent
    let a_hat = match rng.random_range(0..3) {
        0 => Point2::new(rng.random_range(-0.5..1.5), rng.random_range(-0.5..1.5)),
        1 => Point2::new(rng.random::<f64>(), rng.random::<f64>()),
        _ => pts[rng.random_range(0..n)],
    };
    let cfg = CmpConfig::new(
        rng.random_range(0.0..0.99),
        if rng.random_bool(0.5) { TieBreak::Low } else { TieBreak::High },
    )?;
    let run = |p: &[Point2]| -> Result<Point2> {
        let inst = FacilityInstance::new(p.to_vec())?;
        Ok(if median { cmp_point(&inst, a_hat, &cfg) } else { mbb_point(&inst, a_hat) })
    };
    let agent = rng.random_range(0..n);
    let truth = pts[agent];
    let honest = run(&pts)?.dist(truth);

    let mut reports: Vec<(String, Point2)> = Vec::new();
    let small = Normal::new(0.0, 0.1).expect("valid normal");
    for _ in 0..8 {
        let p = Point2::new(truth.x + small.sample(rng), truth.y + small.sample(rng));
        reports.push(("gaussian shift".into(), p));
    }
    for _ in 0..4 {
        let p = Point2::new(rng.random_range(-5.0..6.0), rng.random_range(-5.0..6.0));
        reports.push(("large jump".into(), p));
    }
    let out = run(&pts)?;
    reports.push(("mirror through outcome".into(), Point2::new(2.0 * out.x - truth.x, 2.0 * out.y - truth.y)));
    reports.push(("report the advice".into(), a_hat));
    reports.push(("far corner".into(), Point2::new(truth.x + 100.0, truth.y - 100.0)));
    reports.push(("far corner".into(), Point2::new(truth.x - 100.0, truth.y + 100.0)));

    reports
        .into_iter()
        .map(|(what, p)| {
            let mut lie = pts.clone();
            lie[agent] = p;
            let d = run(&lie)?.dist(truth);
            Ok(Probe {
                agent,
                description: format!("{what} to ({:.6}, {:.6})", p.x, p.y),
                gain: honest - d,
            })
        })
        .collect()
}

/// Machine utility: payments received minus true cost of the jobs won.
fn machine_utility(
    truth: &SchedulingInstance,
    bids: &SchedulingInstance,
    a_hat: &crate::scheduling::Assignment,
    cfg: &AsgConfig,
    agent: usize,
    fault: PaymentFault,
) -> Result<f64> {
    let (alloc, pay) = asg_payments(bids, a_hat, cfg)?;
    let cost: f64 = alloc
        .machine_of
        .iter()
        .enumerate()
        .filter(|&(_, &i)| i == agent)
        .map(|(j, _)| truth.cost(agent, j))
        .sum();
    let p = match fault {
        PaymentFault::None => pay[agent],
        PaymentFault::SignFlip => -pay[agent],
    };
    Ok(p - cost)
}

fn scheduling_trial(rng: &mut ChaCha8Rng, fault: PaymentFault) -> Result<Vec<Probe>> {
    let n = rng.random_range(2..=4);
    let m = rng.random_range(1..=5);
    let (inst, a_hat) = sample_scheduling(rng, n, m)?;
    let cfg = AsgConfig::new(rng.random_range(1.0..=n as f64), n)?;
    let agent = rng.random_range(0..n);
    let honest = machine_utility(&inst, &inst, &a_hat, &cfg, agent, fault)?;

    let log8 = 8f64.ln();
    let mut lies: Vec<(String, Vec<f64>)> = Vec::new();
    for _ in 0..8 {
        let mut row = inst.row(agent).to_vec();
        for v in row.iter_mut() {
            if rng.random_bool(0.5) {
                *v *= rng.random_range(-log8..=log8).exp();
            }
        }
        lies.push(("scaled entries".into(), row));
    }
    for f in [0.125, 8.0] {
        lies.push((format!("row scaled by {f}"), inst.row(agent).iter().map(|v| v * f).collect()));
    }
    for _ in 0..3 {
        let mut row = inst.row(agent).to_vec();
        let j = rng.random_range(0..m);
        row[j] = f64::INFINITY;
        lies.push((format!("job {j} spiked to inf"), row));
    }
    for _ in 0..3 {
        let mut row = inst.row(agent).to_vec();
        let j = rng.random_range(0..m);
        row[j] = 0.0;
        lies.push((format!("job {j} spiked to 0"), row));
    }

    lies.into_iter()
        .map(|(what, row)| {
            let mut bids = inst.clone();
            for (j, v) in row.into_iter().enumerate() {
                bids.set_cost(agent, j, v);
            }
            let u = machine_utility(&inst, &bids, &a_hat, &cfg, agent, fault)?;
            Ok(Probe {
                agent,
                description: what,
                gain: u - honest,
            })
        })
        .collect()
}

fn house_trial(rng: &mut ChaCha8Rng) -> Result<Vec<Probe>> {
    let n = rng.random_range(2..=6);
    let norm = if rng.random_bool(0.5) {
        Normalization::UnitRange
    } else {
        Normalization::UnitSum
    };
    let (v, endowment) = sample_house(rng, n, norm)?;
    let agent = rng.random_range(0..n);
    let truth = v.row(agent).to_vec();

    let mut lies: Vec<(String, Vec<f64>)> = Vec::new();
    for _ in 0..6 {
        let mut r = truth.clone();
        r.shuffle(rng);
        lies.push(("row permuted".into(), r));
    }
    for _ in 0..6 {
        let mut r = truth.clone();
        let a = rng.random_range(0..n);
        let b = (a + rng.random_range(1..n)) % n;
        r.swap(a, b);
        lies.push((format!("houses {a} and {b} swapped"), r));
    }
    for _ in 0..4 {
        let top = rng.random_range(0..n);
        let r = (0..n).map(|h| if h == top { 1.0 } else { rng.random::<f64>() * 0.5 }).collect();
        lies.push((format!("house {top} put on top"), r));
    }

    let mut probes = Vec::new();
    for (variant, seed_matching) in [("endowment", endowment), ("identity", Matching::identity(n))] {
        let honest = truth[ttc_allocate(&v, &seed_matching)?.house_of()[agent]];
        for (what, r) in &lies {
            let lie: ValuationMatrix = v.with_row(agent, r);
            let got = truth[ttc_allocate(&lie, &seed_matching)?.house_of()[agent]];
            probes.push(Probe {
                agent,
                description: format!("{what} ({variant} seeded)"),
                gain: got - honest,
            });
        }
    }
    Ok(probes)
}

fn bidder_utility(
    truth: &MultiUnitInstance,
    bids: &MultiUnitInstance,
    range: &impl MirRange,
    agent: usize,
    fault: PaymentFault,
) -> f64 {
    let (alloc, _) = range.maximize(bids, None);
    let pay = vcg_payments_over_range(bids, range)[agent];
    let p = match fault {
        PaymentFault::None => pay,
        PaymentFault::SignFlip => -pay,
    };
    truth.value(agent, alloc.count_of[agent]) - p
}

fn multi_unit_trial(rng: &mut ChaCha8Rng, fault: PaymentFault) -> Result<Vec<Probe>> {
    let n = rng.random_range(1..=4);
    let m = rng.random_range(0..=12);
    let (inst, a_hat) = sample_multi_unit(rng, n, m)?;
    let range = ExtendedRange {
        base: BundleRange,
        extra: a_hat,
    };
    let agent = rng.random_range(0..n);
    let truth = inst.curves()[agent].clone();
    let honest = bidder_utility(&inst, &inst, &range, agent, fault);

    let log8 = 8f64.ln();
    let mut lies: Vec<(String, Vec<f64>)> = Vec::new();
    for _ in 0..6 {
        let f = rng.random_range(-log8..=log8).exp();
        lies.push((format!("curve scaled by {f:.4}"), truth.iter().map(|v| v * f).collect()));
    }
    for _ in 0..6 {
        // rescale each increment independently; stays monotone
        let mut c = vec![0.0];
        for q in 1..=m {
            let d = (truth[q] - truth[q - 1]) * rng.random_range(-log8..=log8).exp();
            c.push(c[q - 1] + d);
        }
        lies.push(("increments rescaled".into(), c));
    }
    let top = truth[m];
    lies.push(("zero curve".into(), vec![0.0; m + 1]));
    lies.push(("single-item step".into(), (0..=m).map(|q| if q == 0 { 0.0 } else { top }).collect()));
    lies.push(("all-or-nothing".into(), (0..=m).map(|q| if q == m { 2.0 * top } else { 0.0 }).collect()));
    lies.push(("linear".into(), (0..=m).map(|q| top * q as f64 / m.max(1) as f64).collect()));

    lies.into_iter()
        .map(|(what, c)| {
            let bids = inst.with_curve(agent, c)?;
            Ok(Probe {
                agent,
                description: what,
                gain: bidder_utility(&inst, &bids, &range, agent, fault) - honest,
            })
        })
        .collect()
}
