//! Makespan minimization on unrelated machines.
//!
//! Machines are the agents; `t[i][j]` is machine `i`'s private processing
//! time for job `j`. AllocationScaledGreedy weights every (machine, job)
//! pair by 1 when the recommendation puts the job on that machine and by
//! `n / beta` otherwise, then runs an independent weighted-VCG reverse
//! auction per job.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::{make_report, MechanismOutcome, Objective};

/// Largest `n^m` the brute-force optimum will enumerate.
pub const BRUTE_FORCE_CAP: u64 = 1_000_000;

/// Default slack used by the lower-bound generators.
pub const DEFAULT_EPS: f64 = 1e-6;

/// `n x m` processing times, row-major. `+inf` marks "never assign".
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulingInstance {
    n: usize,
    m: usize,
    costs: Vec<f64>,
}

impl SchedulingInstance {
    pub fn new(n: usize, m: usize, costs: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("scheduling instance needs at least one machine"));
        }
        if costs.len() != n * m {
            return Err(Error::dimension(format!(
                "expected {} costs for {n} machines x {m} jobs, got {}",
                n * m,
                costs.len()
            )));
        }
        if let Some(k) = costs.iter().position(|c| c.is_nan() || *c < 0.0) {
            return Err(Error::domain(format!(
                "cost of machine {} on job {} must be >= 0, got {}",
                k / m.max(1),
                k % m.max(1),
                costs[k]
            )));
        }
        Ok(SchedulingInstance { n, m, costs })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != m) {
            return Err(Error::dimension(format!("row {i} has {} entries, expected {m}", rows[i].len())));
        }
        Self::new(n, m, rows.into_iter().flatten().collect())
    }

    pub fn machines(&self) -> usize {
        self.n
    }

    pub fn jobs(&self) -> usize {
        self.m
    }

    pub fn cost(&self, machine: usize, job: usize) -> f64 {
        self.costs[machine * self.m + job]
    }

    pub fn set_cost(&mut self, machine: usize, job: usize, value: f64) {
        assert!(value >= 0.0, "negative processing time");
        self.costs[machine * self.m + job] = value;
    }

    pub fn row(&self, machine: usize) -> &[f64] {
        &self.costs[machine * self.m..(machine + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n).map(move |i| self.row(i))
    }

    pub fn scaled(&self, c: f64) -> SchedulingInstance {
        SchedulingInstance {
            n: self.n,
            m: self.m,
            costs: self.costs.iter().map(|x| x * c).collect(),
        }
    }
}

/// Job-to-machine map: `machine_of[j]` runs job `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Assignment {
    pub machine_of: Vec<usize>,
}

impl Assignment {
    pub fn new(machine_of: Vec<usize>) -> Self {
        Assignment { machine_of }
    }

    pub fn check(&self, inst: &SchedulingInstance) -> Result<()> {
        if self.machine_of.len() != inst.m {
            return Err(Error::dimension(format!(
                "assignment covers {} jobs, instance has {}",
                self.machine_of.len(),
                inst.m
            )));
        }
        if let Some(j) = self.machine_of.iter().position(|&i| i >= inst.n) {
            return Err(Error::infeasible(format!(
                "job {j} assigned to machine {} but only {} machines exist",
                self.machine_of[j], inst.n
            )));
        }
        Ok(())
    }

    /// Per-machine load.
    pub fn loads(&self, inst: &SchedulingInstance) -> Vec<f64> {
        let mut loads = vec![0.0; inst.n];
        for (j, &i) in self.machine_of.iter().enumerate() {
            loads[i] += inst.cost(i, j);
        }
        loads
    }
}

pub fn makespan(inst: &SchedulingInstance, a: &Assignment) -> Result<f64> {
    a.check(inst)?;
    Ok(a.loads(inst).into_iter().fold(0.0, f64::max))
}

/// Confidence in the recommendation: 1 trusts it fully, `n` ignores it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsgConfig {
    beta: f64,
}

impl AsgConfig {
    pub fn new(beta: f64, machines: usize) -> Result<Self> {
        if !(1.0..=machines as f64).contains(&beta) {
            return Err(Error::domain(format!(
                "beta must lie in [1, n] = [1, {machines}], got {beta}"
            )));
        }
        Ok(AsgConfig { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// `n x m` row-major weights: 1 on the recommended machine, `n / beta`
/// elsewhere.
pub fn asg_weights(inst: &SchedulingInstance, a_hat: &Assignment, cfg: &AsgConfig) -> Result<Vec<f64>> {
    a_hat.check(inst)?;
    let off = inst.n as f64 / cfg.beta;
    let mut w = vec![off; inst.n * inst.m];
    for (j, &i) in a_hat.machine_of.iter().enumerate() {
        w[i * inst.m + j] = 1.0;
    }
    Ok(w)
}

fn weighted_winner(inst: &SchedulingInstance, weights: &[f64], j: usize) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..inst.n {
        let t = inst.cost(i, j);
        if t.is_infinite() {
            continue;
        }
        let wc = weights[i * inst.m + j] * t;
        if best.is_none_or(|(_, b)| wc < b) {
            best = Some((i, wc));
        }
    }
    best.map(|(i, _)| i)
        .ok_or_else(|| Error::infeasible(format!("every machine declares +inf on job {j}")))
}

/// Weighted-VCG reverse auction for job `j`: the winner minimizes
/// `r_ij * t_ij` (lowest index on ties) and is paid the smallest competing
/// weighted bid divided by its own weight. A lone machine is paid its cost.
pub fn pay_per_job(inst: &SchedulingInstance, weights: &[f64], j: usize) -> Result<(usize, f64)> {
    if weights.len() != inst.n * inst.m {
        return Err(Error::dimension("weights must be n x m"));
    }
    if j >= inst.m {
        return Err(Error::dimension(format!("job {j} out of range")));
    }
    let winner = weighted_winner(inst, weights, j)?;
    if inst.n == 1 {
        return Ok((winner, inst.cost(winner, j)));
    }
    let runner_up = (0..inst.n)
        .filter(|&i| i != winner)
        .map(|i| weights[i * inst.m + j] * inst.cost(i, j))
        .fold(f64::INFINITY, f64::min);
    Ok((winner, runner_up / weights[winner * inst.m + j]))
}

/// The per-job allocation rule on its own (no payments, no report).
pub fn asg_allocate(inst: &SchedulingInstance, a_hat: &Assignment, cfg: &AsgConfig) -> Result<Assignment> {
    let w = asg_weights(inst, a_hat, cfg)?;
    let machine_of = (0..inst.m)
        .map(|j| weighted_winner(inst, &w, j))
        .collect::<Result<_>>()?;
    Ok(Assignment { machine_of })
}

/// Per-machine payments summed over the jobs each machine wins.
pub fn asg_payments(inst: &SchedulingInstance, a_hat: &Assignment, cfg: &AsgConfig) -> Result<(Assignment, Vec<f64>)> {
    let w = asg_weights(inst, a_hat, cfg)?;
    let mut machine_of = Vec::with_capacity(inst.m);
    let mut payments = vec![0.0; inst.n];
    for j in 0..inst.m {
        let (i, p) = pay_per_job(inst, &w, j)?;
        machine_of.push(i);
        payments[i] += p;
    }
    Ok((Assignment { machine_of }, payments))
}

/// Whether the report's optimum is exact or a lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OptSource {
    BruteForce,
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleMode {
    #[default]
    On,
    Off,
}

/// AllocationScaledGreedy with payments and a quality report.
///
/// The report uses the brute-force optimum when the oracle is on and
/// `n^m <= BRUTE_FORCE_CAP`; otherwise `opt_value` is
/// [`makespan_lower_bound`] and the ratio is an upper estimate.
pub fn asg(
    inst: &SchedulingInstance,
    a_hat: &Assignment,
    cfg: &AsgConfig,
    oracle: OracleMode,
) -> Result<(MechanismOutcome<Assignment>, OptSource)> {
    let (alloc, payments) = asg_payments(inst, a_hat, cfg)?;
    let mech = makespan(inst, &alloc)?;
    let advice = makespan(inst, a_hat)?;
    let (opt, source) = match oracle {
        OracleMode::On if within_cap(inst) => (opt_makespan(inst)?.1, OptSource::BruteForce),
        _ => (makespan_lower_bound(inst), OptSource::LowerBound),
    };
    let report = make_report(Objective::Minimize, mech, opt, advice, None)?;
    Ok((
        MechanismOutcome {
            alternative: alloc,
            payments,
            report,
        },
        source,
    ))
}

fn within_cap(inst: &SchedulingInstance) -> bool {
    (inst.n as u64)
        .checked_pow(inst.m as u32)
        .is_some_and(|c| c <= BRUTE_FORCE_CAP)
}

/// `max(max_j min_i t_ij, sum_j min_i t_ij / n)`.
pub fn makespan_lower_bound(inst: &SchedulingInstance) -> f64 {
    let mins: Vec<f64> = (0..inst.m)
        .map(|j| (0..inst.n).map(|i| inst.cost(i, j)).fold(f64::INFINITY, f64::min))
        .collect();
    let biggest = mins.iter().copied().fold(0.0, f64::max);
    let spread = mins.iter().sum::<f64>() / inst.n as f64;
    biggest.max(spread)
}

/// Exact minimum makespan by depth-first enumeration with pruning. Among
/// optimal assignments the lexicographically smallest is returned.
pub fn opt_makespan(inst: &SchedulingInstance) -> Result<(Assignment, f64)> {
    if !within_cap(inst) {
        return Err(Error::SizeCap(format!(
            "{}^{} assignments exceed the brute-force cap of {BRUTE_FORCE_CAP}",
            inst.n, inst.m
        )));
    }
    struct Search<'a> {
        inst: &'a SchedulingInstance,
        loads: Vec<f64>,
        current: Vec<usize>,
        best: Vec<usize>,
        best_value: f64,
    }
    impl Search<'_> {
        fn go(&mut self, j: usize, partial: f64) {
            if j == self.inst.m {
                if partial < self.best_value {
                    self.best_value = partial;
                    self.best.clone_from(&self.current);
                }
                return;
            }
            for i in 0..self.inst.n {
                let load = self.loads[i] + self.inst.cost(i, j);
                let next = partial.max(load);
                if next >= self.best_value {
                    continue;
                }
                self.loads[i] = load;
                self.current[j] = i;
                self.go(j + 1, next);
                self.loads[i] -= self.inst.cost(i, j);
            }
        }
    }
    let mut s = Search {
        inst,
        loads: vec![0.0; inst.n],
        current: vec![0; inst.m],
        best: vec![0; inst.m],
        best_value: f64::INFINITY,
    };
    s.go(0, 0.0);
    if s.best_value.is_infinite() {
        // every assignment hits a +inf entry
        let a = Assignment::new(vec![0; inst.m]);
        let v = makespan(inst, &a)?;
        return Ok((a, v));
    }
    // recompute from scratch to drop accumulated load round-off
    let best = Assignment::new(s.best);
    let v = makespan(inst, &best)?;
    Ok((best, v))
}

/// Cost matrix of the first lower-bound family without any range checks:
/// `t_ii = rho_hat` for `i < n-1`, last row `beta * rho_hat / n - eps`,
/// everything else 1. `n` machines, `n - 1` jobs.
pub fn lb_case1_costs(n: usize, rho_hat: f64, beta: f64, eps: f64) -> SchedulingInstance {
    let m = n - 1;
    let mut costs = vec![1.0; n * m];
    for i in 0..m {
        costs[i * m + i] = rho_hat;
    }
    for j in 0..m {
        costs[(n - 1) * m + j] = beta * rho_hat / n as f64 - eps;
    }
    SchedulingInstance { n, m, costs }
}

/// Lower-bound instance for `rho_hat <= n / beta`: the recommendation puts
/// job `i` on machine `i`, and AllocationScaledGreedy moves every job to the
/// last machine.
pub fn gen_lb_case1(n: usize, rho_hat: f64, beta: f64, eps: f64) -> Result<(SchedulingInstance, Assignment)> {
    let nf = n as f64;
    if n < 2 {
        return Err(Error::domain("needs n >= 2 machines"));
    }
    if !(1.0..=nf).contains(&beta) {
        return Err(Error::domain(format!("beta must lie in [1, n], got {beta}")));
    }
    if !(1.0..=nf / beta).contains(&rho_hat) {
        return Err(Error::domain(format!(
            "rho_hat must lie in [1, n/beta] = [1, {}], got {rho_hat}",
            nf / beta
        )));
    }
    if beta * rho_hat * (nf - 1.0) / nf < 1.0 {
        return Err(Error::domain(
            "requires beta * rho_hat * (n-1)/n >= 1; otherwise the optimum moves every job to machine n",
        ));
    }
    if eps <= 0.0 || eps >= beta * rho_hat / nf {
        return Err(Error::domain("eps must lie in (0, beta * rho_hat / n)"));
    }
    let inst = lb_case1_costs(n, rho_hat, beta, eps);
    let a_hat = Assignment::new((0..n - 1).collect());
    Ok((inst, a_hat))
}

/// `min(n - 1, ceil(beta * rho_hat / n))`.
pub fn lb_case2_k(n: usize, rho_hat: f64, beta: f64) -> usize {
    let k = (beta * rho_hat / n as f64 - 1e-12).ceil().max(1.0) as usize;
    k.min(n - 1)
}

/// Lower-bound instance for `rho_hat > n / beta`: `n - 1 + k` jobs; the
/// recommendation gives job `i` to machine `i < n` and the last `k` jobs to
/// machine `n`.
pub fn gen_lb_case2(n: usize, rho_hat: f64, beta: f64, eps: f64) -> Result<(SchedulingInstance, Assignment)> {
    let nf = n as f64;
    if n < 2 {
        return Err(Error::domain("needs n >= 2 machines"));
    }
    if !(1.0..=nf).contains(&beta) {
        return Err(Error::domain(format!("beta must lie in [1, n], got {beta}")));
    }
    if rho_hat <= nf / beta {
        return Err(Error::domain(format!(
            "rho_hat must exceed n/beta = {}, got {rho_hat}",
            nf / beta
        )));
    }
    if eps <= 0.0 || eps >= 1.0 {
        return Err(Error::domain("eps must lie in (0, 1)"));
    }
    let k = lb_case2_k(n, rho_hat, beta);
    let m = n - 1 + k;
    let mut costs = vec![1.0; n * m];
    for i in 0..n - 1 {
        costs[i * m + i] = 2.0 * rho_hat;
    }
    let last = (n - 1) * m;
    for j in 0..m {
        costs[last + j] = if j < n - 1 { 1.0 - eps } else { nf / beta - eps };
    }
    let machine_of = (0..m).map(|j| j.min(n - 1)).collect();
    Ok((SchedulingInstance { n, m, costs }, Assignment::new(machine_of)))
}

/// Predicted and actual `n x (n-1)` instances: all ones except the last
/// machine, at `1 + eps` (predicted) and `1 - eps` (actual).
pub fn gen_jump_example(n: usize, eps: f64) -> Result<(SchedulingInstance, SchedulingInstance)> {
    if n < 2 {
        return Err(Error::domain("needs n >= 2 machines"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    let build = |last: f64| {
        let m = n - 1;
        let mut costs = vec![1.0; n * m];
        costs[(n - 1) * m..].fill(last);
        SchedulingInstance { n, m, costs }
    };
    Ok((build(1.0 + eps), build(1.0 - eps)))
}
