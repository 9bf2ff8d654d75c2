//! Maximal-in-range auctions with a recommended allocation.
//!
//! A range is a bid-independent set of allocations; the mechanism picks the
//! welfare-maximizing member and charges Clarke-pivot payments computed over
//! the same set. Extending a range with the recommendation keeps it
//! bid-independent, so the result stays strategyproof.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::{make_report, MechanismOutcome, Objective};

/// Largest `n * m^2` the item-level oracle accepts.
pub const OPT_CAP: u128 = 100_000_000;

/// `n` bidders with value curves over `0..=m` identical items.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiUnitInstance {
    m: usize,
    curves: Vec<Vec<f64>>,
}

impl MultiUnitInstance {
    /// Curves must have length `m + 1`, start at 0, and be finite and
    /// weakly increasing.
    pub fn new(m: usize, curves: Vec<Vec<f64>>) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::domain("needs at least one bidder"));
        }
        for (i, c) in curves.iter().enumerate() {
            if c.len() != m + 1 {
                return Err(Error::dimension(format!(
                    "curve {i} has {} values, expected m + 1 = {}",
                    c.len(),
                    m + 1
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain(format!("curve {i} has a non-finite value")));
            }
            if c[0] != 0.0 {
                return Err(Error::domain(format!("curve {i} must start at 0, got {}", c[0])));
            }
            if let Some(q) = c.windows(2).position(|w| w[1] < w[0]) {
                return Err(Error::domain(format!(
                    "curve {i} decreases between {q} and {} items",
                    q + 1
                )));
            }
        }
        Ok(MultiUnitInstance { m, curves })
    }

    pub fn bidders(&self) -> usize {
        self.curves.len()
    }

    pub fn items(&self) -> usize {
        self.m
    }

    pub fn curves(&self) -> &[Vec<f64>] {
        &self.curves
    }

    pub fn value(&self, bidder: usize, q: usize) -> f64 {
        self.curves[bidder][q]
    }

    /// Copy with one bidder's curve replaced, validated like `new`.
    pub fn with_curve(&self, bidder: usize, curve: Vec<f64>) -> Result<Self> {
        let mut curves = self.curves.clone();
        curves[bidder] = curve;
        MultiUnitInstance::new(self.m, curves)
    }

    /// Value of `bidder` for `q` items, or 0 if that bidder is excluded.
    fn value_excl(&self, bidder: usize, q: usize, excluded: Option<usize>) -> f64 {
        if excluded == Some(bidder) {
            0.0
        } else {
            self.curves[bidder][q]
        }
    }
}

/// Item counts per bidder.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BundleAllocation {
    pub count_of: Vec<usize>,
}

impl BundleAllocation {
    pub fn new(count_of: Vec<usize>) -> Self {
        BundleAllocation { count_of }
    }

    pub fn check(&self, inst: &MultiUnitInstance) -> Result<()> {
        if self.count_of.len() != inst.bidders() {
            return Err(Error::dimension(format!(
                "allocation has {} counts, instance has {} bidders",
                self.count_of.len(),
                inst.bidders()
            )));
        }
        let total: usize = self.count_of.iter().sum();
        if total > inst.m {
            return Err(Error::infeasible(format!(
                "allocation uses {total} items, only {} available",
                inst.m
            )));
        }
        Ok(())
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::domain(format!("bad item count {:?}", t.trim())))
            })
            .collect::<Result<Vec<_>>>()
            .map(BundleAllocation::new)
    }

    pub fn format(&self) -> String {
        self.count_of.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }
}

pub fn mu_welfare(inst: &MultiUnitInstance, a: &BundleAllocation) -> Result<f64> {
    a.check(inst)?;
    Ok(welfare_excl(inst, a, None))
}

fn welfare_excl(inst: &MultiUnitInstance, a: &BundleAllocation, excluded: Option<usize>) -> f64 {
    a.count_of
        .iter()
        .enumerate()
        .map(|(i, &q)| inst.value_excl(i, q, excluded))
        .sum()
}

/// `(a, w)` beats `(b, v)` if it has more welfare, or equal welfare and a
/// lexicographically larger count vector.
fn better(a: &BundleAllocation, w: f64, b: &BundleAllocation, v: f64) -> bool {
    w > v || (w == v && a > b)
}

/// A bid-independent set of allocations that can be optimized over, with
/// one bidder optionally valued at zero (for pivot payments).
pub trait MirRange {
    fn maximize(&self, inst: &MultiUnitInstance, excluded: Option<usize>) -> (BundleAllocation, f64);
}

/// Whole-bundle allocations: the `m` items are cut into `n^2` bundles of
/// size `floor(m / n^2)`, the first `m mod n^2` of them one item larger, and
/// bidders take consecutive runs of bundles in bidder order.
#[derive(Debug, Clone, Copy, Default)]
pub struct BundleRange;

/// Bundle sizes for `n` bidders and `m` items.
pub fn bundle_sizes(n: usize, m: usize) -> Vec<usize> {
    let k = n * n;
    let (base, extra) = (m / k, m % k);
    (0..k).map(|b| base + usize::from(b < extra)).collect()
}

impl MirRange for BundleRange {
    fn maximize(&self, inst: &MultiUnitInstance, excluded: Option<usize>) -> (BundleAllocation, f64) {
        let n = inst.bidders();
        let sizes = bundle_sizes(n, inst.m);
        let k = sizes.len();
        let mut prefix = vec![0usize; k + 1];
        for b in 0..k {
            prefix[b + 1] = prefix[b] + sizes[b];
        }
        // best[i][b]: max welfare of bidders i.. starting at bundle b
        let mut best = vec![vec![0.0; k + 1]; n + 1];
        for i in (0..n).rev() {
            for b in 0..=k {
                best[i][b] = (b..=k)
                    .map(|e| inst.value_excl(i, prefix[e] - prefix[b], excluded) + best[i + 1][e])
                    .fold(f64::NEG_INFINITY, f64::max);
            }
        }
        // largest count first gives the lexicographically largest vector
        let mut count_of = Vec::with_capacity(n);
        let mut b = 0;
        for i in 0..n {
            let e = (b..=k)
                .rev()
                .find(|&e| inst.value_excl(i, prefix[e] - prefix[b], excluded) + best[i + 1][e] == best[i][b])
                .expect("the maximum is attained");
            count_of.push(prefix[e] - prefix[b]);
            b = e;
        }
        let a = BundleAllocation { count_of };
        // left-to-right sum, as every other welfare in this module
        let w = welfare_excl(inst, &a, excluded);
        (a, w)
    }
}

/// A finite list of allocations.
#[derive(Debug, Clone)]
pub struct ExplicitRange(pub Vec<BundleAllocation>);

impl MirRange for ExplicitRange {
    fn maximize(&self, inst: &MultiUnitInstance, excluded: Option<usize>) -> (BundleAllocation, f64) {
        let mut it = self.0.iter();
        let first = it.next().expect("range must be nonempty").clone();
        let w = welfare_excl(inst, &first, excluded);
        it.fold((first, w), |(ba, bw), a| {
            let w = welfare_excl(inst, a, excluded);
            if better(a, w, &ba, bw) {
                (a.clone(), w)
            } else {
                (ba, bw)
            }
        })
    }
}

/// A base range plus one extra allocation.
#[derive(Debug, Clone)]
pub struct ExtendedRange<R> {
    pub base: R,
    pub extra: BundleAllocation,
}

impl<R: MirRange> MirRange for ExtendedRange<R> {
    fn maximize(&self, inst: &MultiUnitInstance, excluded: Option<usize>) -> (BundleAllocation, f64) {
        let (a, w) = self.base.maximize(inst, excluded);
        let we = welfare_excl(inst, &self.extra, excluded);
        if better(&self.extra, we, &a, w) {
            (self.extra.clone(), we)
        } else {
            (a, w)
        }
    }
}

/// Clarke-pivot payments over `range` for the allocation it selects.
pub fn vcg_payments_over_range(inst: &MultiUnitInstance, range: &impl MirRange) -> Vec<f64> {
    let (chosen, _) = range.maximize(inst, None);
    pivot_payments(inst, range, &chosen)
}

fn pivot_payments(inst: &MultiUnitInstance, range: &impl MirRange, chosen: &BundleAllocation) -> Vec<f64> {
    (0..inst.bidders())
        .map(|i| {
            let (_, without) = range.maximize(inst, Some(i));
            let others = welfare_excl(inst, chosen, Some(i));
            // both sides sum the same terms in different orders
            let p = without - others;
            if p < 0.0 && p > -1e-9 {
                0.0
            } else {
                p
            }
        })
        .collect()
}

pub fn mu_mir_base(inst: &MultiUnitInstance) -> BundleAllocation {
    BundleRange.maximize(inst, None).0
}

/// Runs any range mechanism extended by `a_hat`, reported against the
/// item-level optimum.
pub fn mir_with_advice_over(
    inst: &MultiUnitInstance,
    base: impl MirRange,
    a_hat: &BundleAllocation,
) -> Result<MechanismOutcome<BundleAllocation>> {
    a_hat.check(inst)?;
    let range = ExtendedRange {
        base,
        extra: a_hat.clone(),
    };
    let (chosen, w) = range.maximize(inst, None);
    let payments = pivot_payments(inst, &range, &chosen);
    let (_, opt) = mu_opt(inst)?;
    let report = make_report(Objective::Maximize, w, opt, welfare_excl(inst, a_hat, None), None)?;
    Ok(MechanismOutcome {
        alternative: chosen,
        payments,
        report,
    })
}

pub fn mir_with_advice(inst: &MultiUnitInstance, a_hat: &BundleAllocation) -> Result<MechanismOutcome<BundleAllocation>> {
    mir_with_advice_over(inst, BundleRange, a_hat)
}

/// Base mechanism alone: bundle range, pivot payments, reported against the
/// optimum with no advice (the advice slot holds the base output).
pub fn mu_base_outcome(inst: &MultiUnitInstance) -> Result<MechanismOutcome<BundleAllocation>> {
    let (chosen, w) = BundleRange.maximize(inst, None);
    let payments = pivot_payments(inst, &BundleRange, &chosen);
    let (_, opt) = mu_opt(inst)?;
    let report = make_report(Objective::Maximize, w, opt, w, None)?;
    Ok(MechanismOutcome {
        alternative: chosen,
        payments,
        report,
    })
}

/// Exact optimum over all item splits, by DP over bidders and remaining
/// items. Ties go to the lexicographically largest count vector.
pub fn mu_opt(inst: &MultiUnitInstance) -> Result<(BundleAllocation, f64)> {
    let n = inst.bidders();
    let m = inst.m;
    let size = n as u128 * (m as u128) * (m as u128);
    if size > OPT_CAP {
        return Err(Error::SizeCap(format!(
            "n * m^2 = {size} exceeds the oracle cap of {OPT_CAP}"
        )));
    }
    // best[i][r]: max welfare of bidders i.. with r items left
    let mut best = vec![vec![0.0; m + 1]; n + 1];
    for i in (0..n).rev() {
        for r in 0..=m {
            best[i][r] = (0..=r)
                .map(|q| inst.value(i, q) + best[i + 1][r - q])
                .fold(f64::NEG_INFINITY, f64::max);
        }
    }
    let mut count_of = Vec::with_capacity(n);
    let mut r = m;
    for i in 0..n {
        let q = (0..=r)
            .rev()
            .find(|&q| inst.value(i, q) + best[i + 1][r - q] == best[i][r])
            .expect("the maximum is attained");
        count_of.push(q);
        r -= q;
    }
    let a = BundleAllocation { count_of };
    let w = welfare_excl(inst, &a, None);
    Ok((a, w))
}
