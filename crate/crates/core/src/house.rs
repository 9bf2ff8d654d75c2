//! House allocation: Top Trading Cycles seeded with a recommended matching.
//!
//! Agent `i` values house `j` at `t[i][j]`. The recommended matching is used
//! as the initial endowment; TTC then only lets agents trade up, so the
//! final welfare is never below the recommendation's.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::{make_report, MechanismOutcome, Objective};

/// Largest instance the matching oracle accepts.
pub const MATCHING_CAP: usize = 1000;

pub const DEFAULT_EPS: f64 = 1e-6;

const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Normalization {
    UnitRange,
    UnitSum,
    None,
}

/// Square matrix of nonnegative valuations, validated against its
/// normalization on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuationMatrix {
    n: usize,
    values: Vec<f64>,
    normalization: Normalization,
}

impl ValuationMatrix {
    pub fn new(rows: Vec<Vec<f64>>, normalization: Normalization) -> Result<Self> {
        let n = rows.len();
        if let Some(i) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::dimension(format!(
                "row {i} has {} values, expected {n}",
                rows[i].len()
            )));
        }
        for (i, r) in rows.iter().enumerate() {
            if let Some(j) = r.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::domain(format!(
                    "value of agent {i} for house {j} must be finite and >= 0, got {}",
                    r[j]
                )));
            }
            match normalization {
                Normalization::UnitRange => {
                    let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
                    if (hi - 1.0).abs() > NORMALIZATION_TOL || lo.abs() > NORMALIZATION_TOL {
                        return Err(Error::domain(format!(
                            "row {i} is not unit-range (min {lo}, max {hi})"
                        )));
                    }
                }
                Normalization::UnitSum => {
                    let s: f64 = r.iter().sum();
                    if (s - 1.0).abs() > NORMALIZATION_TOL {
                        return Err(Error::domain(format!("row {i} sums to {s}, not 1")));
                    }
                }
                Normalization::None => {}
            }
        }
        Ok(ValuationMatrix {
            n,
            values: rows.into_iter().flatten().collect(),
            normalization,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn value(&self, agent: usize, house: usize) -> f64 {
        self.values[agent * self.n + house]
    }

    pub fn row(&self, agent: usize) -> &[f64] {
        &self.values[agent * self.n..(agent + 1) * self.n]
    }

    /// Copy with agent `agent`'s row replaced; skips normalization checks,
    /// since a misreport need not respect them.
    pub fn with_row(&self, agent: usize, row: &[f64]) -> ValuationMatrix {
        assert_eq!(row.len(), self.n);
        let mut values = self.values.clone();
        values[agent * self.n..(agent + 1) * self.n].copy_from_slice(row);
        ValuationMatrix {
            n: self.n,
            values,
            normalization: Normalization::None,
        }
    }

    /// Columns permuted: new house `perm[j]` is old house `j`.
    pub fn relabel_houses(&self, perm: &[usize]) -> ValuationMatrix {
        let mut values = vec![0.0; self.values.len()];
        for i in 0..self.n {
            for j in 0..self.n {
                values[i * self.n + perm[j]] = self.value(i, j);
            }
        }
        ValuationMatrix {
            n: self.n,
            values,
            normalization: self.normalization,
        }
    }
}

/// Perfect matching of agents to houses: agent `i` gets `house_of[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Matching {
    house_of: Vec<usize>,
}

impl Matching {
    pub fn new(house_of: Vec<usize>) -> Result<Self> {
        let n = house_of.len();
        let mut seen = vec![false; n];
        for &h in &house_of {
            if h >= n || seen[h] {
                return Err(Error::infeasible(format!("{house_of:?} is not a permutation of 0..{n}")));
            }
            seen[h] = true;
        }
        Ok(Matching { house_of })
    }

    pub fn identity(n: usize) -> Self {
        Matching {
            house_of: (0..n).collect(),
        }
    }

    /// `(2, 3, ..., n, 1)` in one-indexed notation: agent `i` holds house
    /// `i + 1 mod n`.
    pub fn shifted(n: usize) -> Self {
        Matching {
            house_of: (0..n).map(|i| (i + 1) % n).collect(),
        }
    }

    pub fn house_of(&self) -> &[usize] {
        &self.house_of
    }

    pub fn len(&self) -> usize {
        self.house_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.house_of.is_empty()
    }

    /// One-indexed, comma-separated.
    pub fn to_one_indexed(&self) -> String {
        self.house_of
            .iter()
            .map(|h| (h + 1).to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse_one_indexed(s: &str) -> Result<Self> {
        let house_of = s
            .split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<usize>()
                    .ok()
                    .filter(|&h| h >= 1)
                    .map(|h| h - 1)
                    .ok_or_else(|| Error::domain(format!("bad house index {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Matching::new(house_of)
    }
}

pub fn welfare(v: &ValuationMatrix, m: &Matching) -> Result<f64> {
    if m.len() != v.n {
        return Err(Error::dimension(format!(
            "matching has {} agents, valuations have {}",
            m.len(),
            v.n
        )));
    }
    Ok(m.house_of.iter().enumerate().map(|(i, &h)| v.value(i, h)).sum())
}

/// TTC result with the number of rounds it took.
#[derive(Debug, Clone, PartialEq)]
pub struct TtcTrace {
    pub matching: Matching,
    pub rounds: usize,
}

/// Runs TTC from `endowment`. Each round every remaining agent points to
/// the owner of its favourite remaining house (lowest house index on ties);
/// every cycle present is cleared.
pub fn ttc_trace(v: &ValuationMatrix, endowment: &Matching) -> Result<TtcTrace> {
    let n = v.n;
    if endowment.len() != n {
        return Err(Error::dimension(format!(
            "endowment has {} agents, valuations have {n}",
            endowment.len()
        )));
    }
    let mut owner = vec![0usize; n];
    for (i, &h) in endowment.house_of.iter().enumerate() {
        owner[h] = i;
    }
    let mut active = vec![true; n];
    let mut house_of = vec![usize::MAX; n];
    let mut remaining = n;
    let mut rounds = 0;

    while remaining > 0 {
        rounds += 1;
        // favourite remaining house per active agent
        let mut wants = vec![usize::MAX; n];
        for i in (0..n).filter(|&i| active[i]) {
            let mut best: Option<usize> = None;
            for h in 0..n {
                if !active[owner[h]] {
                    continue;
                }
                if best.is_none_or(|b| v.value(i, h) > v.value(i, b)) {
                    best = Some(h);
                }
            }
            wants[i] = best.expect("an active agent still owns a house");
        }

        // 0 = unvisited, 1 = on current path, 2 = done
        let mut state = vec![0u8; n];
        let mut cleared = Vec::new();
        for start in (0..n).filter(|&i| active[i]) {
            if state[start] != 0 {
                continue;
            }
            let mut path = Vec::new();
            let mut cur = start;
            while state[cur] == 0 {
                state[cur] = 1;
                path.push(cur);
                cur = owner[wants[cur]];
            }
            if state[cur] == 1 {
                let pos = path.iter().position(|&a| a == cur).expect("on path");
                cleared.extend_from_slice(&path[pos..]);
            }
            for a in path {
                state[a] = 2;
            }
        }
        debug_assert!(!cleared.is_empty());
        for &a in &cleared {
            house_of[a] = wants[a];
        }
        for &a in &cleared {
            active[a] = false;
        }
        remaining -= cleared.len();
    }
    Ok(TtcTrace {
        matching: Matching { house_of },
        rounds,
    })
}

pub fn ttc_allocate(v: &ValuationMatrix, endowment: &Matching) -> Result<Matching> {
    Ok(ttc_trace(v, endowment)?.matching)
}

/// TTC with the recommended matching as endowment, reported against the
/// maximum-welfare matching.
pub fn ttc(v: &ValuationMatrix, endowment: &Matching) -> Result<MechanismOutcome<Matching>> {
    let out = ttc_allocate(v, endowment)?;
    let (_, opt) = opt_matching(v)?;
    let report = make_report(
        Objective::Maximize,
        welfare(v, &out)?,
        opt,
        welfare(v, endowment)?,
        None,
    )?;
    Ok(MechanismOutcome::money_free(out, v.n, report))
}

/// Maximum-welfare perfect matching (Hungarian algorithm with potentials,
/// O(n^3)).
pub fn opt_matching(v: &ValuationMatrix) -> Result<(Matching, f64)> {
    let n = v.n;
    if n > MATCHING_CAP {
        return Err(Error::SizeCap(format!("{n} agents exceed the matching cap of {MATCHING_CAP}")));
    }
    if n == 0 {
        return Ok((Matching::identity(0), 0.0));
    }
    // minimize -value; rows = agents, columns = houses, 1-indexed internally
    let cost = |i: usize, j: usize| -v.value(i - 1, j - 1);
    let mut u = vec![0.0; n + 1];
    let mut p_col = vec![0.0; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut row_of = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - p_col[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    p_col[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut house_of = vec![0; n];
    for j in 1..=n {
        house_of[row_of[j] - 1] = j - 1;
    }
    let m = Matching { house_of };
    let w = welfare(v, &m)?;
    Ok((m, w))
}

/// Worst-case TTC instances with endowment `(2, 3, ..., n, 1)`:
/// agent 1 values `(1-eps, 1, 0, ...)` (unit-range) or
/// `(1/n - eps, 1/n + eps, 1/n, ...)` (unit-sum); agent `i > 1` values its
/// own-index house at 1 (or `1 - eps`) and house `i + 1 mod n` at `eps`.
pub fn gen_house_lb(n: usize, normalization: Normalization, eps: f64) -> Result<(ValuationMatrix, Matching)> {
    if n < 3 {
        return Err(Error::domain("needs n >= 3 agents"));
    }
    let nf = n as f64;
    let rows = match normalization {
        Normalization::UnitRange => {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::domain("eps must lie in (0, 1)"));
            }
            cycle_rows(n, [1.0 - eps, 1.0], 1.0, eps, |_| 0.0)
        }
        Normalization::UnitSum => {
            if !(eps > 0.0 && eps < 1.0 / nf) {
                return Err(Error::domain("eps must lie in (0, 1/n)"));
            }
            cycle_rows(n, [1.0 / nf - eps, 1.0 / nf + eps], 1.0 - eps, eps, |_| 1.0 / nf)
        }
        Normalization::None => return Err(Error::domain("lower-bound families need a normalization")),
    };
    Ok((ValuationMatrix::new(rows, normalization)?, Matching::shifted(n)))
}

/// Tight instances parameterized by the target quality of recommendation.
///
/// Unit-range: agents `i > 1` value house `i` at 1 and house `i + 1 mod n`
/// at `x = (n - rho) / (rho (n - 1))`, requiring `1 <= rho <= n`.
/// Unit-sum: the two values are `1 - y` and `y` with
/// `y = (n(n-1) - rho + 1) / (n(n-1)(rho + 1))`, requiring
/// `1 <= rho <= n^2 - n + 1`. Agent 1 is as in [`gen_house_lb`].
pub fn gen_ttc_lb(
    n: usize,
    rho_hat: f64,
    normalization: Normalization,
    eps: f64,
) -> Result<(ValuationMatrix, Matching)> {
    if n < 3 {
        return Err(Error::domain("needs n >= 3 agents"));
    }
    let nf = n as f64;
    let rows = match normalization {
        Normalization::UnitRange => {
            if !(1.0..=nf).contains(&rho_hat) {
                return Err(Error::domain(format!("unit-range needs 1 <= rho_hat <= n, got {rho_hat}")));
            }
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::domain("eps must lie in (0, 1)"));
            }
            let x = ttc_lb_x(n, rho_hat);
            cycle_rows(n, [1.0 - eps, 1.0], 1.0, x, |_| 0.0)
        }
        Normalization::UnitSum => {
            let cap = nf * nf - nf + 1.0;
            if !(1.0..=cap).contains(&rho_hat) {
                return Err(Error::domain(format!(
                    "unit-sum needs 1 <= rho_hat <= n^2 - n + 1 = {cap}, got {rho_hat}"
                )));
            }
            if !(eps > 0.0 && eps < 1.0 / nf) {
                return Err(Error::domain("eps must lie in (0, 1/n)"));
            }
            let y = ttc_lb_y(n, rho_hat);
            cycle_rows(n, [1.0 / nf - eps, 1.0 / nf + eps], 1.0 - y, y, |_| 1.0 / nf)
        }
        Normalization::None => return Err(Error::domain("lower-bound families need a normalization")),
    };
    Ok((ValuationMatrix::new(rows, normalization)?, Matching::shifted(n)))
}

pub fn ttc_lb_x(n: usize, rho_hat: f64) -> f64 {
    let nf = n as f64;
    (nf - rho_hat) / (rho_hat * (nf - 1.0))
}

pub fn ttc_lb_y(n: usize, rho_hat: f64) -> f64 {
    let nf = n as f64;
    (nf * (nf - 1.0) - rho_hat + 1.0) / (nf * (nf - 1.0) * (rho_hat + 1.0))
}

/// Agent 0 gets `first` on houses 0 and 1 and `rest(j)` elsewhere; agent
/// `i > 0` gets `own` on house `i` and `next` on house `i + 1 mod n`.
fn cycle_rows(n: usize, first: [f64; 2], own: f64, next: f64, rest: impl Fn(usize) -> f64) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; n]; n];
    rows[0][0] = first[0];
    rows[0][1] = first[1];
    for (j, v) in rows[0].iter_mut().enumerate().skip(2) {
        *v = rest(j);
    }
    for (i, row) in rows.iter_mut().enumerate().skip(1) {
        row[i] = own;
        row[(i + 1) % n] = next;
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn validates_normalization() {
        assert!(ValuationMatrix::new(vec![vec![0.5, 0.5], vec![1.0, 0.0]], Normalization::UnitSum).is_ok());
        assert!(ValuationMatrix::new(vec![vec![0.5, 0.6], vec![1.0, 0.0]], Normalization::UnitSum).is_err());
        assert!(ValuationMatrix::new(vec![vec![0.5, 0.5], vec![1.0, 0.0]], Normalization::UnitRange).is_err());
        assert!(ValuationMatrix::new(vec![vec![0.5], vec![1.0, 0.0]], Normalization::None).is_err());
        assert!(ValuationMatrix::new(vec![vec![-0.5, 0.5], vec![1.0, 0.0]], Normalization::None).is_err());
    }

    #[test]
    fn matching_parsing() {
        let m = Matching::parse_one_indexed("2,3,4,1").unwrap();
        assert_eq!(m, Matching::shifted(4));
        assert_eq!(m.to_one_indexed(), "2,3,4,1");
        assert!(Matching::parse_one_indexed("1,1").is_err());
        assert!(Matching::parse_one_indexed("0,1").is_err());
        assert!(Matching::new(vec![0, 2]).is_err());
    }

    #[test]
    fn welfare_examples() {
        let (v, endow) = gen_house_lb(4, Normalization::UnitRange, 0.1).unwrap();
        assert_abs_diff_eq!(welfare(&v, &endow).unwrap(), 1.3, epsilon = 1e-12);
        assert_abs_diff_eq!(welfare(&v, &Matching::identity(4)).unwrap(), 3.9, epsilon = 1e-12);
        let z = ValuationMatrix::new(vec![vec![0.0; 3]; 3], Normalization::None).unwrap();
        assert_eq!(welfare(&z, &Matching::identity(3)).unwrap(), 0.0);
        assert!(welfare(&z, &Matching::identity(2)).is_err());
    }

    #[test]
    fn ttc_keeps_the_worst_case_endowment() {
        let (v, endow) = gen_house_lb(4, Normalization::UnitRange, 0.1).unwrap();
        let out = ttc(&v, &endow).unwrap();
        assert_eq!(out.alternative, endow);
        assert_abs_diff_eq!(out.report.ratio, 3.0, epsilon = 1e-12);
        assert_eq!(out.payments, vec![0.0; 4]);
    }

    #[test]
    fn ttc_forced_swap() {
        let v = ValuationMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], Normalization::UnitRange).unwrap();
        let endow = Matching::new(vec![1, 0]).unwrap();
        let t = ttc_trace(&v, &endow).unwrap();
        assert_eq!(t.matching, Matching::identity(2));
        assert_eq!(t.rounds, 1);
    }

    #[test]
    fn ttc_clears_all_cycles_each_round() {
        // two disjoint 2-cycles in the first round
        let v = ValuationMatrix::new(
            vec![
                vec![0.0, 1.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 1.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            Normalization::UnitRange,
        )
        .unwrap();
        let t = ttc_trace(&v, &Matching::identity(4)).unwrap();
        assert_eq!(t.matching.house_of(), &[1, 0, 3, 2]);
        assert_eq!(t.rounds, 1);
    }

    #[test]
    fn ttc_ties_go_to_lowest_house() {
        let v = ValuationMatrix::new(vec![vec![1.0, 1.0], vec![1.0, 1.0]], Normalization::None).unwrap();
        // both want house 0, owned by agent 1
        let t = ttc_trace(&v, &Matching::new(vec![1, 0]).unwrap()).unwrap();
        assert_eq!(t.matching.house_of(), &[1, 0]);
    }

    #[test]
    fn opt_examples() {
        let (v, _) = gen_house_lb(4, Normalization::UnitRange, 0.1).unwrap();
        let (m, w) = opt_matching(&v).unwrap();
        assert_eq!(m, Matching::identity(4));
        assert_abs_diff_eq!(w, 3.9, epsilon = 1e-12);
        let perm = [2usize, 0, 3, 1];
        let rows = (0..4).map(|i| (0..4).map(|j| f64::from(u8::from(perm[i] == j))).collect()).collect();
        let p = ValuationMatrix::new(rows, Normalization::UnitRange).unwrap();
        let (m, w) = opt_matching(&p).unwrap();
        assert_eq!(m.house_of(), &perm);
        assert_eq!(w, 4.0);
    }

    #[test]
    fn ttc_lb_parameters() {
        assert_abs_diff_eq!(ttc_lb_x(4, 2.0), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ttc_lb_y(4, 3.0), 10.0 / 48.0, epsilon = 1e-15);
        let (v, endow) = gen_ttc_lb(4, 2.0, Normalization::UnitRange, 1e-9).unwrap();
        let out = ttc(&v, &endow).unwrap();
        assert_abs_diff_eq!(out.report.ratio, 2.0, epsilon = 1e-8);
        let (v, endow) = gen_ttc_lb(4, 3.0, Normalization::UnitSum, 1e-9).unwrap();
        let out = ttc(&v, &endow).unwrap();
        assert_abs_diff_eq!(out.report.ratio, 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(out.report.rho_hat, 3.0, epsilon = 1e-8);
        assert!(gen_ttc_lb(4, 5.0, Normalization::UnitRange, 1e-6).is_err());
        assert!(gen_ttc_lb(4, 14.0, Normalization::UnitSum, 1e-6).is_err());
    }

    #[test]
    fn ttc_lb_rho_one_is_optimal() {
        for norm in [Normalization::UnitRange, Normalization::UnitSum] {
            let (v, endow) = gen_ttc_lb(5, 1.0, norm, 1e-9).unwrap();
            let out = ttc(&v, &endow).unwrap();
            assert_abs_diff_eq!(out.report.ratio, 1.0, epsilon = 1e-8);
        }
    }
}
