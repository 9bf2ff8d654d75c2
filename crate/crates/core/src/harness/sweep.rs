use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::facility::{
    cmp_point, egalitarian_cost, mbb_point, opt_egalitarian, opt_utilitarian, utilitarian_cost, CmpConfig,
    FacilityInstance, Point2,
};
use crate::report::{make_report, ser_opt_real, ser_real, Objective};
use crate::scheduling::{asg, AsgConfig, Assignment, OracleMode, SchedulingInstance};

/// One evaluated recommendation. `param` is the confidence parameter
/// (lambda or beta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub idx: usize,
    pub param: f64,
    #[serde(serialize_with = "ser_real")]
    pub rho_hat: f64,
    #[serde(serialize_with = "ser_opt_real")]
    pub eta: Option<f64>,
    #[serde(serialize_with = "ser_real")]
    pub ratio: f64,
}

/// `k x k` grid over the bounding box, corners included, x-major. Repeated
/// points (degenerate boxes) are kept once, in first-seen order.
pub fn grid_predictions(points: &FacilityInstance, k: usize) -> Result<Vec<Point2>> {
    if k == 0 {
        return Err(Error::domain("grid size k must be >= 1"));
    }
    let (lo, hi) = points.bounding_box();
    let coord = |a: f64, b: f64, i: usize| {
        if k == 1 {
            a
        } else if i == k - 1 {
            b
        } else {
            a + (b - a) * i as f64 / (k - 1) as f64
        }
    };
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let p = Point2::new(coord(lo.x, hi.x, i), coord(lo.y, hi.y, j));
            if seen.insert((p.x.to_bits(), p.y.to_bits())) {
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// CMP on every grid prediction: utilitarian `rho_hat`, `eta` and ratio.
pub fn run_cmp_sweep(points: &FacilityInstance, k: usize, cfg: &CmpConfig) -> Result<Vec<SweepRow>> {
    let grid = grid_predictions(points, k)?;
    let (a_star, opt) = opt_utilitarian(points)?;
    if opt <= 0.0 {
        return Err(Error::domain("sweep needs a positive optimum (all points coincide)"));
    }
    let n = points.len() as f64;
    grid.par_iter()
        .enumerate()
        .map(|(idx, &a_hat)| {
            let facility = cmp_point(points, a_hat, cfg);
            let r = make_report(
                Objective::Minimize,
                utilitarian_cost(points, facility),
                opt,
                utilitarian_cost(points, a_hat),
                Some(n * a_star.dist(a_hat) / opt),
            )?;
            Ok(SweepRow {
                idx,
                param: cfg.lambda(),
                rho_hat: r.rho_hat,
                eta: r.eta,
                ratio: r.ratio,
            })
        })
        .collect()
}

/// MBB on every grid prediction: egalitarian `rho_hat`, `eta` and ratio.
/// `param` is 0 since the mechanism has no confidence parameter.
pub fn run_mbb_sweep(points: &FacilityInstance, k: usize) -> Result<Vec<SweepRow>> {
    let grid = grid_predictions(points, k)?;
    let (a_star, opt) = opt_egalitarian(points);
    if opt <= 0.0 {
        return Err(Error::domain("sweep needs a positive optimum (all points coincide)"));
    }
    grid.par_iter()
        .enumerate()
        .map(|(idx, &a_hat)| {
            let r = make_report(
                Objective::Minimize,
                egalitarian_cost(points, mbb_point(points, a_hat)),
                opt,
                egalitarian_cost(points, a_hat),
                Some(a_star.dist(a_hat) / opt),
            )?;
            Ok(SweepRow {
                idx,
                param: 0.0,
                rho_hat: r.rho_hat,
                eta: r.eta,
                ratio: r.ratio,
            })
        })
        .collect()
}

/// AllocationScaledGreedy with fixed advice across confidence values.
pub fn run_asg_beta_sweep(inst: &SchedulingInstance, a_hat: &Assignment, betas: &[f64]) -> Result<Vec<SweepRow>> {
    betas
        .par_iter()
        .enumerate()
        .map(|(idx, &beta)| {
            let cfg = AsgConfig::new(beta, inst.machines())?;
            let (out, _) = asg(inst, a_hat, &cfg, OracleMode::On)?;
            Ok(SweepRow {
                idx,
                param: beta,
                rho_hat: out.report.rho_hat,
                eta: None,
                ratio: out.report.ratio,
            })
        })
        .collect()
}

fn fmt_real(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".to_owned()
    } else {
        v.to_string()
    }
}

/// CSV with header `idx,param,rho_hat,eta,ratio`; a missing eta is empty.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("idx,param,rho_hat,eta,ratio\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{}",
            r.idx,
            r.param,
            fmt_real(r.rho_hat),
            r.eta.map(fmt_real).unwrap_or_default(),
            fmt_real(r.ratio)
        )
        .expect("writing to a String");
    }
    s
}

pub fn rows_to_json_lines(rows: &[SweepRow]) -> String {
    let mut s = String::new();
    for r in rows {
        s.push_str(&serde_json::to_string(r).expect("rows serialize"));
        s.push('\n');
    }
    s
}
