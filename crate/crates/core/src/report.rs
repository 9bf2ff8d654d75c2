//! Shared vocabulary: objective direction, the quality report, the outcome
//! envelope every mechanism returns, and seeded randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Values this far below 1 are treated as float noise and clamped to 1.
const RATIO_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Objective {
    Minimize,
    Maximize,
}

/// Mechanism value, optimum, advice value and the ratios derived from them.
///
/// For a minimization objective `rho_hat = advice / opt` and
/// `ratio = mech / opt`; for maximization the fractions are inverted. A zero
/// denominator gives `+inf` when the numerator is positive and `1` when both
/// are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QualityReport {
    #[serde(serialize_with = "ser_real")]
    pub mech_value: f64,
    #[serde(serialize_with = "ser_real")]
    pub opt_value: f64,
    #[serde(serialize_with = "ser_real")]
    pub advice_value: f64,
    #[serde(serialize_with = "ser_real")]
    pub rho_hat: f64,
    #[serde(serialize_with = "ser_real")]
    pub ratio: f64,
    #[serde(serialize_with = "ser_opt_real")]
    pub eta: Option<f64>,
}

/// Serializes `+inf` as the string `"inf"`; finite values as JSON numbers.
pub fn ser_real<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

pub fn ser_opt_real<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => ser_real(v, s),
        None => s.serialize_none(),
    }
}

pub fn ser_reals<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        if x.is_infinite() && *x > 0.0 {
            seq.serialize_element("inf")?;
        } else {
            seq.serialize_element(x)?;
        }
    }
    seq.end()
}

fn degenerate_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num > 0.0 {
            f64::INFINITY
        } else {
            1.0
        }
    } else if num.is_infinite() && den.is_infinite() {
        1.0
    } else {
        num / den
    }
}

fn at_least_one(r: f64, what: &str) -> Result<f64> {
    if r < 1.0 - RATIO_SLACK {
        return Err(Error::domain(format!(
            "{what} = {r} is below 1: the supplied optimum is not optimal"
        )));
    }
    Ok(r.max(1.0))
}

pub fn make_report(
    objective: Objective,
    mech_value: f64,
    opt_value: f64,
    advice_value: f64,
    eta: Option<f64>,
) -> Result<QualityReport> {
    for (name, v) in [
        ("mech_value", mech_value),
        ("opt_value", opt_value),
        ("advice_value", advice_value),
    ] {
        if v.is_nan() || v < 0.0 {
            return Err(Error::domain(format!("{name} must be >= 0, got {v}")));
        }
    }
    if let Some(e) = eta {
        if e.is_nan() || e < 0.0 {
            return Err(Error::domain(format!("eta must be >= 0, got {e}")));
        }
    }
    let (rho_hat, ratio) = match objective {
        Objective::Minimize => (
            degenerate_ratio(advice_value, opt_value),
            degenerate_ratio(mech_value, opt_value),
        ),
        Objective::Maximize => (
            degenerate_ratio(opt_value, advice_value),
            degenerate_ratio(opt_value, mech_value),
        ),
    };
    Ok(QualityReport {
        mech_value,
        opt_value,
        advice_value,
        rho_hat: at_least_one(rho_hat, "rho_hat")?,
        ratio: at_least_one(ratio, "ratio")?,
        eta,
    })
}

/// Chosen alternative, per-agent payments and the quality report.
///
/// Money-free settings carry an all-zero payment vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MechanismOutcome<A> {
    pub alternative: A,
    #[serde(serialize_with = "ser_reals")]
    pub payments: Vec<f64>,
    pub report: QualityReport,
}

impl<A> MechanismOutcome<A> {
    pub fn money_free(alternative: A, agents: usize, report: QualityReport) -> Self {
        MechanismOutcome {
            alternative,
            payments: vec![0.0; agents],
            report,
        }
    }
}

/// Seed for every random draw in the crate. Identical seeds reproduce
/// identical instances and audit traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent sub-seed for work unit `stream` (splitmix64 finalizer).
    pub fn derive(self, stream: u64) -> Seed {
        let mut z = self
            .0
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(stream.wrapping_add(1)));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Seed(z ^ (z >> 31))
    }
}
