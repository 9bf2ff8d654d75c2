//! Strategyproof mechanisms that take a recommended outcome as advice.
//!
//! Four settings are covered, each with the mechanism, an exact optimum
//! oracle, and the adversarial instance families that show its bounds are
//! tight:
//!
//! * [`facility`]: facility location in the plane (Minimum Bounding Box for
//!   egalitarian cost, Coordinatewise Median with Predictions for
//!   utilitarian cost).
//! * [`scheduling`]: makespan minimization on unrelated machines
//!   (AllocationScaledGreedy with per-job weighted VCG payments).
//! * [`house`]: house allocation via Top Trading Cycles seeded with the
//!   recommended matching.
//! * [`auctions`]: maximal-in-range mechanisms extended by the recommended
//!   allocation, instantiated for multi-unit auctions.
//!
//! [`report::QualityReport`] carries the quality of recommendation (the
//! approximation ratio of the advice itself) next to the mechanism's
//! realized ratio. [`harness`] holds the strategyproofness auditor and the
//! sweep pipelines.

pub mod auctions;
pub mod error;
pub mod facility;
pub mod formats;
pub mod harness;
pub mod house;
pub mod instances;
pub mod report;
pub mod scheduling;

pub use error::{Error, Result};
pub use report::{make_report, MechanismOutcome, Objective, QualityReport, Seed};
