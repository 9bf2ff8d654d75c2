//! Evaluation pipelines: the strategyproofness auditor, advice sweeps and
//! point-set ingestion.

mod audit;
mod sweep;

pub use audit::{audit_sp, audit_sp_with_fault, AuditReport, AuditSetting, PaymentFault, Violation, GAIN_TOL};
pub use sweep::{
    grid_predictions, rows_to_csv, rows_to_json_lines, run_asg_beta_sweep, run_cmp_sweep, run_mbb_sweep, SweepRow,
};

use std::path::Path;

use crate::error::Result;
use crate::facility::FacilityInstance;

/// Reads a point set with header `x,y` or `lon,lat`.
pub fn ingest_points_csv(path: impl AsRef<Path>) -> Result<FacilityInstance> {
    crate::formats::read_points_csv(path.as_ref())
}
