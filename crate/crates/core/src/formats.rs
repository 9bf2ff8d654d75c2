//! Flat-file readers and writers for every instance type.
//!
//! All readers report errors with the file path and the 1-based line
//! number of the offending row.

use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};

use crate::auctions::MultiUnitInstance;
use crate::error::{Error, Result};
use crate::facility::{FacilityInstance, Point2};
use crate::house::{Normalization, ValuationMatrix};
use crate::scheduling::SchedulingInstance;

struct Rows {
    path: PathBuf,
    rows: Vec<(usize, Vec<String>)>,
}

impl Rows {
    fn read(path: &Path) -> Result<Rows> {
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(file);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                row: e.position().map_or(0, |p| p.line() as usize),
                msg: e.to_string(),
            })?;
            let line = rec.position().map_or(rows.len() + 1, |p| p.line() as usize);
            rows.push((line, rec.iter().map(str::to_owned).collect()));
        }
        Ok(Rows {
            path: path.to_path_buf(),
            rows,
        })
    }

    fn err(&self, row: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            row,
            msg: msg.into(),
        }
    }

    fn reals(&self, row: usize, fields: &[String], expected: usize) -> Result<Vec<f64>> {
        if fields.len() != expected {
            return Err(self.err(row, format!("expected {expected} values, found {}", fields.len())));
        }
        fields
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| self.err(row, format!("{f:?} is not a number")))
            })
            .collect()
    }

    fn count(&self, row: usize, field: &str) -> Result<usize> {
        field
            .parse::<usize>()
            .map_err(|_| self.err(row, format!("{field:?} is not a nonnegative integer")))
    }

    /// First row as `n,m`.
    fn dims(&self) -> Result<(usize, usize)> {
        let Some((row, fields)) = self.rows.first() else {
            return Err(self.err(1, "empty file"));
        };
        if fields.len() != 2 {
            return Err(self.err(*row, "first row must be `n,m`"));
        }
        Ok((self.count(*row, &fields[0])?, self.count(*row, &fields[1])?))
    }
}

/// Agent locations with header `x,y` or `lon,lat` (lon maps to x).
pub fn read_points_csv(path: &Path) -> Result<FacilityInstance> {
    let rows = Rows::read(path)?;
    let Some((hrow, header)) = rows.rows.first() else {
        return Err(rows.err(1, "empty file"));
    };
    let names: Vec<String> = header.iter().map(|h| h.to_ascii_lowercase()).collect();
    if names != ["x", "y"] && names != ["lon", "lat"] {
        return Err(rows.err(*hrow, format!("header must be `x,y` or `lon,lat`, found {:?}", header.join(","))));
    }
    if rows.rows.len() == 1 {
        return Err(rows.err(*hrow, "no points after the header"));
    }
    let mut pts = Vec::with_capacity(rows.rows.len() - 1);
    for (row, fields) in &rows.rows[1..] {
        let v = rows.reals(*row, fields, 2)?;
        if !v.iter().all(|c| c.is_finite()) {
            return Err(rows.err(*row, "coordinates must be finite"));
        }
        pts.push(Point2::new(v[0], v[1]));
    }
    FacilityInstance::new(pts)
}

pub fn write_points_csv(inst: &FacilityInstance) -> String {
    let mut s = String::from("x,y\n");
    for p in inst.points() {
        writeln!(s, "{},{}", p.x, p.y).expect("writing to a String");
    }
    s
}

/// Row `n,m`, then `n` machine rows of `m` processing times; `inf` allowed.
pub fn read_scheduling_csv(path: &Path) -> Result<SchedulingInstance> {
    let rows = Rows::read(path)?;
    let (n, m) = rows.dims()?;
    let body = &rows.rows[1..];
    if body.len() != n {
        let last = rows.rows.last().map_or(1, |r| r.0);
        return Err(rows.err(last, format!("expected {n} machine rows, found {}", body.len())));
    }
    let mut costs = Vec::with_capacity(n * m);
    for (row, fields) in body {
        // a machine row with zero jobs is a single empty field
        let fields: &[String] = if m == 0 && fields.iter().all(String::is_empty) { &[] } else { fields };
        let v = rows.reals(*row, fields, m)?;
        if let Some(x) = v.iter().find(|x| x.is_nan() || **x < 0.0) {
            return Err(rows.err(*row, format!("processing time {x} must be >= 0 or inf")));
        }
        costs.extend(v);
    }
    SchedulingInstance::new(n, m, costs)
}

pub fn write_scheduling_csv(inst: &SchedulingInstance) -> String {
    let mut s = format!("{},{}\n", inst.machines(), inst.jobs());
    for r in inst.rows() {
        s.push_str(&join_reals(r));
        s.push('\n');
    }
    s
}

/// `n` rows of `n` values, checked against `normalization`.
pub fn read_house_csv(path: &Path, normalization: Normalization) -> Result<ValuationMatrix> {
    let rows = Rows::read(path)?;
    let n = rows.rows.len();
    if n == 0 {
        return Err(rows.err(1, "empty file"));
    }
    let mut values = Vec::with_capacity(n);
    for (row, fields) in &rows.rows {
        let v = rows.reals(*row, fields, n)?;
        if let Some(x) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(rows.err(*row, format!("value {x} must be finite and >= 0")));
        }
        values.push(v);
    }
    ValuationMatrix::new(values, normalization).map_err(|e| match e {
        Error::Domain(msg) => {
            // name the file row of the offending agent where possible
            let agent = msg
                .strip_prefix("row ")
                .and_then(|r| r.split_whitespace().next())
                .and_then(|r| r.parse::<usize>().ok());
            match agent {
                Some(i) => rows.err(rows.rows[i].0, msg),
                None => Error::Domain(msg),
            }
        }
        other => other,
    })
}

pub fn write_house_csv(v: &ValuationMatrix) -> String {
    let mut s = String::new();
    for i in 0..v.n() {
        s.push_str(&join_reals(v.row(i)));
        s.push('\n');
    }
    s
}

/// Row `n,m`, then `n` value curves of `m + 1` entries starting at 0.
pub fn read_multi_unit_csv(path: &Path) -> Result<MultiUnitInstance> {
    let rows = Rows::read(path)?;
    let (n, m) = rows.dims()?;
    let body = &rows.rows[1..];
    if body.len() != n {
        let last = rows.rows.last().map_or(1, |r| r.0);
        return Err(rows.err(last, format!("expected {n} bidder rows, found {}", body.len())));
    }
    let mut curves = Vec::with_capacity(n);
    for (row, fields) in body {
        let v = rows.reals(*row, fields, m + 1)?;
        if v[0] != 0.0 || v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[1] < w[0]) {
            return Err(rows.err(*row, "curve must be finite, start at 0 and be nondecreasing"));
        }
        curves.push(v);
    }
    MultiUnitInstance::new(m, curves)
}

pub fn write_multi_unit_csv(inst: &MultiUnitInstance) -> String {
    let mut s = format!("{},{}\n", inst.bidders(), inst.items());
    for c in inst.curves() {
        s.push_str(&join_reals(c));
        s.push('\n');
    }
    s
}

fn join_reals(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Comma-separated list of numbers, for advice flags.
pub fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map_err(|_| Error::domain(format!("{t:?} is not a number")))
        })
        .collect()
}

/// Zero-indexed machine per job, comma-separated.
pub fn parse_indices(s: &str) -> Result<Vec<usize>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<usize>()
                .map_err(|_| Error::domain(format!("{t:?} is not a nonnegative integer")))
        })
        .collect()
}
