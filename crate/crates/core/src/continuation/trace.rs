use std::io::Write;

use serde::Serialize;

use crate::scalar::Scalar;

/// Why a step attempt was turned down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectCause {
    /// `x + r·h` is outside the domain guard.
    Guard,
    /// Some step defect exceeds `r·ε`.
    Defect,
}

/// One step attempt. State columns (`resid`, `norm`, `bound`) describe the
/// point `x` at parameter `t` the attempt started from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord<T> {
    pub t: T,
    pub r: T,
    pub accepted: bool,
    /// `‖f(x+rh) − f(x) − r·ȳ‖_n` at monitored levels; NaN when the guard
    /// failed before evaluation.
    pub defect: Vec<T>,
    /// `‖f(x) − t·ȳ‖_n` at monitored levels.
    pub resid: Vec<T>,
    /// `‖x‖_n` at monitored levels.
    pub norm: Vec<T>,
    /// `t·c_n‖ȳ‖_{n+d}` at monitored levels; `None` above `N − d`.
    pub bound: Vec<Option<T>>,
    pub cause: Option<RejectCause>,
    /// `x ∈ t·Π_s` within the box slack.
    pub box_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ContinuationTrace<T> {
    pub records: Vec<TraceRecord<T>>,
    pub monitored_levels: usize,
}

impl<T: Scalar> ContinuationTrace<T> {
    pub fn new(monitored_levels: usize) -> Self {
        Self { records: Vec::new(), monitored_levels }
    }

    pub fn accepted(&self) -> impl Iterator<Item = &TraceRecord<T>> {
        self.records.iter().filter(|r| r.accepted)
    }

    pub fn accepted_count(&self) -> usize {
        self.accepted().count()
    }

    pub fn csv_header(&self) -> Vec<String> {
        let levels = 0..=self.monitored_levels;
        let mut header = vec!["t".to_string(), "r".to_string(), "accepted".to_string()];
        for prefix in ["defect", "resid", "norm", "bound"] {
            header.extend(levels.clone().map(|n| format!("{prefix}_{n}")));
        }
        header
    }

    /// Writes `t, r, accepted, defect_*, resid_*, norm_*, bound_*`, floats
    /// with 17 significant digits; exempt bounds are empty fields.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(self.csv_header())?;
        for rec in &self.records {
            let mut row = vec![fmt17(rec.t), fmt17(rec.r), rec.accepted.to_string()];
            row.extend(rec.defect.iter().map(|&v| fmt17(v)));
            row.extend(rec.resid.iter().map(|&v| fmt17(v)));
            row.extend(rec.norm.iter().map(|&v| fmt17(v)));
            row.extend(rec.bound.iter().map(|v| v.map(fmt17).unwrap_or_default()));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// 17 significant digits, round-trip exact for `f64`.
pub fn fmt17<T: Scalar>(v: T) -> String {
    let v = v.as_f64();
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}
