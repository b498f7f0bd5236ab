use serde::{Deserialize, Serialize};

use super::ResidualTrace;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HimRow {
    pub method: String,
    pub sweeps: usize,
    pub corrections: usize,
    pub rollbacks: usize,
    pub seconds: f64,
    pub final_residual: f64,
    /// Baseline sweeps over this method's sweeps.
    pub speedup_iterations: f64,
    pub speedup_time: f64,
}

/// Side-by-side comparison; the first trace is the baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HimReport {
    pub rows: Vec<HimRow>,
}

pub fn him_report(traces: &[ResidualTrace]) -> Result<HimReport> {
    if traces.len() < 2 {
        return Err(Error::InvalidArgument("a comparison needs at least two traces".into()));
    }
    if let Some(t) = traces.iter().find(|t| t.entries.is_empty()) {
        return Err(Error::InvalidArgument(format!("trace `{}` is empty", t.method)));
    }
    let base = &traces[0];
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { f64::NAN };
    let rows = traces
        .iter()
        .map(|t| HimRow {
            method: t.method.clone(),
            sweeps: t.sweeps(),
            corrections: t.count(super::Event::Correction),
            rollbacks: t.count(super::Event::Rollback),
            seconds: t.seconds,
            final_residual: t.final_residual().unwrap_or(f64::NAN),
            speedup_iterations: ratio(base.sweeps() as f64, t.sweeps() as f64),
            speedup_time: ratio(base.seconds, t.seconds),
        })
        .collect();
    Ok(HimReport { rows })
}

impl HimReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:<14} {:>10} {:>6} {:>6} {:>10} {:>12} {:>10} {:>10}\n",
            "method", "sweeps", "corr", "rollb", "seconds", "residual", "x iters", "x time"
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{:<14} {:>10} {:>6} {:>6} {:>10.3} {:>12.3e} {:>10.2} {:>10.2}\n",
                r.method, r.sweeps, r.corrections, r.rollbacks, r.seconds, r.final_residual, r.speedup_iterations, r.speedup_time
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::him::{Event, TraceEntry};

    fn trace(name: &str, sweeps: usize, seconds: f64) -> ResidualTrace {
        ResidualTrace {
            method: name.into(),
            entries: vec![TraceEntry { iteration: sweeps, residual: 1e-8, event: Event::Sweep }],
            seconds,
        }
    }

    #[test]
    fn identical_traces_have_unit_speedup() {
        let r = him_report(&[trace("gs", 100, 2.0), trace("gs", 100, 2.0)]).unwrap();
        assert_eq!(r.rows[1].speedup_iterations, 1.0);
        assert_eq!(r.rows[1].speedup_time, 1.0);
        assert!(r.to_text().lines().count() == 3);
        assert!(r.to_json().unwrap().contains("\"speedup_iterations\": 1.0"));
    }

    #[test]
    fn large_counts() {
        let r = him_report(&[trace("gs", 1142414, 8.4), trace("him", 121239, 1.0)]).unwrap();
        assert!((r.rows[1].speedup_iterations - 9.42).abs() < 5e-3);
    }

    #[test]
    fn empty_trace_is_rejected() {
        assert!(him_report(&[trace("gs", 10, 1.0), ResidualTrace::new("him")]).is_err());
        assert!(him_report(&[trace("gs", 10, 1.0)]).is_err());
    }
}
