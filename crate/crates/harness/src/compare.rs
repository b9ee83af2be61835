//! Side-by-side comparison of two finished runs.

use std::fmt::Write;
use std::path::Path;

use crate::emit::{read_summary, MetricSummary};
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub metric: String,
    pub a: MetricSummary,
    pub b: MetricSummary,
}

impl Comparison {
    /// `median(B) - median(A)`.
    pub fn median_difference(&self) -> f64 {
        self.b.median - self.a.median
    }

    pub fn render(&self, label_a: &str, label_b: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "metric: {}", self.metric);
        for (label, s) in [(label_a, &self.a), (label_b, &self.b)] {
            let _ = writeln!(out, "{label}: median {} [q1 {}, q3 {}] over {} replicates", s.median, s.q1, s.q3, s.count);
        }
        let _ = writeln!(out, "median difference (B - A): {}", self.median_difference());
        out
    }
}

/// `a` and `b` may be run directories or `summary.json` paths.
pub fn compare(a: &Path, b: &Path, metric: &str) -> Result<Comparison> {
    let pick = |path: &Path| -> Result<MetricSummary> {
        let s = read_summary(path)?;
        s.metrics.get(metric).cloned().ok_or_else(|| {
            let known: Vec<&str> = s.metrics.keys().map(String::as_str).collect();
            HarnessError::config(format!(
                "metric '{metric}' not found in {} (available: {})",
                path.display(),
                known.join(", ")
            ))
        })
    };
    Ok(Comparison { metric: metric.to_string(), a: pick(a)?, b: pick(b)? })
}
