//! Runner for the acceptance checks: each check yields a [`Verdict`] and the
//! runner prints one `PASS`/`FAIL` line per check.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

pub struct Check {
    pub id: &'static str,
    pub title: &'static str,
    pub run: fn() -> Verdict,
}

/// Runs every check in order; a panic counts as a failure. Returns the number
/// of failed checks.
pub fn run_checks(checks: &[Check]) -> usize {
    let mut failed = 0;
    for c in checks {
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".to_string());
            Verdict::new(false, format!("panic: {msg}"))
        });
        if !v.passed {
            failed += 1;
        }
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!("{tag} [{}] {} ({:.1}s): {}", c.id, c.title, start.elapsed().as_secs_f64(), v.detail);
    }
    failed
}

/// `count` of `total` as `k/n`.
pub fn tally(count: usize, total: usize) -> String {
    format!("{count}/{total}")
}
