//! Console reporter: one line per test with a colored marker, failing
//! assertions expanded by default, everything expanded in verbose mode.

use std::fmt::Write;

use crate::assertions::{AssertionResult, Status};
use crate::runner::{RunReport, TestResult};

#[derive(Debug, Clone, Copy)]
pub struct ConsoleOptions {
    /// Expand every assertion, not just failing ones.
    pub verbose: bool,
    pub color: bool,
    /// Replace the ✓/✗ markers with [PASS]/[FAIL] for non-UTF-8 terminals.
    pub ascii: bool,
}

impl Default for ConsoleOptions {
    fn default() -> Self {
        ConsoleOptions { verbose: false, color: false, ascii: false }
    }
}

impl ConsoleOptions {
    /// Detect color and marker support from the environment: color is off
    /// when NO_COLOR is set or stdout is not a terminal; ASCII markers kick
    /// in when the locale does not advertise UTF-8.
    pub fn detect(verbose: bool, no_color_flag: bool) -> Self {
        use std::io::IsTerminal;
        let color = !no_color_flag
            && std::env::var_os("NO_COLOR").is_none()
            && std::io::stdout().is_terminal();
        let utf8 = ["LC_ALL", "LC_CTYPE", "LANG"]
            .iter()
            .filter_map(std::env::var_os)
            .next()
            .map(|v| v.to_string_lossy().to_uppercase().replace('-', "").contains("UTF8"))
            .unwrap_or(true);
        ConsoleOptions { verbose, color, ascii: !utf8 }
    }
}

const GREEN: &str = "\x1b[32m";
const RED: &str = "\x1b[31m";
const YELLOW: &str = "\x1b[33m";
const RESET: &str = "\x1b[0m";

fn marker(status: Status, opts: &ConsoleOptions) -> String {
    let (symbol, color) = match status {
        Status::Pass => (if opts.ascii { "[PASS]" } else { "✓" }, GREEN),
        Status::Fail => (if opts.ascii { "[FAIL]" } else { "✗" }, RED),
        Status::Error => (if opts.ascii { "[ERROR]" } else { "E" }, YELLOW),
    };
    if opts.color {
        format!("{color}{symbol}{RESET}")
    } else {
        symbol.to_string()
    }
}

fn push_assertion_line(out: &mut String, assertion: &AssertionResult, opts: &ConsoleOptions) {
    let mark = marker(assertion.status, opts);
    let _ = write!(out, "    {mark} assert.{} (line {})", assertion.kind, assertion.line);
    match (&assertion.actual, assertion.status) {
        (Some(actual), _) => {
            let _ = write!(out, ": actual {actual}, expected {}", assertion.expected);
        }
        (None, _) => {
            let _ = write!(out, ": {}", assertion.message);
        }
    }
    if assertion.status != Status::Pass && assertion.actual.is_some() {
        let _ = write!(out, " — {}", assertion.message);
    }
    out.push('\n');
}

fn push_test(out: &mut String, result: &TestResult, opts: &ConsoleOptions) {
    let mark = marker(result.status, opts);
    let _ = writeln!(
        out,
        "{mark} {} [{}] {} ({:.3}s)",
        result.test_name,
        result.runtime_label,
        result.file_path.display(),
        result.duration_seconds
    );
    if opts.verbose {
        let _ = writeln!(out, "    seed {}", result.seed_used);
    }
    if let Some(error) = &result.error {
        let _ = writeln!(out, "    E setup: {error}");
    }
    for assertion in &result.assertion_results {
        if opts.verbose || assertion.status != Status::Pass {
            push_assertion_line(out, assertion, opts);
        }
    }
}

/// Render the whole report. The header carries the master seed so a run
/// with `seed: random` tests can be replayed exactly.
pub fn render_console(report: &RunReport, opts: &ConsoleOptions) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "master seed: {}", report.master_seed);
    for result in &report.results {
        push_test(&mut out, result, opts);
    }
    let totals = report.totals();
    let _ = writeln!(
        out,
        "{} test(s): {} passed, {} failed, {} errored ({:.3}s)",
        totals.total, totals.passed, totals.failed, totals.errored, report.wall_clock_seconds
    );
    out
}
