//! JUnit-schema XML reporter (testsuites/testsuite/testcase with failure
//! and error elements), consumable by Jenkins, GitHub Actions, GitLab CI.

use std::fmt::Write;
use std::path::PathBuf;

use crate::assertions::Status;
use crate::runner::{RunReport, TestResult};

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn suite_counts(results: &[&TestResult]) -> (usize, usize, usize) {
    let failures = results.iter().filter(|r| r.status == Status::Fail).count();
    let errors = results.iter().filter(|r| r.status == Status::Error).count();
    (results.len(), failures, errors)
}

fn failure_body(result: &TestResult) -> String {
    result
        .assertion_results
        .iter()
        .filter(|a| a.status == Status::Fail)
        .map(|a| {
            format!(
                "{} (line {}): actual {}, expected {}",
                a.kind,
                a.line,
                a.actual.as_deref().unwrap_or("n/a"),
                a.expected
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn error_body(result: &TestResult) -> String {
    let mut parts: Vec<String> = Vec::new();
    if let Some(error) = &result.error {
        parts.push(error.clone());
    }
    for a in result.assertion_results.iter().filter(|a| a.status == Status::Error) {
        parts.push(format!("{} (line {}): {}", a.kind, a.line, a.message));
    }
    parts.join("\n")
}

/// Render the report as one `<testsuites>` document with one
/// `<testsuite>` per source file and one
/// `<testcase name="test[runtime]">` per test result.
pub fn render_junit_xml(report: &RunReport) -> String {
    // Group by file, first-appearance order.
    let mut files: Vec<(PathBuf, Vec<&TestResult>)> = Vec::new();
    for result in &report.results {
        match files.iter_mut().find(|(p, _)| *p == result.file_path) {
            Some((_, list)) => list.push(result),
            None => files.push((result.file_path.clone(), vec![result])),
        }
    }

    let totals = report.totals();
    let mut xml = String::new();
    let _ = writeln!(xml, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        xml,
        r#"<testsuites name="qutest" tests="{}" failures="{}" errors="{}" time="{:.6}">"#,
        totals.total, totals.failed, totals.errored, report.wall_clock_seconds
    );

    for (path, results) in &files {
        let (tests, failures, errors) = suite_counts(results);
        let time: f64 = results.iter().map(|r| r.duration_seconds).sum();
        let _ = writeln!(
            xml,
            r#"  <testsuite name="{}" tests="{}" failures="{}" errors="{}" time="{:.6}">"#,
            escape(&path.display().to_string()),
            tests,
            failures,
            errors,
            time
        );
        for result in results {
            let name = format!("{}[{}]", result.test_name, result.runtime_label);
            let _ = write!(
                xml,
                r#"    <testcase name="{}" classname="{}" time="{:.6}">"#,
                escape(&name),
                escape(&path.display().to_string()),
                result.duration_seconds
            );
            match result.status {
                Status::Pass => {}
                Status::Fail => {
                    let failed = result
                        .assertion_results
                        .iter()
                        .filter(|a| a.status == Status::Fail)
                        .count();
                    let _ = write!(
                        xml,
                        "\n      <failure message=\"{}\">{}</failure>\n    ",
                        escape(&format!("{failed} assertion(s) failed")),
                        escape(&failure_body(result))
                    );
                }
                Status::Error => {
                    let message = result
                        .error
                        .clone()
                        .or_else(|| {
                            result
                                .assertion_results
                                .iter()
                                .find(|a| a.status == Status::Error)
                                .map(|a| a.message.clone())
                        })
                        .unwrap_or_else(|| "evaluation error".into());
                    let _ = write!(
                        xml,
                        "\n      <error message=\"{}\">{}</error>\n    ",
                        escape(&message),
                        escape(&error_body(result))
                    );
                }
            }
            let _ = writeln!(xml, "</testcase>");
        }
        let _ = writeln!(xml, "  </testsuite>");
    }
    let _ = writeln!(xml, "</testsuites>");
    xml
}
