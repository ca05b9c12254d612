//! Pipeline orchestration: discovery, lint gate, config resolution,
//! runtime grouping with a compatibility probe, execution, and result
//! aggregation with the exit-code contract (0 all pass, 1 any fail or
//! error, 2 usage).

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::assertions::{evaluate, AssertionResult, EvalContext, Status};
use crate::ast::Program;
use crate::diag::has_errors;
use crate::discover::{discover_and_parse, DiscoverError, ParsedFile};
use crate::inline::{build_circuit, inline};
use crate::lint::lint_program;
use crate::pragma::{
    collect_config, parse_pragma_line, AssertionDirective, BackendKind, Directive, SeedSpec,
    TestConfig, DEFAULT_RUNTIME,
};
use crate::sim::{ideal_distribution, run_shots, statevector, Counts};

/// Seed for the probe circuit; the probe oracle is deterministic, so any
/// fixed value works.
const PROBE_SEED: u64 = 0x5eed;
const PROBE_SHOTS: u64 = 16;

/// One discovered test, ready to plan: configuration, assertions, and the
/// program it lives in.
#[derive(Debug, Clone)]
pub struct TestCase {
    pub file: PathBuf,
    pub name: String,
    /// Line of the `def`.
    pub line: usize,
    pub config: TestConfig,
    pub assertions: Vec<AssertionDirective>,
    pub program: Arc<Program>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub test_name: String,
    pub file_path: PathBuf,
    /// "native" or "runtime@version".
    pub runtime_label: String,
    pub seed_used: u64,
    pub assertion_results: Vec<AssertionResult>,
    pub status: Status,
    /// Setup, probe, or lint failure; None when every phase ran.
    pub error: Option<String>,
    pub duration_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Totals {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub errored: usize,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub results: Vec<TestResult>,
    pub master_seed: u64,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    pub fn totals(&self) -> Totals {
        let mut t = Totals { total: self.results.len(), passed: 0, failed: 0, errored: 0 };
        for r in &self.results {
            match r.status {
                Status::Pass => t.passed += 1,
                Status::Fail => t.failed += 1,
                Status::Error => t.errored += 1,
            }
        }
        t
    }

    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.status == Status::Pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }
}

/// Tests grouped by requested runtime environment.
#[derive(Debug, Clone)]
pub struct ExecutionGroup {
    pub runtime: String,
    pub version: Option<String>,
    pub label: String,
    pub tests: Vec<TestCase>,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("runtime compatibility error: {message}")]
pub struct CompatibilityError {
    pub message: String,
    pub observed: Option<Counts>,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Overrides the randomly drawn master seed; explicit `//% seed:`
    /// pragmas still win for their own test.
    pub master_seed: Option<u64>,
    /// Worker threads; None uses the rayon default.
    pub jobs: Option<usize>,
    /// Directory that receives the `.qutest/` cache.
    pub cache_root: PathBuf,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { master_seed: None, jobs: None, cache_root: PathBuf::from(".") }
    }
}

/// Per-test seed derivation: FNV-1a over (master seed, file path, test
/// name, runtime label), so results are independent of execution order.
pub fn derive_seed(master: u64, file: &Path, test: &str, label: &str) -> u64 {
    const OFFSET: u64 = 0xcbf29ce484222325;
    const PRIME: u64 = 0x100000001b3;
    let mut hash = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(PRIME);
        }
    };
    eat(&master.to_le_bytes());
    eat(&[0x1f]);
    eat(file.to_string_lossy().as_bytes());
    eat(&[0x1f]);
    eat(test.as_bytes());
    eat(&[0x1f]);
    eat(label.as_bytes());
    hash
}

/// Check that a runtime environment can execute circuits at all: an
/// X-then-measure circuit must produce "1" on every probe shot. Only the
/// embedded "native" runtime exists in this build; anything else is a
/// compatibility error, reported as a framework problem rather than a
/// user-test failure.
pub fn probe_runtime(runtime: &str, version: Option<&str>) -> Result<Counts, CompatibilityError> {
    if runtime != DEFAULT_RUNTIME {
        let suffix = version.map(|v| format!(" (version {v})")).unwrap_or_default();
        return Err(CompatibilityError {
            message: format!("runtime '{runtime}'{suffix} is not supported by this build"),
            observed: None,
        });
    }
    if let Some(v) = version {
        return Err(CompatibilityError {
            message: format!("runtime 'native' does not provide pinned version '{v}'"),
            observed: None,
        });
    }
    let mut circuit = crate::circuit::Circuit::new(1, 1).expect("probe circuit");
    circuit.push_gate("x", &[], &[0]).expect("probe gate");
    circuit.push_measure(0, 0).expect("probe measure");
    let counts = run_shots(&circuit, PROBE_SHOTS, PROBE_SEED, BackendKind::Ideal, None).map_err(
        |e| CompatibilityError { message: format!("probe circuit failed to run: {e}"), observed: None },
    )?;
    if counts.get("1") == PROBE_SHOTS {
        Ok(counts)
    } else {
        Err(CompatibilityError {
            message: format!("probe oracle violated: expected all '1', observed {counts}"),
            observed: Some(counts),
        })
    }
}

fn write_probe_cache(
    cache_root: &Path,
    runtime: &str,
    version: Option<&str>,
    outcome: &Result<Counts, CompatibilityError>,
) {
    let dir = cache_root
        .join(".qutest")
        .join("runtimes")
        .join(runtime)
        .join(version.unwrap_or("active"));
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let payload = match outcome {
        Ok(counts) => serde_json::json!({
            "status": "ok",
            "timestamp": timestamp,
            "oracleCounts": counts.iter().collect::<std::collections::BTreeMap<_, _>>(),
        }),
        Err(err) => serde_json::json!({
            "status": "error",
            "timestamp": timestamp,
            "message": err.message,
            "oracleCounts": err.observed.as_ref().map(|c| c.iter().collect::<std::collections::BTreeMap<_, _>>()),
        }),
    };
    // Best effort: a read-only working directory must not fail the run.
    if std::fs::create_dir_all(&dir).is_ok() {
        let _ = std::fs::write(dir.join("probe.json"), format!("{payload:#}\n"));
    }
}

/// Group label as it appears in reports.
fn group_label(runtime: &str, version: Option<&str>) -> String {
    match version {
        Some(v) => format!("{runtime}@{v}"),
        None => runtime.to_string(),
    }
}

/// Split plain tests from environment-pinned tests and group the latter by
/// (runtime, version). A test listing k versions appears in k groups and
/// yields k results. Discovery order is preserved within each group.
pub fn plan(tests: Vec<TestCase>) -> Vec<ExecutionGroup> {
    let mut groups: Vec<ExecutionGroup> = vec![ExecutionGroup {
        runtime: DEFAULT_RUNTIME.to_string(),
        version: None,
        label: group_label(DEFAULT_RUNTIME, None),
        tests: vec![],
    }];
    for test in tests {
        let keys: Vec<(String, Option<String>)> = if test.config.runtime_versions.is_empty() {
            vec![(test.config.runtime.clone(), None)]
        } else {
            test.config
                .runtime_versions
                .iter()
                .map(|v| (test.config.runtime.clone(), Some(v.clone())))
                .collect()
        };
        for (runtime, version) in keys {
            let existing = groups
                .iter_mut()
                .find(|g| g.runtime == runtime && g.version == version);
            match existing {
                Some(group) => group.tests.push(test.clone()),
                None => groups.push(ExecutionGroup {
                    label: group_label(&runtime, version.as_deref()),
                    runtime,
                    version,
                    tests: vec![test.clone()],
                }),
            }
        }
    }
    groups.retain(|g| !g.tests.is_empty());
    groups
}

/// Run one test under one runtime label. Phases: (1) inline and build the
/// circuit, (2) structural assertions, (3) shot execution when any
/// directive consumes counts, (4) measurement-free statevector and ideal
/// distribution when needed, (5) remaining assertions in directive order.
/// A phase failure marks the test errored and keeps results already
/// computed; structural results always precede statistical ones.
pub fn execute_test(test: &TestCase, runtime_label: &str, master_seed: u64) -> TestResult {
    let started = Instant::now();
    let seed = match test.config.seed {
        SeedSpec::Fixed(s) => s,
        SeedSpec::Random => derive_seed(master_seed, &test.file, &test.name, runtime_label),
    };
    let mut result = TestResult {
        test_name: test.name.clone(),
        file_path: test.file.clone(),
        runtime_label: runtime_label.to_string(),
        seed_used: seed,
        assertion_results: vec![],
        status: Status::Error,
        error: None,
        duration_seconds: 0.0,
    };

    let finish = |mut r: TestResult| -> TestResult {
        if r.error.is_none() {
            r.status = if r.assertion_results.iter().any(|a| a.status == Status::Error) {
                Status::Error
            } else if r.assertion_results.iter().any(|a| a.status == Status::Fail) {
                Status::Fail
            } else {
                Status::Pass
            };
        }
        r.duration_seconds = started.elapsed().as_secs_f64();
        r
    };

    let test_def = match test.program.subroutine(&test.name) {
        Some(def) => def,
        None => {
            result.error = Some(format!("test '{}' vanished from its program", test.name));
            return finish(result);
        }
    };
    let circuit = match inline(test_def, &test.program).and_then(|flat| build_circuit(&flat)) {
        Ok(c) => c,
        Err(e) => {
            result.error = Some(e.to_string());
            return finish(result);
        }
    };

    let (structural, statistical): (Vec<_>, Vec<_>) =
        test.assertions.iter().partition(|d| d.kind().is_structural());

    let base_ctx = EvalContext { circuit: &circuit, counts: None, statevector: None, ideal: None };
    for directive in &structural {
        result.assertion_results.push(evaluate(directive, &base_ctx));
    }

    let counts = if statistical.iter().any(|d| d.kind().needs_counts()) {
        match run_shots(&circuit, test.config.shots, seed, test.config.backend, None) {
            Ok(counts) => Some(counts),
            Err(e) => {
                result.error = Some(e.to_string());
                return finish(result);
            }
        }
    } else {
        None
    };

    let state = if statistical.iter().any(|d| d.kind().needs_statevector()) {
        match statevector(&circuit) {
            Ok(sv) => Some(sv),
            Err(e) => {
                result.error = Some(e.to_string());
                return finish(result);
            }
        }
    } else {
        None
    };

    let ideal = if statistical.iter().any(|d| d.kind().needs_ideal_distribution()) {
        match ideal_distribution(&circuit) {
            Ok(d) => Some(d),
            Err(e) => {
                result.error = Some(e.to_string());
                return finish(result);
            }
        }
    } else {
        None
    };

    let ctx = EvalContext {
        circuit: &circuit,
        counts: counts.as_ref(),
        statevector: state.as_ref(),
        ideal: ideal.as_ref(),
    };
    for directive in &statistical {
        result.assertion_results.push(evaluate(directive, &ctx));
    }

    finish(result)
}

/// Build the test cases of one lint-clean parsed file.
fn test_cases_of(file: &ParsedFile) -> Vec<Result<TestCase, TestResult>> {
    let program = Arc::new(file.program.clone());
    let mut out = Vec::new();
    for def in program.tests() {
        let mut configs = Vec::new();
        let mut assertions = Vec::new();
        let mut broken = None;
        for pragma in &def.pragma_lines {
            match parse_pragma_line(&pragma.raw, pragma.line) {
                Ok(Directive::Config(c)) => configs.push(c),
                Ok(Directive::Assertion(a)) => assertions.push(a),
                Err(d) => broken = Some(d.to_string()),
            }
        }
        match broken {
            None => out.push(Ok(TestCase {
                file: file.path.clone(),
                name: def.name.clone(),
                line: def.span.0,
                config: collect_config(&configs),
                assertions,
                program: Arc::clone(&program),
            })),
            // Unreachable behind the lint gate; kept for direct API use.
            Some(message) => out.push(Err(errored_result(
                &file.path,
                &def.name,
                format!("unparseable directive: {message}"),
            ))),
        }
    }
    out
}

fn errored_result(path: &Path, name: &str, message: String) -> TestResult {
    TestResult {
        test_name: name.to_string(),
        file_path: path.to_path_buf(),
        runtime_label: DEFAULT_RUNTIME.to_string(),
        seed_used: 0,
        assertion_results: vec![],
        status: Status::Error,
        error: Some(message),
        duration_seconds: 0.0,
    }
}

/// Execute everything under the given paths. Returns the report and the
/// process exit code (0 all passed, 1 any failure or error); usage
/// problems (missing paths) surface as `DiscoverError`, exit code 2.
pub fn run(paths: &[PathBuf], options: &RunOptions) -> Result<(RunReport, i32), DiscoverError> {
    let started = Instant::now();
    let files = discover_and_parse(paths)?;
    let master_seed = options.master_seed.unwrap_or_else(rand::random);

    let mut lint_failures: Vec<TestResult> = Vec::new();
    let mut cases: Vec<TestCase> = Vec::new();
    for file in &files {
        let diags = lint_program(&file.program, file.diagnostics.clone());
        if has_errors(&diags) {
            let errors: Vec<String> = diags
                .iter()
                .filter(|d| d.is_error())
                .map(|d| d.to_string())
                .collect();
            let summary = format!("lint errors in file: {}", errors.join("; "));
            let tests: Vec<_> = file.program.tests().collect();
            if tests.is_empty() {
                lint_failures.push(errored_result(&file.path, "<lint>", summary));
            } else {
                for def in tests {
                    lint_failures.push(errored_result(&file.path, &def.name, summary.clone()));
                }
            }
            continue;
        }
        for case in test_cases_of(file) {
            match case {
                Ok(case) => cases.push(case),
                Err(result) => lint_failures.push(result),
            }
        }
    }

    let groups = plan(cases);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.unwrap_or(0))
        .build()
        .expect("worker pool");

    let mut results = lint_failures;
    for group in &groups {
        let probe = probe_runtime(&group.runtime, group.version.as_deref());
        write_probe_cache(&options.cache_root, &group.runtime, group.version.as_deref(), &probe);
        match probe {
            Ok(_) => {
                let label = group.label.clone();
                let mut executed: Vec<TestResult> = pool.install(|| {
                    group
                        .tests
                        .par_iter()
                        .map(|t| execute_test(t, &label, master_seed))
                        .collect()
                });
                results.append(&mut executed);
            }
            Err(err) => {
                for test in &group.tests {
                    let mut r = errored_result(&test.file, &test.name, err.to_string());
                    r.runtime_label = group.label.clone();
                    results.push(r);
                }
            }
        }
    }

    let report = RunReport {
        results,
        master_seed,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let code = report.exit_code();
    Ok((report, code))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn case(source: &str, name: &str) -> TestCase {
        let program = Arc::new(parse_program(source, Path::new("case.qasm")).unwrap());
        let def = program.subroutine(name).unwrap();
        let mut configs = Vec::new();
        let mut assertions = Vec::new();
        for pragma in &def.pragma_lines {
            match parse_pragma_line(&pragma.raw, pragma.line).unwrap() {
                Directive::Config(c) => configs.push(c),
                Directive::Assertion(a) => assertions.push(a),
            }
        }
        TestCase {
            file: PathBuf::from("case.qasm"),
            name: name.to_string(),
            line: def.span.0,
            config: collect_config(&configs),
            assertions,
            program,
        }
    }

    const FLAGSHIP: &str = r#"OPENQASM 3;
include "stdgates.inc";

def bell(qubit[2] q) {
    h q[0];
    cx q[0], q[1];
}

def test_distribution() {
    //% shots: 10000
    //% seed: 42
    qubit[2] q;
    bit[2] m;
    bell(q);
    m = measure q;
    //% assert.chi2: {"00": 0.5, "11": 0.5} >= 0.05
    //% assert.tvd: {"00": 0.5, "11": 0.5} < 0.05
}
"#;

    #[test]
    fn flagship_test_passes() {
        let result = execute_test(&case(FLAGSHIP, "test_distribution"), "native", 0);
        assert_eq!(result.status, Status::Pass, "results: {:#?}", result);
        assert_eq!(result.seed_used, 42);
        assert_eq!(result.assertion_results.len(), 2);
    }

    #[test]
    fn probe_native_ok_and_others_rejected() {
        let counts = probe_runtime("native", None).unwrap();
        assert_eq!(counts.get("1"), PROBE_SHOTS);

        let err = probe_runtime("qiskit", Some("1.0.2")).unwrap_err();
        assert!(err.message.contains("not supported"));
        assert!(err.observed.is_none());

        let pinned = probe_runtime("native", Some("0.1.0")).unwrap_err();
        assert!(pinned.message.contains("pinned version"));
    }

    #[test]
    fn plan_plain_tests_form_one_group() {
        let t = case(FLAGSHIP, "test_distribution");
        let groups = plan(vec![t.clone(), t.clone(), t]);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].label, "native");
        assert_eq!(groups[0].tests.len(), 3);
    }

    #[test]
    fn plan_versioned_test_appears_in_each_group() {
        let src = r#"OPENQASM 3;
def test_env() {
    //% runtime: qiskit
    //% runtime_version: "1.0.2, 1.1.0"
    //% assert.depth: <= 5
    qubit[1] q;
    h q[0];
}
"#;
        let groups = plan(vec![case(src, "test_env")]);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].label, "qiskit@1.0.2");
        assert_eq!(groups[1].label, "qiskit@1.1.0");
        assert_eq!(groups[0].tests.len(), 1);
        assert_eq!(groups[1].tests.len(), 1);
    }

    #[test]
    fn plan_mixed_keeps_plain_group_first() {
        let src = r#"OPENQASM 3;
def test_env() {
    //% runtime: qiskit
    //% runtime_version: "1.0.2"
    //% assert.depth: <= 5
    qubit[1] q;
    h q[0];
}
"#;
        let plain = case(FLAGSHIP, "test_distribution");
        let groups = plan(vec![case(src, "test_env"), plain]);
        assert_eq!(groups[0].label, "native");
        assert_eq!(groups[1].label, "qiskit@1.0.2");
    }

    #[test]
    fn unknown_callee_errors_without_running() {
        let src = r#"OPENQASM 3;
def test_ghost() {
    //% assert.output: == "0"
    qubit[1] q;
    bit[1] m;
    ghost(q);
    m = measure q;
}
"#;
        let result = execute_test(&case(src, "test_ghost"), "native", 0);
        assert_eq!(result.status, Status::Error);
        assert!(result.error.as_ref().unwrap().contains("ghost"));
        assert!(result.assertion_results.is_empty());
    }

    #[test]
    fn structural_results_survive_statistical_failure_phases() {
        // Depth bound violated and a tvd assertion: both evaluated, fail.
        let src = r#"OPENQASM 3;
def test_both() {
    //% shots: 200
    //% seed: 1
    //% assert.depth: <= 2
    //% assert.tvd: {"00": 0.5, "11": 0.5} < 0.5
    qubit[2] q;
    bit[2] m;
    h q[0];
    cx q[0], q[1];
    m = measure q;
}
"#;
        let result = execute_test(&case(src, "test_both"), "native", 0);
        assert_eq!(result.status, Status::Fail);
        assert_eq!(result.assertion_results.len(), 2);
        // Structural first regardless of directive order in the file.
        assert_eq!(result.assertion_results[0].kind, crate::pragma::AssertionKind::Depth);
        assert_eq!(result.assertion_results[0].status, Status::Fail);
        assert_eq!(result.assertion_results[1].status, Status::Pass);
    }

    #[test]
    fn hardware_backend_keeps_structural_results() {
        let src = r#"OPENQASM 3;
def test_hw() {
    //% backend: hardware
    //% assert.gate_set: {x, measure}
    //% assert.depth: <= 2
    //% assert.output: == "1"
    qubit[1] q;
    bit[1] m;
    x q[0];
    m = measure q;
}
"#;
        let result = execute_test(&case(src, "test_hw"), "native", 0);
        assert_eq!(result.status, Status::Error);
        assert!(result.error.as_ref().unwrap().contains("hardware"));
        assert_eq!(result.assertion_results.len(), 2);
        assert!(result.assertion_results.iter().all(|a| a.status == Status::Pass));
    }

    #[test]
    fn entangled_only_test_needs_no_measurement() {
        let src = r#"OPENQASM 3;
def test_witness() {
    //% assert.entangled: [0]
    qubit[2] q;
    h q[0];
    cx q[0], q[1];
}
"#;
        let result = execute_test(&case(src, "test_witness"), "native", 0);
        assert_eq!(result.status, Status::Pass, "{result:#?}");
    }

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        let a = derive_seed(1, Path::new("a.qasm"), "test_x", "native");
        let b = derive_seed(1, Path::new("a.qasm"), "test_x", "native");
        assert_eq!(a, b);
        assert_ne!(a, derive_seed(2, Path::new("a.qasm"), "test_x", "native"));
        assert_ne!(a, derive_seed(1, Path::new("b.qasm"), "test_x", "native"));
        assert_ne!(a, derive_seed(1, Path::new("a.qasm"), "test_y", "native"));
        assert_ne!(a, derive_seed(1, Path::new("a.qasm"), "test_x", "qiskit@1.0.2"));
    }

    #[test]
    fn explicit_seed_beats_master_seed() {
        let fixed = case(FLAGSHIP, "test_distribution");
        let r1 = execute_test(&fixed, "native", 100);
        let r2 = execute_test(&fixed, "native", 200);
        assert_eq!(r1.seed_used, 42);
        assert_eq!(r2.seed_used, 42);
        assert_eq!(r1.assertion_results, r2.assertion_results);
    }
}
