//! qutest: a native testing framework for OpenQASM 3 programs.
//!
//! Programs and their tests are plain `.qasm` files. Tests are `def test*()`
//! subroutines; execution configuration and assertions are `//%` pragma
//! comments, so every test file stays valid OpenQASM 3. Tests run on an
//! embedded statevector simulator (ideal or depolarizing-noise backend) and
//! report to the console and to JUnit-schema XML.
//!
//! Bit-ordering convention used throughout: classical bit 0 is the
//! rightmost character of a bitstring key, and basis index `b` encodes
//! qubit `k` in bit `k` of `b`.

pub mod assertions;
pub mod ast;
pub mod circuit;
pub mod diag;
pub mod discover;
pub mod distribution;
pub mod inline;
pub mod lexer;
pub mod lint;
pub mod parser;
pub mod pragma;
pub mod report;
pub mod runner;
pub mod sim;
pub mod stats;

pub use assertions::{compare, evaluate, AssertionResult, EvalContext, Status};
pub use ast::{list_tests, Program, SubroutineDef};
pub use circuit::{Circuit, MeasurementMap, Operation};
pub use diag::{has_errors, Code, Diagnostic, Severity};
pub use discover::{discover, discover_and_parse, DiscoverError};
pub use distribution::Distribution;
pub use inline::{build_circuit, inline, FlatBody};
pub use lint::{lint_program, lint_source};
pub use parser::{parse_program, parse_with_recovery};
pub use pragma::{
    collect_config, parse_pragma_line, AssertionDirective, AssertionKind, BackendKind,
    ComparisonSpec, Directive, SeedSpec, TestConfig,
};
pub use report::{render_console, render_junit_xml, ConsoleOptions};
pub use runner::{
    derive_seed, execute_test, plan, probe_runtime, run, CompatibilityError, ExecutionGroup,
    RunOptions, RunReport, TestCase, TestResult, Totals,
};
pub use sim::{
    ideal_distribution, partial_trace, run_shots, statevector, von_neumann_entropy, Counts,
    DensityMatrix, NoiseModel, SimError, Statevector,
};
