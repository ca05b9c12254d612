//! Static linter: parse diagnostics plus pragma checks, without executing
//! any circuit.
//!
//! The linter works on the recovery parser's output, so pragma placement
//! and grammar problems are still reported in files that do not fully
//! parse.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::ast::{Program, RegKind, RegRef, Statement, SubroutineDef};
use crate::diag::{Code, Diagnostic};
use crate::parser::parse_with_recovery;
use crate::pragma::{parse_pragma_line, ConfigKey, Directive, DEFAULT_RUNTIME};

/// Lint one source file. Returns every diagnostic, sorted by line.
pub fn lint_source(source: &str, path: &Path) -> Vec<Diagnostic> {
    let (program, parse_diags) = parse_with_recovery(source, path);
    lint_program(&program, parse_diags)
}

/// Pragma-level checks over an already-parsed (possibly recovered) program,
/// merged with the parse diagnostics.
pub fn lint_program(program: &Program, parse_diags: Vec<Diagnostic>) -> Vec<Diagnostic> {
    let mut diags = parse_diags;

    // Every pragma line must parse, wherever it appears.
    for pragma in &program.pragmas {
        if let Err(d) = parse_pragma_line(&pragma.raw, pragma.line) {
            diags.push(d);
        }
    }

    // Directives are only meaningful inside a test body.
    for pragma in program.top_level_pragmas() {
        diags.push(outside_test(pragma.line));
    }
    for def in &program.subroutines {
        if !def.is_test() {
            for pragma in &def.pragma_lines {
                diags.push(outside_test(pragma.line));
            }
            continue;
        }
        lint_test(def, &mut diags);
    }

    diags.sort_by_key(|d| (d.line, d.code));
    diags
}

fn outside_test(line: usize) -> Diagnostic {
    Diagnostic::new(
        Code::PragmaOutsideTest,
        line,
        "'//%' directive outside a test subroutine",
    )
    .with_hint("directives must appear inside a def test*() body")
}

fn lint_test(def: &SubroutineDef, diags: &mut Vec<Diagnostic>) {
    if !def.params.is_empty() {
        diags.push(
            Diagnostic::new(
                Code::TestWithParameters,
                def.span.0,
                format!("test '{}' must not take parameters", def.name),
            )
            .with_hint("declare registers inside the test body instead"),
        );
    }

    let mut seen_config: BTreeMap<ConfigKey, usize> = BTreeMap::new();
    let mut assertion_count = 0usize;
    for pragma in &def.pragma_lines {
        let Ok(directive) = parse_pragma_line(&pragma.raw, pragma.line) else {
            continue; // already diagnosed
        };
        match directive {
            Directive::Config(config) => {
                let key = config.setting.key();
                if let Some(first_line) = seen_config.get(&key) {
                    diags.push(
                        Diagnostic::new(
                            Code::DuplicateConfigKey,
                            pragma.line,
                            format!("'{key}' already set on line {first_line}"),
                        )
                        .with_hint("each configuration key may appear once per test"),
                    );
                } else {
                    seen_config.insert(key, pragma.line);
                }
                match &config.setting {
                    crate::pragma::ConfigSetting::Runtime(name) if name != DEFAULT_RUNTIME => {
                        diags.push(
                            Diagnostic::new(
                                Code::UnsupportedRuntime,
                                pragma.line,
                                format!("runtime '{name}' is not supported by this build"),
                            )
                            .with_hint(format!("supported runtime: {DEFAULT_RUNTIME}")),
                        );
                    }
                    _ => {}
                }
            }
            Directive::Assertion(_) => assertion_count += 1,
        }
    }

    // Pinned versions only make sense for runtimes with managed
    // environments; the native runtime has none.
    if seen_config.contains_key(&ConfigKey::RuntimeVersion)
        && !seen_config.contains_key(&ConfigKey::Runtime)
    {
        let line = def
            .pragma_lines
            .iter()
            .find(|p| {
                matches!(
                    parse_pragma_line(&p.raw, p.line),
                    Ok(Directive::Config(c)) if c.setting.key() == ConfigKey::RuntimeVersion
                )
            })
            .map(|p| p.line)
            .unwrap_or(def.span.0);
        diags.push(
            Diagnostic::new(
                Code::UnsupportedRuntime,
                line,
                format!("runtime '{DEFAULT_RUNTIME}' does not provide pinned versions"),
            )
            .with_hint("remove runtime_version or name a runtime"),
        );
    }

    if assertion_count == 0 {
        diags.push(
            Diagnostic::new(
                Code::NoAssertions,
                def.span.0,
                format!("test '{}' has no assertion directives", def.name),
            )
            .with_hint("add an assert.* pragma so the test can fail"),
        );
    }

    lint_terminal_measurement(def, diags);
}

/// Gates after a measurement on the same qubit, within the statements of
/// this body only (calls are not expanded here; execution rechecks on the
/// inlined circuit).
fn lint_terminal_measurement(def: &SubroutineDef, diags: &mut Vec<Diagnostic>) {
    let widths: BTreeMap<&str, usize> = def
        .body
        .iter()
        .filter_map(|s| match s {
            Statement::Declaration(d) if d.kind == RegKind::Qubit => {
                Some((d.name.as_str(), d.width))
            }
            _ => None,
        })
        .collect();
    let mut measured: BTreeSet<(&str, usize)> = BTreeSet::new();
    for stmt in &def.body {
        match stmt {
            Statement::Measure(m) => match &m.source {
                RegRef::Indexed(name, idx) => {
                    measured.insert((name.as_str(), *idx));
                }
                RegRef::Whole(name) => {
                    if let Some(&width) = widths.get(name.as_str()) {
                        for i in 0..width {
                            measured.insert((name.as_str(), i));
                        }
                    }
                }
            },
            Statement::Gate(g) => {
                for target in &g.targets {
                    if measured.contains(&(target.register.as_str(), target.index)) {
                        diags.push(
                            Diagnostic::new(
                                Code::GateAfterMeasure,
                                g.line,
                                format!("gate '{}' applied to '{target}' after it was measured", g.name),
                            )
                            .with_hint("measurement is terminal; reorder the gate before the measure"),
                        );
                    }
                }
            }
            _ => {}
        }
    }
}
