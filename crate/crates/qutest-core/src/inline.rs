//! Function inlining: replace every call in a test body with the callee's
//! body, substituting formal parameters with actual arguments, transitively
//! until no calls remain.
//!
//! Substitution is by register-name rewriting with index pass-through: a
//! formal `q` bound to actual `r` maps `q[i]` to `r[i]`. Callee-local
//! declarations are hoisted into the flat register table; name collisions
//! are errors rather than silently renamed. Recursion is rejected.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ast::{Program, QubitRef, RegKind, RegRef, Statement, SubroutineDef};
use crate::circuit::{Circuit, CircuitError, MeasurementMap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InlineError {
    #[error("test '{0}' must not take parameters")]
    TestHasParameters(String),
    #[error("call to unknown subroutine '{0}'")]
    UnknownCallee(String),
    #[error("'{callee}' expects {expected} argument(s), got {got}")]
    ArgumentCount { callee: String, expected: usize, got: usize },
    #[error("argument '{arg}' to '{callee}' must be a {expected}, but it is a {got}")]
    ArgumentMismatch { callee: String, arg: String, expected: String, got: String },
    #[error("recursion not supported: {0}")]
    Recursion(String),
    #[error("declaration of '{0}' collides with an existing register")]
    NameCollision(String),
    #[error("declaration of '{0}' shadows a substituted parameter")]
    ShadowsParameter(String),
    #[error("register '{0}' is not declared in the test scope")]
    UndeclaredRegister(String),
    #[error("'{register}' is a {found} register, but a {needed} register is required here")]
    WrongKind { register: String, needed: RegKind, found: RegKind },
    #[error("index {index} out of range for '{register}' of width {width}")]
    IndexOutOfRange { register: String, index: usize, width: usize },
    #[error("cannot measure '{qubits}' (width {qubit_width}) into '{bits}' (width {bit_width})")]
    MeasureWidthMismatch { qubits: String, qubit_width: usize, bits: String, bit_width: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegisterInfo {
    pub name: String,
    pub kind: RegKind,
    pub width: usize,
    /// Global index of element 0 within this kind's index space.
    pub offset: usize,
}

/// Registers of the flattened test, in declaration order. Qubit and bit
/// registers occupy separate global index spaces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegisterTable {
    entries: Vec<RegisterInfo>,
}

impl RegisterTable {
    pub fn get(&self, name: &str) -> Option<&RegisterInfo> {
        self.entries.iter().find(|r| r.name == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &RegisterInfo> {
        self.entries.iter()
    }

    pub fn num_qubits(&self) -> usize {
        self.kind_width(RegKind::Qubit)
    }

    pub fn classical_width(&self) -> usize {
        self.kind_width(RegKind::Bit)
    }

    fn kind_width(&self, kind: RegKind) -> usize {
        self.entries.iter().filter(|r| r.kind == kind).map(|r| r.width).sum()
    }

    fn push(&mut self, name: &str, kind: RegKind, width: usize) -> Result<(), InlineError> {
        if self.get(name).is_some() {
            return Err(InlineError::NameCollision(name.to_string()));
        }
        let offset = self.kind_width(kind);
        self.entries.push(RegisterInfo { name: name.to_string(), kind, width, offset });
        Ok(())
    }

    fn expect_kind(&self, name: &str, needed: RegKind) -> Result<&RegisterInfo, InlineError> {
        let info = self
            .get(name)
            .ok_or_else(|| InlineError::UndeclaredRegister(name.to_string()))?;
        if info.kind != needed {
            return Err(InlineError::WrongKind {
                register: name.to_string(),
                needed,
                found: info.kind,
            });
        }
        Ok(info)
    }

    fn global_index(&self, name: &str, index: usize, kind: RegKind) -> Result<usize, InlineError> {
        let info = self.expect_kind(name, kind)?;
        if index >= info.width {
            return Err(InlineError::IndexOutOfRange {
                register: name.to_string(),
                index,
                width: info.width,
            });
        }
        Ok(info.offset + index)
    }
}

/// A test body with every call expanded. Statements hold no calls and no
/// declarations; declarations live in the register table.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatBody {
    pub statements: Vec<Statement>,
    pub registers: RegisterTable,
    /// Global qubit index -> global classical bit index.
    pub measurement_map: MeasurementMap,
}

/// Flatten a test subroutine against its program.
pub fn inline(test: &SubroutineDef, program: &Program) -> Result<FlatBody, InlineError> {
    if !test.params.is_empty() {
        return Err(InlineError::TestHasParameters(test.name.clone()));
    }
    let mut flat = Flattener::default();
    let mut stack = vec![test.name.clone()];
    flat.expand(&test.body, &BTreeMap::new(), program, &mut stack)?;
    Ok(FlatBody {
        statements: flat.statements,
        registers: flat.registers,
        measurement_map: flat.measurement_map,
    })
}

#[derive(Default)]
struct Flattener {
    statements: Vec<Statement>,
    registers: RegisterTable,
    measurement_map: MeasurementMap,
}

impl Flattener {
    fn expand(
        &mut self,
        body: &[Statement],
        subst: &BTreeMap<String, String>,
        program: &Program,
        stack: &mut Vec<String>,
    ) -> Result<(), InlineError> {
        for stmt in body {
            match stmt {
                Statement::Declaration(decl) => {
                    if subst.contains_key(&decl.name) {
                        return Err(InlineError::ShadowsParameter(decl.name.clone()));
                    }
                    self.registers.push(&decl.name, decl.kind, decl.width)?;
                }
                Statement::Gate(gate) => {
                    let mut rewritten = gate.clone();
                    for target in &mut rewritten.targets {
                        target.register = resolve(&target.register, subst);
                        // Validates declaration order, kind, and range.
                        self.registers.global_index(&target.register, target.index, RegKind::Qubit)?;
                    }
                    self.statements.push(Statement::Gate(rewritten));
                }
                Statement::Measure(measure) => {
                    let target = rewrite_ref(&measure.target, subst);
                    let source = rewrite_ref(&measure.source, subst);
                    self.record_measurement(&target, &source)?;
                    self.statements.push(Statement::Measure(crate::ast::MeasureStmt {
                        target,
                        source,
                        line: measure.line,
                    }));
                }
                Statement::Call(call) => {
                    let callee = program
                        .subroutine(&call.callee)
                        .ok_or_else(|| InlineError::UnknownCallee(call.callee.clone()))?;
                    if stack.contains(&callee.name) {
                        let mut chain = stack.clone();
                        chain.push(callee.name.clone());
                        return Err(InlineError::Recursion(chain.join(" -> ")));
                    }
                    if callee.params.len() != call.args.len() {
                        return Err(InlineError::ArgumentCount {
                            callee: callee.name.clone(),
                            expected: callee.params.len(),
                            got: call.args.len(),
                        });
                    }
                    let mut bindings = BTreeMap::new();
                    for (param, arg) in callee.params.iter().zip(&call.args) {
                        let actual = resolve(arg, subst);
                        let info = self
                            .registers
                            .get(&actual)
                            .ok_or_else(|| InlineError::UndeclaredRegister(actual.clone()))?;
                        if info.kind != param.kind || info.width != param.width {
                            return Err(InlineError::ArgumentMismatch {
                                callee: callee.name.clone(),
                                arg: actual.clone(),
                                expected: format!("{}[{}]", param.kind, param.width),
                                got: format!("{}[{}]", info.kind, info.width),
                            });
                        }
                        bindings.insert(param.name.clone(), actual);
                    }
                    stack.push(callee.name.clone());
                    self.expand(&callee.body, &bindings, program, stack)?;
                    stack.pop();
                }
            }
        }
        Ok(())
    }

    fn record_measurement(&mut self, target: &RegRef, source: &RegRef) -> Result<(), InlineError> {
        match (target, source) {
            (RegRef::Whole(bits), RegRef::Whole(qubits)) => {
                let bit_info = self.registers.expect_kind(bits, RegKind::Bit)?.clone();
                let qubit_info = self.registers.expect_kind(qubits, RegKind::Qubit)?.clone();
                if bit_info.width != qubit_info.width {
                    return Err(InlineError::MeasureWidthMismatch {
                        qubits: qubits.clone(),
                        qubit_width: qubit_info.width,
                        bits: bits.clone(),
                        bit_width: bit_info.width,
                    });
                }
                for i in 0..qubit_info.width {
                    self.measurement_map
                        .insert(qubit_info.offset + i, bit_info.offset + i)?;
                }
            }
            (RegRef::Indexed(bits, bit_idx), RegRef::Indexed(qubits, qubit_idx)) => {
                let bit = self.registers.global_index(bits, *bit_idx, RegKind::Bit)?;
                let qubit = self.registers.global_index(qubits, *qubit_idx, RegKind::Qubit)?;
                self.measurement_map.insert(qubit, bit)?;
            }
            // Mixed forms are rejected by the parser; keep the invariant here.
            _ => unreachable!("parser only emits whole/whole or indexed/indexed measurements"),
        }
        Ok(())
    }
}

fn resolve(name: &str, subst: &BTreeMap<String, String>) -> String {
    subst.get(name).cloned().unwrap_or_else(|| name.to_string())
}

fn rewrite_ref(reg_ref: &RegRef, subst: &BTreeMap<String, String>) -> RegRef {
    match reg_ref {
        RegRef::Whole(name) => RegRef::Whole(resolve(name, subst)),
        RegRef::Indexed(name, idx) => RegRef::Indexed(resolve(name, subst), *idx),
    }
}

/// Lower a flat body to the simulator's circuit form: global qubit
/// indices, gates in order, one measurement operation per measured qubit.
pub fn build_circuit(flat: &FlatBody) -> Result<Circuit, InlineError> {
    let mut circuit = Circuit::new(flat.registers.num_qubits(), flat.registers.classical_width())?;
    for stmt in &flat.statements {
        match stmt {
            Statement::Gate(gate) => {
                let mut qubits = Vec::with_capacity(gate.targets.len());
                for QubitRef { register, index } in &gate.targets {
                    qubits.push(flat.registers.global_index(register, *index, RegKind::Qubit)?);
                }
                circuit.push_gate(&gate.name, &gate.angles, &qubits)?;
            }
            Statement::Measure(measure) => match (&measure.target, &measure.source) {
                (RegRef::Whole(bits), RegRef::Whole(qubits)) => {
                    let bit_info = flat.registers.expect_kind(bits, RegKind::Bit)?;
                    let qubit_info = flat.registers.expect_kind(qubits, RegKind::Qubit)?;
                    for i in 0..qubit_info.width {
                        circuit.push_measure(qubit_info.offset + i, bit_info.offset + i)?;
                    }
                }
                (RegRef::Indexed(bits, bit_idx), RegRef::Indexed(qubits, qubit_idx)) => {
                    let bit = flat.registers.global_index(bits, *bit_idx, RegKind::Bit)?;
                    let qubit = flat.registers.global_index(qubits, *qubit_idx, RegKind::Qubit)?;
                    circuit.push_measure(qubit, bit)?;
                }
                _ => unreachable!("parser only emits whole/whole or indexed/indexed measurements"),
            },
            Statement::Declaration(_) | Statement::Call(_) => {
                unreachable!("flat bodies hold neither declarations nor calls")
            }
        }
    }
    debug_assert_eq!(circuit.measurement_map(), &flat.measurement_map);
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;
    use crate::sim::statevector;
    use approx::assert_abs_diff_eq;
    use std::path::Path;

    fn program(source: &str) -> Program {
        parse_program(source, Path::new("test.qasm")).expect("fixture parses")
    }

    fn flatten(source: &str, test_name: &str) -> Result<FlatBody, InlineError> {
        let p = program(source);
        let test = p.subroutine(test_name).expect("test exists");
        inline(test, &p)
    }

    const BELL_TEST: &str = r#"
OPENQASM 3;
include "stdgates.inc";

def bell(qubit[2] q) {
    h q[0];
    cx q[0], q[1];
}

def test_distribution() {
    qubit[2] q;
    bit[2] m;
    bell(q);
    m = measure q;
}
"#;

    #[test]
    fn bell_test_flattens_to_three_statements() {
        let flat = flatten(BELL_TEST, "test_distribution").unwrap();
        assert_eq!(flat.statements.len(), 3);
        assert!(flat
            .statements
            .iter()
            .all(|s| !matches!(s, Statement::Call(_) | Statement::Declaration(_))));
        assert_eq!(flat.registers.num_qubits(), 2);
        assert_eq!(flat.registers.classical_width(), 2);
        assert_eq!(flat.measurement_map.bit_for_qubit(0), Some(0));
        assert_eq!(flat.measurement_map.bit_for_qubit(1), Some(1));
    }

    #[test]
    fn bell_circuit_ops_in_order() {
        let flat = flatten(BELL_TEST, "test_distribution").unwrap();
        let circuit = build_circuit(&flat).unwrap();
        let names: Vec<&str> = circuit.ops().iter().map(|op| op.name()).collect();
        assert_eq!(names, ["h", "cx", "measure", "measure"]);
        assert_eq!(circuit.depth(), 3);
    }

    #[test]
    fn two_level_expansion_keeps_order() {
        let src = r#"
OPENQASM 3;
def g(qubit[1] a) {
    x a[0];
}
def f(qubit[1] b) {
    h b[0];
    g(b);
}
def test_nested() {
    qubit[1] q;
    f(q);
}
"#;
        let flat = flatten(src, "test_nested").unwrap();
        let names: Vec<String> = flat
            .statements
            .iter()
            .map(|s| match s {
                Statement::Gate(g) => g.name.clone(),
                other => panic!("unexpected {other:?}"),
            })
            .collect();
        assert_eq!(names, ["h", "x"]);
        let targets: Vec<&str> = flat
            .statements
            .iter()
            .map(|s| match s {
                Statement::Gate(g) => g.targets[0].register.as_str(),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(targets, ["q", "q"]);
    }

    #[test]
    fn flat_body_is_a_fixpoint() {
        let src = r#"
OPENQASM 3;
def test_plain() {
    qubit[1] q;
    bit[1] m;
    h q[0];
    m = measure q;
}
"#;
        let p = program(src);
        let test = p.subroutine("test_plain").unwrap();
        let flat = inline(test, &p).unwrap();
        // Statements equal the declaration-free body.
        let body_without_decls: Vec<&Statement> = test
            .body
            .iter()
            .filter(|s| !matches!(s, Statement::Declaration(_)))
            .collect();
        assert_eq!(flat.statements.len(), body_without_decls.len());
        for (got, want) in flat.statements.iter().zip(body_without_decls) {
            assert_eq!(got, want);
        }
    }

    #[test]
    fn recursion_is_rejected() {
        let direct = r#"
OPENQASM 3;
def loop_(qubit[1] q) {
    x q[0];
    loop_(q);
}
def test_rec() {
    qubit[1] q;
    loop_(q);
}
"#;
        match flatten(direct, "test_rec") {
            Err(InlineError::Recursion(chain)) => assert!(chain.contains("loop_ -> loop_")),
            other => panic!("expected recursion error, got {other:?}"),
        }

        let mutual = r#"
OPENQASM 3;
def even(qubit[1] q) {
    odd(q);
}
def odd(qubit[1] q) {
    even(q);
}
def test_mutual() {
    qubit[1] q;
    even(q);
}
"#;
        assert!(matches!(flatten(mutual, "test_mutual"), Err(InlineError::Recursion(_))));
    }

    #[test]
    fn unknown_callee_and_arity_mismatch() {
        let unknown = r#"
OPENQASM 3;
def test_missing() {
    qubit[1] q;
    ghost(q);
}
"#;
        assert!(matches!(
            flatten(unknown, "test_missing"),
            Err(InlineError::UnknownCallee(name)) if name == "ghost"
        ));

        let arity = r#"
OPENQASM 3;
def pair(qubit[1] a, qubit[1] b) {
    cx a[0], b[0];
}
def test_arity() {
    qubit[1] q;
    pair(q);
}
"#;
        assert!(matches!(
            flatten(arity, "test_arity"),
            Err(InlineError::ArgumentCount { expected: 2, got: 1, .. })
        ));

        let width = r#"
OPENQASM 3;
def wide(qubit[2] a) {
    h a[0];
}
def test_width() {
    qubit[1] q;
    wide(q);
}
"#;
        assert!(matches!(flatten(width, "test_width"), Err(InlineError::ArgumentMismatch { .. })));
    }

    #[test]
    fn callee_local_declarations_hoist_or_collide() {
        let hoisted = r#"
OPENQASM 3;
def helper(qubit[1] a) {
    qubit[1] anc;
    cx a[0], anc[0];
}
def test_hoist() {
    qubit[1] q;
    helper(q);
}
"#;
        let flat = flatten(hoisted, "test_hoist").unwrap();
        assert_eq!(flat.registers.num_qubits(), 2);
        assert!(flat.registers.get("anc").is_some());

        let collision = r#"
OPENQASM 3;
def helper(qubit[1] a) {
    qubit[1] q;
    cx a[0], q[0];
}
def test_collide() {
    qubit[1] q;
    helper(q);
}
"#;
        assert!(matches!(
            flatten(collision, "test_collide"),
            Err(InlineError::NameCollision(name)) if name == "q"
        ));
    }

    #[test]
    fn tests_with_parameters_are_rejected() {
        let src = r#"
OPENQASM 3;
def test_bad(qubit[1] q) {
    h q[0];
}
"#;
        assert!(matches!(
            flatten(src, "test_bad"),
            Err(InlineError::TestHasParameters(_))
        ));
    }

    #[test]
    fn undeclared_register_is_rejected() {
        let src = r#"
OPENQASM 3;
def test_undeclared() {
    h q[0];
}
"#;
        assert!(matches!(
            flatten(src, "test_undeclared"),
            Err(InlineError::UndeclaredRegister(name)) if name == "q"
        ));
    }

    #[test]
    fn call_count_law_on_fixture() {
        // 1 direct statement + bell body (2) expanded once.
        let flat = flatten(BELL_TEST, "test_distribution").unwrap();
        assert_eq!(flat.statements.len(), 1 + 2);
    }

    #[test]
    fn single_index_measure_maps_and_samples_correctly() {
        let src = r#"
OPENQASM 3;
def test_single() {
    qubit[2] q;
    bit[1] m;
    x q[1];
    m[0] = measure q[1];
}
"#;
        let flat = flatten(src, "test_single").unwrap();
        assert_eq!(flat.measurement_map.bit_for_qubit(1), Some(0));
        assert_eq!(flat.measurement_map.len(), 1);
        let circuit = build_circuit(&flat).unwrap();
        let d = crate::sim::ideal_distribution(&circuit).unwrap();
        assert_abs_diff_eq!(d.probability("1"), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn declaration_only_body_builds_empty_circuit() {
        let src = r#"
OPENQASM 3;
def test_decls() {
    qubit[2] q;
    bit[2] m;
}
"#;
        let flat = flatten(src, "test_decls").unwrap();
        let circuit = build_circuit(&flat).unwrap();
        assert_eq!(circuit.ops().len(), 0);
        assert_eq!(circuit.num_qubits(), 2);
    }

    #[test]
    fn gate_after_measure_is_a_build_error() {
        let src = r#"
OPENQASM 3;
def test_terminal() {
    qubit[1] q;
    bit[1] m;
    m = measure q;
    h q[0];
}
"#;
        let flat = flatten(src, "test_terminal").unwrap();
        assert!(matches!(
            build_circuit(&flat),
            Err(InlineError::Circuit(CircuitError::GateAfterMeasure(0)))
        ));
    }

    #[test]
    fn remeasurement_is_an_inline_error() {
        let src = r#"
OPENQASM 3;
def test_remeasure() {
    qubit[1] q;
    bit[2] m;
    m[0] = measure q[0];
    m[1] = measure q[0];
}
"#;
        assert!(matches!(
            flatten(src, "test_remeasure"),
            Err(InlineError::Circuit(CircuitError::QubitRemeasured(0)))
        ));
    }

    #[test]
    fn inlined_body_matches_hand_flattened_statevector() {
        let with_calls = r#"
OPENQASM 3;
def rot(qubit[2] r) {
    ry(pi/4) r[0];
    cx r[0], r[1];
}
def prep(qubit[2] p) {
    h p[0];
    rot(p);
    t p[1];
}
def test_pipeline() {
    qubit[2] q;
    bit[2] m;
    prep(q);
    m = measure q;
}
"#;
        let by_hand = r#"
OPENQASM 3;
def test_pipeline() {
    qubit[2] q;
    bit[2] m;
    h q[0];
    ry(pi/4) q[0];
    cx q[0], q[1];
    t q[1];
    m = measure q;
}
"#;
        let a = build_circuit(&flatten(with_calls, "test_pipeline").unwrap()).unwrap();
        let b = build_circuit(&flatten(by_hand, "test_pipeline").unwrap()).unwrap();
        let sa = statevector(&a).unwrap();
        let sb = statevector(&b).unwrap();
        for (x, y) in sa.amplitudes().iter().zip(sb.amplitudes()) {
            assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn measure_width_mismatch_is_rejected() {
        let src = r#"
OPENQASM 3;
def test_mismatch() {
    qubit[2] q;
    bit[1] m;
    m = measure q;
}
"#;
        assert!(matches!(
            flatten(src, "test_mismatch"),
            Err(InlineError::MeasureWidthMismatch { .. })
        ));
    }
}
