//! AST for the supported OpenQASM 3 subset.
//!
//! Values are immutable after parsing and cheap to share across threads.

use std::fmt;
use std::path::PathBuf;

pub use crate::lexer::PragmaLine;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegKind {
    Qubit,
    Bit,
}

impl fmt::Display for RegKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegKind::Qubit => write!(f, "qubit"),
            RegKind::Bit => write!(f, "bit"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegisterDecl {
    pub kind: RegKind,
    pub name: String,
    pub width: usize,
    pub line: usize,
}

/// Reference to one qubit of a register, e.g. `q[0]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitRef {
    pub register: String,
    pub index: usize,
}

impl fmt::Display for QubitRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.register, self.index)
    }
}

/// A whole register or one indexed element of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegRef {
    Whole(String),
    Indexed(String, usize),
}

impl RegRef {
    pub fn register(&self) -> &str {
        match self {
            RegRef::Whole(name) | RegRef::Indexed(name, _) => name,
        }
    }
}

impl fmt::Display for RegRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegRef::Whole(name) => write!(f, "{name}"),
            RegRef::Indexed(name, i) => write!(f, "{name}[{i}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateApplication {
    pub name: String,
    pub angles: Vec<f64>,
    pub targets: Vec<QubitRef>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureStmt {
    pub target: RegRef,
    pub source: RegRef,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CallStmt {
    pub callee: String,
    pub args: Vec<String>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Declaration(RegisterDecl),
    Gate(GateApplication),
    Measure(MeasureStmt),
    Call(CallStmt),
}

impl Statement {
    pub fn line(&self) -> usize {
        match self {
            Statement::Declaration(d) => d.line,
            Statement::Gate(g) => g.line,
            Statement::Measure(m) => m.line,
            Statement::Call(c) => c.line,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDecl {
    pub name: String,
    pub kind: RegKind,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubroutineDef {
    pub name: String,
    pub params: Vec<ParamDecl>,
    pub body: Vec<Statement>,
    /// `//%` lines whose line number falls inside `span`, in source order.
    pub pragma_lines: Vec<PragmaLine>,
    /// (first line of the `def`, line of its closing brace)
    pub span: (usize, usize),
}

impl SubroutineDef {
    /// Tests are exactly the subroutines whose name starts with `test`
    /// (case-sensitive).
    pub fn is_test(&self) -> bool {
        self.name.starts_with("test")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub version: String,
    pub includes: Vec<String>,
    /// Top-level register declarations.
    pub declarations: Vec<RegisterDecl>,
    /// Top-level statements other than declarations.
    pub statements: Vec<Statement>,
    pub subroutines: Vec<SubroutineDef>,
    /// Every `//%` line in the file, in source order.
    pub pragmas: Vec<PragmaLine>,
    pub source_path: PathBuf,
}

impl Program {
    pub fn subroutine(&self, name: &str) -> Option<&SubroutineDef> {
        self.subroutines.iter().find(|s| s.name == name)
    }

    /// Subroutines whose name starts with `test`, in source order.
    pub fn tests(&self) -> impl Iterator<Item = &SubroutineDef> {
        self.subroutines.iter().filter(|s| s.is_test())
    }

    /// Pragma lines that fall outside every subroutine body.
    pub fn top_level_pragmas(&self) -> impl Iterator<Item = &PragmaLine> {
        self.pragmas.iter().filter(|p| {
            !self
                .subroutines
                .iter()
                .any(|s| s.span.0 <= p.line && p.line <= s.span.1)
        })
    }
}

/// The subroutines whose names begin with `test`, in source order.
pub fn list_tests(program: &Program) -> Vec<&SubroutineDef> {
    program.tests().collect()
}
