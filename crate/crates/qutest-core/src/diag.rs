//! Line-level diagnostics produced by the parser and the linter.
//!
//! Every diagnostic carries a stable `QTnnn` code so CI logs can be grepped
//! and filtered. The full table:
//!
//! | code  | severity | meaning                                             |
//! |-------|----------|-----------------------------------------------------|
//! | QT000 | error    | syntax error (unknown token, unbalanced braces, ...) |
//! | QT001 | error    | `//%` directive outside a `def test*()` body         |
//! | QT002 | error    | unknown directive key                                |
//! | QT003 | error    | malformed directive value                            |
//! | QT004 | error    | operator not valid for this assertion kind           |
//! | QT005 | error    | reference distribution does not sum to 1             |
//! | QT006 | error    | configuration key set more than once in one test     |
//! | QT007 | warning  | runtime not supported by this build                  |
//! | QT008 | error    | test subroutine declares parameters                  |
//! | QT009 | warning  | test has no assertion directives                     |
//! | QT010 | error    | construct not in the supported OpenQASM subset       |
//! | QT011 | error    | missing or invalid OPENQASM version header           |
//! | QT012 | warning  | gate applied to a qubit that was already measured    |

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Warning => write!(f, "warning"),
            Severity::Error => write!(f, "error"),
        }
    }
}

/// Stable diagnostic codes. See the module table for meanings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    SyntaxError,
    PragmaOutsideTest,
    UnknownDirective,
    MalformedValue,
    InvalidOperator,
    DistributionSum,
    DuplicateConfigKey,
    UnsupportedRuntime,
    TestWithParameters,
    NoAssertions,
    UnsupportedConstruct,
    MissingVersionHeader,
    GateAfterMeasure,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::SyntaxError => "QT000",
            Code::PragmaOutsideTest => "QT001",
            Code::UnknownDirective => "QT002",
            Code::MalformedValue => "QT003",
            Code::InvalidOperator => "QT004",
            Code::DistributionSum => "QT005",
            Code::DuplicateConfigKey => "QT006",
            Code::UnsupportedRuntime => "QT007",
            Code::TestWithParameters => "QT008",
            Code::NoAssertions => "QT009",
            Code::UnsupportedConstruct => "QT010",
            Code::MissingVersionHeader => "QT011",
            Code::GateAfterMeasure => "QT012",
        }
    }

    /// Severity this code is always reported with.
    pub fn severity(self) -> Severity {
        match self {
            Code::UnsupportedRuntime | Code::NoAssertions | Code::GateAfterMeasure => {
                Severity::Warning
            }
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One parser or linter finding, anchored to a 1-based source line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub line: usize,
    pub message: String,
    /// Repair suggestion; empty when none applies.
    pub hint: String,
}

impl Diagnostic {
    pub fn new(code: Code, line: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: code.severity(),
            code,
            line: line.max(1),
            message: message.into(),
            hint: String::new(),
        }
    }

    pub fn with_hint(mut self, hint: impl Into<String>) -> Self {
        self.hint = hint.into();
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}: {}[{}]: {}",
            self.line, self.severity, self.code, self.message
        )?;
        if !self.hint.is_empty() {
            write!(f, " (hint: {})", self.hint)?;
        }
        Ok(())
    }
}

/// True when any diagnostic in the slice is an error.
pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

/// Levenshtein edit distance, used for "did you mean" hints.
pub(crate) fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_render_stable_names() {
        assert_eq!(Code::SyntaxError.as_str(), "QT000");
        assert_eq!(Code::MissingVersionHeader.as_str(), "QT011");
        assert_eq!(Code::GateAfterMeasure.as_str(), "QT012");
    }

    #[test]
    fn warning_codes_keep_warning_severity() {
        let d = Diagnostic::new(Code::NoAssertions, 3, "no assertions");
        assert_eq!(d.severity, Severity::Warning);
        assert!(!d.is_error());
        assert!(!has_errors(&[d]));
    }

    #[test]
    fn line_is_clamped_to_one() {
        let d = Diagnostic::new(Code::SyntaxError, 0, "boom");
        assert_eq!(d.line, 1);
    }

    #[test]
    fn display_includes_code_and_hint() {
        let d = Diagnostic::new(Code::MalformedValue, 7, "bad shots value").with_hint("use an integer");
        let s = d.to_string();
        assert!(s.contains("QT003"));
        assert!(s.contains("line 7"));
        assert!(s.contains("hint: use an integer"));
    }

    #[test]
    fn edit_distance_basics() {
        assert_eq!(edit_distance("shots", "shots"), 0);
        assert_eq!(edit_distance("shotz", "shots"), 1);
        assert_eq!(edit_distance("", "abc"), 3);
        assert_eq!(edit_distance("kitten", "sitting"), 3);
    }
}
