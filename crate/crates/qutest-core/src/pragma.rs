//! The `//%` directive language.
//!
//! One directive per line. Configuration directives:
//!
//! ```text
//! //% shots: <uint>                      //% seed: <uint> | random
//! //% backend: ideal | noisy | hardware  //% runtime: <ident>
//! //% runtime_version: "<v>(, <v>)*"
//! ```
//!
//! Assertion directives (`<dist>` is `{"<bits>": <real>, ...}` and `<op>`
//! is one of `< <= == > >= !=`):
//!
//! ```text
//! //% assert.output: == "<bits>"
//! //% assert.tvd: <dist> <op> <real>
//! //% assert.hellinger: <dist> <op> <real>
//! //% assert.kl: <dist> <op> <real>
//! //% assert.chi2: <dist> <op> <real>
//! //% assert.marginal: q[<i>] == <0|1> ~= <real> atol=<real>
//! //% assert.observable: Z[<i>(,<j>)*] (<op> <real> | ~= <real> atol=<real>)
//! //% assert.entropy: (<op> <real> | ~= <real> atol=<real>)
//! //% assert.correlation: m[<i>], m[<j>] ~= <real> atol=<real>
//! //% assert.probability: "<bits>" ~= <real> atol=<real>
//! //% assert.most_frequent: == "<bits>"
//! //% assert.fidelity: (<op> <real> | ~= <real> atol=<real>)
//! //% assert.entangled: [<i>(,<j>)*]
//! //% assert.gate_set: { <ident>(, <ident>)* }
//! //% assert.depth: <= <uint>
//! ```
//!
//! Bitstring literals follow the crate-wide convention: classical bit 0
//! is the rightmost character.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use crate::diag::{edit_distance, Code, Diagnostic};
use crate::distribution::{Distribution, DistributionError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedSpec {
    Random,
    Fixed(u64),
}

impl fmt::Display for SeedSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedSpec::Random => write!(f, "random"),
            SeedSpec::Fixed(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Ideal,
    Noisy,
    Hardware,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendKind::Ideal => write!(f, "ideal"),
            BackendKind::Noisy => write!(f, "noisy"),
            BackendKind::Hardware => write!(f, "hardware"),
        }
    }
}

pub const DEFAULT_SHOTS: u64 = 1024;
pub const DEFAULT_RUNTIME: &str = "native";

/// Execution settings for one test, after defaults are applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestConfig {
    pub shots: u64,
    pub seed: SeedSpec,
    pub backend: BackendKind,
    pub runtime: String,
    pub runtime_versions: Vec<String>,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            shots: DEFAULT_SHOTS,
            seed: SeedSpec::Random,
            backend: BackendKind::Ideal,
            runtime: DEFAULT_RUNTIME.to_string(),
            runtime_versions: vec![],
        }
    }
}

impl fmt::Display for TestConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "shots={} seed={} backend={} runtime={} versions=[{}]",
            self.shots,
            self.seed,
            self.backend,
            self.runtime,
            self.runtime_versions.join(", ")
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConfigKey {
    Shots,
    Seed,
    Backend,
    Runtime,
    RuntimeVersion,
}

impl fmt::Display for ConfigKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConfigKey::Shots => "shots",
            ConfigKey::Seed => "seed",
            ConfigKey::Backend => "backend",
            ConfigKey::Runtime => "runtime",
            ConfigKey::RuntimeVersion => "runtime_version",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigSetting {
    Shots(u64),
    Seed(SeedSpec),
    Backend(BackendKind),
    Runtime(String),
    RuntimeVersions(Vec<String>),
}

impl ConfigSetting {
    pub fn key(&self) -> ConfigKey {
        match self {
            ConfigSetting::Shots(_) => ConfigKey::Shots,
            ConfigSetting::Seed(_) => ConfigKey::Seed,
            ConfigSetting::Backend(_) => ConfigKey::Backend,
            ConfigSetting::Runtime(_) => ConfigKey::Runtime,
            ConfigSetting::RuntimeVersions(_) => ConfigKey::RuntimeVersion,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDirective {
    pub setting: ConfigSetting,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Gt,
    Ge,
    Ne,
    Approx,
}

impl CmpOp {
    pub fn is_approx(self) -> bool {
        self == CmpOp::Approx
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "==",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Ne => "!=",
            CmpOp::Approx => "~=",
        };
        f.write_str(s)
    }
}

/// An operator, a threshold, and (for `~=` only) an absolute tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSpec {
    pub op: CmpOp,
    pub threshold: f64,
    pub atol: Option<f64>,
}

impl ComparisonSpec {
    pub fn ordered(op: CmpOp, threshold: f64) -> Self {
        debug_assert!(!op.is_approx());
        ComparisonSpec { op, threshold, atol: None }
    }

    pub fn approx(threshold: f64, atol: f64) -> Self {
        ComparisonSpec { op: CmpOp::Approx, threshold, atol: Some(atol) }
    }
}

impl fmt::Display for ComparisonSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.atol {
            Some(atol) => write!(f, "{} {} atol={}", self.op, self.threshold, atol),
            None => write!(f, "{} {}", self.op, self.threshold),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AssertionKind {
    Output,
    Tvd,
    Hellinger,
    Kl,
    Chi2,
    Marginal,
    Observable,
    Entropy,
    Correlation,
    Probability,
    MostFrequent,
    Fidelity,
    Entangled,
    GateSet,
    Depth,
}

impl AssertionKind {
    pub fn name(self) -> &'static str {
        match self {
            AssertionKind::Output => "output",
            AssertionKind::Tvd => "tvd",
            AssertionKind::Hellinger => "hellinger",
            AssertionKind::Kl => "kl",
            AssertionKind::Chi2 => "chi2",
            AssertionKind::Marginal => "marginal",
            AssertionKind::Observable => "observable",
            AssertionKind::Entropy => "entropy",
            AssertionKind::Correlation => "correlation",
            AssertionKind::Probability => "probability",
            AssertionKind::MostFrequent => "most_frequent",
            AssertionKind::Fidelity => "fidelity",
            AssertionKind::Entangled => "entangled",
            AssertionKind::GateSet => "gate_set",
            AssertionKind::Depth => "depth",
        }
    }

    /// Structural assertions run on the inlined circuit before execution.
    pub fn is_structural(self) -> bool {
        matches!(self, AssertionKind::GateSet | AssertionKind::Depth)
    }

    pub fn needs_counts(self) -> bool {
        !matches!(
            self,
            AssertionKind::Entangled | AssertionKind::GateSet | AssertionKind::Depth
        )
    }

    pub fn needs_statevector(self) -> bool {
        self == AssertionKind::Entangled
    }

    pub fn needs_ideal_distribution(self) -> bool {
        self == AssertionKind::Fidelity
    }
}

impl fmt::Display for AssertionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AssertionPayload {
    Output { expected: String },
    Tvd { reference: Distribution, cmp: ComparisonSpec },
    Hellinger { reference: Distribution, cmp: ComparisonSpec },
    Kl { reference: Distribution, cmp: ComparisonSpec },
    Chi2 { reference: Distribution, cmp: ComparisonSpec },
    Marginal { qubit: usize, value: u8, cmp: ComparisonSpec },
    Observable { qubits: Vec<usize>, cmp: ComparisonSpec },
    Entropy { cmp: ComparisonSpec },
    Correlation { bit_a: usize, bit_b: usize, cmp: ComparisonSpec },
    Probability { bits: String, cmp: ComparisonSpec },
    MostFrequent { expected: String },
    Fidelity { cmp: ComparisonSpec },
    Entangled { partition: Vec<usize> },
    GateSet { allowed: BTreeSet<String> },
    Depth { bound: usize },
}

impl AssertionPayload {
    pub fn kind(&self) -> AssertionKind {
        match self {
            AssertionPayload::Output { .. } => AssertionKind::Output,
            AssertionPayload::Tvd { .. } => AssertionKind::Tvd,
            AssertionPayload::Hellinger { .. } => AssertionKind::Hellinger,
            AssertionPayload::Kl { .. } => AssertionKind::Kl,
            AssertionPayload::Chi2 { .. } => AssertionKind::Chi2,
            AssertionPayload::Marginal { .. } => AssertionKind::Marginal,
            AssertionPayload::Observable { .. } => AssertionKind::Observable,
            AssertionPayload::Entropy { .. } => AssertionKind::Entropy,
            AssertionPayload::Correlation { .. } => AssertionKind::Correlation,
            AssertionPayload::Probability { .. } => AssertionKind::Probability,
            AssertionPayload::MostFrequent { .. } => AssertionKind::MostFrequent,
            AssertionPayload::Fidelity { .. } => AssertionKind::Fidelity,
            AssertionPayload::Entangled { .. } => AssertionKind::Entangled,
            AssertionPayload::GateSet { .. } => AssertionKind::GateSet,
            AssertionPayload::Depth { .. } => AssertionKind::Depth,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssertionDirective {
    pub payload: AssertionPayload,
    pub line: usize,
}

impl AssertionDirective {
    pub fn kind(&self) -> AssertionKind {
        self.payload.kind()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Directive {
    Config(ConfigDirective),
    Assertion(AssertionDirective),
}

const CONFIG_KEYS: &[&str] = &["shots", "seed", "backend", "runtime", "runtime_version"];

const ASSERT_KEYS: &[&str] = &[
    "assert.output",
    "assert.tvd",
    "assert.hellinger",
    "assert.kl",
    "assert.chi2",
    "assert.marginal",
    "assert.observable",
    "assert.entropy",
    "assert.correlation",
    "assert.probability",
    "assert.most_frequent",
    "assert.fidelity",
    "assert.entangled",
    "assert.gate_set",
    "assert.depth",
];

fn nearest_key(key: &str) -> Option<&'static str> {
    CONFIG_KEYS
        .iter()
        .chain(ASSERT_KEYS.iter())
        .map(|k| (edit_distance(key, k), *k))
        .min()
        .filter(|(d, _)| *d <= 3)
        .map(|(_, k)| k)
}

/// Apply defaults and fold explicit settings into a `TestConfig`.
///
/// Duplicate keys are a lint error (QT006) upstream; if they reach this
/// point anyway, the last setting wins.
pub fn collect_config(directives: &[ConfigDirective]) -> TestConfig {
    let mut config = TestConfig::default();
    for d in directives {
        match &d.setting {
            ConfigSetting::Shots(n) => config.shots = *n,
            ConfigSetting::Seed(s) => config.seed = *s,
            ConfigSetting::Backend(b) => config.backend = *b,
            ConfigSetting::Runtime(r) => config.runtime = r.clone(),
            ConfigSetting::RuntimeVersions(v) => config.runtime_versions = v.clone(),
        }
    }
    config
}

/// Parse one `//%` line into a typed directive or a diagnostic.
///
/// Total: every line that starts with `//%` (after leading whitespace)
/// yields exactly one of the two.
pub fn parse_pragma_line(raw: &str, line: usize) -> Result<Directive, Diagnostic> {
    let trimmed = raw.trim_start();
    let rest = trimmed.strip_prefix("//%").unwrap_or(trimmed);

    let (key, payload) = match rest.find(':') {
        Some(pos) => (rest[..pos].trim(), &rest[pos + 1..]),
        None => {
            let key = rest.trim();
            if key.is_empty() {
                return Err(Diagnostic::new(Code::MalformedValue, line, "empty directive")
                    .with_hint("write '<key>: <value>' after '//%'"));
            }
            (key, "")
        }
    };

    if key.is_empty() {
        return Err(Diagnostic::new(Code::MalformedValue, line, "missing directive key")
            .with_hint("write '<key>: <value>' after '//%'"));
    }

    let known = CONFIG_KEYS.contains(&key) || ASSERT_KEYS.contains(&key);
    if !known {
        let mut d = Diagnostic::new(Code::UnknownDirective, line, format!("unknown directive key '{key}'"));
        if let Some(near) = nearest_key(key) {
            d = d.with_hint(format!("did you mean '{near}'?"));
        }
        return Err(d);
    }

    let mut scan = Scan::new(payload, line, key);
    let directive = match key {
        "shots" => {
            let n = scan.uint("a shot count")?;
            if n == 0 {
                return Err(scan.malformed("shots must be at least 1"));
            }
            Directive::Config(ConfigDirective { setting: ConfigSetting::Shots(n), line })
        }
        "seed" => {
            let setting = if scan.eat_word("random") {
                ConfigSetting::Seed(SeedSpec::Random)
            } else {
                ConfigSetting::Seed(SeedSpec::Fixed(scan.uint("a seed or 'random'")?))
            };
            Directive::Config(ConfigDirective { setting, line })
        }
        "backend" => {
            let word = scan.word("a backend name")?;
            let backend = match word.as_str() {
                "ideal" => BackendKind::Ideal,
                "noisy" => BackendKind::Noisy,
                "hardware" => BackendKind::Hardware,
                other => {
                    return Err(Diagnostic::new(
                        Code::MalformedValue,
                        line,
                        format!("unknown backend '{other}'"),
                    )
                    .with_hint("backend is one of: ideal, noisy, hardware"));
                }
            };
            Directive::Config(ConfigDirective { setting: ConfigSetting::Backend(backend), line })
        }
        "runtime" => {
            let name = scan.word("a runtime name")?;
            Directive::Config(ConfigDirective { setting: ConfigSetting::Runtime(name), line })
        }
        "runtime_version" => {
            let list = scan.quoted("a quoted version list")?;
            let versions: Vec<String> = list.split(',').map(|v| v.trim().to_string()).collect();
            if versions.iter().any(String::is_empty) {
                return Err(scan.malformed("empty version in runtime_version list"));
            }
            Directive::Config(ConfigDirective {
                setting: ConfigSetting::RuntimeVersions(versions),
                line,
            })
        }
        "assert.output" => {
            scan.exact_op(CmpOp::Eq, "output supports only ==")?;
            let expected = scan.bitstring()?;
            Directive::Assertion(AssertionDirective {
                payload: AssertionPayload::Output { expected },
                line,
            })
        }
        "assert.tvd" | "assert.hellinger" | "assert.kl" | "assert.chi2" => {
            let reference = scan.distribution()?;
            let cmp = scan.ordered_cmp(&format!("{} supports only < <= == > >= !=", &key[7..]))?;
            let payload = match key {
                "assert.tvd" => AssertionPayload::Tvd { reference, cmp },
                "assert.hellinger" => AssertionPayload::Hellinger { reference, cmp },
                "assert.kl" => AssertionPayload::Kl { reference, cmp },
                _ => AssertionPayload::Chi2 { reference, cmp },
            };
            Directive::Assertion(AssertionDirective { payload, line })
        }
        "assert.marginal" => {
            scan.expect_word("q")?;
            let qubit = scan.bracketed_index()?;
            scan.exact_op(CmpOp::Eq, "marginal is written q[<i>] == <0|1> ~= <real> atol=<real>")?;
            let value = match scan.uint("0 or 1")? {
                0 => 0u8,
                1 => 1u8,
                other => {
                    return Err(scan.malformed(format!("marginal value must be 0 or 1, got {other}")));
                }
            };
            let cmp = scan.approx_cmp("marginal supports only ~= <real> atol=<real>")?;
            Directive::Assertion(AssertionDirective {
                payload: AssertionPayload::Marginal { qubit, value, cmp },
                line,
            })
        }
        "assert.observable" => {
            scan.expect_word("Z")?;
            let qubits = scan.bracketed_index_list()?;
            let cmp = scan.any_cmp()?;
            Directive::Assertion(AssertionDirective {
                payload: AssertionPayload::Observable { qubits, cmp },
                line,
            })
        }
        "assert.entropy" => {
            let cmp = scan.any_cmp()?;
            Directive::Assertion(AssertionDirective {
                payload: AssertionPayload::Entropy { cmp },
                line,
            })
        }
        "assert.correlation" => {
            scan.expect_word("m")?;
            let bit_a = scan.bracketed_index()?;
            scan.expect_char(',')?;
            scan.expect_word("m")?;
            let bit_b = scan.bracketed_index()?;
            let cmp = scan.approx_cmp("correlation supports only ~= <real> atol=<real>")?;
            Directive::Assertion(AssertionDirective {
                payload: AssertionPayload::Correlation { bit_a, bit_b, cmp },
                line,
            })
        }
        "assert.probability" => {
            let bits = scan.bitstring()?;
            let cmp = scan.approx_cmp("probability supports only ~= <real> atol=<real>")?;
            Directive::Assertion(AssertionDirective {
                payload: AssertionPayload::Probability { bits, cmp },
                line,
            })
        }
        "assert.most_frequent" => {
            scan.exact_op(CmpOp::Eq, "most_frequent supports only ==")?;
            let expected = scan.bitstring()?;
            Directive::Assertion(AssertionDirective {
                payload: AssertionPayload::MostFrequent { expected },
                line,
            })
        }
        "assert.fidelity" => {
            let cmp = scan.any_cmp()?;
            Directive::Assertion(AssertionDirective {
                payload: AssertionPayload::Fidelity { cmp },
                line,
            })
        }
        "assert.entangled" => {
            let partition = scan.bracketed_index_list()?;
            Directive::Assertion(AssertionDirective {
                payload: AssertionPayload::Entangled { partition },
                line,
            })
        }
        "assert.gate_set" => {
            let allowed = scan.gate_set()?;
            Directive::Assertion(AssertionDirective {
                payload: AssertionPayload::GateSet { allowed },
                line,
            })
        }
        "assert.depth" => {
            scan.exact_op(CmpOp::Le, "depth supports only <=")?;
            let bound = scan.uint("a depth bound")?;
            Directive::Assertion(AssertionDirective {
                payload: AssertionPayload::Depth { bound: bound as usize },
                line,
            })
        }
        _ => unreachable!("key membership checked above"),
    };

    scan.finish()?;
    Ok(directive)
}

/// Character scanner for directive payloads.
struct Scan<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    key: &'a str,
}

impl<'a> Scan<'a> {
    fn new(payload: &str, line: usize, key: &'a str) -> Self {
        Scan { chars: payload.chars().collect(), pos: 0, line, key }
    }

    fn malformed(&self, message: impl Into<String>) -> Diagnostic {
        Diagnostic::new(Code::MalformedValue, self.line, message.into())
            .with_hint(format!("see the '{}' grammar in the pragma reference", self.key))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn rest(&self) -> String {
        self.chars[self.pos.min(self.chars.len())..].iter().collect()
    }

    fn finish(&mut self) -> Result<(), Diagnostic> {
        self.skip_ws();
        if self.pos < self.chars.len() {
            return Err(self.malformed(format!("unexpected trailing input '{}'", self.rest().trim())));
        }
        Ok(())
    }

    fn eat_char(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_char(&mut self, c: char) -> Result<(), Diagnostic> {
        if self.eat_char(c) {
            Ok(())
        } else {
            Err(self.malformed(format!("expected '{c}'")))
        }
    }

    fn word_raw(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            None
        } else {
            Some(self.chars[start..self.pos].iter().collect())
        }
    }

    fn word(&mut self, what: &str) -> Result<String, Diagnostic> {
        self.word_raw()
            .filter(|w| w.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_'))
            .ok_or_else(|| self.malformed(format!("expected {what}")))
    }

    fn eat_word(&mut self, word: &str) -> bool {
        let save = self.pos;
        match self.word_raw() {
            Some(w) if w == word => true,
            _ => {
                self.pos = save;
                false
            }
        }
    }

    fn expect_word(&mut self, word: &str) -> Result<(), Diagnostic> {
        if self.eat_word(word) {
            Ok(())
        } else {
            Err(self.malformed(format!("expected '{word}'")))
        }
    }

    fn uint(&mut self, what: &str) -> Result<u64, Diagnostic> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_digit() || self.chars[self.pos] == '_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.malformed(format!("expected {what}")));
        }
        let digits: String = self.chars[start..self.pos].iter().filter(|&&c| c != '_').collect();
        digits
            .parse::<u64>()
            .map_err(|_| self.malformed(format!("integer '{digits}' out of range")))
    }

    fn real(&mut self, what: &str) -> Result<f64, Diagnostic> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.chars.len() && (self.chars[self.pos] == '-' || self.chars[self.pos] == '+') {
            self.pos += 1;
        }
        let mut saw_digit = false;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_digit() || self.chars[self.pos] == '_')
        {
            saw_digit |= self.chars[self.pos].is_ascii_digit();
            self.pos += 1;
        }
        if self.pos < self.chars.len() && self.chars[self.pos] == '.' {
            self.pos += 1;
            while self.pos < self.chars.len()
                && (self.chars[self.pos].is_ascii_digit() || self.chars[self.pos] == '_')
            {
                saw_digit |= self.chars[self.pos].is_ascii_digit();
                self.pos += 1;
            }
        }
        if saw_digit && self.pos < self.chars.len() && matches!(self.chars[self.pos], 'e' | 'E') {
            let mut j = self.pos + 1;
            if j < self.chars.len() && matches!(self.chars[j], '+' | '-') {
                j += 1;
            }
            if j < self.chars.len() && self.chars[j].is_ascii_digit() {
                self.pos = j;
                while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        if !saw_digit {
            self.pos = start;
            return Err(self.malformed(format!("expected {what}")));
        }
        let text: String = self.chars[start..self.pos].iter().filter(|&&c| c != '_').collect();
        text.parse::<f64>()
            .map_err(|_| self.malformed(format!("invalid number '{text}'")))
    }

    fn quoted(&mut self, what: &str) -> Result<String, Diagnostic> {
        self.skip_ws();
        if !self.eat_char('"') {
            return Err(self.malformed(format!("expected {what}")));
        }
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos] != '"' {
            self.pos += 1;
        }
        if self.pos >= self.chars.len() {
            return Err(self.malformed("unterminated string"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        self.pos += 1;
        Ok(s)
    }

    fn bitstring(&mut self) -> Result<String, Diagnostic> {
        let s = self.quoted("a quoted bitstring")?;
        if s.is_empty() {
            return Err(self.malformed("bitstring must not be empty"));
        }
        if !s.chars().all(|c| c == '0' || c == '1') {
            return Err(self.malformed(format!("bitstring '{s}' may only contain '0' and '1'")));
        }
        Ok(s)
    }

    /// Comparison operator token, if one is present.
    fn op(&mut self) -> Option<CmpOp> {
        self.skip_ws();
        let two: String = self.chars[self.pos..self.chars.len().min(self.pos + 2)].iter().collect();
        let found = match two.as_str() {
            "<=" => Some((CmpOp::Le, 2)),
            ">=" => Some((CmpOp::Ge, 2)),
            "==" => Some((CmpOp::Eq, 2)),
            "!=" => Some((CmpOp::Ne, 2)),
            "~=" => Some((CmpOp::Approx, 2)),
            _ => match two.chars().next() {
                Some('<') => Some((CmpOp::Lt, 1)),
                Some('>') => Some((CmpOp::Gt, 1)),
                _ => None,
            },
        };
        found.map(|(op, len)| {
            self.pos += len;
            op
        })
    }

    /// Any operator-looking token, including invalid ones like `~~`, so
    /// QT004 can fire instead of QT003.
    fn op_like(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && matches!(self.chars[self.pos], '<' | '>' | '=' | '!' | '~') {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some(self.chars[start..self.pos].iter().collect())
        }
    }

    fn invalid_op(&self, found: &str, valid: &str) -> Diagnostic {
        Diagnostic::new(
            Code::InvalidOperator,
            self.line,
            format!("operator '{found}' is not valid for {}", self.key),
        )
        .with_hint(format!("valid operators: {valid}"))
    }

    /// Require one specific operator; any other operator token is QT004.
    fn exact_op(&mut self, want: CmpOp, valid: &str) -> Result<(), Diagnostic> {
        let save = self.pos;
        match self.op() {
            Some(op) if op == want => Ok(()),
            Some(op) => Err(self.invalid_op(&op.to_string(), valid)),
            None => {
                self.pos = save;
                match self.op_like() {
                    Some(tok) => Err(self.invalid_op(&tok, valid)),
                    None => Err(self.malformed(format!("expected '{want}'"))),
                }
            }
        }
    }

    /// `<op> <real>` with ordered operators only; `~=` is QT004.
    fn ordered_cmp(&mut self, valid: &str) -> Result<ComparisonSpec, Diagnostic> {
        let save = self.pos;
        let op = match self.op() {
            Some(op) => op,
            None => {
                self.pos = save;
                return match self.op_like() {
                    Some(tok) => Err(self.invalid_op(&tok, valid)),
                    None => Err(self.malformed("expected a comparison operator")),
                };
            }
        };
        if op.is_approx() {
            return Err(self.invalid_op("~=", valid));
        }
        let threshold = self.real("a threshold")?;
        Ok(ComparisonSpec::ordered(op, threshold))
    }

    /// `~= <real> atol=<real>` only; ordered operators are QT004.
    fn approx_cmp(&mut self, valid: &str) -> Result<ComparisonSpec, Diagnostic> {
        let save = self.pos;
        match self.op() {
            Some(CmpOp::Approx) => {}
            Some(op) => return Err(self.invalid_op(&op.to_string(), valid)),
            None => {
                self.pos = save;
                return match self.op_like() {
                    Some(tok) => Err(self.invalid_op(&tok, valid)),
                    None => Err(self.malformed("expected '~='")),
                };
            }
        }
        let threshold = self.real("a value")?;
        let atol = self.atol()?;
        Ok(ComparisonSpec::approx(threshold, atol))
    }

    /// Either `<op> <real>` or `~= <real> atol=<real>`.
    fn any_cmp(&mut self) -> Result<ComparisonSpec, Diagnostic> {
        let save = self.pos;
        let op = match self.op() {
            Some(op) => op,
            None => {
                self.pos = save;
                return match self.op_like() {
                    Some(tok) => Err(self.invalid_op(&tok, "< <= == > >= != ~=")),
                    None => Err(self.malformed("expected a comparison operator")),
                };
            }
        };
        let threshold = self.real("a value")?;
        if op.is_approx() {
            let atol = self.atol()?;
            Ok(ComparisonSpec::approx(threshold, atol))
        } else {
            Ok(ComparisonSpec::ordered(op, threshold))
        }
    }

    fn atol(&mut self) -> Result<f64, Diagnostic> {
        if !self.eat_word("atol") {
            return Err(self.malformed("'~=' requires an explicit tolerance: atol=<real>"));
        }
        self.expect_char('=')?;
        let atol = self.real("a tolerance")?;
        if atol <= 0.0 {
            return Err(self.malformed(format!("atol must be positive, got {atol}")));
        }
        Ok(atol)
    }

    fn bracketed_index(&mut self) -> Result<usize, Diagnostic> {
        self.expect_char('[')?;
        let idx = self.uint("an index")?;
        self.expect_char(']')?;
        Ok(idx as usize)
    }

    fn bracketed_index_list(&mut self) -> Result<Vec<usize>, Diagnostic> {
        self.expect_char('[')?;
        let mut out = Vec::new();
        loop {
            let idx = self.uint("a qubit index")? as usize;
            if out.contains(&idx) {
                return Err(self.malformed(format!("duplicate index {idx}")));
            }
            out.push(idx);
            if !self.eat_char(',') {
                break;
            }
        }
        self.expect_char(']')?;
        Ok(out)
    }

    fn distribution(&mut self) -> Result<Distribution, Diagnostic> {
        self.expect_char('{')?;
        let mut entries: BTreeMap<String, f64> = BTreeMap::new();
        loop {
            let key = self.bitstring()?;
            self.expect_char(':')?;
            let p = self.real("a probability")?;
            if entries.insert(key.clone(), p).is_some() {
                return Err(self.malformed(format!("duplicate key '{key}'")));
            }
            if !self.eat_char(',') {
                break;
            }
        }
        self.expect_char('}')?;
        Distribution::new(entries).map_err(|e| match e {
            DistributionError::SumNotOne(sum) => Diagnostic::new(
                Code::DistributionSum,
                self.line,
                format!("probabilities sum to {sum}, not 1"),
            )
            .with_hint("probabilities must sum to 1"),
            other => self.malformed(other.to_string()),
        })
    }

    fn gate_set(&mut self) -> Result<BTreeSet<String>, Diagnostic> {
        self.expect_char('{')?;
        let mut set = BTreeSet::new();
        if self.peek() == Some('}') {
            self.pos += 1;
            return Ok(set);
        }
        loop {
            let name = self.word("a gate name")?;
            set.insert(name);
            if !self.eat_char(',') {
                break;
            }
        }
        self.expect_char('}')?;
        Ok(set)
    }
}
