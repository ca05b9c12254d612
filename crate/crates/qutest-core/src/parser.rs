//! Recursive-descent parser for the supported OpenQASM 3 subset.
//!
//! `parse_program` is all-or-nothing: either a `Program` or the list of
//! diagnostics. `parse_with_recovery` additionally returns the best-effort
//! `Program` alongside the diagnostics so the linter can keep checking
//! pragma placement in files that do not fully parse.

use std::path::Path;

use crate::ast::*;
use crate::circuit::{gate_spec, nearest_gate_name};
use crate::diag::{has_errors, Code, Diagnostic};
use crate::lexer::{tokenize, Tok, Token};

/// Statement keywords recognized but outside the supported subset.
const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "gate", "if", "else", "for", "while", "reset", "barrier", "return", "const", "let", "input",
    "output", "box", "duration", "defcal", "cal", "pragma", "array", "angle", "int", "uint",
    "float", "complex", "bool", "ctrl", "negctrl", "inv", "pow", "delay", "extern", "switch",
    "case", "end", "creg", "qreg", "opaque",
];

pub fn parse_program(source: &str, path: &Path) -> Result<Program, Vec<Diagnostic>> {
    let (program, diagnostics) = parse_with_recovery(source, path);
    if has_errors(&diagnostics) {
        Err(diagnostics)
    } else {
        Ok(program)
    }
}

/// Parse with per-statement recovery. The returned `Program` holds whatever
/// parsed cleanly; the diagnostics hold everything that did not.
pub fn parse_with_recovery(source: &str, path: &Path) -> (Program, Vec<Diagnostic>) {
    let lexed = tokenize(source);
    let mut parser = Parser {
        tokens: lexed.tokens,
        pos: 0,
        diags: lexed.diagnostics,
    };
    let mut program = parser.program(path);
    program.pragmas = lexed.pragmas;
    for def in &mut program.subroutines {
        def.pragma_lines = program
            .pragmas
            .iter()
            .filter(|p| def.span.0 <= p.line && p.line <= def.span.1)
            .cloned()
            .collect();
    }
    (program, parser.diags)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, offset: usize) -> Option<&Token> {
        self.tokens.get(self.pos + offset)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn current_line(&self) -> usize {
        self.peek()
            .map(|t| t.line)
            .or_else(|| self.tokens.last().map(|t| t.line))
            .unwrap_or(1)
    }

    fn is_ident(&self, offset: usize, name: &str) -> bool {
        matches!(self.peek_at(offset), Some(Token { tok: Tok::Ident(s), .. }) if s == name)
    }

    fn error(&mut self, code: Code, line: usize, message: impl Into<String>) {
        self.diags.push(Diagnostic::new(code, line, message));
    }

    fn error_hinted(&mut self, code: Code, line: usize, message: impl Into<String>, hint: &str) {
        self.diags
            .push(Diagnostic::new(code, line, message).with_hint(hint));
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<Token, ()> {
        match self.peek() {
            Some(t) if std::mem::discriminant(&t.tok) == std::mem::discriminant(want) => {
                Ok(self.advance().unwrap())
            }
            Some(t) => {
                let (line, text) = (t.line, t.text.clone());
                self.error(Code::SyntaxError, line, format!("expected {what}, found '{text}'"));
                Err(())
            }
            None => {
                let line = self.current_line();
                self.error(Code::SyntaxError, line, format!("expected {what}, found end of file"));
                Err(())
            }
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, usize), ()> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(s), line, .. }) => {
                let out = (s.clone(), *line);
                self.advance();
                Ok(out)
            }
            Some(t) => {
                let (line, text) = (t.line, t.text.clone());
                self.error(Code::SyntaxError, line, format!("expected {what}, found '{text}'"));
                Err(())
            }
            None => {
                let line = self.current_line();
                self.error(Code::SyntaxError, line, format!("expected {what}, found end of file"));
                Err(())
            }
        }
    }

    /// Skip to just past the next `;` (or just before a closing `}`),
    /// tracking nested braces so block constructs are skipped whole.
    fn synchronize(&mut self) {
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            match t.tok {
                Tok::Semi if depth == 0 => {
                    self.advance();
                    return;
                }
                Tok::LBrace => {
                    depth += 1;
                    self.advance();
                }
                Tok::RBrace => {
                    if depth == 0 {
                        return;
                    }
                    depth -= 1;
                    self.advance();
                }
                _ => {
                    self.advance();
                }
            }
        }
    }

    fn program(&mut self, path: &Path) -> Program {
        let mut program = Program {
            version: String::new(),
            includes: vec![],
            declarations: vec![],
            statements: vec![],
            subroutines: vec![],
            pragmas: vec![],
            source_path: path.to_path_buf(),
        };

        self.version_header(&mut program);

        while let Some(t) = self.peek() {
            let line = t.line;
            match &t.tok {
                Tok::Ident(word) => match word.as_str() {
                    "include" => {
                        if let Ok(name) = self.include() {
                            program.includes.push(name);
                        }
                    }
                    "def" => {
                        if let Ok(def) = self.subroutine() {
                            if program.subroutine(&def.name).is_some() {
                                self.error(
                                    Code::SyntaxError,
                                    def.span.0,
                                    format!("duplicate subroutine name '{}'", def.name),
                                );
                            } else {
                                program.subroutines.push(def);
                            }
                        }
                    }
                    "OPENQASM" => {
                        self.error(Code::SyntaxError, line, "duplicate OPENQASM header");
                        self.synchronize();
                    }
                    _ => match self.statement() {
                        Ok(Statement::Declaration(d)) => program.declarations.push(d),
                        Ok(stmt) => program.statements.push(stmt),
                        Err(()) => {}
                    },
                },
                Tok::RBrace => {
                    self.error(Code::SyntaxError, line, "unbalanced braces: unexpected '}'");
                    self.advance();
                }
                _ => {
                    let text = t.text.clone();
                    self.error(Code::SyntaxError, line, format!("expected statement, found '{text}'"));
                    self.synchronize();
                }
            }
        }

        program
    }

    fn version_header(&mut self, program: &mut Program) {
        if !self.is_ident(0, "OPENQASM") {
            let line = self.peek().map(|t| t.line).unwrap_or(1);
            self.error_hinted(
                Code::MissingVersionHeader,
                line,
                "missing OPENQASM version header",
                "start the file with 'OPENQASM 3;'",
            );
            return;
        }
        let kw = self.advance().unwrap();
        let version = match self.peek() {
            Some(Token { tok: Tok::Int(_), text, .. })
            | Some(Token { tok: Tok::Float(_), text, .. }) => {
                let v = text.clone();
                self.advance();
                v
            }
            _ => {
                self.error(Code::MissingVersionHeader, kw.line, "missing OPENQASM version number");
                self.synchronize();
                return;
            }
        };
        if version != "3" && !version.starts_with("3.") {
            self.error_hinted(
                Code::MissingVersionHeader,
                kw.line,
                format!("unsupported OpenQASM version '{version}'"),
                "this tool supports OPENQASM 3",
            );
        }
        program.version = version;
        if self.expect(&Tok::Semi, "';' after version header").is_err() {
            self.synchronize();
        }
    }

    fn include(&mut self) -> Result<String, ()> {
        let kw = self.advance().unwrap(); // 'include'
        let name = match self.peek() {
            Some(Token { tok: Tok::Str(s), .. }) => {
                let s = s.clone();
                self.advance();
                s
            }
            _ => {
                self.error(Code::SyntaxError, kw.line, "expected quoted file name after 'include'");
                self.synchronize();
                return Err(());
            }
        };
        if self.expect(&Tok::Semi, "';' after include").is_err() {
            self.synchronize();
            return Err(());
        }
        Ok(name)
    }

    fn subroutine(&mut self) -> Result<SubroutineDef, ()> {
        let def_kw = self.advance().unwrap(); // 'def'
        let start_line = def_kw.line;
        let (name, _) = match self.expect_ident("subroutine name") {
            Ok(v) => v,
            Err(()) => {
                self.synchronize();
                return Err(());
            }
        };
        if self.expect(&Tok::LParen, "'(' after subroutine name").is_err() {
            self.synchronize();
            return Err(());
        }

        let mut params = Vec::new();
        if !matches!(self.peek().map(|t| &t.tok), Some(Tok::RParen)) {
            loop {
                match self.param() {
                    Ok(p) => {
                        if params.iter().any(|q: &ParamDecl| q.name == p.name) {
                            self.error(
                                Code::SyntaxError,
                                start_line,
                                format!("duplicate parameter name '{}'", p.name),
                            );
                        }
                        params.push(p);
                    }
                    Err(()) => {
                        self.synchronize();
                        return Err(());
                    }
                }
                match self.peek().map(|t| &t.tok) {
                    Some(Tok::Comma) => {
                        self.advance();
                    }
                    _ => break,
                }
            }
        }
        if self.expect(&Tok::RParen, "')' after parameter list").is_err() {
            self.synchronize();
            return Err(());
        }

        if matches!(self.peek().map(|t| &t.tok), Some(Tok::Arrow)) {
            let line = self.current_line();
            self.error_hinted(
                Code::UnsupportedConstruct,
                line,
                "subroutine return types are not supported",
                "construct not in supported subset",
            );
            self.synchronize();
            return Err(());
        }

        if self.expect(&Tok::LBrace, "'{' to open the subroutine body").is_err() {
            self.synchronize();
            return Err(());
        }

        let mut body = Vec::new();
        let end_line;
        loop {
            match self.peek() {
                Some(Token { tok: Tok::RBrace, line, .. }) => {
                    end_line = *line;
                    self.advance();
                    break;
                }
                Some(Token { tok: Tok::Ident(w), line, .. }) if w == "def" => {
                    let line = *line;
                    self.error_hinted(
                        Code::UnsupportedConstruct,
                        line,
                        "nested subroutine definitions are not supported",
                        "construct not in supported subset",
                    );
                    self.synchronize();
                }
                Some(Token { tok: Tok::Ident(w), line, .. }) if w == "include" => {
                    let line = *line;
                    self.error(Code::SyntaxError, line, "'include' is only allowed at top level");
                    self.synchronize();
                }
                Some(_) => {
                    if let Ok(stmt) = self.statement() {
                        body.push(stmt);
                    }
                }
                None => {
                    let line = self.current_line();
                    self.error(
                        Code::SyntaxError,
                        line,
                        format!("unbalanced braces: subroutine '{name}' is never closed"),
                    );
                    return Err(());
                }
            }
        }

        Ok(SubroutineDef {
            name,
            params,
            body,
            pragma_lines: vec![],
            span: (start_line, end_line),
        })
    }

    fn param(&mut self) -> Result<ParamDecl, ()> {
        let (kw, line) = self.expect_ident("parameter type ('qubit' or 'bit')")?;
        let kind = match kw.as_str() {
            "qubit" => RegKind::Qubit,
            "bit" => RegKind::Bit,
            other => {
                self.error_hinted(
                    Code::UnsupportedConstruct,
                    line,
                    format!("parameter type '{other}' is not supported"),
                    "construct not in supported subset",
                );
                return Err(());
            }
        };
        let width = self.register_width(line)?;
        let (name, _) = self.expect_ident("parameter name")?;
        Ok(ParamDecl { name, kind, width })
    }

    fn register_width(&mut self, line: usize) -> Result<usize, ()> {
        if !matches!(self.peek().map(|t| &t.tok), Some(Tok::LBracket)) {
            self.error_hinted(
                Code::UnsupportedConstruct,
                line,
                "register declarations must give an explicit width",
                "construct not in supported subset",
            );
            return Err(());
        }
        self.advance();
        let width = match self.peek() {
            Some(Token { tok: Tok::Int(n), .. }) => {
                let n = *n;
                self.advance();
                n
            }
            _ => {
                self.error(Code::SyntaxError, line, "expected register width");
                return Err(());
            }
        };
        self.expect(&Tok::RBracket, "']' after register width")?;
        if width == 0 {
            self.error(Code::SyntaxError, line, "register width must be at least 1");
            return Err(());
        }
        Ok(width as usize)
    }

    /// One statement inside a subroutine body or at top level.
    fn statement(&mut self) -> Result<Statement, ()> {
        let t = self.peek().cloned().expect("caller checked non-empty");
        let line = t.line;
        let word = match &t.tok {
            Tok::Ident(w) => w.clone(),
            Tok::RBrace => unreachable!("handled by callers"),
            _ => {
                self.error(Code::SyntaxError, line, format!("expected statement, found '{}'", t.text));
                self.synchronize();
                return Err(());
            }
        };

        if UNSUPPORTED_KEYWORDS.contains(&word.as_str()) {
            self.error_hinted(
                Code::UnsupportedConstruct,
                line,
                format!("'{word}' is not supported"),
                "construct not in supported subset",
            );
            self.synchronize();
            return Err(());
        }

        match word.as_str() {
            "qubit" | "bit" => {
                let kind = if word == "qubit" { RegKind::Qubit } else { RegKind::Bit };
                self.advance();
                let width = self.register_width(line).map_err(|()| self.synchronize())?;
                let (name, _) = self.expect_ident("register name").map_err(|()| self.synchronize())?;
                self.expect(&Tok::Semi, "';' after declaration")
                    .map_err(|()| self.synchronize())?;
                Ok(Statement::Declaration(RegisterDecl { kind, name, width, line }))
            }
            "measure" => {
                self.error(
                    Code::SyntaxError,
                    line,
                    "measurement must assign its result, e.g. 'm = measure q;'",
                );
                self.synchronize();
                Err(())
            }
            _ => {
                // Assignment => measure statement; otherwise call or gate.
                let assign = match self.peek_at(1).map(|t| &t.tok) {
                    Some(Tok::Equals) => true,
                    Some(Tok::LBracket) => {
                        matches!(self.peek_at(2).map(|t| &t.tok), Some(Tok::Int(_)))
                            && matches!(self.peek_at(3).map(|t| &t.tok), Some(Tok::RBracket))
                            && matches!(self.peek_at(4).map(|t| &t.tok), Some(Tok::Equals))
                    }
                    _ => false,
                };
                if assign {
                    return self.measure_statement(line);
                }
                if matches!(self.peek_at(1).map(|t| &t.tok), Some(Tok::LParen)) {
                    // Look past the balanced parens: ';' means a call,
                    // anything else is a gate with angle arguments.
                    let mut j = self.pos + 2;
                    let mut depth = 1usize;
                    while j < self.tokens.len() && depth > 0 {
                        match self.tokens[j].tok {
                            Tok::LParen => depth += 1,
                            Tok::RParen => depth -= 1,
                            _ => {}
                        }
                        j += 1;
                    }
                    if matches!(self.tokens.get(j).map(|t| &t.tok), Some(Tok::Semi)) {
                        return self.call_statement(line);
                    }
                }
                self.gate_statement(line)
            }
        }
    }

    fn measure_statement(&mut self, line: usize) -> Result<Statement, ()> {
        let target = self.reg_ref().map_err(|()| self.synchronize())?;
        self.expect(&Tok::Equals, "'='").map_err(|()| self.synchronize())?;
        match self.peek() {
            Some(Token { tok: Tok::Ident(w), .. }) if w == "measure" => {
                self.advance();
            }
            _ => {
                self.error_hinted(
                    Code::UnsupportedConstruct,
                    line,
                    "classical assignment is not supported; only 'measure' may appear on the right-hand side",
                    "construct not in supported subset",
                );
                self.synchronize();
                return Err(());
            }
        }
        let source = self.reg_ref().map_err(|()| self.synchronize())?;
        self.expect(&Tok::Semi, "';' after measurement")
            .map_err(|()| self.synchronize())?;
        match (&target, &source) {
            (RegRef::Whole(_), RegRef::Indexed(..)) | (RegRef::Indexed(..), RegRef::Whole(_)) => {
                self.error(
                    Code::SyntaxError,
                    line,
                    "measurement must be whole-register to whole-register or indexed to indexed",
                );
                Err(())
            }
            _ => Ok(Statement::Measure(MeasureStmt { target, source, line })),
        }
    }

    fn reg_ref(&mut self) -> Result<RegRef, ()> {
        let (name, _) = self.expect_ident("register name")?;
        if matches!(self.peek().map(|t| &t.tok), Some(Tok::LBracket)) {
            self.advance();
            let idx = match self.peek() {
                Some(Token { tok: Tok::Int(n), .. }) => {
                    let n = *n as usize;
                    self.advance();
                    n
                }
                _ => {
                    let line = self.current_line();
                    self.error(Code::SyntaxError, line, "expected register index");
                    return Err(());
                }
            };
            self.expect(&Tok::RBracket, "']' after index")?;
            Ok(RegRef::Indexed(name, idx))
        } else {
            Ok(RegRef::Whole(name))
        }
    }

    fn call_statement(&mut self, line: usize) -> Result<Statement, ()> {
        let (callee, _) = self.expect_ident("subroutine name")?;
        self.expect(&Tok::LParen, "'('")?;
        let mut args = Vec::new();
        if !matches!(self.peek().map(|t| &t.tok), Some(Tok::RParen)) {
            loop {
                let (arg, arg_line) = self.expect_ident("register name").map_err(|()| self.synchronize())?;
                if matches!(self.peek().map(|t| &t.tok), Some(Tok::LBracket)) {
                    self.error_hinted(
                        Code::UnsupportedConstruct,
                        arg_line,
                        "register slices and indexed call arguments are not supported",
                        "construct not in supported subset",
                    );
                    self.synchronize();
                    return Err(());
                }
                args.push(arg);
                match self.peek().map(|t| &t.tok) {
                    Some(Tok::Comma) => {
                        self.advance();
                    }
                    _ => break,
                }
            }
        }
        self.expect(&Tok::RParen, "')' after call arguments")
            .map_err(|()| self.synchronize())?;
        self.expect(&Tok::Semi, "';' after call").map_err(|()| self.synchronize())?;
        Ok(Statement::Call(CallStmt { callee, args, line }))
    }

    fn gate_statement(&mut self, line: usize) -> Result<Statement, ()> {
        let (name, _) = self.expect_ident("gate name")?;
        let spec = match gate_spec(&name) {
            Some(s) => s,
            None => {
                let mut d = Diagnostic::new(Code::SyntaxError, line, format!("unknown gate '{name}'"));
                if let Some(near) = nearest_gate_name(&name) {
                    d = d.with_hint(format!("did you mean '{near}'?"));
                }
                self.diags.push(d);
                self.synchronize();
                return Err(());
            }
        };

        let mut angles = Vec::new();
        if matches!(self.peek().map(|t| &t.tok), Some(Tok::LParen)) {
            self.advance();
            loop {
                let angle = self.angle_expr().map_err(|()| self.synchronize())?;
                angles.push(angle);
                match self.peek().map(|t| &t.tok) {
                    Some(Tok::Comma) => {
                        self.advance();
                    }
                    _ => break,
                }
            }
            self.expect(&Tok::RParen, "')' after gate angles")
                .map_err(|()| self.synchronize())?;
        }
        if angles.len() != spec.angles {
            self.error(
                Code::SyntaxError,
                line,
                format!("gate '{name}' expects {} angle argument(s), got {}", spec.angles, angles.len()),
            );
            self.synchronize();
            return Err(());
        }

        let mut targets = Vec::new();
        loop {
            let (reg, reg_line) = self.expect_ident("qubit operand").map_err(|()| self.synchronize())?;
            if !matches!(self.peek().map(|t| &t.tok), Some(Tok::LBracket)) {
                self.error_hinted(
                    Code::UnsupportedConstruct,
                    reg_line,
                    format!("whole-register gate operands are not supported; index the qubit, e.g. '{reg}[0]'"),
                    "construct not in supported subset",
                );
                self.synchronize();
                return Err(());
            }
            self.advance();
            let idx = match self.peek() {
                Some(Token { tok: Tok::Int(n), .. }) => {
                    let n = *n as usize;
                    self.advance();
                    n
                }
                _ => {
                    self.error(Code::SyntaxError, reg_line, "expected qubit index");
                    self.synchronize();
                    return Err(());
                }
            };
            self.expect(&Tok::RBracket, "']' after qubit index")
                .map_err(|()| self.synchronize())?;
            targets.push(QubitRef { register: reg, index: idx });
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Comma) => {
                    self.advance();
                }
                _ => break,
            }
        }
        self.expect(&Tok::Semi, "';' after gate application")
            .map_err(|()| self.synchronize())?;

        if targets.len() != spec.qubits {
            self.error(
                Code::SyntaxError,
                line,
                format!("gate '{name}' expects {} qubit operand(s), got {}", spec.qubits, targets.len()),
            );
            return Err(());
        }
        for (i, a) in targets.iter().enumerate() {
            for b in targets.iter().skip(i + 1) {
                if a == b {
                    self.error(Code::SyntaxError, line, format!("duplicate qubit operand '{a}'"));
                    return Err(());
                }
            }
        }

        Ok(Statement::Gate(GateApplication { name, angles, targets, line }))
    }

    /// Angle grammar: optional leading '-', factors over numbers and `pi`
    /// combined with '*' and '/'. Evaluated to f64 at parse time.
    fn angle_expr(&mut self) -> Result<f64, ()> {
        let negate = if matches!(self.peek().map(|t| &t.tok), Some(Tok::Minus)) {
            self.advance();
            true
        } else {
            false
        };
        let mut value = self.angle_factor()?;
        loop {
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Star) => {
                    self.advance();
                    value *= self.angle_factor()?;
                }
                Some(Tok::Slash) => {
                    self.advance();
                    let d = self.angle_factor()?;
                    if d == 0.0 {
                        let line = self.current_line();
                        self.error(Code::SyntaxError, line, "division by zero in angle expression");
                        return Err(());
                    }
                    value /= d;
                }
                _ => break,
            }
        }
        Ok(if negate { -value } else { value })
    }

    fn angle_factor(&mut self) -> Result<f64, ()> {
        match self.peek() {
            Some(Token { tok: Tok::Int(n), .. }) => {
                let v = *n as f64;
                self.advance();
                Ok(v)
            }
            Some(Token { tok: Tok::Float(x), .. }) => {
                let v = *x;
                self.advance();
                Ok(v)
            }
            Some(Token { tok: Tok::Ident(s), line, .. }) if s == "pi" => {
                let _ = line;
                self.advance();
                Ok(std::f64::consts::PI)
            }
            other => {
                let line = other.map(|t| t.line).unwrap_or_else(|| self.current_line());
                self.error(
                    Code::SyntaxError,
                    line,
                    "expected a number or 'pi' in angle expression",
                );
                Err(())
            }
        }
    }
}
