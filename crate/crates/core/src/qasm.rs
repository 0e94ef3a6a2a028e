//! OpenQASM 2.0 subset: one `qreg`, one- and two-qubit gate statements.
//!
//! `OPENQASM`, `include`, `creg` and `measure` statements are accepted and
//! dropped. Gate parameters are kept verbatim as part of the label.

use thiserror::Error;

use crate::circuit::{Circuit, Gate, Operands};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QasmError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: undeclared register `{name}`")]
    UndeclaredRegister {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: index {index} out of range for register `{name}[{size}]`")]
    IndexOutOfRange {
        line: usize,
        col: usize,
        name: String,
        index: usize,
        size: usize,
    },
    #[error("{line}:{col}: `{gate}` has {arity} operands; only one- and two-qubit gates are supported")]
    UnsupportedArity {
        line: usize,
        col: usize,
        gate: String,
        arity: usize,
    },
    #[error("{line}:{col}: unsupported statement: {message}")]
    Unsupported {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("no `qreg` declaration")]
    MissingQreg,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Ident,
    Number,
    Str,
    Sym(char),
    Arrow,
}

#[derive(Debug, Clone)]
struct Token {
    kind: Kind,
    text: String,
    line: usize,
    col: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, QasmError> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let start = i;
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Kind::Ident
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            Kind::Number
        } else if c == '"' {
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if chars.get(i) != Some(&'"') {
                return Err(QasmError::Syntax {
                    line: tl,
                    col: tc,
                    message: "unterminated string".into(),
                });
            }
            i += 1;
            Kind::Str
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            i += 2;
            Kind::Arrow
        } else if "()[]{},;+-*/^=<>".contains(c) {
            i += 1;
            Kind::Sym(c)
        } else {
            return Err(QasmError::Syntax {
                line: tl,
                col: tc,
                message: format!("unexpected character `{c}`"),
            });
        };
        col += i - start;
        tokens.push(Token {
            kind,
            text: chars[start..i].iter().collect(),
            line: tl,
            col: tc,
        });
    }
    Ok(tokens)
}

struct Register {
    name: String,
    size: usize,
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    eof: (usize, usize),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.eof, |t| (t.line, t.col))
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, QasmError> {
        let (line, col) = self.here();
        Err(QasmError::Syntax {
            line,
            col,
            message: message.into(),
        })
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<(), QasmError> {
        match self.peek() {
            Some(t) if t.kind == Kind::Sym(c) => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => self.syntax(format!("expected `{c}`, found `{}`", t.text)),
            None => self.syntax(format!("expected `{c}`, found end of input")),
        }
    }

    fn expect_ident(&mut self) -> Result<&'a Token, QasmError> {
        match self.peek() {
            Some(t) if t.kind == Kind::Ident => {
                self.pos += 1;
                Ok(t)
            }
            Some(t) => self.syntax(format!("expected identifier, found `{}`", t.text)),
            None => self.syntax("expected identifier, found end of input"),
        }
    }

    fn expect_int(&mut self) -> Result<usize, QasmError> {
        match self.peek() {
            Some(t) if t.kind == Kind::Number => match t.text.parse() {
                Ok(v) => {
                    self.pos += 1;
                    Ok(v)
                }
                Err(_) => self.syntax(format!("expected integer, found `{}`", t.text)),
            },
            Some(t) => self.syntax(format!("expected integer, found `{}`", t.text)),
            None => self.syntax("expected integer, found end of input"),
        }
    }

    fn skip_to_semicolon(&mut self) -> Result<(), QasmError> {
        while let Some(t) = self.next() {
            if t.kind == Kind::Sym(';') {
                return Ok(());
            }
        }
        self.syntax("missing `;`")
    }

    /// `id [ int ]`
    fn register_decl(&mut self) -> Result<Register, QasmError> {
        let name = self.expect_ident()?.text.clone();
        self.expect_sym('[')?;
        let size = self.expect_int()?;
        self.expect_sym(']')?;
        self.expect_sym(';')?;
        Ok(Register { name, size })
    }

    /// Raw text of a parenthesised parameter list, whitespace removed.
    fn params(&mut self) -> Result<String, QasmError> {
        self.expect_sym('(')?;
        let mut depth = 1;
        let mut text = String::from("(");
        loop {
            let Some(t) = self.next() else {
                return self.syntax("unterminated parameter list");
            };
            match t.kind {
                Kind::Sym('(') => depth += 1,
                Kind::Sym(')') => depth -= 1,
                Kind::Sym(';') => {
                    self.pos -= 1;
                    return self.syntax("unterminated parameter list");
                }
                _ => {}
            }
            text.push_str(&t.text);
            if depth == 0 {
                return Ok(text);
            }
        }
    }

    fn qubit_arg(&mut self, qreg: Option<&Register>) -> Result<usize, QasmError> {
        let tok = self.expect_ident()?;
        let reg = match qreg {
            Some(r) if r.name == tok.text => r,
            _ => {
                return Err(QasmError::UndeclaredRegister {
                    line: tok.line,
                    col: tok.col,
                    name: tok.text.clone(),
                })
            }
        };
        if self.peek().map(|t| &t.kind) != Some(&Kind::Sym('[')) {
            return Err(QasmError::Unsupported {
                line: tok.line,
                col: tok.col,
                message: format!("whole-register operand `{}`", tok.text),
            });
        }
        self.expect_sym('[')?;
        let index = self.expect_int()?;
        self.expect_sym(']')?;
        if index >= reg.size {
            return Err(QasmError::IndexOutOfRange {
                line: tok.line,
                col: tok.col,
                name: reg.name.clone(),
                index,
                size: reg.size,
            });
        }
        Ok(index)
    }
}

/// Parse QASM text into a [`Circuit`]. Gate labels are lowercased.
pub fn parse_qasm(text: &str) -> Result<Circuit, QasmError> {
    let tokens = tokenize(text)?;
    let eof = tokens.last().map_or((1, 1), |t| (t.line, t.col + t.text.len()));
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        eof,
    };
    let mut qreg: Option<Register> = None;
    let mut cregs: Vec<String> = Vec::new();
    let mut gates = Vec::new();

    while let Some(head) = p.peek() {
        if head.kind == Kind::Sym(';') {
            p.pos += 1;
            continue;
        }
        if head.kind != Kind::Ident {
            return p.syntax(format!("expected statement, found `{}`", head.text));
        }
        let (line, col) = (head.line, head.col);
        let unsupported = |message: String| QasmError::Unsupported { line, col, message };
        match head.text.as_str() {
            "OPENQASM" => {
                p.pos += 1;
                match p.next() {
                    Some(t) if t.kind == Kind::Number && t.text.starts_with('2') => {}
                    Some(t) => return Err(unsupported(format!("OPENQASM version {}", t.text))),
                    None => return p.syntax("expected version"),
                }
                p.expect_sym(';')?;
            }
            "include" => {
                p.pos += 1;
                match p.next() {
                    Some(t) if t.kind == Kind::Str => {}
                    _ => {
                        p.pos -= 1;
                        return p.syntax("expected file name string after `include`");
                    }
                }
                p.expect_sym(';')?;
            }
            "qreg" => {
                p.pos += 1;
                let reg = p.register_decl()?;
                if qreg.is_some() {
                    return Err(unsupported("more than one quantum register".into()));
                }
                qreg = Some(reg);
            }
            "creg" => {
                p.pos += 1;
                cregs.push(p.register_decl()?.name);
            }
            "measure" => {
                p.pos += 1;
                p.qubit_arg(qreg.as_ref())?;
                match p.next() {
                    Some(t) if t.kind == Kind::Arrow => {}
                    _ => {
                        p.pos -= 1;
                        return p.syntax("expected `->` in measure");
                    }
                }
                let c = p.expect_ident()?;
                if !cregs.contains(&c.text) {
                    return Err(QasmError::UndeclaredRegister {
                        line: c.line,
                        col: c.col,
                        name: c.text.clone(),
                    });
                }
                p.skip_to_semicolon()?;
            }
            "barrier" => {
                return Err(unsupported("`barrier` has no scheduling semantics here".into()))
            }
            kw @ ("gate" | "opaque" | "if" | "reset") => {
                return Err(unsupported(format!("`{kw}`")));
            }
            name => {
                let mut label = name.to_ascii_lowercase();
                p.pos += 1;
                if p.peek().map(|t| &t.kind) == Some(&Kind::Sym('(')) {
                    label.push_str(&p.params()?.to_ascii_lowercase());
                }
                let mut args = vec![p.qubit_arg(qreg.as_ref())?];
                while p.peek().map(|t| &t.kind) == Some(&Kind::Sym(',')) {
                    p.pos += 1;
                    args.push(p.qubit_arg(qreg.as_ref())?);
                }
                p.expect_sym(';')?;
                let operands = match args.as_slice() {
                    [a] => Operands::One(*a),
                    [a, b] if a != b => Operands::Two(*a, *b),
                    [a, _] => {
                        return p.syntax(format!("`{label}` repeats operand q[{a}]"));
                    }
                    _ => {
                        return Err(QasmError::UnsupportedArity {
                            line,
                            col,
                            gate: label,
                            arity: args.len(),
                        })
                    }
                };
                gates.push(Gate { label, operands });
            }
        }
    }
    let reg = qreg.ok_or(QasmError::MissingQreg)?;
    Ok(Circuit::new(reg.size, gates).expect("operands validated against the register"))
}

/// Emit the circuit with register name `q`.
pub fn emit_qasm(c: &Circuit) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    out.push_str(&format!("qreg q[{}];\n", c.num_qubits()));
    for g in c.gates() {
        match g.operands {
            Operands::One(a) => out.push_str(&format!("{} q[{a}];\n", g.label)),
            Operands::Two(a, b) => out.push_str(&format!("{} q[{a}],q[{b}];\n", g.label)),
        }
    }
    out
}
