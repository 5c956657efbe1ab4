//! OpenQASM 2.0 subset reader.
//!
//! Single-qubit gates, measurements, resets and barriers are accepted and
//! dropped; `cz` and `cx` become CZ gates. Gate definition bodies are skipped.

use std::fmt;

use thiserror::Error;

use super::{CircuitError, CzCircuit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: gate `{name}` acts on {arity} qubits; only one- and two-qubit gates are supported")]
    UnsupportedArity { pos: Pos, name: String, arity: usize },
    #[error("{pos}: unsupported two-qubit gate `{name}` (expected cz or cx)")]
    UnsupportedGate { pos: Pos, name: String },
    #[error("{pos}: only a single quantum register is supported")]
    MultipleRegisters { pos: Pos },
    #[error("{pos}: unknown register `{name}`")]
    UnknownRegister { pos: Pos, name: String },
    #[error("{pos}: index {index} out of range for register `{name}` of size {size}")]
    IndexOutOfRange {
        pos: Pos,
        name: String,
        index: usize,
        size: usize,
    },
    #[error("{pos}: register broadcast is not supported for two-qubit gates")]
    Broadcast { pos: Pos },
    #[error("{pos}: {source}")]
    Circuit { pos: Pos, source: CircuitError },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    Real,
    Str,
    Arrow,
    EqEq,
    Sym(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Real => f.write_str("real number"),
            Tok::Str => f.write_str("string"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::EqEq => f.write_str("`==`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            bump!();
            bump!();
            loop {
                if i + 1 >= chars.len() {
                    return Err(ParseError::Syntax {
                        pos,
                        message: "unterminated block comment".into(),
                    });
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let start = i;
            let mut real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            if i < chars.len() && chars[i] == '.' {
                real = true;
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                real = true;
                bump!();
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    bump!();
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
            }
            if real {
                out.push((Tok::Real, pos));
            } else {
                let s: String = chars[start..i].iter().collect();
                let v = s.parse().map_err(|_| ParseError::Syntax {
                    pos,
                    message: format!("integer `{s}` too large"),
                })?;
                out.push((Tok::Int(v), pos));
            }
        } else if c == '"' {
            bump!();
            while i < chars.len() && chars[i] != '"' {
                bump!();
            }
            if i == chars.len() {
                return Err(ParseError::Syntax {
                    pos,
                    message: "unterminated string".into(),
                });
            }
            bump!();
            out.push((Tok::Str, pos));
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            bump!();
            bump!();
            out.push((Tok::Arrow, pos));
        } else if c == '=' && chars.get(i + 1) == Some(&'=') {
            bump!();
            bump!();
            out.push((Tok::EqEq, pos));
        } else if "[](){};,+-*/^".contains(c) {
            bump!();
            out.push((Tok::Sym(c), pos));
        } else {
            return Err(ParseError::Syntax {
                pos,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// A gate operand: a whole register or one indexed qubit.
enum Operand {
    Register,
    Qubit(usize),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    qreg: Option<(String, usize)>,
    cregs: Vec<(String, usize)>,
    pairs: Vec<((usize, usize), Pos)>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if t.0 != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(c) {
            self.next();
            Ok(())
        } else {
            self.syntax(format!("expected `{c}`, found {}", self.peek()))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Pos), ParseError> {
        match self.next() {
            (Tok::Ident(s), p) => Ok((s, p)),
            (t, pos) => Err(ParseError::Syntax {
                pos,
                message: format!("expected identifier, found {t}"),
            }),
        }
    }

    fn expect_int(&mut self) -> Result<usize, ParseError> {
        match self.next() {
            (Tok::Int(v), _) => Ok(v),
            (t, pos) => Err(ParseError::Syntax {
                pos,
                message: format!("expected integer, found {t}"),
            }),
        }
    }

    /// Skips a balanced parenthesised group starting at `(`.
    fn skip_parens(&mut self) -> Result<(), ParseError> {
        self.expect_sym('(')?;
        let mut depth = 1;
        while depth > 0 {
            match self.next() {
                (Tok::Sym('('), _) => depth += 1,
                (Tok::Sym(')'), _) => depth -= 1,
                (Tok::Eof, pos) => {
                    return Err(ParseError::Syntax {
                        pos,
                        message: "unbalanced parentheses".into(),
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn skip_until_semicolon(&mut self) -> Result<(), ParseError> {
        loop {
            match self.next() {
                (Tok::Sym(';'), _) => return Ok(()),
                (Tok::Eof, pos) => {
                    return Err(ParseError::Syntax {
                        pos,
                        message: "missing `;`".into(),
                    })
                }
                _ => {}
            }
        }
    }

    fn register_decl(&mut self, quantum: bool) -> Result<(), ParseError> {
        let (name, pos) = self.expect_ident()?;
        self.expect_sym('[')?;
        let size = self.expect_int()?;
        self.expect_sym(']')?;
        self.expect_sym(';')?;
        if quantum {
            if self.qreg.is_some() {
                return Err(ParseError::MultipleRegisters { pos });
            }
            self.qreg = Some((name, size));
        } else {
            self.cregs.push((name, size));
        }
        Ok(())
    }

    fn operand(&mut self, classical: bool) -> Result<Operand, ParseError> {
        let (name, pos) = self.expect_ident()?;
        let size = if classical {
            self.cregs.iter().find(|(n, _)| *n == name).map(|&(_, s)| s)
        } else {
            self.qreg.as_ref().filter(|(n, _)| *n == name).map(|&(_, s)| s)
        };
        let size = size.ok_or_else(|| ParseError::UnknownRegister {
            pos,
            name: name.clone(),
        })?;
        if *self.peek() != Tok::Sym('[') {
            return Ok(Operand::Register);
        }
        self.next();
        let index = self.expect_int()?;
        self.expect_sym(']')?;
        if index >= size {
            return Err(ParseError::IndexOutOfRange {
                pos,
                name,
                index,
                size,
            });
        }
        Ok(Operand::Qubit(index))
    }

    fn gate_definition(&mut self) -> Result<(), ParseError> {
        self.expect_ident()?;
        if *self.peek() == Tok::Sym('(') {
            self.skip_parens()?;
        }
        loop {
            match self.next() {
                (Tok::Sym('{'), _) => break,
                (Tok::Eof, pos) => {
                    return Err(ParseError::Syntax {
                        pos,
                        message: "gate definition without body".into(),
                    })
                }
                _ => {}
            }
        }
        let mut depth = 1;
        while depth > 0 {
            match self.next() {
                (Tok::Sym('{'), _) => depth += 1,
                (Tok::Sym('}'), _) => depth -= 1,
                (Tok::Eof, pos) => {
                    return Err(ParseError::Syntax {
                        pos,
                        message: "unterminated gate body".into(),
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn gate_application(&mut self, name: String, pos: Pos) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym('(') {
            self.skip_parens()?;
        }
        let mut operands = vec![self.operand(false)?];
        while *self.peek() == Tok::Sym(',') {
            self.next();
            operands.push(self.operand(false)?);
        }
        self.expect_sym(';')?;
        match operands.len() {
            1 => Ok(()),
            2 => {
                if !matches!(name.as_str(), "cz" | "cx" | "CX" | "CZ") {
                    return Err(ParseError::UnsupportedGate { pos, name });
                }
                match (&operands[0], &operands[1]) {
                    (Operand::Qubit(a), Operand::Qubit(b)) => {
                        self.pairs.push(((*a, *b), pos));
                        Ok(())
                    }
                    _ => Err(ParseError::Broadcast { pos }),
                }
            }
            arity => Err(ParseError::UnsupportedArity { pos, name, arity }),
        }
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        let (tok, pos) = self.next();
        let Tok::Ident(word) = tok else {
            return Err(ParseError::Syntax {
                pos,
                message: format!("expected statement, found {tok}"),
            });
        };
        match word.as_str() {
            "OPENQASM" => {
                if !matches!(self.peek(), Tok::Real | Tok::Int(_)) {
                    return self.syntax("expected version number");
                }
                self.next();
                self.expect_sym(';')
            }
            "include" => {
                if *self.peek() != Tok::Str {
                    return self.syntax("expected file name");
                }
                self.next();
                self.expect_sym(';')
            }
            "qreg" => self.register_decl(true),
            "creg" => self.register_decl(false),
            "gate" => self.gate_definition(),
            "opaque" => self.skip_until_semicolon(),
            "measure" => {
                self.operand(false)?;
                match self.next() {
                    (Tok::Arrow, _) => {}
                    (t, pos) => {
                        return Err(ParseError::Syntax {
                            pos,
                            message: format!("expected `->`, found {t}"),
                        })
                    }
                }
                self.operand(true)?;
                self.expect_sym(';')
            }
            "reset" => {
                self.operand(false)?;
                self.expect_sym(';')
            }
            "barrier" => {
                self.operand(false)?;
                while *self.peek() == Tok::Sym(',') {
                    self.next();
                    self.operand(false)?;
                }
                self.expect_sym(';')
            }
            "if" => {
                self.expect_sym('(')?;
                self.expect_ident()?;
                if *self.peek() != Tok::EqEq {
                    return self.syntax("expected `==`");
                }
                self.next();
                self.expect_int()?;
                self.expect_sym(')')?;
                self.statement()
            }
            _ => self.gate_application(word, pos),
        }
    }
}

/// Parses OpenQASM 2.0 text into a layered CZ circuit.
pub fn parse_qasm(text: &str) -> Result<CzCircuit, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        qreg: None,
        cregs: Vec::new(),
        pairs: Vec::new(),
    };
    while *p.peek() != Tok::Eof {
        p.statement()?;
    }
    let n = p.qreg.as_ref().map_or(0, |&(_, s)| s);
    let positions: Vec<Pos> = p.pairs.iter().map(|&(_, pos)| pos).collect();
    CzCircuit::new(n, p.pairs.into_iter().map(|(pair, _)| pair)).map_err(|source| {
        let index = match &source {
            CircuitError::SelfLoop { index, .. } | CircuitError::QubitOutOfRange { index, .. } => *index,
            _ => 0,
        };
        ParseError::Circuit {
            pos: positions.get(index).copied().unwrap_or(Pos { line: 1, col: 1 }),
            source,
        }
    })
}
