//! Line-oriented tokenizer and writer for the versioned text formats used by
//! models, policies, value functions and experiment configs.
//!
//! Files are plain UTF-8: `#` starts a comment that runs to end of line,
//! tokens are whitespace-separated, and every token remembers the line it
//! came from so parse errors can point at the offending row.

use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    At { line: usize, msg: String },
    #[error("unexpected end of file: {0}")]
    Eof(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl ParseError {
    pub fn at(line: usize, msg: impl Into<String>) -> Self {
        ParseError::At { line, msg: msg.into() }
    }

    /// Line number the error points at, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::At { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// Token stream over a text document, tracking line numbers.
pub struct Scanner<'a> {
    tokens: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Scanner<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut tokens = Vec::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = match raw_line.find('#') {
                Some(idx) => &raw_line[..idx],
                None => raw_line,
            };
            for tok in line.split_whitespace() {
                tokens.push((i + 1, tok));
            }
        }
        Scanner { tokens, pos: 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    /// Line number of the next token (or of the last token at EOF).
    pub fn current_line(&self) -> usize {
        self.tokens
            .get(self.pos.min(self.tokens.len().saturating_sub(1)))
            .map(|&(l, _)| l)
            .unwrap_or(0)
    }

    pub fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).map(|&(_, t)| t)
    }

    pub fn next_token(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        let tok = self
            .tokens
            .get(self.pos)
            .copied()
            .ok_or_else(|| ParseError::Eof(format!("expected {what}")))?;
        self.pos += 1;
        Ok(tok)
    }

    /// Consumes a token and requires it to equal `expected`.
    pub fn expect(&mut self, expected: &str) -> Result<(), ParseError> {
        let (line, tok) = self.next_token(expected)?;
        if tok != expected {
            return Err(ParseError::at(line, format!("expected `{expected}`, found `{tok}`")));
        }
        Ok(())
    }

    pub fn read_usize(&mut self, what: &str) -> Result<usize, ParseError> {
        let (line, tok) = self.next_token(what)?;
        tok.parse()
            .map_err(|_| ParseError::at(line, format!("expected integer {what}, found `{tok}`")))
    }

    pub fn read_u64(&mut self, what: &str) -> Result<u64, ParseError> {
        let (line, tok) = self.next_token(what)?;
        tok.parse()
            .map_err(|_| ParseError::at(line, format!("expected integer {what}, found `{tok}`")))
    }

    pub fn read_f64(&mut self, what: &str) -> Result<f64, ParseError> {
        let (line, tok) = self.next_token(what)?;
        tok.parse()
            .map_err(|_| ParseError::at(line, format!("expected number {what}, found `{tok}`")))
    }

    pub fn read_bool(&mut self, what: &str) -> Result<bool, ParseError> {
        let (line, tok) = self.next_token(what)?;
        match tok {
            "true" | "1" => Ok(true),
            "false" | "0" => Ok(false),
            _ => Err(ParseError::at(line, format!("expected true/false {what}, found `{tok}`"))),
        }
    }

    /// Reads `n` floats, returning each with the line it started on.
    pub fn read_f64_row(&mut self, n: usize, what: &str) -> Result<(usize, Vec<f64>), ParseError> {
        let start_line = self.current_line();
        let mut row = Vec::with_capacity(n);
        for _ in 0..n {
            row.push(self.read_f64(what)?);
        }
        Ok((start_line, row))
    }
}

/// Formats a float with the shortest representation that parses back to the
/// same bits. `format!("{v}")` already guarantees round-tripping in Rust, so
/// saving and re-loading a file we produced is byte-identical.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Formats with 17 significant digits (always round-trip exact); used by the
/// value-function format which pins the digit count.
pub fn fmt_f64_17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a slice of floats as one whitespace-separated line.
pub fn push_row(out: &mut String, row: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in row {
        if !first {
            out.push(' ');
        }
        let _ = write!(out, "{}", fmt_f64(v));
        first = false;
    }
    out.push('\n');
}
