//! Covariance-matrix input: a symmetric standard-form triple `n k_x k_p`
//! or a full 4×4 matrix, told apart by token count.

use std::fmt;

use gaussian_eof::{CovarianceMatrix, StandardFormParams};

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedInput {
    Triple(StandardFormParams),
    Matrix(CovarianceMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

/// Splits on whitespace and commas; `#` starts a comment running to the end
/// of the line. Positions are 1-based, columns count characters.
fn tokenize(src: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    for (li, line) in src.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut start: Option<(usize, usize)> = None;
        for (ci, (bi, ch)) in line.char_indices().enumerate() {
            let sep = ch.is_whitespace() || ch == ',';
            match (sep, start) {
                (true, Some((b0, c0))) => {
                    out.push(Token {
                        text: &line[b0..bi],
                        line: li + 1,
                        column: c0 + 1,
                    });
                    start = None;
                }
                (false, None) => start = Some((bi, ci)),
                _ => {}
            }
        }
        if let Some((b0, c0)) = start {
            out.push(Token {
                text: &line[b0..],
                line: li + 1,
                column: c0 + 1,
            });
        }
    }
    out
}

pub fn parse_input(src: &str) -> Result<ParsedInput, ParseError> {
    let tokens = tokenize(src);
    let mut values = Vec::with_capacity(tokens.len());
    for t in &tokens {
        let v: f64 = t.text.parse().map_err(|_| ParseError {
            line: t.line,
            column: t.column,
            message: format!("cannot parse '{}' as a number", t.text),
        })?;
        if !v.is_finite() {
            return Err(ParseError {
                line: t.line,
                column: t.column,
                message: format!("'{}' is not a finite number", t.text),
            });
        }
        values.push(v);
    }
    match values.len() {
        3 => Ok(ParsedInput::Triple(StandardFormParams::symmetric(
            values[0], values[1], values[2],
        ))),
        16 => {
            let mut rows = [[0.0; 4]; 4];
            for (i, v) in values.iter().enumerate() {
                rows[i / 4][i % 4] = *v;
            }
            let cm = CovarianceMatrix::from_rows(rows).map_err(|e| ParseError {
                line: 1,
                column: 1,
                message: e.to_string(),
            })?;
            Ok(ParsedInput::Matrix(cm))
        }
        n => {
            let (line, column) = tokens
                .get(3.min(n.saturating_sub(1)))
                .map(|t| (t.line, t.column))
                .unwrap_or((1, 1));
            Err(ParseError {
                line,
                column,
                message: format!(
                    "expected 3 numbers (n k_x k_p) or 16 numbers (4×4 matrix), found {n}"
                ),
            })
        }
    }
}
