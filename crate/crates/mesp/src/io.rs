//! Text formats for covariance matrices, side constraints and BQP points.
//!
//! All formats are whitespace-separated decimal numbers; lines whose first
//! non-blank character is `#` are comments.
//!
//! * Matrix: `n`, then either `n²` entries row-major or the `n(n+1)/2`
//!   entries of the lower triangle row by row.
//! * Constraints: `m n`, then `m` rows of `n` coefficients followed by the
//!   right-hand side.
//! * Point: `n`, then `x` (`n` values), then `X` in matrix layout.

use std::fmt::Write as _;
use std::path::Path;

use mesp_core::bqp::BqpPoint;
use mesp_core::{Constraints, Instance, Matrix, SymMatrix};

use crate::error::{Error, ParseError};

struct Token<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

struct Tokens<'a> {
    items: Vec<Token<'a>>,
    pos: usize,
    /// Position reported when input ends early.
    end: (usize, usize),
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        let mut end = (1, 1);
        for (li, line) in text.lines().enumerate() {
            end = (li + 1, line.chars().count() + 1);
            if line.trim_start().starts_with('#') {
                continue;
            }
            let mut col = 0;
            for piece in line.split_inclusive(char::is_whitespace) {
                let word = piece.trim_end();
                if !word.is_empty() {
                    items.push(Token { text: word, line: li + 1, col: col + 1 });
                }
                col += piece.chars().count();
            }
        }
        Tokens { items, pos: 0, end }
    }

    fn remaining(&self) -> usize {
        self.items.len() - self.pos
    }

    fn next(&mut self, what: &str) -> Result<&Token<'a>, ParseError> {
        match self.items.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(ParseError::new(self.end.0, self.end.1, format!("expected {what}, found end of input"))),
        }
    }

    fn real(&mut self, what: &str) -> Result<f64, ParseError> {
        let t = self.next(what)?;
        match t.text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(ParseError::new(t.line, t.col, format!("expected {what}, found '{}'", t.text))),
        }
    }

    fn count(&mut self, what: &str) -> Result<usize, ParseError> {
        let t = self.next(what)?;
        t.text
            .parse::<usize>()
            .map_err(|_| ParseError::new(t.line, t.col, format!("expected {what}, found '{}'", t.text)))
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.items.get(self.pos) {
            Some(t) => Err(ParseError::new(t.line, t.col, format!("unexpected trailing value '{}'", t.text))),
            None => Ok(()),
        }
    }
}

/// Reads an `n × n` block; the lower-triangle layout is assumed when
/// exactly `n(n+1)/2` values remain.
fn read_square(tok: &mut Tokens<'_>, n: usize) -> Result<Matrix, ParseError> {
    let tri = n * (n + 1) / 2;
    let lower = tok.remaining() == tri && tri != n * n;
    let mut m = Matrix::zeros(n, n);
    if lower {
        for i in 0..n {
            for j in 0..=i {
                let v = tok.real("matrix entry")?;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
    } else {
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = tok.real("matrix entry")?;
            }
        }
    }
    Ok(m)
}

pub fn parse_matrix(text: &str) -> Result<SymMatrix, ParseError> {
    let mut tok = Tokens::new(text);
    let n = tok.count("matrix order")?;
    if n == 0 {
        return Err(ParseError::new(1, 1, "matrix order must be positive".into()));
    }
    let m = read_square(&mut tok, n)?;
    tok.finish()?;
    SymMatrix::new(m).map_err(|e| ParseError::new(1, 1, e.to_string()))
}

/// Full row-major layout; `{}` formatting round-trips every `f64` exactly.
pub fn format_matrix(c: &SymMatrix) -> String {
    let n = c.order();
    let m = c.as_matrix();
    let mut out = format!("{n}\n");
    for i in 0..n {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_constraints(text: &str) -> Result<Constraints, ParseError> {
    let mut tok = Tokens::new(text);
    let m = tok.count("number of constraints")?;
    let n = tok.count("number of variables")?;
    let mut a = Vec::with_capacity(m * n);
    let mut b = Vec::with_capacity(m);
    for _ in 0..m {
        for _ in 0..n {
            a.push(tok.real("constraint coefficient")?);
        }
        b.push(tok.real("right-hand side")?);
    }
    tok.finish()?;
    let a = Matrix::from_vec(m, n, a).map_err(|e| ParseError::new(1, 1, e.to_string()))?;
    Constraints::new(a, b).map_err(|e| ParseError::new(1, 1, e.to_string()))
}

pub fn format_constraints(c: &Constraints) -> String {
    let mut out = format!("{} {}\n", c.rows(), c.cols());
    for i in 0..c.rows() {
        for v in c.a().row(i) {
            let _ = write!(out, "{v} ");
        }
        let _ = writeln!(out, "{}", c.b()[i]);
    }
    out
}

pub fn parse_point(text: &str) -> Result<BqpPoint, ParseError> {
    let mut tok = Tokens::new(text);
    let n = tok.count("dimension")?;
    let x = (0..n).map(|_| tok.real("x entry")).collect::<Result<Vec<_>, _>>()?;
    let xx = read_square(&mut tok, n)?;
    tok.finish()?;
    let xx = SymMatrix::new(xx).map_err(|e| ParseError::new(1, 1, e.to_string()))?;
    BqpPoint::new(x, xx).map_err(|e| ParseError::new(1, 1, e.to_string()))
}

/// Whitespace-separated reals, e.g. a scaling vector.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, ParseError> {
    let mut tok = Tokens::new(text);
    let mut out = Vec::new();
    while tok.remaining() > 0 {
        out.push(tok.real("number")?);
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn in_file<T>(path: &Path, r: Result<T, ParseError>) -> Result<T, Error> {
    r.map_err(|source| Error::Parse { path: path.to_path_buf(), source })
}

pub fn read_matrix(path: &Path) -> Result<SymMatrix, Error> {
    in_file(path, parse_matrix(&read(path)?))
}

pub fn read_constraints(path: &Path) -> Result<Constraints, Error> {
    in_file(path, parse_constraints(&read(path)?))
}

pub fn read_point(path: &Path) -> Result<BqpPoint, Error> {
    in_file(path, parse_point(&read(path)?))
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>, Error> {
    in_file(path, parse_vector(&read(path)?))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Reads and validates an instance.
pub fn load_instance(matrix: &Path, s: usize, constraints: Option<&Path>) -> Result<Instance, Error> {
    let c = read_matrix(matrix)?;
    let cons = constraints.map(read_constraints).transpose()?;
    Ok(Instance::new(c, s, cons)?)
}
