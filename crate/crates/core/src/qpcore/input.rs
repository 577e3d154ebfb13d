//! JSON description of a quasiperiodic coefficient.
//!
//! ```json
//! {
//!   "dim": 1,
//!   "lambda": [[1.0], ["sqrt(2)"]],
//!   "entries": [
//!     {"k": 0, "l": 0, "terms": [
//!       {"freq": [0], "cos": 3.0},
//!       {"freq": [1], "sin": 1.0},
//!       {"freq": ["sqrt(2)"], "sin": 1.0}
//!     ]}
//!   ]
//! }
//! ```
//!
//! Each term contributes `cos·cos(ξ·x) + sin·sin(ξ·x)`. Entries give the upper
//! triangle; the lower one is mirrored. `size` defaults to `dim`. Numbers may
//! be written as strings using `+ - * /`, parentheses, `pi` and `sqrt(...)`.

use serde::{Deserialize, Serialize};

use super::{QPMatrix, TrigSum, WindingMap};
use crate::{Error, Real, Result};

/// A real number given either literally or as an expression string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Value(f64),
    Expr(String),
}

impl Number {
    pub fn value(&self) -> Result<f64> {
        match self {
            Number::Value(v) => Ok(*v),
            Number::Expr(s) => eval_expr(s),
        }
    }
}

impl From<f64> for Number {
    fn from(v: f64) -> Self {
        Number::Value(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub freq: Vec<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cos: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sin: Option<Number>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrySpec {
    pub k: usize,
    pub l: usize,
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSpec {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<Vec<Number>>>,
    pub entries: Vec<EntrySpec>,
}

impl CoefficientSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedInput(e.to_string()))
    }

    pub fn to_matrix<T: Real>(&self) -> Result<QPMatrix<T>> {
        let size = self.size.unwrap_or(self.dim);
        let mut upper = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            let mut parts = Vec::with_capacity(e.terms.len());
            for t in &e.terms {
                let freq = t.freq.iter().map(|v| v.value().map(T::of)).collect::<Result<Vec<T>>>()?;
                let a = t.cos.as_ref().map_or(Ok(0.0), Number::value)?;
                let b = t.sin.as_ref().map_or(Ok(0.0), Number::value)?;
                parts.push((freq, T::of(a), T::of(b)));
            }
            upper.push(((e.k, e.l), TrigSum::from_cos_sin(self.dim, &parts)?));
        }
        QPMatrix::from_upper(self.dim, size, upper)
    }

    /// The explicit winding matrix, if one is given.
    pub fn winding<T: Real>(&self, p_check: usize) -> Result<Option<WindingMap<T>>> {
        let Some(rows) = &self.lambda else {
            return Ok(None);
        };
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|v| v.value().map(T::of)).collect::<Result<Vec<T>>>())
            .collect::<Result<Vec<_>>>()?;
        if rows.iter().any(|r| r.len() != self.dim) {
            return Err(Error::MalformedInput(format!("rows of lambda must have length {}", self.dim)));
        }
        WindingMap::with_check(rows, p_check).map(Some)
    }
}

/// Evaluates `+ - * /`, parentheses, `pi` and `sqrt(...)` over numbers.
pub fn eval_expr(s: &str) -> Result<f64> {
    let mut p = Parser { s: s.as_bytes(), i: 0 };
    let v = p.sum()?;
    p.ws();
    if p.i != p.s.len() {
        return Err(p.err("trailing characters"));
    }
    if !v.is_finite() {
        return Err(Error::MalformedInput(format!("expression {s:?} is not finite")));
    }
    Ok(v)
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> Error {
        Error::MalformedInput(format!(
            "{what} at offset {} in expression {:?}",
            self.i,
            String::from_utf8_lossy(self.s)
        ))
    }

    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }

    fn sum(&mut self) -> Result<f64> {
        let mut v = self.product()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.i += 1;
            let r = self.product()?;
            v = if c == b'+' { v + r } else { v - r };
        }
        Ok(v)
    }

    fn product(&mut self) -> Result<f64> {
        let mut v = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.i += 1;
            let r = self.unary()?;
            v = if c == b'*' { v * r } else { v / r };
        }
        Ok(v)
    }

    fn unary(&mut self) -> Result<f64> {
        match self.peek() {
            Some(b'-') => {
                self.i += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.i += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64> {
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let v = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.i += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.i;
                while self.i < self.s.len()
                    && (self.s[self.i].is_ascii_digit()
                        || self.s[self.i] == b'.'
                        || matches!(self.s[self.i], b'e' | b'E')
                        || (matches!(self.s[self.i], b'+' | b'-') && matches!(self.s[self.i - 1], b'e' | b'E')))
                {
                    self.i += 1;
                }
                std::str::from_utf8(&self.s[start..self.i])
                    .ok()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| self.err("bad number"))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.i;
                while self.i < self.s.len() && self.s[self.i].is_ascii_alphanumeric() {
                    self.i += 1;
                }
                match &self.s[start..self.i] {
                    b"pi" => Ok(std::f64::consts::PI),
                    b"sqrt" => {
                        if self.peek() != Some(b'(') {
                            return Err(self.err("expected '(' after sqrt"));
                        }
                        let v = self.atom()?;
                        if v < 0.0 {
                            return Err(self.err("square root of a negative number"));
                        }
                        Ok(v.sqrt())
                    }
                    _ => Err(self.err("unknown identifier")),
                }
            }
            _ => Err(self.err("expected a number")),
        }
    }
}
