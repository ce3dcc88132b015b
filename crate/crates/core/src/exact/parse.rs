//! Text form `p/q [± c₁*g₁] [± c₂*g₂] …`.
//!
//! A term is a rational (`3`, `-1/2`), a generator name, or
//! `rational*name`. Names must already be declared in the table.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{ExactError, GeneratorTable, Rational, SymbolicReal};

const MAX_DIGITS: usize = 2000;

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: impl Into<String>) -> ExactError {
        ExactError::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<BigInt, ExactError> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected digits"));
        }
        if self.pos - start > MAX_DIGITS {
            return Err(ExactError::Parse {
                pos: start,
                msg: "integer literal too long".into(),
            });
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits");
        Ok(text.parse().expect("ascii digits parse"))
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        if !self.peek().is_some_and(|c| c.is_ascii_alphabetic() || c == b'_') {
            return None;
        }
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        Some(std::str::from_utf8(&self.s[start..self.pos]).expect("ascii ident"))
    }
}

fn lookup(table: Option<&Arc<GeneratorTable>>, name: &str, pos: usize) -> Result<SymbolicReal, ExactError> {
    match table {
        Some(t) => t.value_of(name),
        None => Err(ExactError::Parse {
            pos,
            msg: format!("generator `{name}` used without a generator table"),
        }),
    }
}

impl SymbolicReal {
    /// Parses the text form produced by `Display`.
    pub fn parse(text: &str, table: Option<&Arc<GeneratorTable>>) -> Result<SymbolicReal, ExactError> {
        let mut c = Cursor {
            s: text.as_bytes(),
            pos: 0,
        };
        let mut acc = SymbolicReal::zero();
        let mut first = true;
        loop {
            c.skip_ws();
            let negative = if c.eat(b'-') {
                true
            } else if c.eat(b'+') {
                false
            } else if first {
                false
            } else if c.peek().is_none() {
                break;
            } else {
                return Err(c.err("expected `+` or `-`"));
            };
            first = false;
            c.skip_ws();
            let start = c.pos;
            let term = if let Some(name) = c.ident() {
                lookup(table, name, start)?
            } else {
                let n = c.integer()?;
                let d = if c.eat(b'/') { c.integer()? } else { BigInt::one() };
                if d.is_zero() {
                    return Err(c.err("zero denominator"));
                }
                let q: Rational = BigRational::new(n, d);
                if c.eat(b'*') {
                    let at = c.pos;
                    let name = c.ident().ok_or_else(|| c.err("expected generator name after `*`"))?;
                    lookup(table, name, at)?.scale(&q)
                } else {
                    SymbolicReal::from_rational(q)
                }
            };
            let term = if negative { -term } else { term };
            acc = acc.try_add(&term)?;
            c.skip_ws();
            if c.peek().is_none() {
                break;
            }
        }
        if first {
            return Err(c.err("empty expression"));
        }
        Ok(acc)
    }
}
