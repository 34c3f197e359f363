//! Plain-text form of an [`ExponentProgram`].
//!
//! ```text
//! # comment
//! 6 3 0          <- n s c
//! block
//! 1 0 0 0 1 0    <- one exponent column per line
//! 0 1 0 1 0 0
//! block
//! ...
//! ```
//!
//! Entries are exact rationals written `a` or `a/b`; they must reduce to
//! nonnegative integers.

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::{ExponentProgram, NewtonError};
use crate::poly::ExponentVector;

pub fn format_program(prog: &ExponentProgram) -> String {
    let mut out = String::new();
    writeln!(out, "{} {} {}", prog.n(), prog.s(), prog.c()).unwrap();
    for block in prog.blocks() {
        out.push_str("block\n");
        for a in block {
            let cols: Vec<String> = a.entries().iter().map(u32::to_string).collect();
            out.push_str(&cols.join(" "));
            out.push('\n');
        }
    }
    out
}

fn parse_entry(tok: &str, line: usize) -> Result<u32, NewtonError> {
    let err = |msg: String| NewtonError::Parse { line, msg };
    let value: BigRational = match tok.split_once('/') {
        Some((a, b)) => {
            let a = a.parse().map_err(|_| err(format!("bad numerator in `{tok}`")))?;
            let b: num_bigint::BigInt = b.parse().map_err(|_| err(format!("bad denominator in `{tok}`")))?;
            if b == 0.into() {
                return Err(err(format!("zero denominator in `{tok}`")));
            }
            BigRational::new(a, b)
        }
        None => BigRational::from_integer(tok.parse().map_err(|_| err(format!("bad entry `{tok}`")))?),
    };
    if !value.is_integer() {
        return Err(err(format!("exponent `{tok}` is not an integer")));
    }
    value
        .to_integer()
        .to_u32()
        .ok_or_else(|| err(format!("exponent `{tok}` is negative or too large")))
}

pub fn parse_program(text: &str) -> Result<ExponentProgram, NewtonError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(NewtonError::Parse {
        line: 0,
        msg: "missing `n s c` header".into(),
    })?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse())
        .collect::<Result<_, _>>()
        .map_err(|_| NewtonError::Parse {
            line: hline,
            msg: "header must be three integers `n s c`".into(),
        })?;
    let [n, s, c] = nums[..] else {
        return Err(NewtonError::Parse {
            line: hline,
            msg: "header must be three integers `n s c`".into(),
        });
    };
    let mut blocks: Vec<Vec<ExponentVector>> = Vec::new();
    for (line, l) in lines {
        if l == "block" {
            blocks.push(Vec::new());
            continue;
        }
        let current = blocks.last_mut().ok_or(NewtonError::Parse {
            line,
            msg: "exponent column before the first `block`".into(),
        })?;
        let entries = l
            .split_whitespace()
            .map(|t| parse_entry(t, line))
            .collect::<Result<Vec<_>, _>>()?;
        if entries.len() != n {
            return Err(NewtonError::Parse {
                line,
                msg: format!("expected {n} entries, found {}", entries.len()),
            });
        }
        current.push(ExponentVector::new(entries));
    }
    if blocks.len() != s {
        return Err(NewtonError::Parse {
            line: hline,
            msg: format!("header declares {s} blocks, found {}", blocks.len()),
        });
    }
    ExponentProgram::new(n, c, blocks)
}
