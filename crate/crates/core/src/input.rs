//! The `.fsin` pair format.
//!
//! ```text
//! # Example: 2x2 minors of a generic 2x3 matrix
//! n 6
//! c 0
//! x1*x5 - x2*x4
//! x2*x6 - x3*x5
//! x1*x6 - x3*x4
//! t 2
//! ```
//!
//! `n` and `c` come first, then one generator per line; the first `c`
//! generators cut out the complete intersection. `t <rational>` and
//! `witness <poly> <r>` are optional and follow the generators. `#` starts a
//! comment anywhere on a line.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::frobenius::{CompleteIntersectionPair, DefectWitness, FrobeniusError};
use crate::poly::{parse_qpoly, QPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `{0}` line")]
    Missing(&'static str),
    #[error(transparent)]
    Pair(#[from] FrobeniusError),
}

/// A parsed `.fsin` file. `t` defaults to zero when absent.
#[derive(Debug, Clone, PartialEq)]
pub struct PairInput {
    pub pair: CompleteIntersectionPair,
    pub t_given: bool,
}

/// Parses `a`, `-a` or `a/b` with `b ≠ 0`.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text, "1"),
    };
    let num = BigInt::from_str(num).ok()?;
    let den = BigInt::from_str(den).ok()?;
    if den.is_zero() {
        return None;
    }
    Some(BigRational::new(num, den))
}

pub fn format_rational(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_pair(text: &str) -> Result<PairInput, InputError> {
    let mut n: Option<usize> = None;
    let mut c: Option<usize> = None;
    let mut gens: Vec<QPoly> = Vec::new();
    let mut t: Option<BigRational> = None;
    let mut witness: Option<DefectWitness> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| InputError::Syntax { line: line_no, msg };
        let (head, rest) = match line.split_once(char::is_whitespace) {
            Some((h, r)) => (h, r.trim()),
            None => (line, ""),
        };
        match head {
            "n" | "c" => {
                if !gens.is_empty() || t.is_some() || witness.is_some() {
                    return Err(err(format!("`{head}` must precede the generators")));
                }
                let v: usize = rest.parse().map_err(|_| err(format!("expected an integer after `{head}`")))?;
                let slot = if head == "n" { &mut n } else { &mut c };
                if slot.replace(v).is_some() {
                    return Err(err(format!("duplicate `{head}` line")));
                }
            }
            "t" => {
                if t.is_some() {
                    return Err(err("duplicate `t` line".into()));
                }
                let v = parse_rational(rest).ok_or_else(|| err(format!("bad rational `{rest}`")))?;
                if v.is_negative() {
                    return Err(err("t must be nonnegative".into()));
                }
                t = Some(v);
            }
            "witness" => {
                if witness.is_some() {
                    return Err(err("duplicate `witness` line".into()));
                }
                let nvars = n.ok_or(InputError::Missing("n"))?;
                let (poly, r) = rest
                    .rsplit_once(char::is_whitespace)
                    .ok_or_else(|| err("expected `witness <poly> <r>`".into()))?;
                let r: u64 = r.trim().parse().map_err(|_| err(format!("bad index `{r}`")))?;
                let g = parse_qpoly(poly.trim(), nvars).map_err(|e| err(e.to_string()))?;
                witness = Some(DefectWitness { g, r });
            }
            _ => {
                let nvars = n.ok_or(InputError::Missing("n"))?;
                if c.is_none() {
                    return Err(InputError::Missing("c"));
                }
                if t.is_some() || witness.is_some() {
                    return Err(err("generators must precede `t` and `witness`".into()));
                }
                gens.push(parse_qpoly(line, nvars).map_err(|e| err(e.to_string()))?);
            }
        }
    }

    let n = n.ok_or(InputError::Missing("n"))?;
    let c = c.ok_or(InputError::Missing("c"))?;
    if c > gens.len() {
        return Err(FrobeniusError::InvalidPair(format!("c = {c} but only {} generators", gens.len())).into());
    }
    let aux = gens.split_off(c);
    let t_given = t.is_some();
    let pair = CompleteIntersectionPair::new(n, gens, aux, t.unwrap_or_else(BigRational::zero), witness)?;
    Ok(PairInput { pair, t_given })
}

/// Canonical text: parses back to an equal pair, and equal pairs format
/// identically.
pub fn format_pair(pair: &CompleteIntersectionPair) -> String {
    let mut out = format!("n {}\nc {}\n", pair.n(), pair.c());
    for f in pair.ci_gens().iter().chain(pair.aux_gens()) {
        out.push_str(&format!("{f}\n"));
    }
    out.push_str(&format!("t {}\n", format_rational(pair.t())));
    if let Some(w) = pair.defect_witness() {
        out.push_str(&format!("witness {} {}\n", w.g, w.r));
    }
    out
}
