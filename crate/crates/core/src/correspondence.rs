//! Sweeps reductions modulo primes and compares the Fedder test against the
//! threshold program's prediction.
//!
//! The optimal σ of the program has denominators dividing some `N`; primes
//! `p ≡ 1 mod N·r` make every `σ_ij (p-1)` integral and admit the witness
//! twist. At each such prime the Fedder search runs at `t`, predicted to
//! succeed exactly when `t` does not exceed the program's value.
//!
//! A Supported verdict is evidence from finitely many primes, not a proof.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arith;
use crate::frobenius::{exponent_split_search, pair_fpt_estimate, CompleteIntersectionPair, FrobeniusError, SearchCaps};
use crate::input::{format_pair, format_rational, parse_rational};
use crate::newton_lp::{build_program, solve_lct_lp, uniqueness_report, NewtonError, UniquenessMethod};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorrespondenceError {
    #[error("invalid prime plan: {0}")]
    InvalidPlan(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("exponent e must be at least 1")]
    ZeroExponent,
    #[error("modulus N·r = {0} does not fit in 64 bits")]
    ModulusOverflow(BigInt),
    #[error(transparent)]
    Newton(#[from] NewtonError),
    #[error("report parse error at line {line}: {msg}")]
    ReportSyntax { line: usize, msg: String },
}

/// Primes `≡ residue mod modulus`, ascending, outside `skip_list`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimePlan {
    modulus: u64,
    residue: u64,
    count: usize,
    skip_list: BTreeSet<u64>,
}

impl PrimePlan {
    pub fn new(modulus: u64, count: usize) -> Result<Self, CorrespondenceError> {
        Self::with_skip(modulus, count, BTreeSet::new())
    }

    pub fn with_skip(modulus: u64, count: usize, skip_list: BTreeSet<u64>) -> Result<Self, CorrespondenceError> {
        if modulus == 0 {
            return Err(CorrespondenceError::InvalidPlan("modulus must be positive".into()));
        }
        if count == 0 {
            return Err(CorrespondenceError::InvalidPlan("count must be at least 1".into()));
        }
        Ok(PrimePlan {
            modulus,
            residue: 1 % modulus,
            count,
            skip_list,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
    pub fn residue(&self) -> u64 {
        self.residue
    }
    pub fn count(&self) -> usize {
        self.count
    }
    pub fn skip_list(&self) -> &BTreeSet<u64> {
        &self.skip_list
    }

    pub fn skip(&mut self, p: u64) {
        self.skip_list.insert(p);
    }

    pub fn admits(&self, p: u64) -> bool {
        arith::is_prime(p) && p % self.modulus == self.residue && !self.skip_list.contains(&p)
    }
}

pub fn prime_stream(plan: &PrimePlan) -> Vec<u64> {
    let mut out = Vec::with_capacity(plan.count);
    // 1 is never prime, so start from the first representative above it
    let mut candidate = if plan.residue >= 2 { plan.residue } else { plan.residue + plan.modulus };
    while out.len() < plan.count {
        if plan.admits(candidate) {
            out.push(candidate);
        }
        candidate += plan.modulus;
    }
    out
}

pub fn lcm_of_denominators(sigma: &[BigRational]) -> BigInt {
    arith::lcm_of_denominators(sigma)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimeSelection {
    /// The first `count` admissible primes `≡ 1 mod N·r`.
    Plan { count: usize },
    /// Exactly these primes, sorted and deduplicated; excluded ones are not
    /// replaced.
    Explicit(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceOptions {
    pub primes: PrimeSelection,
    pub e: u32,
    pub t_override: Option<BigRational>,
    pub caps: SearchCaps,
    /// Also compute the F-pure threshold interval at each prime.
    pub intervals: bool,
}

impl Default for CorrespondenceOptions {
    fn default() -> Self {
        CorrespondenceOptions {
            primes: PrimeSelection::Plan { count: 4 },
            e: 1,
            t_override: None,
            caps: SearchCaps::default(),
            intervals: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Supported,
    Refuted,
    Inconclusive,
}

impl Verdict {
    fn as_str(self) -> &'static str {
        match self {
            Verdict::Supported => "Supported",
            Verdict::Refuted => "Refuted",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "rational_str")]
    pub lower: BigRational,
    #[serde(with = "rational_str")]
    pub upper: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeRecord {
    pub p: u64,
    pub e: u32,
    /// Fedder result at `t`; `None` when the search hit a cap.
    pub fedder: Option<bool>,
    pub split: Option<Vec<u64>>,
    pub interval: Option<Interval>,
    /// `t ≤ lp_value`.
    pub predicted: bool,
    pub agree: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrespondenceReport {
    /// SHA-256 of the canonical pair text.
    pub input_digest: String,
    pub n: usize,
    pub c: usize,
    pub s: usize,
    pub witness_index: Option<u64>,
    #[serde(with = "opt_rational_str")]
    pub t: Option<BigRational>,
    #[serde(with = "opt_rational_str")]
    pub lp_value: Option<BigRational>,
    #[serde(with = "vec_rational_str")]
    pub lp_sigma: Vec<BigRational>,
    pub lp_unique: Option<bool>,
    pub uniqueness_method: Option<UniquenessMethod>,
    pub modulus: Option<u64>,
    pub e: u32,
    pub skip_list: Vec<u64>,
    pub records: Vec<PrimeRecord>,
    pub verdict: Verdict,
    pub reason: String,
}

pub fn input_digest(pair: &CompleteIntersectionPair) -> String {
    let digest = Sha256::digest(format_pair(pair).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn run_correspondence(
    pair: &CompleteIntersectionPair,
    opts: &CorrespondenceOptions,
) -> Result<CorrespondenceReport, CorrespondenceError> {
    if opts.e == 0 {
        return Err(CorrespondenceError::ZeroExponent);
    }
    match &opts.primes {
        PrimeSelection::Plan { count: 0 } => {
            return Err(CorrespondenceError::InvalidPlan("count must be at least 1".into()))
        }
        PrimeSelection::Explicit(ps) => {
            if ps.is_empty() {
                return Err(CorrespondenceError::InvalidPlan("empty prime list".into()));
            }
            if let Some(&p) = ps.iter().find(|&&p| !arith::is_prime(p)) {
                return Err(CorrespondenceError::NotPrime(p));
            }
        }
        PrimeSelection::Plan { .. } => {}
    }

    let polys: Vec<_> = pair.ci_gens().iter().chain(pair.aux_gens()).cloned().collect();
    let program = build_program(&polys, pair.c())?;
    let mut report = CorrespondenceReport {
        input_digest: input_digest(pair),
        n: pair.n(),
        c: pair.c(),
        s: pair.s(),
        witness_index: pair.defect_witness().map(|w| w.r),
        t: opts.t_override.clone(),
        lp_value: None,
        lp_sigma: Vec::new(),
        lp_unique: None,
        uniqueness_method: None,
        modulus: None,
        e: opts.e,
        skip_list: Vec::new(),
        records: Vec::new(),
        verdict: Verdict::Inconclusive,
        reason: String::new(),
    };
    let solution = match solve_lct_lp(&program) {
        Ok(s) => s,
        Err(NewtonError::Infeasible) => {
            report.reason = "threshold program infeasible: the complete-intersection blocks cannot sum to one".into();
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };
    let uniq = uniqueness_report(&program, &solution);
    let sigma = uniq.witness.clone().unwrap_or_else(|| solution.sigma.clone());
    let r = pair.defect_witness().map_or(1, |w| w.r);
    let modulus_big = lcm_of_denominators(&sigma) * BigInt::from(r);
    let modulus = modulus_big
        .to_u64()
        .ok_or_else(|| CorrespondenceError::ModulusOverflow(modulus_big.clone()))?;
    let t = opts.t_override.clone().unwrap_or_else(|| solution.value.clone());
    let predicted = t <= solution.value;
    let tested = pair.with_t(t.clone());

    report.t = Some(t.clone());
    report.lp_value = Some(solution.value.clone());
    report.lp_sigma = sigma;
    report.lp_unique = Some(uniq.unique);
    report.uniqueness_method = Some(uniq.method);
    report.modulus = Some(modulus);

    let evaluate = |p: u64| test_prime(&tested, p, opts, predicted);
    let mut skip = BTreeSet::new();
    let mut records = Vec::new();
    match &opts.primes {
        PrimeSelection::Explicit(ps) => {
            let ps: BTreeSet<u64> = ps.iter().copied().collect();
            let ps: Vec<u64> = ps.into_iter().collect();
            for (p, outcome) in ps.iter().zip(ps.par_iter().map(|&p| evaluate(p)).collect::<Vec<_>>()) {
                match outcome {
                    Some(rec) => records.push(rec),
                    None => {
                        skip.insert(*p);
                    }
                }
            }
        }
        PrimeSelection::Plan { count } => {
            let mut plan = PrimePlan::new(modulus, *count)?;
            loop {
                let batch: Vec<u64> = prime_stream(&plan)
                    .into_iter()
                    .filter(|p| !records.iter().any(|r: &PrimeRecord| r.p == *p))
                    .take(count - records.len())
                    .collect();
                if batch.is_empty() {
                    break;
                }
                let outcomes: Vec<_> = batch.par_iter().map(|&p| evaluate(p)).collect();
                for (p, outcome) in batch.into_iter().zip(outcomes) {
                    match outcome {
                        Some(rec) => records.push(rec),
                        None => {
                            plan.skip(p);
                            skip.insert(p);
                        }
                    }
                }
                if records.len() >= *count {
                    break;
                }
            }
        }
    }
    records.sort_by_key(|r| r.p);
    report.skip_list = skip.into_iter().collect();
    report.records = records;
    let (verdict, reason) = decide(&report, &t, pair.defect_witness().is_some());
    report.verdict = verdict;
    report.reason = reason;
    Ok(report)
}

/// `None` when the prime is excluded by bad reduction or the witness
/// congruence.
fn test_prime(pair: &CompleteIntersectionPair, p: u64, opts: &CorrespondenceOptions, predicted: bool) -> Option<PrimeRecord> {
    let (fedder, split, mut note) = match exponent_split_search(pair, p, opts.e, &opts.caps) {
        Ok(split) => (Some(split.is_some()), split, None),
        Err(FrobeniusError::PrimeExcluded { .. } | FrobeniusError::CongruenceViolated { .. }) => return None,
        Err(e) => (None, None, Some(e.to_string())),
    };
    let mut interval = None;
    if opts.intervals && pair.s() > pair.c() {
        match pair_fpt_estimate(pair, p, opts.e, &opts.caps) {
            Ok(est) => {
                let last = est.last().expect("e ≥ 1");
                interval = Some(Interval {
                    lower: last.lower.clone(),
                    upper: last.upper.clone(),
                });
            }
            Err(e) => {
                let msg = format!("interval unavailable: {e}");
                note = Some(match note {
                    Some(n) => format!("{n}; {msg}"),
                    None => msg,
                });
            }
        }
    }
    Some(PrimeRecord {
        p,
        e: opts.e,
        agree: fedder == Some(predicted),
        fedder,
        split,
        interval,
        predicted,
        note,
    })
}

fn decide(report: &CorrespondenceReport, t: &BigRational, has_witness: bool) -> (Verdict, String) {
    let lp_value = report.lp_value.as_ref().expect("decided after solving");
    if report.records.is_empty() {
        return (Verdict::Inconclusive, "no prime survived reduction".into());
    }
    let disagreeing: Vec<&PrimeRecord> = report.records.iter().filter(|r| !r.agree).collect();
    if disagreeing.is_empty() {
        return (
            Verdict::Supported,
            format!("all {} tested primes agree with the program value", report.records.len()),
        );
    }
    let ps: Vec<String> = disagreeing.iter().map(|r| r.p.to_string()).collect();
    let ps = ps.join(" ");
    let failures_below = disagreeing.iter().any(|r| r.fedder == Some(false)) && t < lp_value;
    if failures_below && report.lp_unique == Some(true) && !has_witness {
        return (
            Verdict::Refuted,
            format!("Fedder test fails below the program value at p = {ps} although the optimum is unique"),
        );
    }
    let why = if disagreeing.iter().any(|r| r.fedder.is_none()) {
        "search caps reached"
    } else if has_witness && disagreeing.iter().any(|r| r.fedder == Some(false)) {
        "negative results are inconclusive for this witness"
    } else if report.lp_unique != Some(true) {
        "the optimum is not unique, so the program value need not be the threshold"
    } else {
        "disagreement at a single exponent does not contradict density of good primes"
    };
    (Verdict::Inconclusive, format!("disagreement at p = {ps}: {why}"))
}

const NONE: &str = "none";

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map_or_else(|| NONE.to_string(), f)
}

fn join<T: ToString>(v: &[T]) -> String {
    if v.is_empty() {
        NONE.into()
    } else {
        v.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
    }
}

fn method_name(m: UniquenessMethod) -> &'static str {
    match m {
        UniquenessMethod::Exhaustive => "exhaustive",
        UniquenessMethod::Sampled => "sampled",
    }
}

impl CorrespondenceReport {
    /// The `.fsreport` text form. Keys appear in a fixed order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "# fsing correspondence report");
        let _ = writeln!(w, "# A Supported verdict is evidence from finitely many primes, not a proof.");
        let _ = writeln!(w, "format: fsreport 1");
        let _ = writeln!(w, "input_digest: {}", self.input_digest);
        let _ = writeln!(w, "n: {}", self.n);
        let _ = writeln!(w, "c: {}", self.c);
        let _ = writeln!(w, "s: {}", self.s);
        let _ = writeln!(w, "witness_index: {}", opt(self.witness_index, |r| r.to_string()));
        let _ = writeln!(w, "t: {}", opt(self.t.as_ref(), format_rational));
        let _ = writeln!(w, "lp_value: {}", opt(self.lp_value.as_ref(), format_rational));
        let sigma: Vec<String> = self.lp_sigma.iter().map(format_rational).collect();
        let _ = writeln!(w, "lp_sigma: {}", join(&sigma));
        let _ = writeln!(w, "lp_unique: {}", opt(self.lp_unique, |u| u.to_string()));
        let _ = writeln!(w, "uniqueness_method: {}", opt(self.uniqueness_method, |m| method_name(m).into()));
        let _ = writeln!(w, "modulus: {}", opt(self.modulus, |m| m.to_string()));
        let _ = writeln!(w, "e: {}", self.e);
        let _ = writeln!(w, "skip_list: {}", join(&self.skip_list));
        for r in &self.records {
            let _ = writeln!(w, "prime: {}", r.p);
            let _ = writeln!(w, "  e: {}", r.e);
            let _ = writeln!(w, "  fedder: {}", opt(r.fedder, |f| f.to_string()));
            let _ = writeln!(w, "  split: {}", opt(r.split.as_ref(), |s| join(s)));
            let _ = writeln!(
                w,
                "  interval: {}",
                opt(r.interval.as_ref(), |i| format!("[{}, {}]", format_rational(&i.lower), format_rational(&i.upper)))
            );
            let _ = writeln!(w, "  predicted: {}", r.predicted);
            let _ = writeln!(w, "  agree: {}", r.agree);
            let _ = writeln!(w, "  note: {}", opt(r.note.as_ref(), |n| n.clone()));
        }
        let _ = writeln!(w, "verdict: {}", self.verdict.as_str());
        let _ = writeln!(w, "reason: {}", self.reason);
        out
    }

    pub fn to_machine(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_machine(text: &str) -> Result<Self, CorrespondenceError> {
        serde_json::from_str(text).map_err(|e| CorrespondenceError::ReportSyntax {
            line: e.line(),
            msg: e.to_string(),
        })
    }

    pub fn from_text(text: &str) -> Result<Self, CorrespondenceError> {
        TextReader::new(text).report()
    }
}

struct TextReader<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> TextReader<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map(|(i, l)| (i + 1, l))
            .collect();
        TextReader { lines, pos: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> CorrespondenceError {
        let line = self.lines.get(self.pos).map_or(self.lines.len() + 1, |l| l.0);
        CorrespondenceError::ReportSyntax { line, msg: msg.into() }
    }

    fn peek_key(&self) -> Option<&'a str> {
        self.lines.get(self.pos).and_then(|(_, l)| l.trim().split_once(':')).map(|(k, _)| k)
    }

    fn field(&mut self, key: &str) -> Result<&'a str, CorrespondenceError> {
        let (_, line) = *self.lines.get(self.pos).ok_or_else(|| self.err(format!("missing `{key}`")))?;
        let (k, v) = line.trim().split_once(':').ok_or_else(|| self.err("expected `key: value`"))?;
        if k != key {
            return Err(self.err(format!("expected `{key}`, found `{k}`")));
        }
        self.pos += 1;
        Ok(v.trim())
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, CorrespondenceError> {
        let v = self.field(key)?;
        v.parse().map_err(|_| {
            self.pos -= 1;
            self.err(format!("bad value `{v}` for `{key}`"))
        })
    }

    fn optional<T>(&mut self, key: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>, CorrespondenceError> {
        let v = self.field(key)?;
        if v == NONE {
            return Ok(None);
        }
        f(v).map(Some).ok_or_else(|| {
            self.pos -= 1;
            self.err(format!("bad value `{v}` for `{key}`"))
        })
    }

    fn list<T>(&mut self, key: &str, f: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, CorrespondenceError> {
        Ok(self
            .optional(key, |v| v.split_whitespace().map(&f).collect::<Option<Vec<T>>>())?
            .unwrap_or_default())
    }

    fn report(mut self) -> Result<CorrespondenceReport, CorrespondenceError> {
        if self.field("format")? != "fsreport 1" {
            self.pos -= 1;
            return Err(self.err("unsupported format"));
        }
        let input_digest = self.field("input_digest")?.to_string();
        let n = self.parse("n")?;
        let c = self.parse("c")?;
        let s = self.parse("s")?;
        let witness_index = self.optional("witness_index", |v| v.parse().ok())?;
        let t = self.optional("t", parse_rational)?;
        let lp_value = self.optional("lp_value", parse_rational)?;
        let lp_sigma = self.list("lp_sigma", parse_rational)?;
        let lp_unique = self.optional("lp_unique", |v| v.parse().ok())?;
        let uniqueness_method = self.optional("uniqueness_method", |v| match v {
            "exhaustive" => Some(UniquenessMethod::Exhaustive),
            "sampled" => Some(UniquenessMethod::Sampled),
            _ => None,
        })?;
        let modulus = self.optional("modulus", |v| v.parse().ok())?;
        let e = self.parse("e")?;
        let skip_list = self.list("skip_list", |v| v.parse().ok())?;
        let mut records = Vec::new();
        while self.peek_key() == Some("prime") {
            let p = self.parse("prime")?;
            let e = self.parse("e")?;
            let fedder = self.optional("fedder", |v| v.parse().ok())?;
            let split = self.optional("split", |v| v.split_whitespace().map(|x| x.parse().ok()).collect())?;
            let interval = self.optional("interval", |v| {
                let (lo, hi) = v.strip_prefix('[')?.strip_suffix(']')?.split_once(',')?;
                Some(Interval {
                    lower: parse_rational(lo)?,
                    upper: parse_rational(hi)?,
                })
            })?;
            let predicted = self.parse("predicted")?;
            let agree = self.parse("agree")?;
            let note = self.optional("note", |v| Some(v.to_string()))?;
            records.push(PrimeRecord {
                p,
                e,
                fedder,
                split,
                interval,
                predicted,
                agree,
                note,
            });
        }
        let verdict = match self.field("verdict")? {
            "Supported" => Verdict::Supported,
            "Refuted" => Verdict::Refuted,
            "Inconclusive" => Verdict::Inconclusive,
            v => {
                self.pos -= 1;
                return Err(self.err(format!("unknown verdict `{v}`")));
            }
        };
        let reason = self.field("reason")?.to_string();
        if self.pos != self.lines.len() {
            return Err(self.err("trailing content"));
        }
        Ok(CorrespondenceReport {
            input_digest,
            n,
            c,
            s,
            witness_index,
            t,
            lp_value,
            lp_sigma,
            lp_unique,
            uniqueness_method,
            modulus,
            e,
            skip_list,
            records,
            verdict,
            reason,
        })
    }
}

/// Rationals serialize as `"a/b"` strings so reports stay exact.
mod rational_str {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::input::{format_rational, parse_rational};

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).ok_or_else(|| D::Error::custom(format!("bad rational `{text}`")))
    }
}

mod opt_rational_str {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::input::{format_rational, parse_rational};

    pub fn serialize<S: Serializer>(x: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_some(&format_rational(x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| parse_rational(&t).ok_or_else(|| D::Error::custom(format!("bad rational `{t}`"))))
            .transpose()
    }
}

mod vec_rational_str {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::input::{format_rational, parse_rational};

    pub fn serialize<S: Serializer>(xs: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .into_iter()
            .map(|t| parse_rational(&t).ok_or_else(|| D::Error::custom(format!("bad rational `{t}`"))))
            .collect()
    }
}
