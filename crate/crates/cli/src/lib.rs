//! Argument parsing and job dispatch for the `fsing` binary.
//!
//! Exit codes: 0 success, 1 computational or I/O failure, 2 usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

use fsing::correspondence::{run_correspondence, CorrespondenceOptions, PrimePlan, PrimeSelection, prime_stream};
use fsing::fermat::{build_frobenius_matrix, fermat_sweep, FermatError};
use fsing::frobenius::{pair_fpt_estimate, CompleteIntersectionPair, SearchCaps, MAX_TERMS_ENV};
use fsing::input::{format_rational, parse_pair, parse_rational};
use fsing::newton_lp::{build_program, format_program, howald_lct, solve_lct_lp, uniqueness_report, UniquenessMethod};
use fsing::{parse_qpoly, ExponentVector, QPoly};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fsing", version, about = "F-pure thresholds, Newton-polyhedron thresholds and Frobenius sweeps")]
struct Cli {
    #[command(flatten)]
    caps: CapArgs,
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Args)]
struct CapArgs {
    /// Largest term count of any intermediate product [env: FSING_MAX_TERMS]
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    max_terms: Option<u64>,
    /// Largest number of generators searched jointly
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    max_gens: Option<u64>,
    /// Largest total exponent considered
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    max_total: Option<u64>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Pair file in `.fsin` format
    #[arg(long)]
    file: Option<PathBuf>,
    /// Generator (repeatable); requires -n
    #[arg(long, requires = "n")]
    poly: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// ν-values and F-pure threshold intervals at one prime
    Fpt {
        #[command(flatten)]
        source: Source,
        #[arg(short)]
        n: Option<usize>,
        #[arg(short)]
        p: u64,
        #[arg(short, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        e: u32,
    },
    /// Exact threshold program over term exponents
    LctLp {
        #[command(flatten)]
        source: Source,
        #[arg(short)]
        n: Option<usize>,
        /// Leading generators forming the complete intersection (inline input only)
        #[arg(short, default_value_t = 0, conflicts_with = "file")]
        c: usize,
        /// Also print the program in text form
        #[arg(long)]
        program: bool,
    },
    /// Howald threshold of the term ideal
    Howald {
        #[command(flatten)]
        source: Source,
        #[arg(short)]
        n: Option<usize>,
        /// Report whether 1 is interior to t·P
        #[arg(long)]
        t: Option<String>,
    },
    /// Mod-p sweep comparing Fedder tests with the program value
    Correspond {
        #[arg(long)]
        file: PathBuf,
        /// Coefficient to test instead of the program value
        #[arg(long)]
        t: Option<String>,
        /// Explicit comma-separated primes
        #[arg(long, conflicts_with = "count", value_delimiter = ',')]
        primes: Vec<u64>,
        /// Number of primes from the congruence plan
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        count: Option<u64>,
        #[arg(short, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        e: u32,
        /// Skip the per-prime threshold intervals
        #[arg(long)]
        no_intervals: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Frobenius action on the Fermat hypersurface of degree d in P^n
    Fermat {
        #[arg(short)]
        n: usize,
        #[arg(short)]
        d: u32,
        #[arg(short, conflicts_with = "primes", required_unless_present = "primes")]
        p: Option<u64>,
        /// `2,3,5` or `1modM:K` (first K primes congruent to 1 mod M)
        #[arg(long)]
        primes: Option<String>,
        /// Print the matrix as a text grid
        #[arg(long)]
        dump: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    File(PathBuf),
    Inline { n: usize, polys: Vec<QPoly> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Fpt { input: Input, p: u64, e: u32 },
    LctLp { input: Input, c: usize, show_program: bool },
    Howald { input: Input, t: Option<BigRational> },
    Correspond { file: PathBuf, t: Option<BigRational>, primes: PrimeSelection, e: u32, intervals: bool },
    Fermat { n: usize, d: u32, primes: Vec<u64>, dump: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub command: Command,
    pub caps: SearchCaps,
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// A rejected command line. `code` is 0 for `--help` and `--version`.
#[derive(Debug)]
pub struct UsageError {
    pub message: String,
    pub code: i32,
}

impl UsageError {
    fn new(message: impl Into<String>) -> Self {
        UsageError {
            message: message.into(),
            code: EXIT_USAGE,
        }
    }
}

/// `argv` includes the program name.
pub fn parse_job<I, T>(argv: I) -> Result<JobSpec, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| UsageError {
        message: e.render().to_string(),
        code: if e.use_stderr() { EXIT_USAGE } else { EXIT_OK },
    })?;
    let mut caps = SearchCaps::from_env();
    if let Some(v) = cli.caps.max_terms {
        caps.max_terms = v as usize;
    }
    if let Some(v) = cli.caps.max_gens {
        caps.max_gens = v as usize;
    }
    if let Some(v) = cli.caps.max_total {
        caps.max_total = v;
    }
    if caps.max_terms == 0 {
        return Err(UsageError::new(format!("{MAX_TERMS_ENV} must be positive")));
    }

    let mut out = None;
    let mut format = Format::Text;
    let command = match cli.command {
        CliCommand::Fpt { source, n, p, e } => {
            if !fsing::arith::is_prime(p) {
                return Err(UsageError::new(format!("-p {p} is not prime")));
            }
            Command::Fpt { input: input(source, n)?, p, e }
        }
        CliCommand::LctLp { source, n, c, program } => Command::LctLp {
            input: input(source, n)?,
            c,
            show_program: program,
        },
        CliCommand::Howald { source, n, t } => Command::Howald {
            input: input(source, n)?,
            t: t.map(|t| rational_arg("--t", &t)).transpose()?,
        },
        CliCommand::Correspond {
            file,
            t,
            primes,
            count,
            e,
            no_intervals,
            out: o,
            format: f,
        } => {
            out = o;
            format = f;
            let primes = if primes.is_empty() {
                PrimeSelection::Plan {
                    count: count.unwrap_or(4) as usize,
                }
            } else {
                PrimeSelection::Explicit(primes)
            };
            Command::Correspond {
                file,
                t: t.map(|t| rational_arg("--t", &t)).transpose()?,
                primes,
                e,
                intervals: !no_intervals,
            }
        }
        CliCommand::Fermat { n, d, p, primes, dump } => {
            if n == 0 || d == 0 {
                return Err(UsageError::new("fermat needs -n ≥ 1 and -d ≥ 1"));
            }
            let primes = match (p, primes) {
                (Some(p), None) => vec![p],
                (None, Some(spec)) => prime_list(&spec)?,
                _ => unreachable!("clap enforces exactly one of -p and --primes"),
            };
            if let Some(q) = primes.iter().find(|&&q| !fsing::arith::is_prime(q)) {
                return Err(UsageError::new(format!("{q} is not prime")));
            }
            Command::Fermat { n, d, primes, dump }
        }
    };
    Ok(JobSpec {
        command,
        caps,
        out,
        format,
    })
}

fn input(source: Source, n: Option<usize>) -> Result<Input, UsageError> {
    if let Some(path) = source.file {
        if n.is_some() {
            return Err(UsageError::new("-n applies to inline --poly input only"));
        }
        return Ok(Input::File(path));
    }
    let n = n.ok_or_else(|| UsageError::new("--poly requires -n"))?;
    if n == 0 {
        return Err(UsageError::new("-n must be at least 1"));
    }
    let polys = source
        .poly
        .iter()
        .map(|s| parse_qpoly(s, n).map_err(|e| UsageError::new(format!("--poly {s:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Input::Inline { n, polys })
}

fn rational_arg(flag: &str, s: &str) -> Result<BigRational, UsageError> {
    parse_rational(s).ok_or_else(|| UsageError::new(format!("{flag}: `{s}` is not a rational")))
}

/// `2,3,5` or `1modM:K`.
fn prime_list(spec: &str) -> Result<Vec<u64>, UsageError> {
    let bad = || UsageError::new(format!("--primes: cannot read `{spec}`"));
    if let Some(rest) = spec.strip_prefix("1mod") {
        let (m, k) = rest.split_once(':').ok_or_else(bad)?;
        let m: u64 = m.parse().map_err(|_| bad())?;
        let k: usize = k.parse().map_err(|_| bad())?;
        let plan = PrimePlan::new(m, k).map_err(|e| UsageError::new(e.to_string()))?;
        return Ok(prime_stream(&plan));
    }
    spec.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

/// Writes results to `stdout`, or to the `--out` file when given, and
/// diagnostics to `stderr`.
pub fn run_job(spec: &JobSpec, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match execute(spec) {
        Ok(text) => {
            let written = match &spec.out {
                Some(path) => fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => EXIT_OK,
                Err(msg) => {
                    let _ = writeln!(stderr, "error: {msg}");
                    EXIT_FAILURE
                }
            }
        }
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn read_pair(path: &Path) -> Result<(CompleteIntersectionPair, bool), String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let input = parse_pair(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((input.pair, input.t_given))
}

/// Pair and the full generator list, CI generators first.
fn resolve(input: &Input) -> Result<(CompleteIntersectionPair, Vec<QPoly>), String> {
    let pair = match input {
        Input::File(path) => read_pair(path)?.0,
        Input::Inline { n, polys } => {
            CompleteIntersectionPair::ambient(*n, polys.clone(), BigRational::default()).map_err(|e| e.to_string())?
        }
    };
    let gens = pair.ci_gens().iter().chain(pair.aux_gens()).cloned().collect();
    Ok((pair, gens))
}

fn execute(spec: &JobSpec) -> Result<String, String> {
    let mut out = String::new();
    match &spec.command {
        Command::Fpt { input, p, e } => {
            let (pair, _) = resolve(input)?;
            let est = pair_fpt_estimate(&pair, *p, *e, &spec.caps).map_err(|e| e.to_string())?;
            for step in est {
                out.push_str(&format!(
                    "e: {}  nu: {}  interval: [{}, {}]\n",
                    step.e,
                    step.nu,
                    format_rational(&step.lower),
                    format_rational(&step.upper)
                ));
            }
        }
        Command::LctLp { input, c, show_program } => {
            let (pair, gens) = resolve(input)?;
            let c = if matches!(input, Input::File(_)) { pair.c() } else { *c };
            let prog = build_program(&gens, c).map_err(|e| e.to_string())?;
            if *show_program {
                out.push_str(&format_program(&prog));
            }
            let sol = solve_lct_lp(&prog).map_err(|e| e.to_string())?;
            let uniq = uniqueness_report(&prog, &sol);
            out.push_str(&format!("value: {}\n", format_rational(&sol.value)));
            out.push_str(&format!("unique: {}\n", uniq.unique));
            let method = match uniq.method {
                UniquenessMethod::Exhaustive => "exhaustive",
                UniquenessMethod::Sampled => "sampled",
            };
            out.push_str(&format!("uniqueness_method: {method}\n"));
            out.push_str(&format!("vertices_examined: {}\n", uniq.vertices_examined));
            out.push_str(&format!("sigma: {}\n", rationals(&sol.sigma)));
            if let Some(w) = &uniq.witness {
                out.push_str(&format!("unique_sigma: {}\n", rationals(w)));
            }
            out.push_str(&format!("dual: {}\n", rationals(&sol.dual)));
        }
        Command::Howald { input, t } => {
            let (pair, gens) = resolve(input)?;
            let exps: Vec<ExponentVector> = gens.iter().flat_map(|f| f.exponents().cloned()).collect();
            let lct = howald_lct(&exps, pair.n()).map_err(|e| e.to_string())?;
            out.push_str(&format!("lct: {}\n", format_rational(&lct)));
            if let Some(t) = t {
                out.push_str(&format!("interior: {}\n", lct > *t));
            }
        }
        Command::Correspond {
            file,
            t,
            primes,
            e,
            intervals,
        } => {
            let (pair, t_given) = read_pair(file)?;
            let t_override = t.clone().or_else(|| t_given.then(|| pair.t().clone()));
            let opts = CorrespondenceOptions {
                primes: primes.clone(),
                e: *e,
                t_override,
                caps: spec.caps,
                intervals: *intervals,
            };
            let report = run_correspondence(&pair, &opts).map_err(|e| e.to_string())?;
            out = match spec.format {
                Format::Text => report.to_text(),
                Format::Machine => report.to_machine(),
            };
        }
        Command::Fermat { n, d, primes, dump } => {
            let rows = fermat_sweep(*n, *d, primes).map_err(|e| e.to_string())?;
            for row in rows {
                out.push_str(&format!(
                    "p: {}  injective: {}  rank: {}/{}  p≡1 mod d: {}\n",
                    row.p, row.injective, row.rank, row.dim, row.expected_class
                ));
                if *dump {
                    match build_frobenius_matrix(*n, *d, row.p) {
                        Ok(m) => out.push_str(&m.to_string()),
                        Err(FermatError::EmptyBasis { .. }) => out.push_str("(empty basis)\n"),
                        Err(e) => return Err(e.to_string()),
                    }
                }
            }
        }
    }
    Ok(out)
}

fn rationals(xs: &[BigRational]) -> String {
    xs.iter().map(format_rational).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<JobSpec, UsageError> {
        parse_job(std::iter::once("fsing").chain(args.iter().copied()))
    }

    #[test]
    fn parses_examples() {
        let job = parse(&["fpt", "--poly", "x1^2+x2^3", "-n", "2", "-p", "7", "-e", "2"]).unwrap();
        assert!(matches!(job.command, Command::Fpt { p: 7, e: 2, input: Input::Inline { n: 2, .. } }));
        let job = parse(&["lct-lp", "--file", "pair.fsin"]).unwrap();
        assert!(matches!(job.command, Command::LctLp { input: Input::File(_), .. }));
        let job = parse(&["fermat", "-n", "2", "-d", "3", "--primes", "1mod3:3"]).unwrap();
        assert_eq!(
            job.command,
            Command::Fermat {
                n: 2,
                d: 3,
                primes: vec![7, 13, 19],
                dump: false
            }
        );
        let job = parse(&["correspond", "--file", "a.fsin", "--t", "2", "--primes", "5,7,11,13"]).unwrap();
        assert!(matches!(
            job.command,
            Command::Correspond { primes: PrimeSelection::Explicit(ref ps), .. } if ps == &[5, 7, 11, 13]
        ));
    }

    #[test]
    fn usage_errors_exit_two() {
        for args in [
            &["fpt", "--poly", "x1", "-n", "1"][..],
            &["fpt", "--poly", "x1", "-n", "1", "-p", "4"],
            &["fpt", "--poly", "x1", "-p", "5"],
            &["fpt", "--poly", "x1", "-n", "1", "-p", "5", "--bogus"],
            &["fpt", "--poly", "x1", "--file", "f", "-n", "1", "-p", "5"],
            &["fpt", "--poly", "x1*", "-n", "1", "-p", "5"],
            &["correspond", "--file", "a", "--primes", "5", "--count", "2"],
            &["correspond", "--file", "a", "--t", "1/0"],
            &["fermat", "-n", "2", "-d", "3", "-p", "7", "--primes", "7"],
            &["fermat", "-n", "2", "-d", "3"],
            &["fermat", "-n", "2", "-d", "3", "--primes", "1mod0:3"],
            &["--max-terms", "0", "fermat", "-n", "2", "-d", "3", "-p", "7"],
            &[],
        ] {
            let err = parse(args).expect_err(&format!("{args:?}"));
            assert_eq!(err.code, EXIT_USAGE, "{args:?}");
        }
        assert_eq!(parse(&["--help"]).unwrap_err().code, EXIT_OK);
    }

    #[test]
    fn caps_flags_override_defaults() {
        let job = parse(&["--max-terms", "10", "--max-total", "7", "fermat", "-n", "1", "-d", "2", "-p", "3"]).unwrap();
        assert_eq!(job.caps.max_terms, 10);
        assert_eq!(job.caps.max_total, 7);
    }

    #[test]
    fn fpt_on_a_line() {
        let job = parse(&["fpt", "--poly", "x1", "-n", "1", "-p", "5"]).unwrap();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run_job(&job, &mut out, &mut err), EXIT_OK);
        assert_eq!(String::from_utf8(out).unwrap(), "e: 1  nu: 4  interval: [4/5, 1]\n");
    }

    #[test]
    fn missing_file_exits_one() {
        let job = parse(&["lct-lp", "--file", "/nonexistent/pair.fsin"]).unwrap();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run_job(&job, &mut out, &mut err), EXIT_FAILURE);
        assert!(String::from_utf8(err).unwrap().starts_with("error: "));
    }
}
