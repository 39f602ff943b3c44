//! The `scd` command line: argument parsing and the five subcommands.
//!
//! Every command renders its whole output into a string so that runs are
//! reproducible byte for byte and testable in-process.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::chainfam::{families_to_chains, parse_family_file, ChainFamily, FamilyError};
use crate::fixtures;
use crate::latsum::{target_gf, total_weight};
use crate::lattice::{check_scd, enumerate, parse_chains, rank_generating_function, LatticeError};
use crate::oracle::weight_series;
use crate::ratfun::{infer_nvars, parse_expr, RationalExpr};
use crate::ratproof::{expand_atomic, prove_zero, FactorStatus, ProofReport, ProveConfig, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "scd",
    version,
    about = "Symmetric chain decompositions of L(m,n): check, sum and prove"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Instantiate families for each n and check the decomposition directly.
    Verify(VerifyArgs),
    /// Prove that the families' generating function equals the target.
    Prove(ProveArgs),
    /// Print the summed generating function of a family file.
    Sum(FamilyArg),
    /// Brute-force counts, rank polynomials and the truncated weight series.
    Oracle(OracleArgs),
    /// List L(m,n).
    Enumerate(EnumerateArgs),
}

#[derive(Debug, Args)]
pub struct FamilyArg {
    /// Family file, or `builtin:l1`, `builtin:l2`, `builtin:demo6`.
    #[arg(long)]
    pub family: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Family file, or `builtin:<name>`.
    #[arg(long, required_unless_present = "chains")]
    pub family: Option<String>,
    /// Concrete chain file to check instead of families (needs --m and --n).
    #[arg(long, conflicts_with = "family", requires = "m")]
    pub chains: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, conflicts_with = "n_range")]
    pub n: Option<u32>,
    /// Inclusive range `a..b`.
    #[arg(long, value_parser = parse_range)]
    pub n_range: Option<(u32, u32)>,
}

#[derive(Debug, Args)]
pub struct ProveArgs {
    /// Family file, or `builtin:<name>`.
    #[arg(long, required_unless_present = "expr")]
    pub family: Option<String>,
    /// Prove a rational expression file equals the target instead.
    #[arg(long, conflicts_with = "family")]
    pub expr: Option<PathBuf>,
    /// Width of the target (inferred from the input when omitted).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub budget_seconds: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: u32,
    /// Total degree of the printed weight series (default: n).
    #[arg(long)]
    pub series_depth: Option<u32>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Kv,
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let a: u32 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: u32 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty range {s}"));
    }
    Ok((a, b))
}

/// Exit code plus everything the command printed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn input_error(message: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            }
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let go = || {
        let out = match &cli.command {
            Command::Verify(a) => cmd_verify(a),
            Command::Prove(a) => cmd_prove(a),
            Command::Sum(a) => cmd_sum(a),
            Command::Oracle(a) => cmd_oracle(a),
            Command::Enumerate(a) => cmd_enumerate(a),
        };
        match (&cli.report, out.code) {
            (Some(path), EXIT_OK | EXIT_VERDICT | EXIT_BUDGET) => {
                match fs::write(path, &out.stdout) {
                    Ok(()) => out,
                    Err(e) => Outcome::input_error(format!("cannot write {}: {e}", path.display())),
                }
            }
            _ => out,
        }
    };
    match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
        {
            Ok(pool) => pool.install(go),
            Err(e) => Outcome::input_error(e),
        },
        None => go(),
    }
}

/// Reads a family file or a builtin.
pub fn load_families(spec: &str) -> Result<Vec<ChainFamily>, String> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return match fixtures::load(name) {
            Some(r) => r.map_err(|e| e.to_string()),
            None => Err(format!(
                "unknown builtin family set `{name}` (expected l1, l2 or demo6)"
            )),
        };
    }
    let text = fs::read_to_string(spec).map_err(|e| format!("cannot read {spec}: {e}"))?;
    parse_family_file(&text).map_err(|e| format!("{spec}: {e}"))
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

/// Instantiation problems are properties of the families, so they count as
/// a failed check rather than bad input.
fn is_family_defect(e: &FamilyError) -> bool {
    matches!(
        e,
        FamilyError::Malformed { .. }
            | FamilyError::NotSaturated { .. }
            | FamilyError::EmptyChain { .. }
            | FamilyError::NotAdmissible { .. }
    )
}

pub fn cmd_verify(a: &VerifyArgs) -> Outcome {
    let (lo, hi) = match (a.n, a.n_range) {
        (Some(n), _) => (n, n),
        (None, Some(r)) => r,
        (None, None) => (0, 6),
    };
    let families = match &a.family {
        Some(spec) => match load_families(spec) {
            Ok(f) => Some(f),
            Err(e) => return Outcome::input_error(e),
        },
        None => None,
    };
    let chain_text = match &a.chains {
        Some(p) => match read(p) {
            Ok(t) => Some(t),
            Err(e) => return Outcome::input_error(e),
        },
        None => None,
    };
    let m = match (a.m, &families) {
        (Some(m), _) => m,
        (None, Some(f)) if !f.is_empty() => f[0].m,
        _ => {
            return Outcome::input_error(
                "--m is required when the width cannot be read from the families",
            )
        }
    };
    let mut out = String::new();
    let mut failed = false;
    for n in lo..=hi {
        let chains = match (&families, &chain_text) {
            (Some(f), _) => match families_to_chains(f, n) {
                Ok(c) => c,
                Err(e) if is_family_defect(&e) => {
                    failed = true;
                    let _ = writeln!(out, "n={n} FAIL {e}");
                    continue;
                }
                Err(e) => return Outcome::input_error(e),
            },
            (None, Some(t)) => match parse_chains(t, n) {
                Ok(c) => c,
                Err(e) => return Outcome::input_error(e),
            },
            (None, None) => unreachable!("clap requires --family or --chains"),
        };
        match check_scd(&chains, m, n) {
            Ok(v) if v.passed() => {
                let _ = writeln!(
                    out,
                    "n={n} PASS chains={} elements={}",
                    chains.len(),
                    v.element_count
                );
            }
            Ok(v) => {
                failed = true;
                let _ = writeln!(
                    out,
                    "n={n} FAIL chains={} elements={}",
                    chains.len(),
                    v.element_count
                );
                for w in v.witnesses() {
                    let _ = writeln!(out, "  witness: {w}");
                }
            }
            Err(LatticeError::TooLarge { .. })
            | Err(LatticeError::MixedLattice { .. })
            | Err(LatticeError::ZeroWidth) => {
                return Outcome::input_error(check_scd(&chains, m, n).expect_err("same call"));
            }
            Err(e) => {
                failed = true;
                let _ = writeln!(out, "n={n} FAIL {e}");
            }
        }
    }
    let _ = writeln!(out, "{}", if failed { "FAIL" } else { "PASS" });
    Outcome {
        code: if failed { EXIT_VERDICT } else { EXIT_OK },
        stdout: out,
        stderr: String::new(),
    }
}

/// Scoreboard of a proof run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProveSummary {
    pub grouped_terms: usize,
    pub atomic_terms: usize,
    pub report: ProofReport,
}

impl ProveSummary {
    pub fn to_kv(&self) -> String {
        format!(
            "GroupedTerms={}\nAtomicTerms={}\n{}",
            self.grouped_terms,
            self.atomic_terms,
            self.report.to_kv()
        )
    }

    pub fn to_text(&self) -> String {
        let r = &self.report;
        let mut out = format!(
            "GroupedTerms={}\nAtomicTerms={}\n",
            self.grouped_terms, self.atomic_terms
        );
        let _ = writeln!(
            out,
            "TotalFactors={}, ClosedCount={}, OpenCount={}",
            r.total_factors(),
            r.closed_count(),
            r.open_count()
        );
        for (f, s) in &r.factors {
            let status = match s {
                FactorStatus::Closed => "closed".to_string(),
                FactorStatus::Pole => "pole".to_string(),
                FactorStatus::Open(reason) => format!("open ({reason})"),
            };
            let _ = writeln!(out, "  {f}: {status}");
        }
        if !r.degree_bounds.is_empty() {
            let b: Vec<String> = r.degree_bounds.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "DegreeBounds=({})", b.join(","));
        }
        let _ = writeln!(
            out,
            "GridSize={}, BadPointCount={}",
            r.grid_size, r.bad_point_count
        );
        let _ = writeln!(out, "Verdict={}", r.verdict);
        out
    }
}

/// `expr - target_gf(m)` through the prover.
pub fn prove_against_target(
    expr: &RationalExpr,
    grouped_terms: usize,
    m: usize,
    cfg: &ProveConfig,
) -> ProveSummary {
    let atomic_terms = expand_atomic(expr).len() + 1;
    let diff = expr.sub(&target_gf(m));
    ProveSummary {
        grouped_terms,
        atomic_terms,
        report: prove_zero(&diff, cfg),
    }
}

pub fn cmd_prove(a: &ProveArgs) -> Outcome {
    let cfg = ProveConfig {
        deadline: a
            .budget_seconds
            .map(|s| Instant::now() + Duration::from_secs(s)),
        ..ProveConfig::default()
    };
    let (expr, grouped, m) = match (&a.family, &a.expr) {
        (Some(spec), _) => {
            let families = match load_families(spec) {
                Ok(f) => f,
                Err(e) => return Outcome::input_error(e),
            };
            let tw = match total_weight(&families) {
                Ok(t) => t,
                Err(e) => return Outcome::input_error(e),
            };
            let m = a.m.unwrap_or(tw.m);
            if m != tw.m {
                return Outcome::input_error(format!(
                    "--m {m} does not match the families' width {}",
                    tw.m
                ));
            }
            (tw.expr(), tw.grouped_count(), m)
        }
        (None, Some(path)) => {
            let text = match read(path) {
                Ok(t) => t,
                Err(e) => return Outcome::input_error(e),
            };
            let m = a.m.unwrap_or_else(|| infer_nvars(&text).max(2) - 1);
            match parse_expr(&text, m + 1) {
                Ok(e) => {
                    let n = e.len();
                    (e, n, m)
                }
                Err(e) => return Outcome::input_error(format!("{}: {e}", path.display())),
            }
        }
        (None, None) => unreachable!("clap requires --family or --expr"),
    };
    let summary = prove_against_target(&expr, grouped, m, &cfg);
    let text = match a.format {
        Format::Text => summary.to_text(),
        Format::Kv => summary.to_kv(),
    };
    let code = match summary.report.verdict {
        Verdict::ProvedZero => EXIT_OK,
        Verdict::NotZero(_) => EXIT_VERDICT,
        Verdict::Open(_) => EXIT_BUDGET,
    };
    Outcome {
        code,
        stdout: text,
        stderr: String::new(),
    }
}

pub fn cmd_sum(a: &FamilyArg) -> Outcome {
    let families = match load_families(&a.family) {
        Ok(f) => f,
        Err(e) => return Outcome::input_error(e),
    };
    match total_weight(&families) {
        Ok(tw) => Outcome::ok(format!(
            "# grouped terms: {}\n{}",
            tw.grouped_count(),
            tw.to_text()
        )),
        Err(e) => Outcome::input_error(e),
    }
}

pub fn cmd_oracle(a: &OracleArgs) -> Outcome {
    if a.m == 0 {
        return Outcome::input_error("--m must be at least 1");
    }
    let mut out = String::new();
    let mut cumulative = 0u64;
    for n in 0..=a.n {
        let gf = match rank_generating_function(a.m, n) {
            Ok(g) => g,
            Err(e) => return Outcome::input_error(e),
        };
        let count: u64 = gf.iter().sum();
        cumulative += count;
        let coeffs: Vec<String> = gf.iter().map(u64::to_string).collect();
        let _ = writeln!(
            out,
            "n={n} count={count} cumulative={cumulative} rank_coefficients={}",
            coeffs.join(",")
        );
    }
    let depth = a.series_depth.unwrap_or(a.n);
    match weight_series(a.m, depth) {
        Ok(series) => {
            let _ = writeln!(out, "# weight series through total degree {depth}");
            let mut terms: Vec<_> = series.terms().collect();
            terms
                .sort_by_key(|(mono, _)| (mono.total_degree(), std::cmp::Reverse((*mono).clone())));
            for (mono, c) in terms {
                let _ = writeln!(out, "+{c} * {mono}");
            }
            Outcome::ok(out)
        }
        Err(e) => Outcome::input_error(e),
    }
}

pub fn cmd_enumerate(a: &EnumerateArgs) -> Outcome {
    if a.m == 0 {
        return Outcome::input_error("--m must be at least 1");
    }
    match enumerate(a.m, a.n) {
        Ok(vs) => {
            let mut out = String::new();
            for v in vs {
                let coords: Vec<String> = v.coords().iter().map(u32::to_string).collect();
                let _ = writeln!(out, "{}", coords.join(","));
            }
            Outcome::ok(out)
        }
        Err(e) => Outcome::input_error(e),
    }
}
