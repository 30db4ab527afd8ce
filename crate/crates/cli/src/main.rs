use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dioph_core::boxsolver::{self, SearchBox, SolutionSet, SolveOptions, DEFAULT_NODE_BUDGET};
use dioph_core::census::{self, RatioRow};
use dioph_core::eqdsl::{self, System};
use dioph_core::explorer::{self, ScanReport};
use dioph_core::families;
use dioph_core::numtheory::{self, Factorizer, DEFAULT_RHO_BUDGET};
use dioph_core::reduction;
use dioph_core::Error;
use num_bigint::{BigInt, BigUint};
use serde_json::json;

const SYSTEM_FORMAT: &str = "\
System file format (UTF-8):
  # comment
  vars 4
  x2 + 1 = x1
  x3 + 1 = x2
  x3 * x4 = x1
One `vars <n>` line, then one equation per line of the form
`xi + xj = xk`, `xi * xj = xk` or `xi + 1 = xk` with 1 <= i, j, k <= n.";

const POLY_FORMAT: &str = "\
Polynomial file format:
  # comment
  vars 2
  x1^2 - 4 + 3*x1*x2
Terms joined by `+`/`-`; each term is an optional integer coefficient and
`*`-separated factors `x<i>` or `x<i>^<e>`. The optional `vars <n>` line sets
the variable count when it exceeds the largest index used.";

const TABLE_FORMAT: &str = "\
Factor table format, one entry per line, `#` starts a comment:
  18 : 2 * 3^2
  9223372036854775809 : 3^3 * 19 * 43 * 5419 * 77158673929
Every listed prime is re-tested and every product recomputed on load.";

/// Diophantine equation systems: generation, box search, solution counts.
#[derive(Parser)]
#[command(name = "dioph", version, after_help = TABLE_FORMAT)]
struct Cli {
    /// Factor table consulted before Pollard rho.
    #[arg(long, global = true, env = "DIOPH_FACTOR_TABLE")]
    factor_table: Option<PathBuf>,
    /// Pollard rho iteration budget per factorization.
    #[arg(long, global = true, env = "DIOPH_RHO_BUDGET", default_value_t = DEFAULT_RHO_BUDGET,
          value_parser = clap::value_parser!(u64).range(1..))]
    rho_budget: u64,
    /// Solver budget (propagation passes plus branches) per search.
    #[arg(long, global = true, env = "DIOPH_NODE_BUDGET", default_value_t = DEFAULT_NODE_BUDGET,
          value_parser = clap::value_parser!(u64).range(1..))]
    node_budget: u64,
    /// Worker threads for the box solver.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    threads: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    #[value(name = "B")]
    B,
    #[value(name = "T")]
    T,
    #[value(name = "S")]
    S,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountFamily {
    #[value(name = "B")]
    B,
    #[value(name = "T")]
    T,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Formula,
    Brute,
}

#[derive(Subcommand)]
enum Command {
    /// Print a system of the B, T or S family.
    #[command(after_help = SYSTEM_FORMAT)]
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        /// Write to FILE instead of standard output.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Enumerate the integer solutions of a system inside a box.
    #[command(after_help = SYSTEM_FORMAT)]
    Solve(SolveArgs),
    /// Number of integer solutions of B_n or T_n.
    Count {
        #[arg(long, value_enum)]
        family: CountFamily,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "formula")]
        method: Method,
        /// Box radius for `--method brute`; defaults to the family's height bound.
        #[arg(long)]
        bound: Option<BigInt>,
    },
    /// Table of t_n, b_n and t_n / b_n.
    Ratio {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        /// Significant digits of the ratio.
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
        digits: u32,
        /// One JSON object per row.
        #[arg(long)]
        json: bool,
    },
    /// Number-theoretic functions.
    Nt {
        #[command(subcommand)]
        op: NtOp,
    },
    /// Build the equation whose solution count exceeds the height of every root.
    #[command(after_help = POLY_FORMAT)]
    Reduce {
        #[arg(long)]
        poly: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Desk-scale verification of the height bounds.
    Verify {
        #[command(subcommand)]
        what: VerifyOp,
    },
    /// Search small successor/product systems for solutions above the height bound.
    Explore {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        max_eqs: usize,
        /// Box limit L for positive solutions; defaults to twice the bound.
        #[arg(long)]
        limit: Option<BigUint>,
        /// One JSON object per listed system, then one for the totals.
        #[arg(long)]
        json: bool,
    },
    /// Checks that need a factor table.
    Check {
        #[command(subcommand)]
        what: CheckOp,
    },
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    system: PathBuf,
    /// Search `[-B, B]^n` (or `[1, B]^n` with `--positive`).
    #[arg(long, required_unless_present = "annulus", conflicts_with = "annulus")]
    bound: Option<BigInt>,
    /// Decide whether some solution in `[-B2, B2]^n` has a coordinate above B1 in absolute value.
    #[arg(long, num_args = 2, value_names = ["B1", "B2"])]
    annulus: Option<Vec<BigInt>>,
    /// Print every solution, not only the count.
    #[arg(long)]
    list: bool,
    #[arg(long, conflicts_with = "annulus")]
    positive: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum NtOp {
    /// Representations as a sum of three squares.
    R3 { n: BigUint },
    /// Representations as a sum of four squares.
    R4 { n: BigUint },
    /// Sum of divisors.
    Sigma { n: BigUint },
    /// Prime factorization.
    Factor { n: BigUint },
}

#[derive(Subcommand)]
enum VerifyOp {
    /// Solution count of the reduced equation versus the largest root height.
    #[command(after_help = POLY_FORMAT)]
    Lemma2 {
        #[arg(long)]
        poly: PathBuf,
        /// Roots are searched in `[-B, B]^n`.
        #[arg(long = "box")]
        x_box: u32,
    },
    /// S_n: positive solution, empty annulus, unique maximal solution.
    Thm4 {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        slack: u32,
    },
}

#[derive(Subcommand)]
enum CheckOp {
    /// Lower bound for t_20 / b_20 against 2.75e9748.
    #[command(after_help = TABLE_FORMAT)]
    T20 {
        #[arg(long)]
        table: PathBuf,
    },
}

struct Ctx {
    oracle: Factorizer,
    opts: SolveOptions,
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(e.into())
    }
}

type Out = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(text: &str, output: Option<&Path>) -> Out {
    match output {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(0)
}

fn strs(v: &[BigInt]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn load_system(path: &Path) -> Result<System, Failure> {
    let s = eqdsl::parse_system(&read(path)?)?;
    if let Some(v) = eqdsl::validate(&s).first() {
        return Err(Failure::Usage(format!("{}: invalid system: {v:?}", path.display())));
    }
    Ok(s)
}

fn solve(args: &SolveArgs, ctx: &Ctx) -> Out {
    let s = load_system(&args.system)?;
    if let Some(pair) = &args.annulus {
        let empty = boxsolver::annulus_empty(&s, &pair[0], &pair[1], &ctx.opts)?;
        if args.json {
            println!("{}", json!({"inner": pair[0].to_string(), "outer": pair[1].to_string(), "empty": empty}));
        } else {
            println!("annulus ({}, {}] empty={empty}", pair[0], pair[1]);
        }
        return Ok(0);
    }
    let bound = args.bound.as_ref().expect("required by clap");
    if bound < &BigInt::from(0) {
        return Err(Failure::Usage("--bound must be non-negative".into()));
    }
    let b = if args.positive {
        SearchBox::positive(s.var_count, bound)
    } else {
        SearchBox::symmetric(s.var_count, bound)
    };
    let set: SolutionSet = boxsolver::solve_box(&s, &b, &ctx.opts)?;
    if args.json {
        let mut obj = json!({
            "count": set.len(),
            "box": set.search_box.domains.iter().map(|(lo, hi)| [lo.to_string(), hi.to_string()]).collect::<Vec<_>>(),
            "complete_within_box": set.complete_within_box,
        });
        if args.list {
            obj["solutions"] = json!(set.solutions.iter().map(|v| strs(v)).collect::<Vec<_>>());
        }
        println!("{obj}");
    } else {
        print!("{}", set.render(args.list));
    }
    Ok(0)
}

fn count(family: CountFamily, n: usize, method: Method, bound: Option<BigInt>, ctx: &Ctx) -> Out {
    let value = match method {
        Method::Formula => match family {
            CountFamily::B => census::b_count(n, &ctx.oracle)?,
            CountFamily::T => census::t_count(n, &ctx.oracle)?,
        },
        Method::Brute => {
            let (system, default) = match family {
                CountFamily::B => (families::gen_b(n)?, census::b_height_bound(n)?),
                CountFamily::T => (families::gen_t(n)?, census::t_height_bound(n)?),
            };
            let bound = bound.unwrap_or_else(|| default.into());
            let b = SearchBox::symmetric(system.var_count, &bound);
            BigUint::from(boxsolver::solve_box(&system, &b, &ctx.opts)?.len())
        }
    };
    println!("{value}");
    Ok(0)
}

fn row_json(r: &RatioRow) -> serde_json::Value {
    json!({
        "n": r.n,
        "t": r.t_n.as_ref().map(ToString::to_string),
        "b": r.b_n.as_ref().map(ToString::to_string),
        "ratio": r.approx,
        "complete": r.is_complete(),
        "error": r.error,
    })
}

fn ratio(from: usize, to: usize, digits: u32, as_json: bool, ctx: &Ctx) -> Out {
    let rows = census::ratio_table(from, to, digits, &ctx.oracle)?;
    let mut out = io::stdout().lock();
    for r in &rows {
        if as_json {
            writeln!(out, "{}", row_json(r))?;
        } else {
            writeln!(out, "{r}")?;
        }
    }
    let incomplete: Vec<&RatioRow> = rows.iter().filter(|r| !r.is_complete()).collect();
    for r in &incomplete {
        eprintln!("n={}: {}", r.n, r.error.as_deref().unwrap_or(""));
    }
    Ok(if incomplete.is_empty() { 0 } else { 2 })
}

fn nt(op: &NtOp, ctx: &Ctx) -> Out {
    let text = match op {
        NtOp::R3 { n } => numtheory::r3_exact(n, &ctx.oracle)?.to_string(),
        NtOp::R4 { n } => numtheory::r4(n, &ctx.oracle)?.to_string(),
        NtOp::Sigma { n } | NtOp::Factor { n } if n == &BigUint::from(0u32) => {
            return Err(Failure::Usage("N must be positive".into()))
        }
        NtOp::Sigma { n } => numtheory::sigma(&ctx.oracle.factorize(n)?).to_string(),
        NtOp::Factor { n } => ctx.oracle.factorize(n)?.to_string(),
    };
    println!("{text}");
    Ok(0)
}

fn scan_json(report: &ScanReport) -> String {
    let mut out = String::new();
    for e in report.listed() {
        let obj = json!({
            "status": e.status.name(),
            "system": e.system.one_line(),
            "witnesses": e.witnesses().iter().map(|w| strs(w)).collect::<Vec<_>>(),
        });
        out.push_str(&format!("{obj}\n"));
    }
    let totals = json!({
        "n": report.n,
        "max_eqs": report.max_eqs,
        "limit": report.limit.to_string(),
        "systems": report.entries.len() + report.truncated.len(),
        "totals": report.totals(),
        "truncated": report.truncated.iter().map(System::one_line).collect::<Vec<_>>(),
    });
    out.push_str(&format!("{totals}\n"));
    out
}

fn run(cli: Cli) -> Out {
    let table = match &cli.factor_table {
        Some(p) => Some(numtheory::load_factor_table(p)?),
        None => None,
    };
    let ctx = Ctx {
        oracle: Factorizer::new(table, cli.rho_budget),
        opts: SolveOptions {
            node_budget: cli.node_budget,
            threads: cli.threads as usize,
        },
    };
    match cli.command {
        Command::Gen { family, n, output } => {
            let s = match family {
                Family::B => families::gen_b(n)?,
                Family::T => families::gen_t(n)?,
                Family::S => families::gen_s(n)?,
            };
            emit(&eqdsl::render_system(&s), output.as_deref())
        }
        Command::Solve(args) => solve(&args, &ctx),
        Command::Count {
            family,
            n,
            method,
            bound,
        } => count(family, n, method, bound, &ctx),
        Command::Ratio {
            from,
            to,
            digits,
            json,
        } => ratio(from, to, digits, json, &ctx),
        Command::Nt { op } => nt(&op, &ctx),
        Command::Reduce { poly, output } => {
            let p = reduction::parse_poly(&read(&poly)?)?;
            let reduced = reduction::build_lemma2(&p);
            emit(&reduction::render_reduced(&reduced, p.var_count()), output.as_deref())
        }
        Command::Verify {
            what: VerifyOp::Lemma2 { poly, x_box },
        } => {
            let p = reduction::parse_poly(&read(&poly)?)?;
            print!("{}", reduction::verify_lemma2(&p, x_box)?);
            Ok(0)
        }
        Command::Verify {
            what: VerifyOp::Thm4 { n, slack },
        } => {
            print!("{}", census::verify_theorem4(n, slack, &ctx.opts)?);
            Ok(0)
        }
        Command::Explore {
            n,
            max_eqs,
            limit,
            json,
        } => {
            let limit = match limit {
                Some(l) => l,
                None => explorer::default_limit(n)?,
            };
            let report = explorer::conjecture_scan(n, max_eqs, &limit, &ctx.opts)?;
            if json {
                print!("{}", scan_json(&report));
            } else {
                print!("{report}");
            }
            Ok(if report.truncated.is_empty() { 0 } else { 3 })
        }
        Command::Check {
            what: CheckOp::T20 { table },
        } => {
            let oracle = Factorizer::new(Some(numtheory::load_factor_table(&table)?), cli.rho_budget);
            print!("{}", census::t20_check(&oracle)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::FactorizationIncomplete { .. } => 2,
                Error::BudgetExceeded { .. } => 3,
                _ => 1,
            })
        }
    }
}
