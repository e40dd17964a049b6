//! Command-line front end. [`run`] returns the process exit code:
//! 0 on success, 1 on a verification failure, 2 on a usage or config error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fncache_core::analysis::{
    achievable_load, converse_curve, d2d_curve, lower_convex_envelope, man_curve, private_load,
    worst_case_curve, yma_worst_curve, LoadPoint, Rational,
};
use fncache_core::combinat::choose;
use fncache_core::decoder::verify_delivery;
use fncache_core::demand::{random_demands, worst_case_demands};
use fncache_core::encoder::{build_plan, serialize_payload};
use fncache_core::gf::Field;
use fncache_core::linalg::DemandMatrix;
use fncache_core::placement::{generate_library, man_place};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::formats::{self, rational_string, PlanSummary, SimulationReport};
use crate::verify::{run_suites, Shape, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Largest number of subfiles a simulation will allocate.
const MAX_SUBFILES: u128 = 1 << 22;
/// Largest curve the `private` scheme will print.
const MAX_CURVE_POINTS: usize = 1 << 16;

#[derive(Parser, Debug)]
#[command(
    name = "fncache",
    version,
    about = "Cache-aided scalar linear function retrieval simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run placement, delivery and decoding end to end.
    Simulate(SimulateArgs),
    /// Print load-memory corner points for a scheme.
    Tradeoff(TradeoffArgs),
    /// Run randomized property suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("memory").args(["t", "m"])))]
#[command(group(clap::ArgGroup::new("size").args(["b", "s"])))]
#[command(group(clap::ArgGroup::new("source").args(["demands", "random", "worst_case"])))]
pub struct SimulateArgs {
    /// Number of users; taken from the demand file when omitted.
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of files; taken from the demand file when omitted.
    #[arg(long)]
    pub n: Option<usize>,
    /// Field order; taken from the demand file when omitted.
    #[arg(long)]
    pub q: Option<u64>,
    /// Placement parameter, each subfile cached by t users.
    #[arg(long)]
    pub t: Option<usize>,
    /// Cache memory in files, as an integer, decimal or fraction like 3/2.
    #[arg(long)]
    pub m: Option<String>,
    /// File length in symbols, a multiple of C(K,t).
    #[arg(long)]
    pub b: Option<usize>,
    /// Subfile length in symbols.
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long, env = "FN_CACHE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Demand matrix JSON file.
    #[arg(long)]
    pub demands: Option<PathBuf>,
    /// Draw every demand row uniformly (the default).
    #[arg(long)]
    pub random: bool,
    /// Use a rank-min(K,N) demand matrix.
    #[arg(long)]
    pub worst_case: bool,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the plan summary (subsets and signs) as JSON.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Write the binary delivery payload.
    #[arg(long)]
    pub payload: Option<PathBuf>,
    /// Write the generated library in binary form.
    #[arg(long)]
    pub library: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Man,
    Yma,
    Slfr,
    D2d,
    Private,
    Converse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct TradeoffArgs {
    #[arg(long, value_enum)]
    pub scheme: Scheme,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n: usize,
    /// Field order, used by the private scheme.
    #[arg(long, default_value_t = 2)]
    pub q: u64,
    /// Emit the lower convex envelope.
    #[arg(long)]
    pub envelope: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, env = "FN_CACHE_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Verification(String),
}

fn config<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_CONFIG
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(&a, stdout),
        Command::Tradeoff(a) => tradeoff(&a, stdout),
        Command::Verify(a) => verify(&a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Verification(msg)) => {
            let _ = writeln!(stderr, "verification failed: {msg}");
            EXIT_VERIFY
        }
    }
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(config),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes)
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
}

/// Parses `7`, `1.25` or `3/2` into an exact rational.
pub fn parse_memory(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        return (!den.is_zero()).then(|| Rational::new(num, den));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let digits: BigInt = format!("{whole}{frac}").parse().ok()?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        return Some(Rational::new(digits, scale));
    }
    text.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// Load at memory `m` by memory sharing along the envelope.
fn interpolate(envelope: &[LoadPoint], m: &Rational) -> Option<(Rational, usize, usize)> {
    envelope.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        (a.memory <= *m && *m <= b.memory).then(|| {
            let lambda = (m - &a.memory) / (&b.memory - &a.memory);
            (&a.load + lambda * (&b.load - &a.load), a.t, b.t)
        })
    })
}

#[derive(serde::Serialize)]
struct InterpolatedReport {
    k: usize,
    n: usize,
    memory: String,
    simulated: bool,
    load: String,
    between_t: [usize; 2],
}

fn simulate(a: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let file_demand = a
        .demands
        .as_deref()
        .map(formats::load_demands)
        .transpose()
        .map_err(config)?;
    let (k, n, q) = match &file_demand {
        Some(d) => {
            let shape = (d.rows(), d.cols(), d.field().order() as u64);
            for (flag, given, found) in [("--k", a.k, shape.0), ("--n", a.n, shape.1)] {
                if given.is_some_and(|g| g != found) {
                    return Err(Failure::Config(format!(
                        "{flag} disagrees with the demand file ({found})"
                    )));
                }
            }
            if a.q.is_some_and(|g| g != shape.2) {
                return Err(Failure::Config(format!(
                    "--q disagrees with the demand file ({})",
                    shape.2
                )));
            }
            shape
        }
        None => (
            a.k.ok_or_else(|| Failure::Config("--k is required without --demands".into()))?,
            a.n.ok_or_else(|| Failure::Config("--n is required without --demands".into()))?,
            a.q.ok_or_else(|| Failure::Config("--q is required without --demands".into()))?,
        ),
    };
    if k == 0 || n == 0 {
        return Err(Failure::Config("K and N must be positive".into()));
    }
    if k > 64 {
        return Err(Failure::Config("at most 64 users are supported".into()));
    }
    let field = Field::new(q).map_err(config)?;

    let t = match (a.t, &a.m) {
        (Some(t), _) => t,
        (None, Some(m)) => {
            let m = parse_memory(m)
                .ok_or_else(|| Failure::Config(format!("cannot parse --m {m:?}")))?;
            let kt = &m * Rational::from_integer(BigInt::from(k))
                / Rational::from_integer(BigInt::from(n));
            if m < Rational::zero() || m > Rational::from_integer(BigInt::from(n)) {
                return Err(Failure::Config(format!("--m must lie in [0, {n}]")));
            }
            if kt.is_integer() {
                kt.to_integer().to_usize().expect("bounded by K")
            } else {
                let env = lower_convex_envelope(&worst_case_curve(k, n)).map_err(config)?;
                let (load, lo, hi) = match interpolate(&env, &m) {
                    Some(x) => x,
                    None => {
                        let last = env.last().expect("nonempty");
                        (last.load.clone(), last.t, last.t)
                    }
                };
                let report = InterpolatedReport {
                    k,
                    n,
                    memory: rational_string(&m),
                    simulated: false,
                    load: rational_string(&load),
                    between_t: [lo, hi],
                };
                let text = serde_json::to_string_pretty(&report).map_err(config)? + "\n";
                return emit(a.out.as_deref(), &text, stdout);
            }
        }
        (None, None) => return Err(Failure::Config("one of --t or --m is required".into())),
    };
    if t > k {
        return Err(Failure::Config(format!("--t must lie in 0..={k}")));
    }
    let subfiles = choose(k, t);
    if subfiles > MAX_SUBFILES {
        return Err(Failure::Config(format!(
            "C({k},{t}) subfiles is too many to simulate"
        )));
    }
    let subfiles = subfiles as usize;
    let b = match (a.b, a.s) {
        (Some(b), _) => b,
        (None, Some(s)) => s
            .checked_mul(subfiles)
            .ok_or_else(|| Failure::Config("file length overflows".into()))?,
        (None, None) => subfiles,
    };
    if b == 0 || b % subfiles != 0 {
        return Err(Failure::Config(format!(
            "--b must be a positive multiple of C({k},{t}) = {subfiles}"
        )));
    }

    let demand: DemandMatrix = match file_demand {
        Some(d) => d,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            rng.set_stream(1);
            if a.worst_case {
                worst_case_demands(&field, k, n, &mut rng)
            } else {
                random_demands(&field, k, n, &mut rng)
            }
        }
    };

    let lib = generate_library(&field, n, b, k, t, a.seed).map_err(config)?;
    let caches = man_place(&lib);
    let rank = demand.rank();
    let plan = build_plan(&lib, demand).map_err(config)?;
    let report =
        verify_delivery(&lib, &plan, &caches).map_err(|e| Failure::Verification(e.to_string()))?;

    let expected = choose(k, t + 1) - choose(k - rank, t + 1);
    let sent = plan.messages().len();
    let load = Rational::new(BigInt::from(sent), BigInt::from(subfiles));
    let success = report.success() && sent as u128 == expected;
    let summary = SimulationReport {
        q: field.order(),
        k,
        n,
        t,
        b,
        subfile_len: plan.subfile_len(),
        seed: a.seed,
        memory: rational_string(&Rational::new(BigInt::from(n * t), BigInt::from(k))),
        rank,
        leaders: plan.leaders().users().to_vec(),
        messages: sent,
        expected_messages: expected.to_string(),
        load: rational_string(&load),
        formula_load: rational_string(&achievable_load(k, t, rank)),
        users: SimulationReport::user_lines(&plan, &report),
        residuals: SimulationReport::residual_lines(&report),
        success,
    };

    if let Some(p) = &a.library {
        let mut bytes = Vec::new();
        formats::write_library(&lib, &mut bytes).map_err(config)?;
        write_file(p, &bytes)?;
    }
    if let Some(p) = &a.plan {
        let text = serde_json::to_string_pretty(&PlanSummary::new(&plan)).map_err(config)? + "\n";
        write_file(p, text.as_bytes())?;
    }
    if let Some(p) = &a.payload {
        write_file(p, &serialize_payload(&plan))?;
    }
    let text = serde_json::to_string_pretty(&summary).map_err(config)? + "\n";
    emit(a.out.as_deref(), &text, stdout)?;
    if success {
        Ok(())
    } else {
        let bad: Vec<usize> = report
            .users
            .iter()
            .filter(|u| !u.matches)
            .map(|u| u.user)
            .collect();
        Err(Failure::Verification(format!(
            "{sent} messages (expected {expected}), users failing to decode: {bad:?}"
        )))
    }
}

fn tradeoff(a: &TradeoffArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    if a.k == 0 || a.n == 0 {
        return Err(Failure::Config("--k and --n must be positive".into()));
    }
    if a.k > 4096 {
        return Err(Failure::Config("--k must not exceed 4096".into()));
    }
    let points = match a.scheme {
        Scheme::Man => man_curve(a.k, a.n),
        Scheme::Yma => yma_worst_curve(a.k, a.n),
        Scheme::Slfr => worst_case_curve(a.k, a.n),
        Scheme::Converse => converse_curve(a.k, a.n),
        Scheme::D2d => d2d_curve(a.k, a.n),
        Scheme::Private => {
            let field = Field::new(a.q).map_err(config)?;
            let users =
                fncache_core::analysis::canonical_count(field.order(), a.n) * BigInt::from(a.k);
            let users = users
                .to_usize()
                .filter(|&u| u <= MAX_CURVE_POINTS)
                .ok_or_else(|| {
                    Failure::Config(format!(
                        "private curve with {users} virtual users is too long"
                    ))
                })?;
            (1..=users)
                .map(|t| private_load(a.k, a.n, field.order(), t))
                .collect::<Result<Vec<_>, _>>()
                .map_err(config)?
        }
    };
    let envelope = if a.envelope {
        Some(lower_convex_envelope(&points).map_err(config)?)
    } else {
        None
    };
    let text = match a.format {
        Format::Csv => formats::curve_csv(envelope.as_deref().unwrap_or(&points)),
        Format::Json => formats::curve_json(&points, envelope.as_deref()),
    };
    emit(a.out.as_deref(), &text, stdout)
}

fn verify(a: &VerifyArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    if a.trials == 0 {
        return Err(Failure::Config("--trials must be at least 1".into()));
    }
    let shape = Shape {
        k: a.k,
        n: a.n,
        q: a.q,
        t: a.t,
    };
    shape.validate(&a.suite.expand()).map_err(Failure::Config)?;
    let summary = run_suites(a.suite, &shape, a.trials, a.seed);
    let text = serde_json::to_string_pretty(&summary).map_err(config)? + "\n";
    emit(a.out.as_deref(), &text, stdout)?;
    if summary.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = summary
            .suites
            .iter()
            .filter(|s| !s.passed)
            .map(|s| s.suite)
            .collect();
        Err(Failure::Verification(format!(
            "suites {failed:?} found violations"
        )))
    }
}
