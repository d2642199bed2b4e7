use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polyprog_cli::{run_command, CliError, Mode, Params};

#[derive(Parser)]
#[command(name = "polyprog", version, about = "Polynomial progressions in primes: local factors, majorants, Gowers norms, PET")]
struct Cli {
    /// Flat key = value parameter file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// exact or sampled
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Extra parameters, KEY=VALUE; may repeat.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// c_p and c̄_p of a family over F_p.
    Localfactor(LocalArgs),
    /// Good, bad and terrible primes up to a cutoff.
    ClassifyPrimes(ClassifyArgs),
    /// Statistics of the sieve majorant.
    NuStats(NuArgs),
    /// Averaged local Gowers norm.
    GowersNorm(GowersArgs),
    /// PET linearization trace.
    PetLinearize(PetArgs),
    /// Energy-increment decomposition of the prime weight.
    Decompose(DecomposeArgs),
    /// Exact progression count with witnesses.
    CountProgressions(CountArgs),
    /// Observed count against the singular-series prediction.
    Correlation(CorrelationArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct LocalArgs {
    #[arg(long)]
    p: Option<String>,
    /// Polynomials separated by ';'.
    #[arg(long)]
    poly: Option<String>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    poly: Option<String>,
    #[arg(long)]
    cutoff: Option<String>,
}

#[derive(Args)]
struct NuArgs {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    w: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    h: Option<String>,
}

#[derive(Args)]
struct GowersArgs {
    #[arg(long)]
    n: Option<String>,
    /// Comma-separated constant steps.
    #[arg(long)]
    steps: Option<String>,
    /// Linearize this family and use its steps instead.
    #[arg(long)]
    polys: Option<String>,
    #[arg(long = "sqrt-m")]
    sqrt_m: Option<String>,
    /// random or primes
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    samples: Option<String>,
}

#[derive(Args)]
struct PetArgs {
    #[arg(long)]
    polys: Option<String>,
    #[arg(long = "max-nodes")]
    max_nodes: Option<String>,
    /// Id of the distinguished node, counted from 1.
    #[arg(long)]
    distinguished: Option<String>,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    eta4: Option<String>,
    #[arg(long)]
    eta5: Option<String>,
    #[arg(long)]
    polys: Option<String>,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long)]
    polys: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    witnesses: Option<String>,
}

#[derive(Args)]
struct CorrelationArgs {
    #[arg(long)]
    polys: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    cutoff: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated criterion ids.
    #[arg(long)]
    only: Option<String>,
}

impl Command {
    fn split(self) -> (&'static str, Vec<(&'static str, Option<String>)>) {
        match self {
            Command::Localfactor(a) => ("localfactor", vec![("p", a.p), ("poly", a.poly)]),
            Command::ClassifyPrimes(a) => ("classify-primes", vec![("poly", a.poly), ("cutoff", a.cutoff)]),
            Command::NuStats(a) => ("nu-stats", vec![("n", a.n), ("w", a.w), ("r", a.r), ("m", a.m), ("h", a.h)]),
            Command::GowersNorm(a) => (
                "gowers-norm",
                vec![
                    ("n", a.n),
                    ("steps", a.steps),
                    ("polys", a.polys),
                    ("sqrt_m", a.sqrt_m),
                    ("input", a.input),
                    ("samples", a.samples),
                ],
            ),
            Command::PetLinearize(a) => (
                "pet-linearize",
                vec![("polys", a.polys), ("max_nodes", a.max_nodes), ("distinguished", a.distinguished)],
            ),
            Command::Decompose(a) => {
                ("decompose", vec![("n", a.n), ("eta4", a.eta4), ("eta5", a.eta5), ("polys", a.polys)])
            }
            Command::CountProgressions(a) => (
                "count-progressions",
                vec![("polys", a.polys), ("n", a.n), ("m", a.m), ("witnesses", a.witnesses)],
            ),
            Command::Correlation(a) => {
                ("correlation", vec![("polys", a.polys), ("n", a.n), ("m", a.m), ("cutoff", a.cutoff)])
            }
            Command::Verify(a) => ("verify", vec![("only", a.only)]),
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Ok(threads) = std::env::var("POLYPROG_THREADS") {
        let n: usize = threads.parse().map_err(|e| CliError::Usage(format!("POLYPROG_THREADS: {e}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let mut params = match &cli.config {
        Some(path) => Params::load(path)?,
        None => Params::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {kv}")))?;
        params.set(k.trim(), v.trim());
    }
    let (name, flags) = cli.command.split();
    for (k, v) in flags {
        if let Some(v) = v {
            params.set(k, v);
        }
    }
    if let Some(seed) = cli.seed {
        params.set("seed", seed.to_string());
    }
    if let Some(mode) = &cli.mode {
        params.set("mode", mode.clone());
    }
    if let Some(out) = &cli.out {
        params.set("out", out.display().to_string());
    }
    let seed: u64 = params.get("seed", polyprog::acceptance::SuiteConfig::default().seed)?;
    let mode: Mode = params.get_str("mode", "exact").parse()?;
    // not part of the resolved config, so the output location cannot change report bytes
    let out = PathBuf::from(params.get_opt("out").unwrap_or_else(|| "reports".into()));
    let outcome = run_command(name, &mut params, seed, mode)?;
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let timings: serde_json::Map<String, serde_json::Value> =
        outcome.timings.iter().map(|(k, v)| (k.clone(), serde_json::json!(v))).collect();
    let meta = serde_json::json!({
        "command": name,
        "unix_time": stamp,
        "elapsed_seconds": timings,
        "passed": outcome.ok,
    });
    let mut report = outcome.report;
    report.config.remove("out");
    for path in report.write(&out, &meta)? {
        println!("{}", path.display());
    }
    for row in report.rows.iter().filter(|r| r.quantity.ends_with(".passed")) {
        println!("{} {}", if row.value == Some(1.0) { "PASS" } else { "FAIL" }, row.note);
    }
    Ok(outcome.ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
