//! Command implementations behind the `polyprog` binary.

pub mod config;
pub mod report;

use std::time::Instant;

use num_traits::ToPrimitive;
use polyprog::acceptance::{self, CriterionResult, SuiteConfig};
use polyprog::cyclic::CyclicFn;
use polyprog::gowers::{avg_local_gowers, GowersSpec};
use polyprog::localfactors::{complementary_factor, local_factor};
use polyprog::pet::{linearize_with_cap, make_system, PolySystem, DEFAULT_MAX_NODES};
use polyprog::polyalg::{classify_prime, is_prime, parse_family, MultiPoly, PrimeTag};
use polyprog::progressions::{count_progressions, singular_series, ProgressionSpec};
use polyprog::sieve::{
    check_majorization, nu, params_from_n, primorial_below, prime_weight_f, CutoffChi, EstimatorMode, PrimeSet, PrimeTable, Scales,
};
use polyprog::structure::{knvn_decompose, DecomposeParams, DEFAULT_C};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use config::Params;
pub use report::{Report, ReportRow};

pub const COMMANDS: [&str; 9] = [
    "localfactor",
    "classify-primes",
    "nu-stats",
    "gowers-norm",
    "pet-linearize",
    "decompose",
    "count-progressions",
    "correlation",
    "verify",
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Poly(#[from] polyprog::polyalg::PolyError),
    #[error(transparent)]
    Local(#[from] polyprog::localfactors::LocalError),
    #[error(transparent)]
    Sieve(#[from] polyprog::sieve::SieveError),
    #[error(transparent)]
    Gowers(#[from] polyprog::gowers::GowersError),
    #[error(transparent)]
    Pet(#[from] polyprog::pet::PetError),
    #[error(transparent)]
    Structure(#[from] polyprog::structure::StructureError),
    #[error(transparent)]
    Progression(#[from] polyprog::progressions::ProgressionError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Sampled,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Sampled => "sampled",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "exact" => Ok(Mode::Exact),
            "sampled" => Ok(Mode::Sampled),
            other => Err(CliError::Usage(format!("mode must be exact or sampled, got {other}"))),
        }
    }
}

pub struct Outcome {
    pub report: Report,
    /// False when a checked assertion failed.
    pub ok: bool,
    pub timings: Vec<(String, f64)>,
}

pub fn run_command(command: &str, params: &mut Params, seed: u64, mode: Mode) -> Result<Outcome, CliError> {
    let mut report = Report::new(command, seed, mode.name());
    let mut timings = Vec::new();
    let start = Instant::now();
    let ok = match command {
        "localfactor" => localfactor(params, &mut report)?,
        "classify-primes" => classify_primes(params, &mut report)?,
        "nu-stats" => nu_stats(params, &mut report)?,
        "gowers-norm" => gowers_norm(params, &mut report, seed, mode)?,
        "pet-linearize" => pet_linearize(params, &mut report)?,
        "decompose" => decompose(params, &mut report, seed)?,
        "count-progressions" => count(params, &mut report)?,
        "correlation" => correlation(params, &mut report)?,
        "verify" => {
            let cfg = suite_config(params, seed)?;
            let ids = only_ids(params)?;
            let results = acceptance::run_suite(&cfg, &ids);
            for r in &results {
                timings.push((format!("c{}", r.id), r.elapsed.as_secs_f64()));
            }
            verify_rows(&mut report, &results);
            results.iter().all(|r| r.passed)
        }
        other => {
            return Err(CliError::Usage(format!("unknown command {other}; expected one of {}", COMMANDS.join(", "))))
        }
    };
    timings.push(("total".into(), start.elapsed().as_secs_f64()));
    report.config = params.resolved().clone();
    Ok(Outcome { report, ok, timings })
}

fn family_in_m(src: &str) -> Result<Vec<MultiPoly>, CliError> {
    Ok(parse_family(src, Some(&["m"]))?.polys)
}

fn rational_row(report: &mut Report, q: &str, r: &num_rational::BigRational) {
    report.push(q, r.to_f64().unwrap_or(f64::NAN)).note = r.to_string();
}

fn tag_name(tag: PrimeTag) -> &'static str {
    match tag {
        PrimeTag::Good => "good",
        PrimeTag::BadNotTerrible => "bad",
        PrimeTag::Terrible => "terrible",
    }
}

fn localfactor(params: &mut Params, report: &mut Report) -> Result<bool, CliError> {
    let p: u64 = params.get("p", 5)?;
    let src = params.get_str("poly", "x^2+1");
    let fam = parse_family(&src, None)?;
    rational_row(report, "c_p", &local_factor(p, &fam.polys)?);
    rational_row(report, "c_bar_p", &complementary_factor(p, &fam.polys)?);
    let class = classify_prime(p, &fam.polys)?;
    report.push_note("class", format!("{} {}", tag_name(class.tag), class.witness));
    Ok(true)
}

fn classify_primes(params: &mut Params, report: &mut Report) -> Result<bool, CliError> {
    let src = params.get_str("poly", "x + m; x + m^2");
    let cutoff: u64 = params.get("cutoff", 50)?;
    let fam = parse_family(&src, None)?;
    for p in (2..=cutoff).filter(|&p| is_prime(p)) {
        let class = classify_prime(p, &fam.polys)?;
        let code = match class.tag {
            PrimeTag::Good => 0.0,
            PrimeTag::BadNotTerrible => 1.0,
            PrimeTag::Terrible => 2.0,
        };
        report.push(format!("p={p}"), code).note = format!("{} {}", tag_name(class.tag), class.witness);
    }
    Ok(true)
}

/// Covers every `W x + b` with `x ≤ n`.
fn table_for(n: u64, w: u64) -> Result<PrimeTable, CliError> {
    let big_w = primorial_below(w);
    Ok(PrimeTable::build(big_w * (n + 1))?)
}

fn nu_stats(params: &mut Params, report: &mut Report) -> Result<bool, CliError> {
    let n: u64 = params.get("n", 50_000)?;
    let w: u64 = params.get("w", 5)?;
    let r: f64 = params.get("r", (n as f64).powf(0.25))?;
    let m: u64 = params.get("m", (n as f64).sqrt() as u64)?;
    let h: u64 = params.get("h", 2)?;
    let table = table_for(n, w)?;
    let sieve = params_from_n(n, w, &Scales::Direct { m, r, h }, &PrimeSet::All, &table)?;
    let chi = CutoffChi::default();
    let nu_fn = nu(&sieve, &chi, &table)?;
    let f = prime_weight_f(&sieve, &PrimeSet::All, &table)?;
    let majorized = check_majorization(&f, &nu_fn).is_ok();
    report.push("W", sieve.big_w as f64);
    report.push("b", sieve.b as f64);
    report.push("R", sieve.r);
    report.push("mean_nu", nu_fn.mean()).note = "target 1".into();
    report.push("min_nu", nu_fn.values().iter().copied().fold(f64::INFINITY, f64::min));
    report.push("max_nu", nu_fn.max_abs());
    report.push("mean_f", f.mean());
    report.push("f_le_nu", majorized as u8 as f64);
    report.push("chi_derivative_energy", chi.energy());
    for warning in &sieve.warnings {
        report.push_note("warning", warning.clone());
    }
    Ok(majorized)
}

fn parse_steps(src: &str) -> Result<Vec<i64>, CliError> {
    src.split(',')
        .map(|s| s.trim().parse().map_err(|e| CliError::Usage(format!("bad step {s:?}: {e}"))))
        .collect()
}

fn gowers_norm(params: &mut Params, report: &mut Report, seed: u64, mode: Mode) -> Result<bool, CliError> {
    let n: usize = params.get("n", 64)?;
    let sqrt_m: u64 = params.get("sqrt_m", 4)?;
    let input = params.get_str("input", "random");
    let spec = match params.get_opt("polys") {
        Some(src) => {
            let h: u64 = params.get("h", 2)?;
            let w: i64 = params.get("w_value", 1)?;
            let max_nodes: usize = params.get("max_nodes", DEFAULT_MAX_NODES)?;
            linearize_with_cap(&make_system(&family_in_m(&src)?, true)?, max_nodes)?.gowers_spec(h, w, sqrt_m)?
        }
        None => GowersSpec::constant_steps(&parse_steps(&params.get_str("steps", "1,2"))?, sqrt_m)?,
    };
    let f = match input.as_str() {
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            CyclicFn::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        }
        "primes" => CyclicFn::from_fn(n, |x| is_prime(x as u64) as u8 as f64),
        other => return Err(CliError::Usage(format!("input must be random or primes, got {other}"))),
    };
    let est_mode = match mode {
        Mode::Exact => EstimatorMode::Exact,
        Mode::Sampled => EstimatorMode::Sampled { samples: params.get("samples", 10_000)?, seed },
    };
    let est = avg_local_gowers(&f, &spec, est_mode)?;
    report.push("d", spec.d() as f64);
    report.push("power", est.power);
    report.push("norm", est.norm);
    if let Some(se) = est.std_error {
        report.push("power_std_error", se);
    }
    report.push("evaluations", est.evaluations as f64);
    report.push("degenerate", est.degenerate as u8 as f64);
    Ok(true)
}

fn pet_linearize(params: &mut Params, report: &mut Report) -> Result<bool, CliError> {
    let src = params.get_str("polys", "0; m; m^2");
    let max_nodes: usize = params.get("max_nodes", DEFAULT_MAX_NODES)?;
    let distinguished: usize = params.get("distinguished", 1)?;
    let w_form: bool = params.get("w_form", true)?;
    let base = make_system(&family_in_m(&src)?, w_form)?;
    let nodes = base.nodes().iter().map(|n| (n.label.clone(), n.poly.clone(), n.active)).collect();
    let sys = PolySystem::new(0, nodes, distinguished)?;
    let res = linearize_with_cap(&sys, max_nodes)?;
    let mut cur = sys;
    for (k, step) in res.steps.iter().enumerate() {
        let k = k + 1;
        report.push(format!("step{k}.target"), step.target as f64).note = step.target_label.clone();
        report.push(format!("step{k}.reference"), step.reference as f64);
        report.push_note(format!("step{k}.weight_before"), step.weight_before.to_string());
        report.push_note(format!("step{k}.weight_after"), step.weight_after.to_string());
        report.push(format!("step{k}.nodes"), step.nodes_after as f64);
        cur = polyprog::pet::vdc_step(&cur, step.target)?.0;
        let names = cur.var_names();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        for node in cur.nodes() {
            let state = if node.active { "active" } else { "inactive" };
            report.push_note(format!("step{k}.node.{}", node.label), format!("{} {state}", node.poly.display_with(&refs)));
        }
    }
    let names = res.var_names();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    report.push("steps", res.steps.len() as f64);
    report.push("d", res.qvec.len() as f64);
    report.push("t", res.t as f64);
    for (i, b) in res.b.iter().enumerate() {
        report.push_note(format!("b[{i}]"), b.display_with(&refs));
    }
    Ok(res.steps.iter().all(|s| s.weight_after < s.weight_before))
}

fn decompose(params: &mut Params, report: &mut Report, seed: u64) -> Result<bool, CliError> {
    let n: u64 = params.get("n", 2048)?;
    let w: u64 = params.get("w", 5)?;
    let eta4: f64 = params.get("eta4", 0.05)?;
    let eta5: f64 = params.get("eta5", 1e-3)?;
    let c: f64 = params.get("c", DEFAULT_C)?;
    let h: u64 = params.get("h", 2)?;
    let sqrt_m: u64 = params.get("sqrt_m", 8)?;
    let src = params.get_str("polys", "0; m; m^2");
    let max_nodes: usize = params.get("max_nodes", DEFAULT_MAX_NODES)?;
    let r = (n as f64).powf(0.25);
    let table = table_for(n, w)?;
    let sieve = params_from_n(n, w, &Scales::Direct { m: (n as f64).sqrt() as u64, r, h }, &PrimeSet::All, &table)?;
    let nu_fn = nu(&sieve, &CutoffChi::default(), &table)?;
    let g = prime_weight_f(&sieve, &PrimeSet::All, &table)?;
    let lin = linearize_with_cap(&make_system(&family_in_m(&src)?, true)?, max_nodes)?;
    let spec = lin.gowers_spec(h, sieve.big_w as i64, sqrt_m)?;
    let dp = DecomposeParams { c, ..DecomposeParams::new(eta4, eta5, seed) };
    let dec = knvn_decompose(&g, &nu_fn, &spec, &dp)?;
    for t in &dec.trace {
        let k = t.k;
        report.push(format!("iter{k}.sigma"), t.sigma);
        report.push(format!("iter{k}.energy"), t.energy);
        report.push(format!("iter{k}.correlation"), t.correlation);
        report.push(format!("iter{k}.atoms"), t.atoms as f64);
    }
    let ck = dec.check(&g);
    report.push("iterations", dec.iterations as f64).note = format!("cap {}", dec.cap);
    report.push("sigma", dec.sigma);
    report.push("structured_min", ck.structured_min);
    report.push("structured_max", ck.structured_max);
    report.push("sum_min", ck.sum_min);
    report.push("sum_excess", ck.sum_excess);
    report.push("mass_gap", ck.mass_gap);
    report.push("final_correlation", ck.final_correlation);
    let tol = 1e-12;
    Ok(ck.structured_min >= -tol
        && ck.structured_max <= 1.0 + dec.sigma + tol
        && ck.sum_min >= -tol
        && ck.sum_excess <= tol
        && ck.final_correlation <= eta4)
}

fn count(params: &mut Params, report: &mut Report) -> Result<bool, CliError> {
    let src = params.get_str("polys", "0; m^2");
    let n: u64 = params.get("n", 1000)?;
    let m: u64 = params.get("m", 30)?;
    let keep: usize = params.get("witnesses", 10)?;
    let spec = ProgressionSpec::new(family_in_m(&src)?, n, m, PrimeSet::All)?;
    let shift = spec.shift_table()?.iter().flatten().map(|s| s.unsigned_abs()).max().unwrap_or(0);
    let table = PrimeTable::build(n + shift + 1)?;
    let res = count_progressions(&spec, &table, keep)?;
    report.push("count", res.count as f64);
    for (i, wit) in res.witnesses.iter().enumerate() {
        let values: Vec<String> = wit.values.iter().map(i64::to_string).collect();
        report.push_note(format!("witness[{i}]"), format!("x={} m={} values={}", wit.x, wit.m, values.join(" ")));
    }
    Ok(true)
}

fn correlation(params: &mut Params, report: &mut Report) -> Result<bool, CliError> {
    let src = params.get_str("polys", "0; m");
    let n: u64 = params.get("n", 100_000)?;
    let m: u64 = params.get("m", 100)?;
    let cutoff: u64 = params.get("cutoff", 1000)?;
    let polys = family_in_m(&src)?;
    let spec = ProgressionSpec::new(polys.clone(), n, m, PrimeSet::All)?;
    let shift = spec.shift_table()?.iter().flatten().map(|s| s.unsigned_abs()).max().unwrap_or(0);
    let table = PrimeTable::build((n + shift + 1).max(cutoff))?;
    let observed = count_progressions(&spec, &table, 0)?.count as f64;
    let series = singular_series(&polys, cutoff, &table)?;
    let predicted = series.predicted_count(n, m);
    report.push("gamma_hat", series.gamma).note = "HEURISTIC".into();
    report.push("observed", observed);
    report.push("predicted", predicted).note = "HEURISTIC".into();
    report.push("observed_over_predicted", observed / predicted).note = "diagnostic".into();
    if let Some(p) = series.terrible {
        report.push("terrible_prime", p as f64);
    }
    Ok(true)
}

pub fn suite_config(params: &mut Params, seed: u64) -> Result<SuiteConfig, CliError> {
    let d = SuiteConfig::default();
    let corpus = match params.get_opt("pet_corpus") {
        Some(path) => acceptance::parse_corpus(&std::fs::read_to_string(&path)?),
        None => d.pet_corpus,
    };
    Ok(SuiteConfig {
        seed,
        c6_n: params.get("c6_n", d.c6_n)?,
        c9_n: params.get("c9_n", d.c9_n)?,
        c11_n: params.get("c11_n", d.c11_n)?,
        c11_m: params.get("c11_m", d.c11_m)?,
        c11_cutoff: params.get("c11_cutoff", d.c11_cutoff)?,
        pet_max_nodes: params.get("pet_max_nodes", d.pet_max_nodes)?,
        pet_corpus: corpus,
    })
}

fn only_ids(params: &mut Params) -> Result<Vec<u32>, CliError> {
    let Some(list) = params.get_opt("only") else { return Ok(acceptance::all_ids()) };
    list.split(',')
        .map(|s| {
            let id: u32 = s.trim().parse().map_err(|e| CliError::Usage(format!("bad criterion {s:?}: {e}")))?;
            if acceptance::CRITERIA.iter().any(|c| c.0 == id) {
                Ok(id)
            } else {
                Err(CliError::Usage(format!("no criterion {id}")))
            }
        })
        .collect()
}

pub fn verify_rows(report: &mut Report, results: &[CriterionResult]) {
    for r in results {
        report.push(format!("c{}.passed", r.id), r.passed as u8 as f64).note = format!("{}: {}", r.title, r.summary);
        for m in &r.measurements {
            let row = report.push(format!("c{}.{}", r.id, m.quantity), m.value);
            row.prediction = m.prediction;
            row.tolerance = m.tolerance;
            row.note = m.note.clone();
        }
    }
}

pub struct VerifyRender {
    pub csv: Vec<u8>,
    pub json: Vec<u8>,
    pub results: Vec<CriterionResult>,
}

/// Renders the verify report for a configuration without touching the disk.
pub fn render_verify(cfg: &SuiteConfig, ids: &[u32]) -> Result<VerifyRender, CliError> {
    let results = acceptance::run_suite(cfg, ids);
    let mut report = Report::new("verify", cfg.seed, Mode::Exact.name());
    report.config.insert("only".into(), ids.iter().map(u32::to_string).collect::<Vec<_>>().join(","));
    verify_rows(&mut report, &results);
    Ok(VerifyRender { csv: report.to_csv()?, json: report.to_json()?, results })
}
