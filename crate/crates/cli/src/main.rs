use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alcc_core::adversary::{optimal_p, optimal_p_numeric, weak_objective};
use alcc_core::dft::{decode, encode_message, ErrorCount};
use alcc_core::params::DftCodeSpec;
use alcc_core::rng::{complex_normal, rng_from};
use alcc_core::sim::csv::{bound_rows, curves_csv, pep_rows, theory_csv};
use alcc_core::sim::{pep_experiment, run_sweep};
use alcc_core::theory::{lemma1_certificate, BoundConstants};
use alcc_core::AlccError;
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::seq::index::sample;

mod manifest;

use manifest::{load_config, RunManifest};

#[derive(Parser)]
#[command(
    name = "alcc",
    version,
    about = "Adversarial analog Lagrange coded computing simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config (or re-run a manifest) and write its curves.
    Run(RunArgs),
    /// Optimal zero probability of the weak colluding attack.
    Pstar {
        /// Number of colluding adversaries (>= 2).
        v: usize,
    },
    /// Lower-bound PEP curves, optionally with Monte Carlo estimates.
    Bounds(BoundsArgs),
    /// Decode one random corrupted codeword step by step.
    DecodeDemo(DemoArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials_override: Option<usize>,
    /// Worker threads; all cores by default. Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 31)]
    n: usize,
    #[arg(long, default_value_t = 15)]
    k: usize,
    #[arg(long, default_value_t = 8)]
    v: usize,
    /// Comma-separated σ_p² grid; may be empty.
    #[arg(long, default_value = "1e-4,1e-3,1e-2")]
    sigmas: String,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long, default_value_t = 1.0)]
    c_i: f64,
    #[arg(long, default_value_t = 1.0)]
    c_q: f64,
    /// Also estimate PEP and P_error by simulation with this many trials per point.
    #[arg(long, default_value_t = 0)]
    empirical_trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 31)]
    n: usize,
    #[arg(long, default_value_t = 15)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    errors: usize,
    #[arg(long, default_value_t = 10.0)]
    noise_mean: f64,
    #[arg(long, default_value_t = 1e3)]
    noise_variance: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

enum Failure {
    Config(AlccError),
    Io(PathBuf, std::io::Error),
    Run(AlccError),
}

impl Failure {
    fn report(&self) -> ExitCode {
        match self {
            Failure::Config(e) => {
                eprintln!("error: CONFIG_INVALID: {e}");
                ExitCode::from(2)
            }
            Failure::Io(p, e) => {
                eprintln!("error: IO_ERROR: {}: {e}", p.display());
                ExitCode::from(3)
            }
            Failure::Run(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn write(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn cmd_run(args: &RunArgs) -> CmdResult {
    let text = fs::read_to_string(&args.config).map_err(|e| Failure::Io(args.config.clone(), e))?;
    let mut cfg = load_config(&text).map_err(Failure::Config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials_override {
        cfg.trials = trials;
    }
    cfg.validate().map_err(Failure::Config)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
        .expect("thread pool");
    let curves = pool.install(|| run_sweep(&cfg)).map_err(Failure::Run)?;

    fs::create_dir_all(&args.out).map_err(|e| Failure::Io(args.out.clone(), e))?;
    let csv_name = format!("{}_curves.csv", cfg.name);
    let csv_path = args.out.join(&csv_name);
    write(&csv_path, &curves_csv(&curves.rows()))?;
    let manifest_path = args.out.join(format!("{}_manifest.toml", cfg.name));
    let manifest = RunManifest::new(&args.config, &args.out, cfg, vec![csv_name]);
    write(&manifest_path, &manifest.to_toml_string())?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", manifest_path.display());
    Ok(())
}

fn cmd_pstar(v: usize) -> CmdResult {
    let closed = optimal_p(v).map_err(Failure::Config)?;
    let numeric = optimal_p_numeric(v).map_err(Failure::Config)?;
    println!("v            = {v}");
    println!("p* closed    = {closed:.12}");
    println!("p* numerical = {numeric:.12}");
    println!("difference   = {:.3e}", (closed - numeric).abs());
    println!("h(p*)        = {:.12}", weak_objective(closed, v));
    Ok(())
}

fn parse_grid(text: &str) -> alcc_core::Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse().map_err(|_| AlccError::InvalidParams {
                field: "sigmas",
                reason: format!("`{s}` is not a number"),
            })
        })
        .collect()
}

fn cmd_bounds(args: &BoundsArgs) -> CmdResult {
    let constants = BoundConstants {
        eta: args.eta,
        c_i: args.c_i,
        c_q: args.c_q,
    };
    let sigmas = parse_grid(&args.sigmas).map_err(Failure::Config)?;
    let mut rows = bound_rows(args.n, args.v, &sigmas, &constants).map_err(Failure::Config)?;
    if args.empirical_trials > 0 {
        for &s in &sigmas {
            for a in 1..=args.v {
                let e = pep_experiment(args.n, args.k, a, s, args.empirical_trials, args.seed)
                    .map_err(Failure::Config)?;
                rows.extend(pep_rows(&e));
            }
        }
    }
    for &s in &sigmas {
        let cert = lemma1_certificate(args.n, s, &constants, args.v).map_err(Failure::Config)?;
        match cert.first_violation {
            None => eprintln!("sigma_p2 = {s}: A·PEP_L non-decreasing on 1..={}", args.v),
            Some(a) => eprintln!("sigma_p2 = {s}: A·PEP_L decreases at A = {a}"),
        }
    }
    let csv = theory_csv(&rows);
    match &args.out {
        Some(p) => write(p, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn fmt_c(z: Complex64) -> String {
    format!("{:+.6e}{:+.6e}i", z.re, z.im)
}

fn cmd_decode_demo(args: &DemoArgs) -> CmdResult {
    let spec = DftCodeSpec::new(args.n, args.k).map_err(Failure::Config)?;
    if args.errors > spec.radius() {
        return Err(Failure::Config(AlccError::InvalidParams {
            field: "errors",
            reason: format!(
                "{} errors exceed the correction radius v = {}",
                args.errors,
                spec.radius()
            ),
        }));
    }
    let mut rng = rng_from(&[args.seed]);
    let zero = Complex64::new(0.0, 0.0);
    let message: Vec<Complex64> = (0..spec.k)
        .map(|_| complex_normal(&mut rng, zero, 2.0))
        .collect();
    let clean = encode_message(&spec, &message).map_err(Failure::Run)?;
    let mut locations: Vec<usize> = sample(&mut rng, spec.n, args.errors)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    locations.sort_unstable();
    let mut received = clean.clone();
    let mean = Complex64::new(args.noise_mean, 0.0);
    println!(
        "code: N = {}, K = {}, v = {}",
        spec.n,
        spec.k,
        spec.radius()
    );
    println!("injected errors:");
    for &q in &locations {
        let e = complex_normal(&mut rng, mean, args.noise_variance);
        received[q - 1] += e;
        println!("  worker {q:>3}: {}", fmt_c(e));
    }
    let out = decode(&spec, &received, ErrorCount::Oracle(args.errors)).map_err(Failure::Run)?;
    println!("syndrome:");
    for (m, s) in out.syndrome.values.iter().enumerate() {
        println!("  s_{:<2} = {}", m + 1, fmt_c(*s));
    }
    println!("error count: {}", out.count);
    if let Some(g) = &out.locator {
        println!("locator coefficients (ascending, monic):");
        for (j, c) in g.coeffs().iter().enumerate() {
            println!("  g_{j:<2} = {}", fmt_c(*c));
        }
    }
    if let (Some(loc), Some(vals)) = (&out.localization, &out.values) {
        println!("located workers: {:?}", loc.locations);
        println!("estimated error values (condition {:.3e}):", vals.condition);
        for (&q, &e) in loc.locations.iter().zip(&vals.values) {
            println!("  worker {q:>3}: {}", fmt_c(e));
        }
    }
    let residual = out
        .corrected
        .iter()
        .zip(&clean)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let norm = clean.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    println!(
        "relative residual after correction: {:.3e}",
        residual / norm
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Pstar { v } => cmd_pstar(*v),
        Command::Bounds(a) => cmd_bounds(a),
        Command::DecodeDemo(a) => cmd_decode_demo(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
