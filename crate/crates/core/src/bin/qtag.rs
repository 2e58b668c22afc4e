use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qtag::attacks::{apply_attack, AppendMode, AttackKind, AttackSpec};
use qtag::circuit::{emit_qasm_with_barriers, parse_qasm, Circuit};
use qtag::codec::{read_latent, write_latent};
use qtag::diffusion::BackendSpec;
use qtag::harness::{
    calibrate_from_fit, plot, read_csv, run_calibration, run_capacity_sweep, run_false_positive,
    run_robustness_bench, run_steps_sweep, write_csv, write_results, ExperimentConfig,
    HistogramRow, Pipeline, ResultRow,
};
use qtag::srm::SrmDirections;
use qtag::watermark::{BitSequence, WatermarkKey};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Keyed latent watermarking for quantum-circuit generators.
#[derive(Parser)]
#[command(name = "qtag", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a watermark key (message, cipher key, nonce, Gaussian seed).
    Keygen {
        #[arg(long, default_value_t = 24)]
        capacity: usize,
        /// Seed for reproducible keys; omit for OS randomness.
        #[arg(long)]
        seed: Option<u64>,
        /// Fixed message as a 0/1 string instead of a random one.
        #[arg(long)]
        message: Option<BitSequence>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Generate a watermarked circuit and its final latent.
    Embed {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        latent: Option<PathBuf>,
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Apply one attack to a circuit file.
    Attack {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        kind: AttackKind,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        aggressive: bool,
        /// Start window for `delete_columns`, as a fraction of the width.
        #[arg(long)]
        window: Option<f64>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Detect the watermark in a circuit; prints the report as JSON and exits
    /// 0 when detected, 1 when not.
    Verify {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Fit the unwatermarked correct-bit distribution and derive a threshold.
    Calibrate {
        #[arg(long)]
        samples_w: Option<usize>,
        #[arg(long)]
        samples_u: Option<usize>,
        /// Skip sampling and use this null mean (requires --sigma0).
        #[arg(long, requires = "sigma0")]
        mu0: Option<f64>,
        #[arg(long, requires = "mu0")]
        sigma0: Option<f64>,
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Run a Monte Carlo suite and write one CSV row per grid cell.
    Bench {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Render a result or histogram CSV as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Robustness,
    Capacity,
    Steps,
    /// False accepts on unwatermarked circuits.
    Fpr,
}

/// Overrides on top of `--config` (or the defaults).
#[derive(Args)]
struct ConfigOpts {
    #[arg(long)]
    config: Option<PathBuf>,
    /// `zero` or `linear:<seed>`.
    #[arg(long)]
    backend: Option<BackendSpec>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    guidance: Option<f64>,
    #[arg(long)]
    capacity: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    master_seed: Option<u64>,
    /// Largest SRM pad width; 0 disables restoration.
    #[arg(long)]
    srm_w_max: Option<usize>,
    #[arg(long)]
    srm_bidirectional: bool,
    /// Try every SRM candidate instead of stopping at the first accept.
    #[arg(long)]
    no_early_stop: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

impl ConfigOpts {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)
                .with_context(|| format!("reading config {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    cfg.$field = v;
                }
            )*};
        }
        set!(
            backend,
            steps,
            guidance,
            capacity,
            tau,
            alpha0,
            trials,
            master_seed
        );
        if let Some(w) = self.srm_w_max {
            cfg.srm.w_max = w;
        }
        if self.srm_bidirectional {
            cfg.srm.directions = SrmDirections::Bidirectional;
        }
        if self.no_early_stop {
            cfg.srm.early_stop = false;
        }
        if self.out.is_some() {
            cfg.output = self.out.clone();
        }
        cfg.validate().map_err(|e| UsageError(e.to_string()))?;
        Ok(cfg)
    }
}

/// Bad flag or config values; exits with status 2 like a parse error.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn parse_kind(s: &str) -> Result<AttackKind, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).map_err(|_| {
        format!("unknown attack `{s}` (none, replace, append, insert, delete, delete_columns)")
    })
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_qasm(&text).with_context(|| format!("parsing {}", path.display()))
}

fn pipeline(cfg: &ExperimentConfig) -> Result<Pipeline> {
    Ok(Pipeline::new(
        cfg.backend,
        cfg.steps,
        cfg.guidance,
        cfg.shape,
    )?)
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Keygen {
            capacity,
            seed,
            message,
            out,
        } => {
            let mut rng = match seed {
                Some(s) => ChaCha20Rng::seed_from_u64(s),
                None => ChaCha20Rng::from_os_rng(),
            };
            let mut key = WatermarkKey::generate(&mut rng, capacity)?;
            if let Some(m) = message {
                key = key.with_message(m);
            }
            key.save(&out)?;
            eprintln!("wrote {}-bit key to {}", key.k(), out.display());
        }
        Command::Embed {
            key,
            circuit,
            latent,
            opts,
        } => {
            let key = WatermarkKey::load(&key)?;
            let mut cfg = opts.resolve()?;
            cfg.capacity = key.k();
            cfg.validate()?;
            let e = pipeline(&cfg)?.embed(&key)?;
            fs::write(&circuit, emit_qasm_with_barriers(&e.circuit))?;
            if let Some(path) = latent {
                let mut f = fs::File::create(&path)?;
                write_latent(&mut f, &e.z_0)?;
            }
            eprintln!(
                "wrote {} gates over {} columns to {}",
                e.circuit.gate_count(),
                e.circuit.num_columns(),
                circuit.display()
            );
        }
        Command::Attack {
            circuit,
            kind,
            count,
            seed,
            aggressive,
            window,
            out,
        } => {
            let c = read_circuit(&circuit)?;
            let mut spec = AttackSpec::new(kind, count, seed);
            if aggressive {
                spec = spec.with_mode(AppendMode::Aggressive);
            }
            if let Some(w) = window {
                spec = spec.with_window(w);
            }
            let attacked = apply_attack(&c, &spec)?;
            fs::write(&out, emit_qasm_with_barriers(&attacked))?;
        }
        Command::Verify { circuit, key, opts } => {
            let key = WatermarkKey::load(&key)?;
            let mut cfg = opts.resolve()?;
            cfg.capacity = key.k();
            let policy = cfg.policy()?;
            let p = pipeline(&cfg)?;
            let detector = p.detector(&key, policy, cfg.srm)?;
            let report = if circuit.extension().is_some_and(|e| e == "qtl") {
                detector.detect_latent(&read_latent(&mut fs::File::open(&circuit)?)?)?
            } else {
                detector.detect(&read_circuit(&circuit)?)?
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
            return Ok(if report.detected {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            });
        }
        Command::Calibrate {
            samples_w,
            samples_u,
            mu0,
            sigma0,
            opts,
        } => {
            let cfg = opts.resolve()?;
            let report = match (mu0, sigma0) {
                (Some(mu0), Some(sigma0)) => {
                    calibrate_from_fit(mu0, sigma0, cfg.alpha0, cfg.capacity)?
                }
                _ => run_calibration(
                    samples_w.unwrap_or(cfg.calibration_samples),
                    samples_u.unwrap_or(cfg.calibration_samples),
                    cfg.alpha0,
                    &cfg,
                )?,
            };
            if let Some(path) = &cfg.output {
                let comment = format!(
                    "{}\ncorrect-bit histogram, k = {}",
                    qtag::harness::reference_header(&cfg.backend.to_string()),
                    report.k
                );
                write_csv(fs::File::create(path)?, &comment, &report.histogram)?;
            }
            let summary = serde_json::json!({
                "k": report.k,
                "alpha0": report.alpha0,
                "mu0": report.result.mu0,
                "sigma0": report.result.sigma0,
                "mu1": report.result.mu1,
                "sigma1": report.result.sigma1,
                "th": report.result.th,
                "tau_bits": report.tau_bits,
                "fpr_strict": report.fpr_strict,
                "fpr_inclusive": report.fpr_inclusive,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Bench { suite, opts } => {
            let cfg = opts.resolve()?;
            if let Suite::Fpr = suite {
                let report = run_false_positive(&cfg)?;
                println!("{}", serde_json::to_string_pretty(&report)?);
                return Ok(ExitCode::SUCCESS);
            }
            let rows = match suite {
                Suite::Robustness => run_robustness_bench(&cfg)?,
                Suite::Capacity => run_capacity_sweep(&cfg)?,
                Suite::Steps => run_steps_sweep(&cfg)?,
                Suite::Fpr => unreachable!(),
            };
            match &cfg.output {
                Some(path) => {
                    write_results(path, &rows)?;
                    eprintln!("wrote {} rows to {}", rows.len(), path.display());
                }
                None => write_csv(
                    std::io::stdout().lock(),
                    &qtag::harness::reference_header(&cfg.backend.to_string()),
                    &rows,
                )?,
            }
        }
        Command::Plot { input, out } => {
            let text = fs::read_to_string(&input)?;
            let header = text
                .lines()
                .find(|l| !l.starts_with('#'))
                .unwrap_or_default();
            let svg = if header.starts_with("correct_bits") {
                plot::histogram_chart(&read_csv::<_, HistogramRow>(text.as_bytes())?)
            } else if header.starts_with("experiment") {
                plot::tpr_chart(&read_csv::<_, ResultRow>(text.as_bytes())?)
            } else {
                bail!("{} is neither a bench nor a histogram CSV", input.display());
            };
            fs::write(&out, svg)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<UsageError>() { 2 } else { 3 })
        }
    }
}
