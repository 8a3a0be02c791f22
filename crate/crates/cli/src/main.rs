use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use mkpls::datasets::{load_manifest, SynthConfig, VisualUnit};
use mkpls::features::LbpConfig;
use mkpls::kernels::{KernelKind, KernelSpec, Omega};
use mkpls::manifold::BasisConfig;
use mkpls_cli::config::ExperimentConfig;
use mkpls_cli::{commands, experiment, CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "mkpls",
    version,
    about = "Manifold-KPLS visual speech recognition pipeline"
)]
struct Cli {
    /// Worker threads (default: machine parallelism; MKPLS_THREADS as fallback).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DatasetArgs {
    /// Dataset manifest CSV.
    #[arg(long)]
    manifest: PathBuf,
    /// LBP configuration JSON (needed when the manifest references PGM
    /// frame directories).
    #[arg(long)]
    lbp: Option<PathBuf>,
}

#[derive(Args)]
struct BasisArgs {
    /// Gaussian-RBF basis count.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Ridge regularizer.
    #[arg(long, default_value_t = 50.0)]
    lambda: f64,
    /// RBF width (default 2 n^2).
    #[arg(long)]
    sigma: Option<f64>,
}

impl BasisArgs {
    fn build(&self) -> CliResult<BasisConfig> {
        BasisConfig::with(self.n, self.lambda, self.sigma, None)
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (manifest + feature CSVs).
    Synth {
        /// SynthConfig JSON; individual flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        classes: Option<usize>,
        #[arg(long)]
        speakers: Option<usize>,
        #[arg(long)]
        repetitions: Option<usize>,
        #[arg(long)]
        frames_min: Option<usize>,
        #[arg(long)]
        frames_max: Option<usize>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        class_separation: Option<f64>,
        #[arg(long)]
        speaker_deformation: Option<f64>,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output dataset directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract LBP features from a PGM-backed manifest into feature CSVs.
    Features {
        #[command(flatten)]
        dataset: DatasetArgs,
        /// Output dataset directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit one manifold parameterization per unit.
    Param {
        #[command(flatten)]
        dataset: DatasetArgs,
        #[command(flatten)]
        basis: BasisArgs,
        /// Stack the parameterization of the frame differences (for the
        /// GrassmDiff kernel).
        #[arg(long)]
        diff: bool,
        /// Output directory for the .param / .diffparam files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit one unit's parameterization over a (lambda, n) grid as CSV
    /// blocks for plotting.
    InspectParam {
        #[command(flatten)]
        dataset: DatasetArgs,
        /// Unit id to inspect.
        #[arg(long)]
        unit: String,
        /// Comma-separated lambda grid.
        #[arg(long, default_value = "0.01,50")]
        lambdas: String,
        /// Comma-separated basis-count grid.
        #[arg(long, default_value = "8,16")]
        ns: String,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble the Gram matrix of a dataset from precomputed
    /// parameterizations.
    Gram {
        #[command(flatten)]
        dataset: DatasetArgs,
        /// Directory holding the .param / .diffparam files.
        #[arg(long)]
        params: PathBuf,
        /// Kernel kind (Cosine, Euclid, EditDist, Frechet, Grassm,
        /// GrassmCC, GrassmDiff).
        #[arg(long)]
        kernel: String,
        /// Distance normalization: "auto" or a positive number.
        #[arg(long, default_value = "auto")]
        omega: String,
        #[arg(long, default_value_t = 0.5)]
        a1: f64,
        #[arg(long, default_value_t = 0.5)]
        a2: f64,
        #[command(flatten)]
        basis: BasisArgs,
        /// Output container path.
        #[arg(long)]
        out: PathBuf,
        /// Also write a CSV copy next to the container.
        #[arg(long)]
        csv: bool,
    },
    /// Run the full experiment grid from a JSON config.
    Eval {
        /// ExperimentConfig JSON.
        #[arg(long)]
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the synthetic dataset seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Load precomputed parameterizations from this directory.
        #[arg(long)]
        params_dir: Option<PathBuf>,
    },
}

fn read_to_string(path: &PathBuf) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_lbp(path: &Option<PathBuf>) -> CliResult<Option<LbpConfig>> {
    match path {
        None => Ok(None),
        Some(path) => {
            let config: LbpConfig = serde_json::from_str(&read_to_string(path)?)
                .map_err(|e| CliError::Config(format!("bad LBP config {}: {e}", path.display())))?;
            config
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
            Ok(Some(config))
        }
    }
}

fn load_dataset(args: &DatasetArgs) -> CliResult<Vec<VisualUnit>> {
    let lbp = load_lbp(&args.lbp)?;
    Ok(load_manifest(&args.manifest, lbp.as_ref())?)
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Config(format!("bad {what} value {s:?}")))
        })
        .collect()
}

fn resolve_threads(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| {
        std::env::var("MKPLS_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Synth {
            config,
            classes,
            speakers,
            repetitions,
            frames_min,
            frames_max,
            dim,
            class_separation,
            speaker_deformation,
            noise,
            seed,
            out,
        } => {
            let mut synth: SynthConfig = match config {
                Some(path) => serde_json::from_str(&read_to_string(&path)?).map_err(|e| {
                    CliError::Config(format!("bad synth config {}: {e}", path.display()))
                })?,
                None => SynthConfig {
                    classes: 4,
                    speakers: 5,
                    repetitions: 3,
                    frames_min: 10,
                    frames_max: 14,
                    dim: 8,
                    class_separation: 1.0,
                    speaker_deformation: 0.05,
                    noise: 0.0,
                    seed: 7,
                },
            };
            if let Some(v) = classes {
                synth.classes = v;
            }
            if let Some(v) = speakers {
                synth.speakers = v;
            }
            if let Some(v) = repetitions {
                synth.repetitions = v;
            }
            if let Some(v) = frames_min {
                synth.frames_min = v;
            }
            if let Some(v) = frames_max {
                synth.frames_max = v;
            }
            if let Some(v) = dim {
                synth.dim = v;
            }
            if let Some(v) = class_separation {
                synth.class_separation = v;
            }
            if let Some(v) = speaker_deformation {
                synth.speaker_deformation = v;
            }
            if let Some(v) = noise {
                synth.noise = v;
            }
            if let Some(v) = seed {
                synth.seed = v;
            }
            let manifest = commands::cmd_synth(&synth, &out)?;
            println!("wrote {}", manifest.display());
            Ok(())
        }
        Command::Features { dataset, out } => {
            let lbp = load_lbp(&dataset.lbp)?.ok_or_else(|| {
                CliError::Config("--lbp is required for feature extraction".into())
            })?;
            let manifest = commands::cmd_features(&dataset.manifest, &lbp, &out)?;
            println!("wrote {}", manifest.display());
            Ok(())
        }
        Command::Param {
            dataset,
            basis,
            diff,
            out,
        } => {
            let units = load_dataset(&dataset)?;
            let basis = basis.build()?;
            for line in commands::cmd_param(&units, &basis, diff, &out)? {
                eprintln!("{line}");
            }
            println!(
                "wrote {} parameterizations to {}",
                units.len(),
                out.display()
            );
            Ok(())
        }
        Command::InspectParam {
            dataset,
            unit,
            lambdas,
            ns,
            out,
        } => {
            let units = load_dataset(&dataset)?;
            let lambdas: Vec<f64> = parse_list(&lambdas, "lambda")?;
            let ns: Vec<usize> = parse_list(&ns, "n")?;
            let blocks = commands::cmd_inspect_param(&units, &unit, &lambdas, &ns)?;
            match out {
                Some(path) => fs::write(&path, blocks)
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
                None => print!("{blocks}"),
            }
            Ok(())
        }
        Command::Gram {
            dataset,
            params,
            kernel,
            omega,
            a1,
            a2,
            basis,
            out,
            csv,
        } => {
            let units = load_dataset(&dataset)?;
            let kind =
                KernelKind::from_str(&kernel).map_err(|e| CliError::Config(e.to_string()))?;
            let omega = if omega.eq_ignore_ascii_case("auto") {
                Omega::Auto
            } else {
                Omega::Fixed(
                    omega
                        .parse()
                        .map_err(|_| CliError::Config(format!("bad omega {omega:?}")))?,
                )
            };
            let spec = KernelSpec {
                kind,
                omega,
                a1,
                a2,
            };
            spec.validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
            let basis = basis.build()?;
            let resolved = commands::cmd_gram(&units, &params, &spec, &basis, &out, csv)?;
            match resolved {
                Some(w) => println!("wrote {} (omega = {w})", out.display()),
                None => println!("wrote {}", out.display()),
            }
            Ok(())
        }
        Command::Eval {
            config,
            out,
            seed,
            params_dir,
        } => {
            let mut experiment_config = ExperimentConfig::from_json(&read_to_string(&config)?)?;
            if let Some(out) = out {
                experiment_config.output_dir = Some(out);
            }
            if let Some(seed) = seed {
                experiment_config.seed = Some(seed);
            }
            if let Some(dir) = params_dir {
                experiment_config.params_dir = Some(dir);
            }
            let out_dir = experiment_config.output_dir.clone().ok_or_else(|| {
                CliError::Config("no output directory (config output_dir or --out)".into())
            })?;
            let output = experiment::run_eval(&experiment_config)?;
            fs::create_dir_all(&out_dir)
                .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
            let report_path = out_dir.join("report.csv");
            fs::write(&report_path, &output.report_csv)
                .map_err(|e| CliError::Io(format!("{}: {e}", report_path.display())))?;
            let log_path = out_dir.join("log.json");
            let json = serde_json::to_string_pretty(&output.log)
                .map_err(|e| CliError::Io(format!("serializing log: {e}")))?;
            fs::write(&log_path, json)
                .map_err(|e| CliError::Io(format!("{}: {e}", log_path.display())))?;
            print!("{}", output.report_csv);
            for warning in &output.log.warnings {
                eprintln!("warning: {warning}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = resolve_threads(cli.threads) {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("configuration error: could not size the thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
