use std::error::Error as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ips_bench::aggregate::{AggregateReport, WeightedScore};
use ips_bench::dataset::{generate_synthetic, save_dataset, SyntheticConfig};
use ips_bench::experiment::{
    cmd_aggregate, cmd_plot, run_akm_sweep, run_experiment, ExperimentConfig, DEFAULT_CELL_PX,
};
use ips_bench::{fixtures, weighted_combine, Error, Result};

#[derive(Parser)]
#[command(name = "ips-bench", version, about = "Indoor positioning benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Aggregate raw metric CSV files against a baseline method.
    Aggregate {
        #[arg(long)]
        baseline: String,
        /// JSON file with a weighted score (`weights`, `transforms`).
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
        #[arg(required = true)]
        raw: Vec<PathBuf>,
    },
    /// Render a GMMS plot from an aggregate CSV.
    Plot {
        #[arg(long, default_value = "tau_db")]
        color: String,
        #[arg(long, default_value = "epsilon_3d")]
        shape: String,
        #[arg(long, default_value_t = DEFAULT_CELL_PX)]
        cell_px: u32,
        #[arg(short, long)]
        output: PathBuf,
        aggregate: PathBuf,
    },
    /// Generate a synthetic train/test CSV pair.
    GenSynth {
        #[arg(long)]
        seed: u64,
        /// JSON synthetic config; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        train: Option<usize>,
        #[arg(long)]
        test: Option<usize>,
        #[arg(long)]
        aps: Option<usize>,
        #[arg(long)]
        floors: Option<u32>,
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
    },
    /// Sweep AkM cluster counts over the datasets of an experiment config.
    Akm {
        #[arg(long, value_delimiter = ',', default_value = "2,4,7,15,25,35")]
        k: Vec<usize>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Aggregate the embedded published tables and print the reports.
    Fixture {
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        file: path.display().to_string(),
        row: e.line(),
        column: Some(e.column()),
        message: e.to_string(),
    })
}

fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn print_warnings(report: &AggregateReport) {
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = run_experiment(&cfg, &config_dir(&config))?;
            print_warnings(&out.report);
            print!("{}", out.report.summary_csv());
            for f in &out.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Command::Aggregate {
            baseline,
            weights,
            out,
            raw,
        } => {
            let weights: Option<WeightedScore> = weights.as_deref().map(read_json).transpose()?;
            let report = cmd_aggregate(&raw, &baseline, weights.as_ref(), &out)?;
            print_warnings(&report);
            print!("{}", report.summary_csv());
        }
        Command::Plot {
            color,
            shape,
            cell_px,
            output,
            aggregate,
        } => {
            cmd_plot(&aggregate, &color, &shape, &output, cell_px)?;
            eprintln!("wrote {}", output.display());
        }
        Command::GenSynth {
            seed,
            config,
            train,
            test,
            aps,
            floors,
            out,
        } => {
            let mut cfg: SyntheticConfig = match config {
                Some(p) => read_json(&p)?,
                None => SyntheticConfig::default(),
            };
            cfg.seed = seed;
            cfg.train_count = train.unwrap_or(cfg.train_count);
            cfg.test_count = test.unwrap_or(cfg.test_count);
            cfg.ap_count = aps.unwrap_or(cfg.ap_count);
            cfg.floors = floors.unwrap_or(cfg.floors);
            let ds = generate_synthetic(&cfg)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
            let train_path = out.join(format!("{}_train.csv", ds.name));
            let test_path = out.join(format!("{}_test.csv", ds.name));
            save_dataset(&ds, &train_path, &test_path)?;
            eprintln!("wrote {} and {}", train_path.display(), test_path.display());
        }
        Command::Akm { k, config, weights } => {
            let cfg = ExperimentConfig::load(&config)?;
            let weights: Option<WeightedScore> = weights.as_deref().map(read_json).transpose()?;
            let sweep = run_akm_sweep(&cfg, &config_dir(&config), &k, weights.as_ref())?;
            print!("{}", sweep.to_markdown());
            println!();
        }
        Command::Fixture { out } => {
            let (eps, tau) = fixtures::kmeans_rfp1_matrices();
            let report = AggregateReport::build(&[eps, tau], fixtures::BASELINE_METHOD, None)?;
            let mut text = report.to_markdown();
            text.push_str("\n## AkM sweep (published normalized rows)\n\n| K | F |\n|---|---|\n");
            let score = WeightedScore::akm_default();
            for row in fixtures::AKM_ROWS {
                let aggs = [
                    ("mse_s1".to_string(), row.mse_s1),
                    ("mse_s2".to_string(), row.mse_s2),
                    ("epsilon_3d".to_string(), row.epsilon),
                    ("cr".to_string(), row.cr),
                ]
                .into();
                text.push_str(&format!("| {} | {:.2} |\n", row.k, weighted_combine(&aggs, &score)?));
            }
            match out {
                Some(p) => ips_bench::io::write_atomic(&p, text.as_bytes())?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = e.source();
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
