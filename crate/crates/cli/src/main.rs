use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use rgnn::data::{self, Dataset};
use rgnn::harness::{self, ExperimentConfig};
use rgnn::synth::{sbm, SbmConfig};

#[derive(Parser)]
#[command(
    name = "rgnn",
    version,
    about = "Graph neural networks with a non-local TV regularized softmax"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// `<name>.content` and `<name>.cites` (Cora, Citeseer)
    ContentCites,
    /// Edge list then node/feature/label file (Cornell, Texas, Wisconsin)
    Webkb,
    /// `NODE.paper.tab` then `DIRECTED.cites.tab` (Pubmed)
    Pubmed,
}

#[derive(Subcommand)]
enum Command {
    /// Convert raw dataset files into the canonical directory format.
    Ingest {
        format: Format,
        /// Input files, in the order listed for the format.
        #[arg(num_args = 2)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Dataset name stored in meta.json (defaults to the output directory name).
        #[arg(long)]
        name: Option<String>,
        /// Feature width for WebKB index lists.
        #[arg(long)]
        num_features: Option<usize>,
    },
    /// Print counts and per-class sizes of a canonical dataset.
    Stats { dir: PathBuf },
    /// Train a single model (split 0, init 0).
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Master seed, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for run.json, used by `export`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every split × init cell of a config and aggregate.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment at every point of the config's τ/λ/ε grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Median seconds per epoch of the baseline and regularized variants.
    Time {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write predictions.tsv and embeddings.tsv for a trained run.
    Export {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic stochastic-block-model dataset in canonical form.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        nodes_per_class: usize,
        #[arg(long, default_value_t = 3)]
        classes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Ingest {
            format,
            paths,
            out,
            name,
            num_features,
        } => {
            let name = name
                .or_else(|| out.file_name().map(|n| n.to_string_lossy().into_owned()))
                .unwrap_or_else(|| "dataset".into());
            let ds = match format {
                Format::ContentCites => data::ingest_content_cites(&name, &paths[0], &paths[1])?,
                Format::Webkb => data::ingest_webkb(&name, &paths[0], &paths[1], num_features)?,
                Format::Pubmed => data::ingest_pubmed(&name, &paths[0], &paths[1])?,
            };
            ds.save(&out).with_context(|| format!("writing {}", out.display()))?;
            println!(
                "{}: {} nodes, {} edges, {} features, {} classes",
                ds.name,
                ds.graph.num_nodes(),
                ds.graph.num_edges(),
                ds.graph.num_features(),
                ds.graph.num_classes()
            );
        }
        Command::Stats { dir } => {
            let report = data::stats(&data::load(&dir)?);
            print!("{report}");
        }
        Command::Train { config, seed, out } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let ds = harness::load_dataset(&cfg)?;
            let (artifact, _) = harness::single_run_on(&ds, &cfg, seed)?;
            let r = &artifact.result;
            println!(
                "test_accuracy\t{}\nval_accuracy\t{}\nbest_epoch\t{}\nepochs_run\t{}\ntau\t{}\nlambda\t{}\nepsilon\t{}\nseconds_per_epoch\t{}",
                r.test_accuracy, r.val_accuracy, r.best_epoch, r.epochs_run, r.tau, r.lambda, r.epsilon, r.seconds_per_epoch
            );
            if let Some(dir) = out {
                harness::write_run(&dir, &artifact)?;
            }
        }
        Command::Experiment { config, out } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let exp = harness::run_experiment(&cfg)?;
            harness::write_experiment(&out, &exp, &cfg)?;
            let s = &exp.summary;
            println!(
                "{} {}{}: {:.2} ± {:.2} over {} runs ({} failed)",
                exp.dataset,
                cfg.model.kind,
                if cfg.train.regularized { " (regularized)" } else { "" },
                100.0 * s.mean_accuracy,
                100.0 * s.std_accuracy,
                s.runs - s.failures,
                s.failures
            );
            if s.too_many_failures() {
                eprintln!("more than 10% of runs failed");
                return Ok(ExitCode::from(2));
            }
        }
        Command::Sweep { config, out } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let ds = harness::load_dataset(&cfg)?;
            let rows = harness::sweep_on(&ds, &cfg)?;
            harness::write_sweep(&out, &rows)?;
            for r in &rows {
                println!(
                    "tau={}\tlambda={}\tepsilon={}\t{:.2}",
                    r.tau,
                    r.lambda,
                    r.epsilon,
                    100.0 * r.summary.mean_accuracy
                );
            }
        }
        Command::Time { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let ds = harness::load_dataset(&cfg)?;
            println!("dataset\tmodel\tregularized\tepochs\tmedian_seconds_per_epoch");
            for row in harness::time_epochs_on(&ds, &cfg)? {
                println!(
                    "{}\t{}\t{}\t{}\t{}",
                    ds.name, row.model, row.regularized, row.epochs, row.median_seconds
                );
            }
        }
        Command::Export { run, out } => {
            let acc = harness::export(&run, &out)?;
            println!("test_accuracy\t{acc}");
        }
        Command::Synth {
            out,
            nodes_per_class,
            classes,
            seed,
        } => {
            if classes < 2 {
                bail!("at least two classes are required");
            }
            let cfg = SbmConfig {
                nodes_per_class,
                num_classes: classes,
                ..SbmConfig::default()
            };
            let ds = Dataset {
                name: "sbm".into(),
                graph: sbm(&cfg, seed)?,
                class_names: (0..classes).map(|c| format!("c{c}")).collect(),
            };
            ds.save(&out)?;
            println!("sbm: {} nodes, {} edges", ds.graph.num_nodes(), ds.graph.num_edges());
        }
    }
    Ok(ExitCode::SUCCESS)
}
