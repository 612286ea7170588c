//! Command-line front end for the experiment harness.
//!
//! All subcommands share one JSON experiment configuration (see
//! `ExperimentConfig`); missing fields take their defaults, and the
//! `--seed`, `--out`, `--case`, and scale flags override the loaded
//! values. Exit codes: 0 success, 2 configuration/parse errors, 3
//! numerical failures.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use skyphase::bounds::qcrb_curve;
use skyphase::error::{Error, Result};
use skyphase::harness::{
    build_dataset, gen_dataset, generate_channel_cache, resolve_channel_cache, run_experiment,
    save_channel_cache, save_model, sweep, write_qcrb_csv, ChannelMode, ExperimentConfig,
    ModelCheckpoint, ModelSpec, ResultsTable,
};
use skyphase::propagation::GridConfig;
use skyphase::rng::derive_seed;

#[derive(Parser)]
#[command(name = "skyphase", version, about = "Turbulent optical channel and phase-estimator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment configuration (defaults apply to missing fields).
    #[arg(long, global = true, value_name = "path")]
    config: Option<PathBuf>,

    /// Root seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory override.
    #[arg(long, global = true, value_name = "dir")]
    out: Option<PathBuf>,

    /// Case override: 1 (tied phases) or 2 (per-window offset).
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=2))]
    case: Option<u8>,

    /// 10⁵-pulse datasets with the desk training recipe.
    #[arg(long, global = true, conflicts_with = "paper_scale")]
    desk_scale: bool,

    /// 10⁶-pulse datasets with the full-scale training recipe.
    #[arg(long, global = true)]
    paper_scale: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run full-propagation channel realizations; write channels.csv.
    SimulateChannel {
        /// Number of realizations (default: from config, else 100).
        #[arg(long)]
        realizations: Option<usize>,
    },
    /// Generate train/test datasets; write train.csv and test.csv.
    GenDataset,
    /// Train the configured LSTM specs; write model-<k>.json.
    Train,
    /// Train and evaluate all configured models; write results.csv and
    /// timings.csv.
    Evaluate,
    /// Estimation-error variance across an (N, z) grid; write sweep.csv
    /// and sweep.gp.
    Sweep {
        /// Window lengths, comma-separated.
        #[arg(long, value_delimiter = ',', default_value = "20,40,60,80,100")]
        n_values: Vec<usize>,
        /// Hidden dimensions, comma-separated.
        #[arg(long, value_delimiter = ',', default_value = "4")]
        z_values: Vec<usize>,
    },
    /// Quantum Cramér-Rao bound curve; write qcrb.csv.
    Qcrb {
        #[arg(long, value_delimiter = ',', default_value = "20,40,60,80,100")]
        n_values: Vec<usize>,
        /// Signal intensity |α_S|² in SNU (default: from config).
        #[arg(long)]
        amplitude_sq: Option<f64>,
    },
    /// Pretty-print results.csv / timings.csv from the output directory.
    Report,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(case) = cli.case {
        cfg.case = case;
    }
    if cli.desk_scale {
        cfg.apply_desk_scale();
    }
    if cli.paper_scale {
        cfg.apply_paper_scale();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_results(table: &ResultsTable) {
    println!(
        "{:>8}  {:<12} {:>5} {:>6} {:>8}  {:>14}  {:>12}",
        "model_id", "kind", "N", "z_dim", "scale", "variance (SNU)", "mean bias"
    );
    for r in &table.rows {
        println!(
            "{:>8}  {:<12} {:>5} {:>6} {:>8}  {:>14.6}  {:>12.2e}",
            r.model_id, r.kind, r.window_len, r.z_dim, r.scale, r.est_error_variance, r.mean_bias
        );
    }
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::SimulateChannel { realizations } => {
            let (n_default, grid) = match &cfg.channel {
                ChannelMode::FullPropagation { n_realizations, grid } => {
                    (*n_realizations, grid.clone())
                }
                ChannelMode::SurrogateCache { .. } => (100, GridConfig::default()),
            };
            let n = realizations.unwrap_or(n_default);
            let cache = generate_channel_cache(&cfg, n, &grid)?;
            let path = cfg.out_dir.join("channels.csv");
            save_channel_cache(&path, cfg.seed, &cache)?;
            let mean_t = cache.iter().map(|r| r.transmissivity).sum::<f64>() / n as f64;
            let mean_tau = cache.iter().map(|r| r.coherence_time).sum::<f64>() / n as f64;
            println!(
                "{n} realizations -> {} (mean T {:.4}, mean coherence time {:.3} ms)",
                path.display(),
                mean_t,
                mean_tau * 1e3
            );
        }
        Command::GenDataset => {
            let (train, test) = gen_dataset(&cfg)?;
            println!("wrote {} and {}", train.display(), test.display());
        }
        Command::Train => {
            let cache = resolve_channel_cache(&cfg)?;
            let train_set = build_dataset(&cfg, &cache, "dataset-train", cfg.train_pulses)?;
            let mut trained = 0usize;
            for (model_id, spec) in cfg.models.iter().enumerate() {
                let ModelSpec::Lstm { window_len, z_dim } = *spec else {
                    continue;
                };
                let tc = cfg.train.to_train_config(
                    window_len,
                    z_dim,
                    derive_seed(cfg.seed, "model", model_id as u64),
                );
                let (params, history) = skyphase::estimator::train(&train_set.sequence, &tc)
                    .map_err(|e| e.with_context(format!("model {model_id}")))?;
                let path = cfg.out_dir.join(format!("model-{model_id}.json"));
                save_model(&path, &ModelCheckpoint::new(tc, params, history.clone()))?;
                println!(
                    "model {model_id} (N={window_len}, z={z_dim}) -> {} (final epoch loss {:.3e})",
                    path.display(),
                    history.last().copied().unwrap_or(f64::NAN)
                );
                trained += 1;
            }
            if trained == 0 {
                return Err(Error::config("no LSTM specs in the model list; nothing to train"));
            }
        }
        Command::Evaluate => {
            let table = run_experiment(&cfg)?;
            let (results, timings) = table.write(&cfg.out_dir)?;
            print_results(&table);
            println!("wrote {} and {}", results.display(), timings.display());
        }
        Command::Sweep { n_values, z_values } => {
            let table = sweep(&cfg, n_values, z_values)?;
            let (csv, gp) = table.write(&cfg.out_dir)?;
            for r in &table.rows {
                println!(
                    "{:<12} N={:<4} z={:<3} scale={:<8} value={:.6e}",
                    r.series, r.window_len, r.z_dim, r.scale, r.value
                );
            }
            println!("wrote {} and {}", csv.display(), gp.display());
        }
        Command::Qcrb { n_values, amplitude_sq } => {
            let amp = amplitude_sq.unwrap_or(cfg.signal_amplitude_sq);
            if !(amp > 0.0 && amp.is_finite()) {
                return Err(Error::config("amplitude_sq must be positive"));
            }
            if n_values.is_empty() || n_values.contains(&0) {
                return Err(Error::config("n_values must be positive"));
            }
            let curve = qcrb_curve(n_values, amp);
            let path = cfg.out_dir.join("qcrb.csv");
            write_qcrb_csv(&path, &curve)?;
            for (n, v) in &curve {
                println!("N={n:<4} qcrb={v:.6e}");
            }
            println!("wrote {}", path.display());
        }
        Command::Report => {
            for name in ["results.csv", "timings.csv"] {
                let path = cfg.out_dir.join(name);
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                println!("== {} ==", path.display());
                for line in text.lines() {
                    println!("{}", line.replace(',', "\t"));
                }
            }
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
