//! Experiment orchestration: configuration, deterministic dataset
//! assembly over channel realizations, estimator training/evaluation,
//! and the architecture-sweep curves, with CSV/JSON persistence.
//!
//! Everything downstream of a root seed derives named sub-streams
//! ([`crate::rng::substream`]) — channel draws, dataset noise, per-model
//! initialization — so a (config, seed) pair pins every output byte.

mod io;

pub use io::{
    gen_dataset, load_channel_cache, load_dataset, load_model, save_channel_cache, save_dataset,
    save_model, write_qcrb_csv, Dataset, DatasetMeta, ModelCheckpoint, CHECKPOINT_FORMAT_VERSION,
};

use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::qcrb;
use crate::error::{Error, Result};
use crate::estimator::{
    estimation_error_variance, scale, train, EstimatorKind, Optimizer, TrainConfig,
};
use crate::phasesim::{
    gen_sequence, sample_window, wrap_phase, CoherenceWindow, NoiseParams, PhaseSequence,
};
use crate::propagation::{simulate_channel, ChannelRealization, GridConfig};
use crate::rng::{derive_seed, substream};
use crate::turbulence::{sample_atmosphere, AtmosphereProfile, SamplingRanges};

/// One estimator requested from an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    Lstm { window_len: usize, z_dim: usize },
    Expectation { window_len: usize },
    Identity,
}

impl ModelSpec {
    /// Measurements consumed per estimate (1 for the identity).
    pub fn window_len(&self) -> usize {
        match self {
            ModelSpec::Lstm { window_len, .. } | ModelSpec::Expectation { window_len } => {
                *window_len
            }
            ModelSpec::Identity => 1,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelSpec::Lstm { .. } => "lstm",
            ModelSpec::Expectation { .. } => "expectation",
            ModelSpec::Identity => "identity",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelSpec::Lstm { window_len, z_dim } => {
                if window_len < 1 || z_dim < 1 {
                    return Err(Error::config("lstm spec needs window_len ≥ 1 and z_dim ≥ 1"));
                }
            }
            ModelSpec::Expectation { window_len } => {
                if window_len < 1 {
                    return Err(Error::config("expectation spec needs window_len ≥ 1"));
                }
            }
            ModelSpec::Identity => {}
        }
        Ok(())
    }

    fn describe(&self) -> String {
        match *self {
            ModelSpec::Lstm { window_len, z_dim } => format!("lstm N={window_len} z={z_dim}"),
            ModelSpec::Expectation { window_len } => format!("expectation N={window_len}"),
            ModelSpec::Identity => "identity".to_string(),
        }
    }
}

/// Training hyper-parameters shared by every LSTM spec in an experiment;
/// window length, hidden size, and stream seed are filled in per model.
///
/// The two named recipes are tuned to the dataset scales: one pass with
/// large batches resists overfitting the ~10⁵-pulse desk datasets, while
/// ~10⁶-pulse runs support the plainer two-pass small-batch schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSettings {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub gradient_clip: f64,
    pub optimizer: Optimizer,
}

impl TrainSettings {
    /// Desk-scale recipe (~10⁵ training pulses).
    pub fn desk() -> Self {
        TrainSettings {
            learning_rate: 3e-3,
            batch_size: 256,
            epochs: 1,
            gradient_clip: 5.0,
            optimizer: Optimizer::AdaptiveMoment,
        }
    }

    /// Full-scale recipe (~10⁶ training pulses).
    pub fn paper() -> Self {
        TrainSettings {
            learning_rate: 1e-3,
            batch_size: 64,
            epochs: 2,
            gradient_clip: 5.0,
            optimizer: Optimizer::AdaptiveMoment,
        }
    }

    /// Fills in the per-model fields to produce a concrete [`TrainConfig`].
    pub fn to_train_config(self, window_len: usize, z_dim: usize, seed: u64) -> TrainConfig {
        TrainConfig {
            window_len,
            z_dim,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            epochs: self.epochs,
            seed,
            gradient_clip: self.gradient_clip,
            optimizer: self.optimizer,
        }
    }
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings::desk()
    }
}

fn default_realizations() -> usize {
    100
}

/// Where per-window channel conditions come from. Dataset generation
/// needs thousands of windows, so resampling a cache of full-propagation
/// results is the default workflow; inline propagation is the explicit
/// self-contained alternative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ChannelMode {
    /// Run split-step propagation for `n_realizations` fresh atmosphere
    /// draws as part of the experiment.
    FullPropagation {
        #[serde(default = "default_realizations")]
        n_realizations: usize,
        #[serde(default)]
        grid: GridConfig,
    },
    /// Load a realization table previously written by the
    /// `simulate-channel` subcommand (or [`save_channel_cache`]).
    SurrogateCache { path: PathBuf },
}

impl Default for ChannelMode {
    fn default() -> Self {
        ChannelMode::SurrogateCache { path: PathBuf::from("out/channels.csv") }
    }
}

/// Full description of one reproducible experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// 1 = reference and signal phase errors tied; 2 = per-window offset.
    pub case: u8,
    pub models: Vec<ModelSpec>,
    pub train_pulses: usize,
    pub test_pulses: usize,
    pub noise: NoiseParams,
    pub atmosphere: AtmosphereProfile,
    pub sampling: SamplingRanges,
    pub channel: ChannelMode,
    /// Pulse repetition rate, Hz; sets pulses per coherence window.
    pub pulse_rate: f64,
    /// |α_S|² used for the Cramér-Rao reference curve.
    pub signal_amplitude_sq: f64,
    pub train: TrainSettings,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            case: 1,
            models: vec![
                ModelSpec::Identity,
                ModelSpec::Expectation { window_len: 40 },
                ModelSpec::Lstm { window_len: 40, z_dim: 4 },
            ],
            train_pulses: 100_000,
            test_pulses: 100_000,
            noise: NoiseParams::default(),
            atmosphere: AtmosphereProfile::default(),
            sampling: SamplingRanges::default(),
            channel: ChannelMode::default(),
            pulse_rate: 1.0e6,
            signal_amplitude_sq: 10.0,
            train: TrainSettings::default(),
            seed: 0,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.case != 1 && self.case != 2 {
            return Err(Error::config(format!("case must be 1 or 2, got {}", self.case)));
        }
        if self.models.is_empty() {
            return Err(Error::config("at least one model spec is required"));
        }
        let mut max_window = 1;
        for spec in &self.models {
            spec.validate()?;
            max_window = max_window.max(spec.window_len());
        }
        if self.train_pulses < 10 * max_window || self.test_pulses < 10 * max_window {
            return Err(Error::config(format!(
                "dataset sizes must be at least 10·max(N) = {}",
                10 * max_window
            )));
        }
        if !(self.pulse_rate > 0.0 && self.pulse_rate.is_finite()) {
            return Err(Error::config("pulse_rate must be positive"));
        }
        if !(self.signal_amplitude_sq > 0.0 && self.signal_amplitude_sq.is_finite()) {
            return Err(Error::config("signal_amplitude_sq must be positive"));
        }
        self.noise.validate()?;
        self.atmosphere.validate()?;
        self.sampling.validate()?;
        match &self.channel {
            ChannelMode::FullPropagation { n_realizations, grid } => {
                if *n_realizations < 1 {
                    return Err(Error::config("n_realizations must be at least 1"));
                }
                grid.validate()?;
            }
            ChannelMode::SurrogateCache { path } => {
                if path.as_os_str().is_empty() {
                    return Err(Error::config("surrogate cache path is empty"));
                }
            }
        }
        let tc = self.train.to_train_config(max_window, 1, 0);
        tc.validate()?;
        Ok(())
    }

    /// Desk scale: 10⁵-pulse datasets and the matching training recipe.
    pub fn apply_desk_scale(&mut self) {
        self.train_pulses = 100_000;
        self.test_pulses = 100_000;
        self.train = TrainSettings::desk();
    }

    /// Full scale: 10⁶-pulse datasets and the matching training recipe.
    pub fn apply_paper_scale(&mut self) {
        self.train_pulses = 1_000_000;
        self.test_pulses = 1_000_000;
        self.train = TrainSettings::paper();
    }
}

/// One evaluated estimator in a results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub model_id: usize,
    pub kind: String,
    pub window_len: usize,
    /// 0 for non-LSTM rows.
    pub z_dim: usize,
    /// Architecture scale; 0 for non-LSTM rows.
    pub scale: u64,
    pub est_error_variance: f64,
    /// Mean wrapped estimation error — reported alongside the variance
    /// because the variance alone cannot see a constant bias.
    pub mean_bias: f64,
    pub train_time_s: f64,
    pub eval_time_s: f64,
}

/// Evaluation results of one experiment, in model order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub case: u8,
    pub rows: Vec<ResultRow>,
}

/// Channel realizations plus coherence-window bookkeeping for one
/// generated dataset.
fn draw_windows<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &ExperimentConfig,
    cache: &[ChannelRealization],
    n_pulses: usize,
) -> Result<Vec<CoherenceWindow>> {
    let mut windows = Vec::new();
    let mut total = 0usize;
    while total < n_pulses {
        let pick = rng.gen_range(0..cache.len());
        let mut w = sample_window(rng, &cfg.noise, &cache[pick], cfg.pulse_rate, cfg.case)?;
        w.window_id = windows.len() as u64;
        total += w.n_pulses;
        windows.push(w);
    }
    Ok(windows)
}

/// Assembles a dataset of exactly `n_pulses` pulses: coherence windows
/// are drawn from the channel cache under the sub-stream named `label`
/// until the budget is covered, expanded to the per-pulse series, and
/// truncated to the budget.
pub fn build_dataset(
    cfg: &ExperimentConfig,
    cache: &[ChannelRealization],
    label: &str,
    n_pulses: usize,
) -> Result<Dataset> {
    if cache.is_empty() {
        return Err(Error::config("channel realization cache is empty"));
    }
    if n_pulses == 0 {
        return Err(Error::config("dataset must contain at least one pulse"));
    }
    let mut rng = substream(cfg.seed, label, 0);
    let windows = draw_windows(&mut rng, cfg, cache, n_pulses)?;
    let mut sequence = gen_sequence(&mut rng, &cfg.noise, &windows)?;
    sequence.truncate(n_pulses);
    Ok(Dataset { windows, sequence })
}

/// Runs `n_realizations` independent full-propagation channel draws.
/// Realization `i` consumes only sub-stream `("channel", i)`, so the
/// cache is independent of evaluation order and thread count.
pub fn generate_channel_cache(
    cfg: &ExperimentConfig,
    n_realizations: usize,
    grid: &GridConfig,
) -> Result<Vec<ChannelRealization>> {
    (0..n_realizations)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(cfg.seed, "channel", i as u64);
            let profile = sample_atmosphere(&mut rng, &cfg.sampling, &cfg.atmosphere);
            simulate_channel(&profile, grid, &mut rng)
                .map_err(|e| e.with_context(format!("channel realization {i}")))
        })
        .collect()
}

/// Materializes the configured channel mode into a realization cache.
pub fn resolve_channel_cache(cfg: &ExperimentConfig) -> Result<Vec<ChannelRealization>> {
    match &cfg.channel {
        ChannelMode::FullPropagation { n_realizations, grid } => {
            generate_channel_cache(cfg, *n_realizations, grid)
        }
        ChannelMode::SurrogateCache { path } => load_channel_cache(path, &cfg.atmosphere),
    }
}

fn eval_stats(est: &EstimatorKind, test: &PhaseSequence) -> Result<(f64, f64)> {
    let n = est.window_len();
    let preds = est.estimate_series(&test.ref_errors)?;
    let truths = &test.sig_errors[n - 1..];
    let variance = estimation_error_variance(&preds, truths)?;
    let bias = preds
        .iter()
        .zip(truths)
        .map(|(p, t)| wrap_phase(p - t))
        .sum::<f64>()
        / preds.len() as f64;
    Ok((variance, bias))
}

fn fit_spec(
    cfg: &ExperimentConfig,
    spec: &ModelSpec,
    model_id: usize,
    train_set: &PhaseSequence,
) -> Result<(EstimatorKind, Option<(TrainConfig, crate::estimator::LstmParams, Vec<f64>)>)> {
    match *spec {
        ModelSpec::Identity => Ok((EstimatorKind::Identity, None)),
        ModelSpec::Expectation { window_len } => {
            Ok((EstimatorKind::Expectation { window_len }, None))
        }
        ModelSpec::Lstm { window_len, z_dim } => {
            let tc = cfg.train.to_train_config(
                window_len,
                z_dim,
                derive_seed(cfg.seed, "model", model_id as u64),
            );
            let (params, history) = train(train_set, &tc)?;
            Ok((
                EstimatorKind::Lstm { params: params.clone(), window_len },
                Some((tc, params, history)),
            ))
        }
    }
}

/// Trains and evaluates every configured model on shared train/test
/// datasets. Models are processed in order (each under its own derived
/// seed); per-model evaluation parallelizes internally. The first
/// `window_len − 1` pulses of the test sequence have no complete window
/// and are excluded from each model's evaluation.
pub fn run_experiment_with_cache(
    cfg: &ExperimentConfig,
    cache: &[ChannelRealization],
) -> Result<ResultsTable> {
    cfg.validate()?;
    let train_set = build_dataset(cfg, cache, "dataset-train", cfg.train_pulses)?;
    let test_set = build_dataset(cfg, cache, "dataset-test", cfg.test_pulses)?;

    let mut rows = Vec::with_capacity(cfg.models.len());
    for (model_id, spec) in cfg.models.iter().enumerate() {
        let ctx = || format!("model {model_id} ({})", spec.describe());
        let t0 = Instant::now();
        let (est, trained) =
            fit_spec(cfg, spec, model_id, &train_set.sequence).map_err(|e| e.with_context(ctx()))?;
        let train_time_s = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let (est_error_variance, mean_bias) =
            eval_stats(&est, &test_set.sequence).map_err(|e| e.with_context(ctx()))?;
        let eval_time_s = t1.elapsed().as_secs_f64();

        let (z_dim, scale_value) = match *spec {
            ModelSpec::Lstm { window_len, z_dim } => (z_dim, scale(window_len, z_dim)),
            _ => (0, 0),
        };
        drop(trained);
        rows.push(ResultRow {
            model_id,
            kind: spec.kind_name().to_string(),
            window_len: spec.window_len(),
            z_dim,
            scale: scale_value,
            est_error_variance,
            mean_bias,
            train_time_s,
            eval_time_s,
        });
    }
    Ok(ResultsTable { case: cfg.case, rows })
}

/// [`run_experiment_with_cache`] with the channel cache resolved from
/// the configured mode.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultsTable> {
    cfg.validate()?;
    let cache = resolve_channel_cache(cfg)?;
    run_experiment_with_cache(cfg, &cache)
}

/// One point of a sweep curve; `value` is an estimation-error variance
/// for estimator series and the bound itself for the `qcrb` series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub series: String,
    pub window_len: usize,
    pub z_dim: usize,
    pub scale: u64,
    pub value: f64,
}

/// Architecture-sweep output: one LSTM row per (N, z) grid point, one
/// expectation-baseline row per N, and one Cramér-Rao row per N.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub case: u8,
    pub signal_amplitude_sq: f64,
    pub rows: Vec<SweepRow>,
}

/// Trains an LSTM per (N, z) grid point on one shared dataset pair and
/// evaluates it next to the expectation baseline and the phase-
/// estimation bound. Row count is |n|·|z| + |n| + |n|.
pub fn sweep(cfg: &ExperimentConfig, n_values: &[usize], z_values: &[usize]) -> Result<SweepTable> {
    cfg.validate()?;
    if n_values.is_empty() || z_values.is_empty() {
        return Err(Error::config("sweep grids must be non-empty"));
    }
    let max_n = *n_values.iter().max().unwrap();
    if cfg.train_pulses < 10 * max_n || cfg.test_pulses < 10 * max_n {
        return Err(Error::config(format!(
            "dataset sizes must be at least 10·max(N) = {}",
            10 * max_n
        )));
    }

    let cache = resolve_channel_cache(cfg)?;
    let train_set = build_dataset(cfg, &cache, "dataset-train", cfg.train_pulses)?;
    let test_set = build_dataset(cfg, &cache, "dataset-test", cfg.test_pulses)?;

    let mut rows = Vec::new();
    let mut counter = 0u64;
    for &z_dim in z_values {
        for &window_len in n_values {
            let ctx = format!("sweep lstm N={window_len} z={z_dim}");
            let tc = cfg.train.to_train_config(
                window_len,
                z_dim,
                derive_seed(cfg.seed, "sweep-model", counter),
            );
            counter += 1;
            let (params, _history) =
                train(&train_set.sequence, &tc).map_err(|e| e.with_context(&ctx))?;
            let est = EstimatorKind::Lstm { params, window_len };
            let (variance, _bias) =
                eval_stats(&est, &test_set.sequence).map_err(|e| e.with_context(&ctx))?;
            rows.push(SweepRow {
                series: "lstm".to_string(),
                window_len,
                z_dim,
                scale: scale(window_len, z_dim),
                value: variance,
            });
        }
    }
    for &window_len in n_values {
        let est = EstimatorKind::Expectation { window_len };
        let (variance, _bias) = eval_stats(&est, &test_set.sequence)
            .map_err(|e| e.with_context(format!("sweep expectation N={window_len}")))?;
        rows.push(SweepRow {
            series: "expectation".to_string(),
            window_len,
            z_dim: 0,
            scale: 0,
            value: variance,
        });
    }
    for &window_len in n_values {
        rows.push(SweepRow {
            series: "qcrb".to_string(),
            window_len,
            z_dim: 0,
            scale: 0,
            value: qcrb(window_len, cfg.signal_amplitude_sq),
        });
    }
    Ok(SweepTable { case: cfg.case, signal_amplitude_sq: cfg.signal_amplitude_sq, rows })
}
