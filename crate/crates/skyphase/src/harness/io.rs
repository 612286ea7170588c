//! File formats: dataset CSV with JSON sidecar, versioned model
//! checkpoints, channel-realization tables, and the results/sweep
//! exports.
//!
//! Floating-point values in CSV are written with 17 significant decimal
//! digits, so a save/load round trip reproduces every `f64` bit for bit;
//! checkpoints round-trip through JSON with shortest-exact number
//! encoding, which is equally lossless.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{LstmParams, TrainConfig};
use crate::phasesim::{CoherenceWindow, NoiseParams, PhaseSequence};
use crate::propagation::ChannelRealization;
use crate::rng::derive_seed;
use crate::turbulence::AtmosphereProfile;

use super::{build_dataset, resolve_channel_cache, ExperimentConfig, ResultsTable, SweepTable};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// Coherence windows plus the per-pulse series they expand into.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub windows: Vec<CoherenceWindow>,
    pub sequence: PhaseSequence,
}

/// Provenance sidecar written next to each dataset CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub version: String,
    pub seed: u64,
    pub case: u8,
    pub pulse_rate: f64,
    pub n_pulses: usize,
    pub noise: NoiseParams,
}

/// Versioned LSTM checkpoint; the weight arrays are flat, row-major,
/// and keyed by name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelCheckpoint {
    pub format_version: u32,
    pub z_dim: usize,
    pub window_len: usize,
    pub seed: u64,
    pub train_config: TrainConfig,
    pub weights: LstmParams,
    pub training_history: Vec<f64>,
}

impl ModelCheckpoint {
    pub fn new(train_config: TrainConfig, weights: LstmParams, training_history: Vec<f64>) -> Self {
        ModelCheckpoint {
            format_version: CHECKPOINT_FORMAT_VERSION,
            z_dim: train_config.z_dim,
            window_len: train_config.window_len,
            seed: train_config.seed,
            train_config,
            weights,
            training_history,
        }
    }

    fn check_consistent(&self, path: &Path) -> Result<()> {
        if self.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::parse(
                path,
                format!(
                    "unsupported format_version {} (supported: {CHECKPOINT_FORMAT_VERSION})",
                    self.format_version
                ),
            ));
        }
        if self.z_dim != self.train_config.z_dim
            || self.z_dim != self.weights.z_dim
            || self.window_len != self.train_config.window_len
            || self.seed != self.train_config.seed
        {
            return Err(Error::parse(path, "checkpoint header disagrees with train_config/weights"));
        }
        self.weights
            .validate()
            .map_err(|e| Error::parse(path, format!("weights: {e}")))?;
        Ok(())
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Serializes a checkpoint as pretty JSON. Identical checkpoints always
/// produce identical bytes.
pub fn save_model(path: &Path, checkpoint: &ModelCheckpoint) -> Result<()> {
    checkpoint.check_consistent(path)?;
    let mut text = serde_json::to_string_pretty(checkpoint)
        .map_err(|e| Error::parse(path, format!("serialize: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn load_model(path: &Path) -> Result<ModelCheckpoint> {
    let text = read_text(path)?;
    let checkpoint: ModelCheckpoint =
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
    checkpoint.check_consistent(path)?;
    Ok(checkpoint)
}

/// Writes the per-pulse dataset CSV (17-significant-digit floats) and
/// its provenance sidecar `<stem>.meta.json`.
pub fn save_dataset(path: &Path, dataset: &Dataset, meta: &DatasetMeta) -> Result<()> {
    let seq = &dataset.sequence;
    seq.validate()?;
    if seq.is_empty() {
        return Err(Error::shape("refusing to write an empty dataset"));
    }
    let mut out = String::with_capacity(seq.len() * 96);
    out.push_str(
        "pulse_index,window_id,case,transmissivity,gamma,sigma2_error,delta_phi_R,delta_phi_S\n",
    );
    for i in 0..seq.len() {
        let w_idx = seq.window_index[i] as usize;
        let w = dataset.windows.get(w_idx).ok_or_else(|| {
            Error::shape(format!("window_index {w_idx} outside the window table"))
        })?;
        out.push_str(&format!(
            "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            i,
            seq.window_index[i],
            seq.case_label,
            w.transmissivity,
            w.gamma,
            w.sigma2_error,
            seq.ref_errors[i],
            seq.sig_errors[i],
        ));
    }
    write_text(path, &out)?;
    let sidecar = path.with_extension("meta.json");
    let mut text = serde_json::to_string_pretty(meta)
        .map_err(|e| Error::parse(&sidecar, format!("serialize: {e}")))?;
    text.push('\n');
    write_text(&sidecar, &text)
}

#[derive(Debug, Deserialize)]
struct DatasetRow {
    #[allow(dead_code)]
    pulse_index: u64,
    window_id: u64,
    case: u8,
    #[allow(dead_code)]
    transmissivity: f64,
    #[allow(dead_code)]
    gamma: f64,
    #[allow(dead_code)]
    sigma2_error: f64,
    #[serde(rename = "delta_phi_R")]
    delta_phi_r: f64,
    #[serde(rename = "delta_phi_S")]
    delta_phi_s: f64,
}

/// Reads a dataset CSV back into the per-pulse series.
pub fn load_dataset(path: &Path) -> Result<PhaseSequence> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(e.to_string())),
            _ => Error::parse(path, e.to_string()),
        })?;
    let mut seq = PhaseSequence {
        ref_errors: Vec::new(),
        sig_errors: Vec::new(),
        window_index: Vec::new(),
        case_label: 0,
    };
    for row in reader.deserialize::<DatasetRow>() {
        let row = row.map_err(|e| Error::parse(path, e.to_string()))?;
        if seq.case_label == 0 {
            seq.case_label = row.case;
        } else if seq.case_label != row.case {
            return Err(Error::parse(
                path,
                format!("case flips from {} to {} mid-file", seq.case_label, row.case),
            ));
        }
        seq.ref_errors.push(row.delta_phi_r);
        seq.sig_errors.push(row.delta_phi_s);
        seq.window_index.push(row.window_id);
    }
    if seq.is_empty() {
        return Err(Error::parse(path, "dataset has no rows"));
    }
    seq.validate().map_err(|e| Error::parse(path, e.to_string()))?;
    Ok(seq)
}

/// Builds the train/test datasets for `cfg` and writes them under
/// `cfg.out_dir` as `train.csv` / `test.csv` (plus sidecars). Returns
/// the two CSV paths.
pub fn gen_dataset(cfg: &ExperimentConfig) -> Result<(PathBuf, PathBuf)> {
    cfg.validate()?;
    let cache = resolve_channel_cache(cfg)?;
    let mut paths = Vec::with_capacity(2);
    for (label, n_pulses, name) in [
        ("dataset-train", cfg.train_pulses, "train.csv"),
        ("dataset-test", cfg.test_pulses, "test.csv"),
    ] {
        let dataset = build_dataset(cfg, &cache, label, n_pulses)?;
        let meta = DatasetMeta {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.seed,
            case: cfg.case,
            pulse_rate: cfg.pulse_rate,
            n_pulses,
            noise: cfg.noise.clone(),
        };
        let path = cfg.out_dir.join(name);
        save_dataset(&path, &dataset, &meta)?;
        paths.push(path);
    }
    let test = paths.pop().unwrap();
    let train = paths.pop().unwrap();
    Ok((train, test))
}

/// Writes the channel-realization table; `root_seed` reproduces the
/// per-row sub-stream seeds recorded in the `seed` column.
pub fn save_channel_cache(
    path: &Path,
    root_seed: u64,
    cache: &[ChannelRealization],
) -> Result<()> {
    if cache.is_empty() {
        return Err(Error::shape("refusing to write an empty channel cache"));
    }
    let mut out = String::with_capacity(cache.len() * 96 + 80);
    out.push_str("realization_id,seed,v_ground,cn2_ground,transmissivity,coherence_time_s\n");
    for (i, r) in cache.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            i,
            derive_seed(root_seed, "channel", i as u64),
            r.profile.v_ground,
            r.profile.cn2_ground,
            r.transmissivity,
            r.coherence_time,
        ));
    }
    write_text(path, &out)
}

#[derive(Debug, Deserialize)]
struct ChannelRow {
    #[allow(dead_code)]
    realization_id: u64,
    #[allow(dead_code)]
    seed: u64,
    v_ground: f64,
    cn2_ground: f64,
    transmissivity: f64,
    coherence_time_s: f64,
}

/// Reads a channel-realization table; atmosphere fields that the CSV
/// does not carry (geometry, wavelength, scales) come from `template`.
pub fn load_channel_cache(
    path: &Path,
    template: &AtmosphereProfile,
) -> Result<Vec<ChannelRealization>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(e.to_string())),
            _ => Error::parse(path, e.to_string()),
        })?;
    let mut cache = Vec::new();
    for (i, row) in reader.deserialize::<ChannelRow>().enumerate() {
        let row = row.map_err(|e| Error::parse(path, e.to_string()))?;
        if !(row.transmissivity > 0.0 && row.transmissivity <= 1.0) {
            return Err(Error::parse(
                path,
                format!("row {i}: transmissivity {} outside (0, 1]", row.transmissivity),
            ));
        }
        if !(row.coherence_time_s > 0.0 && row.coherence_time_s.is_finite()) {
            return Err(Error::parse(
                path,
                format!("row {i}: coherence_time_s {} not positive", row.coherence_time_s),
            ));
        }
        cache.push(ChannelRealization {
            transmissivity: row.transmissivity,
            coherence_time: row.coherence_time_s,
            profile: AtmosphereProfile {
                v_ground: row.v_ground,
                cn2_ground: row.cn2_ground,
                ..template.clone()
            },
        });
    }
    if cache.is_empty() {
        return Err(Error::parse(path, "channel cache has no rows"));
    }
    Ok(cache)
}

/// The phase-estimation bound per window length, as a two-column CSV.
pub fn write_qcrb_csv(path: &Path, curve: &[(usize, f64)]) -> Result<()> {
    let mut out = String::from("n_measurements,qcrb\n");
    for &(n, v) in curve {
        out.push_str(&format!("{n},{v:.16e}\n"));
    }
    write_text(path, &out)
}

impl ResultsTable {
    /// Deterministic results: everything except wall-clock timings,
    /// which live in [`ResultsTable::timings_csv`] so that repeated runs
    /// of one (config, seed) pair produce byte-identical result files.
    pub fn results_csv(&self) -> String {
        let mut out =
            String::from("model_id,kind,case,window_len,z_dim,scale,est_error_variance,mean_bias\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.16e},{:.16e}\n",
                r.model_id,
                r.kind,
                self.case,
                r.window_len,
                r.z_dim,
                r.scale,
                r.est_error_variance,
                r.mean_bias,
            ));
        }
        out
    }

    pub fn timings_csv(&self) -> String {
        let mut out = String::from("model_id,kind,train_time_s,eval_time_s\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.6},{:.6}\n",
                r.model_id, r.kind, r.train_time_s, r.eval_time_s
            ));
        }
        out
    }

    /// Writes `results.csv` and `timings.csv` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        let results = dir.join("results.csv");
        let timings = dir.join("timings.csv");
        write_text(&results, &self.results_csv())?;
        write_text(&timings, &self.timings_csv())?;
        Ok((results, timings))
    }
}

impl SweepTable {
    pub fn csv(&self) -> String {
        let mut out = String::from("series,window_len,z_dim,scale,value\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.16e}\n",
                r.series, r.window_len, r.z_dim, r.scale, r.value
            ));
        }
        out
    }

    /// A self-contained gnuplot script for the tidy sweep CSV.
    pub fn gnuplot_script(&self, csv_name: &str) -> String {
        let mut z_values: Vec<usize> = self
            .rows
            .iter()
            .filter(|r| r.series == "lstm")
            .map(|r| r.z_dim)
            .collect();
        z_values.sort_unstable();
        z_values.dedup();
        let mut script = String::new();
        script.push_str(&format!(
            "# estimation error variance vs window length (case {}, |α_S|² = {})\n",
            self.case, self.signal_amplitude_sq
        ));
        script.push_str("set datafile separator ','\n");
        script.push_str("set logscale y\n");
        script.push_str("set xlabel 'window length N'\n");
        script.push_str("set ylabel 'estimation error variance (SNU)'\n");
        script.push_str("set key top right\n");
        script.push_str("plot \\\n");
        for z in &z_values {
            script.push_str(&format!(
                "  '{csv_name}' using (strcol(1) eq 'lstm' && $3 == {z} ? $2 : NaN):5 \
                 with linespoints title 'LSTM z={z}', \\\n"
            ));
        }
        script.push_str(&format!(
            "  '{csv_name}' using (strcol(1) eq 'expectation' ? $2 : NaN):5 \
             with linespoints title 'expectation', \\\n"
        ));
        script.push_str(&format!(
            "  '{csv_name}' using (strcol(1) eq 'qcrb' ? $2 : NaN):5 \
             with lines dashtype 2 title 'QCRB'\n"
        ));
        script
    }

    /// Writes `sweep.csv` and `sweep.gp` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        let csv = dir.join("sweep.csv");
        let script = dir.join("sweep.gp");
        write_text(&csv, &self.csv())?;
        write_text(&script, &self.gnuplot_script("sweep.csv"))?;
        Ok((csv, script))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{ResultRow, SweepRow};
    use crate::phasesim::gen_sequence;
    use crate::rng::substream;

    fn sample_checkpoint() -> ModelCheckpoint {
        let tc = TrainConfig { window_len: 7, z_dim: 3, seed: 99, ..TrainConfig::default() };
        let mut rng = substream(99, "ckpt", 0);
        let params = LstmParams::init(3, &mut rng).unwrap();
        ModelCheckpoint::new(tc, params, vec![0.31, 0.012, 0.0049])
    }

    #[test]
    fn model_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let ckpt = sample_checkpoint();
        save_model(&path, &ckpt).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded, ckpt);
        let first = std::fs::read(&path).unwrap();
        save_model(&path, &loaded).unwrap();
        let second = std::fs::read(&path).unwrap();
        assert_eq!(first, second, "save→load→save must reproduce bytes");
    }

    #[test]
    fn model_version_and_field_errors_are_descriptive() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let ckpt = sample_checkpoint();
        save_model(&path, &ckpt).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, text.replace("\"format_version\": 1", "\"format_version\": 2"))
            .unwrap();
        let err = load_model(&path).unwrap_err();
        assert!(err.to_string().contains("format_version"), "{err}");

        std::fs::write(&path, "{}\n").unwrap();
        let err = load_model(&path).unwrap_err();
        assert!(err.to_string().contains("missing field"), "{err}");

        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_model(&path).unwrap_err(), Error::Parse { .. }));
    }

    fn tiny_dataset(seed: u64) -> Dataset {
        let noise = NoiseParams::default();
        let mut windows = Vec::new();
        for k in 0..3u64 {
            windows.push(CoherenceWindow {
                window_id: k,
                n_pulses: 400,
                signal_phase: 0.2 + 0.01 * k as f64,
                case2_offset: 0.0,
                gamma: 0.84,
                transmissivity: 0.6 + 0.05 * k as f64,
                sigma2_error: 0.11,
            });
        }
        let mut rng = substream(seed, "tiny", 0);
        let sequence = gen_sequence(&mut rng, &noise, &windows).unwrap();
        Dataset { windows, sequence }
    }

    #[test]
    fn dataset_round_trip_preserves_every_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.csv");
        let ds = tiny_dataset(5);
        let meta = DatasetMeta {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: 5,
            case: 1,
            pulse_rate: 1e6,
            n_pulses: ds.sequence.len(),
            noise: NoiseParams::default(),
        };
        save_dataset(&path, &ds, &meta).unwrap();
        let loaded = load_dataset(&path).unwrap();
        assert_eq!(loaded, ds.sequence);
        let sidecar = path.with_extension("meta.json");
        let meta_back: DatasetMeta =
            serde_json::from_str(&std::fs::read_to_string(sidecar).unwrap()).unwrap();
        assert_eq!(meta_back, meta);
    }

    #[test]
    fn malformed_dataset_rows_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(
            &path,
            "pulse_index,window_id,case,transmissivity,gamma,sigma2_error,delta_phi_R,delta_phi_S\n\
             0,0,1,0.6,0.84,0.11,abc,0.2\n",
        )
        .unwrap();
        let err = load_dataset(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");

        std::fs::write(&path, "pulse_index,window_id\n").unwrap();
        assert!(load_dataset(&path).is_err());
    }

    #[test]
    fn channel_cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("channels.csv");
        let template = AtmosphereProfile::default();
        let cache: Vec<ChannelRealization> = [(0.61, 3.0, 2e-15), (0.72, 4.3, 8e-15)]
            .iter()
            .map(|&(t, v, c)| ChannelRealization {
                transmissivity: t,
                coherence_time: 0.0108,
                profile: AtmosphereProfile { v_ground: v, cn2_ground: c, ..template.clone() },
            })
            .collect();
        save_channel_cache(&path, 42, &cache).unwrap();
        let loaded = load_channel_cache(&path, &template).unwrap();
        assert_eq!(loaded.len(), 2);
        for (a, b) in loaded.iter().zip(&cache) {
            assert_eq!(a.transmissivity.to_bits(), b.transmissivity.to_bits());
            assert_eq!(a.coherence_time.to_bits(), b.coherence_time.to_bits());
            assert_eq!(a.profile, b.profile);
        }
        // The seed column reflects the derivation scheme.
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains(&derive_seed(42, "channel", 1).to_string()));
    }

    #[test]
    fn results_and_sweep_exports() {
        let table = ResultsTable {
            case: 1,
            rows: vec![ResultRow {
                model_id: 0,
                kind: "identity".into(),
                window_len: 1,
                z_dim: 0,
                scale: 0,
                est_error_variance: 0.1123,
                mean_bias: -0.0004,
                train_time_s: 0.0,
                eval_time_s: 0.01,
            }],
        };
        let results = table.results_csv();
        assert!(results.starts_with("model_id,kind,case,"));
        assert!(!results.contains("time"), "timings belong to timings.csv");
        assert!(table.timings_csv().contains("train_time_s"));

        let sweep = SweepTable {
            case: 1,
            signal_amplitude_sq: 10.0,
            rows: vec![SweepRow {
                series: "qcrb".into(),
                window_len: 20,
                z_dim: 0,
                scale: 0,
                value: 0.0025,
            }],
        };
        let dir = tempfile::tempdir().unwrap();
        let (csv, gp) = sweep.write(dir.path()).unwrap();
        assert!(std::fs::read_to_string(csv).unwrap().contains("qcrb,20,0,0,"));
        let script = std::fs::read_to_string(gp).unwrap();
        assert!(script.contains("sweep.csv") && script.contains("QCRB"));
    }

    #[test]
    fn qcrb_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("qcrb.csv");
        write_qcrb_csv(&path, &[(20, 0.0025), (40, 0.00125)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("n_measurements,qcrb\n20,"));
        assert_eq!(text.lines().count(), 3);
    }
}
