//! Train the LSTM phase estimator at desk scale and compare it against
//! the two baselines (per-pulse identity, window mean) on a shared test
//! set, then save and reload the model checkpoint.
//!
//! About ten seconds in release mode: 10⁵ training pulses, one epoch.

use std::path::Path;

use skyphase::estimator::{train, EstimatorKind};
use skyphase::harness::{
    build_dataset, generate_channel_cache, load_model, save_model, ExperimentConfig,
    ModelCheckpoint, TrainSettings,
};
use skyphase::propagation::GridConfig;
use skyphase::rng::derive_seed;

fn main() -> skyphase::Result<()> {
    let mut cfg = ExperimentConfig { seed: 1, ..ExperimentConfig::default() };
    cfg.apply_desk_scale();

    let grid = GridConfig { size: 256, pitch: 0.08, ..GridConfig::default() };
    println!("building channel cache and datasets...");
    let cache = generate_channel_cache(&cfg, 16, &grid)?;
    let train_set = build_dataset(&cfg, &cache, "dataset-train", cfg.train_pulses)?;
    let test_set = build_dataset(&cfg, &cache, "dataset-test", cfg.test_pulses)?;

    let (window_len, z_dim) = (40, 4);
    let tc = TrainSettings::desk().to_train_config(window_len, z_dim, derive_seed(cfg.seed, "model", 0));
    println!("training LSTM (N = {window_len}, z = {z_dim}) on {} pulses...", cfg.train_pulses);
    let (params, history) = train(&train_set.sequence, &tc)?;
    println!("epoch losses: {history:?}");

    // Evaluate all three estimators on the same held-out sequence. The
    // first N−1 pulses have no complete window and are skipped.
    let lstm = EstimatorKind::Lstm { params: params.clone(), window_len };
    let candidates: [(&str, EstimatorKind); 3] = [
        ("identity", EstimatorKind::Identity),
        ("expectation", EstimatorKind::Expectation { window_len }),
        ("lstm", lstm),
    ];
    println!("\n{:<12} {:>14}", "estimator", "variance [rad²]");
    for (name, est) in &candidates {
        let n = est.window_len();
        let ests = est.estimate_series(&test_set.sequence.ref_errors)?;
        let var = skyphase::estimator::estimation_error_variance(
            &ests,
            &test_set.sequence.sig_errors[n - 1..],
        )?;
        println!("{name:<12} {var:>14.6}");
    }

    let path = Path::new("out/model-demo.json");
    save_model(path, &ModelCheckpoint::new(tc, params, history))?;
    let restored = load_model(path)?;
    println!("\ncheckpoint round trip via {}: z = {}, N = {}", path.display(), restored.z_dim, restored.window_len);
    Ok(())
}
