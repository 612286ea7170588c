//! End-to-end experiment at desk scale: channel cache, shared datasets,
//! all three estimator kinds, both phase-error cases, CSV reports —
//! the library equivalent of `skyphase evaluate`.
//!
//! Case 1 ties the signal phase error to the reference; in Case 2 each
//! coherence window carries an extra offset the estimator has never
//! seen, which is where learned temporal structure starts to pay off.
//!
//! Roughly half a minute in release mode; writes results under out/.

use std::path::Path;

use skyphase::harness::{
    generate_channel_cache, run_experiment_with_cache, ExperimentConfig, ModelSpec,
};
use skyphase::propagation::GridConfig;

fn main() -> skyphase::Result<()> {
    let mut cfg = ExperimentConfig { seed: 9, ..ExperimentConfig::default() };
    cfg.apply_desk_scale();
    cfg.models = vec![
        ModelSpec::Identity,
        ModelSpec::Expectation { window_len: 40 },
        ModelSpec::Lstm { window_len: 40, z_dim: 4 },
    ];

    let grid = GridConfig { size: 256, pitch: 0.08, ..GridConfig::default() };
    println!("building a 16-realization channel cache...");
    let cache = generate_channel_cache(&cfg, 16, &grid)?;

    for case in [1u8, 2] {
        cfg.case = case;
        let table = run_experiment_with_cache(&cfg, &cache)?;
        println!("\ncase {case}:");
        println!("{:<12} {:>4} {:>4} {:>14} {:>12}", "estimator", "N", "z", "variance [rad²]", "train [s]");
        for row in &table.rows {
            println!(
                "{:<12} {:>4} {:>4} {:>14.6} {:>12.2}",
                row.kind, row.window_len, row.z_dim, row.est_error_variance, row.train_time_s
            );
        }
        let dir = format!("out/case{case}");
        let (results, timings) = table.write(Path::new(&dir))?;
        println!("wrote {} and {}", results.display(), timings.display());
    }
    Ok(())
}
