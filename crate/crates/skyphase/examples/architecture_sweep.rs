//! Sweep the estimator architecture across window lengths and hidden
//! sizes at desk scale, and print the resulting accuracy-versus-scale
//! table next to the expectation baseline and the quantum bound.
//!
//! Six LSTM trainings at 10⁵ pulses — about half a minute in release
//! mode. Writes out/sweep.csv and a companion gnuplot script.

use std::path::Path;

use skyphase::harness::{sweep, ChannelMode, ExperimentConfig};
use skyphase::propagation::GridConfig;

fn main() -> skyphase::Result<()> {
    let mut cfg = ExperimentConfig { seed: 2, ..ExperimentConfig::default() };
    cfg.apply_desk_scale();
    cfg.channel = ChannelMode::FullPropagation {
        n_realizations: 16,
        grid: GridConfig { size: 256, pitch: 0.08, ..GridConfig::default() },
    };
    cfg.out_dir = "out".into();

    let n_values = [20usize, 40, 60];
    let z_values = [2usize, 4];
    println!(
        "sweeping N ∈ {n_values:?} × z ∈ {z_values:?} at {} training pulses...\n",
        cfg.train_pulses
    );
    let table = sweep(&cfg, &n_values, &z_values)?;

    println!("{:<12} {:>4} {:>4} {:>9} {:>14}", "series", "N", "z", "scale", "value [rad²]");
    for row in &table.rows {
        println!(
            "{:<12} {:>4} {:>4} {:>9} {:>14.6}",
            row.series, row.window_len, row.z_dim, row.scale, row.value
        );
    }

    let (csv, gp) = table.write(Path::new(&cfg.out_dir))?;
    println!("\nwrote {} and {}", csv.display(), gp.display());
    Ok(())
}
