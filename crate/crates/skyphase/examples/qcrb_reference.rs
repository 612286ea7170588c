//! The quantum Cramér-Rao bound for coherent-state phase estimation:
//! evaluate the closed form across measurement counts, confirm it
//! against the explicit Gaussian Fisher information, and show how a
//! squeezed covariance would change the picture.
//!
//! Instant; writes out/qcrb.csv.

use std::path::Path;

use skyphase::bounds::{qcrb, qcrb_curve, quantum_fisher_info, GaussianState, PhaseEstimationSetting};
use skyphase::harness::write_qcrb_csv;

fn main() -> skyphase::Result<()> {
    let amplitude_sq = 10.0;
    let curve = qcrb_curve(&[1, 20, 40, 60, 80, 100], amplitude_sq);

    println!("phase-estimation bound at |α_S|² = {amplitude_sq}: 1/(2·N·|α_S|²)");
    println!("{:>6}  {:>12}", "N", "bound [rad²]");
    for &(n, v) in &curve {
        println!("{n:>6}  {v:>12.6}");
    }

    // The closed form is the N-measurement Fisher information of a
    // coherent state whose displacement carries the phase; the general
    // route through the Gaussian Fisher information must agree.
    let setting = PhaseEstimationSetting {
        signal_amplitude_sq: amplitude_sq,
        n_measurements: 40,
        phase_offset: 0.7,
    };
    let coherent = GaussianState::coherent(amplitude_sq, 0.7)?;
    let iq = quantum_fisher_info(&setting, &coherent)?;
    println!("\ncoherent state: I_Q = {iq:.6} (closed form 2|α_S|² = {})", 2.0 * amplitude_sq);
    println!("bound via Fisher: {:.8}  closed form: {:.8}", 1.0 / (40.0 * iq), qcrb(40, amplitude_sq));

    // Squeezing the quadrature orthogonal to the displacement derivative
    // raises the information beyond the coherent-state value.
    let squeezed = GaussianState {
        displacement: coherent.displacement,
        covariance: [[2.0, 0.0], [0.0, 0.125]],
    };
    // At phase_offset 0 the derivative points along p, so the p-variance
    // is what counts.
    let setting = PhaseEstimationSetting {
        signal_amplitude_sq: amplitude_sq,
        n_measurements: 40,
        phase_offset: 0.0,
    };
    let state = GaussianState { displacement: [amplitude_sq.sqrt(), 0.0], ..squeezed };
    println!(
        "8 dB squeezing along the informative quadrature: I_Q = {:.2} vs {:.2}",
        quantum_fisher_info(&setting, &state)?,
        2.0 * amplitude_sq
    );

    let path = Path::new("out/qcrb.csv");
    write_qcrb_csv(path, &curve)?;
    println!("\nwrote {}", path.display());
    Ok(())
}
