//! Quantum Fisher information and the quantum Cramér-Rao bound for
//! coherent-state phase estimation.
//!
//! For a single-mode Gaussian state whose displacement rotates with the
//! phase while the covariance stays put, the Fisher information is
//! (∂d)ᵀ Σ⁻¹ (∂d); with the vacuum covariance Σ = ½·I this reduces to
//! the closed form I_Q = 2|α_S|², giving the bound 1/(2N|α_S|²) after N
//! independent measurements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-mode Gaussian state: quadrature displacement [X_S, P_S] and
/// 2×2 covariance, both in shot-noise units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub displacement: [f64; 2],
    pub covariance: [[f64; 2]; 2],
}

impl GaussianState {
    /// Coherent state of intensity |α_S|² at phase φ: displacement
    /// |α_S|·(cos φ, sin φ) over the vacuum covariance ½·I.
    pub fn coherent(amplitude_sq: f64, phase: f64) -> Result<Self> {
        if !(amplitude_sq >= 0.0 && amplitude_sq.is_finite()) {
            return Err(Error::config("amplitude_sq must be finite and non-negative"));
        }
        let a = amplitude_sq.sqrt();
        Ok(GaussianState {
            displacement: [a * phase.cos(), a * phase.sin()],
            covariance: [[0.5, 0.0], [0.0, 0.5]],
        })
    }

    /// Symmetric positive-definite covariance check.
    pub fn validate(&self) -> Result<()> {
        let c = &self.covariance;
        let scale = c[0][0].abs().max(c[1][1].abs()).max(c[0][1].abs());
        if !scale.is_finite() {
            return Err(Error::numerical("covariance contains non-finite entries"));
        }
        if (c[0][1] - c[1][0]).abs() > 1e-12 * scale.max(1e-300) {
            return Err(Error::numerical("covariance is not symmetric"));
        }
        let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        if !(c[0][0] > 0.0 && det > 0.0) {
            return Err(Error::numerical("covariance is not positive-definite"));
        }
        Ok(())
    }
}

/// Phase-estimation problem instance: signal intensity |α_S|², the
/// number of repeated measurements N, and the working phase offset
/// Δφ′ = Δφ_R − Δφ_S around which the bound is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseEstimationSetting {
    pub signal_amplitude_sq: f64,
    pub n_measurements: usize,
    pub phase_offset: f64,
}

impl PhaseEstimationSetting {
    pub fn validate(&self) -> Result<()> {
        if !(self.signal_amplitude_sq > 0.0 && self.signal_amplitude_sq.is_finite()) {
            return Err(Error::config("signal_amplitude_sq must be positive"));
        }
        if self.n_measurements < 1 {
            return Err(Error::config("n_measurements must be at least 1"));
        }
        if !self.phase_offset.is_finite() {
            return Err(Error::config("phase_offset must be finite"));
        }
        Ok(())
    }
}

/// Quantum Fisher information for phase encoded in the displacement,
/// d(Δφ′) = |α_S|·(cos Δφ′, sin Δφ′), with a phase-independent
/// covariance: I_Q = (∂d)ᵀ Σ⁻¹ (∂d).
///
/// A zero signal amplitude is admitted and carries no information.
pub fn quantum_fisher_info(setting: &PhaseEstimationSetting, state: &GaussianState) -> Result<f64> {
    state.validate()?;
    if !(setting.signal_amplitude_sq >= 0.0 && setting.signal_amplitude_sq.is_finite()) {
        return Err(Error::config("signal_amplitude_sq must be finite and non-negative"));
    }
    let c = &state.covariance;
    let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
    // validate() guarantees det > 0; a denormal determinant still counts
    // as numerically singular for the inversion.
    if det.abs() < 1e-300 {
        return Err(Error::numerical("covariance is numerically singular"));
    }
    let inv = [
        [c[1][1] / det, -c[0][1] / det],
        [-c[1][0] / det, c[0][0] / det],
    ];
    let a = setting.signal_amplitude_sq.sqrt();
    let (s, co) = setting.phase_offset.sin_cos();
    let dd = [-a * s, a * co];
    Ok(dd[0] * (inv[0][0] * dd[0] + inv[0][1] * dd[1])
        + dd[1] * (inv[1][0] * dd[0] + inv[1][1] * dd[1]))
}

/// Closed-form phase-estimation bound for a coherent state after N
/// measurements: 1/(2·N·|α_S|²). Degenerate inputs (zero N or zero
/// amplitude) yield +∞ — no measurements or no signal means no bound.
pub fn qcrb(n_measurements: usize, signal_amplitude_sq: f64) -> f64 {
    1.0 / (2.0 * n_measurements as f64 * signal_amplitude_sq)
}

/// The bound per entry of `n_values` at fixed signal intensity, in the
/// input order.
pub fn qcrb_curve(n_values: &[usize], signal_amplitude_sq: f64) -> Vec<(usize, f64)> {
    n_values
        .iter()
        .map(|&n| (n, qcrb(n, signal_amplitude_sq)))
        .collect()
}
