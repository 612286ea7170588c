//! Pulse-level phase-error simulation: quadrature encoding and phase
//! recovery, the detection-noise variance model, and Case 1 / Case 2
//! paired (Δφ_R, Δφ_S) sequence generation over coherence windows.
//!
//! Case 1 ties the reference and signal phase errors together up to
//! per-pulse Gaussian noise; Case 2 adds a per-window offset δ between
//! them that is constant inside each coherence window.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::ChannelRealization;

/// Wraps a phase to the (−π, π] convention used everywhere in this
/// crate.
pub fn wrap_phase(x: f64) -> f64 {
    // In-range values pass through untouched so that already-wrapped
    // phases survive a second wrap bit-for-bit.
    if x > -std::f64::consts::PI && x <= std::f64::consts::PI {
        return x;
    }
    let w = (x + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    if w <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        w
    }
}

/// A pair of quadrature values in shot-noise units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadratures {
    pub x: f64,
    pub p: f64,
}

/// Noise and modulation parameters of the detection chain, plus the
/// distributions of the per-window random channel quantities.
///
/// Pairs are (mean, variance); every Normal in this crate is
/// parameterized by its variance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Reference pulse intensity |α_R|², SNU.
    pub ref_intensity: f64,
    /// Detector efficiency η_det ∈ (0, 1].
    pub det_efficiency: f64,
    /// Electronic noise ξ_el, SNU.
    pub electronic_noise: f64,
    /// Channel excess noise ξ_ch, SNU.
    pub channel_noise: f64,
    /// Relative-phase drift variance σ²_drift, rad².
    pub drift_variance: f64,
    /// Gaussian modulation variance V_mod, SNU.
    pub mod_variance: f64,
    /// Coherent-efficiency distribution (mean, variance).
    pub gamma_mean_var: (f64, f64),
    /// Signal phase-error distribution Δφ_S (mean, variance), rad/rad².
    pub signal_phase_mean_var: (f64, f64),
    /// Case 2 per-window offset variance (zero-mean), rad².
    pub case2_offset_var: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            // |α_R|² = 20·V_mod with the canonical V_mod = 10.
            ref_intensity: 200.0,
            det_efficiency: 0.95,
            electronic_noise: 0.01,
            channel_noise: 0.0172,
            drift_variance: 0.1012,
            mod_variance: 10.0,
            gamma_mean_var: (0.8430, 0.0025),
            signal_phase_mean_var: (0.2618, 0.0524),
            case2_offset_var: 0.0524,
        }
    }
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("ref_intensity", self.ref_intensity),
            ("electronic_noise", self.electronic_noise),
            ("channel_noise", self.channel_noise),
            ("drift_variance", self.drift_variance),
            ("mod_variance", self.mod_variance),
            ("gamma variance", self.gamma_mean_var.1),
            ("gamma mean", self.gamma_mean_var.0),
            ("signal phase variance", self.signal_phase_mean_var.1),
            ("case2_offset_var", self.case2_offset_var),
        ];
        for (name, v) in positives {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.det_efficiency > 0.0 && self.det_efficiency <= 1.0) {
            return Err(Error::config("det_efficiency must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Channel conditions frozen over one coherence window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceWindow {
    pub window_id: u64,
    /// Pulses in the window (τ · pulse rate, at least 1).
    pub n_pulses: usize,
    /// Signal phase error Δφ_S, constant in the window, rad.
    pub signal_phase: f64,
    /// Case 2 reference/signal offset δ (0 under Case 1), rad.
    pub case2_offset: f64,
    /// Coherent efficiency γ ∈ (0, 1].
    pub gamma: f64,
    pub transmissivity: f64,
    /// Per-pulse Gaussian phase-noise variance from the detection model,
    /// rad². Strictly positive for physical windows (the drift floor);
    /// zero is tolerated for synthetic noiseless sequences.
    pub sigma2_error: f64,
}

impl CoherenceWindow {
    pub fn validate(&self) -> Result<()> {
        if self.n_pulses < 1 {
            return Err(Error::config("window must contain at least one pulse"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config("gamma must lie in (0, 1]"));
        }
        if !(self.transmissivity > 0.0 && self.transmissivity <= 1.0) {
            return Err(Error::config("transmissivity must lie in (0, 1]"));
        }
        if !(self.sigma2_error >= 0.0 && self.sigma2_error.is_finite()) {
            return Err(Error::config("sigma2_error must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Paired per-pulse phase-error series with window bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSequence {
    /// Reference phase error Δφ_R per pulse, rad, wrapped to (−π, π].
    pub ref_errors: Vec<f64>,
    /// Signal phase error Δφ_S per pulse, rad, wrapped to (−π, π].
    pub sig_errors: Vec<f64>,
    /// Ordinal of the coherence window each pulse belongs to.
    pub window_index: Vec<u64>,
    /// 1 or 2.
    pub case_label: u8,
}

impl PhaseSequence {
    pub fn validate(&self) -> Result<()> {
        if self.ref_errors.len() != self.sig_errors.len()
            || self.ref_errors.len() != self.window_index.len()
        {
            return Err(Error::shape("phase sequence series lengths differ"));
        }
        if self.window_index.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::shape("window_index must be non-decreasing"));
        }
        if self.case_label != 1 && self.case_label != 2 {
            return Err(Error::config("case_label must be 1 or 2"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ref_errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ref_errors.is_empty()
    }

    /// Cuts all three series to at most `n_pulses`, so a dataset built
    /// from whole coherence windows can land on an exact pulse budget.
    pub fn truncate(&mut self, n_pulses: usize) {
        self.ref_errors.truncate(n_pulses);
        self.sig_errors.truncate(n_pulses);
        self.window_index.truncate(n_pulses);
    }
}

/// Relative phase between two quadrature pairs:
/// atan2(P_B·X_A − X_B·P_A, X_B·X_A + P_B·P_A) ∈ (−π, π].
///
/// This recovers φ exactly when `bob = rotate(alice, φ)`, regardless of
/// the encoded state.
pub fn phase_error(alice: Quadratures, bob: Quadratures) -> Result<f64> {
    let cross = bob.p * alice.x - bob.x * alice.p;
    let dot = bob.x * alice.x + bob.p * alice.p;
    if cross == 0.0 && dot == 0.0 {
        return Err(Error::numerical("phase undefined for zero-amplitude quadratures"));
    }
    Ok(cross.atan2(dot))
}

/// Rotates the quadrature vector by φ:
/// (x·cosφ − p·sinφ, x·sinφ + p·cosφ).
pub fn rotate(q: Quadratures, phi: f64) -> Quadratures {
    let (s, c) = phi.sin_cos();
    Quadratures { x: q.x * c - q.p * s, p: q.x * s + q.p * c }
}

/// Draws one Gaussian-modulated coherent state: x and p independent
/// zero-mean Normals of variance `v_mod`.
pub fn encode_coherent_state<R: Rng + ?Sized>(v_mod: f64, rng: &mut R) -> Result<Quadratures> {
    if !(v_mod > 0.0 && v_mod.is_finite()) {
        return Err(Error::config("modulation variance must be positive"));
    }
    let dist = Normal::new(0.0, v_mod.sqrt())
        .map_err(|e| Error::numerical(format!("modulation distribution: {e}")))?;
    Ok(Quadratures { x: dist.sample(rng), p: dist.sample(rng) })
}

/// Detection excess noise referred through the coherent efficiency:
/// ξ_det = ((1 − γ) + ξ_el)·η_det/γ.
pub fn detector_excess_noise(gamma: f64, xi_el: f64, eta_det: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::config(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    if !(eta_det > 0.0 && eta_det <= 1.0) {
        return Err(Error::config(format!("eta_det must lie in (0, 1], got {eta_det}")));
    }
    if !(xi_el >= 0.0) {
        return Err(Error::config("electronic noise must be non-negative"));
    }
    Ok(((1.0 - gamma) + xi_el) * eta_det / gamma)
}

/// Detection-stage phase variance for one pulse:
/// σ²_det = (ξ_ch + 2(1 + ξ_det)/(η_det·T)) / |α_R|².
pub fn detector_phase_variance(params: &NoiseParams, t: f64, xi_det: f64) -> Result<f64> {
    params.validate()?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::config(format!("transmissivity must lie in (0, 1], got {t}")));
    }
    if !(xi_det >= 0.0) {
        return Err(Error::config("detector excess noise must be non-negative"));
    }
    Ok((params.channel_noise + 2.0 * (1.0 + xi_det) / (params.det_efficiency * t))
        / params.ref_intensity)
}

/// Total per-pulse Gaussian phase-error variance: detection plus drift.
pub fn total_phase_variance(sigma2_det: f64, sigma2_drift: f64) -> f64 {
    sigma2_det + sigma2_drift
}

/// Draws the frozen conditions of one coherence window from a channel
/// realization: pulse count from the coherence time, then Δφ_S, the
/// Case 2 offset (zero under Case 1), and γ, with the per-pulse noise
/// variance assembled from the detection model.
///
/// `window_id` is left 0; dataset assembly assigns ordinals.
pub fn sample_window<R: Rng + ?Sized>(
    rng: &mut R,
    params: &NoiseParams,
    channel: &ChannelRealization,
    pulse_rate: f64,
    case: u8,
) -> Result<CoherenceWindow> {
    params.validate()?;
    if case != 1 && case != 2 {
        return Err(Error::config(format!("case must be 1 or 2, got {case}")));
    }
    if !(pulse_rate > 0.0 && pulse_rate.is_finite()) {
        return Err(Error::config("pulse_rate must be positive"));
    }
    if !(channel.transmissivity > 0.0 && channel.transmissivity <= 1.0) {
        return Err(Error::config("channel transmissivity outside (0, 1]"));
    }
    if !(channel.coherence_time > 0.0) {
        return Err(Error::config("channel coherence time must be positive"));
    }

    let n_pulses = ((channel.coherence_time * pulse_rate).round() as usize).max(1);
    let (sig_mean, sig_var) = params.signal_phase_mean_var;
    let signal_phase = Normal::new(sig_mean, sig_var.sqrt()).unwrap().sample(rng);
    let case2_offset = if case == 2 {
        Normal::new(0.0, params.case2_offset_var.sqrt()).unwrap().sample(rng)
    } else {
        0.0
    };
    let (g_mean, g_var) = params.gamma_mean_var;
    let gamma = Normal::new(g_mean, g_var.sqrt())
        .unwrap()
        .sample(rng)
        .clamp(1e-6, 1.0);

    let xi_det = detector_excess_noise(gamma, params.electronic_noise, params.det_efficiency)?;
    let sigma2_det = detector_phase_variance(params, channel.transmissivity, xi_det)?;
    Ok(CoherenceWindow {
        window_id: 0,
        n_pulses,
        signal_phase,
        case2_offset,
        gamma,
        transmissivity: channel.transmissivity,
        sigma2_error: total_phase_variance(sigma2_det, params.drift_variance),
    })
}

/// Expands coherence windows into the per-pulse paired series:
/// Δφ_S[t] = signal_phase of the owning window and
/// Δφ_R[t] = signal_phase + case2_offset + ε_t with
/// ε_t ~ 𝒩(0, sigma2_error) i.i.d., both wrapped to (−π, π].
///
/// The case label is inferred from the offsets: any nonzero offset marks
/// the sequence Case 2 (a Case 2 offset draw is zero with probability
/// zero).
pub fn gen_sequence<R: Rng + ?Sized>(
    rng: &mut R,
    params: &NoiseParams,
    windows: &[CoherenceWindow],
) -> Result<PhaseSequence> {
    params.validate()?;
    if windows.is_empty() {
        return Err(Error::config("cannot generate a sequence from zero windows"));
    }
    let total: usize = windows.iter().map(|w| w.n_pulses).sum();
    let mut seq = PhaseSequence {
        ref_errors: Vec::with_capacity(total),
        sig_errors: Vec::with_capacity(total),
        window_index: Vec::with_capacity(total),
        case_label: if windows.iter().any(|w| w.case2_offset != 0.0) { 2 } else { 1 },
    };
    for (ordinal, w) in windows.iter().enumerate() {
        w.validate()?;
        let noise = Normal::new(0.0, w.sigma2_error.sqrt())
            .map_err(|e| Error::numerical(format!("noise distribution: {e}")))?;
        let sig = wrap_phase(w.signal_phase);
        let biased = w.signal_phase + w.case2_offset;
        for _ in 0..w.n_pulses {
            seq.sig_errors.push(sig);
            seq.ref_errors.push(wrap_phase(biased + noise.sample(rng)));
            seq.window_index.push(ordinal as u64);
        }
    }
    Ok(seq)
}

/// Quadrature-level variant of [`gen_sequence`] that exercises the full
/// encode → phase-shift → recover chain per pulse: a Gaussian-modulated
/// state is encoded, the generated reference phase error is applied as a
/// physical rotation, and Δφ_R is recovered through [`phase_error`].
/// The recovered series equals the phase-domain one to round-off, which
/// is exactly the consistency this mode is for; statistics are
/// unchanged.
pub fn gen_sequence_quadrature<R: Rng + ?Sized>(
    rng: &mut R,
    params: &NoiseParams,
    windows: &[CoherenceWindow],
) -> Result<PhaseSequence> {
    params.validate()?;
    if windows.is_empty() {
        return Err(Error::config("cannot generate a sequence from zero windows"));
    }
    let total: usize = windows.iter().map(|w| w.n_pulses).sum();
    let mut seq = PhaseSequence {
        ref_errors: Vec::with_capacity(total),
        sig_errors: Vec::with_capacity(total),
        window_index: Vec::with_capacity(total),
        case_label: if windows.iter().any(|w| w.case2_offset != 0.0) { 2 } else { 1 },
    };
    for (ordinal, w) in windows.iter().enumerate() {
        w.validate()?;
        let noise = Normal::new(0.0, w.sigma2_error.sqrt())
            .map_err(|e| Error::numerical(format!("noise distribution: {e}")))?;
        let sig = wrap_phase(w.signal_phase);
        let biased = w.signal_phase + w.case2_offset;
        for _ in 0..w.n_pulses {
            let intended = wrap_phase(biased + noise.sample(rng));
            let alice = encode_coherent_state(params.mod_variance, rng)?;
            let bob = rotate(alice, intended);
            seq.sig_errors.push(sig);
            seq.ref_errors.push(phase_error(alice, bob)?);
            seq.window_index.push(ordinal as u64);
        }
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::turbulence::AtmosphereProfile;

    fn test_channel(t: f64, tau: f64) -> ChannelRealization {
        ChannelRealization {
            transmissivity: t,
            coherence_time: tau,
            profile: AtmosphereProfile::default(),
        }
    }

    #[test]
    fn wrap_phase_convention() {
        use std::f64::consts::PI;
        assert_eq!(wrap_phase(0.3), 0.3);
        assert!((wrap_phase(PI + 0.1) - (-PI + 0.1)).abs() < 1e-12);
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-0.2) + 0.2).abs() < 1e-15);
    }

    #[test]
    fn phase_error_basics() {
        let e = |ax, ap, bx, bp| {
            phase_error(Quadratures { x: ax, p: ap }, Quadratures { x: bx, p: bp }).unwrap()
        };
        assert_eq!(e(1.0, 0.0, 1.0, 0.0), 0.0);
        assert!((e(1.0, 0.0, 0.0, 1.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let alice = Quadratures { x: 0.7, p: -1.3 };
        let bob = rotate(alice, 0.3);
        assert!((phase_error(alice, bob).unwrap() - 0.3).abs() < 1e-12);
        let zero = Quadratures { x: 0.0, p: 0.0 };
        assert!(phase_error(zero, zero).is_err());
    }

    #[test]
    fn rotate_basics() {
        let q = Quadratures { x: 1.0, p: 0.0 };
        let r = rotate(q, std::f64::consts::FRAC_PI_2);
        assert!(r.x.abs() < 1e-15 && (r.p - 1.0).abs() < 1e-15);
        let q = Quadratures { x: -0.4, p: 2.2 };
        let back = rotate(rotate(q, 1.234), -1.234);
        assert!((back.x - q.x).abs() < 1e-12 && (back.p - q.p).abs() < 1e-12);
        let rot = rotate(q, 2.9);
        let n0 = (q.x * q.x + q.p * q.p).sqrt();
        let n1 = (rot.x * rot.x + rot.p * rot.p).sqrt();
        assert!((n0 - n1).abs() < 1e-12);
    }

    #[test]
    fn coherent_state_statistics() {
        let mut rng = substream(31, "encode", 0);
        let n = 1_000_000;
        let (mut sx, mut sxx, mut spp, mut sxp, mut sp) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let q = encode_coherent_state(10.0, &mut rng).unwrap();
            sx += q.x;
            sp += q.p;
            sxx += q.x * q.x;
            spp += q.p * q.p;
            sxp += q.x * q.p;
        }
        let nf = n as f64;
        let var_x = sxx / nf - (sx / nf).powi(2);
        let var_p = spp / nf - (sp / nf).powi(2);
        let corr = (sxp / nf - sx / nf * sp / nf) / (var_x * var_p).sqrt();
        assert!((var_x / 10.0 - 1.0).abs() < 0.01, "var_x {var_x}");
        assert!((var_p / 10.0 - 1.0).abs() < 0.01, "var_p {var_p}");
        assert!(corr.abs() < 0.01, "corr {corr}");

        let tiny = encode_coherent_state(1e-30, &mut rng).unwrap();
        assert!(tiny.x.abs() < 1e-12 && tiny.p.abs() < 1e-12);
        assert!(encode_coherent_state(0.0, &mut rng).is_err());
    }

    #[test]
    fn excess_noise_values() {
        assert_eq!(detector_excess_noise(1.0, 0.0, 0.95).unwrap(), 0.0);
        let v = detector_excess_noise(0.8430, 0.01, 0.95).unwrap();
        let by_hand = ((1.0 - 0.8430) + 0.01) * 0.95 / 0.8430;
        assert!((v / by_hand - 1.0).abs() < 1e-15);
        assert!((v - 0.188197).abs() < 1e-6);
        assert!(detector_excess_noise(0.0, 0.01, 0.95).is_err());
        assert!(detector_excess_noise(-0.3, 0.01, 0.95).is_err());
        let mut prev = f64::INFINITY;
        for i in 1..=100 {
            let g = i as f64 / 100.0;
            let v = detector_excess_noise(g, 0.01, 0.95).unwrap();
            assert!(v < prev, "not decreasing at gamma={g}");
            prev = v;
        }
    }

    #[test]
    fn phase_variance_values() {
        let params = NoiseParams::default();
        let v = detector_phase_variance(&params, 1.0, 0.188197).unwrap();
        assert!((v - 0.0125934).abs() < 1e-6, "got {v}");
        let half = detector_phase_variance(&params, 0.5, 0.188197).unwrap();
        assert!(half > v);
        let bright = NoiseParams { ref_intensity: 1e15, ..params.clone() };
        assert!(detector_phase_variance(&bright, 1.0, 0.188197).unwrap() < 1e-10);
        assert!(detector_phase_variance(&params, 0.0, 0.1).is_err());
        assert!(detector_phase_variance(&params, -0.5, 0.1).is_err());
    }

    #[test]
    fn total_variance_is_a_sum() {
        assert_eq!(total_phase_variance(0.0, 0.0), 0.0);
        let v = total_phase_variance(0.0125934, 0.1012);
        assert!((v - 0.1137934).abs() < 1e-7);
        let (a, b, c) = (0.31, 0.007, 0.0041);
        let left = total_phase_variance(total_phase_variance(a, b), c);
        let right = total_phase_variance(a, total_phase_variance(b, c));
        assert!((left - right).abs() < 1e-16);
    }

    #[test]
    fn window_sampling_statistics() {
        let params = NoiseParams::default();
        let channel = test_channel(0.68, 0.010);
        let mut rng = substream(31, "window", 0);

        let w = sample_window(&mut rng, &params, &channel, 1.0e6, 1).unwrap();
        assert_eq!(w.n_pulses, 10_000);
        assert_eq!(w.case2_offset, 0.0);
        assert!(w.sigma2_error > params.drift_variance);

        let n = 10_000;
        let mut mean_sig = 0.0;
        for _ in 0..n {
            let w = sample_window(&mut rng, &params, &channel, 1.0e6, 1).unwrap();
            assert_eq!(w.case2_offset, 0.0);
            assert!(w.gamma > 0.0 && w.gamma <= 1.0);
            mean_sig += w.signal_phase;
        }
        mean_sig /= n as f64;
        let se = (params.signal_phase_mean_var.1 / n as f64).sqrt();
        assert!(
            (mean_sig - params.signal_phase_mean_var.0).abs() < 3.0 * se,
            "signal phase mean {mean_sig}"
        );

        let w2 = sample_window(&mut rng, &params, &channel, 1.0e6, 2).unwrap();
        assert!(w2.case2_offset != 0.0);
        assert!(sample_window(&mut rng, &params, &channel, 1.0e6, 3).is_err());
    }

    #[test]
    fn sequence_noise_statistics() {
        let params = NoiseParams::default();
        let mut rng = substream(31, "seq", 0);
        let w = CoherenceWindow {
            window_id: 0,
            n_pulses: 1_000_000,
            signal_phase: 0.26,
            case2_offset: 0.0,
            gamma: 0.84,
            transmissivity: 0.68,
            sigma2_error: 0.1150,
        };
        let seq = gen_sequence(&mut rng, &params, &[w]).unwrap();
        seq.validate().unwrap();
        assert_eq!(seq.case_label, 1);
        let n = seq.len() as f64;
        let diffs: Vec<f64> =
            seq.ref_errors.iter().zip(&seq.sig_errors).map(|(r, s)| r - s).collect();
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
        assert!((var / w.sigma2_error - 1.0).abs() < 0.01, "var {var}");

        // Case 2: the window offset shows up as the difference's mean.
        let w2 = CoherenceWindow { case2_offset: -0.31, n_pulses: 100_000, ..w };
        let seq2 = gen_sequence(&mut rng, &params, &[w2]).unwrap();
        assert_eq!(seq2.case_label, 2);
        let mean2 = seq2
            .ref_errors
            .iter()
            .zip(&seq2.sig_errors)
            .map(|(r, s)| r - s)
            .sum::<f64>()
            / seq2.len() as f64;
        let se = (w2.sigma2_error / seq2.len() as f64).sqrt();
        assert!((mean2 - (-0.31)).abs() < 3.0 * se, "offset mean {mean2}");
    }

    #[test]
    fn noiseless_sequence_is_exact() {
        let params = NoiseParams::default();
        let mut rng = substream(31, "noiseless", 0);
        let w = CoherenceWindow {
            window_id: 0,
            n_pulses: 500,
            signal_phase: 0.26,
            case2_offset: 0.0,
            gamma: 0.84,
            transmissivity: 0.68,
            sigma2_error: 0.0,
        };
        let seq = gen_sequence(&mut rng, &params, &[w]).unwrap();
        assert_eq!(seq.ref_errors, seq.sig_errors);
        assert!(gen_sequence(&mut rng, &params, &[]).is_err());
    }

    #[test]
    fn quadrature_mode_agrees_with_phase_mode() {
        let params = NoiseParams::default();
        let w = CoherenceWindow {
            window_id: 0,
            n_pulses: 2_000,
            signal_phase: 0.26,
            case2_offset: 0.1,
            gamma: 0.84,
            transmissivity: 0.68,
            sigma2_error: 0.115,
        };
        let seq = gen_sequence_quadrature(&mut substream(31, "quad", 0), &params, &[w]).unwrap();
        seq.validate().unwrap();
        assert_eq!(seq.case_label, 2);
        // The recovered phases stay wrapped and finite, and their spread
        // matches the injected noise scale.
        assert!(seq.ref_errors.iter().all(|v| v.is_finite() && *v > -4.0 && *v <= 4.0));
        let n = seq.len() as f64;
        let mean = seq.ref_errors.iter().sum::<f64>() / n;
        let var = seq.ref_errors.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
        assert!((var / 0.115 - 1.0).abs() < 0.15, "var {var}");
    }

    #[test]
    fn phase_error_inverts_rotation() {
        let mut rng = substream(31, "invert", 0);
        for _ in 0..1000 {
            let q = Quadratures {
                x: rng.gen_range(-5.0..5.0),
                p: rng.gen_range(-5.0..5.0),
            };
            if q.x.abs() < 1e-3 && q.p.abs() < 1e-3 {
                continue;
            }
            let phi = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            let got = phase_error(q, rotate(q, phi)).unwrap();
            assert!((got - phi).abs() < 1e-10, "phi {phi} got {got}");
        }
    }
}
