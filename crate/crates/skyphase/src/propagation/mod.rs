//! Layered-atmosphere beam propagation: equal-turbulence-weight layer
//! partitions, von Kármán phase screens, split-step angular-spectrum
//! diffraction, and receiver-aperture transmissivity.
//!
//! A downlink realization propagates a collimated Gaussian beam from the
//! satellite plane through one phase screen per layer (placed at the layer
//! centre) down to the receiver plane, where the collected power fraction
//! inside the telescope aperture gives the channel transmissivity for one
//! coherence window.

mod screen;
mod splitstep;

pub use screen::{generate_screen, von_karman_psd};
pub use splitstep::{propagate, transmissivity, ComplexField};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::turbulence::{cn2, coherence_time, rms_wind, AtmosphereProfile};

/// Altitude partition of the turbulent path with one screen per layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerStack {
    /// Layer boundaries, strictly increasing from h₀ to H, m. Length
    /// `n_layers + 1`.
    pub boundaries: Vec<f64>,
    /// Screen altitude per layer (layer centre), m.
    pub screen_altitudes: Vec<f64>,
    /// Fried parameter per layer, m.
    pub r0_per_layer: Vec<f64>,
    /// Geometric path length per unit altitude, sec(θ_z).
    pub path_scale: f64,
}

impl LayerStack {
    pub fn n_layers(&self) -> usize {
        self.r0_per_layer.len()
    }

    /// Whole-path Fried parameter implied by the per-layer values:
    /// r0 = (Σᵢ r0ᵢ^(−5/3))^(−3/5).
    pub fn composite_r0(&self) -> f64 {
        self.r0_per_layer
            .iter()
            .map(|r| r.powf(-5.0 / 3.0))
            .sum::<f64>()
            .powf(-3.0 / 5.0)
    }
}

/// One random frozen-atmosphere phase screen.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseScreen {
    /// Phase values, rad, row-major `size × size`.
    pub grid: Vec<f64>,
    /// Grid cell side, m.
    pub pitch: f64,
    /// Cells per side (power of two).
    pub size: usize,
}

/// One channel draw: what the quantum-signal layer needs to know about
/// the atmosphere during a single coherence window.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    /// Receiver-aperture power fraction, ∈ (0, 1].
    pub transmissivity: f64,
    /// Channel coherence time, s.
    pub coherence_time: f64,
    /// The atmosphere draw that produced this realization.
    pub profile: AtmosphereProfile,
}

/// Numerical grid and optics for split-step propagation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Cells per side; power of two.
    pub size: usize,
    /// Grid cell side, m.
    pub pitch: f64,
    /// Number of atmosphere layers (one screen each).
    pub n_layers: usize,
    /// Launch beam 1/e² intensity radius w₀ at the satellite, m.
    pub beam_waist: f64,
    /// Receiver telescope aperture radius, m.
    pub aperture_radius: f64,
}

impl Default for GridConfig {
    /// 512×512 at 4 cm pitch: a 20.5 m window, so the 2.5 m receiver
    /// aperture occupies well under half the grid, and the angular-spectrum
    /// sampling criterion holds for every leg of the default geometry.
    fn default() -> Self {
        GridConfig {
            size: 512,
            pitch: 0.04,
            n_layers: 10,
            beam_waist: 0.15,
            aperture_radius: 1.25,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.size.is_power_of_two() || self.size < 16 {
            return Err(Error::config("grid size must be a power of two, at least 16"));
        }
        if !(self.pitch > 0.0 && self.pitch.is_finite()) {
            return Err(Error::config("grid pitch must be positive"));
        }
        if self.n_layers == 0 {
            return Err(Error::config("n_layers must be at least 1"));
        }
        if !(self.beam_waist > 0.0) {
            return Err(Error::config("beam_waist must be positive"));
        }
        let half_grid = 0.5 * self.size as f64 * self.pitch;
        if !(self.aperture_radius > 0.0 && self.aperture_radius <= half_grid) {
            return Err(Error::config(format!(
                "aperture_radius must lie in (0, {half_grid}] to fit inside the grid"
            )));
        }
        Ok(())
    }
}

/// Number of trapezoid nodes for the cumulative-turbulence table used to
/// place layer boundaries. At ~1.2 m resolution over the default path the
/// induced boundary error is far below any physical scale in C²ₙ.
const PARTITION_NODES: usize = 400_001;

/// Partitions [h₀, H] into `n_layers` layers of equal integrated
/// turbulence ∫C²ₙ dh and assigns each layer its Fried parameter
/// r0 = [0.423·(2π/λ)²·sec(θ_z)·∫_layer C²ₙ dh]^(−3/5), with the screen
/// placed at the layer centre.
///
/// Equal weighting makes all per-layer r0 identical and the composite r0
/// independent of `n_layers`.
pub fn build_layers(profile: &AtmosphereProfile, n_layers: usize) -> Result<LayerStack> {
    profile.validate()?;
    if n_layers == 0 {
        return Err(Error::config("n_layers must be at least 1"));
    }

    let v_rms = rms_wind(profile.v_ground)?;
    let h0 = profile.receiver_altitude;
    let hh = profile.satellite_altitude;
    let step = (hh - h0) / (PARTITION_NODES - 1) as f64;

    // Cumulative trapezoid table of ∫C²ₙ dh from h₀.
    let mut cum = Vec::with_capacity(PARTITION_NODES);
    cum.push(0.0);
    let mut prev = cn2(h0, v_rms, profile.cn2_ground);
    let mut acc = 0.0;
    for i in 1..PARTITION_NODES {
        let h = h0 + step * i as f64;
        let c = cn2(h, v_rms, profile.cn2_ground);
        acc += 0.5 * (prev + c) * step;
        cum.push(acc);
        prev = c;
    }
    let total = *cum.last().unwrap();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::config("profile has zero integrated turbulence"));
    }

    let mut boundaries = Vec::with_capacity(n_layers + 1);
    boundaries.push(h0);
    for i in 1..n_layers {
        let target = total * i as f64 / n_layers as f64;
        let j = cum.partition_point(|&c| c < target).max(1);
        // Linear interpolation inside the bracketing table cell.
        let frac = (target - cum[j - 1]) / (cum[j] - cum[j - 1]);
        boundaries.push(h0 + step * ((j - 1) as f64 + frac));
    }
    boundaries.push(hh);
    for w in boundaries.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::config(
                "layer partition degenerated; fewer layers needed for this profile",
            ));
        }
    }

    let sec_z = profile.sec_zenith();
    let k = 2.0 * std::f64::consts::PI / profile.wavelength;
    let weight = total / n_layers as f64;
    let r0 = (0.423 * k * k * sec_z * weight).powf(-3.0 / 5.0);

    let screen_altitudes = boundaries.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    Ok(LayerStack {
        boundaries,
        screen_altitudes,
        r0_per_layer: vec![r0; n_layers],
        path_scale: sec_z,
    })
}

/// Runs one full channel realization: layer partition, one random screen
/// per layer, split-step propagation of the launch beam from the satellite
/// plane to the receiver, aperture transmissivity, coherence time.
///
/// Deterministic given (`profile`, `grid`, RNG state). Transmissivity is
/// normalized by the launched power, so energy absorbed by the boundary
/// window counts as lost.
pub fn simulate_channel<R: Rng + ?Sized>(
    profile: &AtmosphereProfile,
    grid: &GridConfig,
    rng: &mut R,
) -> Result<ChannelRealization> {
    profile.validate()?;
    grid.validate()?;

    let tau = coherence_time(profile)?;
    let stack = build_layers(profile, grid.n_layers)?;
    let screens = stack
        .r0_per_layer
        .iter()
        .map(|&r0| {
            generate_screen(r0, profile.outer_scale, profile.inner_scale, grid.size, grid.pitch, rng)
        })
        .collect::<Result<Vec<_>>>()?;

    let beam = ComplexField::collimated_gaussian(
        grid.size,
        grid.pitch,
        profile.wavelength,
        grid.beam_waist,
    )?;
    let launched = beam.total_power();
    let received = propagate(&beam, &stack, &screens)?;
    let t = transmissivity(&received, grid.aperture_radius)? * received.total_power() / launched;

    Ok(ChannelRealization {
        transmissivity: t.min(1.0),
        coherence_time: tau,
        profile: profile.clone(),
    })
}

/// Draws a transmissivity uniformly from a precomputed sample cache.
///
/// Dataset generation needs thousands of coherence windows; resampling a
/// modest cache of full propagation results keeps it fast without
/// changing the T distribution's support.
pub fn surrogate_transmissivity<R: Rng + ?Sized>(rng: &mut R, cache: &[f64]) -> Result<f64> {
    if cache.is_empty() {
        return Err(Error::config("surrogate transmissivity cache is empty"));
    }
    for &t in cache {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::config(format!(
                "surrogate cache value {t} outside (0, 1]"
            )));
        }
    }
    Ok(cache[rng.gen_range(0..cache.len())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn single_layer_is_whole_path() {
        let profile = AtmosphereProfile::default();
        let stack = build_layers(&profile, 1).unwrap();
        assert_eq!(stack.boundaries.len(), 2);
        assert_eq!(stack.boundaries[0], profile.receiver_altitude);
        assert_eq!(stack.boundaries[1], profile.satellite_altitude);
        assert!((stack.composite_r0() / stack.r0_per_layer[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn composite_r0_partition_invariant() {
        let profile = AtmosphereProfile::default();
        let r0_whole = build_layers(&profile, 1).unwrap().composite_r0();
        for n in [5, 10, 20] {
            let stack = build_layers(&profile, n).unwrap();
            assert!(
                (stack.composite_r0() / r0_whole - 1.0).abs() < 1e-6,
                "n_layers={n} composite r0 drifted"
            );
        }
        // Frozen from an independent quadrature of the default profile.
        assert!((r0_whole / 0.7230786694183344 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn layer_geometry_invariants() {
        let profile = AtmosphereProfile::default();
        let stack = build_layers(&profile, 10).unwrap();
        assert_eq!(stack.boundaries.len(), 11);
        for (i, w) in stack.boundaries.windows(2).enumerate() {
            assert!(w[1] > w[0]);
            let c = stack.screen_altitudes[i];
            assert!(c > w[0] && c < w[1], "screen {i} not inside its layer");
        }
        for &r0 in &stack.r0_per_layer {
            assert!(r0 > 0.0 && r0.is_finite());
        }

        // Layer widths are *not* monotone in altitude: C²ₙ has a secondary
        // high-altitude bump near 10 km, so widths shrink again above it
        // before the huge final layer. The extremes are still ordered.
        let widths: Vec<f64> = stack.boundaries.windows(2).map(|w| w[1] - w[0]).collect();
        let first = widths[0];
        let last = *widths.last().unwrap();
        assert!(widths.iter().all(|&w| w >= first));
        assert!(widths.iter().all(|&w| w <= last));
        assert!(
            widths.windows(2).any(|w| w[1] < w[0]),
            "expected a width decrease above the turbulence bump"
        );
    }

    #[test]
    fn zero_layers_rejected() {
        let profile = AtmosphereProfile::default();
        assert!(build_layers(&profile, 0).is_err());
    }

    #[test]
    fn surrogate_point_mass_and_support() {
        let mut rng = substream(9, "surrogate", 0);
        for _ in 0..32 {
            assert_eq!(surrogate_transmissivity(&mut rng, &[0.9]).unwrap(), 0.9);
        }
        let cache = [0.3, 0.55, 0.7, 0.81];
        for _ in 0..1000 {
            let t = surrogate_transmissivity(&mut rng, &cache).unwrap();
            assert!(cache.contains(&t));
        }
        assert!(surrogate_transmissivity(&mut rng, &[]).is_err());
        assert!(surrogate_transmissivity(&mut rng, &[1.2]).is_err());
    }

    #[test]
    fn surrogate_mean_matches_cache() {
        let mut rng = substream(10, "surrogate-mean", 0);
        let cache: Vec<f64> = (0..100).map(|i| 0.3 + 0.005 * i as f64).collect();
        let cache_mean = cache.iter().sum::<f64>() / cache.len() as f64;
        let cache_var =
            cache.iter().map(|t| (t - cache_mean).powi(2)).sum::<f64>() / cache.len() as f64;
        let n = 100_000;
        let mean = (0..n)
            .map(|_| surrogate_transmissivity(&mut rng, &cache).unwrap())
            .sum::<f64>()
            / n as f64;
        let se = (cache_var / n as f64).sqrt();
        assert!((mean - cache_mean).abs() < 3.0 * se);
    }
}
