//! Wave-optics checks: vacuum diffraction against Gaussian-beam theory,
//! turbulence ordering of transmissivity, and screen statistics.

use skyphase::propagation::{
    build_layers, generate_screen, propagate, simulate_channel, transmissivity, ChannelRealization,
    ComplexField, GridConfig, LayerStack, PhaseScreen,
};
use skyphase::rng::substream;
use skyphase::turbulence::AtmosphereProfile;

/// 256-cell grid with the same 20.5 m physical window as the default
/// configuration; plenty for the smooth vacuum beam.
fn coarse_grid() -> GridConfig {
    GridConfig {
        size: 256,
        pitch: 0.08,
        n_layers: 10,
        beam_waist: 0.15,
        aperture_radius: 1.25,
    }
}

fn zero_screen(size: usize, pitch: f64) -> PhaseScreen {
    PhaseScreen { grid: vec![0.0; size * size], pitch, size }
}

#[test]
fn vacuum_beam_matches_gaussian_optics() {
    // With all screens zeroed the split-step result must reproduce the
    // analytic divergence of a collimated Gaussian beam over the
    // 498 km satellite-to-receiver path.
    let profile = AtmosphereProfile::default();
    let grid = coarse_grid();
    let stack = build_layers(&profile, 1).unwrap();
    let beam = ComplexField::collimated_gaussian(
        grid.size,
        grid.pitch,
        profile.wavelength,
        grid.beam_waist,
    )
    .unwrap();
    let launched = beam.total_power();
    let received =
        propagate(&beam, &stack, &[zero_screen(grid.size, grid.pitch)]).unwrap();

    // 1/e² intensity radius from Gaussian-beam theory.
    let z = profile.satellite_altitude - profile.receiver_altitude;
    let rayleigh =
        std::f64::consts::PI * grid.beam_waist * grid.beam_waist / profile.wavelength;
    let w_analytic = grid.beam_waist * (1.0 + (z / rayleigh).powi(2)).sqrt();
    assert!((w_analytic / 1.6449 - 1.0).abs() < 1e-3, "geometry drifted: {w_analytic}");

    // Measured radius from the second intensity moment: <r²> = w²/2.
    let n = grid.size;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        let x = (i as f64 - n as f64 / 2.0) * grid.pitch;
        for j in 0..n {
            let y = (j as f64 - n as f64 / 2.0) * grid.pitch;
            let p = received.grid[i * n + j].norm_sqr();
            num += (x * x + y * y) * p;
            den += p;
        }
    }
    let w_measured = (2.0 * num / den).sqrt();
    assert!(
        (w_measured / w_analytic - 1.0).abs() < 0.01,
        "beam radius {w_measured} vs analytic {w_analytic}"
    );

    // Encircled power inside the receiver aperture: 1 − exp(−2a²/w²).
    let t_analytic =
        1.0 - (-2.0 * grid.aperture_radius.powi(2) / (w_analytic * w_analytic)).exp();
    let t_sim = transmissivity(&received, grid.aperture_radius).unwrap()
        * received.total_power()
        / launched;
    assert!(
        (t_sim / t_analytic - 1.0).abs() < 0.01,
        "transmissivity {t_sim} vs analytic {t_analytic}"
    );
    // The absorbing boundary should barely touch this beam.
    assert!(received.total_power() / launched > 0.99);
}

#[test]
fn stronger_turbulence_reduces_transmissivity() {
    // Paired draws: the same random stream under weak and strong ground
    // turbulence, receiver at sea level so the ground term dominates.
    // A wide collecting aperture averages out scintillation, leaving the
    // monotone scattering loss: the stronger channel must collect less
    // power in (almost) every pair.
    let grid = GridConfig { aperture_radius: 2.5, ..coarse_grid() };
    let base = AtmosphereProfile { receiver_altitude: 0.0, ..AtmosphereProfile::default() };
    let weak = AtmosphereProfile { cn2_ground: 1.7e-15, ..base.clone() };
    let strong = AtmosphereProfile { cn2_ground: 1.0e-14, ..base };

    let mut ordered = 0;
    let pairs = 12;
    for i in 0..pairs {
        let t_weak = simulate_channel(&weak, &grid, &mut substream(77, "pair", i))
            .unwrap()
            .transmissivity;
        let t_strong = simulate_channel(&strong, &grid, &mut substream(77, "pair", i))
            .unwrap()
            .transmissivity;
        assert!(t_weak > 0.0 && t_weak <= 1.0);
        assert!(t_strong > 0.0 && t_strong <= 1.0);
        if t_strong < t_weak {
            ordered += 1;
        }
    }
    assert!(ordered >= pairs - 1, "only {ordered}/{pairs} pairs ordered");
}

#[test]
fn channel_realizations_are_reproducible() {
    let grid = coarse_grid();
    let profile = AtmosphereProfile::default();
    let a = simulate_channel(&profile, &grid, &mut substream(3, "chan", 0)).unwrap();
    let b = simulate_channel(&profile, &grid, &mut substream(3, "chan", 0)).unwrap();
    assert_eq!(a, b);
    assert!(a.transmissivity > 0.0 && a.transmissivity <= 1.0);
    // Coherence time comes straight from the profile, independent of the
    // wave-optics draw.
    let c = simulate_channel(&profile, &grid, &mut substream(3, "chan", 1)).unwrap();
    assert_eq!(a.coherence_time, c.coherence_time);
    assert_ne!(a.transmissivity, c.transmissivity);
}

#[test]
fn screen_amplitude_scales_exactly_with_r0() {
    // Both the spectral base and the subharmonic modes carry an
    // amplitude ∝ r0^(−5/6); with identical random streams two screens at
    // different r0 must be exact scalar multiples.
    let (a, b) = (
        generate_screen(0.08, 5.0, 0.025, 128, 0.02, &mut substream(5, "s", 1)).unwrap(),
        generate_screen(0.16, 5.0, 0.025, 128, 0.02, &mut substream(5, "s", 1)).unwrap(),
    );
    let expected = 2f64.powf(5.0 / 6.0);
    for (x, y) in a.grid.iter().zip(&b.grid) {
        if y.abs() > 1e-12 {
            assert!((x / y / expected - 1.0).abs() < 1e-9, "{x} vs {y}");
        }
    }
}

#[test]
fn aliasing_steps_are_rejected() {
    // A 16-cell grid cannot carry a 250 km angular-spectrum step.
    let stack = LayerStack {
        boundaries: vec![2.0e3, 5.0e5],
        screen_altitudes: vec![2.51e5],
        r0_per_layer: vec![1.0],
        path_scale: 1.0,
    };
    let beam = ComplexField::collimated_gaussian(16, 0.04, 1550e-9, 0.15).unwrap();
    let err = propagate(&beam, &stack, &[zero_screen(16, 0.04)]).unwrap_err();
    assert!(err.to_string().contains("sampling"), "unexpected error: {err}");
}

#[test]
fn mismatched_screens_are_rejected() {
    let profile = AtmosphereProfile::default();
    let stack = build_layers(&profile, 2).unwrap();
    let beam = ComplexField::collimated_gaussian(256, 0.08, profile.wavelength, 0.15).unwrap();
    // Wrong count.
    assert!(propagate(&beam, &stack, &[zero_screen(256, 0.08)]).is_err());
    // Wrong geometry.
    let screens = [zero_screen(256, 0.08), zero_screen(128, 0.08)];
    assert!(propagate(&beam, &stack, &screens).is_err());
}

#[test]
fn realization_carries_its_profile() {
    let grid = coarse_grid();
    let profile = AtmosphereProfile { v_ground: 4.2, ..AtmosphereProfile::default() };
    let r: ChannelRealization =
        simulate_channel(&profile, &grid, &mut substream(8, "chan", 2)).unwrap();
    assert_eq!(r.profile, profile);
    let pulses = r.coherence_time * 1.0e6;
    assert!((1.0e3..=1.0e5).contains(&pulses));
}
