//! Coherence-time and profile checks against independent quadrature.
//!
//! The reference values here are computed with a plain composite
//! trapezoid rule over millions of nodes, re-stating the profile
//! formulas inline so the comparison exercises the crate's adaptive
//! integrator end to end.

use skyphase::turbulence::{
    bufton_wind, cn2, coherence_time, coherence_time_with, rms_wind, sample_atmosphere,
    AtmosphereProfile, SamplingRanges,
};

/// Composite trapezoid with `n` panels.
fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for i in 1..n {
        acc += f(a + h * i as f64);
    }
    acc * h
}

/// Independent coherence-time evaluation: inline Bufton wind,
/// inline structure parameter, trapezoid quadrature.
fn tau_reference(v_g: f64, cn2_ground: f64, profile: &AtmosphereProfile) -> f64 {
    let wind = |h: f64| {
        let t = (h - 9400.0) / 4800.0;
        v_g + 30.0 * (-t * t).exp()
    };
    let v_rms = (trapezoid(|h| wind(h) * wind(h), 5.0e3, 20.0e3, 600_000) / 15.0e3).sqrt();
    let c = |h: f64| {
        0.00594 * (v_rms / 27.0).powi(2) * (1e-5 * h).powi(10) * (-h / 1000.0).exp()
            + 2.7e-16 * (-h / 1500.0).exp()
            + cn2_ground * (-h / 100.0).exp()
    };
    let moment = trapezoid(
        |h| c(h) * wind(h).powf(5.0 / 3.0),
        profile.receiver_altitude,
        profile.satellite_altitude,
        2_000_000,
    );
    let sec = 1.0 / profile.zenith_angle.cos();
    (118.0 * profile.wavelength.powi(-2) * sec * moment).powf(-3.0 / 5.0)
}

#[test]
fn mid_range_coherence_time_matches_quadrature_oracle() {
    let profile = AtmosphereProfile::default();
    let tau = coherence_time(&profile).unwrap();
    let reference = tau_reference(profile.v_ground, profile.cn2_ground, &profile);
    assert!(
        (tau / reference - 1.0).abs() < 1e-7,
        "tau {tau} vs trapezoid reference {reference}"
    );
    // Frozen from an independent implementation of the same model.
    assert!(
        (tau / 0.010850734255198795 - 1.0).abs() < 1e-7,
        "tau {tau} drifted from the frozen mid-range value"
    );
}

#[test]
fn corner_coherence_times_match_quadrature_oracle() {
    let ranges = SamplingRanges::default();
    let mut taus = Vec::new();
    for &v_g in &ranges.v_ground_range {
        for &c0 in &ranges.cn2_ground_range {
            let profile = AtmosphereProfile {
                v_ground: v_g,
                cn2_ground: c0,
                ..AtmosphereProfile::default()
            };
            let tau = coherence_time(&profile).unwrap();
            let reference = tau_reference(v_g, c0, &profile);
            assert!(
                (tau / reference - 1.0).abs() < 1e-7,
                "corner ({v_g}, {c0:e}): {tau} vs {reference}"
            );
            taus.push(tau);
        }
    }
    let lo = taus.iter().cloned().fold(f64::MAX, f64::min);
    let hi = taus.iter().cloned().fold(0.0f64, f64::max);
    // Strongest turbulence and wind give the shortest window; the frozen
    // corner values bracket every sampled channel draw.
    assert!((lo / 9.716e-3 - 1.0).abs() < 1e-3, "short corner {lo}");
    assert!((hi / 12.183e-3 - 1.0).abs() < 1e-3, "long corner {hi}");
}

#[test]
fn pulses_per_window_stay_in_the_modeled_band() {
    // At a 1 MHz repetition rate every corner of the sampling ranges
    // keeps 10^3..10^5 pulses inside one coherence window.
    let ranges = SamplingRanges::default();
    for &v_g in &ranges.v_ground_range {
        for &c0 in &ranges.cn2_ground_range {
            let profile = AtmosphereProfile {
                v_ground: v_g,
                cn2_ground: c0,
                ..AtmosphereProfile::default()
            };
            let pulses = coherence_time(&profile).unwrap() * 1.0e6;
            assert!(
                (1.0e3..=1.0e5).contains(&pulses),
                "corner ({v_g}, {c0:e}) gives {pulses} pulses per window"
            );
        }
    }
}

#[test]
fn coherence_time_scaling_laws() {
    let p = AtmosphereProfile::default();
    let v_rms = rms_wind(p.v_ground).unwrap();
    let c = |h: f64| cn2(h, v_rms, p.cn2_ground);
    let w = |h: f64| bufton_wind(h, p.v_ground);
    let tau = |lambda: f64, scale_cn2: f64, sec: f64| {
        coherence_time_with(
            |h| scale_cn2 * c(h),
            w,
            lambda,
            p.receiver_altitude,
            p.satellite_altitude,
            sec,
        )
        .unwrap()
    };
    let base = tau(p.wavelength, 1.0, 1.0);
    // tau ∝ λ^(6/5): doubling the wavelength lengthens the window.
    let double_lambda = tau(2.0 * p.wavelength, 1.0, 1.0);
    assert!((double_lambda / base / 2f64.powf(1.2) - 1.0).abs() < 1e-9);
    // tau ∝ C²ₙ^(−3/5) under uniform scaling of the whole profile.
    let double_cn2 = tau(p.wavelength, 2.0, 1.0);
    assert!((double_cn2 / base / 2f64.powf(-0.6) - 1.0).abs() < 1e-9);
    // tau ∝ sec(θ_z)^(−3/5): slant paths see more turbulence.
    let slant = tau(p.wavelength, 1.0, 2.0);
    assert!((slant / base / 2f64.powf(-0.6) - 1.0).abs() < 1e-9);
}

#[test]
fn sampled_profiles_respect_the_ranges() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(9);
    let ranges = SamplingRanges::default();
    let template = AtmosphereProfile::default();
    for _ in 0..5_000 {
        let p = sample_atmosphere(&mut rng, &ranges, &template);
        assert!(p.v_ground >= ranges.v_ground_range[0] && p.v_ground <= ranges.v_ground_range[1]);
        assert!(
            p.cn2_ground >= ranges.cn2_ground_range[0]
                && p.cn2_ground <= ranges.cn2_ground_range[1]
        );
        // Geometry and optics come from the template untouched.
        assert_eq!(p.satellite_altitude, template.satellite_altitude);
        assert_eq!(p.wavelength, template.wavelength);
        assert_eq!(p.zenith_angle, template.zenith_angle);
    }
}

#[test]
fn degenerate_ranges_are_deterministic() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
    let ranges = SamplingRanges {
        v_ground_range: [3.0, 3.0],
        cn2_ground_range: [5e-15, 5e-15],
    };
    let p = sample_atmosphere(&mut rng, &ranges, &AtmosphereProfile::default());
    assert_eq!(p.v_ground, 3.0);
    assert_eq!(p.cn2_ground, 5e-15);
}

#[test]
fn invalid_profiles_are_rejected() {
    let mut p = AtmosphereProfile::default();
    p.cn2_ground = 0.0;
    assert!(coherence_time(&p).is_err());
    let mut p = AtmosphereProfile::default();
    p.zenith_angle = std::f64::consts::FRAC_PI_2;
    assert!(coherence_time(&p).is_err());
    let mut p = AtmosphereProfile::default();
    p.receiver_altitude = p.satellite_altitude;
    assert!(coherence_time(&p).is_err());
}
