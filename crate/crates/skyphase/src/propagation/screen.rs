//! Spectral synthesis of von Kármán phase screens with subharmonic
//! low-frequency augmentation.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

use super::splitstep::Fft2;
use super::PhaseScreen;

/// Subharmonic refinement levels: each level splits the remaining DC cell
/// 3× in each direction and adds the 8 surrounding modes.
const SUBHARMONIC_LEVELS: u32 = 3;

/// Midpoint sub-samples per axis when averaging the spectrum over one
/// subharmonic cell.
const CELL_SAMPLES: usize = 24;

/// von Kármán phase power spectral density, rad²·m²:
///
/// Φ(κ) = 0.48992·r0^(−5/3)·(κ² + κ₀²)^(−11/6)·exp(−κ²/κ_m²)
///
/// with κ₀ = 2π/L₀, κ_m = 5.92/l₀ and κ = √(κx² + κy²) the angular
/// spatial frequency in rad/m. The 0.48992 prefactor normalizes the
/// inertial range so that the structure function approaches
/// 6.88·(r/r0)^(5/3).
pub fn von_karman_psd(kx: f64, ky: f64, r0: f64, outer_scale: f64, inner_scale: f64) -> f64 {
    let k0 = 2.0 * std::f64::consts::PI / outer_scale;
    let km = 5.92 / inner_scale;
    let k2 = kx * kx + ky * ky;
    0.48992 * r0.powf(-5.0 / 3.0) * (k2 + k0 * k0).powf(-11.0 / 6.0) * (-k2 / (km * km)).exp()
}

/// Mean of the PSD over a rectangular spectral cell centred at
/// (kcx, kcy), times the cell area: the total phase power assigned to one
/// subharmonic mode.
fn cell_power(kcx: f64, kcy: f64, dk: f64, r0: f64, outer_scale: f64, inner_scale: f64) -> f64 {
    let mut acc = 0.0;
    for a in 0..CELL_SAMPLES {
        let kx = kcx + ((a as f64 + 0.5) / CELL_SAMPLES as f64 - 0.5) * dk;
        for b in 0..CELL_SAMPLES {
            let ky = kcy + ((b as f64 + 0.5) / CELL_SAMPLES as f64 - 0.5) * dk;
            acc += von_karman_psd(kx, ky, r0, outer_scale, inner_scale);
        }
    }
    acc / (CELL_SAMPLES * CELL_SAMPLES) as f64 * dk * dk
}

/// Synthesizes one random phase screen with von Kármán statistics.
///
/// The base realization filters complex white noise with √Φ on the
/// discrete Fourier grid (the DC bin zeroed) and keeps the real part of
/// the inverse transform. Because the grid cannot represent frequencies
/// below Δκ = 2π/(size·pitch), the DC cell is then refilled by three
/// levels of subharmonic modes: each level subdivides the remaining
/// central cell 3×3 and adds the eight surrounding plane waves, each
/// carrying the cell-integrated spectral power. Without this the screens
/// lack tilt and large-scale curvature, biasing downstream transmissivity
/// statistics.
///
/// A `pitch` larger than `inner_scale` leaves the inner-scale roll-off
/// unresolved; the missing high-frequency power is small for phase
/// statistics, so this is reported once as a warning rather than an
/// error.
pub fn generate_screen<R: Rng + ?Sized>(
    r0: f64,
    outer_scale: f64,
    inner_scale: f64,
    size: usize,
    pitch: f64,
    rng: &mut R,
) -> Result<PhaseScreen> {
    if !(r0 > 0.0) {
        return Err(Error::config("screen r0 must be positive"));
    }
    if !size.is_power_of_two() || size < 4 {
        return Err(Error::config("screen size must be a power of two, at least 4"));
    }
    if !(pitch > 0.0 && pitch.is_finite()) {
        return Err(Error::config("screen pitch must be positive"));
    }
    if !(inner_scale > 0.0 && inner_scale < outer_scale) {
        return Err(Error::config("need 0 < inner_scale < outer_scale"));
    }
    if pitch > inner_scale {
        static WARNED: std::sync::Once = std::sync::Once::new();
        WARNED.call_once(|| {
            eprintln!(
                "warning: screen pitch {pitch} m exceeds inner scale {inner_scale} m; \
                 the inner-scale roll-off is unresolved on this grid"
            );
        });
    }

    let n = size;
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * pitch);
    let freq = |i: usize| -> f64 {
        if i < n / 2 {
            dk * i as f64
        } else {
            dk * (i as f64 - n as f64)
        }
    };

    // White noise filtered by the sampled amplitude spectrum.
    let mut spec = vec![Complex64::default(); n * n];
    for i in 0..n {
        let kx = freq(i);
        for j in 0..n {
            let ky = freq(j);
            let amp = von_karman_psd(kx, ky, r0, outer_scale, inner_scale).sqrt() * dk;
            let g_re: f64 = rng.sample(StandardNormal);
            let g_im: f64 = rng.sample(StandardNormal);
            spec[i * n + j] = Complex64::new(g_re * amp, g_im * amp);
        }
    }
    spec[0] = Complex64::default();

    // Unnormalized inverse transform; the real part carries the target
    // spectrum because the noise was complex with unit variance per
    // component.
    let mut fft = Fft2::new(n);
    fft.inverse_unnormalized(&mut spec);
    let mut grid: Vec<f64> = spec.iter().map(|c| c.re).collect();

    // Subharmonic augmentation of the zeroed DC cell.
    let coord: Vec<f64> = (0..n).map(|i| (i as f64 - n as f64 / 2.0) * pitch).collect();
    let mut phase_x = vec![Complex64::default(); n];
    let mut phase_y = vec![Complex64::default(); n];
    for level in 1..=SUBHARMONIC_LEVELS {
        let dkp = dk / 3f64.powi(level as i32);
        for si in -1i32..=1 {
            for sj in -1i32..=1 {
                if si == 0 && sj == 0 {
                    continue;
                }
                let (kx, ky) = (si as f64 * dkp, sj as f64 * dkp);
                let power = cell_power(kx, ky, dkp, r0, outer_scale, inner_scale);
                let g_re: f64 = rng.sample(StandardNormal);
                let g_im: f64 = rng.sample(StandardNormal);
                let c = Complex64::new(g_re, g_im) * (power.max(0.0)).sqrt();
                // √2·Re{(g/√2)·e^(ik·x)}·√P — the /√2 and √2 cancel into
                // using the raw Gaussian pair above.
                for (i, &x) in coord.iter().enumerate() {
                    phase_x[i] = Complex64::from_polar(1.0, kx * x) * c;
                }
                for (j, &y) in coord.iter().enumerate() {
                    phase_y[j] = Complex64::from_polar(1.0, ky * y);
                }
                for i in 0..n {
                    let row = phase_x[i];
                    let dst = &mut grid[i * n..(i + 1) * n];
                    for (j, v) in dst.iter_mut().enumerate() {
                        *v += row.re * phase_y[j].re - row.im * phase_y[j].im;
                    }
                }
            }
        }
    }

    Ok(PhaseScreen { grid, pitch, size: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn identical_seeds_identical_screens() {
        let a = generate_screen(0.1, 10.0, 0.01, 64, 0.02, &mut substream(4, "scr", 7)).unwrap();
        let b = generate_screen(0.1, 10.0, 0.01, 64, 0.02, &mut substream(4, "scr", 7)).unwrap();
        let c = generate_screen(0.1, 10.0, 0.01, 64, 0.02, &mut substream(4, "scr", 8)).unwrap();
        assert_eq!(a, b);
        assert!(a.grid.iter().zip(&c.grid).any(|(x, y)| x != y));
        assert!(a.grid.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn infinite_r0_gives_zero_screen() {
        // Zero turbulence weight maps to r0 = ∞ and a vanishing spectrum.
        let s =
            generate_screen(f64::INFINITY, 10.0, 0.01, 32, 0.02, &mut substream(4, "scr0", 0))
                .unwrap();
        assert!(s.grid.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bad_geometry_rejected() {
        let mut rng = substream(4, "scr-bad", 0);
        assert!(generate_screen(0.1, 10.0, 0.01, 48, 0.02, &mut rng).is_err());
        assert!(generate_screen(-0.1, 10.0, 0.01, 64, 0.02, &mut rng).is_err());
        assert!(generate_screen(0.1, 0.005, 0.01, 64, 0.02, &mut rng).is_err());
    }

    #[test]
    fn psd_isotropic_and_decaying() {
        let p1 = von_karman_psd(1.0, 0.0, 0.1, 1e4, 0.02);
        let p2 = von_karman_psd(0.0, 1.0, 0.1, 1e4, 0.02);
        let p3 = von_karman_psd(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2, 0.1, 1e4, 0.02);
        assert!((p1 - p2).abs() < 1e-18 && (p1 - p3).abs() / p1 < 1e-12);
        assert!(von_karman_psd(2.0, 0.0, 0.1, 1e4, 0.02) < p1);
        // Inertial-range slope between κ₀ and κ_m: Φ ~ κ^(−11/3).
        let lo = von_karman_psd(5.0, 0.0, 0.1, 1e4, 0.02);
        let hi = von_karman_psd(50.0, 0.0, 0.1, 1e4, 0.02);
        let slope = (hi / lo).ln() / 10f64.ln();
        assert!((slope + 11.0 / 3.0).abs() < 0.02, "slope {slope}");
    }
}
