//! Angular-spectrum split-step propagation with absorbing boundaries,
//! plus the receiver-aperture power ratio.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};

use super::{LayerStack, PhaseScreen};

/// Two-dimensional FFT over a row-major square grid, built on 1-D plans:
/// rows in place, transpose, rows again, transpose back.
pub(super) struct Fft2 {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Fft2 {
    pub(super) fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft(size, FftDirection::Forward);
        let inverse = planner.plan_fft(size, FftDirection::Inverse);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Fft2 {
            size,
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    fn pass(&mut self, data: &mut [Complex64], dir: FftDirection) {
        let plan = match dir {
            FftDirection::Forward => Arc::clone(&self.forward),
            FftDirection::Inverse => Arc::clone(&self.inverse),
        };
        plan.process_with_scratch(data, &mut self.scratch);
        transpose_square(data, self.size);
        plan.process_with_scratch(data, &mut self.scratch);
        transpose_square(data, self.size);
    }

    /// Unnormalized forward transform (Σ e^(−i·...)).
    pub(super) fn forward(&mut self, data: &mut [Complex64]) {
        self.pass(data, FftDirection::Forward);
    }

    /// Unnormalized inverse transform (Σ e^(+i·...)); a forward/inverse
    /// round trip scales by size².
    pub(super) fn inverse_unnormalized(&mut self, data: &mut [Complex64]) {
        self.pass(data, FftDirection::Inverse);
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    const BLOCK: usize = 32;
    for bi in (0..n).step_by(BLOCK) {
        for bj in (bi..n).step_by(BLOCK) {
            for i in bi..(bi + BLOCK).min(n) {
                let j0 = if bi == bj { i + 1 } else { bj };
                for j in j0..(bj + BLOCK).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

/// A monochromatic scalar field sampled on a square grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    /// Complex amplitudes, row-major `size × size`.
    pub grid: Vec<Complex64>,
    /// Cells per side (power of two).
    pub size: usize,
    /// Grid cell side, m.
    pub pitch: f64,
    /// Carrier wavelength, m.
    pub wavelength: f64,
}

impl ComplexField {
    /// Collimated Gaussian launch beam u(r) = exp(−r²/w₀²), centred on
    /// the grid (1/e² intensity radius w₀, unit peak amplitude).
    pub fn collimated_gaussian(size: usize, pitch: f64, wavelength: f64, waist: f64) -> Result<Self> {
        if !size.is_power_of_two() || size < 16 {
            return Err(Error::config("field size must be a power of two, at least 16"));
        }
        if !(pitch > 0.0 && wavelength > 0.0 && waist > 0.0) {
            return Err(Error::config("pitch, wavelength and waist must be positive"));
        }
        let n = size;
        let mut grid = vec![Complex64::default(); n * n];
        for i in 0..n {
            let x = (i as f64 - n as f64 / 2.0) * pitch;
            for j in 0..n {
                let y = (j as f64 - n as f64 / 2.0) * pitch;
                grid[i * n + j] = Complex64::new((-(x * x + y * y) / (waist * waist)).exp(), 0.0);
            }
        }
        Ok(ComplexField { grid, size, pitch, wavelength })
    }

    /// Total power Σ|u|²·pitch².
    pub fn total_power(&self) -> f64 {
        self.grid.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.pitch * self.pitch
    }

    /// Intensity |u|² at the grid centre (the beam axis).
    pub fn on_axis_intensity(&self) -> f64 {
        let n = self.size;
        self.grid[(n / 2) * n + n / 2].norm_sqr()
    }
}

/// Largest step length the grid can support without angular-spectrum
/// aliasing: λ·Δz ≤ size·pitch².
fn check_sampling(dz: f64, size: usize, pitch: f64, wavelength: f64) -> Result<()> {
    let ratio = wavelength * dz / (size as f64 * pitch * pitch);
    if ratio > 1.0 {
        return Err(Error::config(format!(
            "angular-spectrum sampling criterion violated: λ·Δz/(size·pitch²) = {ratio:.3} > 1 \
             for a {dz:.3e} m step; enlarge the grid or coarsen the pitch"
        )));
    }
    Ok(())
}

/// Propagates `beam` from the satellite plane down through the stack,
/// applying one phase screen per layer at its screen altitude.
///
/// `screens[i]` belongs to layer `i` (layers indexed bottom-up, matching
/// `stack.r0_per_layer`); propagation itself walks top-down. Each leg is
/// an exact vacuum angular-spectrum step
/// u ← F⁻¹{F{u}·exp(−i·Δz·κ²/(k_z + k))}, k_z = √(k² − κ²), followed by
/// the screen (if any) and a super-Gaussian absorbing window
/// exp(−(r/r_w)⁸) at r_w = 90% of the half-grid, which suppresses
/// wrap-around at the price of a small power leak.
pub fn propagate(beam: &ComplexField, stack: &LayerStack, screens: &[PhaseScreen]) -> Result<ComplexField> {
    let n = beam.size;
    if screens.len() != stack.n_layers() {
        return Err(Error::shape(format!(
            "{} screens supplied for {} layers",
            screens.len(),
            stack.n_layers()
        )));
    }
    for (i, s) in screens.iter().enumerate() {
        if s.size != n || (s.pitch - beam.pitch).abs() > 1e-12 * beam.pitch {
            return Err(Error::shape(format!("screen {i} geometry does not match the beam grid")));
        }
    }
    if beam.grid.len() != n * n {
        return Err(Error::shape("beam grid length does not match size²"));
    }

    // Top-down schedule: (target altitude, screen to apply on arrival).
    let mut schedule: Vec<(f64, Option<usize>)> = (0..stack.n_layers())
        .rev()
        .map(|i| (stack.screen_altitudes[i], Some(i)))
        .collect();
    schedule.push((stack.boundaries[0], None));

    let k = 2.0 * std::f64::consts::PI / beam.wavelength;
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * beam.pitch);
    let freq = |i: usize| -> f64 {
        if i < n / 2 {
            dk * i as f64
        } else {
            dk * (i as f64 - n as f64)
        }
    };

    // Transverse wavenumber table and absorbing window.
    let kt2: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| freq(i) * freq(i) + freq(j) * freq(j)))
        .collect();
    let r_w = 0.9 * (n as f64 / 2.0) * beam.pitch;
    let window: Vec<f64> = (0..n * n)
        .map(|idx| {
            let x = ((idx / n) as f64 - n as f64 / 2.0) * beam.pitch;
            let y = ((idx % n) as f64 - n as f64 / 2.0) * beam.pitch;
            (-((x * x + y * y).sqrt() / r_w).powi(8)).exp()
        })
        .collect();

    let mut fft = Fft2::new(n);
    let mut u = beam.grid.clone();
    let norm = 1.0 / (n * n) as f64;
    let mut altitude = *stack.boundaries.last().unwrap();

    for &(target, screen_idx) in &schedule {
        let dz = (altitude - target) * stack.path_scale;
        if dz < 0.0 {
            return Err(Error::config("screen altitudes must descend from the satellite plane"));
        }
        if dz > 0.0 {
            check_sampling(dz, n, beam.pitch, beam.wavelength)?;
            fft.forward(&mut u);
            for (v, &kt2_i) in u.iter_mut().zip(&kt2) {
                if kt2_i >= k * k {
                    *v = Complex64::default(); // evanescent
                } else {
                    let kz = (k * k - kt2_i).sqrt();
                    // exp(i·kz·dz) with the common exp(i·k·dz) phase removed:
                    // kz − k = −κ²/(kz + k), numerically stable for κ ≪ k.
                    *v *= Complex64::from_polar(norm, -dz * kt2_i / (kz + k));
                }
            }
            fft.inverse_unnormalized(&mut u);
        }
        if let Some(idx) = screen_idx {
            for (v, &phi) in u.iter_mut().zip(&screens[idx].grid) {
                *v *= Complex64::from_polar(1.0, phi);
            }
        }
        for (v, &w) in u.iter_mut().zip(&window) {
            *v *= w;
        }
        altitude = target;
    }

    Ok(ComplexField {
        grid: u,
        size: n,
        pitch: beam.pitch,
        wavelength: beam.wavelength,
    })
}

/// Fraction of the field's power falling inside a centred circular
/// aperture of the given radius, clamped to (0, 1].
pub fn transmissivity(field: &ComplexField, aperture_radius: f64) -> Result<f64> {
    let n = field.size;
    let half_grid = 0.5 * n as f64 * field.pitch;
    if !(aperture_radius > 0.0 && aperture_radius <= half_grid) {
        return Err(Error::config(format!(
            "aperture radius must lie in (0, {half_grid}] to fit inside the grid"
        )));
    }
    let mut total = 0.0;
    let mut inside = 0.0;
    for i in 0..n {
        let x = (i as f64 - n as f64 / 2.0) * field.pitch;
        for j in 0..n {
            let y = (j as f64 - n as f64 / 2.0) * field.pitch;
            let p = field.grid[i * n + j].norm_sqr();
            total += p;
            if x * x + y * y <= aperture_radius * aperture_radius {
                inside += p;
            }
        }
    }
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::numerical("field carries no power"));
    }
    let t = (inside / total).min(1.0);
    if !(t > 0.0) {
        return Err(Error::numerical("aperture collects no power"));
    }
    Ok(t)
}
