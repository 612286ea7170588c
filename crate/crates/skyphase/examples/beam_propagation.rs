//! Split-step propagation of the downlink beam: first through vacuum,
//! where the numerical beam width must follow Gaussian-optics diffraction,
//! then through a turbulent layer stack, where the receiver aperture
//! collects less power.
//!
//! Takes a few seconds on a 256² grid.

use skyphase::propagation::{
    build_layers, generate_screen, propagate, transmissivity, ComplexField, GridConfig, PhaseScreen,
};
use skyphase::rng::substream;
use skyphase::turbulence::AtmosphereProfile;

/// 1/e² intensity radius from the field's second moment.
fn beam_width(field: &ComplexField) -> f64 {
    let n = field.size;
    let mut power = 0.0;
    let mut moment = 0.0;
    for i in 0..n {
        let x = (i as f64 - n as f64 / 2.0) * field.pitch;
        for j in 0..n {
            let y = (j as f64 - n as f64 / 2.0) * field.pitch;
            let p = field.grid[i * n + j].norm_sqr();
            power += p;
            moment += p * (x * x + y * y);
        }
    }
    (2.0 * moment / power).sqrt()
}

fn main() -> skyphase::Result<()> {
    let profile = AtmosphereProfile::default();
    let grid = GridConfig { size: 256, pitch: 0.08, ..GridConfig::default() };

    // One layer puts a single screen mid-path; a zero screen makes the
    // whole run a vacuum propagation over the full downlink distance.
    let stack = build_layers(&profile, 1)?;
    let beam = ComplexField::collimated_gaussian(
        grid.size,
        grid.pitch,
        profile.wavelength,
        grid.beam_waist,
    )?;
    let vacuum = PhaseScreen {
        grid: vec![0.0; grid.size * grid.size],
        pitch: grid.pitch,
        size: grid.size,
    };
    let arrived = propagate(&beam, &stack, &[vacuum])?;

    let z = profile.satellite_altitude - profile.receiver_altitude;
    let rayleigh = std::f64::consts::PI * grid.beam_waist * grid.beam_waist / profile.wavelength;
    let analytic = grid.beam_waist * (1.0 + (z / rayleigh).powi(2)).sqrt();
    println!("vacuum downlink over {:.0} km:", z / 1e3);
    println!("  analytic beam radius  {analytic:.4} m");
    println!("  numerical beam radius {:.4} m", beam_width(&arrived));
    println!(
        "  power through the {:.2} m aperture: {:.4}",
        grid.aperture_radius,
        transmissivity(&arrived, grid.aperture_radius)?
    );

    // Now the same path with turbulence: ten layers of equal integrated
    // turbulence, one von Kármán screen each. This downlink is benign —
    // the whole-path r0 is a sizable fraction of the beam — so draws
    // scatter a few percent around the vacuum value (scintillation can
    // even focus a draw); what the noise model feeds on is exactly this
    // per-window variability, through the 1/T detector-noise weight.
    let stack = build_layers(&profile, grid.n_layers)?;
    println!("\nturbulent downlink ({} layers, composite r0 {:.3} m):", stack.n_layers(), stack.composite_r0());
    let mut mean_t = 0.0;
    let n_draws = 6;
    for draw in 0..n_draws {
        let mut rng = substream(3, "turbulent-pass", draw);
        let screens: Vec<PhaseScreen> = stack
            .r0_per_layer
            .iter()
            .map(|&r0| {
                generate_screen(r0, profile.outer_scale, profile.inner_scale, grid.size, grid.pitch, &mut rng)
            })
            .collect::<skyphase::Result<_>>()?;
        let arrived = propagate(&beam, &stack, &screens)?;
        let t = transmissivity(&arrived, grid.aperture_radius)?;
        mean_t += t;
        println!("  draw {draw}: beam radius {:.4} m, aperture power {t:.4}", beam_width(&arrived));
    }
    println!("  mean aperture power over {n_draws} draws: {:.4}", mean_t / n_draws as f64);
    Ok(())
}
