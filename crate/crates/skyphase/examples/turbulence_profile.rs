//! Walk through the turbulence model: the wind profile, the Cn²
//! altitude profile, and the channel coherence time they produce.
//!
//! Runs in well under a second; prints tables only.

use skyphase::turbulence::{
    bufton_wind, cn2, coherence_time, rms_wind, AtmosphereProfile, SamplingRanges,
};

fn main() -> skyphase::Result<()> {
    let profile = AtmosphereProfile::default();

    println!("wind profile (ground speed {} m/s):", profile.v_ground);
    println!("{:>10}  {:>10}", "h [m]", "v [m/s]");
    for h in [0.0, 2.0e3, 5.0e3, 9.4e3, 12.0e3, 20.0e3] {
        println!("{h:>10.0}  {:>10.2}", bufton_wind(h, profile.v_ground));
    }
    let v_rms = rms_wind(profile.v_ground)?;
    println!("rms wind over the 5–20 km band: {v_rms:.3} m/s\n");

    println!("refractive-index structure parameter:");
    println!("{:>10}  {:>12}", "h [m]", "Cn² [m^-2/3]");
    for h in [0.0, 100.0, 1.0e3, 2.0e3, 5.0e3, 10.0e3, 20.0e3] {
        println!("{h:>10.0}  {:>12.3e}", cn2(h, v_rms, profile.cn2_ground));
    }

    // Coherence time for the default downlink, then across the corners
    // of the sampled parameter ranges. At a 1 MHz repetition rate the
    // coherence time directly sets the pulses available per window.
    let tau = coherence_time(&profile)?;
    println!("\ndefault downlink: tau = {:.3} ms ({:.0} pulses at 1 MHz)", tau * 1e3, tau * 1e6);

    // The mountain-top receiver (2 km) sits above the surface layer, so
    // the Cn²(0)·e^(−h/100) term is ~e^(−20) of itself by the start of
    // the path: ground turbulence barely moves tau, wind dominates.
    let ranges = SamplingRanges::default();
    println!("\nsampling-range corners (tau is wind-driven at this receiver altitude):");
    println!("{:>10}  {:>12}  {:>10}  {:>10}", "v_g [m/s]", "Cn²(0)", "tau [ms]", "pulses");
    for &v_ground in &ranges.v_ground_range {
        for &cn2_ground in &ranges.cn2_ground_range {
            let corner = AtmosphereProfile { v_ground, cn2_ground, ..profile.clone() };
            let tau = coherence_time(&corner)?;
            println!(
                "{v_ground:>10.2}  {cn2_ground:>12.2e}  {:>10.3}  {:>10.0}",
                tau * 1e3,
                tau * 1e6
            );
        }
    }
    Ok(())
}
