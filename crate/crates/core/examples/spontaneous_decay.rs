//! Microscopic impurity decay for several site energies beside the
//! two-level Lindblad decay with the same initial excitation.

use specdis::presets::{spontaneous_decay, DecayComparisonConfig};

fn main() -> specdis::Result<()> {
    let cfg = DecayComparisonConfig::default();
    let cmp = spontaneous_decay(&cfg)?;

    print!("{:>6}", "t");
    for mu in &cfg.site_energies {
        print!("  n0(mu={mu:<3})");
    }
    println!("  Lindblad rho_11");
    let times = &cmp.lindblad_excited.times;
    for k in (0..times.len()).step_by(50) {
        print!("{:>6.1}", times[k]);
        for s in &cmp.microscopic {
            print!("  {:>11.5}", s.values[k]);
        }
        println!("  {:>15.5}", cmp.lindblad_excited.values[k]);
    }
    for (mu, w) in cfg.site_energies.iter().zip(&cmp.trapped_weights) {
        println!("mu={mu}: predicted plateau {w:.4}");
    }
    Ok(())
}
