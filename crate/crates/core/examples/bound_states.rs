//! Decay verdict, bound states and trapped weight for a few impurities.
//!
//! Run with `cargo run --example bound_states`.

use specdis::spectral::classify;

fn main() -> specdis::Result<()> {
    let cases = [
        (0.0, 1.0),
        (0.7, 1.0),
        (1.4, 1.0),
        (2.1, 1.0),
        (0.0, 1.8),
        (2.0, 0.5),
    ];
    for (mu_b, c_b) in cases {
        let v = classify(mu_b, c_b)?;
        println!(
            "mu/B={mu_b:<4} C/B={c_b:<4} branch={:<10} decays={:<5} trapped_weight={:.4}",
            v.branch.to_string(),
            v.decays,
            v.trapped_weight()
        );
        for b in &v.bound_states {
            println!(
                "    x={:+.5}  E/B={:+.5}  |<b|e0>|^2={:.4}  length={:.2} sites",
                b.decay_factor,
                b.energy,
                b.overlap_sq,
                b.localization_length()
            );
        }
    }
    Ok(())
}
