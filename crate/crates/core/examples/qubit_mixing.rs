//! Alternating ancilla labels drive a pure qubit toward an even mixture of
//! two target states. With overlap g the final spectrum is (1 +- g)/2.

use specdis::presets::qubit_mixing;
use specdis::ChainSpec;

fn main() -> specdis::Result<()> {
    let spec = ChainSpec::new(1.0, 1.0, 0.0, 400)?;
    let t_max = 0.8 * spec.valid_horizon();
    for g in [0.0, 0.3, 0.6, 0.9] {
        let run = qubit_mixing(&spec, g, t_max, 0.1)?;
        let rho = run.overlapping.last().expect("non-empty grid");
        let eig = rho.eigenvalues();
        let parity = run.parity.last().expect("non-empty grid");
        println!(
            "overlap {g:.1}: parity {parity:+.2e}, eigenvalues ({:.4}, {:.4}), expected ({:.2}, {:.2})",
            eig[0],
            eig[1],
            0.5 * (1.0 + g),
            0.5 * (1.0 - g)
        );
    }
    Ok(())
}
