//! A maximally mixed qubit is reset to |0> by emptying the impurity site.

use specdis::presets::qubit_reset;
use specdis::ChainSpec;

fn main() -> specdis::Result<()> {
    let spec = ChainSpec::new(1.0, 1.0, 0.0, 400)?;
    let t_max = 0.8 * spec.valid_horizon();
    let run = qubit_reset(&spec, t_max, 0.1)?;
    println!(
        "{:>6}  {:>8}  {:>8}  {:>8}",
        "t", "rho_00", "rho_11", "purity"
    );
    for (t, rho) in run.times.iter().zip(&run.states).step_by(100) {
        println!(
            "{t:>6.1}  {:>8.5}  {:>8.5}  {:>8.5}",
            rho.population(0),
            rho.population(1),
            rho.purity()
        );
    }
    Ok(())
}
