//! Exponential decay rate of the impurity occupation for B = 1, C = 0.5,
//! mu = 0, next to the weak-coupling estimate and the resonance pole.

use num_complex::Complex64;
use specdis::propagator::time_grid;
use specdis::{fit_decay_rate, simulate, AmplitudeVector, ChainSpec, Observable};

fn main() -> specdis::Result<()> {
    let (b, c) = (1.0, 0.5);
    let spec = ChainSpec::new(b, c, 0.0, 400)?;
    let psi0 = AmplitudeVector::site(400, 0)?;
    let times = time_grid(60.0, 0.1)?;
    let run = simulate(&spec, &psi0, &times, &[Observable::Occupation(0)])?;
    let n0 = &run.series["n0"];

    // pole of the continued bound-state root: x = i / sqrt(1 - C^2/B^2)
    let x = Complex64::new(0.0, 1.0 / (1.0 - (c / b).powi(2)).sqrt());
    let pole = (x + 1.0 / x) * b;

    for window in [(2.0, 10.0), (5.0, 20.0), (5.0, 50.0)] {
        println!(
            "fitted rate over {window:?}: {:.4}",
            fit_decay_rate(n0, window)?
        );
    }
    println!("C^2/B                 : {:.4}", c * c / b);
    println!("2 C^2/B               : {:.4}", 2.0 * c * c / b);
    println!("2 |Im E_pole|         : {:.4}", 2.0 * pole.im.abs());
    Ok(())
}
