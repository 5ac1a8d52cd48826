//! Wavefront leaving the impurity and hitting the far wall of an 80-site
//! chain, drawn as a coarse occupation map.

use specdis::propagator::occupation_heatmap;
use specdis::{AmplitudeVector, ChainSpec};

fn main() -> specdis::Result<()> {
    let spec = ChainSpec::new(1.0, 0.5, 0.5, 80)?;
    let psi0 = AmplitudeVector::site(80, 0)?;
    let map = occupation_heatmap(&spec, &psi0, 60.0, 0.1)?;

    let shades = [' ', '.', ':', '+', '#'];
    for (t, row) in map.times.iter().zip(&map.occupations).step_by(25) {
        let line: String = row
            .chunks(2)
            .map(|pair| {
                let n: f64 = pair.iter().sum();
                let level = ((n.max(1e-6).log10() + 6.0) / 1.5).clamp(0.0, 4.0) as usize;
                shades[level]
            })
            .collect();
        println!("t={t:>5.1} |{line}|");
    }
    match map.boundary_time {
        Some(t) => println!(
            "wall reached at t={t:.1}, light-cone estimate N/(2B)={}",
            map.valid_horizon
        ),
        None => println!("wall not reached"),
    }
    Ok(())
}
