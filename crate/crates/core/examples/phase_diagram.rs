//! Coarse text rendering of the decay region in the (mu/B, C/B) plane.
//!
//! `cargo run --example phase_diagram [out.csv]` also writes the full grid.

use specdis::spectral::{phase_diagram, GridAxis};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mu: GridAxis = "-3:3:0.1".parse()?;
    let c: GridAxis = "0.1:3:0.1".parse()?;
    let pd = phase_diagram(&mu, &c)?;

    // highest C/B on top; '#' decays, '.' trapped
    for row in (0..pd.c_values.len()).rev() {
        let line: String = (0..pd.mu_values.len())
            .map(|col| {
                if pd.cell(row, col).verdict.decays {
                    '#'
                } else {
                    '.'
                }
            })
            .collect();
        println!("{:>4.1} {line}", pd.c_values[row]);
    }
    println!("     mu/B from {} to {}", mu.lo, mu.hi);

    if let Some(path) = std::env::args().nth(1) {
        let fine = phase_diagram(&"-3:3:0.02".parse()?, &"0.02:3:0.02".parse()?)?;
        fine.write_csv(std::fs::File::create(&path)?)?;
        println!("wrote {path}");
    }
    Ok(())
}
