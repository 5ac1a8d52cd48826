//! Block model with target energies 0, 1, 2, 3 and C = 0.5 B: only the
//! levels inside the decay window relax to |E_0>.

use specdis::presets::controllable_dissipation;
use specdis::BlockSpec;

fn main() -> specdis::Result<()> {
    let block = BlockSpec::new(1.0, 0.5, vec![0.0, 1.0, 2.0, 3.0], 400)?;
    let run = controllable_dissipation(&block, 160.0, 0.1)?;
    for (m, (series, plateau)) in run.series.iter().zip(&run.predicted_plateaus).enumerate() {
        let (t, last) = series.last().expect("non-empty grid");
        println!(
            "start |E_{m}> (E={}): |E_0> occupation {last:.4} at t={t}, predicted {plateau:.4}",
            block.energies[m]
        );
    }
    Ok(())
}
