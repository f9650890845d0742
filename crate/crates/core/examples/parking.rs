//! The parking preset: four CAVs that each see two of eight spots, fused at
//! the edge and compared with every CAV on its own.
//!
//! ```bash
//! cargo run --release --example parking
//! ```

use coopsim::scenario::preset;
use coopsim::sim::{run, run_baseline};

fn main() -> coopsim::Result<()> {
    let config = preset("parking").expect("bundled preset");
    let fused = run(&config)?;
    let alone = run_baseline(&config)?;
    println!(
        "PACE accuracy {:.3} over {} rounds",
        fused.accuracy(),
        fused.summary.rounds
    );
    for (cav, acc) in &alone.summary.per_cav_accuracy {
        println!("  {cav} alone: {acc:.3}");
    }
    println!(
        "difference {:+.3} against the best single CAV",
        fused.accuracy() - alone.summary.best_cav_accuracy
    );
    Ok(())
}
