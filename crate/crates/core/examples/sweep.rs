//! Accuracy against packet loss, averaged over repeated seeds.
//!
//! ```bash
//! cargo run --release --example sweep
//! ```

use coopsim::scenario::preset;
use coopsim::sim::{sweep, SweepAxis};

fn main() -> coopsim::Result<()> {
    let base = preset("intersection").expect("bundled preset");
    let repeats = 5;
    for p in ["0", "0.25", "0.5", "0.75", "0.9"] {
        let runs = sweep(
            &base,
            SweepAxis::DropProbability,
            &vec![p.to_owned(); repeats],
        )?;
        let mean = runs.iter().map(|r| r.accuracy()).sum::<f64>() / repeats as f64;
        let rounds = runs.iter().map(|r| r.summary.rounds).sum::<u64>() / repeats as u64;
        println!("drop {p:>4}: mean accuracy {mean:.3}, {rounds} rounds with data");
    }
    Ok(())
}
