//! VOTE on the intersection preset over several seeds, with both readings of
//! the visibility angle term.
//!
//! ```bash
//! cargo run --release --example intersection
//! ```

use coopsim::scenario::preset;
use coopsim::sim::{run, run_baseline};
use coopsim::vote::VisibilityMode;

fn main() -> coopsim::Result<()> {
    let base = preset("intersection").expect("bundled preset");
    let seeds = 10;
    for mode in [VisibilityMode::Literal, VisibilityMode::Corrected] {
        let (mut vote, mut single) = (0.0, 0.0);
        for seed in 0..seeds {
            let mut c = base.clone();
            c.vote.visibility_mode = mode;
            c.run.seed = seed;
            vote += run(&c)?.accuracy();
            single += run_baseline(&c)?.accuracy();
        }
        let (vote, single) = (vote / seeds as f64, single / seeds as f64);
        println!(
            "{mode:?}: VOTE {vote:.3}, single CAV {single:.3}, difference {:+.3}",
            vote - single
        );
    }
    Ok(())
}
