//! Edge operation counts against CAVs times detections per batch.
//!
//! ```bash
//! cargo run --example complexity
//! ```

use coopsim::sim::{complexity_probe, linear_fit};

fn main() {
    let rows = complexity_probe(&[2, 4, 8, 16, 32], &[5, 10, 20, 40]);
    println!(
        "{:>4} {:>7} {:>6} {:>9} {:>9}",
        "|V|", "|Omega|", "work", "pace ops", "vote ops"
    );
    for r in &rows {
        println!(
            "{:>4} {:>7} {:>6} {:>9} {:>9}",
            r.cavs,
            r.objects,
            r.work(),
            r.pace_ops,
            r.vote_ops
        );
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.work() as f64).collect();
    let pace = linear_fit(
        &xs,
        &rows.iter().map(|r| r.pace_ops as f64).collect::<Vec<_>>(),
    );
    let vote = linear_fit(
        &xs,
        &rows.iter().map(|r| r.vote_ops as f64).collect::<Vec<_>>(),
    );
    println!(
        "pace: slope {:.3}, intercept {:.1}, R^2 {:.5}",
        pace.slope, pace.intercept, pace.r2
    );
    println!(
        "vote: slope {:.3}, intercept {:.1}, R^2 {:.5}",
        vote.slope, vote.intercept, vote.r2
    );
}
