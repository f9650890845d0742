//! One fusion round over hand-made batches from three CAVs.
//!
//! ```bash
//! cargo run --example pace_fusion
//! ```

use coopsim::pace::{pace_round, PaceParams};
use coopsim::projection::LocalizedDetection;
use coopsim::scene::{KnownLocation, Point};

fn det(cav: &str, label: &str, confidence: f64, x: f64, y: f64) -> LocalizedDetection {
    LocalizedDetection {
        label: label.into(),
        confidence,
        position: Point::new(x, y),
        source_cav: cav.into(),
        cycle: 1,
    }
}

fn main() {
    let locations = vec![
        KnownLocation {
            id: "spot-1".into(),
            position: Point::new(10.0, 10.0),
        },
        KnownLocation {
            id: "spot-2".into(),
            position: Point::new(20.0, 10.0),
        },
        KnownLocation {
            id: "spot-3".into(),
            position: Point::new(30.0, 10.0),
        },
    ];
    let batches = [
        vec![
            det("cav-1", "car", 0.9, 10.4, 9.8),
            det("cav-1", "van", 0.6, 19.1, 10.5),
        ],
        vec![
            det("cav-2", "car", 0.8, 9.7, 10.3),
            det("cav-2", "van", 0.7, 20.6, 9.9),
        ],
        vec![
            det("cav-3", "car", 0.5, 20.2, 10.1),
            det("cav-3", "bike", 0.4, 45.0, 10.0),
        ],
    ];
    let round = pace_round(
        batches.iter().map(Vec::as_slice),
        &locations,
        &PaceParams::default(),
    );
    for e in &round.entries {
        match (&e.label, e.position) {
            (Some(l), Some(p)) => {
                println!(
                    "{}: {l:<4} confidence {:.3} at ({:.2}, {:.2})",
                    e.location_id, e.confidence, p.x, p.y
                )
            }
            _ => println!("{}: nothing detected", e.location_id),
        }
    }
    println!("{} operations", round.ops);
}
