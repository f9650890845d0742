//! Reputation- and visibility-weighted voting: an honest CAV and a CAV that
//! keeps reporting the wrong label, over several rounds.
//!
//! ```bash
//! cargo run --example vote_consensus
//! ```

use std::collections::BTreeMap;

use coopsim::bus::{BusConfig, MessageBus};
use coopsim::scene::{KnownLocation, Point, Pose};
use coopsim::vote::{visibility, VoteEdge, VoteParams, VoteReport};

fn report(cav: &str, label: &str, confidence: f64, round: u64) -> VoteReport {
    VoteReport {
        location_id: "obj".into(),
        label: label.into(),
        confidence,
        position: Point::new(30.0, 20.0),
        source_cav: cav.into(),
        cycle: round,
    }
}

fn main() -> coopsim::Result<()> {
    let params = VoteParams::default();
    let locations = vec![KnownLocation {
        id: "obj".into(),
        position: Point::new(30.0, 20.0),
    }];
    let poses = BTreeMap::from([
        ("near".to_owned(), Pose::new(25.0, 20.0, 0.0)),
        ("far".to_owned(), Pose::new(5.0, 20.0, 0.0)),
    ]);
    for (id, pose) in &poses {
        println!(
            "k({id}) = {:.3}",
            visibility(locations[0].position, pose, &params)?
        );
    }

    let mut edge = VoteEdge::new(params.clone(), locations, poses);
    let mut bus = MessageBus::new(BusConfig::default());
    let truth = BTreeMap::from([("obj".to_owned(), "ball".to_owned())]);
    for round in 1..=8 {
        edge.ingest(&report("near", "ball", 0.6, round));
        edge.ingest(&report("far", "orange", 0.9, round));
        let scores = edge.tally().scores["obj"].clone();
        let out = edge
            .poll(round * params.tau_ms, &mut bus, &truth)?
            .expect("round due");
        println!(
            "round {round}: scores {scores:.3?} -> {:?}; reputations near {:.2}, far {:.2}",
            out.verdicts[0].label.as_deref().unwrap_or("-"),
            out.reputations["near"].value,
            out.reputations["far"].value
        );
    }
    Ok(())
}
