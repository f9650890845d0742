use std::collections::BTreeMap;

use serde::Serialize;

use crate::bus::{BusConfig, MessageBus};
use crate::pace::{pace_round, PaceParams};
use crate::projection::LocalizedDetection;
use crate::scene::{KnownLocation, Point, Pose};
use crate::vote::{VoteEdge, VoteParams, VoteReport};

/// Known locations in every probe instance. Held fixed so counts scale with
/// `|V|·|Ω|` only.
pub const PROBE_LOCATIONS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProbeRow {
    pub cavs: usize,
    /// Detections per CAV batch.
    pub objects: usize,
    pub pace_ops: u64,
    pub vote_ops: u64,
}

impl ProbeRow {
    pub fn work(&self) -> usize {
        self.cavs * self.objects
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `ys` on `xs`. `r2` is 1 for a perfect fit,
/// including the degenerate case of constant `ys`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len(), "paired samples");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    LinearFit {
        slope,
        intercept,
        r2,
    }
}

fn probe_locations() -> Vec<KnownLocation> {
    (0..PROBE_LOCATIONS)
        .map(|i| KnownLocation {
            id: format!("loc-{i}"),
            position: Point::new(10.0 + 6.0 * (i % 4) as f64, 10.0 + 8.0 * (i / 4) as f64),
        })
        .collect()
}

fn label(v: usize, j: usize) -> String {
    format!("l{}", (v + j) % 3)
}

/// Operation counts of one PACE round and one VOTE round per grid point,
/// over synthetic batches of `objects` detections from each of `cavs` CAVs.
pub fn complexity_probe(cav_counts: &[usize], object_counts: &[usize]) -> Vec<ProbeRow> {
    let locations = probe_locations();
    let mut rows = Vec::with_capacity(cav_counts.len() * object_counts.len());
    for &cavs in cav_counts {
        for &objects in object_counts {
            let batches: Vec<Vec<LocalizedDetection>> = (0..cavs)
                .map(|v| {
                    (0..objects)
                        .map(|j| {
                            let loc = &locations[j % PROBE_LOCATIONS];
                            LocalizedDetection {
                                label: label(v, j),
                                confidence: 0.5 + 0.4 * ((v * 7 + j * 3) % 10) as f64 / 10.0,
                                position: Point::new(loc.position.x + 0.3, loc.position.y - 0.2),
                                source_cav: format!("cav-{v}"),
                                cycle: 1,
                            }
                        })
                        .collect()
                })
                .collect();
            let pace = pace_round(
                batches.iter().map(Vec::as_slice),
                &locations,
                &PaceParams::default(),
            );

            let poses: BTreeMap<String, Pose> = (0..cavs)
                .map(|v| (format!("cav-{v}"), Pose::new(19.0, 14.0, (v * 45) as f64)))
                .collect();
            let mut edge = VoteEdge::new(VoteParams::default(), locations.clone(), poses);
            for (v, batch) in batches.iter().enumerate() {
                for (j, d) in batch.iter().enumerate() {
                    edge.ingest(&VoteReport {
                        location_id: locations[j % PROBE_LOCATIONS].id.clone(),
                        label: d.label.clone(),
                        confidence: d.confidence,
                        position: d.position,
                        source_cav: format!("cav-{v}"),
                        cycle: 1,
                    });
                }
            }
            let mut bus = MessageBus::new(BusConfig::default());
            let truth = BTreeMap::new();
            let vote = edge
                .poll(VoteParams::default().tau_ms, &mut bus, &truth)
                .expect("fresh bus accepts publish")
                .expect("round is due");
            rows.push(ProbeRow {
                cavs,
                objects,
                pace_ops: pace.ops,
                vote_ops: vote.ops,
            });
        }
    }
    rows
}
