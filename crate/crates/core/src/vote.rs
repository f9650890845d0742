//! Reputation-weighted label consensus on the edge.
//!
//! Each report adds `r_v * c * k(rho, v)` to the score of its label at its
//! location. Every verdict interval the best-scoring label per location is
//! issued, and each CAV's reputation moves by `eta` times its net fraction
//! of correct labels that round, clamped to `[0.30, 1.00]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bus::{Envelope, MessageBus, TOPIC_GLOBAL_VERDICTS};
use crate::error::{BusError, ConfigError, GeometryError, Result};
use crate::pace::argmax_label;
use crate::scene::{bearing_and_distance, KnownLocation, Point, Pose};
use crate::wire::{decode_records, encode_records};

pub const REPUTATION_FLOOR: f64 = 0.30;
pub const REPUTATION_CEILING: f64 = 1.00;
pub const INITIAL_REPUTATION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VisibilityMode {
    /// Angle term `theta / 360`, exactly as the weighting is usually written.
    #[default]
    Literal,
    /// Angle term `1 - theta / 360`, so on-axis views weigh more.
    Corrected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VoteParams {
    pub p_d: f64,
    pub d_max: f64,
    pub tau_ms: u64,
    pub eta: f64,
    pub visibility_mode: VisibilityMode,
    /// Keep accumulating scores across rounds instead of resetting.
    pub cumulative_tally: bool,
}

impl Default for VoteParams {
    fn default() -> Self {
        VoteParams {
            p_d: 0.7,
            d_max: 60.0,
            tau_ms: 120,
            eta: 0.05,
            visibility_mode: VisibilityMode::Literal,
            cumulative_tally: false,
        }
    }
}

impl VoteParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.p_d) {
            return Err(ConfigError::invalid("vote.p_d", "must be in [0, 1]"));
        }
        if !(self.d_max > 0.0) {
            return Err(ConfigError::invalid("vote.d_max", "must be > 0"));
        }
        if self.tau_ms == 0 {
            return Err(ConfigError::invalid("vote.tau_ms", "must be > 0"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(ConfigError::invalid("vote.eta", "must be > 0"));
        }
        Ok(())
    }
}

/// A CAV's claim that the object at `location_id` carries `label`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteReport {
    pub location_id: String,
    pub label: String,
    pub confidence: f64,
    pub position: Point,
    pub source_cav: String,
    pub cycle: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub location_id: String,
    pub label: Option<String>,
    pub round: u64,
    pub issue_time: u64,
}

/// Visibility weight of location `rho` from a camera at `cam_pose`, whose
/// heading is the optical axis.
pub fn visibility(rho: Point, cam_pose: &Pose, params: &VoteParams) -> Result<f64, GeometryError> {
    let (d, theta) = bearing_and_distance(cam_pose, rho);
    visibility_from(d, theta, params)
}

/// Visibility weight from an already-measured distance and deviation.
pub fn visibility_from(d: f64, theta: f64, params: &VoteParams) -> Result<f64, GeometryError> {
    if d > params.d_max {
        return Err(GeometryError::OutOfRange {
            distance: d,
            d_max: params.d_max,
        });
    }
    let distance_term = 1.0 - d / params.d_max;
    let angle_term = match params.visibility_mode {
        VisibilityMode::Literal => theta / 360.0,
        VisibilityMode::Corrected => 1.0 - theta / 360.0,
    };
    Ok(params.p_d * distance_term + (1.0 - params.p_d) * angle_term)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("report for unknown location `{0}`")]
pub struct UnknownLocation(pub String);

/// Accumulated score per location and label. A missing label scores zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VoteTally {
    pub scores: BTreeMap<String, BTreeMap<String, f64>>,
}

impl VoteTally {
    pub fn new<'a>(location_ids: impl IntoIterator<Item = &'a str>) -> Self {
        VoteTally {
            scores: location_ids
                .into_iter()
                .map(|id| (id.to_owned(), BTreeMap::new()))
                .collect(),
        }
    }

    pub fn score(&self, location_id: &str, label: &str) -> f64 {
        self.scores
            .get(location_id)
            .and_then(|m| m.get(label))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn ingest(
        &mut self,
        location_id: &str,
        label: &str,
        confidence: f64,
        reputation: f64,
        k: f64,
    ) -> Result<(), UnknownLocation> {
        let cell = self
            .scores
            .get_mut(location_id)
            .ok_or_else(|| UnknownLocation(location_id.to_owned()))?;
        let add = reputation * confidence * k;
        if add != 0.0 || cell.contains_key(label) {
            *cell.entry(label.to_owned()).or_insert(0.0) += add;
        }
        Ok(())
    }

    /// Best label per location, in location-id order.
    pub fn verdicts(&self) -> Vec<(String, Option<String>)> {
        self.scores
            .iter()
            .map(|(rho, labels)| {
                let winner = argmax_label(labels.iter().map(|(l, s)| (l.as_str(), *s)));
                (rho.clone(), winner.map(str::to_owned))
            })
            .collect()
    }

    pub fn clear(&mut self) {
        for labels in self.scores.values_mut() {
            labels.clear();
        }
    }
}

/// Issues the argmax verdict for every location in `locations` order.
pub fn verdict_round(
    tally: &VoteTally,
    locations: &[KnownLocation],
    round: u64,
    now: u64,
) -> Vec<Verdict> {
    let best: BTreeMap<String, Option<String>> = tally.verdicts().into_iter().collect();
    locations
        .iter()
        .map(|loc| Verdict {
            location_id: loc.id.clone(),
            label: best.get(&loc.id).cloned().flatten(),
            round,
            issue_time: now,
        })
        .collect()
}

/// Net-correctness step applied to a reputation, clamped to the allowed band.
/// A round with no objects leaves the reputation unchanged.
pub fn update_reputation(r: f64, correct: u32, incorrect: u32, objects: u32, eta: f64) -> f64 {
    if objects == 0 {
        return r;
    }
    let raw = (f64::from(correct) - f64::from(incorrect)) / f64::from(objects);
    let next = r + eta * raw;
    // repeated eta steps accumulate rounding error; treat a near miss of a
    // bound as reaching it
    if next <= REPUTATION_FLOOR + BOUND_SNAP {
        REPUTATION_FLOOR
    } else if next >= REPUTATION_CEILING - BOUND_SNAP {
        REPUTATION_CEILING
    } else {
        next
    }
}

const BOUND_SNAP: f64 = 1e-9;

/// Reputation of one CAV plus the counts from its most recent round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reputation {
    pub value: f64,
    pub correct: u32,
    pub incorrect: u32,
    pub objects: u32,
}

impl Default for Reputation {
    fn default() -> Self {
        Reputation {
            value: INITIAL_REPUTATION,
            correct: 0,
            incorrect: 0,
            objects: 0,
        }
    }
}

/// Brute-force evaluation of the aggregated score: for every CAV, every one
/// of its reports and every candidate label, add
/// `[label matches] * r_v * c * k(rho, v)`. Reports that the incremental
/// path would reject (unknown location or CAV, out of range) are skipped.
pub fn score_oracle(
    reports: &BTreeMap<String, Vec<VoteReport>>,
    reputations: &BTreeMap<String, f64>,
    poses: &BTreeMap<String, Pose>,
    locations: &[KnownLocation],
    params: &VoteParams,
) -> VoteTally {
    let mut candidates: Vec<&str> = reports
        .values()
        .flatten()
        .map(|r| r.label.as_str())
        .collect();
    candidates.sort_unstable();
    candidates.dedup();
    let mut tally = VoteTally::new(locations.iter().map(|l| l.id.as_str()));
    for (cav, omega) in reports {
        let (Some(&r_v), Some(pose)) = (reputations.get(cav), poses.get(cav)) else {
            continue;
        };
        for w in omega {
            let Some(loc) = locations.iter().find(|l| l.id == w.location_id) else {
                continue;
            };
            let dx = loc.position.x - pose.x;
            let dy = loc.position.y - pose.y;
            let d = (dx * dx + dy * dy).sqrt();
            if d > params.d_max {
                continue;
            }
            let bearing = dy.atan2(dx).to_degrees();
            let mut theta = (bearing - pose.theta).abs() % 360.0;
            if theta > 180.0 {
                theta = 360.0 - theta;
            }
            let angle = match params.visibility_mode {
                VisibilityMode::Literal => theta / 360.0,
                VisibilityMode::Corrected => 1.0 - theta / 360.0,
            };
            let k = params.p_d * (1.0 - d / params.d_max) + (1.0 - params.p_d) * angle;
            for &l in &candidates {
                let indicator = if w.label == l { 1.0 } else { 0.0 };
                let contribution = indicator * r_v * w.confidence * k;
                if indicator == 1.0 {
                    *tally
                        .scores
                        .get_mut(&loc.id)
                        .expect("seeded")
                        .entry(l.to_owned())
                        .or_insert(0.0) += contribution;
                }
            }
        }
    }
    tally
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RejectCounts {
    pub unknown_location: u64,
    pub unknown_cav: u64,
    pub out_of_range: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoteRound {
    pub verdicts: Vec<Verdict>,
    /// Ingest operations since the previous round plus verdict label scans.
    pub ops: u64,
    /// Reputation after the update, per CAV.
    pub reputations: BTreeMap<String, Reputation>,
}

/// Stateful edge node running the voting loop.
#[derive(Debug, Clone)]
pub struct VoteEdge {
    params: VoteParams,
    locations: Vec<KnownLocation>,
    poses: BTreeMap<String, Pose>,
    reputations: BTreeMap<String, Reputation>,
    tally: VoteTally,
    round_reports: BTreeMap<String, Vec<VoteReport>>,
    last_published: u64,
    round: u64,
    pending_ops: u64,
    pub rejected: RejectCounts,
    pub node_id: String,
}

impl VoteEdge {
    /// `poses` maps each CAV to its camera pose (heading along the optical axis).
    pub fn new(
        params: VoteParams,
        locations: Vec<KnownLocation>,
        poses: BTreeMap<String, Pose>,
    ) -> Self {
        let reputations = poses
            .keys()
            .map(|id| (id.clone(), Reputation::default()))
            .collect();
        let tally = VoteTally::new(locations.iter().map(|l| l.id.as_str()));
        VoteEdge {
            params,
            locations,
            poses,
            reputations,
            tally,
            round_reports: BTreeMap::new(),
            last_published: 0,
            round: 0,
            pending_ops: 0,
            rejected: RejectCounts::default(),
            node_id: "edge".to_owned(),
        }
    }

    pub fn tally(&self) -> &VoteTally {
        &self.tally
    }

    pub fn reputations(&self) -> &BTreeMap<String, Reputation> {
        &self.reputations
    }

    pub fn handle(&mut self, env: &Envelope) -> Result<()> {
        let reports: Vec<VoteReport> = decode_records(&env.payload)?;
        for r in &reports {
            self.ingest(r);
        }
        Ok(())
    }

    /// Adds one report to the tally. Rejected reports are counted, not fatal.
    pub fn ingest(&mut self, report: &VoteReport) {
        // one op for the CAV lookup, one per location compared, one to score
        self.pending_ops += 1;
        let (Some(pose), Some(rep)) = (
            self.poses.get(&report.source_cav),
            self.reputations.get(&report.source_cav),
        ) else {
            self.rejected.unknown_cav += 1;
            return;
        };
        let found = self
            .locations
            .iter()
            .position(|l| l.id == report.location_id);
        self.pending_ops += found.map_or(self.locations.len(), |i| i + 1) as u64;
        let Some(loc) = found.map(|i| &self.locations[i]) else {
            self.rejected.unknown_location += 1;
            return;
        };
        self.pending_ops += 1;
        let Ok(k) = visibility(loc.position, pose, &self.params) else {
            self.rejected.out_of_range += 1;
            return;
        };
        self.tally
            .ingest(
                &report.location_id,
                &report.label,
                report.confidence,
                rep.value,
                k,
            )
            .expect("location checked above");
        self.round_reports
            .entry(report.source_cav.clone())
            .or_default()
            .push(report.clone());
    }

    pub fn is_due(&self, now: u64) -> bool {
        now.saturating_sub(self.last_published) >= self.params.tau_ms
    }

    /// Number of CAVs with accepted reports in the current round.
    pub fn reporting(&self) -> usize {
        self.round_reports.len()
    }

    /// Issues verdicts if due, publishes them on `global_verdicts`, updates
    /// reputations against `truth` and resets the tally.
    pub fn poll(
        &mut self,
        now: u64,
        bus: &mut MessageBus,
        truth: &BTreeMap<String, String>,
    ) -> Result<Option<VoteRound>, BusError> {
        if !self.is_due(now) {
            return Ok(None);
        }
        self.round += 1;
        let verdicts = verdict_round(&self.tally, &self.locations, self.round, now);
        let scans: u64 = self.tally.scores.values().map(|m| 1 + m.len() as u64).sum();
        bus.publish(
            TOPIC_GLOBAL_VERDICTS,
            encode_records(&verdicts),
            &self.node_id,
            now,
        )?;

        for (cav, rep) in self.reputations.iter_mut() {
            let (correct, incorrect, objects) = self
                .round_reports
                .get(cav)
                .map(|reports| round_outcome(reports, truth))
                .unwrap_or((0, 0, 0));
            rep.value = update_reputation(rep.value, correct, incorrect, objects, self.params.eta);
            rep.correct = correct;
            rep.incorrect = incorrect;
            rep.objects = objects;
        }
        self.round_reports.clear();
        if !self.params.cumulative_tally {
            self.tally.clear();
        }
        self.last_published = now;
        let ops = std::mem::take(&mut self.pending_ops) + scans;
        Ok(Some(VoteRound {
            verdicts,
            ops,
            reputations: self.reputations.clone(),
        }))
    }
}

/// Per location a CAV reported on, its own best label (by summed confidence)
/// is compared with the truth. Returns `(correct, incorrect, objects)`.
pub fn round_outcome(reports: &[VoteReport], truth: &BTreeMap<String, String>) -> (u32, u32, u32) {
    let mut by_location: BTreeMap<&str, Vec<(&str, f64)>> = BTreeMap::new();
    for r in reports {
        by_location
            .entry(&r.location_id)
            .or_default()
            .push((&r.label, r.confidence));
    }
    let (mut correct, mut incorrect) = (0, 0);
    for (rho, votes) in &by_location {
        let label = argmax_label(votes.iter().copied());
        if label.is_some() && label == truth.get(*rho).map(String::as_str) {
            correct += 1;
        } else {
            incorrect += 1;
        }
    }
    (correct, incorrect, by_location.len() as u32)
}
