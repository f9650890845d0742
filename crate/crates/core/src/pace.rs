//! Multi-view fusion on the edge: every CAV's latest detection batch is
//! matched against the known locations and each location's group is reduced
//! to one label, a confidence and an averaged position.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bus::{Envelope, MessageBus, TOPIC_GLOBAL_DETECTIONS};
use crate::error::{BusError, ConfigError, Result};
use crate::projection::LocalizedDetection;
use crate::scene::{KnownLocation, Point};
use crate::wire::{decode_records, encode_records};

/// Batches older than this many update intervals are discarded.
pub const STALE_AFTER_INTERVALS: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Assignment {
    /// A detection joins every location within `delta`.
    #[default]
    AllInRange,
    /// A detection joins only its nearest in-range location.
    ExclusiveNearest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PaceParams {
    pub delta: f64,
    pub tau_ms: u64,
    pub assignment: Assignment,
}

impl Default for PaceParams {
    fn default() -> Self {
        PaceParams {
            delta: 2.5,
            tau_ms: 120,
            assignment: Assignment::AllInRange,
        }
    }
}

impl PaceParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.delta > 0.0) {
            return Err(ConfigError::invalid("pace.delta", "must be > 0"));
        }
        if self.tau_ms == 0 {
            return Err(ConfigError::invalid("pace.tau_ms", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalMapEntry {
    pub location_id: String,
    pub label: Option<String>,
    pub confidence: f64,
    pub position: Option<Point>,
}

/// Flattens per-CAV batches into one list, in batch order, without dedup.
pub fn collect<'a, I>(batches: I) -> Vec<LocalizedDetection>
where
    I: IntoIterator<Item = &'a [LocalizedDetection]>,
{
    batches
        .into_iter()
        .flat_map(|b| b.iter().cloned())
        .collect()
}

/// Groups detections by known location. `ops` counts distance checks.
pub fn match_locations<'a>(
    omega_all: &'a [LocalizedDetection],
    locations: &[KnownLocation],
    delta: f64,
    assignment: Assignment,
    ops: &mut u64,
) -> Vec<Vec<&'a LocalizedDetection>> {
    let mut groups = vec![Vec::new(); locations.len()];
    match assignment {
        Assignment::AllInRange => {
            for (loc, group) in locations.iter().zip(groups.iter_mut()) {
                for det in omega_all {
                    *ops += 1;
                    if det.position.distance(loc.position) <= delta {
                        group.push(det);
                    }
                }
            }
        }
        Assignment::ExclusiveNearest => {
            for det in omega_all {
                let mut best: Option<(usize, f64)> = None;
                for (i, loc) in locations.iter().enumerate() {
                    *ops += 1;
                    let d = det.position.distance(loc.position);
                    if d <= delta && best.is_none_or(|(_, bd)| d < bd) {
                        best = Some((i, d));
                    }
                }
                if let Some((i, _)) = best {
                    groups[i].push(det);
                }
            }
        }
    }
    groups
}

/// Picks the label with the greatest summed score; ties go to the
/// lexicographically smallest label.
pub(crate) fn argmax_label<'a>(
    scores: impl IntoIterator<Item = (&'a str, f64)>,
) -> Option<&'a str> {
    let mut sums: BTreeMap<&str, f64> = BTreeMap::new();
    for (label, s) in scores {
        *sums.entry(label).or_insert(0.0) += s;
    }
    let mut best: Option<(&str, f64)> = None;
    for (label, s) in sums {
        if best.is_none_or(|(_, bs)| s > bs) {
            best = Some((label, s));
        }
    }
    best.map(|(l, _)| l)
}

/// Reduces one location's group to a map entry.
pub fn fuse(location_id: &str, group: &[&LocalizedDetection]) -> GlobalMapEntry {
    let empty = GlobalMapEntry {
        location_id: location_id.to_owned(),
        label: None,
        confidence: 0.0,
        position: None,
    };
    if group.is_empty() {
        return empty;
    }
    let sum_c: f64 = group.iter().map(|d| d.confidence).sum();
    let sum_c2: f64 = group.iter().map(|d| d.confidence * d.confidence).sum();
    let n = group.len() as f64;
    let position = Point::new(
        group.iter().map(|d| d.position.x).sum::<f64>() / n,
        group.iter().map(|d| d.position.y).sum::<f64>() / n,
    );
    if sum_c == 0.0 {
        // only zero-confidence evidence: report no label
        return GlobalMapEntry {
            position: Some(position),
            ..empty
        };
    }
    let label = argmax_label(group.iter().map(|d| (d.label.as_str(), d.confidence)));
    GlobalMapEntry {
        location_id: location_id.to_owned(),
        label: label.map(str::to_owned),
        confidence: sum_c2 / sum_c,
        position: Some(position),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaceRound {
    pub entries: Vec<GlobalMapEntry>,
    /// Appends, distance checks and group-member visits performed.
    pub ops: u64,
}

/// One fusion pass over a snapshot of batches.
pub fn pace_round<'a, I>(batches: I, locations: &[KnownLocation], params: &PaceParams) -> PaceRound
where
    I: IntoIterator<Item = &'a [LocalizedDetection]>,
{
    let omega_all = collect(batches);
    let mut ops = omega_all.len() as u64;
    let groups = match_locations(
        &omega_all,
        locations,
        params.delta,
        params.assignment,
        &mut ops,
    );
    let entries = locations
        .iter()
        .zip(&groups)
        .map(|(loc, g)| {
            ops += 1 + g.len() as u64;
            fuse(&loc.id, g)
        })
        .collect();
    PaceRound { entries, ops }
}

#[derive(Debug, Clone)]
struct Batch {
    publish_time: u64,
    detections: Vec<LocalizedDetection>,
}

/// Stateful edge node: keeps each CAV's latest batch and runs a fusion
/// round whenever `tau_ms` has elapsed since the last publish.
#[derive(Debug, Clone)]
pub struct PaceEdge {
    params: PaceParams,
    locations: Vec<KnownLocation>,
    latest: BTreeMap<String, Batch>,
    last_published: u64,
    pub node_id: String,
}

impl PaceEdge {
    pub fn new(params: PaceParams, locations: Vec<KnownLocation>) -> Self {
        PaceEdge {
            params,
            locations,
            latest: BTreeMap::new(),
            last_published: 0,
            node_id: "edge".to_owned(),
        }
    }

    pub fn params(&self) -> &PaceParams {
        &self.params
    }

    /// Replaces the sender's batch with the one carried by `env`.
    pub fn handle(&mut self, env: &Envelope) -> Result<()> {
        let detections: Vec<LocalizedDetection> = decode_records(&env.payload)?;
        self.ingest(&env.publisher, env.publish_time, detections);
        Ok(())
    }

    pub fn ingest(&mut self, cav: &str, publish_time: u64, detections: Vec<LocalizedDetection>) {
        let newer = self
            .latest
            .get(cav)
            .is_none_or(|b| b.publish_time <= publish_time);
        if newer {
            self.latest.insert(
                cav.to_owned(),
                Batch {
                    publish_time,
                    detections,
                },
            );
        }
    }

    pub fn is_due(&self, now: u64) -> bool {
        now.saturating_sub(self.last_published) >= self.params.tau_ms
    }

    /// Number of CAVs with a fresh batch at `now`.
    pub fn connected(&self, now: u64) -> usize {
        let horizon = STALE_AFTER_INTERVALS * self.params.tau_ms;
        self.latest
            .values()
            .filter(|b| now.saturating_sub(b.publish_time) <= horizon)
            .count()
    }

    /// Runs a round if one is due, publishing the map on `global_detections`.
    pub fn poll(&mut self, now: u64, bus: &mut MessageBus) -> Result<Option<PaceRound>, BusError> {
        if !self.is_due(now) {
            return Ok(None);
        }
        let horizon = STALE_AFTER_INTERVALS * self.params.tau_ms;
        self.latest
            .retain(|_, b| now.saturating_sub(b.publish_time) <= horizon);
        let round = pace_round(
            self.latest.values().map(|b| b.detections.as_slice()),
            &self.locations,
            &self.params,
        );
        bus.publish(
            TOPIC_GLOBAL_DETECTIONS,
            encode_records(&round.entries),
            &self.node_id,
            now,
        )?;
        self.last_published = now;
        Ok(Some(round))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn det(label: &str, c: f64, x: f64, y: f64) -> LocalizedDetection {
        LocalizedDetection {
            label: label.into(),
            confidence: c,
            position: Point::new(x, y),
            source_cav: "v".into(),
            cycle: 0,
        }
    }

    fn loc(id: &str, x: f64, y: f64) -> KnownLocation {
        KnownLocation {
            id: id.into(),
            position: Point::new(x, y),
        }
    }

    #[test]
    fn collect_concatenates_without_dedup() {
        let a = vec![
            det("a", 0.5, 0.0, 0.0),
            det("a", 0.5, 0.0, 0.0),
            det("b", 0.1, 1.0, 1.0),
        ];
        let b = vec![det("c", 0.2, 0.0, 0.0); 3];
        assert_eq!(collect([a.as_slice(), b.as_slice()]).len(), 6);
        assert!(collect(std::iter::empty::<&[LocalizedDetection]>()).is_empty());
        assert_eq!(collect([a.as_slice()]), a);
    }

    #[test]
    fn matching_radius_is_inclusive() {
        let locs = [loc("r", 0.0, 0.0)];
        let dets = [det("a", 1.0, 1.4, 0.0), det("b", 1.0, 1.6, 0.0)];
        let mut ops = 0;
        let g = match_locations(&dets, &locs, 1.5, Assignment::AllInRange, &mut ops);
        assert_eq!(g[0].len(), 1);
        assert_eq!(g[0][0].label, "a");
        assert_eq!(ops, 2);
    }

    #[test]
    fn shared_detection_joins_both_groups() {
        let locs = [loc("r1", 0.0, 0.0), loc("r2", 2.0, 0.0)];
        let dets = [det("a", 1.0, 1.0, 0.0)];
        let mut ops = 0;
        let g = match_locations(&dets, &locs, 1.5, Assignment::AllInRange, &mut ops);
        assert_eq!((g[0].len(), g[1].len()), (1, 1));
        let dets = [det("a", 1.0, 0.9, 0.0)];
        let g = match_locations(&dets, &locs, 1.5, Assignment::ExclusiveNearest, &mut ops);
        assert_eq!((g[0].len(), g[1].len()), (1, 0));
    }

    #[test]
    fn fuse_single_member() {
        let d = det("cup", 0.8, 3.0, 4.0);
        let e = fuse("r", &[&d]);
        assert_eq!(e.label.as_deref(), Some("cup"));
        assert!((e.confidence - 0.8).abs() < 1e-15);
        assert_eq!(e.position, Some(Point::new(3.0, 4.0)));
    }

    #[test]
    fn fuse_worked_example() {
        let ds = [
            det("car", 0.9, 0.0, 0.0),
            det("truck", 0.8, 3.0, 0.0),
            det("car", 0.3, 0.0, 3.0),
        ];
        let refs: Vec<&LocalizedDetection> = ds.iter().collect();
        let e = fuse("r", &refs);
        assert_eq!(e.label.as_deref(), Some("car"));
        // (0.81 + 0.64 + 0.09) / 2.0
        assert!((e.confidence - 0.77).abs() < 1e-12);
        assert_eq!(e.position, Some(Point::new(1.0, 1.0)));
    }

    #[test]
    fn fuse_empty_and_zero_confidence() {
        let e = fuse("r", &[]);
        assert_eq!((e.label, e.confidence, e.position), (None, 0.0, None));
        let d = det("a", 0.0, 1.0, 1.0);
        let e = fuse("r", &[&d]);
        assert_eq!((e.label, e.confidence), (None, 0.0));
    }

    #[test]
    fn tie_goes_to_smaller_label() {
        let ds = [det("b", 0.5, 0.0, 0.0), det("a", 0.5, 0.0, 0.0)];
        let refs: Vec<&LocalizedDetection> = ds.iter().collect();
        assert_eq!(fuse("r", &refs).label.as_deref(), Some("a"));
    }

    #[test]
    fn no_cavs_gives_empty_entries() {
        let locs = [loc("r1", 0.0, 0.0), loc("r2", 5.0, 5.0)];
        let r = pace_round(
            std::iter::empty::<&[LocalizedDetection]>(),
            &locs,
            &PaceParams::default(),
        );
        assert!(r
            .entries
            .iter()
            .all(|e| e.label.is_none() && e.confidence == 0.0));
    }

    #[test]
    fn edge_cadence_and_staleness() {
        use crate::bus::BusConfig;
        let mut bus = MessageBus::new(BusConfig::default());
        bus.subscribe(TOPIC_GLOBAL_DETECTIONS, "v1");
        let mut edge = PaceEdge::new(PaceParams::default(), vec![loc("r", 0.0, 0.0)]);
        edge.ingest("v1", 0, vec![det("a", 0.9, 0.0, 0.0)]);
        assert!(edge.poll(60, &mut bus).unwrap().is_none());
        let r = edge.poll(120, &mut bus).unwrap().unwrap();
        assert_eq!(r.entries[0].label.as_deref(), Some("a"));
        assert!(edge.poll(200, &mut bus).unwrap().is_none());
        // the batch from t=0 is older than 3 tau at t=480
        let r = edge.poll(480, &mut bus).unwrap().unwrap();
        assert_eq!(r.entries[0].label, None);
        assert_eq!(bus.advance(480).unwrap().len(), 2);
    }

    fn dyadic() -> impl Strategy<Value = f64> {
        (0u32..=64).prop_map(|k| f64::from(k) / 64.0)
    }

    proptest! {
        #[test]
        fn fused_confidence_within_member_range(cs in proptest::collection::vec(0.01..1.0f64, 1..10)) {
            let ds: Vec<_> = cs.iter().map(|&c| det("a", c, 0.0, 0.0)).collect();
            let refs: Vec<&LocalizedDetection> = ds.iter().collect();
            let e = fuse("r", &refs);
            let lo = cs.iter().cloned().fold(f64::MAX, f64::min);
            let hi = cs.iter().cloned().fold(f64::MIN, f64::max);
            prop_assert!(e.confidence >= lo - 1e-12 && e.confidence <= hi + 1e-12);
        }

        #[test]
        fn fused_label_permutation_invariant(
            members in proptest::collection::vec((0usize..4, dyadic()), 1..12),
            shuffle_seed in 0u64..1000,
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let labels = ["a", "b", "c", "d"];
            let ds: Vec<_> = members.iter().map(|&(l, c)| det(labels[l], c, 0.0, 0.0)).collect();
            let mut shuffled = ds.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(shuffle_seed));
            let a: Vec<&LocalizedDetection> = ds.iter().collect();
            let b: Vec<&LocalizedDetection> = shuffled.iter().collect();
            prop_assert_eq!(fuse("r", &a).label, fuse("r", &b).label);
        }

        #[test]
        fn extra_vote_keeps_winner(members in proptest::collection::vec((0usize..3, dyadic()), 1..8), c in dyadic()) {
            let labels = ["a", "b", "c"];
            let ds: Vec<_> = members.iter().map(|&(l, c)| det(labels[l], c, 0.0, 0.0)).collect();
            let refs: Vec<&LocalizedDetection> = ds.iter().collect();
            let winner = fuse("r", &refs).label;
            prop_assume!(winner.is_some());
            let mut more = ds.clone();
            more.push(det(winner.as_deref().unwrap(), c.max(1.0 / 64.0), 0.0, 0.0));
            let refs: Vec<&LocalizedDetection> = more.iter().collect();
            prop_assert_eq!(fuse("r", &refs).label, winner);
        }
    }
}
