use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::metrics::{MetricsRecord, RunMetrics, RunSummary};
use super::{Mode, ScenarioConfig};
use crate::bus::{
    Envelope, MessageBus, TOPIC_DETECTIONS, TOPIC_GLOBAL_DETECTIONS, TOPIC_GLOBAL_VERDICTS,
    TOPIC_VOTE_DETECTIONS,
};
use crate::error::{ConfigError, Result};
use crate::pace::{match_locations, Assignment, PaceEdge, STALE_AFTER_INTERVALS};
use crate::projection::{localize, LocalizedDetection};
use crate::scene::{CameraModel, KnownLocation, Pose};
use crate::sensor::sense;
use crate::vote::{VoteEdge, VoteReport};
use crate::wire::{decode_records, encode_records};

const EDGE_ID: &str = "edge";

struct Agent {
    id: String,
    physical: Pose,
    reported: Pose,
    camera: CameraModel,
    rng: ChaCha8Rng,
    detections: Vec<LocalizedDetection>,
    reports: Vec<VoteReport>,
    last_published: u64,
    received: u64,
    last_update: u64,
    max_gap: u64,
    matched: u64,
    matched_correct: u64,
}

/// One location-associated observation kept by the baseline edge.
#[derive(Debug, Clone)]
struct Observation {
    location: usize,
    label: String,
    confidence: f64,
    cycle: u64,
}

struct BaselineBatch {
    publish_time: u64,
    observations: Vec<Observation>,
}

/// No fusion: each CAV's verdict for a location is its own most confident
/// label from its most recent sensing cycle.
struct BaselineEdge {
    tau_ms: u64,
    locations: Vec<KnownLocation>,
    latest: BTreeMap<String, BaselineBatch>,
    last_published: u64,
}

struct BaselineRound {
    /// `(cav, location index, label)`
    verdicts: Vec<(String, usize, Option<String>)>,
    ops: u64,
}

impl BaselineEdge {
    fn ingest(&mut self, cav: &str, publish_time: u64, observations: Vec<Observation>) {
        if self
            .latest
            .get(cav)
            .is_none_or(|b| b.publish_time <= publish_time)
        {
            self.latest.insert(
                cav.to_owned(),
                BaselineBatch {
                    publish_time,
                    observations,
                },
            );
        }
    }

    fn poll(&mut self, now: u64, bus: &mut MessageBus) -> Result<Option<BaselineRound>> {
        if now.saturating_sub(self.last_published) < self.tau_ms {
            return Ok(None);
        }
        let horizon = STALE_AFTER_INTERVALS * self.tau_ms;
        self.latest
            .retain(|_, b| now.saturating_sub(b.publish_time) <= horizon);
        let mut verdicts = Vec::new();
        let mut ops = 0;
        for (cav, batch) in &self.latest {
            let current = batch.observations.iter().map(|o| o.cycle).max();
            let mut best: Vec<Option<(&str, f64)>> = vec![None; self.locations.len()];
            for o in batch
                .observations
                .iter()
                .filter(|o| Some(o.cycle) == current)
            {
                ops += 1;
                let slot = &mut best[o.location];
                let better = match slot {
                    None => true,
                    Some((l, c)) => {
                        o.confidence > *c || (o.confidence == *c && o.label.as_str() < *l)
                    }
                };
                if better {
                    *slot = Some((&o.label, o.confidence));
                }
            }
            for (i, b) in best.into_iter().enumerate() {
                ops += 1;
                verdicts.push((cav.clone(), i, b.map(|(l, _)| l.to_owned())));
            }
        }
        let payload: Vec<(String, String, Option<String>)> = verdicts
            .iter()
            .map(|(cav, i, l)| (cav.clone(), self.locations[*i].id.clone(), l.clone()))
            .collect();
        bus.publish(
            TOPIC_GLOBAL_VERDICTS,
            encode_records(&payload),
            EDGE_ID,
            now,
        )?;
        self.last_published = now;
        Ok(Some(BaselineRound { verdicts, ops }))
    }
}

enum Edge {
    Pace(PaceEdge),
    Vote(VoteEdge),
    Baseline(BaselineEdge),
}

fn mix_seed(a: u64, b: u64) -> u64 {
    a ^ b.wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(17)
}

/// Nearest known location within `delta`.
fn associate(locations: &[KnownLocation], det: &LocalizedDetection, delta: f64) -> Option<usize> {
    let mut ops = 0;
    let groups = match_locations(
        std::slice::from_ref(det),
        locations,
        delta,
        Assignment::ExclusiveNearest,
        &mut ops,
    );
    groups.iter().position(|g| !g.is_empty())
}

/// Runs a scenario to completion on the simulated clock.
pub fn run(config: &ScenarioConfig) -> Result<RunMetrics> {
    config.validate()?;
    if config.scene.cavs.iter().any(|c| c.id == EDGE_ID) {
        return Err(ConfigError::invalid("scene.cavs", format!("`{EDGE_ID}` is reserved")).into());
    }
    let mode = config.run.mode;
    let tau = config.tau_ms();
    let tick = config.run.tick_ms;
    let seed = config.run.seed;
    let convention = config.run.angular_convention;
    let locations = config.scene.known_locations();
    let truth: BTreeMap<String, String> = config
        .scene
        .locations
        .iter()
        .map(|o| (o.location_id.clone(), o.true_label.clone()))
        .collect();

    let mut bus_cfg = config.bus.clone();
    bus_cfg.seed = mix_seed(config.bus.seed, seed);
    let mut bus = MessageBus::new(bus_cfg);
    let (uplink, downlink) = if mode.is_vote() {
        (TOPIC_VOTE_DETECTIONS, TOPIC_GLOBAL_VERDICTS)
    } else if mode.is_baseline() {
        (TOPIC_DETECTIONS, TOPIC_GLOBAL_VERDICTS)
    } else {
        (TOPIC_DETECTIONS, TOPIC_GLOBAL_DETECTIONS)
    };
    bus.subscribe(uplink, EDGE_ID);

    let mut agents: Vec<Agent> = config
        .scene
        .cavs
        .iter()
        .enumerate()
        .map(|(i, cav)| {
            bus.subscribe(downlink, &cav.id);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            Agent {
                id: cav.id.clone(),
                physical: cav.pose,
                reported: convention.reported_pose(&cav.pose, &cav.camera),
                camera: cav.camera,
                rng,
                detections: Vec::new(),
                reports: Vec::new(),
                last_published: 0,
                received: 0,
                last_update: 0,
                max_gap: 0,
                matched: 0,
                matched_correct: 0,
            }
        })
        .collect();
    let agent_index: BTreeMap<String, usize> = agents
        .iter()
        .enumerate()
        .map(|(i, a)| (a.id.clone(), i))
        .collect();

    let mut edge = match mode {
        Mode::Pace => Edge::Pace(PaceEdge::new(config.pace.clone(), locations.clone())),
        Mode::Vote => {
            let poses = agents.iter().map(|a| (a.id.clone(), a.physical)).collect();
            Edge::Vote(VoteEdge::new(config.vote.clone(), locations.clone(), poses))
        }
        Mode::BaselinePace | Mode::BaselineVote => Edge::Baseline(BaselineEdge {
            tau_ms: tau,
            locations: locations.clone(),
            latest: BTreeMap::new(),
            last_published: 0,
        }),
    };

    let run_id = format!("{}-{}-s{}", config.name, mode, seed);
    let mut summary = RunSummary {
        run_id: run_id.clone(),
        scenario: config.name.clone(),
        mode: mode.to_string(),
        seed,
        visibility_mode: serde_plain(&config.vote.visibility_mode),
        angular_convention: serde_plain(&convention),
        ..RunSummary::default()
    };
    for a in &agents {
        summary
            .reputation_trajectories
            .insert(a.id.clone(), Vec::new());
    }
    let mut records = Vec::new();
    let mut heard: BTreeSet<String> = BTreeSet::new();
    let mut now = 0;

    for cycle in 1..=config.run.cycles {
        now = cycle * tick;

        for agent in agents.iter_mut() {
            let raws = sense(&config.scene, &agent.id, &config.noise, &mut agent.rng)?;
            for raw in &raws {
                let det = match localize(
                    raw,
                    &agent.reported,
                    &agent.camera,
                    convention,
                    &agent.id,
                    cycle,
                ) {
                    Ok(d) => d,
                    Err(_) => {
                        summary.localization_failures += 1;
                        continue;
                    }
                };
                let Some(loc) = associate(&locations, &det, config.pace.delta) else {
                    summary.unmatched_detections += 1;
                    if !mode.is_vote() {
                        agent.detections.push(det);
                    }
                    continue;
                };
                agent.matched += 1;
                if truth.get(&locations[loc].id) == Some(&det.label) {
                    agent.matched_correct += 1;
                }
                if mode.is_vote() {
                    agent.reports.push(VoteReport {
                        location_id: locations[loc].id.clone(),
                        label: det.label,
                        confidence: det.confidence,
                        position: det.position,
                        source_cav: det.source_cav,
                        cycle,
                    });
                } else {
                    agent.detections.push(det);
                }
            }
            if now - agent.last_published >= tau {
                let payload = if mode.is_vote() {
                    encode_records(&std::mem::take(&mut agent.reports))
                } else {
                    encode_records(&std::mem::take(&mut agent.detections))
                };
                bus.publish(uplink, payload, &agent.id, now)?;
                agent.last_published = now;
            }
        }

        for env in bus.advance(now)? {
            if env.subscriber == EDGE_ID {
                heard.insert(env.publisher.clone());
                deliver_to_edge(&mut edge, &env, &locations, config)?;
            } else if let Some(&i) = agent_index.get(&env.subscriber) {
                let a = &mut agents[i];
                a.received += 1;
                a.max_gap = a.max_gap.max(now - a.last_update);
                a.last_update = now;
            }
        }
        let st = bus.stats();
        debug_assert_eq!(st.scheduled, st.delivered + st.dropped + st.in_flight);

        // (closed a round, recorded it)
        let (closed, recorded) = match &mut edge {
            Edge::Pace(pace) => {
                let connected = pace.connected(now);
                match pace.poll(now, &mut bus)? {
                    Some(round) if connected > 0 => {
                        summary.rounds += 1;
                        summary.ops_per_round.push(round.ops);
                        for e in &round.entries {
                            records.push(record(
                                &run_id,
                                mode,
                                seed,
                                summary.rounds,
                                now,
                                &e.location_id,
                                "",
                                e.label.as_deref(),
                                &truth,
                            ));
                        }
                        (true, true)
                    }
                    Some(_) => (true, false),
                    None => (false, false),
                }
            }
            Edge::Vote(vote) => match vote.poll(now, &mut bus, &truth)? {
                Some(round) => {
                    for (cav, rep) in &round.reputations {
                        if let Some(t) = summary.reputation_trajectories.get_mut(cav) {
                            t.push(rep.value);
                        }
                    }
                    if heard.is_empty() {
                        (true, false)
                    } else {
                        summary.rounds += 1;
                        summary.ops_per_round.push(round.ops);
                        for v in &round.verdicts {
                            records.push(record(
                                &run_id,
                                mode,
                                seed,
                                summary.rounds,
                                now,
                                &v.location_id,
                                "",
                                v.label.as_deref(),
                                &truth,
                            ));
                        }
                        (true, true)
                    }
                }
                None => (false, false),
            },
            Edge::Baseline(base) => match base.poll(now, &mut bus)? {
                Some(round) if !round.verdicts.is_empty() => {
                    summary.rounds += 1;
                    summary.ops_per_round.push(round.ops);
                    for (cav, i, label) in &round.verdicts {
                        records.push(record(
                            &run_id,
                            mode,
                            seed,
                            summary.rounds,
                            now,
                            &locations[*i].id,
                            cav,
                            label.as_deref(),
                            &truth,
                        ));
                    }
                    (true, true)
                }
                Some(_) => (true, false),
                None => (false, false),
            },
        };
        if recorded {
            summary.round_times_ms.push(now);
        }
        if closed {
            heard.clear();
        }
        if config.run.verdicts_target > 0 && summary.rounds >= config.run.verdicts_target {
            break;
        }
    }

    summary.simulated_time_ms = now;
    summary.total_verdicts = records.len() as u64;
    summary.correct_verdicts = records.iter().filter(|r| r.correct).count() as u64;
    summary.accuracy_defined = summary.total_verdicts > 0;
    summary.accuracy = if summary.accuracy_defined {
        summary.correct_verdicts as f64 / summary.total_verdicts as f64
    } else {
        0.0
    };
    for a in &agents {
        let acc = if mode.is_baseline() {
            let mine: Vec<&MetricsRecord> = records.iter().filter(|r| r.cav_id == a.id).collect();
            ratio(
                mine.iter().filter(|r| r.correct).count() as u64,
                mine.len() as u64,
            )
        } else {
            ratio(a.matched_correct, a.matched)
        };
        summary.per_cav_accuracy.insert(a.id.clone(), acc);
        summary
            .cav_messages_received
            .insert(a.id.clone(), a.received);
        summary
            .max_update_gap_ms
            .insert(a.id.clone(), a.max_gap.max(now - a.last_update));
    }
    summary.best_cav_accuracy = summary
        .per_cav_accuracy
        .values()
        .copied()
        .fold(0.0, f64::max);
    if let Edge::Vote(v) = &edge {
        summary.rejected_reports = v.rejected.clone();
    }
    summary.messages = bus.stats();
    Ok(RunMetrics { summary, records })
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn serde_plain<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

#[allow(clippy::too_many_arguments)]
fn record(
    run_id: &str,
    mode: Mode,
    seed: u64,
    round: u64,
    now: u64,
    location_id: &str,
    cav_id: &str,
    label: Option<&str>,
    truth: &BTreeMap<String, String>,
) -> MetricsRecord {
    let true_label = truth.get(location_id).cloned().unwrap_or_default();
    MetricsRecord {
        run_id: run_id.to_owned(),
        round,
        simulated_time_ms: now,
        location_id: location_id.to_owned(),
        cav_id: cav_id.to_owned(),
        issued_label: label.unwrap_or_default().to_owned(),
        correct: label == Some(true_label.as_str()),
        true_label,
        mode: mode.to_string(),
        seed,
    }
}

fn deliver_to_edge(
    edge: &mut Edge,
    env: &Envelope,
    locations: &[KnownLocation],
    config: &ScenarioConfig,
) -> Result<()> {
    match edge {
        Edge::Pace(p) => p.handle(env),
        Edge::Vote(v) => v.handle(env),
        Edge::Baseline(b) => {
            let observations = if config.run.mode.is_vote() {
                let reports: Vec<VoteReport> = decode_records(&env.payload)?;
                reports
                    .into_iter()
                    .filter_map(|r| {
                        let location = locations.iter().position(|l| l.id == r.location_id)?;
                        Some(Observation {
                            location,
                            label: r.label,
                            confidence: r.confidence,
                            cycle: r.cycle,
                        })
                    })
                    .collect()
            } else {
                let dets: Vec<LocalizedDetection> = decode_records(&env.payload)?;
                let mut ops = 0;
                let groups = match_locations(
                    &dets,
                    locations,
                    config.pace.delta,
                    config.pace.assignment,
                    &mut ops,
                );
                groups
                    .iter()
                    .enumerate()
                    .flat_map(|(location, g)| {
                        g.iter().map(move |d| Observation {
                            location,
                            label: d.label.clone(),
                            confidence: d.confidence,
                            cycle: d.cycle,
                        })
                    })
                    .collect()
            };
            b.ingest(&env.publisher, env.publish_time, observations);
            Ok(())
        }
    }
}

/// Runs the single-CAV benchmark counterpart of `config`'s mode.
pub fn run_baseline(config: &ScenarioConfig) -> Result<RunMetrics> {
    run(&config.with_mode(config.run.mode.baseline()))
}
