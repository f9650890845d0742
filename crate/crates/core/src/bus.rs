//! Simulated topic-based publish/subscribe transport on a millisecond clock.
//!
//! Every publish fans out to one envelope per current subscriber. Each
//! envelope independently samples a latency from `mean ± jitter` and a drop
//! decision; dropped envelopes are never delivered (at-most-once, no retained
//! messages).

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BusError, ConfigError};

pub const TOPIC_DETECTIONS: &str = "detections";
pub const TOPIC_GLOBAL_DETECTIONS: &str = "global_detections";
pub const TOPIC_VOTE_DETECTIONS: &str = "vote_detections";
pub const TOPIC_GLOBAL_VERDICTS: &str = "global_verdicts";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BusConfig {
    pub latency_mean_ms: f64,
    pub latency_jitter_ms: f64,
    pub drop_probability: f64,
    pub seed: u64,
}

impl Default for BusConfig {
    fn default() -> Self {
        BusConfig {
            latency_mean_ms: 0.0,
            latency_jitter_ms: 0.0,
            drop_probability: 0.0,
            seed: 0,
        }
    }
}

impl BusConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.latency_mean_ms >= 0.0 && self.latency_mean_ms.is_finite()) {
            return Err(ConfigError::invalid("bus.latency_mean_ms", "must be >= 0"));
        }
        if !(self.latency_jitter_ms >= 0.0 && self.latency_jitter_ms.is_finite()) {
            return Err(ConfigError::invalid(
                "bus.latency_jitter_ms",
                "must be >= 0",
            ));
        }
        // 1.0 is accepted so a run can model a fully severed network
        if !(0.0..=1.0).contains(&self.drop_probability) {
            return Err(ConfigError::invalid(
                "bus.drop_probability",
                "must be in [0, 1]",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub topic: String,
    pub payload: Arc<[u8]>,
    pub publisher: String,
    pub subscriber: String,
    pub sequence: u64,
    pub publish_time: u64,
    pub deliver_time: u64,
    pub dropped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subscription {
    pub topic: String,
    pub subscriber: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusStats {
    /// `publish` calls.
    pub publishes: u64,
    /// Envelopes created by fan-out.
    pub scheduled: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub in_flight: u64,
    /// FNV-1a digest over `(sequence, deliver_time, dropped)` of every
    /// scheduled envelope, in scheduling order.
    pub schedule_digest: u64,
}

#[derive(Debug)]
struct Pending(Envelope);

impl Pending {
    fn key(&self) -> (u64, u64) {
        (self.0.deliver_time, self.0.sequence)
    }
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv_mix(mut h: u64, value: u64) -> u64 {
    for b in value.to_le_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

pub struct MessageBus {
    config: BusConfig,
    rng: ChaCha8Rng,
    now: u64,
    next_sequence: u64,
    subscribers: BTreeMap<String, BTreeSet<String>>,
    queue: BinaryHeap<Reverse<Pending>>,
    stats: BusStats,
}

impl MessageBus {
    pub fn new(config: BusConfig) -> Self {
        MessageBus {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            now: 0,
            next_sequence: 0,
            subscribers: BTreeMap::new(),
            queue: BinaryHeap::new(),
            stats: BusStats {
                schedule_digest: FNV_OFFSET,
                ..BusStats::default()
            },
        }
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn config(&self) -> &BusConfig {
        &self.config
    }

    pub fn subscribe(&mut self, topic: &str, subscriber: &str) -> Subscription {
        self.subscribers
            .entry(topic.to_owned())
            .or_default()
            .insert(subscriber.to_owned());
        Subscription {
            topic: topic.to_owned(),
            subscriber: subscriber.to_owned(),
        }
    }

    pub fn unsubscribe(&mut self, sub: &Subscription) {
        if let Some(set) = self.subscribers.get_mut(&sub.topic) {
            set.remove(&sub.subscriber);
        }
    }

    /// Schedules one envelope per current subscriber of `topic`. Publishing
    /// at a time earlier than the clock is a time regression.
    pub fn publish(
        &mut self,
        topic: &str,
        payload: impl Into<Arc<[u8]>>,
        publisher: &str,
        now: u64,
    ) -> Result<(), BusError> {
        if topic.is_empty() {
            return Err(BusError::EmptyTopic);
        }
        if now < self.now {
            return Err(BusError::TimeRegression {
                now: self.now,
                requested: now,
            });
        }
        let payload: Arc<[u8]> = payload.into();
        self.stats.publishes += 1;
        let Some(subs) = self.subscribers.get(topic) else {
            return Ok(());
        };
        for subscriber in subs {
            let offset = self.rng.random_range(-1.0..=1.0) * self.config.latency_jitter_ms;
            let latency = (self.config.latency_mean_ms + offset).max(0.0).round() as u64;
            let dropped = self.rng.random::<f64>() < self.config.drop_probability;
            let sequence = self.next_sequence;
            self.next_sequence += 1;
            self.stats.scheduled += 1;
            let mut h = fnv_mix(self.stats.schedule_digest, sequence);
            h = fnv_mix(h, now + latency);
            self.stats.schedule_digest = fnv_mix(h, u64::from(dropped));
            if dropped {
                self.stats.dropped += 1;
                continue;
            }
            self.queue.push(Reverse(Pending(Envelope {
                topic: topic.to_owned(),
                payload: Arc::clone(&payload),
                publisher: publisher.to_owned(),
                subscriber: subscriber.clone(),
                sequence,
                publish_time: now,
                deliver_time: now + latency,
                dropped,
            })));
        }
        Ok(())
    }

    /// Moves the clock to `to_time` and returns every envelope due by then,
    /// ordered by delivery time and then publish sequence.
    pub fn advance(&mut self, to_time: u64) -> Result<Vec<Envelope>, BusError> {
        if to_time < self.now {
            return Err(BusError::TimeRegression {
                now: self.now,
                requested: to_time,
            });
        }
        self.now = to_time;
        let mut out = Vec::new();
        while self
            .queue
            .peek()
            .is_some_and(|Reverse(p)| p.0.deliver_time <= to_time)
        {
            let Reverse(Pending(env)) = self.queue.pop().expect("peeked");
            out.push(env);
        }
        self.stats.delivered += out.len() as u64;
        Ok(out)
    }

    pub fn stats(&self) -> BusStats {
        BusStats {
            in_flight: self.queue.len() as u64,
            ..self.stats
        }
    }
}
