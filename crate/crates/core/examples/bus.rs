//! The simulated broker: per-subscriber latency, jitter and independent drops.
//!
//! ```bash
//! cargo run --example bus
//! ```

use coopsim::bus::{BusConfig, MessageBus};

fn main() -> coopsim::Result<()> {
    let mut bus = MessageBus::new(BusConfig {
        latency_mean_ms: 40.0,
        latency_jitter_ms: 25.0,
        drop_probability: 0.2,
        seed: 3,
    });
    bus.subscribe("detections", "edge");
    bus.subscribe("detections", "logger");
    bus.subscribe("global_detections", "cav-1");

    for t in (0..=300).step_by(30) {
        bus.publish("detections", format!("batch@{t}").into_bytes(), "cav-1", t)?;
        if t % 120 == 0 {
            bus.publish("global_detections", b"map".to_vec(), "edge", t)?;
        }
        for env in bus.advance(t)? {
            println!(
                "t={t:>3}  {:<17} {:<6} -> {:<6} sent {:>3}, {} ms in flight",
                env.topic,
                env.publisher,
                env.subscriber,
                env.publish_time,
                env.deliver_time - env.publish_time
            );
        }
    }
    let s = bus.stats();
    println!(
        "scheduled {} = delivered {} + dropped {} + in flight {}; schedule digest {:016x}",
        s.scheduled, s.delivered, s.dropped, s.in_flight, s.schedule_digest
    );
    Ok(())
}
