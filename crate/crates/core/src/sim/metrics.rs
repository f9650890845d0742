use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};

use crate::bus::BusStats;
use crate::vote::RejectCounts;

/// One issued verdict compared against ground truth. Baseline runs issue one
/// verdict per CAV, so `cav_id` is set there and empty otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub run_id: String,
    pub round: u64,
    pub simulated_time_ms: u64,
    pub location_id: String,
    pub cav_id: String,
    pub issued_label: String,
    pub true_label: String,
    pub correct: bool,
    pub mode: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub scenario: String,
    pub mode: String,
    pub seed: u64,
    pub visibility_mode: String,
    pub angular_convention: String,
    /// Correct verdicts over all verdicts; 0 when no verdict was issued.
    pub accuracy: f64,
    /// False when no verdict was issued and `accuracy` is a placeholder.
    pub accuracy_defined: bool,
    pub total_verdicts: u64,
    pub correct_verdicts: u64,
    pub rounds: u64,
    /// Baseline runs: each CAV's own verdict accuracy. Collaborative runs:
    /// share of each CAV's location-matched labels that were right.
    pub per_cav_accuracy: BTreeMap<String, f64>,
    pub best_cav_accuracy: f64,
    pub reputation_trajectories: BTreeMap<String, Vec<f64>>,
    pub messages: BusStats,
    pub cav_messages_received: BTreeMap<String, u64>,
    /// Longest gap, per CAV, between global updates it received.
    pub max_update_gap_ms: BTreeMap<String, u64>,
    pub ops_per_round: Vec<u64>,
    pub round_times_ms: Vec<u64>,
    pub rejected_reports: RejectCounts,
    pub localization_failures: u64,
    pub unmatched_detections: u64,
    pub simulated_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub summary: RunSummary,
    pub records: Vec<MetricsRecord>,
}

impl RunMetrics {
    pub fn accuracy(&self) -> f64 {
        self.summary.accuracy
    }

    pub fn write_records_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)?;
        }
        if self.records.is_empty() {
            w.write_record([
                "run_id",
                "round",
                "simulated_time_ms",
                "location_id",
                "cav_id",
                "issued_label",
                "true_label",
                "correct",
                "mode",
                "seed",
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }
}
