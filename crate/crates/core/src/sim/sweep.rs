use std::fmt;
use std::str::FromStr;

use super::{run, Mode, RunMetrics, ScenarioConfig};
use crate::error::{ConfigError, Result};
use crate::pace::Assignment;
use crate::scene::Cav;
use crate::vote::VisibilityMode;

/// A scenario parameter that `sweep` can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Truncates or cyclically replicates the scene's CAVs.
    CavCount,
    DropProbability,
    LatencyMeanMs,
    LatencyJitterMs,
    LabelConfusionRate,
    MissRate,
    BboxJitterPx,
    Delta,
    TauMs,
    Assignment,
    PD,
    Eta,
    VisibilityMode,
    Mode,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 14] = [
        SweepAxis::CavCount,
        SweepAxis::DropProbability,
        SweepAxis::LatencyMeanMs,
        SweepAxis::LatencyJitterMs,
        SweepAxis::LabelConfusionRate,
        SweepAxis::MissRate,
        SweepAxis::BboxJitterPx,
        SweepAxis::Delta,
        SweepAxis::TauMs,
        SweepAxis::Assignment,
        SweepAxis::PD,
        SweepAxis::Eta,
        SweepAxis::VisibilityMode,
        SweepAxis::Mode,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::CavCount => "cav_count",
            SweepAxis::DropProbability => "drop_probability",
            SweepAxis::LatencyMeanMs => "latency_mean_ms",
            SweepAxis::LatencyJitterMs => "latency_jitter_ms",
            SweepAxis::LabelConfusionRate => "label_confusion_rate",
            SweepAxis::MissRate => "miss_rate",
            SweepAxis::BboxJitterPx => "bbox_jitter_px",
            SweepAxis::Delta => "delta",
            SweepAxis::TauMs => "tau_ms",
            SweepAxis::Assignment => "assignment",
            SweepAxis::PD => "p_d",
            SweepAxis::Eta => "eta",
            SweepAxis::VisibilityMode => "visibility_mode",
            SweepAxis::Mode => "mode",
        }
    }

    /// Returns `base` with this axis set to `value`.
    pub fn apply(self, base: &ScenarioConfig, value: &str) -> Result<ScenarioConfig, ConfigError> {
        let mut c = base.clone();
        let bad = |msg: String| ConfigError::invalid(self.name(), msg);
        let float = || {
            value
                .trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("`{value}`: {e}")))
        };
        let int = || {
            value
                .trim()
                .parse::<u64>()
                .map_err(|e| bad(format!("`{value}`: {e}")))
        };
        let keyword = |v: &str| format!("\"{}\"", v.trim().trim_matches('"'));
        match self {
            SweepAxis::CavCount => {
                let n = int()? as usize;
                c.scene.cavs = replicate_cavs(&base.scene.cavs, n);
            }
            SweepAxis::DropProbability => c.bus.drop_probability = float()?,
            SweepAxis::LatencyMeanMs => c.bus.latency_mean_ms = float()?,
            SweepAxis::LatencyJitterMs => c.bus.latency_jitter_ms = float()?,
            SweepAxis::LabelConfusionRate => c.noise.label_confusion_rate = float()?,
            SweepAxis::MissRate => c.noise.miss_rate = float()?,
            SweepAxis::BboxJitterPx => c.noise.bbox_jitter_px = float()?,
            SweepAxis::Delta => c.pace.delta = float()?,
            SweepAxis::TauMs => {
                let t = int()?;
                c.pace.tau_ms = t;
                c.vote.tau_ms = t;
            }
            SweepAxis::Assignment => {
                c.pace.assignment = serde_json::from_str::<Assignment>(&keyword(value))
                    .map_err(|e| bad(e.to_string()))?
            }
            SweepAxis::PD => c.vote.p_d = float()?,
            SweepAxis::Eta => c.vote.eta = float()?,
            SweepAxis::VisibilityMode => {
                c.vote.visibility_mode = serde_json::from_str::<VisibilityMode>(&keyword(value))
                    .map_err(|e| bad(e.to_string()))?
            }
            SweepAxis::Mode => {
                c.run.mode =
                    serde_json::from_str::<Mode>(&keyword(value)).map_err(|e| bad(e.to_string()))?
            }
        }
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| ConfigError::UnknownAxis {
                axis: s.to_owned(),
                valid: SweepAxis::ALL.map(SweepAxis::name).join(", "),
            })
    }
}

/// First `n` CAVs, cycling through the originals with suffixed ids when `n`
/// exceeds their number.
fn replicate_cavs(cavs: &[Cav], n: usize) -> Vec<Cav> {
    if cavs.is_empty() {
        return Vec::new();
    }
    (0..n)
        .map(|i| {
            let mut cav = cavs[i % cavs.len()].clone();
            let copy = i / cavs.len();
            if copy > 0 {
                cav.id = format!("{}-{copy}", cav.id);
            }
            cav
        })
        .collect()
}

/// One run per value; run `i` uses seed `base.run.seed + i`.
pub fn sweep(base: &ScenarioConfig, axis: SweepAxis, values: &[String]) -> Result<Vec<RunMetrics>> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut c = axis.apply(base, v)?;
            c.run.seed = base.run.seed.wrapping_add(i as u64);
            c.name = format!("{}-{}-{}", base.name, axis, v.trim());
            run(&c)
        })
        .collect()
}
