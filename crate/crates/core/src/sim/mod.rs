//! Orchestration on the simulated clock: sensing, CAV publishing, edge
//! rounds, baselines, and the experiment harnesses built on top.

mod engine;
mod metrics;
mod probe;
mod sweep;

use serde::{Deserialize, Serialize};

pub use engine::{run, run_baseline};
pub use metrics::{MetricsRecord, RunMetrics, RunSummary};
pub use probe::{complexity_probe, linear_fit, LinearFit, ProbeRow};
pub use sweep::{sweep, SweepAxis};

use crate::bus::BusConfig;
use crate::error::ConfigError;
use crate::pace::PaceParams;
use crate::projection::AngularConvention;
use crate::scene::WorldScene;
use crate::sensor::SensorNoise;
use crate::vote::VoteParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Pace,
    Vote,
    BaselinePace,
    BaselineVote,
}

impl Mode {
    pub fn is_baseline(self) -> bool {
        matches!(self, Mode::BaselinePace | Mode::BaselineVote)
    }

    pub fn is_vote(self) -> bool {
        matches!(self, Mode::Vote | Mode::BaselineVote)
    }

    pub fn baseline(self) -> Mode {
        if self.is_vote() {
            Mode::BaselineVote
        } else {
            Mode::BaselinePace
        }
    }

    pub fn collaborative(self) -> Mode {
        if self.is_vote() {
            Mode::Vote
        } else {
            Mode::Pace
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Pace => "pace",
            Mode::Vote => "vote",
            Mode::BaselinePace => "baseline-pace",
            Mode::BaselineVote => "baseline-vote",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunParams {
    pub mode: Mode,
    /// Sensing cycles to simulate at most.
    pub cycles: u64,
    /// Stop once this many verdict rounds have been recorded; 0 runs all cycles.
    pub verdicts_target: u64,
    pub seed: u64,
    /// Sensing period in simulated milliseconds.
    pub tick_ms: u64,
    pub angular_convention: AngularConvention,
}

/// Everything a run needs. Built from a scenario file or assembled in code.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub scene: WorldScene,
    pub noise: SensorNoise,
    pub bus: BusConfig,
    pub pace: PaceParams,
    pub vote: VoteParams,
    pub run: RunParams,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.scene.validate()?;
        self.noise.validate()?;
        self.bus.validate()?;
        self.pace.validate()?;
        self.vote.validate()?;
        if self.run.cycles == 0 {
            return Err(ConfigError::invalid("run.cycles", "must be > 0"));
        }
        if self.run.tick_ms == 0 {
            return Err(ConfigError::invalid("run.tick_ms", "must be > 0"));
        }
        Ok(())
    }

    /// Publish and round interval for the configured mode.
    pub fn tau_ms(&self) -> u64 {
        if self.run.mode.is_vote() {
            self.vote.tau_ms
        } else {
            self.pace.tau_ms
        }
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        let mut c = self.clone();
        c.run.mode = mode;
        c
    }
}
