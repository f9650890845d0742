//! Scenario files: a TOML document describing the scene, sensor noise,
//! network, edge parameters and run settings.
//!
//! Parsing is strict (unknown keys are rejected); syntax and type errors carry
//! the offending line. Dotted `section.key=value` overrides are applied to the
//! document before it is deserialized.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bus::BusConfig;
use crate::error::ConfigError;
use crate::pace::PaceParams;
use crate::projection::AngularConvention;
use crate::scene::{CameraModel, Cav, Point, Pose, Segment, TrueObject, WorldScene};
use crate::sensor::SensorNoise;
use crate::sim::{Mode, RunParams, ScenarioConfig};
use crate::vote::VoteParams;

/// Bundled scenario presets, by name.
pub const PRESETS: &[(&str, &str)] = &[
    ("parking", include_str!("../presets/parking.toml")),
    ("intersection", include_str!("../presets/intersection.toml")),
];

pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| *src)
}

pub fn preset(name: &str) -> Option<ScenarioConfig> {
    preset_source(name).map(|src| parse_scenario(src, &[]).expect("bundled presets are valid"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSpec {
    pub fov: f64,
    pub image_width: u32,
    pub d_max: f64,
}

impl Default for CameraSpec {
    fn default() -> Self {
        CameraSpec {
            fov: 64.0,
            image_width: 640,
            d_max: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocationSpec {
    pub id: String,
    pub label: String,
    pub size: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavSpec {
    pub id: String,
    pub x: f64,
    pub y: f64,
    /// Optical-axis heading in degrees.
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub camera: Option<CameraSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    pub from: [f64; 2],
    pub to: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub grid: GridSpec,
    #[serde(default)]
    pub camera: CameraSpec,
    pub locations: Vec<LocationSpec>,
    pub cavs: Vec<CavSpec>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec>,
}

/// On-disk schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub scene: SceneSpec,
    #[serde(default)]
    pub sensor: SensorNoise,
    #[serde(default)]
    pub bus: BusConfig,
    #[serde(default)]
    pub pace: PaceParams,
    #[serde(default)]
    pub vote: VoteParams,
    pub run: RunParams,
}

/// A scenario that failed to load.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ScenarioError {}

impl From<ConfigError> for ScenarioError {
    fn from(e: ConfigError) -> Self {
        ScenarioError {
            line: None,
            message: e.to_string(),
        }
    }
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

fn toml_error(src: &str, e: toml::de::Error) -> ScenarioError {
    ScenarioError {
        line: e.span().map(|s| line_of(src, s.start)),
        message: e.message().trim().to_owned(),
    }
}

/// Parses and validates a scenario document, applying `overrides` first.
pub fn parse_scenario(src: &str, overrides: &[Override]) -> Result<ScenarioConfig, ScenarioError> {
    let file = parse_file(src, overrides)?;
    Ok(file.into_config()?)
}

pub fn parse_file(src: &str, overrides: &[Override]) -> Result<ScenarioFile, ScenarioError> {
    if overrides.is_empty() {
        return toml::from_str(src).map_err(|e| toml_error(src, e));
    }
    let mut doc: toml::Table = toml::from_str(src).map_err(|e| toml_error(src, e))?;
    for o in overrides {
        o.apply(&mut doc)?;
    }
    let rendered = toml::to_string(&doc).map_err(|e| ScenarioError {
        line: None,
        message: e.to_string(),
    })?;
    toml::from_str(&rendered).map_err(|e| ScenarioError {
        line: None,
        message: format!("after overrides: {}", e.message().trim()),
    })
}

/// A `dotted.path=value` replacement. Array elements are addressed by index.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: Vec<String>,
    pub value: toml::Value,
}

impl std::str::FromStr for Override {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| ScenarioError {
            line: None,
            message: format!("override `{s}`: {m}"),
        };
        let (path, raw) = s
            .split_once('=')
            .ok_or_else(|| bad("expected path=value"))?;
        let path: Vec<String> = path.trim().split('.').map(str::to_owned).collect();
        if path.iter().any(String::is_empty) {
            return Err(bad("empty path segment"));
        }
        let raw = raw.trim();
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_owned()));
        Ok(Override { path, value })
    }
}

impl Override {
    pub fn apply(&self, doc: &mut toml::Table) -> Result<(), ScenarioError> {
        let dotted = self.path.join(".");
        let err = |m: String| ScenarioError {
            line: None,
            message: format!("override `{dotted}`: {m}"),
        };
        let (last, parents) = self.path.split_last().expect("non-empty path");
        let mut cursor: &mut toml::Value = doc
            .entry(parents.first().unwrap_or(last).clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        if parents.is_empty() {
            *cursor = self.value.clone();
            return Ok(());
        }
        for seg in parents[1..].iter().chain(std::iter::once(last)) {
            cursor = match cursor {
                toml::Value::Table(t) => t
                    .entry(seg.clone())
                    .or_insert_with(|| toml::Value::Table(toml::Table::new())),
                toml::Value::Array(a) => {
                    let i: usize = seg
                        .parse()
                        .map_err(|_| err(format!("`{seg}` is not an array index")))?;
                    let len = a.len();
                    a.get_mut(i)
                        .ok_or_else(|| err(format!("index {i} out of bounds ({len})")))?
                }
                _ => return Err(err(format!("`{seg}` is not inside a table or array"))),
            };
        }
        *cursor = self.value.clone();
        Ok(())
    }
}

fn camera(spec: &CameraSpec, path: &str) -> Result<CameraModel, ConfigError> {
    CameraModel::new(spec.fov, spec.image_width, spec.d_max).map_err(|e| match e {
        ConfigError::Invalid { path: p, message } => {
            ConfigError::invalid(format!("{path}.{p}"), message)
        }
        other => other,
    })
}

impl ScenarioFile {
    pub fn into_config(self) -> Result<ScenarioConfig, ConfigError> {
        let s = &self.scene;
        let default_cam = camera(&s.camera, "scene")?;
        let locations = s
            .locations
            .iter()
            .map(|l| TrueObject {
                location_id: l.id.clone(),
                true_label: l.label.clone(),
                physical_size: l.size,
                position: Point::new(l.x, l.y),
            })
            .collect();
        let cavs = s
            .cavs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let camera = match &c.camera {
                    Some(spec) => self::camera(spec, &format!("scene.cavs[{i}]"))?,
                    None => default_cam,
                };
                Ok(Cav {
                    id: c.id.clone(),
                    pose: Pose::new(c.x, c.y, c.theta),
                    camera,
                })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        let obstacles = s
            .obstacles
            .iter()
            .map(|o| {
                Segment::new(
                    Point::new(o.from[0], o.from[1]),
                    Point::new(o.to[0], o.to[1]),
                )
            })
            .collect();
        let scene = WorldScene::new(s.grid.width, s.grid.height, locations, cavs, obstacles)?;
        let cfg = ScenarioConfig {
            name: self.name,
            scene,
            noise: self.sensor,
            bus: self.bus,
            pace: self.pace,
            vote: self.vote,
            run: self.run,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ScenarioConfig {
    /// Canonical on-disk form of this configuration.
    pub fn to_file(&self) -> ScenarioFile {
        // the most common camera becomes the scene default
        let mut counts: BTreeMap<String, (usize, CameraSpec)> = BTreeMap::new();
        let spec_of = |c: &CameraModel| CameraSpec {
            fov: c.fov(),
            image_width: c.image_width(),
            d_max: c.d_max(),
        };
        for cav in &self.scene.cavs {
            let spec = spec_of(&cav.camera);
            counts.entry(format!("{spec:?}")).or_insert((0, spec)).0 += 1;
        }
        let default_cam = counts
            .values()
            .max_by_key(|(n, _)| *n)
            .map(|(_, s)| *s)
            .unwrap_or_default();
        ScenarioFile {
            name: self.name.clone(),
            scene: SceneSpec {
                grid: GridSpec {
                    width: self.scene.grid_width,
                    height: self.scene.grid_height,
                },
                camera: default_cam,
                locations: self
                    .scene
                    .locations
                    .iter()
                    .map(|o| LocationSpec {
                        id: o.location_id.clone(),
                        label: o.true_label.clone(),
                        size: o.physical_size,
                        x: o.position.x,
                        y: o.position.y,
                    })
                    .collect(),
                cavs: self
                    .scene
                    .cavs
                    .iter()
                    .map(|c| {
                        let spec = spec_of(&c.camera);
                        CavSpec {
                            id: c.id.clone(),
                            x: c.pose.x,
                            y: c.pose.y,
                            theta: c.pose.theta,
                            camera: (spec != default_cam).then_some(spec),
                        }
                    })
                    .collect(),
                obstacles: self
                    .scene
                    .obstacles
                    .iter()
                    .map(|o| ObstacleSpec {
                        from: [o.a.x, o.a.y],
                        to: [o.b.x, o.b.y],
                    })
                    .collect(),
            },
            sensor: self.noise.clone(),
            bus: self.bus.clone(),
            pace: self.pace.clone(),
            vote: self.vote.clone(),
            run: self.run.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("scenario serializes")
    }
}

/// Default values used by the `run` section when keys are omitted.
impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            mode: Mode::Pace,
            cycles: 1000,
            verdicts_target: 200,
            seed: 0,
            tick_ms: 30,
            angular_convention: AngularConvention::LeftEdge,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for (name, _) in PRESETS {
            let cfg = preset(name).unwrap();
            assert_eq!(cfg.name, *name);
        }
    }

    #[test]
    fn canonical_round_trip_is_identity() {
        for (name, _) in PRESETS {
            let cfg = preset(name).unwrap();
            let again = parse_scenario(&cfg.to_toml(), &[]).unwrap();
            assert_eq!(again, cfg);
        }
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let src = preset_source("parking")
            .unwrap()
            .replace("[bus]", "[bus]\nbogus_key = 3");
        let err = parse_scenario(&src, &[]).unwrap_err();
        assert!(err.message.contains("bogus_key"), "{err}");
        let line = src
            .lines()
            .position(|l| l.starts_with("bogus_key"))
            .unwrap()
            + 1;
        assert_eq!(err.line, Some(line));
    }

    #[test]
    fn semantic_error_names_field() {
        let src = preset_source("parking")
            .unwrap()
            .replace("delta = 2.5", "delta = -1.0");
        let err = parse_scenario(&src, &[]).unwrap_err();
        assert!(err.message.contains("pace.delta"), "{err}");
    }

    #[test]
    fn overrides_apply() {
        let src = preset_source("parking").unwrap();
        let ov: Vec<Override> = [
            "run.seed=7",
            "vote.visibility_mode=corrected",
            "scene.cavs.0.x=18.5",
        ]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
        let cfg = parse_scenario(src, &ov).unwrap();
        assert_eq!(cfg.run.seed, 7);
        assert_eq!(
            cfg.vote.visibility_mode,
            crate::vote::VisibilityMode::Corrected
        );
        assert_eq!(cfg.scene.cavs[0].pose.x, 18.5);
        let bad: Override = "run.nonsense=1".parse().unwrap();
        assert!(parse_scenario(src, &[bad]).is_err());
        let bad: Override = "scene.cavs.99.x=1".parse().unwrap();
        assert!(parse_scenario(src, &[bad]).is_err());
        assert!("no-equals".parse::<Override>().is_err());
    }
}
