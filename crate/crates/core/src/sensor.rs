//! Synthetic object detector standing in for the onboard vision model.
//!
//! Detections are produced by running the CAV-side projection backwards from
//! ground truth, then perturbing label, confidence and box edges.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, GeometryError};
use crate::scene::{
    bearing_and_distance, line_of_sight, signed_deviation, CameraModel, Cav, Pose, TrueObject,
    WorldScene,
};

/// Axis-aligned box in image pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        BoundingBox {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn x_center(&self) -> f64 {
        self.x_min + self.width() / 2.0
    }
}

/// What the detector hands to the CAV: label, confidence, box and the size
/// it believes objects of that label have.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDetection {
    pub label: String,
    pub confidence: f64,
    pub bbox: BoundingBox,
    pub assumed_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfusionEntry {
    pub label: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorNoise {
    pub label_confusion_rate: f64,
    /// Wrong labels to draw from, keyed by true label. Labels without an
    /// entry fall back to a uniform pick among the other labels in the scene.
    pub confusion_table: BTreeMap<String, Vec<ConfusionEntry>>,
    pub confidence_mean_correct: f64,
    pub confidence_mean_wrong: f64,
    pub confidence_std: f64,
    pub bbox_jitter_px: f64,
    pub miss_rate: f64,
    /// Canonical object size per label, as known to the detector.
    pub size_catalog: BTreeMap<String, f64>,
}

impl Default for SensorNoise {
    fn default() -> Self {
        SensorNoise {
            label_confusion_rate: 0.0,
            confusion_table: BTreeMap::new(),
            confidence_mean_correct: 0.85,
            confidence_mean_wrong: 0.55,
            confidence_std: 0.05,
            bbox_jitter_px: 0.0,
            miss_rate: 0.0,
            size_catalog: BTreeMap::new(),
        }
    }
}

impl SensorNoise {
    pub fn noiseless() -> Self {
        SensorNoise {
            confidence_std: 0.0,
            ..SensorNoise::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let rate = |name: &str, v: f64| {
            if (0.0..1.0).contains(&v) {
                Ok(())
            } else {
                Err(ConfigError::invalid(
                    format!("sensor.{name}"),
                    format!("{v} not in [0, 1)"),
                ))
            }
        };
        rate("label_confusion_rate", self.label_confusion_rate)?;
        rate("miss_rate", self.miss_rate)?;
        for (name, v) in [
            ("confidence_mean_correct", self.confidence_mean_correct),
            ("confidence_mean_wrong", self.confidence_mean_wrong),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::invalid(
                    format!("sensor.{name}"),
                    format!("{v} not in [0, 1]"),
                ));
            }
        }
        if !(self.confidence_std >= 0.0) || !(self.bbox_jitter_px >= 0.0) {
            return Err(ConfigError::invalid(
                "sensor",
                "standard deviations must be >= 0",
            ));
        }
        for (label, entries) in &self.confusion_table {
            if entries.iter().any(|e| !(e.weight > 0.0)) {
                return Err(ConfigError::invalid(
                    format!("sensor.confusion_table.{label}"),
                    "weights must be positive",
                ));
            }
        }
        for (label, size) in &self.size_catalog {
            if !(*size > 0.0) {
                return Err(ConfigError::invalid(
                    format!("sensor.size_catalog.{label}"),
                    "must be > 0",
                ));
            }
        }
        Ok(())
    }

    fn assumed_size(&self, label: &str, truth: &TrueObject) -> f64 {
        self.size_catalog
            .get(label)
            .copied()
            .unwrap_or(truth.physical_size)
    }
}

/// Whether `obj` is in range, strictly inside the field of view, and not
/// hidden behind an obstacle.
pub fn is_visible(scene: &WorldScene, cav: &Cav, obj: &TrueObject) -> bool {
    let (d, dev) = bearing_and_distance(&cav.pose, obj.position);
    d > 0.0
        && d <= cav.camera.d_max()
        && dev < cav.camera.fov() / 2.0
        && line_of_sight(cav.pose.position(), obj.position, &scene.obstacles)
}

/// Exact image-space box for an object seen from `pose` (whose heading is the
/// optical axis), snapped to whole pixels and clipped to the frame.
pub fn inverse_project(
    obj: &TrueObject,
    pose: &Pose,
    cam: &CameraModel,
) -> Result<BoundingBox, GeometryError> {
    let dx = obj.position.x - pose.x;
    let dy = obj.position.y - pose.y;
    let distance = dx.hypot(dy);
    let half_fov = cam.fov() / 2.0;
    if distance == 0.0 {
        return Err(GeometryError::DegenerateBox(0.0));
    }
    if distance > cam.d_max() {
        return Err(GeometryError::OutOfRange {
            distance,
            d_max: cam.d_max(),
        });
    }
    let deviation = signed_deviation(dy.atan2(dx).to_degrees(), pose.theta);
    if deviation.abs() >= half_fov {
        return Err(GeometryError::NoBox {
            deviation,
            half_fov,
        });
    }
    let width_px = ((obj.physical_size / distance).atan().to_degrees() / cam.gamma())
        .round()
        .max(1.0);
    let image_width = f64::from(cam.image_width());
    let x_center = image_width / 2.0 - deviation / cam.gamma();
    let x_min = (x_center - width_px / 2.0).round();
    Ok(clip(
        BoundingBox::new(x_min, 0.0, x_min + width_px, width_px),
        image_width,
    ))
}

fn clip(mut b: BoundingBox, image_width: f64) -> BoundingBox {
    b.x_min = b.x_min.clamp(0.0, image_width - 1.0);
    b.x_max = b.x_max.clamp(b.x_min + 1.0, image_width);
    b
}

/// Upper bound on localization error caused by whole-pixel box edges: the
/// distance change of one pixel of width plus one pixel of bearing at the
/// resulting range. Infinite for one-pixel boxes.
pub fn pixel_quantum_bound(bbox: &BoundingBox, assumed_size: f64, cam: &CameraModel) -> f64 {
    let w = bbox.width();
    if w <= 1.0 {
        return f64::INFINITY;
    }
    let dist = |w: f64| assumed_size / (cam.gamma() * w).to_radians().tan();
    let far = dist(w - 1.0);
    (far - dist(w)) + far * cam.gamma().to_radians()
}

/// One detection cycle for a single CAV.
pub fn sense<R: Rng + ?Sized>(
    scene: &WorldScene,
    cav_id: &str,
    noise: &SensorNoise,
    rng: &mut R,
) -> Result<Vec<RawDetection>, ConfigError> {
    let cav = scene
        .cav(cav_id)
        .ok_or_else(|| ConfigError::UnknownCav(cav_id.to_owned()))?;
    let jitter = Normal::new(0.0, noise.bbox_jitter_px)
        .map_err(|e| ConfigError::invalid("sensor.bbox_jitter_px", e.to_string()))?;
    let image_width = f64::from(cav.camera.image_width());
    let mut out = Vec::new();
    for obj in scene.locations.iter().filter(|o| is_visible(scene, cav, o)) {
        let Ok(exact) = inverse_project(obj, &cav.pose, &cav.camera) else {
            continue;
        };
        if rng.random::<f64>() < noise.miss_rate {
            continue;
        }
        let wrong = rng.random::<f64>() < noise.label_confusion_rate;
        let label = if wrong {
            wrong_label(scene, noise, &obj.true_label, rng)
        } else {
            obj.true_label.clone()
        };
        let mean = if label == obj.true_label {
            noise.confidence_mean_correct
        } else {
            noise.confidence_mean_wrong
        };
        let z: f64 = StandardNormal.sample(rng);
        let confidence = (mean + noise.confidence_std * z).clamp(0.0, 1.0);
        let bbox = if noise.bbox_jitter_px > 0.0 {
            let x_min = (exact.x_min + jitter.sample(rng)).round();
            let x_max = (exact.x_max + jitter.sample(rng)).round().max(x_min + 1.0);
            clip(
                BoundingBox::new(x_min, exact.y_min, x_max, exact.y_max),
                image_width,
            )
        } else {
            exact
        };
        out.push(RawDetection {
            assumed_size: noise.assumed_size(&label, obj),
            label,
            confidence,
            bbox,
        });
    }
    Ok(out)
}

fn wrong_label<R: Rng + ?Sized>(
    scene: &WorldScene,
    noise: &SensorNoise,
    true_label: &str,
    rng: &mut R,
) -> String {
    if let Some(entries) = noise
        .confusion_table
        .get(true_label)
        .filter(|e| !e.is_empty())
    {
        let total: f64 = entries.iter().map(|e| e.weight).sum();
        let mut pick = rng.random::<f64>() * total;
        for e in entries {
            if pick < e.weight {
                return e.label.clone();
            }
            pick -= e.weight;
        }
        return entries[entries.len() - 1].label.clone();
    }
    let mut others: Vec<&str> = scene
        .locations
        .iter()
        .map(|o| o.true_label.as_str())
        .filter(|l| *l != true_label)
        .collect();
    others.sort_unstable();
    others.dedup();
    if others.is_empty() {
        true_label.to_owned()
    } else {
        others[rng.random_range(0..others.len())].to_owned()
    }
}
