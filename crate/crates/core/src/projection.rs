//! Detection-to-world geometry run on each CAV: bounding box width gives
//! distance, box center gives bearing, and the two place the object in the
//! global frame.

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::scene::{normalize_deg, CameraModel, Point, Pose};
use crate::sensor::{BoundingBox, RawDetection};

/// How the reported heading relates to the image columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngularConvention {
    /// `theta_obj = theta_v - gamma * x_center`, where `theta_v` is the
    /// bearing of the leftmost pixel ray.
    #[default]
    LeftEdge,
    /// `theta_obj = theta_v - gamma * (x_center - width / 2)`, where
    /// `theta_v` is the optical-axis bearing.
    CenterRelative,
}

impl AngularConvention {
    /// The heading a CAV reports under this convention, given the bearing of
    /// its optical axis.
    pub fn reported_heading(self, optical_axis: f64, cam: &CameraModel) -> f64 {
        match self {
            AngularConvention::LeftEdge => normalize_deg(optical_axis + cam.fov() / 2.0),
            AngularConvention::CenterRelative => normalize_deg(optical_axis),
        }
    }

    /// `physical` with its heading replaced by [`Self::reported_heading`].
    pub fn reported_pose(self, physical: &Pose, cam: &CameraModel) -> Pose {
        physical.with_heading(self.reported_heading(physical.theta, cam))
    }
}

/// A detection placed in world coordinates by the CAV that saw it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizedDetection {
    pub label: String,
    pub confidence: f64,
    pub position: Point,
    pub source_cav: String,
    pub cycle: u64,
}

/// `s / tan(gamma * w)` with `w` the box width in pixels.
pub fn estimate_distance(
    bbox: &BoundingBox,
    assumed_size: f64,
    cam: &CameraModel,
) -> Result<f64, GeometryError> {
    let width = bbox.width();
    if !(width >= 1.0) {
        return Err(GeometryError::DegenerateBox(width));
    }
    let alpha = cam.gamma() * width;
    if alpha >= 90.0 {
        return Err(GeometryError::OutOfModel(alpha));
    }
    Ok(assumed_size / alpha.to_radians().tan())
}

/// Signed offset in degrees of the box center from the reference ray of the
/// convention (positive means to the right of it in the image).
pub fn column_offset(x_center: f64, cam: &CameraModel, convention: AngularConvention) -> f64 {
    match convention {
        AngularConvention::LeftEdge => cam.gamma() * x_center,
        AngularConvention::CenterRelative => {
            cam.gamma() * (x_center - f64::from(cam.image_width()) / 2.0)
        }
    }
}

/// Global bearing of the box center, in `[0, 360)`.
pub fn estimate_bearing(
    bbox: &BoundingBox,
    pose: &Pose,
    cam: &CameraModel,
    convention: AngularConvention,
) -> f64 {
    normalize_deg(pose.theta - column_offset(bbox.x_center(), cam, convention))
}

pub fn to_global(pose: &Pose, distance: f64, theta_deg: f64) -> Point {
    let t = theta_deg.to_radians();
    Point::new(pose.x + distance * t.cos(), pose.y + distance * t.sin())
}

/// Full CAV-side pipeline for one raw detection. `pose` carries the heading
/// as reported under `convention`.
pub fn localize(
    raw: &RawDetection,
    pose: &Pose,
    cam: &CameraModel,
    convention: AngularConvention,
    source_cav: &str,
    cycle: u64,
) -> Result<LocalizedDetection, GeometryError> {
    let distance = estimate_distance(&raw.bbox, raw.assumed_size, cam)?;
    let bearing = estimate_bearing(&raw.bbox, pose, cam, convention);
    Ok(LocalizedDetection {
        label: raw.label.clone(),
        confidence: raw.confidence,
        position: to_global(pose, distance, bearing),
        source_cav: source_cav.to_owned(),
        cycle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cam(gamma: f64) -> CameraModel {
        CameraModel::new(gamma * 640.0, 640, 100.0).unwrap()
    }

    fn bbox(x_min: f64, width: f64) -> BoundingBox {
        BoundingBox::new(x_min, 200.0, x_min + width, 260.0)
    }

    #[test]
    fn distance_worked_values() {
        // 0.5 / tan(5 deg), evaluated to 40 digits: 5.71502615138067...
        let d = estimate_distance(&bbox(100.0, 50.0), 0.5, &cam(0.1)).unwrap();
        assert!((d - 5.715_026_151_380_672).abs() < 1e-9);
        assert!((d - 5.71503).abs() < 1e-5);
        let d = estimate_distance(
            &bbox(0.0, 45.0),
            1.0,
            &CameraModel::new(179.0, 179, 10.0).unwrap(),
        )
        .unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distance_errors() {
        let zero = BoundingBox {
            x_min: 10.0,
            y_min: 0.0,
            x_max: 10.0,
            y_max: 1.0,
        };
        assert!(matches!(
            estimate_distance(&zero, 1.0, &cam(0.1)),
            Err(GeometryError::DegenerateBox(_))
        ));
        let wide = CameraModel::new(179.0, 179, 10.0).unwrap();
        assert!(matches!(
            estimate_distance(&bbox(0.0, 90.0), 1.0, &wide),
            Err(GeometryError::OutOfModel(_))
        ));
    }

    #[test]
    fn bearing_conventions() {
        let c = cam(0.1);
        let pose = Pose::new(0.0, 0.0, 90.0);
        let left = BoundingBox::new(-10.0, 0.0, 10.0, 1.0);
        assert_eq!(
            estimate_bearing(&left, &pose, &c, AngularConvention::LeftEdge),
            90.0
        );
        let mid = BoundingBox::new(310.0, 0.0, 330.0, 1.0);
        assert_eq!(
            estimate_bearing(&mid, &pose, &c, AngularConvention::CenterRelative),
            90.0
        );
        let b = BoundingBox::new(100.0, 0.0, 150.0, 1.0);
        let theta = estimate_bearing(&b, &pose, &c, AngularConvention::LeftEdge);
        assert!((theta - 77.5).abs() < 1e-12);
    }

    #[test]
    fn global_placement() {
        let p = to_global(&Pose::new(0.0, 0.0, 0.0), 2.0, 90.0);
        assert!(p.x.abs() < 1e-12 && (p.y - 2.0).abs() < 1e-12);
        // 40-digit reference: (2.2369588868446761, 6.5795609695706328)
        let p = to_global(&Pose::new(1.0, 1.0, 0.0), 5.71503, 77.5);
        assert!((p.x - 2.236_958_886_844_676).abs() < 1e-9);
        assert!((p.y - 6.579_560_969_570_633).abs() < 1e-9);
        let p = to_global(&Pose::new(3.0, 4.0, 10.0), 0.0, 33.0);
        assert_eq!(p, Point::new(3.0, 4.0));
    }

    #[test]
    fn localize_composes_steps() {
        let c = cam(0.1);
        let raw = RawDetection {
            label: "cup".into(),
            confidence: 0.7,
            bbox: bbox(100.0, 50.0),
            assumed_size: 0.5,
        };
        let pose = Pose::new(1.0, 1.0, 90.0);
        let det = localize(&raw, &pose, &c, AngularConvention::LeftEdge, "cav-1", 3).unwrap();
        assert_eq!(det.label, "cup");
        assert_eq!(det.confidence, 0.7);
        assert_eq!(det.cycle, 3);
        let expect = to_global(&pose, 0.5 / 5f64.to_radians().tan(), 77.5);
        assert!(det.position.distance(expect) < 1e-12);
    }

    #[test]
    fn conventions_agree_on_physical_axis() {
        let c = cam(0.1);
        let physical = Pose::new(5.0, 5.0, 30.0);
        let b = bbox(400.0, 30.0);
        let a = estimate_bearing(
            &b,
            &AngularConvention::LeftEdge.reported_pose(&physical, &c),
            &c,
            AngularConvention::LeftEdge,
        );
        let r = estimate_bearing(
            &b,
            &AngularConvention::CenterRelative.reported_pose(&physical, &c),
            &c,
            AngularConvention::CenterRelative,
        );
        assert!((a - r).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn distance_is_isometric(x in -20.0..20.0f64, y in -20.0..20.0f64, d in 0.0..100.0f64, t in 0.0..360.0f64) {
            let pose = Pose::new(x, y, 0.0);
            let p = to_global(&pose, d, t);
            prop_assert!((p.distance(pose.position()) - d).abs() <= 1e-9 * d.max(1.0));
        }

        #[test]
        fn distance_decreasing_in_width(w in 1u32..800, s in 0.1..10.0f64) {
            let c = cam(0.1);
            let near = estimate_distance(&bbox(0.0, f64::from(w)), s, &c).unwrap();
            let far = estimate_distance(&bbox(0.0, f64::from(w + 1)), s, &c).unwrap();
            prop_assert!(far < near);
        }

        #[test]
        fn center_relative_mirror_symmetry(x_min in 0u32..600, w in 1u32..40) {
            let c = cam(0.1);
            let x_min = f64::from(x_min);
            let w = f64::from(w).min(640.0 - x_min);
            let b = bbox(x_min, w);
            let mirrored = BoundingBox::new(640.0 - b.x_max, b.y_min, 640.0 - b.x_min, b.y_max);
            let o1 = column_offset(b.x_center(), &c, AngularConvention::CenterRelative);
            let o2 = column_offset(mirrored.x_center(), &c, AngularConvention::CenterRelative);
            prop_assert_eq!(o1, -o2);
        }
    }
}
