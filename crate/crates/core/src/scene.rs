//! Ground truth for a run: grid bounds, known object locations, CAV poses and
//! cameras, and the occluding segments that block line of sight.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// A point in world units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Normalizes an angle in degrees into `[0, 360)`.
pub fn normalize_deg(angle: f64) -> f64 {
    let a = angle.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if a >= 360.0 {
        0.0
    } else {
        a
    }
}

/// Position and global heading of a vehicle. Heading is in degrees,
/// counter-clockwise from +x, always kept in `[0, 360)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose {
            x,
            y,
            theta: normalize_deg(theta),
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn with_heading(&self, theta: f64) -> Self {
        Pose::new(self.x, self.y, theta)
    }
}

/// Pinhole-style camera used by the distance and bearing estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CameraModel {
    fov: f64,
    image_width: u32,
    gamma: f64,
    d_max: f64,
}

impl CameraModel {
    pub fn new(fov: f64, image_width: u32, d_max: f64) -> Result<Self, ConfigError> {
        if !(fov > 0.0 && fov < 180.0) {
            return Err(ConfigError::invalid(
                "camera.fov",
                format!("{fov} not in (0, 180)"),
            ));
        }
        if image_width == 0 {
            return Err(ConfigError::invalid(
                "camera.image_width",
                "must be positive",
            ));
        }
        if !(d_max > 0.0 && d_max.is_finite()) {
            return Err(ConfigError::invalid(
                "camera.d_max",
                format!("{d_max} must be > 0"),
            ));
        }
        Ok(CameraModel {
            fov,
            image_width,
            gamma: fov / f64::from(image_width),
            d_max,
        })
    }

    /// Field of view in degrees.
    pub fn fov(&self) -> f64 {
        self.fov
    }

    pub fn image_width(&self) -> u32 {
        self.image_width
    }

    /// Degrees per pixel.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }
}

/// A real object sitting at a known location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueObject {
    pub location_id: String,
    pub true_label: String,
    pub physical_size: f64,
    pub position: Point,
}

/// Occluder modeled as a closed line segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }
}

/// A location the edge knows about, without its ground-truth label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownLocation {
    pub id: String,
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cav {
    pub id: String,
    /// Physical pose; `theta` is the optical-axis bearing of the camera.
    pub pose: Pose,
    pub camera: CameraModel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorldScene {
    pub grid_width: f64,
    pub grid_height: f64,
    pub locations: Vec<TrueObject>,
    pub cavs: Vec<Cav>,
    pub obstacles: Vec<Segment>,
}

impl WorldScene {
    /// Builds a scene, checking bounds and id uniqueness.
    pub fn new(
        grid_width: f64,
        grid_height: f64,
        locations: Vec<TrueObject>,
        cavs: Vec<Cav>,
        obstacles: Vec<Segment>,
    ) -> Result<Self, ConfigError> {
        let scene = WorldScene {
            grid_width,
            grid_height,
            locations,
            cavs,
            obstacles,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.grid_width > 0.0 && self.grid_height > 0.0) {
            return Err(ConfigError::invalid(
                "scene.grid",
                "dimensions must be positive",
            ));
        }
        let inside = |p: Point| {
            (0.0..=self.grid_width).contains(&p.x) && (0.0..=self.grid_height).contains(&p.y)
        };
        for (i, obj) in self.locations.iter().enumerate() {
            let path = format!("scene.locations[{i}]");
            if !(obj.physical_size > 0.0) {
                return Err(ConfigError::invalid(
                    format!("{path}.physical_size"),
                    "must be > 0",
                ));
            }
            if !inside(obj.position) {
                return Err(ConfigError::invalid(
                    format!("{path}.position"),
                    "outside grid",
                ));
            }
            if self.locations[..i]
                .iter()
                .any(|o| o.location_id == obj.location_id)
            {
                return Err(ConfigError::invalid(
                    format!("{path}.id"),
                    format!("duplicate location id `{}`", obj.location_id),
                ));
            }
        }
        for (i, cav) in self.cavs.iter().enumerate() {
            let path = format!("scene.cavs[{i}]");
            if !inside(cav.pose.position()) {
                return Err(ConfigError::invalid(format!("{path}.pose"), "outside grid"));
            }
            if self.cavs[..i].iter().any(|c| c.id == cav.id) {
                return Err(ConfigError::invalid(
                    format!("{path}.id"),
                    format!("duplicate cav id `{}`", cav.id),
                ));
            }
        }
        for (i, seg) in self.obstacles.iter().enumerate() {
            if !inside(seg.a) || !inside(seg.b) {
                return Err(ConfigError::invalid(
                    format!("scene.obstacles[{i}]"),
                    "outside grid",
                ));
            }
        }
        Ok(())
    }

    pub fn cav(&self, id: &str) -> Option<&Cav> {
        self.cavs.iter().find(|c| c.id == id)
    }

    pub fn known_locations(&self) -> Vec<KnownLocation> {
        self.locations
            .iter()
            .map(|o| KnownLocation {
                id: o.location_id.clone(),
                position: o.position,
            })
            .collect()
    }

    pub fn location(&self, id: &str) -> Option<&TrueObject> {
        self.locations.iter().find(|o| o.location_id == id)
    }
}

/// Distance from `from` to `to` and the absolute deviation of the bearing
/// from the pose heading, folded into `[0, 180]` degrees.
pub fn bearing_and_distance(from: &Pose, to: Point) -> (f64, f64) {
    let dx = to.x - from.x;
    let dy = to.y - from.y;
    let distance = dx.hypot(dy);
    if distance == 0.0 {
        return (0.0, 0.0);
    }
    let bearing = dy.atan2(dx).to_degrees();
    (distance, fold_deviation(bearing - from.theta))
}

/// Signed deviation of `bearing` from `heading`, in `(-180, 180]`.
pub fn signed_deviation(bearing: f64, heading: f64) -> f64 {
    let d = normalize_deg(bearing - heading);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

fn fold_deviation(diff: f64) -> f64 {
    signed_deviation(diff, 0.0).abs()
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test; touching endpoints count as intersecting.
pub fn segments_intersect(s: &Segment, t: &Segment) -> bool {
    let d1 = orient(t.a, t.b, s.a);
    let d2 = orient(t.a, t.b, s.b);
    let d3 = orient(s.a, s.b, t.a);
    let d4 = orient(s.a, s.b, t.b);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(t.a, t.b, s.a))
        || (d2 == 0.0 && on_segment(t.a, t.b, s.b))
        || (d3 == 0.0 && on_segment(s.a, s.b, t.a))
        || (d4 == 0.0 && on_segment(s.a, s.b, t.b))
}

/// True iff the segment between the two points crosses no obstacle.
pub fn line_of_sight(from: Point, to: Point, obstacles: &[Segment]) -> bool {
    let ray = Segment::new(from, to);
    !obstacles.iter().any(|o| segments_intersect(&ray, o))
}
