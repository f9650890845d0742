//! Project an object into a CAV's image and back into the world, under both
//! angular conventions.
//!
//! ```bash
//! cargo run --example projection
//! ```

use coopsim::projection::{estimate_bearing, estimate_distance, localize, AngularConvention};
use coopsim::scene::{CameraModel, Point, Pose, TrueObject};
use coopsim::sensor::{inverse_project, pixel_quantum_bound, RawDetection};

fn main() -> coopsim::Result<()> {
    let cam = CameraModel::new(64.0, 640, 60.0)?;
    let pose = Pose::new(10.0, 5.0, 60.0);
    let obj = TrueObject {
        location_id: "spot".into(),
        true_label: "cone".into(),
        physical_size: 1.2,
        position: Point::new(18.0, 21.0),
    };

    let bbox = inverse_project(&obj, &pose, &cam)?;
    println!("true position  {:?}", obj.position);
    println!(
        "image box      x {}..{} ({} px wide)",
        bbox.x_min,
        bbox.x_max,
        bbox.width()
    );
    let raw = RawDetection {
        label: "cone".into(),
        confidence: 0.9,
        bbox,
        assumed_size: obj.physical_size,
    };

    for conv in [
        AngularConvention::LeftEdge,
        AngularConvention::CenterRelative,
    ] {
        let reported = conv.reported_pose(&pose, &cam);
        let d = estimate_distance(&bbox, obj.physical_size, &cam)?;
        let theta = estimate_bearing(&bbox, &reported, &cam, conv);
        let det = localize(&raw, &reported, &cam, conv, "cav-1", 0)?;
        println!(
            "{conv:?}: reported heading {:.1}, range {d:.3}, bearing {theta:.3}, position ({:.3}, {:.3}), error {:.3}",
            reported.theta,
            det.position.x,
            det.position.y,
            det.position.distance(obj.position)
        );
    }
    println!(
        "pixel-quantum bound {:.3}",
        pixel_quantum_bound(&bbox, obj.physical_size, &cam)
    );
    Ok(())
}
