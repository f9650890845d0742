//! Build a scenario from TOML, tweak it with dotted overrides, run it and
//! write the same files the CLI would.
//!
//! ```bash
//! cargo run --example custom_scenario
//! ```

use coopsim::cli::write_run;
use coopsim::scenario::{parse_scenario, Override};
use coopsim::sim::run;

const SCENARIO: &str = r#"
name = "crosswalk"

[scene]
grid = { width = 30.0, height = 30.0 }

[[scene.locations]]
id = "left"
label = "pedestrian"
size = 0.6
x = 12.0
y = 15.0

[[scene.locations]]
id = "right"
label = "cyclist"
size = 1.1
x = 18.0
y = 15.0

[[scene.cavs]]
id = "south"
x = 15.0
y = 2.0
theta = 90.0

[[scene.cavs]]
id = "north"
x = 15.0
y = 28.0
theta = 270.0

[[scene.obstacles]]
from = [16.0, 9.0]
to = [20.0, 9.0]

[sensor]
label_confusion_rate = 0.2

[run]
mode = "vote"
cycles = 400
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let overrides: Vec<Override> = [
        "run.seed=4",
        "bus.latency_mean_ms=20",
        "scene.cavs.1.x=13.5",
    ]
    .iter()
    .map(|s| s.parse())
    .collect::<Result<_, _>>()?;
    let config = parse_scenario(SCENARIO, &overrides)?;
    let metrics = run(&config)?;
    println!(
        "{}: accuracy {:.3}",
        metrics.summary.run_id,
        metrics.accuracy()
    );

    let out = std::env::temp_dir().join("coopsim-example");
    for path in write_run(&metrics, &out)? {
        println!("wrote {}", path.display());
    }
    print!("{}", config.to_toml());
    Ok(())
}
