//! Noisy detection on the intersection preset: which CAV sees what, and how
//! often labels come out wrong.
//!
//! ```bash
//! cargo run --example sensing
//! ```

use std::collections::BTreeMap;

use coopsim::scenario::preset;
use coopsim::sensor::{is_visible, sense};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> coopsim::Result<()> {
    let config = preset("intersection").expect("bundled preset");
    let scene = &config.scene;
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    for cav in &scene.cavs {
        let visible: Vec<&str> = scene
            .locations
            .iter()
            .filter(|o| is_visible(scene, cav, o))
            .map(|o| o.true_label.as_str())
            .collect();
        let mut labels: BTreeMap<String, u32> = BTreeMap::new();
        let cycles = 1000;
        for _ in 0..cycles {
            for det in sense(scene, &cav.id, &config.noise, &mut rng)? {
                *labels.entry(det.label).or_default() += 1;
            }
        }
        println!(
            "{:<10} sees {visible:?}; labels over {cycles} cycles: {labels:?}",
            cav.id
        );
    }
    Ok(())
}
