//! Regenerates the seeded scene fixtures under `tests/fixtures`.

use std::path::Path;

use manyscat::scene_io::schema::{ObservationSpec, SphereSpec};
use manyscat::scene_io::random_sphere_scene;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut scene = random_sphere_scene(20261016, 50, 0.01, 2.0, 1.0)?;
    scene.observation = Some(ObservationSpec::Sphere(SphereSpec {
        center: [0.0; 3],
        radius: 5.0,
        count: 100,
    }));
    std::fs::write(dir.join("random_50.json"), serde_json::to_string_pretty(&scene)? + "\n")?;
    Ok(())
}
