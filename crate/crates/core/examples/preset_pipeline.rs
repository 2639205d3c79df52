//! The CLI pipeline driven from code: load a preset, verify it and export the
//! figure data into a temporary directory.

use std::path::Path;

use dirac_darboux::app::{build_model, cmd_build, cmd_verify, ModelConfig};

fn main() {
    let preset = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets/fig1.json");
    let built = build_model(&ModelConfig::load(&preset).unwrap()).unwrap();
    let report = cmd_verify(&built).unwrap();
    print!("{}", report.to_text());

    let out = std::env::temp_dir().join(format!("dirac-darboux-example-{}", std::process::id()));
    for path in cmd_build(&built, &out).unwrap() {
        println!("wrote {}", path.display());
    }
    std::fs::remove_dir_all(&out).unwrap();
}
