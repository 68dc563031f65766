// A scenario from JSON, end to end, with its report files.

use ceflow::scenario::{run_scenario, OutputFormat, ScenarioConfig};

const CONFIG: &str = r#"{
    "name": "ring",
    "field": {"key": "rotation", "speed": 1.0},
    "initial": {"kind": "density", "density": {"name": "ring", "center": [0.3, 0.0], "radius": 0.5},
                "resolution": 12, "sampling": "grid"},
    "horizon": 1.0,
    "grid": 6,
    "diagnostics": {"k": [2], "alpha": 0.1},
    "seed": 1
}"#;

pub fn run_example() -> Result<bool, Box<dyn std::error::Error>> {
    let cfg = ScenarioConfig::from_json(CONFIG)?;
    let dir = tempfile::tempdir()?;
    let out = run_scenario(&cfg, Some(dir.path()), OutputFormat::Csv)?;
    let report = std::fs::read_to_string(dir.path().join("report_k2.csv"))?;
    print!("{report}");
    println!("files: {}", out.files.len());
    println!("passed: {}", out.summary.passed);
    Ok(out.summary.passed)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example().map(|_| ())
}
