// W between consecutive resolutions of the same flow.

use ceflow::scenario::{convergence_study, OutputFormat, ScenarioConfig};

const CONFIG: &str = r#"{
    "name": "osgood",
    "field": {"key": "osgood_1d"},
    "initial": {"kind": "density", "density": {"name": "uniform", "lo": [0.2], "hi": [0.8]},
                "resolution": 8, "sampling": "grid"},
    "horizon": 1.0,
    "grid": 3,
    "seed": 2
}"#;

pub fn run_example() -> Result<Option<bool>, Box<dyn std::error::Error>> {
    let cfg = ScenarioConfig::from_json(CONFIG)?;
    let table = convergence_study(&cfg, 4, None, OutputFormat::Csv)?;
    print!("{}", table.to_csv());
    Ok(table.passed)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example().map(|_| ())
}
