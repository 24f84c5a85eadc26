//! Drives a sweep from a JSON run configuration and writes every table as CSV.

use wus_core::report::{sweep, Format, RunConfig};

fn main() -> anyhow::Result<()> {
    let cfg = RunConfig::from_json_str(
        r#"{
            "scenario": "example sweep",
            "lambdas": [0.01, 0.05, 0.1],
            "d_max": [30, 75],
            "ttis": [1.0, 0.5],
            "sim": { "cycles": 20000 }
        }"#,
    )?;
    let report = sweep(&cfg, true)?;
    print!("{}", report.tables[0].render(Format::Text));

    let dir = std::env::temp_dir().join("wus-example-sweep");
    for path in report.write_to(&dir, Format::Csv)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
