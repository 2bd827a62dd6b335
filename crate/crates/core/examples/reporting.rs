//! Emits a run report (manifest, CSV series, SVG figures) into a directory, reads the
//! manifest back and round-trips the series through CSV.

use halfwave::dynamics::StateSpec;
use halfwave::experiments::{emit_report, read_manifest, run_simulate, series_from_csv, series_to_csv, ExperimentConfig, Formats};

fn main() -> halfwave::Result<()> {
    let mut cfg = ExperimentConfig::new(255, 0.5);
    cfg.state = StateSpec::gaussian(30.0, 4.0, 1.0);
    cfg.time.t_end = 16.0;
    let report = run_simulate(&cfg, None)?;
    let dir = std::env::temp_dir().join("halfwave-reporting-example");
    let emitted = emit_report(std::slice::from_ref(&report), &dir, Formats::default())?;
    for f in &emitted.files {
        println!("wrote {}", f.display());
    }
    let manifest = read_manifest(&dir.join("manifest.json"))?;
    println!("manifest holds {} run(s); exit code {}", manifest.runs.len(), emitted.exit_code);
    let text = series_to_csv(&report.series)?;
    let back = series_from_csv(&text)?;
    println!("CSV round trip preserved {} series: {}", back.len(), back == report.series);
    Ok(())
}
