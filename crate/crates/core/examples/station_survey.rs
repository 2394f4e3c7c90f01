//! Batch run over the seven station objects, written to a scratch
//! directory first so the batch API reads real files.

use corroscan::imaging::save_rgb;
use corroscan::pipeline::{run_batch, BatchOptions, BatchSummary, PipelineConfig};
use corroscan::synth::station_objects;

pub fn run_example() -> corroscan::Result<BatchSummary> {
    let dir = std::env::temp_dir().join(format!("corroscan-survey-{}", std::process::id()));
    std::fs::create_dir_all(&dir).ok();
    let mut paths = Vec::new();
    let objects = station_objects();
    for o in &objects {
        let p = dir.join(format!("{}.png", o.fixture.name));
        save_rgb(&o.fixture.image, &p)?;
        paths.push(p);
    }
    let outcome = run_batch(&paths, &PipelineConfig::default(), &BatchOptions::default());
    std::fs::remove_dir_all(&dir).ok();
    let summary = outcome?.summary();
    for (entry, o) in summary.reports.iter().zip(&objects) {
        println!(
            "{:<22} {:7.3}%  {:?} (expected {:?})",
            entry.image_id, entry.rust_percentage, entry.classification, o.expected
        );
    }
    println!("{} rusty, {} clean", summary.rusty, summary.clean);
    Ok(summary)
}

fn main() -> corroscan::Result<()> {
    run_example().map(|_| ())
}
