//! Full pipeline on one synthetic fixture. Pass an output directory to
//! also write the mask, overlay and report.

use std::path::PathBuf;

use corroscan::pipeline::{analyze, write_artifacts, Emit, PipelineConfig, RustReport};
use corroscan::synth::rust_fixture;

pub fn run_example(out_dir: Option<PathBuf>) -> corroscan::Result<RustReport> {
    let fx = rust_fixture(0);
    let analysis = analyze(&fx.image, &PipelineConfig::default(), &fx.name)?;
    let r = &analysis.report;
    println!(
        "{}: {:.3}% rust ({} px in {} clusters) -> {:?}, IoU vs truth {:.3}",
        r.image_id,
        r.rust_percentage,
        r.rust_pixel_count,
        r.clusters.len(),
        r.classification,
        analysis.mask.iou(&fx.truth)?
    );
    if let Some(dir) = out_dir {
        let emit = Emit { mask: true, overlay: true, report: true, premask: false };
        std::fs::create_dir_all(&dir).ok();
        write_artifacts(&analysis, &fx.image, &dir, &fx.name, emit)?;
        println!("artifacts written to {}", dir.display());
    }
    Ok(analysis.report)
}

fn main() -> corroscan::Result<()> {
    run_example(std::env::args_os().nth(1).map(PathBuf::from)).map(|_| ())
}
