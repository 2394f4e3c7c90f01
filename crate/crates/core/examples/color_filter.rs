//! Applies the default rust ranges to a fixture and compares the three
//! fusion modes against the ground truth.

use corroscan::colorfilter::{apply_ranges, default_rust_ranges, FilterConfig, Fusion};
use corroscan::colorspace::rgb_image_to_hsv;
use corroscan::pipeline::{premask, threshold_stage, SsrConfig};
use corroscan::synth::rust_fixture;

pub fn run_example() -> corroscan::Result<Vec<(Fusion, f64)>> {
    let fx = rust_fixture(9);
    let hsv = rgb_image_to_hsv(&fx.image);
    let colour = apply_ranges(&hsv, &default_rust_ranges());
    println!("colour-only candidates: {} (truth {})", colour.count(), fx.truth.count());

    let stage = threshold_stage(&hsv, SsrConfig::default().resolve(hsv.width(), hsv.height()))?;
    let mut out = Vec::new();
    for fusion in [Fusion::ColorOnly, Fusion::AndWithThreshold, Fusion::OrWithThreshold] {
        let filter = FilterConfig { ranges: default_rust_ranges(), fusion };
        let mask = premask(&hsv, &stage.threshold.mask, &filter)?;
        let iou = mask.iou(&fx.truth)?;
        println!("{fusion:?}: {} pixels, IoU {iou:.3}", mask.count());
        out.push((fusion, iou));
    }
    Ok(out)
}

fn main() -> corroscan::Result<()> {
    run_example().map(|_| ())
}
