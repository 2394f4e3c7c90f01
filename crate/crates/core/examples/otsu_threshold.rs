//! Two-pass threshold on a bimodal plane, then on a plane with a spread-out
//! dark ramp and two close bright levels. There the bright class is the
//! tighter one, so the refinement pass splits it.

use corroscan::imaging::FloatPlane;
use corroscan::threshold::{build_histogram, iterated_threshold, otsu_threshold, IteratedThreshold};

fn report(label: &str, plane: &FloatPlane) -> corroscan::Result<IteratedThreshold> {
    let hist = build_histogram(plane)?;
    let first = otsu_threshold(&hist)?;
    let it = iterated_threshold(plane)?;
    println!(
        "{label}: T1={} (sigma_b2={:.2}), refine {:?} -> T={:?}, {} of {} pixels kept",
        first.t_star,
        first.sigma_b2,
        it.refined_class,
        it.final_threshold,
        it.mask.count(),
        plane.width() * plane.height()
    );
    Ok(it)
}

pub fn run_example() -> corroscan::Result<Vec<IteratedThreshold>> {
    let bimodal = FloatPlane::from_fn(64, 64, |x, _| if x < 48 { 0.2 } else { 0.8 })?;
    let trimodal = FloatPlane::from_fn(64, 64, |x, _| match x {
        0..=39 => 0.3 * x as f64 / 40.0,
        40..=55 => 0.75,
        _ => 0.9,
    })?;
    Ok(vec![report("bimodal", &bimodal)?, report("trimodal", &trimodal)?])
}

fn main() -> corroscan::Result<()> {
    run_example().map(|_| ())
}
