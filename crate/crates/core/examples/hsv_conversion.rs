//! Converts a few reference colours to HSV and back.

use corroscan::colorspace::{hsv_to_rgb, rgb_to_hsv, HsvPixel};

pub fn run_example() -> corroscan::Result<Vec<HsvPixel>> {
    let samples = [
        ("red", (1.0, 0.0, 0.0)),
        ("green", (0.0, 1.0, 0.0)),
        ("blue", (0.0, 0.0, 1.0)),
        ("rust", (0.55, 0.27, 0.13)),
        ("paint", (0.47, 0.49, 0.51)),
    ];
    let mut out = Vec::new();
    for (name, (r, g, b)) in samples {
        let p = rgb_to_hsv(r, g, b)?;
        let (r2, g2, b2) = hsv_to_rgb(p);
        println!(
            "{name:>6}: rgb=({r:.2}, {g:.2}, {b:.2}) -> h={:6.2} s={:.3} v={:.3} -> rgb=({r2:.2}, {g2:.2}, {b2:.2})",
            p.h, p.s, p.v
        );
        out.push(p);
    }
    Ok(out)
}

fn main() -> corroscan::Result<()> {
    run_example().map(|_| ())
}
