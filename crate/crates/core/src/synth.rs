//! Seeded synthetic scenes: painted panels with rust-hued blobs and the
//! ground-truth mask of the blobs.
//!
//! Pixel values are quantized to multiples of 1/255 so a scene survives a
//! PNG round trip unchanged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::colorspace::{hsv_to_rgb, HsvPixel};
use crate::imaging::{BinaryMask, RgbImage};
use crate::pipeline::Classification;

pub const FIXTURE_SIZE: usize = 512;

/// Neutral gray paint, as RGB.
pub const GRAY_PAINT: [f64; 3] = [0.47, 0.49, 0.51];

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub center: (f64, f64),
    /// Semi-axes in pixels.
    pub axes: (f64, f64),
    pub angle: f64,
    pub hsv: HsvPixel,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub image: RgbImage,
    pub truth: BinaryMask,
    pub patches: Vec<Patch>,
}

impl Fixture {
    pub fn rust_fraction(&self) -> f64 {
        self.truth.count() as f64 / (self.truth.width() * self.truth.height()) as f64
    }
}

fn quantize(c: f64) -> f64 {
    (c.clamp(0.0, 1.0) * 255.0).round() / 255.0
}

/// Painted background with independent uniform noise of `±noise` per channel.
#[derive(Debug, Clone, Copy)]
pub struct Paint {
    pub rgb: [f64; 3],
    pub noise: f64,
    /// Multiplicative brightness ramp from left (`1 - shading`) to right (1).
    pub shading: f64,
}

impl Paint {
    pub fn gray() -> Self {
        Self {
            rgb: GRAY_PAINT,
            noise: 0.03,
            shading: 0.0,
        }
    }
}

/// Irregular blob: a rotated ellipse whose radius wobbles with angle.
fn blob_contains(p: &Patch, wobble: &[(f64, f64, f64)], x: f64, y: f64) -> bool {
    let (dx, dy) = (x - p.center.0, y - p.center.1);
    let (s, c) = p.angle.sin_cos();
    let u = (dx * c + dy * s) / p.axes.0;
    let v = (-dx * s + dy * c) / p.axes.1;
    let r = (u * u + v * v).sqrt();
    let theta = v.atan2(u);
    let limit = 1.0 + wobble.iter().map(|&(a, k, ph)| a * (k * theta + ph).sin()).sum::<f64>();
    r <= limit
}

/// Renders a scene of `size × size` with the given paint and patches.
pub fn render_scene(
    rng: &mut ChaCha8Rng,
    size: usize,
    paint: Paint,
    patches: &[Patch],
    hue_jitter: f64,
) -> (RgbImage, BinaryMask) {
    let wobbles: Vec<Vec<(f64, f64, f64)>> = patches
        .iter()
        .map(|_| {
            (0..3)
                .map(|i| {
                    (
                        rng.random_range(0.0..0.12),
                        (2 + i * 2) as f64 + rng.random_range(0.0..1.0f64).round(),
                        rng.random_range(0.0..std::f64::consts::TAU),
                    )
                })
                .collect()
        })
        .collect();

    let mut truth = BinaryMask::filled(size, size, false).expect("non-empty");
    let mut data = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let (fx, fy) = (x as f64 + 0.5, y as f64 + 0.5);
            let hit = patches
                .iter()
                .zip(&wobbles)
                .rev()
                .find(|(p, w)| blob_contains(p, w, fx, fy));
            let px = match hit {
                Some((p, _)) => {
                    truth.set(x, y, true);
                    let h = (p.hsv.h + rng.random_range(-hue_jitter..=hue_jitter)).rem_euclid(360.0);
                    let s = (p.hsv.s + rng.random_range(-0.03..=0.03)).clamp(0.0, 1.0);
                    let v = (p.hsv.v + rng.random_range(-0.03..=0.03)).clamp(0.0, 1.0);
                    let (r, g, b) = hsv_to_rgb(HsvPixel { h, s, v });
                    [r, g, b]
                }
                None => {
                    let gain = 1.0 - paint.shading * (1.0 - x as f64 / (size - 1) as f64);
                    paint
                        .rgb
                        .map(|c| c * gain + rng.random_range(-paint.noise..=paint.noise))
                }
            };
            data.push(px.map(quantize));
        }
    }
    (RgbImage::new(size, size, data).expect("valid scene"), truth)
}

fn random_patch(rng: &mut ChaCha8Rng, size: usize, radius: std::ops::Range<f64>) -> Patch {
    let a = rng.random_range(radius.clone());
    let b = a * rng.random_range(0.55..1.0);
    let margin = a * 1.2;
    Patch {
        center: (
            rng.random_range(margin..size as f64 - margin),
            rng.random_range(margin..size as f64 - margin),
        ),
        axes: (a, b),
        angle: rng.random_range(0.0..std::f64::consts::PI),
        hsv: HsvPixel {
            h: rng.random_range(8.0..27.0),
            s: rng.random_range(0.53..0.87),
            v: rng.random_range(0.23..0.67),
        },
    }
}

/// Gray board with 1–5 rust blobs (hue 5–30°, saturation 0.5–0.9,
/// value 0.2–0.7), deterministic in `seed`.
pub fn rust_fixture(seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=5);
    let patches: Vec<Patch> = (0..n)
        .map(|_| random_patch(&mut rng, FIXTURE_SIZE, 12.0..48.0))
        .collect();
    let (image, truth) = render_scene(&mut rng, FIXTURE_SIZE, Paint::gray(), &patches, 2.0);
    Fixture {
        name: format!("fixture_{seed:02}"),
        image,
        truth,
        patches,
    }
}

/// A scene together with the verdict it should receive.
#[derive(Debug, Clone)]
pub struct StationObject {
    pub fixture: Fixture,
    pub expected: Classification,
}

/// Seven panels: four rusty (blobs covering well over 0.5% of the frame)
/// and three clean ones, including a speckled panel whose isolated
/// rust-coloured pixels should be rejected as noise.
pub fn station_objects() -> Vec<StationObject> {
    let size = FIXTURE_SIZE;
    let mut out = Vec::new();
    let paints = [
        ("tower_leg", Paint::gray(), 2),
        ("tank_wall", Paint { rgb: [0.62, 0.66, 0.63], noise: 0.03, shading: 0.35 }, 3),
        ("cabinet_door", Paint { rgb: [0.80, 0.81, 0.79], noise: 0.025, shading: 0.0 }, 1),
        ("mast_bracket", Paint { rgb: [0.38, 0.40, 0.44], noise: 0.03, shading: 0.2 }, 4),
    ];
    for (i, (name, paint, n)) in paints.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        let patches: Vec<Patch> = (0..n).map(|_| random_patch(&mut rng, size, 22.0..40.0)).collect();
        let (image, truth) = render_scene(&mut rng, size, paint, &patches, 2.0);
        out.push(StationObject {
            fixture: Fixture { name: name.into(), image, truth, patches },
            expected: Classification::Rusty,
        });
    }

    let clean = [
        ("antenna_mount", Paint { rgb: [0.52, 0.53, 0.55], noise: 0.03, shading: 0.3 }),
        ("equipment_shelter", Paint { rgb: [0.30, 0.52, 0.36], noise: 0.03, shading: 0.0 }),
        ("cable_tray", Paint::gray()),
    ];
    for (i, (name, paint)) in clean.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + i as u64);
        let (mut image, truth) = render_scene(&mut rng, size, paint, &[], 0.0);
        if name == "cable_tray" {
            image = speckle(&mut rng, &image, 0.002);
        }
        out.push(StationObject {
            fixture: Fixture { name: name.into(), image, truth, patches: vec![] },
            expected: Classification::Clean,
        });
    }
    out
}

/// Scatters isolated rust-coloured pixels over a fraction of the frame.
pub fn speckle(rng: &mut ChaCha8Rng, image: &RgbImage, fraction: f64) -> RgbImage {
    let (r, g, b) = hsv_to_rgb(HsvPixel { h: 20.0, s: 0.75, v: 0.5 });
    let dot = [r, g, b].map(quantize);
    let mut data = image.pixels().to_vec();
    for px in data.iter_mut() {
        if rng.random_bool(fraction) {
            *px = dot;
        }
    }
    RgbImage::new(image.width(), image.height(), data).expect("same dimensions")
}
