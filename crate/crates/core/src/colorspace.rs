//! RGB to HSV conversion and saturation-plane extraction.
//!
//! Hue is in degrees on `[0, 360)`, saturation and value on `[0, 1]`.
//! Hue is 0 for achromatic pixels (`max == min`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{FloatPlane, RgbImage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsvPixel {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

impl HsvPixel {
    pub fn new(h: f64, s: f64, v: f64) -> Result<Self> {
        if !(0.0..360.0).contains(&h) {
            return Err(Error::InvalidParameter {
                name: "h",
                message: format!("{h} not in [0, 360)"),
            });
        }
        for value in [s, v] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfRange { value });
            }
        }
        Ok(Self { h, s, v })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HsvImage {
    width: usize,
    height: usize,
    data: Vec<HsvPixel>,
}

impl HsvImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[HsvPixel] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> HsvPixel {
        self.data[y * self.width + x]
    }
}

/// Converts one RGB triple; every channel must lie in `[0, 1]`.
pub fn rgb_to_hsv(r: f64, g: f64, b: f64) -> Result<HsvPixel> {
    for value in [r, g, b] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::OutOfRange { value });
        }
    }
    Ok(rgb_to_hsv_unchecked(r, g, b))
}

pub(crate) fn rgb_to_hsv_unchecked(r: f64, g: f64, b: f64) -> HsvPixel {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;

    // Branch order matters on ties: red wins over green, green over blue.
    let h = if max == min {
        0.0
    } else if max == r && g >= b {
        60.0 * (g - b) / delta
    } else if max == r {
        60.0 * (g - b) / delta + 360.0
    } else if max == g {
        60.0 * (b - r) / delta + 120.0
    } else {
        60.0 * (r - g) / delta + 240.0
    };
    let h = if h >= 360.0 { h - 360.0 } else { h };

    let s = if max == 0.0 { 0.0 } else { 1.0 - min / max };

    HsvPixel { h, s, v: max }
}

/// Inverse of [`rgb_to_hsv`].
pub fn hsv_to_rgb(p: HsvPixel) -> (f64, f64, f64) {
    let HsvPixel { h, s, v } = p;
    if s == 0.0 {
        return (v, v, v);
    }
    let sector = h / 60.0;
    let i = sector.floor();
    let f = sector - i;
    let p_ = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match (i as i64).rem_euclid(6) {
        0 => (v, t, p_),
        1 => (q, v, p_),
        2 => (p_, v, t),
        3 => (p_, q, v),
        4 => (t, p_, v),
        _ => (v, p_, q),
    }
}

pub fn rgb_image_to_hsv(image: &RgbImage) -> HsvImage {
    let data = image
        .pixels()
        .par_iter()
        .map(|&[r, g, b]| rgb_to_hsv_unchecked(r, g, b))
        .collect();
    HsvImage {
        width: image.width(),
        height: image.height(),
        data,
    }
}

pub fn extract_saturation(image: &HsvImage) -> FloatPlane {
    FloatPlane::new(
        image.width,
        image.height,
        image.data.iter().map(|p| p.s).collect(),
    )
    .expect("HsvImage dimensions are valid")
}
