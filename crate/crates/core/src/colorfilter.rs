//! HSV interval filtering and mask fusion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colorspace::{HsvImage, HsvPixel};
use crate::error::Result;
use crate::imaging::{ensure_same_dims, BinaryMask};

/// Box in HSV space. Endpoints are inclusive; `h_lo > h_hi` wraps through 0°.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsvRange {
    pub h_lo: f64,
    pub h_hi: f64,
    pub s_lo: f64,
    pub s_hi: f64,
    pub v_lo: f64,
    pub v_hi: f64,
}

impl HsvRange {
    pub fn wraps(&self) -> bool {
        self.h_lo > self.h_hi
    }

    /// Human-readable violations of the range invariants, keyed by field.
    pub fn problems(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        for (name, h) in [("h_lo", self.h_lo), ("h_hi", self.h_hi)] {
            if !(0.0..360.0).contains(&h) {
                out.push((name, format!("{h} not in [0, 360)")));
            }
        }
        for (name, v) in [
            ("s_lo", self.s_lo),
            ("s_hi", self.s_hi),
            ("v_lo", self.v_lo),
            ("v_hi", self.v_hi),
        ] {
            if !(0.0..=1.0).contains(&v) {
                out.push((name, format!("{v} not in [0, 1]")));
            }
        }
        if self.s_lo > self.s_hi {
            out.push(("s_lo", format!("{} exceeds s_hi {}", self.s_lo, self.s_hi)));
        }
        if self.v_lo > self.v_hi {
            out.push(("v_lo", format!("{} exceeds v_hi {}", self.v_lo, self.v_hi)));
        }
        out
    }
}

/// The shipped rust range: deep reds from 340° wrapping through 0° and on
/// through orange to 40°.
pub fn default_rust_ranges() -> Vec<HsvRange> {
    vec![HsvRange {
        h_lo: 340.0,
        h_hi: 40.0,
        s_lo: 0.35,
        s_hi: 1.0,
        v_lo: 0.15,
        v_hi: 0.95,
    }]
}

/// How the colour mask combines with the threshold mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fusion {
    #[serde(alias = "color")]
    ColorOnly,
    #[default]
    #[serde(alias = "and")]
    AndWithThreshold,
    #[serde(alias = "or")]
    OrWithThreshold,
}

impl std::str::FromStr for Fusion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "color" | "color_only" => Ok(Fusion::ColorOnly),
            "and" | "and_with_threshold" => Ok(Fusion::AndWithThreshold),
            "or" | "or_with_threshold" => Ok(Fusion::OrWithThreshold),
            other => Err(format!("unknown fusion mode `{other}` (expected color, and or or)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub ranges: Vec<HsvRange>,
    pub fusion: Fusion,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            ranges: default_rust_ranges(),
            fusion: Fusion::default(),
        }
    }
}

pub fn in_range(p: HsvPixel, r: &HsvRange) -> bool {
    let hue_ok = if r.wraps() {
        p.h >= r.h_lo || p.h <= r.h_hi
    } else {
        p.h >= r.h_lo && p.h <= r.h_hi
    };
    hue_ok && p.s >= r.s_lo && p.s <= r.s_hi && p.v >= r.v_lo && p.v <= r.v_hi
}

/// Union of the per-range masks.
pub fn apply_ranges(image: &HsvImage, ranges: &[HsvRange]) -> BinaryMask {
    let bits = image
        .pixels()
        .par_iter()
        .map(|&p| ranges.iter().any(|r| in_range(p, r)))
        .collect();
    BinaryMask::new(image.width(), image.height(), bits).expect("image dimensions are valid")
}

pub fn fuse_masks(color: &BinaryMask, threshold: &BinaryMask, mode: Fusion) -> Result<BinaryMask> {
    ensure_same_dims(color.dims(), threshold.dims())?;
    let combine: fn(bool, bool) -> bool = match mode {
        Fusion::ColorOnly => |c, _| c,
        Fusion::AndWithThreshold => |c, t| c && t,
        Fusion::OrWithThreshold => |c, t| c || t,
    };
    let bits = color
        .bits()
        .iter()
        .zip(threshold.bits())
        .map(|(&c, &t)| combine(c, t))
        .collect();
    BinaryMask::new(color.width(), color.height(), bits)
}
