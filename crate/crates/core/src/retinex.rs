//! Single-scale Retinex on a real plane.
//!
//! The surround is a truncated Gaussian `exp(-(i² + j²) / σ²)` normalized to
//! unit mass, and the reflectance is `ln(L) - ln(L * F)` with both arguments
//! floored at `epsilon_floor`. The kernel is separable, so convolution runs
//! as a horizontal then a vertical 1-D pass with mirror-reflected borders.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::FloatPlane;

pub const DEFAULT_EPSILON_FLOOR: f64 = 1e-4;

/// Sigma used when none is configured: 5% of the longer side, at least 10 px.
pub fn auto_sigma(width: usize, height: usize) -> f64 {
    (0.05 * width.max(height) as f64).max(10.0)
}

/// Truncated, normalized Gaussian surround.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel {
    radius: usize,
    sigma: f64,
    taps: Vec<f64>,
}

impl GaussianKernel {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Side length of the square window.
    pub fn size(&self) -> usize {
        2 * self.radius + 1
    }

    /// Normalized 1-D factor; the 2-D kernel is its outer product.
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Full `size × size` window, row-major, evaluated directly from the
    /// 2-D exponent and renormalized to sum to one.
    pub fn weights(&self) -> Vec<f64> {
        let r = self.radius as i64;
        let s2 = self.sigma * self.sigma;
        let mut w = Vec::with_capacity(self.size() * self.size());
        for j in -r..=r {
            for i in -r..=r {
                w.push((-((i * i + j * j) as f64) / s2).exp());
            }
        }
        let k = 1.0 / w.iter().sum::<f64>();
        w.iter_mut().for_each(|v| *v *= k);
        w
    }
}

pub fn gaussian_kernel(sigma: f64, radius: usize) -> Result<GaussianKernel> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            message: format!("must be positive, got {sigma}"),
        });
    }
    if radius == 0 {
        return Err(Error::InvalidParameter {
            name: "radius",
            message: "must be at least 1".into(),
        });
    }
    let r = radius as i64;
    let s2 = sigma * sigma;
    let mut taps: Vec<f64> = (-r..=r).map(|i| (-((i * i) as f64) / s2).exp()).collect();
    let k = 1.0 / taps.iter().sum::<f64>();
    taps.iter_mut().for_each(|v| *v *= k);
    Ok(GaussianKernel {
        radius,
        sigma,
        taps,
    })
}

/// Kernel with the default truncation `radius = ceil(3σ)`.
pub fn gaussian_kernel_for(sigma: f64) -> Result<GaussianKernel> {
    let radius = if sigma.is_finite() && sigma > 0.0 {
        (3.0 * sigma).ceil() as usize
    } else {
        1
    };
    gaussian_kernel(sigma, radius.max(1))
}

/// Mirror index into `[0, n)`: `… 2 1 0 | 0 1 2 … n-1 | n-1 n-2 …`.
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// Convolves with the separable kernel, mirror-reflecting at the borders.
pub fn convolve(plane: &FloatPlane, kernel: &GaussianKernel) -> Result<FloatPlane> {
    let (w, h) = plane.dims();
    let size = kernel.size();
    if size > 2 * w || size > 2 * h {
        return Err(Error::KernelTooLarge {
            size,
            width: w,
            height: h,
        });
    }
    let r = kernel.radius as isize;
    let taps = kernel.taps();
    let src = plane.values();

    let mut horizontal = vec![0.0; w * h];
    horizontal
        .par_chunks_mut(w)
        .enumerate()
        .for_each(|(y, out)| {
            let row = &src[y * w..(y + 1) * w];
            let padded: Vec<f64> = (-r..w as isize + r).map(|x| row[reflect(x, w)]).collect();
            for (x, o) in out.iter_mut().enumerate() {
                *o = padded[x..x + size]
                    .iter()
                    .zip(taps)
                    .map(|(a, b)| a * b)
                    .sum();
            }
        });

    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, o)| {
        for (k, &t) in taps.iter().enumerate() {
            let sy = reflect(y as isize + k as isize - r, h);
            let row = &horizontal[sy * w..(sy + 1) * w];
            for (acc, &v) in o.iter_mut().zip(row) {
                *acc += t * v;
            }
        }
    });
    FloatPlane::new(w, h, out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsrParams {
    pub sigma: f64,
    pub epsilon_floor: f64,
}

impl SsrParams {
    pub fn new(sigma: f64, epsilon_floor: f64) -> Result<Self> {
        let p = Self {
            sigma,
            epsilon_floor,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                message: format!("must be positive, got {}", self.sigma),
            });
        }
        if !(self.epsilon_floor > 0.0 && self.epsilon_floor <= 1e-3) {
            return Err(Error::InvalidParameter {
                name: "epsilon_floor",
                message: format!("must be in (0, 1e-3], got {}", self.epsilon_floor),
            });
        }
        Ok(())
    }
}

/// Log reflectance `ln(max(L, ε)) - ln(max(L * F, ε))`.
pub fn ssr(plane: &FloatPlane, params: &SsrParams) -> Result<FloatPlane> {
    params.validate()?;
    let kernel = gaussian_kernel_for(params.sigma)?;
    let surround = convolve(plane, &kernel)?;
    let eps = params.epsilon_floor;
    let data: Vec<f64> = plane
        .values()
        .par_iter()
        .zip(surround.values().par_iter())
        .map(|(&l, &s)| l.max(eps).ln() - s.max(eps).ln())
        .collect();
    FloatPlane::new(plane.width(), plane.height(), data)
}

/// Affine map of `[min, max]` onto `[0, 1]`; a constant plane maps to 0.5.
pub fn linear_stretch(plane: &FloatPlane) -> FloatPlane {
    let (lo, hi) = plane
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi == lo {
        return plane.map(|_| 0.5);
    }
    let span = hi - lo;
    plane.map(|v| (v - lo) / span)
}
