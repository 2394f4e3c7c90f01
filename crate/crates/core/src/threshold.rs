//! Between-class-variance thresholding over a 256-bin histogram, with one
//! refinement pass inside the lower-variance class.
//!
//! A threshold `T` in `1..=255` splits bins into `[0, T)` and `[T, 256)`.
//! Candidates are compared in exact integer arithmetic so ties resolve
//! deterministically to the smallest `T`.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, FloatPlane};

pub const BINS: usize = 256;

/// Keeps every intermediate product of the exact comparison inside `u128`.
const MAX_TOTAL: u64 = 1 << 28;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    bins: [u64; BINS],
    total: u64,
}

impl Histogram {
    pub fn from_bins(bins: [u64; BINS]) -> Result<Self> {
        let total = bins.iter().sum();
        if total > MAX_TOTAL {
            return Err(Error::InvalidParameter {
                name: "histogram",
                message: format!("{total} samples exceeds the supported {MAX_TOTAL}"),
            });
        }
        Ok(Self { bins, total })
    }

    pub fn bins(&self) -> &[u64; BINS] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn nonempty_bins(&self) -> usize {
        self.bins.iter().filter(|&&c| c > 0).count()
    }

    /// Copy with every bin outside `range` zeroed.
    pub fn restricted(&self, range: std::ops::Range<usize>) -> Histogram {
        let mut bins = [0u64; BINS];
        bins[range.clone()].copy_from_slice(&self.bins[range]);
        Histogram {
            bins,
            total: bins.iter().sum(),
        }
    }

    fn mean_and_variance(&self, range: std::ops::Range<usize>) -> (f64, f64) {
        let n: u64 = self.bins[range.clone()].iter().sum();
        if n == 0 {
            return (0.0, 0.0);
        }
        let n = n as f64;
        let mean = range
            .clone()
            .map(|b| b as f64 * self.bins[b] as f64)
            .sum::<f64>()
            / n;
        let var = range
            .map(|b| (b as f64 - mean).powi(2) * self.bins[b] as f64)
            .sum::<f64>()
            / n;
        (mean, var)
    }
}

/// Bin index of a value in `[0, 1]`.
pub fn bin_of(value: f64) -> usize {
    ((value * BINS as f64).floor() as usize).min(BINS - 1)
}

pub fn build_histogram(plane: &FloatPlane) -> Result<Histogram> {
    let mut bins = [0u64; BINS];
    for &v in plane.values() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange { value: v });
        }
        bins[bin_of(v)] += 1;
    }
    Histogram::from_bins(bins)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdResult {
    /// Smallest maximizing split, in `1..=255`.
    pub t_star: usize,
    /// Between-class variance at `t_star`, in squared bin units.
    pub sigma_b2: f64,
    /// Within-class variances of `[0, t_star)` and `[t_star, 256)`.
    pub class_variances: (f64, f64),
}

/// Objective at one split as the exact ratio `d² / b`, where
/// `σ_b² = d² / (N² · b)` with `d = s0·n1 − s1·n0` and `b = n0·n1`.
#[derive(Debug, Clone, Copy)]
struct Score {
    d2: u128,
    b: u128,
}

impl Score {
    const ZERO: Score = Score { d2: 0, b: 1 };

    fn cmp(&self, other: &Score) -> Ordering {
        let (q1, r1) = (self.d2 / self.b, self.d2 % self.b);
        let (q2, r2) = (other.d2 / other.b, other.d2 % other.b);
        q1.cmp(&q2).then_with(|| (r1 * other.b).cmp(&(r2 * self.b)))
    }
}

fn split_score(n0: u64, s0: u64, n1: u64, s1: u64) -> Score {
    if n0 == 0 || n1 == 0 {
        return Score::ZERO;
    }
    let d = i128::from(s0) * i128::from(n1) - i128::from(s1) * i128::from(n0);
    let d = d.unsigned_abs();
    Score {
        d2: d * d,
        b: u128::from(n0) * u128::from(n1),
    }
}

/// Evaluates the between-class variance at a single split `t` in `1..=255`.
pub fn between_class_variance(hist: &Histogram, t: usize) -> f64 {
    assert!((1..BINS).contains(&t), "split {t} outside 1..=255");
    let (n0, s0) = prefix(hist, t);
    let n1 = hist.total - n0;
    let s1 = weighted_sum(hist) - s0;
    let score = split_score(n0, s0, n1, s1);
    let n = hist.total as f64;
    (score.d2 as f64) / (n * n * score.b as f64)
}

fn prefix(hist: &Histogram, t: usize) -> (u64, u64) {
    hist.bins[..t]
        .iter()
        .enumerate()
        .fold((0, 0), |(n, s), (b, &c)| (n + c, s + b as u64 * c))
}

fn weighted_sum(hist: &Histogram) -> u64 {
    hist.bins
        .iter()
        .enumerate()
        .map(|(b, &c)| b as u64 * c)
        .sum()
}

pub fn otsu_threshold(hist: &Histogram) -> Result<ThresholdResult> {
    let nonempty = hist.nonempty_bins();
    if nonempty < 2 {
        return Err(Error::DegenerateHistogram { nonempty });
    }
    let total_sum = weighted_sum(hist);
    let (mut n0, mut s0) = (0u64, 0u64);
    let mut best = (0usize, Score::ZERO);
    for t in 1..BINS {
        n0 += hist.bins[t - 1];
        s0 += (t as u64 - 1) * hist.bins[t - 1];
        let score = split_score(n0, s0, hist.total - n0, total_sum - s0);
        if best.0 == 0 || score.cmp(&best.1) == Ordering::Greater {
            best = (t, score);
        }
    }
    let t_star = best.0;
    let (_, v0) = hist.mean_and_variance(0..t_star);
    let (_, v1) = hist.mean_and_variance(t_star..BINS);
    Ok(ThresholdResult {
        t_star,
        sigma_b2: between_class_variance(hist, t_star),
        class_variances: (v0, v1),
    })
}

/// Pixels whose bin is at or above `t`.
pub fn mask_at_or_above(plane: &FloatPlane, t: usize) -> BinaryMask {
    BinaryMask::new(
        plane.width(),
        plane.height(),
        plane.values().iter().map(|&v| bin_of(v) >= t).collect(),
    )
    .expect("plane dimensions are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassSide {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdWarning {
    /// The plane occupies a single bin; the mask is empty.
    DegeneratePlane,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IteratedThreshold {
    pub mask: BinaryMask,
    pub first: Option<ThresholdResult>,
    /// Class that was re-split, and the split found inside it (if it had
    /// at least two occupied bins).
    pub refined_class: Option<ClassSide>,
    pub refinement: Option<ThresholdResult>,
    /// Bin cut that produced `mask`.
    pub final_threshold: Option<usize>,
    pub warning: Option<ThresholdWarning>,
}

/// One thresholding pass plus one refinement inside the lower-variance class.
///
/// If the high class is re-split, the mask keeps bins at or above the inner
/// split. If the low class is re-split (or variances tie), the mask keeps
/// bins at or above the first split.
pub fn iterated_threshold(plane: &FloatPlane) -> Result<IteratedThreshold> {
    let hist = build_histogram(plane)?;
    let first = match otsu_threshold(&hist) {
        Ok(r) => r,
        Err(Error::DegenerateHistogram { .. }) => {
            log::warn!("threshold: degenerate plane, returning an empty mask");
            return Ok(IteratedThreshold {
                mask: BinaryMask::filled(plane.width(), plane.height(), false)?,
                first: None,
                refined_class: None,
                refinement: None,
                final_threshold: None,
                warning: Some(ThresholdWarning::DegeneratePlane),
            });
        }
        Err(e) => return Err(e),
    };
    let t1 = first.t_star;
    let (v0, v1) = first.class_variances;
    let side = if v1 < v0 { ClassSide::High } else { ClassSide::Low };
    let range = match side {
        ClassSide::Low => 0..t1,
        ClassSide::High => t1..BINS,
    };
    let refinement = otsu_threshold(&hist.restricted(range)).ok();
    let final_t = match (side, refinement) {
        (ClassSide::High, Some(r)) => r.t_star,
        _ => t1,
    };
    Ok(IteratedThreshold {
        mask: mask_at_or_above(plane, final_t),
        first: Some(first),
        refined_class: Some(side),
        refinement,
        final_threshold: Some(final_t),
        warning: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct float evaluation of P0(μ0−μ)² + P1(μ1−μ)² for every split.
    fn brute_force(hist: &Histogram) -> (usize, f64) {
        let bins = hist.bins();
        let n: f64 = bins.iter().map(|&c| c as f64).sum();
        let mu: f64 = bins.iter().enumerate().map(|(b, &c)| b as f64 * c as f64).sum::<f64>() / n;
        let mut best = (0, f64::NEG_INFINITY);
        for t in 1..BINS {
            let w0: f64 = bins[..t].iter().map(|&c| c as f64).sum();
            let w1 = n - w0;
            let mut sb = 0.0;
            if w0 > 0.0 {
                let m0 = (0..t).map(|b| b as f64 * bins[b] as f64).sum::<f64>() / w0;
                sb += (w0 / n) * (m0 - mu).powi(2);
            }
            if w1 > 0.0 {
                let m1 = (t..BINS).map(|b| b as f64 * bins[b] as f64).sum::<f64>() / w1;
                sb += (w1 / n) * (m1 - mu).powi(2);
            }
            if sb > best.1 {
                best = (t, sb);
            }
        }
        best
    }

    fn hist_of(pairs: &[(usize, u64)]) -> Histogram {
        let mut bins = [0u64; BINS];
        for &(b, c) in pairs {
            bins[b] += c;
        }
        Histogram::from_bins(bins).unwrap()
    }

    #[test]
    fn histogram_quantization() {
        let h = build_histogram(&FloatPlane::constant(10, 1, 0.0).unwrap()).unwrap();
        assert_eq!(h.bins()[0], 10);
        assert_eq!(h.total(), 10);
        let h = build_histogram(&FloatPlane::constant(5, 2, 1.0).unwrap()).unwrap();
        assert_eq!(h.bins()[255], 10);
        let h = build_histogram(&FloatPlane::new(3, 1, vec![0.0, 0.5, 1.0]).unwrap()).unwrap();
        assert_eq!((h.bins()[0], h.bins()[128], h.bins()[255]), (1, 1, 1));
        assert_eq!(h.nonempty_bins(), 3);
        assert!(build_histogram(&FloatPlane::new(1, 1, vec![1.5]).unwrap()).is_err());
        assert!(build_histogram(&FloatPlane::new(1, 1, vec![-0.01]).unwrap()).is_err());
    }

    #[test]
    fn two_spikes() {
        let r = otsu_threshold(&hist_of(&[(10, 50), (200, 50)])).unwrap();
        assert_eq!(r.t_star, 11);
        assert_abs_diff_eq!(r.sigma_b2, 9025.0, epsilon = 1e-9);
        assert_eq!(r.class_variances, (0.0, 0.0));

        let r = otsu_threshold(&hist_of(&[(0, 7), (255, 7)])).unwrap();
        assert_eq!(r.t_star, 1);
        assert_abs_diff_eq!(r.sigma_b2, 127.5 * 127.5, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_histograms() {
        assert!(matches!(
            otsu_threshold(&hist_of(&[(42, 9)])),
            Err(Error::DegenerateHistogram { nonempty: 1 })
        ));
        assert!(matches!(
            otsu_threshold(&hist_of(&[])),
            Err(Error::DegenerateHistogram { nonempty: 0 })
        ));
    }

    #[test]
    fn argmax_is_global() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let mut bins = [0u64; BINS];
            bins.iter_mut().for_each(|b| *b = rng.random_range(0..50));
            let h = Histogram::from_bins(bins).unwrap();
            let r = otsu_threshold(&h).unwrap();
            for t in 1..BINS {
                assert!(r.sigma_b2 >= between_class_variance(&h, t) - 1e-9);
            }
        }
    }

    #[test]
    fn matches_brute_force_on_random_histograms() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for i in 0..100 {
            let mut bins = [0u64; BINS];
            let occupancy = rng.random_range(0.05..1.0);
            for b in bins.iter_mut() {
                if rng.random_bool(occupancy) {
                    *b = rng.random_range(1..10_000);
                }
            }
            if bins.iter().filter(|&&c| c > 0).count() < 2 {
                continue;
            }
            let h = Histogram::from_bins(bins).unwrap();
            let (t, sb) = brute_force(&h);
            let r = otsu_threshold(&h).unwrap();
            assert_eq!(r.t_star, t, "histogram {i}");
            assert!((r.sigma_b2 - sb).abs() <= 1e-9 * sb.max(1.0));
        }
    }

    #[test]
    fn scaling_counts_keeps_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let mut bins = [0u64; BINS];
            bins.iter_mut().for_each(|b| *b = rng.random_range(0..200));
            let h = Histogram::from_bins(bins).unwrap();
            let k = rng.random_range(2..17);
            let scaled = Histogram::from_bins(bins.map(|c| c * k)).unwrap();
            assert_eq!(otsu_threshold(&h).unwrap().t_star, otsu_threshold(&scaled).unwrap().t_star);
        }
    }

    /// Two passes written out directly: first split, smaller-variance class,
    /// inner split, final cut.
    fn two_pass_oracle(values: &[f64]) -> Vec<bool> {
        let mut bins = [0u64; BINS];
        values.iter().for_each(|&v| bins[bin_of(v)] += 1);
        let h = Histogram::from_bins(bins).unwrap();
        let (t1, _) = brute_force(&h);
        let var = |lo: usize, hi: usize| {
            let n: f64 = (lo..hi).map(|b| bins[b] as f64).sum();
            if n == 0.0 {
                return 0.0;
            }
            let m = (lo..hi).map(|b| b as f64 * bins[b] as f64).sum::<f64>() / n;
            (lo..hi).map(|b| (b as f64 - m).powi(2) * bins[b] as f64).sum::<f64>() / n
        };
        let cut = if var(t1, BINS) < var(0, t1) {
            let mut inner = [0u64; BINS];
            inner[t1..].copy_from_slice(&bins[t1..]);
            let inner = Histogram::from_bins(inner).unwrap();
            if inner.nonempty_bins() >= 2 {
                brute_force(&inner).0
            } else {
                t1
            }
        } else {
            t1
        };
        values.iter().map(|&v| bin_of(v) >= cut).collect()
    }

    #[test]
    fn bimodal_plane() {
        let plane = FloatPlane::from_fn(10, 10, |x, _| if x < 4 { 0.1 } else { 0.9 }).unwrap();
        let out = iterated_threshold(&plane).unwrap();
        for y in 0..10 {
            for x in 0..10 {
                assert_eq!(out.mask.get(x, y), x >= 4);
            }
        }
        assert_eq!(out.mask.bits(), two_pass_oracle(plane.values()).as_slice());
    }

    #[test]
    fn constant_plane_is_empty_with_warning() {
        let out = iterated_threshold(&FloatPlane::constant(6, 6, 0.4).unwrap()).unwrap();
        assert_eq!(out.mask.count(), 0);
        assert_eq!(out.warning, Some(ThresholdWarning::DegeneratePlane));
    }

    #[test]
    fn trimodal_plane() {
        let levels = [0.1, 0.5, 0.9];
        let plane = FloatPlane::from_fn(9, 9, |x, _| levels[x / 3]).unwrap();
        let out = iterated_threshold(&plane).unwrap();
        assert_eq!(out.mask.bits(), two_pass_oracle(plane.values()).as_slice());
        assert!(out.refined_class.is_some());
    }

    #[test]
    fn high_class_refinement_shrinks_foreground() {
        // Wide background, tight two-level foreground: the high class has
        // the smaller variance and gets split again.
        let mut values = Vec::new();
        for b in 0..60 {
            values.extend(std::iter::repeat_n(b as f64 / 256.0 + 1e-6, 20));
        }
        values.extend(std::iter::repeat_n(200.0 / 256.0 + 1e-6, 300));
        values.extend(std::iter::repeat_n(230.0 / 256.0 + 1e-6, 300));
        let plane = FloatPlane::new(values.len(), 1, values.clone()).unwrap();
        let out = iterated_threshold(&plane).unwrap();
        assert_eq!(out.refined_class, Some(ClassSide::High));
        assert_eq!(out.final_threshold, Some(201));
        assert_eq!(out.mask.count(), 300);
        assert_eq!(out.mask.bits(), two_pass_oracle(&values).as_slice());
    }

    #[test]
    fn random_planes_match_two_pass_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..40 {
            let modes: Vec<f64> = (0..rng.random_range(2..5)).map(|_| rng.random_range(0.0..1.0)).collect();
            let values: Vec<f64> = (0..400)
                .map(|_| {
                    let m = modes[rng.random_range(0..modes.len())];
                    (m + rng.random_range(-0.05..0.05f64)).clamp(0.0, 1.0)
                })
                .collect();
            let plane = FloatPlane::new(20, 20, values.clone()).unwrap();
            let out = iterated_threshold(&plane).unwrap();
            assert_eq!(out.mask.bits(), two_pass_oracle(&values).as_slice());
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn raising_threshold_never_adds_pixels(values in proptest::collection::vec(0.0f64..=1.0, 1..200), t in 1usize..255) {
                let plane = FloatPlane::new(values.len(), 1, values).unwrap();
                let a = mask_at_or_above(&plane, t);
                let b = mask_at_or_above(&plane, t + 1);
                for (&x, &y) in a.bits().iter().zip(b.bits()) {
                    prop_assert!(!y || x);
                }
            }
        }
    }
}
