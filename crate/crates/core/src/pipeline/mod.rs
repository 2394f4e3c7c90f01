//! End-to-end analysis of one image, and batches of images.
//!
//! Stage order: HSV conversion, SSR on the saturation plane, linear
//! stretch, iterated threshold, colour filter, fusion, DBSCAN, area filter,
//! rust percentage and verdict.

mod batch;
mod config;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use batch::{collect_inputs, run_batch, BatchFailure, BatchOptions, BatchOutcome, BatchSummary};
pub use config::{
    ConfigError, DbscanConfig, Emit, FieldIssue, PipelineConfig, SsrConfig, DECIMATE_ABOVE,
};
pub(crate) use config::{check_ranges, check_ssr};

use crate::colorfilter::{apply_ranges, fuse_masks, FilterConfig};
use crate::colorspace::{extract_saturation, rgb_image_to_hsv, HsvImage};
use crate::dbscan::{cluster_mask, dbscan_mask, filter_clusters, ClusterInfo, ClusterSet};
use crate::error::Result;
use crate::imaging::{self, BinaryMask, FloatPlane, RgbImage};
use crate::retinex::{linear_stretch, ssr, SsrParams};
use crate::threshold::{iterated_threshold, IteratedThreshold};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Classification {
    Rusty,
    Clean,
}

/// RUSTY iff `rust_percentage >= rust_threshold_pct`.
pub fn classify(rust_percentage: f64, rust_threshold_pct: f64) -> Classification {
    if rust_percentage >= rust_threshold_pct {
        Classification::Rusty
    } else {
        Classification::Clean
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RustReport {
    pub image_id: String,
    pub width: usize,
    pub height: usize,
    pub rust_pixel_count: usize,
    pub total_pixels: usize,
    pub rust_percentage: f64,
    pub clusters: Vec<ClusterInfo>,
    pub classification: Classification,
    /// Effective configuration, with an automatic sigma resolved.
    pub config: PipelineConfig,
}

impl RustReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Stretched SSR plane of the saturation channel and its threshold mask.
#[derive(Debug, Clone)]
pub struct ThresholdStage {
    pub params: SsrParams,
    pub stretched: FloatPlane,
    pub threshold: IteratedThreshold,
}

pub fn threshold_stage(hsv: &HsvImage, params: SsrParams) -> Result<ThresholdStage> {
    let saturation = extract_saturation(hsv);
    let reflectance = ssr(&saturation, &params)?;
    let stretched = linear_stretch(&reflectance);
    let threshold = iterated_threshold(&stretched)?;
    Ok(ThresholdStage {
        params,
        stretched,
        threshold,
    })
}

/// Colour mask fused with the threshold mask; the input to clustering.
pub fn premask(hsv: &HsvImage, threshold_mask: &BinaryMask, filter: &FilterConfig) -> Result<BinaryMask> {
    let color = apply_ranges(hsv, &filter.ranges);
    fuse_masks(&color, threshold_mask, filter.fusion)
}

/// Every intermediate product of one run.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: RustReport,
    pub threshold: ThresholdStage,
    pub premask: BinaryMask,
    pub clusters: ClusterSet,
    pub mask: BinaryMask,
}

pub fn analyze(image: &RgbImage, config: &PipelineConfig, image_id: &str) -> Result<Analysis> {
    config.validate()?;
    let hsv = rgb_image_to_hsv(image);
    let params = config.ssr.resolve(image.width(), image.height());
    let stage = threshold_stage(&hsv, params)?;
    analyze_from_stage(image, &hsv, stage, config, image_id)
}

/// Continues a run from a precomputed threshold stage. `stage.params` must
/// be the resolved SSR parameters of `config` for this image.
pub fn analyze_from_stage(
    image: &RgbImage,
    hsv: &HsvImage,
    stage: ThresholdStage,
    config: &PipelineConfig,
    image_id: &str,
) -> Result<Analysis> {
    let fused = premask(hsv, &stage.threshold.mask, &config.filter)?;
    let raw = dbscan_mask(&fused, &config.dbscan.params(), config.dbscan.decimate_above());
    let clusters = filter_clusters(&raw, config.min_area);
    let (w, h) = image.dims();
    let mask = cluster_mask(&clusters, w, h)?;

    let rust_pixel_count = clusters.retained_count();
    let total_pixels = w * h;
    let rust_percentage = 100.0 * rust_pixel_count as f64 / total_pixels as f64;
    let mut echo = config.clone();
    echo.ssr.sigma = Some(stage.params.sigma);
    echo.emit = Emit::default();
    let report = RustReport {
        image_id: image_id.to_string(),
        width: w,
        height: h,
        rust_pixel_count,
        total_pixels,
        rust_percentage,
        clusters: clusters.clusters().to_vec(),
        classification: classify(rust_percentage, config.rust_threshold_pct),
        config: echo,
    };
    Ok(Analysis {
        report,
        threshold: stage,
        premask: fused,
        clusters,
        mask,
    })
}

/// Writes the artifacts selected by `emit` as `<stem>.<kind>.<ext>`.
pub fn write_artifacts(
    analysis: &Analysis,
    image: &RgbImage,
    out_dir: &Path,
    stem: &str,
    emit: Emit,
) -> Result<()> {
    if emit.mask {
        imaging::save_mask(&analysis.mask, out_dir.join(format!("{stem}.mask.png")))?;
    }
    if emit.premask {
        imaging::save_mask(&analysis.premask, out_dir.join(format!("{stem}.premask.png")))?;
    }
    if emit.overlay {
        let overlay = imaging::render_overlay(image, &analysis.clusters)?;
        imaging::save_rgb(&overlay, out_dir.join(format!("{stem}.overlay.png")))?;
    }
    if emit.report {
        let path = out_dir.join(format!("{stem}.report.json"));
        std::fs::write(&path, analysis.report.to_json()).map_err(|e| crate::Error::Write {
            path,
            message: e.to_string(),
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorfilter::{Fusion, HsvRange};
    use crate::colorspace::{hsv_to_rgb, HsvPixel};

    fn rust_rgb() -> [f64; 3] {
        let (r, g, b) = hsv_to_rgb(HsvPixel { h: 18.0, s: 0.75, v: 0.5 });
        [r, g, b]
    }

    #[test]
    fn classify_boundary() {
        assert_eq!(classify(0.0, 0.5), Classification::Clean);
        assert_eq!(classify(0.5, 0.5), Classification::Rusty);
        assert_eq!(classify(0.9537, 0.5), Classification::Rusty);
    }

    #[test]
    fn solid_gray_is_clean() {
        let img = RgbImage::filled(100, 100, [0.5; 3]).unwrap();
        let a = analyze(&img, &PipelineConfig::default(), "gray").unwrap();
        assert_eq!(a.report.rust_percentage, 0.0);
        assert_eq!(a.report.classification, Classification::Clean);
        assert!(a.report.clusters.is_empty());
    }

    #[test]
    fn solid_rust_color_only_is_fully_rusty() {
        let img = RgbImage::filled(64, 64, rust_rgb()).unwrap();
        let mut cfg = PipelineConfig::default();
        cfg.filter.fusion = Fusion::ColorOnly;
        cfg.min_area = 0;
        let a = analyze(&img, &cfg, "rust").unwrap();
        assert_eq!(a.report.rust_percentage, 100.0);
        assert_eq!(a.report.classification, Classification::Rusty);
        assert_eq!(a.report.clusters.len(), 1);
    }

    #[test]
    fn square_on_gray_board() {
        let img = RgbImage::from_fn(512, 512, |x, y| {
            if (200..250).contains(&x) && (100..150).contains(&y) {
                rust_rgb()
            } else {
                [0.47, 0.49, 0.51]
            }
        })
        .unwrap();
        let mut cfg = PipelineConfig::default();
        cfg.filter.fusion = Fusion::ColorOnly;
        let a = analyze(&img, &cfg, "board").unwrap();
        assert_eq!(a.report.rust_pixel_count, 2500);
        assert!((a.report.rust_percentage - 100.0 * 2500.0 / 262144.0).abs() < 1e-12);
        assert_eq!(a.report.classification, Classification::Rusty);
    }

    #[test]
    fn report_invariants_and_echo() {
        let img = RgbImage::from_fn(80, 60, |x, y| {
            if x > 50 && y > 20 { rust_rgb() } else { [0.4, 0.42, 0.45] }
        })
        .unwrap();
        let mut cfg = PipelineConfig::default();
        cfg.filter.fusion = Fusion::ColorOnly;
        let r = analyze(&img, &cfg, "x").unwrap().report;
        assert_eq!(r.rust_pixel_count, r.clusters.iter().map(|c| c.pixel_count).sum::<usize>());
        assert!((r.rust_percentage - 100.0 * r.rust_pixel_count as f64 / r.total_pixels as f64).abs() < 1e-9);
        assert_eq!(r.config.ssr.sigma, Some(10.0));
        let back: RustReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn stage_isolation_without_clustering() {
        let img = RgbImage::from_fn(40, 40, |x, y| {
            if (x * 7 + y * 3) % 5 == 0 { rust_rgb() } else { [0.5, 0.5, 0.52] }
        })
        .unwrap();
        let mut cfg = PipelineConfig::default();
        cfg.filter.fusion = Fusion::ColorOnly;
        cfg.min_area = 0;
        cfg.dbscan.min_pts = 1;
        let a = analyze(&img, &cfg, "iso").unwrap();
        let color = apply_ranges(&rgb_image_to_hsv(&img), &cfg.filter.ranges);
        assert_eq!(a.report.rust_pixel_count, color.count());
        assert_eq!(a.mask, color);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let img = RgbImage::filled(50, 50, [0.5; 3]).unwrap();
        let mut cfg = PipelineConfig::default();
        cfg.filter.ranges = vec![HsvRange {
            h_lo: 10.0,
            h_hi: 20.0,
            s_lo: 0.9,
            s_hi: 0.1,
            v_lo: 0.0,
            v_hi: 1.0,
        }];
        assert!(matches!(analyze(&img, &cfg, "bad"), Err(crate::Error::Config(_))));
    }
}
