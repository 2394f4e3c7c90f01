use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::colorfilter::{FilterConfig, Fusion, HsvRange};
use crate::colorspace::{rgb_image_to_hsv, HsvImage};
use crate::error::Error;
use crate::imaging::{decode_rgb, encode_mask_png, RgbImage};
use crate::pipeline::{
    analyze_from_stage, check_ranges, check_ssr, collect_inputs, premask, threshold_stage,
    ConfigError, PipelineConfig, RustReport, SsrConfig, ThresholdStage,
};

/// Stable image id: first 12 hex digits of SHA-256 over `name ‖ 0 ‖ bytes`.
pub fn image_id(name: &str, bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(name.as_bytes());
    h.update([0u8]);
    h.update(bytes);
    hex::encode(h.finalize())[..12].to_string()
}

#[derive(Debug)]
pub struct StoredImage {
    pub id: String,
    pub name: String,
    pub image: RgbImage,
    pub hsv: HsvImage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageSummary {
    pub id: String,
    pub name: String,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskRequest {
    pub image_id: String,
    pub ranges: Vec<HsvRange>,
    #[serde(default)]
    pub ssr: SsrConfig,
    #[serde(default)]
    pub fusion: Fusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeRequest {
    pub image_id: String,
    #[serde(flatten)]
    pub config: PipelineConfig,
}

#[derive(Debug)]
pub enum ServiceError {
    NotFound(String),
    BadRequest(ConfigError),
    Internal(String),
}

impl From<Error> for ServiceError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(c) => ServiceError::BadRequest(c),
            other => ServiceError::Internal(other.to_string()),
        }
    }
}

type StageKey = (usize, u64, u64);

/// Images loaded at startup plus the single calibration session.
///
/// The image store is immutable. The session config sits behind a
/// read-write lock and threshold stages are memoized per
/// `(image, sigma, epsilon_floor)`; concurrent misses may both compute the
/// same stage, and the last insert wins.
#[derive(Debug)]
pub struct CalibState {
    images: Vec<StoredImage>,
    by_id: HashMap<String, usize>,
    config: RwLock<PipelineConfig>,
    stages: Mutex<HashMap<StageKey, Arc<ThresholdStage>>>,
}

impl CalibState {
    pub fn new(named: Vec<(String, Vec<u8>)>) -> Self {
        let mut named = named;
        named.sort_by(|a, b| a.0.cmp(&b.0));
        let images: Vec<StoredImage> = named
            .par_iter()
            .filter_map(|(name, bytes)| match decode_rgb(bytes) {
                Ok(image) => Some(StoredImage {
                    id: image_id(name, bytes),
                    name: name.clone(),
                    hsv: rgb_image_to_hsv(&image),
                    image,
                }),
                Err(e) => {
                    log::warn!("skipping {name}: {e}");
                    None
                }
            })
            .collect();
        let by_id = images.iter().enumerate().map(|(i, s)| (s.id.clone(), i)).collect();
        Self {
            images,
            by_id,
            config: RwLock::new(PipelineConfig::default()),
            stages: Mutex::new(HashMap::new()),
        }
    }

    /// Loads every PNG/JPEG directly inside `dir`.
    pub fn from_dir(dir: &Path) -> crate::Result<Self> {
        let files = collect_inputs(&[dir.to_path_buf()])?;
        let mut named = Vec::with_capacity(files.len());
        for f in files {
            let bytes = std::fs::read(&f).map_err(|source| Error::Read {
                path: f.clone(),
                source,
            })?;
            named.push((file_name(&f), bytes));
        }
        Ok(Self::new(named))
    }

    pub fn list_images(&self) -> Vec<ImageSummary> {
        self.images
            .iter()
            .map(|s| ImageSummary {
                id: s.id.clone(),
                name: s.name.clone(),
                width: s.image.width(),
                height: s.image.height(),
            })
            .collect()
    }

    fn lookup(&self, id: &str) -> Result<(usize, &StoredImage), ServiceError> {
        self.by_id
            .get(id)
            .map(|&i| (i, &self.images[i]))
            .ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    pub fn image(&self, id: &str) -> Result<&StoredImage, ServiceError> {
        self.lookup(id).map(|(_, s)| s)
    }

    fn stage(&self, index: usize, ssr: &SsrConfig) -> Result<Arc<ThresholdStage>, ServiceError> {
        let stored = &self.images[index];
        let params = ssr.resolve(stored.image.width(), stored.image.height());
        let key = (index, params.sigma.to_bits(), params.epsilon_floor.to_bits());
        if let Some(hit) = self.stages.lock().expect("stage cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let stage = Arc::new(threshold_stage(&stored.hsv, params)?);
        self.stages
            .lock()
            .expect("stage cache poisoned")
            .insert(key, stage.clone());
        Ok(stage)
    }

    /// Pre-clustering mask as PNG, via the same stages as the batch pipeline.
    pub fn preview_mask(&self, req: &MaskRequest) -> Result<Vec<u8>, ServiceError> {
        let (index, stored) = self.lookup(&req.image_id)?;
        let mut issues = Vec::new();
        check_ssr(&req.ssr, &mut issues);
        check_ranges(&req.ranges, &mut issues);
        if !issues.is_empty() {
            return Err(ServiceError::BadRequest(ConfigError { issues }));
        }
        let stage = self.stage(index, &req.ssr)?;
        let filter = FilterConfig {
            ranges: req.ranges.clone(),
            fusion: req.fusion,
        };
        let mask = premask(&stored.hsv, &stage.threshold.mask, &filter)?;
        Ok(encode_mask_png(&mask))
    }

    pub fn analyze_now(&self, id: &str, config: &PipelineConfig) -> Result<RustReport, ServiceError> {
        let (index, stored) = self.lookup(id)?;
        config.validate().map_err(ServiceError::BadRequest)?;
        let stage = self.stage(index, &config.ssr)?;
        let analysis =
            analyze_from_stage(&stored.image, &stored.hsv, (*stage).clone(), config, &stored.name)?;
        Ok(analysis.report)
    }

    pub fn config(&self) -> PipelineConfig {
        self.config.read().expect("config lock poisoned").clone()
    }

    pub fn export_config(&self) -> String {
        self.config().to_json()
    }

    pub fn import_config(&self, body: &str) -> Result<PipelineConfig, ServiceError> {
        let cfg = PipelineConfig::from_json(body).map_err(ServiceError::BadRequest)?;
        *self.config.write().expect("config lock poisoned") = cfg.clone();
        Ok(cfg)
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}
