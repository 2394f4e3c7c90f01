use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::{analyze, write_artifacts, Classification, PipelineConfig, RustReport};
use crate::error::{Error, Result};
use crate::imaging::load_rgb;

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Expands directories into their PNG/JPEG files (sorted by name); plain
/// file arguments are kept as given.
pub fn collect_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let entries = std::fs::read_dir(p).map_err(|source| Error::Read {
                path: p.clone(),
                source,
            })?;
            let mut files: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && is_image(f))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct BatchOptions {
    /// Where artifacts go; nothing is written when `None`.
    pub out_dir: Option<PathBuf>,
    /// Worker threads; defaults to the rayon global pool.
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchFailure {
    pub path: PathBuf,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    /// One entry per readable input, in input order.
    pub reports: Vec<(PathBuf, RustReport)>,
    pub failures: Vec<BatchFailure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryEntry {
    pub image_id: String,
    pub rust_percentage: f64,
    pub classification: Classification,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchSummary {
    pub total: usize,
    pub analyzed: usize,
    pub rusty: usize,
    pub clean: usize,
    pub failed: usize,
    pub reports: Vec<SummaryEntry>,
    pub failures: Vec<BatchFailure>,
}

impl BatchOutcome {
    pub fn summary(&self) -> BatchSummary {
        let rusty = self
            .reports
            .iter()
            .filter(|(_, r)| r.classification == Classification::Rusty)
            .count();
        BatchSummary {
            total: self.reports.len() + self.failures.len(),
            analyzed: self.reports.len(),
            rusty,
            clean: self.reports.len() - rusty,
            failed: self.failures.len(),
            reports: self
                .reports
                .iter()
                .map(|(_, r)| SummaryEntry {
                    image_id: r.image_id.clone(),
                    rust_percentage: r.rust_percentage,
                    classification: r.classification,
                })
                .collect(),
            failures: self.failures.clone(),
        }
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into())
}

fn process_one(path: &Path, config: &PipelineConfig, opts: &BatchOptions) -> Result<RustReport> {
    let image = load_rgb(path)?;
    let analysis = analyze(&image, config, &file_name(path))?;
    if let Some(dir) = &opts.out_dir {
        write_artifacts(&analysis, &image, dir, &stem(path), config.emit)?;
    }
    Ok(analysis.report)
}

/// Analyzes every path. Per-image failures are recorded and the batch
/// continues; it fails only when the list is empty or nothing succeeds.
pub fn run_batch(paths: &[PathBuf], config: &PipelineConfig, opts: &BatchOptions) -> Result<BatchOutcome> {
    if paths.is_empty() {
        return Err(Error::EmptyBatch);
    }
    config.validate()?;
    if let Some(dir) = &opts.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::Write {
            path: dir.clone(),
            message: e.to_string(),
        })?;
    }

    let work = || -> Vec<Result<RustReport>> {
        paths
            .par_iter()
            .map(|p| process_one(p, config, opts))
            .collect()
    };
    let results = match opts.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter {
                name: "jobs",
                message: e.to_string(),
            })?
            .install(work),
        None => work(),
    };

    let mut outcome = BatchOutcome {
        reports: Vec::new(),
        failures: Vec::new(),
    };
    for (path, result) in paths.iter().zip(results) {
        match result {
            Ok(report) => outcome.reports.push((path.clone(), report)),
            Err(e) => {
                log::warn!("{}: {e}", path.display());
                outcome.failures.push(BatchFailure {
                    path: path.clone(),
                    error: e.to_string(),
                });
            }
        }
    }
    if outcome.reports.is_empty() {
        return Err(Error::BatchFailed {
            failures: outcome.failures.len(),
        });
    }
    Ok(outcome)
}
