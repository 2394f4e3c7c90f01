//! # corroscan
//!
//! Segments rust on painted metal surfaces and reports the rusty share of
//! each image.
//!
//! The pipeline runs in a fixed order:
//!
//! 1. [`colorspace`]: RGB to HSV, then the saturation plane.
//! 2. [`retinex`]: single-scale Retinex on the saturation plane, then a
//!    linear stretch to `[0, 1]`.
//! 3. [`threshold`]: between-class-variance threshold with one refinement
//!    pass inside the tighter class.
//! 4. [`colorfilter`]: calibrated HSV ranges, fused with the threshold mask.
//! 5. [`dbscan`]: spatial clustering that drops noise and small clusters.
//! 6. [`pipeline`]: percentage, RUSTY/CLEAN verdict, reports and batches.
//!
//! [`service`] exposes the same stages over HTTP for interactive range
//! calibration, and [`synth`] builds seeded test scenes with ground truth.
//!
//! ```no_run
//! use corroscan::{imaging, pipeline};
//!
//! let image = imaging::load_rgb("panel.jpg")?;
//! let analysis = pipeline::analyze(&image, &pipeline::PipelineConfig::default(), "panel.jpg")?;
//! println!("{:.2}% rust", analysis.report.rust_percentage);
//! # Ok::<(), corroscan::Error>(())
//! ```

pub mod colorfilter;
pub mod colorspace;
pub mod dbscan;
pub mod error;
pub mod imaging;
pub mod pipeline;
pub mod retinex;
pub mod service;
pub mod synth;
pub mod threshold;

pub use error::{Error, Result};
