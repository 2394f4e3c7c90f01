use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use corroscan::colorfilter::Fusion;
use corroscan::pipeline::{run_batch, collect_inputs, BatchOptions, Emit, PipelineConfig};
use corroscan::service::{serve, CalibState};
use corroscan::Error;

#[derive(Parser)]
#[command(name = "corroscan", version, about = "Rust segmentation for painted metal surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze images or directories of images and write reports.
    Analyze(AnalyzeArgs),
    /// Serve the calibration API (and UI bundle) over a directory of images.
    Calibrate(CalibrateArgs),
}

#[derive(clap::Args)]
struct AnalyzeArgs {
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// JSON config file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    min_pts: Option<usize>,
    #[arg(long)]
    min_area: Option<usize>,
    #[arg(long)]
    rust_threshold_pct: Option<f64>,
    /// color, and, or
    #[arg(long)]
    fusion: Option<Fusion>,
    /// Comma-separated artifacts: mask, overlay, report, premask.
    #[arg(long, default_value = "mask,overlay,report")]
    emit: Emit,
    /// Worker threads for the batch.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(clap::Args)]
struct CalibrateArgs {
    image_dir: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    /// Built UI bundle to serve at `/`.
    #[arg(long)]
    static_dir: Option<PathBuf>,
}

const EXIT_BATCH: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn build_config(args: &AnalyzeArgs) -> Result<PipelineConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = args.sigma {
        cfg.ssr.sigma = Some(s);
    }
    if let Some(e) = args.eps {
        cfg.dbscan.eps = e;
    }
    if let Some(m) = args.min_pts {
        cfg.dbscan.min_pts = m;
    }
    if let Some(a) = args.min_area {
        cfg.min_area = a;
    }
    if let Some(p) = args.rust_threshold_pct {
        cfg.rust_threshold_pct = p;
    }
    if let Some(f) = args.fusion {
        cfg.filter.fusion = f;
    }
    cfg.emit = args.emit;
    cfg.validate()?;
    Ok(cfg)
}

fn analyze(args: AnalyzeArgs) -> ExitCode {
    let config = match build_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let run = || -> Result<_, Error> {
        let inputs = collect_inputs(&args.paths)?;
        let opts = BatchOptions {
            out_dir: Some(args.out_dir.clone()),
            jobs: args.jobs,
        };
        let outcome = run_batch(&inputs, &config, &opts)?;
        let summary = outcome.summary();
        let path = args.out_dir.join("summary.json");
        let body = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
        std::fs::write(&path, body).map_err(|e| Error::Write {
            path,
            message: e.to_string(),
        })?;
        Ok(summary)
    };
    match run() {
        Ok(summary) => {
            for r in &summary.reports {
                println!("{}\t{:.3}%\t{:?}", r.image_id, r.rust_percentage, r.classification);
            }
            for f in &summary.failures {
                eprintln!("failed: {}: {}", f.path.display(), f.error);
            }
            ExitCode::SUCCESS
        }
        Err(Error::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_BATCH)
        }
    }
}

fn calibrate(args: CalibrateArgs) -> ExitCode {
    let state = match CalibState::from_dir(&args.image_dir) {
        Ok(s) => Arc::new(s),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_BATCH);
        }
    };
    log::info!("loaded {} images", state.list_images().len());
    let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
    match rt.block_on(serve(state, args.listen, args.static_dir)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_BATCH)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Analyze(a) => analyze(a),
        Command::Calibrate(c) => calibrate(c),
    }
}
