//! Starts the calibration API over a directory of images
//! (default: a few generated fixtures).
//!
//! ```text
//! cargo run --example calibration_server -- [image-dir] [addr]
//! curl localhost:8080/api/images
//! ```

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use corroscan::imaging::save_rgb;
use corroscan::service::{serve, CalibState};
use corroscan::synth::rust_fixture;

fn demo_dir() -> corroscan::Result<PathBuf> {
    let dir = std::env::temp_dir().join("corroscan-calibration-demo");
    std::fs::create_dir_all(&dir).ok();
    for seed in 0..4 {
        let fx = rust_fixture(seed);
        save_rgb(&fx.image, dir.join(format!("{}.png", fx.name)))?;
    }
    Ok(dir)
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let dir = match args.next() {
        Some(d) => PathBuf::from(d),
        None => demo_dir()?,
    };
    let addr: SocketAddr = args.next().as_deref().unwrap_or("127.0.0.1:8080").parse()?;
    let state = Arc::new(CalibState::from_dir(&dir)?);
    println!("serving {} images from {}", state.list_images().len(), dir.display());
    serve(state, addr, None).await?;
    Ok(())
}
