//! Clusters a mask made of two solid blobs and scattered single pixels;
//! the scatter comes back as noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use corroscan::dbscan::{cluster_mask, dbscan, filter_clusters, DbscanParams, PointSet};
use corroscan::imaging::BinaryMask;

pub fn run_example() -> corroscan::Result<BinaryMask> {
    let mut mask = BinaryMask::from_fn(128, 96, |x, y| {
        let d1 = (x as f64 - 30.0).hypot(y as f64 - 30.0);
        let d2 = (x as f64 - 90.0).hypot(y as f64 - 60.0);
        d1 < 14.0 || d2 < 9.0
    })?;
    let blobs = mask.count();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..120 {
        mask.set(rng.random_range(0..128), rng.random_range(0..96), true);
    }

    let set = PointSet::from_mask(&mask);
    let clusters = dbscan(&set, &DbscanParams::default());
    let kept = filter_clusters(&clusters, 64);
    println!("{} candidate pixels ({blobs} in blobs)", set.len());
    println!("{} clusters, {} noise", clusters.clusters().len(), clusters.noise_count());
    for c in kept.clusters() {
        println!("  cluster {}: {} px, centroid ({:.1}, {:.1})", c.id, c.pixel_count, c.centroid.0, c.centroid.1);
    }
    cluster_mask(&kept, mask.width(), mask.height())
}

fn main() -> corroscan::Result<()> {
    run_example().map(|_| ())
}
