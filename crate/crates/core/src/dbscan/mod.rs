//! DBSCAN over the pixel coordinates of a mask.
//!
//! Neighbourhoods are Euclidean, include the query point, and count toward
//! `min_pts`. Points are visited in row-major order and a border point joins
//! the first cluster whose expansion reaches it, so results are
//! deterministic for a given mask.

mod grid;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use grid::GridIndex;

use crate::error::{Error, Result};
use crate::imaging::BinaryMask;

/// Coordinates of the true pixels of a `width × height` mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    width: usize,
    height: usize,
    points: Vec<(u32, u32)>,
}

impl PointSet {
    pub fn new(width: usize, height: usize, points: Vec<(u32, u32)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(points.len());
        for &(x, y) in &points {
            if x as usize >= width || y as usize >= height {
                return Err(Error::PointOutOfBounds {
                    x,
                    y,
                    width,
                    height,
                });
            }
            if !seen.insert((x, y)) {
                return Err(Error::InvalidParameter {
                    name: "points",
                    message: format!("duplicate point ({x}, {y})"),
                });
            }
        }
        Ok(Self {
            width,
            height,
            points,
        })
    }

    /// True pixels in row-major scan order.
    pub fn from_mask(mask: &BinaryMask) -> Self {
        let w = mask.width();
        let points = mask
            .bits()
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| ((i % w) as u32, (i / w) as u32))
            .collect();
        Self {
            width: w,
            height: mask.height(),
            points,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn points(&self) -> &[(u32, u32)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbscanParams {
    /// Neighbourhood radius in pixels.
    pub eps: f64,
    /// Neighbours (self included) needed for a core point.
    pub min_pts: usize,
}

impl Default for DbscanParams {
    fn default() -> Self {
        Self { eps: 3.0, min_pts: 9 }
    }
}

impl DbscanParams {
    pub fn new(eps: f64, min_pts: usize) -> Result<Self> {
        let p = Self { eps, min_pts };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "eps",
                message: format!("must be positive, got {}", self.eps),
            });
        }
        if self.min_pts == 0 {
            return Err(Error::InvalidParameter {
                name: "min_pts",
                message: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Noise,
    Cluster(u32),
}

impl Label {
    pub fn cluster(self) -> Option<u32> {
        match self {
            Label::Cluster(id) => Some(id),
            Label::Noise => None,
        }
    }
}

/// Inclusive pixel bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterInfo {
    pub id: u32,
    pub pixel_count: usize,
    pub bbox: BoundingBox,
    /// Mean `(x, y)` of member pixels.
    pub centroid: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    width: usize,
    height: usize,
    points: Vec<(u32, u32)>,
    labels: Vec<Label>,
    clusters: Vec<ClusterInfo>,
}

impl ClusterSet {
    fn from_labels(set: &PointSet, labels: Vec<Label>) -> Self {
        let clusters = summarize(&set.points, &labels);
        Self {
            width: set.width,
            height: set.height,
            points: set.points.clone(),
            labels,
            clusters,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn points(&self) -> &[(u32, u32)] {
        &self.points
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn clusters(&self) -> &[ClusterInfo] {
        &self.clusters
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|l| **l == Label::Noise).count()
    }

    /// Total pixels across all clusters.
    pub fn retained_count(&self) -> usize {
        self.clusters.iter().map(|c| c.pixel_count).sum()
    }

    pub fn retained_points(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.points
            .iter()
            .zip(&self.labels)
            .filter(|(_, l)| **l != Label::Noise)
            .map(|(&p, _)| p)
    }
}

fn summarize(points: &[(u32, u32)], labels: &[Label]) -> Vec<ClusterInfo> {
    let k = labels
        .iter()
        .filter_map(|l| l.cluster())
        .max()
        .map_or(0, |m| m as usize + 1);
    let mut acc: Vec<(usize, BoundingBox, f64, f64)> = vec![
        (
            0,
            BoundingBox {
                x_min: u32::MAX,
                y_min: u32::MAX,
                x_max: 0,
                y_max: 0,
            },
            0.0,
            0.0
        );
        k
    ];
    for (&(x, y), label) in points.iter().zip(labels) {
        if let Label::Cluster(id) = label {
            let (n, bb, sx, sy) = &mut acc[*id as usize];
            *n += 1;
            bb.x_min = bb.x_min.min(x);
            bb.y_min = bb.y_min.min(y);
            bb.x_max = bb.x_max.max(x);
            bb.y_max = bb.y_max.max(y);
            *sx += f64::from(x);
            *sy += f64::from(y);
        }
    }
    acc.into_iter()
        .enumerate()
        .map(|(id, (n, bbox, sx, sy))| ClusterInfo {
            id: id as u32,
            pixel_count: n,
            bbox,
            centroid: (sx / n as f64, sy / n as f64),
        })
        .collect()
}

/// Indices of all points within `eps` of point `i`, itself included, in
/// ascending order.
pub fn region_query(set: &PointSet, index: &GridIndex, i: usize) -> Vec<usize> {
    let mut out = Vec::new();
    index.neighbors_into(set, i, &mut out);
    out.sort_unstable();
    out
}

pub fn dbscan(set: &PointSet, params: &DbscanParams) -> ClusterSet {
    let n = set.len();
    let index = GridIndex::build(set, params.eps);

    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Unvisited,
        Noise,
        Member(u32),
    }

    let mut state = vec![State::Unvisited; n];
    let mut next_id = 0u32;
    let mut neighbours = Vec::new();
    let mut frontier = Vec::new();

    for p in 0..n {
        if state[p] != State::Unvisited {
            continue;
        }
        neighbours.clear();
        index.neighbors_into(set, p, &mut neighbours);
        if neighbours.len() < params.min_pts {
            state[p] = State::Noise;
            continue;
        }
        let id = next_id;
        next_id += 1;
        state[p] = State::Member(id);
        frontier.clear();
        for &q in &neighbours {
            match state[q] {
                State::Noise => state[q] = State::Member(id),
                State::Unvisited => {
                    state[q] = State::Member(id);
                    frontier.push(q);
                }
                State::Member(_) => {}
            }
        }
        while let Some(q) = frontier.pop() {
            neighbours.clear();
            index.neighbors_into(set, q, &mut neighbours);
            if neighbours.len() < params.min_pts {
                continue;
            }
            for &r in &neighbours {
                match state[r] {
                    State::Noise => state[r] = State::Member(id),
                    State::Unvisited => {
                        state[r] = State::Member(id);
                        frontier.push(r);
                    }
                    State::Member(_) => {}
                }
            }
        }
    }

    let labels = state
        .into_iter()
        .map(|s| match s {
            State::Member(id) => Label::Cluster(id),
            _ => Label::Noise,
        })
        .collect();
    ClusterSet::from_labels(set, labels)
}

/// Demotes clusters smaller than `min_area` to noise and renumbers the
/// survivors `0..k` in their original order.
pub fn filter_clusters(cs: &ClusterSet, min_area: usize) -> ClusterSet {
    let mut remap = vec![None; cs.clusters.len()];
    let mut next = 0u32;
    for c in &cs.clusters {
        if c.pixel_count >= min_area {
            remap[c.id as usize] = Some(next);
            next += 1;
        }
    }
    let labels = cs
        .labels
        .iter()
        .map(|l| match l {
            Label::Cluster(id) => remap[*id as usize].map_or(Label::Noise, Label::Cluster),
            Label::Noise => Label::Noise,
        })
        .collect::<Vec<_>>();
    let clusters = cs
        .clusters
        .iter()
        .filter_map(|c| {
            remap[c.id as usize].map(|id| ClusterInfo {
                id,
                ..c.clone()
            })
        })
        .collect();
    ClusterSet {
        width: cs.width,
        height: cs.height,
        points: cs.points.clone(),
        labels,
        clusters,
    }
}

/// Mask of the retained (non-noise) points.
pub fn cluster_mask(cs: &ClusterSet, width: usize, height: usize) -> Result<BinaryMask> {
    let mut mask = BinaryMask::filled(width, height, false)?;
    for (x, y) in cs.retained_points() {
        if x as usize >= width || y as usize >= height {
            return Err(Error::PointOutOfBounds {
                x,
                y,
                width,
                height,
            });
        }
        mask.set(x as usize, y as usize, true);
    }
    Ok(mask)
}

/// 2×2 logical-OR pooling.
pub fn pool_mask(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let (pw, ph) = (w.div_ceil(2), h.div_ceil(2));
    BinaryMask::from_fn(pw, ph, |x, y| {
        let mut any = false;
        for dy in 0..2 {
            for dx in 0..2 {
                let (sx, sy) = (2 * x + dx, 2 * y + dy);
                any |= sx < w && sy < h && mask.get(sx, sy);
            }
        }
        any
    })
    .expect("pooled dimensions are non-zero")
}

/// Clusters the true pixels of `mask`.
///
/// When `decimate_above` is set and the mask holds more true pixels than
/// that, clustering runs on the 2×2 OR-pooled mask with `eps` halved, and
/// every full-resolution pixel inherits the label of its pooled cell.
/// Cluster statistics are always reported at full resolution.
pub fn dbscan_mask(
    mask: &BinaryMask,
    params: &DbscanParams,
    decimate_above: Option<usize>,
) -> ClusterSet {
    let full = PointSet::from_mask(mask);
    match decimate_above {
        Some(limit) if full.len() > limit => {
            let pooled = pool_mask(mask);
            let coarse = dbscan(
                &PointSet::from_mask(&pooled),
                &DbscanParams {
                    eps: params.eps / 2.0,
                    min_pts: params.min_pts,
                },
            );
            let pw = pooled.width();
            let mut cell_label = vec![Label::Noise; pw * pooled.height()];
            for (&(x, y), &l) in coarse.points.iter().zip(&coarse.labels) {
                cell_label[y as usize * pw + x as usize] = l;
            }
            let labels = full
                .points
                .iter()
                .map(|&(x, y)| cell_label[(y / 2) as usize * pw + (x / 2) as usize])
                .collect();
            ClusterSet::from_labels(&full, labels)
        }
        _ => dbscan(&full, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(points: &[(u32, u32)]) -> PointSet {
        PointSet::new(64, 64, points.to_vec()).unwrap()
    }

    fn brute_neighbours(set: &PointSet, i: usize, eps: f64) -> Vec<usize> {
        let (px, py) = set.points()[i];
        (0..set.len())
            .filter(|&j| {
                let (qx, qy) = set.points()[j];
                let dx = px as f64 - qx as f64;
                let dy = py as f64 - qy as f64;
                dx * dx + dy * dy <= eps * eps
            })
            .collect()
    }

    /// Textbook DBSCAN with a linear neighbour scan and a FIFO seed list.
    fn naive_dbscan(set: &PointSet, eps: f64, min_pts: usize) -> Vec<Option<u32>> {
        const UNDEF: i64 = -2;
        const NOISE: i64 = -1;
        let n = set.len();
        let mut label = vec![UNDEF; n];
        let mut c = 0i64;
        for p in 0..n {
            if label[p] != UNDEF {
                continue;
            }
            let nb = brute_neighbours(set, p, eps);
            if nb.len() < min_pts {
                label[p] = NOISE;
                continue;
            }
            label[p] = c;
            let mut seeds: std::collections::VecDeque<usize> = nb.into_iter().filter(|&q| q != p).collect();
            while let Some(q) = seeds.pop_front() {
                if label[q] == NOISE {
                    label[q] = c;
                }
                if label[q] != UNDEF {
                    continue;
                }
                label[q] = c;
                let nq = brute_neighbours(set, q, eps);
                if nq.len() >= min_pts {
                    seeds.extend(nq);
                }
            }
            c += 1;
        }
        label.into_iter().map(|l| (l >= 0).then_some(l as u32)).collect()
    }

    fn random_set(rng: &mut ChaCha8Rng, n: usize, side: u32) -> PointSet {
        let mut seen = HashSet::new();
        let mut pts = Vec::new();
        // Blobs plus uniform scatter.
        let centers: Vec<(i64, i64)> = (0..4)
            .map(|_| (rng.random_range(0..side as i64), rng.random_range(0..side as i64)))
            .collect();
        while pts.len() < n {
            let (x, y) = if rng.random_bool(0.7) {
                let (cx, cy) = centers[rng.random_range(0..centers.len())];
                (cx + rng.random_range(-6..=6), cy + rng.random_range(-6..=6))
            } else {
                (rng.random_range(0..side as i64), rng.random_range(0..side as i64))
            };
            if (0..side as i64).contains(&x) && (0..side as i64).contains(&y) && seen.insert((x, y)) {
                pts.push((x as u32, y as u32));
            }
        }
        // Row-major order, as produced from a mask.
        pts.sort_by_key(|&(x, y)| (y, x));
        PointSet::new(side as usize, side as usize, pts).unwrap()
    }

    #[test]
    fn region_query_examples() {
        let s = set(&[(5, 5)]);
        let idx = GridIndex::build(&s, 2.0);
        assert_eq!(region_query(&s, &idx, 0), vec![0]);

        let s = set(&[(0, 0), (0, 1)]);
        let idx = GridIndex::build(&s, 1.0);
        assert_eq!(region_query(&s, &idx, 0), vec![0, 1]);
        assert_eq!(region_query(&s, &idx, 1), vec![0, 1]);
    }

    #[test]
    fn region_query_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for eps in [0.5, 1.0, 1.5, 2.9, 4.0, 11.0] {
            let s = random_set(&mut rng, 300, 80);
            let idx = GridIndex::build(&s, eps);
            for i in 0..s.len() {
                assert_eq!(region_query(&s, &idx, i), brute_neighbours(&s, i, eps));
            }
        }
    }

    #[test]
    fn small_examples() {
        let empty = dbscan(&set(&[]), &DbscanParams::new(1.5, 3).unwrap());
        assert!(empty.clusters().is_empty());
        assert_eq!(empty.noise_count(), 0);

        let params = DbscanParams::new(1.5, 3).unwrap();
        let tri = dbscan(&set(&[(0, 0), (0, 1), (1, 0)]), &params);
        assert_eq!(tri.clusters().len(), 1);
        assert_eq!(tri.clusters()[0].pixel_count, 3);

        let with_outlier = dbscan(&set(&[(0, 0), (0, 1), (1, 0), (10, 10)]), &params);
        assert_eq!(&with_outlier.labels()[..3], tri.labels());
        assert_eq!(with_outlier.labels()[3], Label::Noise);
        let c = &with_outlier.clusters()[0];
        assert_eq!(
            c.bbox,
            BoundingBox {
                x_min: 0,
                y_min: 0,
                x_max: 1,
                y_max: 1
            }
        );
        assert_eq!(c.centroid, (1.0 / 3.0, 1.0 / 3.0));
    }

    #[test]
    fn border_point_joins_first_cluster() {
        // Two dense 3-point columns; (3, 1) is in reach of both but is not core.
        let pts = [(1, 0), (1, 1), (1, 2), (3, 1), (5, 0), (5, 1), (5, 2)];
        let mut sorted = pts.to_vec();
        sorted.sort_by_key(|&(x, y)| (y, x));
        let s = set(&sorted);
        let params = DbscanParams::new(2.0, 4).unwrap();
        let cs = dbscan(&s, &params);
        let naive = naive_dbscan(&s, 2.0, 4);
        assert_eq!(cs.labels().iter().map(|l| l.cluster()).collect::<Vec<_>>(), naive);
        let border = sorted.iter().position(|&p| p == (3, 1)).unwrap();
        assert_eq!(cs.labels()[border], Label::Cluster(0));
    }

    #[test]
    fn matches_naive_reference() {
        let combos = [(1.0, 2), (1.5, 3), (2.0, 4), (3.0, 9), (4.5, 6), (6.0, 12)];
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_set(&mut rng, 300, 100);
            for &(eps, min_pts) in &combos {
                let cs = dbscan(&s, &DbscanParams::new(eps, min_pts).unwrap());
                let got: Vec<_> = cs.labels().iter().map(|l| l.cluster()).collect();
                assert_eq!(got, naive_dbscan(&s, eps, min_pts), "seed {seed} eps {eps} min_pts {min_pts}");
            }
        }
    }

    #[test]
    fn core_and_noise_sets_are_order_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let s = random_set(&mut rng, 300, 90);
        let (eps, min_pts) = (3.0, 6);
        let core: HashSet<(u32, u32)> = (0..s.len())
            .filter(|&i| brute_neighbours(&s, i, eps).len() >= min_pts)
            .map(|i| s.points()[i])
            .collect();
        let noise_closed_form: HashSet<(u32, u32)> = (0..s.len())
            .filter(|&i| {
                let p = s.points()[i];
                !core.contains(&p) && brute_neighbours(&s, i, eps).iter().all(|&j| !core.contains(&s.points()[j]))
            })
            .map(|i| s.points()[i])
            .collect();
        for _ in 0..5 {
            let mut pts = s.points().to_vec();
            pts.shuffle(&mut rng);
            let shuffled = PointSet::new(s.width(), s.height(), pts).unwrap();
            let cs = dbscan(&shuffled, &DbscanParams::new(eps, min_pts).unwrap());
            let noise: HashSet<_> = cs
                .points()
                .iter()
                .zip(cs.labels())
                .filter(|(_, l)| **l == Label::Noise)
                .map(|(&p, _)| p)
                .collect();
            assert_eq!(noise, noise_closed_form);
            let idx = GridIndex::build(&shuffled, eps);
            let got_core: HashSet<_> = (0..shuffled.len())
                .filter(|&i| region_query(&shuffled, &idx, i).len() >= min_pts)
                .map(|i| shuffled.points()[i])
                .collect();
            assert_eq!(got_core, core);
        }
    }

    #[test]
    fn every_cluster_has_a_core_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = random_set(&mut rng, 300, 70);
        let (eps, min_pts) = (2.5, 7);
        let cs = dbscan(&s, &DbscanParams::new(eps, min_pts).unwrap());
        assert_eq!(cs.retained_count() + cs.noise_count(), s.len());
        for c in cs.clusters() {
            assert!(c.pixel_count >= min_pts.min(s.len()));
            let has_core = (0..s.len()).any(|i| {
                cs.labels()[i] == Label::Cluster(c.id) && brute_neighbours(&s, i, eps).len() >= min_pts
            });
            assert!(has_core);
        }
    }

    #[test]
    fn filtering_by_area() {
        let mut mask = BinaryMask::filled(40, 40, false).unwrap();
        for y in 0..1 {
            for x in 0..5 {
                mask.set(x, y, true);
            }
        }
        for y in 20..25 {
            for x in 20..30 {
                mask.set(x, y, true);
            }
        }
        let cs = dbscan(&PointSet::from_mask(&mask), &DbscanParams::new(1.5, 2).unwrap());
        let mut sizes: Vec<_> = cs.clusters().iter().map(|c| c.pixel_count).collect();
        sizes.sort();
        assert_eq!(sizes, vec![5, 50]);

        assert_eq!(filter_clusters(&cs, 0), cs);
        let none = filter_clusters(&cs, 51);
        assert!(none.clusters().is_empty());
        assert_eq!(none.noise_count(), 55);

        let big = filter_clusters(&cs, 10);
        assert_eq!(big.clusters().len(), 1);
        assert_eq!(big.clusters()[0].id, 0);
        assert_eq!(big.clusters()[0].pixel_count, 50);
        let m = cluster_mask(&big, 40, 40).unwrap();
        assert_eq!(m.count(), 50);
        assert!(m.get(20, 20) && !m.get(0, 0));
    }

    #[test]
    fn cluster_mask_cases() {
        let mask = BinaryMask::from_fn(12, 12, |x, y| (x / 4 + y / 4) % 2 == 0).unwrap();
        let keep_all = dbscan(&PointSet::from_mask(&mask), &DbscanParams::new(1.0, 1).unwrap());
        assert_eq!(cluster_mask(&keep_all, 12, 12).unwrap(), mask);

        let all_noise = dbscan(&PointSet::from_mask(&mask), &DbscanParams::new(1.0, 100).unwrap());
        assert_eq!(cluster_mask(&all_noise, 12, 12).unwrap().count(), 0);

        let some = dbscan(&PointSet::from_mask(&mask), &DbscanParams::new(1.0, 5).unwrap());
        assert_eq!(cluster_mask(&some, 12, 12).unwrap().count(), some.retained_count());

        assert!(matches!(
            cluster_mask(&keep_all, 6, 6),
            Err(Error::PointOutOfBounds { .. })
        ));
    }

    #[test]
    fn point_set_validation() {
        assert!(PointSet::new(4, 4, vec![(1, 1), (1, 1)]).is_err());
        assert!(PointSet::new(4, 4, vec![(4, 0)]).is_err());
        assert!(DbscanParams::new(0.0, 3).is_err());
        assert!(DbscanParams::new(1.0, 0).is_err());
    }

    #[test]
    fn decimation_keeps_full_resolution_accounting() {
        let mask = BinaryMask::from_fn(64, 48, |x, y| {
            (10..40).contains(&x) && (5..30).contains(&y) || (x, y) == (60, 45)
        })
        .unwrap();
        let params = DbscanParams::new(3.0, 5).unwrap();
        let cs = dbscan_mask(&mask, &params, Some(10));
        assert_eq!(cs.points().len(), mask.count());
        assert_eq!(cs.clusters().len(), 1);
        assert_eq!(cs.clusters()[0].pixel_count, 30 * 25);
        assert_eq!(cs.noise_count(), 1);
        assert_eq!(dbscan_mask(&mask, &params, None), dbscan(&PointSet::from_mask(&mask), &params));
    }
}
