use super::PointSet;

/// Uniform grid over pixel coordinates, stored CSR-style: the indices of
/// the points in cell `c` are `entries[starts[c]..starts[c + 1]]`, in
/// ascending point order.
#[derive(Debug, Clone)]
pub struct GridIndex {
    eps: f64,
    cell: f64,
    cols: usize,
    rows: usize,
    starts: Vec<u32>,
    entries: Vec<u32>,
}

impl GridIndex {
    /// Cells are `eps` wide (never narrower than one pixel), so every
    /// neighbour within `eps` lies in the 3×3 block around a point's cell.
    pub fn build(set: &PointSet, eps: f64) -> Self {
        let cell = eps.max(1.0);
        let cols = ((set.width().saturating_sub(1)) as f64 / cell).floor() as usize + 1;
        let rows = ((set.height().saturating_sub(1)) as f64 / cell).floor() as usize + 1;
        let cell_of = |(x, y): (u32, u32)| {
            let cx = (x as f64 / cell).floor() as usize;
            let cy = (y as f64 / cell).floor() as usize;
            cy * cols + cx
        };

        let mut counts = vec![0u32; cols * rows + 1];
        for &p in set.points() {
            counts[cell_of(p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut entries = vec![0u32; set.len()];
        for (i, &p) in set.points().iter().enumerate() {
            let c = cell_of(p);
            entries[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        Self {
            eps,
            cell,
            cols,
            rows,
            starts,
            entries,
        }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Appends every point within `eps` of `set[i]` (itself included) to `out`.
    pub(crate) fn neighbors_into(&self, set: &PointSet, i: usize, out: &mut Vec<usize>) {
        let (px, py) = set.points()[i];
        let cx = (px as f64 / self.cell).floor() as usize;
        let cy = (py as f64 / self.cell).floor() as usize;
        let eps2 = self.eps * self.eps;
        for ny in cy.saturating_sub(1)..=(cy + 1).min(self.rows - 1) {
            for nx in cx.saturating_sub(1)..=(cx + 1).min(self.cols - 1) {
                let c = ny * self.cols + nx;
                for &j in &self.entries[self.starts[c] as usize..self.starts[c + 1] as usize] {
                    let (qx, qy) = set.points()[j as usize];
                    let dx = f64::from(px) - f64::from(qx);
                    let dy = f64::from(py) - f64::from(qy);
                    if dx * dx + dy * dy <= eps2 {
                        out.push(j as usize);
                    }
                }
            }
        }
    }
}
