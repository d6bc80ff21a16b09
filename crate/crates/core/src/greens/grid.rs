use crate::{Error, Point3, Result};

/// A box split into `dims[0] × dims[1] × dims[2]` equal cells. Samples live at
/// cell centers; linear index is `(i * ny + j) * nz + l`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub min: Point3,
    pub max: Point3,
    pub dims: [usize; 3],
}

impl GridSpec {
    pub fn new(min: Point3, max: Point3, dims: [usize; 3]) -> Result<Self> {
        for a in 0..3 {
            if !(max[a] > min[a]) || !min[a].is_finite() || !max[a].is_finite() {
                return Err(Error::InvalidInput(format!(
                    "grid box has non-positive extent along axis {a}"
                )));
            }
            if dims[a] == 0 {
                return Err(Error::InvalidInput("grid dims must be positive".into()));
            }
        }
        Ok(Self { min, max, dims })
    }

    /// Cube `[center - half, center + half]³` with `n` cells per axis.
    pub fn cube(center: Point3, half: f64, n: usize) -> Result<Self> {
        let h = Point3::repeat(half);
        Self::new(center - h, center + h, [n; 3])
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| (self.max[a] - self.min[a]) / self.dims[a] as f64)
    }

    pub fn min_spacing(&self) -> f64 {
        let h = self.spacing();
        h[0].min(h[1]).min(h[2])
    }

    pub fn max_spacing(&self) -> f64 {
        let h = self.spacing();
        h[0].max(h[1]).max(h[2])
    }

    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h[0] * h[1] * h[2]
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|a| self.max[a] - self.min[a]).product()
    }

    pub fn diameter(&self) -> f64 {
        (self.max - self.min).norm()
    }

    pub fn index(&self, ijk: [usize; 3]) -> usize {
        (ijk[0] * self.dims[1] + ijk[1]) * self.dims[2] + ijk[2]
    }

    pub fn ijk(&self, index: usize) -> [usize; 3] {
        let l = index % self.dims[2];
        let rest = index / self.dims[2];
        [rest / self.dims[1], rest % self.dims[1], l]
    }

    pub fn center_of(&self, ijk: [usize; 3]) -> Point3 {
        let h = self.spacing();
        Point3::new(
            self.min.x + (ijk[0] as f64 + 0.5) * h[0],
            self.min.y + (ijk[1] as f64 + 0.5) * h[1],
            self.min.z + (ijk[2] as f64 + 0.5) * h[2],
        )
    }

    pub fn center(&self, index: usize) -> Point3 {
        self.center_of(self.ijk(index))
    }

    pub fn centers(&self) -> Vec<Point3> {
        (0..self.len()).map(|i| self.center(i)).collect()
    }

    /// Closed box test.
    pub fn contains(&self, p: &Point3) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    /// Cell containing `p` (points on the upper faces belong to the last
    /// cell), or `None` outside the closed box.
    pub fn cell_of(&self, p: &Point3) -> Option<[usize; 3]> {
        if !self.contains(p) {
            return None;
        }
        let h = self.spacing();
        Some([0, 1, 2].map(|a| {
            let i = ((p[a] - self.min[a]) / h[a]).floor() as isize;
            i.clamp(0, self.dims[a] as isize - 1) as usize
        }))
    }

    /// Euclidean distance from `p` to the box (zero inside).
    pub fn distance_to(&self, p: &Point3) -> f64 {
        let mut s = 0.0;
        for a in 0..3 {
            let d = (self.min[a] - p[a]).max(p[a] - self.max[a]).max(0.0);
            s += d * d;
        }
        s.sqrt()
    }

    /// Inside the box spanned by the cell centers.
    pub fn within_node_hull(&self, p: &Point3) -> bool {
        let h = self.spacing();
        (0..3).all(|a| p[a] >= self.min[a] + 0.5 * h[a] && p[a] <= self.max[a] - 0.5 * h[a])
    }

    /// Same box, `factor` times more cells per axis.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            min: self.min,
            max: self.max,
            dims: self.dims.map(|d| d * factor.max(1)),
        }
    }

    /// Trilinear interpolation of cell-center samples, clamped to the nearest
    /// sample outside the node hull.
    pub fn interpolate(&self, values: &[f64], p: &Point3) -> f64 {
        let h = self.spacing();
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let n = self.dims[a];
            let t = ((p[a] - self.min[a]) / h[a] - 0.5).clamp(0.0, (n - 1) as f64);
            let i = (t.floor() as usize).min(n.saturating_sub(2));
            base[a] = i;
            frac[a] = if n == 1 { 0.0 } else { t - i as f64 };
        }
        let mut acc = 0.0;
        for corner in 0..8 {
            let mut w = 1.0;
            let mut ijk = base;
            for a in 0..3 {
                let up = (corner >> a) & 1 == 1;
                if up {
                    if self.dims[a] == 1 {
                        w = 0.0;
                        continue;
                    }
                    ijk[a] += 1;
                    w *= frac[a];
                } else {
                    w *= 1.0 - frac[a];
                }
            }
            if w != 0.0 {
                acc += w * values[self.index(ijk)];
            }
        }
        acc
    }
}
