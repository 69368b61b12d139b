use std::io::Write;

use num_complex::Complex64;

use super::parzen::PwDetector;
use crate::error::{self, Result};

/// Rectangular grid of evaluation nodes, inclusive of both edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// Square-cell grid covering the bounding box of `points` plus a
    /// relative `margin` on every side.
    pub fn covering(points: &[Complex64], margin: f64, nx: usize, ny: usize) -> Result<Self> {
        if points.is_empty() {
            return error::input("cannot cover an empty point set");
        }
        let (mut lo, mut hi) = (points[0], points[0]);
        for p in points {
            lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        let pad = margin * (hi.re - lo.re).max(hi.im - lo.im);
        let grid = Self {
            x_min: lo.re - pad,
            x_max: hi.re + pad,
            y_min: lo.im - pad,
            y_max: hi.im + pad,
            nx,
            ny,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 || !(self.x_max > self.x_min) || !(self.y_max > self.y_min) {
            return error::config("grid needs at least 2×2 nodes and a non-empty extent");
        }
        Ok(())
    }

    /// Coordinate of node `(i, j)`.
    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        let fx = i as f64 / (self.nx - 1) as f64;
        let fy = j as f64 / (self.ny - 1) as f64;
        Complex64::new(
            self.x_min + fx * (self.x_max - self.x_min),
            self.y_min + fy * (self.y_max - self.y_min),
        )
    }
}

/// Labels evaluated on a grid, row-major (`j * nx + i`).
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub grid: GridSpec,
    pub labels: Vec<usize>,
}

impl RegionMap {
    pub fn label_at(&self, i: usize, j: usize) -> usize {
        self.labels[j * self.grid.nx + i]
    }

    /// Writes `grid_x,grid_y,label` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "grid_x,grid_y,label")?;
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let z = self.grid.node(i, j);
                writeln!(out, "{:.9e},{:.9e},{}", z.re, z.im, self.label_at(i, j))?;
            }
        }
        Ok(())
    }
}

/// Evaluates an arbitrary decision rule at every grid node.
pub fn rasterize<F: FnMut(Complex64) -> usize>(grid: &GridSpec, mut decide: F) -> Result<RegionMap> {
    grid.validate()?;
    let mut labels = Vec::with_capacity(grid.nx * grid.ny);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            labels.push(decide(grid.node(i, j)));
        }
    }
    Ok(RegionMap { grid: *grid, labels })
}

/// Parzen-window decision regions on `grid`.
pub fn rasterize_regions(det: &PwDetector, grid: &GridSpec) -> Result<RegionMap> {
    rasterize(grid, |z| det.classify(z).0)
}
