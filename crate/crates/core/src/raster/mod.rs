//! Pixel approximations of `K(f)`, connected-component labelling of the
//! bounded pixels, and image output.
//!
//! Component statistics are illustrative only: a finite grid cannot resolve
//! total disconnectedness.

mod io;

pub use io::{gray_level, pgm_bytes, read_pgm, write_image, ImageFormat};

use num_complex::Complex64;
use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::FunctionSpec;
use crate::error::{Error, Result};
use crate::orbit::{classify_orbit, OrbitBudget, OrbitVerdict, Status};

pub const MIN_PIXELS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub width_px: usize,
    pub height_px: usize,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, width_px: usize, height_px: usize) -> Result<Self> {
        let w = Window { x_min, x_max, y_min, y_max, width_px, height_px };
        w.validate()?;
        Ok(w)
    }

    /// The square `[-half, half]²` at `px × px`.
    pub fn square(half: f64, px: usize) -> Result<Self> {
        Self::new(-half, half, -half, half, px, px)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::InvalidArgument(format!(
                "window needs x_min < x_max and y_min < y_max, got [{}, {}] × [{}, {}]",
                self.x_min, self.x_max, self.y_min, self.y_max
            )));
        }
        if self.width_px < MIN_PIXELS || self.height_px < MIN_PIXELS {
            return Err(Error::InvalidArgument(format!(
                "window needs at least {MIN_PIXELS} pixels per side, got {}x{}",
                self.width_px, self.height_px
            )));
        }
        Ok(())
    }

    pub fn pixel_width(&self) -> f64 {
        (self.x_max - self.x_min) / self.width_px as f64
    }

    pub fn pixel_height(&self) -> f64 {
        (self.y_max - self.y_min) / self.height_px as f64
    }

    /// Centre of pixel `(i, j)`; row `j = 0` is the top edge.
    pub fn pixel_center(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(
            self.x_min + (i as f64 + 0.5) * self.pixel_width(),
            self.y_max - (j as f64 + 0.5) * self.pixel_height(),
        )
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    Four,
    Eight,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PixelGrid {
    pub window: Window,
    pub budget: OrbitBudget,
    /// Row-major, top row first.
    pub verdicts: Vec<OrbitVerdict>,
    /// Eight-connected component ids, `0` off the bounded set.
    pub labels: Vec<u32>,
}

impl PixelGrid {
    pub fn status(&self, i: usize, j: usize) -> Status {
        self.verdicts[j * self.window.width_px + i].status
    }

    pub fn count(&self, status: Status) -> usize {
        self.verdicts.iter().filter(|v| v.status == status).count()
    }

    pub fn fraction(&self, status: Status) -> f64 {
        self.count(status) as f64 / self.verdicts.len() as f64
    }
}

/// Classifies every pixel centre of `window`, one row per task.
pub fn render_k_set(spec: &FunctionSpec, window: Window, budget: OrbitBudget) -> Result<PixelGrid> {
    window.validate()?;
    budget.validate()?;
    spec.validate()?;
    let rows: Vec<Vec<OrbitVerdict>> = (0..window.height_px)
        .into_par_iter()
        .map(|j| {
            (0..window.width_px)
                .map(|i| classify_orbit(spec, window.pixel_center(i, j), &budget))
                .collect()
        })
        .collect();
    let mut grid = PixelGrid {
        window,
        budget,
        verdicts: rows.concat(),
        labels: Vec::new(),
    };
    grid.labels = label_components(&grid, Connectivity::Eight).labels;
    Ok(grid)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Components {
    pub count: usize,
    /// Pixel counts, largest first.
    pub sizes: Vec<usize>,
    /// Ids `1..=count` numbered in scan order, `0` off the bounded set.
    #[serde(skip)]
    pub labels: Vec<u32>,
}

fn neighbours(conn: Connectivity) -> &'static [(isize, isize)] {
    // Only backward neighbours: each edge is visited once in scan order.
    match conn {
        Connectivity::Four => &[(-1, 0), (0, -1)],
        Connectivity::Eight => &[(-1, 0), (-1, -1), (0, -1), (1, -1)],
    }
}

fn label_mask(mask: &[bool], width: usize, height: usize, conn: Connectivity) -> Components {
    let mut uf = UnionFind::<usize>::new(mask.len());
    for j in 0..height {
        for i in 0..width {
            if !mask[j * width + i] {
                continue;
            }
            for &(di, dj) in neighbours(conn) {
                let (ni, nj) = (i as isize + di, j as isize + dj);
                if ni < 0 || nj < 0 || ni >= width as isize {
                    continue;
                }
                let k = nj as usize * width + ni as usize;
                if mask[k] {
                    uf.union(j * width + i, k);
                }
            }
        }
    }
    let mut ids = vec![0u32; mask.len()];
    let mut labels = vec![0u32; mask.len()];
    let mut sizes = Vec::new();
    for p in 0..mask.len() {
        if !mask[p] {
            continue;
        }
        let root = uf.find_mut(p);
        if ids[root] == 0 {
            sizes.push(0);
            ids[root] = sizes.len() as u32;
        }
        labels[p] = ids[root];
        sizes[ids[root] as usize - 1] += 1;
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    Components {
        count: sizes.len(),
        sizes,
        labels,
    }
}

/// Union-find labelling of the Bounded pixels; Undetermined pixels count as
/// background.
pub fn label_components(grid: &PixelGrid, conn: Connectivity) -> Components {
    let mask: Vec<bool> = grid.verdicts.iter().map(|v| v.status == Status::Bounded).collect();
    label_mask(&mask, grid.window.width_px, grid.window.height_px, conn)
}

/// Number of components that contain a closed disc of plane radius `radius`
/// made entirely of Bounded pixel centres.
pub fn thick_component_count(grid: &PixelGrid, conn: Connectivity, radius: f64) -> usize {
    let comps = label_components(grid, conn);
    let w = &grid.window;
    let (dx, dy) = (w.pixel_width(), w.pixel_height());
    let (ri, rj) = ((radius / dx).ceil() as isize, (radius / dy).ceil() as isize);
    let mut thick = vec![false; comps.count + 1];
    for j in 0..w.height_px as isize {
        for i in 0..w.width_px as isize {
            let label = comps.labels[j as usize * w.width_px + i as usize];
            if label == 0 || thick[label as usize] {
                continue;
            }
            let inside = (-rj..=rj).all(|b| {
                (-ri..=ri).all(|a| {
                    if (a as f64 * dx).hypot(b as f64 * dy) > radius {
                        return true;
                    }
                    let (ni, nj) = (i + a, j + b);
                    ni >= 0
                        && nj >= 0
                        && ni < w.width_px as isize
                        && nj < w.height_px as isize
                        && comps.labels[nj as usize * w.width_px + ni as usize] == label
                })
            });
            thick[label as usize] = inside;
        }
    }
    thick.iter().filter(|&&t| t).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RasterStats {
    pub bounded_fraction: f64,
    pub escaped_fraction: f64,
    pub undetermined_fraction: f64,
    pub component_count_4: usize,
    pub component_count_8: usize,
    pub largest_component_px: usize,
}

pub fn stats(grid: &PixelGrid) -> RasterStats {
    let four = label_components(grid, Connectivity::Four);
    let eight = label_components(grid, Connectivity::Eight);
    RasterStats {
        bounded_fraction: grid.fraction(Status::Bounded),
        escaped_fraction: grid.fraction(Status::Escaped),
        undetermined_fraction: grid.fraction(Status::Undetermined),
        component_count_4: four.count,
        component_count_8: eight.count,
        largest_component_px: eight.sizes.first().copied().unwrap_or(0),
    }
}
