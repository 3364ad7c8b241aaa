//! Contrast-limited adaptive histogram equalization.
//!
//! The image is cut into a `grid_cols x grid_rows` array of tiles; each tile
//! gets a clipped-histogram equalization lookup table. A pixel is then mapped
//! through the tables of the tiles whose centers surround it:
//!
//! - between four centers (inner quadrants): bilinear blend of four tables;
//! - outside the outermost center row or column (outer quadrants of border
//!   tiles): linear blend of the two tables along the free axis;
//! - outside both (the outermost quadrant of a corner tile): that tile's
//!   table alone.
//!
//! Tile centers sit on half-pixel positions, so all distances are computed
//! in doubled coordinates and the blend is evaluated exactly in integers.
//! The result does not depend on floating-point evaluation order.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, ImageBuffer, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClaheConfig {
    pub grid_cols: usize,
    pub grid_rows: usize,
    /// Bin cap as a multiple of the uniform bin height `n_pixels / n_bins`.
    pub clip_limit: f64,
    pub n_bins: usize,
}

impl Default for ClaheConfig {
    fn default() -> Self {
        Self { grid_cols: 8, grid_rows: 8, clip_limit: 2.0, n_bins: 256 }
    }
}

impl ClaheConfig {
    pub fn with_grid(cols: usize, rows: usize) -> Self {
        Self { grid_cols: cols, grid_rows: rows, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_cols == 0 || self.grid_rows == 0 {
            return Err(Error::Config(format!(
                "clahe grid {}x{} must be at least 1x1",
                self.grid_cols, self.grid_rows
            )));
        }
        if !(self.clip_limit > 0.0 && self.clip_limit.is_finite()) {
            return Err(Error::Config(format!("clip limit {} must be > 0", self.clip_limit)));
        }
        if !(2..=256).contains(&self.n_bins) {
            return Err(Error::Config(format!("{} bins (need 2..=256)", self.n_bins)));
        }
        Ok(())
    }

    /// Rejects images with fewer pixels than tiles along either axis.
    pub fn check_image(&self, width: usize, height: usize) -> Result<()> {
        self.validate()?;
        if width < self.grid_cols || height < self.grid_rows {
            return Err(Error::ImageSmallerThanGrid {
                width,
                height,
                cols: self.grid_cols,
                rows: self.grid_rows,
            });
        }
        Ok(())
    }
}

/// Position of a tile in the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegionClass {
    /// Touches two image edges.
    Corner,
    /// Touches one image edge.
    Border,
    /// Surrounded by eight neighbors.
    Inner,
}

/// How many tables contribute to one output pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlendKind {
    Single,
    TwoWay,
    FourWay,
}

/// Caps every bin at `L = max(1, round(clip_limit * n_pixels / n_bins))`
/// and hands the excess back uniformly; the `excess mod n_bins` leftover
/// counts go one each to the lowest bins. The total is conserved.
pub fn clip_histogram(hist: &[u32], clip_limit: f64, n_pixels: u32) -> Vec<u32> {
    let n_bins = hist.len();
    if n_bins == 0 {
        return Vec::new();
    }
    let limit = libm::round(clip_limit * n_pixels as f64 / n_bins as f64).max(1.0);
    let limit = if limit >= u32::MAX as f64 { u32::MAX } else { limit as u32 };
    let mut excess: u64 = 0;
    let mut out: Vec<u32> = hist
        .iter()
        .map(|&c| {
            if c > limit {
                excess += (c - limit) as u64;
                limit
            } else {
                c
            }
        })
        .collect();
    let share = (excess / n_bins as u64) as u32;
    let remainder = (excess % n_bins as u64) as usize;
    for (i, bin) in out.iter_mut().enumerate() {
        *bin += share + u32::from(i < remainder);
    }
    out
}

/// Per-axis tile layout: `n` tiles of `len / n` pixels, the last one
/// absorbing the remainder.
#[derive(Clone, Debug, PartialEq)]
struct AxisLayout {
    /// `n + 1` tile boundaries.
    bounds: Vec<usize>,
    /// Per-pixel interpolation terms.
    terms: Vec<AxisTerm>,
}

/// Bracketing tile indices and doubled distances to their centers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct AxisTerm {
    lo: u32,
    hi: u32,
    /// Doubled distance from the pixel to the `lo` center.
    d_lo: u32,
    /// Doubled distance from the pixel to the `hi` center.
    d_hi: u32,
}

impl AxisLayout {
    fn new(len: usize, tiles: usize) -> Self {
        let base = len / tiles;
        let mut bounds: Vec<usize> = (0..tiles).map(|i| i * base).collect();
        bounds.push(len);
        // Doubled center of tile i: 2 * start + (extent - 1).
        let centers: Vec<usize> = bounds.windows(2).map(|w| 2 * w[0] + (w[1] - w[0]) - 1).collect();
        let last = tiles - 1;
        let terms = (0..len)
            .map(|p| {
                let p2 = 2 * p;
                if p2 <= centers[0] {
                    AxisTerm { lo: 0, hi: 0, d_lo: 0, d_hi: 2 }
                } else if p2 >= centers[last] {
                    AxisTerm { lo: last as u32, hi: last as u32, d_lo: 0, d_hi: 2 }
                } else {
                    // First center strictly right of p; 1 <= hi <= last here.
                    let hi = centers.partition_point(|&c| c <= p2);
                    let lo = hi - 1;
                    AxisTerm {
                        lo: lo as u32,
                        hi: hi as u32,
                        d_lo: (p2 - centers[lo]) as u32,
                        d_hi: (centers[hi] - p2) as u32,
                    }
                }
            })
            .collect();
        Self { bounds, terms }
    }

    fn tiles(&self) -> usize {
        self.bounds.len() - 1
    }
}

/// Bilinear blend terms for one pixel.
///
/// `x`/`y` are the distances from the pixel to the left/right bracketing
/// centers and `r`/`s` to the top/bottom ones. When the pixel lies outside
/// the outermost center on an axis both references on that axis are the
/// same tile and the distances are `0` and `1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterpWeights {
    pub left: usize,
    pub right: usize,
    pub top: usize,
    pub bottom: usize,
    pub x: f64,
    pub y: f64,
    pub r: f64,
    pub s: f64,
}

impl InterpWeights {
    /// Weights of `(left, top)`, `(right, top)`, `(left, bottom)`,
    /// `(right, bottom)` in that order.
    pub fn weights(&self) -> [f64; 4] {
        let (x, y, r, s) = (self.x, self.y, self.r, self.s);
        let top = s / (s + r);
        let bottom = r / (r + s);
        [top * y / (x + y), top * x / (x + y), bottom * y / (x + y), bottom * x / (x + y)]
    }

    pub fn blend_kind(&self) -> BlendKind {
        match (self.left == self.right, self.top == self.bottom) {
            (true, true) => BlendKind::Single,
            (false, false) => BlendKind::FourWay,
            _ => BlendKind::TwoWay,
        }
    }
}

/// Tile geometry plus one equalization table per tile.
#[derive(Clone, Debug, PartialEq)]
pub struct TileGrid {
    cols: AxisLayout,
    rows: AxisLayout,
    n_bins: usize,
    /// `n_bins` entries per tile, row-major over tiles.
    mappings: Vec<u8>,
}

impl TileGrid {
    pub fn grid_cols(&self) -> usize {
        self.cols.tiles()
    }

    pub fn grid_rows(&self) -> usize {
        self.rows.tiles()
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    /// `(x0, y0, width, height)` of tile `(col, row)`.
    pub fn tile_rect(&self, col: usize, row: usize) -> (usize, usize, usize, usize) {
        let (cb, rb) = (&self.cols.bounds, &self.rows.bounds);
        (cb[col], rb[row], cb[col + 1] - cb[col], rb[row + 1] - rb[row])
    }

    /// Tile center in pixel coordinates.
    pub fn tile_center(&self, col: usize, row: usize) -> (f64, f64) {
        let (x0, y0, w, h) = self.tile_rect(col, row);
        (x0 as f64 + (w - 1) as f64 / 2.0, y0 as f64 + (h - 1) as f64 / 2.0)
    }

    pub fn region_class(&self, col: usize, row: usize) -> RegionClass {
        let edge_col = col == 0 || col + 1 == self.grid_cols();
        let edge_row = row == 0 || row + 1 == self.grid_rows();
        match (edge_col, edge_row) {
            (true, true) => RegionClass::Corner,
            (false, false) => RegionClass::Inner,
            _ => RegionClass::Border,
        }
    }

    /// Table of tile `(col, row)`, indexed by bin.
    pub fn mapping(&self, col: usize, row: usize) -> &[u8] {
        let t = row * self.grid_cols() + col;
        &self.mappings[t * self.n_bins..(t + 1) * self.n_bins]
    }

    /// `f_{col,row}(value)`.
    pub fn map(&self, col: usize, row: usize, value: u8) -> u8 {
        self.mapping(col, row)[bin_of(value, self.n_bins)]
    }

    pub fn interp_weights(&self, x: usize, y: usize) -> InterpWeights {
        let cx = self.cols.terms[x];
        let ry = self.rows.terms[y];
        InterpWeights {
            left: cx.lo as usize,
            right: cx.hi as usize,
            top: ry.lo as usize,
            bottom: ry.hi as usize,
            x: cx.d_lo as f64 / 2.0,
            y: cx.d_hi as f64 / 2.0,
            r: ry.d_lo as f64 / 2.0,
            s: ry.d_hi as f64 / 2.0,
        }
    }
}

fn bin_of(value: u8, n_bins: usize) -> usize {
    value as usize * n_bins / 256
}

/// Histogram, clip and CDF-equalize every tile.
pub fn build_tile_mappings(img: &ImageBuffer, cfg: &ClaheConfig) -> Result<TileGrid> {
    let data = img.gray_u8()?;
    let (w, h) = (img.width(), img.height());
    cfg.check_image(w, h)?;
    let cols = AxisLayout::new(w, cfg.grid_cols);
    let rows = AxisLayout::new(h, cfg.grid_rows);
    let n_bins = cfg.n_bins;
    let mut mappings = vec![0u8; cfg.grid_cols * cfg.grid_rows * n_bins];
    let mut hist = vec![0u32; n_bins];
    for tr in 0..cfg.grid_rows {
        for tc in 0..cfg.grid_cols {
            hist.fill(0);
            let (x0, x1) = (cols.bounds[tc], cols.bounds[tc + 1]);
            let (y0, y1) = (rows.bounds[tr], rows.bounds[tr + 1]);
            for row in data[y0 * w..y1 * w].chunks_exact(w) {
                for &v in &row[x0..x1] {
                    hist[bin_of(v, n_bins)] += 1;
                }
            }
            let n = ((x1 - x0) * (y1 - y0)) as u64;
            let clipped = clip_histogram(&hist, cfg.clip_limit, n as u32);
            let t = tr * cfg.grid_cols + tc;
            let mut cdf = 0u64;
            for (out, &c) in mappings[t * n_bins..(t + 1) * n_bins].iter_mut().zip(&clipped) {
                cdf += c as u64;
                *out = ((510 * cdf + n) / (2 * n)) as u8;
            }
        }
    }
    Ok(TileGrid { cols, rows, n_bins, mappings })
}

pub fn apply_clahe(img: &ImageBuffer, cfg: &ClaheConfig) -> Result<ImageBuffer> {
    let grid = build_tile_mappings(img, cfg)?;
    apply_tile_mappings(img, &grid)
}

/// Maps `img` through an already built grid of matching geometry.
pub fn apply_tile_mappings(img: &ImageBuffer, grid: &TileGrid) -> Result<ImageBuffer> {
    let data = img.gray_u8()?;
    let (w, h) = (img.width(), img.height());
    if grid.cols.terms.len() != w || grid.rows.terms.len() != h {
        return Err(Error::Geometry("tile grid was built for a different image size".into()));
    }
    // Expand bin tables to full 256-level lookups.
    let n_tiles = grid.grid_cols() * grid.grid_rows();
    let luts: Vec<[u8; 256]> = (0..n_tiles)
        .map(|t| {
            let m = &grid.mappings[t * grid.n_bins..(t + 1) * grid.n_bins];
            core::array::from_fn(|v| m[bin_of(v as u8, grid.n_bins)])
        })
        .collect();
    let gc = grid.grid_cols();
    let mut out = vec![0u8; w * h];
    for (y, (src, dst)) in data.chunks_exact(w).zip(out.chunks_exact_mut(w)).enumerate() {
        let ry = grid.rows.terms[y];
        let (r, s) = (ry.d_lo as u64, ry.d_hi as u64);
        let top = ry.lo as usize * gc;
        let bottom = ry.hi as usize * gc;
        for (x, (&v, o)) in src.iter().zip(dst.iter_mut()).enumerate() {
            let cx = grid.cols.terms[x];
            let (dx_lo, dx_hi) = (cx.d_lo as u64, cx.d_hi as u64);
            let (lo, hi) = (cx.lo as usize, cx.hi as usize);
            let v = v as usize;
            let f00 = luts[top + lo][v] as u64;
            let f10 = luts[top + hi][v] as u64;
            let f01 = luts[bottom + lo][v] as u64;
            let f11 = luts[bottom + hi][v] as u64;
            let num = s * (dx_hi * f00 + dx_lo * f10) + r * (dx_hi * f01 + dx_lo * f11);
            let den = (r + s) * (dx_lo + dx_hi);
            *o = ((2 * num + den) / (2 * den)) as u8;
        }
    }
    ImageBuffer::gray(w, h, out)
}
