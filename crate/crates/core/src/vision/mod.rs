//! Overhead-camera board reading.
//!
//! The pipeline thresholds a grayscale frame, erodes it with a square
//! all-ones kernel, crops the nine cells, fills enclosed holes so ring-shaped
//! noughts become solid discs, and classifies each cell by the fraction of
//! dark pixels it holds: thin drone crosses land in a middle band, filled
//! noughts in the top band.

mod pnm;
mod render;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Board, Cell, Mark};

pub use pnm::{read_pnm, write_pgm};
pub use render::{render_board, NoiseSpec, RenderStyle};

/// Gaussian noise level (intensity units) at which the default renderer and
/// config read sampled boards exactly. One ink pixel pushed past the threshold
/// erodes a 5x5 hole that can cut the thin top or bottom of a ring, after
/// which the hole fill leaks and the circle reads as a cross. That takes a
/// 128/sigma tail event: about 5e-8 per pixel at sigma 24 (roughly one
/// misread board per 10^4) but under 1e-10 at sigma 20.
pub const NOISE_ROBUSTNESS_SIGMA: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VisionError {
    #[error("board grid does not fit inside the image")]
    GridOutOfBounds,
    #[error("cell {cell} density {density:.4} is too close to a band edge")]
    AmbiguousCell { cell: Cell, density: f64 },
    #[error("no new nought found")]
    NoChange,
    #[error("more than one new nought: {0:?}")]
    MultipleChanges(Vec<Cell>),
    #[error("cell {0} changed in a way a human move cannot explain")]
    NonHumanChange(Cell),
    #[error("invalid vision config: {0}")]
    InvalidConfig(String),
    #[error("invalid image: {0}")]
    InvalidImage(String),
}

/// 8-bit grayscale raster, row-major, 0 = black.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<GrayImage, VisionError> {
        if data.len() != width * height {
            return Err(VisionError::InvalidImage(format!(
                "{} bytes for a {width}x{height} image",
                data.len()
            )));
        }
        Ok(GrayImage { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> GrayImage {
        GrayImage { width, height, data: vec![value; width * height] }
    }

    /// Converts interleaved 8-bit RGB using integer luma weights:
    /// `(299 R + 587 G + 114 B + 500) / 1000`.
    pub fn from_rgb(width: usize, height: usize, rgb: &[u8]) -> Result<GrayImage, VisionError> {
        if rgb.len() != width * height * 3 {
            return Err(VisionError::InvalidImage(format!(
                "{} bytes for a {width}x{height} RGB image",
                rgb.len()
            )));
        }
        let data = rgb
            .chunks_exact(3)
            .map(|p| {
                let y = 299 * p[0] as u32 + 587 * p[1] as u32 + 114 * p[2] as u32;
                ((y + 500) / 1000) as u8
            })
            .collect();
        Ok(GrayImage { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }
}

/// Foreground mask; `true` marks a dark pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize) -> BinaryImage {
        BinaryImage { width, height, data: vec![false; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> BinaryImage {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        BinaryImage { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&p| p).count()
    }

    /// Foreground fraction; 0 for an empty raster.
    pub fn density(&self) -> f64 {
        if self.data.is_empty() {
            0.0
        } else {
            self.count() as f64 / self.data.len() as f64
        }
    }

    /// True when every foreground pixel of `self` is also foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryImage) -> bool {
        self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> BinaryImage {
        BinaryImage::from_fn(w, h, |x, y| self.get(x0 + x, y0 + y))
    }
}

/// Board bounding box in image pixels; split into a 3x3 grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub left: usize,
    pub top: usize,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VisionConfig {
    /// Pixels strictly darker than this are foreground.
    pub threshold: u8,
    pub erosion_kernel: usize,
    pub grid: GridGeometry,
    /// Pixels trimmed from each side of a cell to drop grid lines.
    pub cell_margin: usize,
    /// Densities below this read as an empty cell.
    pub empty_max: f64,
    /// Densities below this (and at least `empty_max`) read as a drone cross;
    /// anything higher is a nought.
    pub cross_max: f64,
    /// Densities closer than this to either band edge are rejected.
    pub guard: f64,
}

impl Default for VisionConfig {
    fn default() -> Self {
        VisionConfig {
            threshold: 128,
            erosion_kernel: 5,
            grid: GridGeometry { left: 10, top: 10, width: 300, height: 300 },
            cell_margin: 10,
            empty_max: 0.05,
            cross_max: 0.30,
            guard: 0.02,
        }
    }
}

impl VisionConfig {
    pub fn validate(&self) -> Result<(), VisionError> {
        let bad = |m: &str| Err(VisionError::InvalidConfig(m.to_string()));
        if self.erosion_kernel != 5 {
            return bad("erosion kernel is fixed at 5x5");
        }
        if !(0.0 <= self.empty_max && self.empty_max < self.cross_max && self.cross_max <= 1.0) {
            return bad("density bands must satisfy 0 <= empty_max < cross_max <= 1");
        }
        if self.guard < 0.0 {
            return bad("guard must be non-negative");
        }
        if self.grid.width < 3 || self.grid.height < 3 {
            return bad("grid is too small");
        }
        let cell = self.grid.width.min(self.grid.height) / 3;
        if 2 * self.cell_margin >= cell {
            return bad("cell margin swallows the whole cell");
        }
        Ok(())
    }

    /// Inner rectangle `(x, y, w, h)` of `cell`, margins removed.
    pub fn cell_rect(&self, cell: Cell) -> (usize, usize, usize, usize) {
        let g = &self.grid;
        let (r, c) = (cell.row(), cell.col());
        let x0 = g.left + c * g.width / 3;
        let x1 = g.left + (c + 1) * g.width / 3;
        let y0 = g.top + r * g.height / 3;
        let y1 = g.top + (r + 1) * g.height / 3;
        let m = self.cell_margin;
        (x0 + m, y0 + m, x1 - x0 - 2 * m, y1 - y0 - 2 * m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellLabel {
    Empty,
    Cross,
    Circle,
}

impl CellLabel {
    pub fn mark(self) -> Mark {
        match self {
            CellLabel::Empty => Mark::Empty,
            CellLabel::Cross => Mark::Cross,
            CellLabel::Circle => Mark::Nought,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellReading {
    pub cell: Cell,
    pub density: f64,
    pub label: CellLabel,
}

pub fn threshold(img: &GrayImage, t: u8) -> BinaryImage {
    BinaryImage {
        width: img.width,
        height: img.height,
        data: img.data.iter().map(|&v| v < t).collect(),
    }
}

/// Erosion along rows with a window of `2 * radius + 1`; out-of-image pixels
/// count as background.
fn erode_rows(img: &BinaryImage, radius: usize) -> BinaryImage {
    let mut out = BinaryImage::new(img.width, img.height);
    let k = 2 * radius + 1;
    for (src, dst) in img.data.chunks_exact(img.width).zip(out.data.chunks_exact_mut(img.width)) {
        let mut run = 0;
        for (j, &fg) in src.iter().enumerate() {
            run = if fg { run + 1 } else { 0 };
            if run >= k {
                dst[j - radius] = true;
            }
        }
    }
    out
}

/// Same along columns, streaming rows with one run counter per column.
fn erode_cols(img: &BinaryImage, radius: usize) -> BinaryImage {
    let w = img.width;
    let mut out = BinaryImage::new(w, img.height);
    let k = 2 * radius + 1;
    let mut runs = vec![0usize; w];
    for (j, src) in img.data.chunks_exact(w).enumerate() {
        for (x, &fg) in src.iter().enumerate() {
            runs[x] = if fg { runs[x] + 1 } else { 0 };
            if runs[x] >= k {
                out.data[(j - radius) * w + x] = true;
            }
        }
    }
    out
}

/// Erosion with a square all-ones `kernel` (odd size). A pixel stays
/// foreground only if its whole neighbourhood is foreground.
pub fn erode_with(img: &BinaryImage, kernel: usize) -> BinaryImage {
    assert!(kernel % 2 == 1, "kernel size must be odd");
    let radius = kernel / 2;
    if img.width == 0 {
        return img.clone();
    }
    erode_cols(&erode_rows(img, radius), radius)
}

/// Erosion with the pipeline's 5x5 kernel.
pub fn erode(img: &BinaryImage) -> BinaryImage {
    erode_with(img, 5)
}

/// The nine cell interiors in row-major order.
pub fn crop_cells(img: &BinaryImage, cfg: &VisionConfig) -> Result<Vec<BinaryImage>, VisionError> {
    let g = &cfg.grid;
    if g.left + g.width > img.width || g.top + g.height > img.height {
        return Err(VisionError::GridOutOfBounds);
    }
    cfg.validate()?;
    Ok(Cell::all()
        .map(|cell| {
            let (x, y, w, h) = cfg.cell_rect(cell);
            img.crop(x, y, w, h)
        })
        .collect())
}

/// Fills background regions not 4-connected to the image border.
pub fn fill_components(img: &BinaryImage) -> BinaryImage {
    let (w, h) = (img.width, img.height);
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::new();
    let mut seed = |x: usize, y: usize, queue: &mut VecDeque<(usize, usize)>| {
        let i = y * w + x;
        if !img.data[i] && !outside[i] {
            outside[i] = true;
            queue.push_back((x, y));
        }
    };
    for x in 0..w {
        seed(x, 0, &mut queue);
        if h > 0 {
            seed(x, h - 1, &mut queue);
        }
    }
    for y in 0..h {
        seed(0, y, &mut queue);
        if w > 0 {
            seed(w - 1, y, &mut queue);
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        let mut visit = |nx: usize, ny: usize| seed(nx, ny, &mut queue);
        if x > 0 {
            visit(x - 1, y);
        }
        if x + 1 < w {
            visit(x + 1, y);
        }
        if y > 0 {
            visit(x, y - 1);
        }
        if y + 1 < h {
            visit(x, y + 1);
        }
    }
    BinaryImage {
        width: w,
        height: h,
        data: outside.into_iter().map(|o| !o).collect(),
    }
}

pub fn label_for_density(density: f64, cfg: &VisionConfig) -> CellLabel {
    if density < cfg.empty_max {
        CellLabel::Empty
    } else if density < cfg.cross_max {
        CellLabel::Cross
    } else {
        CellLabel::Circle
    }
}

/// Density of an already hole-filled cell image and its label.
pub fn classify_cell(cell: Cell, filled: &BinaryImage, cfg: &VisionConfig) -> CellReading {
    let density = filled.density();
    CellReading { cell, density, label: label_for_density(density, cfg) }
}

/// Per-cell readings for a frame, without the ambiguity guard.
pub fn read_cells(img: &GrayImage, cfg: &VisionConfig) -> Result<Vec<CellReading>, VisionError> {
    let eroded = erode_with(&threshold(img, cfg.threshold), cfg.erosion_kernel);
    let cells = crop_cells(&eroded, cfg)?;
    Ok(Cell::all()
        .zip(cells)
        .map(|(cell, img)| classify_cell(cell, &fill_components(&img), cfg))
        .collect())
}

/// Full pipeline: threshold, erode, crop, fill, classify.
pub fn detect_board(img: &GrayImage, cfg: &VisionConfig) -> Result<Board, VisionError> {
    let mut marks = [Mark::Empty; 9];
    for reading in read_cells(img, cfg)? {
        let near_edge = [cfg.empty_max, cfg.cross_max]
            .iter()
            .any(|edge| (reading.density - edge).abs() < cfg.guard);
        if near_edge {
            return Err(VisionError::AmbiguousCell { cell: reading.cell, density: reading.density });
        }
        marks[reading.cell.index()] = reading.label.mark();
    }
    Ok(Board::from_marks(marks))
}

/// The single cell a human could have just played between two readings.
pub fn diff_move(prev: &Board, curr: &Board) -> Result<Cell, VisionError> {
    let mut placed = Vec::new();
    for cell in Cell::all() {
        match (prev.get(cell), curr.get(cell)) {
            (a, b) if a == b => {}
            (Mark::Empty, Mark::Nought) => placed.push(cell),
            _ => return Err(VisionError::NonHumanChange(cell)),
        }
    }
    match placed.as_slice() {
        [] => Err(VisionError::NoChange),
        [cell] => Ok(*cell),
        _ => Err(VisionError::MultipleChanges(placed)),
    }
}
