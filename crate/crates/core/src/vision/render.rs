//! Synthetic top-down board frames standing in for the ceiling camera.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{GrayImage, GridGeometry};
use crate::game::{Board, Cell, Mark};
use crate::rng::root_rng;

/// Drawing geometry. Mark sizes are fractions of the cell side so the same
/// style scales with the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderStyle {
    pub width: usize,
    pub height: usize,
    pub grid: GridGeometry,
    pub line_width: usize,
    pub ring_outer: f64,
    pub ring_inner: f64,
    pub cross_half_span: f64,
    pub cross_thickness: f64,
    pub ink: u8,
    pub background: u8,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            width: 320,
            height: 320,
            grid: GridGeometry { left: 10, top: 10, width: 300, height: 300 },
            line_width: 6,
            ring_outer: 0.34,
            ring_inner: 0.24,
            cross_half_span: 0.26,
            cross_thickness: 0.10,
            ink: 0,
            background: 255,
        }
    }
}

/// Additive Gaussian intensity noise, clamped to 0..=255.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

fn is_ink(mark: Mark, dx: f64, dy: f64, side: f64, style: &RenderStyle) -> bool {
    match mark {
        Mark::Empty => false,
        Mark::Nought => {
            let r = (dx * dx + dy * dy).sqrt();
            r <= style.ring_outer * side && r >= style.ring_inner * side
        }
        Mark::Cross => {
            let span = style.cross_half_span * side;
            let half = style.cross_thickness * side / 2.0;
            let on_bar = |d: f64| d.abs() / std::f64::consts::SQRT_2 <= half;
            dx.abs() <= span && dy.abs() <= span && (on_bar(dx - dy) || on_bar(dx + dy))
        }
    }
}

pub fn render_board(board: &Board, style: &RenderStyle, noise: Option<NoiseSpec>) -> GrayImage {
    let mut img = GrayImage::filled(style.width, style.height, style.background);
    let g = style.grid;
    let half = style.line_width as f64 / 2.0;
    let near = |p: f64, edges: [f64; 4]| edges.iter().any(|e| (p - e).abs() < half);
    let xs = [0, 1, 2, 3].map(|i| (g.left + i * g.width / 3) as f64);
    let ys = [0, 1, 2, 3].map(|i| (g.top + i * g.height / 3) as f64);
    let side = (g.width.min(g.height) / 3) as f64;

    for y in 0..style.height {
        for x in 0..style.width {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let inside_x = px > xs[0] - half && px < xs[3] + half;
            let inside_y = py > ys[0] - half && py < ys[3] + half;
            if inside_x && inside_y && (near(px, xs) || near(py, ys)) {
                img.set(x, y, style.ink);
            }
        }
    }
    for cell in Cell::all().filter(|&c| board.get(c) != Mark::Empty) {
        let (row, col) = (cell.row(), cell.col());
        let cx = (xs[col] + xs[col + 1]) / 2.0;
        let cy = (ys[row] + ys[row + 1]) / 2.0;
        for y in ys[row] as usize..ys[row + 1] as usize {
            for x in xs[col] as usize..xs[col + 1] as usize {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                if is_ink(board.get(cell), dx, dy, side, style) {
                    img.set(x, y, style.ink);
                }
            }
        }
    }

    if let Some(spec) = noise.filter(|n| n.sigma > 0.0) {
        let normal = Normal::new(0.0, spec.sigma).expect("finite positive sigma");
        let mut rng = root_rng(spec.seed);
        for y in 0..style.height {
            for x in 0..style.width {
                let v = img.get(x, y) as f64 + normal.sample(&mut rng);
                img.set(x, y, v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    img
}
