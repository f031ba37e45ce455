use alloc::vec;
use alloc::vec::Vec;

use super::boxes::{obb_corners, Hbb, Obb};
use super::polygon::{convex_hull, min_area_rect, Point2, RotatedRect};
use super::GeometryError;

/// Full-resolution binary mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PixelMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl PixelMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, GeometryError> {
        if width == 0 || height == 0 {
            return Err(GeometryError::InvalidDimensions);
        }
        let expected = width * height;
        if bits.len() != expected {
            return Err(GeometryError::CellCount { expected, found: bits.len() });
        }
        Ok(Self { width, height, bits })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self, GeometryError> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self, GeometryError> {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::new(width, height, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }
}

/// `n`×`n` binary occupancy grid, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridMask {
    n: usize,
    cells: Vec<bool>,
}

impl GridMask {
    pub fn new(n: usize, cells: Vec<bool>) -> Result<Self, GeometryError> {
        if n == 0 {
            return Err(GeometryError::InvalidResolution);
        }
        if cells.len() != n * n {
            return Err(GeometryError::CellCount { expected: n * n, found: cells.len() });
        }
        Ok(Self { n, cells })
    }

    pub fn empty(n: usize) -> Result<Self, GeometryError> {
        Self::new(n, vec![false; n * n])
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self, GeometryError> {
        let mut cells = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                cells.push(f(r, c));
            }
        }
        Self::new(n, cells)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.cells[row * self.n + col] = value;
    }

    pub fn row(&self, row: usize) -> &[bool] {
        &self.cells[row * self.n..(row + 1) * self.n]
    }

    pub fn count_ones(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&b| b)
    }
}

/// Grid resampling kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Resample {
    /// A cell is set when any pixel of its cover is set.
    MaxPool,
    /// A cell takes the pixel under its center.
    Nearest,
}

/// Pixel range `[start, end)` covered by cell `i` of `n` over `extent` pixels.
fn cover(i: usize, n: usize, extent: usize) -> (usize, usize) {
    let start = i * extent / n;
    let end = ((i + 1) * extent).div_ceil(n);
    (start, end.min(extent))
}

/// Pixel index under the center of cell `i`.
fn center_pixel(i: usize, n: usize, extent: usize) -> usize {
    ((2 * i + 1) * extent / (2 * n)).min(extent - 1)
}

pub fn downsample(mask: &PixelMask, n: usize, mode: Resample) -> Result<GridMask, GeometryError> {
    if n == 0 {
        return Err(GeometryError::InvalidResolution);
    }
    let (w, h) = (mask.width, mask.height);
    let mut cells = Vec::with_capacity(n * n);
    match mode {
        Resample::MaxPool => {
            let cols: Vec<(usize, usize)> = (0..n).map(|c| cover(c, n, w)).collect();
            for r in 0..n {
                let (y0, y1) = cover(r, n, h);
                for &(x0, x1) in &cols {
                    let hit = (y0..y1).any(|y| mask.bits[y * w + x0..y * w + x1].iter().any(|&b| b));
                    cells.push(hit);
                }
            }
        }
        Resample::Nearest => {
            for r in 0..n {
                let y = center_pixel(r, n, h);
                for c in 0..n {
                    cells.push(mask.get(center_pixel(c, n, w), y));
                }
            }
        }
    }
    GridMask::new(n, cells)
}

/// Nearest-neighbour expansion: pixel `(x, y)` takes cell
/// `(y * n / height, x * n / width)`.
pub fn upsample(grid: &GridMask, width: usize, height: usize) -> Result<PixelMask, GeometryError> {
    if width == 0 || height == 0 {
        return Err(GeometryError::InvalidDimensions);
    }
    let n = grid.n;
    let col_of: Vec<usize> = (0..width).map(|x| x * n / width).collect();
    let mut bits = Vec::with_capacity(width * height);
    for y in 0..height {
        let row = grid.row(y * n / height);
        bits.extend(col_of.iter().map(|&c| row[c]));
    }
    PixelMask::new(width, height, bits)
}

fn extremes(grid: &GridMask) -> Result<(usize, usize, usize, usize), GeometryError> {
    let n = grid.n;
    let (mut r0, mut c0, mut r1, mut c1) = (n, n, 0, 0);
    for r in 0..n {
        for c in 0..n {
            if grid.get(r, c) {
                r0 = r0.min(r);
                r1 = r1.max(r);
                c0 = c0.min(c);
                c1 = c1.max(c);
            }
        }
    }
    if r0 == n {
        return Err(GeometryError::EmptyMask);
    }
    Ok((r0, c0, r1, c1))
}

/// Enclosing box of the set cells, from their outer edges.
pub fn mask_to_hbb(grid: &GridMask) -> Result<Hbb, GeometryError> {
    let (r0, c0, r1, c1) = extremes(grid)?;
    let n = grid.n as f64;
    Hbb::new(c0 as f64 / n, r0 as f64 / n, (c1 + 1) as f64 / n, (r1 + 1) as f64 / n)
}

/// Minimum-area rotated rectangle around the corners of all set cells.
pub fn mask_to_obb(grid: &GridMask) -> Result<Obb, GeometryError> {
    let n = grid.n;
    let mut corners = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if !grid.get(r, c) {
                continue;
            }
            // interior cells contribute no hull vertex
            let interior = r > 0
                && c > 0
                && r + 1 < n
                && c + 1 < n
                && grid.get(r - 1, c)
                && grid.get(r + 1, c)
                && grid.get(r, c - 1)
                && grid.get(r, c + 1);
            if interior {
                continue;
            }
            let (x, y) = (c as f64, r as f64);
            corners.extend_from_slice(&[
                Point2::new(x, y),
                Point2::new(x + 1.0, y),
                Point2::new(x + 1.0, y + 1.0),
                Point2::new(x, y + 1.0),
            ]);
        }
    }
    if corners.is_empty() {
        return Err(GeometryError::EmptyMask);
    }
    let hull = convex_hull(&corners);
    let rect = min_area_rect(&hull).ok_or(GeometryError::EmptyMask)?;
    let scale = 1.0 / n as f64;
    Obb::from_rect(&RotatedRect {
        center: Point2::new(rect.center.x * scale, rect.center.y * scale),
        direction: rect.direction,
        along: rect.along * scale,
        across: rect.across * scale,
    })
}

/// Pixel IoU; zero when both masks are empty.
pub fn mask_iou(a: &PixelMask, b: &PixelMask) -> Result<f64, GeometryError> {
    if a.width != b.width || a.height != b.height {
        return Err(GeometryError::DimensionMismatch {
            a_width: a.width,
            a_height: a.height,
            b_width: b.width,
            b_height: b.height,
        });
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.bits.iter().zip(&b.bits) {
        inter += usize::from(x && y);
        union += usize::from(x || y);
    }
    Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
}

/// Conservative rasterization: every pixel whose square overlaps the box
/// interior is set. Zero-area boxes rasterize to nothing.
pub fn rasterize_hbb(hbb: &Hbb, width: usize, height: usize) -> Result<PixelMask, GeometryError> {
    let (x1, x2) = (hbb.x1() * width as f64, hbb.x2() * width as f64);
    let (y1, y2) = (hbb.y1() * height as f64, hbb.y2() * height as f64);
    PixelMask::from_fn(width, height, |x, y| {
        let (px, py) = (x as f64, y as f64);
        px + 1.0 > x1 && px < x2 && py + 1.0 > y1 && py < y2
    })
}

/// Center-sampled rasterization of an oriented box: a pixel is set when its
/// center lies inside the rectangle (boundary inclusive).
pub fn rasterize_obb(obb: &Obb, width: usize, height: usize) -> Result<PixelMask, GeometryError> {
    let quad = obb_corners(obb);
    let v = quad.0;
    let (w, h) = (width as f64, height as f64);
    let mut mask = PixelMask::empty(width, height)?;
    if obb.area() <= 0.0 {
        return Ok(mask);
    }
    let y_min = v.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let y_max = v.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let row_lo = ((y_min * h - 0.5).max(0.0) as usize).min(height);
    let row_hi = ((y_max * h + 0.5).max(0.0) as usize + 1).min(height);
    for y in row_lo..row_hi {
        let py = (y as f64 + 0.5) / h;
        for x in 0..width {
            let p = Point2::new((x as f64 + 0.5) / w, py);
            let inside = (0..4).all(|i| {
                let a = v[i];
                let b = v[(i + 1) % 4];
                (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= 0.0
            });
            if inside {
                mask.set(x, y, true);
            }
        }
    }
    Ok(mask)
}
