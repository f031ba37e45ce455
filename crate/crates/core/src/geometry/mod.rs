//! Value types for the three grounding signals and the conversions between
//! them.
//!
//! All coordinates are normalized image coordinates: `x` runs left to right
//! and `y` top to bottom, both as fractions of the image extent. Angles are
//! in degrees and follow the image frame, so a positive angle turns the `+x`
//! axis towards `+y`.

mod boxes;
mod mask;
mod polygon;

pub use boxes::{hbb_iou, normalize_pixel, obb_corners, obb_to_hbb, rotated_iou, Hbb, Obb};
pub use mask::{
    downsample, mask_iou, mask_to_hbb, mask_to_obb, rasterize_hbb, rasterize_obb, upsample,
    GridMask, PixelMask, Resample,
};
pub use polygon::{clip_convex, convex_hull, min_area_rect, polygon_area, Point2, Quad, RotatedRect};

use thiserror::Error;

/// Overshoot tolerated when normalizing pixel annotations; values within it
/// are clamped into `[0, 1]`.
pub const PIXEL_OVERSHOOT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid horizontal box ({x1}, {y1}, {x2}, {y2})")]
    InvalidHbb { x1: f64, y1: f64, x2: f64, y2: f64 },
    #[error("invalid oriented box: {0}")]
    InvalidObb(&'static str),
    #[error("coordinate {value} is outside [0, 1] beyond the tolerated overshoot")]
    OutOfRange { value: f64 },
    #[error("grid resolution must be at least 1")]
    InvalidResolution,
    #[error("mask dimensions must be at least 1x1")]
    InvalidDimensions,
    #[error("mask holds {found} cells, expected {expected}")]
    CellCount { expected: usize, found: usize },
    #[error("mask dimensions differ: {a_width}x{a_height} vs {b_width}x{b_height}")]
    DimensionMismatch {
        a_width: usize,
        a_height: usize,
        b_width: usize,
        b_height: usize,
    },
    #[error("mask has no foreground cell")]
    EmptyMask,
}
