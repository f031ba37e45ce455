//! Point and box prompts for a promptable segmenter, built from a coarse
//! grid mask and a predicted box.
//!
//! Positive points come from the part of the coarse mask inside the box,
//! negative points from the part outside it. When neither region has any
//! pixel only the box is passed on.
//!
//! Note the negative region is mask ∖ box, not background: that is the rule
//! as stated for this refiner, kept verbatim.

use alloc::vec::Vec;

use rand::seq::index;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{upsample, GeometryError, GridMask, Hbb, PixelMask};

pub const POINTS_PER_REGION: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SamPrompt {
    /// `(x, y)` pixel indices; the point is the pixel's center.
    pub positive_points: Vec<[u32; 2]>,
    pub negative_points: Vec<[u32; 2]>,
    /// `[x1, y1, x2, y2]` in pixels.
    pub box_px: [f64; 4],
    pub fallback_box_only: bool,
}

impl SamPrompt {
    /// Positives then negatives, as one coordinate list.
    pub fn point_coords(&self) -> Vec<[u32; 2]> {
        self.positive_points.iter().chain(&self.negative_points).copied().collect()
    }

    /// 1 for each positive, 0 for each negative, matching `point_coords`.
    pub fn point_labels(&self) -> Vec<u8> {
        let mut labels = alloc::vec![1; self.positive_points.len()];
        labels.resize(labels.len() + self.negative_points.len(), 0);
        labels
    }
}

/// Box scaled to pixel units.
pub fn box_to_pixels(b: &Hbb, width: usize, height: usize) -> [f64; 4] {
    let (w, h) = (width as f64, height as f64);
    [b.x1() * w, b.y1() * h, b.x2() * w, b.y2() * h]
}

/// Whether the center of pixel `(x, y)` lies in the pixel-space box
/// (boundary included).
pub fn pixel_in_box(box_px: &[f64; 4], x: usize, y: usize) -> bool {
    let (cx, cy) = (x as f64 + 0.5, y as f64 + 0.5);
    box_px[0] <= cx && cx <= box_px[2] && box_px[1] <= cy && cy <= box_px[3]
}

/// Draws up to `POINTS_PER_REGION` distinct pixels satisfying `region`,
/// uniformly, returned in row-major order.
fn sample_region(
    coarse: &PixelMask,
    region: impl Fn(usize, usize) -> bool,
    rng: &mut ChaCha8Rng,
) -> Vec<[u32; 2]> {
    let w = coarse.width();
    let members = || {
        coarse
            .bits()
            .iter()
            .enumerate()
            .filter(|(_, on)| **on)
            .map(move |(i, _)| (i % w, i / w))
            .filter(|&(x, y)| region(x, y))
    };
    let count = members().count();
    let k = count.min(POINTS_PER_REGION);
    if k == 0 {
        return Vec::new();
    }
    let mut ranks = index::sample(rng, count, k).into_vec();
    ranks.sort_unstable();
    let mut out = Vec::with_capacity(k);
    let mut next = ranks.iter().peekable();
    for (rank, (x, y)) in members().enumerate() {
        match next.peek() {
            Some(&&r) if r == rank => {
                out.push([x as u32, y as u32]);
                next.next();
            }
            Some(_) => {}
            None => break,
        }
    }
    out
}

/// Builds the prompt for one object. `grid` is upsampled (nearest) to
/// `width`×`height` to form the coarse mask.
pub fn make_prompt(grid: &GridMask, pred_box: &Hbb, width: usize, height: usize, seed: u64) -> Result<SamPrompt, GeometryError> {
    let coarse = upsample(grid, width, height)?;
    Ok(prompt_from_coarse(&coarse, pred_box, seed))
}

/// As [`make_prompt`], for a coarse mask already at image resolution.
pub fn prompt_from_coarse(coarse: &PixelMask, pred_box: &Hbb, seed: u64) -> SamPrompt {
    let box_px = box_to_pixels(pred_box, coarse.width(), coarse.height());
    let mut pos_rng = ChaCha8Rng::seed_from_u64(crate::derive_seed(seed, 1));
    let mut neg_rng = ChaCha8Rng::seed_from_u64(crate::derive_seed(seed, 2));
    let positive_points = sample_region(coarse, |x, y| pixel_in_box(&box_px, x, y), &mut pos_rng);
    let negative_points = sample_region(coarse, |x, y| !pixel_in_box(&box_px, x, y), &mut neg_rng);
    let fallback_box_only = positive_points.is_empty() && negative_points.is_empty();
    SamPrompt { positive_points, negative_points, box_px, fallback_box_only }
}
