use core::cmp::Ordering;

use super::polygon::{clip_convex, convex_hull, min_area_rect, polygon_area, Point2, Quad, RotatedRect};
use super::{GeometryError, PIXEL_OVERSHOOT};
use crate::math;

/// Axis-aligned box in normalized image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hbb {
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
}

impl Hbb {
    /// Requires `0 <= x1 <= x2 <= 1` and `0 <= y1 <= y2 <= 1`.
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self, GeometryError> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if unit(x1) && unit(y1) && unit(x2) && unit(y2) && x1 <= x2 && y1 <= y2 {
            Ok(Self { x1, y1, x2, y2 })
        } else {
            Err(GeometryError::InvalidHbb { x1, y1, x2, y2 })
        }
    }

    /// Box spanned by two opposite corners in any order, clamped into the
    /// unit square. Non-finite inputs are rejected.
    pub fn spanning(xa: f64, ya: f64, xb: f64, yb: f64) -> Result<Self, GeometryError> {
        if !(xa.is_finite() && ya.is_finite() && xb.is_finite() && yb.is_finite()) {
            return Err(GeometryError::InvalidHbb { x1: xa, y1: ya, x2: xb, y2: yb });
        }
        let c = |v: f64| v.clamp(0.0, 1.0);
        Ok(Self {
            x1: c(xa.min(xb)),
            y1: c(ya.min(yb)),
            x2: c(xa.max(xb)),
            y2: c(ya.max(yb)),
        })
    }

    /// Normalizes a pixel-space box `[x1, y1, x2, y2]`.
    pub fn from_pixels(
        coords: [f64; 4],
        width: f64,
        height: f64,
    ) -> Result<Self, GeometryError> {
        let x1 = normalize_pixel(coords[0], width)?;
        let y1 = normalize_pixel(coords[1], height)?;
        let x2 = normalize_pixel(coords[2], width)?;
        let y2 = normalize_pixel(coords[3], height)?;
        Self::new(x1, y1, x2, y2)
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }
    pub fn y1(&self) -> f64 {
        self.y1
    }
    pub fn x2(&self) -> f64 {
        self.x2
    }
    pub fn y2(&self) -> f64 {
        self.y2
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Inclusive point containment.
    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x1 && p.x <= self.x2 && p.y >= self.y1 && p.y <= self.y2
    }

    pub fn contains_box(&self, other: &Hbb) -> bool {
        self.x1 <= other.x1 && self.y1 <= other.y1 && self.x2 >= other.x2 && self.y2 >= other.y2
    }

    /// The same box as a zero-angle oriented box.
    pub fn to_obb(&self) -> Obb {
        Obb {
            cx: 0.5 * (self.x1 + self.x2),
            cy: 0.5 * (self.y1 + self.y2),
            width: self.width(),
            height: self.height(),
            angle: 0.0,
        }
    }
}

/// Maps a pixel coordinate onto `[0, 1]`; up to [`PIXEL_OVERSHOOT`] beyond
/// either edge is clamped, anything further is rejected.
pub fn normalize_pixel(value: f64, extent: f64) -> Result<f64, GeometryError> {
    let v = value / extent;
    if !v.is_finite() || !(-PIXEL_OVERSHOOT..=1.0 + PIXEL_OVERSHOOT).contains(&v) {
        return Err(GeometryError::OutOfRange { value: v });
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Oriented box: center, the side lying along `angle`, the side across it,
/// and `angle` in degrees within `[0, 90)`.
///
/// Every rectangle has exactly one such form. When the long side points
/// into `[0°, 90°)` it is stored first; a rectangle whose long side points
/// into `[90°, 180°)` is folded by −90° with its sides swapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obb {
    cx: f64,
    cy: f64,
    width: f64,
    height: f64,
    angle: f64,
}

impl Obb {
    /// Builds a canonical oriented box from any `(w, h, angle)` triple.
    pub fn new(cx: f64, cy: f64, width: f64, height: f64, angle_deg: f64) -> Result<Self, GeometryError> {
        if !(cx.is_finite() && cy.is_finite()) || !(0.0..=1.0).contains(&cx) || !(0.0..=1.0).contains(&cy) {
            return Err(GeometryError::InvalidObb("center outside the unit square"));
        }
        if !(width.is_finite() && height.is_finite()) || width < 0.0 || height < 0.0 {
            return Err(GeometryError::InvalidObb("negative or non-finite side"));
        }
        if !angle_deg.is_finite() {
            return Err(GeometryError::InvalidObb("non-finite angle"));
        }
        let (width, height, angle) = canonical_sides(width, height, angle_deg);
        Ok(Self { cx, cy, width, height, angle })
    }

    /// Normalizes a pixel-space box `[cx, cy, w, h, angle_deg]`.
    ///
    /// Anisotropic scaling turns a rotated rectangle into a parallelogram, so
    /// for non-square images the result is the minimum-area rectangle around
    /// the normalized corners (exact whenever the image is square or the box
    /// is axis-aligned).
    pub fn from_pixels(coords: [f64; 5], width: f64, height: f64) -> Result<Self, GeometryError> {
        let [cx, cy, w, h, angle] = coords;
        let ncx = normalize_pixel(cx, width)?;
        let ncy = normalize_pixel(cy, height)?;
        let square = Self::new(0.5, 0.5, w, h, angle)?;
        if width == height || square.angle == 0.0 {
            return Self::new(ncx, ncy, square.width / width, square.height / height, square.angle);
        }
        let corners = obb_corners(&Self { cx, cy, ..square });
        let scaled: [Point2; 4] = corners.0.map(|p| Point2::new(p.x / width, p.y / height));
        let hull = convex_hull(&scaled);
        let rect = min_area_rect(&hull).ok_or(GeometryError::InvalidObb("degenerate box"))?;
        let mut obb = Self::from_rect(&rect)?;
        obb.cx = ncx;
        obb.cy = ncy;
        Ok(obb)
    }

    /// Builds the canonical box for a rectangle given by a unit direction of
    /// its first side.
    pub(crate) fn from_rect(rect: &RotatedRect) -> Result<Self, GeometryError> {
        let (mut ux, mut uy) = (rect.direction.x, rect.direction.y);
        let (mut along, mut across) = (rect.along, rect.across);
        // Undirected line: keep the representative in the upper half plane.
        if uy < 0.0 || (uy == 0.0 && ux < 0.0) {
            ux = -ux;
            uy = -uy;
        }
        if ux <= 0.0 {
            let t = ux;
            ux = uy;
            uy = -t;
            core::mem::swap(&mut along, &mut across);
        }
        let angle = math::atan2(uy, ux) * math::RAD_TO_DEG;
        let angle = if (0.0..90.0).contains(&angle) { angle } else { 0.0 };
        let cx = rect.center.x.clamp(0.0, 1.0);
        let cy = rect.center.y.clamp(0.0, 1.0);
        Self::new(cx, cy, along, across, angle)
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }
    pub fn cy(&self) -> f64 {
        self.cy
    }
    /// Side length along the `angle` direction.
    pub fn width(&self) -> f64 {
        self.width
    }
    /// Side length perpendicular to the `angle` direction.
    pub fn height(&self) -> f64 {
        self.height
    }
    pub fn angle_deg(&self) -> f64 {
        self.angle
    }

    pub fn long_side(&self) -> f64 {
        self.width.max(self.height)
    }

    pub fn short_side(&self) -> f64 {
        self.width.min(self.height)
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.cx, self.cy, self.width, self.height, self.angle]
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.to_array()
            .iter()
            .zip(other.to_array().iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

fn canonical_sides(mut width: f64, mut height: f64, angle_deg: f64) -> (f64, f64, f64) {
    let mut angle = math::rem_euclid(angle_deg, 180.0);
    if angle >= 180.0 {
        angle = 0.0;
    }
    if angle >= 90.0 {
        angle -= 90.0;
        core::mem::swap(&mut width, &mut height);
    }
    (width, height, angle)
}

/// The four corners of `obb`, ordered with non-negative shoelace area.
pub fn obb_corners(obb: &Obb) -> Quad {
    let rad = obb.angle * math::DEG_TO_RAD;
    let (c, s) = if obb.angle == 0.0 { (1.0, 0.0) } else { (math::cos(rad), math::sin(rad)) };
    let hw = 0.5 * obb.width;
    let hh = 0.5 * obb.height;
    let at = |dx: f64, dy: f64| Point2::new(obb.cx + dx * c - dy * s, obb.cy + dx * s + dy * c);
    Quad([at(-hw, -hh), at(hw, -hh), at(hw, hh), at(-hw, hh)])
}

/// Enclosing horizontal box of an oriented box, clamped into the image.
pub fn obb_to_hbb(obb: &Obb) -> Hbb {
    let quad = obb_corners(obb);
    let (mut x1, mut y1, mut x2, mut y2) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in quad.vertices() {
        x1 = x1.min(p.x);
        y1 = y1.min(p.y);
        x2 = x2.max(p.x);
        y2 = y2.max(p.y);
    }
    let c = |v: f64| v.clamp(0.0, 1.0);
    Hbb { x1: c(x1), y1: c(y1), x2: c(x2), y2: c(y2) }
}

/// Intersection over union; zero when the union is empty.
pub fn hbb_iou(a: &Hbb, b: &Hbb) -> f64 {
    let iw = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let ih = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

/// Rotated IoU by convex polygon clipping of the two corner quads.
pub fn rotated_iou(a: &Obb, b: &Obb) -> f64 {
    // Fixed argument order keeps the result bit-identical under swapping.
    let (a, b) = if a.total_cmp(b).is_gt() { (b, a) } else { (a, b) };
    let area_a = a.area();
    let area_b = b.area();
    let inter = if area_a > 0.0 && area_b > 0.0 {
        let clipped = clip_convex(&obb_corners(a).0, &obb_corners(b).0);
        math::abs(polygon_area(&clipped)).min(area_a).min(area_b)
    } else {
        0.0
    };
    let union = area_a + area_b - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}
