//! Pinhole camera over a flat ground plane.
//!
//! Camera frame: `+Z` along the optical axis, `+X` to the image right, `+Y`
//! down the image. The camera is pitched down by `theta` from horizontal
//! and sits `agl` meters above the ground, which gives the ground plane
//!
//! ```text
//! -cos(theta) * Y - sin(theta) * Z + agl = 0
//! ```
//!
//! Image coordinates are metric positions on the sensor, centered on the
//! principal point; pixel coordinates have their origin at the top-left.

use thiserror::Error;

use crate::geometry::{GeometryError, Hbb};
use crate::math;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CameraError {
    #[error("invalid camera parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("viewing ray does not reach the ground")]
    NoGroundIntersection,
    #[error("point is behind the camera (Z = {z})")]
    BehindCamera { z: f64 },
    #[error("box dimensions must be finite and non-negative")]
    InvalidBox,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pixel_pitch: f64,
    focal: f64,
    width: f64,
    height: f64,
    pitch: f64,
    agl: f64,
}

impl CameraModel {
    /// `pixel_pitch` and `focal` in meters, image size in pixels, `pitch` in
    /// radians below horizontal (`0 < pitch <= pi/2`), `agl` in meters.
    pub fn new(
        pixel_pitch: f64,
        focal: f64,
        width: f64,
        height: f64,
        pitch: f64,
        agl: f64,
    ) -> Result<Self, CameraError> {
        let finite = [pixel_pitch, focal, width, height, pitch, agl].iter().all(|v| v.is_finite());
        if !finite {
            return Err(CameraError::InvalidParameter("non-finite value"));
        }
        if pixel_pitch <= 0.0 {
            return Err(CameraError::InvalidParameter("pixel pitch must be positive"));
        }
        if focal <= 0.0 {
            return Err(CameraError::InvalidParameter("focal length must be positive"));
        }
        if width < 1.0 || height < 1.0 {
            return Err(CameraError::InvalidParameter("image must be at least 1x1 pixels"));
        }
        if !(pitch > 0.0 && pitch <= core::f64::consts::FRAC_PI_2) {
            return Err(CameraError::InvalidParameter("pitch must lie in (0, pi/2]"));
        }
        if agl <= 0.0 {
            return Err(CameraError::InvalidParameter("height above ground must be positive"));
        }
        Ok(Self { pixel_pitch, focal, width, height, pitch, agl })
    }

    pub fn pixel_pitch(&self) -> f64 {
        self.pixel_pitch
    }
    pub fn focal(&self) -> f64 {
        self.focal
    }
    pub fn width(&self) -> f64 {
        self.width
    }
    pub fn height(&self) -> f64 {
        self.height
    }
    pub fn pitch(&self) -> f64 {
        self.pitch
    }
    pub fn agl(&self) -> f64 {
        self.agl
    }

    fn trig(&self) -> (f64, f64) {
        // exact at nadir
        if self.pitch == core::f64::consts::FRAC_PI_2 {
            (1.0, 0.0)
        } else {
            (math::sin(self.pitch), math::cos(self.pitch))
        }
    }

    /// Unit normal of the ground plane, pointing from the camera to the ground.
    pub fn ground_normal(&self) -> Point3 {
        let (s, c) = self.trig();
        Point3::new(0.0, c, s)
    }

    /// In-plane ground axes: the camera `+X` axis and the image-down axis
    /// projected onto the ground.
    pub fn ground_axes(&self) -> (Point3, Point3) {
        let (s, c) = self.trig();
        (Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, s, -c))
    }

    /// Signed residual of the ground-plane equation at `p`.
    pub fn plane_residual(&self, p: &Point3) -> f64 {
        let (s, c) = self.trig();
        -c * p.y - s * p.z + self.agl
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    fn scaled(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }

    fn plus(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

/// Box resting in the ground frame: `length` runs along the yaw direction,
/// `width` across it in the ground plane, `height` along the plane normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3 {
    pub center: Point3,
    pub length: f64,
    pub width: f64,
    pub height: f64,
    /// Radians in the ground plane, from the camera `+X` axis towards the
    /// image-down axis.
    pub yaw: f64,
}

pub fn pixel_to_image(xp: f64, yp: f64, cam: &CameraModel) -> (f64, f64) {
    ((xp - cam.width / 2.0) * cam.pixel_pitch, (yp - cam.height / 2.0) * cam.pixel_pitch)
}

pub fn image_to_pixel(xi: f64, yi: f64, cam: &CameraModel) -> (f64, f64) {
    (xi / cam.pixel_pitch + cam.width / 2.0, yi / cam.pixel_pitch + cam.height / 2.0)
}

/// Ray parameter at which the viewing ray through image point `yi` meets
/// the ground.
pub fn ground_ray_parameter(yi: f64, cam: &CameraModel) -> Result<f64, CameraError> {
    let (s, c) = cam.trig();
    let denom = yi * c + cam.focal * s;
    if denom <= 0.0 || !denom.is_finite() {
        return Err(CameraError::NoGroundIntersection);
    }
    Ok(cam.agl / denom)
}

/// Intersects the viewing ray through a pixel with the ground plane.
pub fn pixel_to_ground(xp: f64, yp: f64, cam: &CameraModel) -> Result<Point3, CameraError> {
    let (xi, yi) = pixel_to_image(xp, yp, cam);
    let t = ground_ray_parameter(yi, cam)?;
    Ok(Point3::new(xi * t, yi * t, cam.focal * t))
}

pub fn camera_to_pixel(p: &Point3, cam: &CameraModel) -> Result<(f64, f64), CameraError> {
    if !(p.z > 0.0) {
        return Err(CameraError::BehindCamera { z: p.z });
    }
    let xi = cam.focal * p.x / p.z;
    let yi = cam.focal * p.y / p.z;
    Ok(image_to_pixel(xi, yi, cam))
}

/// The eight corners: bottom face first (towards the ground), each face in
/// order around the yaw-rotated rectangle.
pub fn box3_corners(b: &Box3, cam: &CameraModel) -> Result<[Point3; 8], CameraError> {
    let dims = [b.length, b.width, b.height];
    if !dims.iter().all(|d| d.is_finite() && *d >= 0.0) || !b.yaw.is_finite() {
        return Err(CameraError::InvalidBox);
    }
    let (u, v) = cam.ground_axes();
    let down = cam.ground_normal();
    let (sy, cy) = (math::sin(b.yaw), math::cos(b.yaw));
    let along = u.scaled(cy).plus(v.scaled(sy));
    let across = u.scaled(-sy).plus(v.scaled(cy));
    let (hl, hw, hh) = (b.length / 2.0, b.width / 2.0, b.height / 2.0);
    let footprint = [(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)];
    let mut out = [Point3::default(); 8];
    for (face, dz) in [hh, -hh].into_iter().enumerate() {
        for (i, (dl, dw)) in footprint.iter().enumerate() {
            out[face * 4 + i] = b
                .center
                .plus(along.scaled(*dl))
                .plus(across.scaled(*dw))
                .plus(down.scaled(dz));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedBox {
    pub pixels: [(f64, f64); 8],
    /// Normalized enclosing box of the projected corners, clamped to the image.
    pub hbb: Hbb,
}

pub fn project_box3(b: &Box3, cam: &CameraModel) -> Result<ProjectedBox, CameraError> {
    let corners = box3_corners(b, cam)?;
    let mut pixels = [(0.0, 0.0); 8];
    for (slot, p) in pixels.iter_mut().zip(&corners) {
        *slot = camera_to_pixel(p, cam)?;
    }
    let (mut x1, mut y1, mut x2, mut y2) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pixels {
        x1 = x1.min(x);
        y1 = y1.min(y);
        x2 = x2.max(x);
        y2 = y2.max(y);
    }
    let hbb = Hbb::spanning(x1 / cam.width, y1 / cam.height, x2 / cam.width, y2 / cam.height)?;
    Ok(ProjectedBox { pixels, hbb })
}
