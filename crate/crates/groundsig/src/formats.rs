//! On-disk schemas. Every record is one JSON object per line.
//!
//! Annotation lines are in pixel space; prediction and signal lines are in
//! normalized coordinates. See `docs/formats.md` for the full field list.

use groundsig_core::camera::{Box3, CameraModel, Point3};
use groundsig_core::geometry::{upsample, GeometryError, GridMask, Hbb, Obb, PixelMask};
use groundsig_core::instruct::{AnnotatedMask, Annotation, InstructionRecord};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("image dimensions must be positive")]
    Dimensions,
    #[error("mask size {found:?} does not match the image ({width}x{height})")]
    MaskSize { found: [usize; 2], width: u32, height: u32 },
    #[error("mask run lengths sum to {found}, expected {expected}")]
    MaskRuns { found: u64, expected: u64 },
    #[error("grid row {row} has {found} cells, expected {expected}")]
    GridRow { row: usize, found: usize, expected: usize },
    #[error("grid row {row} has a character other than 0 or 1")]
    GridChar { row: usize },
    #[error("{0}")]
    Camera(#[from] groundsig_core::camera::CameraError),
}

/// Mask as stored in files: uncompressed COCO-style run lengths over pixels
/// (column-major, starting with a background run) or grid rows of `0`/`1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaskJson {
    Rle { size: [usize; 2], counts: Vec<u64> },
    Grid(Vec<String>),
}

pub fn grid_from_rows(rows: &[String]) -> Result<GridMask, FormatError> {
    let n = rows.len();
    let mut cells = Vec::with_capacity(n * n);
    for (row, s) in rows.iter().enumerate() {
        if s.len() != n {
            return Err(FormatError::GridRow { row, found: s.len(), expected: n });
        }
        for b in s.bytes() {
            match b {
                b'0' => cells.push(false),
                b'1' => cells.push(true),
                _ => return Err(FormatError::GridChar { row }),
            }
        }
    }
    Ok(GridMask::new(n, cells)?)
}

pub fn grid_to_rows(grid: &GridMask) -> Vec<String> {
    (0..grid.n())
        .map(|r| grid.row(r).iter().map(|&b| if b { '1' } else { '0' }).collect())
        .collect()
}

/// Decodes column-major run lengths; `size` is `[height, width]`.
pub fn pixels_from_rle(size: [usize; 2], counts: &[u64]) -> Result<PixelMask, FormatError> {
    let [h, w] = size;
    let expected = (h * w) as u64;
    let found: u64 = counts.iter().sum();
    if found != expected {
        return Err(FormatError::MaskRuns { found, expected });
    }
    let mut mask = PixelMask::empty(w, h)?;
    let mut pos = 0usize;
    for (i, &k) in counts.iter().enumerate() {
        if i % 2 == 1 {
            for p in pos..pos + k as usize {
                mask.set(p / h, p % h, true);
            }
        }
        pos += k as usize;
    }
    Ok(mask)
}

pub fn rle_from_pixels(mask: &PixelMask) -> MaskJson {
    let (w, h) = (mask.width(), mask.height());
    let mut counts = Vec::new();
    let (mut current, mut run) = (false, 0u64);
    for x in 0..w {
        for y in 0..h {
            let v = mask.get(x, y);
            if v != current {
                counts.push(run);
                current = v;
                run = 0;
            }
            run += 1;
        }
    }
    counts.push(run);
    MaskJson::Rle { size: [h, w], counts }
}

/// One annotated object, pixel space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationLine {
    #[serde(default, alias = "sample_id", skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub image: String,
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub expression: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    /// `[x1, y1, x2, y2]` pixels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbb: Option<[f64; 4]>,
    /// `[cx, cy, w, h, theta_deg]` pixels / degrees; `w` runs along `theta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obb: Option<[f64; 5]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<MaskJson>,
}

impl AnnotationLine {
    pub fn to_annotation(&self) -> Result<Annotation, FormatError> {
        if self.width == 0 || self.height == 0 {
            return Err(FormatError::Dimensions);
        }
        let (w, h) = (self.width as f64, self.height as f64);
        let hbb = self.hbb.map(|c| Hbb::from_pixels(c, w, h)).transpose()?;
        let obb = self.obb.map(|c| Obb::from_pixels(c, w, h)).transpose()?;
        let mask = match &self.mask {
            None => None,
            Some(MaskJson::Grid(rows)) => Some(AnnotatedMask::Grid(grid_from_rows(rows)?)),
            Some(MaskJson::Rle { size, counts }) => {
                if *size != [self.height as usize, self.width as usize] {
                    return Err(FormatError::MaskSize { found: *size, width: self.width, height: self.height });
                }
                Some(AnnotatedMask::Pixels(pixels_from_rle(*size, counts)?))
            }
        };
        Ok(Annotation {
            image_id: self.image.clone(),
            image_width: self.width,
            image_height: self.height,
            expression: self.expression.clone(),
            hbb,
            obb,
            mask,
            category: self.category.clone(),
        })
    }

    /// Full-resolution mask, upsampling grid masks to the image size.
    pub fn pixel_mask(&self) -> Result<Option<PixelMask>, FormatError> {
        match self.to_annotation()?.mask {
            None => Ok(None),
            Some(AnnotatedMask::Pixels(p)) => Ok(Some(p)),
            Some(AnnotatedMask::Grid(g)) => Ok(Some(upsample(&g, self.width as usize, self.height as usize)?)),
        }
    }
}

/// Normalized signals, as read by `encode` and by evaluation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalLine {
    #[serde(default, alias = "sample_id", skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, alias = "text", skip_serializing_if = "Option::is_none")]
    pub raw_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbb: Option<[f64; 4]>,
    /// `[cx, cy, w, h, angle_deg]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obb: Option<[f64; 5]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<String>>,
}

pub fn hbb_from_array(a: [f64; 4]) -> Result<Hbb, GeometryError> {
    Hbb::new(a[0], a[1], a[2], a[3])
}

pub fn obb_from_array(a: [f64; 5]) -> Result<Obb, GeometryError> {
    Obb::new(a[0], a[1], a[2], a[3], a[4])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TurnJson {
    pub from: String,
    pub value: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstructionLine {
    pub id: String,
    pub image: String,
    pub conversations: Vec<TurnJson>,
    pub task: String,
    pub meta: InstructionMeta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstructionMeta {
    pub template: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_source: Option<String>,
}

impl InstructionLine {
    pub fn from_record(id: String, r: &InstructionRecord) -> Self {
        Self {
            id,
            image: r.image_id.clone(),
            conversations: r
                .conversations
                .iter()
                .map(|t| TurnJson { from: t.role.name().to_string(), value: t.text.clone() })
                .collect(),
            task: r.task.to_string(),
            meta: InstructionMeta {
                template: r.template_index,
                mask_source: r.mask_source.map(|m| m.name().to_string()),
            },
        }
    }
}

/// Camera parameter file. `theta_deg` is the pitch below horizontal.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraJson {
    pub p: f64,
    pub f: f64,
    pub w: f64,
    pub h: f64,
    pub theta_deg: f64,
    #[serde(rename = "H")]
    pub agl: f64,
}

impl CameraJson {
    pub fn to_model(&self) -> Result<CameraModel, FormatError> {
        Ok(CameraModel::new(self.p, self.f, self.w, self.h, self.theta_deg.to_radians(), self.agl)?)
    }
}

/// A 3D box in the camera frame, meters; `yaw_deg` in the ground plane.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Box3Line {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub center: [f64; 3],
    pub length: f64,
    pub width: f64,
    pub height: f64,
    #[serde(default)]
    pub yaw_deg: f64,
}

impl Box3Line {
    pub fn to_box(&self) -> Box3 {
        let [x, y, z] = self.center;
        Box3 {
            center: Point3::new(x, y, z),
            length: self.length,
            width: self.width,
            height: self.height,
            yaw: self.yaw_deg.to_radians(),
        }
    }
}

/// Input for prompt generation: the model's coarse mask and box for one
/// object, either as raw model text or as parsed values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineLine {
    #[serde(default, alias = "sample_id", skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub image: String,
    pub width: usize,
    pub height: usize,
    #[serde(default, alias = "text", skip_serializing_if = "Option::is_none")]
    pub raw_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbb: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PromptBundle {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub image: String,
    #[serde(rename = "box")]
    pub box_px: [f64; 4],
    pub point_coords: Vec<[u32; 2]>,
    pub point_labels: Vec<u8>,
    pub fallback_box_only: bool,
}

/// Header written as the first line of every JSONL artifact.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: Value,
}

impl Provenance {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
        }
    }

    pub fn header_line(&self) -> String {
        serde_json::json!({ "provenance": self }).to_string()
    }
}

/// Whether a JSONL line is a provenance header.
pub fn is_header(line: &str) -> bool {
    line.trim_start().starts_with("{\"provenance\"")
}
