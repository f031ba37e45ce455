//! Tagged text forms of the grounding signals.
//!
//! | kind | payload                        |
//! |------|--------------------------------|
//! | hbb  | `<box>[x1,y1,x2,y2]</box>`     |
//! | obb  | `<obb>(cx,cy,w,h,angle)</obb>` |
//! | mask | `<seg>row|row|...</seg>`       |
//!
//! Linear values are quantized as `min(floor(v * R), R - 1)` and decoded at
//! the cell center `(q + 0.5) / R`. OBB angles are whole degrees in
//! `[0, 89]`. Mask rows are either raw `0`/`1` strings or run lists
//! `v*k,v*k,...`; the decoder tells them apart per row.

mod extract;
mod mask;

pub use extract::{extract_signals, Extraction, SkipReason, SkippedSpan};
pub use mask::{decode_mask, encode_mask, mask_body_len, rle_row};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::geometry::{GeometryError, Hbb, Obb};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignalKind {
    Hbb,
    Obb,
    Mask,
}

impl SignalKind {
    pub const ALL: [SignalKind; 3] = [SignalKind::Hbb, SignalKind::Obb, SignalKind::Mask];

    /// Tag name used in the wrapper, e.g. `box` for `<box>...</box>`.
    pub fn tag(self) -> &'static str {
        match self {
            SignalKind::Hbb => "box",
            SignalKind::Obb => "obb",
            SignalKind::Mask => "seg",
        }
    }

    pub fn open_tag(self) -> &'static str {
        match self {
            SignalKind::Hbb => "<box>",
            SignalKind::Obb => "<obb>",
            SignalKind::Mask => "<seg>",
        }
    }

    pub fn close_tag(self) -> &'static str {
        match self {
            SignalKind::Hbb => "</box>",
            SignalKind::Obb => "</obb>",
            SignalKind::Mask => "</seg>",
        }
    }

    /// Lower-case name used in file formats.
    pub fn name(self) -> &'static str {
        match self {
            SignalKind::Hbb => "hbb",
            SignalKind::Obb => "obb",
            SignalKind::Mask => "mask",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "hbb" => Some(SignalKind::Hbb),
            "obb" => Some(SignalKind::Obb),
            "mask" => Some(SignalKind::Mask),
            _ => None,
        }
    }
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Quantization settings shared by all codecs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodecConfig {
    pub hbb_resolution: u32,
    pub obb_resolution: u32,
    pub mask_resolution: usize,
    pub rle: bool,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self { hbb_resolution: 1000, obb_resolution: 100, mask_resolution: 32, rle: true }
    }
}

impl CodecConfig {
    pub fn validate(&self) -> Result<(), CodecError> {
        if self.hbb_resolution < 2 || self.obb_resolution < 2 || self.mask_resolution < 2 {
            return Err(CodecError::Config);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("resolutions must all be at least 2")]
    Config,
    #[error("expected a {expected} signal, found {found}")]
    WrongKind { expected: SignalKind, found: SignalKind },
    #[error("payload is not wrapped in a known signal tag")]
    Unwrapped,
    #[error("malformed signal at byte {offset}: {reason}")]
    Malformed { offset: usize, reason: &'static str },
    #[error("expected an integer at byte {offset}")]
    InvalidNumber { offset: usize },
    #[error("expected {expected} values, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("value {value} at byte {offset} is outside [0, {limit})")]
    OutOfRange { offset: usize, value: i64, limit: u32 },
    #[error("angle {value} is outside [0, 90)")]
    AngleRange { value: i64 },
    #[error("mask has {found} rows, expected {expected}")]
    RowCount { expected: usize, found: usize },
    #[error("row {row} has {found} cells, expected {expected}")]
    RowLength { row: usize, expected: usize, found: usize },
    #[error("runs in row {row} sum to {found}, expected {expected}")]
    RunSum { row: usize, expected: usize, found: usize },
    #[error("illegal character {ch:?} at byte {offset}")]
    IllegalChar { offset: usize, ch: char },
    #[error("grid resolution {found} does not match the configured {expected}")]
    ResolutionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A signal in its tagged text form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TextSignal {
    kind: SignalKind,
    payload: String,
}

impl TextSignal {
    /// Wraps an already-tagged payload after checking the tags.
    pub fn new(kind: SignalKind, payload: String) -> Result<Self, CodecError> {
        if payload.len() >= kind.open_tag().len() + kind.close_tag().len()
            && payload.starts_with(kind.open_tag())
            && payload.ends_with(kind.close_tag())
        {
            Ok(Self { kind, payload })
        } else {
            Err(CodecError::Unwrapped)
        }
    }

    /// Detects the kind from the opening tag.
    pub fn parse(payload: &str) -> Result<Self, CodecError> {
        let payload = payload.trim();
        let kind = SignalKind::ALL
            .into_iter()
            .find(|k| payload.starts_with(k.open_tag()))
            .ok_or(CodecError::Unwrapped)?;
        Self::new(kind, String::from(payload))
    }

    pub(crate) fn wrap(kind: SignalKind, body: &str) -> Self {
        Self { kind, payload: format!("{}{}{}", kind.open_tag(), body, kind.close_tag()) }
    }

    pub fn kind(&self) -> SignalKind {
        self.kind
    }

    pub fn payload(&self) -> &str {
        &self.payload
    }

    pub fn into_payload(self) -> String {
        self.payload
    }

    /// Payload without the wrapper tags.
    pub fn body(&self) -> &str {
        &self.payload[self.kind.open_tag().len()..self.payload.len() - self.kind.close_tag().len()]
    }

    fn expect(&self, kind: SignalKind) -> Result<&str, CodecError> {
        if self.kind != kind {
            return Err(CodecError::WrongKind { expected: kind, found: self.kind });
        }
        Ok(self.body())
    }
}

impl fmt::Display for TextSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.payload)
    }
}

/// A decoded signal of any kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Signal {
    Hbb(Hbb),
    Obb(Obb),
    Mask(crate::geometry::GridMask),
}

impl Signal {
    pub fn kind(&self) -> SignalKind {
        match self {
            Signal::Hbb(_) => SignalKind::Hbb,
            Signal::Obb(_) => SignalKind::Obb,
            Signal::Mask(_) => SignalKind::Mask,
        }
    }

    pub fn encode(&self, cfg: &CodecConfig) -> Result<TextSignal, CodecError> {
        match self {
            Signal::Hbb(h) => Ok(encode_hbb(h, cfg)),
            Signal::Obb(o) => Ok(encode_obb(o, cfg)),
            Signal::Mask(g) => encode_mask(g, cfg),
        }
    }
}

/// Decodes a signal of whatever kind it carries.
pub fn decode(signal: &TextSignal, cfg: &CodecConfig) -> Result<Signal, CodecError> {
    match signal.kind() {
        SignalKind::Hbb => decode_hbb(signal, cfg).map(Signal::Hbb),
        SignalKind::Obb => decode_obb(signal, cfg).map(Signal::Obb),
        SignalKind::Mask => decode_mask(signal, cfg).map(Signal::Mask),
    }
}

pub fn quantize(value: f64, resolution: u32) -> u32 {
    let q = libm::floor(value * resolution as f64);
    if q <= 0.0 {
        0
    } else {
        (q as u64).min(resolution as u64 - 1) as u32
    }
}

pub fn dequantize(q: u32, resolution: u32) -> f64 {
    (q as f64 + 0.5) / resolution as f64
}

pub fn encode_hbb(hbb: &Hbb, cfg: &CodecConfig) -> TextSignal {
    let r = cfg.hbb_resolution;
    let [x1, y1, x2, y2] = hbb.to_array().map(|v| quantize(v, r));
    TextSignal::wrap(SignalKind::Hbb, &format!("[{x1},{y1},{x2},{y2}]"))
}

pub fn decode_hbb(signal: &TextSignal, cfg: &CodecConfig) -> Result<Hbb, CodecError> {
    let body = signal.expect(SignalKind::Hbb)?;
    let base = SignalKind::Hbb.open_tag().len();
    let values = parse_tuple(body, base)?;
    if values.len() != 4 {
        return Err(CodecError::Arity { expected: 4, found: values.len() });
    }
    let r = cfg.hbb_resolution;
    let mut out = [0.0; 4];
    for (slot, &(offset, v)) in out.iter_mut().zip(&values) {
        *slot = dequantize(check_range(v, offset, r)?, r);
    }
    Ok(Hbb::spanning(out[0], out[1], out[2], out[3])?)
}

pub fn encode_obb(obb: &Obb, cfg: &CodecConfig) -> TextSignal {
    let r = cfg.obb_resolution;
    let [cx, cy, w, h, _] = obb.to_array().map(|v| quantize(v, r));
    let angle = (libm::floor(obb.angle_deg()) as i64).clamp(0, 89);
    TextSignal::wrap(SignalKind::Obb, &format!("({cx},{cy},{w},{h},{angle})"))
}

pub fn decode_obb(signal: &TextSignal, cfg: &CodecConfig) -> Result<Obb, CodecError> {
    let body = signal.expect(SignalKind::Obb)?;
    let base = SignalKind::Obb.open_tag().len();
    let values = parse_tuple(body, base)?;
    if values.len() != 5 {
        return Err(CodecError::Arity { expected: 5, found: values.len() });
    }
    let r = cfg.obb_resolution;
    let mut linear = [0.0; 4];
    for (slot, &(offset, v)) in linear.iter_mut().zip(&values) {
        *slot = dequantize(check_range(v, offset, r)?, r);
    }
    let angle = values[4].1;
    if !(0..90).contains(&angle) {
        return Err(CodecError::AngleRange { value: angle });
    }
    Ok(Obb::new(linear[0], linear[1], linear[2], linear[3], angle as f64)?)
}

fn check_range(v: i64, offset: usize, limit: u32) -> Result<u32, CodecError> {
    if (0..limit as i64).contains(&v) {
        Ok(v as u32)
    } else {
        Err(CodecError::OutOfRange { offset, value: v, limit })
    }
}

/// Parses `[a,b,...]` or `(a,b,...)` into `(byte offset, value)` pairs.
/// Offsets are shifted by `base` so they point into the full payload.
fn parse_tuple(body: &str, base: usize) -> Result<Vec<(usize, i64)>, CodecError> {
    let bytes = body.as_bytes();
    let mut i = skip_ws(bytes, 0);
    let close = match bytes.get(i) {
        Some(b'[') => b']',
        Some(b'(') => b')',
        _ => return Err(CodecError::Malformed { offset: base + i, reason: "expected '[' or '('" }),
    };
    i += 1;
    let mut values = Vec::new();
    loop {
        i = skip_ws(bytes, i);
        let start = i;
        if bytes.get(i) == Some(&b'-') {
            i += 1;
        }
        while bytes.get(i).is_some_and(u8::is_ascii_digit) {
            i += 1;
        }
        let token = &body[start..i];
        let value: i64 = token.parse().map_err(|_| CodecError::InvalidNumber { offset: base + start })?;
        values.push((base + start, value));
        i = skip_ws(bytes, i);
        match bytes.get(i) {
            Some(b',') => i += 1,
            Some(&c) if c == close => {
                i += 1;
                break;
            }
            Some(b'.') => return Err(CodecError::InvalidNumber { offset: base + start }),
            None => return Err(CodecError::Malformed { offset: base + i, reason: "unterminated value list" }),
            Some(_) => return Err(CodecError::Malformed { offset: base + i, reason: "expected ',' or closing bracket" }),
        }
    }
    i = skip_ws(bytes, i);
    if i != bytes.len() {
        return Err(CodecError::Malformed { offset: base + i, reason: "trailing characters" });
    }
    Ok(values)
}

fn skip_ws(bytes: &[u8], mut i: usize) -> usize {
    while bytes.get(i).is_some_and(u8::is_ascii_whitespace) {
        i += 1;
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> CodecConfig {
        CodecConfig::default()
    }

    fn sig(s: &str) -> TextSignal {
        TextSignal::parse(s).unwrap()
    }

    #[test]
    fn hbb_encoding() {
        let h = Hbb::new(0.25, 0.5, 0.75, 0.999).unwrap();
        assert_eq!(encode_hbb(&h, &cfg()).payload(), "<box>[250,500,750,999]</box>");
        let full = Hbb::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(encode_hbb(&full, &cfg()).payload(), "<box>[0,0,999,999]</box>");
    }

    #[test]
    fn hbb_decoding() {
        let h = decode_hbb(&sig("<box>[250,500,750,999]</box>"), &cfg()).unwrap();
        let want = [0.2505, 0.5005, 0.7505, 0.9995];
        for (a, b) in h.to_array().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        let swapped = decode_hbb(&sig("<box>[750,500,250,999]</box>"), &cfg()).unwrap();
        assert!(swapped.x1() <= swapped.x2());
        assert!((swapped.x1() - 0.2505).abs() < 1e-12);
        // either bracket style, tolerant whitespace
        let p = decode_hbb(&sig("<box>( 250, 500 ,750,999 )</box>"), &cfg()).unwrap();
        assert_eq!(p, h);
    }

    #[test]
    fn hbb_errors() {
        let c = cfg();
        assert_eq!(decode_hbb(&sig("<box>[1,2,3]</box>"), &c), Err(CodecError::Arity { expected: 4, found: 3 }));
        assert_eq!(decode_hbb(&sig("<box>[1,2,x,4]</box>"), &c), Err(CodecError::InvalidNumber { offset: 10 }));
        assert_eq!(decode_hbb(&sig("<box>[1,2.5,3,4]</box>"), &c), Err(CodecError::InvalidNumber { offset: 8 }));
        assert!(matches!(decode_hbb(&sig("<box>1,2,3,4</box>"), &c), Err(CodecError::Malformed { offset: 5, .. })));
        assert!(matches!(decode_hbb(&sig("<box>[1,2,3,4</box>"), &c), Err(CodecError::Malformed { .. })));
        assert!(matches!(decode_hbb(&sig("<box>[1,2,3,4)</box>"), &c), Err(CodecError::Malformed { .. })));
        assert!(matches!(decode_hbb(&sig("<box>[1,2,3,1000]</box>"), &c), Err(CodecError::OutOfRange { .. })));
        assert!(matches!(decode_hbb(&sig("<obb>(1,2,3,4,5)</obb>"), &c), Err(CodecError::WrongKind { .. })));
    }

    #[test]
    fn obb_encoding() {
        let o = Obb::new(0.5, 0.5, 0.4, 0.2, 45.7).unwrap();
        assert_eq!(encode_obb(&o, &cfg()).payload(), "<obb>(50,50,40,20,45)</obb>");
        let z = Obb::new(0.5, 0.5, 0.4, 0.2, 0.0).unwrap();
        assert!(encode_obb(&z, &cfg()).payload().ends_with(",0)</obb>"));
    }

    #[test]
    fn obb_decoding() {
        let o = decode_obb(&sig("<obb>(50,50,40,20,45)</obb>"), &cfg()).unwrap();
        assert_eq!(o.to_array(), [0.505, 0.505, 0.405, 0.205, 45.0]);
        assert_eq!(decode_obb(&sig("<obb>[50,50,40,20,90]</obb>"), &cfg()), Err(CodecError::AngleRange { value: 90 }));
        assert_eq!(decode_obb(&sig("<obb>(50,50,40,20,-1)</obb>"), &cfg()), Err(CodecError::AngleRange { value: -1 }));
        assert_eq!(decode_obb(&sig("<obb>(50,50,40,20)</obb>"), &cfg()), Err(CodecError::Arity { expected: 5, found: 4 }));
    }

    #[test]
    fn tag_checks() {
        assert_eq!(TextSignal::parse("[1,2,3,4]"), Err(CodecError::Unwrapped));
        assert_eq!(TextSignal::parse("<box>[1,2,3,4]"), Err(CodecError::Unwrapped));
        assert_eq!(sig("<seg>0|1</seg>").body(), "0|1");
    }

    #[test]
    fn encoding_is_deterministic() {
        let o = Obb::new(0.31, 0.72, 0.2, 0.05, 12.5).unwrap();
        assert_eq!(encode_obb(&o, &cfg()), encode_obb(&o, &cfg()));
    }
}
