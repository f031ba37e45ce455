//! Grounding-signal toolkit core.
//!
//! Pure, allocation-only building blocks for working with the three
//! visual-grounding signal kinds used by text-output vision-language models:
//!
//! - [`geometry`]: horizontal boxes, oriented boxes and grid masks, plus
//!   conversions and overlap measures between them.
//! - [`textcodec`]: the tagged text forms (`<box>`, `<obb>`, `<seg>`) and a
//!   tolerant extractor for free-form model output.
//! - [`camera`]: pinhole camera / flat-ground geometry for oblique aerial
//!   imagery and 3D box projection.
//! - [`instruct`]: instruction-sample builders, including prompt-assisted and
//!   geometry-guided samples.
//! - [`eval`]: Acc@0.5, mIoU, box consistency score and mask statistics.
//! - [`refine`]: point/box prompt construction for promptable segmenters.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, batch drivers
//! and the command line live in the `groundsig` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod camera;
pub mod eval;
pub mod geometry;
pub mod instruct;
pub mod refine;
pub mod textcodec;

mod math;

pub use geometry::{GeometryError, GridMask, Hbb, Obb, PixelMask, Point2, Quad, Resample};
pub use textcodec::{CodecConfig, CodecError, Signal, SignalKind, TextSignal};

/// Derives an independent seed from `seed` and `salt` (SplitMix64 mixing).
///
/// Used wherever per-item randomness must not depend on processing order.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    math::mix_seed(seed, salt)
}

