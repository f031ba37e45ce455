//! Float helpers backed by `libm`, since `core` has no float intrinsics.

pub(crate) use libm::{atan2, cos, fabs as abs, sin, sqrt};

pub(crate) const DEG_TO_RAD: f64 = core::f64::consts::PI / 180.0;
pub(crate) const RAD_TO_DEG: f64 = 180.0 / core::f64::consts::PI;

/// Floored remainder in `[0, m)` for positive `m`.
pub(crate) fn rem_euclid(x: f64, m: f64) -> f64 {
    let r = libm::fmod(x, m);
    if r < 0.0 {
        r + m
    } else {
        r
    }
}

/// SplitMix64 finalizer, used to derive independent per-item seeds.
pub(crate) fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
