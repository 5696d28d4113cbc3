//! Counter-derived random streams.
//!
//! Every random decision is drawn from a stream keyed by
//! `(seed, step, purpose, id)`, so results never depend on scheduling.

use rand::SeedableRng;
pub use rand_pcg::Pcg64Mcg as StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Initial = 1,
    Boundary = 2,
    Tracking = 3,
    Resample = 4,
    Auxiliary = 5,
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, step: u64, purpose: Purpose, id: u64) -> StreamRng {
    let a = splitmix(seed ^ splitmix(step ^ splitmix(purpose as u64)));
    let b = splitmix(a ^ id.wrapping_mul(0xD1B5_4A32_D192_ED03));
    let state = ((a as u128) << 64) | b as u128;
    StreamRng::new(state | 1)
}

/// Seeded generator for ad-hoc use (tests, demos).
pub fn seeded(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}
