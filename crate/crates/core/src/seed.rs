//! Stable seed derivation.
//!
//! Every random stream in the crate is keyed by a `u64` seed derived from a
//! master seed and a list of labels. The mixing functions below are fixed
//! (FNV-1a for strings, SplitMix64 finalizer for chaining) so derived seeds
//! do not change between releases or platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One component of a seed derivation path.
#[derive(Debug, Clone, Copy)]
pub enum SeedPart<'a> {
    Int(u64),
    Str(&'a str),
    Float(f64),
}

impl From<u64> for SeedPart<'_> {
    fn from(v: u64) -> Self {
        SeedPart::Int(v)
    }
}

impl From<usize> for SeedPart<'_> {
    fn from(v: usize) -> Self {
        SeedPart::Int(v as u64)
    }
}

impl<'a> From<&'a str> for SeedPart<'a> {
    fn from(v: &'a str) -> Self {
        SeedPart::Str(v)
    }
}

impl From<f64> for SeedPart<'_> {
    fn from(v: f64) -> Self {
        SeedPart::Float(v)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derive a child seed from `master` and an ordered list of parts.
pub fn derive(master: u64, parts: &[SeedPart<'_>]) -> u64 {
    let mut h = splitmix(master);
    for (i, part) in parts.iter().enumerate() {
        let v = match *part {
            SeedPart::Int(v) => v,
            SeedPart::Str(s) => fnv1a(s),
            // canonicalize -0.0 so it derives the same seed as 0.0
            SeedPart::Float(f) => (if f == 0.0 { 0.0 } else { f }).to_bits(),
        };
        h = splitmix(h ^ splitmix(v.wrapping_add(i as u64)));
    }
    h
}

/// Shorthand for `derive(master, &[a.into(), b.into(), ...])`.
#[macro_export]
macro_rules! derive_seed {
    ($master:expr $(, $part:expr)* $(,)?) => {
        $crate::seed::derive($master, &[$($crate::seed::SeedPart::from($part)),*])
    };
}

/// The generator used for every stream in the crate.
pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A generator on an independent stream of the same key.
pub fn rng_stream(seed: u64, stream: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}
