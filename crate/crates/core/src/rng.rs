//! Counter-based pseudo-random streams.
//!
//! Every draw is a pure function of (key, index), and keys derive from a seed
//! by explicit splitting, so a Monte-Carlo run partitioned across any number
//! of threads produces bit-identical results: trial `t` always consumes the
//! stream `root.child(t)` regardless of which worker evaluates it.
//!
//! The generator is the splitmix64 finalizer applied to a keyed counter,
//! which is the standard counter-mode use of that mixer.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer: a bijective 64-bit mixer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A splittable stream of uniform draws addressed by index.
///
/// `Copy` on purpose: a stream is just a key; drawing does not mutate it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stream {
    key: u64,
}

impl Stream {
    /// Root stream for a seed.
    pub fn new(seed: u64) -> Self {
        Stream { key: mix(seed.wrapping_add(GOLDEN)) }
    }

    /// Derive an independent child stream (per trial, per substream, ...).
    pub fn child(self, index: u64) -> Self {
        Stream { key: mix(self.key ^ mix(index.wrapping_add(1).wrapping_mul(GOLDEN))) }
    }

    /// 64 pseudo-random bits at position `i`; independent of call order.
    #[inline]
    pub fn bits_at(self, i: u64) -> u64 {
        mix(self.key.wrapping_add(i.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    /// Uniform draw in the open interval (0,1); never exactly 0 or 1.
    #[inline]
    pub fn unit_at(self, i: u64) -> f64 {
        ((self.bits_at(i) >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}
