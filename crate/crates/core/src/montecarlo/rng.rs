//! Counter-based standard complex Gaussians.
//!
//! Each draw is addressed by `(seed, stream, slot)`: the ChaCha8 key comes
//! from the seed, the stream selects the sample, and the slot positions the
//! keystream. Any schedule of parallel workers therefore sees identical bits.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator positioned at the start of one stream.
pub(crate) struct GaussianStream {
    rng: ChaCha8Rng,
}

impl GaussianStream {
    pub(crate) fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng.set_word_pos(0);
        GaussianStream { rng }
    }

    /// Positions the stream so the next draw is slot `slot` (each slot uses
    /// four 32-bit words).
    #[cfg(test)]
    pub(crate) fn seek(&mut self, slot: u64) {
        self.rng.set_word_pos(u128::from(slot) * 4);
    }

    /// Uniform on `(0, 1]` with 53 random bits.
    fn open_unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard complex Gaussian (`E|c|² = 1`, `E c² = 0`) by Box–Muller:
    /// `|c|² = -ln u₁` is Exp(1) and the phase `2πu₂` is uniform.
    pub(crate) fn next_gaussian(&mut self) -> Complex64 {
        let u1 = self.open_unit();
        let u2 = self.open_unit();
        Complex64::from_polar((-u1.ln()).sqrt(), TAU * u2)
    }
}

/// `n` standard complex Gaussians for `(seed, stream)`; slot `j` is the `j`-th.
pub(crate) fn gaussian_vector(seed: u64, stream: u64, n: usize) -> Vec<Complex64> {
    let mut g = GaussianStream::new(seed, stream);
    (0..n).map(|_| g.next_gaussian()).collect()
}
