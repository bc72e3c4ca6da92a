//! Splittable counter-based pseudo-random numbers.
//!
//! Every random draw in the crate flows from a single seed through
//! `Rng::derive`, so module-level streams (weight init, drop masks,
//! validation holdouts, ...) are independent of each other yet bit-exactly
//! reproducible across platforms. SplitMix64 keeps the implementation
//! dependency-free, which is what makes the determinism guarantees
//! checkable down to the last bit.

#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
    cached_normal: Option<f64>,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        // One warm-up mix so that small seeds (0, 1, 2, ...) land in
        // well-separated regions of the state space.
        let mut state = seed;
        splitmix64(&mut state);
        Rng {
            state,
            cached_normal: None,
        }
    }

    /// Fork an independent stream keyed by a label. Deriving never advances
    /// the parent state, so the set of streams a run uses cannot perturb
    /// sibling streams.
    pub fn derive(&self, label: &str) -> Rng {
        let mut state = self.state ^ fnv1a(label.as_bytes());
        splitmix64(&mut state);
        Rng {
            state,
            cached_normal: None,
        }
    }

    /// Fork an independent stream keyed by an integer (seed lists, sample
    /// indices, epoch counters).
    pub fn derive_u64(&self, key: u64) -> Rng {
        let mut state = self.state ^ key.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        splitmix64(&mut state);
        splitmix64(&mut state);
        Rng {
            state,
            cached_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        splitmix64(&mut self.state)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform in [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller; the spare value is cached so draws
    /// stay cheap and the stream stays deterministic.
    pub fn normal(&mut self) -> f64 {
        if let Some(v) = self.cached_normal.take() {
            return v;
        }
        // Rejection-free: u1 in (0,1].
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.cached_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn uniform_usize(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // Modulo bias is < 2^-40 for the sizes used here.
        (self.next_u64() % n as u64) as usize
    }

    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = self.uniform_usize(i + 1);
            slice.swap(i, j);
        }
    }

    /// Choose `k` distinct indices out of `0..n`, returned sorted.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot sample {k} of {n}");
        let mut pool: Vec<usize> = (0..n).collect();
        self.shuffle(&mut pool);
        let mut picked = pool[..k].to_vec();
        picked.sort_unstable();
        picked
    }
}
