use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

/// Seeded, reproducible source of draws for one sensor.
///
/// Streams derived from the same master seed with different labels are
/// independent, so adding a sensor never shifts another sensor's sequence.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn derive(master: u64, label: &str) -> Self {
        Self::new(splitmix64(master ^ fnv1a64(label.as_bytes())))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw in `[-half_width, half_width]`.
    pub fn uniform_symmetric(&mut self, half_width: f64) -> f64 {
        if half_width <= 0.0 {
            return 0.0;
        }
        Uniform::new_inclusive(-half_width, half_width)
            .expect("finite positive width")
            .sample(&mut self.rng)
    }

    pub fn gaussian(&mut self, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return 0.0;
        }
        Normal::new(0.0, sigma)
            .expect("finite positive sigma")
            .sample(&mut self.rng)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
