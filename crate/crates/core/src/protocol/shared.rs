use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Real;
use crate::sphere::{uniform_sample, GeometryError, UnitVector};

const LAMBDA_TAG: u64 = 0x6c61_6d62_6461_0001;
const ACCEPT_TAG: u64 = 0x6163_6365_7074_0002;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministically derives a child seed from `base` and a path of labels.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut state = base;
    let mut out = splitmix64(&mut state);
    for &p in path {
        state ^= p.wrapping_mul(0xd6e8_feb8_6659_fd93);
        out = splitmix64(&mut state) ^ out.rotate_left(17);
    }
    out
}

fn key(seed: u64, tag: u64) -> [u8; 32] {
    let mut state = seed ^ tag;
    let mut k = [0u8; 32];
    for chunk in k.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    k
}

/// Randomness both parties derive from one 64-bit seed.
///
/// The candidate stream is indexed: `λ_k` is drawn from ChaCha stream `k`
/// under the candidate key, so any party can regenerate `λ_k` from the seed
/// and `k` alone. Acceptance coins come from a separate key and are only
/// consumed by Alice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedRandomness {
    seed: u64,
    lambda_key: [u8; 32],
    accept_key: [u8; 32],
}

impl SharedRandomness {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            lambda_key: key(seed, LAMBDA_TAG),
            accept_key: key(seed, ACCEPT_TAG),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `λ_k` on `S_n`, `k ≥ 1`.
    pub fn lambda_at<T: Real>(&self, n: usize, k: u64) -> Result<UnitVector<T>, GeometryError> {
        let mut rng = ChaCha8Rng::from_seed(self.lambda_key);
        rng.set_stream(k);
        uniform_sample(n, &mut rng)
    }

    pub fn accept_stream(&self) -> AcceptStream {
        AcceptStream {
            rng: ChaCha8Rng::from_seed(self.accept_key),
        }
    }
}

/// Sequential uniform `[0, 1)` coins for Alice's acceptance tests.
#[derive(Debug, Clone)]
pub struct AcceptStream {
    rng: ChaCha8Rng,
}

impl AcceptStream {
    pub fn next_uniform<T: Real>(&mut self) -> T {
        T::sample_unit_interval(&mut self.rng)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}
