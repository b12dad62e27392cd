//! Stable 64-bit seed derivation for sweep cells. splitmix64 is fixed by
//! construction, so derived seeds never change across releases.

/// splitmix64 step.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Combine a master seed with a path of indices into one stable seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &part in path {
        state = splitmix64(state ^ splitmix64(part.wrapping_add(0xA5A5A5A5A5A5A5A5)));
    }
    state
}

/// World seed: shared by every (γ, θ, k) cell of one replicate.
pub fn world_seed(master: u64, replicate: usize) -> u64 {
    derive_seed(master, &[replicate as u64])
}

/// Noise-realization seed: shared by every (θ, k) cell of one
/// (replicate, γ) pair, so sweeps compare the same noisy labels under
/// different training weights.
pub fn noise_seed(master: u64, replicate: usize, gamma_index: usize) -> u64 {
    derive_seed(master, &[replicate as u64, gamma_index as u64])
}
