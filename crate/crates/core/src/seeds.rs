//! Deterministic derivation of child seeds from one root seed.

/// Stream tags for the consumers of the root seed.
pub mod stream {
    pub const PURE_CIRCUIT: u64 = 1;
    pub const LIN_VI: u64 = 2;
    pub const RESTART: u64 = 3;
    pub const GRAD_CHECK: u64 = 4;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for item `index` of stream `stream` under `root`.
pub fn derive(root: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(root ^ splitmix64(stream)) ^ index)
}
