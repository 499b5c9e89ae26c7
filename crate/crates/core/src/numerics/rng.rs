//! Counter-based RNG construction: every (seed, stream, counter) triple maps
//! to an independent ChaCha12 generator, so trials can be distributed across
//! any number of workers without changing the sampled values.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 state advance; standard finalizer constants.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for one (stream, counter) cell of a seeded
/// experiment. The 256-bit ChaCha key is derived by chaining SplitMix64 over
/// the three inputs, so distinct triples get unrelated keys.
pub fn counter_rng(seed: u64, stream: u64, counter: u64) -> ChaCha12Rng {
    let mut state = seed;
    let a = splitmix64(&mut state);
    state ^= stream.wrapping_mul(0xA24B_AED4_963E_E407);
    let b = splitmix64(&mut state);
    state ^= counter.wrapping_mul(0x9FB2_1C65_1E98_DF25);
    let c = splitmix64(&mut state);
    let d = splitmix64(&mut state);
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&a.to_le_bytes());
    key[8..16].copy_from_slice(&b.to_le_bytes());
    key[16..24].copy_from_slice(&c.to_le_bytes());
    key[24..32].copy_from_slice(&d.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn reproducible_and_distinct() {
        let mut r1 = counter_rng(7, 3, 11);
        let mut r2 = counter_rng(7, 3, 11);
        let a: [u64; 4] = [r1.gen(), r1.gen(), r1.gen(), r1.gen()];
        let b: [u64; 4] = [r2.gen(), r2.gen(), r2.gen(), r2.gen()];
        assert_eq!(a, b);

        let mut r3 = counter_rng(7, 3, 12);
        let c: u64 = r3.gen();
        assert_ne!(a[0], c);
        let mut r4 = counter_rng(7, 4, 11);
        let d: u64 = r4.gen();
        assert_ne!(a[0], d);
        let mut r5 = counter_rng(8, 3, 11);
        let e: u64 = r5.gen();
        assert_ne!(a[0], e);
    }

    #[test]
    fn splitmix_reference_values() {
        // First outputs from state 0; fixed by the algorithm definition.
        let mut s = 0u64;
        assert_eq!(splitmix64(&mut s), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(&mut s), 0x6E78_9E6A_A1B9_65F4);
    }
}
