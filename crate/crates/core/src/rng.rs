//! One user seed drives every random stage; each stage draws from its own
//! ChaCha stream so adding draws in one stage never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn stream_id(stage: &str) -> u64 {
    // FNV-1a; stable across platforms and releases.
    stage.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

pub fn stage_rng(seed: u64, stage: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(stage));
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn stages_are_independent_and_reproducible() {
        let a: u64 = stage_rng(7, "variants").gen();
        let b: u64 = stage_rng(7, "variants").gen();
        let c: u64 = stage_rng(7, "choices").gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
