use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded, splittable generator. The stream for a given `(seed, stream)` pair
/// is identical on every platform, so parallel sections that split one
/// stream per block stay deterministic regardless of scheduling.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator for sub-stream `stream` of this seed.
    pub fn split(&self, stream: u64) -> Rng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(stream.wrapping_add(1));
        Rng {
            seed: self.seed,
            inner,
        }
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Uniformly random permutation of `0..n` (Fisher-Yates).
pub fn random_permutation(n: usize, rng: &mut Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

#[cfg(test)]
mod tests {
    use super::{random_permutation, Rng, RngCore};
    use proptest::prelude::*;

    #[test]
    fn small_cases() {
        assert!(random_permutation(0, &mut Rng::new(1)).is_empty());
        assert_eq!(random_permutation(1, &mut Rng::new(1)), vec![0]);
        let a = random_permutation(4, &mut Rng::new(7));
        let b = random_permutation(4, &mut Rng::new(7));
        assert_eq!(a, b);
        let mut s = a.clone();
        s.sort();
        assert_eq!(s, vec![0, 1, 2, 3]);
    }

    #[test]
    fn split_streams_differ_and_repeat() {
        let r = Rng::new(42);
        let a: Vec<u64> = (0..4).map({
            let mut g = r.split(3);
            move |_| g.next_u64()
        }).collect();
        let b: Vec<u64> = (0..4).map({
            let mut g = r.split(3);
            move |_| g.next_u64()
        }).collect();
        let c = r.split(4).next_u64();
        assert_eq!(a, b);
        assert_ne!(a[0], c);
    }

    proptest! {
        #[test]
        fn permutation_is_bijection(n in 0usize..500, seed: u64) {
            let mut p = random_permutation(n, &mut Rng::new(seed));
            p.sort_unstable();
            prop_assert!(p.into_iter().eq(0..n));
        }
    }
}
