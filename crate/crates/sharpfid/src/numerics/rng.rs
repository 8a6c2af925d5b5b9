//! Seeded, stream-addressable random numbers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Streams with the same seed but different ids are independent ChaCha
/// streams, so parallel workers or chains never share draws.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream with the same seed and another id.
    pub fn fork(&self, stream_id: u64) -> Self {
        RngStream::new(self.seed, stream_id)
    }
}

impl RngCore for RngStream {
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

/// Uniform draw on the open interval (0, 1) with 53 random bits.
#[inline]
pub fn uniform_open(rng: &mut dyn RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Draws per partition in [`partitioned_draws`].
pub const PARTITION: usize = 1 << 16;

/// `n` independent draws from `draw`, split into fixed partitions of
/// [`PARTITION`] draws. Partition k uses stream `stream_base + k` of
/// `seed`, so the output does not depend on how many threads run.
pub fn partitioned_draws<T, F>(seed: u64, stream_base: u64, n: usize, draw: F) -> crate::Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RngStream) -> crate::Result<T> + Sync,
{
    let parts = n.div_ceil(PARTITION);
    let run = |k: usize| -> crate::Result<Vec<T>> {
        let mut rng = RngStream::new(seed, stream_base + k as u64);
        let len = PARTITION.min(n - k * PARTITION);
        (0..len).map(|_| draw(&mut rng)).collect()
    };
    let workers = std::thread::available_parallelism().map_or(1, |w| w.get()).min(parts.max(1));
    let mut chunks: Vec<Option<crate::Result<Vec<T>>>> = (0..parts).map(|_| None).collect();
    if workers <= 1 {
        for (k, c) in chunks.iter_mut().enumerate() {
            *c = Some(run(k));
        }
    } else {
        let done: Vec<Vec<(usize, crate::Result<Vec<T>>)>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|t| {
                    let run = &run;
                    s.spawn(move || (t..parts).step_by(workers).map(|k| (k, run(k))).collect::<Vec<_>>())
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("sampling worker panicked")).collect()
        });
        for (k, r) in done.into_iter().flatten() {
            chunks[k] = Some(r);
        }
    }
    let mut out = Vec::with_capacity(n);
    for c in chunks {
        out.extend(c.expect("every partition is filled")?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_stream_is_bit_identical() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = RngStream::new(7, 0);
        let mut b = RngStream::new(7, 1);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn uniform_is_open() {
        let mut r = RngStream::new(1, 0);
        for _ in 0..10_000 {
            let u = uniform_open(&mut r);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn partitions_are_deterministic_and_ordered() {
        let n = PARTITION + 17;
        let a = partitioned_draws(5, 100, n, |r| Ok(uniform_open(r))).unwrap();
        let b = partitioned_draws(5, 100, n, |r| Ok(uniform_open(r))).unwrap();
        assert_eq!(a.len(), n);
        assert_eq!(a, b);
        let mut second = RngStream::new(5, 101);
        assert_eq!(a[PARTITION], uniform_open(&mut second));
    }
}
