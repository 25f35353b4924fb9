//! Block-parallel Monte Carlo with an order-fixed reduction.
//!
//! Trials are cut into blocks of `block_size`; block `i` draws from stream
//! `stream_base + i` of the seed. Block partials are merged sequentially in
//! block order, so a result depends on `(seed, stream_base, block_size, n)`
//! and not on the number of workers.

use rayon::prelude::*;

use crate::rng::RngStream;

pub const DEFAULT_BLOCK_SIZE: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonteCarlo {
    pub seed: u64,
    pub stream_base: u64,
    pub block_size: usize,
    /// Worker threads; `0` uses all available cores.
    pub workers: usize,
}

impl MonteCarlo {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            stream_base: 0,
            block_size: DEFAULT_BLOCK_SIZE,
            workers: 0,
        }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self { workers, ..self }
    }

    pub fn with_block_size(self, block_size: usize) -> Self {
        Self {
            block_size: block_size.max(1),
            ..self
        }
    }

    pub fn with_stream_base(self, stream_base: u64) -> Self {
        Self {
            stream_base,
            ..self
        }
    }

    /// Mean and spread of `trial` over `n` independent draws.
    pub fn run<F>(&self, n: usize, trial: F) -> Moments
    where
        F: Fn(&mut RngStream) -> f64 + Sync,
    {
        self.run_vec(n, 1, |rng, out| out[0] = trial(rng))[0]
    }

    /// Like [`MonteCarlo::run`] for trials producing `dim` statistics each.
    pub fn run_vec<F>(&self, n: usize, dim: usize, trial: F) -> Vec<Moments>
    where
        F: Fn(&mut RngStream, &mut [f64]) + Sync,
    {
        let bs = self.block_size.max(1);
        let blocks = n.div_ceil(bs);
        let block = |i: usize| {
            let len = bs.min(n - i * bs);
            let mut rng = RngStream::new(self.seed, self.stream_base.wrapping_add(i as u64));
            let mut m = vec![Moments::default(); dim];
            let mut buf = vec![0.0; dim];
            for _ in 0..len {
                trial(&mut rng, &mut buf);
                for (acc, &x) in m.iter_mut().zip(&buf) {
                    acc.push(x);
                }
            }
            m
        };
        let partials: Vec<Vec<Moments>> = if self.workers == 1 {
            (0..blocks).map(block).collect()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.workers)
                .build()
                .expect("thread pool");
            pool.install(|| (0..blocks).into_par_iter().map(block).collect())
        };
        partials
            .into_iter()
            .fold(vec![Moments::default(); dim], |acc, m| {
                acc.iter().zip(&m).map(|(a, b)| a.merge(b)).collect()
            })
    }
}

/// Running count, mean and sum of squared deviations.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if other.n == 0 {
            return *self;
        }
        if self.n == 0 {
            return *other;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        Moments {
            n,
            mean: self.mean + d * w,
            m2: self.m2 + other.m2 + d * d * self.n as f64 * w,
        }
    }

    /// Sample variance (denominator `n − 1`).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_err(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (self.variance() / self.n as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worker_count_does_not_change_result() {
        let mc = MonteCarlo::new(42).with_block_size(100);
        let f = |r: &mut RngStream| r.uniform();
        let one = mc.with_workers(1).run(10_007, f);
        let four = mc.with_workers(4).run(10_007, f);
        assert_eq!(one, four);
        assert_eq!(one.n, 10_007);
    }

    #[test]
    fn merge_matches_direct() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let m = a.merge(&b);
        assert!((m.mean - all.mean).abs() < 1e-12);
        assert!((m.m2 - all.m2).abs() < 1e-8);
    }
}
