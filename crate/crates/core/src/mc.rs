//! Reproducible Monte Carlo plumbing.
//!
//! Samples are split into fixed-size batches. Batch `i` always draws from
//! ChaCha8 stream `i` of the caller's seed, and batch results are reduced in
//! index order, so an estimate depends only on `(seed, samples)` and never on
//! how many worker threads happened to run it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type McRng = ChaCha8Rng;

/// Samples per batch. Part of the reproducibility contract: changing it
/// changes every seeded estimate.
pub const BATCH_SIZE: usize = 4096;

/// z-value of a two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub ci95_halfwidth: f64,
}

impl McEstimate {
    pub fn new(mean: f64, std_error: f64, samples: usize) -> Self {
        Self {
            mean,
            std_error,
            samples,
            ci95_halfwidth: Z95 * std_error,
        }
    }

    /// A value known without sampling error.
    pub fn exact(mean: f64) -> Self {
        Self::new(mean, 0.0, 0)
    }

    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn within_sigmas(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }

    /// Image of the estimate under a smooth map with derivative `slope` at the
    /// mean (first-order delta method).
    pub fn map(&self, value: f64, slope: f64) -> Self {
        Self::new(value, (slope * self.std_error).abs(), self.samples)
    }
}

/// Running first and second moments of a scalar statistic.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let mean = self.sum / n;
        ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    }

    pub fn estimate(&self) -> McEstimate {
        let se = (self.variance() / self.count as f64).sqrt();
        McEstimate::new(self.mean(), se, self.count)
    }
}

/// Seeds stream `stream` of the ChaCha8 generator keyed by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> McRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives an independent sub-seed for a labelled sub-experiment.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs `work(rng, count)` over `samples` split into [`BATCH_SIZE`] batches
/// and returns the per-batch results in batch order.
pub fn batched<T, F>(seed: u64, samples: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut McRng, usize) -> T + Sync,
{
    batched_with_size(seed, samples, BATCH_SIZE, work)
}

/// [`batched`] with an explicit batch size (used for expensive trials).
pub fn batched_with_size<T, F>(seed: u64, samples: usize, batch: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut McRng, usize) -> T + Sync,
{
    let batch = batch.max(1);
    let batches = samples.div_ceil(batch);
    let run = |i: usize| {
        let count = batch.min(samples - i * batch);
        let mut rng = stream_rng(seed, i as u64);
        work(&mut rng, count)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..batches).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..batches).map(run).collect()
    }
}

/// Monte Carlo means of `K` scalar statistics drawn jointly per sample.
pub fn estimate_means<const K: usize, F>(seed: u64, samples: usize, draw: F) -> [McEstimate; K]
where
    F: Fn(&mut McRng) -> [f64; K] + Sync,
{
    let parts = batched(seed, samples, |rng, count| {
        let mut acc = [Moments::default(); K];
        for _ in 0..count {
            let v = draw(rng);
            for (a, x) in acc.iter_mut().zip(v) {
                a.push(x);
            }
        }
        acc
    });
    let mut total = [Moments::default(); K];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    total.map(|m| m.estimate())
}

/// Per-sample statistics of `K` means, kept so callers can form delta-method
/// combinations (ratios, log-ratios) with the correct joint variance.
#[derive(Debug, Clone)]
pub struct JointMoments<const K: usize> {
    pub count: usize,
    pub sum: [f64; K],
    pub cross: [[f64; K]; K],
}

impl<const K: usize> JointMoments<K> {
    fn zero() -> Self {
        Self {
            count: 0,
            sum: [0.0; K],
            cross: [[0.0; K]; K],
        }
    }

    pub fn means(&self) -> [f64; K] {
        self.sum.map(|s| s / self.count as f64)
    }

    /// Sample covariance of statistics `a` and `b`.
    pub fn covariance(&self, a: usize, b: usize) -> f64 {
        let n = self.count as f64;
        if self.count < 2 {
            return 0.0;
        }
        (self.cross[a][b] - self.sum[a] * self.sum[b] / n) / (n - 1.0)
    }

    /// Standard error of `Σ grad[k]·mean[k]` (linearised combination).
    pub fn linear_std_error(&self, grad: &[f64; K]) -> f64 {
        let mut var = 0.0;
        for a in 0..K {
            for b in 0..K {
                var += grad[a] * grad[b] * self.covariance(a, b);
            }
        }
        (var.max(0.0) / self.count as f64).sqrt()
    }
}

/// Joint first and second moments of `K` statistics.
pub fn joint_moments<const K: usize, F>(seed: u64, samples: usize, draw: F) -> JointMoments<K>
where
    F: Fn(&mut McRng) -> [f64; K] + Sync,
{
    let parts = batched(seed, samples, |rng, count| {
        let mut acc = JointMoments::<K>::zero();
        for _ in 0..count {
            let v = draw(rng);
            acc.count += 1;
            for a in 0..K {
                acc.sum[a] += v[a];
                for b in 0..K {
                    acc.cross[a][b] += v[a] * v[b];
                }
            }
        }
        acc
    });
    let mut total = JointMoments::<K>::zero();
    for p in &parts {
        total.count += p.count;
        for a in 0..K {
            total.sum[a] += p.sum[a];
            for b in 0..K {
                total.cross[a][b] += p.cross[a][b];
            }
        }
    }
    total
}

/// [`JointMoments`] with the number of statistics chosen at run time.
#[derive(Debug, Clone, PartialEq)]
pub struct VecMoments {
    pub count: usize,
    pub sum: Vec<f64>,
    /// Row-major `k × k` sums of products.
    pub cross: Vec<f64>,
}

impl VecMoments {
    pub fn zero(k: usize) -> Self {
        Self {
            count: 0,
            sum: vec![0.0; k],
            cross: vec![0.0; k * k],
        }
    }

    pub fn len(&self) -> usize {
        self.sum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sum.is_empty()
    }

    pub fn push(&mut self, v: &[f64]) {
        let k = self.len();
        self.count += 1;
        for a in 0..k {
            self.sum[a] += v[a];
            for b in 0..k {
                self.cross[a * k + b] += v[a] * v[b];
            }
        }
    }

    pub fn merge(&mut self, other: &VecMoments) {
        self.count += other.count;
        self.sum.iter_mut().zip(&other.sum).for_each(|(a, b)| *a += b);
        self.cross.iter_mut().zip(&other.cross).for_each(|(a, b)| *a += b);
    }

    pub fn mean(&self, a: usize) -> f64 {
        self.sum[a] / self.count as f64
    }

    pub fn covariance(&self, a: usize, b: usize) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        (self.cross[a * self.len() + b] - self.sum[a] * self.sum[b] / n) / (n - 1.0)
    }

    /// Standard error of `Σ grad[k]·mean[k]`.
    pub fn linear_std_error(&self, grad: &[f64]) -> f64 {
        let k = self.len();
        let mut var = 0.0;
        for a in 0..k {
            for b in 0..k {
                var += grad[a] * grad[b] * self.covariance(a, b);
            }
        }
        (var.max(0.0) / self.count as f64).sqrt()
    }

    /// Estimate of the single mean `a`.
    pub fn estimate(&self, a: usize) -> McEstimate {
        let se = (self.covariance(a, a).max(0.0) / self.count as f64).sqrt();
        McEstimate::new(self.mean(a), se, self.count)
    }
}

/// Joint moments of `k` statistics written by `draw` into a scratch slice.
pub fn joint_moments_vec<F>(seed: u64, samples: usize, k: usize, draw: F) -> VecMoments
where
    F: Fn(&mut McRng, &mut [f64]) + Sync,
{
    let parts = batched(seed, samples, |rng, count| {
        let mut acc = VecMoments::zero(k);
        let mut buf = vec![0.0; k];
        for _ in 0..count {
            draw(rng, &mut buf);
            acc.push(&buf);
        }
        acc
    });
    let mut total = VecMoments::zero(k);
    for p in &parts {
        total.merge(p);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn ci_is_196_standard_errors() {
        let e = McEstimate::new(1.0, 0.5, 10);
        assert_eq!(e.ci95_halfwidth, 0.98);
    }

    #[test]
    fn uniform_mean_and_error() {
        let [e] = estimate_means(3, 100_000, |rng| [rng.random::<f64>()]);
        assert!(e.within_sigmas(0.5, 4.0));
        let expected_se = (1.0f64 / 12.0 / 100_000.0).sqrt();
        assert!((e.std_error / expected_se - 1.0).abs() < 0.02);
        assert_eq!(e.samples, 100_000);
    }

    #[test]
    fn batches_are_reproducible_and_ordered() {
        let a = batched(11, 10_000, |rng, n| (n, rng.random::<u64>()));
        let b = batched(11, 10_000, |rng, n| (n, rng.random::<u64>()));
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|p| p.0).sum::<usize>(), 10_000);
        assert_eq!(a.len(), 3);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 1), derive_seed(1, 2));
        assert_ne!(derive_seed(1, 1), derive_seed(2, 1));
    }

    #[test]
    fn joint_covariance_of_perfectly_correlated_pair() {
        let j = joint_moments(5, 50_000, |rng| {
            let u: f64 = rng.random();
            [u, 2.0 * u]
        });
        let c = j.covariance(0, 1);
        assert!((c - 2.0 / 12.0).abs() < 5e-3);
        // d(x - y/2) has zero variance
        assert!(j.linear_std_error(&[1.0, -0.5]) < 1e-9);
    }

    #[test]
    fn vec_moments_agree_with_fixed_size() {
        let draw = |rng: &mut McRng| {
            let u: f64 = rng.random();
            [u, u * u, 1.0 - u]
        };
        let fixed = joint_moments::<3, _>(9, 10_000, draw);
        let dynamic = joint_moments_vec(9, 10_000, 3, |rng, out| out.copy_from_slice(&draw(rng)));
        assert_eq!(dynamic.count, fixed.count);
        for a in 0..3 {
            assert_eq!(dynamic.mean(a), fixed.means()[a]);
            for b in 0..3 {
                assert_eq!(dynamic.covariance(a, b), fixed.covariance(a, b));
            }
        }
        let g = [1.0, -2.0, 0.5];
        assert_eq!(dynamic.linear_std_error(&g), fixed.linear_std_error(&g));
    }
}
