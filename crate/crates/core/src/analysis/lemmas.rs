//! Numerical checks of the supporting inequalities: inverse Wishart mean,
//! PSD dominance, equivalent-noise concentration, and dither uniformity.

use crate::channel::{sample_channel, FadingModel, LinkConfig};
use crate::error::{Error, Result};
use crate::lattice::NestedPair;
use crate::mc::{batched, batched_with_size, derive_seed, McRng, Z95};
use crate::transceiver::{encode, sigma_bar, transmit_block, SigmaBar};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Entrywise Monte Carlo mean of a complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixEstimate {
    pub mean: DMatrix<Complex64>,
    /// Standard error of each entry's real part.
    pub std_error: DMatrix<f64>,
    pub samples: usize,
}

impl MatrixEstimate {
    /// Largest deviation from `target·I`, relative to `target`.
    pub fn max_relative_deviation(&self, target: f64) -> f64 {
        let n = self.mean.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { target } else { 0.0 };
                worst = worst.max((self.mean[(i, j)] - Complex64::from(want)).norm() / target);
            }
        }
        worst
    }
}

/// `E[(GᴴG)⁻¹]` for an i.i.d. complex Gaussian `M × N` matrix `G`.
pub fn wishart_inverse_mean(m: usize, n: usize, samples: usize, seed: u64) -> Result<MatrixEstimate> {
    if m <= n || n == 0 {
        return Err(Error::Inapplicable(format!("needs M > N ≥ 1, got M = {m}, N = {n}")));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let parts = batched(seed, samples, |rng, count| -> Result<(DMatrix<Complex64>, DMatrix<f64>)> {
        let mut sum = DMatrix::zeros(n, n);
        let mut sq = DMatrix::zeros(n, n);
        for _ in 0..count {
            let g = sample_channel(&FadingModel::RayleighIid, m, n, rng)?;
            let w = (g.adjoint() * &g).try_inverse().ok_or(Error::Singular)?;
            sq += w.map(|c| c.re * c.re);
            sum += w;
        }
        Ok((sum, sq))
    });
    let mut sum = DMatrix::zeros(n, n);
    let mut sq = DMatrix::<f64>::zeros(n, n);
    for p in parts {
        let (a, b) = p?;
        sum += a;
        sq += b;
    }
    let k = samples as f64;
    let mean = sum / Complex64::from(k);
    let std_error = DMatrix::from_fn(n, n, |i, j| {
        let mu = mean[(i, j)].re;
        ((sq[(i, j)] / k - mu * mu).max(0.0) / (k - 1.0)).sqrt()
    });
    Ok(MatrixEstimate { mean, std_error, samples })
}

/// Outcome of the PSD dominance check over many draws.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdReport {
    pub draws: usize,
    /// Smallest eigenvalue of `Aᴴ(cI + BBᴴ)⁻¹A − ĀᴴĀ/c` over all draws.
    pub min_eigenvalue: f64,
    /// Mean of `|Ā_ij|²`, which should be 1 since `Ā` is again i.i.d. Gaussian.
    pub abar_power: f64,
}

impl PsdReport {
    pub const TOL: f64 = 1e-9;

    pub fn holds(&self) -> bool {
        self.min_eigenvalue >= -Self::TOL
    }
}

fn complex_gaussian(r: usize, c: usize, rng: &mut McRng) -> DMatrix<Complex64> {
    sample_channel(&FadingModel::RayleighIid, r, c, rng).expect("dimensions are positive")
}

/// Smallest eigenvalue of the dominance difference for one `(A, B)` draw,
/// together with the coupled `Ā` built from the null eigenspace of `BBᴴ`.
fn psd_difference(a: &DMatrix<Complex64>, b: Option<&DMatrix<Complex64>>, c: f64) -> Result<(f64, DMatrix<Complex64>)> {
    let r = a.nrows();
    let (lhs, abar) = match b {
        None => (a.adjoint() * a / Complex64::from(c), a.clone()),
        Some(b) => {
            let q = b.ncols();
            let bb = b * b.adjoint();
            let eig = bb.clone().symmetric_eigen();
            let mut order: Vec<usize> = (0..r).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
            let null = DMatrix::from_fn(r, r - q, |i, j| eig.eigenvectors[(i, order[j])]);
            let abar = null.adjoint() * a;
            let inner = (DMatrix::identity(r, r) * Complex64::from(c) + bb).try_inverse().ok_or(Error::Singular)?;
            (a.adjoint() * inner * a, abar)
        }
    };
    let diff = lhs - abar.adjoint() * &abar / Complex64::from(c);
    let herm = (&diff + diff.adjoint()) * Complex64::from(0.5);
    let min = herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    Ok((min, abar))
}

/// `Aᴴ(cI + BBᴴ)⁻¹A ⪰ (1/c)ĀᴴĀ` for `A ∈ ℂ^{r×m}`, `B ∈ ℂ^{r×q}`, `r ≥ q + 1`,
/// with `Ā` the rows of `VᴴA` in the null eigenspace of `BBᴴ`.
pub fn psd_dominance_check(r: usize, m: usize, q: usize, c: f64, samples: usize, seed: u64) -> Result<PsdReport> {
    if r < q + 1 || m == 0 {
        return Err(Error::InvalidArgument(format!("needs r ≥ q + 1 and m ≥ 1, got r = {r}, m = {m}, q = {q}")));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("c must be positive, got {c}")));
    }
    let parts = batched(seed, samples, |rng, count| -> Result<(f64, f64)> {
        let mut min = f64::INFINITY;
        let mut power = 0.0;
        for _ in 0..count {
            let a = complex_gaussian(r, m, rng);
            let b = (q > 0).then(|| complex_gaussian(r, q, rng));
            let (e, abar) = psd_difference(&a, b.as_ref(), c)?;
            min = min.min(e);
            power += abar.iter().map(|z| z.norm_sqr()).sum::<f64>() / ((r - q) * m) as f64;
        }
        Ok((min, power))
    });
    let mut min = f64::INFINITY;
    let mut power = 0.0;
    for p in parts {
        let (a, b) = p?;
        min = min.min(a);
        power += b;
    }
    Ok(PsdReport {
        draws: samples,
        min_eigenvalue: min,
        abar_power: power / samples.max(1) as f64,
    })
}

/// Fraction of blocks whose equivalent noise leaves the decision sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct ExceedanceRow {
    /// Lattice dimension.
    pub n: usize,
    pub trials: usize,
    pub exceed: usize,
    pub fraction: f64,
    /// Half-width of the 95% normal interval on `fraction`.
    pub ci95: f64,
    pub sigma_trace: f64,
}

impl ExceedanceRow {
    /// Non-increase from `self` to `next`, up to the joint 95% interval.
    pub fn not_exceeded_by(&self, next: &ExceedanceRow) -> bool {
        next.fraction <= self.fraction + (self.ci95.powi(2) + next.ci95.powi(2)).sqrt()
    }
}

/// Exceedance `P(‖z‖² > (1 + ε)·tr(Σ̄))` for each lattice dimension in `n_list`.
/// `link` supplies antennas, SNR and mode; its block length is replaced so
/// that the lattice dimension equals each `n`.
pub fn noise_concentration_report(
    model: &FadingModel,
    link: &LinkConfig,
    epsilon: f64,
    n_list: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<ExceedanceRow>> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be non-negative, got {epsilon}")));
    }
    let per_use = sigma_bar(model, &LinkConfig { block_len: 1, ..*link }, 200_000, derive_seed(seed, 0x5161))?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let nt = link.real_nt();
        if n == 0 || n % nt != 0 {
            return Err(Error::InvalidArgument(format!("n = {n} is not a multiple of {nt} real transmit dimensions")));
        }
        let l = LinkConfig {
            block_len: n / nt,
            ..*link
        };
        let sigma = SigmaBar {
            per_use: per_use.per_use.clone(),
            block_len: l.block_len,
        };
        let threshold = (1.0 + epsilon) * sigma.trace();
        let pair = NestedPair::trivial(n, l.power_per_dim())?;
        let parts = batched_with_size(derive_seed(seed, n as u64), trials, 64, |rng, count| -> Result<usize> {
            let mut hits = 0;
            for _ in 0..count {
                let rx = transmit_block(&l, model, &pair, sigma.trace(), rng)?;
                hits += usize::from(rx.block.z.norm_squared() > threshold);
            }
            Ok(hits)
        });
        let mut exceed = 0;
        for p in parts {
            exceed += p?;
        }
        let fraction = exceed as f64 / trials as f64;
        rows.push(ExceedanceRow {
            n,
            trials,
            exceed,
            fraction,
            ci95: Z95 * (fraction * (1.0 - fraction) / trials as f64).sqrt(),
            sigma_trace: sigma.trace(),
        });
    }
    Ok(rows)
}

/// Chi-square statistics for uniformity of `x` over the coarse cell and for
/// independence of `x` and the message.
#[derive(Debug, Clone, PartialEq)]
pub struct CryptoReport {
    pub samples: usize,
    pub uniformity_chi2: f64,
    pub uniformity_dof: usize,
    pub uniformity_p: f64,
    pub independence_chi2: f64,
    pub independence_dof: usize,
    pub independence_p: f64,
}

impl CryptoReport {
    pub fn passes(&self, alpha: f64) -> bool {
        self.uniformity_p > alpha && self.independence_p > alpha
    }
}

fn chi2_sf(stat: f64, dof: usize) -> Result<f64> {
    let d = ChiSquared::new(dof as f64).map_err(|e| Error::Estimator(e.to_string()))?;
    Ok(d.sf(stat))
}

/// Bins per coordinate in the crypto-lemma tests.
const CRYPTO_BINS: usize = 10;
const MESSAGE_CLASSES: u64 = 5;

/// Encodes uniformly random messages with fresh dithers and tests the
/// transmitted vectors. Each `x` is mapped to fractional coordinates in the
/// coarse basis, which are uniform on the unit cube exactly when `x` is
/// uniform over the cell. Uniformity uses a joint grid on the first two
/// coordinates; independence cross-tabulates message classes against the
/// first coordinate.
pub fn crypto_lemma_check(pair: &NestedPair, samples: usize, seed: u64) -> Result<CryptoReport> {
    let n = pair.dim();
    let k = n.min(2);
    let basis_t_inv = pair.coarse().generator().transpose().try_inverse().ok_or(Error::Singular)?;
    let size = pair.codebook_size().ok_or_else(|| Error::InvalidArgument("codebook too large".into()))?;
    let classes = size.min(MESSAGE_CLASSES) as usize;
    let cells = CRYPTO_BINS.pow(k as u32);
    let parts = batched(seed, samples, |rng, count| -> Result<(Vec<u64>, Vec<u64>)> {
        let mut grid = vec![0u64; cells];
        let mut table = vec![0u64; classes * CRYPTO_BINS];
        for _ in 0..count {
            let msg = rng.random_range(0..size);
            let cw = encode(pair, msg, rng)?;
            let c = &basis_t_inv * &cw.x;
            let bin = |v: f64| (((v - v.floor()) * CRYPTO_BINS as f64) as usize).min(CRYPTO_BINS - 1);
            let mut cell = 0;
            for i in 0..k {
                cell = cell * CRYPTO_BINS + bin(c[i]);
            }
            grid[cell] += 1;
            table[(msg % classes as u64) as usize * CRYPTO_BINS + bin(c[0])] += 1;
        }
        Ok((grid, table))
    });
    let mut grid = vec![0u64; cells];
    let mut table = vec![0u64; classes * CRYPTO_BINS];
    for p in parts {
        let (g, t) = p?;
        grid.iter_mut().zip(g).for_each(|(a, b)| *a += b);
        table.iter_mut().zip(t).for_each(|(a, b)| *a += b);
    }
    let total = samples as f64;
    let expected = total / cells as f64;
    let uniformity_chi2: f64 = grid.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let uniformity_dof = cells - 1;

    let row: Vec<f64> = (0..classes).map(|r| table[r * CRYPTO_BINS..(r + 1) * CRYPTO_BINS].iter().sum::<u64>() as f64).collect();
    let col: Vec<f64> = (0..CRYPTO_BINS).map(|c| (0..classes).map(|r| table[r * CRYPTO_BINS + c]).sum::<u64>() as f64).collect();
    let mut independence_chi2 = 0.0;
    for r in 0..classes {
        for c in 0..CRYPTO_BINS {
            let e = row[r] * col[c] / total;
            if e > 0.0 {
                independence_chi2 += (table[r * CRYPTO_BINS + c] as f64 - e).powi(2) / e;
            }
        }
    }
    let independence_dof = (classes.max(2) - 1) * (CRYPTO_BINS - 1);
    Ok(CryptoReport {
        samples,
        uniformity_p: chi2_sf(uniformity_chi2, uniformity_dof)?,
        uniformity_chi2,
        uniformity_dof,
        independence_p: if classes > 1 { chi2_sf(independence_chi2, independence_dof)? } else { 1.0 },
        independence_chi2,
        independence_dof,
    })
}
