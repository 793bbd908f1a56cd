//! Achievable rates, ergodic capacity, and their gap.

use super::bounds::gap_bounds_cor2;
use super::{Bound, GapReport};
use crate::channel::{sample_channel, sample_real_channel, FadingModel};
use crate::error::{Error, Result};
use crate::mc::{joint_moments, joint_moments_vec, McEstimate, McRng};
use crate::quadrature::{expect_exponential, expect_gamma};
use crate::special::{rayleigh_inverse_mean, rayleigh_log_mean};
use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use std::f64::consts::{LN_2, LOG2_E};

/// Determinant below which the sample mean of `(I + ρHᴴH)⁻¹` is treated as
/// numerically singular.
const SINGULAR_DET: f64 = 1e-300;

/// `ln det` of a Hermitian positive definite matrix.
fn ln_det_hpd<T: ComplexField<RealField = f64>>(m: DMatrix<T>) -> Result<f64> {
    let chol = m.cholesky().ok_or(Error::Singular)?;
    let l = chol.l_dirty();
    Ok((0..l.nrows()).map(|i| 2.0 * l[(i, i)].clone().modulus().ln()).sum())
}

/// Per-draw `(I + ρHᴴH)⁻¹` and `log2 det(I + ρHᴴH)`.
fn draw_terms<T: ComplexField<RealField = f64>>(h: &DMatrix<T>, rho: f64) -> Result<(DMatrix<T>, f64)> {
    let n = h.ncols();
    let g = DMatrix::<T>::identity(n, n) + h.adjoint() * h * T::from_real(rho);
    let chol = g.cholesky().ok_or(Error::Singular)?;
    let l = chol.l_dirty();
    let logdet: f64 = (0..n).map(|i| 2.0 * l[(i, i)].clone().modulus().ln()).sum();
    Ok((chol.inverse(), logdet * LOG2_E))
}

/// Rate and capacity from the same draws, so their difference is paired.
struct MimoEstimate {
    rate: McEstimate,
    capacity: McEstimate,
    gap: McEstimate,
}

fn mimo_estimate<T, S>(n_t: usize, rho: f64, samples: usize, seed: u64, sample: S, scale: f64) -> Result<MimoEstimate>
where
    T: ComplexField<RealField = f64>,
    S: Fn(&mut McRng) -> Result<DMatrix<T>> + Sync,
{
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    // first pass: matrix mean
    let parts = crate::mc::batched(seed, samples, |rng, count| -> Result<DMatrix<T>> {
        let mut acc = DMatrix::<T>::zeros(n_t, n_t);
        for _ in 0..count {
            acc += draw_terms(&sample(rng)?, rho)?.0;
        }
        Ok(acc)
    });
    let mut sum = DMatrix::<T>::zeros(n_t, n_t);
    for p in parts {
        sum += p?;
    }
    let mean = sum / T::from_real(samples as f64);
    let ln_det_mean = ln_det_hpd(mean.clone()).map_err(|_| {
        Error::Estimator("sample mean of (I + ρHᴴH)⁻¹ is not positive definite; increase samples".into())
    })?;
    if ln_det_mean.exp() < SINGULAR_DET {
        return Err(Error::Estimator("sample mean of (I + ρHᴴH)⁻¹ is near-singular".into()));
    }
    let mean_inv = mean.clone().try_inverse().ok_or(Error::Singular)?;
    // second pass over the same draws: linearised log-det and capacity terms
    let failed = std::sync::atomic::AtomicBool::new(false);
    let jm = joint_moments::<2, _>(seed, samples, |rng| match sample(rng).and_then(|h| draw_terms(&h, rho)) {
        Ok((inv, cap)) => [cap, (&mean_inv * inv).trace().real() * LOG2_E],
        Err(_) => {
            failed.store(true, std::sync::atomic::Ordering::Relaxed);
            [f64::NAN; 2]
        }
    });
    if failed.into_inner() {
        return Err(Error::Singular);
    }
    let cap_mean = jm.means()[0];
    let rate = -ln_det_mean * LOG2_E;
    Ok(MimoEstimate {
        rate: McEstimate::new(scale * rate, scale * jm.linear_std_error(&[0.0, 1.0]), samples),
        capacity: McEstimate::new(scale * cap_mean, scale * jm.linear_std_error(&[1.0, 0.0]), samples),
        gap: McEstimate::new(scale * (cap_mean - rate), scale * jm.linear_std_error(&[1.0, 1.0]), samples),
    })
}

fn complex_estimate(model: &FadingModel, n_t: usize, n_r: usize, rho: f64, samples: usize, seed: u64) -> Result<MimoEstimate> {
    check_rho(rho)?;
    mimo_estimate::<Complex64, _>(n_t, rho, samples, seed, |rng| sample_channel(model, n_r, n_t, rng), 1.0)
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
    }
    Ok(())
}

/// `−log2 det E[(I + ρH̃ᴴH̃)⁻¹]` for complex channels, in bits per channel use.
pub fn achievable_rate_mimo(model: &FadingModel, n_t: usize, n_r: usize, rho: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    Ok(complex_estimate(model, n_t, n_r, rho, samples, seed)?.rate)
}

/// `−½ log2 det E[(I + ρHᵀH)⁻¹]` for real channels.
pub fn achievable_rate_mimo_real(model: &FadingModel, n_t: usize, n_r: usize, rho: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    check_rho(rho)?;
    Ok(mimo_estimate::<f64, _>(n_t, rho, samples, seed, |rng| sample_real_channel(model, n_r, n_t, rng), 0.5)?.rate)
}

/// `E[log2 det(I + ρH̃ᴴH̃)]`.
pub fn ergodic_capacity(model: &FadingModel, n_t: usize, n_r: usize, rho: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    Ok(complex_estimate(model, n_t, n_r, rho, samples, seed)?.capacity)
}

/// Paired capacity, rate, and gap for an `N_t × N_r` complex channel. No
/// bounds are attached; see [`super::gap_bounds_cor1`].
pub fn mimo_gap(model: &FadingModel, n_t: usize, n_r: usize, rho: f64, samples: usize, seed: u64) -> Result<GapReport> {
    let est = complex_estimate(model, n_t, n_r, rho, samples, seed)?;
    Ok(GapReport {
        capacity: est.capacity,
        rate: est.rate,
        gap: est.gap,
        bounds: Vec::new(),
    })
}

/// Draws of `|h|²` for a scalar channel.
fn siso_power(model: &FadingModel) -> Result<impl Fn(&mut McRng) -> f64 + Sync + '_> {
    if let FadingModel::Deterministic(h) = model {
        if h.shape() != (1, 1) {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: h.nrows() * h.ncols(),
            });
        }
    }
    Ok(move |rng: &mut McRng| model.sample_power(rng))
}

/// `𝒢 = E[log2(1 + ρ|h|²)] + log2 E[1/(1 + ρ|h|²)]` with the applicable
/// single-antenna bounds attached.
pub fn siso_gap(model: &FadingModel, rho: f64, samples: usize, seed: u64) -> Result<GapReport> {
    check_rho(rho)?;
    let power = siso_power(model)?;
    let jm = joint_moments::<2, _>(seed, samples, |rng| {
        let x = power(rng);
        [(rho * x).ln_1p() * LOG2_E, 1.0 / (1.0 + rho * x)]
    });
    let [cap, inv] = jm.means();
    let slope = 1.0 / (inv * LN_2);
    let rate = -inv.log2();
    Ok(GapReport {
        capacity: McEstimate::new(cap, jm.linear_std_error(&[1.0, 0.0]), samples),
        rate: McEstimate::new(rate, jm.linear_std_error(&[0.0, slope]), samples),
        gap: McEstimate::new(cap - rate, jm.linear_std_error(&[1.0, slope]), samples),
        bounds: gap_bounds_cor2(model, rho),
    })
}

/// `α = E[|h|²/(1 + ρ|h|²)] / E[1/(1 + ρ|h|²)]`.
pub fn snr_penalty_alpha(model: &FadingModel, rho: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    check_rho(rho)?;
    let power = siso_power(model)?;
    let jm = joint_moments::<2, _>(seed, samples, |rng| {
        let x = power(rng);
        let d = 1.0 / (1.0 + rho * x);
        [x * d, d]
    });
    let [num, den] = jm.means();
    let alpha = num / den;
    let se = jm.linear_std_error(&[1.0 / den, -alpha / den]);
    Ok(McEstimate::new(alpha, se, samples))
}

/// [`siso_gap`] at several SNRs from one common set of fading draws.
pub fn siso_curve(model: &FadingModel, rhos: &[f64], samples: usize, seed: u64) -> Result<Vec<GapReport>> {
    for &r in rhos {
        check_rho(r)?;
    }
    let power = siso_power(model)?;
    let k = rhos.len();
    let vm = joint_moments_vec(seed, samples, 2 * k, |rng, out| {
        let x = power(rng);
        for (j, &rho) in rhos.iter().enumerate() {
            out[2 * j] = (rho * x).ln_1p() * LOG2_E;
            out[2 * j + 1] = 1.0 / (1.0 + rho * x);
        }
    });
    let mut reports = Vec::with_capacity(k);
    for (j, &rho) in rhos.iter().enumerate() {
        let cap = vm.mean(2 * j);
        let inv = vm.mean(2 * j + 1);
        let slope = 1.0 / (inv * LN_2);
        let mut g_cap = vec![0.0; 2 * k];
        g_cap[2 * j] = 1.0;
        let mut g_rate = vec![0.0; 2 * k];
        g_rate[2 * j + 1] = slope;
        let mut g_gap = g_rate.clone();
        g_gap[2 * j] = 1.0;
        let rate = -inv.log2();
        reports.push(GapReport {
            capacity: McEstimate::new(cap, vm.linear_std_error(&g_cap), samples),
            rate: McEstimate::new(rate, vm.linear_std_error(&g_rate), samples),
            gap: McEstimate::new(cap - rate, vm.linear_std_error(&g_gap), samples),
            bounds: gap_bounds_cor2(model, rho),
        });
    }
    Ok(reports)
}

/// `E[g(|h|²)]` by quadrature for scalar fading, when available.
///
/// Rayleigh and Nakagami with `m ≥ 1` are integrated against their
/// densities; a scalar deterministic channel is evaluated directly.
pub fn siso_expectation_exact<F: Fn(f64) -> f64>(model: &FadingModel, g: F) -> Option<f64> {
    match model {
        FadingModel::RayleighIid => Some(expect_exponential(g)),
        FadingModel::Nakagami { m } if *m >= 1.0 => Some(expect_gamma(g, *m, 1.0 / m)),
        FadingModel::Deterministic(h) if h.shape() == (1, 1) => Some(g(h[(0, 0)].norm_sqr())),
        _ => None,
    }
}

/// Noise-free SISO rate, capacity, and gap in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SisoExact {
    pub rate: f64,
    pub capacity: f64,
    pub gap: f64,
}

/// Rate and capacity of a scalar channel without sampling error. Rayleigh
/// uses the exponential-integral closed form, other models quadrature.
pub fn siso_exact(model: &FadingModel, rho: f64) -> Result<SisoExact> {
    check_rho(rho)?;
    let (inv, cap) = match model {
        FadingModel::RayleighIid => (rayleigh_inverse_mean(rho)?, rayleigh_log_mean(rho)? * LOG2_E),
        _ => {
            let unavailable = || Error::Inapplicable("no quadrature for this fading model".into());
            let inv = siso_expectation_exact(model, |x| 1.0 / (1.0 + rho * x)).ok_or_else(unavailable)?;
            let cap = siso_expectation_exact(model, |x| (rho * x).ln_1p() * LOG2_E).ok_or_else(unavailable)?;
            (inv, cap)
        }
    };
    let rate = -inv.log2();
    Ok(SisoExact {
        rate,
        capacity: cap,
        gap: cap - rate,
    })
}

/// `α` without sampling error, where quadrature is available.
pub fn snr_penalty_alpha_exact(model: &FadingModel, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let unavailable = || Error::Inapplicable("no quadrature for this fading model".into());
    let den = siso_expectation_exact(model, |x| 1.0 / (1.0 + rho * x)).ok_or_else(unavailable)?;
    let num = siso_expectation_exact(model, |x| x / (1.0 + rho * x)).ok_or_else(unavailable)?;
    Ok(num / den)
}

/// `true` when every applicable bound sits above the gap minus its 95% CI.
pub fn bounds_hold(bounds: &[Bound], gap: &McEstimate) -> bool {
    bounds
        .iter()
        .filter(|b| b.applicable)
        .all(|b| b.value >= gap.mean - gap.ci95_halfwidth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_channel_gives_one_bit() {
        let m = FadingModel::identity(1);
        let r = achievable_rate_mimo(&m, 1, 1, 1.0, 100, 1).unwrap();
        assert!((r.mean - 1.0).abs() < 1e-12 && r.std_error < 1e-12);
        let c = ergodic_capacity(&m, 1, 1, 1.0, 100, 1).unwrap();
        assert!((c.mean - 1.0).abs() < 1e-12);
        let g = siso_gap(&m, 1.0, 1000, 1).unwrap();
        assert!(g.gap.mean.abs() < 1e-12);
        let a = snr_penalty_alpha(&m, 3.0, 1000, 1).unwrap();
        assert!((a.mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_siso_matches_closed_form() {
        // ρ = 1: rate 0.745775, capacity 0.860347, α 0.676875
        let m = FadingModel::RayleighIid;
        let ex = siso_exact(&m, 1.0).unwrap();
        assert!((ex.rate - 0.745_775).abs() < 1e-6);
        assert!((ex.capacity - 0.860_347).abs() < 1e-6);
        let ex4 = siso_exact(&m, 4.0).unwrap();
        assert!((ex4.rate - 1.576_814).abs() < 1e-6);
        assert!((ex4.capacity - 1.934_489).abs() < 1e-6);
        assert!((snr_penalty_alpha_exact(&m, 1.0).unwrap() - 0.676_875).abs() < 1e-6);

        let r = achievable_rate_mimo(&m, 1, 1, 1.0, 200_000, 3).unwrap();
        assert!(r.within_sigmas(ex.rate, 3.0), "{r:?}");
        let g = siso_gap(&m, 1.0, 200_000, 3).unwrap();
        assert!(g.rate.within_sigmas(ex.rate, 3.0));
        assert!(g.capacity.within_sigmas(ex.capacity, 3.0));
        assert!(g.gap.within_sigmas(ex.gap, 3.0));
        let a = snr_penalty_alpha(&m, 1.0, 200_000, 3).unwrap();
        assert!(a.within_sigmas(0.676_875, 3.0));
    }

    #[test]
    fn quadrature_and_closed_form_agree() {
        for rho in [0.1, 1.0, 16.0] {
            let closed = siso_exact(&FadingModel::RayleighIid, rho).unwrap();
            let inv = siso_expectation_exact(&FadingModel::RayleighIid, |x| 1.0 / (1.0 + rho * x)).unwrap();
            assert!((closed.rate + inv.log2()).abs() < 1e-10);
            // Nakagami m = 1 is Rayleigh
            let nak = siso_exact(&FadingModel::Nakagami { m: 1.0 }, rho).unwrap();
            assert!((nak.gap - closed.gap).abs() < 1e-9);
        }
    }

    #[test]
    fn alpha_tends_to_one_at_low_snr() {
        let a = snr_penalty_alpha(&FadingModel::RayleighIid, 1e-6, 100_000, 4).unwrap();
        assert!((a.mean - 1.0).abs() < 0.02);
    }

    #[test]
    fn real_rate_halves_the_log() {
        // deterministic 2×2 real: −½ log2 det((I + ρHᵀH)⁻¹) = ½ log2 det(I + ρHᵀH)
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.3, 2.0]).map(|v| Complex64::new(v, 0.0));
        let m = FadingModel::Deterministic(h.clone());
        let r = achievable_rate_mimo_real(&m, 2, 2, 2.0, 10, 1).unwrap();
        let hr = h.map(|c| c.re);
        let g = DMatrix::identity(2, 2) + hr.transpose() * &hr * 2.0;
        assert!((r.mean - 0.5 * g.determinant().log2()).abs() < 1e-12);
        let c = achievable_rate_mimo(&m, 2, 2, 2.0, 10, 1).unwrap();
        assert!((c.mean - 2.0 * r.mean).abs() < 1e-12);
    }

    #[test]
    fn rate_below_capacity_and_monotone() {
        let m = FadingModel::RayleighIid;
        let mut last = 0.0;
        for rho in [0.5, 1.0, 4.0] {
            let g = mimo_gap(&m, 2, 2, rho, 20_000, 5).unwrap();
            assert!(g.rate.mean < g.capacity.mean);
            assert!(g.gap.mean > 0.0);
            assert!(g.rate.mean > last);
            last = g.rate.mean;
        }
        let r2 = achievable_rate_mimo(&m, 1, 2, 1.0, 20_000, 6).unwrap();
        let r4 = achievable_rate_mimo(&m, 1, 4, 1.0, 20_000, 6).unwrap();
        assert!(r4.mean > r2.mean);
    }

    #[test]
    fn estimates_are_bit_reproducible() {
        let a = mimo_gap(&FadingModel::RayleighIid, 2, 2, 3.0, 10_000, 77).unwrap();
        let b = mimo_gap(&FadingModel::RayleighIid, 2, 2, 3.0, 10_000, 77).unwrap();
        assert_eq!(a.gap.mean.to_bits(), b.gap.mean.to_bits());
        assert_eq!(a.rate.std_error.to_bits(), b.rate.std_error.to_bits());
    }

    #[test]
    fn curve_matches_single_point_estimates() {
        let m = FadingModel::nakagami(2.0).unwrap();
        let curve = siso_curve(&m, &[1.0, 4.0], 50_000, 8).unwrap();
        let single = siso_gap(&m, 4.0, 50_000, 8).unwrap();
        assert!((curve[1].gap.mean - single.gap.mean).abs() < 1e-12);
        assert!((curve[1].gap.std_error - single.gap.std_error).abs() < 1e-12);
    }
}
