//! Gaps between the multiple-access sum capacity and the lattice scheme's
//! sum rate.

use super::{gap_bounds_cor4, mac_gap_bound_cor3, Bound, GapReport};
use crate::channel::FadingModel;
use crate::error::{Error, Result};
use crate::mac::{corner_rates_mc, sum_capacity_mc, DecodingOrder, MacConfig};
use crate::mc::{joint_moments, McEstimate};
use crate::quadrature::expect_exponential_pair;
use crate::special::rayleigh_inverse_mean;
use std::f64::consts::{LN_2, LOG2_E};

/// `𝒢 = E[log2(1 + ρ|h₁|² + ρ|h₂|²)] + log2(E[(1 + ρ|h₁|²)/(1 + ρ|h₁|² + ρ|h₂|²)]·E[1/(1 + ρ|h₁|²)])`
/// for two identically distributed single-antenna users, with the applicable
/// two-user bounds.
pub fn mac_gap_two_user(model: &FadingModel, rho: f64, samples: usize, seed: u64) -> Result<GapReport> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::InvalidArgument(format!("rho must be finite and non-negative, got {rho}")));
    }
    if let FadingModel::Deterministic(h) = model {
        if h.shape() != (1, 1) {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: h.nrows() * h.ncols(),
            });
        }
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let jm = joint_moments::<3, _>(seed, samples, |rng| {
        let a = rho * model.sample_power(rng);
        let b = rho * model.sample_power(rng);
        [(a + b).ln_1p() * LOG2_E, (1.0 + a) / (1.0 + a + b), 1.0 / (1.0 + a)]
    });
    let [cap, m1, m2] = jm.means();
    let (s1, s2) = (1.0 / (m1 * LN_2), 1.0 / (m2 * LN_2));
    let rate = -m1.log2() - m2.log2();
    Ok(GapReport {
        capacity: McEstimate::new(cap, jm.linear_std_error(&[1.0, 0.0, 0.0]), samples),
        rate: McEstimate::new(rate, jm.linear_std_error(&[0.0, s1, s2]), samples),
        gap: McEstimate::new(cap - rate, jm.linear_std_error(&[1.0, s1, s2]), samples),
        bounds: gap_bounds_cor4(model, rho),
    })
}

/// Sum-capacity gap of `K` Rayleigh users with `n_t` antennas each, decoded in
/// the identity order under uniform power. Capacity and rate share their
/// channel draws; the gap's standard error is the conservative
/// `se_capacity + se_rate`. The many-antenna bound is attached when
/// `N_r > K·N_t`.
pub fn mac_sum_gap(k: usize, n_t: usize, n_r: usize, rho: f64, samples: usize, seed: u64) -> Result<GapReport> {
    let config = MacConfig::uniform(k, n_t, n_r, rho)?;
    let model = FadingModel::RayleighIid;
    let capacity = sum_capacity_mc(&config, &model, samples, seed)?;
    let corner = corner_rates_mc(&config, &model, &DecodingOrder::identity(config.virtual_users()), samples, seed)?;
    let rate = corner.sum_rate;
    let gap = McEstimate::new(capacity.mean - rate.mean, capacity.std_error + rate.std_error, samples);
    let bounds = match mac_gap_bound_cor3(k, n_t, n_r) {
        Ok(v) => vec![Bound::new("mac_wishart", v, true)],
        Err(Error::Inapplicable(_)) => vec![Bound::new("mac_wishart", f64::NAN, false)],
        Err(e) => return Err(e),
    };
    Ok(GapReport {
        capacity,
        rate,
        gap,
        bounds,
    })
}

/// `γ₁..γ₄` in bits for two Rayleigh users by quadrature.
pub fn two_user_gammas_exact(rho1: f64, rho2: f64) -> Result<[f64; 4]> {
    if !(rho1 >= 0.0 && rho2 >= 0.0) || !rho1.is_finite() || !rho2.is_finite() {
        return Err(Error::InvalidArgument("SNRs must be finite and non-negative".into()));
    }
    let single = |rho: f64| -> Result<f64> { if rho == 0.0 { Ok(0.0) } else { Ok(rayleigh_inverse_mean(rho)?.log2()) } };
    let g3 = expect_exponential_pair(|x, y| (1.0 + rho2 * y) / (1.0 + rho1 * x + rho2 * y)).log2();
    let g4 = expect_exponential_pair(|x, y| (1.0 + rho1 * x) / (1.0 + rho1 * x + rho2 * y)).log2();
    Ok([single(rho1)?, single(rho2)?, g3, g4])
}
