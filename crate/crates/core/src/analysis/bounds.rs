//! Closed-form upper bounds on the gap to capacity, with explicit
//! applicability predicates. Inapplicable bounds are reported, never asserted.

use super::Bound;
use crate::channel::{sample_channel, FadingModel};
use crate::error::{Error, Result};
use crate::mc::batched;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// `log2 e` rounded up as in the low-SNR bounds.
const LOW_SNR_FACTOR: f64 = 1.45;
const RAYLEIGH_PTP_CONST: f64 = 0.48;
const RAYLEIGH_MAC_CONST: f64 = 1.48;

/// Moments of `H̃ᴴH̃` needed by the MIMO bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoMoments {
    /// `E[H̃ᴴH̃]`.
    pub gram_mean: DMatrix<Complex64>,
    /// `E[(H̃ᴴH̃)⁻¹]` when known to be finite.
    pub gram_inverse_mean: Option<DMatrix<Complex64>>,
    /// `E‖h̃‖⁴` for a single transmit antenna, when finite.
    pub norm_fourth: Option<f64>,
    /// Entries are i.i.d. zero-mean unit-variance complex Gaussian.
    pub iid_gaussian: bool,
}

impl MimoMoments {
    /// Exact moments of an i.i.d. Rayleigh `N_r × N_t` channel: `E[H̃ᴴH̃] = N_r I`,
    /// `E[(H̃ᴴH̃)⁻¹] = I/(N_r − N_t)` for `N_r > N_t`, and `‖h̃‖² ~ Gamma(N_r, 1)`.
    pub fn rayleigh(n_t: usize, n_r: usize) -> Self {
        let eye = DMatrix::<Complex64>::identity(n_t, n_t);
        let nr = n_r as f64;
        Self {
            gram_mean: &eye * Complex64::from(nr),
            gram_inverse_mean: (n_r > n_t).then(|| &eye * Complex64::from(1.0 / (n_r - n_t) as f64)),
            norm_fourth: (n_t == 1).then_some(nr * (nr + 1.0)),
            iid_gaussian: true,
        }
    }

    /// Monte Carlo moments. The inverse Gram mean is only estimated when
    /// `inverse_finite` is asserted by the caller, since a sample mean cannot
    /// certify that the expectation exists.
    pub fn estimate(model: &FadingModel, n_t: usize, n_r: usize, inverse_finite: bool, samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        if inverse_finite && n_r < n_t {
            return Err(Error::Inapplicable("H̃ᴴH̃ is singular when N_r < N_t".into()));
        }
        type Acc = (DMatrix<Complex64>, DMatrix<Complex64>, f64);
        let parts = batched(seed, samples, |rng, count| -> Result<Acc> {
            let mut g = DMatrix::zeros(n_t, n_t);
            let mut gi = DMatrix::zeros(n_t, n_t);
            let mut f = 0.0;
            for _ in 0..count {
                let h = sample_channel(model, n_r, n_t, rng)?;
                let gram = h.adjoint() * &h;
                if n_t == 1 {
                    f += gram[(0, 0)].re * gram[(0, 0)].re;
                }
                if inverse_finite {
                    gi += gram.clone().try_inverse().ok_or(Error::Singular)?;
                }
                g += gram;
            }
            Ok((g, gi, f))
        });
        let mut g = DMatrix::zeros(n_t, n_t);
        let mut gi = DMatrix::zeros(n_t, n_t);
        let mut f = 0.0;
        for p in parts {
            let (a, b, c) = p?;
            g += a;
            gi += b;
            f += c;
        }
        let n = Complex64::from(samples as f64);
        Ok(Self {
            gram_mean: g / n,
            gram_inverse_mean: inverse_finite.then(|| gi / n),
            norm_fourth: (n_t == 1).then_some(f / samples as f64),
            iid_gaussian: matches!(model, FadingModel::RayleighIid),
        })
    }

    fn norm_mean(&self) -> f64 {
        self.gram_mean.trace().re
    }
}

/// `N_t·log2(1 + (N_t + 1)/(N_r − N_t))`, refused when `N_r ≤ N_t`.
pub fn wishart_gap_bound(n_t: usize, n_r: usize) -> Result<f64> {
    if n_r <= n_t {
        return Err(Error::Inapplicable(format!(
            "E[(H̃ᴴH̃)⁻¹] diverges for N_r = {n_r} ≤ N_t = {n_t}"
        )));
    }
    Ok(n_t as f64 * (1.0 + (n_t + 1) as f64 / (n_r - n_t) as f64).log2())
}

/// `log2 det((I + E[H̃ᴴH̃])·E[(H̃ᴴH̃)⁻¹])`.
pub fn moment_gap_bound(moments: &MimoMoments) -> Result<f64> {
    let inv = moments
        .gram_inverse_mean
        .as_ref()
        .ok_or_else(|| Error::Inapplicable("E[(H̃ᴴH̃)⁻¹] not known to be finite".into()))?;
    let n = moments.gram_mean.nrows();
    let m = (DMatrix::identity(n, n) + &moments.gram_mean) * inv;
    let det = m.determinant();
    if !(det.re > 0.0) {
        return Err(Error::Singular);
    }
    Ok(det.re.log2())
}

/// The three MIMO gap bounds: general moment form, i.i.d. Rayleigh, and
/// low-SNR SIMO.
pub fn gap_bounds_cor1(moments: &MimoMoments, n_t: usize, n_r: usize, rho: f64) -> Vec<Bound> {
    let high = rho >= 1.0;
    let general = moment_gap_bound(moments);
    let wishart = wishart_gap_bound(n_t, n_r);
    let low_applicable = n_t == 1 && moments.norm_fourth.is_some() && rho < 1.0 / moments.norm_mean();
    vec![
        Bound::new(
            "mimo_moment",
            general.as_ref().copied().unwrap_or(f64::NAN),
            high && n_r >= n_t && general.is_ok(),
        ),
        Bound::new(
            "mimo_rayleigh",
            wishart.as_ref().copied().unwrap_or(f64::NAN),
            high && moments.iid_gaussian && wishart.is_ok(),
        ),
        Bound::new(
            "simo_low_snr",
            moments.norm_fourth.map_or(f64::NAN, |f| LOW_SNR_FACTOR * f * rho * rho),
            low_applicable,
        ),
    ]
}

/// Single-antenna bounds: low SNR, inverse-moment, Nakagami, and Rayleigh.
pub fn gap_bounds_cor2(model: &FadingModel, rho: f64) -> Vec<Bound> {
    let pm = model.power_moments();
    let high = rho >= 1.0;
    let nakagami_m = match model {
        FadingModel::Nakagami { m } if *m > 1.0 => Some(*m),
        _ => None,
    };
    vec![
        Bound::new("low_snr", LOW_SNR_FACTOR * pm.fourth * rho * rho, rho < 1.0 && pm.fourth.is_finite()),
        Bound::new(
            "inverse_moment",
            pm.inverse.map_or(f64::NAN, |e| 1.0 + e.log2()),
            high && pm.inverse.is_some(),
        ),
        Bound::new(
            "nakagami",
            nakagami_m.map_or(f64::NAN, |m| 1.0 + (1.0 + 1.0 / (m - 1.0)).log2()),
            high && nakagami_m.is_some(),
        ),
        Bound::new(
            "rayleigh",
            RAYLEIGH_PTP_CONST + (1.0 + rho).log2().log2(),
            high && matches!(model, FadingModel::RayleighIid),
        ),
    ]
}

/// Two-user symmetric single-antenna MAC bounds.
pub fn gap_bounds_cor4(model: &FadingModel, rho: f64) -> Vec<Bound> {
    let pm = model.power_moments();
    let high = rho >= 0.5;
    let nakagami_m = match model {
        FadingModel::Nakagami { m } if *m > 1.0 => Some(*m),
        _ => None,
    };
    vec![
        Bound::new(
            "mac_low_snr",
            LOW_SNR_FACTOR * (1.0 + 2.0 * pm.fourth) * rho * rho,
            rho < 0.5 && pm.fourth.is_finite(),
        ),
        Bound::new(
            "mac_inverse_moment",
            pm.inverse.map_or(f64::NAN, |e| 2.0 + e.log2()),
            high && pm.inverse.is_some(),
        ),
        Bound::new(
            "mac_nakagami",
            nakagami_m.map_or(f64::NAN, |m| 2.0 + (1.0 + 1.0 / (m - 1.0)).log2()),
            high && nakagami_m.is_some(),
        ),
        Bound::new(
            "mac_rayleigh",
            RAYLEIGH_MAC_CONST + (1.0 + rho).log2().log2(),
            high && matches!(model, FadingModel::RayleighIid),
        ),
    ]
}

/// `Σ_{ℓ=1}^{N_t·K} log2(1 + (ℓ + 1)/(N_r − ℓ))`, refused unless `N_r > K·N_t`.
pub fn mac_gap_bound_cor3(k: usize, n_t: usize, n_r: usize) -> Result<f64> {
    let l = k * n_t;
    if k == 0 || n_t == 0 {
        return Err(Error::InvalidArgument("user and antenna counts must be positive".into()));
    }
    if n_r <= l {
        return Err(Error::Inapplicable(format!("needs N_r > K·N_t, got N_r = {n_r}, K·N_t = {l}")));
    }
    Ok((1..=l).map(|i| (1.0 + (i + 1) as f64 / (n_r - i) as f64).log2()).sum())
}
