//! Multiple-access channel through virtual users: each transmit antenna is a
//! separate user with its own lattice code, decoded by MMSE and successive
//! cancellation in a chosen order.

mod region;
mod sic;

pub use region::{convex_hull, two_user_region, RateRegion, TwoUserRegion};
pub use sic::{mac_decision_radii, run_mac_batch, run_mac_trial, sic_decode, MacSummary, MacTrial};

use crate::channel::{sample_channel, FadingModel};
use crate::error::{Error, Result};
use crate::mc::{joint_moments_vec, McEstimate};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::{LN_2, LOG2_E};

/// Largest number of virtual users whose orders are enumerated exhaustively.
pub const MAX_ORDER_USERS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct MacConfig {
    /// Transmit antennas of each user.
    pub n_ts: Vec<usize>,
    pub n_r: usize,
    /// Per-antenna SNR of each user; zero marks an inactive user.
    pub rho_star: Vec<f64>,
    /// `ρ_ℓ` of each virtual user, users' antennas listed consecutively.
    pub virtual_powers: Vec<f64>,
}

impl MacConfig {
    /// Powers split uniformly over each user's antennas.
    pub fn new(n_ts: Vec<usize>, n_r: usize, rho_star: Vec<f64>) -> Result<Self> {
        let powers = n_ts.iter().zip(&rho_star).flat_map(|(&n, &r)| std::iter::repeat_n(r, n)).collect();
        Self::with_virtual_powers(n_ts, n_r, rho_star, powers)
    }

    /// `K` identical users with `n_t` antennas each at SNR `rho`.
    pub fn uniform(k: usize, n_t: usize, n_r: usize, rho: f64) -> Result<Self> {
        Self::new(vec![n_t; k], n_r, vec![rho; k])
    }

    /// Explicit virtual powers; user `k`'s must sum to `N_{t_k}·ρ*_k`.
    pub fn with_virtual_powers(n_ts: Vec<usize>, n_r: usize, rho_star: Vec<f64>, virtual_powers: Vec<f64>) -> Result<Self> {
        if n_ts.is_empty() || n_ts.len() != rho_star.len() {
            return Err(Error::InvalidArgument("need one antenna count and one SNR per user".into()));
        }
        if n_r == 0 || n_ts.contains(&0) {
            return Err(Error::InvalidArgument("antenna counts must be positive".into()));
        }
        if rho_star.iter().chain(&virtual_powers).any(|&r| !(r >= 0.0) || !r.is_finite()) {
            return Err(Error::InvalidArgument("SNRs must be finite and non-negative".into()));
        }
        let l: usize = n_ts.iter().sum();
        if virtual_powers.len() != l {
            return Err(Error::DimensionMismatch {
                expected: l,
                got: virtual_powers.len(),
            });
        }
        let mut offset = 0;
        for (k, (&n, &r)) in n_ts.iter().zip(&rho_star).enumerate() {
            let total: f64 = virtual_powers[offset..offset + n].iter().sum();
            let want = n as f64 * r;
            if (total - want).abs() > 1e-9 * want.max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "virtual powers of user {k} sum to {total}, expected {want}"
                )));
            }
            offset += n;
        }
        Ok(Self {
            n_ts,
            n_r,
            rho_star,
            virtual_powers,
        })
    }

    pub fn users(&self) -> usize {
        self.n_ts.len()
    }

    /// Number of virtual users `L = Σ N_{t_k}`.
    pub fn virtual_users(&self) -> usize {
        self.virtual_powers.len()
    }

    /// Index of user `k`'s first virtual user.
    pub fn offset(&self, k: usize) -> usize {
        self.n_ts[..k].iter().sum()
    }

    /// User owning virtual user `v`.
    pub fn owner(&self, v: usize) -> usize {
        let mut acc = 0;
        for (k, &n) in self.n_ts.iter().enumerate() {
            acc += n;
            if v < acc {
                return k;
            }
        }
        panic!("virtual user {v} out of range")
    }

    /// Sums virtual-user values into per-user totals.
    pub fn per_user(&self, virtual_values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.users()];
        for (v, x) in virtual_values.iter().enumerate() {
            out[self.owner(v)] += x;
        }
        out
    }
}

/// Permutation `π` of the virtual users; `π[ℓ]` is decoded at stage `ℓ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecodingOrder(Vec<usize>);

impl DecodingOrder {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
            }
        }
        Ok(Self(perm))
    }

    pub fn identity(l: usize) -> Self {
        Self((0..l).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Stage at which virtual user `v` is decoded.
    pub fn stage_of(&self, v: usize) -> usize {
        self.0.iter().position(|&x| x == v).expect("order is a permutation")
    }

    /// All `L!` orders in lexicographic order, refused for `L > 6`.
    pub fn all(l: usize) -> Result<Vec<Self>> {
        if l > MAX_ORDER_USERS {
            return Err(Error::InvalidArgument(format!(
                "{l} virtual users exceed the enumeration limit of {MAX_ORDER_USERS}"
            )));
        }
        let mut cur: Vec<usize> = (0..l).collect();
        let mut out = vec![Self(cur.clone())];
        // next lexicographic permutation
        loop {
            let Some(i) = (1..l).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
            let j = (i..l).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot has a successor");
            cur.swap(i - 1, j);
            cur[i..].reverse();
            out.push(Self(cur.clone()));
        }
        Ok(out)
    }
}

/// `F = I + Σ_{j > stage} ρ_{π(j)} h_{π(j)} h_{π(j)}ᴴ` with `stage` 0-based and
/// `columns` the `N_r × L` matrix of virtual-user channels.
pub fn mac_interference_matrix(
    order: &DecodingOrder,
    stage: usize,
    columns: &DMatrix<Complex64>,
    powers: &[f64],
) -> Result<DMatrix<Complex64>> {
    let l = order.len();
    if stage >= l {
        return Err(Error::InvalidArgument(format!("stage {stage} out of range for {l} users")));
    }
    if columns.ncols() != l || powers.len() != l {
        return Err(Error::DimensionMismatch {
            expected: l,
            got: columns.ncols(),
        });
    }
    let n_r = columns.nrows();
    let mut f = DMatrix::identity(n_r, n_r);
    for &v in &order.as_slice()[stage + 1..] {
        let h = columns.column(v);
        f += h * h.adjoint() * Complex64::from(powers[v]);
    }
    Ok(f)
}

/// `h_vᴴ F_v⁻¹ h_v` for every virtual user under `order`, accumulating `F`
/// backwards from the last stage.
pub(crate) fn stage_gains(order: &DecodingOrder, columns: &DMatrix<Complex64>, powers: &[f64]) -> Result<Vec<f64>> {
    let n_r = columns.nrows();
    let mut f = DMatrix::<Complex64>::identity(n_r, n_r);
    let mut out = vec![0.0; order.len()];
    for &v in order.as_slice().iter().rev() {
        let h = columns.column(v).into_owned();
        let chol = f.clone().cholesky().ok_or(Error::Singular)?;
        out[v] = h.dotc(&chol.solve(&h)).re;
        f += &h * h.adjoint() * Complex64::from(powers[v]);
    }
    Ok(out)
}

/// Rates of one decoding order, indexed by virtual user.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerPoint {
    pub order: DecodingOrder,
    /// `R_v = −log2 E[1/(1 + ρ_v h_vᴴF_v⁻¹h_v)]`.
    pub rates: Vec<McEstimate>,
    /// `E[1/(1 + ρ_v h_vᴴF_v⁻¹h_v)]`, the per-stage equivalent-noise factor.
    pub inverse_means: Vec<f64>,
    /// `E[log2(1 + ρ_v h_vᴴF_v⁻¹h_v)]`, the capacity chain-rule terms.
    pub log_terms: Vec<McEstimate>,
    pub sum_rate: McEstimate,
    /// Rates aggregated per user.
    pub user_rates: Vec<f64>,
}

/// Corner point of `order` by Monte Carlo.
pub fn corner_rates_mc(config: &MacConfig, model: &FadingModel, order: &DecodingOrder, samples: usize, seed: u64) -> Result<CornerPoint> {
    let l = config.virtual_users();
    if order.len() != l {
        return Err(Error::DimensionMismatch {
            expected: l,
            got: order.len(),
        });
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let powers = &config.virtual_powers;
    let failed = std::sync::atomic::AtomicBool::new(false);
    let vm = joint_moments_vec(seed, samples, 2 * l, |rng, out| {
        let gains = sample_channel(model, config.n_r, l, rng).and_then(|h| stage_gains(order, &h, powers));
        match gains {
            Ok(g) => {
                for v in 0..l {
                    let s = powers[v] * g[v];
                    out[v] = 1.0 / (1.0 + s);
                    out[l + v] = s.ln_1p() * LOG2_E;
                }
            }
            Err(_) => {
                failed.store(true, std::sync::atomic::Ordering::Relaxed);
                out.fill(f64::NAN);
            }
        }
    });
    if failed.into_inner() {
        return Err(Error::Singular);
    }
    let inverse_means: Vec<f64> = (0..l).map(|v| vm.mean(v)).collect();
    let rates: Vec<McEstimate> = (0..l)
        .map(|v| {
            let m = inverse_means[v];
            let e = vm.estimate(v);
            McEstimate::new(-m.log2(), e.std_error / (m * LN_2), samples)
        })
        .collect();
    let mut grad = vec![0.0; 2 * l];
    for v in 0..l {
        grad[v] = -1.0 / (inverse_means[v] * LN_2);
    }
    let sum = rates.iter().map(|r| r.mean).sum();
    let sum_rate = McEstimate::new(sum, vm.linear_std_error(&grad), samples);
    let user_rates = config.per_user(&rates.iter().map(|r| r.mean).collect::<Vec<_>>());
    Ok(CornerPoint {
        order: order.clone(),
        rates,
        inverse_means,
        log_terms: (0..l).map(|v| vm.estimate(l + v)).collect(),
        sum_rate,
        user_rates,
    })
}

/// `E[log2 det(I + Σ_ℓ ρ_ℓ h_ℓh_ℓᴴ)]`, the sum capacity under the configured
/// virtual powers.
pub fn sum_capacity_mc(config: &MacConfig, model: &FadingModel, samples: usize, seed: u64) -> Result<McEstimate> {
    let l = config.virtual_users();
    let n_r = config.n_r;
    let failed = std::sync::atomic::AtomicBool::new(false);
    let vm = joint_moments_vec(seed, samples, 1, |rng, out| {
        let value = sample_channel(model, n_r, l, rng).and_then(|h| {
            let mut f = DMatrix::<Complex64>::identity(n_r, n_r);
            for v in 0..l {
                let c = h.column(v);
                f += c * c.adjoint() * Complex64::from(config.virtual_powers[v]);
            }
            let chol = f.cholesky().ok_or(Error::Singular)?;
            let ld = chol.l_dirty();
            Ok((0..n_r).map(|i| 2.0 * ld[(i, i)].re.ln()).sum::<f64>() * LOG2_E)
        });
        out[0] = value.unwrap_or_else(|_| {
            failed.store(true, std::sync::atomic::Ordering::Relaxed);
            f64::NAN
        });
    });
    if failed.into_inner() {
        return Err(Error::Singular);
    }
    Ok(vm.estimate(0))
}

/// Corner points of every decoding order, on common random numbers.
pub fn all_corner_points(config: &MacConfig, model: &FadingModel, samples: usize, seed: u64) -> Result<Vec<CornerPoint>> {
    DecodingOrder::all(config.virtual_users())?
        .iter()
        .map(|o| corner_rates_mc(config, model, o, samples, seed))
        .collect()
}
