//! Successive cancellation over lattice-coded virtual users.
//!
//! Every virtual user sends one complex stream, so its lattice has dimension
//! `2·block_len` and its coarse second moment should be `ρ_v/2` per real
//! dimension. Cancellation uses the Euclidean decision; a wrong decision
//! propagates into every later stage.

use super::{corner_rates_mc, DecodingOrder, MacConfig};
use crate::channel::{realify, sample_channel, sample_noise, FadingModel};
use crate::error::{Error, Result};
use crate::lattice::NestedPair;
use crate::mc::{batched_with_size, McRng};
use crate::transceiver::{ambiguity_decode, encode, euclidean_decode, AmbiguityOutcome, Codeword, DecodeResult, TRIAL_BATCH};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::FRAC_1_SQRT_2;

/// Decision radius of every virtual user, `√((1+ε)·2·block_len·(ρ_v/2)·s_v)`
/// with `s_v = E[1/(1 + ρ_v h_vᴴF_v⁻¹h_v)]` under `order`. Zero for inactive
/// users.
pub fn mac_decision_radii(
    config: &MacConfig,
    model: &FadingModel,
    order: &DecodingOrder,
    block_len: usize,
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be non-negative, got {epsilon}")));
    }
    let cp = corner_rates_mc(config, model, order, samples, seed)?;
    Ok(config
        .virtual_powers
        .iter()
        .zip(&cp.inverse_means)
        .map(|(&rho, &s)| ((1.0 + epsilon) * block_len as f64 * rho * s).sqrt())
        .collect())
}

/// Decode record of one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub user: usize,
    pub ok_ambiguity: bool,
    pub ok_euclidean: bool,
    pub outcome: AmbiguityOutcome,
    /// `y′` of this stage, kept for diagnostics.
    pub y_prime: DVector<f64>,
}

/// Per-stage records in decoding order; inactive users have none.
#[derive(Debug, Clone, PartialEq)]
pub struct MacTrial {
    pub stages: Vec<Option<StageRecord>>,
}

/// `U_vᵀ` with `U_v = ρ_v(I + Σ_{j ≥ stage} ρ_j H_jH_jᵀ)⁻¹H_v`; the sum runs
/// over `v` and the users still to be decoded.
fn stage_filter(h: &[DMatrix<f64>], powers: &[f64], later: &[usize], v: usize) -> Result<DMatrix<f64>> {
    let n = h[v].nrows();
    let mut f = DMatrix::identity(n, n);
    for &j in later.iter().chain(std::iter::once(&v)) {
        f += &h[j] * h[j].transpose() * powers[j];
    }
    let chol = f.cholesky().ok_or(Error::Singular)?;
    Ok((chol.solve(&h[v]) * powers[v]).transpose())
}

/// Runs the cancellation chain on given received slices. `channels[i]` is the
/// complex `N_r × L` matrix at time `i`, `ys[i]` the realified received
/// vector, and `codewords[v]` is `None` exactly for inactive users.
pub fn sic_decode(
    config: &MacConfig,
    pairs: &[NestedPair],
    order: &DecodingOrder,
    radii: &[f64],
    codewords: &[Option<Codeword>],
    channels: &[DMatrix<Complex64>],
    ys: &[DVector<f64>],
) -> Result<MacTrial> {
    let l = config.virtual_users();
    let powers = &config.virtual_powers;
    let block_len = channels.len();
    let mut residual: Vec<DVector<f64>> = ys.to_vec();
    let real_h: Vec<Vec<DMatrix<f64>>> = channels
        .iter()
        .map(|h| (0..l).map(|v| realify(&h.columns(v, 1).into_owned())).collect())
        .collect();
    let mut stages = Vec::with_capacity(l);
    for (stage, &v) in order.as_slice().iter().enumerate() {
        let Some(cw) = &codewords[v] else {
            stages.push(None);
            continue;
        };
        let later: Vec<usize> = order.as_slice()[stage + 1..].iter().copied().filter(|&j| powers[j] > 0.0).collect();
        let mut y_prime = cw.d.clone();
        for i in 0..block_len {
            let u = stage_filter(&real_h[i], powers, &later, v)?;
            let mut seg = y_prime.rows_mut(2 * i, 2);
            seg += u * &residual[i];
        }
        let pair = &pairs[v];
        let amb = ambiguity_decode(&y_prime, pair, radii[v])?;
        let euc = euclidean_decode(&y_prime, pair)?;
        let correct = |r: &DecodeResult| -> Result<bool> {
            match &r.t_hat {
                Some(th) => pair.same_coset(th, &cw.t),
                None => Ok(false),
            }
        };
        let t_hat = euc.t_hat.as_ref().expect("Euclidean decoding always returns a point");
        let x_hat = pair.coarse().mod_lattice(&(t_hat - &cw.d))?;
        for i in 0..block_len {
            residual[i] -= &real_h[i][v] * x_hat.rows(2 * i, 2);
        }
        stages.push(Some(StageRecord {
            user: v,
            ok_ambiguity: correct(&amb)?,
            ok_euclidean: correct(&euc)?,
            outcome: amb.ambiguity_outcome.unwrap_or(AmbiguityOutcome::Outside),
            y_prime,
        }));
    }
    Ok(MacTrial { stages })
}

fn check_pairs(config: &MacConfig, pairs: &[NestedPair], order: &DecodingOrder, radii: &[f64], block_len: usize) -> Result<()> {
    let l = config.virtual_users();
    for got in [pairs.len(), order.len(), radii.len()] {
        if got != l {
            return Err(Error::DimensionMismatch { expected: l, got });
        }
    }
    if block_len == 0 {
        return Err(Error::InvalidArgument("block length must be positive".into()));
    }
    for p in pairs {
        if p.dim() != 2 * block_len {
            return Err(Error::DimensionMismatch {
                expected: 2 * block_len,
                got: p.dim(),
            });
        }
    }
    Ok(())
}

/// One block: every active user encodes a random message with its own
/// dither, the superposition passes `block_len` independent channel uses, and
/// the receiver cancels in `order`.
pub fn run_mac_trial<R: Rng + ?Sized>(
    config: &MacConfig,
    model: &FadingModel,
    pairs: &[NestedPair],
    order: &DecodingOrder,
    radii: &[f64],
    block_len: usize,
    rng: &mut R,
) -> Result<MacTrial> {
    check_pairs(config, pairs, order, radii, block_len)?;
    let l = config.virtual_users();
    let mut codewords = Vec::with_capacity(l);
    for (v, pair) in pairs.iter().enumerate() {
        codewords.push(if config.virtual_powers[v] > 0.0 {
            let m = pair.random_message(rng)?;
            Some(encode(pair, m, rng)?)
        } else {
            None
        });
    }
    let mut channels = Vec::with_capacity(block_len);
    let mut ys = Vec::with_capacity(block_len);
    for i in 0..block_len {
        let h = sample_channel(model, config.n_r, l, rng)?;
        let mut y = sample_noise(2 * config.n_r, rng) * FRAC_1_SQRT_2;
        for (v, cw) in codewords.iter().enumerate() {
            if let Some(cw) = cw {
                y += realify(&h.columns(v, 1).into_owned()) * cw.x.rows(2 * i, 2);
            }
        }
        channels.push(h);
        ys.push(y);
    }
    sic_decode(config, pairs, order, radii, &codewords, &channels, &ys)
}

/// Stage-wise error counts of a batch, indexed by stage.
#[derive(Debug, Clone, PartialEq)]
pub struct MacSummary {
    pub trials: usize,
    pub order: DecodingOrder,
    pub err_ambiguity: Vec<usize>,
    pub err_euclidean: Vec<usize>,
    /// Euclidean errors at a stage given every earlier stage was right.
    pub cond_err_euclidean: Vec<usize>,
    /// Trials in which every earlier stage was right.
    pub cond_trials: Vec<usize>,
}

impl MacSummary {
    pub fn euclidean_error_rate(&self, stage: usize) -> f64 {
        self.err_euclidean[stage] as f64 / self.trials as f64
    }

    pub fn ambiguity_error_rate(&self, stage: usize) -> f64 {
        self.err_ambiguity[stage] as f64 / self.trials as f64
    }

    /// Error rate of the stage with error-free cancellation before it.
    pub fn conditional_error_rate(&self, stage: usize) -> f64 {
        self.cond_err_euclidean[stage] as f64 / self.cond_trials[stage] as f64
    }
}

/// `trials` independent blocks; the result depends only on `seed`.
#[allow(clippy::too_many_arguments)]
pub fn run_mac_batch(
    config: &MacConfig,
    model: &FadingModel,
    pairs: &[NestedPair],
    order: &DecodingOrder,
    radii: &[f64],
    block_len: usize,
    trials: usize,
    seed: u64,
) -> Result<MacSummary> {
    check_pairs(config, pairs, order, radii, block_len)?;
    let parts = batched_with_size(seed, trials, TRIAL_BATCH, |rng: &mut McRng, count| -> Result<Vec<MacTrial>> {
        (0..count).map(|_| run_mac_trial(config, model, pairs, order, radii, block_len, rng)).collect()
    });
    let l = order.len();
    let mut s = MacSummary {
        trials,
        order: order.clone(),
        err_ambiguity: vec![0; l],
        err_euclidean: vec![0; l],
        cond_err_euclidean: vec![0; l],
        cond_trials: vec![0; l],
    };
    for part in parts {
        for t in part? {
            let mut clean = true;
            for (stage, rec) in t.stages.iter().enumerate() {
                let Some(rec) = rec else { continue };
                s.err_ambiguity[stage] += usize::from(!rec.ok_ambiguity);
                s.err_euclidean[stage] += usize::from(!rec.ok_euclidean);
                if clean {
                    s.cond_trials[stage] += 1;
                    s.cond_err_euclidean[stage] += usize::from(!rec.ok_euclidean);
                }
                clean &= rec.ok_euclidean;
            }
        }
    }
    Ok(s)
}
