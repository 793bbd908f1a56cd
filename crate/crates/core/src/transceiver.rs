//! Point-to-point pipeline: dithered lattice encoding, per-time MMSE
//! equalisation, and the paired ambiguity/Euclidean decoders.
//!
//! A codeword of dimension `real_nt · block_len` is laid out time slice by
//! time slice; slice `i` occupies entries `[i·real_nt, (i+1)·real_nt)`.

use crate::channel::{FadingModel, LinkConfig, Mode};
use crate::error::{Error, Result};
use crate::lattice::{DitherSample, NestedPair};
use crate::mc::{batched, batched_with_size, McRng};
use crate::quadrature::{expect_exponential, expect_gamma};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Tolerance of the per-trial algebraic identity checks.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Default decision-sphere inflation.
pub const DEFAULT_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    pub message: u64,
    /// Fine-lattice point in the coarse cell.
    pub t: DVector<f64>,
    pub d: DVector<f64>,
    /// `[t − d] mod Λ`.
    pub x: DVector<f64>,
    /// `−Q_V(t − d)`, so that `x = t − d + λ`.
    pub lambda: DVector<f64>,
}

/// Encodes `message` with a fresh dither.
pub fn encode<R: Rng + ?Sized>(pair: &NestedPair, message: u64, rng: &mut R) -> Result<Codeword> {
    let d = pair.sample_dither(rng)?;
    encode_with_dither(pair, message, &d)
}

pub fn encode_with_dither(pair: &NestedPair, message: u64, dither: &DitherSample) -> Result<Codeword> {
    let t = pair.codeword(message)?;
    let d = dither.vector().clone();
    if d.len() != t.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            got: d.len(),
        });
    }
    let s = &t - &d;
    let q = pair.coarse().nearest_point(&s)?;
    Ok(Codeword {
        message,
        x: &s - &q,
        lambda: -q,
        t,
        d,
    })
}

/// `Uᵀ` for `U = ρ(I + ρHHᵀ)⁻¹H`, shaped `n_t × n_r`.
pub fn mmse_matrix(h: &DMatrix<f64>, rho: f64) -> Result<DMatrix<f64>> {
    let n_r = h.nrows();
    let g = DMatrix::identity(n_r, n_r) + h * h.transpose() * rho;
    let chol = g.cholesky().ok_or(Error::Singular)?;
    Ok((chol.solve(h) * rho).transpose())
}

/// Equivalent noise of one slice in closed form:
/// `z = −(I + ρHᵀH)⁻¹x + ρHᵀ(I + ρHHᵀ)⁻¹w`.
pub fn equivalent_noise_closed_form(h: &DMatrix<f64>, rho: f64, x: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
    let (n_r, n_t) = h.shape();
    let a = (DMatrix::identity(n_t, n_t) + h.transpose() * h * rho).cholesky().ok_or(Error::Singular)?;
    let b = (DMatrix::identity(n_r, n_r) + h * h.transpose() * rho).cholesky().ok_or(Error::Singular)?;
    Ok(h.transpose() * b.solve(w) * rho - a.solve(x))
}

/// `Σ̄ = P·E[(I + ρHᵀH)⁻¹]` on the real-equivalent channel, per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaBar {
    pub per_use: DMatrix<f64>,
    pub block_len: usize,
}

impl SigmaBar {
    /// `tr(Σ̄)` over the whole block.
    pub fn trace(&self) -> f64 {
        self.block_len as f64 * self.per_use.trace()
    }

    /// `Ψ = ρΣ̄⁻¹` per channel use (diagnostic).
    pub fn psi(&self, rho: f64) -> Option<DMatrix<f64>> {
        self.per_use.clone().try_inverse().map(|m| m * rho)
    }
}

/// `Σ̄` for `link` under `model`. Deterministic channels and complex scalar
/// Rayleigh/Nakagami (`m ≥ 1`) are exact; everything else averages `samples`
/// per-draw inverses.
pub fn sigma_bar(model: &FadingModel, link: &LinkConfig, samples: usize, seed: u64) -> Result<SigmaBar> {
    let nt = link.real_nt();
    let p = link.power_per_dim();
    let rho = link.effective_rho();
    let exact_scalar = match (link.mode, link.n_t, link.n_r, model) {
        (Mode::Complex, 1, 1, FadingModel::RayleighIid) => Some(expect_exponential(|x| 1.0 / (1.0 + rho * x))),
        (Mode::Complex, 1, 1, FadingModel::Nakagami { m }) if *m >= 1.0 => {
            Some(expect_gamma(|x| 1.0 / (1.0 + rho * x), *m, 1.0 / m))
        }
        _ => None,
    };
    let per_use = if let Some(s) = exact_scalar {
        DMatrix::identity(nt, nt) * (p * s)
    } else {
        let draws = if matches!(model, FadingModel::Deterministic(_)) { 1 } else { samples };
        if draws == 0 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        let parts = batched(seed, draws, |rng, count| -> Result<DMatrix<f64>> {
            let mut acc = DMatrix::zeros(nt, nt);
            for _ in 0..count {
                let h = link.sample_channel(model, rng)?;
                let g = DMatrix::identity(nt, nt) + h.transpose() * &h * rho;
                acc += g.cholesky().ok_or(Error::Singular)?.inverse();
            }
            Ok(acc)
        });
        let mut sum = DMatrix::zeros(nt, nt);
        for part in parts {
            sum += part?;
        }
        sum * (p / draws as f64)
    };
    Ok(SigmaBar {
        per_use,
        block_len: link.block_len,
    })
}

/// `√((1 + ε)·tr(Σ̄))`.
pub fn decision_radius(sigma: &SigmaBar, epsilon: f64) -> Result<f64> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be non-negative, got {epsilon}")));
    }
    Ok(((1.0 + epsilon) * sigma.trace()).sqrt())
}

/// Applies `U_iᵀ` slice by slice and adds the dither back.
pub fn equalize(ys: &[DVector<f64>], hs: &[DMatrix<f64>], dither: &DVector<f64>, rho: f64) -> Result<DVector<f64>> {
    if ys.len() != hs.len() {
        return Err(Error::DimensionMismatch {
            expected: hs.len(),
            got: ys.len(),
        });
    }
    let nt = hs.first().map_or(0, |h| h.ncols());
    if dither.len() != nt * hs.len() {
        return Err(Error::DimensionMismatch {
            expected: nt * hs.len(),
            got: dither.len(),
        });
    }
    let mut out = dither.clone();
    for (i, (y, h)) in ys.iter().zip(hs).enumerate() {
        if y.len() != h.nrows() || h.ncols() != nt {
            return Err(Error::DimensionMismatch {
                expected: h.nrows(),
                got: y.len(),
            });
        }
        let slice = mmse_matrix(h, rho)? * y;
        let mut seg = out.rows_mut(i * nt, nt);
        seg += slice;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualizedBlock {
    pub y_prime: DVector<f64>,
    /// `y′ − t − λ`.
    pub z: DVector<f64>,
    pub sigma_bar_trace: f64,
}

impl EqualizedBlock {
    pub fn new(y_prime: DVector<f64>, codeword: &Codeword, sigma_bar_trace: f64) -> Self {
        let z = &y_prime - &codeword.t - &codeword.lambda;
        Self {
            y_prime,
            z,
            sigma_bar_trace,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMethod {
    AmbiguitySphere,
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmbiguityOutcome {
    Unique,
    Ambiguous,
    Outside,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Decoded fine point reduced mod Λ; `None` when the sphere decoder
    /// finds zero or several candidates.
    pub t_hat: Option<DVector<f64>>,
    pub method: DecodeMethod,
    pub ambiguity_outcome: Option<AmbiguityOutcome>,
}

/// Lists fine points within `radius` of `y′` and succeeds only if exactly one.
pub fn ambiguity_decode(y_prime: &DVector<f64>, pair: &NestedPair, radius: f64) -> Result<DecodeResult> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let pts = pair.fine().points_within(y_prime, radius, 2)?;
    let (outcome, t_hat) = match pts.len() {
        0 => (AmbiguityOutcome::Outside, None),
        1 => (AmbiguityOutcome::Unique, Some(pair.coarse().mod_lattice(&pts[0])?)),
        _ => (AmbiguityOutcome::Ambiguous, None),
    };
    Ok(DecodeResult {
        t_hat,
        method: DecodeMethod::AmbiguitySphere,
        ambiguity_outcome: Some(outcome),
    })
}

/// Closest fine point to `y′`, reduced mod Λ.
pub fn euclidean_decode(y_prime: &DVector<f64>, pair: &NestedPair) -> Result<DecodeResult> {
    let q = pair.fine().nearest_point(y_prime)?;
    Ok(DecodeResult {
        t_hat: Some(pair.coarse().mod_lattice(&q)?),
        method: DecodeMethod::Euclidean,
        ambiguity_outcome: None,
    })
}

fn check_pair(link: &LinkConfig, pair: &NestedPair) -> Result<()> {
    if pair.dim() != link.lattice_dim() {
        return Err(Error::DimensionMismatch {
            expected: link.lattice_dim(),
            got: pair.dim(),
        });
    }
    Ok(())
}

/// One encoded block after the channel and the equaliser, before decoding.
#[derive(Debug, Clone)]
pub struct ReceivedBlock {
    pub codeword: Codeword,
    pub block: EqualizedBlock,
    /// Largest deviation between `y′ − t − λ` and the closed-form noise.
    pub identity_residual: f64,
}

/// Encodes a random message, sends it through `block_len` independent
/// channel uses, and equalises.
pub fn transmit_block<R: Rng + ?Sized>(
    link: &LinkConfig,
    model: &FadingModel,
    pair: &NestedPair,
    sigma_bar_trace: f64,
    rng: &mut R,
) -> Result<ReceivedBlock> {
    check_pair(link, pair)?;
    let message = pair.random_message(rng)?;
    let cw = encode(pair, message, rng)?;
    let nt = link.real_nt();
    let rho = link.effective_rho();
    let mut ys = Vec::with_capacity(link.block_len);
    let mut hs = Vec::with_capacity(link.block_len);
    let mut z_closed = DVector::zeros(cw.x.len());
    for i in 0..link.block_len {
        let h = link.sample_channel(model, rng)?;
        let w = link.sample_noise(rng);
        let xi = cw.x.rows(i * nt, nt).into_owned();
        z_closed.rows_mut(i * nt, nt).copy_from(&equivalent_noise_closed_form(&h, rho, &xi, &w)?);
        ys.push(&h * &xi + w);
        hs.push(h);
    }
    let y_prime = equalize(&ys, &hs, &cw.d, rho)?;
    let block = EqualizedBlock::new(y_prime, &cw, sigma_bar_trace);
    let identity_residual = (&block.z - &z_closed).amax();
    Ok(ReceivedBlock {
        codeword: cw,
        block,
        identity_residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PtpTrial {
    pub ok_ambiguity: bool,
    pub ok_euclidean: bool,
    pub outcome: AmbiguityOutcome,
    pub z_norm2: f64,
    pub identity_residual: f64,
    /// Both decoders returned the same point on a `Unique` outcome.
    pub unique_agrees: bool,
}

/// One encode → channel → equalise → decode cycle; both decoders see the
/// same realisation.
pub fn run_ptp_trial<R: Rng + ?Sized>(
    link: &LinkConfig,
    model: &FadingModel,
    pair: &NestedPair,
    sigma: &SigmaBar,
    radius: f64,
    rng: &mut R,
) -> Result<PtpTrial> {
    let rx = transmit_block(link, model, pair, sigma.trace(), rng)?;
    let y = &rx.block.y_prime;
    let amb = ambiguity_decode(y, pair, radius)?;
    let euc = euclidean_decode(y, pair)?;
    let t = &rx.codeword.t;
    let correct = |r: &DecodeResult| -> Result<bool> {
        match &r.t_hat {
            Some(th) => pair.same_coset(th, t),
            None => Ok(false),
        }
    };
    let outcome = amb.ambiguity_outcome.unwrap_or(AmbiguityOutcome::Outside);
    let unique_agrees = match (&amb.t_hat, &euc.t_hat) {
        (Some(a), Some(b)) => pair.same_coset(a, b)?,
        _ => true,
    };
    Ok(PtpTrial {
        ok_ambiguity: correct(&amb)?,
        ok_euclidean: correct(&euc)?,
        outcome,
        z_norm2: rx.block.z.norm_squared(),
        identity_residual: rx.identity_residual,
        unique_agrees,
    })
}

/// Aggregate of a batch of paired trials.
#[derive(Debug, Clone, PartialEq)]
pub struct PtpSummary {
    /// Lattice dimension.
    pub n: usize,
    pub rho: f64,
    /// Nesting rate, bits per real dimension.
    pub rate: f64,
    pub trials: usize,
    pub err_ambiguity: usize,
    pub err_euclidean: usize,
    pub ambiguous_count: usize,
    pub outside_count: usize,
    pub mean_z_norm2: f64,
    pub max_identity_residual: f64,
    /// Trials where the Euclidean decoder failed although the sphere decoder
    /// returned the correct unique point.
    pub dominance_violations: usize,
    /// `Unique` outcomes on which the two decoders disagreed.
    pub unique_disagreements: usize,
}

impl PtpSummary {
    pub fn ambiguity_error_rate(&self) -> f64 {
        self.err_ambiguity as f64 / self.trials as f64
    }

    pub fn euclidean_error_rate(&self) -> f64 {
        self.err_euclidean as f64 / self.trials as f64
    }
}

/// Trials per reproducibility batch for decoding experiments.
pub const TRIAL_BATCH: usize = 64;

/// Runs `trials` paired trials; the outcome depends only on `seed`.
pub fn run_ptp_batch(
    link: &LinkConfig,
    model: &FadingModel,
    pair: &NestedPair,
    sigma: &SigmaBar,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<PtpSummary> {
    check_pair(link, pair)?;
    let radius = decision_radius(sigma, epsilon)?;
    let parts = batched_with_size(seed, trials, TRIAL_BATCH, |rng: &mut McRng, count| -> Result<Vec<PtpTrial>> {
        (0..count).map(|_| run_ptp_trial(link, model, pair, sigma, radius, rng)).collect()
    });
    let mut s = PtpSummary {
        n: pair.dim(),
        rho: link.rho,
        rate: pair.nesting_rate(),
        trials,
        err_ambiguity: 0,
        err_euclidean: 0,
        ambiguous_count: 0,
        outside_count: 0,
        mean_z_norm2: 0.0,
        max_identity_residual: 0.0,
        dominance_violations: 0,
        unique_disagreements: 0,
    };
    let mut z_sum = 0.0;
    for part in parts {
        for t in part? {
            s.err_ambiguity += usize::from(!t.ok_ambiguity);
            s.err_euclidean += usize::from(!t.ok_euclidean);
            s.ambiguous_count += usize::from(t.outcome == AmbiguityOutcome::Ambiguous);
            s.outside_count += usize::from(t.outcome == AmbiguityOutcome::Outside);
            s.dominance_violations += usize::from(t.ok_ambiguity && !t.ok_euclidean);
            s.unique_disagreements += usize::from(!t.unique_agrees);
            s.max_identity_residual = s.max_identity_residual.max(t.identity_residual);
            z_sum += t.z_norm2;
        }
    }
    s.mean_z_norm2 = if trials > 0 { z_sum / trials as f64 } else { 0.0 };
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Lattice, LinearCode};
    use crate::mc::stream_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn m(rows: usize, cols: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, v)
    }

    #[test]
    fn zero_dither_zero_message_sends_zero() {
        let pair = NestedPair::cubic(3, 4, 1.0).unwrap();
        let cw = encode_with_dither(&pair, 0, &DitherSample::zero(3)).unwrap();
        assert_eq!(cw.x, DVector::zeros(3));
    }

    #[test]
    fn encoding_identity_and_power() {
        let rho = 2.5;
        let pair = NestedPair::cubic(8, 3, rho).unwrap();
        let mut rng = stream_rng(21, 0);
        let n = 10_000;
        let mut p = Vec::with_capacity(n);
        for _ in 0..n {
            let msg = pair.random_message(&mut rng).unwrap();
            let cw = encode(&pair, msg, &mut rng).unwrap();
            assert!((&cw.x - (&cw.t - &cw.d + &cw.lambda)).amax() < 1e-12);
            assert!(pair.coarse().contains(&cw.lambda).unwrap());
            p.push(cw.x.norm_squared() / 8.0);
        }
        let mean = p.iter().sum::<f64>() / n as f64;
        let var = p.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((mean - rho).abs() < 3.0 * (var / n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn mmse_examples() {
        assert!((mmse_matrix(&m(1, 1, &[1.0]), 1.0).unwrap()[(0, 0)] - 0.5).abs() < 1e-15);
        let u = mmse_matrix(&DMatrix::identity(2, 2), 1.0).unwrap();
        assert!((u - DMatrix::identity(2, 2) * 0.5).amax() < 1e-15);
        let u = mmse_matrix(&m(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]), 2.0).unwrap();
        assert_eq!(u.shape(), (2, 3));
    }

    #[test]
    fn mmse_minimises_noise_power() {
        // E‖z‖² = tr((UᵀH − I)P(UᵀH − I)ᵀ + σ²UᵀU); perturbing U can only increase it
        let h = m(2, 2, &[0.7, -1.2, 0.4, 0.9]);
        let rho = 3.0;
        let cost = |ut: &DMatrix<f64>| {
            let a = ut * &h - DMatrix::identity(2, 2);
            (&a * a.transpose() * rho + ut * ut.transpose()).trace()
        };
        let u = mmse_matrix(&h, rho).unwrap();
        let base = cost(&u);
        let mut rng = stream_rng(22, 0);
        for _ in 0..200 {
            let e = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-0.05..0.05));
            assert!(cost(&(&u + e)) >= base - 1e-12);
        }
        // Σ̄ for this fixed channel equals the minimal cost per dimension pair
        let sig = (DMatrix::identity(2, 2) + h.transpose() * &h * rho).try_inverse().unwrap() * rho;
        assert!((sig.trace() - base).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn equivalent_noise_identity(
            hv in proptest::collection::vec(-2.0f64..2.0, 6),
            xv in proptest::collection::vec(-2.0f64..2.0, 2),
            wv in proptest::collection::vec(-2.0f64..2.0, 3),
            rho in 0.05f64..50.0,
        ) {
            let h = DMatrix::from_row_slice(3, 2, &hv);
            let x = DVector::from_vec(xv);
            let w = DVector::from_vec(wv);
            let ut = mmse_matrix(&h, rho).unwrap();
            let direct = (&ut * &h - DMatrix::identity(2, 2)) * &x + &ut * &w;
            let closed = equivalent_noise_closed_form(&h, rho, &x, &w).unwrap();
            prop_assert!((direct - closed).amax() < 1e-9);
        }
    }

    #[test]
    fn high_snr_equaliser_is_transparent() {
        // noise-free, H = I: z = −x/(1 + ρ)
        let rho = 1e8;
        let pair = NestedPair::cubic(16, 2, rho).unwrap();
        let mut rng = stream_rng(23, 0);
        let cw = encode(&pair, 3, &mut rng).unwrap();
        let hs = vec![DMatrix::identity(1, 1); 16];
        let ys: Vec<_> = (0..16).map(|i| DVector::from_element(1, cw.x[i])).collect();
        let block = EqualizedBlock::new(equalize(&ys, &hs, &cw.d, rho).unwrap(), &cw, 0.0);
        assert!(block.z.norm() / 4.0 < 1e-3);
        assert!((&block.z + &cw.x / (1.0 + rho)).amax() < 1e-6);
    }

    #[test]
    fn scalar_unit_channel_noise_variance() {
        let link = LinkConfig::new(1, 1, 1.0, 64, Mode::Real).unwrap();
        let pair = NestedPair::trivial(64, 1.0).unwrap();
        let sigma = sigma_bar(&FadingModel::identity(1), &link, 10, 0).unwrap();
        assert!((sigma.trace() - 32.0).abs() < 1e-12);
        let mut rng = stream_rng(24, 0);
        let mut zs = Vec::new();
        for _ in 0..2000 {
            let rx = transmit_block(&link, &FadingModel::identity(1), &pair, sigma.trace(), &mut rng).unwrap();
            assert!(rx.identity_residual < IDENTITY_TOL);
            zs.extend(rx.block.z.iter().copied());
        }
        let n = zs.len() as f64;
        let var = zs.iter().map(|z| z * z).sum::<f64>() / n;
        let var4 = zs.iter().map(|z| z.powi(4)).sum::<f64>() / n;
        let se = ((var4 - var * var) / n).sqrt();
        assert!((var - 0.5).abs() < 3.0 * se, "{var} ± {se}");
    }

    #[test]
    fn decision_radius_values() {
        let link = LinkConfig::new(1, 1, 1.0, 100, Mode::Real).unwrap();
        let s = sigma_bar(&FadingModel::identity(1), &link, 10, 0).unwrap();
        assert!((decision_radius(&s, 0.0).unwrap() - 50f64.sqrt()).abs() < 1e-12);
        let r0 = decision_radius(&s, 0.0).unwrap();
        let r1 = decision_radius(&s, 0.1).unwrap();
        assert!((r1 * r1 / (r0 * r0) - 1.1).abs() < 1e-12);
        assert!(decision_radius(&s, -0.5).is_err());

        // Rayleigh SISO, complex mode: radius²/n_real = (ρ/2)·E[1/(1+ρX)]
        let link = LinkConfig::new(1, 1, 1.0, 10, Mode::Complex).unwrap();
        let s = sigma_bar(&FadingModel::RayleighIid, &link, 0, 0).unwrap();
        let r = decision_radius(&s, 0.0).unwrap();
        assert!((r * r / 10.0 - 0.596_347_362_3).abs() < 1e-9);
        // the Monte Carlo route agrees
        let link_r = LinkConfig::new(1, 2, 1.0, 10, Mode::Complex).unwrap();
        let mc = sigma_bar(&FadingModel::RayleighIid, &link_r, 100_000, 3).unwrap();
        let exact = crate::quadrature::expect_gamma(|x| 1.0 / (1.0 + x), 2.0, 1.0) * 0.5;
        assert!((mc.per_use[(0, 0)] - exact).abs() < 0.01);
        assert!(mc.per_use[(0, 1)].abs() < 0.01);
        assert!(s.psi(1.0).is_some());
    }

    #[test]
    fn decoders_on_constructed_points() {
        let code = LinearCode::new(5, vec![vec![1, 0, 2, 3], vec![0, 1, 4, 1]]).unwrap();
        let pair = NestedPair::new(Lattice::scaled(4, 5.0).unwrap(), Lattice::construction_a(code, 1.0).unwrap()).unwrap();
        let t = pair.codeword(7).unwrap();
        let lambda = DVector::from_vec(vec![5.0, -5.0, 0.0, 10.0]);
        let y = &t + &lambda;
        let amb = ambiguity_decode(&y, &pair, 0.4).unwrap();
        assert_eq!(amb.ambiguity_outcome, Some(AmbiguityOutcome::Unique));
        assert!(pair.same_coset(amb.t_hat.as_ref().unwrap(), &t).unwrap());
        let euc = euclidean_decode(&y, &pair).unwrap();
        assert!(pair.same_coset(euc.t_hat.as_ref().unwrap(), &t).unwrap());

        // midpoint between the origin and a shortest nonzero fine vector
        let fine = pair.fine();
        let a = DVector::zeros(4);
        let nbrs = fine.points_within(&a, 2.0, 100).unwrap();
        let b = nbrs.iter().filter(|v| v.norm() > 1e-9).min_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap().clone();
        let mid = (&a + &b) * 0.5;
        let amb = ambiguity_decode(&mid, &pair, b.norm() / 2.0 + 1e-9).unwrap();
        assert_eq!(amb.ambiguity_outcome, Some(AmbiguityOutcome::Ambiguous));
        assert!(amb.t_hat.is_none());

        let far = &mid + DVector::from_vec(vec![0.013, 0.021, -0.017, 0.011]);
        let amb = ambiguity_decode(&far, &pair, 1e-3).unwrap();
        assert_eq!(amb.ambiguity_outcome, Some(AmbiguityOutcome::Outside));
    }

    #[test]
    fn huge_snr_trials_decode() {
        let link = LinkConfig::new(1, 1, 1e9, 8, Mode::Real).unwrap();
        let pair = NestedPair::cubic(8, 2, link.power_per_dim()).unwrap();
        let model = FadingModel::identity(1);
        let sigma = sigma_bar(&model, &link, 1, 0).unwrap();
        // the spacing dwarfs the noise; a wide sphere keeps χ²₈ exceedance negligible
        let s = run_ptp_batch(&link, &model, &pair, &sigma, 5.0, 200, 5).unwrap();
        assert_eq!(s.err_euclidean, 0);
        assert_eq!(s.err_ambiguity, 0);
        assert!((s.rate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_codeword_always_decodes() {
        let link = LinkConfig::new(1, 1, 0.5, 4, Mode::Complex).unwrap();
        let pair = NestedPair::trivial(8, link.power_per_dim()).unwrap();
        let sigma = sigma_bar(&FadingModel::RayleighIid, &link, 0, 0).unwrap();
        let s = run_ptp_batch(&link, &FadingModel::RayleighIid, &pair, &sigma, 0.1, 300, 6).unwrap();
        assert_eq!(s.err_euclidean, 0);
        assert_eq!(s.rate, 0.0);
    }

    #[test]
    fn rejects_mismatched_pair() {
        let link = LinkConfig::new(1, 1, 1.0, 4, Mode::Complex).unwrap();
        let pair = NestedPair::cubic(4, 2, 0.5).unwrap();
        let sigma = sigma_bar(&FadingModel::RayleighIid, &link, 0, 0).unwrap();
        assert!(matches!(
            run_ptp_batch(&link, &FadingModel::RayleighIid, &pair, &sigma, 0.1, 10, 0),
            Err(Error::DimensionMismatch { expected: 8, got: 4 })
        ));
    }
}
