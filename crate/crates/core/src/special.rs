//! Exponential integral `E1` and its logarithmic upper bound.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `E1(z) = ∫_z^∞ e^{-t}/t dt` for `z > 0`.
///
/// Power series for `z ≤ 1`, modified-Lentz continued fraction above.
pub fn exp_integral_e1(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidArgument(format!("E1 needs z > 0, got {z}")));
    }
    if z <= 1.0 {
        // E1(z) = -γ - ln z - Σ_{k≥1} (-z)^k / (k·k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= -z / kf;
            let contrib = term / kf;
            sum += contrib;
            if contrib.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        Ok(-EULER_GAMMA - z.ln() - sum)
    } else {
        Ok(lentz(z)? * (-z).exp())
    }
}

/// Continued fraction for `e^z·E1(z)`, `z > 1`.
fn lentz(z: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h);
        }
    }
    Err(Error::Estimator(format!("E1 continued fraction did not converge at z = {z}")))
}

/// `e^z·E1(z)`, finite for every `z > 0` (no overflow at large `z`).
pub fn scaled_e1(z: f64) -> Result<f64> {
    if z > 1.0 {
        return lentz(z);
    }
    Ok(z.exp() * exp_integral_e1(z)?)
}

/// `E[1/(1 + ρX)]` for `X ~ Exp(1)`, equal to `e^{1/ρ}E1(1/ρ)/ρ`.
pub fn rayleigh_inverse_mean(rho: f64) -> Result<f64> {
    Ok(scaled_e1(1.0 / rho)? / rho)
}

/// `E[ln(1 + ρX)]` for `X ~ Exp(1)`, equal to `e^{1/ρ}E1(1/ρ)`.
pub fn rayleigh_log_mean(rho: f64) -> Result<f64> {
    scaled_e1(1.0 / rho)
}

/// `e^{-z}·ln(1 + 1/z)`, the upper bound on `E1(z)`.
pub fn e1_upper_bound(z: f64) -> f64 {
    (-z).exp() * (1.0 / z).ln_1p()
}

/// Whether `E1(z) < e^{-z} ln(1 + 1/z)` holds at `z`.
pub fn e1_bound_check(z: f64) -> Result<bool> {
    Ok(exp_integral_e1(z)? < e1_upper_bound(z))
}
