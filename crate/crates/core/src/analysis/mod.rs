//! Monte Carlo and quadrature evaluation of rates, capacities, gaps, bounds,
//! and the supporting matrix and probability inequalities.

mod bounds;
mod lemmas;
mod mac_gap;
mod rates;

pub use bounds::{
    gap_bounds_cor1, gap_bounds_cor2, gap_bounds_cor4, mac_gap_bound_cor3, moment_gap_bound, wishart_gap_bound,
    MimoMoments,
};
pub use lemmas::{
    crypto_lemma_check, noise_concentration_report, psd_dominance_check, wishart_inverse_mean, CryptoReport,
    ExceedanceRow, MatrixEstimate, PsdReport,
};
pub use mac_gap::{mac_gap_two_user, mac_sum_gap, two_user_gammas_exact};
pub use rates::{
    achievable_rate_mimo, achievable_rate_mimo_real, bounds_hold, ergodic_capacity, mimo_gap, siso_curve,
    siso_exact, siso_expectation_exact, siso_gap, snr_penalty_alpha, snr_penalty_alpha_exact, SisoExact,
};

use crate::mc::McEstimate;

/// A closed-form gap bound and whether its hypotheses hold for the
/// configuration it was evaluated on. Undefined values are `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    pub name: &'static str,
    pub value: f64,
    pub applicable: bool,
}

impl Bound {
    pub fn new(name: &'static str, value: f64, applicable: bool) -> Self {
        Self { name, value, applicable }
    }
}

/// Paired capacity/rate estimates, their difference, and attached bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub capacity: McEstimate,
    pub rate: McEstimate,
    pub gap: McEstimate,
    pub bounds: Vec<Bound>,
}

impl GapReport {
    /// Applicable bounds lying below `gap − ci95`.
    pub fn violations(&self) -> Vec<&Bound> {
        self.bounds
            .iter()
            .filter(|b| b.applicable && b.value < self.gap.mean - self.gap.ci95_halfwidth)
            .collect()
    }

    /// Tightest applicable bound, if any.
    pub fn tightest(&self) -> Option<&Bound> {
        self.bounds
            .iter()
            .filter(|b| b.applicable)
            .min_by(|a, b| a.value.total_cmp(&b.value))
    }
}
