//! Rate regions: the hull of all corner points and the closed-form two-user
//! description through `γ₁..γ₄`.

use super::{all_corner_points, corner_rates_mc, CornerPoint, DecodingOrder, MacConfig};
use crate::channel::FadingModel;
use crate::error::{Error, Result};
use crate::mc::{derive_seed, joint_moments, McEstimate};
use std::f64::consts::LN_2;

const HULL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RateRegion {
    pub corners: Vec<CornerPoint>,
    /// Counter-clockwise hull of the per-user corner rates, the origin and the
    /// axis intercepts; present only for two users.
    pub hull: Option<Vec<[f64; 2]>>,
}

impl RateRegion {
    /// Corner points for every order plus the two-user hull.
    pub fn compute(config: &MacConfig, model: &FadingModel, samples: usize, seed: u64) -> Result<Self> {
        Ok(Self::from_corners(config, all_corner_points(config, model, samples, seed)?))
    }

    pub fn from_corners(config: &MacConfig, corners: Vec<CornerPoint>) -> Self {
        let hull = (config.users() == 2).then(|| {
            let pts: Vec<[f64; 2]> = corners.iter().map(|c| [c.user_rates[0], c.user_rates[1]]).collect();
            let r1 = pts.iter().map(|p| p[0]).fold(0.0, f64::max);
            let r2 = pts.iter().map(|p| p[1]).fold(0.0, f64::max);
            let mut all = vec![[0.0, 0.0], [r1, 0.0], [0.0, r2]];
            all.extend(pts);
            convex_hull(&all)
        });
        Self { corners, hull }
    }

    /// Whether `point` lies in the hull, boundary included to `tol`.
    pub fn hull_contains(&self, point: [f64; 2], tol: f64) -> bool {
        let Some(h) = &self.hull else { return false };
        if h.len() < 3 {
            return h.iter().any(|v| (v[0] - point[0]).abs() <= tol && (v[1] - point[1]).abs() <= tol);
        }
        (0..h.len()).all(|i| {
            let a = h[i];
            let b = h[(i + 1) % h.len()];
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            cross(a, b, point) >= -tol * len
        })
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; counter-clockwise, collinear points dropped.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() <= HULL_TOL && (a[1] - b[1]).abs() <= HULL_TOL);
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= HULL_TOL {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= HULL_TOL {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoUserRegion {
    /// `γ₁..γ₄` in bits.
    pub gammas: [McEstimate; 4],
    pub region: RateRegion,
}

impl TwoUserRegion {
    fn g(&self) -> [f64; 4] {
        self.gammas.map(|g| g.mean)
    }

    /// Corner of decoding user 1 first, `(−γ₃, −γ₂)`.
    pub fn corner_12(&self) -> [f64; 2] {
        let g = self.g();
        [-g[2], -g[1]]
    }

    /// Corner of decoding user 2 first, `(−γ₁, −γ₄)`.
    pub fn corner_21(&self) -> [f64; 2] {
        let g = self.g();
        [-g[0], -g[3]]
    }

    /// Strict membership in the region cut out by the three γ inequalities.
    /// An inactive user makes the third one `0 < 0`, leaving no interior.
    pub fn contains(&self, r1: f64, r2: f64) -> bool {
        let [g1, g2, g3, g4] = self.g();
        r1 < -g1 && r2 < -g2 && (g4 - g2) * r1 + (g3 - g1) * r2 < g1 * g2 - g3 * g4
    }
}

/// Two single-antenna users and a single-antenna receiver: the γ's by Monte
/// Carlo on the fading powers, and the corner points of both orders by the
/// matrix estimator on an independent stream.
pub fn two_user_region(config: &MacConfig, model: &FadingModel, samples: usize, seed: u64) -> Result<TwoUserRegion> {
    if config.n_ts != [1, 1] || config.n_r != 1 {
        return Err(Error::Inapplicable("the two-user region needs K = 2 and N_t = N_r = 1".into()));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let (p1, p2) = (config.virtual_powers[0], config.virtual_powers[1]);
    let jm = joint_moments::<4, _>(seed, samples, |rng| {
        let a = p1 * model.sample_power(rng);
        let b = p2 * model.sample_power(rng);
        [1.0 / (1.0 + a), 1.0 / (1.0 + b), (1.0 + b) / (1.0 + a + b), (1.0 + a) / (1.0 + a + b)]
    });
    let means = jm.means();
    let gammas: [McEstimate; 4] = std::array::from_fn(|i| {
        let se = jm.covariance(i, i).max(0.0).sqrt() / (samples as f64).sqrt();
        McEstimate::new(means[i].log2(), se / (means[i] * LN_2), samples)
    });
    let corner_seed = derive_seed(seed, 1);
    let corners = vec![
        corner_rates_mc(config, model, &DecodingOrder::identity(2), samples, corner_seed)?,
        corner_rates_mc(config, model, &DecodingOrder::new(vec![1, 0])?, samples, corner_seed)?,
    ];
    Ok(TwoUserRegion {
        gammas,
        region: RateRegion::from_corners(config, corners),
    })
}
