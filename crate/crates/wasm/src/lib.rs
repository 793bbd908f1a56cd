//! Browser bindings for three interactive views: single-antenna rate curves,
//! the two-user rate region, and a two-dimensional nested lattice with its
//! modulo reduction.
//!
//! All outputs are flat `Float64Array`s; each function documents its row
//! layout.

// `!(x > 0.0)` is deliberate throughout: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use ergolat::analysis::{gap_bounds_cor2, siso_exact, two_user_gammas_exact};
use ergolat::channel::FadingModel;
use ergolat::lattice::{LinearCode, NestedPair};
use ergolat::mc::stream_rng;
use ergolat::quadrature::expect_exponential_pair;
use ergolat::Result;
use nalgebra::DVector;
use wasm_bindgen::prelude::*;

fn js(e: ergolat::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Rows `[snr_db, rate, capacity, gap, bound]` in bits; `bound` is the
/// tightest applicable closed-form bound or NaN.
pub fn siso_rows(model: &str, db_start: f64, db_end: f64, db_step: f64) -> Result<Vec<f64>> {
    let model = FadingModel::parse(model)?;
    if !(db_step > 0.0) || !(db_end >= db_start) {
        return Err(ergolat::Error::InvalidArgument("need start <= end and a positive step".into()));
    }
    let count = ((db_end - db_start) / db_step + 1e-9).floor() as usize + 1;
    let mut out = Vec::with_capacity(5 * count);
    for i in 0..count {
        let db = db_start + i as f64 * db_step;
        let rho = 10f64.powf(db / 10.0);
        let e = siso_exact(&model, rho)?;
        let bound = gap_bounds_cor2(&model, rho)
            .into_iter()
            .filter(|b| b.applicable)
            .map(|b| b.value)
            .fold(f64::NAN, f64::min);
        out.extend([db, e.rate, e.capacity, e.gap, bound]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn siso_curves(model: &str, db_start: f64, db_end: f64, db_step: f64) -> std::result::Result<Vec<f64>, JsError> {
    siso_rows(model, db_start, db_end, db_step).map_err(js)
}

/// Two Rayleigh users at a common SNR:
/// `[γ₁, γ₂, γ₃, γ₄, R₁, R₂ (user 1 first), R₁, R₂ (user 2 first), sum capacity]`.
pub fn region_values(rho_db: f64) -> Result<Vec<f64>> {
    let rho = 10f64.powf(rho_db / 10.0);
    let g = two_user_gammas_exact(rho, rho)?;
    let cap = expect_exponential_pair(|x, y| (rho * (x + y)).ln_1p() * std::f64::consts::LOG2_E);
    Ok(vec![g[0], g[1], g[2], g[3], -g[2], -g[1], -g[0], -g[3], cap])
}

#[wasm_bindgen]
pub fn two_user_region(rho_db: f64) -> std::result::Result<Vec<f64>, JsError> {
    region_values(rho_db).map_err(js)
}

/// The pair `Λ_c ⊂ Λ_f` in the plane with `Λ_f` built from the code spanned
/// by `(1, a)` over GF(p).
#[wasm_bindgen]
pub struct LatticeDemo {
    pair: NestedPair,
}

impl LatticeDemo {
    pub fn build(p: u32, a: u32, power: f64) -> Result<Self> {
        let code = LinearCode::new(u64::from(p), vec![vec![1, i64::from(a % p)]])?;
        Ok(Self {
            pair: NestedPair::construction_a(code, power)?,
        })
    }

    pub fn reduce_point(&self, x: f64, y: f64) -> Result<Vec<f64>> {
        let s = DVector::from_vec(vec![x, y]);
        let m = self.pair.coarse().mod_lattice(&s)?;
        let q = self.pair.coarse().mod_lattice(&self.pair.fine().nearest_point(&s)?)?;
        Ok(vec![m[0], m[1], q[0], q[1]])
    }
}

#[wasm_bindgen]
impl LatticeDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(p: u32, a: u32, power: f64) -> std::result::Result<LatticeDemo, JsError> {
        Self::build(p, a, power).map_err(js)
    }

    /// Codewords as `[x, y]` pairs, all inside the coarse cell.
    pub fn codebook(&self) -> Vec<f64> {
        let size = self.pair.codebook_size().unwrap_or(0);
        (0..size)
            .filter_map(|i| self.pair.codeword(i).ok())
            .flat_map(|c| [c[0], c[1]])
            .collect()
    }

    /// Rows of the coarse generator, `[g11, g12, g21, g22]`.
    pub fn coarse_basis(&self) -> Vec<f64> {
        let g = self.pair.coarse().generator();
        vec![g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]]
    }

    /// `[s mod Λ_c, nearest fine point mod Λ_c]` for the point `s = (x, y)`.
    pub fn reduce(&self, x: f64, y: f64) -> std::result::Result<Vec<f64>, JsError> {
        self.reduce_point(x, y).map_err(js)
    }

    /// `count` dither samples as `[x, y]` pairs, uniform over the coarse cell.
    pub fn dither_samples(&self, count: u32, seed: u32) -> Vec<f64> {
        let mut rng = stream_rng(u64::from(seed), 0);
        (0..count)
            .filter_map(|_| self.pair.sample_dither(&mut rng).ok())
            .flat_map(|d| [d.0[0], d.0[1]])
            .collect()
    }

    pub fn rate(&self) -> f64 {
        self.pair.nesting_rate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn siso_rows_layout() {
        let rows = siso_rows("rayleigh", 0.0, 10.0, 5.0).unwrap();
        assert_eq!(rows.len(), 15);
        // 0 dB: rate −log2(e·E1(1)) and the 0.48-bit bound
        assert!((rows[1] - 0.745_775).abs() < 1e-6);
        assert!((rows[4] - 0.48).abs() < 1e-12);
        assert!(rows.chunks(5).all(|r| r[3] <= r[4]));
        assert!(siso_rows("rayleigh", 5.0, 0.0, 1.0).is_err());
        // the model keys offered by the page
        for key in ["nakagami:m=2", "nakagami:m=4"] {
            assert_eq!(siso_rows(key, -10.0, 30.0, 10.0).unwrap().len(), 25);
        }
    }

    #[test]
    fn region_is_symmetric() {
        let v = region_values(-6.0).unwrap();
        assert!((v[0] - v[1]).abs() < 1e-12 && (v[2] - v[3]).abs() < 1e-9);
        assert!((v[4] - v[7]).abs() < 1e-9 && (v[5] - v[6]).abs() < 1e-9);
        assert!(v[4] + v[5] < v[8]);
    }

    #[test]
    fn lattice_demo_reduces_into_the_cell() {
        let d = LatticeDemo::build(5, 2, 1.0).unwrap();
        assert_eq!(d.codebook().len(), 10);
        let r = d.reduce_point(7.3, -4.1).unwrap();
        let b = d.coarse_basis();
        let side = b[0].abs();
        for v in r {
            assert!(v >= -side / 2.0 - 1e-12 && v < side / 2.0 + 1e-12);
        }
        assert_eq!(d.dither_samples(50, 1).len(), 100);
        assert!((d.rate() - 5f64.log2() / 2.0).abs() < 1e-12);
    }
}
