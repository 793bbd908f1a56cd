//! Fading processes, Gaussian noise, and the complex-to-real embedding.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;

/// Distribution of the channel matrix at each time index; draws are i.i.d.
/// across time.
#[derive(Debug, Clone, PartialEq)]
pub enum FadingModel {
    /// Circularly symmetric complex Gaussian entries with `E|h|² = 1`.
    RayleighIid,
    /// `|h|² ~ Gamma(m, 1/m)` with uniform phase; `m > 0`.
    Nakagami { m: f64 },
    /// The same matrix at every time index.
    Deterministic(DMatrix<Complex64>),
}

/// Whether the pipeline runs on real channels or on realified complex ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Real,
    Complex,
}

/// `|h|²` moments of a scalar fading coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerMoments {
    pub mean: f64,
    /// `E|h|⁴`.
    pub fourth: f64,
    /// `E[1/|h|²]`, `None` when infinite.
    pub inverse: Option<f64>,
}

impl FadingModel {
    pub fn nakagami(m: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidArgument(format!("Nakagami m must be positive, got {m}")));
        }
        Ok(Self::Nakagami { m })
    }

    pub fn identity(n: usize) -> Self {
        Self::Deterministic(DMatrix::identity(n, n))
    }

    pub fn scalar(h: Complex64) -> Self {
        Self::Deterministic(DMatrix::from_element(1, 1, h))
    }

    /// Parses `rayleigh`, `nakagami:m=<v>`, or `fixed:<path>`.
    pub fn parse(key: &str) -> Result<Self> {
        let key = key.trim();
        if key.eq_ignore_ascii_case("rayleigh") {
            return Ok(Self::RayleighIid);
        }
        if let Some(rest) = key.strip_prefix("nakagami:") {
            let v = rest
                .trim()
                .strip_prefix("m=")
                .ok_or_else(|| Error::Parse(format!("expected nakagami:m=<value>, got '{key}'")))?;
            let m = v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("invalid Nakagami m '{v}'")))?;
            return Self::nakagami(m);
        }
        if let Some(path) = key.strip_prefix("fixed:") {
            return Self::from_matrix_file(Path::new(path.trim()));
        }
        Err(Error::Parse(format!("unknown fading model '{key}'")))
    }

    /// One matrix row per line, entries separated by whitespace, each a real
    /// or complex literal such as `0.5`, `1-2i`, `3i`.
    pub fn from_matrix_file(path: &Path) -> Result<Self> {
        Self::from_matrix_text(&std::fs::read_to_string(path)?)
    }

    pub fn from_matrix_text(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| tok.parse::<Complex64>().map_err(|_| Error::Parse(format!("invalid matrix entry '{tok}'"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let cols = rows.first().map(Vec::len).ok_or_else(|| Error::Parse("empty channel matrix".into()))?;
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                got: bad.len(),
            });
        }
        Ok(Self::Deterministic(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])))
    }

    fn check_shape(&self, n_r: usize, n_t: usize) -> Result<()> {
        if n_r == 0 || n_t == 0 {
            return Err(Error::InvalidArgument("antenna counts must be positive".into()));
        }
        if let Self::Deterministic(h) = self {
            if h.nrows() != n_r {
                return Err(Error::DimensionMismatch {
                    expected: n_r,
                    got: h.nrows(),
                });
            }
            if h.ncols() != n_t {
                return Err(Error::DimensionMismatch {
                    expected: n_t,
                    got: h.ncols(),
                });
            }
        }
        Ok(())
    }

    /// Moments of `|h|²` for a scalar coefficient (deterministic models use
    /// their `(0,0)` entry).
    pub fn power_moments(&self) -> PowerMoments {
        match self {
            Self::RayleighIid => PowerMoments {
                mean: 1.0,
                fourth: 2.0,
                inverse: None,
            },
            Self::Nakagami { m } => PowerMoments {
                mean: 1.0,
                fourth: 1.0 + 1.0 / m,
                inverse: (*m > 1.0).then(|| m / (m - 1.0)),
            },
            Self::Deterministic(h) => {
                let g = h[(0, 0)].norm_sqr();
                PowerMoments {
                    mean: g,
                    fourth: g * g,
                    inverse: (g > 0.0).then(|| 1.0 / g),
                }
            }
        }
    }

    /// One draw of `|h|²` for a scalar channel.
    pub fn sample_power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::RayleighIid => {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                0.5 * (a * a + b * b)
            }
            Self::Nakagami { m } => gamma_unit(*m).sample(rng),
            Self::Deterministic(h) => h[(0, 0)].norm_sqr(),
        }
    }
}

fn gamma_unit(m: f64) -> Gamma<f64> {
    Gamma::new(m, 1.0 / m).expect("shape validated positive")
}

/// One draw of the `n_r × n_t` complex channel.
pub fn sample_channel<R: Rng + ?Sized>(model: &FadingModel, n_r: usize, n_t: usize, rng: &mut R) -> Result<DMatrix<Complex64>> {
    model.check_shape(n_r, n_t)?;
    Ok(match model {
        FadingModel::RayleighIid => DMatrix::from_fn(n_r, n_t, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
        }),
        FadingModel::Nakagami { m } => {
            let g = gamma_unit(*m);
            DMatrix::from_fn(n_r, n_t, |_, _| {
                let amp = g.sample(rng).sqrt();
                let phase = rng.random::<f64>() * 2.0 * PI;
                Complex64::from_polar(amp, phase)
            })
        }
        FadingModel::Deterministic(h) => h.clone(),
    })
}

/// One draw of a real-valued `n_r × n_t` channel: Gaussian entries of unit
/// variance, Nakagami amplitudes with random sign, or the real part of a
/// deterministic matrix.
pub fn sample_real_channel<R: Rng + ?Sized>(model: &FadingModel, n_r: usize, n_t: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    model.check_shape(n_r, n_t)?;
    Ok(match model {
        FadingModel::RayleighIid => DMatrix::from_fn(n_r, n_t, |_, _| rng.sample(StandardNormal)),
        FadingModel::Nakagami { m } => {
            let g = gamma_unit(*m);
            DMatrix::from_fn(n_r, n_t, |_, _| {
                let amp = g.sample(rng).sqrt();
                if rng.random::<bool>() {
                    amp
                } else {
                    -amp
                }
            })
        }
        FadingModel::Deterministic(h) => h.map(|c| c.re),
    })
}

/// `[[Re H, −Im H], [Im H, Re H]]`.
pub fn realify(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (r, c) = h.shape();
    let mut out = DMatrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let z = h[(i, j)];
            out[(i, j)] = z.re;
            out[(i, j + c)] = -z.im;
            out[(i + r, j)] = z.im;
            out[(i + r, j + c)] = z.re;
        }
    }
    out
}

/// Stacks `[Re v; Im v]`, the vector counterpart of [`realify`].
pub fn realify_vector(v: &DVector<Complex64>) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

/// `dim` i.i.d. standard normal entries.
pub fn sample_noise<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

/// Point-to-point link parameters. `rho` is the per-antenna SNR; in complex
/// mode each complex dimension becomes two real ones with half the power and
/// half the noise variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub rho: f64,
    /// Channel uses per codeword.
    pub block_len: usize,
    pub mode: Mode,
}

impl LinkConfig {
    pub fn new(n_t: usize, n_r: usize, rho: f64, block_len: usize, mode: Mode) -> Result<Self> {
        if n_t == 0 || n_r == 0 || block_len == 0 {
            return Err(Error::InvalidArgument("antenna counts and block length must be positive".into()));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
        }
        Ok(Self {
            n_t,
            n_r,
            rho,
            block_len,
            mode,
        })
    }

    pub fn siso(rho: f64, block_len: usize, mode: Mode) -> Result<Self> {
        Self::new(1, 1, rho, block_len, mode)
    }

    fn factor(&self) -> usize {
        match self.mode {
            Mode::Real => 1,
            Mode::Complex => 2,
        }
    }

    /// Real transmit dimensions per channel use.
    pub fn real_nt(&self) -> usize {
        self.factor() * self.n_t
    }

    /// Real receive dimensions per channel use.
    pub fn real_nr(&self) -> usize {
        self.factor() * self.n_r
    }

    /// Dimension of the lattice carrying one codeword.
    pub fn lattice_dim(&self) -> usize {
        self.real_nt() * self.block_len
    }

    /// Signal power per real dimension, i.e. the coarse second moment.
    pub fn power_per_dim(&self) -> f64 {
        self.rho / self.factor() as f64
    }

    /// Noise standard deviation per real dimension.
    pub fn noise_std(&self) -> f64 {
        match self.mode {
            Mode::Real => 1.0,
            Mode::Complex => FRAC_1_SQRT_2,
        }
    }

    /// SNR seen by the real equivalent model, `power_per_dim / noise_var`;
    /// equal to `rho` in both modes.
    pub fn effective_rho(&self) -> f64 {
        let s = self.noise_std();
        self.power_per_dim() / (s * s)
    }

    /// One real-equivalent channel draw of shape `real_nr × real_nt`.
    pub fn sample_channel<R: Rng + ?Sized>(&self, model: &FadingModel, rng: &mut R) -> Result<DMatrix<f64>> {
        match self.mode {
            Mode::Real => sample_real_channel(model, self.n_r, self.n_t, rng),
            Mode::Complex => Ok(realify(&sample_channel(model, self.n_r, self.n_t, rng)?)),
        }
    }

    /// Real noise vector of length `real_nr` with the mode's variance.
    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        sample_noise(self.real_nr(), rng) * self.noise_std()
    }
}
