//! Lattices, quantisation, modulo-lattice reduction, dithers, and nested
//! lattice codebooks.
//!
//! Three families are provided: the integer lattice `Zⁿ`, its scaled copies
//! `a·Zⁿ`, and construction-A lattices `a·(C + pZⁿ)` built from a linear code
//! `C` over `Z/pZ`. `Zⁿ` cells are taken half-open, `[-a/2, a/2)ⁿ`.

mod code;
mod enumerate;

pub use code::LinearCode;

use crate::error::{Error, Result};
use enumerate::SphereEnumerator;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Absolute tolerance for lattice-point equality.
pub const LATTICE_TOL: f64 = 1e-9;
/// Largest construction-A dimension that is decoded by enumeration.
pub const MAX_ENUM_DIM: usize = 16;
/// `1/(2πe)`, the sphere limit of the normalised second moment.
pub const SPHERE_NSM: f64 = 1.0 / (2.0 * std::f64::consts::PI * std::f64::consts::E);

/// Samples used by [`Lattice::normalized_second_moment`] when no estimate can
/// be given in closed form.
pub const DEFAULT_MOMENT_SAMPLES: usize = 200_000;
const DEFAULT_MOMENT_SEED: u64 = 0x5eed_6e0d;

#[derive(Debug, Clone, PartialEq)]
pub enum LatticeKind {
    IntegerZn,
    ScaledZn,
    ConstructionA(LinearCode),
}

#[derive(Debug, Clone)]
pub struct Lattice {
    kind: LatticeKind,
    dim: usize,
    scale: f64,
    enumerator: Option<SphereEnumerator>,
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

impl Lattice {
    pub fn integer(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidLattice("dimension must be positive".into()));
        }
        Ok(Self {
            kind: LatticeKind::IntegerZn,
            dim: n,
            scale: 1.0,
            enumerator: None,
        })
    }

    pub fn scaled(n: usize, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidLattice(format!("scale must be positive, got {scale}")));
        }
        let mut lat = Self::integer(n)?;
        lat.kind = LatticeKind::ScaledZn;
        lat.scale = scale;
        Ok(lat)
    }

    /// `scale·(C + pZⁿ)`.
    pub fn construction_a(code: LinearCode, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidLattice(format!("scale must be positive, got {scale}")));
        }
        let dim = code.n();
        let mut lat = Self {
            kind: LatticeKind::ConstructionA(code),
            dim,
            scale,
            enumerator: None,
        };
        if dim <= MAX_ENUM_DIM {
            lat.enumerator = Some(SphereEnumerator::from_rows(&lat.generator()));
        }
        Ok(lat)
    }

    /// The same lattice with every point multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        let scale = self.scale * factor;
        match &self.kind {
            LatticeKind::IntegerZn | LatticeKind::ScaledZn => Self::scaled(self.dim, scale),
            LatticeKind::ConstructionA(code) => Self::construction_a(code.clone(), scale),
        }
    }

    pub fn kind(&self) -> &LatticeKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn is_cubic(&self) -> bool {
        matches!(self.kind, LatticeKind::IntegerZn | LatticeKind::ScaledZn)
    }

    /// Square generator matrix whose rows are basis vectors.
    ///
    /// For construction A the basis is the reduced echelon form of the code
    /// together with `p·e_j` for every non-pivot column `j`.
    pub fn generator(&self) -> DMatrix<f64> {
        match &self.kind {
            LatticeKind::IntegerZn | LatticeKind::ScaledZn => DMatrix::identity(self.dim, self.dim) * self.scale,
            LatticeKind::ConstructionA(code) => {
                let (rref, pivots) = code.row_echelon();
                let p = code.p() as f64;
                let mut g = DMatrix::zeros(self.dim, self.dim);
                for (i, row) in rref.iter().enumerate() {
                    for (j, &v) in row.iter().enumerate() {
                        g[(i, j)] = v as f64;
                    }
                }
                let mut r = rref.len();
                for j in (0..self.dim).filter(|j| !pivots.contains(j)) {
                    g[(r, j)] = p;
                    r += 1;
                }
                g * self.scale
            }
        }
    }

    /// `log2 Vol(V)`.
    pub fn log2_volume(&self) -> f64 {
        let n = self.dim as f64;
        let base = n * self.scale.log2();
        match &self.kind {
            LatticeKind::ConstructionA(code) => base + (self.dim - code.k()) as f64 * (code.p() as f64).log2(),
            _ => base,
        }
    }

    pub fn volume(&self) -> f64 {
        self.log2_volume().exp2()
    }

    /// Upper bound on the covering radius from the Gram–Schmidt lengths.
    pub fn covering_radius_bound(&self) -> f64 {
        match &self.enumerator {
            Some(e) => e.covering_radius_bound(),
            None => SphereEnumerator::from_rows(&self.generator()).covering_radius_bound(),
        }
    }

    fn enumerator(&self) -> Result<std::borrow::Cow<'_, SphereEnumerator>> {
        if self.is_cubic() {
            return Ok(std::borrow::Cow::Owned(SphereEnumerator::diagonal(self.dim, self.scale)));
        }
        self.enumerator
            .as_ref()
            .map(std::borrow::Cow::Borrowed)
            .ok_or(Error::DimensionTooLarge {
                dim: self.dim,
                limit: MAX_ENUM_DIM,
            })
    }

    /// `Q_V(s)`: the lattice point whose Voronoi cell contains `s`.
    pub fn nearest_point(&self, s: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim, s.len())?;
        if self.is_cubic() {
            let a = self.scale;
            return Ok(s.map(|v| (v / a + 0.5).floor() * a));
        }
        Ok(self.enumerator()?.closest(s)?.0)
    }

    /// `[s] mod Λ = s − Q_V(s)`.
    pub fn mod_lattice(&self, s: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(s - self.nearest_point(s)?)
    }

    /// Up to `limit` lattice points within distance `radius` of `s`.
    pub fn points_within(&self, s: &DVector<f64>, radius: f64, limit: usize) -> Result<Vec<DVector<f64>>> {
        check_dim(self.dim, s.len())?;
        self.enumerator()?.within(s, radius, limit)
    }

    /// Whether `v` is a lattice point (to [`LATTICE_TOL`]).
    pub fn contains(&self, v: &DVector<f64>) -> Result<bool> {
        let q = self.nearest_point(v)?;
        let tol = LATTICE_TOL * v.amax().max(1.0);
        Ok((q - v).amax() <= tol)
    }

    /// Uniform sample over the fundamental Voronoi cell: a uniform point of
    /// the fundamental parallelepiped reduced mod Λ.
    pub fn sample_voronoi<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DVector<f64>> {
        if self.is_cubic() {
            let a = self.scale;
            return Ok(DVector::from_fn(self.dim, |_, _| (rng.random::<f64>() - 0.5) * a));
        }
        let coeffs = DVector::from_fn(self.dim, |_, _| rng.random::<f64>());
        let s = self.generator().transpose() * coeffs;
        self.mod_lattice(&s)
    }

    /// `σ² = (1/(n·Vol(V)))∫_V ‖s‖² ds`; closed form for `a·Zⁿ`, otherwise a
    /// Monte Carlo average over Voronoi-uniform samples.
    pub fn second_moment<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> Result<f64> {
        if samples == 0 {
            return Err(Error::InvalidArgument("second moment needs at least one sample".into()));
        }
        if self.is_cubic() {
            return Ok(self.scale * self.scale / 12.0);
        }
        let mut acc = 0.0;
        for _ in 0..samples {
            acc += self.sample_voronoi(rng)?.norm_squared();
        }
        Ok(acc / (samples as f64 * self.dim as f64))
    }

    /// `G(Λ) = σ²/Vol(V)^{2/n}` with an explicit sample budget.
    pub fn normalized_second_moment_with<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> Result<f64> {
        let vol_term = (2.0 * self.log2_volume() / self.dim as f64).exp2();
        if !(vol_term > 0.0) || !vol_term.is_finite() {
            return Err(Error::Singular);
        }
        Ok(self.second_moment(samples, rng)? / vol_term)
    }

    /// `G(Λ)` using [`DEFAULT_MOMENT_SAMPLES`] and a fixed internal seed.
    pub fn normalized_second_moment(&self) -> Result<f64> {
        let mut rng = crate::mc::stream_rng(DEFAULT_MOMENT_SEED, 0);
        self.normalized_second_moment_with(DEFAULT_MOMENT_SAMPLES, &mut rng)
    }

    /// Parses a plain-text block of `key = value` lines:
    ///
    /// ```text
    /// kind  = construction-a   # or integer, scaled
    /// n     = 4
    /// scale = 1.0              # optional, default 1
    /// p     = 5                # construction-a only
    /// row   = 1 0 2 3          # one line per code generator row
    /// row   = 0 1 4 1
    /// ```
    pub fn from_config(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut n = None;
        let mut scale = 1.0;
        let mut p = None;
        let mut rows: Vec<Vec<i64>> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let value = value.trim();
            let bad = |what: &str| Error::Parse(format!("line {}: invalid {what} '{value}'", lineno + 1));
            match key.trim() {
                "kind" => kind = Some(value.to_ascii_lowercase()),
                "n" => n = Some(value.parse::<usize>().map_err(|_| bad("n"))?),
                "scale" => scale = value.parse::<f64>().map_err(|_| bad("scale"))?,
                "p" => p = Some(value.parse::<u64>().map_err(|_| bad("p"))?),
                "row" => rows.push(
                    value
                        .split_whitespace()
                        .map(|t| t.parse::<i64>().map_err(|_| bad("row entry")))
                        .collect::<Result<_>>()?,
                ),
                other => return Err(Error::Parse(format!("line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        let n = n.ok_or_else(|| Error::Parse("missing n".into()))?;
        match kind.as_deref() {
            Some("integer") | Some("zn") => Self::integer(n),
            Some("scaled") | Some("scaled-zn") => Self::scaled(n, scale),
            Some("construction-a") | Some("construction_a") => {
                let p = p.ok_or_else(|| Error::Parse("construction-a needs p".into()))?;
                let code = LinearCode::new(p, rows)?;
                if code.n() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: code.n(),
                    });
                }
                Self::construction_a(code, scale)
            }
            Some(other) => Err(Error::Parse(format!("unknown lattice kind '{other}'"))),
            None => Err(Error::Parse("missing kind".into())),
        }
    }
}

/// A dither vector, uniform over the coarse Voronoi cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DitherSample(pub DVector<f64>);

impl DitherSample {
    pub fn zero(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.0
    }
}

/// How message indices map to coset representatives of `Λ₁/Λ`.
#[derive(Debug, Clone, PartialEq)]
enum Cosets {
    /// Coarse equals fine.
    Trivial,
    /// `fine = b·Zⁿ`, `coarse = q·b·Zⁿ`.
    Cubic { q: u64 },
    /// `fine = c·(C + pZⁿ)`, `coarse = q·p·c·Zⁿ`.
    Coded { q: u64 },
}

/// A coarse lattice nested in a fine one, with the codebook `Λ₁ ∩ V`.
#[derive(Debug, Clone)]
pub struct NestedPair {
    coarse: Lattice,
    fine: Lattice,
    rate_bits_per_dim: f64,
    cosets: Cosets,
}

fn integer_ratio(a: f64, b: f64) -> Option<u64> {
    let r = a / b;
    let q = r.round();
    ((r - q).abs() < 1e-9 * r.max(1.0) && q >= 1.0).then_some(q as u64)
}

impl NestedPair {
    pub fn new(coarse: Lattice, fine: Lattice) -> Result<Self> {
        check_dim(coarse.dim(), fine.dim())?;
        let rate = nesting_rate_of(&coarse, &fine);
        if rate < -1e-12 {
            return Err(Error::NotNested(format!(
                "fine cell volume exceeds coarse cell volume (rate {rate:.4})"
            )));
        }
        let coarse_basis = coarse.generator();
        for i in 0..coarse.dim() {
            if !fine.contains(&coarse_basis.row(i).transpose())? {
                return Err(Error::NotNested(format!("coarse basis vector {i} is not a fine lattice point")));
            }
        }
        let cosets = Self::coset_layout(&coarse, &fine)?;
        Ok(Self {
            coarse,
            fine,
            rate_bits_per_dim: rate.max(0.0),
            cosets,
        })
    }

    fn coset_layout(coarse: &Lattice, fine: &Lattice) -> Result<Cosets> {
        if rate_is_zero(coarse, fine) {
            return Ok(Cosets::Trivial);
        }
        let unsupported = || {
            Error::InvalidLattice("codebook enumeration needs a cubic coarse lattice over a cubic or construction-A fine lattice".into())
        };
        if !coarse.is_cubic() {
            return Err(unsupported());
        }
        match fine.kind() {
            LatticeKind::IntegerZn | LatticeKind::ScaledZn => integer_ratio(coarse.scale, fine.scale)
                .map(|q| Cosets::Cubic { q })
                .ok_or_else(unsupported),
            LatticeKind::ConstructionA(code) => integer_ratio(coarse.scale, fine.scale * code.p() as f64)
                .map(|q| Cosets::Coded { q })
                .ok_or_else(unsupported),
        }
    }

    /// Pair with `coarse = fine = a·Zⁿ` of second moment `power`: one codeword.
    pub fn trivial(n: usize, power: f64) -> Result<Self> {
        let l = Lattice::scaled(n, (12.0 * power).sqrt())?;
        Self::new(l.clone(), l)
    }

    /// `coarse = a·Zⁿ` with second moment `power`, `fine = (a/q)·Zⁿ`.
    pub fn cubic(n: usize, q: u64, power: f64) -> Result<Self> {
        let a = (12.0 * power).sqrt();
        Self::new(Lattice::scaled(n, a)?, Lattice::scaled(n, a / q as f64)?)
    }

    /// `coarse = a·Zⁿ` with second moment `power`, `fine = (a/p)·(C + pZⁿ)`.
    pub fn construction_a(code: LinearCode, power: f64) -> Result<Self> {
        let n = code.n();
        let a = (12.0 * power).sqrt();
        let c = a / code.p() as f64;
        Self::new(Lattice::scaled(n, a)?, Lattice::construction_a(code, c)?)
    }

    pub fn coarse(&self) -> &Lattice {
        &self.coarse
    }

    pub fn fine(&self) -> &Lattice {
        &self.fine
    }

    pub fn dim(&self) -> usize {
        self.coarse.dim()
    }

    pub fn nesting_rate(&self) -> f64 {
        self.rate_bits_per_dim
    }

    /// `|Λ₁ ∩ V|` when it fits in a `u64`.
    pub fn codebook_size(&self) -> Option<u64> {
        let n = self.dim() as u32;
        match (&self.cosets, self.fine.kind()) {
            (Cosets::Trivial, _) => Some(1),
            (Cosets::Cubic { q }, _) => q.checked_pow(n),
            (Cosets::Coded { q }, LatticeKind::ConstructionA(code)) => code.size()?.checked_mul(q.checked_pow(n)?),
            _ => None,
        }
    }

    /// Codeword `t ∈ Λ₁ ∩ V` for message `index`.
    pub fn codeword(&self, index: u64) -> Result<DVector<f64>> {
        let size = self.codebook_size().ok_or_else(|| {
            Error::InvalidArgument("codebook too large to index with 64 bits".into())
        })?;
        if index >= size {
            return Err(Error::MessageOutOfRange { index, size });
        }
        let n = self.dim();
        let rep = match (&self.cosets, self.fine.kind()) {
            (Cosets::Trivial, _) => DVector::zeros(n),
            (Cosets::Cubic { q }, _) => {
                let mut rem = index;
                DVector::from_fn(n, |_, _| {
                    let d = rem % q;
                    rem /= q;
                    d as f64 * self.fine.scale
                })
            }
            (Cosets::Coded { q }, LatticeKind::ConstructionA(code)) => {
                let words = code.size().unwrap_or(u64::MAX);
                let word = code.codeword(index % words);
                let mut rem = index / words;
                let p = code.p();
                DVector::from_fn(n, |i, _| {
                    let shift = rem % q;
                    rem /= q;
                    (word[i] + p * shift) as f64 * self.fine.scale
                })
            }
            _ => unreachable!("coset layout validated at construction"),
        };
        self.coarse.mod_lattice(&rep)
    }

    /// Uniformly random message index.
    pub fn random_message<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        let size = self
            .codebook_size()
            .ok_or_else(|| Error::InvalidArgument("codebook too large to index with 64 bits".into()))?;
        Ok(rng.random_range(0..size))
    }

    /// Dither uniform over the coarse Voronoi cell.
    pub fn sample_dither<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DitherSample> {
        Ok(DitherSample(self.coarse.sample_voronoi(rng)?))
    }

    /// Whether `a − b` lies in the coarse lattice, i.e. both name the same message.
    pub fn same_coset(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<bool> {
        self.coarse.contains(&(a - b))
    }
}

fn nesting_rate_of(coarse: &Lattice, fine: &Lattice) -> f64 {
    (coarse.log2_volume() - fine.log2_volume()) / coarse.dim() as f64
}

fn rate_is_zero(coarse: &Lattice, fine: &Lattice) -> bool {
    nesting_rate_of(coarse, fine).abs() < 1e-12
}

/// `(1/n) log2(Vol(V_coarse)/Vol(V_fine))`.
pub fn nesting_rate(pair: &NestedPair) -> f64 {
    pair.nesting_rate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::stream_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn example_code() -> LinearCode {
        LinearCode::new(5, vec![vec![1, 0, 2, 3], vec![0, 1, 4, 1]]).unwrap()
    }

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    /// Independent decoder for `C + pZⁿ`: best of `p^k` coset leaders each
    /// rounded within its own coset.
    fn brute_nearest(code: &LinearCode, s: &DVector<f64>) -> DVector<f64> {
        let p = code.p() as f64;
        let mut best = (f64::INFINITY, DVector::zeros(s.len()));
        for m in 0..code.size().unwrap() {
            let c = code.codeword(m);
            let cand = DVector::from_fn(s.len(), |i, _| c[i] as f64 + p * ((s[i] - c[i] as f64) / p).round());
            let d = (s - &cand).norm_squared();
            if d < best.0 {
                best = (d, cand);
            }
        }
        best.1
    }

    #[test]
    fn integer_rounding_examples() {
        let z = Lattice::integer(2).unwrap();
        assert_eq!(z.nearest_point(&v(&[1.7, -0.2])).unwrap(), v(&[2.0, 0.0]));
        assert_eq!(z.nearest_point(&v(&[0.0, 0.0])).unwrap(), v(&[0.0, 0.0]));
        let m = z.mod_lattice(&v(&[1.7, -0.2])).unwrap();
        assert!((m - v(&[-0.3, -0.2])).amax() < 1e-12);
        assert_eq!(z.mod_lattice(&v(&[0.0, 0.0])).unwrap(), v(&[0.0, 0.0]));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let z = Lattice::integer(3).unwrap();
        assert!(matches!(
            z.nearest_point(&v(&[1.0])),
            Err(Error::DimensionMismatch { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn construction_a_recovers_noisy_codeword() {
        let code = example_code();
        let lat = Lattice::construction_a(code.clone(), 1.0).unwrap();
        // minimum distance of this lattice is at least 1 (it contains Z-shifts of p);
        // the brute-force oracle agrees and the perturbation stays within half of it.
        let word = code.codeword(2 + 3 * 5);
        let cw = DVector::from_fn(4, |i, _| word[i] as f64 + 5.0 * if i == 2 { -1.0 } else { 0.0 });
        let noisy = &cw + v(&[0.11, -0.2, 0.05, 0.14]);
        let q = lat.nearest_point(&noisy).unwrap();
        assert!((&q - &cw).amax() < 1e-9);
        assert!((&q - brute_nearest(&code, &noisy)).amax() < 1e-9);
    }

    #[test]
    fn construction_a_agrees_with_brute_force_on_random_points() {
        let code = example_code();
        let lat = Lattice::construction_a(code.clone(), 1.0).unwrap();
        let mut rng = stream_rng(1, 0);
        for _ in 0..500 {
            let s = DVector::from_fn(4, |_, _| rng.random_range(-12.0..12.0));
            let a = lat.nearest_point(&s).unwrap();
            let b = brute_nearest(&code, &s);
            assert!(((&s - &a).norm_squared() - (&s - &b).norm_squared()).abs() < 1e-9);
        }
    }

    #[test]
    fn generator_has_expected_volume() {
        let lat = Lattice::construction_a(example_code(), 1.0).unwrap();
        let det = lat.generator().determinant().abs();
        assert!((det - 25.0).abs() < 1e-9);
        assert!((lat.volume() - 25.0).abs() < 1e-9);
        assert!(lat.contains(&lat.generator().row(0).transpose()).unwrap());
    }

    #[test]
    fn non_systematic_code_generates_same_lattice() {
        // rows permuted and combined; same code, so same lattice
        let a = Lattice::construction_a(example_code(), 1.0).unwrap();
        let b = Lattice::construction_a(LinearCode::new(5, vec![vec![0, 1, 4, 1], vec![1, 1, 1, 4]]).unwrap(), 1.0).unwrap();
        let gb = b.generator();
        for i in 0..4 {
            assert!(a.contains(&gb.row(i).transpose()).unwrap());
        }
        assert!((a.volume() - b.volume()).abs() < 1e-9);
    }

    #[test]
    fn enumeration_limit_is_enforced() {
        let mut rng = stream_rng(2, 0);
        let code = LinearCode::random_systematic(3, 20, 2, &mut rng).unwrap();
        let lat = Lattice::construction_a(code, 1.0).unwrap();
        assert!(matches!(
            lat.nearest_point(&DVector::zeros(20)),
            Err(Error::DimensionTooLarge { dim: 20, limit: 16 })
        ));
    }

    #[test]
    fn second_moments() {
        let mut rng = stream_rng(3, 0);
        assert!((Lattice::integer(5).unwrap().second_moment(1, &mut rng).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        assert!((Lattice::scaled(3, 2.0).unwrap().second_moment(1, &mut rng).unwrap() - 4.0 / 12.0).abs() < 1e-15);
        assert!(Lattice::integer(1).unwrap().second_moment(0, &mut rng).is_err());
        for n in [1, 4, 9] {
            assert!((Lattice::integer(n).unwrap().normalized_second_moment().unwrap() - 1.0 / 12.0).abs() < 1e-15);
        }
        assert!((Lattice::scaled(2, 7.3).unwrap().normalized_second_moment().unwrap() - 1.0 / 12.0).abs() < 1e-12);
    }

    /// Rejection sampler: uniform points in a box, kept when the brute-force
    /// decoder maps them to the origin.
    #[test]
    fn construction_a_second_moment_matches_rejection_oracle() {
        let code = example_code();
        let lat = Lattice::construction_a(code.clone(), 1.0).unwrap();
        let mut rng = stream_rng(4, 0);
        let est = lat.second_moment(100_000, &mut rng).unwrap();

        let half = lat.covering_radius_bound();
        let mut rng = stream_rng(4, 1);
        let (mut kept, mut acc) = (0usize, 0.0);
        while kept < 100_000 {
            let s = DVector::from_fn(4, |_, _| rng.random_range(-half..half));
            if brute_nearest(&code, &s).amax() < 1e-9 {
                kept += 1;
                acc += s.norm_squared();
            }
        }
        let oracle = acc / (kept as f64 * 4.0);
        assert!((est / oracle - 1.0).abs() < 0.01, "est {est} oracle {oracle}");
        let g = lat.normalized_second_moment().unwrap();
        assert!(g > SPHERE_NSM);
    }

    #[test]
    fn nsm_decreases_along_z_d4_e8() {
        let d4 = LinearCode::new(2, vec![vec![1, 0, 0, 1], vec![0, 1, 0, 1], vec![0, 0, 1, 1]]).unwrap();
        let e8 = LinearCode::new(
            2,
            vec![
                vec![1, 0, 0, 0, 0, 1, 1, 1],
                vec![0, 1, 0, 0, 1, 0, 1, 1],
                vec![0, 0, 1, 0, 1, 1, 0, 1],
                vec![0, 0, 0, 1, 1, 1, 1, 0],
            ],
        )
        .unwrap();
        let g1 = Lattice::integer(1).unwrap().normalized_second_moment().unwrap();
        let g4 = Lattice::construction_a(d4, 1.0).unwrap().normalized_second_moment().unwrap();
        let g8 = Lattice::construction_a(e8, 1.0).unwrap().normalized_second_moment().unwrap();
        // D4 ≈ 0.0766, E8 ≈ 0.0717
        assert!(g1 > g4 && g4 > g8 && g8 > SPHERE_NSM, "{g1} {g4} {g8}");
        assert!((g4 - 0.076_603).abs() < 1e-3);
        assert!((g8 - 0.071_682).abs() < 1e-3);
    }

    #[test]
    fn nesting_rates() {
        let pair = NestedPair::new(Lattice::scaled(3, 2.0).unwrap(), Lattice::integer(3).unwrap()).unwrap();
        assert!((pair.nesting_rate() - 1.0).abs() < 1e-12);
        assert_eq!(pair.codebook_size(), Some(8));

        let pair = NestedPair::new(Lattice::scaled(4, 5.0).unwrap(), Lattice::construction_a(example_code(), 1.0).unwrap()).unwrap();
        assert!((nesting_rate(&pair) - 0.5 * 5f64.log2()).abs() < 1e-12);
        assert!((pair.nesting_rate() - 1.160_964).abs() < 1e-6);
        assert_eq!(pair.codebook_size(), Some(25));

        let z = Lattice::integer(2).unwrap();
        let pair = NestedPair::new(z.clone(), z).unwrap();
        assert_eq!(pair.nesting_rate(), 0.0);
        assert_eq!(pair.codebook_size(), Some(1));
    }

    #[test]
    fn rejects_non_nested_pairs() {
        let fine = Lattice::scaled(2, 2.0).unwrap();
        let coarse = Lattice::integer(2).unwrap();
        assert!(matches!(NestedPair::new(coarse, fine), Err(Error::NotNested(_))));
        // same volume, different lattices
        let a = Lattice::scaled(2, 3.0).unwrap();
        let b = Lattice::construction_a(LinearCode::new(3, vec![vec![1, 2]]).unwrap(), 3f64.sqrt()).unwrap();
        assert!(NestedPair::new(a, b).is_err());
    }

    #[test]
    fn codewords_are_distinct_fine_points_in_the_cell() {
        let pair = NestedPair::new(Lattice::scaled(4, 5.0).unwrap(), Lattice::construction_a(example_code(), 1.0).unwrap()).unwrap();
        let words: Vec<_> = (0..25).map(|m| pair.codeword(m).unwrap()).collect();
        for (i, w) in words.iter().enumerate() {
            assert!(pair.fine().contains(w).unwrap());
            assert!(pair.coarse().nearest_point(w).unwrap().amax() < 1e-12);
            for u in &words[..i] {
                assert!(!pair.same_coset(w, u).unwrap());
            }
        }
        assert!(matches!(pair.codeword(25), Err(Error::MessageOutOfRange { index: 25, size: 25 })));
    }

    #[test]
    fn pair_constructors_hit_target_power() {
        let pair = NestedPair::construction_a(example_code(), 3.0).unwrap();
        let mut rng = stream_rng(5, 0);
        assert!((pair.coarse().second_moment(1, &mut rng).unwrap() - 3.0).abs() < 1e-12);
        assert!((pair.nesting_rate() - 0.5 * 5f64.log2()).abs() < 1e-12);
        let cubic = NestedPair::cubic(3, 4, 0.5).unwrap();
        assert!((cubic.nesting_rate() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn config_block_round_trip() {
        let text = "kind = construction-a\nn = 4\np = 5 # prime\nrow = 1 0 2 3\nrow = 0 1 4 1\n";
        let lat = Lattice::from_config(text).unwrap();
        assert_eq!(lat.kind(), &LatticeKind::ConstructionA(example_code()));
        let lat = Lattice::from_config("kind = scaled\nn = 3\nscale = 0.5").unwrap();
        assert_eq!(lat.scale(), 0.5);
        assert!(Lattice::from_config("kind = hexagonal\nn = 2").is_err());
        assert!(Lattice::from_config("kind = construction-a\nn = 3\np = 5\nrow = 1 0 2 3").is_err());
        assert!(Lattice::from_config("n = x").is_err());
    }

    #[test]
    fn dither_is_uniform_on_unit_interval() {
        let pair = NestedPair::trivial(1, 1.0 / 12.0).unwrap();
        let mut rng = stream_rng(6, 0);
        let n = 100_000;
        let mut bins = [0u64; 20];
        let mut sum = 0.0;
        for _ in 0..n {
            let d = pair.sample_dither(&mut rng).unwrap().0[0];
            assert!((-0.5..0.5).contains(&d));
            bins[((d + 0.5) * 20.0) as usize] += 1;
            sum += d;
        }
        let expected = n as f64 / 20.0;
        let chi2: f64 = bins.iter().map(|&b| (b as f64 - expected).powi(2) / expected).sum();
        // chi-square 19 dof, upper 1% point
        assert!(chi2 < 36.19, "chi2 {chi2}");
        let mean = sum / n as f64;
        assert!(mean.abs() < 3.0 * (1.0 / 12.0 / n as f64).sqrt());
    }

    #[test]
    fn dither_autocorrelation_is_white() {
        let pair = NestedPair::new(Lattice::scaled(4, 5.0).unwrap(), Lattice::construction_a(example_code(), 1.0).unwrap())
            .unwrap();
        // the dither lives in the coarse cell 5·Z⁴, white with σ² = 25/12
        let mut rng = stream_rng(7, 0);
        let n = 100_000usize;
        let mut corr = DMatrix::<f64>::zeros(4, 4);
        let mut corr_sq = DMatrix::<f64>::zeros(4, 4);
        for _ in 0..n {
            let d = pair.sample_dither(&mut rng).unwrap().0;
            let o = &d * d.transpose();
            corr_sq += o.map(|x| x * x);
            corr += o;
        }
        for i in 0..4 {
            for j in 0..4 {
                let mean = corr[(i, j)] / n as f64;
                let var = corr_sq[(i, j)] / n as f64 - mean * mean;
                let se = (var / n as f64).sqrt();
                let target = if i == j { 25.0 / 12.0 } else { 0.0 };
                assert!((mean - target).abs() < 3.0 * se.max(1e-12), "({i},{j}) {mean}");
            }
        }
    }

    proptest! {
        #[test]
        fn quantizer_is_idempotent_and_mod_is_distributive(
            s in proptest::collection::vec(-20.0f64..20.0, 4),
            t in proptest::collection::vec(-20.0f64..20.0, 4),
        ) {
            let s = DVector::from_vec(s);
            let t = DVector::from_vec(t);
            for lat in [Lattice::integer(4).unwrap(), Lattice::construction_a(example_code(), 0.7).unwrap()] {
                let q = lat.nearest_point(&s).unwrap();
                prop_assert!((lat.nearest_point(&q).unwrap() - &q).amax() < 1e-9);
                let lhs = lat.mod_lattice(&(&s + &t)).unwrap();
                let rhs = lat.mod_lattice(&(&s + lat.mod_lattice(&t).unwrap())).unwrap();
                prop_assert!((&lhs - &rhs).amax() < 1e-9);
            }
        }

        #[test]
        fn lattice_is_closed_under_addition_and_negation(
            a in proptest::collection::vec(-6i64..6, 4),
            b in proptest::collection::vec(-6i64..6, 4),
        ) {
            let lat = Lattice::construction_a(example_code(), 1.3).unwrap();
            let g = lat.generator().transpose();
            let pa = &g * DVector::from_iterator(4, a.iter().map(|&x| x as f64));
            let pb = &g * DVector::from_iterator(4, b.iter().map(|&x| x as f64));
            let sum = &pa + &pb;
            prop_assert!((lat.nearest_point(&sum).unwrap() - &sum).amax() < 1e-9);
            let neg = -&pa;
            prop_assert!((lat.nearest_point(&neg).unwrap() - &neg).amax() < 1e-9);
            prop_assert!(lat.nearest_point(&DVector::zeros(4)).unwrap().amax() < 1e-12);
        }
    }

    #[test]
    fn mod_identity_on_one_dimensional_pairs() {
        let z = Lattice::integer(1).unwrap();
        let mut rng = stream_rng(8, 0);
        for _ in 0..1000 {
            let s = v(&[rng.random_range(-50.0..50.0)]);
            let t = v(&[rng.random_range(-50.0..50.0)]);
            let lhs = z.mod_lattice(&(&s + &t)).unwrap();
            let rhs = z.mod_lattice(&(&s + z.mod_lattice(&t).unwrap())).unwrap();
            assert!((lhs - rhs).amax() < 1e-12);
        }
    }
}
