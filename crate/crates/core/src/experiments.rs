//! Experiment driver behind the `ergolat` binary: each command sweeps a grid,
//! writes one CSV, and reports invariant failures.
//!
//! Every CSV starts with a `#` comment line carrying the seed and the units,
//! followed by the header row. Fields use Rust's shortest round-trip float
//! formatting, so a re-run with the same seed is byte-identical.

use crate::analysis::{
    bounds_hold, crypto_lemma_check, gap_bounds_cor1, mac_gap_two_user, mac_sum_gap, mimo_gap, noise_concentration_report,
    psd_dominance_check, siso_curve, two_user_gammas_exact, wishart_gap_bound, wishart_inverse_mean, Bound, GapReport,
    MimoMoments,
};
use crate::channel::{FadingModel, LinkConfig, Mode};
use crate::error::{Error, Result};
use crate::lattice::{LinearCode, NestedPair};
use crate::mac::{
    mac_decision_radii, run_mac_batch, sum_capacity_mc, two_user_region, DecodingOrder, MacConfig, RateRegion,
};
use crate::mc::{derive_seed, stream_rng};
use crate::quadrature::expect_exponential;
use crate::special::{e1_upper_bound, exp_integral_e1};
use crate::transceiver::{run_ptp_batch, sigma_bar, IDENTITY_TOL};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

const UNITS: &str = "units: rho_db in dB, rho linear SNR, rates capacities gaps and bounds in bits per channel use";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    RateMimo,
    GapBounds,
    SisoCurves,
    MacRegion,
    MacGap,
    SimulatePtp,
    SimulateMac,
    VerifyLemmas,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::RateMimo,
        Command::GapBounds,
        Command::SisoCurves,
        Command::MacRegion,
        Command::MacGap,
        Command::SimulatePtp,
        Command::SimulateMac,
        Command::VerifyLemmas,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::RateMimo => "rate-mimo",
            Command::GapBounds => "gap-bounds",
            Command::SisoCurves => "siso-curves",
            Command::MacRegion => "mac-region",
            Command::MacGap => "mac-gap",
            Command::SimulatePtp => "simulate-ptp",
            Command::SimulateMac => "simulate-mac",
            Command::VerifyLemmas => "verify-lemmas",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown command {s:?}")))
    }
}

/// One fully specified run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub command: Command,
    pub model: FadingModel,
    /// Model as given on the command line, echoed into the CSV.
    pub model_key: String,
    pub n_t: usize,
    pub n_r: Vec<usize>,
    pub users: usize,
    /// Strictly increasing, nonempty.
    pub snr_db: Vec<f64>,
    pub samples: usize,
    /// Blocks per decoding experiment.
    pub trials: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub block_len: usize,
    /// Construction-A field size and code dimension.
    pub p: u64,
    pub k: usize,
    pub out: PathBuf,
}

impl ExperimentSpec {
    /// Defaults for `command`: Rayleigh, 1×1, two users, 0 dB.
    pub fn new(command: Command, seed: u64, out: impl Into<PathBuf>) -> Self {
        Self {
            command,
            model: FadingModel::RayleighIid,
            model_key: "rayleigh".into(),
            n_t: 1,
            n_r: vec![1],
            users: 2,
            snr_db: vec![0.0],
            samples: 100_000,
            trials: 2_000,
            seed,
            epsilon: crate::transceiver::DEFAULT_EPSILON,
            block_len: 4,
            p: 5,
            k: 1,
            out: out.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() || self.snr_db.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("SNR grid must be nonempty and strictly increasing".into()));
        }
        if self.n_r.is_empty() || self.n_r.contains(&0) || self.n_t == 0 || self.users == 0 {
            return Err(Error::InvalidArgument("antenna and user counts must be positive".into()));
        }
        if self.samples < 2 || self.trials == 0 || self.block_len == 0 {
            return Err(Error::InvalidArgument("samples, trials and block length must be positive".into()));
        }
        Ok(())
    }

    pub fn csv_path(&self) -> PathBuf {
        self.out.join(format!("{}.csv", self.command))
    }

    fn rhos(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.snr_db.iter().map(|&db| (db, db_to_linear(db)))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `start..end:step` (inclusive end) or a single value, in dB.
pub fn parse_snr_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parse(format!("bad SNR grid {s:?}, expected start..end:step"));
    let Some((range, step)) = s.split_once(':') else {
        return Ok(vec![s.trim().parse().map_err(|_| bad())?]);
    };
    let (a, b) = range.split_once("..").ok_or_else(bad)?;
    let (a, b, step): (f64, f64, f64) = (
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
        step.trim().parse().map_err(|_| bad())?,
    );
    if !(step > 0.0) || !(b >= a) {
        return Err(bad());
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    // computed from the index so no rounding accumulates
    Ok((0..count).map(|i| a + i as f64 * step).collect())
}

/// `lo..hi` (inclusive) or a single count.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("bad range {s:?}, expected lo..hi"));
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if b < a {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![s.trim().parse().map_err(|_| bad())?]),
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub csv: PathBuf,
    pub rows: usize,
    /// One line per asserted invariant that failed.
    pub failures: Vec<String>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    failures: Vec<String>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn write(self, spec: &ExperimentSpec) -> Result<RunSummary> {
        std::fs::create_dir_all(&spec.out)?;
        let path = spec.csv_path();
        let mut file = std::fs::File::create(&path)?;
        use std::io::Write;
        writeln!(file, "# command={}; seed={}; model={}; {UNITS}", spec.command, spec.seed, spec.model_key)?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
        w.write_record(&self.header).map_err(std::io::Error::from)?;
        for r in &self.rows {
            w.write_record(r).map_err(std::io::Error::from)?;
        }
        w.flush()?;
        Ok(RunSummary {
            csv: path,
            rows: self.rows.len(),
            failures: self.failures,
        })
    }
}

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        // Debug switches to exponent form for tiny and huge values
        format!("{x:?}")
    }
}

fn int(x: impl fmt::Display) -> String {
    x.to_string()
}

/// Runs `spec` and writes its CSV under `spec.out`.
pub fn run(spec: &ExperimentSpec) -> Result<RunSummary> {
    spec.validate()?;
    let table = match spec.command {
        Command::RateMimo => rate_mimo(spec)?,
        Command::GapBounds => gap_bounds(spec)?,
        Command::SisoCurves => siso_curves(spec)?,
        Command::MacRegion => mac_region(spec)?,
        Command::MacGap => mac_gap(spec)?,
        Command::SimulatePtp => simulate_ptp(spec)?,
        Command::SimulateMac => simulate_mac(spec)?,
        Command::VerifyLemmas => verify_lemmas(spec)?,
    };
    table.write(spec)
}

const CURVE_HEADER: [&str; 15] = [
    "model", "n_t", "n_r", "rho_db", "rho", "rate", "rate_ci", "capacity", "capacity_ci", "gap", "gap_ci", "bound_name",
    "bound_value", "bounds_hold", "seed",
];

fn curve_row(spec: &ExperimentSpec, n_t: usize, n_r: usize, db: f64, rho: f64, r: &GapReport) -> Vec<String> {
    let tight = r.tightest();
    vec![
        spec.model_key.clone(),
        int(n_t),
        int(n_r),
        num(db),
        num(rho),
        num(r.rate.mean),
        num(r.rate.ci95_halfwidth),
        num(r.capacity.mean),
        num(r.capacity.ci95_halfwidth),
        num(r.gap.mean),
        num(r.gap.ci95_halfwidth),
        tight.map_or(String::new(), |b| b.name.to_string()),
        num(tight.map_or(f64::NAN, |b| b.value)),
        int(bounds_hold(&r.bounds, &r.gap)),
        int(spec.seed),
    ]
}

fn check_bounds(t: &mut Table, r: &GapReport, at: impl Fn() -> String) {
    for b in r.violations() {
        let gap = r.gap.mean;
        t.failures.push(format!("{}: bound {} = {} below gap {gap}", at(), b.name, b.value));
    }
}

fn mimo_moments(spec: &ExperimentSpec, n_r: usize) -> Result<MimoMoments> {
    match spec.model {
        FadingModel::RayleighIid => Ok(MimoMoments::rayleigh(spec.n_t, n_r)),
        _ => MimoMoments::estimate(&spec.model, spec.n_t, n_r, false, spec.samples, derive_seed(spec.seed, 0x40)),
    }
}

fn rate_mimo(spec: &ExperimentSpec) -> Result<Table> {
    let mut t = Table::new(&CURVE_HEADER);
    for (i, &n_r) in spec.n_r.iter().enumerate() {
        let moments = mimo_moments(spec, n_r)?;
        for (j, (db, rho)) in spec.rhos().enumerate() {
            let seed = derive_seed(spec.seed, (i * 1000 + j) as u64);
            let mut r = mimo_gap(&spec.model, spec.n_t, n_r, rho, spec.samples, seed)?;
            r.bounds = gap_bounds_cor1(&moments, spec.n_t, n_r, rho);
            check_bounds(&mut t, &r, || format!("n_r={n_r} rho_db={db}"));
            t.push(curve_row(spec, spec.n_t, n_r, db, rho, &r));
        }
    }
    Ok(t)
}

/// The i.i.d. Rayleigh many-antenna bound over `n_r`, alongside the measured
/// gap at each SNR.
fn gap_bounds(spec: &ExperimentSpec) -> Result<Table> {
    let mut t = Table::new(&["n_t", "n_r", "rho_db", "rho", "bound", "gap", "gap_ci", "seed"]);
    let mut prev: Option<f64> = None;
    for (i, &n_r) in spec.n_r.iter().enumerate() {
        let bound = match wishart_gap_bound(spec.n_t, n_r) {
            Ok(b) => b,
            Err(Error::Inapplicable(_)) => f64::NAN,
            Err(e) => return Err(e),
        };
        if let (Some(p), false) = (prev, bound.is_nan()) {
            t.check(bound < p, || format!("bound not decreasing at n_r={n_r}"));
        }
        if !bound.is_nan() {
            prev = Some(bound);
        }
        for (j, (db, rho)) in spec.rhos().enumerate() {
            let seed = derive_seed(spec.seed, (i * 1000 + j) as u64);
            let r = mimo_gap(&FadingModel::RayleighIid, spec.n_t, n_r, rho, spec.samples, seed)?;
            if !bound.is_nan() && rho >= 1.0 {
                let b = [Bound::new("mimo_rayleigh", bound, true)];
                t.check(bounds_hold(&b, &r.gap), || format!("n_r={n_r} rho_db={db}: gap {} above bound {bound}", r.gap.mean));
            }
            t.push(vec![
                int(spec.n_t),
                int(n_r),
                num(db),
                num(rho),
                num(bound),
                num(r.gap.mean),
                num(r.gap.ci95_halfwidth),
                int(spec.seed),
            ]);
        }
    }
    Ok(t)
}

fn siso_curves(spec: &ExperimentSpec) -> Result<Table> {
    let mut t = Table::new(&CURVE_HEADER);
    let rhos: Vec<f64> = spec.rhos().map(|r| r.1).collect();
    let reports = siso_curve(&spec.model, &rhos, spec.samples, spec.seed)?;
    for ((db, rho), r) in spec.rhos().zip(&reports) {
        check_bounds(&mut t, r, || format!("rho_db={db}"));
        t.push(curve_row(spec, 1, 1, db, rho, r));
    }
    Ok(t)
}

fn mac_region(spec: &ExperimentSpec) -> Result<Table> {
    let (db, rho) = spec.rhos().next().expect("grid validated nonempty");
    let n_r = spec.n_r[0];
    let config = MacConfig::uniform(spec.users, spec.n_t, n_r, rho)?;
    let l = config.virtual_users();
    let two_user = spec.users == 2 && spec.n_t == 1 && n_r == 1;
    let mut header = vec!["order_id".to_string(), "order".to_string()];
    header.extend((1..=spec.users).map(|k| format!("R_{k}")));
    header.extend(["sum_rate", "ci_halfwidth", "sum_capacity", "rho_db", "rho", "seed"].map(String::from));
    if two_user {
        header.extend(["gamma1", "gamma2", "gamma3", "gamma4"].map(String::from));
    }
    let mut t = Table {
        header,
        rows: Vec::new(),
        failures: Vec::new(),
    };
    let (region, gammas) = if two_user {
        let r = two_user_region(&config, &spec.model, spec.samples, spec.seed)?;
        let g = r.gammas.map(|g| g.mean);
        (r.region, Some(g))
    } else {
        (RateRegion::compute(&config, &spec.model, spec.samples, spec.seed)?, None)
    };
    let cap = sum_capacity_mc(&config, &spec.model, spec.samples, derive_seed(spec.seed, 2))?;
    for (id, c) in region.corners.iter().enumerate() {
        let order: Vec<String> = c.order.as_slice().iter().map(|v| (v + 1).to_string()).collect();
        t.check(c.rates.iter().all(|r| r.mean >= 0.0 && r.mean.is_finite()), || format!("order {id}: invalid rate"));
        t.check(c.sum_rate.mean <= cap.mean + c.sum_rate.ci95_halfwidth + cap.ci95_halfwidth, || {
            format!("order {id}: sum rate {} above sum capacity {}", c.sum_rate.mean, cap.mean)
        });
        if region.hull.is_some() {
            t.check(region.hull_contains([c.user_rates[0], c.user_rates[1]], 1e-9), || format!("order {id} outside hull"));
        }
        let mut row = vec![int(id), order.join("-")];
        row.extend(c.user_rates.iter().map(|&r| num(r)));
        row.extend([
            num(c.sum_rate.mean),
            num(c.sum_rate.ci95_halfwidth),
            num(cap.mean),
            num(db),
            num(rho),
            int(spec.seed),
        ]);
        if let Some(g) = gammas {
            row.extend(g.map(num));
        }
        t.push(row);
    }
    debug_assert_eq!(region.corners.len(), (1..=l).product::<usize>());
    Ok(t)
}

fn mac_gap(spec: &ExperimentSpec) -> Result<Table> {
    let mut t = Table::new(&[
        "model", "users", "n_t", "n_r", "rho_db", "rho", "rate", "capacity", "gap", "gap_ci", "bound_name", "bound_value",
        "bounds_hold", "seed",
    ]);
    for (i, &n_r) in spec.n_r.iter().enumerate() {
        for (j, (db, rho)) in spec.rhos().enumerate() {
            let seed = derive_seed(spec.seed, (i * 1000 + j) as u64);
            let r = if spec.users == 2 && spec.n_t == 1 && n_r == 1 {
                mac_gap_two_user(&spec.model, rho, spec.samples, seed)?
            } else {
                if !matches!(spec.model, FadingModel::RayleighIid) {
                    return Err(Error::Inapplicable("the many-antenna sum gap assumes Rayleigh fading".into()));
                }
                mac_sum_gap(spec.users, spec.n_t, n_r, rho, spec.samples, seed)?
            };
            check_bounds(&mut t, &r, || format!("n_r={n_r} rho_db={db}"));
            let tight = r.tightest();
            t.push(vec![
                spec.model_key.clone(),
                int(spec.users),
                int(spec.n_t),
                int(n_r),
                num(db),
                num(rho),
                num(r.rate.mean),
                num(r.capacity.mean),
                num(r.gap.mean),
                num(r.gap.ci95_halfwidth),
                tight.map_or(String::new(), |b| b.name.to_string()),
                num(tight.map_or(f64::NAN, |b| b.value)),
                int(bounds_hold(&r.bounds, &r.gap)),
                int(spec.seed),
            ]);
        }
    }
    Ok(t)
}

/// Construction-A pair of dimension `n` with coarse second moment `power`,
/// its code drawn from a stream of `seed`.
pub fn construction_a_pair(p: u64, k: usize, n: usize, power: f64, seed: u64) -> Result<NestedPair> {
    let mut rng = stream_rng(seed, 0);
    NestedPair::construction_a(LinearCode::random_systematic(p, n, k, &mut rng)?, power)
}

fn simulate_ptp(spec: &ExperimentSpec) -> Result<Table> {
    let mut t = Table::new(&[
        "n", "rho_db", "rho", "rate", "trials", "err_ambiguity", "err_euclidean", "ambiguous_count", "outside_count",
        "mean_z_norm2", "sigma_bar_trace", "seed",
    ]);
    for (j, (db, rho)) in spec.rhos().enumerate() {
        let link = LinkConfig::new(spec.n_t, spec.n_r[0], rho, spec.block_len, Mode::Complex)?;
        let pair = construction_a_pair(spec.p, spec.k, link.lattice_dim(), link.power_per_dim(), derive_seed(spec.seed, 0xC0DE))?;
        let sigma = sigma_bar(&spec.model, &link, spec.samples, derive_seed(spec.seed, 0x5161))?;
        let s = run_ptp_batch(&link, &spec.model, &pair, &sigma, spec.epsilon, spec.trials, derive_seed(spec.seed, j as u64))?;
        t.check(s.err_euclidean <= s.err_ambiguity && s.dominance_violations == 0, || {
            format!("rho_db={db}: Euclidean decoder lost to the sphere decoder")
        });
        t.check(s.max_identity_residual < IDENTITY_TOL, || format!("rho_db={db}: noise identity off by {}", s.max_identity_residual));
        t.push(vec![
            int(s.n),
            num(db),
            num(rho),
            num(s.rate),
            int(s.trials),
            int(s.err_ambiguity),
            int(s.err_euclidean),
            int(s.ambiguous_count),
            int(s.outside_count),
            num(s.mean_z_norm2),
            num(sigma.trace()),
            int(spec.seed),
        ]);
    }
    Ok(t)
}

fn simulate_mac(spec: &ExperimentSpec) -> Result<Table> {
    let mut t = Table::new(&[
        "rho_db", "rho", "stage", "user", "rate", "trials", "err_ambiguity", "err_euclidean", "cond_err_euclidean",
        "cond_trials", "seed",
    ]);
    let n = 2 * spec.block_len;
    for (j, (db, rho)) in spec.rhos().enumerate() {
        let config = MacConfig::uniform(spec.users, spec.n_t, spec.n_r[0], rho)?;
        let l = config.virtual_users();
        let pairs = (0..l)
            .map(|v| construction_a_pair(spec.p, spec.k, n, rho / 2.0, derive_seed(spec.seed, 0xC0DE + v as u64)))
            .collect::<Result<Vec<_>>>()?;
        let order = DecodingOrder::identity(l);
        let radii = mac_decision_radii(&config, &spec.model, &order, spec.block_len, spec.epsilon, spec.samples, derive_seed(spec.seed, 0x5161))?;
        let s = run_mac_batch(&config, &spec.model, &pairs, &order, &radii, spec.block_len, spec.trials, derive_seed(spec.seed, j as u64))?;
        for stage in 0..l {
            let v = order.as_slice()[stage];
            t.push(vec![
                num(db),
                num(rho),
                int(stage + 1),
                int(config.owner(v) + 1),
                num(pairs[v].nesting_rate()),
                int(s.trials),
                int(s.err_ambiguity[stage]),
                int(s.err_euclidean[stage]),
                int(s.cond_err_euclidean[stage]),
                int(s.cond_trials[stage]),
                int(spec.seed),
            ]);
        }
    }
    Ok(t)
}

/// `E1(z) = e^{−z}·E[1/(z + S)]`, `S ~ Exp(1)`: the quadrature reference.
pub fn e1_quadrature(z: f64) -> f64 {
    (-z).exp() * expect_exponential(|s| 1.0 / (z + s))
}

/// 100 log-spaced points on `[0.01, 10]`.
pub fn e1_grid() -> Vec<f64> {
    (0..100).map(|i| 0.01 * 1000f64.powf(i as f64 / 99.0)).collect()
}

fn verify_lemmas(spec: &ExperimentSpec) -> Result<Table> {
    let mut t = Table::new(&["lemma_id", "config", "pass", "statistic", "seed"]);
    let row = |t: &mut Table, id: &str, config: String, pass: bool, stat: f64| {
        t.check(pass, || format!("{id} failed at {config} (statistic {stat})"));
        t.push(vec![id.to_string(), config, int(pass), num(stat), int(spec.seed)]);
    };
    let s = spec.samples;
    for (i, (m, n)) in [(2, 1), (3, 1), (4, 2)].into_iter().enumerate() {
        let e = wishart_inverse_mean(m, n, s, derive_seed(spec.seed, 0x500 + i as u64))?;
        let dev = e.max_relative_deviation(1.0 / (m - n) as f64);
        row(&mut t, "wishart_inverse", format!("M={m} N={n}"), dev < 0.02, dev);
    }
    let mut bound_ok = true;
    let mut worst_rel: f64 = 0.0;
    for z in e1_grid() {
        let e1 = exp_integral_e1(z)?;
        bound_ok &= e1 < e1_upper_bound(z);
        worst_rel = worst_rel.max((e1 / e1_quadrature(z) - 1.0).abs());
    }
    row(&mut t, "e1_bound", "100 points on [0.01, 10]".into(), bound_ok, f64::NAN);
    row(&mut t, "e1_accuracy", "relative error vs quadrature".into(), worst_rel < 1e-10, worst_rel);
    for (i, (r, m, q)) in [(3, 2, 1), (4, 3, 2)].into_iter().enumerate() {
        let rep = psd_dominance_check(r, m, q, 1.0, 1000, derive_seed(spec.seed, 0x700 + i as u64))?;
        row(&mut t, "psd_dominance", format!("r={r} m={m} q={q}"), rep.holds(), rep.min_eigenvalue);
    }
    let link = LinkConfig::siso(1.0, 1, Mode::Complex)?;
    let rows = noise_concentration_report(&FadingModel::RayleighIid, &link, 0.1, &[64, 256, 1024], spec.trials, derive_seed(spec.seed, 0x300))?;
    let monotone = rows.windows(2).all(|w| w[0].not_exceeded_by(&w[1]));
    for r in &rows {
        row(&mut t, "noise_concentration", format!("n={}", r.n), true, r.fraction);
    }
    let last = rows.last().expect("three dimensions").fraction;
    row(&mut t, "noise_concentration", "non-increasing and below 5% at n=1024".into(), monotone && last < 0.05, last);
    let pair = construction_a_pair(5, 1, 2, 1.0, derive_seed(spec.seed, 0x100))?;
    let c = crypto_lemma_check(&pair, s, derive_seed(spec.seed, 0x101))?;
    row(&mut t, "crypto_uniformity", "p=5 k=1 n=2".into(), c.uniformity_p > 0.01, c.uniformity_p);
    row(&mut t, "crypto_independence", "p=5 k=1 n=2".into(), c.independence_p > 0.01, c.independence_p);
    let link = LinkConfig::siso(1.0, 4, Mode::Complex)?;
    let pair = construction_a_pair(5, 1, 8, link.power_per_dim(), derive_seed(spec.seed, 0x400))?;
    let sigma = sigma_bar(&FadingModel::RayleighIid, &link, 1, 0)?;
    let p = run_ptp_batch(&link, &FadingModel::RayleighIid, &pair, &sigma, 0.1, spec.trials, derive_seed(spec.seed, 0x401))?;
    row(
        &mut t,
        "decoder_dominance",
        format!("rho=1 n=8 trials={}", spec.trials),
        p.err_euclidean <= p.err_ambiguity && p.dominance_violations == 0,
        p.err_euclidean as f64 - p.err_ambiguity as f64,
    );
    let g = two_user_gammas_exact(1.0, 1.0)?;
    row(&mut t, "mac_corner_symmetry", "rho=1".into(), (g[2] - g[3]).abs() < 1e-9, g[2] - g[3]);
    Ok(t)
}

/// Reads back a CSV written by [`run`], skipping the comment line.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).map_err(std::io::Error::from)?;
    let header = r.headers().map_err(std::io::Error::from)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(std::io::Error::from)?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}
