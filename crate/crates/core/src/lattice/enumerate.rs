//! Fincke–Pohst sphere enumeration with Schnorr–Euchner ordering.
//!
//! With generator columns `G = QR`, `‖s − Gu‖² = ‖Qᵀs − Ru‖²`, and the
//! integer coordinates are fixed from the last one down, pruning any partial
//! assignment whose accumulated distance already exceeds the search bound.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::cmp::Ordering;

/// Hard cap on visited tree nodes per query.
const NODE_BUDGET: u64 = 200_000_000;
/// Times the covering-radius bound is doubled before giving up.
const RADIUS_DOUBLINGS: usize = 3;

#[derive(Debug, Clone)]
enum Geometry {
    /// `scale·Zⁿ`: `Q = I`, `R = scale·I`.
    Diagonal { n: usize, scale: f64 },
    Triangular {
        r: DMatrix<f64>,
        qt: DMatrix<f64>,
        gen: DMatrix<f64>,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct SphereEnumerator {
    geo: Geometry,
}

struct Search<'a> {
    geo: &'a Geometry,
    y: Vec<f64>,
    u: Vec<i64>,
    bound: f64,
    slack: f64,
    nodes: u64,
    stop: bool,
}

impl SphereEnumerator {
    pub fn diagonal(n: usize, scale: f64) -> Self {
        Self {
            geo: Geometry::Diagonal { n, scale },
        }
    }

    /// From a square basis whose rows are the lattice basis vectors.
    pub fn from_rows(basis: &DMatrix<f64>) -> Self {
        let gen = basis.transpose();
        let qr = gen.clone().qr();
        Self {
            geo: Geometry::Triangular {
                r: qr.r(),
                qt: qr.q().transpose(),
                gen,
            },
        }
    }

    fn dim(&self) -> usize {
        match &self.geo {
            Geometry::Diagonal { n, .. } => *n,
            Geometry::Triangular { r, .. } => r.nrows(),
        }
    }

    /// `½·√n·max‖b*_i‖`, an upper bound on the covering radius.
    pub fn covering_radius_bound(&self) -> f64 {
        let n = self.dim() as f64;
        let longest = match &self.geo {
            Geometry::Diagonal { scale, .. } => *scale,
            Geometry::Triangular { r, .. } => (0..r.nrows()).map(|i| r[(i, i)].abs()).fold(0.0, f64::max),
        };
        0.5 * n.sqrt() * longest
    }

    fn project(&self, s: &DVector<f64>) -> Vec<f64> {
        match &self.geo {
            Geometry::Diagonal { .. } => s.as_slice().to_vec(),
            Geometry::Triangular { qt, .. } => (qt * s).as_slice().to_vec(),
        }
    }

    pub fn point(&self, u: &[i64]) -> DVector<f64> {
        match &self.geo {
            Geometry::Diagonal { scale, .. } => DVector::from_iterator(u.len(), u.iter().map(|&c| c as f64 * scale)),
            Geometry::Triangular { gen, .. } => {
                let uf = DVector::from_iterator(u.len(), u.iter().map(|&c| c as f64));
                gen * uf
            }
        }
    }

    /// Closest lattice point to `s`; exact ties go to the lexicographically
    /// smallest coordinate vector.
    pub fn closest(&self, s: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        let mut radius = self.covering_radius_bound() * (1.0 + 1e-9) + 1e-12;
        for _ in 0..=RADIUS_DOUBLINGS {
            let mut best: Option<(DVector<f64>, f64)> = None;
            let mut search = Search::new(&self.geo, self.project(s), radius * radius);
            search.run(&mut |u, d, bound| {
                let candidate = self.point(u);
                let take = match &best {
                    None => true,
                    Some((bp, bd)) => {
                        let tie = 1e-9 * (1.0 + bd);
                        d < bd - tie || ((d - bd).abs() <= tie && lex_cmp(&candidate, bp) == Ordering::Less)
                    }
                };
                if take {
                    best = Some((candidate, d));
                    *bound = d;
                }
                true
            })?;
            if let Some(found) = best {
                return Ok(found);
            }
            radius *= 2.0;
        }
        Err(Error::EnumerationExhausted { radius })
    }

    /// Up to `limit` lattice points within distance `radius` of `s`.
    pub fn within(&self, s: &DVector<f64>, radius: f64, limit: usize) -> Result<Vec<DVector<f64>>> {
        let mut found = Vec::new();
        if limit == 0 {
            return Ok(found);
        }
        let mut search = Search::new(&self.geo, self.project(s), radius * radius);
        search.slack = 1e-12 * (1.0 + radius * radius);
        search.run(&mut |u, _, _| {
            found.push(self.point(u));
            found.len() < limit
        })?;
        Ok(found)
    }
}

fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        if (x - y).abs() > 1e-9 {
            return x.total_cmp(y);
        }
    }
    Ordering::Equal
}

impl<'a> Search<'a> {
    fn new(geo: &'a Geometry, y: Vec<f64>, bound: f64) -> Self {
        let n = y.len();
        Self {
            geo,
            y,
            u: vec![0; n],
            bound,
            slack: 1e-9 * (1.0 + bound),
            nodes: 0,
            stop: false,
        }
    }

    fn run(&mut self, leaf: &mut dyn FnMut(&[i64], f64, &mut f64) -> bool) -> Result<()> {
        let n = self.y.len();
        if n == 0 {
            let mut b = self.bound;
            leaf(&[], 0.0, &mut b);
            return Ok(());
        }
        self.descend(n - 1, 0.0, leaf);
        if self.nodes >= NODE_BUDGET {
            return Err(Error::Estimator("sphere enumeration node budget exhausted".into()));
        }
        Ok(())
    }

    fn center(&self, i: usize) -> (f64, f64) {
        match self.geo {
            Geometry::Diagonal { scale, .. } => (self.y[i] / scale, scale * scale),
            Geometry::Triangular { r, .. } => {
                let mut acc = self.y[i];
                for j in i + 1..self.u.len() {
                    acc -= r[(i, j)] * self.u[j] as f64;
                }
                let rii = r[(i, i)];
                (acc / rii, rii * rii)
            }
        }
    }

    fn descend(&mut self, i: usize, partial: f64, leaf: &mut dyn FnMut(&[i64], f64, &mut f64) -> bool) {
        let (c, weight) = self.center(i);
        let mut up = c.round() as i64;
        let mut down = up - 1;
        loop {
            if self.stop {
                return;
            }
            self.nodes += 1;
            if self.nodes >= NODE_BUDGET {
                self.stop = true;
                return;
            }
            let limit = self.bound + self.slack;
            let du = up as f64 - c;
            let dd = down as f64 - c;
            let cost_up = partial + weight * du * du;
            let cost_down = partial + weight * dd * dd;
            let up_ok = cost_up <= limit;
            let down_ok = cost_down <= limit;
            if !up_ok && !down_ok {
                return;
            }
            let (value, cost) = if up_ok && (!down_ok || cost_up <= cost_down) {
                up += 1;
                (up - 1, cost_up)
            } else {
                down -= 1;
                (down + 1, cost_down)
            };
            self.u[i] = value;
            if i == 0 {
                let mut bound = self.bound;
                if !leaf(&self.u, cost, &mut bound) {
                    self.stop = true;
                    return;
                }
                self.bound = bound;
                self.slack = self.slack.min(1e-9 * (1.0 + bound));
            } else {
                self.descend(i - 1, cost, leaf);
            }
        }
    }
}
