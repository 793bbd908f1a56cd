//! Linear codes over the integers mod a prime `p`.

use crate::error::{Error, Result};
use rand::Rng;

/// A `k × n` generator matrix over `Z/pZ` with full row rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCode {
    p: u64,
    rows: Vec<Vec<u64>>,
}

pub(crate) fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

impl LinearCode {
    pub fn new(p: u64, rows: Vec<Vec<i64>>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidLattice(format!("p = {p} is not prime")));
        }
        if p > 1 << 20 {
            return Err(Error::InvalidLattice(format!("p = {p} is too large")));
        }
        let n = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || n == 0 {
            return Err(Error::InvalidLattice("code needs at least one non-empty row".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidLattice("code rows have different lengths".into()));
        }
        let pi = p as i64;
        let rows: Vec<Vec<u64>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| v.rem_euclid(pi) as u64).collect())
            .collect();
        let code = Self { p, rows };
        let (_, pivots) = code.row_echelon();
        if pivots.len() != code.k() {
            return Err(Error::InvalidLattice(format!(
                "generator has rank {} over Z/{p}, expected {}",
                pivots.len(),
                code.k()
            )));
        }
        Ok(code)
    }

    /// Random code in systematic form `[I_k | A]`.
    pub fn random_systematic<R: Rng + ?Sized>(p: u64, n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidLattice(format!("need 1 ≤ k ≤ n, got k = {k}, n = {n}")));
        }
        let rows = (0..k)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if j < k {
                            i64::from(i == j)
                        } else {
                            rng.random_range(0..p) as i64
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(p, rows)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    /// Number of codewords, `p^k`, when it fits in a `u64`.
    pub fn size(&self) -> Option<u64> {
        self.p.checked_pow(self.k() as u32)
    }

    /// Codeword for the message whose base-`p` digits are `index`.
    pub fn codeword(&self, mut index: u64) -> Vec<u64> {
        let mut word = vec![0u64; self.n()];
        for row in &self.rows {
            let digit = index % self.p;
            index /= self.p;
            if digit == 0 {
                continue;
            }
            for (w, g) in word.iter_mut().zip(row) {
                *w = (*w + digit * g) % self.p;
            }
        }
        word
    }

    /// Reduced row echelon form and pivot columns.
    pub fn row_echelon(&self) -> (Vec<Vec<u64>>, Vec<usize>) {
        let p = self.p;
        let mut m = self.rows.clone();
        let (rows, cols) = (m.len(), self.n());
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(sel) = (r..rows).find(|&i| m[i][c] != 0) else {
                continue;
            };
            m.swap(r, sel);
            let inv = inv_mod(m[r][c], p);
            for v in m[r].iter_mut() {
                *v = *v * inv % p;
            }
            for i in 0..rows {
                if i != r && m[i][c] != 0 {
                    let f = m[i][c];
                    for j in 0..cols {
                        m[i][j] = (m[i][j] + p - f * m[r][j] % p) % p;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }
}
