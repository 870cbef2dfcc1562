use rand::Rng;
use rand_distr::Distribution;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{ln_gamma, normal_quantile};

// Relative size below which series terms are dropped.
const SERIES_EPS: f64 = 1e-18;

/// Poisson distribution on the nonnegative integers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Poisson {
    rate: f64,
}

impl Poisson {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidParameter(format!("Poisson rate must be positive, got {rate}")));
        }
        Ok(Self { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn is_atom(y: f64) -> bool {
        y >= 0.0 && y.fract() == 0.0 && y.is_finite()
    }

    fn ln_pmf_at(&self, k: f64) -> f64 {
        k * self.rate.ln() - self.rate - ln_gamma(k + 1.0)
    }

    pub fn pmf(&self, y: f64) -> f64 {
        if Self::is_atom(y) {
            self.ln_pmf_at(y).exp()
        } else {
            0.0
        }
    }

    pub fn ln_pmf(&self, y: f64) -> f64 {
        if Self::is_atom(y) {
            self.ln_pmf_at(y)
        } else {
            f64::NEG_INFINITY
        }
    }

    /// P(Y ≤ k) summed downward from `k` for `k < λ`.
    fn lower_sum(&self, k: f64) -> f64 {
        let mut term = self.ln_pmf_at(k).exp();
        let mut sum = term;
        let mut j = k;
        while j > 0.0 {
            term *= j / self.rate;
            sum += term;
            if term <= SERIES_EPS * sum {
                break;
            }
            j -= 1.0;
        }
        sum
    }

    /// P(Y > k) summed upward from `k + 1` for `k ≥ λ`.
    fn upper_sum(&self, k: f64) -> f64 {
        let mut j = k + 1.0;
        let mut term = self.ln_pmf_at(j).exp();
        let mut sum = term;
        loop {
            j += 1.0;
            term *= self.rate / j;
            sum += term;
            if term <= SERIES_EPS * sum || term == 0.0 {
                break;
            }
        }
        sum
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        if y == f64::INFINITY {
            return 1.0;
        }
        let k = y.floor();
        if k < self.rate {
            self.lower_sum(k).min(1.0)
        } else {
            (1.0 - self.upper_sum(k)).max(0.0)
        }
    }

    pub fn sf(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 1.0;
        }
        if y == f64::INFINITY {
            return 0.0;
        }
        let k = y.floor();
        if k < self.rate {
            (1.0 - self.lower_sum(k)).max(0.0)
        } else {
            self.upper_sum(k).min(1.0)
        }
    }

    /// P(Y < y).
    pub fn cdf_left(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        self.cdf(y.ceil() - 1.0)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let guess = (self.rate + self.rate.sqrt() * normal_quantile(p)).floor().max(0.0);
        let mut k = guess;
        while k > 0.0 && self.cdf(k - 1.0) >= p {
            k -= 1.0;
        }
        while self.cdf(k) < p {
            k += 1.0;
        }
        k
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rand_distr::Poisson::new(self.rate)
            .expect("rate validated at construction")
            .sample(rng)
    }

    /// Integer atoms in `[lo, hi]`.
    pub fn atoms_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let start = lo.max(0.0).ceil();
        let end = hi.floor();
        let mut out = Vec::new();
        let mut k = start;
        while k <= end {
            out.push(k);
            k += 1.0;
        }
        out
    }

    /// Index past which the remaining mass is below 1e-300.
    pub fn effective_upper(&self) -> f64 {
        (self.rate + 40.0 * self.rate.sqrt() + 750.0).ceil()
    }
}

/// Step-function distribution putting mass 1/n on each observation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    observations: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut observations: Vec<f64>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::InvalidParameter("empirical distribution needs at least one observation".into()));
        }
        if let Some(bad) = observations.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite observation {bad}")));
        }
        observations.sort_by(|a, b| a.total_cmp(b));
        Ok(Self { observations })
    }

    /// Sorted observations.
    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    fn count_le(&self, y: f64) -> usize {
        self.observations.partition_point(|&o| o <= y)
    }

    fn count_lt(&self, y: f64) -> usize {
        self.observations.partition_point(|&o| o < y)
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.count_le(y) as f64 / self.len() as f64
    }

    pub fn cdf_left(&self, y: f64) -> f64 {
        self.count_lt(y) as f64 / self.len() as f64
    }

    pub fn sf(&self, y: f64) -> f64 {
        (self.len() - self.count_le(y)) as f64 / self.len() as f64
    }

    pub fn pmf(&self, y: f64) -> f64 {
        (self.count_le(y) - self.count_lt(y)) as f64 / self.len() as f64
    }

    pub fn is_atom(&self, y: f64) -> bool {
        self.count_le(y) > self.count_lt(y)
    }

    /// Smallest observation whose CDF reaches `p`; `p ≤ 0` maps to the
    /// minimum and `p ≥ 1` to the maximum.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.len();
        if p <= 0.0 {
            return self.observations[0];
        }
        if p >= 1.0 {
            return self.observations[n - 1];
        }
        let nf = n as f64;
        let mut k = ((p * nf).ceil() as usize).clamp(1, n);
        while k > 1 && (k - 1) as f64 / nf >= p {
            k -= 1;
        }
        while k < n && (k as f64) / nf < p {
            k += 1;
        }
        self.observations[k - 1]
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.observations[rng.random_range(0..self.len())]
    }

    pub fn atoms_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut atoms: Vec<f64> = self.observations[self.count_lt(lo)..self.count_le(hi)].to_vec();
        atoms.dedup();
        atoms
    }

    pub fn mean(&self) -> f64 {
        self.observations.iter().sum::<f64>() / self.len() as f64
    }
}
