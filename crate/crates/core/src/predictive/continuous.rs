use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{
    beta_reg_pair, invert_cdf, ln_gamma, normal_cdf, normal_ln_pdf, normal_pdf, normal_quantile,
    normal_sf,
};

fn check_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {value}")))
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {value}")))
    }
}

/// Normal distribution N(μ, σ²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Normal {
    mean: f64,
    sd: f64,
}

impl Normal {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        check_finite("mean", mean)?;
        check_positive("sd", sd)?;
        Ok(Self { mean, sd })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn cdf(&self, y: f64) -> f64 {
        normal_cdf((y - self.mean) / self.sd)
    }

    pub fn sf(&self, y: f64) -> f64 {
        normal_sf((y - self.mean) / self.sd)
    }

    pub fn density(&self, y: f64) -> f64 {
        normal_pdf((y - self.mean) / self.sd) / self.sd
    }

    pub fn ln_density(&self, y: f64) -> f64 {
        normal_ln_pdf((y - self.mean) / self.sd) - self.sd.ln()
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.mean + self.sd * normal_quantile(p)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mean + self.sd * z
    }
}

/// Location-scale Student-t distribution.
///
/// The CDF is evaluated through the regularized incomplete beta function,
/// with both tails computed directly so that small tail probabilities keep
/// their relative accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudentT {
    df: f64,
    location: f64,
    scale: f64,
}

impl StudentT {
    pub fn new(df: f64, location: f64, scale: f64) -> Result<Self> {
        check_positive("df", df)?;
        check_finite("location", location)?;
        check_positive("scale", scale)?;
        Ok(Self {
            df,
            location,
            scale,
        })
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Returns `(P(T ≤ z), P(T > z))` for the standardized variable.
    fn tails(&self, z: f64) -> (f64, f64) {
        if z == f64::INFINITY {
            return (1.0, 0.0);
        }
        if z == f64::NEG_INFINITY {
            return (0.0, 1.0);
        }
        let z2 = z * z;
        let denom = self.df + z2;
        let (i, _) = beta_reg_pair(0.5 * self.df, 0.5, self.df / denom, z2 / denom);
        let tail = 0.5 * i;
        if z < 0.0 {
            (tail, 1.0 - tail)
        } else {
            (1.0 - tail, tail)
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.tails((y - self.location) / self.scale).0
    }

    pub fn sf(&self, y: f64) -> f64 {
        self.tails((y - self.location) / self.scale).1
    }

    pub fn ln_density(&self, y: f64) -> f64 {
        let v = self.df;
        let z = (y - self.location) / self.scale;
        ln_gamma(0.5 * (v + 1.0))
            - ln_gamma(0.5 * v)
            - 0.5 * (v * std::f64::consts::PI).ln()
            - self.scale.ln()
            - 0.5 * (v + 1.0) * (z * z / v).ln_1p()
    }

    pub fn density(&self, y: f64) -> f64 {
        self.ln_density(y).exp()
    }

    pub fn quantile(&self, p: f64) -> f64 {
        // Exact standardized quantiles for ν = 1, 2 serve as starting points;
        // otherwise start from an inflated normal quantile.
        let v = self.df;
        let z0 = if v == 1.0 {
            (std::f64::consts::PI * (p - 0.5)).tan()
        } else if v == 2.0 {
            (2.0 * p - 1.0) / (2.0 * p * (1.0 - p)).sqrt()
        } else if v > 2.0 {
            normal_quantile(p) * (v / (v - 2.0)).sqrt()
        } else {
            normal_quantile(p)
        };
        invert_cdf(
            |y| self.cdf(y),
            |y| self.density(y),
            p,
            self.location + self.scale * z0,
            self.scale,
            f64::NEG_INFINITY,
            f64::INFINITY,
        )
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let t = rand_distr::StudentT::new(self.df).expect("df validated at construction");
        self.location + self.scale * t.sample(rng)
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, n: usize, out: &mut Vec<f64>) {
        let t = rand_distr::StudentT::new(self.df).expect("df validated at construction");
        out.extend((0..n).map(|_| self.location + self.scale * t.sample(rng)));
    }

    /// Mean exists only for ν > 1.
    pub fn mean(&self) -> Option<f64> {
        (self.df > 1.0).then_some(self.location)
    }
}

/// Normal distribution restricted to `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedNormal {
    mean: f64,
    sd: f64,
    lower: f64,
    upper: f64,
    #[serde(skip)]
    alpha: f64,
    #[serde(skip)]
    beta: f64,
    /// Normal mass of `[lower, upper]`.
    #[serde(skip)]
    mass: f64,
}

impl TruncatedNormal {
    pub fn new(mean: f64, sd: f64, lower: f64, upper: f64) -> Result<Self> {
        check_finite("mean", mean)?;
        check_positive("sd", sd)?;
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::InvalidParameter(format!(
                "truncation bounds must satisfy lower < upper, got [{lower}, {upper}]"
            )));
        }
        let alpha = (lower - mean) / sd;
        let beta = (upper - mean) / sd;
        let mass = if alpha > 0.0 {
            normal_sf(alpha) - normal_sf(beta)
        } else {
            normal_cdf(beta) - normal_cdf(alpha)
        };
        if !(mass > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "truncation region [{lower}, {upper}] has zero mass under N({mean}, {sd}²)"
            )));
        }
        Ok(Self {
            mean,
            sd,
            lower,
            upper,
            alpha,
            beta,
            mass,
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Mass of the untruncated normal inside the truncation region.
    pub fn retained_mass(&self) -> f64 {
        self.mass
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y <= self.lower {
            return 0.0;
        }
        if y >= self.upper {
            return 1.0;
        }
        let z = (y - self.mean) / self.sd;
        let v = if self.alpha > 0.0 {
            (normal_sf(self.alpha) - normal_sf(z)) / self.mass
        } else {
            (normal_cdf(z) - normal_cdf(self.alpha)) / self.mass
        };
        v.clamp(0.0, 1.0)
    }

    pub fn sf(&self, y: f64) -> f64 {
        if y <= self.lower {
            return 1.0;
        }
        if y >= self.upper {
            return 0.0;
        }
        let z = (y - self.mean) / self.sd;
        let v = if z > 0.0 {
            (normal_sf(z) - normal_sf(self.beta)) / self.mass
        } else {
            (normal_cdf(self.beta) - normal_cdf(z)) / self.mass
        };
        v.clamp(0.0, 1.0)
    }

    pub fn density(&self, y: f64) -> f64 {
        if y < self.lower || y > self.upper {
            return 0.0;
        }
        normal_pdf((y - self.mean) / self.sd) / (self.sd * self.mass)
    }

    pub fn ln_density(&self, y: f64) -> f64 {
        if y < self.lower || y > self.upper {
            return f64::NEG_INFINITY;
        }
        normal_ln_pdf((y - self.mean) / self.sd) - (self.sd * self.mass).ln()
    }

    /// Closed-form inversion; used directly for sampling.
    fn invert(&self, u: f64) -> f64 {
        let z = if self.alpha > 0.0 {
            -normal_quantile(normal_sf(self.alpha) - u * self.mass)
        } else {
            normal_quantile(normal_cdf(self.alpha) + u * self.mass)
        };
        (self.mean + self.sd * z).clamp(self.lower, self.upper)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let guess = self.invert(p);
        if (self.cdf(guess) - p).abs() <= crate::special::QUANTILE_TOL {
            return guess;
        }
        invert_cdf(
            |y| self.cdf(y),
            |y| self.density(y),
            p,
            guess,
            self.sd,
            self.lower,
            self.upper,
        )
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.invert(u)
    }

    pub fn mean(&self) -> f64 {
        let phi_a = if self.alpha.is_finite() { normal_pdf(self.alpha) } else { 0.0 };
        let phi_b = if self.beta.is_finite() { normal_pdf(self.beta) } else { 0.0 };
        self.mean + self.sd * (phi_a - phi_b) / self.mass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(Normal::new(0.0, 0.0).is_err());
        assert!(StudentT::new(0.0, 0.0, 1.0).is_err());
        assert!(StudentT::new(2.0, 0.0, -1.0).is_err());
        assert!(TruncatedNormal::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(TruncatedNormal::new(0.0, 1.0, 60.0, f64::INFINITY).is_err());
    }

    #[test]
    fn t_tails_stay_accurate() {
        // Cauchy: P(T > 1e6) = arctan(1e-6)/π to leading order.
        let t = StudentT::new(1.0, 0.0, 1.0).unwrap();
        let expected = (1e-6f64).atan() / std::f64::consts::PI;
        assert!(((t.sf(1e6) - expected) / expected).abs() < 1e-10);
        assert!(((t.cdf(-1e6) - expected) / expected).abs() < 1e-10);
    }

    #[test]
    fn truncated_normal_deep_tail() {
        let d = TruncatedNormal::new(0.0, 1.0, 20.0, f64::INFINITY).unwrap();
        assert_eq!(d.cdf(20.0), 0.0);
        let q = d.quantile(0.5);
        assert!(q > 20.0 && q < 20.1);
        assert!((d.cdf(q) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn truncated_normal_mean_one_sided() {
        // E[Z | Z ≥ 0] = 2φ(0) = √(2/π)
        let d = TruncatedNormal::new(0.0, 1.0, 0.0, f64::INFINITY).unwrap();
        assert!((d.mean() - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-14);
    }
}
