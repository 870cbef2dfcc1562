use rand::Rng;
use serde::Serialize;

use super::{Kind, PredictiveDistribution};
use crate::error::{Error, Result};
use crate::special::invert_cdf;

/// Tolerance on the total weight of a mixture or ensemble.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub dist: PredictiveDistribution,
}

/// Finite weighted mixture; every evaluation is the literal weighted sum
/// of the component evaluations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mixture {
    kind: Kind,
    components: Vec<MixtureComponent>,
}

impl Mixture {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        let first = components.first().ok_or(Error::EmptyEnsemble)?;
        let kind = first.dist.kind();
        if components.iter().any(|c| c.dist.kind() != kind) {
            return Err(Error::MixedKinds);
        }
        if let Some(c) = components.iter().find(|c| !(c.weight.is_finite() && c.weight >= 0.0)) {
            return Err(Error::InvalidParameter(format!("mixture weight {} is not a probability", c.weight)));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidParameter(format!("mixture weights sum to {total}, expected 1")));
        }
        Ok(Self { kind, components })
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    fn active(&self) -> impl Iterator<Item = &MixtureComponent> {
        self.components.iter().filter(|c| c.weight > 0.0)
    }

    fn weighted<F: Fn(&PredictiveDistribution) -> f64>(&self, f: F) -> f64 {
        self.active().map(|c| c.weight * f(&c.dist)).sum()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.weighted(|d| d.cdf(y)).clamp(0.0, 1.0)
    }

    pub fn cdf_left(&self, y: f64) -> f64 {
        self.weighted(|d| d.cdf_left(y)).clamp(0.0, 1.0)
    }

    pub fn sf(&self, y: f64) -> f64 {
        self.weighted(|d| d.sf(y)).clamp(0.0, 1.0)
    }

    pub fn density(&self, y: f64) -> f64 {
        self.weighted(|d| d.density(y))
    }

    pub fn ln_density(&self, y: f64) -> f64 {
        let terms: Vec<f64> = self
            .active()
            .map(|c| c.weight.ln() + c.dist.ln_density(y))
            .collect();
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
    }

    pub fn quantile(&self, p: f64) -> f64 {
        // The mixture quantile lies between the extreme component quantiles.
        let qs: Vec<f64> = self
            .active()
            .map(|c| c.dist.quantile(p).expect("p already validated"))
            .collect();
        let lo = qs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match self.kind {
            Kind::Discrete => {
                let mut atoms: Vec<f64> = self.active().flat_map(|c| c.dist.atoms_in(lo, hi)).collect();
                atoms.sort_by(|a, b| a.total_cmp(b));
                atoms.dedup();
                atoms.into_iter().find(|&a| self.cdf(a) >= p).unwrap_or(hi)
            }
            Kind::Continuous => {
                if lo == hi {
                    return lo;
                }
                let (support_lo, support_hi) = self.support();
                invert_cdf(
                    |y| self.cdf(y),
                    |y| self.density(y),
                    p,
                    0.5 * (lo + hi),
                    0.5 * (hi - lo),
                    support_lo,
                    support_hi,
                )
            }
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = None;
        for c in self.active() {
            acc += c.weight;
            chosen = Some(c);
            if u < acc {
                break;
            }
        }
        chosen.expect("mixture has a positive-weight component").dist.draw(rng)
    }

    pub fn support(&self) -> (f64, f64) {
        self.active().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            let (a, b) = c.dist.support();
            (lo.min(a), hi.max(b))
        })
    }

    pub fn mean(&self) -> Option<f64> {
        self.active()
            .map(|c| c.dist.mean().map(|m| c.weight * m))
            .sum()
    }
}
