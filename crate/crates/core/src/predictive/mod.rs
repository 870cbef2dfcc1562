//! Predictive distributions: analytic families and posterior-ensemble
//! mixtures, all exposing the same CDF / quantile / density / sampling
//! surface.
//!
//! A predictive is the parameter-integrated distribution of a future
//! observable. For the flat-prior normal regression it is a Student-t; in
//! general it is the posterior-weighted mixture of the per-parameter
//! sampling distributions, built here by [`mixture_predictive`].

mod continuous;
mod discrete;
mod mixture;

pub use continuous::{Normal, StudentT, TruncatedNormal};
pub use discrete::{EmpiricalDistribution, Poisson};
pub use mixture::{Mixture, MixtureComponent, WEIGHT_SUM_TOL};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// The generator every seeded operation in the crate uses.
pub type SeededRng = ChaCha8Rng;

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 1729;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Normal,
    StudentT,
    TruncatedNormal,
    Poisson,
    Mixture,
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PredictiveDistribution {
    Normal(Normal),
    StudentT(StudentT),
    TruncatedNormal(TruncatedNormal),
    Poisson(Poisson),
    Mixture(Mixture),
    Empirical(EmpiricalDistribution),
}

impl From<Normal> for PredictiveDistribution {
    fn from(d: Normal) -> Self {
        Self::Normal(d)
    }
}

impl From<StudentT> for PredictiveDistribution {
    fn from(d: StudentT) -> Self {
        Self::StudentT(d)
    }
}

impl From<TruncatedNormal> for PredictiveDistribution {
    fn from(d: TruncatedNormal) -> Self {
        Self::TruncatedNormal(d)
    }
}

impl From<Poisson> for PredictiveDistribution {
    fn from(d: Poisson) -> Self {
        Self::Poisson(d)
    }
}

impl From<Mixture> for PredictiveDistribution {
    fn from(d: Mixture) -> Self {
        Self::Mixture(d)
    }
}

impl From<EmpiricalDistribution> for PredictiveDistribution {
    fn from(d: EmpiricalDistribution) -> Self {
        Self::Empirical(d)
    }
}

impl PredictiveDistribution {
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        Normal::new(mean, sd).map(Self::from)
    }

    pub fn student_t(df: f64, location: f64, scale: f64) -> Result<Self> {
        StudentT::new(df, location, scale).map(Self::from)
    }

    pub fn truncated_normal(mean: f64, sd: f64, lower: f64, upper: f64) -> Result<Self> {
        TruncatedNormal::new(mean, sd, lower, upper).map(Self::from)
    }

    pub fn poisson(rate: f64) -> Result<Self> {
        Poisson::new(rate).map(Self::from)
    }

    pub fn empirical(observations: Vec<f64>) -> Result<Self> {
        EmpiricalDistribution::new(observations).map(Self::from)
    }

    pub fn mixture(components: Vec<(f64, PredictiveDistribution)>) -> Result<Self> {
        Mixture::new(
            components
                .into_iter()
                .map(|(weight, dist)| MixtureComponent { weight, dist })
                .collect(),
        )
        .map(Self::from)
    }

    pub fn kind(&self) -> Kind {
        match self {
            Self::Normal(_) | Self::StudentT(_) | Self::TruncatedNormal(_) => Kind::Continuous,
            Self::Poisson(_) | Self::Empirical(_) => Kind::Discrete,
            Self::Mixture(m) => m.kind(),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Self::Normal(_) => Family::Normal,
            Self::StudentT(_) => Family::StudentT,
            Self::TruncatedNormal(_) => Family::TruncatedNormal,
            Self::Poisson(_) => Family::Poisson,
            Self::Mixture(_) => Family::Mixture,
            Self::Empirical(_) => Family::Empirical,
        }
    }

    pub fn is_continuous(&self) -> bool {
        self.kind() == Kind::Continuous
    }

    /// P(Y ≤ y), including any atom at `y`.
    pub fn cdf(&self, y: f64) -> f64 {
        match self {
            Self::Normal(d) => d.cdf(y),
            Self::StudentT(d) => d.cdf(y),
            Self::TruncatedNormal(d) => d.cdf(y),
            Self::Poisson(d) => d.cdf(y),
            Self::Mixture(d) => d.cdf(y),
            Self::Empirical(d) => d.cdf(y),
        }
    }

    /// P(Y < y). Equal to [`cdf`](Self::cdf) for continuous families.
    pub fn cdf_left(&self, y: f64) -> f64 {
        match self {
            Self::Poisson(d) => d.cdf_left(y),
            Self::Empirical(d) => d.cdf_left(y),
            Self::Mixture(d) => d.cdf_left(y),
            _ => self.cdf(y),
        }
    }

    /// P(Y > y), evaluated directly rather than as `1 − cdf`.
    pub fn sf(&self, y: f64) -> f64 {
        match self {
            Self::Normal(d) => d.sf(y),
            Self::StudentT(d) => d.sf(y),
            Self::TruncatedNormal(d) => d.sf(y),
            Self::Poisson(d) => d.sf(y),
            Self::Mixture(d) => d.sf(y),
            Self::Empirical(d) => d.sf(y),
        }
    }

    /// P(Y ≥ y).
    pub fn sf_inclusive(&self, y: f64) -> f64 {
        match self.kind() {
            Kind::Continuous => self.sf(y),
            Kind::Discrete => (1.0 - self.cdf_left(y)).max(0.0),
        }
    }

    /// Density for continuous families, probability mass for discrete ones.
    pub fn density(&self, y: f64) -> f64 {
        match self {
            Self::Normal(d) => d.density(y),
            Self::StudentT(d) => d.density(y),
            Self::TruncatedNormal(d) => d.density(y),
            Self::Poisson(d) => d.pmf(y),
            Self::Mixture(d) => d.density(y),
            Self::Empirical(d) => d.pmf(y),
        }
    }

    pub fn ln_density(&self, y: f64) -> f64 {
        match self {
            Self::Normal(d) => d.ln_density(y),
            Self::StudentT(d) => d.ln_density(y),
            Self::TruncatedNormal(d) => d.ln_density(y),
            Self::Poisson(d) => d.ln_pmf(y),
            Self::Mixture(d) => d.ln_density(y),
            Self::Empirical(d) => d.pmf(y).ln(),
        }
    }

    /// Smallest `y` with `cdf(y) ≥ p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        Ok(match self {
            Self::Normal(d) => d.quantile(p),
            Self::StudentT(d) => d.quantile(p),
            Self::TruncatedNormal(d) => d.quantile(p),
            Self::Poisson(d) => d.quantile(p),
            Self::Mixture(d) => d.quantile(p),
            Self::Empirical(d) => d.quantile(p),
        })
    }

    /// One draw from the caller's generator.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Normal(d) => d.draw(rng),
            Self::StudentT(d) => d.draw(rng),
            Self::TruncatedNormal(d) => d.draw(rng),
            Self::Poisson(d) => d.draw(rng),
            Self::Mixture(d) => d.draw(rng),
            Self::Empirical(d) => d.draw(rng),
        }
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        match self {
            Self::StudentT(d) => d.sample_into(rng, n, &mut out),
            _ => out.extend((0..n).map(|_| self.draw(rng))),
        }
        out
    }

    /// `n` draws from a fresh generator seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        self.sample_with(&mut seeded_rng(seed), n)
    }

    /// Closed hull of the support.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Normal(_) | Self::StudentT(_) => (f64::NEG_INFINITY, f64::INFINITY),
            Self::TruncatedNormal(d) => (d.lower(), d.upper()),
            Self::Poisson(_) => (0.0, f64::INFINITY),
            Self::Mixture(d) => d.support(),
            Self::Empirical(d) => {
                let obs = d.observations();
                (obs[0], obs[obs.len() - 1])
            }
        }
    }

    /// Whether the family structurally puts positive mass on the single
    /// value `y`. Continuous families never do.
    pub fn has_atom(&self, y: f64) -> bool {
        match self {
            Self::Normal(_) | Self::StudentT(_) | Self::TruncatedNormal(_) => false,
            Self::Poisson(_) => Poisson::is_atom(y),
            Self::Empirical(d) => d.is_atom(y),
            Self::Mixture(m) => m
                .components()
                .iter()
                .any(|c| c.weight > 0.0 && c.dist.has_atom(y)),
        }
    }

    /// Whether the closed interval `[lo, hi]` has positive probability,
    /// decided from the family's support rather than from floating-point
    /// evaluation.
    pub fn interval_has_mass(&self, lo: f64, hi: f64) -> bool {
        if lo > hi {
            return false;
        }
        match self {
            Self::Normal(_) | Self::StudentT(_) => lo < hi,
            Self::TruncatedNormal(d) => lo.max(d.lower()) < hi.min(d.upper()),
            Self::Poisson(_) => lo.max(0.0).ceil() <= hi.floor(),
            Self::Empirical(d) => d.cdf(hi) > d.cdf_left(lo),
            Self::Mixture(m) => m
                .components()
                .iter()
                .any(|c| c.weight > 0.0 && c.dist.interval_has_mass(lo, hi)),
        }
    }

    /// Atoms inside `[lo, hi]` (empty for continuous families).
    pub fn atoms_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self {
            Self::Normal(_) | Self::StudentT(_) | Self::TruncatedNormal(_) => Vec::new(),
            Self::Poisson(d) => d.atoms_in(lo, hi),
            Self::Empirical(d) => d.atoms_in(lo, hi),
            Self::Mixture(m) => {
                let mut atoms: Vec<f64> = m
                    .components()
                    .iter()
                    .filter(|c| c.weight > 0.0)
                    .flat_map(|c| c.dist.atoms_in(lo, hi))
                    .collect();
                atoms.sort_by(|a, b| a.total_cmp(b));
                atoms.dedup();
                atoms
            }
        }
    }

    /// Mean, or `None` when the first moment does not exist.
    pub fn mean(&self) -> Option<f64> {
        match self {
            Self::Normal(d) => Some(d.mean()),
            Self::StudentT(d) => d.mean(),
            Self::TruncatedNormal(d) => Some(d.mean()),
            Self::Poisson(d) => Some(d.rate()),
            Self::Mixture(d) => d.mean(),
            Self::Empirical(d) => Some(d.mean()),
        }
    }
}

/// One posterior draw θᵢ with its posterior probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsemblePoint {
    pub theta: Vec<f64>,
    pub weight: f64,
}

/// Discrete approximation (or exact representation) of a parameter
/// posterior.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorEnsemble {
    points: Vec<EnsemblePoint>,
}

impl PosteriorEnsemble {
    /// Weights must be nonnegative and sum to one within 1e-12.
    pub fn new(points: Vec<EnsemblePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if let Some(p) = points.iter().find(|p| !(p.weight.is_finite() && p.weight >= 0.0)) {
            return Err(Error::InvalidParameter(format!("ensemble weight {} is not a probability", p.weight)));
        }
        let total: f64 = points.iter().map(|p| p.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidParameter(format!("ensemble weights sum to {total}, expected 1")));
        }
        Ok(Self { points })
    }

    /// Equal-weight ensemble, e.g. from posterior samples.
    pub fn uniform(thetas: Vec<Vec<f64>>) -> Result<Self> {
        let n = thetas.len();
        if n == 0 {
            return Err(Error::EmptyEnsemble);
        }
        let weight = 1.0 / n as f64;
        Self::from_unnormalized(thetas.into_iter().map(|theta| (theta, weight)).collect())
    }

    /// Normalizes nonnegative weights to sum to one.
    pub fn from_unnormalized(points: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let total: f64 = points.iter().map(|p| p.1).sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidParameter(format!("ensemble weights sum to {total}")));
        }
        Self::new(
            points
                .into_iter()
                .map(|(theta, w)| EnsemblePoint {
                    theta,
                    weight: w / total,
                })
                .collect(),
        )
    }

    pub fn points(&self) -> &[EnsemblePoint] {
        &self.points
    }
}

/// Posterior predictive as the posterior-weighted mixture of per-parameter
/// predictives.
pub fn mixture_predictive<F>(ensemble: &PosteriorEnsemble, mut kernel: F) -> Result<PredictiveDistribution>
where
    F: FnMut(&[f64]) -> Result<PredictiveDistribution>,
{
    let components = ensemble
        .points()
        .iter()
        .map(|p| {
            Ok(MixtureComponent {
                weight: p.weight,
                dist: kernel(&p.theta)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Mixture::new(components).map(PredictiveDistribution::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_rejects_boundary_probabilities() {
        let d = PredictiveDistribution::normal(0.0, 1.0).unwrap();
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(d.quantile(p).is_err());
        }
    }

    #[test]
    fn mixture_rejects_mixed_kinds() {
        let err = PredictiveDistribution::mixture(vec![
            (0.5, PredictiveDistribution::normal(0.0, 1.0).unwrap()),
            (0.5, PredictiveDistribution::poisson(1.0).unwrap()),
        ])
        .unwrap_err();
        assert_eq!(err, Error::MixedKinds);
    }

    #[test]
    fn ensemble_rejects_bad_weights() {
        assert_eq!(PosteriorEnsemble::new(vec![]).unwrap_err(), Error::EmptyEnsemble);
        let bad = vec![
            EnsemblePoint { theta: vec![0.0], weight: 0.6 },
            EnsemblePoint { theta: vec![1.0], weight: 0.6 },
        ];
        assert!(PosteriorEnsemble::new(bad).is_err());
    }

    #[test]
    fn discrete_mixture_quantile() {
        let m = PredictiveDistribution::mixture(vec![
            (0.5, PredictiveDistribution::empirical(vec![1.0]).unwrap()),
            (0.5, PredictiveDistribution::empirical(vec![3.0]).unwrap()),
        ])
        .unwrap();
        assert_eq!(m.quantile(0.5).unwrap(), 1.0);
        assert_eq!(m.quantile(0.51).unwrap(), 3.0);
        assert!(m.has_atom(3.0));
        assert!(!m.has_atom(2.0));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let d = PredictiveDistribution::student_t(3.0, 1.0, 2.0).unwrap();
        assert_eq!(d.sample(5, 42), d.sample(5, 42));
        assert_ne!(d.sample(5, 42), d.sample(5, 43));
    }
}
