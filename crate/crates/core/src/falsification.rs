//! Strict falsification: a model is falsified only by an observed event to
//! which it assigns probability exactly zero.
//!
//! "Zero" is decided from the family's support, never from a numerically
//! tiny probability. A Poisson pmf of 1e-300 is still positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::Evidence;
use crate::predictive::{Kind, PredictiveDistribution};

/// A measured value, optionally with the step of the recording device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
}

impl Observation {
    pub fn new(value: f64) -> Self {
        Self {
            value,
            resolution: None,
        }
    }

    pub fn with_resolution(value: f64, resolution: f64) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "resolution must be positive, got {resolution}"
            )));
        }
        Ok(Self {
            value,
            resolution: Some(resolution),
        })
    }
}

impl From<f64> for Observation {
    fn from(value: f64) -> Self {
        Self::new(value)
    }
}

/// How an observation is read as an event.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// The event `{value}`.
    #[default]
    PointEvent,
    /// The event `[value − resolution/2, value + resolution/2]`.
    IntervalEvent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalsificationVerdict {
    pub falsified: bool,
    /// First observation whose event has probability zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Observation>,
    pub mode: Mode,
}

fn event_has_mass(dist: &PredictiveDistribution, obs: &Observation, mode: Mode) -> Result<bool> {
    match mode {
        Mode::PointEvent => Ok(dist.has_atom(obs.value)),
        Mode::IntervalEvent => {
            let r = obs.resolution.ok_or(Error::MissingResolution)?;
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidParameter(format!("resolution must be positive, got {r}")));
            }
            Ok(dist.interval_has_mass(obs.value - 0.5 * r, obs.value + 0.5 * r))
        }
    }
}

/// Checks every observation in order and reports the first probability-zero
/// event, if any.
pub fn is_falsified(dist: &PredictiveDistribution, obs: &[Observation], mode: Mode) -> Result<FalsificationVerdict> {
    if obs.is_empty() {
        return Err(Error::NoObservations);
    }
    for o in obs {
        if let Some(r) = o.resolution {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidParameter(format!("resolution must be positive, got {r}")));
            }
        }
        if mode == Mode::IntervalEvent && o.resolution.is_none() {
            return Err(Error::MissingResolution);
        }
    }
    for o in obs {
        if !event_has_mass(dist, o, mode)? {
            return Ok(FalsificationVerdict {
                falsified: true,
                witness: Some(*o),
                mode,
            });
        }
    }
    Ok(FalsificationVerdict {
        falsified: false,
        witness: None,
        mode,
    })
}

/// Whether no value the evidence allows could ever falsify `dist` as a
/// point event. Continuous predictives are falsified by every value, so
/// they are never "never falsifiable".
pub fn never_falsifiable(dist: &PredictiveDistribution, e: &Evidence) -> Result<bool> {
    let values = e.enumerate()?;
    if dist.kind() == Kind::Continuous {
        return Ok(false);
    }
    Ok(values.iter().all(|&v| dist.has_atom(v)))
}
