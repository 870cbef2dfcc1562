//! Evidence as a declaration of the observable's possible values, and the
//! probability leakage of a predictive with respect to it.
//!
//! Leakage is the predictive mass outside the evidence's support: 0 when
//! the model respects the evidence, 1 when it has no overlap with it. A
//! continuous predictive for an observable the evidence declares discrete
//! gives every possible value probability zero, so its leakage is 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::predictive::{Kind, PredictiveDistribution};
use crate::regression::{CovariatePoint, FitResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceKind {
    ContinuousSupport,
    DiscreteSupport,
}

/// Interval with independently open or closed endpoints. Infinite
/// endpoints are always treated as open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
    pub upper_open: bool,
}

impl Interval {
    pub fn closed(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            lower_open: false,
            upper_open: false,
        }
    }

    pub fn open(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            lower_open: true,
            upper_open: true,
        }
    }

    pub fn at_least(lower: f64) -> Self {
        Self::closed(lower, f64::INFINITY)
    }

    pub fn at_most(upper: f64) -> Self {
        Self::closed(f64::NEG_INFINITY, upper)
    }

    pub fn real_line() -> Self {
        Self::closed(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, y: f64) -> bool {
        let above = if self.lower_open { y > self.lower } else { y >= self.lower };
        let below = if self.upper_open { y < self.upper } else { y <= self.upper };
        above && below
    }

    fn is_empty(&self) -> bool {
        self.lower > self.upper || (self.lower == self.upper && (self.lower_open || self.upper_open))
    }

    /// Predictive mass strictly below the interval.
    fn mass_below(&self, dist: &PredictiveDistribution) -> f64 {
        if self.lower == f64::NEG_INFINITY {
            0.0
        } else if self.lower_open {
            dist.cdf(self.lower)
        } else {
            dist.cdf_left(self.lower)
        }
    }

    /// Predictive mass strictly above the interval.
    fn mass_above(&self, dist: &PredictiveDistribution) -> f64 {
        if self.upper == f64::INFINITY {
            0.0
        } else if self.upper_open {
            dist.sf_inclusive(self.upper)
        } else {
            dist.sf(self.upper)
        }
    }
}

/// Evenly spaced values `lower, lower + step, …` up to `upper` (which may
/// be infinite).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub lower: f64,
    #[serde(serialize_with = "serialize_bound", deserialize_with = "deserialize_upper")]
    pub upper: f64,
    pub step: f64,
}

impl Lattice {
    /// Index of the lattice point nearest to `y`, if `y` is one.
    fn index_of(&self, y: f64) -> Option<f64> {
        if !y.is_finite() {
            return None;
        }
        let k = ((y - self.lower) / self.step).round();
        if k < 0.0 {
            return None;
        }
        let point = self.lower + k * self.step;
        if point > self.upper {
            return None;
        }
        let tol = 4.0 * f64::EPSILON * y.abs().max(self.lower.abs() + (k * self.step).abs()).max(f64::MIN_POSITIVE);
        ((y - point).abs() <= tol).then_some(k)
    }

    pub fn contains(&self, y: f64) -> bool {
        self.index_of(y).is_some()
    }

    pub fn is_finite(&self) -> bool {
        self.upper.is_finite()
    }

    /// Number of points, or `None` when unbounded.
    pub fn len(&self) -> Option<usize> {
        self.is_finite()
            .then(|| ((self.upper - self.lower) / self.step + 1e-9).floor() as usize + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Option<Vec<f64>> {
        self.len()
            .map(|n| (0..n).map(|k| self.lower + k as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    Intervals(Vec<Interval>),
    Values(Vec<f64>),
    Lattice(Lattice),
}

/// Side knowledge about which values the observable can take.
#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    support: Support,
    description: String,
}

impl Evidence {
    /// Continuous support on a union of ordered, disjoint intervals.
    pub fn intervals(mut intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidEvidence("no intervals given".into()));
        }
        for iv in &mut intervals {
            if iv.lower.is_nan() || iv.upper.is_nan() {
                return Err(Error::InvalidEvidence("interval endpoint is NaN".into()));
            }
            if iv.lower == f64::NEG_INFINITY {
                iv.lower_open = true;
            }
            if iv.upper == f64::INFINITY {
                iv.upper_open = true;
            }
            if iv.is_empty() || iv.lower == f64::INFINITY || iv.upper == f64::NEG_INFINITY {
                return Err(Error::InvalidEvidence(format!(
                    "interval [{}, {}] contains no values",
                    iv.lower, iv.upper
                )));
            }
        }
        for w in intervals.windows(2) {
            let (a, b) = (w[0], w[1]);
            let touching_shared_point = a.upper == b.lower && !a.upper_open && !b.lower_open;
            if a.upper > b.lower || touching_shared_point {
                return Err(Error::InvalidEvidence("intervals must be ordered and disjoint".into()));
            }
        }
        Ok(Self {
            support: Support::Intervals(intervals),
            description: String::new(),
        })
    }

    pub fn interval(interval: Interval) -> Result<Self> {
        Self::intervals(vec![interval])
    }

    /// `[lower, ∞)`.
    pub fn at_least(lower: f64) -> Result<Self> {
        Self::interval(Interval::at_least(lower))
    }

    pub fn real_line() -> Self {
        Self::interval(Interval::real_line()).expect("valid interval")
    }

    /// Discrete support on an explicit finite set.
    pub fn values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidEvidence("no possible values given".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidEvidence("possible values must be finite".into()));
        }
        values.sort_by(|a, b| a.total_cmp(b));
        values.dedup();
        Ok(Self {
            support: Support::Values(values),
            description: String::new(),
        })
    }

    /// Discrete support on a lattice; `upper` may be `+∞`.
    pub fn lattice(lower: f64, upper: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidEvidence(format!("lattice step must be positive, got {step}")));
        }
        if !lower.is_finite() || upper.is_nan() || upper < lower {
            return Err(Error::InvalidEvidence(format!(
                "lattice bounds must satisfy finite lower ≤ upper, got ({lower}, {upper})"
            )));
        }
        Ok(Self {
            support: Support::Lattice(Lattice { lower, upper, step }),
            description: String::new(),
        })
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn kind(&self) -> EvidenceKind {
        match self.support {
            Support::Intervals(_) => EvidenceKind::ContinuousSupport,
            Support::Values(_) | Support::Lattice(_) => EvidenceKind::DiscreteSupport,
        }
    }

    pub fn contains(&self, y: f64) -> bool {
        match &self.support {
            Support::Intervals(ivs) => ivs.iter().any(|iv| iv.contains(y)),
            Support::Values(vs) => vs.binary_search_by(|v| v.total_cmp(&y)).is_ok(),
            Support::Lattice(l) => l.contains(y),
        }
    }

    /// All possible values when there are finitely many.
    pub fn enumerate(&self) -> Result<Vec<f64>> {
        match &self.support {
            Support::Values(vs) => Ok(vs.clone()),
            Support::Lattice(l) => l
                .points()
                .ok_or_else(|| Error::InfiniteSupport("lattice is unbounded".into())),
            Support::Intervals(_) => Err(Error::InfiniteSupport("evidence has continuous support".into())),
        }
    }
}

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        v.to_string()
    }
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.support {
            Support::Intervals(ivs) => {
                let parts: Vec<String> = ivs
                    .iter()
                    .map(|iv| {
                        format!(
                            "{}{},{}{}",
                            if iv.lower_open { '(' } else { '[' },
                            fmt_bound(iv.lower),
                            fmt_bound(iv.upper),
                            if iv.upper_open { ')' } else { ']' }
                        )
                    })
                    .collect();
                write!(f, "{}", parts.join(" U "))
            }
            Support::Values(vs) => {
                let parts: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                write!(f, "{{{}}}", parts.join(","))
            }
            Support::Lattice(l) => write!(f, "lattice({},{},{})", l.lower, fmt_bound(l.upper), l.step),
        }
    }
}

fn parse_bound(s: &str) -> Result<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" | "∞" | "+∞" => Ok(f64::INFINITY),
        "-inf" | "-infinity" | "-∞" | "−inf" | "−∞" => Ok(f64::NEG_INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|_| Error::InvalidEvidence(format!("cannot parse bound '{s}'"))),
    }
}

/// Parses `"[0,inf)"`, `"(0,4)"`, `"[0,1] U [2,3]"`, `"{1,2,3}"` or
/// `"lattice(0,inf,0.1)"`.
impl FromStr for Evidence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let text = s.trim();
        if let Some(rest) = text.strip_prefix("lattice") {
            let inner = rest
                .trim()
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| Error::InvalidEvidence(format!("malformed lattice '{s}'")))?;
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::InvalidEvidence("lattice needs (lower, upper, step)".into()));
            }
            return Self::lattice(parse_bound(parts[0])?, parse_bound(parts[1])?, parse_bound(parts[2])?);
        }
        if let Some(inner) = text.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
            let values = inner
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(parse_bound)
                .collect::<Result<Vec<_>>>()?;
            return Self::values(values);
        }
        let mut intervals = Vec::new();
        for piece in text.split(['U', '∪', ';']) {
            let piece = piece.trim();
            let mut chars = piece.chars();
            let open_left = match chars.next() {
                Some('[') => false,
                Some('(') => true,
                _ => return Err(Error::InvalidEvidence(format!("malformed interval '{piece}'"))),
            };
            let open_right = match chars.next_back() {
                Some(']') => false,
                Some(')') => true,
                _ => return Err(Error::InvalidEvidence(format!("malformed interval '{piece}'"))),
            };
            let inner = chars.as_str();
            let (a, b) = inner
                .split_once(',')
                .ok_or_else(|| Error::InvalidEvidence(format!("malformed interval '{piece}'")))?;
            intervals.push(Interval {
                lower: parse_bound(a)?,
                upper: parse_bound(b)?,
                lower_open: open_left,
                upper_open: open_right,
            });
        }
        Self::intervals(intervals)
    }
}

// --- JSON form -------------------------------------------------------------
//
// {"kind": "continuous_support", "intervals": [[0, "inf"]]}
// {"kind": "discrete_support", "lattice": {"lower": 0, "upper": "inf", "step": 0.1}}
// {"kind": "discrete_support", "values": [1, 2, 3]}
//
// Infinite bounds are written as the strings "inf"/"-inf"; `null` is read as
// the infinite bound on whichever side it appears.

pub(crate) fn serialize_bound<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&fmt_bound(*v))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawBound {
    Num(f64),
    Text(String),
    Null(()),
}

impl RawBound {
    fn resolve(self, missing: f64) -> std::result::Result<f64, String> {
        match self {
            RawBound::Num(v) => Ok(v),
            RawBound::Text(t) => parse_bound(&t).map_err(|e| e.to_string()),
            RawBound::Null(()) => Ok(missing),
        }
    }
}

pub(crate) fn deserialize_lower<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    RawBound::deserialize(d)?
        .resolve(f64::NEG_INFINITY)
        .map_err(serde::de::Error::custom)
}

fn deserialize_upper<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    RawBound::deserialize(d)?
        .resolve(f64::INFINITY)
        .map_err(serde::de::Error::custom)
}

struct Bound(f64);

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_bound(&self.0, s)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawInterval {
    Pair(RawBound, RawBound),
    Full {
        lower: RawBound,
        upper: RawBound,
        #[serde(default)]
        lower_open: bool,
        #[serde(default)]
        upper_open: bool,
    },
}

#[derive(Serialize)]
#[serde(untagged)]
enum IntervalOut {
    Pair(Bound, Bound),
    Full {
        lower: Bound,
        upper: Bound,
        lower_open: bool,
        upper_open: bool,
    },
}

#[derive(Serialize, Deserialize)]
struct EvidenceJson<I, L> {
    kind: EvidenceKind,
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    intervals: Option<Vec<I>>,
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    lattice: Option<L>,
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    description: String,
}

impl Serialize for Evidence {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut out: EvidenceJson<IntervalOut, Lattice> = EvidenceJson {
            kind: self.kind(),
            intervals: None,
            lattice: None,
            values: None,
            description: self.description.clone(),
        };
        match &self.support {
            Support::Intervals(ivs) => {
                out.intervals = Some(
                    ivs.iter()
                        .map(|iv| {
                            // infinite endpoints are always open
                            let closed =
                                iv.lower_open == iv.lower.is_infinite() && iv.upper_open == iv.upper.is_infinite();
                            if closed {
                                IntervalOut::Pair(Bound(iv.lower), Bound(iv.upper))
                            } else {
                                IntervalOut::Full {
                                    lower: Bound(iv.lower),
                                    upper: Bound(iv.upper),
                                    lower_open: iv.lower_open,
                                    upper_open: iv.upper_open,
                                }
                            }
                        })
                        .collect(),
                )
            }
            Support::Values(vs) => out.values = Some(vs.clone()),
            Support::Lattice(l) => out.lattice = Some(*l),
        }
        out.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Evidence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw: EvidenceJson<RawInterval, Lattice> = EvidenceJson::deserialize(d)?;
        let evidence = match (raw.kind, raw.intervals, raw.lattice, raw.values) {
            (EvidenceKind::ContinuousSupport, Some(ivs), None, None) => {
                let intervals = ivs
                    .into_iter()
                    .map(|iv| {
                        let (lower, upper, lower_open, upper_open) = match iv {
                            RawInterval::Pair(a, b) => (a, b, false, false),
                            RawInterval::Full {
                                lower,
                                upper,
                                lower_open,
                                upper_open,
                            } => (lower, upper, lower_open, upper_open),
                        };
                        Ok(Interval {
                            lower: lower.resolve(f64::NEG_INFINITY)?,
                            upper: upper.resolve(f64::INFINITY)?,
                            lower_open,
                            upper_open,
                        })
                    })
                    .collect::<std::result::Result<Vec<_>, String>>()
                    .map_err(D::Error::custom)?;
                Evidence::intervals(intervals)
            }
            (EvidenceKind::DiscreteSupport, None, Some(l), None) => Evidence::lattice(l.lower, l.upper, l.step),
            (EvidenceKind::DiscreteSupport, None, None, Some(vs)) => Evidence::values(vs),
            _ => Err(Error::InvalidEvidence(
                "continuous_support needs \"intervals\"; discrete_support needs \"lattice\" or \"values\"".into(),
            )),
        };
        evidence
            .map(|e| e.with_description(raw.description))
            .map_err(D::Error::custom)
    }
}

// --- leakage ---------------------------------------------------------------

/// Leakage of one predictive with respect to one piece of evidence.
///
/// `below_mass`/`above_mass` are filled only for single-interval evidence;
/// otherwise `outside_mass_other` carries the whole leakage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageReport {
    pub leakage: f64,
    pub below_mass: f64,
    pub above_mass: f64,
    pub outside_mass_other: f64,
    pub evidence: Evidence,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_star: Option<CovariatePoint>,
    /// Set when a continuous predictive meets discrete evidence, which
    /// forces leakage to exactly 1.
    pub complete: bool,
}

/// Mass a discrete predictive puts on atoms failing `inside`.
fn discrete_outside_mass<F: Fn(f64) -> bool + Copy>(dist: &PredictiveDistribution, inside: F) -> f64 {
    match dist {
        PredictiveDistribution::Poisson(p) => {
            let mut total = 0.0;
            let mut k = 0.0;
            let top = p.effective_upper();
            while k <= top {
                if !inside(k) {
                    total += p.pmf(k);
                }
                k += 1.0;
            }
            total
        }
        PredictiveDistribution::Empirical(e) => {
            let outside = e.observations().iter().filter(|&&v| !inside(v)).count();
            outside as f64 / e.len() as f64
        }
        PredictiveDistribution::Mixture(m) => m
            .components()
            .iter()
            .map(|c| c.weight * discrete_outside_mass(&c.dist, inside))
            .sum(),
        _ => unreachable!("continuous distribution passed to discrete leakage"),
    }
}

/// Probability leakage of `dist` with respect to `evidence`.
pub fn leakage(dist: &PredictiveDistribution, evidence: &Evidence) -> LeakageReport {
    let mut report = LeakageReport {
        leakage: 0.0,
        below_mass: 0.0,
        above_mass: 0.0,
        outside_mass_other: 0.0,
        evidence: evidence.clone(),
        x_star: None,
        complete: false,
    };
    match (dist.kind(), &evidence.support) {
        (Kind::Continuous, Support::Values(_) | Support::Lattice(_)) => {
            report.outside_mass_other = 1.0;
            report.leakage = 1.0;
            report.complete = true;
            return report;
        }
        (_, Support::Intervals(ivs)) if ivs.len() == 1 => {
            report.below_mass = ivs[0].mass_below(dist);
            report.above_mass = ivs[0].mass_above(dist);
        }
        (_, Support::Intervals(ivs)) => {
            let first = ivs[0].mass_below(dist);
            let last = ivs[ivs.len() - 1].mass_above(dist);
            let gaps: f64 = ivs
                .windows(2)
                .map(|w| {
                    // mass strictly between the two intervals
                    let upto_next = w[1].mass_below(dist);
                    let upto_prev = 1.0 - w[0].mass_above(dist);
                    (upto_next - upto_prev).max(0.0)
                })
                .sum();
            report.outside_mass_other = first + gaps + last;
        }
        (Kind::Discrete, Support::Values(_) | Support::Lattice(_)) => {
            report.outside_mass_other = discrete_outside_mass(dist, |y| evidence.contains(y));
        }
    }
    let total = report.below_mass + report.above_mass + report.outside_mass_other;
    report.leakage = total.clamp(0.0, 1.0);
    report
}

/// Leakage of the fitted model's predictive at each grid point, in order.
pub fn leakage_profile(fit: &FitResult, evidence: &Evidence, grid: &[CovariatePoint]) -> Result<Vec<LeakageReport>> {
    grid.iter()
        .enumerate()
        .map(|(index, point)| {
            let dist = fit.predictive_at_point(point).map_err(|e| Error::GridPoint {
                index,
                source: Box::new(e),
            })?;
            let mut report = leakage(&dist, evidence);
            report.x_star = Some(point.clone());
            Ok(report)
        })
        .collect()
}

/// Monte Carlo leakage estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub n: usize,
    pub seed: u64,
}

pub const MC_MIN_DRAWS: usize = 10_000;

/// Fraction of seeded predictive draws falling outside the evidence.
pub fn mc_leakage(dist: &PredictiveDistribution, evidence: &Evidence, n: usize, seed: u64) -> Result<McEstimate> {
    if n < MC_MIN_DRAWS {
        return Err(Error::InvalidParameter(format!(
            "Monte Carlo leakage needs at least {MC_MIN_DRAWS} draws, got {n}"
        )));
    }
    let outside = dist
        .sample(n, seed)
        .into_iter()
        .filter(|&y| !evidence.contains(y))
        .count();
    let estimate = outside as f64 / n as f64;
    Ok(McEstimate {
        estimate,
        standard_error: (estimate * (1.0 - estimate) / n as f64).sqrt(),
        n,
        seed,
    })
}
