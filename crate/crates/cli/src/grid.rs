//! Covariate grids written as `name=start:stop:step;other=a,b,c`.

use leakage_core::regression::{CovariatePoint, CovariateValue};

use crate::{CliError, CliResult};

fn parse_axis(name: &str, body: &str) -> CliResult<Vec<CovariateValue>> {
    let bad = |what: &str| CliError::Usage(format!("grid axis '{name}': {what}"));
    if body.contains(':') {
        let parts: Vec<f64> = body
            .split(':')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("range bounds must be numbers"))?;
        let [start, stop, step] = parts[..] else {
            return Err(bad("ranges are start:stop:step"));
        };
        if !(start.is_finite() && stop.is_finite() && step > 0.0 && stop >= start) {
            return Err(bad("range needs start <= stop and step > 0"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        if count > 1_000_000 {
            return Err(bad("range has too many points"));
        }
        return Ok((0..=count)
            .map(|k| CovariateValue::Number(start + k as f64 * step))
            .collect());
    }
    let values: Vec<CovariateValue> = body
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<f64>() {
            Ok(v) if v.is_finite() => CovariateValue::Number(v),
            _ => CovariateValue::Level(s.to_owned()),
        })
        .collect();
    if values.is_empty() {
        return Err(bad("no values"));
    }
    Ok(values)
}

/// Cartesian product of the axes, the last axis varying fastest.
pub fn parse_grid(spec: &str) -> CliResult<Vec<CovariatePoint>> {
    let mut points = vec![CovariatePoint::new()];
    let mut seen = Vec::new();
    for axis in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, body) = axis
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("grid axis '{axis}' is not name=values")))?;
        let name = name.trim();
        if seen.contains(&name) {
            return Err(CliError::Usage(format!("grid axis '{name}' given twice")));
        }
        seen.push(name);
        let values = parse_axis(name, body)?;
        points = points
            .into_iter()
            .flat_map(|p| values.iter().map(move |v| p.clone().with(name, v.clone())))
            .collect();
    }
    if seen.is_empty() {
        return Err(CliError::Usage("empty grid".into()));
    }
    Ok(points)
}
