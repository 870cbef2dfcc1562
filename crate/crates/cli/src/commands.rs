use std::fs;
use std::io::Write;
use std::path::Path;

use leakage_core::calibration::{calibration_report, CalibrationOptions, ForecastCase};
use leakage_core::evidence::{leakage, leakage_profile, Evidence, LeakageReport};
use leakage_core::falsification::{is_falsified, Mode, Observation};
use leakage_core::predictive::{seeded_rng, PredictiveDistribution};
use leakage_core::regression::{
    fit_dataset, reference_points, ColumnData, CovariatePoint, CovariateValue, Dataset, FitResult, ModelSpec,
    ReferenceStat,
};
use leakage_core::simulation::{gen_callcenter_like, gen_truncated_regression, CallCenterConfig, SimConfig};
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::document::{
    AuditReportDocument, CalibrationSummary, FalsifyDocument, FitSummary, LeakDocument, LeakageSection, Seeds,
};
use crate::grid::parse_grid;
use crate::{CliError, CliResult, Command, ModeArg, ModelArgs, SimKind, TOOL_VERSION};

/// Tail probability left off each end of the density curve grid.
const CURVE_TAIL: f64 = 1e-6;

pub fn execute(command: Command, out: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Fit { model } => {
            let (_, spec, fit) = fit_model(&model)?;
            emit_json(out, &FitSummary::new(&spec, &fit))
        }
        Command::Leak { model, support, at } => {
            let evidence = parse_support(&support)?;
            let (data, spec, fit) = fit_model(&model)?;
            let points = parse_at(&at, &data, &spec)?;
            let reports = leakage_profile(&fit, &evidence, &points)?;
            emit_json(
                out,
                &LeakDocument {
                    tool_version: TOOL_VERSION.into(),
                    model: FitSummary::new(&spec, &fit),
                    support: evidence,
                    at,
                    reports,
                },
            )
        }
        Command::LeakProfile {
            model,
            support,
            grid,
            out: path,
        } => {
            let evidence = parse_support(&support)?;
            let points = parse_grid(&grid)?;
            let (_, spec, fit) = fit_model(&model)?;
            let reports = leakage_profile(&fit, &evidence, &points)?;
            let text = profile_csv(&spec, &reports)?;
            emit_text(out, path.as_deref(), &text)
        }
        Command::Falsify {
            model,
            observed,
            mode,
            resolution,
        } => {
            let (data, spec, fit) = fit_model(&model)?;
            let new = match observed {
                Some(path) => load(&path)?,
                None => data,
            };
            let mode = match mode {
                ModeArg::Point => Mode::PointEvent,
                ModeArg::Interval => Mode::IntervalEvent,
            };
            emit_json(out, &falsify_rows(&fit, &spec, &new, mode, resolution)?)
        }
        Command::Calibrate {
            model,
            holdout,
            seed,
            out_dir,
        } => calibrate(&model, holdout, seed, out_dir.as_deref(), out),
        Command::Simulate {
            kind,
            config,
            out: path,
            seed,
        } => {
            let data = match kind {
                SimKind::Truncated => {
                    let mut cfg: SimConfig = match &config {
                        Some(p) => read_json(p)?,
                        None => SimConfig::default_truncated(),
                    };
                    if let Some(s) = seed {
                        cfg.seed = s;
                    }
                    gen_truncated_regression(&cfg)?
                }
                SimKind::Callcenter => {
                    let mut cfg: CallCenterConfig = match &config {
                        Some(p) => read_json(p)?,
                        None => CallCenterConfig::default(),
                    };
                    if let Some(s) = seed {
                        cfg.seed = s;
                    }
                    gen_callcenter_like(&cfg)?
                }
            };
            emit_text(out, path.as_deref(), &data.to_csv_string()?)
        }
        Command::Report {
            model,
            support,
            out_curves,
            points,
            seed,
        } => report(&model, &support, out_curves.as_deref(), points, seed, out),
    }
}

fn load(path: &Path) -> CliResult<Dataset> {
    Ok(Dataset::from_csv_path(path)?)
}

fn model_spec(args: &ModelArgs) -> ModelSpec {
    let spec = ModelSpec::new(args.response.clone(), args.covariates.iter().filter(|c| !c.is_empty()).cloned());
    if args.no_intercept {
        spec.without_intercept()
    } else {
        spec
    }
}

fn fit_model(args: &ModelArgs) -> CliResult<(Dataset, ModelSpec, FitResult)> {
    let data = load(&args.data)?;
    let spec = model_spec(args);
    let fit = fit_dataset(&data, &spec)?;
    Ok((data, spec, fit))
}

fn parse_support(text: &str) -> CliResult<Evidence> {
    text.parse()
        .map_err(|e| CliError::Usage(format!("--support '{text}': {e}")))
}

fn parse_at(at: &str, data: &Dataset, spec: &ModelSpec) -> CliResult<Vec<CovariatePoint>> {
    match at.trim() {
        "medians" => Ok(reference_points(data, spec, ReferenceStat::Median)?),
        "minima" => Ok(reference_points(data, spec, ReferenceStat::Minimum)?),
        s if s.starts_with('[') => {
            serde_json::from_str(s).map_err(|e| CliError::Usage(format!("--at: {e}")))
        }
        s => serde_json::from_str::<CovariatePoint>(s)
            .map(|p| vec![p])
            .map_err(|e| CliError::Usage(format!("--at must be medians, minima or a JSON point: {e}"))),
    }
}

/// Covariate values of one row.
fn row_point(data: &Dataset, spec: &ModelSpec, row: usize) -> CliResult<CovariatePoint> {
    let mut point = CovariatePoint::new();
    for name in &spec.covariates {
        let value = match &data.column(name)?.data {
            ColumnData::Numeric(v) => CovariateValue::Number(v[row]),
            ColumnData::Categorical(v) => CovariateValue::Level(v[row].clone()),
        };
        point.insert(name.clone(), value);
    }
    Ok(point)
}

fn cases_for(fit: &FitResult, spec: &ModelSpec, data: &Dataset) -> CliResult<Vec<ForecastCase>> {
    let ys = data.numeric(&spec.response)?;
    (0..data.n_rows())
        .map(|i| {
            let d = fit.predictive_at_point(&row_point(data, spec, i)?)?;
            Ok(ForecastCase::new(d, ys[i])?)
        })
        .collect()
}

fn falsify_rows(
    fit: &FitResult,
    spec: &ModelSpec,
    data: &Dataset,
    mode: Mode,
    resolution: Option<f64>,
) -> CliResult<FalsifyDocument> {
    let mut doc = FalsifyDocument {
        tool_version: TOOL_VERSION.into(),
        mode,
        resolution,
        n_observations: data.n_rows(),
        falsified: false,
        witness_row: None,
        witness: None,
    };
    if mode == Mode::IntervalEvent && resolution.is_none() {
        return Err(CliError::Usage("--mode interval needs --resolution".into()));
    }
    for (i, case) in cases_for(fit, spec, data)?.into_iter().enumerate() {
        let obs = match resolution {
            Some(r) => Observation::with_resolution(case.observed, r)?,
            None => Observation::new(case.observed),
        };
        let verdict = is_falsified(&case.predictive, &[obs], mode)?;
        if verdict.falsified {
            doc.falsified = true;
            doc.witness_row = Some(i);
            doc.witness = verdict.witness;
            break;
        }
    }
    Ok(doc)
}

fn calibrate(
    args: &ModelArgs,
    holdout: f64,
    seed: u64,
    out_dir: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<()> {
    if !(holdout > 0.0 && holdout < 1.0) {
        return Err(CliError::Usage(format!("--holdout must lie in (0, 1), got {holdout}")));
    }
    let data = load(&args.data)?;
    let spec = model_spec(args);
    let n = data.n_rows();
    let n_hold = ((holdout * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded_rng(seed));
    let (hold_rows, train_rows) = order.split_at(n_hold);
    let mut train_rows = train_rows.to_vec();
    let mut hold_rows = hold_rows.to_vec();
    train_rows.sort_unstable();
    hold_rows.sort_unstable();

    let fit = fit_dataset(&data.select_rows(&train_rows), &spec)?;
    let cases = cases_for(&fit, &spec, &data.select_rows(&hold_rows))?;
    let report = calibration_report(
        &cases,
        &CalibrationOptions {
            seed,
            ..CalibrationOptions::default()
        },
    )?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_owned(),
            source,
        })?;
        write_file(&dir.join("calibration.json"), &(serde_json::to_string_pretty(&report)? + "\n"))?;
        write_file(&dir.join("probability.csv"), &report.probability_csv()?)?;
        write_file(&dir.join("exceedance.csv"), &report.exceedance_csv()?)?;
        write_file(&dir.join("marginal.csv"), &report.marginal_csv()?)?;
    }
    emit_json(out, &report)
}

fn report(
    args: &ModelArgs,
    support: &str,
    out_curves: Option<&Path>,
    points: usize,
    seed: u64,
    out: &mut dyn Write,
) -> CliResult<()> {
    if points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let evidence = parse_support(support)?;
    let (data, spec, fit) = fit_model(args)?;
    let null = fit_dataset(&data, &ModelSpec::null(spec.response.clone()))?;
    let null_dist = null.predictive_at(&[1.0])?;

    let medians = reference_points(&data, &spec, ReferenceStat::Median)?;
    let minima = reference_points(&data, &spec, ReferenceStat::Minimum)?;
    let at_medians = leakage_profile(&fit, &evidence, &medians)?;
    let at_minima = leakage_profile(&fit, &evidence, &minima)?;
    let mut null_report = leakage(&null_dist, &evidence);
    null_report.x_star = Some(CovariatePoint::new());

    let cases = cases_for(&fit, &spec, &data)?;
    let calibration = calibration_report(
        &cases,
        &CalibrationOptions {
            seed,
            ..CalibrationOptions::default()
        },
    )?;
    let falsification = falsify_rows(&fit, &spec, &data, Mode::PointEvent, None)?;

    if let Some(path) = out_curves {
        let mut curves = vec![("density_null".to_owned(), null_dist)];
        for p in &medians {
            curves.push((curve_name(p, &spec, &data), fit.predictive_at_point(p)?));
        }
        write_file(path, &density_csv(&curves, &evidence, points)?)?;
    }

    emit_json(
        out,
        &AuditReportDocument {
            tool_version: TOOL_VERSION.into(),
            seeds: Seeds { calibration: seed },
            model: FitSummary::new(&spec, &fit),
            support: evidence,
            leakage: LeakageSection {
                medians: at_medians,
                minima: at_minima,
                null_model: null_report,
            },
            falsification,
            calibration: CalibrationSummary {
                n: calibration.n,
                max_probability_deviation: calibration.max_probability_deviation,
                max_marginal_gap: calibration.max_marginal_gap,
                mean_crps: calibration.mean_crps,
                falsified: calibration.falsification.falsified,
            },
        },
    )
}

/// `density_<levels>` for points that differ by categorical level,
/// otherwise `density_fit`.
fn curve_name(point: &CovariatePoint, spec: &ModelSpec, data: &Dataset) -> String {
    let levels: Vec<&str> = spec
        .covariates
        .iter()
        .filter(|c| data.column(c).is_ok_and(|col| col.levels().is_some()))
        .filter_map(|c| match point.get(c) {
            Some(CovariateValue::Level(l)) => Some(l.as_str()),
            _ => None,
        })
        .collect();
    if levels.is_empty() {
        "density_fit".into()
    } else {
        format!("density_{}", levels.join("_"))
    }
}

/// Densities on an even grid spanning every curve's central
/// `1 − 2·CURVE_TAIL` mass, with the finite support bounds inserted as
/// marker rows.
fn density_csv(curves: &[(String, PredictiveDistribution)], evidence: &Evidence, points: usize) -> CliResult<String> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, d) in curves {
        lo = lo.min(d.quantile(CURVE_TAIL)?);
        hi = hi.max(d.quantile(1.0 - CURVE_TAIL)?);
    }
    let step = (hi - lo) / (points - 1) as f64;
    let mut ys: Vec<(f64, bool)> = (0..points).map(|k| (lo + k as f64 * step, false)).collect();
    for b in support_bounds(evidence) {
        if b > lo && b < hi {
            match ys.iter_mut().find(|(y, _)| *y == b) {
                Some(row) => row.1 = true,
                None => ys.push((b, true)),
            }
        }
    }
    ys.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut header = vec!["y".to_owned()];
    header.extend(curves.iter().map(|(name, _)| name.clone()));
    header.push("marker".into());
    let mut text = header.join(",") + "\n";
    for (y, marker) in ys {
        let mut row = vec![y.to_string()];
        row.extend(curves.iter().map(|(_, d)| d.density(y).to_string()));
        row.push(if marker { "support_bound".into() } else { String::new() });
        text.push_str(&row.join(","));
        text.push('\n');
    }
    Ok(text)
}

fn support_bounds(evidence: &Evidence) -> Vec<f64> {
    use leakage_core::evidence::Support;
    let mut bounds = Vec::new();
    match evidence.support() {
        Support::Intervals(list) => {
            for i in list {
                bounds.push(i.lower);
                bounds.push(i.upper);
            }
        }
        Support::Values(v) => bounds.extend(v.first().into_iter().chain(v.last())),
        Support::Lattice(l) => bounds.extend([l.lower, l.upper]),
    }
    bounds.retain(|b| b.is_finite());
    bounds.dedup();
    bounds
}

fn profile_csv(spec: &ModelSpec, reports: &[LeakageReport]) -> CliResult<String> {
    let mut names: Vec<String> = spec.covariates.clone();
    for r in reports {
        for (k, _) in r.x_star.iter().flat_map(|p| p.iter()) {
            if !names.contains(k) {
                names.push(k.clone());
            }
        }
    }
    let mut text = names.join(",");
    text.push_str(if names.is_empty() { "" } else { "," });
    text.push_str("leakage,below_mass,above_mass\n");
    for r in reports {
        let mut row: Vec<String> = names
            .iter()
            .map(|n| match r.x_star.as_ref().and_then(|p| p.get(n)) {
                Some(CovariateValue::Number(v)) => v.to_string(),
                Some(CovariateValue::Level(l)) => l.clone(),
                None => String::new(),
            })
            .collect();
        row.extend([r.leakage, r.below_mass, r.above_mass].map(|v| v.to_string()));
        text.push_str(&row.join(","));
        text.push('\n');
    }
    Ok(text)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn io_out(e: std::io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)?;
    writeln!(out, "{text}").map_err(io_out)
}

fn emit_text(out: &mut dyn Write, path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, text),
        None => out.write_all(text.as_bytes()).map_err(io_out),
    }
}
