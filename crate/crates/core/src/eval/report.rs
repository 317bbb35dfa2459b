use std::fs;
use std::path::Path;

use serde::Serialize;

use super::grid::GridSearchRecord;
use super::r2::R2Curve;
use super::sigmoid_lab::{AblationReport, LandscapeScan};
use crate::error::{Error, Result};
use crate::systems::fmt_f64;

/// How R² values are rendered in reports.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum R2Format {
    #[default]
    Decimal,
    /// ×1000 and rounded, so 0.972 becomes 972.
    Millesimal,
}

impl R2Format {
    pub fn render(self, v: f64) -> String {
        match self {
            _ if v.is_nan() => "nan".into(),
            _ if v.is_infinite() => if v > 0.0 { "inf".into() } else { "-inf".into() },
            R2Format::Decimal => fmt_f64(v),
            R2Format::Millesimal => format!("{}", (v * 1000.0).round() as i64),
        }
    }

    fn json(self, v: f64) -> serde_json::Value {
        match self {
            _ if !v.is_finite() => serde_json::Value::Null,
            R2Format::Decimal => serde_json::json!(v),
            R2Format::Millesimal => serde_json::json!((v * 1000.0).round() as i64),
        }
    }

    fn json_opt(self, v: Option<f64>) -> serde_json::Value {
        v.map_or(serde_json::Value::Null, |v| self.json(v))
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `r2_curve.csv`: `h, r2, r2_dim_0, ...`. Excluded dimensions are left blank.
pub fn write_r2_curve(path: &Path, curve: &R2Curve, fmt: R2Format) -> Result<()> {
    let mut w = csv_writer(path)?;
    let d = curve.per_dim.first().map_or(0, Vec::len);
    let mut header = vec!["h".to_string(), "r2".to_string()];
    header.extend((0..d).map(|j| format!("r2_dim_{j}")));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (i, (&r, dims)) in curve.r2.iter().zip(&curve.per_dim).enumerate() {
        let mut row = vec![(i + 1).to_string(), fmt.render(r)];
        row.extend(dims.iter().map(|v| v.map_or(String::new(), |v| fmt.render(v))));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// JSON summary of one evaluation.
pub fn eval_summary(curve: &R2Curve, fmt: R2Format) -> serde_json::Value {
    serde_json::json!({
        "horizon": curve.horizon(),
        "r2_bar": fmt.json(curve.r2_bar()),
        "r2_format": match fmt { R2Format::Decimal => "decimal", R2Format::Millesimal => "millesimal" },
        "subtrajectories": curve.counts,
    })
}

/// `gridsearch.csv`: `h, beta, fold, r2bar`, then the h=1 baseline rows.
/// Failed cells have a blank `r2bar`.
pub fn write_gridsearch_csv(path: &Path, rec: &GridSearchRecord, fmt: R2Format) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["h", "beta", "fold", "r2bar"]).map_err(|e| csv_err(path, e))?;
    for c in rec.cells.iter().chain(&rec.baseline) {
        w.write_record([c.h.to_string(), fmt_f64(c.beta), c.fold.to_string(), c.r2bar.map_or(String::new(), |v| fmt.render(v))])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn gridsearch_summary(rec: &GridSearchRecord, fmt: R2Format) -> serde_json::Value {
    let per_beta: Vec<_> = rec
        .per_beta
        .iter()
        .map(|b| serde_json::json!({ "beta": b.beta, "mean": fmt.json_opt(b.mean), "std": fmt.json_opt(b.std), "failed": b.failed }))
        .collect();
    let mean_of = |f: &dyn Fn(&super::grid::GridCell) -> Option<f64>, cells: &mut dyn Iterator<Item = &super::grid::GridCell>| {
        let v: Vec<f64> = cells.filter_map(f).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    serde_json::json!({
        "h": rec.h,
        "folds": rec.folds,
        "eval_h": rec.eval_h,
        "per_beta": per_beta,
        "selected_beta": rec.selected_beta,
        "effective_horizon": rec.effective_horizon,
        "baseline_r2bar": fmt.json_opt(mean_of(&|c| c.r2bar, &mut rec.baseline.iter())),
        "selected_test_r2bar": fmt.json_opt(mean_of(&|c| c.test_r2bar, &mut rec.selected_cells())),
        "baseline_test_r2bar": fmt.json_opt(mean_of(&|c| c.test_r2bar, &mut rec.baseline.iter())),
        "relative_improvement_percent": rec.relative_improvement,
    })
}

/// `landscape.csv` (`alpha, sigma, theta1, theta2, mean_loss`) and
/// `landscape_argmins.csv` (`alpha, sigma, draw, theta1, theta2`).
pub fn write_landscape(dir: &Path, scans: &[(f64, f64, LandscapeScan)]) -> Result<()> {
    let path = dir.join("landscape.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["alpha", "sigma", "theta1", "theta2", "mean_loss"]).map_err(|e| csv_err(&path, e))?;
    for (alpha, sigma, scan) in scans {
        for (i, a) in scan.theta1.iter().enumerate() {
            for (j, b) in scan.theta2.iter().enumerate() {
                let v = scan.mean_loss[i * scan.theta2.len() + j];
                w.write_record([fmt_f64(*alpha), fmt_f64(*sigma), fmt_f64(*a), fmt_f64(*b), fmt_f64(v)]).map_err(|e| csv_err(&path, e))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    let path = dir.join("landscape_argmins.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["alpha", "sigma", "draw", "theta1", "theta2"]).map_err(|e| csv_err(&path, e))?;
    for (alpha, sigma, scan) in scans {
        for (d, (a, b)) in scan.argmins.iter().enumerate() {
            w.write_record([fmt_f64(*alpha), fmt_f64(*sigma), d.to_string(), fmt_f64(*a), fmt_f64(*b)]).map_err(|e| csv_err(&path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

/// `ablation_runs.csv` with one row per training run and `ablation.csv` with
/// the per-α means and 95% bootstrap intervals.
pub fn write_ablation(dir: &Path, rep: &AblationReport) -> Result<()> {
    let path = dir.join("ablation_runs.csv");
    let mut w = csv_writer(&path)?;
    w.write_record([
        "alpha", "optimizer", "init", "start", "sigma", "mc", "valid_one_step", "valid_two_step", "valid_average", "param_distance",
    ])
    .map_err(|e| csv_err(&path, e))?;
    for r in &rep.runs {
        w.write_record([
            fmt_f64(r.alpha),
            format!("{:?}", r.optimizer).to_lowercase(),
            format!("{:?}", r.init).to_lowercase(),
            r.start.to_string(),
            fmt_f64(r.sigma),
            r.mc.to_string(),
            fmt_f64(r.valid_one_step),
            fmt_f64(r.valid_two_step),
            fmt_f64(r.valid_average()),
            fmt_f64(r.param_distance),
        ])
        .map_err(|e| csv_err(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    let path = dir.join("ablation.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["alpha", "metric", "value", "ci_lower", "ci_upper", "runs", "diverged"]).map_err(|e| csv_err(&path, e))?;
    for s in &rep.summary {
        for (m, v, ci) in [("one_step", s.one_step, s.one_step_ci), ("two_step", s.two_step, s.two_step_ci), ("average", s.average, s.average_ci)] {
            w.write_record([fmt_f64(s.alpha), m.into(), fmt_f64(v), fmt_f64(ci.lower), fmt_f64(ci.upper), s.runs.to_string(), s.diverged.to_string()])
                .map_err(|e| csv_err(&path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

/// Refuse to overwrite existing outputs unless `force` is set.
pub fn ensure_writable(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(Error::InvalidArgument(format!("{} exists; pass --force to overwrite", path.display())));
    }
    Ok(())
}
