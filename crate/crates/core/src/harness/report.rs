use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::EpsilonMetrics;
use crate::error::{Error, Result};

/// Least-squares line through `(log ε, log value)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points: usize,
}

impl RateFit {
    pub fn predict(&self, epsilon: f64) -> f64 {
        (self.intercept + self.slope * epsilon.ln()).exp()
    }
}

pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 3 {
        return Err(Error::TooFewPoints(pairs.len()));
    }
    if let Some(&(epsilon, value)) = pairs.iter().find(|(e, v)| !(*e > 0.0 && *v > 0.0 && v.is_finite())) {
        return Err(Error::NonPositiveValue { epsilon, value });
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Config("rate fit needs distinct epsilons".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(RateFit {
        slope,
        intercept,
        r2,
        residual: (ss_res / n).sqrt(),
        points: pairs.len(),
    })
}

/// One ε-run of a sweep: metrics on success, the error text otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub epsilon: f64,
    pub metrics: Option<EpsilonMetrics>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricFit {
    pub metric: String,
    pub fit: Option<RateFit>,
    pub error: Option<String>,
    /// Required lower bound on the slope, if the metric has one.
    pub band: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub runs: Vec<RunOutcome>,
    pub fits: Vec<MetricFit>,
    /// `‖DU_ε‖(ε_{k+1})/‖DU_ε‖(ε_k)` divided by `(ε_k/ε_{k+1})^{1/2}`; 1 means the `ε^{-1/2}` law.
    pub gradient_ratios: Vec<f64>,
    /// `‖u - U_ε‖_{H¹_ε}/ε` per successful run.
    pub h1_over_eps: Vec<f64>,
}

impl SweepReport {
    pub fn successes(&self) -> impl Iterator<Item = &EpsilonMetrics> {
        self.runs.iter().filter_map(|r| r.metrics.as_ref())
    }

    pub fn fit(&self, metric: &str) -> Option<&MetricFit> {
        self.fits.iter().find(|f| f.metric == metric)
    }
}

/// Writes `sweep.csv`, `fits.csv`, `summary.json` and `plot_<metric>.svg`.
///
/// Output bytes depend only on the report. An empty report is an error and
/// leaves `dir` untouched.
pub fn emit_report(report: &SweepReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let ok: Vec<&EpsilonMetrics> = report.successes().collect();
    if ok.is_empty() {
        return Err(Error::EmptyReport(if report.runs.is_empty() {
            "sweep has no runs".into()
        } else {
            "every run failed".into()
        }));
    }
    std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let mut written = Vec::new();

    let path = dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path).map_err(Error::csv(&path))?;
    let names: Vec<&str> = ok[0].named().into_iter().map(|(n, _)| n).collect();
    let mut header = vec!["epsilon"];
    header.extend(&names);
    w.write_record(&header).map_err(Error::csv(&path))?;
    for m in &ok {
        let mut row = vec![format!("{:e}", m.epsilon)];
        row.extend(m.named().into_iter().map(|(_, v)| format!("{v:e}")));
        w.write_record(&row).map_err(Error::csv(&path))?;
    }
    w.flush().map_err(Error::io(&path))?;
    written.push(path);

    let path = dir.join("fits.csv");
    let mut w = csv::Writer::from_path(&path).map_err(Error::csv(&path))?;
    w.write_record([
        "metric",
        "slope",
        "intercept",
        "r2",
        "residual",
        "points",
        "band",
        "pass",
        "error",
    ])
    .map_err(Error::csv(&path))?;
    for f in &report.fits {
        let fit = f.fit.map_or_else(
            || vec![String::new(); 5],
            |r| {
                vec![
                    format!("{:e}", r.slope),
                    format!("{:e}", r.intercept),
                    format!("{:e}", r.r2),
                    format!("{:e}", r.residual),
                    r.points.to_string(),
                ]
            },
        );
        let mut row = vec![f.metric.clone()];
        row.extend(fit);
        row.push(f.band.map_or(String::new(), |b| format!("{b}")));
        row.push(f.pass.map_or(String::new(), |p| p.to_string()));
        row.push(f.error.clone().unwrap_or_default());
        w.write_record(&row).map_err(Error::csv(&path))?;
    }
    w.flush().map_err(Error::io(&path))?;
    written.push(path);

    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(report).map_err(Error::json(&path))?;
    std::fs::write(&path, text + "\n").map_err(Error::io(&path))?;
    written.push(path);

    for f in &report.fits {
        let points: Vec<(f64, f64)> = ok
            .iter()
            .filter_map(|m| m.get(&f.metric).map(|v| (m.epsilon, v)))
            .filter(|(_, v)| *v > 0.0 && v.is_finite())
            .collect();
        if points.is_empty() {
            continue;
        }
        let path = dir.join(format!("plot_{}.svg", f.metric));
        std::fs::write(&path, plot_svg(&f.metric, &points, f.fit.as_ref())).map_err(Error::io(&path))?;
        written.push(path);
    }
    Ok(written)
}

pub fn load_report(path: &Path) -> Result<SweepReport> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    serde_json::from_str(&text).map_err(Error::json(path))
}

/// Axis ranges in log10 space: the data range widened by 10% on each side
/// (or ±0.1 decades when all points coincide).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlotBounds {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

pub fn plot_bounds(points: &[(f64, f64)]) -> PlotBounds {
    let range = |vals: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let pad = if hi > lo { 0.1 * (hi - lo) } else { 0.1 };
        [lo - pad, hi + pad]
    };
    PlotBounds {
        x: range(&mut points.iter().map(|p| p.0.log10())),
        y: range(&mut points.iter().map(|p| p.1.log10())),
    }
}

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 60.0;

fn plot_svg(metric: &str, points: &[(f64, f64)], fit: Option<&RateFit>) -> String {
    let b = plot_bounds(points);
    let px = |x: f64| MARGIN + (x.log10() - b.x[0]) / (b.x[1] - b.x[0]) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y.log10() - b.y[0]) / (b.y[1] - b.y[0]) * (HEIGHT - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="30" text-anchor="middle" font-family="sans-serif" font-size="14">{metric}</text>"#,
        WIDTH / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="12">log10 eps [{:.3}, {:.3}]</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0,
        b.x[0],
        b.x[1]
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" font-family="sans-serif" font-size="12" transform="rotate(-90 15 {:.2})">log10 value [{:.3}, {:.3}]</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        b.y[0],
        b.y[1]
    );
    if let Some(f) = fit {
        let e0 = 10f64.powf(b.x[0]);
        let e1 = 10f64.powf(b.x[1]);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="steelblue" stroke-dasharray="4 3"/>"#,
            px(e0),
            py(f.predict(e0)),
            px(e1),
            py(f.predict(e1))
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">slope {:.3}, R2 {:.4}</text>"#,
            MARGIN + 8.0,
            MARGIN + 18.0,
            f.slope,
            f.r2
        );
    }
    for &(e, v) in points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="firebrick"/>"#,
            px(e),
            py(v)
        );
    }
    s.push_str("</svg>\n");
    s
}
