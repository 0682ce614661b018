//! Run reports and their JSON, CSV and SVG renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use traction_core::solvers::FhOptions;

use crate::config::{Scenario, Tolerances};
use crate::error::{ExperimentError, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 6] = ["scenario", "h", "metric", "value", "tolerance", "status"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Logged value with no claim attached.
    Info,
}

impl Status {
    pub fn from_check(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Info => "info",
        }
    }
}

/// One reported number. Claims carry the tolerance they were checked against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub h: Option<f64>,
    pub metric: String,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub core_version: String,
    pub experiments_version: String,
    pub tolerances: Tolerances,
    pub solver: FhOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub steps: Vec<Record>,
    pub verdicts: BTreeMap<String, String>,
    pub provenance: Provenance,
}

impl Report {
    pub fn new(scenario: &Scenario) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.clone(),
            steps: Vec::new(),
            verdicts: BTreeMap::new(),
            provenance: Provenance {
                core_version: traction_core::VERSION.to_string(),
                experiments_version: env!("CARGO_PKG_VERSION").to_string(),
                tolerances: scenario.tolerances,
                solver: FhOptions::default(),
            },
        }
    }

    pub fn info(&mut self, h: Option<f64>, metric: &str, value: f64) {
        self.steps.push(Record {
            h,
            metric: metric.into(),
            value,
            tolerance: None,
            status: Status::Info,
        });
    }

    /// Records `value` as a claim that passed or failed against `tolerance`.
    pub fn check(&mut self, h: Option<f64>, metric: &str, value: f64, tolerance: f64, ok: bool) -> bool {
        self.steps.push(Record {
            h,
            metric: metric.into(),
            value,
            tolerance: Some(tolerance),
            status: Status::from_check(ok),
        });
        ok
    }

    pub fn verdict(&mut self, key: &str, value: impl Into<String>) {
        self.verdicts.insert(key.into(), value.into());
    }

    pub fn passed(&self) -> bool {
        self.steps.iter().all(|r| r.status != Status::Fail)
    }

    pub fn failures(&self) -> Vec<&Record> {
        self.steps.iter().filter(|r| r.status == Status::Fail).collect()
    }

    pub fn metric(&self, name: &str) -> Vec<&Record> {
        self.steps.iter().filter(|r| r.metric == name).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format '{other}' (expected json, csv or svg)")),
        }
    }
}

pub fn to_json(r: &Report) -> Result<String> {
    serde_json::to_string_pretty(r).map_err(|e| ExperimentError::Serialize(e.to_string()))
}

pub fn to_csv(r: &Report) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| ExperimentError::Serialize(e.to_string());
    w.write_record(CSV_HEADER).map_err(ser)?;
    for rec in &r.steps {
        w.write_record([
            r.scenario.name.clone(),
            rec.h.map(|h| format!("{h:e}")).unwrap_or_default(),
            rec.metric.clone(),
            format!("{:e}", rec.value),
            rec.tolerance.map(|t| format!("{t:e}")).unwrap_or_default(),
            rec.status.label().to_string(),
        ])
        .map_err(ser)?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| ExperimentError::Serialize(e.to_string()))
}

type Series<'a> = (&'a str, &'a str, Vec<(f64, f64)>);

const PLOT_SERIES: [(&str, &str); 2] = [("energy_gap", "#1f77b4"), ("sqrt_h_gradient", "#d62728")];

/// Log-log plot of `|F_h − min E|` and `‖√h∇w_h‖` against `h`.
pub fn to_svg(r: &Report) -> String {
    let (width, height, margin) = (640.0, 420.0, 60.0);
    let series: Vec<Series> = PLOT_SERIES
        .iter()
        .map(|(name, color)| {
            let pts = r
                .metric(name)
                .iter()
                .filter_map(|rec| match rec.h {
                    Some(h) if h > 0.0 && rec.value > 0.0 => Some((h.log10(), rec.value.log10())),
                    _ => None,
                })
                .collect();
            (*name, *color, pts)
        })
        .collect();
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.2.iter().copied()).collect();
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let lo = all.iter().map(f).fold(f64::INFINITY, f64::min).floor();
        let hi = all.iter().map(f).fold(f64::NEG_INFINITY, f64::max).ceil();
        if lo.is_finite() && hi.is_finite() {
            (lo, hi.max(lo + 1.0))
        } else {
            (0.0, 1.0)
        }
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let px = |x: f64| margin + (x - x0) / (x1 - x0) * (width - 2.0 * margin);
    let py = |y: f64| height - margin - (y - y0) / (y1 - y0) * (height - 2.0 * margin);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#).unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<path d="M{:.2} {:.2} L{:.2} {:.2} L{:.2} {:.2}" stroke="black" fill="none"/>"#,
        px(x0),
        py(y1),
        px(x0),
        py(y0),
        px(x1),
        py(y0)
    )
    .unwrap();
    for k in (x0 as i64)..=(x1 as i64) {
        let x = px(k as f64);
        writeln!(s, r#"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">1e{k}</text>"#, height - margin + 16.0).unwrap();
    }
    for k in (y0 as i64)..=(y1 as i64) {
        let y = py(k as f64);
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">1e{k}</text>"#, margin - 6.0, y + 4.0).unwrap();
    }
    writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">h</text>"#, width / 2.0, height - 16.0).unwrap();
    writeln!(s, r#"<text x="{:.2}" y="24" font-size="13" text-anchor="middle">{}</text>"#, width / 2.0, xml_escape(&r.scenario.name)).unwrap();
    for (i, (name, color, pts)) in series.iter().enumerate() {
        if !pts.is_empty() {
            let d: Vec<String> = pts
                .iter()
                .enumerate()
                .map(|(j, (x, y))| format!("{}{:.2} {:.2}", if j == 0 { "M" } else { "L" }, px(*x), py(*y)))
                .collect();
            writeln!(s, r#"<path d="{}" stroke="{color}" stroke-width="2" fill="none"/>"#, d.join(" ")).unwrap();
        }
        let ly = margin + 18.0 * i as f64;
        writeln!(
            s,
            r#"<path d="M{:.2} {ly:.2} L{:.2} {ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            width - margin - 150.0,
            width - margin - 130.0
        )
        .unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11">{name}</text>"#, width - margin - 124.0, ly + 4.0).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `<name>.json`, `<name>.csv` and/or `<name>.svg` into `dir`.
pub fn emit_report(r: &Report, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut formats = formats.to_vec();
    formats.sort();
    formats.dedup();
    let mut written = Vec::new();
    for f in formats {
        let (ext, body) = match f {
            Format::Json => ("json", to_json(r)?),
            Format::Csv => ("csv", to_csv(r)?),
            Format::Svg => ("svg", to_svg(r)),
        };
        let path = dir.join(format!("{}.{ext}", r.scenario.name));
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
