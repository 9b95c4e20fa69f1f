//! Report bundle and the files rendered from it.
//!
//! `bundle.json` holds everything the report files need, so `report` can
//! re-render them without rerunning the experiment. Floats are written in
//! shortest round-trip form, which keeps reruns byte-identical.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use taxicast_core::metrics::Ecdf;

use crate::error::{Error, Result};
use crate::io::{csv_writer, fmt_f64, format_timestamp};

pub const FAILED_MARKER: &str = "FAILED";
pub const BUNDLE_FILE: &str = "bundle.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    /// Data rows read, or events generated.
    pub rows: usize,
    pub invalid: usize,
    /// Valid rows outside the study area or window.
    pub out_of_bounds: usize,
    pub events: usize,
    pub window_start: i64,
    pub window_end: i64,
    /// `[lat_min, lon_min, lat_max, lon_max]`
    pub bbox: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub partition_id: String,
    pub model_kind: String,
    pub params: Vec<(String, f64)>,
    pub periods: Vec<usize>,
    pub lambda: Option<f64>,
    pub validation_smape: f64,
    pub test_smape: Option<f64>,
    pub test_mase: Option<f64>,
    pub total_count: f64,
    pub area_km2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub name: String,
    pub cells: Vec<CellReport>,
    /// Per-instant mean error over the validation window.
    pub validation_errors: Vec<f64>,
    /// Per-instant mean error over the test window.
    pub test_errors: Vec<f64>,
    pub mean_error: f64,
    pub zero_demand_cells: usize,
    pub kept_events: usize,
    pub dedup_dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub bin_start: i64,
    pub chosen: usize,
    pub errors: Vec<f64>,
    pub losses: Vec<f64>,
    /// Normalized weights before this step's update.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HedgeReport {
    pub beta: f64,
    pub gamma: f64,
    pub mean_error: f64,
    pub switches: usize,
    pub switches_per_day: f64,
    pub hybrid_errors: Vec<f64>,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub strategy: String,
    pub other_strategy: String,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub period_minutes: u32,
    pub metric: String,
    pub season_bins: usize,
    pub train_bins: usize,
    pub test_bin_starts: Vec<i64>,
    pub strategies: Vec<StrategyReport>,
    pub hedge: HedgeReport,
    /// Two-sample K-S test on per-cell test SMAPE, when both samples exist.
    pub ks: Option<KsReport>,
}

impl PeriodReport {
    pub fn strategy(&self, name: &str) -> Option<&StrategyReport> {
        self.strategies.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    /// The effective configuration in config-file syntax.
    pub config: String,
    pub ingest: IngestSummary,
    pub periods: Vec<PeriodReport>,
}

impl ReportBundle {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Data(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Data(format!("bad report bundle: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &(self.to_json()? + "\n"))
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    use std::io::Write;
    let mut w = crate::io::create(path)?;
    w.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Directory for a period's files: the first period writes at the top level.
pub fn period_dir(out: &Path, index: usize, period_minutes: u32) -> PathBuf {
    if index == 0 {
        out.to_path_buf()
    } else {
        out.join(format!("period_{period_minutes}min"))
    }
}

fn finish<W: std::io::Write>(mut w: csv::Writer<W>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_summary(bundle: &ReportBundle, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "strategy",
        "period_minutes",
        "metric",
        "mean_error",
        "beta",
        "gamma",
        "switches_per_day",
    ])?;
    for p in &bundle.periods {
        let h = &p.hedge;
        let rows = p
            .strategies
            .iter()
            .map(|s| (s.name.as_str(), s.mean_error))
            .chain(std::iter::once(("dhedge", h.mean_error)));
        for (name, err) in rows {
            w.write_record([
                name.to_string(),
                p.period_minutes.to_string(),
                p.metric.clone(),
                err.to_string(),
                h.beta.to_string(),
                h.gamma.to_string(),
                h.switches_per_day.to_string(),
            ])?;
        }
    }
    finish(w, path)
}

pub fn write_trace(p: &PeriodReport, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let n = p.strategies.len();
    let mut header = vec!["t".to_string(), "chosen_expert".to_string()];
    for prefix in ["e", "l", "w"] {
        header.extend((0..n).map(|i| format!("{prefix}_{i}")));
    }
    w.write_record(&header)?;
    for row in &p.hedge.trace {
        let mut rec = vec![format_timestamp(row.bin_start), p.strategies[row.chosen].name.clone()];
        for v in [&row.errors, &row.losses, &row.weights] {
            rec.extend(v.iter().map(f64::to_string));
        }
        w.write_record(&rec)?;
    }
    finish(w, path)
}

pub fn write_per_cell(p: &PeriodReport, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["partition_id", "strategy", "model_kind", "smape", "mase"])?;
    for s in &p.strategies {
        for c in &s.cells {
            w.write_record([
                c.partition_id.clone(),
                s.name.clone(),
                c.model_kind.clone(),
                fmt_f64(c.test_smape),
                fmt_f64(c.test_mase),
            ])?;
        }
    }
    finish(w, path)
}

/// ECDF steps of per-cell test SMAPE per strategy, then one `ks` row per
/// strategy pair holding the statistic and its p-value.
pub fn write_ecdf(p: &PeriodReport, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["record", "strategy", "other_strategy", "value", "probability"])?;
    for s in &p.strategies {
        let sample: Vec<f64> = s.cells.iter().filter_map(|c| c.test_smape).collect();
        let Ok(ecdf) = Ecdf::new(&sample) else { continue };
        for (x, f) in ecdf.steps() {
            w.write_record(["ecdf", &s.name, "", &x.to_string(), &f.to_string()])?;
        }
    }
    match &p.ks {
        Some(k) => w.write_record([
            "ks",
            &k.strategy,
            &k.other_strategy,
            &k.statistic.to_string(),
            &k.p_value.to_string(),
        ])?,
        None => {
            let names: Vec<&str> = p.strategies.iter().map(|s| s.name.as_str()).collect();
            w.write_record(["ks", names.first().copied().unwrap_or(""), names.get(1).copied().unwrap_or(""), "", ""])?
        }
    }
    finish(w, path)
}

/// Running mean of each strategy's and the hybrid's per-instant errors.
pub fn write_cumulative(p: &PeriodReport, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["t".to_string()];
    header.extend(p.strategies.iter().map(|s| s.name.clone()));
    header.push("dhedge".into());
    w.write_record(&header)?;
    let streams: Vec<&[f64]> = p
        .strategies
        .iter()
        .map(|s| s.test_errors.as_slice())
        .chain(std::iter::once(p.hedge.hybrid_errors.as_slice()))
        .collect();
    let mut sums = vec![0.0; streams.len()];
    for (t, &start) in p.test_bin_starts.iter().enumerate() {
        let mut rec = vec![format_timestamp(start)];
        for (sum, s) in sums.iter_mut().zip(&streams) {
            *sum += s[t];
            rec.push((*sum / (t + 1) as f64).to_string());
        }
        w.write_record(&rec)?;
    }
    finish(w, path)
}

#[derive(Serialize)]
struct ModelSummary<'a> {
    strategy: &'a str,
    partition_id: &'a str,
    kind: &'a str,
    params: serde_json::Map<String, serde_json::Value>,
    periods: &'a [usize],
    lambda: Option<f64>,
    validation_smape: f64,
}

pub fn write_models(p: &PeriodReport, path: &Path) -> Result<()> {
    let models: Vec<ModelSummary> = p
        .strategies
        .iter()
        .flat_map(|s| {
            s.cells.iter().map(move |c| ModelSummary {
                strategy: &s.name,
                partition_id: &c.partition_id,
                kind: &c.model_kind,
                params: c
                    .params
                    .iter()
                    .map(|(k, v)| (k.clone(), serde_json::json!(v)))
                    .collect(),
                periods: &c.periods,
                lambda: c.lambda,
                validation_smape: c.validation_smape,
            })
        })
        .collect();
    let text = serde_json::to_string_pretty(&models).map_err(|e| Error::Data(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

/// Render every report file of the bundle under `out`.
pub fn write_reports(bundle: &ReportBundle, out: &Path) -> Result<()> {
    write_summary(bundle, &out.join("summary.csv"))?;
    for (i, p) in bundle.periods.iter().enumerate() {
        let dir = period_dir(out, i, p.period_minutes);
        write_trace(p, &dir.join("trace.csv"))?;
        write_per_cell(p, &dir.join("per_cell.csv"))?;
        write_ecdf(p, &dir.join("ecdf.csv"))?;
        write_cumulative(p, &dir.join("cumulative.csv"))?;
        write_models(p, &dir.join("models.json"))?;
    }
    Ok(())
}

/// Marker left next to partial outputs when a run fails.
pub fn write_failure(out: &Path, err: &Error) -> Result<()> {
    let stage = err.stage().unwrap_or("setup");
    write_text(
        &out.join(FAILED_MARKER),
        &format!("stage={stage}\nexit_code={}\nerror={err}\n", err.exit_code()),
    )
}
