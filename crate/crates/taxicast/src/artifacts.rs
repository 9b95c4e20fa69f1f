//! Stage outputs written next to the reports, and the on-disk run driver.

use std::path::Path;

use taxicast_core::demand::{Aggregation, TimeGrid};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result, StageExt};
use crate::io::{csv_writer, format_timestamp, parse_timestamp};
use crate::pipeline::{self, Experiment, Tessellation};
use crate::report::{self, period_dir, PeriodReport, ReportBundle, BUNDLE_FILE};

fn flush<W: std::io::Write>(mut w: csv::Writer<W>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Cell polygons in projected km, one row per vertex.
pub fn write_voronoi_cells(tess: &Tessellation, path: &Path) -> Result<()> {
    let diagram = tess.voronoi.diagram();
    let mut w = csv_writer(path)?;
    w.write_record(["seed_id", "vertex_index", "x_km", "y_km", "area_km2"])?;
    for i in 0..diagram.len() {
        let area = diagram.areas()[i].to_string();
        for (j, v) in diagram.cell(i).unwrap_or(&[]).iter().enumerate() {
            w.write_record([i.to_string(), j.to_string(), v.x.to_string(), v.y.to_string(), area.clone()])?;
        }
    }
    flush(w, path)
}

/// Centroids with their latitude, longitude and training-set density.
pub fn write_centroids(tess: &Tessellation, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["seed_id", "lat", "lon", "x_km", "y_km", "events"])?;
    let density = tess.clusters.density();
    for (i, c) in tess.clusters.centroids().iter().enumerate() {
        let (lat, lon) = tess.projection.to_latlon(*c);
        w.write_record([
            i.to_string(),
            lat.to_string(),
            lon.to_string(),
            c.x.to_string(),
            c.y.to_string(),
            density[i].to_string(),
        ])?;
    }
    flush(w, path)
}

/// `partition_id,bin_start_iso8601,d_norm` for every partition and bin.
pub fn write_demand(agg: &Aggregation, grid: &TimeGrid, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["partition_id", "bin_start_iso8601", "d_norm"])?;
    let stamps: Vec<String> = (0..grid.n_bins()).map(|i| format_timestamp(grid.bin_start(i))).collect();
    for s in &agg.series {
        for (stamp, v) in stamps.iter().zip(&s.values) {
            w.write_record([s.partition_id.as_str(), stamp, &v.to_string()])?;
        }
    }
    flush(w, path)
}

/// Per-instant expert errors, the input of the `hedge` subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertErrors {
    pub names: Vec<String>,
    pub period_minutes: u32,
    pub validation: Vec<Vec<f64>>,
    pub validation_bin_starts: Vec<i64>,
    pub test: Vec<Vec<f64>>,
    pub test_bin_starts: Vec<i64>,
}

impl ExpertErrors {
    pub fn from_period(p: &PeriodReport) -> Self {
        let step = i64::from(p.period_minutes) * 60;
        let n_val = p.strategies.first().map_or(0, |s| s.validation_errors.len());
        let first_test = p.test_bin_starts.first().copied().unwrap_or(0);
        Self {
            names: p.strategies.iter().map(|s| s.name.clone()).collect(),
            period_minutes: p.period_minutes,
            validation: p.strategies.iter().map(|s| s.validation_errors.clone()).collect(),
            validation_bin_starts: (0..n_val).map(|i| first_test - (n_val - i) as i64 * step).collect(),
            test: p.strategies.iter().map(|s| s.test_errors.clone()).collect(),
            test_bin_starts: p.test_bin_starts.clone(),
        }
    }

    /// `phase,t,<expert>...` with phase `validation` or `test`.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        let mut header = vec!["phase".to_string(), "t".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        let phases = [
            ("validation", &self.validation, &self.validation_bin_starts),
            ("test", &self.test, &self.test_bin_starts),
        ];
        for (phase, streams, starts) in phases {
            for (t, &start) in starts.iter().enumerate() {
                let mut rec = vec![phase.to_string(), format_timestamp(start)];
                rec.extend(streams.iter().map(|s| s[t].to_string()));
                w.write_record(&rec)?;
            }
        }
        flush(w, path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = csv::Reader::from_reader(std::io::BufReader::new(file));
        let header = r.headers()?.clone();
        if header.len() < 3 || &header[0] != "phase" || &header[1] != "t" {
            return Err(Error::Data(format!(
                "{}: expected header phase,t,<expert>...",
                path.display()
            )));
        }
        let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let n = names.len();
        let mut out = Self {
            names,
            period_minutes: 0,
            validation: vec![Vec::new(); n],
            validation_bin_starts: Vec::new(),
            test: vec![Vec::new(); n],
            test_bin_starts: Vec::new(),
        };
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let (streams, starts) = match &rec[0] {
                "validation" => (&mut out.validation, &mut out.validation_bin_starts),
                "test" => (&mut out.test, &mut out.test_bin_starts),
                other => return Err(Error::Data(format!("row {}: unknown phase {other:?}", line + 2))),
            };
            starts.push(parse_timestamp(&rec[1])?);
            for (i, s) in streams.iter_mut().enumerate() {
                let v: f64 = rec[i + 2]
                    .trim()
                    .parse()
                    .map_err(|_| Error::Data(format!("row {}: bad error value {:?}", line + 2, &rec[i + 2])))?;
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Data(format!("row {}: error values must be finite and nonnegative", line + 2)));
                }
                s.push(v);
            }
        }
        if out.validation_bin_starts.is_empty() || out.test_bin_starts.is_empty() {
            return Err(Error::Data(format!("{}: needs validation and test rows", path.display())));
        }
        let starts = &out.test_bin_starts;
        let step = if starts.len() >= 2 { starts[1] - starts[0] } else { 3600 };
        if step <= 0 || step % 60 != 0 {
            return Err(Error::Data("test timestamps must increase in whole minutes".into()));
        }
        out.period_minutes = u32::try_from(step / 60).map_err(|_| Error::Data("period too long".into()))?;
        Ok(out)
    }
}

/// Write a completed experiment: stage outputs, reports and the bundle.
pub fn write_experiment(exp: &Experiment, out: &Path) -> Result<()> {
    write_tessellation(&exp.tessellation, out)?;
    for (i, p) in exp.periods.iter().enumerate() {
        write_period(p, &period_dir(out, i, p.report.period_minutes))?;
    }
    report::write_reports(&exp.bundle, out)?;
    exp.bundle.save(&out.join(BUNDLE_FILE))
}

pub fn write_tessellation(tess: &Tessellation, out: &Path) -> Result<()> {
    write_voronoi_cells(tess, &out.join("voronoi_cells.csv"))?;
    write_centroids(tess, &out.join("centroids.csv"))
}

pub fn write_period(p: &pipeline::PeriodRun, dir: &Path) -> Result<()> {
    for s in &p.strategies {
        write_demand(&s.aggregation, &p.grid, &dir.join(format!("demand_{}.csv", s.report.name)))?;
    }
    ExpertErrors::from_period(&p.report).write(&dir.join("errors.csv"))
}

/// Run the full pipeline into `out`, flushing each stage's files as it
/// finishes. On failure the partial outputs stay and a `FAILED` marker
/// names the stage.
pub fn run_to_dir(cfg: &ExperimentConfig, out: &Path) -> Result<ReportBundle> {
    let result = run_stages(cfg, out);
    if let Err(e) = &result {
        // the original error matters more than a failure to mark it
        let _ = report::write_failure(out, e);
    }
    result
}

fn run_stages(cfg: &ExperimentConfig, out: &Path) -> Result<ReportBundle> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let marker = out.join(report::FAILED_MARKER);
    if marker.exists() {
        std::fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;
    }
    let data = pipeline::ingest(cfg).stage("ingest")?;
    let tess = pipeline::tessellate(cfg, &data).stage("tessellate")?;
    write_tessellation(&tess, out).stage("tessellate")?;
    let mut periods = Vec::new();
    for (i, &period) in cfg.periods.iter().enumerate() {
        let p = pipeline::run_period(cfg, &data, &tess, period)?;
        write_period(&p, &period_dir(out, i, period)).stage("forecast")?;
        periods.push(p.report);
    }
    let bundle = ReportBundle {
        config: cfg.to_text(),
        ingest: data.summary.clone(),
        periods,
    };
    report::write_reports(&bundle, out).stage("report")?;
    bundle.save(&out.join(BUNDLE_FILE)).stage("report")?;
    Ok(bundle)
}
