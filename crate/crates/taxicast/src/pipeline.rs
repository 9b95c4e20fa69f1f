//! End-to-end experiment: ingest, tessellate, forecast per cell, combine.
//!
//! Stages run in order and tag their errors with a stage label:
//! `ingest` → `tessellate` → `forecast` (per sampling period) → `hedge`.
//! Both strategies model the same events. Voronoi models every cell, and
//! Geohash models the cells that contain a K-Means centroid, so each
//! centroid has one series per strategy.

use std::collections::BTreeSet;

use rayon::prelude::*;
use taxicast_core::clustering::{self, ClusterModel, KMeansConfig};
use taxicast_core::demand::{
    aggregate, dedup, select_lambda, Aggregation, DemandEvent, GeohashPartitioning, Partitioning, TimeGrid,
    Transform, VoronoiPartitioning,
};
use taxicast_core::forecast::{rolling_one_step, select_model, FitOptions};
use taxicast_core::geometry::{Point, Projection, Rect};
use taxicast_core::hedge;
use taxicast_core::metrics::{ks_two_sample, mase, seasonal_naive_mae, smape, smape_term, Metric};
use taxicast_core::voronoi;

use crate::config::{metric_name, BBox, ExperimentConfig, LambdaChoice, Source};
use crate::error::{Error, Result, StageExt};
use crate::io;
use crate::report::{
    CellReport, HedgeReport, IngestSummary, KsReport, PeriodReport, ReportBundle, StrategyReport, TraceRow,
};
use crate::synth;

pub const STRATEGIES: [&str; 2] = ["voronoi", "geohash"];
/// Growth of the data bounding box on every side, as a fraction of its span.
pub const BBOX_MARGIN: f64 = 0.02;

#[derive(Debug, Clone)]
pub struct Ingested {
    /// In-bounds events, in time order.
    pub events: Vec<DemandEvent>,
    /// Study window `[start, end)` in UTC seconds, whole hours.
    pub window: (i64, i64),
    pub bbox: BBox,
    pub summary: IngestSummary,
}

fn floor_hour(t: i64) -> i64 {
    t.div_euclid(3600) * 3600
}

fn ceil_hour(t: i64) -> i64 {
    -floor_hour(-t)
}

fn data_bbox(events: &[DemandEvent]) -> Option<BBox> {
    let first = events.first()?;
    let mut b = BBox {
        lat_min: first.lat,
        lon_min: first.lon,
        lat_max: first.lat,
        lon_max: first.lon,
    };
    for e in events {
        b.lat_min = b.lat_min.min(e.lat);
        b.lat_max = b.lat_max.max(e.lat);
        b.lon_min = b.lon_min.min(e.lon);
        b.lon_max = b.lon_max.max(e.lon);
    }
    let dlat = ((b.lat_max - b.lat_min) * BBOX_MARGIN).max(1e-4);
    let dlon = ((b.lon_max - b.lon_min) * BBOX_MARGIN).max(1e-4);
    Some(BBox {
        lat_min: (b.lat_min - dlat).max(-90.0),
        lon_min: (b.lon_min - dlon).max(-180.0),
        lat_max: (b.lat_max + dlat).min(90.0),
        lon_max: (b.lon_max + dlon).min(180.0),
    })
}

/// Load or generate events, fix the study window and the study area.
pub fn ingest(cfg: &ExperimentConfig) -> Result<Ingested> {
    let (events, rows, invalid, window) = match &cfg.source {
        Source::Synthetic(spec) => {
            let events = synth::generate(spec, cfg.seed)?;
            let n = events.len();
            (events, n, 0, Some((spec.start, spec.end())))
        }
        Source::Csv { path, schema } => {
            let (events, stats) = io::read_events(path, *schema)?;
            (events, stats.rows, stats.invalid, None)
        }
    };
    if events.is_empty() {
        return Err(Error::Data("no valid events".into()));
    }
    let window = match window {
        Some(w) => w,
        None => {
            let lo = events.iter().map(|e| e.timestamp).min().unwrap_or(0);
            let hi = events.iter().map(|e| e.timestamp).max().unwrap_or(0);
            (floor_hour(lo), ceil_hour(hi + 1))
        }
    };
    let bbox = match cfg.bbox {
        Some(b) => b,
        None => data_bbox(&events).ok_or_else(|| Error::Data("no valid events".into()))?,
    };
    let total = events.len();
    let mut kept: Vec<DemandEvent> = events
        .into_iter()
        .filter(|e| bbox.contains(e.lat, e.lon) && e.timestamp >= window.0 && e.timestamp < window.1)
        .collect();
    kept.sort_by_key(|e| e.timestamp);
    let dropped = total - kept.len();
    Ok(Ingested {
        summary: IngestSummary {
            rows,
            invalid,
            out_of_bounds: dropped,
            events: kept.len(),
            window_start: window.0,
            window_end: window.1,
            bbox: [bbox.lat_min, bbox.lon_min, bbox.lat_max, bbox.lon_max],
        },
        events: kept,
        window,
        bbox,
    })
}

/// Both partitionings plus each strategy's deduplicated events.
#[derive(Debug, Clone)]
pub struct Tessellation {
    pub projection: Projection,
    pub clusters: ClusterModel,
    pub voronoi: VoronoiPartitioning,
    /// Every geohash cell holding an event or a centroid.
    pub geohash: GeohashPartitioning,
    /// Geohash cells that contain a centroid, ascending.
    pub geohash_modeled: Vec<usize>,
    /// Indices into the ingested events kept by dedup, per strategy.
    pub kept: [Vec<usize>; 2],
    pub dedup_dropped: [usize; 2],
}

pub fn training_end(cfg: &ExperimentConfig, window: (i64, i64)) -> i64 {
    window.1 - i64::from(cfg.validation_hours + cfg.test_hours) * 3600
}

pub fn tessellate(cfg: &ExperimentConfig, data: &Ingested) -> Result<Tessellation> {
    let projection = Projection::about_mean(data.events.iter().map(|e| (e.lat, e.lon)))
        .ok_or_else(|| Error::Data("no events to project".into()))?;
    let b = data.bbox;
    let rect = Rect::new(
        projection.to_plane(b.lat_min, b.lon_min),
        projection.to_plane(b.lat_max, b.lon_max),
    );

    let train_end = training_end(cfg, data.window);
    let mut points: Vec<Point> = data
        .events
        .iter()
        .filter(|e| e.timestamp < train_end)
        .map(|e| projection.to_plane(e.lat, e.lon))
        .collect();
    if cfg.kmeans_sample > 0 && points.len() > cfg.kmeans_sample {
        let stride = points.len() as f64 / cfg.kmeans_sample as f64;
        points = (0..cfg.kmeans_sample)
            .map(|i| points[(i as f64 * stride) as usize])
            .collect();
    }
    if points.len() < cfg.k {
        return Err(Error::Data(format!(
            "K = {} exceeds the {} training events",
            cfg.k,
            points.len()
        )));
    }
    let clusters = clustering::fit(
        &points,
        &KMeansConfig {
            k: cfg.k,
            seed: cfg.seed,
            max_iter: cfg.kmeans_max_iter,
            tol: cfg.kmeans_tol,
        },
    )?;
    let diagram = voronoi::build(clusters.centroids(), rect)?;
    let voronoi = VoronoiPartitioning::new(diagram, projection);

    let centroid_coords: Vec<(f64, f64)> = clusters.centroids().iter().map(|c| projection.to_latlon(*c)).collect();
    let geohash = GeohashPartitioning::covering(
        cfg.geohash_level,
        data.events
            .iter()
            .map(|e| (e.lat, e.lon))
            .chain(centroid_coords.iter().copied()),
    )?;
    let modeled: BTreeSet<usize> = centroid_coords
        .iter()
        .filter_map(|&(lat, lon)| geohash.locate(lat, lon))
        .collect();

    let d_vor = dedup(&data.events, |e| voronoi.locate(e.lat, e.lon), cfg.dedup_minutes);
    let d_geo = dedup(&data.events, |e| geohash.locate(e.lat, e.lon), cfg.dedup_minutes);
    Ok(Tessellation {
        projection,
        clusters,
        voronoi,
        geohash,
        geohash_modeled: modeled.into_iter().collect(),
        dedup_dropped: [d_vor.dropped, d_geo.dropped],
        kept: [d_vor.kept, d_geo.kept],
    })
}

/// Bin counts of the split for one sampling period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Split {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub season: usize,
}

pub fn split(cfg: &ExperimentConfig, grid: &TimeGrid) -> Result<Split> {
    let per_hour = 60 / grid.period_minutes() as usize;
    let validation = cfg.validation_hours as usize * per_hour;
    let test = cfg.test_hours as usize * per_hour;
    let season = cfg.season_hours as usize * per_hour;
    let n = grid.n_bins();
    if validation + test + season > n {
        return Err(Error::Config(format!(
            "{n} bins cannot hold {validation} validation, {test} test and one {season}-bin season of training"
        )));
    }
    Ok(Split {
        train: n - validation - test,
        validation,
        test,
        season,
    })
}

/// Forecasts and errors of one partition.
#[derive(Debug, Clone)]
struct CellRun {
    report: CellReport,
    /// Per-bin error contributions over validation then test, or `None`
    /// where the cell does not count towards that bin's mean.
    contributions: Vec<Option<f64>>,
    test_forecasts: Vec<f64>,
}

fn contribution(metric: Metric, y: f64, f: f64, scale: Option<f64>) -> Option<f64> {
    match metric {
        Metric::Smape => Some(smape_term(y, f).unwrap_or(0.0)),
        Metric::Mase => scale.map(|s| (y - f).abs() / s),
    }
}

fn run_cell(
    cfg: &ExperimentConfig,
    values: &[f64],
    partition_id: String,
    area: f64,
    sp: Split,
    opts: &FitOptions,
) -> Result<CellRun> {
    let train = &values[..sp.train];
    let validation = &values[sp.train..sp.train + sp.validation];
    let test = &values[sp.train + sp.validation..];
    let transform = match cfg.lambda {
        LambdaChoice::None => Transform::None,
        LambdaChoice::Fixed(l) => Transform::box_cox(l)?,
        LambdaChoice::Auto => Transform::box_cox(select_lambda(train)?)?,
    };
    let sel = select_model(train, validation, &cfg.candidates, opts, transform)?;
    let mut forecaster = sel.forecaster;
    let preds = rolling_one_step(&mut forecaster, test);
    if let Some(bad) = preds.iter().find(|p| !p.is_finite()) {
        return Err(Error::Numeric(format!(
            "{partition_id}: {} forecast {bad}",
            forecaster.model.kind().name()
        )));
    }
    let scale = seasonal_naive_mae(train, sp.season).ok().filter(|s| *s > 0.0);
    let contributions = validation
        .iter()
        .zip(&sel.validation_forecasts)
        .chain(test.iter().zip(&preds))
        .map(|(&y, &f)| contribution(cfg.metric, y, f, scale))
        .collect();
    let test_smape = smape(test, &preds).ok();
    let test_mase = scale.and_then(|_| mase(test, &preds, train, sp.season).ok());
    Ok(CellRun {
        report: CellReport {
            partition_id,
            model_kind: forecaster.model.kind().name(),
            params: forecaster.model.params(),
            periods: forecaster.model.periods().to_vec(),
            lambda: transform.lambda(),
            validation_smape: sel.validation_smape,
            test_smape,
            test_mase,
            total_count: values.iter().sum::<f64>() * area,
            area_km2: area,
        },
        contributions,
        test_forecasts: preds,
    })
}

/// Unweighted mean per bin over the cells that count; 0 when none do.
fn per_instant_means(cells: &[CellRun], bins: usize) -> Vec<f64> {
    (0..bins)
        .map(|t| {
            let (sum, n) = cells
                .iter()
                .filter_map(|c| c.contributions[t])
                .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            if n == 0 {
                0.0
            } else {
                sum / n as f64
            }
        })
        .collect()
}

/// One strategy's aggregated demand and modelling results for a period.
#[derive(Debug, Clone)]
pub struct StrategyRun {
    pub aggregation: Aggregation,
    pub report: StrategyReport,
    pub test_forecasts: Vec<Vec<f64>>,
}

fn run_strategy<P: Partitioning + Sync>(
    cfg: &ExperimentConfig,
    name: &str,
    data: &Ingested,
    partitions: &P,
    kept: &[usize],
    dedup_dropped: usize,
    modeled: &[usize],
    grid: &TimeGrid,
    sp: Split,
) -> Result<StrategyRun> {
    let aggregation = aggregate(kept.iter().map(|&i| &data.events[i]), partitions, grid)?;
    let per_hour = 60 / grid.period_minutes() as usize;
    let mut opts = FitOptions::new(sp.season);
    opts.tbats_harmonics = cfg.tbats_harmonics;
    opts.tbats_periods = cfg.tbats_periods_hours.iter().map(|&h| h as usize * per_hour).collect();

    let cells: Vec<CellRun> = modeled
        .par_iter()
        .map(|&i| {
            let s = &aggregation.series[i];
            run_cell(cfg, &s.values, s.partition_id.clone(), s.area_km2, sp, &opts)
        })
        .collect::<Result<_>>()?;

    let errors = per_instant_means(&cells, sp.validation + sp.test);
    let (validation_errors, test_errors) = errors.split_at(sp.validation);
    let zero = modeled
        .iter()
        .filter(|&&i| aggregation.series[i].values.iter().all(|v| *v == 0.0))
        .count();
    let mean_error = mean(test_errors);
    let test_forecasts = cells.iter().map(|c| c.test_forecasts.clone()).collect();
    Ok(StrategyRun {
        report: StrategyReport {
            name: name.to_string(),
            cells: cells.into_iter().map(|c| c.report).collect(),
            validation_errors: validation_errors.to_vec(),
            test_errors: test_errors.to_vec(),
            mean_error,
            zero_demand_cells: zero,
            kept_events: aggregation.kept,
            dedup_dropped,
        },
        aggregation,
        test_forecasts,
    })
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Tune on the validation streams, then run cold over the test streams.
pub fn combine(
    cfg: &ExperimentConfig,
    validation: &[Vec<f64>],
    test: &[Vec<f64>],
    test_bin_starts: &[i64],
    period_minutes: u32,
) -> Result<HedgeReport> {
    let (beta, gamma) = hedge::tune(validation, &cfg.beta_grid, &cfg.gamma_grid)?;
    let run = hedge::run(test, beta, gamma)?;
    let days = test.first().map_or(0, |s| s.len()) as f64 * f64::from(period_minutes) / 1440.0;
    let trace = run
        .trace
        .iter()
        .zip(test_bin_starts)
        .map(|(s, &t)| TraceRow {
            bin_start: t,
            chosen: s.chosen,
            errors: s.errors.clone(),
            losses: s.losses.clone(),
            weights: s.weights.clone(),
        })
        .collect();
    Ok(HedgeReport {
        beta,
        gamma,
        mean_error: run.mean_error(),
        switches: run.switches,
        switches_per_day: if days > 0.0 { run.switches as f64 / days } else { 0.0 },
        hybrid_errors: run.hybrid_errors,
        trace,
    })
}

/// Everything produced for one sampling period.
#[derive(Debug, Clone)]
pub struct PeriodRun {
    pub grid: TimeGrid,
    pub split: Split,
    pub strategies: [StrategyRun; 2],
    pub report: PeriodReport,
}

pub fn forecast_period(cfg: &ExperimentConfig, data: &Ingested, tess: &Tessellation, period: u32) -> Result<[StrategyRun; 2]> {
    let grid = TimeGrid::spanning(data.window.0, data.window.1, period)?;
    let sp = split(cfg, &grid)?;
    let all_voronoi: Vec<usize> = (0..tess.voronoi.len()).collect();
    let vor = run_strategy(
        cfg,
        STRATEGIES[0],
        data,
        &tess.voronoi,
        &tess.kept[0],
        tess.dedup_dropped[0],
        &all_voronoi,
        &grid,
        sp,
    )?;
    let geo = run_strategy(
        cfg,
        STRATEGIES[1],
        data,
        &tess.geohash,
        &tess.kept[1],
        tess.dedup_dropped[1],
        &tess.geohash_modeled,
        &grid,
        sp,
    )?;
    Ok([vor, geo])
}

pub fn run_period(cfg: &ExperimentConfig, data: &Ingested, tess: &Tessellation, period: u32) -> Result<PeriodRun> {
    let grid = TimeGrid::spanning(data.window.0, data.window.1, period).stage("forecast")?;
    let sp = split(cfg, &grid).stage("forecast")?;
    let strategies = forecast_period(cfg, data, tess, period).stage("forecast")?;
    let test_bin_starts: Vec<i64> = (sp.train + sp.validation..grid.n_bins()).map(|i| grid.bin_start(i)).collect();
    let validation: Vec<Vec<f64>> = strategies.iter().map(|s| s.report.validation_errors.clone()).collect();
    let test: Vec<Vec<f64>> = strategies.iter().map(|s| s.report.test_errors.clone()).collect();
    let hedge = combine(cfg, &validation, &test, &test_bin_starts, period).stage("hedge")?;

    let smapes = |s: &StrategyRun| -> Vec<f64> { s.report.cells.iter().filter_map(|c| c.test_smape).collect() };
    let (a, b) = (smapes(&strategies[0]), smapes(&strategies[1]));
    let ks = ks_two_sample(&a, &b).ok().map(|k| KsReport {
        strategy: STRATEGIES[0].into(),
        other_strategy: STRATEGIES[1].into(),
        statistic: k.statistic,
        p_value: k.p_value,
    });
    let report = PeriodReport {
        period_minutes: period,
        metric: metric_name(cfg.metric).into(),
        season_bins: sp.season,
        train_bins: sp.train,
        test_bin_starts,
        strategies: strategies.iter().map(|s| s.report.clone()).collect(),
        hedge,
        ks,
    };
    Ok(PeriodRun {
        grid,
        split: sp,
        strategies,
        report,
    })
}

/// A finished experiment with the in-memory artifacts behind its report.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub data: Ingested,
    pub tessellation: Tessellation,
    pub periods: Vec<PeriodRun>,
    pub bundle: ReportBundle,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    cfg.validate()?;
    let data = ingest(cfg).stage("ingest")?;
    let tessellation = tessellate(cfg, &data).stage("tessellate")?;
    let periods = cfg
        .periods
        .iter()
        .map(|&p| run_period(cfg, &data, &tessellation, p))
        .collect::<Result<Vec<_>>>()?;
    let bundle = ReportBundle {
        config: cfg.to_text(),
        ingest: data.summary.clone(),
        periods: periods.iter().map(|p| p.report.clone()).collect(),
    };
    Ok(Experiment {
        data,
        tessellation,
        periods,
        bundle,
    })
}
