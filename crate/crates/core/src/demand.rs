//! Area-normalized demand series.
//!
//! Events are deduplicated per (user, partition), counted per partition and
//! time bin, and divided by the partition area to give bookings per km² per
//! sampling period. Box-Cox with a +1 offset stabilizes variance before
//! modelling.

use hashbrown::HashMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Result};
use crate::geohash::{self, GeohashCell};
use crate::geometry::Projection;
use crate::voronoi::VoronoiDiagram;

/// One booking or pickup record.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandEvent {
    /// UTC seconds since the Unix epoch.
    pub timestamp: i64,
    pub lat: f64,
    pub lon: f64,
    /// Absent for street-hail data.
    pub user_id: Option<String>,
}

/// Sampling periods in minutes the pipeline supports.
pub const SAMPLING_PERIODS: [u32; 4] = [5, 15, 30, 60];

/// Regular grid of half-open bins `[start + i·sp, start + (i+1)·sp)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeGrid {
    start: i64,
    period_minutes: u32,
    n_bins: usize,
}

impl TimeGrid {
    pub fn new(start: i64, period_minutes: u32, n_bins: usize) -> Result<Self> {
        if !SAMPLING_PERIODS.contains(&period_minutes) {
            return Err(domain!(
                "sampling period {period_minutes} min not one of {:?}",
                SAMPLING_PERIODS
            ));
        }
        if n_bins == 0 {
            return Err(domain!("time grid needs at least one bin"));
        }
        Ok(Self {
            start,
            period_minutes,
            n_bins,
        })
    }

    /// Grid spanning `[start, end)`, which must be a whole number of periods.
    pub fn spanning(start: i64, end: i64, period_minutes: u32) -> Result<Self> {
        let step = i64::from(period_minutes) * 60;
        if end <= start || (end - start) % step != 0 {
            return Err(domain!(
                "window of {} s is not a positive multiple of {period_minutes} min",
                end - start
            ));
        }
        Self::new(start, period_minutes, ((end - start) / step) as usize)
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn period_minutes(&self) -> u32 {
        self.period_minutes
    }

    pub fn period_seconds(&self) -> i64 {
        i64::from(self.period_minutes) * 60
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn end(&self) -> i64 {
        self.start + self.n_bins as i64 * self.period_seconds()
    }

    pub fn bin_start(&self, i: usize) -> i64 {
        self.start + i as i64 * self.period_seconds()
    }

    pub fn bin_of(&self, timestamp: i64) -> Option<usize> {
        if timestamp < self.start || timestamp >= self.end() {
            return None;
        }
        Some(((timestamp - self.start) / self.period_seconds()) as usize)
    }

    /// Bins per `hours` hours, if that is a whole number.
    pub fn bins_per_hours(&self, hours: u32) -> Option<usize> {
        let minutes = hours * 60;
        (minutes % self.period_minutes == 0).then(|| (minutes / self.period_minutes) as usize)
    }
}

/// A spatial partitioning that events can be assigned to.
pub trait Partitioning {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Partition containing the coordinate, if any.
    fn locate(&self, lat: f64, lon: f64) -> Option<usize>;

    fn area_km2(&self, index: usize) -> f64;

    fn partition_id(&self, index: usize) -> String;
}

/// Geohash cells at a fixed level, enumerated from the points they must cover.
#[derive(Debug, Clone)]
pub struct GeohashPartitioning {
    level: usize,
    cells: Vec<GeohashCell>,
    /// Integer codes of `cells`, ascending.
    keys: Vec<u64>,
}

impl GeohashPartitioning {
    /// All cells at `level` that contain at least one of `coords`, ordered by
    /// code.
    pub fn covering<I>(level: usize, coords: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut keys = coords
            .into_iter()
            .map(|(lat, lon)| geohash::encode_bits(lat, lon, level))
            .collect::<Result<Vec<u64>>>()?;
        keys.sort_unstable();
        keys.dedup();
        let cells = keys
            .iter()
            .map(|&k| geohash::decode(&geohash::code_from_bits(k, level)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { level, cells, keys })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn cells(&self) -> &[GeohashCell] {
        &self.cells
    }

    pub fn index_of(&self, code: &str) -> Option<usize> {
        let code = code.to_ascii_lowercase();
        self.cells.binary_search_by(|c| c.code().cmp(code.as_str())).ok()
    }
}

impl Partitioning for GeohashPartitioning {
    fn len(&self) -> usize {
        self.cells.len()
    }

    fn locate(&self, lat: f64, lon: f64) -> Option<usize> {
        let key = geohash::encode_bits(lat, lon, self.level).ok()?;
        self.keys.binary_search(&key).ok()
    }

    fn area_km2(&self, index: usize) -> f64 {
        self.cells[index].area_km2()
    }

    fn partition_id(&self, index: usize) -> String {
        self.cells[index].code().into()
    }
}

/// Voronoi cells addressed in geographic coordinates.
#[derive(Debug, Clone)]
pub struct VoronoiPartitioning {
    diagram: VoronoiDiagram,
    projection: Projection,
}

impl VoronoiPartitioning {
    pub fn new(diagram: VoronoiDiagram, projection: Projection) -> Self {
        Self {
            diagram,
            projection,
        }
    }

    pub fn diagram(&self) -> &VoronoiDiagram {
        &self.diagram
    }

    pub fn projection(&self) -> &Projection {
        &self.projection
    }
}

impl Partitioning for VoronoiPartitioning {
    fn len(&self) -> usize {
        self.diagram.len()
    }

    fn locate(&self, lat: f64, lon: f64) -> Option<usize> {
        self.diagram
            .locate(self.projection.to_plane(lat, lon))
            .ok()
    }

    fn area_km2(&self, index: usize) -> f64 {
        self.diagram.areas()[index]
    }

    fn partition_id(&self, index: usize) -> String {
        alloc::format!("v{index:04}")
    }
}

/// Outcome of [`dedup`]: indices of kept events, in time order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DedupResult {
    pub kept: Vec<usize>,
    pub dropped: usize,
}

/// Drop repeat bookings: an event is dropped when the same (user, partition)
/// pair had a kept event less than `window_minutes` earlier. Events without
/// a user id, or outside every partition, pass through.
pub fn dedup<F>(events: &[DemandEvent], partition_of: F, window_minutes: u32) -> DedupResult
where
    F: Fn(&DemandEvent) -> Option<usize>,
{
    let assigned: Vec<Option<usize>> = events.iter().map(partition_of).collect();
    dedup_assigned(events, &assigned, window_minutes)
}

/// [`dedup`] with each event's partition already computed.
pub fn dedup_assigned(events: &[DemandEvent], assigned: &[Option<usize>], window_minutes: u32) -> DedupResult {
    let window = i64::from(window_minutes) * 60;
    let mut order: Vec<usize> = (0..events.len()).collect();
    order.sort_by_key(|&i| events[i].timestamp);
    let mut last_kept: HashMap<(&str, usize), i64> = HashMap::new();
    let mut kept = Vec::with_capacity(events.len());
    let mut dropped = 0;
    for i in order {
        let e = &events[i];
        let (Some(user), Some(p)) = (e.user_id.as_deref(), assigned[i]) else {
            kept.push(i);
            continue;
        };
        match last_kept.get(&(user, p)) {
            Some(&t) if e.timestamp - t < window => dropped += 1,
            _ => {
                last_kept.insert((user, p), e.timestamp);
                kept.push(i);
            }
        }
    }
    DedupResult { kept, dropped }
}

/// Variance-stabilizing transform applied to a demand series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    None,
    /// Box-Cox with a +1 offset: `((y+1)^λ − 1)/λ`, or `ln(y+1)` at λ = 0.
    BoxCox(f64),
}

impl Transform {
    pub fn box_cox(lambda: f64) -> Result<Self> {
        if !(-1.0..=2.0).contains(&lambda) {
            return Err(domain!("Box-Cox lambda {lambda} outside [-1, 2]"));
        }
        Ok(Transform::BoxCox(lambda))
    }

    pub fn forward(&self, y: f64) -> f64 {
        match *self {
            Transform::None => y,
            Transform::BoxCox(l) => box_cox_forward(y, l),
        }
    }

    pub fn inverse(&self, z: f64) -> f64 {
        match *self {
            Transform::None => z,
            Transform::BoxCox(l) => box_cox_inverse(z, l),
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match *self {
            Transform::None => None,
            Transform::BoxCox(l) => Some(l),
        }
    }
}

pub fn box_cox_forward(y: f64, lambda: f64) -> f64 {
    let shifted = y + 1.0;
    if lambda == 0.0 {
        libm::log(shifted)
    } else {
        (libm::pow(shifted, lambda) - 1.0) / lambda
    }
}

/// Inverse of [`box_cox_forward`]. Values outside the transform's range map
/// to the nearest attainable limit (y = −1 for λ > 0).
pub fn box_cox_inverse(z: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return libm::exp(z) - 1.0;
    }
    let base = lambda * z + 1.0;
    if base <= 0.0 {
        return if lambda > 0.0 { -1.0 } else { f64::INFINITY };
    }
    libm::pow(base, 1.0 / lambda) - 1.0
}

/// Grid searched when λ is chosen automatically.
pub const LAMBDA_GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// Gaussian profile log-likelihood of the transformed sample, up to a
/// constant.
pub fn box_cox_log_likelihood(values: &[f64], lambda: f64) -> f64 {
    let n = values.len() as f64;
    let z: Vec<f64> = values.iter().map(|&y| box_cox_forward(y, lambda)).collect();
    let mean = z.iter().sum::<f64>() / n;
    let var = z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let jacobian: f64 = values.iter().map(|&y| libm::log(y + 1.0)).sum();
    -0.5 * n * libm::log(var) + (lambda - 1.0) * jacobian
}

/// λ from [`LAMBDA_GRID`] maximizing the profile log-likelihood. A constant
/// sample has no finite likelihood; it gets λ = 1, the identity up to shift.
pub fn select_lambda(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(domain!("cannot choose lambda for an empty sample"));
    }
    if values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(domain!("Box-Cox requires finite nonnegative values"));
    }
    if values.iter().all(|&v| v == values[0]) {
        return Ok(1.0);
    }
    let mut best = (1.0, f64::NEG_INFINITY);
    for &l in &LAMBDA_GRID {
        let ll = box_cox_log_likelihood(values, l);
        if ll.is_finite() && ll > best.1 {
            best = (l, ll);
        }
    }
    Ok(best.0)
}

/// Requested Box-Cox parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    Fixed(f64),
    /// Choose from [`LAMBDA_GRID`] on the first `train_len` values.
    Auto { train_len: usize },
}

/// Area-normalized demand of one partition on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandSeries {
    pub partition_id: String,
    /// Bookings per km² per bin, possibly transformed.
    pub values: Vec<f64>,
    pub area_km2: f64,
    pub transform: Transform,
}

impl DemandSeries {
    /// Raw event counts per bin. Only meaningful before any transform.
    pub fn counts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v * self.area_km2).collect()
    }

    pub fn total_count(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.area_km2
    }
}

/// Apply Box-Cox to an untransformed series.
pub fn boxcox(series: &DemandSeries, lambda: Lambda) -> Result<DemandSeries> {
    if series.transform != Transform::None {
        return Err(domain!("series {} is already transformed", series.partition_id));
    }
    let l = match lambda {
        Lambda::Fixed(l) => l,
        Lambda::Auto { train_len } => {
            let n = train_len.min(series.values.len());
            select_lambda(&series.values[..n])?
        }
    };
    let transform = Transform::box_cox(l)?;
    if series.values.iter().any(|&v| v < 0.0) {
        return Err(domain!("Box-Cox requires nonnegative demand"));
    }
    Ok(DemandSeries {
        partition_id: series.partition_id.clone(),
        values: series.values.iter().map(|&v| transform.forward(v)).collect(),
        area_km2: series.area_km2,
        transform,
    })
}

/// Undo a series' transform.
pub fn inverse_boxcox(series: &DemandSeries) -> DemandSeries {
    DemandSeries {
        partition_id: series.partition_id.clone(),
        values: series
            .values
            .iter()
            .map(|&v| series.transform.inverse(v))
            .collect(),
        area_km2: series.area_km2,
        transform: Transform::None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregation {
    /// One series per partition, in partition index order.
    pub series: Vec<DemandSeries>,
    pub kept: usize,
    pub out_of_window: usize,
    pub out_of_bounds: usize,
}

/// Count events per (partition, bin) and normalize by partition area.
/// Partitions without demand keep an all-zero series.
pub fn aggregate<'a, I, P>(events: I, partitions: &P, grid: &TimeGrid) -> Result<Aggregation>
where
    I: IntoIterator<Item = &'a DemandEvent>,
    P: Partitioning + ?Sized,
{
    let k = partitions.len();
    let n = grid.n_bins();
    let mut counts = vec![0u64; k * n];
    let (mut kept, mut out_of_window, mut out_of_bounds) = (0, 0, 0);
    for e in events {
        let Some(bin) = grid.bin_of(e.timestamp) else {
            out_of_window += 1;
            continue;
        };
        let Some(p) = partitions.locate(e.lat, e.lon) else {
            out_of_bounds += 1;
            continue;
        };
        counts[p * n + bin] += 1;
        kept += 1;
    }
    let mut series = Vec::with_capacity(k);
    for p in 0..k {
        let area = partitions.area_km2(p);
        if !(area > 0.0) {
            return Err(domain!("partition {} has no area", partitions.partition_id(p)));
        }
        series.push(DemandSeries {
            partition_id: partitions.partition_id(p),
            values: counts[p * n..(p + 1) * n]
                .iter()
                .map(|&c| c as f64 / area)
                .collect(),
            area_km2: area,
            transform: Transform::None,
        });
    }
    Ok(Aggregation {
        series,
        kept,
        out_of_window,
        out_of_bounds,
    })
}
