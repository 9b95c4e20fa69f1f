//! Experiment configuration: plain `key = value` lines, `#` starts a comment.
//!
//! ```text
//! source = synthetic
//! seed = 7
//! k = 40
//! periods = 60, 15
//! synth.regime_switch_hour = 324
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use taxicast_core::forecast::ModelKind;
use taxicast_core::hedge::default_grid;
use taxicast_core::metrics::Metric;

use crate::error::{Error, Result};

/// Monday 2016-01-04 00:00 UTC.
pub const DEFAULT_START: i64 = 1_451_865_600;
/// Default K-Means input cap. Lloyd iterations to a 1e-6 relative
/// tolerance dominate run time on a full two-week synthetic city.
pub const DEFAULT_KMEANS_SAMPLE: usize = 50_000;
pub const BENGALURU_CENTER: (f64, f64) = (12.9716, 77.5946);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// A dense centre with rings of hotspots around it.
    Radial,
    /// Hotspots strung along one long axis.
    Linear,
}

/// Multiply every hotspot's scatter from `at_hour` (since start) onwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeSwitch {
    pub at_hour: f64,
    pub scatter_factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCitySpec {
    pub days: u32,
    /// UTC seconds of the first minute.
    pub start: i64,
    pub geometry: Geometry,
    pub center_lat: f64,
    pub center_lon: f64,
    pub hotspots: usize,
    /// Radius of the outermost ring (radial) or half the axis length (linear).
    pub city_radius_km: f64,
    /// Mean bookings per minute per hotspot before seasonal modulation.
    pub base_rate: f64,
    pub scatter_km: f64,
    pub daily_amplitude: f64,
    pub weekly_amplitude: f64,
    /// Daily peaks of different hotspots are offset by up to this much.
    pub phase_spread_hours: f64,
    pub regime: Option<RegimeSwitch>,
    pub users: usize,
    /// Chance that a booking is followed by a repeat from the same user.
    pub duplicate_prob: f64,
}

impl Default for SyntheticCitySpec {
    fn default() -> Self {
        Self {
            days: 14,
            start: DEFAULT_START,
            geometry: Geometry::Radial,
            center_lat: BENGALURU_CENTER.0,
            center_lon: BENGALURU_CENTER.1,
            hotspots: 16,
            city_radius_km: 12.0,
            base_rate: 1.0,
            scatter_km: 1.0,
            daily_amplitude: 0.7,
            weekly_amplitude: 0.25,
            phase_spread_hours: 8.0,
            regime: Some(RegimeSwitch {
                at_hour: 14.0 * 24.0 - 12.0,
                scatter_factor: 2.0,
            }),
            users: 20_000,
            duplicate_prob: 0.05,
        }
    }
}

impl SyntheticCitySpec {
    pub fn end(&self) -> i64 {
        self.start + i64::from(self.days) * 86_400
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    /// `user_id,timestamp_iso8601,lat,lon`
    A,
    /// NYC yellow taxi 2016: pickup datetime and coordinates by header name.
    B,
}

impl Schema {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Schema::A),
            "b" => Ok(Schema::B),
            other => Err(Error::Config(format!("unknown schema {other:?}, expected a or b"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Schema::A => "a",
            Schema::B => "b",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Synthetic(SyntheticCitySpec),
    Csv { path: PathBuf, schema: Schema },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    /// Chosen per series on the training split.
    Auto,
    Fixed(f64),
    /// Model the raw series.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub lat_min: f64,
    pub lon_min: f64,
    pub lat_max: f64,
    pub lon_max: f64,
}

impl BBox {
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        lat >= self.lat_min && lat <= self.lat_max && lon >= self.lon_min && lon <= self.lon_max
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: Source,
    pub seed: u64,
    pub k: usize,
    pub geohash_level: usize,
    pub periods: Vec<u32>,
    pub validation_hours: u32,
    pub test_hours: u32,
    pub season_hours: u32,
    pub dedup_minutes: u32,
    pub metric: Metric,
    pub candidates: Vec<ModelKind>,
    pub beta_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub lambda: LambdaChoice,
    /// Fixed study area; `None` uses the data's bounding box grown by 2%.
    pub bbox: Option<BBox>,
    pub kmeans_max_iter: usize,
    pub kmeans_tol: f64,
    /// Cluster at most this many training events (evenly strided); 0 = all.
    pub kmeans_sample: usize,
    pub tbats_harmonics: usize,
    pub tbats_periods_hours: Vec<u32>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            source: Source::Synthetic(SyntheticCitySpec::default()),
            seed: 1,
            k: 40,
            geohash_level: 6,
            periods: vec![60],
            validation_hours: 24,
            test_hours: 24,
            season_hours: 24,
            dedup_minutes: 30,
            metric: Metric::Smape,
            candidates: ModelKind::all(),
            beta_grid: default_grid(),
            gamma_grid: default_grid(),
            lambda: LambdaChoice::Auto,
            bbox: None,
            kmeans_max_iter: 300,
            kmeans_tol: 1e-6,
            kmeans_sample: DEFAULT_KMEANS_SAMPLE,
            tbats_harmonics: 2,
            tbats_periods_hours: vec![24],
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

pub fn parse_metric(v: &str) -> Result<Metric> {
    match v.trim().to_ascii_lowercase().as_str() {
        "smape" => Ok(Metric::Smape),
        "mase" => Ok(Metric::Mase),
        other => Err(Error::Config(format!("unknown metric {other:?}"))),
    }
}

pub fn metric_name(m: Metric) -> &'static str {
    match m {
        Metric::Smape => "smape",
        Metric::Mase => "mase",
    }
}

fn fmt_list<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parse config text over the defaults, then validate.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut synth = SyntheticCitySpec::default();
        let mut source_kind = String::from("synthetic");
        let mut input: Option<PathBuf> = None;
        let mut schema = Schema::A;
        let mut regime_hour: Option<Option<f64>> = None;
        let mut regime_factor: Option<f64> = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "source" => source_kind = value.to_ascii_lowercase(),
                "input" => input = Some(PathBuf::from(value)),
                "schema" => schema = Schema::parse(value)?,
                "seed" => cfg.seed = parse_num(key, value)?,
                "k" => cfg.k = parse_num(key, value)?,
                "geohash_level" => cfg.geohash_level = parse_num(key, value)?,
                "periods" => cfg.periods = parse_list(key, value)?,
                "validation_hours" => cfg.validation_hours = parse_num(key, value)?,
                "test_hours" => cfg.test_hours = parse_num(key, value)?,
                "season_hours" => cfg.season_hours = parse_num(key, value)?,
                "dedup_minutes" => cfg.dedup_minutes = parse_num(key, value)?,
                "metric" => cfg.metric = parse_metric(value)?,
                "candidates" => {
                    cfg.candidates = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| ModelKind::parse(s).map_err(|e| Error::Config(e.to_string())))
                        .collect::<Result<_>>()?
                }
                "beta_grid" => cfg.beta_grid = parse_list(key, value)?,
                "gamma_grid" => cfg.gamma_grid = parse_list(key, value)?,
                "lambda" => {
                    cfg.lambda = match value.to_ascii_lowercase().as_str() {
                        "auto" => LambdaChoice::Auto,
                        "none" => LambdaChoice::None,
                        v => LambdaChoice::Fixed(parse_num(key, v)?),
                    }
                }
                "bbox" => {
                    let v: Vec<f64> = parse_list(key, value)?;
                    if v.len() != 4 {
                        return Err(Error::Config("bbox needs lat_min,lon_min,lat_max,lon_max".into()));
                    }
                    cfg.bbox = Some(BBox {
                        lat_min: v[0],
                        lon_min: v[1],
                        lat_max: v[2],
                        lon_max: v[3],
                    });
                }
                "kmeans_max_iter" => cfg.kmeans_max_iter = parse_num(key, value)?,
                "kmeans_tol" => cfg.kmeans_tol = parse_num(key, value)?,
                "kmeans_sample" => cfg.kmeans_sample = parse_num(key, value)?,
                "tbats_harmonics" => cfg.tbats_harmonics = parse_num(key, value)?,
                "tbats_periods_hours" => cfg.tbats_periods_hours = parse_list(key, value)?,
                "synth.days" => synth.days = parse_num(key, value)?,
                "synth.start" => synth.start = parse_num(key, value)?,
                "synth.geometry" => {
                    synth.geometry = match value.to_ascii_lowercase().as_str() {
                        "radial" => Geometry::Radial,
                        "linear" => Geometry::Linear,
                        other => return Err(Error::Config(format!("unknown geometry {other:?}"))),
                    }
                }
                "synth.center_lat" => synth.center_lat = parse_num(key, value)?,
                "synth.center_lon" => synth.center_lon = parse_num(key, value)?,
                "synth.hotspots" => synth.hotspots = parse_num(key, value)?,
                "synth.city_radius_km" => synth.city_radius_km = parse_num(key, value)?,
                "synth.base_rate" => synth.base_rate = parse_num(key, value)?,
                "synth.scatter_km" => synth.scatter_km = parse_num(key, value)?,
                "synth.daily_amplitude" => synth.daily_amplitude = parse_num(key, value)?,
                "synth.weekly_amplitude" => synth.weekly_amplitude = parse_num(key, value)?,
                "synth.phase_spread_hours" => synth.phase_spread_hours = parse_num(key, value)?,
                "synth.regime_switch_hour" => {
                    regime_hour = Some(if value.eq_ignore_ascii_case("none") {
                        None
                    } else {
                        Some(parse_num(key, value)?)
                    })
                }
                "synth.regime_scatter_factor" => regime_factor = Some(parse_num(key, value)?),
                "synth.users" => synth.users = parse_num(key, value)?,
                "synth.duplicate_prob" => synth.duplicate_prob = parse_num(key, value)?,
                other => return Err(Error::Config(format!("unknown key {other:?}"))),
            }
        }

        // the default switch sits mid-way through the last day
        let default_factor = synth.regime.map_or(2.0, |r| r.scatter_factor);
        let hour = match regime_hour {
            Some(h) => h,
            None => Some(f64::from(synth.days) * 24.0 - 12.0),
        };
        synth.regime = hour.map(|at_hour| RegimeSwitch {
            at_hour,
            scatter_factor: regime_factor.unwrap_or(default_factor),
        });

        cfg.source = match source_kind.as_str() {
            "synthetic" => Source::Synthetic(synth),
            "csv" => Source::Csv {
                path: input.ok_or_else(|| Error::Config("source = csv needs input = PATH".into()))?,
                schema,
            },
            other => return Err(Error::Config(format!("unknown source {other:?}"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(1..=taxicast_core::geohash::MAX_LEVEL).contains(&self.geohash_level) {
            return bad(format!("geohash_level {} outside 1..=12", self.geohash_level));
        }
        if self.periods.is_empty() {
            return bad("at least one sampling period is required".into());
        }
        for p in &self.periods {
            if !taxicast_core::demand::SAMPLING_PERIODS.contains(p) {
                return bad(format!("sampling period {p} not one of 5, 15, 30, 60"));
            }
        }
        if self.validation_hours == 0 || self.test_hours == 0 || self.season_hours == 0 {
            return bad("validation, test and season lengths must be positive".into());
        }
        for g in [&self.beta_grid, &self.gamma_grid] {
            if g.is_empty() || g.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return bad("beta and gamma grids must be nonempty and inside [0, 1]".into());
            }
        }
        if let LambdaChoice::Fixed(l) = self.lambda {
            if !(-1.0..=2.0).contains(&l) {
                return bad(format!("lambda {l} outside [-1, 2]"));
            }
        }
        if let Some(b) = self.bbox {
            if !(b.lat_min < b.lat_max && b.lon_min < b.lon_max) {
                return bad("bbox must have lat_min < lat_max and lon_min < lon_max".into());
            }
        }
        if self.kmeans_max_iter == 0 || !(self.kmeans_tol >= 0.0) {
            return bad("kmeans_max_iter must be positive and kmeans_tol nonnegative".into());
        }
        if self.tbats_periods_hours.contains(&0) {
            return bad("TBATS periods must be positive".into());
        }
        if let Source::Synthetic(s) = &self.source {
            if s.days < 7 {
                return bad(format!("synthetic span of {} days is shorter than one week", s.days));
            }
            if s.hotspots == 0 || s.users == 0 {
                return bad("synthetic city needs hotspots and users".into());
            }
            if !(s.base_rate >= 0.0) || !(s.scatter_km > 0.0) || !(s.city_radius_km >= 0.0) {
                return bad("rates must be nonnegative and scatter positive".into());
            }
            if !(s.daily_amplitude >= 0.0) || !(s.weekly_amplitude >= 0.0) || !(s.phase_spread_hours >= 0.0) {
                return bad("seasonal amplitudes and phase spread must be nonnegative".into());
            }
            if !(0.0..=1.0).contains(&s.duplicate_prob) {
                return bad("duplicate_prob must be inside [0, 1]".into());
            }
            if let Some(r) = s.regime {
                if !(r.scatter_factor > 0.0) {
                    return bad("regime scatter factor must be positive".into());
                }
            }
        }
        let span_hours = self.validation_hours + self.test_hours;
        if let Source::Synthetic(s) = &self.source {
            if span_hours + self.season_hours > s.days * 24 {
                return bad("validation and test windows leave less than one season of training".into());
            }
        }
        Ok(())
    }

    /// Render as config text that parses back to the same config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        match &self.source {
            Source::Synthetic(_) => kv("source", "synthetic".into()),
            Source::Csv { path, schema } => {
                kv("source", "csv".into());
                kv("input", path.display().to_string());
                kv("schema", schema.name().into());
            }
        }
        kv("seed", self.seed.to_string());
        kv("k", self.k.to_string());
        kv("geohash_level", self.geohash_level.to_string());
        kv("periods", fmt_list(&self.periods));
        kv("validation_hours", self.validation_hours.to_string());
        kv("test_hours", self.test_hours.to_string());
        kv("season_hours", self.season_hours.to_string());
        kv("dedup_minutes", self.dedup_minutes.to_string());
        kv("metric", metric_name(self.metric).into());
        let names: Vec<String> = self.candidates.iter().map(|c| c.name()).collect();
        kv("candidates", names.join(","));
        kv("beta_grid", fmt_list(&self.beta_grid));
        kv("gamma_grid", fmt_list(&self.gamma_grid));
        kv(
            "lambda",
            match self.lambda {
                LambdaChoice::Auto => "auto".into(),
                LambdaChoice::None => "none".into(),
                LambdaChoice::Fixed(l) => l.to_string(),
            },
        );
        if let Some(b) = self.bbox {
            kv("bbox", fmt_list(&[b.lat_min, b.lon_min, b.lat_max, b.lon_max]));
        }
        kv("kmeans_max_iter", self.kmeans_max_iter.to_string());
        kv("kmeans_tol", self.kmeans_tol.to_string());
        kv("kmeans_sample", self.kmeans_sample.to_string());
        kv("tbats_harmonics", self.tbats_harmonics.to_string());
        kv("tbats_periods_hours", fmt_list(&self.tbats_periods_hours));
        if let Source::Synthetic(c) = &self.source {
            kv("synth.days", c.days.to_string());
            kv("synth.start", c.start.to_string());
            kv(
                "synth.geometry",
                match c.geometry {
                    Geometry::Radial => "radial".into(),
                    Geometry::Linear => "linear".into(),
                },
            );
            kv("synth.center_lat", c.center_lat.to_string());
            kv("synth.center_lon", c.center_lon.to_string());
            kv("synth.hotspots", c.hotspots.to_string());
            kv("synth.city_radius_km", c.city_radius_km.to_string());
            kv("synth.base_rate", c.base_rate.to_string());
            kv("synth.scatter_km", c.scatter_km.to_string());
            kv("synth.daily_amplitude", c.daily_amplitude.to_string());
            kv("synth.weekly_amplitude", c.weekly_amplitude.to_string());
            kv("synth.phase_spread_hours", c.phase_spread_hours.to_string());
            match c.regime {
                Some(r) => {
                    kv("synth.regime_switch_hour", r.at_hour.to_string());
                    kv("synth.regime_scatter_factor", r.scatter_factor.to_string());
                }
                None => kv("synth.regime_switch_hour", "none".into()),
            }
            kv("synth.users", c.users.to_string());
            kv("synth.duplicate_prob", c.duplicate_prob.to_string());
        }
        s
    }

    pub fn synthetic(&self) -> Option<&SyntheticCitySpec> {
        match &self.source {
            Source::Synthetic(s) => Some(s),
            Source::Csv { .. } => None,
        }
    }
}
