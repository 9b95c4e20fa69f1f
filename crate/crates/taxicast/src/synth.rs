//! Synthetic booking streams shaped like an app-hail city.
//!
//! Each hotspot emits Poisson bookings minute by minute with intensity
//!
//! ```text
//! λ_i(t) = r_i · (1 + a_d sin(2π(t − φ_i)/day)) · (1 + a_w sin(2πt/week)),  clipped at 0
//! ```
//!
//! and places them at its centre plus isotropic Gaussian scatter in km. An
//! optional regime switch widens the scatter from a given hour onwards.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use taxicast_core::demand::DemandEvent;
use taxicast_core::geometry::{Point, Projection};

use crate::config::{Geometry, SyntheticCitySpec};
use crate::error::{Error, Result};

const DAY_MIN: f64 = 1440.0;
const WEEK_MIN: f64 = 7.0 * 1440.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Hotspot {
    /// Position in km relative to the city centre.
    pub center: Point,
    /// Mean bookings per minute before seasonal modulation.
    pub rate: f64,
    pub scatter_km: f64,
    /// Daily phase offset in minutes.
    pub phase_min: f64,
}

/// Hotspot layout for a spec, deterministic per seed.
pub fn hotspots(spec: &SyntheticCitySpec, seed: u64) -> Vec<Hotspot> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let n = spec.hotspots;
    let r = spec.city_radius_km;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (center, weight) = match spec.geometry {
            Geometry::Radial => {
                if i == 0 {
                    (Point::new(0.0, 0.0), 2.0)
                } else {
                    // inner ring of up to 6, the rest on an outer ring
                    let (ring, idx, count) = if i <= 6 {
                        (1.0, i - 1, (n - 1).min(6))
                    } else {
                        (2.0, i - 7, n - 7)
                    };
                    let radius = r * ring / 2.0;
                    let angle = TAU * idx as f64 / count as f64 + rng.random_range(-0.2..0.2) + ring * 0.3;
                    (
                        Point::new(radius * angle.cos(), radius * angle.sin()),
                        1.0 / ring,
                    )
                }
            }
            Geometry::Linear => {
                let y = if n == 1 { 0.0 } else { -r + 2.0 * r * i as f64 / (n - 1) as f64 };
                let x = rng.random_range(-0.1 * r..0.1 * r);
                (Point::new(x, y), 1.0)
            }
        };
        out.push(Hotspot {
            center,
            rate: spec.base_rate * weight * rng.random_range(0.6..1.4),
            scatter_km: spec.scatter_km * rng.random_range(0.7..1.3),
            phase_min: rng.random_range(0.0..=1.0) * spec.phase_spread_hours * 60.0,
        });
    }
    // keep the average per-hotspot rate at base_rate
    let mean = out.iter().map(|h| h.rate).sum::<f64>() / n.max(1) as f64;
    if mean > 0.0 {
        for h in &mut out {
            h.rate *= spec.base_rate / mean;
        }
    }
    out
}

/// Intensity of one hotspot in bookings per minute at minute `t` since start.
pub fn intensity(spec: &SyntheticCitySpec, h: &Hotspot, t: f64) -> f64 {
    let daily = 1.0 + spec.daily_amplitude * (TAU * (t - h.phase_min) / DAY_MIN).sin();
    let weekly = 1.0 + spec.weekly_amplitude * (TAU * t / WEEK_MIN).sin();
    (h.rate * daily * weekly).max(0.0)
}

/// Expected number of bookings over the whole span, before duplicates.
pub fn expected_count(spec: &SyntheticCitySpec, seed: u64) -> f64 {
    let hs = hotspots(spec, seed);
    let minutes = spec.days as usize * 1440;
    hs.iter()
        .map(|h| (0..minutes).map(|m| intensity(spec, h, m as f64)).sum::<f64>())
        .sum()
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Generate the booking stream, sorted by time. Deterministic per seed.
pub fn generate(spec: &SyntheticCitySpec, seed: u64) -> Result<Vec<DemandEvent>> {
    if spec.days < 7 {
        return Err(Error::Config(format!(
            "synthetic span of {} days is shorter than one week",
            spec.days
        )));
    }
    let hs = hotspots(spec, seed);
    let proj = Projection::new(spec.center_lat, spec.center_lon);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let minutes = spec.days as usize * 1440;
    let switch_min = spec.regime.map(|r| (r.at_hour * 60.0, r.scatter_factor));
    let mut events = Vec::new();

    for m in 0..minutes {
        let t = m as f64;
        let widen = match switch_min {
            Some((at, f)) if t >= at => f,
            _ => 1.0,
        };
        for h in &hs {
            let lambda = intensity(spec, h, t);
            if lambda <= 0.0 {
                continue;
            }
            let count = Poisson::new(lambda).map_err(|e| Error::Numeric(e.to_string()))?.sample(&mut rng) as u64;
            for _ in 0..count {
                let s = h.scatter_km * widen;
                let p = Point::new(h.center.x + s * unit.sample(&mut rng), h.center.y + s * unit.sample(&mut rng));
                let (lat, lon) = proj.to_latlon(p);
                let ts = spec.start + (m as i64) * 60 + rng.random_range(0..60);
                let user = format!("u{:06}", rng.random_range(0..spec.users));
                if spec.duplicate_prob > 0.0 && rng.random_bool(spec.duplicate_prob) {
                    // a repeat booking a few minutes later from almost the same spot
                    let dt = rng.random_range(60..600);
                    let jitter = Point::new(p.x + 0.02 * unit.sample(&mut rng), p.y + 0.02 * unit.sample(&mut rng));
                    let (dlat, dlon) = proj.to_latlon(jitter);
                    if ts + dt < spec.end() {
                        events.push(DemandEvent {
                            timestamp: ts + dt,
                            lat: round6(dlat),
                            lon: round6(dlon),
                            user_id: Some(user.clone()),
                        });
                    }
                }
                events.push(DemandEvent {
                    timestamp: ts,
                    lat: round6(lat),
                    lon: round6(lon),
                    user_id: Some(user),
                });
            }
        }
    }
    events.sort_by(|a, b| a.timestamp.cmp(&b.timestamp));
    Ok(events)
}
