//! Numerical core for spatio-temporal demand forecasting.
//!
//! Everything here is pure computation over in-memory data: geohash and
//! Voronoi tessellation of city space, K-Means demand centroids,
//! area-normalized demand aggregation, per-cell seasonal forecasters, forecast
//! error metrics, and a discounted HEDGE combiner that picks one tessellation
//! strategy per time step.
//!
//! The crate is `no_std` and only needs `alloc`. IO, CSV formats and the
//! command line live in the `taxicast` companion crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod clustering;
pub mod demand;
pub mod error;
pub mod forecast;
pub mod geohash;
pub mod geometry;
pub mod hedge;
pub mod metrics;
pub mod voronoi;

pub use error::{Error, Result};

/// Mean earth radius (IUGG) in kilometres, shared by every distance and area
/// computation in the crate.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;
