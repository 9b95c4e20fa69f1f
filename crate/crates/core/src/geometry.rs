//! Planar geometry shared by clustering and tessellation.
//!
//! Coordinates are projected with an equirectangular projection about a fixed
//! reference point. The projection is affine in (lat, lon), so centroids and
//! bisectors computed in the plane map back to geographic coordinates exactly.

use crate::EARTH_RADIUS_KM;

/// A point in the projected plane, in kilometres.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dist_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(self, other: Point) -> f64 {
        libm::sqrt(self.dist_sq(other))
    }
}

/// Axis-aligned rectangle in the projected plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Closed containment.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn contains_strictly(&self, p: Point) -> bool {
        p.x > self.min.x && p.x < self.max.x && p.y > self.min.y && p.y < self.max.y
    }
}

/// Index of the site nearest to `p` under squared Euclidean distance.
///
/// Exact ties resolve to the lowest index. Both K-Means assignment and Voronoi
/// location go through this function so the two always agree.
///
/// Panics if `sites` is empty.
#[inline]
pub fn nearest_index(sites: &[Point], p: Point) -> usize {
    let mut best = 0;
    let mut best_d = p.dist_sq(sites[0]);
    for (i, s) in sites.iter().enumerate().skip(1) {
        let d = p.dist_sq(*s);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Equirectangular projection about a reference latitude/longitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    lat0: f64,
    lon0: f64,
    cos_lat0: f64,
}

impl Projection {
    pub fn new(lat0: f64, lon0: f64) -> Self {
        Self {
            lat0,
            lon0,
            cos_lat0: libm::cos(lat0.to_radians()),
        }
    }

    /// Projection about the mean latitude and longitude of `coords`.
    /// Returns `None` for an empty input.
    pub fn about_mean<I>(coords: I) -> Option<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let (mut sum_lat, mut sum_lon, mut n) = (0.0, 0.0, 0usize);
        for (lat, lon) in coords {
            sum_lat += lat;
            sum_lon += lon;
            n += 1;
        }
        (n > 0).then(|| Self::new(sum_lat / n as f64, sum_lon / n as f64))
    }

    pub fn reference(&self) -> (f64, f64) {
        (self.lat0, self.lon0)
    }

    pub fn to_plane(&self, lat: f64, lon: f64) -> Point {
        Point {
            x: EARTH_RADIUS_KM * (lon - self.lon0).to_radians() * self.cos_lat0,
            y: EARTH_RADIUS_KM * (lat - self.lat0).to_radians(),
        }
    }

    pub fn to_latlon(&self, p: Point) -> (f64, f64) {
        let lat = self.lat0 + (p.y / EARTH_RADIUS_KM).to_degrees();
        let lon = self.lon0 + (p.x / (EARTH_RADIUS_KM * self.cos_lat0)).to_degrees();
        (lat, lon)
    }
}

/// Shoelace area of a simple polygon (absolute value).
pub fn polygon_area(vertices: &[Point]) -> f64 {
    libm::fabs(signed_area(vertices))
}

pub(crate) fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    0.5 * acc
}

/// Area centroid of a simple polygon. Degenerate polygons fall back to the
/// vertex mean.
pub fn polygon_centroid(vertices: &[Point]) -> Point {
    let a = signed_area(vertices);
    let n = vertices.len();
    if n == 0 {
        return Point::default();
    }
    if libm::fabs(a) < 1e-15 {
        let (sx, sy) = vertices
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        return Point::new(sx / n as f64, sy / n as f64);
    }
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        let cross = p.x * q.y - q.x * p.y;
        cx += (p.x + q.x) * cross;
        cy += (p.y + q.y) * cross;
    }
    Point::new(cx / (6.0 * a), cy / (6.0 * a))
}
