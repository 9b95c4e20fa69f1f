//! Voronoi partition of a bounding rectangle by half-plane clipping.
//!
//! Each cell starts as the rectangle and is clipped against the perpendicular
//! bisector with every other seed, nearest seeds first. Once the remaining
//! seeds are farther than twice the cell's radius their bisectors cannot cut
//! the cell and the loop stops. Worst case O(K²) clips.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Result};
use crate::geometry::{nearest_index, polygon_area, polygon_centroid, Point, Rect};

/// Seeds closer than this (km) are treated as coincident.
pub const COINCIDENT_KM: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiDiagram {
    seeds: Vec<Point>,
    cells: Vec<Vec<Point>>,
    areas: Vec<f64>,
    bounds: Rect,
}

impl VoronoiDiagram {
    pub fn seeds(&self) -> &[Point] {
        &self.seeds
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    /// Counter-clockwise vertices of cell `i`.
    pub fn cell(&self, i: usize) -> Option<&[Point]> {
        self.cells.get(i).map(|c| c.as_slice())
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn cell_area_km2(&self, i: usize) -> Result<f64> {
        self.areas
            .get(i)
            .copied()
            .ok_or_else(|| domain!("cell index {i} out of range (K = {})", self.len()))
    }

    /// Area centroid of cell `i`.
    pub fn cell_centroid(&self, i: usize) -> Option<Point> {
        self.cells.get(i).map(|c| polygon_centroid(c))
    }

    /// Index of the seed nearest to `p`; exact ties go to the lower index.
    pub fn locate(&self, p: Point) -> Result<usize> {
        if !self.bounds.contains(p) {
            return Err(domain!("point ({}, {}) outside the diagram bounds", p.x, p.y));
        }
        Ok(nearest_index(&self.seeds, p))
    }
}

/// Build the diagram of `seeds` clipped to `bounds`.
pub fn build(seeds: &[Point], bounds: Rect) -> Result<VoronoiDiagram> {
    if seeds.is_empty() {
        return Err(domain!("at least one seed is required"));
    }
    if !(bounds.width() > 0.0 && bounds.height() > 0.0) {
        return Err(domain!("bounding rectangle has no area"));
    }
    for (i, s) in seeds.iter().enumerate() {
        if !bounds.contains_strictly(*s) {
            return Err(domain!("seed {i} lies outside the bounding rectangle"));
        }
    }
    // Sorting by x lets the coincidence check stop early.
    let mut by_x: Vec<usize> = (0..seeds.len()).collect();
    by_x.sort_by(|&a, &b| seeds[a].x.total_cmp(&seeds[b].x));
    for (w, &i) in by_x.iter().enumerate() {
        for &j in &by_x[w + 1..] {
            if seeds[j].x - seeds[i].x > COINCIDENT_KM {
                break;
            }
            if seeds[i].dist(seeds[j]) <= COINCIDENT_KM {
                return Err(domain!("seeds {i} and {j} coincide"));
            }
        }
    }

    let rect = vec![
        bounds.min,
        Point::new(bounds.max.x, bounds.min.y),
        bounds.max,
        Point::new(bounds.min.x, bounds.max.y),
    ];
    let mut cells = Vec::with_capacity(seeds.len());
    let mut order: Vec<usize> = Vec::with_capacity(seeds.len());
    for (i, &s) in seeds.iter().enumerate() {
        order.clear();
        order.extend((0..seeds.len()).filter(|&j| j != i));
        order.sort_by(|&a, &b| s.dist_sq(seeds[a]).total_cmp(&s.dist_sq(seeds[b])).then(a.cmp(&b)));
        let mut poly = rect.clone();
        for &j in &order {
            let reach = poly.iter().map(|v| v.dist_sq(s)).fold(0.0, f64::max);
            if s.dist_sq(seeds[j]) > 4.0 * reach {
                break;
            }
            poly = clip_toward(&poly, s, seeds[j]);
            if poly.is_empty() {
                break;
            }
        }
        cells.push(poly);
    }
    let areas = cells.iter().map(|c| polygon_area(c)).collect();
    Ok(VoronoiDiagram {
        seeds: seeds.to_vec(),
        cells,
        areas,
        bounds,
    })
}

/// Keep the part of convex `poly` that is at least as close to `own` as to
/// `other` (Sutherland-Hodgman against one half-plane).
fn clip_toward(poly: &[Point], own: Point, other: Point) -> Vec<Point> {
    let nx = other.x - own.x;
    let ny = other.y - own.y;
    let mx = 0.5 * (own.x + other.x);
    let my = 0.5 * (own.y + other.y);
    let side = |p: Point| (p.x - mx) * nx + (p.y - my) * ny;

    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let da = side(a);
        let db = side(b);
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            let t = da / (da - db);
            out.push(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rect_3x2() -> Rect {
        Rect::new(Point::new(-1.5, -1.0), Point::new(1.5, 1.0))
    }

    #[test]
    fn two_symmetric_seeds_split_evenly() {
        let d = build(&[Point::new(-0.25, 0.0), Point::new(0.25, 0.0)], rect_3x2()).unwrap();
        assert!((d.cell_area_km2(0).unwrap() - 3.0).abs() < 1e-12);
        assert!((d.cell_area_km2(1).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(d.locate(Point::new(0.0, 0.3)).unwrap(), 0);
    }

    #[test]
    fn single_seed_takes_everything() {
        let d = build(&[Point::new(0.2, 0.1)], rect_3x2()).unwrap();
        assert!((d.cell_area_km2(0).unwrap() - 6.0).abs() < 1e-12);
        assert_eq!(d.cell(0).unwrap().len(), 4);
    }

    #[test]
    fn rejects_invalid_seeds() {
        let r = rect_3x2();
        assert!(build(&[], r).is_err());
        assert!(build(&[Point::new(0.0, 0.0), Point::new(0.0, 0.0)], r).is_err());
        assert!(build(&[Point::new(2.0, 0.0)], r).is_err());
        assert!(build(&[Point::new(1.5, 0.0)], r).is_err());
        let d = build(&[Point::new(0.0, 0.0)], r).unwrap();
        assert!(d.cell_area_km2(1).is_err());
        assert!(d.locate(Point::new(5.0, 0.0)).is_err());
    }

    #[test]
    fn bisector_tie_goes_low() {
        let seeds = [
            Point::new(-3.0, 3.0),
            Point::new(3.0, 3.0),
            Point::new(-1.0, -1.0),
            Point::new(3.0, -3.0),
            Point::new(4.0, 4.0),
            Point::new(1.0, -1.0),
        ];
        let r = Rect::new(Point::new(-5.0, -5.0), Point::new(5.0, 5.0));
        let d = build(&seeds, r).unwrap();
        assert_eq!(d.locate(Point::new(0.0, -1.0)).unwrap(), 2);
        assert_eq!(d.locate(seeds[5]).unwrap(), 5);
    }

    fn point_in_convex(poly: &[Point], p: Point) -> bool {
        let n = poly.len();
        (0..n).all(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= -1e-9
        })
    }

    #[test]
    fn monte_carlo_membership_agrees_with_nearest_seed() {
        let mut rng = StdRng::seed_from_u64(42);
        let r = Rect::new(Point::new(0.0, 0.0), Point::new(10.0, 8.0));
        let seeds: Vec<Point> = (0..25)
            .map(|_| Point::new(rng.random_range(0.1..9.9), rng.random_range(0.1..7.9)))
            .collect();
        let d = build(&seeds, r).unwrap();
        let total: f64 = d.areas().iter().sum();
        assert!((total - r.area()).abs() / r.area() < 1e-6);
        let mut agree = 0;
        let samples = 100_000;
        for _ in 0..samples {
            let p = Point::new(rng.random_range(0.0..10.0), rng.random_range(0.0..8.0));
            let mut nearest = 0;
            for (i, s) in seeds.iter().enumerate() {
                if p.dist_sq(*s) < p.dist_sq(seeds[nearest]) {
                    nearest = i;
                }
            }
            if point_in_convex(d.cell(nearest).unwrap(), p) {
                agree += 1;
            }
        }
        assert!(agree as f64 / samples as f64 >= 0.999, "agreement {agree}");
        for i in 0..seeds.len() {
            assert!(point_in_convex(d.cell(i).unwrap(), seeds[i]));
        }
    }
}
