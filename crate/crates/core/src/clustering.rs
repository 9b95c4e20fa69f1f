//! K-Means clustering of demand points in the projected plane.
//!
//! Lloyd iterations from a seeded k-means++ initialization. The model's
//! centroids are the "demand centroids" that seed the Voronoi tessellation;
//! the density of a centroid is the number of points assigned to it.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};
use crate::geometry::{nearest_index, Point};

/// K used for the Bengaluru-scale tessellation.
pub const BENGALURU_K: usize = 740;
/// K used for the New York-scale tessellation.
pub const NEW_YORK_K: usize = 780;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop when the relative objective improvement falls below this.
    pub tol: f64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

/// Why Lloyd's loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    NoReassignment,
    Tolerance,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    centroids: Vec<Point>,
    assignments: Vec<usize>,
    objective: f64,
    density: Vec<usize>,
    history: Vec<f64>,
    termination: Termination,
}

impl ClusterModel {
    pub fn centroids(&self) -> &[Point] {
        &self.centroids
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    /// Sum of squared distances from each point to its centroid (km²).
    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn density(&self) -> &[usize] {
        &self.density
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Objective after initialization and after every Lloyd iteration.
    pub fn objective_history(&self) -> &[f64] {
        &self.history
    }

    pub fn iterations(&self) -> usize {
        self.history.len().saturating_sub(1)
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    /// Centroid indices by descending density, ties by ascending index.
    pub fn sort_by_density(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.centroids.len()).collect();
        order.sort_by(|&a, &b| self.density[b].cmp(&self.density[a]).then(a.cmp(&b)));
        order
    }

    pub fn nearest_centroid(&self, p: Point) -> usize {
        nearest_index(&self.centroids, p)
    }
}

/// Fit K-Means to `points`.
pub fn fit(points: &[Point], config: &KMeansConfig) -> Result<ClusterModel> {
    let n = points.len();
    let k = config.k;
    if n == 0 {
        return Err(domain!("cannot cluster an empty point set"));
    }
    if k == 0 {
        return Err(domain!("K must be positive"));
    }
    if k > n {
        return Err(domain!("K = {k} exceeds the number of points {n}"));
    }
    if !config.tol.is_finite() || config.tol < 0.0 {
        return Err(domain!("tolerance must be a nonnegative real"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut centroids = kmeans_plus_plus(points, k, &mut rng);

    let mut assignments = vec![0usize; n];
    let mut objective = assign(points, &centroids, &mut assignments);
    let mut history = vec![objective];
    let mut termination = Termination::MaxIter;

    for _ in 0..config.max_iter {
        let before = assignments.clone();
        update_centroids(points, &mut centroids, &mut assignments);
        let next = assign(points, &centroids, &mut assignments);
        history.push(next);
        let moved = before
            .iter()
            .zip(&assignments)
            .filter(|(a, b)| a != b)
            .count();
        let improvement = objective - next;
        objective = next;
        if moved == 0 {
            termination = Termination::NoReassignment;
            break;
        }
        if objective > 0.0 && improvement / (objective + improvement) < config.tol {
            termination = Termination::Tolerance;
            break;
        }
    }

    let mut density = vec![0usize; k];
    for &a in &assignments {
        density[a] += 1;
    }

    Ok(ClusterModel {
        centroids,
        assignments,
        objective,
        density,
        history,
        termination,
    })
}

/// Seeded k-means++: the first centre uniformly, the rest with probability
/// proportional to the squared distance to the nearest chosen centre.
fn kmeans_plus_plus(points: &[Point], k: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[first]);
    let mut d2: Vec<f64> = points.iter().map(|p| p.dist_sq(points[first])).collect();

    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `acc` a hair below `target`; take the last
            // candidate with positive weight.
            pick.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).unwrap_or(0))
        } else {
            // Every remaining point coincides with a centre already chosen.
            chosen.iter().position(|&c| !c).unwrap_or(0)
        };
        chosen[pick] = true;
        let c = points[pick];
        centroids.push(c);
        for (d, p) in d2.iter_mut().zip(points) {
            let nd = p.dist_sq(c);
            if nd < *d {
                *d = nd;
            }
        }
    }
    centroids
}

fn assign(points: &[Point], centroids: &[Point], assignments: &mut [usize]) -> f64 {
    let mut objective = 0.0;
    for (a, p) in assignments.iter_mut().zip(points) {
        *a = nearest_index(centroids, *p);
        objective += p.dist_sq(centroids[*a]);
    }
    objective
}

/// Move each centroid to the mean of its points. An empty cluster is
/// re-seeded at the point currently farthest from its own centroid.
fn update_centroids(points: &[Point], centroids: &mut [Point], assignments: &mut [usize]) {
    let k = centroids.len();
    let mut sums = vec![(0.0f64, 0.0f64, 0usize); k];
    for (p, &a) in points.iter().zip(assignments.iter()) {
        let s = &mut sums[a];
        s.0 += p.x;
        s.1 += p.y;
        s.2 += 1;
    }
    for (c, s) in centroids.iter_mut().zip(&sums) {
        if s.2 > 0 {
            *c = Point::new(s.0 / s.2 as f64, s.1 / s.2 as f64);
        }
    }
    for j in 0..k {
        if sums[j].2 > 0 {
            continue;
        }
        let mut far = 0;
        let mut far_d = -1.0;
        for (i, p) in points.iter().enumerate() {
            let d = p.dist_sq(centroids[assignments[i]]);
            if d > far_d {
                far_d = d;
                far = i;
            }
        }
        if far_d <= 0.0 {
            continue;
        }
        let donor = assignments[far];
        centroids[j] = points[far];
        assignments[far] = j;
        sums[donor].2 -= 1;
        sums[j].2 = 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;

    fn random_points(n: usize, seed: u64) -> Vec<Point> {
        let mut rng = StdRng::seed_from_u64(seed);
        (0..n)
            .map(|_| Point::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)))
            .collect()
    }

    /// Exhaustive best 2-partition of a small point set.
    fn brute_force_two_means(points: &[Point]) -> f64 {
        let n = points.len();
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << n) - 1 {
            let mut j = 0.0;
            for side in [true, false] {
                let members: Vec<Point> = (0..n)
                    .filter(|&i| ((mask >> i) & 1 == 1) == side)
                    .map(|i| points[i])
                    .collect();
                let cx = members.iter().map(|p| p.x).sum::<f64>() / members.len() as f64;
                let cy = members.iter().map(|p| p.y).sum::<f64>() / members.len() as f64;
                j += members
                    .iter()
                    .map(|p| p.dist_sq(Point::new(cx, cy)))
                    .sum::<f64>();
            }
            best = best.min(j);
        }
        best
    }

    #[test]
    fn four_point_instance_matches_brute_force() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(10.0, 0.0),
            Point::new(10.0, 1.0),
        ];
        let optimum = brute_force_two_means(&pts);
        assert!((optimum - 1.0).abs() < 1e-12);
        for seed in 0..20 {
            let m = fit(&pts, &KMeansConfig::new(2, seed)).unwrap();
            assert!((m.objective() - optimum).abs() < 1e-12, "seed {seed}");
            let mut cs: Vec<(f64, f64)> = m.centroids().iter().map(|c| (c.x, c.y)).collect();
            cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(cs, vec![(0.0, 0.5), (10.0, 0.5)]);
        }
    }

    #[test]
    fn k_equals_n_is_exact() {
        let pts = random_points(15, 3);
        let m = fit(&pts, &KMeansConfig::new(15, 9)).unwrap();
        assert_eq!(m.objective(), 0.0);
        assert!(m.density().iter().all(|&d| d == 1));
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let pts = random_points(50, 4);
        let m = fit(&pts, &KMeansConfig::new(1, 0)).unwrap();
        let mx = pts.iter().map(|p| p.x).sum::<f64>() / 50.0;
        let my = pts.iter().map(|p| p.y).sum::<f64>() / 50.0;
        assert!((m.centroids()[0].x - mx).abs() < 1e-12);
        assert!((m.centroids()[0].y - my).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_k() {
        let pts = random_points(5, 1);
        assert!(fit(&pts, &KMeansConfig::new(0, 0)).is_err());
        assert!(fit(&pts, &KMeansConfig::new(6, 0)).is_err());
        assert!(fit(&[], &KMeansConfig::new(1, 0)).is_err());
    }

    #[test]
    fn model_invariants_hold() {
        let pts = random_points(400, 11);
        let m = fit(&pts, &KMeansConfig::new(12, 5)).unwrap();
        assert_eq!(m.density().iter().sum::<usize>(), 400);
        let mut j = 0.0;
        for (p, &a) in pts.iter().zip(m.assignments()) {
            assert_eq!(a, nearest_index(m.centroids(), *p));
            j += p.dist_sq(m.centroids()[a]);
        }
        assert!((j - m.objective()).abs() <= 1e-9 * m.objective());
        for w in m.objective_history().windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn duplicated_points_still_get_k_centroids() {
        let mut pts = vec![Point::new(1.0, 1.0); 6];
        pts.extend([Point::new(2.0, 2.0), Point::new(3.0, 3.0)]);
        let m = fit(&pts, &KMeansConfig::new(3, 2)).unwrap();
        assert_eq!(m.k(), 3);
        assert!(m.objective().abs() < 1e-12);
    }

    #[test]
    fn density_order() {
        let m = ClusterModel {
            centroids: vec![Point::default(); 3],
            assignments: vec![],
            objective: 0.0,
            density: vec![5, 9, 9],
            history: vec![],
            termination: Termination::NoReassignment,
        };
        assert_eq!(m.sort_by_density(), vec![1, 2, 0]);
        let uniform = ClusterModel {
            density: vec![4, 4, 4],
            ..m.clone()
        };
        assert_eq!(uniform.sort_by_density(), vec![0, 1, 2]);
        let single = ClusterModel {
            centroids: vec![Point::default()],
            density: vec![7],
            ..m
        };
        assert_eq!(single.sort_by_density(), vec![0]);
    }

    #[test]
    fn nearest_centroid_matches_linear_scan() {
        let pts = random_points(300, 21);
        let m = fit(&pts, &KMeansConfig::new(9, 1)).unwrap();
        let probes = random_points(500, 22);
        for p in probes {
            let mut best = 0;
            for (i, c) in m.centroids().iter().enumerate() {
                if p.dist_sq(*c) < p.dist_sq(m.centroids()[best]) {
                    best = i;
                }
            }
            assert_eq!(m.nearest_centroid(p), best);
        }
        assert_eq!(m.nearest_centroid(m.centroids()[3]), 3);
    }

    #[test]
    fn equidistant_probe_takes_lower_index() {
        let m = ClusterModel {
            centroids: vec![
                Point::new(5.0, 5.0),
                Point::new(-1.0, 0.0),
                Point::new(9.0, 9.0),
                Point::new(7.0, -7.0),
                Point::new(1.0, 0.0),
            ],
            assignments: vec![],
            objective: 0.0,
            density: vec![0; 5],
            history: vec![],
            termination: Termination::NoReassignment,
        };
        assert_eq!(m.nearest_centroid(Point::new(0.0, 0.0)), 1);
    }

    #[test]
    fn permutation_keeps_objective() {
        let pts = random_points(200, 8);
        let cfg = KMeansConfig::new(5, 3);
        let a = fit(&pts, &cfg).unwrap();
        // Re-run from the same initial centroids on a reversed input.
        let mut rev = pts.clone();
        rev.reverse();
        let mut centroids = kmeans_plus_plus(&pts, 5, &mut ChaCha8Rng::seed_from_u64(3));
        let mut assignments = vec![0; rev.len()];
        let mut j = assign(&rev, &centroids, &mut assignments);
        for _ in 0..300 {
            update_centroids(&rev, &mut centroids, &mut assignments);
            let before = assignments.clone();
            j = assign(&rev, &centroids, &mut assignments);
            if before == assignments {
                break;
            }
        }
        assert!((j - a.objective()).abs() <= 1e-6 * a.objective());
    }
}
