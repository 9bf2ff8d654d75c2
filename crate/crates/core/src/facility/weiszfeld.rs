//! Geometric median by Weiszfeld iteration.
//!
//! Starts at the centroid. When an iterate lands on an input point the
//! subgradient condition decides whether that point is the median; if not,
//! the iterate steps off along the descent direction and continues.

use super::Point2;
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 100_000;
const STEP_TOL: f64 = 1e-12;
const VERTEX_TOL: f64 = 1e-12;
const STEP_OFF: f64 = 1e-9;

/// Outcome of testing an input point against the optimality condition.
enum VertexTest {
    Optimal,
    /// Unit descent direction.
    Descend(f64, f64),
}

/// `|sum_{i not at v} (v - z_i) / |v - z_i|| <= multiplicity(v)` decides
/// optimality of input point `v`.
fn test_vertex(points: &[Point2], v: Point2) -> VertexTest {
    let mut gx = 0.0;
    let mut gy = 0.0;
    let mut weight = 0.0;
    for &p in points {
        let d = p.dist(v);
        if d <= VERTEX_TOL {
            weight += 1.0;
        } else {
            gx += (v.x - p.x) / d;
            gy += (v.y - p.y) / d;
        }
    }
    let norm = gx.hypot(gy);
    if norm <= weight {
        VertexTest::Optimal
    } else {
        VertexTest::Descend(-gx / norm, -gy / norm)
    }
}

pub fn geometric_median(points: &[Point2]) -> Result<Point2> {
    assert!(!points.is_empty(), "geometric median of no points");
    let n = points.len() as f64;
    let mut cur = Point2::new(
        points.iter().map(|p| p.x).sum::<f64>() / n,
        points.iter().map(|p| p.y).sum::<f64>() / n,
    );

    for _ in 0..MAX_ITERATIONS {
        let nearest = points
            .iter()
            .copied()
            .min_by(|a, b| a.dist(cur).total_cmp(&b.dist(cur)))
            .expect("non-empty");
        if nearest.dist(cur) <= VERTEX_TOL {
            match test_vertex(points, nearest) {
                VertexTest::Optimal => return Ok(nearest),
                VertexTest::Descend(dx, dy) => {
                    cur = Point2::new(nearest.x + STEP_OFF * dx, nearest.y + STEP_OFF * dy);
                    continue;
                }
            }
        }

        let mut wx = 0.0;
        let mut wy = 0.0;
        let mut wsum = 0.0;
        for &p in points {
            let w = 1.0 / p.dist(cur);
            wx += w * p.x;
            wy += w * p.y;
            wsum += w;
        }
        let next = Point2::new(wx / wsum, wy / wsum);
        let step = next.dist(cur);
        cur = next;
        if step < STEP_TOL {
            return Ok(cur);
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
        last: cur,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majority_point_is_returned_exactly() {
        let pts = [
            Point2::new(0.0, 1.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(-1.0, 0.0),
        ];
        let m = geometric_median(&pts).unwrap();
        assert!(m.dist(Point2::new(0.0, 1.0)) < 1e-9, "{m:?}");
    }

    #[test]
    fn centroid_start_on_an_input_point() {
        // the centroid is (0,0), which is an input point and optimal
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(-1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.0, -1.0),
        ];
        assert_eq!(geometric_median(&pts).unwrap(), Point2::new(0.0, 0.0));
    }

    #[test]
    fn centroid_on_a_non_optimal_input_point_steps_off() {
        // centroid (0,0) is an input point, but three agents sit at (1,0)
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(-3.0, 0.0),
        ];
        let m = geometric_median(&pts).unwrap();
        assert!(m.dist(Point2::new(1.0, 0.0)) < 1e-9, "{m:?}");
    }

    #[test]
    fn off_axis_local_check() {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.3),
            Point2::new(5.0, 1.0),
            Point2::new(5.0, -1.0),
            Point2::new(-6.0, 2.0),
        ];
        let m = geometric_median(&pts).unwrap();
        let cost = |q: Point2| pts.iter().map(|p| p.dist(q)).sum::<f64>();
        for dx in [-1e-4, 0.0, 1e-4] {
            for dy in [-1e-4, 0.0, 1e-4] {
                assert!(cost(m) <= cost(Point2::new(m.x + dx, m.y + dy)) + 1e-12);
            }
        }
    }
}
