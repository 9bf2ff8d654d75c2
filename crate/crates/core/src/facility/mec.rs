//! Minimum enclosing circle by incremental construction with explicit
//! one-, two- and three-point support sets. Points are processed in input
//! order, so the result is reproducible.

use super::Point2;

const MUL_EPS: f64 = 1.0 + 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

impl Circle {
    fn contains(&self, p: Point2) -> bool {
        self.center.dist(p) <= self.radius * MUL_EPS + 1e-15
    }

    fn diameter(a: Point2, b: Point2) -> Circle {
        let center = Point2::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
        Circle {
            center,
            radius: center.dist(a).max(center.dist(b)),
        }
    }

    /// `None` for (near-)collinear triples.
    fn circumscribed(a: Point2, b: Point2, c: Point2) -> Option<Circle> {
        // translate to the bounding-box center for conditioning
        let ox = (a.x.min(b.x).min(c.x) + a.x.max(b.x).max(c.x)) / 2.0;
        let oy = (a.y.min(b.y).min(c.y) + a.y.max(b.y).max(c.y)) / 2.0;
        let (ax, ay) = (a.x - ox, a.y - oy);
        let (bx, by) = (b.x - ox, b.y - oy);
        let (cx, cy) = (c.x - ox, c.y - oy);
        let d = (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by)) * 2.0;
        if d == 0.0 {
            return None;
        }
        let a2 = ax * ax + ay * ay;
        let b2 = bx * bx + by * by;
        let c2 = cx * cx + cy * cy;
        let x = ox + (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
        let y = oy + (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
        let center = Point2::new(x, y);
        let radius = center.dist(a).max(center.dist(b)).max(center.dist(c));
        radius.is_finite().then_some(Circle { center, radius })
    }
}

pub fn min_enclosing_circle(points: &[Point2]) -> Circle {
    assert!(!points.is_empty(), "enclosing circle of no points");
    let mut c = Circle {
        center: points[0],
        radius: 0.0,
    };
    for (i, &p) in points.iter().enumerate().skip(1) {
        if !c.contains(p) {
            c = with_one_boundary(&points[..i], p);
        }
    }
    c
}

fn with_one_boundary(points: &[Point2], p: Point2) -> Circle {
    let mut c = Circle {
        center: p,
        radius: 0.0,
    };
    for (i, &q) in points.iter().enumerate() {
        if !c.contains(q) {
            c = if c.radius == 0.0 {
                Circle::diameter(p, q)
            } else {
                with_two_boundary(&points[..i], p, q)
            };
        }
    }
    c
}

fn with_two_boundary(points: &[Point2], p: Point2, q: Point2) -> Circle {
    let circ = Circle::diameter(p, q);
    let mut left: Option<Circle> = None;
    let mut right: Option<Circle> = None;
    let (px, py) = (q.x - p.x, q.y - p.y);
    let cross = |r: Point2| px * (r.y - p.y) - py * (r.x - p.x);

    for &r in points {
        if circ.contains(r) {
            continue;
        }
        let side = cross(r);
        let Some(c) = Circle::circumscribed(p, q, r) else {
            continue;
        };
        if side > 0.0 {
            if left.is_none_or(|l| cross(c.center) > cross(l.center)) {
                left = Some(c);
            }
        } else if side < 0.0 && right.is_none_or(|rt| cross(c.center) < cross(rt.center)) {
            right = Some(c);
        }
    }

    match (left, right) {
        (None, None) => circ,
        (Some(l), None) => l,
        (None, Some(r)) => r,
        (Some(l), Some(r)) => {
            if l.radius <= r.radius {
                l
            } else {
                r
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_and_pair() {
        let c = min_enclosing_circle(&[Point2::new(2.0, 3.0)]);
        assert_eq!(c.radius, 0.0);
        let c = min_enclosing_circle(&[Point2::new(0.0, 0.0), Point2::new(0.0, 4.0)]);
        assert_eq!(c.center, Point2::new(0.0, 2.0));
        assert_eq!(c.radius, 2.0);
    }

    #[test]
    fn obtuse_triangle_uses_diameter() {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(10.0, 0.0),
            Point2::new(5.0, 1.0),
        ];
        let c = min_enclosing_circle(&pts);
        assert!((c.radius - 5.0).abs() < 1e-12);
    }

    #[test]
    fn duplicates_and_collinear() {
        let pts = [
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(2.0, 2.0),
            Point2::new(3.0, 3.0),
            Point2::new(2.0, 2.0),
        ];
        let c = min_enclosing_circle(&pts);
        assert!((c.radius - 2f64.sqrt()).abs() < 1e-12);
        assert!((c.center.x - 2.0).abs() < 1e-12);
    }
}
