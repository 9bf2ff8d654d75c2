//! Brute-force reference oracles, written independently of the library's
//! search code.
#![allow(dead_code)]

use mechadvice::auctions::MultiUnitInstance;
use mechadvice::facility::Point2;
use mechadvice::house::ValuationMatrix;
use mechadvice::scheduling::SchedulingInstance;

/// Minimum makespan over every job-to-machine map, decoded from base-`n`
/// counters.
pub fn enumerate_makespan(inst: &SchedulingInstance) -> f64 {
    let n = inst.machines();
    let m = inst.jobs();
    (0..n.pow(m as u32))
        .map(|mut code| {
            let mut loads = vec![0.0; n];
            for j in 0..m {
                loads[code % n] += inst.cost(code % n, j);
                code /= n;
            }
            loads.into_iter().fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Maximum welfare over all permutations (Heap's algorithm).
pub fn brute_matching(v: &ValuationMatrix) -> f64 {
    let n = v.n();
    let mut p: Vec<usize> = (0..n).collect();
    let welfare = |p: &[usize]| p.iter().enumerate().map(|(i, &h)| v.value(i, h)).sum::<f64>();
    let mut best = welfare(&p);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            best = best.max(welfare(&p));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// Smallest circle through two or three of the points that contains all of
/// them.
pub fn brute_mec_radius(pts: &[Point2]) -> f64 {
    if pts.len() == 1 {
        return 0.0;
    }
    let covers = |c: Point2, r: f64| pts.iter().all(|p| p.dist(c) <= r * (1.0 + 1e-12) + 1e-12);
    let mut best = f64::INFINITY;
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            let c = Point2::new((pts[a].x + pts[b].x) / 2.0, (pts[a].y + pts[b].y) / 2.0);
            let r = c.dist(pts[a]);
            if r < best && covers(c, r) {
                best = r;
            }
            for d in b + 1..pts.len() {
                let (p, q, s) = (pts[a], pts[b], pts[d]);
                let det = 2.0 * (p.x * (q.y - s.y) + q.x * (s.y - p.y) + s.x * (p.y - q.y));
                if det.abs() < 1e-14 {
                    continue;
                }
                let (p2, q2, s2) = (p.x * p.x + p.y * p.y, q.x * q.x + q.y * q.y, s.x * s.x + s.y * s.y);
                let ux = (p2 * (q.y - s.y) + q2 * (s.y - p.y) + s2 * (p.y - q.y)) / det;
                let uy = (p2 * (s.x - q.x) + q2 * (p.x - s.x) + s2 * (q.x - p.x)) / det;
                let c = Point2::new(ux, uy);
                let r = c.dist(p).max(c.dist(q)).max(c.dist(s));
                if r < best && covers(c, r) {
                    best = r;
                }
            }
        }
    }
    best
}

/// Minimum of the sum of distances by nested grid refinement over the
/// bounding box.
pub fn grid_min_sum(pts: &[Point2], cells: usize, rounds: usize) -> f64 {
    let cost = |q: Point2| pts.iter().map(|p| p.dist(q)).sum::<f64>();
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let mut best = (Point2::new(x0, y0), f64::INFINITY);
    for _ in 0..=rounds {
        let (dx, dy) = ((x1 - x0) / cells as f64, (y1 - y0) / cells as f64);
        for i in 0..=cells {
            for j in 0..=cells {
                let q = Point2::new(x0 + dx * i as f64, y0 + dy * j as f64);
                let c = cost(q);
                if c < best.1 {
                    best = (q, c);
                }
            }
        }
        let c = best.0;
        (x0, x1, y0, y1) = (c.x - 2.0 * dx, c.x + 2.0 * dx, c.y - 2.0 * dy, c.y + 2.0 * dy);
    }
    // input points are candidates too
    pts.iter().map(|&p| cost(p)).fold(best.1, f64::min)
}

/// Maximum welfare over every composition of at most `m` items.
pub fn brute_mu_opt(inst: &MultiUnitInstance) -> f64 {
    fn go(inst: &MultiUnitInstance, i: usize, left: usize) -> f64 {
        if i == inst.bidders() {
            return 0.0;
        }
        (0..=left)
            .map(|q| inst.value(i, q) + go(inst, i + 1, left - q))
            .fold(f64::NEG_INFINITY, f64::max)
    }
    go(inst, 0, inst.items())
}

/// Maximum welfare over whole-bundle allocations, enumerated explicitly:
/// every way to give bidders consecutive runs of the bundle sequence.
pub fn brute_bundle_opt(inst: &MultiUnitInstance, sizes: &[usize]) -> f64 {
    fn go(inst: &MultiUnitInstance, sizes: &[usize], i: usize, start: usize) -> f64 {
        if i == inst.bidders() {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        let mut items = 0;
        for end in start..=sizes.len() {
            if end > start {
                items += sizes[end - 1];
            }
            best = best.max(inst.value(i, items) + go(inst, sizes, i + 1, end));
        }
        best
    }
    go(inst, sizes, 0, 0)
}
