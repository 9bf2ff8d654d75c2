mod common;

use rand::Rng;

use mechadvice::auctions::{bundle_sizes, mu_mir_base, mu_opt, mu_welfare, MultiUnitInstance};
use mechadvice::facility::{opt_egalitarian, opt_utilitarian, FacilityInstance, Point2};
use mechadvice::house::{opt_matching, Normalization, ValuationMatrix};
use mechadvice::instances::sample_multi_unit;
use mechadvice::scheduling::{opt_makespan, SchedulingInstance};
use mechadvice::Seed;

#[test]
fn makespan_matches_enumerator() {
    let mut rng = Seed(101).rng();
    for _ in 0..200 {
        let (n, m) = (rng.random_range(1..=3), rng.random_range(0..=5));
        let costs = (0..n * m)
            .map(|_| if rng.random_bool(0.05) { f64::INFINITY } else { rng.random_range(0.0..5.0) })
            .collect();
        let inst = SchedulingInstance::new(n, m, costs).unwrap();
        let (_, v) = opt_makespan(&inst).unwrap();
        assert_eq!(v, common::enumerate_makespan(&inst));
    }
}

#[test]
fn matching_matches_permutations() {
    let mut rng = Seed(102).rng();
    for _ in 0..200 {
        let n = rng.random_range(1..=6);
        let rows = (0..n).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
        let v = ValuationMatrix::new(rows, Normalization::None).unwrap();
        let (_, w) = opt_matching(&v).unwrap();
        assert!((w - common::brute_matching(&v)).abs() <= 1e-12);
    }
}

#[test]
fn mec_matches_pairs_and_triples() {
    let mut rng = Seed(103).rng();
    for _ in 0..200 {
        let n = rng.random_range(1..=20);
        let pts: Vec<Point2> = (0..n).map(|_| Point2::new(rng.random(), rng.random())).collect();
        let (_, r) = opt_egalitarian(&FacilityInstance::new(pts.clone()).unwrap());
        assert!((r - common::brute_mec_radius(&pts)).abs() <= 1e-9);
    }
}

#[test]
fn mec_on_integer_lattice_with_ties() {
    // many cocircular points on a small lattice
    let mut pts = Vec::new();
    for x in -2..=2 {
        for y in -2..=2 {
            pts.push(Point2::new(f64::from(x), f64::from(y)));
        }
    }
    let (c, r) = opt_egalitarian(&FacilityInstance::new(pts.clone()).unwrap());
    assert!((r - 8f64.sqrt()).abs() <= 1e-12);
    assert!(c.dist(Point2::new(0.0, 0.0)) <= 1e-12);
    assert!((common::brute_mec_radius(&pts) - r).abs() <= 1e-12);
}

#[test]
fn weiszfeld_matches_grid_search() {
    let mut rng = Seed(104).rng();
    for _ in 0..20 {
        let n = rng.random_range(2..=12);
        let pts: Vec<Point2> = (0..n)
            .map(|_| Point2::new(rng.random_range(0.0..2.0), rng.random_range(0.0..1.0)))
            .collect();
        let (_, v) = opt_utilitarian(&FacilityInstance::new(pts.clone()).unwrap()).unwrap();
        let g = common::grid_min_sum(&pts, 400, 2);
        assert!(v <= g + 1e-9, "Weiszfeld {v} above grid {g}");
        assert!((v - g).abs() <= 1e-6, "Weiszfeld {v} vs grid {g}");
    }
}

#[test]
fn multi_unit_opt_matches_compositions() {
    let mut rng = Seed(105).rng();
    for _ in 0..100 {
        let (inst, _) = sample_multi_unit(&mut rng, 3, 6).unwrap();
        let (a, w) = mu_opt(&inst).unwrap();
        assert_eq!(mu_welfare(&inst, &a).unwrap(), w);
        assert!((w - common::brute_mu_opt(&inst)).abs() <= 1e-12);
    }
}

#[test]
fn bundle_dp_matches_enumeration() {
    let mut rng = Seed(106).rng();
    for _ in 0..200 {
        let n = rng.random_range(1..=3);
        let m = rng.random_range(0..=14);
        let (inst, _) = sample_multi_unit(&mut rng, n, m).unwrap();
        let a = mu_mir_base(&inst);
        let w = mu_welfare(&inst, &a).unwrap();
        let brute = common::brute_bundle_opt(&inst, &bundle_sizes(n, m));
        assert!((w - brute).abs() <= 1e-12, "{w} vs {brute}");
    }
}

#[test]
fn bundle_dp_on_the_worked_curves() {
    let inst = MultiUnitInstance::new(
        4,
        vec![vec![0.0, 10.0, 10.0, 10.0, 10.0], vec![0.0, 6.0, 12.0, 18.0, 24.0]],
    )
    .unwrap();
    // all five splits of four items
    let best = (0..=4).map(|q| inst.value(0, q) + inst.value(1, 4 - q)).fold(0.0, f64::max);
    assert_eq!(best, 28.0);
    assert_eq!(mu_welfare(&inst, &mu_mir_base(&inst)).unwrap(), best);
}
