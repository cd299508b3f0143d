use contragap::certificate::certify_gap_detailed;
use contragap::congestion::lp_min_congestion;
use contragap::graph::{contract, FlowNetwork};
use contragap::{convex_combine, parse_ratio, CapacitatedGraph, ConvexCombination, Demand, Partition, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{lenient, lp_sandwich_trial, random_demand, random_instance, random_partition, ring, to_f64 as f, TOL};

fn r(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Brute min cut between two vertices of a small undirected graph.
fn min_cut(g: &CapacitatedGraph, s: usize, t: usize) -> u64 {
    (0u32..1 << g.n())
        .filter(|m| m >> s & 1 == 1 && m >> t & 1 == 0)
        .map(|m| g.edges().iter().filter(|e| (m >> e.u & 1) != (m >> e.v & 1)).map(|e| e.cap).sum())
        .min()
        .unwrap()
}

#[test]
fn lp_sits_between_the_bounds_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..36 {
        let (lower, lp_g, lp_h, upper) = lp_sandwich_trial(&mut rng, trial);
        assert!(lower <= lp_g + TOL, "trial {trial}: lower {lower} > LP(G) {lp_g}");
        assert!(lp_h <= upper + TOL, "trial {trial}: LP(H) {lp_h} > routing {upper}");
        assert!(lp_h <= lp_g + TOL, "trial {trial}: contraction raised the LP");
    }
}

#[test]
fn single_pair_lp_equals_demand_over_min_cut() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..20 {
        let n = rng.gen_range(4..=12);
        let g = random_instance(&mut rng, n, 2);
        let mut d = Demand::new();
        let v = rng.gen_range(1..10);
        d.add(0, 1, r(v)).unwrap();
        let want = v as f64 / min_cut(&g, 0, 1) as f64;
        let got = lp_min_congestion(&g, &d).unwrap().value;
        assert!((got - want).abs() < TOL, "trial {trial}: {got} vs {want}");
    }
}

#[test]
fn textbook_examples() {
    let edge = CapacitatedGraph::new(2, &[(0, 1, 1)], vec![0, 1]).unwrap();
    let mut d = Demand::new();
    d.add(0, 1, r(2)).unwrap();
    assert!((lp_min_congestion(&edge, &d).unwrap().value - 2.0).abs() < TOL);

    // two disjoint unit paths carry two units at congestion one
    let paths = CapacitatedGraph::new(4, &[(0, 2, 1), (2, 1, 1), (0, 3, 1), (3, 1, 1)], vec![0, 1]).unwrap();
    assert!((lp_min_congestion(&paths, &d).unwrap().value - 1.0).abs() < TOL);
}

#[test]
fn singleton_partition_leaves_the_lp_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let n = rng.gen_range(6..30);
        let k = rng.gen_range(2..6);
        let g = random_instance(&mut rng, n, k);
        let d = random_demand(&mut rng, k);
        let h = contract(&g, &Partition::singleton(n)).unwrap();
        let (a, b) = (lp_min_congestion(&g, &d).unwrap().value, lp_min_congestion(&h, &d).unwrap().value);
        assert!((a - b).abs() < TOL, "{a} vs {b}");
    }
}

#[test]
fn certificates_respect_the_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut nonempty = 0;
    for trial in 0..30 {
        let n = rng.gen_range(12..=60);
        let k = rng.gen_range(2..=8);
        let g = random_instance(&mut rng, n, k);
        let p = random_partition(&mut rng, n, k);
        let cert = certify_gap_detailed(&g, &p, &lenient(rng.gen_range(1..4))).unwrap().certificate;
        if cert.demand_pairs == 0 {
            continue;
        }
        nonempty += 1;
        let lower = f(&parse_ratio(&cert.lower_g).unwrap());
        let upper = f(&parse_ratio(&cert.upper_h).unwrap());
        let (lp_g, lp_h) = (cert.lp_g.expect("small enough"), cert.lp_h.expect("small enough"));
        assert!(lower <= lp_g + TOL, "trial {trial}");
        assert!(lp_h <= upper + TOL, "trial {trial}");
    }
    assert!(nonempty >= 5, "only {nonempty} certificates carried demand");
}

#[test]
fn convex_combination_is_linear() {
    let g = ring(12, vec![0, 4, 8]);
    let p1 = Partition::new(vec![0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5]).unwrap();
    let p2 = Partition::singleton(12);
    let cfg = lenient(2);
    let c1 = certify_gap_detailed(&g, &p1, &cfg).unwrap();
    let c2 = certify_gap_detailed(&g, &p2, &cfg).unwrap();
    let w = Rational::new(1.into(), 3.into());
    let mu = ConvexCombination { parts: vec![(p1, w.clone()), (p2, r(1) - &w)] };
    let out = convex_combine(&g, &mu, &cfg).unwrap();

    let mut want = c1.component.assembly.demand.scaled(&w);
    want.merge(&c2.component.assembly.demand.scaled(&(r(1) - &w)));
    assert_eq!(out.demand, want);
    assert!(!want.is_empty());

    let lin = |a: &str, b: &str| parse_ratio(a).unwrap() * &w + parse_ratio(b).unwrap() * (r(1) - &w);
    let (a, b) = (&c1.certificate, &c2.certificate);
    assert_eq!(parse_ratio(&out.certificate.lower_g).unwrap(), lin(&a.lower_g, &b.lower_g));
    assert_eq!(parse_ratio(&out.certificate.pair_distance_sum).unwrap(), lin(&a.pair_distance_sum, &b.pair_distance_sum));
    // scaled flow in a scaled copy keeps each copy's edge ratios
    let up = |c: &str| parse_ratio(c).unwrap();
    assert_eq!(up(&out.certificate.upper_h), up(&a.upper_h).max(up(&b.upper_h)));
    let cap = |h: &contragap::ContractedGraph| (0..h.edge_count()).map(|e| FlowNetwork::capacity(h, e)).sum::<Rational>();
    let glued: Rational = (0..out.glued.edge_count()).map(|e| out.glued.capacity(e)).sum();
    assert_eq!(glued, cap(&c1.component.h) * &w + cap(&c2.component.h) * (r(1) - &w));
}
