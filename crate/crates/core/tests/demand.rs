use std::collections::{BTreeSet, VecDeque};

use contragap::demand::{assemble_demand, harvest_pairs, HarvestOptions};
use contragap::graph::contract;
use contragap::pipeline::{make_partition, Config};
use contragap::surgery::build_instance;
use contragap::{CapacitatedGraph, Rational};

fn dist(g: &CapacitatedGraph, s: usize, t: usize) -> Option<u32> {
    let mut d = vec![None; g.n()];
    d[s] = Some(0u32);
    let mut q = VecDeque::from([s]);
    while let Some(x) = q.pop_front() {
        for &(y, _) in g.neighbors(x) {
            if d[y].is_none() {
                d[y] = Some(d[x].unwrap() + 1);
                q.push_back(y);
            }
        }
    }
    d[t]
}

#[test]
fn harvested_pairs_are_disjoint_and_typical() {
    let mut harvested = 0;
    for (n, seed) in [(256, 1), (256, 2), (512, 3), (1024, 4)] {
        let cfg = Config { n, ..Config::default() };
        let inst = build_instance(&cfg.instance_params(seed).unwrap()).unwrap();
        let g = &inst.graph;
        let p = make_partition(&cfg, g, seed).unwrap();
        let params = cfg.cluster_params().unwrap();
        let m = cfg.instance_params(seed).unwrap().m;
        let book = harvest_pairs(g, &p, &params, m, HarvestOptions { check_diameters: true }).unwrap();
        assert!(book.check_disjointness().is_ok());
        assert!(book.pairs.len() <= m);
        harvested += book.pairs.len();

        let mut ends = BTreeSet::new();
        let mut support = BTreeSet::new();
        for pair in &book.pairs {
            assert!(ends.insert(pair.a) && ends.insert(pair.b), "n={n}: endpoint reused");
            assert_ne!(pair.a, pair.b);
            assert_eq!(Some(pair.dist_g), dist(g, pair.a, pair.b));
            assert_eq!(pair.hpath.first(), Some(&p.cluster_of(pair.a)));
            assert_eq!(pair.hpath.last(), Some(&p.cluster_of(pair.b)));
            assert_eq!(pair.support.len() + 1, pair.hpath.len());
            for (hop, &e) in pair.support.iter().enumerate() {
                assert!(support.insert(e), "n={n}: supporting edge {e} reused");
                let edge = g.edge(e);
                let (x, y) = (p.cluster_of(edge.u), p.cluster_of(edge.v));
                let (a, b) = (pair.hpath[hop], pair.hpath[hop + 1]);
                assert!((x, y) == (a, b) || (x, y) == (b, a));
            }
        }

        let h = contract(g, &p).unwrap();
        let asm = assemble_demand(g, &h, &book).unwrap();
        // one unit per routed pair with distinct terminal ends
        let units = book.pairs.len() - asm.self_pairs - asm.dropped_pairs;
        assert_eq!(asm.demand.total(), Rational::from_integer(units.into()));
        assert_eq!(asm.flow.paths.len(), units);
    }
    assert!(harvested > 0, "no pairs harvested at all");
}
