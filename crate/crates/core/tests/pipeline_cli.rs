use std::collections::{BTreeMap, VecDeque};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use contragap::io::{parse_demand, parse_graph, parse_partition, parse_routes};
use contragap::{parse_ratio, GapCertificate, Rational};
use sha2::{Digest, Sha256};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_contragap"));
    c.env_remove("CONTRAGAP_ARTIFACT_ROOT").env("RUST_LOG", "error");
    c
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().unwrap()
}

fn cert(dir: &Path) -> GapCertificate {
    GapCertificate::from_json(&fs::read_to_string(dir.join("certificate.json")).unwrap()).unwrap()
}

fn int(x: u64) -> Rational {
    Rational::from_integer(x.into())
}

/// Both bounds rebuilt from the text artifacts alone.
fn recompute(dir: &Path) -> (Rational, Rational) {
    let read = |f: &str| fs::read_to_string(dir.join(f)).unwrap();
    let g = parse_graph(&read("graph.txt")).unwrap();
    let p = parse_partition(&read("partition.txt"), g.n()).unwrap();
    let demand = parse_demand(&read("demand.txt")).unwrap();

    let mut adj = vec![vec![]; g.n()];
    for e in g.edges() {
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    let total: u64 = g.edges().iter().map(|e| e.cap).sum();
    let mut weighted = Rational::from_integer(0.into());
    for (&(t, u), v) in demand.iter() {
        let mut d = vec![u64::MAX; g.n()];
        d[t] = 0;
        let mut q = VecDeque::from([t]);
        while let Some(x) = q.pop_front() {
            for &y in &adj[x] {
                if d[y] == u64::MAX {
                    d[y] = d[x] + 1;
                    q.push_back(y);
                }
            }
        }
        weighted += v * int(d[u]);
    }
    let lower = weighted / int(total);

    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut cap: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for e in g.edges() {
        let (a, b) = (p.cluster_of(e.u), p.cluster_of(e.v));
        if a != b {
            *cap.entry(key(a, b)).or_default() += e.cap;
        }
    }
    let mut load: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let routes = parse_routes(&read("routes.txt")).unwrap();
    let mut routed = 0;
    for r in routes.iter().filter(|r| r.pair.0 != r.pair.1) {
        routed += 1;
        for w in r.nodes.windows(2).filter(|w| w[0] != w[1]) {
            *load.entry(key(w[0], w[1])).or_default() += 1;
        }
    }
    assert_eq!(int(routed), demand.total(), "one unit per non-self route");
    let upper = load
        .iter()
        .map(|(k, &l)| Rational::new(l.into(), cap[k].into()))
        .max()
        .unwrap_or_else(|| int(0));
    (lower, upper)
}

#[test]
fn certify_writes_artifacts_that_reproduce_the_certificate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["certify", "--n", "512", "--seed", "1", "--out", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("run");
    let c = cert(&dir);
    assert!(c.is_full());
    for (name, hash) in &c.files {
        let bytes = fs::read(dir.join(name)).unwrap();
        assert_eq!(hex::encode(Sha256::digest(&bytes)), *hash, "{name}");
    }
    assert_eq!(c.files.len(), 8);

    let (lower, upper) = recompute(&dir);
    assert_eq!(parse_ratio(&c.lower_g).unwrap(), lower);
    assert_eq!(parse_ratio(&c.upper_h).unwrap(), upper);
    assert_eq!(parse_ratio(c.ratio.as_deref().unwrap()).unwrap(), lower / upper);
}

#[test]
fn runs_are_byte_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    for d in ["a", "b"] {
        let out = run(&["certify", "--n", "512", "--seed", "4", "--out", d], tmp.path());
        assert!(out.status.code().is_some_and(|c| c == 0 || c == 2));
    }
    for f in ["certificate.json", "graph.txt", "routes.txt", "trace.txt"] {
        assert_eq!(fs::read(tmp.path().join("a").join(f)).unwrap(), fs::read(tmp.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn aborted_run_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["certify", "--n", "256", "--seed", "1", "--out", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let c = cert(&tmp.path().join("run"));
    assert!(c.aborted && !c.is_full());
}

#[test]
fn invalid_partition_names_the_terminal_pair() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("g.txt"), "g 4 3 2\nt 1\nt 3\ne 0 1 1\ne 1 2 1\ne 2 3 1\n").unwrap();
    fs::write(tmp.path().join("p.txt"), "p 0 0\np 1 0\np 2 0\np 3 0\n").unwrap();
    let out = run(&["certify", "--graph", "g.txt", "--partition", "p.txt", "--out", "x"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("terminals 1 and 3"), "{err}");

    fs::write(tmp.path().join("p.txt"), "p 0 0\np 1 0\np 2 1\np 3 1\n").unwrap();
    let out = run(&["certify", "--graph", "g.txt", "--partition", "p.txt", "--out", "x"], tmp.path());
    assert!(out.status.code().is_some_and(|c| c == 0 || c == 2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("x/certificate.json").is_file());
}

#[test]
fn config_errors_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.cfg"), "n = 512\nwidth = 3\n").unwrap();
    let out = run(&["certify", "--config", "c.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("width"));
    let out = run(&["gen", "--set", "purity=abc"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("purity"));
}

#[test]
fn sweep_and_export() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("root");
    fs::create_dir(&root).unwrap();
    // relative outputs land under the artifact root
    let out = bin()
        .args(["sweep", "--n", "512", "--seeds", "1,2", "--out", "sw"])
        .env("CONTRAGAP_ARTIFACT_ROOT", &root)
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sw = root.join("sw");
    let sweep = fs::read_to_string(sw.join("sweep.csv")).unwrap();
    let mut lines = sweep.lines();
    assert_eq!(lines.next().unwrap(), "n,seed,r,r_trend,m_achieved,sum_dist,lower_g,upper_h,ratio,ratio_f64,aborted");
    assert_eq!(lines.count(), 2);
    assert!(fs::read_to_string(sw.join("summary.csv")).unwrap().starts_with("n,runs,"));
    for s in [1, 2] {
        let c = cert(&sw.join(format!("seed-{s}")));
        assert_eq!(c.params["seed"], s.to_string());
        assert!(sweep.contains(&format!("512,{s},")));
    }

    let out = run(&["export", sw.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let report = fs::read_to_string(sw.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 3);

    let out = run(&["export", sw.to_str().unwrap(), "--format", "dot"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let dot = fs::read_to_string(sw.join("seed-1/h.dot")).unwrap();
    assert!(dot.starts_with("graph H {") && dot.trim_end().ends_with('}'));
}

#[test]
fn gen_and_oracle_subcommands() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["gen", "--n", "128", "--seed", "3", "--out", "g.txt"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let g = parse_graph(&fs::read_to_string(tmp.path().join("g.txt")).unwrap()).unwrap();
    assert_eq!((g.n(), g.edge_count()), (128, 640));

    let out = run(&["oracle", "--trials", "20"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("20/20"));
}
