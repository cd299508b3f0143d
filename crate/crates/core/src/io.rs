//! Line-oriented text formats. One record per line, `#` starts a comment line.
//!
//! ```text
//! g <n> <m> <k>          graph header
//! t <vertex>             k terminal lines
//! e <u> <v> <cap>        m edge lines; edge id = order of appearance
//! p <vertex> <cluster>   partition
//! d <t> <t'> <num>/<den> demand
//! l <vertex> <layer>     terminal-distance layer (`inf` if unreachable)
//! q <u> <v1> ... <t>     vertex-to-terminal path
//! pair <a> <b> <t> <t'>  typical pair and the terminals it was routed to
//! w <t> <t'> <F0> ... <Fk>  supernode walk carrying one unit of demand
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::graph::{CapacitatedGraph, ClusterId, Demand, GPath, Partition, VertexId};
use crate::{parse_ratio, ratio_string};

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split_whitespace().collect()))
        }
    })
}

fn field<T: std::str::FromStr>(tok: &[&str], idx: usize, line: usize, what: &str) -> Result<T> {
    tok.get(idx)
        .ok_or_else(|| Error::parse(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::parse(line, format!("malformed {what} `{}`", tok[idx])))
}

fn expect_arity(tok: &[&str], n: usize, line: usize) -> Result<()> {
    if tok.len() != n {
        return Err(Error::parse(line, format!("expected {} fields after `{}`, got {}", n - 1, tok[0], tok.len() - 1)));
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn parse_graph(text: &str) -> Result<CapacitatedGraph> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut terminals = Vec::new();
    let mut edges = Vec::new();
    let mut seen_terminal = Vec::new();
    for (line, tok) in records(text) {
        match (tok[0], header) {
            ("g", None) => {
                expect_arity(&tok, 4, line)?;
                let n: usize = field(&tok, 1, line, "n")?;
                header = Some((n, field(&tok, 2, line, "m")?, field(&tok, 3, line, "k")?));
                seen_terminal = vec![false; n];
            }
            ("g", Some(_)) => return Err(Error::parse(line, "duplicate header")),
            (_, None) => return Err(Error::parse(line, "record before `g` header")),
            ("t", Some((n, _, _))) => {
                expect_arity(&tok, 2, line)?;
                let t: usize = field(&tok, 1, line, "terminal")?;
                if t >= n {
                    return Err(Error::parse(line, format!("terminal {t} out of range")));
                }
                if std::mem::replace(&mut seen_terminal[t], true) {
                    return Err(Error::parse(line, format!("duplicate terminal {t}")));
                }
                terminals.push(t);
            }
            ("e", Some((n, _, _))) => {
                expect_arity(&tok, 4, line)?;
                let u: usize = field(&tok, 1, line, "endpoint")?;
                let v: usize = field(&tok, 2, line, "endpoint")?;
                let cap_tok = tok[3];
                if cap_tok.starts_with('-') {
                    return Err(Error::parse(line, format!("negative capacity {cap_tok}")));
                }
                let cap: u64 = field(&tok, 3, line, "capacity")?;
                if u >= n || v >= n {
                    return Err(Error::parse(line, format!("endpoint out of range in edge ({u}, {v})")));
                }
                if u == v {
                    return Err(Error::parse(line, format!("self-loop at {u}")));
                }
                edges.push((u, v, cap));
            }
            (other, _) => return Err(Error::parse(line, format!("unknown record `{other}`"))),
        }
    }
    let (n, m, k) = header.ok_or_else(|| Error::parse(0, "missing `g` header"))?;
    if terminals.len() != k {
        return Err(Error::parse(0, format!("header declares {k} terminals, found {}", terminals.len())));
    }
    if edges.len() != m {
        return Err(Error::parse(0, format!("header declares {m} edges, found {}", edges.len())));
    }
    CapacitatedGraph::new(n, &edges, terminals)
}

/// Canonical text: header, terminals in order, edges by id.
pub fn graph_to_text(g: &CapacitatedGraph) -> String {
    let mut s = String::with_capacity(16 * (g.edge_count() + g.terminals().len() + 1));
    let _ = writeln!(s, "g {} {} {}", g.n(), g.edge_count(), g.terminals().len());
    for t in g.terminals() {
        let _ = writeln!(s, "t {t}");
    }
    for e in g.edges() {
        let _ = writeln!(s, "e {} {} {}", e.u, e.v, e.cap);
    }
    s
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<CapacitatedGraph> {
    parse_graph(&read(path.as_ref())?)
}

pub fn save_graph(g: &CapacitatedGraph, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &graph_to_text(g))
}

pub fn parse_partition(text: &str, n: usize) -> Result<Partition> {
    let mut labels: Vec<Option<ClusterId>> = vec![None; n];
    for (line, tok) in records(text) {
        if tok[0] != "p" {
            return Err(Error::parse(line, format!("unknown record `{}`", tok[0])));
        }
        expect_arity(&tok, 3, line)?;
        let v: usize = field(&tok, 1, line, "vertex")?;
        let c: usize = field(&tok, 2, line, "cluster")?;
        if v >= n {
            return Err(Error::parse(line, format!("vertex {v} out of range")));
        }
        if labels[v].replace(c).is_some() {
            return Err(Error::parse(line, format!("vertex {v} assigned twice")));
        }
    }
    let assignment: Vec<ClusterId> = labels
        .into_iter()
        .enumerate()
        .map(|(v, c)| c.ok_or_else(|| Error::parse(0, format!("vertex {v} has no cluster"))))
        .collect::<Result<_>>()?;
    Partition::new(assignment)
}

pub fn partition_to_text(p: &Partition) -> String {
    let mut s = String::new();
    for (v, c) in p.assignment().iter().enumerate() {
        let _ = writeln!(s, "p {v} {c}");
    }
    s
}

pub fn load_partition(path: impl AsRef<Path>, n: usize) -> Result<Partition> {
    parse_partition(&read(path.as_ref())?, n)
}

pub fn parse_demand(text: &str) -> Result<Demand> {
    let mut d = Demand::new();
    for (line, tok) in records(text) {
        if tok[0] != "d" {
            return Err(Error::parse(line, format!("unknown record `{}`", tok[0])));
        }
        expect_arity(&tok, 4, line)?;
        let t: usize = field(&tok, 1, line, "terminal")?;
        let u: usize = field(&tok, 2, line, "terminal")?;
        let value = parse_ratio(tok[3]).ok_or_else(|| Error::parse(line, format!("malformed value `{}`", tok[3])))?;
        if value.is_negative() {
            return Err(Error::parse(line, "negative demand"));
        }
        d.add(t, u, value).map_err(|e| Error::parse(line, e.to_string()))?;
    }
    Ok(d)
}

pub fn demand_to_text(d: &Demand) -> String {
    let mut s = String::new();
    for (&(t, u), v) in d.iter() {
        let _ = writeln!(s, "d {t} {u} {}", ratio_string(v));
    }
    s
}

pub fn layers_to_text(dist: &[Option<u32>]) -> String {
    let mut s = String::new();
    for (v, d) in dist.iter().enumerate() {
        match d {
            Some(d) => writeln!(s, "l {v} {d}"),
            None => writeln!(s, "l {v} inf"),
        }
        .unwrap();
    }
    s
}

pub fn paths_to_text(paths: &[GPath]) -> String {
    let mut s = String::new();
    for p in paths {
        s.push('q');
        for v in &p.vertices {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    s
}

/// A routed typical pair: endpoints and the terminals they reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairRecord {
    pub a: VertexId,
    pub b: VertexId,
    pub t: VertexId,
    pub t2: VertexId,
}

pub fn pairs_to_text(pairs: &[PairRecord]) -> String {
    let mut s = String::new();
    for p in pairs {
        let _ = writeln!(s, "pair {} {} {} {}", p.a, p.b, p.t, p.t2);
    }
    s
}

pub fn parse_pairs(text: &str) -> Result<Vec<PairRecord>> {
    records(text)
        .map(|(line, tok)| {
            if tok[0] != "pair" {
                return Err(Error::parse(line, format!("unknown record `{}`", tok[0])));
            }
            expect_arity(&tok, 5, line)?;
            Ok(PairRecord {
                a: field(&tok, 1, line, "a")?,
                b: field(&tok, 2, line, "b")?,
                t: field(&tok, 3, line, "t")?,
                t2: field(&tok, 4, line, "t'")?,
            })
        })
        .collect()
}

/// One unit of demand between `pair` routed along supernodes `nodes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteRecord {
    pub pair: (VertexId, VertexId),
    pub nodes: Vec<ClusterId>,
}

pub fn routes_to_text(routes: &[RouteRecord]) -> String {
    let mut s = String::new();
    for r in routes {
        let _ = write!(s, "w {} {}", r.pair.0, r.pair.1);
        for c in &r.nodes {
            let _ = write!(s, " {c}");
        }
        s.push('\n');
    }
    s
}

pub fn parse_routes(text: &str) -> Result<Vec<RouteRecord>> {
    records(text)
        .map(|(line, tok)| {
            if tok[0] != "w" {
                return Err(Error::parse(line, format!("unknown record `{}`", tok[0])));
            }
            if tok.len() < 4 {
                return Err(Error::parse(line, "route needs a pair and at least one supernode"));
            }
            let nodes = (3..tok.len())
                .map(|i| field(&tok, i, line, "supernode"))
                .collect::<Result<_>>()?;
            Ok(RouteRecord {
                pair: (field(&tok, 1, line, "t")?, field(&tok, 2, line, "t'")?),
                nodes,
            })
        })
        .collect()
}
