//! End-to-end runs: config parsing, partition sources, artifact directories,
//! seed sweeps and report export.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{info, warn};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::certificate::{certify_gap_detailed, sha256_hex, CertifyConfig, GapCertificate};
use crate::clustering::ClusterParams;
use crate::error::{Error, Result};
use crate::graph::{contract, CapacitatedGraph, FlowNetwork, Partition};
use crate::io::{self, demand_to_text, graph_to_text, layers_to_text, pairs_to_text, partition_to_text, paths_to_text, routes_to_text};
use crate::parse_ratio;
use crate::surgery::{build_instance, InstanceParams};

/// Environment variable naming the directory relative artifact paths resolve against.
pub const ARTIFACT_ROOT_ENV: &str = "CONTRAGAP_ARTIFACT_ROOT";

pub fn artifact_path(p: impl AsRef<Path>) -> PathBuf {
    let p = p.as_ref();
    match std::env::var_os(ARTIFACT_ROOT_ENV) {
        Some(root) if p.is_relative() => Path::new(&root).join(p),
        _ => p.to_path_buf(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionSource {
    /// Voronoi cells around the terminals, optionally with extra random centres.
    PipelineRandom,
    Singleton,
    File(PathBuf),
    /// Truncated Voronoi balls of the given radius, terminals first.
    BfsBalls(usize),
}

impl FromStr for PartitionSource {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pipeline-random" => Ok(PartitionSource::PipelineRandom),
            "singleton" => Ok(PartitionSource::Singleton),
            _ => {
                if let Some(p) = s.strip_prefix("file:") {
                    Ok(PartitionSource::File(PathBuf::from(p)))
                } else if let Some(r) = s.strip_prefix("bfs-balls:") {
                    r.parse().map(PartitionSource::BfsBalls).map_err(|_| format!("bad radius `{r}`"))
                } else {
                    Err(format!("unknown partition source `{s}`"))
                }
            }
        }
    }
}

impl fmt::Display for PartitionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionSource::PipelineRandom => write!(f, "pipeline-random"),
            PartitionSource::Singleton => write!(f, "singleton"),
            PartitionSource::File(p) => write!(f, "file:{}", p.display()),
            PartitionSource::BfsBalls(r) => write!(f, "bfs-balls:{r}"),
        }
    }
}

/// Flat `key = value` run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub n: usize,
    pub d: usize,
    pub epsilon: f64,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub seed: u64,
    pub seeds: Option<Vec<u64>>,
    pub partition_source: PartitionSource,
    pub s: Option<f64>,
    pub growth: Option<f64>,
    pub levels: Option<usize>,
    pub useless_budget: Option<f64>,
    pub bad_budget: Option<f64>,
    pub bad0_budget: Option<f64>,
    pub purity: Option<f64>,
    /// Cluster count for `pipeline-random`; default k, one cell per terminal.
    pub clusters: Option<usize>,
    pub lp_oracle: bool,
    pub terminal_sampling: bool,
    pub check_diameters: bool,
}

pub const CONFIG_KEYS: &[&str] = &[
    "n",
    "d",
    "epsilon",
    "k",
    "m",
    "seed",
    "seeds",
    "partition_source",
    "s",
    "growth",
    "levels",
    "useless_budget",
    "bad_budget",
    "bad0_budget",
    "purity",
    "clusters",
    "lp_oracle",
    "terminal_sampling",
    "check_diameters",
];

impl Default for Config {
    fn default() -> Self {
        Config {
            n: 1024,
            d: 10,
            epsilon: 0.2,
            k: None,
            m: None,
            seed: 0,
            seeds: None,
            partition_source: PartitionSource::PipelineRandom,
            s: None,
            growth: None,
            levels: None,
            useless_budget: None,
            bad_budget: None,
            bad0_budget: None,
            purity: None,
            clusters: None,
            lp_oracle: false,
            terminal_sampling: false,
            check_diameters: true,
        }
    }
}

fn value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::config(key, format!("cannot parse `{v}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::config(key, format!("expected true or false, got `{v}`"))),
    }
}

/// `a..b` (inclusive), `a,b,c` or `[a..b]`.
pub fn parse_seeds(v: &str) -> Result<Vec<u64>> {
    let v = v.trim().trim_start_matches('[').trim_end_matches(']');
    let out: Vec<u64> = if let Some((a, b)) = v.split_once("..") {
        let (a, b): (u64, u64) = (value("seeds", a.trim())?, value("seeds", b.trim().trim_start_matches('='))?);
        if a > b {
            return Err(Error::config("seeds", format!("empty range {a}..{b}")));
        }
        (a..=b).collect()
    } else {
        v.split(',').map(|x| value("seeds", x.trim())).collect::<Result<_>>()?
    };
    if out.is_empty() {
        return Err(Error::config("seeds", "no seeds given"));
    }
    Ok(out)
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("expected key=value, got `{line}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "n" => self.n = value(key, v)?,
            "d" => self.d = value(key, v)?,
            "epsilon" => self.epsilon = value(key, v)?,
            "k" => self.k = Some(value(key, v)?),
            "m" => self.m = Some(value(key, v)?),
            "seed" => self.seed = value(key, v)?,
            "seeds" => self.seeds = Some(parse_seeds(v)?),
            "partition_source" => self.partition_source = v.parse().map_err(|e| Error::config(key, e))?,
            "s" => self.s = Some(value(key, v)?),
            "growth" => self.growth = Some(value(key, v)?),
            "levels" => self.levels = Some(value(key, v)?),
            "useless_budget" => self.useless_budget = Some(value(key, v)?),
            "bad_budget" => self.bad_budget = Some(value(key, v)?),
            "bad0_budget" => self.bad0_budget = Some(value(key, v)?),
            "purity" => self.purity = Some(value(key, v)?),
            "clusters" => self.clusters = Some(value(key, v)?),
            "lp_oracle" => self.lp_oracle = parse_bool(key, v)?,
            "terminal_sampling" => self.terminal_sampling = parse_bool(key, v)?,
            "check_diameters" => self.check_diameters = parse_bool(key, v)?,
            _ => return Err(Error::config(key, "unknown config key")),
        }
        Ok(())
    }

    /// Canonical key/value view; seeds are excluded since each run has one.
    pub fn entries(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("n", self.n.to_string());
        put("d", self.d.to_string());
        put("epsilon", self.epsilon.to_string());
        put("seed", self.seed.to_string());
        put("partition_source", self.partition_source.to_string());
        put("lp_oracle", self.lp_oracle.to_string());
        put("terminal_sampling", self.terminal_sampling.to_string());
        put("check_diameters", self.check_diameters.to_string());
        for (k, v) in [("k", self.k), ("m", self.m), ("levels", self.levels), ("clusters", self.clusters)] {
            if let Some(v) = v {
                put(k, v.to_string());
            }
        }
        for (k, v) in [
            ("s", self.s),
            ("growth", self.growth),
            ("useless_budget", self.useless_budget),
            ("bad_budget", self.bad_budget),
            ("bad0_budget", self.bad0_budget),
            ("purity", self.purity),
        ] {
            if let Some(v) = v {
                put(k, v.to_string());
            }
        }
        m
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        if let Some(seeds) = &self.seeds {
            let list: Vec<String> = seeds.iter().map(u64::to_string).collect();
            let _ = writeln!(s, "seeds = {}", list.join(","));
        }
        s
    }

    pub fn instance_params(&self, seed: u64) -> Result<InstanceParams> {
        let mut p = InstanceParams::new(self.n, self.d, self.epsilon, seed)?;
        if let Some(k) = self.k {
            p.k = k;
        }
        if let Some(m) = self.m {
            p.m = m;
        }
        p.sample_terminals = self.terminal_sampling;
        p.validate()?;
        Ok(p)
    }

    pub fn cluster_params(&self) -> Result<ClusterParams> {
        let mut c = ClusterParams::from_formulas(self.n, self.epsilon);
        macro_rules! over {
            ($($f:ident),*) => {$(
                if let Some(v) = self.$f {
                    c.$f = v;
                    c.overrides.push(format!("{}={}", stringify!($f), v));
                }
            )*};
        }
        over!(s, growth, levels, useless_budget, bad_budget, bad0_budget, purity);
        c.validate()?;
        Ok(c)
    }
}

/// Multi-source BFS from `centers` in order; a vertex joins the first centre
/// to reach it. Vertices farther than `radius` stay unassigned.
fn grow_cells(g: &CapacitatedGraph, centers: &[usize], radius: Option<usize>, label: &mut [Option<usize>], first: usize) {
    let mut depth = vec![0usize; g.n()];
    let mut queue = VecDeque::new();
    for (i, &c) in centers.iter().enumerate() {
        if label[c].is_none() {
            label[c] = Some(first + i);
            queue.push_back(c);
        }
    }
    while let Some(u) = queue.pop_front() {
        if radius.is_some_and(|r| depth[u] >= r) {
            continue;
        }
        for &(v, _) in g.neighbors(u) {
            if label[v].is_none() {
                label[v] = label[u];
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
    }
}

fn finish_labels(label: Vec<Option<usize>>, mut next: usize) -> Partition {
    let labels: Vec<usize> = label
        .into_iter()
        .map(|l| {
            l.unwrap_or_else(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    Partition::from_labels(&labels)
}

/// Voronoi partition around the terminals plus `clusters − k` seeded random
/// centres. Ties between equidistant centres go to the earlier one: terminals
/// in order, then extra centres by id.
pub fn random_voronoi(g: &CapacitatedGraph, clusters: usize, seed: u64) -> Partition {
    let n = g.n();
    let mut centers: Vec<usize> = g.terminals().to_vec();
    let is_terminal = g.terminal_mask();
    let pool: Vec<usize> = (0..n).filter(|&v| !is_terminal[v]).collect();
    let extra = clusters.saturating_sub(centers.len()).min(pool.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9a27_1710);
    let mut picked: Vec<usize> = sample(&mut rng, pool.len(), extra).into_iter().map(|i| pool[i]).collect();
    picked.sort_unstable();
    centers.extend(picked);
    let mut label = vec![None; n];
    grow_cells(g, &centers, None, &mut label, 0);
    finish_labels(label, centers.len())
}

/// Balls of radius `r` around the terminals, then around the lowest
/// unassigned vertex until everything is covered.
pub fn bfs_balls(g: &CapacitatedGraph, r: usize) -> Partition {
    let n = g.n();
    let mut label = vec![None; n];
    grow_cells(g, g.terminals(), Some(r), &mut label, 0);
    let mut next = g.terminals().len();
    for v in 0..n {
        if label[v].is_none() {
            grow_cells(g, &[v], Some(r), &mut label, next);
            next += 1;
        }
    }
    finish_labels(label, next)
}

pub fn make_partition(cfg: &Config, g: &CapacitatedGraph, seed: u64) -> Result<Partition> {
    match &cfg.partition_source {
        PartitionSource::Singleton => Ok(Partition::singleton(g.n())),
        PartitionSource::File(p) => io::load_partition(artifact_path(p), g.n()),
        PartitionSource::BfsBalls(r) => Ok(bfs_balls(g, *r)),
        PartitionSource::PipelineRandom => {
            let c = cfg.clusters.unwrap_or(g.terminals().len());
            Ok(random_voronoi(g, c, seed))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Full,
    Partial,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Full => 0,
            RunStatus::Partial => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub seed: u64,
    pub dir: PathBuf,
    pub status: RunStatus,
    pub certificate: GapCertificate,
    pub r: usize,
}

/// The artifact files of one run, in write order.
pub const ARTIFACT_FILES: &[&str] = &[
    "graph.txt",
    "partition.txt",
    "layers.txt",
    "pairs.txt",
    "paths.txt",
    "routes.txt",
    "demand.txt",
    "trace.txt",
];

fn trace_text(cert: &GapCertificate, warnings: &[String]) -> String {
    let mut s = String::new();
    for w in warnings {
        let _ = writeln!(s, "# {w}");
    }
    for (j, c) in cert.components.iter().enumerate() {
        let _ = writeln!(s, "component {j} clusters {} superedges {}", c.clusters, c.superedges);
        let _ = writeln!(s, "pairs {} of {}", c.m_achieved, cert.m_target);
        let _ = writeln!(s, "useless {}", c.useless);
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "bad {}", join(&c.bad_node_vector));
        let _ = writeln!(s, "groups {}", join(&c.group_counts));
        let _ = writeln!(s, "diameters {}", join(&c.max_diameters));
        if let Some(it) = c.useless_budget_exceeded_at {
            let _ = writeln!(s, "useless_budget_exceeded_at {it}");
        }
        if let (Some(r), Some(it)) = (&c.abort, c.abort_iteration) {
            let _ = writeln!(s, "abort {it} {r}");
        }
    }
    s
}

/// Builds the instance for `seed`, certifies the configured partition and
/// writes every artifact into `dir`.
pub fn run_single(cfg: &Config, seed: u64, dir: &Path) -> Result<RunReport> {
    let params = cfg.instance_params(seed)?;
    let cluster = cfg.cluster_params()?;
    info!("seed {seed}: n={} k={} m={}", params.n, params.k, params.m);
    let inst = build_instance(&params)?;
    inst.tree.check_telescoping()?;
    inst.check_capacity_bounds()?;
    let g = &inst.graph;
    let partition = make_partition(cfg, g, seed)?;
    let cc = CertifyConfig {
        cluster,
        m: params.m,
        lp_oracle: cfg.lp_oracle,
        check_diameters: cfg.check_diameters,
    };
    let cert = certify_gap_detailed(g, &partition, &cc)?;
    let comp = &cert.component;
    comp.book.check_disjointness()?;
    let mut certificate = cert.certificate.clone();

    let mut warnings = params.warnings.clone();
    warnings.extend(inst.layers.warnings.iter().cloned());
    if let Some(it) = comp.book.useless_budget_exceeded_at {
        warnings.push(format!("useless budget exceeded at iteration {it}"));
    }
    certificate.deviations.extend(warnings.iter().cloned());

    let mut run_cfg = cfg.clone();
    run_cfg.seed = seed;
    run_cfg.seeds = None;
    let mut params_map = run_cfg.entries();
    params_map.insert("k_effective".into(), params.k.to_string());
    params_map.insert("m_effective".into(), params.m.to_string());
    params_map.insert("r".into(), inst.layers.r.to_string());
    params_map.insert("alpha".into(), format!("{:.6}", params.alpha()));
    let lg = (params.n as f64).log2();
    params_map.insert("r_trend".into(), format!("{:.6}", lg.powf(params.alpha())));
    params_map.insert(
        "distance_target".into(),
        format!("{:.6}", params.n as f64 * lg.powf(1.0 - params.alpha()) / 128.0),
    );
    params_map.insert("cluster_s".into(), format!("{:.6}", cc.cluster.s));
    params_map.insert("cluster_levels".into(), cc.cluster.levels.to_string());
    certificate.params = params_map;

    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let texts = [
        graph_to_text(g),
        partition_to_text(&partition),
        layers_to_text(&inst.layers.dist),
        pairs_to_text(&comp.assembly.pair_records),
        paths_to_text(&comp.assembly.g_paths()),
        routes_to_text(&comp.assembly.routes),
        demand_to_text(&comp.assembly.demand),
        trace_text(&certificate, &warnings),
    ];
    for (name, text) in ARTIFACT_FILES.iter().zip(&texts) {
        io::write(&dir.join(name), text)?;
        certificate.files.insert((*name).into(), sha256_hex(text));
    }
    io::write(&dir.join("certificate.json"), &certificate.to_json()?)?;
    for w in &warnings {
        warn!("seed {seed}: {w}");
    }
    let status = if certificate.is_full() { RunStatus::Full } else { RunStatus::Partial };
    Ok(RunReport {
        seed,
        dir: dir.to_path_buf(),
        status,
        certificate,
        r: inst.layers.r,
    })
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub runs: Vec<RunReport>,
}

impl PipelineOutcome {
    pub fn exit_code(&self) -> i32 {
        self.runs.iter().map(|r| r.status.exit_code()).max().unwrap_or(0)
    }
}

/// One run, or a parallel sweep into `seed-<s>` subdirectories plus CSVs.
pub fn run_pipeline(cfg: &Config, out: &Path) -> Result<PipelineOutcome> {
    let out = artifact_path(out);
    match &cfg.seeds {
        None => Ok(PipelineOutcome {
            runs: vec![run_single(cfg, cfg.seed, &out)?],
        }),
        Some(seeds) => {
            let runs: Vec<RunReport> = seeds
                .par_iter()
                .map(|&s| run_single(cfg, s, &out.join(format!("seed-{s}"))))
                .collect::<Result<_>>()?;
            let rows: Vec<ReportRow> = runs.iter().map(|r| ReportRow::from_certificate(&r.certificate)).collect::<Result<_>>()?;
            write_rows(&out.join("sweep.csv"), &rows)?;
            write_summary(&out.join("summary.csv"), &rows)?;
            Ok(PipelineOutcome { runs })
        }
    }
}

/// One CSV row of a run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ReportRow {
    pub n: usize,
    pub seed: u64,
    pub r: usize,
    pub r_trend: f64,
    pub m_achieved: usize,
    pub sum_dist: String,
    pub lower_g: String,
    pub upper_h: String,
    pub ratio: String,
    pub ratio_f64: f64,
    pub aborted: bool,
}

fn param<T: FromStr>(c: &GapCertificate, key: &str) -> Result<T> {
    c.params
        .get(key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::InvalidInput(format!("certificate lacks parameter `{key}`")))
}

fn ratio_f64(s: &str) -> f64 {
    use num_traits::ToPrimitive;
    parse_ratio(s).and_then(|r| r.to_f64()).unwrap_or(f64::NAN)
}

impl ReportRow {
    pub fn from_certificate(c: &GapCertificate) -> Result<Self> {
        let ratio = c.ratio.clone().unwrap_or_default();
        Ok(ReportRow {
            n: c.instance.n,
            seed: param(c, "seed")?,
            r: param(c, "r")?,
            r_trend: param(c, "r_trend")?,
            m_achieved: c.m_achieved,
            sum_dist: c.pair_distance_sum.clone(),
            lower_g: c.lower_g.clone(),
            upper_h: c.upper_h.clone(),
            ratio_f64: ratio_f64(&ratio),
            ratio,
            aborted: c.aborted,
        })
    }
}

fn write_rows(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(Error::Csv)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(values[n / 2]),
        _ => Some((values[n / 2 - 1] + values[n / 2]) / 2.0),
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub runs: usize,
    pub median_r: f64,
    pub r_trend: f64,
    pub median_m_achieved: f64,
    pub median_ratio: f64,
    pub abort_rate: f64,
}

pub fn summarize(rows: &[ReportRow]) -> Vec<SummaryRow> {
    let mut by_n: BTreeMap<usize, Vec<&ReportRow>> = BTreeMap::new();
    for r in rows {
        by_n.entry(r.n).or_default().push(r);
    }
    by_n.into_iter()
        .map(|(n, rs)| {
            let col = |f: &dyn Fn(&ReportRow) -> f64| median(&mut rs.iter().map(|r| f(r)).collect::<Vec<_>>()).unwrap_or(f64::NAN);
            SummaryRow {
                n,
                runs: rs.len(),
                median_r: col(&|r| r.r as f64),
                r_trend: rs[0].r_trend,
                median_m_achieved: col(&|r| r.m_achieved as f64),
                median_ratio: col(&|r| r.ratio_f64),
                abort_rate: rs.iter().filter(|r| r.aborted).count() as f64 / rs.len() as f64,
            }
        })
        .collect()
}

fn write_summary(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in summarize(rows) {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Dot,
}

impl FromStr for ExportFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "dot" => Ok(ExportFormat::Dot),
            _ => Err(format!("unknown export format `{s}`")),
        }
    }
}

/// Run directories under `dir`: itself if it holds a certificate, else its
/// `seed-*` children in seed order.
pub fn run_dirs(dir: &Path) -> Result<Vec<PathBuf>> {
    if dir.join("certificate.json").is_file() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let mut found: Vec<(u64, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let seed = path
            .file_name()
            .and_then(|s| s.to_str())
            .and_then(|s| s.strip_prefix("seed-"))
            .and_then(|s| s.parse().ok());
        if let Some(seed) = seed {
            if path.join("certificate.json").is_file() {
                found.push((seed, path));
            }
        }
    }
    if found.is_empty() {
        return Err(Error::InvalidInput(format!("no certificate under {}", dir.display())));
    }
    found.sort();
    Ok(found.into_iter().map(|(_, p)| p).collect())
}

pub fn load_certificate(dir: &Path) -> Result<GapCertificate> {
    let path = dir.join("certificate.json");
    GapCertificate::from_json(&fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?)
}

/// DOT of H with `load/capacity` labels, loads counted from the routes file.
pub fn dot_export(run: &Path) -> Result<String> {
    let g = io::load_graph(run.join("graph.txt"))?;
    let p = io::load_partition(run.join("partition.txt"), g.n())?;
    let routes_path = run.join("routes.txt");
    let routes = io::parse_routes(&fs::read_to_string(&routes_path).map_err(|e| Error::io(&routes_path, e))?)?;
    let h = contract(&g, &p)?;
    let mut load = vec![0u64; h.edge_count()];
    for r in routes.iter().filter(|r| r.pair.0 != r.pair.1) {
        for w in r.nodes.windows(2) {
            let s = h
                .superedge_between(w[0], w[1])
                .ok_or_else(|| Error::InvalidInput(format!("route hop {}-{} is not a superedge", w[0], w[1])))?;
            load[s] += 1;
        }
    }
    let mut s = String::from("graph H {\n");
    let mut is_terminal = vec![false; h.node_count()];
    for &c in h.terminal_nodes() {
        is_terminal[c] = true;
    }
    for (c, t) in is_terminal.iter().enumerate() {
        let shape = if *t { "box" } else { "ellipse" };
        let _ = writeln!(s, "  {c} [shape={shape}];");
    }
    for e in h.superedges() {
        let _ = writeln!(s, "  {} -- {} [label=\"{}/{}\"];", e.a, e.b, load[e.id], e.cap);
    }
    s.push_str("}\n");
    Ok(s)
}

/// Writes `report.csv` or one `h.dot` per run; returns the files written.
pub fn export_report(dir: &Path, format: ExportFormat) -> Result<Vec<PathBuf>> {
    let dir = artifact_path(dir);
    let runs = run_dirs(&dir)?;
    match format {
        ExportFormat::Csv => {
            let rows: Vec<ReportRow> = runs
                .iter()
                .map(|d| ReportRow::from_certificate(&load_certificate(d)?))
                .collect::<Result<_>>()?;
            let path = dir.join("report.csv");
            write_rows(&path, &rows)?;
            Ok(vec![path])
        }
        ExportFormat::Dot => runs
            .iter()
            .map(|d| {
                let path = d.join("h.dot");
                io::write(&path, &dot_export(d)?)?;
                Ok(path)
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let cfg = Config::parse("n = 64\n# c\nseed=3\nseeds=1..3\npartition_source=bfs-balls:2\nlp_oracle=true\ns=4\n").unwrap();
        assert_eq!(cfg.n, 64);
        assert_eq!(cfg.seeds, Some(vec![1, 2, 3]));
        assert_eq!(cfg.partition_source, PartitionSource::BfsBalls(2));
        assert_eq!(Config::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = Config::parse("n=8\nbogus=1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn overrides_are_recorded() {
        let cfg = Config::parse("s=3\nlevels=2").unwrap();
        let c = cfg.cluster_params().unwrap();
        assert_eq!((c.s, c.levels), (3.0, 2));
        assert_eq!(c.overrides, vec!["s=3".to_string(), "levels=2".to_string()]);
    }

    #[test]
    fn voronoi_separates_terminals() {
        let edges: Vec<_> = (0..9).map(|i| (i, i + 1, 1)).collect();
        let g = CapacitatedGraph::new(10, &edges, vec![0, 9]).unwrap();
        let p = random_voronoi(&g, 4, 1);
        assert_eq!(p.cluster_count(), 4);
        assert_ne!(p.cluster_of(0), p.cluster_of(9));
    }

    #[test]
    fn terminal_cells_split_path_at_midpoint() {
        let edges: Vec<_> = (0..9).map(|i| (i, i + 1, 1)).collect();
        let g = CapacitatedGraph::new(10, &edges, vec![0, 9]).unwrap();
        for seed in 0..4 {
            let p = random_voronoi(&g, 2, seed);
            let near0: Vec<bool> = (0..10).map(|v| p.cluster_of(v) == p.cluster_of(0)).collect();
            assert_eq!(near0, [true, true, true, true, true, false, false, false, false, false]);
        }
    }

    #[test]
    fn balls_cover_path() {
        let edges: Vec<_> = (0..9).map(|i| (i, i + 1, 1)).collect();
        let g = CapacitatedGraph::new(10, &edges, vec![0]).unwrap();
        let p = bfs_balls(&g, 1);
        // later balls may not enter earlier ones: {0,1} {2,3} {4,5} {6,7} {8,9}
        assert_eq!(p.assignment(), &[0, 0, 1, 1, 2, 2, 3, 3, 4, 4]);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }
}
