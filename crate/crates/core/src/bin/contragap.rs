use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use contragap::expander::{conductance_brute, gen_matching_union, spectral_lower_bound, ExpanderSpec};
use contragap::io::{load_graph, load_partition, save_graph};
use contragap::pipeline::{artifact_path, export_report, run_pipeline, Config, ExportFormat, ARTIFACT_ROOT_ENV};
use contragap::routing::{max_flow_value, mincut_brute_oracle, AuxGraph};
use contragap::surgery::build_instance;
use contragap::{certify_gap, certificate::CertifyConfig, Result};

#[derive(Parser)]
#[command(name = "contragap", version, about = "Hard instances and quality-gap certificates for contraction-based flow sparsifiers")]
struct Cli {
    /// Directory relative output paths resolve against.
    #[arg(long, global = true, env = ARTIFACT_ROOT_ENV)]
    artifact_root: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Config file plus flag overrides; flags win.
#[derive(Args, Clone)]
struct ConfigArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    partition_source: Option<String>,
    #[arg(long)]
    lp_oracle: bool,
    /// Any other config key, as key=value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        let pairs = [
            ("n", self.n.map(|v| v.to_string())),
            ("d", self.d.map(|v| v.to_string())),
            ("epsilon", self.epsilon.map(|v| v.to_string())),
            ("k", self.k.map(|v| v.to_string())),
            ("m", self.m.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("partition_source", self.partition_source.clone()),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        if self.lp_oracle {
            cfg.lp_oracle = true;
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').unwrap_or((kv, ""));
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a capacitated hard instance and write its graph file.
    Gen {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value = "graph.txt")]
        out: PathBuf,
    },
    /// Run the pipeline for one seed, or certify a given graph and partition.
    Certify {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, requires = "partition")]
        graph: Option<PathBuf>,
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long, default_value = "run")]
        out: PathBuf,
    },
    /// Run one pipeline per seed in parallel and aggregate.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// `a..b` or a comma list.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
    },
    /// CSV report or DOT drawings of H from artifact directories.
    Export {
        dir: PathBuf,
        #[arg(long, default_value = "csv")]
        format: ExportFormat,
    },
    /// Cross-check max-flow against brute-force min-cut and spectral bound against conductance.
    Oracle {
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn oracle(trials: usize, n: usize, seed: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ok = true;
    let mut agree = 0;
    for _ in 0..trials {
        let nodes = rng.gen_range(2..=n.clamp(2, 14));
        let mut g = AuxGraph::new(nodes);
        for u in 0..nodes {
            for v in u + 1..nodes {
                if rng.gen_bool(0.4) {
                    g.add_edge(u, v, rng.gen_range(1..=5));
                }
            }
        }
        let (a, b) = (max_flow_value(&g, 0, nodes - 1), mincut_brute_oracle(&g, 0, nodes - 1)?);
        agree += usize::from(a == b);
        ok &= a == b;
    }
    println!("max-flow = min-cut: {agree}/{trials}");
    let even = (n.clamp(4, 16) / 2) * 2;
    let mut ordered = 0;
    let mut half = 0;
    for s in 0..trials as u64 {
        let g = gen_matching_union(ExpanderSpec::new(even, 10, seed.wrapping_add(s)))?;
        let phi = conductance_brute(&g)?;
        let phi = *phi.numer() as f64 / *phi.denom() as f64;
        half += usize::from(phi >= 0.5);
        if let Ok(lb) = spectral_lower_bound(&g) {
            ordered += usize::from(lb <= phi + 1e-6);
            ok &= lb <= phi + 1e-6;
        } else {
            ordered += 1;
        }
    }
    println!("spectral <= conductance (n={even}): {ordered}/{trials}");
    println!("conductance >= 1/2 (n={even}): {half}/{trials}");
    Ok(ok)
}

fn run(cli: Cli) -> Result<i32> {
    if let Some(root) = &cli.artifact_root {
        std::env::set_var(ARTIFACT_ROOT_ENV, root);
    }
    match cli.cmd {
        Cmd::Gen { cfg, out } => {
            let cfg = cfg.resolve()?;
            let inst = build_instance(&cfg.instance_params(cfg.seed)?)?;
            for w in inst.params.warnings.iter().chain(&inst.layers.warnings) {
                log::warn!("{w}");
            }
            let out = artifact_path(out);
            save_graph(&inst.graph, &out)?;
            println!("{} (n={} edges={} k={} r={})", out.display(), inst.graph.n(), inst.graph.edge_count(), inst.params.k, inst.layers.r);
            Ok(0)
        }
        Cmd::Certify { cfg, graph, partition, out } => {
            let mut cfg = cfg.resolve()?;
            if let (Some(gp), Some(pp)) = (graph, partition) {
                let g = load_graph(artifact_path(gp))?;
                let p = load_partition(artifact_path(pp), g.n())?;
                let params = cfg.instance_params(cfg.seed);
                let m = cfg.m.or_else(|| params.ok().map(|p| p.m)).unwrap_or(1);
                let cc = CertifyConfig {
                    cluster: cfg.cluster_params()?,
                    m,
                    lp_oracle: cfg.lp_oracle,
                    check_diameters: cfg.check_diameters,
                };
                let cert = certify_gap(&g, &p, &cc)?;
                let out = artifact_path(out);
                std::fs::create_dir_all(&out).map_err(|e| contragap::Error::io(&out, e))?;
                contragap::io::write(&out.join("certificate.json"), &cert.to_json()?)?;
                println!("lower_g {} upper_h {} ratio {}", cert.lower_g, cert.upper_h, cert.ratio.as_deref().unwrap_or("-"));
                return Ok(if cert.is_full() { 0 } else { 2 });
            }
            cfg.seeds = None;
            let outcome = run_pipeline(&cfg, &out)?;
            for r in &outcome.runs {
                let c = &r.certificate;
                println!("seed {} lower_g {} upper_h {} ratio {} -> {}", r.seed, c.lower_g, c.upper_h, c.ratio.as_deref().unwrap_or("-"), r.dir.display());
            }
            Ok(outcome.exit_code())
        }
        Cmd::Sweep { cfg, seeds, out } => {
            let mut cfg = cfg.resolve()?;
            if let Some(s) = seeds {
                cfg.set("seeds", &s)?;
            }
            if cfg.seeds.is_none() {
                cfg.set("seeds", "1..5")?;
            }
            let outcome = run_pipeline(&cfg, &out)?;
            for r in &outcome.runs {
                let c = &r.certificate;
                println!("seed {} r {} m {} ratio {} aborted {}", r.seed, r.r, c.m_achieved, c.ratio.as_deref().unwrap_or("-"), c.aborted);
            }
            Ok(outcome.exit_code())
        }
        Cmd::Export { dir, format } => {
            for p in export_report(&dir, format)? {
                println!("{}", p.display());
            }
            Ok(0)
        }
        Cmd::Oracle { trials, n, seed } => Ok(if oracle(trials, n, seed)? { 0 } else { 1 }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
