//! `advres`: run, sweep and inspect online reservation schedulers.
//!
//! Exit codes: 0 success, 1 invariant violation, 2 usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use advres::config::{ExperimentConfig, TopologySource};
use advres::flowsolve::max_flow;
use advres::metrics::{fluid_bound, sweep_aggregate, write_sweep_csv, SweepRun};
use advres::netgraph::{from_generator, parse_topology, Network};
use advres::pathdisp::{budget_for_alpha, decompose, dispersion_bound};
use advres::schedulers::{verify_competitive, Job, SchedulerKind};
use advres::simcore::{
    generate_trace, parse_trace, run, write_log, write_paths, PairPolicy, Rejection, RunOptions,
    SizeDist, Summary,
};
use advres::units::{parse_size, BITS_PER_TB};
use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "advres",
    version,
    about = "Online advance-reservation scheduling simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a topology in canonical form.
    Topology {
        #[command(flatten)]
        topo: TopoArgs,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate one scheduler on one workload.
    Run(RunArgs),
    /// Simulate every (scheduler, load) pair and tabulate delays.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Loads in requests/hour, comma separated.
        #[arg(long, value_delimiter = ',')]
        loads: Vec<f64>,
        /// Schedulers to compare, comma separated.
        #[arg(long, value_delimiter = ',')]
        schedulers: Vec<SchedulerKind>,
        /// Sweep CSV path (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Print the fluid upper bound on sustainable load.
    Bound {
        #[command(flatten)]
        topo: TopoArgs,
        /// Mean request size, e.g. 2.475TB.
        #[arg(long, default_value = "2.475TB")]
        mean_size: String,
        /// Restrict traffic to one pair, `SRC,DST`.
        #[arg(long)]
        pair: Option<String>,
    },
    /// Decompose a max flow into at most k widest paths.
    Decompose {
        #[command(flatten)]
        topo: TopoArgs,
        #[arg(long)]
        source: String,
        #[arg(long)]
        dest: String,
        /// Path budget.
        #[arg(long, conflicts_with = "alpha")]
        k: Option<usize>,
        /// Path budget as a fraction of the arc count.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Check a batching scheduler against its competitive guarantee.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Capacity augmentation.
        #[arg(long)]
        eps: Option<f64>,
    },
}

#[derive(Args, Clone, Default)]
struct TopoArgs {
    /// Built-in generator: clique:N, ring:N, star:N, lambdarail, optional @RATE.
    #[arg(long, conflicts_with = "topology_file")]
    topology: Option<String>,
    /// Topology document.
    #[arg(long)]
    topology_file: Option<PathBuf>,
}

impl TopoArgs {
    fn source(&self) -> Option<TopologySource> {
        match (&self.topology, &self.topology_file) {
            (Some(g), _) => Some(TopologySource::Generator(g.clone())),
            (_, Some(f)) => Some(TopologySource::File(f.clone())),
            _ => None,
        }
    }

    fn load(&self) -> anyhow::Result<Network> {
        match (&self.topology, &self.topology_file) {
            (Some(g), _) => Ok(from_generator(g)?),
            (_, Some(f)) => {
                let text =
                    fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
                Ok(parse_topology(&text)?)
            }
            _ => bail!("one of --topology or --topology-file is required"),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Dist {
    Pareto,
    Exponential,
    Constant,
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    topo: TopoArgs,
    #[arg(long)]
    scheduler: Option<SchedulerKind>,
    #[arg(long, value_enum)]
    dist: Option<Dist>,
    /// Mean size for exponential, size for constant (e.g. 2.475TB).
    #[arg(long)]
    mean_size: Option<String>,
    /// Arrival rate in requests/hour.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    requests: Option<usize>,
    /// Fixed pair `SRC,DST` instead of uniform pairs.
    #[arg(long)]
    pair: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fraction of completions excluded from statistics.
    #[arg(long)]
    warmup: Option<f64>,
    /// Replay a trace CSV instead of generating one.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Reservation log CSV.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Summary JSON (stdout when absent).
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Per-job path dump.
    #[arg(long)]
    paths: Option<PathBuf>,
}

fn parse_pair(text: &str) -> anyhow::Result<PairPolicy> {
    let (s, d) = text
        .split_once(',')
        .ok_or_else(|| anyhow!("pair must look like SRC,DST"))?;
    Ok(PairPolicy::Fixed {
        source: s.trim().to_string(),
        destination: d.trim().to_string(),
    })
}

impl RunArgs {
    /// Config file (if any) with every given flag applied on top.
    fn effective(&self) -> anyhow::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(t) = self.topo.source() {
            c.topology = Some(t);
        }
        if let Some(s) = self.scheduler {
            c.scheduler = s;
        }
        let size = self.mean_size.as_deref().map(parse_size).transpose()?;
        if let Some(d) = self.dist {
            let size = size.unwrap_or(2.475 * BITS_PER_TB);
            c.workload.size_dist = match d {
                Dist::Pareto => SizeDist::default_pareto(),
                Dist::Exponential => SizeDist::Exponential { mean: size },
                Dist::Constant => SizeDist::Constant { size },
            };
        } else if let Some(size) = size {
            c.workload.size_dist = match c.workload.size_dist {
                SizeDist::Constant { .. } => SizeDist::Constant { size },
                _ => SizeDist::Exponential { mean: size },
            };
        }
        if let Some(r) = self.rate {
            c.workload.arrival_rate = r;
        }
        if let Some(n) = self.requests {
            c.workload.num_requests = n;
        }
        if let Some(p) = &self.pair {
            c.workload.pair_policy = parse_pair(p)?;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(w) = self.warmup {
            c.warmup_fraction = w;
        }
        if let Some(t) = &self.trace {
            c.trace = Some(t.clone());
        }
        if let Some(p) = &self.log {
            c.outputs.log = Some(p.clone());
        }
        if let Some(p) = &self.summary {
            c.outputs.summary = Some(p.clone());
        }
        if let Some(p) = &self.paths {
            c.outputs.paths = Some(p.clone());
        }
        c.validate()?;
        Ok(c)
    }
}

enum Failure {
    Usage(anyhow::Error),
    Violation(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn load_trace(cfg: &ExperimentConfig, net: &Network) -> anyhow::Result<Vec<Job>> {
    match &cfg.trace {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(parse_trace(&text, net)?)
        }
        None => Ok(generate_trace(&cfg.workload_spec(), net)?),
    }
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct RunReport<'a> {
    config: &'a ExperimentConfig,
    summary: &'a Summary,
    rejections: &'a [Rejection],
}

fn cmd_run(args: &RunArgs) -> Outcome {
    let cfg = args.effective()?;
    let net = cfg.topology.as_ref().expect("validated").load()?;
    let trace = load_trace(&cfg, &net)?;
    let options = RunOptions {
        warmup_fraction: cfg.warmup_fraction,
        keep_plans: false,
    };
    let out = run(&net, cfg.scheduler, &trace, &options)?;
    if let Some(p) = &cfg.outputs.log {
        let f = fs::File::create(p).with_context(|| format!("writing {}", p.display()))?;
        write_log(&net, &out.reservations, std::io::BufWriter::new(f))?;
    }
    if let Some(p) = &cfg.outputs.paths {
        let f = fs::File::create(p).with_context(|| format!("writing {}", p.display()))?;
        write_paths(&net, &out.reservations, std::io::BufWriter::new(f))?;
    }
    let report = RunReport {
        config: &cfg,
        summary: &out.summary,
        rejections: &out.rejections,
    };
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    write_out(cfg.outputs.summary.as_deref(), &json)?;
    if !out.summary.violations.is_empty() {
        return Err(Failure::Violation(out.summary.violations.join("\n")));
    }
    Ok(())
}

fn cmd_sweep(
    args: &RunArgs,
    loads: &[f64],
    schedulers: &[SchedulerKind],
    out: Option<&Path>,
    jobs: usize,
) -> Outcome {
    let mut cfg = args.effective()?;
    if !loads.is_empty() {
        cfg.loads = loads.to_vec();
    }
    if !schedulers.is_empty() {
        cfg.schedulers = schedulers.to_vec();
    }
    if let Some(p) = out {
        cfg.outputs.sweep = Some(p.to_path_buf());
    }
    cfg.validate()?;
    if cfg.loads.is_empty() {
        return Err(Failure::Usage(anyhow!(
            "at least one load is required (--loads)"
        )));
    }
    let source = cfg.topology.clone().expect("validated");
    let net = source.load()?;
    let tasks: Vec<(SchedulerKind, f64)> = cfg
        .sweep_schedulers()
        .into_iter()
        .flat_map(|s| cfg.loads.iter().map(move |l| (s, *l)))
        .collect();
    let options = RunOptions {
        warmup_fraction: cfg.warmup_fraction,
        keep_plans: false,
    };
    let work = || -> anyhow::Result<Vec<SweepRun>> {
        tasks
            .par_iter()
            .map(|&(kind, load)| {
                let mut spec = cfg.workload_spec();
                spec.arrival_rate = load;
                let trace = generate_trace(&spec, &net)?;
                let out = run(&net, kind, &trace, &options)?;
                Ok(SweepRun {
                    topology: source.label(),
                    load_req_per_hour: load,
                    summary: out.summary,
                })
            })
            .collect()
    };
    let runs = if jobs == 0 {
        work()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()?
            .install(work)?
    };
    let violations: Vec<String> = runs
        .iter()
        .flat_map(|r| {
            r.summary
                .violations
                .iter()
                .map(move |v| format!("{} @ {}: {v}", r.summary.scheduler, r.load_req_per_hour))
        })
        .collect();
    let table = sweep_aggregate(&runs)?;
    let mut buf = Vec::new();
    write_sweep_csv(&table, &mut buf)?;
    write_out(cfg.outputs.sweep.as_deref(), &buf)?;
    // The CSV columns are fixed, so the effective config goes beside it.
    if let Some(p) = &cfg.outputs.sweep {
        let mut echo = p.clone().into_os_string();
        echo.push(".config.json");
        let mut json = serde_json::to_vec_pretty(&cfg)?;
        json.push(b'\n');
        write_out(Some(Path::new(&echo)), &json)?;
    }
    if !violations.is_empty() {
        return Err(Failure::Violation(violations.join("\n")));
    }
    Ok(())
}

fn cmd_bound(topo: &TopoArgs, mean_size: &str, pair: Option<&str>) -> Outcome {
    let net = topo.load()?;
    let mean = parse_size(mean_size)?;
    let policy = pair.map(parse_pair).transpose()?.unwrap_or_default();
    let bound = fluid_bound(&net, mean, &policy)?;
    println!(
        "{}",
        serde_json::json!({
            "mean_size_bits": mean,
            "pair_policy": policy,
            "fluid_bound_req_per_hour": bound,
        })
    );
    Ok(())
}

fn cmd_decompose(
    topo: &TopoArgs,
    source: &str,
    dest: &str,
    k: Option<usize>,
    alpha: Option<f64>,
) -> Outcome {
    let net = topo.load()?;
    let s = net.require_node(source)?;
    let d = net.require_node(dest)?;
    let k = match (k, alpha) {
        (Some(k), _) => k,
        (None, Some(a)) if a.is_finite() && a > 0.0 => budget_for_alpha(a, net.arc_count()),
        (None, Some(_)) => return Err(Failure::Usage(anyhow!("alpha must be positive"))),
        (None, None) => return Err(Failure::Usage(anyhow!("one of --k or --alpha is required"))),
    };
    if s == d {
        return Err(Failure::Usage(anyhow!(
            "source and destination must differ"
        )));
    }
    let flow = max_flow(&net, s, d);
    if flow.value <= 0.0 {
        return Err(Failure::Usage(anyhow!("no path from {source} to {dest}")));
    }
    let set =
        decompose(&net, &flow.arc_flow, s, d, k).map_err(|e| Failure::Violation(e.to_string()))?;
    let mut out = String::new();
    out.push_str(&format!("max_flow {}\n", flow.value));
    out.push_str(&format!("k {k}\n"));
    out.push_str(&set.render(&net));
    out.push_str(&format!("paths {}\n", set.paths.len()));
    out.push_str(&format!("achieved {}\n", set.achieved));
    out.push_str(&format!(
        "achieved_fraction {}\n",
        set.achieved / flow.value
    ));
    out.push_str(&format!(
        "bound_fraction {}\n",
        dispersion_bound(k, net.arc_count())
    ));
    print!("{out}");
    Ok(())
}

fn cmd_verify(args: &RunArgs, eps: Option<f64>) -> Outcome {
    let mut cfg = args.effective()?;
    if eps.is_some() {
        cfg.eps = eps;
    }
    cfg.validate()?;
    let eps = cfg.eps.ok_or_else(|| anyhow!("--eps is required"))?;
    if !matches!(
        cfg.scheduler,
        SchedulerKind::BatchAll | SchedulerKind::BatchLim
    ) {
        return Err(Failure::Usage(anyhow!(
            "verify supports batchall and batchlim, not {}",
            cfg.scheduler
        )));
    }
    let net = cfg.topology.as_ref().expect("validated").load()?;
    let trace = load_trace(&cfg, &net)?;
    let report = verify_competitive(&net, cfg.scheduler, &trace, eps)?;
    let mut json = serde_json::to_vec_pretty(&serde_json::json!({
        "config": cfg,
        "report": report,
        "holds": report.holds(),
    }))?;
    json.push(b'\n');
    write_out(cfg.outputs.summary.as_deref(), &json)?;
    if !report.holds() {
        return Err(Failure::Violation(format!(
            "ratio {} exceeds {} or promises/intervals broken",
            report.ratio, report.allowed_ratio
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Topology { topo, out } => (|| -> Outcome {
            let net = topo.load()?;
            write_out(out.as_deref(), net.to_topology_string().as_bytes())?;
            Ok(())
        })(),
        Command::Run(args) => cmd_run(args),
        Command::Sweep {
            run,
            loads,
            schedulers,
            out,
            jobs,
        } => cmd_sweep(run, loads, schedulers, out.as_deref(), *jobs),
        Command::Bound {
            topo,
            mean_size,
            pair,
        } => cmd_bound(topo, mean_size, pair.as_deref()),
        Command::Decompose {
            topo,
            source,
            dest,
            k,
            alpha,
        } => cmd_decompose(topo, source, dest, *k, *alpha),
        Command::Verify { run, eps } => cmd_verify(run, *eps),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("invariant violation:\n{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
