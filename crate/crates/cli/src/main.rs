//! Command-line front end for the loopforge library.
//!
//! Every command prints a JSON document on stdout. With `--out DIR` the
//! outputs are also written to files next to a `manifest.json`.
//!
//! Exit codes: 0 success, 1 a verification failed (a JSON failure report is
//! printed), 2 invalid arguments.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use loopforge::checks::run_selected;
use loopforge::exact::{self, enum_dimer_covers, fkt_count, mdd_expectations, PathSum};
use loopforge::fourier::property_sweep;
use loopforge::io::{self, emit_decay_plot, result_rows, write_csv, write_json, RunManifest};
use loopforge::mcmc::{decay_scan, decay_verdict, sample_mdd, ChainConfig};
use loopforge::spin::quadrature::Quadrature;
use loopforge::spin::verify::Verifier;
use loopforge::{Graph, ModelParams, WeightFunction};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "loopforge", version, about = "Loop model oracles, verifiers and worm Monte Carlo")]
struct Cli {
    /// Directory for output files and the run manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count dimer covers of a graph by enumeration.
    Enumerate {
        #[arg(long)]
        graph: String,
    },
    /// Count dimer covers of an open grid with the Pfaffian method.
    Fkt {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
    },
    /// Exact monomer double-dimer expectations by enumeration.
    MddExact {
        #[arg(long)]
        graph: String,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long = "colors", default_value_t = 1)]
        n_colors: u32,
    },
    /// Exact path partition function.
    Zpath(ModelArgs),
    /// Exact two-point table from the origin.
    Twopoint {
        #[command(flatten)]
        model: ModelArgs,
        /// g1, g2, monomer or walk
        #[arg(long, default_value = "g1")]
        kind: String,
    },
    /// Quadrature against path sums for every identity on one graph.
    SpinVerify(ModelArgs),
    /// Randomized check of the Fourier lower bound.
    FourierCheck {
        /// Periods, comma separated.
        #[arg(long = "L", value_delimiter = ',', default_value = "8,16,32")]
        periods: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        random: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run the worm sampler on one graph.
    Sample {
        #[arg(long)]
        graph: String,
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Sample slab tori of several sizes and test the decay trend.
    DecayScan {
        #[arg(long = "L", value_delimiter = ',', default_value = "8,16,32")]
        sizes: Vec<usize>,
        #[arg(long = "K", default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Run the acceptance checks.
    VerifyAll {
        /// Criterion numbers, comma separated; all when omitted.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
    /// Render a decay-scan CSV as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    graph: String,
    /// dimer, mdd, xy:N or custom:a,b,c
    #[arg(long, default_value = "mdd")]
    weight: String,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 0.0)]
    h: f64,
    #[arg(long, default_value_t = 1)]
    r: u32,
}

impl ModelArgs {
    fn load(&self) -> Result<(Graph, WeightFunction, ModelParams)> {
        let g = Graph::preset(&self.graph)?;
        let u = WeightFunction::parse(&self.weight)?;
        let params = ModelParams { beta: self.beta, h: self.h, r: self.r, ..Default::default() };
        params.validate()?;
        Ok((g, u, params))
    }

    fn json(&self) -> Value {
        json!({"graph": self.graph, "weight": self.weight, "beta": self.beta, "h": self.h, "r": self.r})
    }
}

/// Chain settings: a JSON file, then flag overrides.
#[derive(Args)]
struct ChainArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long = "colors")]
    n_colors: Option<u32>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ChainArgs {
    fn load(&self) -> Result<ChainConfig> {
        let mut c: ChainConfig = match &self.config {
            Some(p) => io::read_json(p).with_context(|| format!("reading {}", p.display()))?,
            None => ChainConfig::default(),
        };
        if let Some(v) = self.rho {
            c.rho = v;
        }
        if let Some(v) = self.n_colors {
            c.n_colors = v;
        }
        if let Some(v) = self.sweeps {
            c.sweeps = v;
        }
        if let Some(v) = self.burn_in {
            c.burn_in = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        c.validate()?;
        Ok(c)
    }
}

/// A verification that ran to completion and failed.
#[derive(Debug)]
struct Failed(Value);

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed")
    }
}

impl std::error::Error for Failed {}

struct Output<'a> {
    dir: Option<&'a Path>,
}

impl Output<'_> {
    fn file(&self, name: &str, contents: &str) -> Result<()> {
        if let Some(d) = self.dir {
            fs::write(d.join(name), contents).with_context(|| format!("writing {name}"))?;
        }
        Ok(())
    }

    fn json(&self, name: &str, v: &impl serde::Serialize) -> Result<()> {
        if let Some(d) = self.dir {
            write_json(&d.join(name), v)?;
        }
        Ok(())
    }

    fn csv<T: serde::Serialize>(&self, name: &str, rows: &[T]) -> Result<()> {
        if let Some(d) = self.dir {
            write_csv(fs::File::create(d.join(name))?, rows)?;
        }
        Ok(())
    }
}

fn two_point(g: &Graph, u: &WeightFunction, p: &ModelParams, kind: &str) -> Result<exact::TwoPointTable> {
    Ok(match kind {
        "g1" => exact::g1_table(g, u, p)?,
        "g2" => exact::g2_table(g, u, p)?,
        "monomer" => exact::monomer_table(g)?,
        "walk" => exact::mdd_walk_table(g, 1.0 / p.beta, 1)?,
        other => return Err(loopforge::Error::InvalidArgument(format!("unknown table kind {other}")).into()),
    })
}

fn run(cli: &Cli) -> Result<(Value, Value, Option<u64>)> {
    let out = Output { dir: cli.out.as_deref() };
    Ok(match &cli.command {
        Command::Enumerate { graph } => {
            let g = Graph::preset(graph)?;
            let covers = enum_dimer_covers(&g)?;
            (json!({"graph": graph}), json!({"graph": g.name(), "covers": covers.to_string()}), None)
        }
        Command::Fkt { width, height } => {
            let n = fkt_count(*width, *height)?;
            (json!({"width": width, "height": height}), json!({"covers": n.to_string()}), None)
        }
        Command::MddExact { graph, rho, n_colors } => {
            let g = Graph::preset(graph)?;
            let ex = mdd_expectations(&g, *rho, *n_colors)?;
            out.json("expectations.json", &ex)?;
            (json!({"graph": graph, "rho": rho, "n_colors": n_colors}), serde_json::to_value(&ex)?, None)
        }
        Command::Zpath(m) => {
            let (g, u, p) = m.load()?;
            let z: f64 = PathSum::new(&g, &u, p)?.zpath()?;
            (m.json(), json!({"zpath": z}), None)
        }
        Command::Twopoint { model, kind } => {
            let (g, u, p) = model.load()?;
            let table = two_point(&g, &u, &p, kind)?;
            let doc = io::TableDocument { graph: g.name().into(), params: model.json(), kind: kind.clone(), table };
            out.json("table.json", &doc)?;
            (model.json(), serde_json::to_value(&doc)?, None)
        }
        Command::SpinVerify(m) => {
            let (g, u, p) = m.load()?;
            let v = Verifier::new(&g, &u, p, Quadrature::default_for(g.n_vertices()))?;
            let reports = v.run_all()?;
            out.json("reports.json", &reports)?;
            let failed: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
            if !failed.is_empty() {
                return Err(Failed(json!({"command": "spin-verify", "failures": failed})).into());
            }
            (m.json(), json!({"reports": reports.len(), "passed": reports.len()}), None)
        }
        Command::FourierCheck { periods, random, seed } => {
            let rep = property_sweep(periods, *random, *seed)?;
            out.json("fourier.json", &rep)?;
            if rep.violations > 0 || rep.inapplicable > 0 {
                return Err(Failed(json!({"command": "fourier-check", "report": rep})).into());
            }
            (json!({"L": periods, "random": random}), serde_json::to_value(&rep)?, Some(*seed))
        }
        Command::Sample { graph, chain } => {
            let g = Graph::preset(graph)?;
            let cfg = chain.load()?;
            let (stats, table) = sample_mdd(&g, &cfg)?;
            let (l, k) = g.torus().map(|d| (d.l, d.k)).unwrap_or((0, 0));
            out.csv("results.csv", &result_rows(&stats, Some(&table), l, k))?;
            out.json("stats.json", &stats)?;
            out.json("table.json", &table)?;
            (json!({"graph": graph, "chain": cfg}), serde_json::to_value(&stats)?, Some(cfg.seed))
        }
        Command::DecayScan { sizes, k, chain } => {
            let cfg = chain.load()?;
            let rows = decay_scan(sizes, *k, &cfg)?;
            let verdict = decay_verdict(&rows);
            let mut csv = Vec::new();
            write_csv(&mut csv, &rows)?;
            out.file("decay.csv", std::str::from_utf8(&csv)?)?;
            out.file("decay.svg", &emit_decay_plot(std::str::from_utf8(&csv)?)?)?;
            let doc = json!({"rows": rows, "verdict": verdict, "pass": verdict.pass()});
            (json!({"L": sizes, "K": k, "chain": cfg}), doc, Some(cfg.seed))
        }
        Command::VerifyAll { only } => {
            let outcomes = run_selected(only);
            for o in &outcomes {
                eprintln!("{}", o.line());
            }
            out.json("acceptance.json", &outcomes)?;
            if outcomes.iter().any(|o| !o.pass) {
                let failed: Vec<_> = outcomes.iter().filter(|o| !o.pass).collect();
                return Err(Failed(json!({"command": "verify-all", "failures": failed})).into());
            }
            (json!({"only": only}), serde_json::to_value(&outcomes)?, None)
        }
        Command::Plot { input, output } => {
            let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
            let svg = emit_decay_plot(&text)?;
            fs::write(output, svg).with_context(|| format!("writing {}", output.display()))?;
            (json!({"input": input, "output": output}), json!({"written": output}), None)
        }
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Enumerate { .. } => "enumerate",
        Command::Fkt { .. } => "fkt",
        Command::MddExact { .. } => "mdd-exact",
        Command::Zpath(_) => "zpath",
        Command::Twopoint { .. } => "twopoint",
        Command::SpinVerify(_) => "spin-verify",
        Command::FourierCheck { .. } => "fourier-check",
        Command::Sample { .. } => "sample",
        Command::DecayScan { .. } => "decay-scan",
        Command::VerifyAll { .. } => "verify-all",
        Command::Plot { .. } => "plot",
    }
}

fn init_threads() -> Result<()> {
    if let Ok(s) = std::env::var("LOOPFORGE_THREADS") {
        let n: usize = s.parse().map_err(|_| loopforge::Error::InvalidArgument(format!("LOOPFORGE_THREADS={s}")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = init_threads().and_then(|_| {
        if let Some(d) = &cli.out {
            fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        }
        run(&cli)
    });
    match result {
        Ok((params, doc, seed)) => {
            if let Some(d) = &cli.out {
                let manifest = RunManifest::new(command_name(&cli.command), params, seed).map(|mut m| {
                    m.wall_clock_secs = start.elapsed().as_secs_f64();
                    m
                });
                if let Err(e) = manifest.map_err(anyhow::Error::from).and_then(|m| Ok(write_json(&d.join("manifest.json"), &m)?)) {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(2);
                }
            }
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let Some(Failed(report)) = e.downcast_ref::<Failed>() {
                println!("{}", serde_json::to_string_pretty(report).expect("serializable"));
                return ExitCode::from(1);
            }
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
