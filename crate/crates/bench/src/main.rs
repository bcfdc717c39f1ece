use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use amrrt_bench::checks::{self, Check};
use amrrt_bench::report::{emit_report, summarize, Summary};
use amrrt_bench::rewiring::{rewiring_trial, RewiringSetup};
use amrrt_bench::{run_scenario, BenchError, Prepared, Scenario, VariantSpec};
use amrrt_core::metrics::{
    AssistingMetric, DiffusionMetric, GeodesicOracle, GridGraph, MetricKind, MetricParams, MetricRegistry,
    VisibilityGraph,
};
use amrrt_core::planner::{BudgetMode, VariantRegistry};
use amrrt_core::{fixtures, Environment, State};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bench", about = "Tour benchmarks for the AM-RRT* planners")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Deterministic,
    Wallclock,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tour a scenario with each variant and seed, then write the report.
    Run {
        /// Scenario JSON file, or the name of a shipped scenario.
        #[arg(long)]
        scenario: String,
        /// Comma-separated variant names; defaults to the scenario's list.
        #[arg(long, value_delimiter = ',')]
        variants: Vec<String>,
        /// Use seeds 0..n instead of the scenario's seeds.
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long, value_enum, default_value = "deterministic")]
        mode: ModeArg,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
        /// Diffusion-map sidecar to load, or to create when missing.
        #[arg(long)]
        diffmap: Option<PathBuf>,
    },
    /// Build the diffusion map of a map and store it as a sidecar.
    Diffmap {
        #[arg(long)]
        map: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print reference and assisting distances between two states.
    Oracle {
        #[arg(long)]
        map: String,
        #[arg(long, value_parser = parse_state)]
        from: State,
        #[arg(long, value_parser = parse_state)]
        to: State,
    },
    /// Targeted against random goal rewiring on identical office trees.
    Rewiring {
        #[arg(long, default_value_t = 25)]
        seeds: u64,
    },
}

fn parse_state(s: &str) -> Result<State, String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [x, y] => Ok(State::new(
            x.trim().parse().map_err(|e| format!("bad x: {e}"))?,
            y.trim().parse().map_err(|e| format!("bad y: {e}"))?,
        )),
        _ => Err("expected x,y".into()),
    }
}

fn load_map(map: &str) -> Result<Environment, BenchError> {
    if let Some(env) = fixtures::load(map) {
        return Ok(env);
    }
    let text = std::fs::read_to_string(map).map_err(|e| BenchError::Io(map.to_string(), e))?;
    Ok(Environment::parse(&text)?)
}

fn load_scenario(s: &str) -> Result<Scenario, BenchError> {
    let path = Path::new(s);
    if path.exists() {
        Scenario::load(path)
    } else {
        Scenario::shipped(s)
    }
}

fn run(
    scenario: &str,
    variants: Vec<String>,
    seeds: Option<u64>,
    mode: ModeArg,
    out: &Path,
    diffmap: Option<PathBuf>,
) -> Result<Vec<Check>, BenchError> {
    let mut sc = load_scenario(scenario)?;
    if let Some(n) = seeds {
        sc.seeds = (0..n).collect();
    }
    let specs: Vec<VariantSpec> = if variants.is_empty() {
        sc.variants.clone()
    } else {
        variants
            .iter()
            .map(|v| sc.variants.iter().find(|s| &s.variant == v).cloned().unwrap_or_else(|| VariantSpec::named(v)))
            .collect()
    };
    let registry = VariantRegistry::standard();
    let mut kinds = Vec::new();
    for s in &specs {
        let k = registry.get(&s.variant)?.metric;
        if !kinds.contains(&k) && !(k == MetricKind::Diffusion && diffmap.is_some()) {
            kinds.push(k);
        }
    }
    let mut prepared = Prepared::new(&sc, &kinds, &MetricParams::default())?;
    if let Some(path) = diffmap {
        let p = MetricParams::default();
        let t = Instant::now();
        let (metric, loaded) =
            DiffusionMetric::load_or_build(&prepared.env, p.r_grid_for(&prepared.env), p.k, p.diffusion_time, &path)?;
        let secs = t.elapsed().as_secs_f64();
        eprintln!("diffusion map {} in {secs:.2}s", if loaded { "loaded" } else { "built" });
        prepared = prepared.with_metric(Arc::new(metric), secs);
    }
    let mode = match mode {
        ModeArg::Deterministic => BudgetMode::Deterministic,
        ModeArg::Wallclock => BudgetMode::Wallclock,
    };
    let t = Instant::now();
    let rows = run_scenario(&sc, &prepared, &specs, mode)?;
    eprintln!("{} runs in {:.1}s", specs.len() * sc.seeds.len(), t.elapsed().as_secs_f64());
    let variants = summarize(&rows);
    let summary = Summary {
        schema_version: amrrt_bench::report::SCHEMA_VERSION,
        scenario: sc.name.clone(),
        mode: format!("{mode:?}").to_lowercase(),
        variants: variants.clone(),
        preprocessing: prepared.preprocessing.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    };
    let (csv, json) = emit_report(&rows, &summary, out)?;
    eprintln!("wrote {} and {}", csv.display(), json.display());
    for v in &variants {
        let st = v.search_time.map_or("-".into(), |s| format!("{:.1}", s.median));
        let ra = v.ratio.map_or("-".into(), |s| format!("{:.4}", s.mean));
        println!("{:<10} runs {:>3}  failed legs {:>3}  median search {st:>10}  mean ratio {ra}", v.variant, v.runs, v.failed_legs);
    }
    Ok(checks::evaluate(&sc.name, &sc.checks, &rows, &variants))
}

fn oracle(map: &str, from: State, to: State) -> Result<(), BenchError> {
    let env = load_map(map)?;
    for (what, p) in [("from", from), ("to", to)] {
        if !env.in_free(&p) {
            return Err(BenchError::Scenario(format!("`{what}` {p:?} is not in free space")));
        }
    }
    println!("euclidean      {:.4}", from.dist(&to));
    println!("any-angle      {:.4}", VisibilityGraph::build(&env).shortest_length(&from, &to));
    let lattice = GeodesicOracle::new(Arc::new(GridGraph::build(&env, env.cell_size())?), 4);
    println!("lattice (raw)  {:.4}", lattice.path_length(&from, &to, false));
    let d: Arc<dyn AssistingMetric> = MetricRegistry::standard().build("diffusion", &env, &MetricParams::default())?;
    println!("diffusion      {:.6}", d.distance(&from, &to));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run { scenario, variants, seeds, mode, out, diffmap } => {
            run(&scenario, variants, seeds, mode, &out, diffmap).map(|checks| {
                for c in &checks {
                    println!("{c}");
                }
                checks.iter().all(|c| c.passed)
            })
        }
        Cmd::Diffmap { map, out } => load_map(&map).and_then(|env| {
            let p = MetricParams::default();
            let t = Instant::now();
            let m = DiffusionMetric::build(&env, p.r_grid_for(&env), p.k, p.diffusion_time)?;
            let file = std::fs::File::create(&out).map_err(|e| BenchError::Io(out.display().to_string(), e))?;
            m.map().write_sidecar(m.grid(), std::io::BufWriter::new(file))?;
            println!("{} lattice nodes, built in {:.2}s", m.grid().node_count(), t.elapsed().as_secs_f64());
            Ok(true)
        }),
        Cmd::Oracle { map, from, to } => oracle(&map, from, to).map(|_| true),
        Cmd::Rewiring { seeds } => fixtures::try_load("office").map_err(BenchError::from).and_then(|env| {
            let metric = MetricRegistry::standard().build("diffusion", &env, &MetricParams::default())?;
            let setup = RewiringSetup::office();
            let mut wins = 0;
            for seed in 0..seeds {
                let t = rewiring_trial(&env, metric.clone(), &setup, seed)?;
                wins += t.targeted_wins() as u64;
                println!(
                    "seed {seed:>2}  initial {:.2}  targeted {:.2}  random {:.2}",
                    t.initial_cost, t.targeted_cost, t.random_cost
                );
            }
            let c = Check::new("targeted rewiring", wins * 5 >= seeds * 4, format!("{wins}/{seeds} seeds"));
            println!("{c}");
            Ok(c.passed)
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
