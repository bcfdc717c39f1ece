//! Acceptance report: one PASS/FAIL line per criterion. Lines go straight
//! to stdout, so they show up without `--nocapture`.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use amrrt_bench::checks;
use amrrt_bench::report::{summarize, write_csv, LegRow, VariantSummary};
use amrrt_bench::rewiring::{rewiring_trial, RewiringSetup};
use amrrt_bench::{run_scenario, run_tour, Prepared, Scenario, VariantSpec};
use amrrt_core::env::sample_rewire_ellipse;
use amrrt_core::metrics::{
    AssistingMetric, DiffusionMap, DiffusionParams, DiffusionTime, Euclidean, GridGraph, MetricKind, MetricParams,
    MetricRegistry, WeightedGraph,
};
use amrrt_core::planner::{BudgetMode, Expansion, Mode, Planner, PlannerConfig, VariantRegistry};
use amrrt_core::spatial::DualIndex;
use amrrt_core::tree::{NodeId, PlanTree, TreeError};
use amrrt_core::{fixtures, Environment, Rect, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Default)]
struct Verdicts(Vec<(String, bool)>);

fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    let _ = out.flush();
}

impl Verdicts {
    fn record(&mut self, name: &str, passed: bool, detail: impl AsRef<str>) {
        emit(&format!("{} {name}: {}\n", if passed { "PASS" } else { "FAIL" }, detail.as_ref()));
        self.0.push((name.to_string(), passed));
    }
}

fn note(text: impl AsRef<str>) {
    emit(&format!("    {}\n", text.as_ref()));
}

struct Run {
    rows: Vec<LegRow>,
    summaries: Vec<VariantSummary>,
    prepared: Prepared,
    scenario: Scenario,
}

impl Run {
    fn get(&self, v: &str) -> &VariantSummary {
        self.summaries.iter().find(|s| s.variant == v).expect("variant was run")
    }
}

fn tour_set(name: &str, variants: &[&str]) -> Run {
    let sc = Scenario::shipped(name).unwrap();
    let specs: Vec<VariantSpec> = variants.iter().map(|v| VariantSpec::named(v)).collect();
    let registry = VariantRegistry::standard();
    let kinds: Vec<MetricKind> = specs.iter().map(|s| registry.get(&s.variant).unwrap().metric).collect();
    let prepared = Prepared::new(&sc, &kinds, &MetricParams::default()).unwrap();
    let t = Instant::now();
    let rows = run_scenario(&sc, &prepared, &specs, BudgetMode::Deterministic).unwrap();
    let summaries = summarize(&rows);
    note(format!("{name}: {} tours in {:.0}s", specs.len() * sc.seeds.len(), t.elapsed().as_secs_f64()));
    for s in &summaries {
        note(format!(
            "{name} {:<9} median search {:>9.0}  mean ratio {:.4}  failed legs {}",
            s.variant,
            s.search_time.map_or(f64::NAN, |x| x.median),
            s.ratio.map_or(f64::NAN, |x| x.mean),
            s.failed_legs
        ));
    }
    Run { rows, summaries, prepared, scenario: sc }
}

#[test]
fn acceptance() {
    let mut v = Verdicts::default();
    let t0 = Instant::now();

    let mut runs = BTreeMap::new();
    for name in ["maze", "office"] {
        runs.insert(name, tour_set(name, &["am-rrt-d", "am-rrt-g", "rt-rrt"]));
    }
    for name in ["empty", "corridor"] {
        runs.insert(name, tour_set(name, &["am-rrt-d", "am-rrt-g"]));
    }
    let fig2_secs = t0.elapsed().as_secs_f64();

    let mut dir = Vec::new();
    for name in ["maze", "office"] {
        let r = &runs[name];
        for c in checks::direction(name, r.get("am-rrt-d"), r.get("rt-rrt")) {
            note(c.to_string());
            dir.push(c);
        }
    }
    v.record(
        "search-time and path-length direction (maze, office; 25 seeds)",
        dir.iter().all(|c| c.passed),
        format!("{}/{} checks, all tours in {fig2_secs:.0}s (expected ≤ 900s)", dir.iter().filter(|c| c.passed).count(), dir.len()),
    );

    near_optimality(&mut v, &runs);
    rewiring(&mut v);
    invariants(&mut v, &runs);
    degeneracy(&mut v);

    emit(&format!("acceptance total {:.0}s\n", t0.elapsed().as_secs_f64()));
    let failed: Vec<&String> = v.0.iter().filter(|(_, p)| !p).map(|(n, _)| n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

fn near_optimality(v: &mut Verdicts, runs: &BTreeMap<&str, Run>) {
    let d: Vec<&VariantSummary> = runs.values().map(|r| r.get("am-rrt-d")).collect();
    let overall = checks::near_optimal("all four fixtures", &d);
    note(overall.to_string());
    let mut ok = overall.passed;
    for (name, r) in runs {
        let lb = checks::lower_bound(&r.rows);
        let g = checks::geodesic_bound(name, r.get("am-rrt-g"), r.get("am-rrt-d"));
        note(checks::Check::new(format!("{name}: {}", lb.name), lb.passed, lb.detail.clone()).to_string());
        note(g.to_string());
        ok &= lb.passed && g.passed;
    }
    v.record("near-optimality (D ≤ 1.15, G ≤ D + 0.02)", ok, overall.detail.clone());
}

fn rewiring(v: &mut Verdicts) {
    let t = Instant::now();
    let env = fixtures::load("office").unwrap();
    let metric = MetricRegistry::standard().build("diffusion", &env, &MetricParams::default()).unwrap();
    let setup = RewiringSetup::office();
    let mut wins = 0;
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..25 {
        let trial = rewiring_trial(&env, metric.clone(), &setup, seed).unwrap();
        wins += trial.targeted_wins() as u32;
        worst = worst.max(trial.targeted_cost - trial.random_cost);
    }
    let secs = t.elapsed().as_secs_f64();
    v.record(
        "targeted vs random goal rewiring (250 vs 750 visits)",
        wins >= 20 && secs <= 60.0,
        format!("{wins}/25 seeds (need ≥ 20), worst targeted − random {worst:.2}, {secs:.1}s (need ≤ 60s)"),
    );
}

// ---- invariant suites ----

fn invariants(v: &mut Verdicts, runs: &BTreeMap<&str, Run>) {
    let t = Instant::now();
    let subs: [(&str, Box<dyn Fn() -> Result<String, String> + '_>); 8] = [
        ("tree audits after 10⁴ random ops", Box::new(tree_ops)),
        ("spatial index vs linear scan", Box::new(spatial_scan)),
        ("obs_free vs supersampled oracle", Box::new(segments)),
        ("diffusion axioms and rank fidelity", Box::new(diffusion_fidelity)),
        ("rewire ellipse two-foci inequality", Box::new(ellipse)),
        ("bugtrap completeness", Box::new(bugtrap)),
        ("rewiring strict-decrease audit", Box::new(strict_decrease)),
        ("deterministic reruns", Box::new(|| determinism(runs))),
    ];
    let mut passed = 0;
    for (name, f) in &subs {
        let s = Instant::now();
        let r = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = s.elapsed().as_secs_f64();
        match r {
            Ok(d) => {
                passed += 1;
                note(format!("PASS {name}: {d} ({secs:.1}s)"));
            }
            Err(e) => note(format!("FAIL {name}: {e} ({secs:.1}s)")),
        }
    }
    let secs = t.elapsed().as_secs_f64();
    v.record(
        "invariant suites",
        passed == subs.len() && secs <= 300.0,
        format!("{passed}/{} suites in {secs:.0}s (need ≤ 300s)", subs.len()),
    );
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tree_ops() -> Result<String, String> {
    let world = Environment::empty(100, 100, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut t = PlanTree::new(&world, State::new(50.0, 50.0)).map_err(|e| e.to_string())?;
    let edges = |t: &PlanTree| -> BTreeSet<(NodeId, NodeId)> {
        t.ids().filter_map(|n| t.parent(n).map(|p| (n.min(p), n.max(p)))).collect()
    };
    for step in 0..10_000 {
        let n = t.len() as u32;
        let a = NodeId(rng.gen_range(0..n));
        let b = NodeId(rng.gen_range(0..n));
        match rng.gen_range(0..100) {
            0..=39 => {
                let base = t.position(a);
                let x = State::new(
                    (base.x() + rng.gen_range(-3.0..3.0)).clamp(0.5, 99.5),
                    (base.y() + rng.gen_range(-3.0..3.0)).clamp(0.5, 99.5),
                );
                let _ = t.add_node(x, a);
            }
            40..=69 => match t.update_edge(a, b) {
                Ok(()) => check(t.parent(b) == Some(a), || format!("step {step}: edge not set"))?,
                Err(TreeError::CycleWouldForm { .. }) => {
                    check(t.is_descendant(a, b), || format!("step {step}: spurious cycle guard"))?
                }
                Err(TreeError::RootEdge) => check(b == t.root(), || format!("step {step}: spurious root guard"))?,
                Err(e) => return Err(format!("step {step}: {e}")),
            },
            70..=84 => {
                let _ = t.invalidate(a);
            }
            85..=92 => {
                let _ = t.revalidate(a);
            }
            _ => {
                let before = edges(&t);
                t.set_root(a).map_err(|e| e.to_string())?;
                check(edges(&t) == before, || format!("step {step}: set_root changed the edge set"))?;
            }
        }
        if step % 100 == 0 {
            t.audit().map_err(|e| format!("step {step}: {e}"))?;
        }
    }
    t.audit()?;
    Ok(format!("{} nodes", t.len()))
}

fn spatial_scan() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5151);
    let mut queries = 0;
    // Euclidean, 2000 nodes.
    let pts: Vec<State> = (0..2000).map(|_| State::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0))).collect();
    let mut idx = DualIndex::new(100.0, 100.0, 2.5, Arc::new(Euclidean));
    for p in &pts {
        idx.insert(*p).map_err(|e| e.to_string())?;
    }
    for _ in 0..500 {
        let x = State::new(rng.gen_range(-5.0..105.0), rng.gen_range(-5.0..105.0));
        let best = pts.iter().map(|p| p.dist(&x)).fold(f64::INFINITY, f64::min);
        let got = idx.nearest_euclidean(&x).map_err(|e| e.to_string())?;
        check(pts[got.index()].dist(&x) == best, || format!("euclidean nearest of {x:?}"))?;
        let r = rng.gen_range(0.0..10.0);
        let mut near: Vec<usize> = idx.nearby(&x, r).into_iter().map(|n| n.index()).collect();
        near.sort_unstable();
        let want: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].dist(&x) <= r).collect();
        check(near == want, || format!("radius {r} around {x:?}"))?;
        queries += 2;
    }
    // Diffusion on corridor10, 600 nodes.
    let env = fixtures::load("corridor10").unwrap();
    let metric = MetricRegistry::standard().build("diffusion", &env, &MetricParams::default()).map_err(|e| e.to_string())?;
    let mut idx = DualIndex::new(env.width(), env.height(), 1.0, metric.clone());
    let mut pts = Vec::new();
    for _ in 0..600 {
        let p = env.sample_free(&mut rng).map_err(|e| e.to_string())?;
        idx.insert(p).map_err(|e| e.to_string())?;
        pts.push(p);
    }
    for _ in 0..500 {
        let x = env.sample_free(&mut rng).map_err(|e| e.to_string())?;
        let best = pts.iter().map(|p| metric.distance(&x, p)).fold(f64::INFINITY, f64::min);
        let got = idx.nearest_assisting(&x).map_err(|e| e.to_string())?;
        check(metric.distance(&x, &pts[got.index()]) == best, || format!("diffusion nearest of {x:?}"))?;
        queries += 1;
    }
    Ok(format!("{queries} queries"))
}

/// Length of segment `[a, b]` inside `r`.
fn clip_length(r: &Rect, a: &State, b: &State) -> f64 {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for i in 0..2 {
        let d = b.0[i] - a.0[i];
        if d == 0.0 {
            if a.0[i] < r.min.0[i] || a.0[i] > r.max.0[i] {
                return 0.0;
            }
        } else {
            let (mut ta, mut tb) = ((r.min.0[i] - a.0[i]) / d, (r.max.0[i] - a.0[i]) / d);
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
        }
    }
    (t1 - t0).max(0.0) * a.dist(b)
}

fn segments() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6161);
    let mut blocked_total = 0;
    for name in fixtures::names() {
        let env = fixtures::load(name).unwrap();
        let cs = env.cell_size();
        let cells: Vec<Rect> = (0..env.rows())
            .flat_map(|r| (0..env.cols()).map(move |c| (c, r)))
            .filter(|&(c, r)| env.is_cell_blocked(c, r))
            .map(|(c, r)| {
                let top = env.height() - r as f64 * cs;
                Rect { min: State::new(c as f64 * cs, top - cs), max: State::new((c + 1) as f64 * cs, top) }
            })
            .collect();
        for i in 0..1000 {
            let a = State::new(rng.gen_range(0.0..env.width()), rng.gen_range(0.0..env.height()));
            let far = State::new(rng.gen_range(0.0..env.width()), rng.gen_range(0.0..env.height()));
            // Half long chords, half edge-length segments.
            let b = if i % 2 == 0 { far } else { a.step_toward(&far, 5.0) };
            let free = env.obs_free(&a, &b);
            let k = (a.dist(&b) / cs * 32.0).ceil().max(1.0) as usize;
            let samples_free = (0..=k).all(|j| env.in_static_free(&a.lerp(&b, j as f64 / k as f64)));
            if free {
                check(samples_free, || format!("{name}: {a:?} -> {b:?} reported free through a blocked sample"))?;
            } else {
                blocked_total += 1;
                let exact = !env.in_static_free(&a)
                    || !env.in_static_free(&b)
                    || cells.iter().any(|c| clip_length(c, &a, &b) > 1e-9);
                check(exact, || format!("{name}: {a:?} -> {b:?} reported blocked but is free"))?;
            }
        }
    }
    Ok(format!("{} segments, {blocked_total} blocked", 1000 * fixtures::names().count()))
}

fn dijkstra(graph: &WeightedGraph, s: u32) -> Vec<f64> {
    #[derive(PartialEq)]
    struct E(f64, u32);
    impl Eq for E {}
    impl PartialOrd for E {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for E {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            o.0.total_cmp(&self.0)
        }
    }
    let mut d = vec![f64::INFINITY; graph.node_count()];
    d[s as usize] = 0.0;
    let mut h = BinaryHeap::from([E(0.0, s)]);
    while let Some(E(dv, v)) = h.pop() {
        if dv > d[v as usize] {
            continue;
        }
        for (w, l) in graph.neighbors(v) {
            if dv + l < d[w as usize] {
                d[w as usize] = dv + l;
                h.push(E(dv + l, w));
            }
        }
    }
    d
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            r[k] = (i + j) as f64 / 2.0;
        }
        i = j + 1;
    }
    r
}

fn diffusion_fidelity() -> Result<String, String> {
    let env = fixtures::load("corridor10").unwrap();
    let grid = GridGraph::build(&env, 1.0).map_err(|e| e.to_string())?;
    let map = DiffusionMap::build(grid.graph(), &DiffusionParams::new(8, DiffusionTime::default(), 1.0))
        .map_err(|e| e.to_string())?;
    let n = map.node_count() as u32;
    for a in 0..n {
        check(map.node_distance(a, a) == 0.0, || format!("d({a},{a}) ≠ 0"))?;
        for b in 0..n {
            let dab = map.node_distance(a, b);
            check(dab >= 0.0 && dab == map.node_distance(b, a), || format!("symmetry at ({a},{b})"))?;
            for c in 0..n {
                check(dab <= map.node_distance(a, c) + map.node_distance(c, b) + 1e-12, || {
                    format!("triangle inequality at ({a},{b},{c})")
                })?;
            }
        }
    }
    let (mut dd, mut dg) = (Vec::new(), Vec::new());
    for a in 0..n {
        let field = dijkstra(grid.graph(), a);
        for b in (a + 1)..n {
            dd.push(map.node_distance(a, b));
            dg.push(field[b as usize]);
        }
    }
    let (ra, rb) = (ranks(&dd), ranks(&dg));
    let m = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / m, rb.iter().sum::<f64>() / m);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    let rho = cov / (va * vb).sqrt();
    check(rho >= 0.9, || format!("spearman {rho:.4} < 0.9"))?;
    Ok(format!("{n} nodes, spearman {rho:.4}"))
}

fn ellipse() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7171);
    for i in 0..10_000 {
        let root = State::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
        let goal = State::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
        let c_best = root.dist(&goal) * rng.gen_range(1.0..2.0);
        let x = sample_rewire_ellipse(&root, &goal, c_best, &mut rng).map_err(|e| e.to_string())?;
        check(root.dist(&x) + x.dist(&goal) <= c_best + 1e-9 * (1.0 + c_best), || format!("draw {i} outside"))?;
    }
    Ok("10000 draws".into())
}

fn bugtrap() -> Result<String, String> {
    let env = fixtures::load("bugtrap").unwrap();
    let registry = VariantRegistry::standard();
    let (start, goal) = (State::new(5.0, 25.0), State::new(20.0, 25.0));
    let mut worst = 0;
    for name in ["am-rrt-e", "am-rrt-d", "am-rrt-g"] {
        let variant = registry.get(name).map_err(|e| e.to_string())?;
        let metric: Arc<dyn AssistingMetric> = MetricRegistry::standard()
            .build(variant.metric.name(), &env, &MetricParams::default())
            .map_err(|e| e.to_string())?;
        for seed in 0..25 {
            let base = PlannerConfig { seed, ..PlannerConfig::default() };
            let mut p = variant.build(env.clone(), start, &base, metric.clone()).map_err(|e| e.to_string())?;
            p.set_goal(goal).map_err(|e| e.to_string())?;
            while !p.goal_path_exists() && p.search().counters().expansions < 100_000 {
                p.step();
            }
            check(p.goal_path_exists(), || format!("{name} seed {seed} found no path"))?;
            worst = worst.max(p.search().found_at().unwrap_or(0));
        }
    }
    Ok(format!("75/75 runs, slowest after {worst} expansions"))
}

fn strict_decrease() -> Result<String, String> {
    let env = fixtures::load("maze").unwrap();
    let metric = MetricRegistry::standard().build("diffusion", &env, &MetricParams::default()).map_err(|e| e.to_string())?;
    let cfg = PlannerConfig { seed: 23, mode: Mode::AmRrt, assisting_kind: MetricKind::Diffusion, ..PlannerConfig::default() };
    let mut p = Planner::new(env, State::new(6.0, 6.0), cfg, metric).map_err(|e| e.to_string())?;
    p.search_mut().record_audit();
    for g in [State::new(92.0, 92.0), State::new(50.0, 40.0), State::new(92.0, 6.0)] {
        p.set_goal(g).map_err(|e| e.to_string())?;
        let mut steps = 0;
        while !p.arrived() && steps < 4000 {
            p.step();
            steps += 1;
        }
    }
    let log = p.search().audit_log().ok_or("no audit log")?;
    check(!log.rewires.is_empty(), || "no rewires recorded".into())?;
    for (a, b, free) in &log.edges {
        check(*free && a.dist(b) <= p.config().s_max + 1e-9, || format!("edge {a:?} -> {b:?}"))?;
    }
    for (n, old, new) in &log.rewires {
        check(new < old, || format!("rewire of {n:?} from {old} to {new}"))?;
    }
    p.tree().audit()?;
    Ok(format!("{} edges, {} rewires", log.edges.len(), log.rewires.len()))
}

fn determinism(runs: &BTreeMap<&str, Run>) -> Result<String, String> {
    let r = &runs["maze"];
    let bytes = |rows: &[LegRow]| {
        let mut out = Vec::new();
        write_csv(rows, &mut out).expect("in-memory csv");
        out
    };
    let mut reruns = 0;
    for variant in ["am-rrt-d", "rt-rrt"] {
        for seed in 0..2 {
            let spec = VariantSpec::named(variant);
            let again = run_tour(&r.scenario, &r.prepared, &spec, seed, BudgetMode::Deterministic).map_err(|e| e.to_string())?;
            let first: Vec<LegRow> = r.rows.iter().filter(|x| x.variant == variant && x.seed == seed).cloned().collect();
            check(bytes(&again) == bytes(&first), || format!("maze {variant} seed {seed} differs on rerun"))?;
            reruns += 1;
        }
    }
    Ok(format!("{reruns} maze tours byte-identical"))
}

// ---- degeneracy ----

/// Textbook RRT* insertion on an obstacle-free map over a linear scan.
struct ReferenceRrtStar {
    pos: Vec<State>,
    cost: Vec<f64>,
}

impl ReferenceRrtStar {
    fn expand(&mut self, x_rand: State, step: f64, r: f64, k_max: usize) -> Option<(usize, usize)> {
        let mut nrst = 0;
        for i in 1..self.pos.len() {
            if self.pos[i].dist(&x_rand) < self.pos[nrst].dist(&x_rand) {
                nrst = i;
            }
        }
        let from = self.pos[nrst];
        let x_new = if from.dist(&x_rand) <= step { x_rand } else { from.step_toward(&x_rand, step) };
        if x_new == from || self.pos.contains(&x_new) {
            return None;
        }
        let near: Vec<usize> = (0..self.pos.len()).filter(|&i| self.pos[i].dist(&x_new) <= r).collect();
        if near.len() > k_max && from.dist(&x_rand) <= r {
            return None;
        }
        let (mut best, mut c_min) = (nrst, self.cost[nrst] + from.dist(&x_new));
        for &i in &near {
            let c = self.cost[i] + self.pos[i].dist(&x_new);
            if c < c_min {
                best = i;
                c_min = c;
            }
        }
        self.pos.push(x_new);
        self.cost.push(c_min);
        Some((self.pos.len() - 1, best))
    }
}

fn degeneracy(v: &mut Verdicts) {
    let env = Environment::empty(100, 100, 1.0);
    let start = State::new(50.0, 50.0);
    let cfg = PlannerConfig { seed: 31, assisting_kind: MetricKind::Euclidean, ..PlannerConfig::default() };
    let mut p = Planner::new(env.clone(), start, cfg.clone(), Arc::new(Euclidean)).unwrap();
    let mut reference = ReferenceRrtStar { pos: vec![start], cost: vec![0.0] };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut agree, mut inserted) = (0, 0);
    let mut first_mismatch = None;
    for i in 0..1000 {
        let _case: f64 = rng.gen();
        let x_rand = env.sample_free(&mut rng).unwrap();
        let want = reference.expand(x_rand, cfg.step_len(), cfg.s_max, cfg.k_max);
        let same = match (p.expand(), want) {
            (Expansion::Inserted(n), Some((rn, rp))) => {
                inserted += 1;
                n.index() == rn
                    && p.tree().position(n) == reference.pos[rn]
                    && p.tree().parent(n) == Some(NodeId(rp as u32))
                    && p.tree().cost(n) == reference.cost[rn]
            }
            (Expansion::Inserted(_), None) | (_, Some(_)) => false,
            (_, None) => true,
        };
        if same {
            agree += 1;
        } else if first_mismatch.is_none() {
            first_mismatch = Some(i);
        }
    }
    v.record(
        "degeneracy vs reference RRT* (10³ expansions)",
        agree == 1000,
        format!("{agree}/1000 decisions agree, {inserted} insertions, first mismatch {first_mismatch:?}"),
    );
}
