use rayon::prelude::*;
use toml::{Table, Value};
use treeten::analysis::{error_metrics, mi_matrix, ErrorMetrics, SampleSet};
use treeten::fredholm::{solve_with, FredholmRegistry};
use treeten::funcbuild::FunctionSpec;
use treeten::targets::{BenchmarkTarget, TargetFunction, TargetRegistry};
use treeten::topology::{build_tree, TreeRegistry, TreeSpec};
use treeten::treeci::{anchored_guess, default_guess, tci_learn_from, TciOptions};
use treeten::{AnyNetwork, GridPoint, LabeledTree};

use crate::config::RunConfig;
use crate::output::{num, Csv, RunOutput};
use crate::CliError;

const DEFAULT_LEVELS: usize = 16;
const DEFAULT_TOL: f64 = 1e-12;
const DEFAULT_SWEEPS: usize = 10;
const DEFAULT_CHI_LIST: [usize; 3] = [4, 8, 16];
const COMPRESS_SAMPLES: usize = 1000;
const MI_SAMPLES: usize = 10_000;

/// What a command works on: a registered benchmark or an inline function.
enum Source<'a> {
    Named(&'a dyn BenchmarkTarget),
    Function(&'a FunctionSpec),
}

impl Source<'_> {
    fn label(&self) -> String {
        match self {
            Source::Named(t) => t.name().to_string(),
            Source::Function(_) => "function".to_string(),
        }
    }

    fn exact(&self, tree: &LabeledTree) -> Result<AnyNetwork, CliError> {
        match self {
            Source::Named(t) => match t.exact_network(tree) {
                Some(net) => Ok(net?),
                None => Err(CliError::Config(format!(
                    "target {} has no exact construction; use the tci command",
                    t.name()
                ))),
            },
            Source::Function(spec) => Ok(spec.build(tree)?),
        }
    }

    fn evaluable(&self) -> Result<&dyn BenchmarkTarget, CliError> {
        match self {
            Source::Named(t) => Ok(*t),
            Source::Function(_) => Err(CliError::Config(
                "this command needs a named target (--target)".into(),
            )),
        }
    }

    fn metadata(&self) -> Table {
        let mut table = Table::new();
        match self {
            Source::Named(t) => {
                table.insert("name".into(), Value::String(t.name().into()));
                table.insert("description".into(), Value::String(t.description().into()));
                for (k, v) in t.metadata() {
                    table.insert(k, Value::String(v));
                }
            }
            Source::Function(spec) => {
                let text = toml::to_string(spec).expect("function spec serializes");
                table = toml::from_str(&text).expect("function spec reparses");
            }
        }
        table
    }
}

/// A validated configuration plus the output directory it writes to.
pub struct Run {
    pub command: &'static str,
    pub cfg: RunConfig,
    out: RunOutput,
}

impl Run {
    pub fn new(command: &'static str, cfg: RunConfig) -> Result<Self, CliError> {
        cfg.validate()?;
        let hash = cfg.hash(command)?;
        let dir = cfg.out.clone().unwrap_or_else(|| ".".into());
        let out = RunOutput::create(&dir, hash)?;
        Ok(Self { command, cfg, out })
    }

    fn finish(self, extra: Table) -> Result<(), CliError> {
        let config = self.cfg.to_toml();
        self.out.finish(self.command, &config, extra)
    }
}

fn levels(cfg: &RunConfig) -> usize {
    cfg.levels.unwrap_or(DEFAULT_LEVELS)
}

fn source<'a>(cfg: &'a RunConfig, targets: &'a TargetRegistry) -> Result<Source<'a>, CliError> {
    match (&cfg.target, &cfg.function) {
        (Some(name), _) => Ok(Source::Named(targets.get(name)?)),
        (None, Some(spec)) => Ok(Source::Function(spec)),
        (None, None) => Err(CliError::Config("no target or function given".into())),
    }
}

fn resolve_tree(cfg: &RunConfig, source: &Source) -> Result<LabeledTree, CliError> {
    let fixed = match source {
        Source::Named(t) => t.n_vars(),
        Source::Function(_) => None,
    };
    let tree = if let Some(path) = &cfg.tree_spec {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        build_tree(&TreeSpec::parse(&text)?)?
    } else {
        let name = cfg
            .tree
            .as_deref()
            .ok_or_else(|| CliError::Config("no tree given (--tree or --tree-spec)".into()))?;
        let n = match (fixed, cfg.n) {
            (Some(k), Some(n)) if k != n => {
                return Err(CliError::Config(format!(
                    "target {} is defined for n = {k}, got n = {n}",
                    source.label()
                )))
            }
            (Some(k), _) => k,
            (None, n) => n.unwrap_or(1),
        };
        TreeRegistry::builtin().build(name, n, levels(cfg))?
    };
    if let Source::Named(t) = source {
        t.check_tree(&tree)?;
    }
    Ok(tree)
}

fn tree_meta(tree: &LabeledTree) -> Value {
    let mut t = Table::new();
    t.insert("name".into(), Value::String(describe_tree(tree)));
    t.insert("vertices".into(), Value::Integer(tree.len() as i64));
    t.insert("levels".into(), Value::Integer(tree.levels() as i64));
    t.insert("variables".into(), Value::Integer(tree.max_var() as i64));
    Value::Table(t)
}

fn describe_tree(tree: &LabeledTree) -> String {
    let reg = TreeRegistry::builtin();
    let found = reg
        .names()
        .find(|&name| reg.build(name, tree.max_var(), tree.levels()).is_ok_and(|t| &t == tree));
    found.unwrap_or("custom").to_string()
}

fn stats_row(label: &str, tree: &LabeledTree, net: &AnyNetwork) -> Vec<String> {
    let stats = net.stats();
    vec![
        label.to_string(),
        describe_tree(tree),
        tree.levels().to_string(),
        tree.max_var().to_string(),
        format!("{:?}", net.kind()).to_lowercase(),
        stats.max_bond.to_string(),
        stats.memory_bytes.to_string(),
    ]
}

pub fn build(mut run: Run) -> Result<(), CliError> {
    let targets = TargetRegistry::builtin();
    let source = source(&run.cfg, &targets)?;
    let tree = resolve_tree(&run.cfg, &source)?;
    let net = source.exact(&tree)?;
    net.save(run.out.path("network.ttn"))?;
    let mut csv = Csv::new(["target", "tree", "L", "n", "kind", "max_bond", "memory_bytes"]);
    csv.push(stats_row(&source.label(), &tree, &net));
    run.out.write_csv("stats.csv", &csv)?;
    let mut bonds = Csv::new(["u", "v", "bond"]);
    for (a, b, d) in net.stats().per_edge_bonds {
        bonds.push(vec![a.to_string(), b.to_string(), d.to_string()]);
    }
    run.out.write_csv("bonds.csv", &bonds)?;
    let mut extra = Table::new();
    extra.insert("target".into(), Value::Table(source.metadata()));
    extra.insert("tree".into(), tree_meta(&tree));
    run.finish(extra)
}

/// Error of `approx` against a named target (real part) or an exact network.
fn deviation(
    approx: &AnyNetwork,
    source: &Source,
    exact: &AnyNetwork,
    samples: &SampleSet,
) -> Result<ErrorMetrics, CliError> {
    let diffs: Vec<f64> = samples
        .points
        .par_iter()
        .map(|p| -> Result<f64, treeten::Error> {
            let a = approx.evaluate(p)?;
            Ok(match source {
                Source::Named(t) => (a.re - t.value(&p.coords())).abs(),
                Source::Function(_) => (a - exact.evaluate(p)?).norm(),
            })
        })
        .collect::<Result<_, _>>()?;
    let mean = diffs.iter().sum::<f64>() / diffs.len().max(1) as f64;
    let sup = diffs.iter().copied().fold(0.0, f64::max);
    Ok(ErrorMetrics { mean, sup })
}

pub fn compress(mut run: Run) -> Result<(), CliError> {
    let seed = run.cfg.require_seed()?;
    let targets = TargetRegistry::builtin();
    let source = source(&run.cfg, &targets)?;
    let tree = resolve_tree(&run.cfg, &source)?;
    let exact = source.exact(&tree)?;
    let chi_list = run
        .cfg
        .chi_list
        .clone()
        .unwrap_or_else(|| (1..=exact.max_bond()).rev().collect());
    let samples = SampleSet::for_tree(&tree, run.cfg.samples.unwrap_or(COMPRESS_SAMPLES), seed);
    let rows = chi_list
        .par_iter()
        .map(|&chi| -> Result<Vec<String>, CliError> {
            let small = exact.truncate(chi, 0.0)?;
            let err = deviation(&small, &source, &exact, &samples)?;
            eprintln!("progress chi={chi} eps={:e} eps_inf={:e}", err.mean, err.sup);
            Ok(vec![
                chi.to_string(),
                small.max_bond().to_string(),
                num(err.mean),
                num(err.sup),
                small.stats().memory_bytes.to_string(),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Csv::new(["chi", "max_bond", "eps", "eps_inf", "memory_bytes"]);
    for row in rows {
        csv.push(row);
    }
    run.out.write_csv("compress.csv", &csv)?;
    let mut extra = Table::new();
    extra.insert("target".into(), Value::Table(source.metadata()));
    extra.insert("tree".into(), tree_meta(&tree));
    extra.insert("exact_max_bond".into(), Value::Integer(exact.max_bond() as i64));
    run.finish(extra)
}

struct TciRun {
    chi: usize,
    net: treeten::TreeTensorNetwork<f64>,
    sweeps: Vec<treeten::treeci::SweepRecord>,
    err: ErrorMetrics,
    calls: u64,
}

pub fn tci(mut run: Run) -> Result<(), CliError> {
    let seed = run.cfg.require_seed()?;
    let targets = TargetRegistry::builtin();
    let source = source(&run.cfg, &targets)?;
    let target = source.evaluable()?;
    let tree = resolve_tree(&run.cfg, &source)?;
    let f = TargetFunction(target);
    let samples = SampleSet::for_tree(&tree, run.cfg.samples.unwrap_or(COMPRESS_SAMPLES), seed);
    let anchor = target
        .anchor()
        .map(|x| GridPoint::from_coords(&x, tree.levels()))
        .transpose()?;
    let chi_list = run.cfg.chi_list.clone().unwrap_or(DEFAULT_CHI_LIST.to_vec());
    let tol = run.cfg.tol.unwrap_or(DEFAULT_TOL);
    let sweeps = run.cfg.sweeps.unwrap_or(DEFAULT_SWEEPS);

    let runs = chi_list
        .par_iter()
        .map(|&chi| -> Result<TciRun, CliError> {
            let guess = match &anchor {
                Some(p) => anchored_guess(&tree, p)?,
                None => default_guess(&tree, &f),
            };
            let opts = TciOptions {
                chi_max: chi,
                tol,
                sweeps,
            };
            let (net, report) = tci_learn_from(&f, guess, &opts, |r| {
                eprintln!(
                    "progress chi_max={chi} sweep={} eps_inf={:e} max_bond={} calls={}",
                    r.sweep, r.error, r.max_bond, r.calls
                );
            })?;
            let err = error_metrics(&net, &f, &samples)?;
            Ok(TciRun {
                chi,
                net,
                sweeps: report.sweeps,
                err,
                calls: report.calls,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

        let mut per_sweep = Csv::new(["chi_max", "sweep", "eps_inf", "max_bond", "calls"]);
    let mut summary = Csv::new(["chi_max", "max_bond", "memory_bytes", "eps", "eps_inf", "calls"]);
    for r in &runs {
        for s in &r.sweeps {
            per_sweep.push(vec![
                r.chi.to_string(),
                s.sweep.to_string(),
                num(s.error),
                s.max_bond.to_string(),
                s.calls.to_string(),
            ]);
        }
        summary.push(vec![
            r.chi.to_string(),
            r.net.max_bond().to_string(),
            r.net.stats().memory_bytes.to_string(),
            num(r.err.mean),
            num(r.err.sup),
            r.calls.to_string(),
        ]);
        AnyNetwork::Real(r.net.clone()).save(run.out.path(&format!("tci_chi{}.ttn", r.chi)))?;
    }
    run.out.write_csv("tci.csv", &per_sweep)?;
    run.out.write_csv("tci_summary.csv", &summary)?;
    let mut extra = Table::new();
    extra.insert("target".into(), Value::Table(source.metadata()));
    extra.insert("tree".into(), tree_meta(&tree));
    run.finish(extra)
}

pub fn fredholm(mut run: Run) -> Result<(), CliError> {
    let seed = run.cfg.require_seed()?;
    let registry = FredholmRegistry::builtin();
    let name = run
        .cfg
        .target
        .as_deref()
        .ok_or_else(|| CliError::Config("fredholm needs --target fredholm-ex1 or fredholm-ex2".into()))?;
    let instance = registry.get(name)?;
    let levels = run.cfg.levels.unwrap_or(10);
    let mut setup = instance.setup(levels)?;
    if let Some(iters) = run.cfg.iters {
        setup.problem.iterations = iters;
    }
    if let Some(tol) = run.cfg.tol {
        setup.problem.tol = tol;
    }
    if let Some(samples) = run.cfg.samples {
        setup.problem.samples = samples;
    }
    setup.problem.seed = seed;
    let (solution, trace) = solve_with(&setup.problem, &setup.initial, Some(setup.exact.as_ref()), |r| {
        eprintln!(
            "progress iteration={} eps={} change={:e} max_bond={}",
            r.iteration,
            r.error.map(num).unwrap_or_default(),
            r.change,
            r.max_bond
        );
    })?;

        let mut csv = Csv::new(["iteration", "eps", "change", "max_bond", "bound", "bound_holds"]);
    for r in &trace.records {
        csv.push(vec![
            r.iteration.to_string(),
            r.error.map(num).unwrap_or_default(),
            num(r.change),
            r.max_bond.to_string(),
            r.bound.to_string(),
            r.bound_holds.to_string(),
        ]);
    }
    run.out.write_csv("trace.csv", &csv)?;
    AnyNetwork::Real(solution).save(run.out.path("solution.ttn"))?;
    let mut extra = Table::new();
    let mut inst = Table::new();
    inst.insert("name".into(), Value::String(instance.name().into()));
    inst.insert("description".into(), Value::String(instance.description().into()));
    inst.insert("converged".into(), Value::Boolean(trace.converged));
    inst.insert("diverged".into(), Value::Boolean(trace.diverged));
    inst.insert("kernel_max_bond".into(), Value::Integer(setup.problem.kernel.max_bond() as i64));
    inst.insert("g_max_bond".into(), Value::Integer(setup.problem.g.max_bond() as i64));
    extra.insert("instance".into(), Value::Table(inst));
    let failed = trace.diverged && !trace.converged;
    run.finish(extra)?;
    if failed {
        return Err(CliError::Numerical("fixed-point iteration diverged".into()));
    }
    Ok(())
}

pub fn mi(mut run: Run) -> Result<(), CliError> {
    let seed = run.cfg.require_seed()?;
    let targets = TargetRegistry::builtin();
    let source = source(&run.cfg, &targets)?;
    let target = source.evaluable()?;
    let tree = resolve_tree(&run.cfg, &source)?;
    let f = TargetFunction(target);
    let matrix = mi_matrix(&f, &tree, run.cfg.samples.unwrap_or(MI_SAMPLES), seed)?;
    let labels: Vec<String> = matrix.labels.iter().map(|d| d.to_string()).collect();
    let mut csv = Csv::new(std::iter::once("digit".to_string()).chain(labels.iter().cloned()));
    for (i, label) in labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend((0..labels.len()).map(|j| num(matrix.values[(i, j)])));
        csv.push(row);
    }
    run.out.write_csv("mi.csv", &csv)?;
    let mut extra = Table::new();
    extra.insert("target".into(), Value::Table(source.metadata()));
    extra.insert("tree".into(), tree_meta(&tree));
    run.finish(extra)
}
