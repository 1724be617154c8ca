//! Runs every (algorithm, seed) cell, writes traces and plots, certifies bounds.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use freegrad_core::analysis::{
    bound_cor_eps, bound_cor_main, bound_cor_sqrt, bound_stochastic, bound_warmup, check_phase_growth, k_bar,
    k_star, regret_curve, any_h_regret_bound,
};
use freegrad_core::baselines::{adagrad_max_distance, adagrad_regret_bound_with_radius, oracle_regret_bound};
use freegrad_core::problems::{AbsLinear, GENERATOR_NAME, DATA_STREAM, INIT_STREAM, NOISE_STREAM};
use freegrad_core::stochastic_pgd::{run_stochastic, ExactOracle, RowSamplingOracle};
use freegrad_core::{
    baselines, free_adagrad, NoisySign, Problem, ProblemSpec, Run, StepScale, StochasticConfig, StochasticOracle,
    ThresholdRule,
};
use rayon::prelude::*;

use crate::config::{Algorithm, ExperimentConfig, ProblemKind};
use crate::csv;
use crate::error::{io_err, CliError};
use crate::svg::{self, Plot, Series};

/// Centers of the default `expsum` instance.
pub const EXPSUM_CENTERS: usize = 5;
/// `noisysign` starting points are uniform on `[−spread, spread]^d`.
pub const NOISYSIGN_SPREAD: f64 = 1.0;

/// One problem instance, shared by every algorithm run on the same seed.
pub struct Instance {
    pub problem: Problem,
    pub oracle: Option<Box<dyn StochasticOracle>>,
    /// `‖g‖ ≤ L` for exact subgradients.
    pub lipschitz: Option<f64>,
}

impl Instance {
    pub fn build(cfg: &ExperimentConfig, seed: u64) -> Result<Self, CliError> {
        let (dim, n) = (cfg.dim, cfg.n);
        let inst = match cfg.problem {
            ProblemKind::Norm1 | ProblemKind::Norm2 => {
                let p = if cfg.problem == ProblemKind::Norm1 { 1 } else { 2 };
                let spec = ProblemSpec::norm(p, dim, seed);
                let problem = spec.build()?;
                let l = spec.lipschitz_bound();
                let oracle = ExactOracle::new(problem.shared_objective(), l.expect("norms are Lipschitz"));
                Instance { problem, oracle: Some(Box::new(oracle)), lipschitz: l }
            }
            ProblemKind::AbsLinear => {
                let spec = ProblemSpec::abs_linear(n, dim, seed, seed);
                let data = Arc::new(AbsLinear::gaussian(n, dim, seed)?);
                Instance {
                    lipschitz: spec.lipschitz_bound(),
                    problem: spec.build()?,
                    oracle: Some(Box::new(RowSamplingOracle::new(data))),
                }
            }
            ProblemKind::ExpSum => Instance {
                problem: ProblemSpec::expsum_default(dim, EXPSUM_CENTERS, seed).build()?,
                oracle: None,
                lipschitz: None,
            },
            ProblemKind::NoisySign => {
                let ns = NoisySign::random(dim, cfg.sigma, seed)?;
                Instance {
                    problem: ns.problem(NOISYSIGN_SPREAD, seed)?,
                    lipschitz: Some(ns.lipschitz()),
                    oracle: Some(Box::new(ns)),
                }
            }
        };
        Ok(inst)
    }

    fn lipschitz_for(&self, cfg: &ExperimentConfig, algo: Algorithm) -> Option<f64> {
        cfg.lipschitz.or(match algo {
            Algorithm::Stochastic => self.oracle.as_ref().map(|o| o.lipschitz()),
            _ => self.lipschitz,
        })
    }
}

fn missing(what: &str, algo: Algorithm) -> CliError {
    CliError::Usage(format!("{algo} needs {what}, which this problem does not provide"))
}

/// Runs one algorithm on one instance.
pub fn run_algorithm(cfg: &ExperimentConfig, inst: &Instance, algo: Algorithm, seed: u64) -> Result<Run, CliError> {
    let p = &inst.problem;
    let (g0, t) = (cfg.gamma0, cfg.horizon);
    let l = inst.lipschitz_for(cfg, algo);
    let dist = p.initial_distance();
    let run = match algo {
        Algorithm::FreeAdagradMain => free_adagrad::run(p, StepScale::MainH, ThresholdRule::FullB, g0, t)?,
        Algorithm::FreeAdagradSqrt => free_adagrad::run(p, StepScale::SqrtS, ThresholdRule::FullB, g0, t)?,
        Algorithm::FreeAdagradEps => {
            free_adagrad::run(p, StepScale::SqrtEpsS { epsilon: cfg.epsilon }, ThresholdRule::FullB, g0, t)?
        }
        Algorithm::WarmupSimple | Algorithm::WarmupImproved => {
            let lipschitz = l.ok_or_else(|| missing("L", algo))?;
            let scale = StepScale::ConstLT { lipschitz, horizon: t };
            let rule = if algo == Algorithm::WarmupSimple {
                ThresholdRule::SimpleB
            } else {
                ThresholdRule::ImprovedWarmupB { horizon: t }
            };
            free_adagrad::run(p, scale, rule, g0, t)?
        }
        Algorithm::AdagradOracleD => {
            baselines::run_adagrad(p, positive_distance(dist, algo)?, t)?
        }
        Algorithm::OracleFixed => {
            let lipschitz = l.ok_or_else(|| missing("L", algo))?;
            baselines::run_oracle(p, positive_distance(dist, algo)?, lipschitz, t)?
        }
        Algorithm::Stochastic => {
            let oracle = inst.oracle.as_deref().ok_or_else(|| missing("a sampling oracle", algo))?;
            let lipschitz = l.ok_or_else(|| missing("L", algo))?;
            let config = StochasticConfig { gamma0: g0, lipschitz, horizon: t, delta: cfg.delta };
            run_stochastic(p, oracle, &config, seed)?
        }
    };
    Ok(run)
}

fn positive_distance(dist: Option<f64>, algo: Algorithm) -> Result<f64, CliError> {
    match dist {
        Some(d) if d > 0.0 => Ok(d),
        Some(_) => Err(CliError::Usage(format!("{algo} needs |x1 - x*| > 0, but x1 is optimal"))),
        None => Err(missing("|x1 - x*|", algo)),
    }
}

/// One certified inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub algorithm: Option<Algorithm>,
    pub seed: Option<u64>,
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Informational checks are reported but do not set exit code 3.
    pub gating: bool,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.lhs <= self.rhs
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match (self.pass(), self.gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "MISS",
        };
        write!(f, "{status} ")?;
        if let Some(a) = self.algorithm {
            write!(f, "{a} ")?;
        }
        if let Some(s) = self.seed {
            write!(f, "seed={s} ")?;
        }
        write!(f, "{}: {:.6e} <= {:.6e}", self.name, self.lhs, self.rhs)
    }
}

pub struct Cell {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub run: Run,
    pub csv_path: PathBuf,
    /// `R_1, …, R_T` against the reference value of this seed.
    pub regret: Vec<f64>,
}

impl Cell {
    pub fn final_regret(&self) -> f64 {
        *self.regret.last().expect("runs are nonempty")
    }
}

pub struct Outcome {
    pub cells: Vec<Cell>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
    pub wall_time: Duration,
}

impl Outcome {
    pub fn violations(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.gating && !c.pass())
    }

    /// 3 if any certified bound failed, otherwise 0.
    pub fn exit_code(&self) -> i32 {
        if self.violations().next().is_some() {
            3
        } else {
            0
        }
    }

    pub fn cell(&self, algorithm: Algorithm, seed: u64) -> Option<&Cell> {
        self.cells.iter().find(|c| c.algorithm == algorithm && c.seed == seed)
    }
}

pub fn csv_name(algo: Algorithm, seed: u64) -> String {
    format!("{}_seed{seed}.csv", algo.name())
}

/// Runs the experiment and writes every output file into `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let out = &cfg.output_dir;
    std::fs::create_dir_all(out).map_err(|e| io_err("cannot create", out, e))?;

    let instances: Vec<Instance> =
        cfg.seeds.par_iter().map(|&s| Instance::build(cfg, s)).collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, Algorithm)> =
        (0..cfg.seeds.len()).flat_map(|i| cfg.algorithms.iter().map(move |&a| (i, a))).collect();
    let runs: Vec<(usize, Algorithm, Run, PathBuf)> = jobs
        .par_iter()
        .map(|&(i, algo)| {
            let seed = cfg.seeds[i];
            let run = run_algorithm(cfg, &instances[i], algo, seed)?;
            let path = out.join(csv_name(algo, seed));
            csv::write_trace(&path, &run.records)?;
            Ok((i, algo, run, path))
        })
        .collect::<Result<_, CliError>>()?;

    // Regret is measured against f* when known, otherwise against the best
    // value seen by any algorithm on the same instance.
    let mut notes = Vec::new();
    let mut f_ref = vec![f64::INFINITY; cfg.seeds.len()];
    for (i, inst) in instances.iter().enumerate() {
        match inst.problem.known_f_star() {
            Some(f) => f_ref[i] = f,
            None => {
                for (j, _, run, _) in &runs {
                    if *j == i {
                        f_ref[i] = run.records.iter().map(|r| r.f_xt).fold(f_ref[i], f64::min);
                    }
                }
            }
        }
    }
    if instances.iter().any(|i| i.problem.known_f_star().is_none()) {
        notes.push(
            "x* is unknown for this problem: regret is measured against the best value observed on each \
             instance and no bound is certified"
                .into(),
        );
    }

    let mut cells = Vec::with_capacity(runs.len());
    for (i, algo, run, csv_path) in runs {
        let regret = regret_curve(&run.records, f_ref[i])?;
        cells.push(Cell { algorithm: algo, seed: cfg.seeds[i], run, csv_path, regret });
    }

    let mut checks = Vec::new();
    for cell in &cells {
        let i = cfg.seeds.iter().position(|&s| s == cell.seed).expect("seed of a cell");
        checks.extend(certify(cfg, &instances[i], cell)?);
    }
    checks.extend(aggregate_stochastic(cfg, &checks));

    let warnings = write_plots(cfg, &cells)?;
    let outcome = Outcome { cells, checks, notes, warnings, wall_time: start.elapsed() };
    write_report(cfg, &outcome)?;
    write_manifest(cfg, &outcome)?;
    Ok(outcome)
}

/// Bound checks applicable to one finished cell.
fn certify(cfg: &ExperimentConfig, inst: &Instance, cell: &Cell) -> Result<Vec<Check>, CliError> {
    let algo = cell.algorithm;
    let run = &cell.run;
    let mut out = Vec::new();
    let mut push = |name: &str, lhs: f64, rhs: f64, gating: bool| {
        out.push(Check { algorithm: Some(algo), seed: Some(cell.seed), name: name.into(), lhs, rhs, gating });
    };

    let is_free = !matches!(algo, Algorithm::AdagradOracleD | Algorithm::OracleFixed);
    if is_free {
        let monotone = run.records.windows(2).all(|w| w[1].k_t >= w[0].k_t);
        push("k_t nondecreasing", if monotone { 0.0 } else { 1.0 }, 0.0, true);
        let worst = run.records.iter().map(|r| r.dist_to_x1 - r.b_value).fold(f64::NEG_INFINITY, f64::max);
        push("max_t |x_t+1 - x1| - B", worst, 0.0, true);
    }

    let Some(d) = inst.problem.initial_distance() else {
        return Ok(out);
    };
    let scale = cfg.bound_scale;
    let (g0, t) = (cfg.gamma0, cfg.horizon);
    let r = cell.final_regret();
    let (s_t, s_t1) = (run.s_final(), run.s_next);
    let k_t = run.final_phase();
    let ks = k_star(g0, d)?;
    let l = inst.lipschitz_for(cfg, algo);

    match algo {
        Algorithm::FreeAdagradMain => {
            push("regret <= cor_main", r, scale * bound_cor_main(d, g0, s_t, s_t1)?, true);
            push("regret <= any_h", r, scale * any_h_regret_bound(d, run, &StepScale::MainH)?, true);
            push("k_T <= k_bar", f64::from(k_t), f64::from(k_bar(ks)?), true);
            let growth_ok = check_phase_growth(d, g0, k_t).is_ok();
            push("phase growth", if growth_ok { 0.0 } else { 1.0 }, 0.0, true);
        }
        Algorithm::FreeAdagradSqrt => {
            let g1 = run.records[0].grad_norm_sq;
            if g1 > 0.0 {
                push("regret <= cor_sqrt", r, scale * bound_cor_sqrt(d, g0, s_t, s_t1, g1)?, true);
            }
            if s_t1 > 0.0 {
                push("regret <= any_h", r, scale * any_h_regret_bound(d, run, &StepScale::SqrtS)?, true);
            }
        }
        Algorithm::FreeAdagradEps => {
            let eps = cfg.epsilon;
            push("regret <= cor_eps", r, scale * bound_cor_eps(d, g0, s_t, s_t1, eps)?, true);
            let sc = StepScale::SqrtEpsS { epsilon: eps };
            push("regret <= any_h", r, scale * any_h_regret_bound(d, run, &sc)?, true);
        }
        Algorithm::WarmupSimple => {
            if let Some(l) = l {
                push("regret <= warmup_simple", r, scale * bound_warmup(d, g0, l, t, true, d)?, true);
            }
            push("k_T <= k_star", f64::from(k_t), f64::from(ks), true);
        }
        Algorithm::WarmupImproved => {
            if let Some(l) = l {
                push("regret <= warmup_improved", r, scale * bound_warmup(d, g0, l, t, false, d)?, true);
            }
        }
        Algorithm::AdagradOracleD => {
            let x_star = inst.problem.known_minimizer().expect("distance implies a minimizer");
            let radius = adagrad_max_distance(&inst.problem, d, t, x_star)?;
            push("regret <= adagrad", r, scale * adagrad_regret_bound_with_radius(d, radius, s_t), true);
            let mono = run.records.windows(2).all(|w| w[1].eta_t <= w[0].eta_t);
            push("eta nonincreasing", if mono { 0.0 } else { 1.0 }, 0.0, true);
        }
        Algorithm::OracleFixed => {
            if let Some(l) = l {
                push("regret <= D*L*sqrt(T)", r, scale * oracle_regret_bound(d, l, t), true);
            }
            let eta0 = run.records[0].eta_t;
            let flat = run.records.iter().all(|x| x.eta_t == eta0);
            push("eta constant", if flat { 0.0 } else { 1.0 }, 0.0, true);
        }
        Algorithm::Stochastic => {
            if let Some(l) = l {
                // Holds with probability 1 − δ; gated through the aggregate below.
                push("regret <= stochastic", r, scale * bound_stochastic(d, g0, l, t, cfg.delta)?, false);
            }
            push("k_T <= k_star", f64::from(k_t), f64::from(ks), true);
        }
    }
    Ok(out)
}

/// At least `⌈(1−δ)N⌉` of the `N` stochastic runs must satisfy their bound.
fn aggregate_stochastic(cfg: &ExperimentConfig, checks: &[Check]) -> Option<Check> {
    let per_seed: Vec<&Check> = checks.iter().filter(|c| c.name == "regret <= stochastic").collect();
    if per_seed.is_empty() {
        return None;
    }
    let n = per_seed.len();
    let passed = per_seed.iter().filter(|c| c.pass()).count();
    let needed = ((1.0 - cfg.delta) * n as f64).ceil();
    Some(Check {
        algorithm: Some(Algorithm::Stochastic),
        seed: None,
        name: format!("required runs <= runs within bound (of {n})"),
        lhs: needed,
        rhs: passed as f64,
        gating: true,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_err("cannot write", path, e))
}

/// Regret and step-size plots from the first seed.
fn write_plots(cfg: &ExperimentConfig, cells: &[Cell]) -> Result<Vec<String>, CliError> {
    let seed = cfg.seeds[0];
    let first: Vec<&Cell> = cfg
        .algorithms
        .iter()
        .filter_map(|&a| cells.iter().find(|c| c.algorithm == a && c.seed == seed))
        .collect();
    let series = |f: &dyn Fn(&Cell) -> Vec<(f64, f64)>| -> Vec<Series> {
        first.iter().map(|c| Series { name: c.algorithm.name().into(), points: f(c) }).collect()
    };
    let regret = Plot {
        title: format!("Regret, {} (seed {seed})", cfg.problem),
        x_label: "iteration t".into(),
        y_label: "cumulative regret".into(),
        series: series(&|c| c.regret.iter().enumerate().map(|(i, r)| ((i + 1) as f64, *r)).collect()),
    };
    let steps = Plot {
        title: format!("Step size, {} (seed {seed})", cfg.problem),
        x_label: "iteration t".into(),
        y_label: "step size eta_t".into(),
        series: series(&|c| c.run.records.iter().map(|r| (r.t as f64, r.eta_t)).collect()),
    };
    let mut warnings = Vec::new();
    for (plot, name) in [(regret, "regret.svg"), (steps, "stepsize.svg")] {
        let (text, w) = svg::render(&plot);
        warnings.extend(w);
        write_file(&cfg.output_dir.join(name), &text)?;
    }
    Ok(warnings)
}

fn write_report(cfg: &ExperimentConfig, o: &Outcome) -> Result<(), CliError> {
    let mut s = String::new();
    s += &format!("# bound certification: {} d={} T={} gamma0={}\n", cfg.problem, cfg.dim, cfg.horizon, cfg.gamma0);
    for n in &o.notes {
        s += &format!("# note: {n}\n");
    }
    for c in &o.checks {
        s += &format!("{c}\n");
    }
    let mut finals: BTreeMap<Algorithm, Vec<f64>> = BTreeMap::new();
    for c in &o.cells {
        finals.entry(c.algorithm).or_default().push(c.final_regret());
    }
    s += "# mean final regret\n";
    for (a, v) in finals {
        s += &format!("{a}: {:.6e}\n", v.iter().sum::<f64>() / v.len() as f64);
    }
    let failed = o.violations().count();
    s += &format!("# {} checks, {failed} failed\n", o.checks.len());
    write_file(&cfg.output_dir.join("report.txt"), &s)
}

fn write_manifest(cfg: &ExperimentConfig, o: &Outcome) -> Result<(), CliError> {
    let seeds: Vec<_> = cfg.seeds.iter().map(u64::to_string).collect();
    let mut s = String::new();
    s += &format!("generator={GENERATOR_NAME}\n");
    s += &format!("streams=init:{INIT_STREAM},data:{DATA_STREAM},noise:{NOISE_STREAM}\n");
    s += &format!("seeds={}\n", seeds.join(","));
    s += &format!("wall_time_s={:.3}\n", o.wall_time.as_secs_f64());
    s += "\n[config]\n";
    s += &cfg.echo();
    s += "\n[traces]\n";
    for c in &o.cells {
        let file = c.csv_path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        s += &format!("{file} algorithm={} seed={} rows={}\n", c.algorithm, c.seed, c.run.records.len());
    }
    s += "\n[plots]\nregret.svg\nstepsize.svg\n";
    write_file(&cfg.output_dir.join("manifest.txt"), &s)
}
