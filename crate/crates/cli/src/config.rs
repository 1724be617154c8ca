//! Experiment configuration from flags and `key=value` files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemKind {
    Norm1,
    Norm2,
    AbsLinear,
    ExpSum,
    NoisySign,
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Norm1 => "norm1",
            ProblemKind::Norm2 => "norm2",
            ProblemKind::AbsLinear => "abslinear",
            ProblemKind::ExpSum => "expsum",
            ProblemKind::NoisySign => "noisysign",
        }
    }
}

impl FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "norm1" => ProblemKind::Norm1,
            "norm2" => ProblemKind::Norm2,
            "abslinear" => ProblemKind::AbsLinear,
            "expsum" => ProblemKind::ExpSum,
            "noisysign" => ProblemKind::NoisySign,
            _ => return Err(format!("unknown problem `{s}` (norm1|norm2|abslinear|expsum|noisysign)")),
        })
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    FreeAdagradMain,
    FreeAdagradSqrt,
    FreeAdagradEps,
    WarmupSimple,
    WarmupImproved,
    AdagradOracleD,
    OracleFixed,
    Stochastic,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::FreeAdagradMain,
        Algorithm::FreeAdagradSqrt,
        Algorithm::FreeAdagradEps,
        Algorithm::WarmupSimple,
        Algorithm::WarmupImproved,
        Algorithm::AdagradOracleD,
        Algorithm::OracleFixed,
        Algorithm::Stochastic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::FreeAdagradMain => "free_adagrad_main",
            Algorithm::FreeAdagradSqrt => "free_adagrad_sqrt",
            Algorithm::FreeAdagradEps => "free_adagrad_eps",
            Algorithm::WarmupSimple => "warmup_simple",
            Algorithm::WarmupImproved => "warmup_improved",
            Algorithm::AdagradOracleD => "adagrad_oracle_D",
            Algorithm::OracleFixed => "oracle_fixed",
            Algorithm::Stochastic => "stochastic",
        }
    }

    /// Needs `L` (given or derivable from the problem).
    pub fn needs_lipschitz(&self) -> bool {
        matches!(self, Algorithm::WarmupSimple | Algorithm::WarmupImproved | Algorithm::OracleFixed | Algorithm::Stochastic)
    }

    /// Needs `‖x1 − x*‖`.
    pub fn needs_distance(&self) -> bool {
        matches!(self, Algorithm::AdagradOracleD | Algorithm::OracleFixed)
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
            format!("unknown algorithm `{s}` (one of {})", names.join(", "))
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub dim: usize,
    /// Rows of the `abslinear` data matrix.
    pub n: usize,
    pub horizon: usize,
    pub gamma0: f64,
    /// `ε` of `free_adagrad_eps`.
    pub epsilon: f64,
    pub algorithms: Vec<Algorithm>,
    /// Each seed drives its own instance (data, `x1`) and noise stream.
    pub seeds: Vec<u64>,
    pub delta: f64,
    /// Overrides the problem's own Lipschitz bound.
    pub lipschitz: Option<f64>,
    /// Noise half-width of `noisysign`.
    pub sigma: f64,
    pub output_dir: PathBuf,
    /// Multiplies every certified bound. Always 1 from the command line; tests
    /// lower it to check that violations are reported.
    pub bound_scale: f64,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemKind, algorithms: Vec<Algorithm>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            problem,
            dim: 625,
            n: 1000,
            horizon: 10_000,
            gamma0: 1.0,
            epsilon: 1.0,
            algorithms,
            seeds: vec![0],
            delta: 0.1,
            lipschitz: None,
            sigma: 1.0,
            output_dir: output_dir.into(),
            bound_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.dim == 0 {
            return usage("--dim must be >= 1".into());
        }
        if self.n == 0 {
            return usage("--n must be >= 1".into());
        }
        if self.horizon == 0 {
            return usage("--T must be >= 1".into());
        }
        if !(self.gamma0.is_finite() && self.gamma0 > 0.0) {
            return usage(format!("--gamma0 must be positive, got {}", self.gamma0));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return usage(format!("--eps must be positive, got {}", self.epsilon));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return usage(format!("--delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return usage(format!("sigma must be positive, got {}", self.sigma));
        }
        if let Some(l) = self.lipschitz {
            if !(l.is_finite() && l > 0.0) {
                return usage(format!("--L must be positive, got {l}"));
            }
        }
        if self.algorithms.is_empty() {
            return usage("--algos must name at least one algorithm".into());
        }
        if self.seeds.is_empty() {
            return usage("--seeds must list at least one seed".into());
        }
        if self.problem == ProblemKind::ExpSum {
            if let Some(a) = self.algorithms.iter().find(|a| a.needs_distance()) {
                return usage(format!("{a} needs |x1 - x*|, which is unknown for expsum"));
            }
            if self.algorithms.contains(&Algorithm::Stochastic) {
                return usage("stochastic has no sampling oracle for expsum".into());
            }
            if self.lipschitz.is_none() {
                if let Some(a) = self.algorithms.iter().find(|a| a.needs_lipschitz()) {
                    return usage(format!("{a} needs --L, expsum is not Lipschitz"));
                }
            }
        }
        if !(self.bound_scale.is_finite() && self.bound_scale > 0.0) {
            return usage("bound scale must be positive".into());
        }
        Ok(())
    }

    /// One `key=value` line per field, in the config-file syntax.
    pub fn echo(&self) -> String {
        let algos: Vec<_> = self.algorithms.iter().map(|a| a.name()).collect();
        let seeds: Vec<_> = self.seeds.iter().map(u64::to_string).collect();
        let mut s = String::new();
        s += &format!("problem={}\n", self.problem);
        s += &format!("dim={}\n", self.dim);
        s += &format!("n={}\n", self.n);
        s += &format!("T={}\n", self.horizon);
        s += &format!("gamma0={}\n", self.gamma0);
        s += &format!("eps={}\n", self.epsilon);
        s += &format!("algos={}\n", algos.join(","));
        s += &format!("seeds={}\n", seeds.join(","));
        s += &format!("delta={}\n", self.delta);
        if let Some(l) = self.lipschitz {
            s += &format!("L={l}\n");
        }
        s += &format!("sigma={}\n", self.sigma);
        s += &format!("out={}\n", self.output_dir.display());
        s
    }
}

const AFTER_HELP: &str = "\
Config files hold one key=value per line; `#` starts a comment. Keys are the
long flag names without dashes (problem, dim, n, T, gamma0, eps, algos, seeds,
delta, L, sigma, out). Flags given on the command line override file values.

Exit codes: 0 ok, 1 I/O or run failure, 2 usage error, 3 bound violation.";

/// Runs every optimizer on a test problem, writes CSV traces, log-log SVG plots
/// and a bound-certification report.
#[derive(Debug, Clone, Default, Parser)]
#[command(name = "freegrad", version, after_help = AFTER_HELP)]
pub struct Cli {
    /// norm1 | norm2 | abslinear | expsum | noisysign
    #[arg(long)]
    pub problem: Option<ProblemKind>,
    /// Dimension d [default: 625]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number of rows for abslinear [default: 1000]
    #[arg(long)]
    pub n: Option<usize>,
    /// Horizon [default: 10000]
    #[arg(long = "T")]
    pub horizon: Option<usize>,
    /// Initial guess of the distance to the optimum [default: 1]
    #[arg(long)]
    pub gamma0: Option<f64>,
    /// ε of free_adagrad_eps [default: 1]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Comma-separated algorithm names [default: free_adagrad_main,adagrad_oracle_D,oracle_fixed]
    #[arg(long)]
    pub algos: Option<String>,
    /// Comma-separated seeds, or a half-open range `a..b` [default: 0]
    #[arg(long)]
    pub seeds: Option<String>,
    /// Confidence level of the stochastic variant [default: 0.1]
    #[arg(long)]
    pub delta: Option<f64>,
    /// Lipschitz constant; defaults to the problem's own bound
    #[arg(long = "L")]
    pub lipschitz: Option<f64>,
    /// Noise half-width of noisysign [default: 1]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Output directory [default: out]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value config file; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    raw.trim()
        .parse()
        .map_err(|e| CliError::Usage(format!("bad value `{raw}` for {key}: {e}")))
}

/// Parses `a,b,c` or `a..b`.
pub fn parse_seeds(raw: &str) -> Result<Vec<u64>, CliError> {
    if let Some((a, b)) = raw.split_once("..") {
        let a: u64 = parse_value("seeds", a)?;
        let b: u64 = parse_value("seeds", b)?;
        return Ok((a..b).collect());
    }
    raw.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_value("seeds", s)).collect()
}

pub fn parse_algorithms(raw: &str) -> Result<Vec<Algorithm>, CliError> {
    let mut out: Vec<Algorithm> = Vec::new();
    for name in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let a = parse_value("algos", name)?;
        if !out.contains(&a) {
            out.push(a);
        }
    }
    Ok(out)
}

impl Cli {
    /// Reads a config file into the same shape as the flags.
    pub fn from_file(path: &Path) -> Result<Cli, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Cli::from_config_text(&text)
    }

    pub fn from_config_text(text: &str) -> Result<Cli, CliError> {
        let mut c = Cli::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!("config line {}: expected key=value", i + 1)));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "problem" => c.problem = Some(parse_value(key, value)?),
                "dim" => c.dim = Some(parse_value(key, value)?),
                "n" => c.n = Some(parse_value(key, value)?),
                "T" => c.horizon = Some(parse_value(key, value)?),
                "gamma0" => c.gamma0 = Some(parse_value(key, value)?),
                "eps" => c.eps = Some(parse_value(key, value)?),
                "algos" => c.algos = Some(value.to_string()),
                "seeds" => c.seeds = Some(value.to_string()),
                "delta" => c.delta = Some(parse_value(key, value)?),
                "L" => c.lipschitz = Some(parse_value(key, value)?),
                "sigma" => c.sigma = Some(parse_value(key, value)?),
                "out" => c.out = Some(PathBuf::from(value)),
                _ => return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", i + 1))),
            }
        }
        Ok(c)
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: Cli) -> Cli {
        Cli {
            problem: self.problem.or(base.problem),
            dim: self.dim.or(base.dim),
            n: self.n.or(base.n),
            horizon: self.horizon.or(base.horizon),
            gamma0: self.gamma0.or(base.gamma0),
            eps: self.eps.or(base.eps),
            algos: self.algos.or(base.algos),
            seeds: self.seeds.or(base.seeds),
            delta: self.delta.or(base.delta),
            lipschitz: self.lipschitz.or(base.lipschitz),
            sigma: self.sigma.or(base.sigma),
            out: self.out.or(base.out),
            config: self.config,
        }
    }

    /// Merges the config file (if any) under the flags and validates.
    pub fn resolve(self) -> Result<ExperimentConfig, CliError> {
        let merged = match &self.config {
            Some(path) => {
                let file = Cli::from_file(path)?;
                self.over(file)
            }
            None => self,
        };
        let problem = merged.problem.ok_or_else(|| CliError::Usage("missing --problem".into()))?;
        let algorithms = match &merged.algos {
            Some(raw) => parse_algorithms(raw)?,
            None => vec![Algorithm::FreeAdagradMain, Algorithm::AdagradOracleD, Algorithm::OracleFixed],
        };
        let mut cfg = ExperimentConfig::new(problem, algorithms, merged.out.unwrap_or_else(|| "out".into()));
        if let Some(v) = merged.dim {
            cfg.dim = v;
        }
        if let Some(v) = merged.n {
            cfg.n = v;
        }
        if let Some(v) = merged.horizon {
            cfg.horizon = v;
        }
        if let Some(v) = merged.gamma0 {
            cfg.gamma0 = v;
        }
        if let Some(v) = merged.eps {
            cfg.epsilon = v;
        }
        if let Some(raw) = &merged.seeds {
            cfg.seeds = parse_seeds(raw)?;
        }
        if let Some(v) = merged.delta {
            cfg.delta = v;
        }
        if let Some(v) = merged.sigma {
            cfg.sigma = v;
        }
        cfg.lipschitz = merged.lipschitz;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `argv` (including the program name) into a validated config.
pub fn parse_config<I, T>(argv: I) -> Result<ExperimentConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Clap)?;
    cli.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &str) -> Result<ExperimentConfig, CliError> {
        parse_config(std::iter::once("freegrad").chain(args.split_whitespace()))
    }

    #[test]
    fn comparison_configuration() {
        let cfg = parse("--problem norm1 --dim 625 --T 10000 --gamma0 1 --algos free_adagrad_main,adagrad_oracle_D,oracle_fixed")
            .unwrap();
        assert_eq!(cfg.problem, ProblemKind::Norm1);
        assert_eq!((cfg.dim, cfg.horizon, cfg.gamma0), (625, 10_000, 1.0));
        assert_eq!(
            cfg.algorithms,
            vec![Algorithm::FreeAdagradMain, Algorithm::AdagradOracleD, Algorithm::OracleFixed]
        );
    }

    #[test]
    fn usage_errors() {
        assert!(matches!(parse("--problem norm1 --T 0"), Err(CliError::Usage(_))));
        assert!(matches!(parse("--problem norm1 --algos ,"), Err(CliError::Usage(_))));
        assert!(matches!(parse("--problem norm1 --algos nope"), Err(CliError::Usage(_))));
        assert!(matches!(parse("--dim 3"), Err(CliError::Usage(_))));
        assert!(matches!(parse("--problem expsum --algos oracle_fixed"), Err(CliError::Usage(_))));
        assert!(matches!(parse("--problem norm1 --delta 1"), Err(CliError::Usage(_))));
        let e = parse("--problem norm1 --bogus 1").unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn seeds_syntax() {
        assert_eq!(parse_seeds("3,1,2").unwrap(), vec![3, 1, 2]);
        assert_eq!(parse_seeds("0..4").unwrap(), vec![0, 1, 2, 3]);
        assert!(parse_seeds("a").is_err());
    }

    #[test]
    fn config_file_and_precedence() {
        let file = Cli::from_config_text("# comment\nproblem = norm2\ndim=7 # trailing\nT=50\nseeds=1,2\n\n").unwrap();
        let flags = Cli { dim: Some(9), ..Cli::default() };
        let cfg = flags.over(file).resolve().unwrap();
        assert_eq!(cfg.problem, ProblemKind::Norm2);
        assert_eq!((cfg.dim, cfg.horizon), (9, 50));
        assert_eq!(cfg.seeds, vec![1, 2]);
        assert!(matches!(Cli::from_config_text("colour=blue"), Err(CliError::Usage(_))));
        assert!(matches!(Cli::from_config_text("dim"), Err(CliError::Usage(_))));
        assert!(matches!(Cli::from_config_text("dim=x"), Err(CliError::Usage(_))));
    }

    #[test]
    fn echo_round_trips_through_the_file_syntax() {
        let mut cfg = parse("--problem abslinear --dim 5 --n 7 --T 9 --seeds 1,4 --L 2.5").unwrap();
        cfg.output_dir = "somewhere".into();
        let back = Cli::from_config_text(&cfg.echo()).unwrap().resolve().unwrap();
        assert_eq!(back, cfg);
    }
}
