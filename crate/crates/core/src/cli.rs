//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for usage and configuration errors, 3 for
//! numerical failures.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use num_complex::Complex;
use serde::Serialize;

use crate::bounds::{kappa, nu};
use crate::clutter::{TextureFamily, TextureKind};
use crate::error::{Error, Result};
use crate::experiments::*;
use crate::observations::load_observations;
use crate::radar_model::electrical_angle;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Complex number given as `re,im`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexArg(pub Complex<f64>);

impl FromStr for ComplexArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (re, im) = s.split_once(',').ok_or_else(|| format!("expected `re,im`, got `{s}`"))?;
        let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
        Ok(ComplexArg(Complex::new(p(re)?, p(im)?)))
    }
}

impl fmt::Display for ComplexArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0.re, self.0.im)
    }
}

fn shape_help() -> String {
    format!("Texture shape a [default: {DEFAULT_K_SHAPE} for k, {DEFAULT_T_SHAPE} for t]")
}

fn scale_help() -> String {
    format!("Texture scale b [default: {DEFAULT_K_SCALE} for k, {DEFAULT_T_SCALE} for t]")
}

#[derive(Parser, Debug)]
#[command(name = "sirp-radar", version, about = "MIMO radar angular-spacing estimation, bounds and resolution limit under SIRP clutter")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Monte Carlo MSE of the estimators (axis T or scr).
    Mse(SweepArgs),
    /// CRB, EMCB, MCRB, HCRB and Gaussian CRB (axis T, N, a or b).
    Bounds(SweepArgs),
    /// Exact, closed-form and asymptotic ARL (axis scr, a, b, alpha1 or alpha2).
    Arl(SweepArgs),
    /// Run the estimators on an observation file.
    Estimate(EstimateArgs),
    /// Print the Fisher weights κ and ν.
    Kappa(KappaArgs),
}

#[derive(Args, Debug)]
pub struct SceneArgs {
    /// Transmit sensors
    #[arg(long = "M", default_value_t = DEFAULT_M)]
    pub m: usize,
    /// Receive sensors
    #[arg(long = "N", default_value_t = DEFAULT_N)]
    pub n: usize,
    /// Snapshots
    #[arg(long = "T", default_value_t = DEFAULT_T)]
    pub t: usize,
    /// Direction of the known target in degrees
    #[arg(long, default_value_t = DEFAULT_DOA_DEG)]
    pub doa_deg: f64,
    /// True angular spacing Δ (electrical angle)
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    /// Amplitude of the known target as `re,im`
    #[arg(long, default_value_t = ComplexArg(Complex::new(DEFAULT_ALPHA1.0, DEFAULT_ALPHA1.1)), allow_hyphen_values = true)]
    pub alpha1: ComplexArg,
    /// Amplitude of the second target as `re,im`
    #[arg(long, default_value_t = ComplexArg(Complex::new(DEFAULT_ALPHA2.0, DEFAULT_ALPHA2.1)), allow_hyphen_values = true)]
    pub alpha2: ComplexArg,
    /// Texture family: k, t or gaussian
    #[arg(long, default_value_t = TextureKind::K)]
    pub family: TextureKind,
    #[arg(long, help = shape_help())]
    pub a: Option<f64>,
    #[arg(long, help = scale_help())]
    pub b: Option<f64>,
    /// Signal-to-clutter ratio in dB
    #[arg(long, default_value_t = DEFAULT_SCR_DB, allow_hyphen_values = true)]
    pub scr: f64,
    /// Random seed
    #[arg(long, env = "SIRP_RADAR_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Swept parameter
    #[arg(long)]
    pub axis: Option<Axis>,
    /// Comma-separated axis values [default: depends on the axis]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub grid: Option<Vec<f64>>,
    /// Monte Carlo trials per grid point
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    /// Comma-separated estimators [default: cmle,imle,imape]
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<Estimator>>,
    /// Comma-separated bounds [default: crb for mse, all for bounds]
    #[arg(long, value_delimiter = ',')]
    pub bounds: Option<Vec<BoundKind>>,
    /// Texture draws for the EMCB
    #[arg(long, default_value_t = crate::bounds::DEFAULT_EMCB_DRAWS)]
    pub emcb_draws: usize,
    /// Maximum estimator iterations
    #[arg(long, default_value_t = crate::estimators::DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    /// Estimator convergence threshold on Δ̂
    #[arg(long, default_value_t = crate::estimators::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Relative tolerance of the exact ARL
    #[arg(long, default_value_t = crate::arl::DEFAULT_EXACT_TOL)]
    pub arl_tol: f64,
    /// Add the MCRB-based closed-form ARL column
    #[arg(long)]
    pub arl_mcrb: bool,
    /// Output name [default: <sweep>_<axis>]
    #[arg(long)]
    pub name: Option<String>,
    /// Named figure configuration (fig1 … fig12)
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// JSON experiment configuration; explicit flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Observation file (JSON with n, t, re, im)
    #[arg(long)]
    pub input: PathBuf,
    /// Scene; N and T are taken from the file, and the waveform is
    /// regenerated from the seed exactly as in the simulator.
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Comma-separated estimators [default: cmle,imle,imape]
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<Estimator>>,
    #[arg(long, default_value_t = crate::estimators::DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    #[arg(long, default_value_t = crate::estimators::DEFAULT_EPSILON)]
    pub epsilon: f64,
}

#[derive(Args, Debug)]
pub struct KappaArgs {
    /// Texture family: k, t or gaussian
    #[arg(long)]
    pub family: TextureKind,
    /// Texture shape (required for k and t)
    #[arg(long)]
    pub a: Option<f64>,
    /// Texture scale (required for k and t)
    #[arg(long)]
    pub b: Option<f64>,
    /// Receive sensors
    #[arg(long = "N", default_value_t = DEFAULT_N)]
    pub n: usize,
}

/// Which flags were typed (or set through the environment) rather than
/// defaulted.
struct Explicit<'a>(&'a ArgMatches);

impl Explicit<'_> {
    fn has(&self, id: &str) -> bool {
        matches!(self.0.value_source(id), Some(ValueSource::CommandLine | ValueSource::EnvVariable))
    }
}

fn family_from(kind: TextureKind, a: Option<f64>, b: Option<f64>) -> TextureFamily {
    let base = default_family(kind);
    TextureFamily { kind, a: a.unwrap_or(base.a), b: b.unwrap_or(base.b) }
}

/// Applies scene flags to `cfg`; with `only_explicit`, defaulted flags are
/// left alone.
fn apply_scene(cfg: &mut ExperimentConfig, s: &SceneArgs, ex: &Explicit, only_explicit: bool) {
    let set = |id: &str| !only_explicit || ex.has(id);
    if set("m") {
        cfg.m = s.m;
    }
    if set("n") {
        cfg.n = s.n;
    }
    if set("t") {
        cfg.t = s.t;
    }
    if set("doa_deg") {
        cfg.omega1 = electrical_angle(s.doa_deg);
    }
    if set("delta") {
        cfg.delta = s.delta;
    }
    if set("alpha1") {
        cfg.alpha1 = s.alpha1.0;
    }
    if set("alpha2") {
        cfg.alpha2 = s.alpha2.0;
    }
    if set("family") {
        cfg.family = family_from(s.family, s.a, s.b);
    } else {
        cfg.family.a = s.a.unwrap_or(cfg.family.a);
        cfg.family.b = s.b.unwrap_or(cfg.family.b);
    }
    if set("scr") {
        cfg.scr_db = s.scr;
    }
    if set("seed") {
        cfg.seed = s.seed;
    }
}

fn sweep_configs(kind: SweepKind, args: &SweepArgs, matches: &ArgMatches) -> Result<Vec<ExperimentConfig>> {
    let ex = Explicit(matches);
    let mut cfgs = if let Some(name) = &args.preset {
        let cfgs = preset(name)?;
        if let Some(c) = cfgs.iter().find(|c| c.sweep != kind) {
            return Err(Error::invalid("preset", format!("preset `{name}` is a `{}` sweep, not `{kind}`", c.sweep)));
        }
        cfgs
    } else if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)?;
        let cfg = ExperimentConfig::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::Parse { offset: 0, message: format!("{}: {j}", path.display()) },
            other => other,
        })?;
        if cfg.sweep != kind {
            return Err(Error::invalid("config", format!("{} describes a `{}` sweep, not `{kind}`", path.display(), cfg.sweep)));
        }
        vec![cfg]
    } else {
        let axis = args.axis.ok_or_else(|| Error::invalid("axis", "missing required flag --axis (or --preset / --config)"))?;
        let mut cfg = default_config();
        cfg.sweep = kind;
        cfg.axis = axis;
        cfg.estimators = if kind == SweepKind::Mse { Estimator::ALL.to_vec() } else { vec![] };
        cfg.bounds = match kind {
            SweepKind::Mse => vec![BoundKind::Crb],
            SweepKind::Bounds => BoundKind::ALL.to_vec(),
            SweepKind::Arl => vec![],
        };
        vec![cfg]
    };
    let from_defaults = args.preset.is_none() && args.config.is_none();

    for cfg in &mut cfgs {
        apply_scene(cfg, &args.scene, &ex, !from_defaults);
        if let Some(axis) = args.axis {
            if !from_defaults && axis != cfg.axis && args.grid.is_none() {
                cfg.grid = default_grid(axis, cfg.family.kind);
            }
            cfg.axis = axis;
        }
        if let Some(g) = &args.grid {
            cfg.grid = g.clone();
        } else if from_defaults {
            cfg.grid = default_grid(cfg.axis, cfg.family.kind);
        }
        if from_defaults || ex.has("trials") {
            cfg.trials = args.trials;
        }
        if let Some(e) = &args.estimators {
            cfg.estimators = e.clone();
        }
        if let Some(b) = &args.bounds {
            cfg.bounds = b.clone();
        }
        if from_defaults || ex.has("emcb_draws") {
            cfg.emcb_draws = args.emcb_draws;
        }
        if from_defaults || ex.has("max_iters") {
            cfg.estimator_options.max_iters = args.max_iters;
        }
        if from_defaults || ex.has("epsilon") {
            cfg.estimator_options.epsilon = args.epsilon;
        }
        if from_defaults || ex.has("arl_tol") {
            cfg.arl_tol = args.arl_tol;
        }
        if args.arl_mcrb {
            cfg.arl_mcrb = true;
        }
        if let Some(n) = &args.name {
            cfg.name = n.clone();
        } else if from_defaults {
            cfg.name = format!("{kind}_{}", cfg.axis);
        }
        if cfg.name.is_empty() || cfg.name.contains(['/', '\\']) {
            return Err(Error::invalid("name", "output name must be a plain file stem"));
        }
    }
    if args.name.is_some() && cfgs.len() > 1 {
        for (i, c) in cfgs.iter_mut().enumerate() {
            c.name = format!("{}_{i}", c.name);
        }
    }
    Ok(cfgs)
}

fn run_sweeps(kind: SweepKind, args: &SweepArgs, matches: &ArgMatches, out: &mut dyn Write) -> Result<()> {
    for cfg in sweep_configs(kind, args, matches)? {
        cfg.validate()?;
        let records = run(&cfg)?;
        let paths = write_outputs(&args.out, &cfg, &records)?;
        writeln!(out, "{}: {} points -> {}", cfg.name, records.len(), paths.csv.display())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct EstimateOutput {
    estimator: Estimator,
    delta_hat: f64,
    alpha_hat: [Complex<f64>; 2],
    iterations: usize,
    converged: bool,
    at_boundary: bool,
    ill_conditioned: bool,
    a_hat: Option<f64>,
    b_hat: Option<f64>,
}

fn run_estimate(args: &EstimateArgs, matches: &ArgMatches, out: &mut dyn Write) -> Result<()> {
    let obs = load_observations(&args.input)?;
    let mut cfg = default_config();
    apply_scene(&mut cfg, &args.scene, &Explicit(matches), false);
    (cfg.n, cfg.t) = (obs.n(), obs.t());
    cfg.axis = Axis::Scr;
    cfg.grid = vec![cfg.scr_db];
    cfg.estimator_options.max_iters = args.max_iters;
    cfg.estimator_options.epsilon = args.epsilon;
    let point = cfg.point(cfg.scr_db)?;
    let wanted = args.estimators.clone().unwrap_or_else(|| Estimator::ALL.to_vec());
    let mut results = vec![];
    for e in wanted {
        let r = run_estimator(e, &obs.y, &point, &cfg.estimator_options)?;
        results.push(EstimateOutput {
            estimator: e,
            delta_hat: r.delta_hat,
            alpha_hat: r.alpha_hat,
            iterations: r.iterations_run,
            converged: r.converged,
            at_boundary: r.at_boundary,
            ill_conditioned: r.ill_conditioned,
            a_hat: r.a_hat,
            b_hat: r.b_hat,
        });
    }
    writeln!(out, "{}", serde_json::to_string_pretty(&results)?)?;
    Ok(())
}

fn run_kappa(args: &KappaArgs, out: &mut dyn Write) -> Result<()> {
    let family = match args.family {
        TextureKind::Gaussian => TextureFamily::gaussian(),
        kind => {
            let a = args.a.ok_or_else(|| Error::invalid("a", "missing required flag --a"))?;
            let b = args.b.ok_or_else(|| Error::invalid("b", "missing required flag --b"))?;
            TextureFamily::new(kind, a, b)?
        }
    };
    writeln!(out, "kappa = {}", kappa(&family, args.n)?)?;
    match nu(&family) {
        Ok(v) => writeln!(out, "nu = {v}")?,
        Err(_) => writeln!(out, "nu = inf")?,
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() { EXIT_USAGE } else { EXIT_NUMERIC }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run_cli<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().ansi().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return EXIT_USAGE;
        }
    };
    let sub = matches.subcommand().map(|(_, m)| m).expect("a subcommand is required");
    let result = match &cli.command {
        Command::Mse(a) => run_sweeps(SweepKind::Mse, a, sub, out),
        Command::Bounds(a) => run_sweeps(SweepKind::Bounds, a, sub, out),
        Command::Arl(a) => run_sweeps(SweepKind::Arl, a, sub, out),
        Command::Estimate(a) => run_estimate(a, sub, out),
        Command::Kappa(a) => run_kappa(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn parse_and_dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    run_cli(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

/// Resolved configurations for a sweep invocation, without running it.
pub fn resolve<I, S>(argv: I) -> Result<Vec<ExperimentConfig>>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let matches = Cli::command().try_get_matches_from(argv).map_err(|e| Error::invalid("argv", e.to_string()))?;
    let cli = Cli::from_arg_matches(&matches).map_err(|e| Error::invalid("argv", e.to_string()))?;
    let sub = matches.subcommand().map(|(_, m)| m).expect("a subcommand is required");
    match &cli.command {
        Command::Mse(a) => sweep_configs(SweepKind::Mse, a, sub),
        Command::Bounds(a) => sweep_configs(SweepKind::Bounds, a, sub),
        Command::Arl(a) => sweep_configs(SweepKind::Arl, a, sub),
        _ => Err(Error::invalid("argv", "not a sweep subcommand")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (vec![], vec![]);
        let mut argv = vec!["sirp-radar"];
        argv.extend_from_slice(args);
        let code = run_cli(argv, &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn kappa_t_branch() {
        let (code, out, _) = call(&["kappa", "--family", "t", "--a", "1.1", "--b", "2", "--N", "4"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("kappa = 1.839344"), "{out}");
        assert!(out.contains("nu = 0.55"));
    }

    #[test]
    fn usage_errors_exit_2() {
        let (code, _, err) = call(&["kappa", "--a", "1.1", "--b", "2"]);
        assert_eq!(code, 2);
        assert!(err.contains("--family"));
        let (code, _, err) = call(&["kappa", "--family", "t", "--b", "2"]);
        assert_eq!(code, 2);
        assert!(err.contains("--a"));
        let (code, _, err) = call(&["arl", "--family", "t"]);
        assert_eq!(code, 2);
        assert!(err.contains("--axis"));
        assert_eq!(call(&["arl", "--bogus"]).0, 2);
        assert_eq!(call(&["kappa", "--family", "t", "--a", "-1", "--b", "2"]).0, 2);
        assert_eq!(call(&["mse", "--axis", "alpha1"]).0, 2);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn defaults_match_default_config() {
        let cfgs = resolve(["sirp-radar", "mse", "--axis", "scr"]).unwrap();
        let mut want = default_config();
        want.name = "mse_scr".into();
        assert_eq!(cfgs, vec![want]);
        let c = &resolve(["sirp-radar", "arl", "--axis", "scr", "--family", "t", "--M", "6", "--N", "8"]).unwrap()[0];
        assert_eq!((c.family.a, c.family.b, c.m, c.n), (DEFAULT_T_SHAPE, DEFAULT_T_SCALE, 6, 8));
        let c = &resolve(["sirp-radar", "bounds", "--axis", "a", "--alpha2", "-1,2", "--grid", "1.5,2"]).unwrap()[0];
        assert_eq!(c.alpha2, Complex::new(-1.0, 2.0));
        assert_eq!(c.grid, vec![1.5, 2.0]);
    }

    #[test]
    fn presets_take_explicit_overrides_only() {
        let base = preset("fig9").unwrap();
        let got = resolve(["sirp-radar", "arl", "--preset", "fig9", "--seed", "7"]).unwrap();
        assert_eq!(got.len(), base.len());
        for (g, b) in got.iter().zip(&base) {
            assert_eq!(g.seed, 7);
            assert_eq!((g.m, g.n, g.family), (b.m, b.n, b.family));
        }
        assert!(resolve(["sirp-radar", "mse", "--preset", "fig9"]).is_err());
    }
}
