//! Deterministic Monte Carlo sweeps: estimator MSE, bound values and ARL
//! against one scene parameter.
//!
//! Randomness: the waveform is drawn once per sweep (stream
//! [`WAVEFORM_STREAM`] of the seed, column by column, so a `T`-sweep sees
//! nested prefixes of one draw). Trial `k` uses stream `k` at every grid
//! point. Results are collected in trial order before reduction, so serial
//! and parallel runs agree bit for bit.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arl::{arl_report, DEFAULT_EXACT_TOL};
use crate::bounds::{crb_gaussian, crb_standard, emcb, mcrb_hcrb, DEFAULT_EMCB_DRAWS};
use crate::clutter::{sample_clutter_with_factor, sigma2_for_scr, stream_rng, toeplitz_sigma, ClutterDraw, SpeckleCovariance, TextureFamily, TextureKind};
use crate::error::{Error, Result};
use crate::estimators::{cmle, imape, imle, EstimationResult, EstimatorOptions};
use crate::radar_model::{electrical_angle, target_response, ArrayGeometry, RadarScene};
use crate::CMatrix;

pub const DEFAULT_M: usize = 5;
pub const DEFAULT_N: usize = 4;
pub const DEFAULT_T: usize = 6;
pub const DEFAULT_DOA_DEG: f64 = 60.0;
pub const DEFAULT_DELTA: f64 = 1.0;
pub const DEFAULT_ALPHA1: (f64, f64) = (2.0, 0.5);
pub const DEFAULT_ALPHA2: (f64, f64) = (1.0, -3.0);
pub const DEFAULT_K_SHAPE: f64 = 2.0;
pub const DEFAULT_K_SCALE: f64 = 10.0;
pub const DEFAULT_T_SHAPE: f64 = 1.1;
pub const DEFAULT_T_SCALE: f64 = 2.0;
pub const DEFAULT_SCR_DB: f64 = 0.0;
pub const DEFAULT_TRIALS: usize = 500;
pub const DEFAULT_SEED: u64 = 20_190_501;

pub const WAVEFORM_STREAM: u64 = u64::MAX;
const EMCB_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

pub const PRESETS: [&str; 12] = [
    "fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12",
];

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal $(| $alias:literal)*),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text $(| $alias)* => Ok($name::$variant),)+
                    other => {
                        let known: Vec<&str> = $name::ALL.iter().map(|v| v.as_str()).collect();
                        Err(Error::invalid(stringify!($name), format!("unknown value `{other}` (expected one of {})", known.join(", "))))
                    }
                }
            }
        }
    };
}

named_enum!(
    SweepKind { Mse => "mse", Bounds => "bounds", Arl => "arl" }
);

named_enum!(
    /// Swept scene parameter; amplitude axes set `|α|` and keep the phase.
    Axis {
        T => "T" | "t",
        Scr => "scr" | "SCR",
        N => "N" | "n",
        A => "a",
        B => "b",
        Alpha1 => "alpha1",
        Alpha2 => "alpha2",
    }
);

named_enum!(
    Estimator { Cmle => "cmle", Imle => "imle", Imape => "imape" }
);

named_enum!(
    BoundKind { Crb => "crb", Emcb => "emcb", Mcrb => "mcrb", Hcrb => "hcrb", CrbGaussian => "crb_gaussian" }
);

impl Axis {
    /// CSV header for the axis column.
    pub fn column(self) -> &'static str {
        match self {
            Axis::Scr => "scr_db",
            Axis::Alpha1 => "alpha1_abs",
            Axis::Alpha2 => "alpha2_abs",
            other => other.as_str(),
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, Axis::T | Axis::N)
    }
}

impl SweepKind {
    pub fn axes(self) -> &'static [Axis] {
        match self {
            SweepKind::Mse => &[Axis::T, Axis::Scr],
            SweepKind::Bounds => &[Axis::T, Axis::N, Axis::A, Axis::B],
            SweepKind::Arl => &[Axis::Scr, Axis::A, Axis::B, Axis::Alpha1, Axis::Alpha2],
        }
    }
}

/// Grid used when none is given.
pub fn default_grid(axis: Axis, kind: TextureKind) -> Vec<f64> {
    match axis {
        Axis::T => vec![2.0, 4.0, 6.0, 8.0, 10.0, 15.0, 20.0],
        Axis::Scr => vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
        Axis::N => vec![2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0],
        Axis::A if kind == TextureKind::T => vec![1.1, 1.5, 2.0, 3.0],
        Axis::A => vec![1.5, 2.0, 3.0, 5.0],
        Axis::B => vec![1.0, 2.0, 5.0, 10.0],
        Axis::Alpha1 | Axis::Alpha2 => vec![0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0],
    }
}

/// Default texture law of each family.
pub fn default_family(kind: TextureKind) -> TextureFamily {
    match kind {
        TextureKind::K => TextureFamily { kind, a: DEFAULT_K_SHAPE, b: DEFAULT_K_SCALE },
        TextureKind::T => TextureFamily { kind, a: DEFAULT_T_SHAPE, b: DEFAULT_T_SCALE },
        TextureKind::Gaussian => TextureFamily::gaussian(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub sweep: SweepKind,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub omega1: f64,
    pub delta: f64,
    pub alpha1: Complex<f64>,
    pub alpha2: Complex<f64>,
    pub family: TextureFamily,
    pub scr_db: f64,
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub estimators: Vec<Estimator>,
    pub bounds: Vec<BoundKind>,
    pub emcb_draws: usize,
    pub estimator_options: EstimatorOptions<f64>,
    pub arl_tol: f64,
    /// Also report the closed-form ARL from the MCRB.
    pub arl_mcrb: bool,
}

/// Scene of the numerical study: `M = 5`, `N = 4`, `T = 6`, first target at
/// 60°, `Δ = 1`, K-clutter `(2, 10)`, SCR 0 dB, 500 trials, Toeplitz speckle.
pub fn default_config() -> ExperimentConfig {
    ExperimentConfig {
        name: "mse_scr".into(),
        sweep: SweepKind::Mse,
        m: DEFAULT_M,
        n: DEFAULT_N,
        t: DEFAULT_T,
        omega1: electrical_angle(DEFAULT_DOA_DEG),
        delta: DEFAULT_DELTA,
        alpha1: Complex::new(DEFAULT_ALPHA1.0, DEFAULT_ALPHA1.1),
        alpha2: Complex::new(DEFAULT_ALPHA2.0, DEFAULT_ALPHA2.1),
        family: default_family(TextureKind::K),
        scr_db: DEFAULT_SCR_DB,
        axis: Axis::Scr,
        grid: default_grid(Axis::Scr, TextureKind::K),
        trials: DEFAULT_TRIALS,
        seed: DEFAULT_SEED,
        estimators: Estimator::ALL.to_vec(),
        bounds: vec![BoundKind::Crb],
        emcb_draws: DEFAULT_EMCB_DRAWS,
        estimator_options: EstimatorOptions::default(),
        arl_tol: DEFAULT_EXACT_TOL,
        arl_mcrb: false,
    }
}

/// One resolved grid point.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub value: f64,
    pub scene: RadarScene<f64>,
    pub cov: SpeckleCovariance<f64>,
    pub family: TextureFamily,
    sqrt_factor: CMatrix<f64>,
}

impl SweepPoint {
    /// Observations of trial `trial`: texture first, then speckle, from
    /// stream `trial` of `seed`.
    pub fn trial(&self, seed: u64, trial: usize) -> Result<(CMatrix<f64>, ClutterDraw<f64>)> {
        let mut rng = stream_rng(seed, trial as u64);
        let draw = sample_clutter_with_factor(&self.family, &self.sqrt_factor, self.scene.snapshots(), &mut rng)?;
        let y = target_response(&self.scene).v + &draw.n;
        Ok((y, draw))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "at least one trial is required"));
        }
        if self.grid.is_empty() {
            return Err(Error::invalid("grid", "the sweep grid is empty"));
        }
        if self.grid.iter().any(|x| !x.is_finite()) || self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("grid", "grid values must be finite and strictly increasing"));
        }
        if !self.sweep.axes().contains(&self.axis) {
            let allowed: Vec<&str> = self.sweep.axes().iter().map(|a| a.as_str()).collect();
            return Err(Error::invalid("axis", format!("`{}` sweeps support axes {}", self.sweep, allowed.join(", "))));
        }
        if self.axis.is_integer() && self.grid.iter().any(|x| x.fract() != 0.0 || *x < 1.0) {
            return Err(Error::invalid("grid", format!("{} values must be positive integers", self.axis)));
        }
        if matches!(self.axis, Axis::Alpha1 | Axis::Alpha2) && self.grid[0] <= 0.0 {
            return Err(Error::invalid("grid", "amplitudes must be positive"));
        }
        if self.family.kind == TextureKind::Gaussian && self.estimators.contains(&Estimator::Imape) && self.sweep == SweepKind::Mse {
            return Err(Error::invalid("estimators", "imape needs a K or t texture prior"));
        }
        if self.bounds.contains(&BoundKind::Emcb) && self.emcb_draws < 100 {
            return Err(Error::invalid("emcb_draws", "at least 100 texture draws are required"));
        }
        if !(self.arl_tol > 0.0) {
            return Err(Error::invalid("arl_tol", "tolerance must be positive"));
        }
        self.estimator_options.validate()?;
        self.family.validate()?;
        self.base_scene(self.t)?;
        for &v in &self.grid {
            self.point(v)?;
        }
        Ok(())
    }

    /// `M×t` waveform with real and imaginary parts uniform on `[−1, 1]`.
    pub fn waveform(&self, t: usize) -> CMatrix<f64> {
        let mut rng = stream_rng(self.seed, WAVEFORM_STREAM);
        let mut s = CMatrix::zeros(self.m, t);
        for j in 0..t {
            for i in 0..self.m {
                s[(i, j)] = Complex::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            }
        }
        s
    }

    fn base_scene(&self, t: usize) -> Result<RadarScene<f64>> {
        let geometry = ArrayGeometry::uniform(self.m, self.n)?;
        RadarScene::new(geometry, self.omega1, self.delta, self.alpha1, self.alpha2, self.waveform(t))
    }

    /// Scene, covariance and texture law at one axis value. `σ²` always
    /// follows from the SCR, which depends on the waveform energy only.
    pub fn point(&self, value: f64) -> Result<SweepPoint> {
        let mut family = self.family;
        let mut scr = self.scr_db;
        let (mut n, mut t) = (self.n, self.t);
        let rescale = |z: Complex<f64>, r: f64| if z == Complex::new(0.0, 0.0) { Complex::new(r, 0.0) } else { z * (r / z.norm()) };
        let (mut a1, mut a2) = (self.alpha1, self.alpha2);
        match self.axis {
            Axis::T => t = value as usize,
            Axis::N => n = value as usize,
            Axis::Scr => scr = value,
            Axis::A => family.a = value,
            Axis::B => family.b = value,
            Axis::Alpha1 => a1 = rescale(a1, value),
            Axis::Alpha2 => a2 = rescale(a2, value),
        }
        family.validate()?;
        let geometry = ArrayGeometry::uniform(self.m, n)?;
        let scene = RadarScene::new(geometry, self.omega1, self.delta, a1, a2, self.waveform(t))?;
        let cov = toeplitz_sigma(n, sigma2_for_scr(&scene, &family, scr)?)?;
        let sqrt_factor = cov.sqrt_factor();
        Ok(SweepPoint { value, scene, cov, family, sqrt_factor })
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    fn emcb_seed(&self) -> u64 {
        self.seed ^ EMCB_SEED_SALT
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorStats {
    pub estimator: Estimator,
    /// Mean of `(Δ̂ − Δ)²` over unflagged trials (NaN if there are none).
    pub mse: f64,
    /// Same over every trial that returned an estimate.
    pub mse_all: f64,
    pub used: usize,
    /// `Δ̂` ended on an end of the search interval.
    pub flagged: usize,
    /// The estimator returned an error.
    pub failed: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub bound: BoundKind,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArlValues {
    pub delta_exact: f64,
    pub delta_closed: f64,
    pub delta_asym: f64,
    pub delta_mcrb: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub value: f64,
    pub estimators: Vec<EstimatorStats>,
    pub bounds: Vec<BoundValue>,
    pub arl: Option<ArlValues>,
    pub config_hash: String,
    /// Excluded from the CSV and manifest so outputs stay reproducible.
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl SweepRecord {
    pub fn stats(&self, e: Estimator) -> Option<&EstimatorStats> {
        self.estimators.iter().find(|s| s.estimator == e)
    }

    pub fn bound(&self, b: BoundKind) -> Option<f64> {
        self.bounds.iter().find(|v| v.bound == b).map(|v| v.value)
    }
}

pub fn run_estimator(e: Estimator, y: &CMatrix<f64>, point: &SweepPoint, opts: &EstimatorOptions<f64>) -> Result<EstimationResult<f64>> {
    match e {
        Estimator::Cmle => cmle(y, &point.scene, opts),
        Estimator::Imle => imle(y, &point.scene, opts),
        Estimator::Imape => imape(y, &point.scene, &point.family, opts),
    }
}

fn compute_bounds(cfg: &ExperimentConfig, point: &SweepPoint, wanted: &[BoundKind]) -> Result<Vec<BoundValue>> {
    let (scene, cov, family) = (&point.scene, &point.cov, &point.family);
    let mut modified = None;
    wanted
        .iter()
        .map(|&bound| {
            let value = match bound {
                BoundKind::Crb => crb_standard(scene, cov, family)?,
                BoundKind::Emcb => emcb(scene, cov, family, cfg.emcb_draws, cfg.emcb_seed())?,
                BoundKind::Mcrb | BoundKind::Hcrb => {
                    let (m, h) = match modified {
                        Some(v) => v,
                        None => *modified.insert(mcrb_hcrb(scene, cov, family)?),
                    };
                    if bound == BoundKind::Mcrb { m } else { h }
                }
                BoundKind::CrbGaussian => crb_gaussian(scene, cov, family)?,
            };
            Ok(BoundValue { bound, value })
        })
        .collect()
}

fn check_kind(cfg: &ExperimentConfig, kind: SweepKind) -> Result<()> {
    if cfg.sweep != kind {
        return Err(Error::invalid("sweep", format!("config describes a `{}` sweep, not `{kind}`", cfg.sweep)));
    }
    cfg.validate()
}

/// Squared errors of one trial, per configured estimator.
type TrialOutcome = Vec<Option<(f64, bool)>>;

/// MSE of each configured estimator at every grid point, with the configured
/// bounds attached. Trials whose estimate sits on a search boundary are
/// counted in `flagged` and left out of `mse` (but not of `mse_all`).
pub fn run_mse_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    check_kind(cfg, SweepKind::Mse)?;
    let hash = cfg.hash();
    cfg.grid
        .iter()
        .map(|&value| {
            let start = Instant::now();
            let point = cfg.point(value)?;
            let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
                .into_par_iter()
                .map(|k| {
                    let (y, _) = point.trial(cfg.seed, k)?;
                    Ok(cfg
                        .estimators
                        .iter()
                        .map(|&e| {
                            run_estimator(e, &y, &point, &cfg.estimator_options)
                                .ok()
                                .map(|r| ((r.delta_hat - point.scene.delta).powi(2), r.at_boundary))
                        })
                        .collect())
                })
                .collect::<Result<_>>()?;
            let estimators = cfg
                .estimators
                .iter()
                .enumerate()
                .map(|(i, &estimator)| {
                    let (mut sum, mut sum_all, mut used, mut flagged, mut failed) = (0.0, 0.0, 0usize, 0usize, 0usize);
                    for o in &outcomes {
                        match o[i] {
                            None => failed += 1,
                            Some((se, boundary)) => {
                                sum_all += se;
                                if boundary {
                                    flagged += 1;
                                } else {
                                    sum += se;
                                    used += 1;
                                }
                            }
                        }
                    }
                    let returned = used + flagged;
                    EstimatorStats {
                        estimator,
                        mse: if used > 0 { sum / used as f64 } else { f64::NAN },
                        mse_all: if returned > 0 { sum_all / returned as f64 } else { f64::NAN },
                        used,
                        flagged,
                        failed,
                    }
                })
                .collect();
            let bounds = compute_bounds(cfg, &point, &cfg.bounds)?;
            Ok(SweepRecord { value, estimators, bounds, arl: None, config_hash: hash.clone(), wall_time_s: start.elapsed().as_secs_f64() })
        })
        .collect()
}

/// Configured bounds at every grid point; no estimation.
pub fn run_bound_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    check_kind(cfg, SweepKind::Bounds)?;
    let hash = cfg.hash();
    cfg.grid
        .par_iter()
        .map(|&value| {
            let start = Instant::now();
            let point = cfg.point(value)?;
            let bounds = compute_bounds(cfg, &point, &cfg.bounds)?;
            Ok(SweepRecord { value, estimators: vec![], bounds, arl: None, config_hash: hash.clone(), wall_time_s: start.elapsed().as_secs_f64() })
        })
        .collect()
}

/// Exact, closed-form and asymptotic ARL at every grid point.
pub fn run_arl_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    check_kind(cfg, SweepKind::Arl)?;
    let hash = cfg.hash();
    cfg.grid
        .par_iter()
        .map(|&value| {
            let start = Instant::now();
            let point = cfg.point(value)?;
            let r = arl_report(&point.scene, &point.cov, &point.family, cfg.arl_tol)?;
            let arl = ArlValues {
                delta_exact: r.delta_exact,
                delta_closed: r.delta_closed,
                delta_asym: r.delta_asymptotic,
                delta_mcrb: if cfg.arl_mcrb { r.delta_mcrb } else { None },
            };
            Ok(SweepRecord { value, estimators: vec![], bounds: vec![], arl: Some(arl), config_hash: hash.clone(), wall_time_s: start.elapsed().as_secs_f64() })
        })
        .collect()
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    match cfg.sweep {
        SweepKind::Mse => run_mse_sweep(cfg),
        SweepKind::Bounds => run_bound_sweep(cfg),
        SweepKind::Arl => run_arl_sweep(cfg),
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn axis_cell(axis: Axis, v: f64) -> String {
    if axis.is_integer() { format!("{}", v as u64) } else { num(v) }
}

/// CSV rendering: header row, then one row per grid point. Floats carry 17
/// significant digits.
pub fn csv_string(cfg: &ExperimentConfig, records: &[SweepRecord]) -> Result<String> {
    let mut header = vec![cfg.axis.column().to_string()];
    match cfg.sweep {
        SweepKind::Mse => {
            for e in &cfg.estimators {
                for field in ["mse", "mse_all", "used", "flagged", "failed"] {
                    header.push(format!("{field}_{e}"));
                }
            }
        }
        SweepKind::Bounds => {}
        SweepKind::Arl => {
            header.extend(["delta_exact", "delta_closed", "delta_asym"].map(String::from));
            if cfg.arl_mcrb {
                header.push("delta_mcrb".into());
            }
        }
    }
    if cfg.sweep != SweepKind::Arl {
        header.extend(cfg.bounds.iter().map(|b| b.to_string()));
    }

    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![axis_cell(cfg.axis, r.value)];
        for s in &r.estimators {
            row.extend([num(s.mse), num(s.mse_all), s.used.to_string(), s.flagged.to_string(), s.failed.to_string()]);
        }
        if let Some(a) = &r.arl {
            row.extend([num(a.delta_exact), num(a.delta_closed), num(a.delta_asym)]);
            if cfg.arl_mcrb {
                row.push(a.delta_mcrb.map(num).unwrap_or_else(|| "NaN".into()));
            }
        }
        row.extend(r.bounds.iter().map(|b| num(b.value)));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

#[derive(Serialize)]
struct Manifest<'a> {
    name: &'a str,
    version: String,
    seed: u64,
    config_hash: String,
    csv: String,
    config: &'a ExperimentConfig,
    records: &'a [SweepRecord],
}

#[derive(Serialize)]
struct Timings<'a> {
    name: &'a str,
    total_s: f64,
    points: Vec<PointTiming>,
}

#[derive(Serialize)]
struct PointTiming {
    value: f64,
    wall_time_s: f64,
}

pub fn version_string() -> String {
    format!("sirp-radar v{}", env!("CARGO_PKG_VERSION"))
}

pub fn manifest_json(cfg: &ExperimentConfig, records: &[SweepRecord]) -> Result<String> {
    let m = Manifest {
        name: &cfg.name,
        version: version_string(),
        seed: cfg.seed,
        config_hash: cfg.hash(),
        csv: format!("{}.csv", cfg.name),
        config: cfg,
        records,
    };
    Ok(serde_json::to_string_pretty(&m)? + "\n")
}

#[derive(Clone, Debug)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub timings: PathBuf,
}

/// Writes `<name>.csv`, `<name>.json` and the wall-time sidecar
/// `<name>.timings.json` into `dir`.
pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, records: &[SweepRecord]) -> Result<OutputPaths> {
    fs::create_dir_all(dir)?;
    let paths = OutputPaths {
        csv: dir.join(format!("{}.csv", cfg.name)),
        manifest: dir.join(format!("{}.json", cfg.name)),
        timings: dir.join(format!("{}.timings.json", cfg.name)),
    };
    fs::write(&paths.csv, csv_string(cfg, records)?)?;
    fs::write(&paths.manifest, manifest_json(cfg, records)?)?;
    let timings = Timings {
        name: &cfg.name,
        total_s: records.iter().map(|r| r.wall_time_s).sum(),
        points: records.iter().map(|r| PointTiming { value: r.value, wall_time_s: r.wall_time_s }).collect(),
    };
    fs::write(&paths.timings, serde_json::to_string_pretty(&timings)? + "\n")?;
    Ok(paths)
}

fn mse_preset(name: &str, kind: TextureKind, axis: Axis) -> ExperimentConfig {
    let mut c = default_config();
    c.name = name.into();
    c.family = default_family(kind);
    c.axis = axis;
    c.grid = default_grid(axis, kind);
    if axis == Axis::T {
        c.scr_db = 10.0;
    }
    c
}

fn bound_preset(name: &str, kind: TextureKind, axis: Axis) -> ExperimentConfig {
    let mut c = default_config();
    c.name = name.into();
    c.sweep = SweepKind::Bounds;
    c.family = default_family(kind);
    c.axis = axis;
    c.grid = match axis {
        Axis::A if kind == TextureKind::K => vec![1.5, 2.0, 2.5, 3.0, 4.0, 5.0],
        Axis::A => vec![1.1, 1.5, 2.0, 2.5, 3.0],
        Axis::B => vec![1.0, 2.0, 5.0, 10.0, 20.0],
        other => default_grid(other, kind),
    };
    c.estimators = vec![];
    c.bounds = BoundKind::ALL.to_vec();
    match axis {
        Axis::T => (c.m, c.n) = (6, 3),
        Axis::N => (c.m, c.t) = (6, 2),
        _ => {}
    }
    c
}

fn arl_preset(name: String, family: TextureFamily, axis: Axis) -> ExperimentConfig {
    let mut c = default_config();
    c.name = name;
    c.sweep = SweepKind::Arl;
    (c.m, c.n) = (6, 8);
    c.family = family;
    c.axis = axis;
    c.grid = match axis {
        Axis::Scr => vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
        other => default_grid(other, family.kind),
    };
    c.estimators = vec![];
    c.bounds = vec![];
    c
}

fn arl_texture_presets(fig: &str, kind: TextureKind) -> Vec<ExperimentConfig> {
    let base = default_family(kind);
    let shapes: &[f64] = if kind == TextureKind::K { &[1.5, 2.0, 3.0, 5.0] } else { &[1.1, 1.5, 2.0, 3.0] };
    let mut out: Vec<ExperimentConfig> =
        shapes.iter().map(|&a| arl_preset(format!("{fig}_a{a}"), base.with_shape(a), Axis::Scr)).collect();
    out.extend([1.0, 2.0, 5.0, 10.0].iter().map(|&b| arl_preset(format!("{fig}_b{b}"), base.with_scale(b), Axis::Scr)));
    out.push(arl_preset(format!("{fig}_gaussian"), TextureFamily::gaussian(), Axis::Scr));
    out
}

/// Sweeps behind each figure of the numerical study, in figure order.
pub fn preset(name: &str) -> Result<Vec<ExperimentConfig>> {
    use TextureKind::{K, T};
    let cfgs = match name {
        "fig1" => vec![mse_preset("fig1", K, Axis::T)],
        "fig2" => vec![mse_preset("fig2", K, Axis::Scr)],
        "fig3" => vec![mse_preset("fig3", T, Axis::T)],
        "fig4" => vec![mse_preset("fig4", T, Axis::Scr)],
        "fig5" => vec![bound_preset("fig5_T", K, Axis::T), bound_preset("fig5_N", K, Axis::N)],
        "fig6" => vec![bound_preset("fig6_T", T, Axis::T), bound_preset("fig6_N", T, Axis::N)],
        "fig7" => vec![bound_preset("fig7_a", K, Axis::A), bound_preset("fig7_b", K, Axis::B)],
        "fig8" => vec![bound_preset("fig8_a", T, Axis::A), bound_preset("fig8_b", T, Axis::B)],
        "fig9" => vec![
            arl_preset("fig9_k".into(), default_family(K), Axis::Scr),
            arl_preset("fig9_t".into(), default_family(T), Axis::Scr),
        ],
        "fig10" => arl_texture_presets("fig10", K),
        "fig11" => arl_texture_presets("fig11", T),
        "fig12" => {
            let mut out = vec![];
            for kind in [K, T] {
                for (axis, fixed) in [(Axis::Alpha2, "alpha1"), (Axis::Alpha1, "alpha2")] {
                    let mut c = arl_preset(format!("fig12_{axis}_{kind}"), default_family(kind), axis);
                    // the other amplitude is held at unit modulus
                    if fixed == "alpha1" {
                        c.alpha1 /= c.alpha1.norm();
                    } else {
                        c.alpha2 /= c.alpha2.norm();
                    }
                    out.push(c);
                }
            }
            out
        }
        other => return Err(Error::invalid("preset", format!("unknown preset `{other}` (expected fig1 … fig12)"))),
    };
    Ok(cfgs)
}
