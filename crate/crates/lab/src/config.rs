//! Run configuration: a TOML document with a `subcommand` key, a mandatory
//! `seed`, an optional `output_dir` and one table of parameters named after the
//! subcommand. Every key of the table is optional; missing keys take the
//! defaults below. Physical quantities must carry units (see [`crate::units`]).
//!
//! ```toml
//! subcommand = "collapse"
//! seed = 42
//!
//! [collapse]
//! probabilities = [0.3, 0.7]
//! gamma = "1 1/s"
//! dt = "250 us"
//! ```

use std::fmt;
use std::path::PathBuf;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use csl_core::physconst::{constants, SPEED_OF_LIGHT};

use crate::error::LabError;
use crate::units::{Length, Rate, Speed, Time, Wavenumber};

pub const DEFAULT_OUTPUT_DIR: &str = "csl-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Collapse,
    Epr,
    Frame,
    Mott,
    Heating,
    Ordering,
    Noise,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Collapse => "collapse",
            Subcommand::Epr => "epr",
            Subcommand::Frame => "frame",
            Subcommand::Mott => "mott",
            Subcommand::Heating => "heating",
            Subcommand::Ordering => "ordering",
            Subcommand::Noise => "noise",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseChoice {
    White,
    Colored,
}

/// Seeds are written as TOML integers when they fit in `i64` and as decimal
/// strings otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Seed(u64);

impl Serialize for Seed {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(self.0) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Seed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Seed;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a non-negative integer or a decimal string below 2^64")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Seed, E> {
                u64::try_from(v).map(Seed).map_err(|_| E::custom("seed must be non-negative"))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Seed, E> {
                Ok(Seed(v))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Seed, E> {
                v.parse().map(Seed).map_err(|_| E::custom(format!("{v:?} is not a valid u64 seed")))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollapseParams {
    /// Initial populations of the computational basis; amplitudes are their
    /// real square roots.
    pub probabilities: Vec<f64>,
    /// Diagonals of the collapse operators, one noise channel each.
    pub collapse_operators: Vec<Vec<f64>>,
    /// Real symmetric Hamiltonian, row by row. Absent means `H = 0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<Vec<Vec<Rate>>>,
    /// Explicit collapse rate. Without it and without `cell_size` the rate is
    /// 1/s.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Rate>,
    /// Edge of the cubic cell; when set, `gamma` follows from `lambda` and
    /// `r_c`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell_size: Option<Length>,
    pub lambda: Rate,
    pub r_c: Length,
    pub dt: Time,
    pub n_steps_max: usize,
    pub noise: NoiseChoice,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_c: Option<Time>,
    pub trajectories: usize,
    pub collapse_threshold: f64,
    /// Number of leading trajectories written as trace files.
    pub traces: usize,
    pub trace_stride: usize,
}

impl Default for CollapseParams {
    fn default() -> Self {
        let k = constants();
        Self {
            probabilities: vec![0.3, 0.7],
            collapse_operators: vec![vec![1.0, -1.0]],
            hamiltonian: None,
            gamma: None,
            cell_size: None,
            lambda: Rate(k.lambda_csl_central),
            r_c: Length(k.r_c_standard),
            dt: Time(2.5e-4),
            n_steps_max: 200_000,
            noise: NoiseChoice::White,
            t_c: None,
            trajectories: 10_000,
            collapse_threshold: 1.0 - 1e-6,
            traces: 3,
            trace_stride: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EprParams {
    pub apparatus_mass_gap: f64,
    pub gamma: Rate,
    pub dt: Time,
    pub n_steps_max: usize,
    pub collapse_threshold: f64,
    pub trajectories: usize,
}

impl Default for EprParams {
    fn default() -> Self {
        let s = csl_core::scenarios::EprSetup::default();
        Self {
            apparatus_mass_gap: s.apparatus_mass_gap,
            gamma: Rate(s.gamma),
            dt: Time(s.dt),
            n_steps_max: s.n_steps_max,
            collapse_threshold: s.collapse_threshold,
            trajectories: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameParams {
    pub boost_v: Speed,
    pub t_c: Time,
    pub n_pairs: usize,
    pub p_up: f64,
    pub gap: f64,
    pub gamma: Rate,
    pub dt: Time,
    pub n_steps_max: usize,
}

impl Default for FrameParams {
    fn default() -> Self {
        Self {
            boost_v: Speed(0.5 * SPEED_OF_LIGHT),
            t_c: Time(0.5),
            n_pairs: 100,
            p_up: 0.5,
            gap: 2.0,
            gamma: Rate(1.0),
            dt: Time(0.01),
            n_steps_max: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MottParams {
    pub k: Wavenumber,
    pub sigma: Length,
    pub a: [Length; 3],
    pub n_angles: usize,
    pub cos_min: f64,
    pub radial_points: usize,
    pub angular_points: usize,
    pub azimuth_points: usize,
    pub support_widths: f64,
}

impl Default for MottParams {
    fn default() -> Self {
        let q = csl_core::mott::MottQuadrature::default();
        Self {
            k: Wavenumber(2e10),
            sigma: Length(1e-9),
            a: [Length(0.0), Length(0.0), Length(2e-8)],
            n_angles: 24,
            cos_min: 0.995,
            radial_points: q.radial_points,
            angular_points: q.angular_points,
            azimuth_points: q.azimuth_points,
            support_widths: q.support_widths,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatingParams {
    pub lambda0: Rate,
    pub r_c: Length,
    pub v_s: Speed,
    pub bound: Rate,
    pub beta_max: f64,
    pub n_beta: usize,
}

impl Default for HeatingParams {
    fn default() -> Self {
        let k = constants();
        Self {
            lambda0: Rate(k.lambda_cantilever),
            r_c: Length(k.r_c_standard),
            v_s: Speed(k.v_sound_default),
            bound: Rate(k.bulk_heating_bound),
            beta_max: 20.0,
            n_beta: 201,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrderingParams {
    pub x_a: Length,
    pub t_a: Time,
    pub x_b: Length,
    pub t_b: Time,
    /// Signed boost velocity along x.
    pub boost_v: Speed,
}

impl Default for OrderingParams {
    fn default() -> Self {
        Self {
            x_a: Length(0.0),
            t_a: Time(0.0),
            x_b: Length(2.0 * SPEED_OF_LIGHT),
            t_b: Time(1.0),
            boost_v: Speed(0.6 * SPEED_OF_LIGHT),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseParams {
    pub kind: NoiseChoice,
    pub lambda0: Rate,
    pub t_c: Time,
    pub r_c: Length,
    pub dt: Time,
    pub n_steps: usize,
    pub channels: usize,
    pub trajectories: usize,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            kind: NoiseChoice::Colored,
            lambda0: Rate(1.0),
            t_c: Time(1e-3),
            r_c: Length(constants().r_c_standard),
            dt: Time(1.25e-4),
            n_steps: 1 << 18,
            channels: 1,
            trajectories: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Collapse(CollapseParams),
    Epr(EprParams),
    Frame(FrameParams),
    Mott(MottParams),
    Heating(HeatingParams),
    Ordering(OrderingParams),
    Noise(NoiseParams),
}

impl Params {
    pub fn defaults(sub: Subcommand) -> Self {
        match sub {
            Subcommand::Collapse => Params::Collapse(Default::default()),
            Subcommand::Epr => Params::Epr(Default::default()),
            Subcommand::Frame => Params::Frame(Default::default()),
            Subcommand::Mott => Params::Mott(Default::default()),
            Subcommand::Heating => Params::Heating(Default::default()),
            Subcommand::Ordering => Params::Ordering(Default::default()),
            Subcommand::Noise => Params::Noise(Default::default()),
        }
    }

    pub fn subcommand(&self) -> Subcommand {
        match self {
            Params::Collapse(_) => Subcommand::Collapse,
            Params::Epr(_) => Subcommand::Epr,
            Params::Frame(_) => Subcommand::Frame,
            Params::Mott(_) => Subcommand::Mott,
            Params::Heating(_) => Subcommand::Heating,
            Params::Ordering(_) => Subcommand::Ordering,
            Params::Noise(_) => Subcommand::Noise,
        }
    }

    /// The ensemble size, for subcommands that have one.
    pub fn trajectories_mut(&mut self) -> Option<&mut usize> {
        match self {
            Params::Collapse(p) => Some(&mut p.trajectories),
            Params::Epr(p) => Some(&mut p.trajectories),
            Params::Frame(p) => Some(&mut p.n_pairs),
            Params::Noise(p) => Some(&mut p.trajectories),
            _ => None,
        }
    }
}

/// A validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub params: Params,
}

impl RunConfig {
    pub fn subcommand(&self) -> Subcommand {
        self.params.subcommand()
    }

    pub fn defaults(sub: Subcommand, seed: u64) -> Self {
        Self { seed, output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR), params: Params::defaults(sub) }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    subcommand: Subcommand,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<Seed>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    collapse: Option<CollapseParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epr: Option<EprParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame: Option<FrameParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mott: Option<MottParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    heating: Option<HeatingParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ordering: Option<OrderingParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise: Option<NoiseParams>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub trajectories: Option<usize>,
}

pub fn parse_config(text: &str) -> Result<RunConfig, LabError> {
    parse_config_with(text, &Overrides::default())
}

pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<RunConfig, LabError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
    let sub = file.subcommand;
    let sections = [
        (Subcommand::Collapse, file.collapse.is_some()),
        (Subcommand::Epr, file.epr.is_some()),
        (Subcommand::Frame, file.frame.is_some()),
        (Subcommand::Mott, file.mott.is_some()),
        (Subcommand::Heating, file.heating.is_some()),
        (Subcommand::Ordering, file.ordering.is_some()),
        (Subcommand::Noise, file.noise.is_some()),
    ];
    if let Some((other, _)) = sections.iter().find(|(s, present)| *present && *s != sub) {
        return Err(LabError::Config(format!(
            "table [{other}] does not belong to subcommand {sub:?}",
            sub = sub.name()
        )));
    }
    let params = match sub {
        Subcommand::Collapse => Params::Collapse(file.collapse.unwrap_or_default()),
        Subcommand::Epr => Params::Epr(file.epr.unwrap_or_default()),
        Subcommand::Frame => Params::Frame(file.frame.unwrap_or_default()),
        Subcommand::Mott => Params::Mott(file.mott.unwrap_or_default()),
        Subcommand::Heating => Params::Heating(file.heating.unwrap_or_default()),
        Subcommand::Ordering => Params::Ordering(file.ordering.unwrap_or_default()),
        Subcommand::Noise => Params::Noise(file.noise.unwrap_or_default()),
    };
    let seed = overrides.seed.or(file.seed.map(|s| s.0)).ok_or_else(|| {
        LabError::Config("missing key `seed`: runs are only reproducible with an explicit seed".into())
    })?;
    let output_dir =
        overrides.output_dir.clone().or(file.output_dir).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    let mut cfg = RunConfig { seed, output_dir, params };
    apply_trajectories(&mut cfg, overrides.trajectories)?;
    validate(&cfg)?;
    Ok(cfg)
}

pub(crate) fn apply_trajectories(cfg: &mut RunConfig, n: Option<usize>) -> Result<(), LabError> {
    let Some(n) = n else { return Ok(()) };
    let sub = cfg.subcommand();
    let slot = cfg
        .params
        .trajectories_mut()
        .ok_or_else(|| LabError::Config(format!("--trajectories does not apply to {sub}")))?;
    *slot = n;
    Ok(())
}

/// Canonical TOML form; [`parse_config`] inverts it exactly.
pub fn serialize_config(cfg: &RunConfig) -> String {
    to_toml(cfg, true)
}

/// [`serialize_config`] without `output_dir`: identical for runs of the same
/// experiment wherever they are written. Used for `config.toml` and the
/// config hash.
pub fn serialize_experiment(cfg: &RunConfig) -> String {
    to_toml(cfg, false)
}

fn to_toml(cfg: &RunConfig, with_output_dir: bool) -> String {
    let mut file = ConfigFile {
        subcommand: cfg.subcommand(),
        seed: Some(Seed(cfg.seed)),
        output_dir: with_output_dir.then(|| cfg.output_dir.clone()),
        collapse: None,
        epr: None,
        frame: None,
        mott: None,
        heating: None,
        ordering: None,
        noise: None,
    };
    match &cfg.params {
        Params::Collapse(p) => file.collapse = Some(p.clone()),
        Params::Epr(p) => file.epr = Some(p.clone()),
        Params::Frame(p) => file.frame = Some(p.clone()),
        Params::Mott(p) => file.mott = Some(p.clone()),
        Params::Heating(p) => file.heating = Some(p.clone()),
        Params::Ordering(p) => file.ordering = Some(p.clone()),
        Params::Noise(p) => file.noise = Some(p.clone()),
    }
    toml::to_string(&file).expect("config types always serialize")
}

fn bad(key: &str, msg: impl fmt::Display) -> LabError {
    LabError::Config(format!("key `{key}`: {msg}"))
}

fn positive(key: &str, x: f64, unit: &str) -> Result<(), LabError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(bad(key, format!("expected a positive quantity in {unit}, got {x:e}")))
    }
}

fn at_least_one(key: &str, n: usize) -> Result<(), LabError> {
    if n >= 1 {
        Ok(())
    } else {
        Err(bad(key, "must be at least 1"))
    }
}

/// Schema checks beyond types. Physics checks belong to the core and surface
/// as input errors at run time.
pub fn validate(cfg: &RunConfig) -> Result<(), LabError> {
    match &cfg.params {
        Params::Collapse(p) => {
            let dim = p.probabilities.len();
            if dim < 2 {
                return Err(bad("collapse.probabilities", "need at least two entries"));
            }
            if p.probabilities.iter().any(|&x| x.is_nan() || x < 0.0) {
                return Err(bad("collapse.probabilities", "entries must be non-negative"));
            }
            let sum: f64 = p.probabilities.iter().sum();
            if sum.is_nan() || (sum - 1.0).abs() >= 1e-12 {
                return Err(bad("collapse.probabilities", format!("must sum to 1, sum is {sum}")));
            }
            if p.collapse_operators.is_empty() {
                return Err(bad("collapse.collapse_operators", "need at least one operator"));
            }
            if let Some(op) = p.collapse_operators.iter().find(|op| op.len() != dim) {
                return Err(bad(
                    "collapse.collapse_operators",
                    format!("diagonal of length {} for dimension {dim}", op.len()),
                ));
            }
            if let Some(h) = &p.hamiltonian {
                if h.len() != dim || h.iter().any(|row| row.len() != dim) {
                    return Err(bad("collapse.hamiltonian", format!("expected {dim} rows of {dim} rates")));
                }
            }
            if p.gamma.is_some() && p.cell_size.is_some() {
                return Err(bad("collapse.gamma", "give either gamma or cell_size, not both"));
            }
            if let Some(g) = p.gamma {
                if !(g.0 >= 0.0 && g.0.is_finite()) {
                    return Err(bad("collapse.gamma", "expected a non-negative rate in 1/s"));
                }
            }
            if let Some(c) = p.cell_size {
                positive("collapse.cell_size", c.0, "m")?;
            }
            positive("collapse.r_c", p.r_c.0, "m")?;
            positive("collapse.dt", p.dt.0, "s")?;
            at_least_one("collapse.n_steps_max", p.n_steps_max)?;
            at_least_one("collapse.trajectories", p.trajectories)?;
            match (p.noise, p.t_c) {
                (NoiseChoice::Colored, None) => {
                    return Err(bad("collapse.t_c", "colored noise needs a correlation time in s"))
                }
                (NoiseChoice::Colored, Some(t)) => positive("collapse.t_c", t.0, "s")?,
                (NoiseChoice::White, Some(_)) => {
                    return Err(bad("collapse.t_c", "only meaningful with noise = \"colored\""))
                }
                (NoiseChoice::White, None) => {}
            }
            if !(p.collapse_threshold > 0.5 && p.collapse_threshold < 1.0) {
                return Err(bad("collapse.collapse_threshold", "must lie in (0.5, 1)"));
            }
        }
        Params::Epr(p) => {
            positive("epr.gamma", p.gamma.0, "1/s")?;
            positive("epr.dt", p.dt.0, "s")?;
            at_least_one("epr.trajectories", p.trajectories)?;
            at_least_one("epr.n_steps_max", p.n_steps_max)?;
        }
        Params::Frame(p) => {
            positive("frame.t_c", p.t_c.0, "s")?;
            positive("frame.dt", p.dt.0, "s")?;
            positive("frame.gamma", p.gamma.0, "1/s")?;
            at_least_one("frame.n_pairs", p.n_pairs)?;
            at_least_one("frame.n_steps_max", p.n_steps_max)?;
        }
        Params::Mott(p) => {
            positive("mott.k", p.k.0, "1/m")?;
            positive("mott.sigma", p.sigma.0, "m")?;
            if p.n_angles < 16 {
                return Err(bad("mott.n_angles", "need at least 16 angles"));
            }
            if !(p.cos_min > -1.0 && p.cos_min < 1.0) {
                return Err(bad("mott.cos_min", "must lie in (-1, 1)"));
            }
        }
        Params::Heating(p) => {
            positive("heating.lambda0", p.lambda0.0, "1/s")?;
            positive("heating.r_c", p.r_c.0, "m")?;
            positive("heating.v_s", p.v_s.0, "m/s")?;
            positive("heating.bound", p.bound.0, "1/s")?;
            if !(p.beta_max >= 0.0 && p.beta_max.is_finite()) {
                return Err(bad("heating.beta_max", "must be a finite non-negative number"));
            }
            if p.n_beta < 2 {
                return Err(bad("heating.n_beta", "need at least 2 grid points"));
            }
        }
        Params::Ordering(_) => {}
        Params::Noise(p) => {
            positive("noise.lambda0", p.lambda0.0, "1/s")?;
            positive("noise.t_c", p.t_c.0, "s")?;
            positive("noise.r_c", p.r_c.0, "m")?;
            positive("noise.dt", p.dt.0, "s")?;
            at_least_one("noise.n_steps", p.n_steps)?;
            at_least_one("noise.channels", p.channels)?;
            at_least_one("noise.trajectories", p.trajectories)?;
        }
    }
    Ok(())
}
