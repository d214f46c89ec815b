//! Norm-preserving nonlinear collapse dynamics for finite-dimensional systems.
//!
//! The state obeys (ħ = 1)
//!
//! ```text
//! d|ψ⟩ = [-iH dt + √γ Σᵢ (Mᵢ - ⟨Mᵢ⟩) dBᵢ - (γ/2) Σᵢ (Mᵢ - ⟨Mᵢ⟩)² dt] |ψ⟩
//! ```
//!
//! with one independent noise channel per collapse operator `Mᵢ`.
//!
//! # Integrator
//!
//! A plain Euler-Maruyama update changes the norm by `γ Var(M) (dB² - dt)` per
//! step, which is typically `10⁻⁴` and cannot be renormalized away without
//! biasing the statistics. The integrator here takes the same Euler-Maruyama
//! increment, projects it onto the tangent space of the unit sphere at `ψ`
//! (`v ← v - Re⟨ψ|v⟩ ψ`) and moves along the great circle:
//!
//! ```text
//! ψ' = cos|v| ψ + sin|v| v/|v|
//! ```
//!
//! The `-|v|²/2 ψ` term of the cosine restores exactly the Itô correction that
//! the projection removed, so the scheme is a weak first-order discretization
//! of the equation above whose norm defect is pure rounding. An explicit
//! renormalization still follows every step and its size is monitored.
//!
//! # Colored noise
//!
//! Smooth noise realizations obey ordinary calculus, and substituting them
//! into the Itô drift adds a spurious `4γp(1-p)(1-2p)` drift to outcome
//! probabilities. Colored runs therefore use the Stratonovich form of the
//! drift, `-γ[(M - ⟨M⟩)² - Var M]`, which is the Wong-Zakai limit of the same
//! equation and keeps the occupation probabilities martingales.
//!
//! # Outcomes
//!
//! Outcomes are the joint eigenspaces of the collapse operators, numbered by
//! the lowest computational-basis state each one contains. A trajectory is
//! decided once one eigenspace holds probability above the collapse threshold
//! for [`HOLD_STEPS`] consecutive steps; the collapse time is the start of that
//! streak.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::hilbert::{joint_eigenspaces, ComplexStateVector, DenseOperator, JointEigenspace};
use crate::noise::{self, NoiseKind, NoiseSpectrum, NoiseTrajectory};
use crate::rng::{derive_seed, GaussianStream};
use crate::{Complex, Error, Result};

/// Consecutive steps an eigenspace must stay above threshold.
pub const HOLD_STEPS: usize = 10;

const COMMUTATOR_TOL: f64 = 1e-10;
const MAX_ANGLE: f64 = 0.5;

/// `γ = 8π^{3/2} r_c³ λ / V_cell`: the smeared coupling per lattice cell of
/// volume `cell_volume`.
pub fn csl_coupling(lambda: f64, r_c: f64, cell_volume: f64) -> Result<f64> {
    if !(lambda >= 0.0 && r_c > 0.0 && cell_volume > 0.0) {
        return Err(Error::invalid("coupling needs lambda >= 0, r_c > 0, cell volume > 0"));
    }
    let pi = core::f64::consts::PI;
    Ok(8.0 * pi.powf(1.5) * r_c.powi(3) * lambda / cell_volume)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Calculus {
    Ito,
    Stratonovich,
}

impl Calculus {
    fn drift_factor(self) -> f64 {
        match self {
            Calculus::Ito => 0.5,
            Calculus::Stratonovich => 1.0,
        }
    }

    /// Ito for white noise, Stratonovich for smooth noise.
    pub fn for_kind(kind: NoiseKind) -> Self {
        match kind {
            NoiseKind::White => Calculus::Ito,
            NoiseKind::GaussianCutoff => Calculus::Stratonovich,
        }
    }
}

/// Noise driving a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSource {
    White,
    /// Gaussian-cutoff noise with unit integrated correlation, so the
    /// increments have the same long-time variance as white noise.
    Colored {
        t_c: f64,
    },
}

#[derive(Debug, Clone)]
enum OpForm {
    Diagonal(Vec<f64>),
    Dense(DenseOperator),
}

impl OpForm {
    fn new(op: &DenseOperator) -> Self {
        if op.is_diagonal() {
            OpForm::Diagonal((0..op.dim()).map(|i| op.get(i, i).re).collect())
        } else {
            OpForm::Dense(op.clone())
        }
    }

    fn apply(&self, x: &[Complex], out: &mut [Complex]) {
        match self {
            OpForm::Diagonal(d) => {
                for ((o, xi), di) in out.iter_mut().zip(x).zip(d) {
                    *o = xi * di;
                }
            }
            OpForm::Dense(m) => m.apply_into(x, out),
        }
    }
}

/// Validated model and integration settings.
#[derive(Debug, Clone)]
pub struct CslConfig {
    dim: usize,
    hamiltonian: Option<DenseOperator>,
    collapse_ops: Vec<DenseOperator>,
    gamma: f64,
    dt: f64,
    n_steps_max: usize,
    collapse_threshold: f64,
    renorm_tolerance: f64,
    trace_stride: usize,
    outcomes: Vec<JointEigenspace>,
    forms: Vec<OpForm>,
    h_form: Option<OpForm>,
}

impl CslConfig {
    /// `hamiltonian = None` means `H = 0`. Collapse operators must be Hermitian
    /// and commute pairwise.
    pub fn new(
        hamiltonian: Option<DenseOperator>,
        collapse_ops: Vec<DenseOperator>,
        gamma: f64,
        dt: f64,
        n_steps_max: usize,
    ) -> Result<Self> {
        let Some(first) = collapse_ops.first() else {
            return Err(Error::invalid("need at least one collapse operator"));
        };
        let dim = first.dim();
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::invalid("gamma must be finite and non-negative"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt must be positive and finite"));
        }
        if n_steps_max == 0 {
            return Err(Error::invalid("n_steps_max must be at least 1"));
        }
        for op in collapse_ops.iter().chain(hamiltonian.iter()) {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: op.dim() });
            }
            if !op.is_hermitian() {
                return Err(Error::NotHermitian { residual: op.hermitian_residual() });
            }
        }
        for (i, a) in collapse_ops.iter().enumerate() {
            for b in &collapse_ops[i + 1..] {
                let residual = a.commutator_norm(b)?;
                if residual >= COMMUTATOR_TOL {
                    return Err(Error::NonCommuting { residual });
                }
            }
        }
        let mut outcomes = joint_eigenspaces(&collapse_ops)?;
        outcomes.sort_by_key(|s| lowest_basis_index(s, dim));
        let forms = collapse_ops.iter().map(OpForm::new).collect();
        let h_form = hamiltonian.as_ref().filter(|h| !h.is_zero()).map(OpForm::new);
        Ok(Self {
            dim,
            hamiltonian,
            collapse_ops,
            gamma,
            dt,
            n_steps_max,
            collapse_threshold: 1.0 - 1e-6,
            renorm_tolerance: 1e-8,
            trace_stride: 1,
            outcomes,
            forms,
            h_form,
        })
    }

    pub fn with_collapse_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(threshold > 0.5 && threshold < 1.0) {
            return Err(Error::invalid("collapse threshold must lie in (0.5, 1)"));
        }
        self.collapse_threshold = threshold;
        Ok(self)
    }

    pub fn with_renorm_tolerance(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::invalid("renormalization tolerance must be positive"));
        }
        self.renorm_tolerance = tol;
        Ok(self)
    }

    /// Record expectation traces every `stride` steps; 0 disables traces.
    pub fn with_trace_stride(mut self, stride: usize) -> Self {
        self.trace_stride = stride;
        self
    }

    pub fn with_n_steps_max(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n_steps_max must be at least 1"));
        }
        self.n_steps_max = n;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> Option<&DenseOperator> {
        self.hamiltonian.as_ref()
    }

    pub fn collapse_ops(&self) -> &[DenseOperator] {
        &self.collapse_ops
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps_max(&self) -> usize {
        self.n_steps_max
    }

    pub fn collapse_threshold(&self) -> f64 {
        self.collapse_threshold
    }

    pub fn renorm_tolerance(&self) -> f64 {
        self.renorm_tolerance
    }

    pub fn trace_stride(&self) -> usize {
        self.trace_stride
    }

    /// Joint eigenspaces in outcome order.
    pub fn outcomes(&self) -> &[JointEigenspace] {
        &self.outcomes
    }

    /// `⟨ψ|Pᵢ|ψ⟩` for every outcome `i`.
    pub fn outcome_probabilities(&self, psi: &ComplexStateVector) -> Result<Vec<f64>> {
        if psi.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: psi.dim() });
        }
        Ok(self.outcomes.iter().map(|s| s.projector_expectation(psi.amplitudes())).collect())
    }
}

fn lowest_basis_index(space: &JointEigenspace, dim: usize) -> usize {
    (0..dim).find(|&i| space.basis.iter().map(|b| b.amplitudes()[i].norm_sqr()).sum::<f64>() > 1e-6).unwrap_or(dim)
}

/// Stateful stepper with preallocated work buffers.
#[derive(Debug, Clone)]
pub struct Integrator<'a> {
    config: &'a CslConfig,
    calculus: Calculus,
    work: Vec<Complex>,
    d: Vec<Complex>,
    v: Vec<Complex>,
}

impl<'a> Integrator<'a> {
    pub fn new(config: &'a CslConfig, calculus: Calculus) -> Self {
        let n = config.dim;
        Self {
            config,
            calculus,
            work: vec![Complex::new(0.0, 0.0); n],
            d: vec![Complex::new(0.0, 0.0); n],
            v: vec![Complex::new(0.0, 0.0); n],
        }
    }

    pub fn calculus(&self) -> Calculus {
        self.calculus
    }

    /// Advances `psi` by one step in place with one increment per collapse
    /// operator. Returns the pre-renormalization norm defect `|‖ψ'‖² - 1|`.
    pub fn step(&mut self, psi: &mut ComplexStateVector, increments: &[f64]) -> Result<f64> {
        let cfg = self.config;
        if psi.dim() != cfg.dim {
            return Err(Error::DimensionMismatch { expected: cfg.dim, found: psi.dim() });
        }
        if increments.len() != cfg.forms.len() {
            return Err(Error::DimensionMismatch { expected: cfg.forms.len(), found: increments.len() });
        }
        let dt = cfg.dt;
        let sqrt_g = cfg.gamma.sqrt();
        let drift = self.calculus.drift_factor() * cfg.gamma * dt;
        let psi_a = psi.amplitudes_mut();

        match &cfg.h_form {
            Some(h) => {
                h.apply(psi_a, &mut self.work);
                for (v, w) in self.v.iter_mut().zip(&self.work) {
                    *v = Complex::new(w.im * dt, -w.re * dt);
                }
            }
            None => self.v.iter_mut().for_each(|v| *v = Complex::new(0.0, 0.0)),
        }

        if cfg.gamma > 0.0 {
            for (form, &db) in cfg.forms.iter().zip(increments) {
                form.apply(psi_a, &mut self.work);
                let mean: f64 = psi_a.iter().zip(&self.work).map(|(p, w)| (p.conj() * w).re).sum();
                for ((d, w), p) in self.d.iter_mut().zip(&self.work).zip(psi_a.iter()) {
                    *d = w - p * mean;
                }
                form.apply(&self.d, &mut self.work);
                let a = sqrt_g * db;
                for ((v, d), w) in self.v.iter_mut().zip(&self.d).zip(&self.work) {
                    let d2 = w - d * mean;
                    *v += d * a - d2 * drift;
                }
            }
        }

        let radial: f64 = psi_a.iter().zip(&self.v).map(|(p, v)| (p.conj() * v).re).sum();
        let mut theta2 = 0.0;
        for (v, p) in self.v.iter_mut().zip(psi_a.iter()) {
            *v -= p * radial;
            theta2 += v.norm_sqr();
        }
        let theta = theta2.sqrt();
        if theta > MAX_ANGLE {
            return Err(Error::StepSize { detail: format!("state rotated by {theta:.3} rad in one step") });
        }
        if theta > 0.0 {
            let (c, s) = (theta.cos(), theta.sin() / theta);
            for (p, v) in psi_a.iter_mut().zip(&self.v) {
                *p = *p * c + v * s;
            }
        }
        let norm2: f64 = psi_a.iter().map(|p| p.norm_sqr()).sum();
        let defect = (norm2 - 1.0).abs();
        if defect > 100.0 * cfg.renorm_tolerance {
            return Err(Error::StepSize { detail: format!("norm changed by {defect:e}") });
        }
        let inv = 1.0 / norm2.sqrt();
        psi_a.iter_mut().for_each(|p| *p *= inv);
        Ok(defect)
    }
}

/// One Ito step of a normalized state; see [`Integrator::step`].
pub fn step(psi: &ComplexStateVector, config: &CslConfig, increments: &[f64]) -> Result<ComplexStateVector> {
    let mut out = psi.clone();
    Integrator::new(config, Calculus::Ito).step(&mut out, increments)?;
    Ok(out)
}

/// Result of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    /// Sample times of the traces, s (internal units).
    pub times: Vec<f64>,
    /// `⟨Mᵢ⟩` at each sample time, one series per collapse operator.
    pub observable_traces: Vec<Vec<f64>>,
    /// Pre-renormalization norm defect at each sample time (0 at t = 0).
    pub norm_trace: Vec<f64>,
    pub final_state: ComplexStateVector,
    pub outcome_index: Option<usize>,
    pub collapse_time: Option<f64>,
    pub steps_executed: usize,
    pub norm_drift_max: f64,
    pub seed: u64,
}

enum Feed {
    White(Vec<GaussianStream>, f64),
    Fixed(NoiseTrajectory),
}

impl Feed {
    fn fill(&mut self, step: usize, out: &mut [f64]) {
        match self {
            Feed::White(streams, sd) => {
                for (o, g) in out.iter_mut().zip(streams.iter_mut()) {
                    *o = *sd * g.normal();
                }
            }
            Feed::Fixed(tr) => {
                for (c, o) in out.iter_mut().enumerate() {
                    *o = tr.increment(c, step);
                }
            }
        }
    }
}

fn feed_for(config: &CslConfig, source: NoiseSource, seed: u64) -> Result<(Feed, Calculus)> {
    let n_ch = config.forms.len();
    match source {
        NoiseSource::White => {
            let streams = (0..n_ch).map(|c| GaussianStream::new(derive_seed(seed, c as u64))).collect();
            Ok((Feed::White(streams, config.dt.sqrt()), Calculus::Ito))
        }
        NoiseSource::Colored { t_c } => {
            let spectrum = NoiseSpectrum::gaussian_cutoff(1.0, t_c, 1.0)?;
            let tr = noise::sample_colored(&spectrum, n_ch, config.n_steps_max, config.dt, seed)?;
            Ok((Feed::Fixed(tr), Calculus::Stratonovich))
        }
    }
}

/// Runs one trajectory from `psi0`, drawing noise from `source` with `seed`.
///
/// White increments for channel `c` come from the stream
/// `derive_seed(seed, c)`, matching [`noise::sample_white`] with the same seed.
pub fn run_trajectory(
    config: &CslConfig,
    psi0: &ComplexStateVector,
    source: NoiseSource,
    seed: u64,
) -> Result<TrajectoryRecord> {
    let (feed, calculus) = feed_for(config, source, seed)?;
    simulate(config, psi0, feed, calculus, seed, config.trace_stride)
}

/// Runs one trajectory on a precomputed noise realization; the calculus follows
/// the noise kind unless overridden.
pub fn run_with_noise(
    config: &CslConfig,
    psi0: &ComplexStateVector,
    noise: &NoiseTrajectory,
    calculus: Option<Calculus>,
) -> Result<TrajectoryRecord> {
    if noise.n_channels() != config.forms.len() {
        return Err(Error::DimensionMismatch { expected: config.forms.len(), found: noise.n_channels() });
    }
    if noise.dt() != config.dt {
        return Err(Error::invalid("noise dt differs from configured dt"));
    }
    let cfg;
    let config = if noise.n_steps() < config.n_steps_max {
        cfg = config.clone().with_n_steps_max(noise.n_steps())?;
        &cfg
    } else {
        config
    };
    let calculus = calculus.unwrap_or(Calculus::for_kind(noise.kind()));
    simulate(config, psi0, Feed::Fixed(noise.clone()), calculus, noise.seed(), config.trace_stride)
}

fn simulate(
    config: &CslConfig,
    psi0: &ComplexStateVector,
    mut feed: Feed,
    calculus: Calculus,
    seed: u64,
    stride: usize,
) -> Result<TrajectoryRecord> {
    if psi0.dim() != config.dim {
        return Err(Error::DimensionMismatch { expected: config.dim, found: psi0.dim() });
    }
    if (psi0.norm_sqr() - 1.0).abs() > 1e-10 {
        return Err(Error::invalid("initial state must be normalized"));
    }
    let mut psi = psi0.clone();
    let mut integ = Integrator::new(config, calculus);
    let mut inc = vec![0.0; config.forms.len()];
    let mut times = Vec::new();
    let mut traces: Vec<Vec<f64>> = vec![Vec::new(); config.forms.len()];
    let mut norm_trace = Vec::new();
    let mut work = vec![Complex::new(0.0, 0.0); config.dim];
    let mut record = |step: usize, psi: &ComplexStateVector, defect: f64, work: &mut [Complex]| {
        if stride == 0 || !step.is_multiple_of(stride) {
            return;
        }
        times.push(step as f64 * config.dt);
        norm_trace.push(defect);
        for (form, tr) in config.forms.iter().zip(traces.iter_mut()) {
            form.apply(psi.amplitudes(), work);
            tr.push(psi.amplitudes().iter().zip(work.iter()).map(|(p, w)| (p.conj() * w).re).sum());
        }
    };

    let mut streak: Option<(usize, usize)> = None; // (outcome, first step)
    let mut drift_max: f64 = 0.0;
    let mut outcome = None;
    let mut steps = 0;
    record(0, &psi, 0.0, &mut work);
    loop {
        let leader =
            config.outcomes.iter().position(|s| s.projector_expectation(psi.amplitudes()) >= config.collapse_threshold);
        streak = match (leader, streak) {
            (Some(i), Some((j, start))) if i == j => Some((j, start)),
            (Some(i), _) => Some((i, steps)),
            (None, _) => None,
        };
        if let Some((i, start)) = streak {
            if steps + 1 - start >= HOLD_STEPS {
                outcome = Some((i, start));
                break;
            }
        }
        if steps == config.n_steps_max {
            break;
        }
        feed.fill(steps, &mut inc);
        let defect = integ.step(&mut psi, &inc)?;
        drift_max = drift_max.max(defect);
        steps += 1;
        record(steps, &psi, defect, &mut work);
    }
    Ok(TrajectoryRecord {
        times,
        observable_traces: traces,
        norm_trace,
        final_state: psi,
        outcome_index: outcome.map(|o| o.0),
        collapse_time: outcome.map(|o| o.1 as f64 * config.dt),
        steps_executed: steps,
        norm_drift_max: drift_max,
        seed,
    })
}

/// Seed of trajectory `index` in an ensemble.
pub fn trajectory_seed(master_seed: u64, index: u64) -> u64 {
    derive_seed(master_seed, index)
}

/// Trajectory `index` of an ensemble, without traces. Members are independent
/// and may be computed in any order.
pub fn ensemble_member(
    config: &CslConfig,
    psi0: &ComplexStateVector,
    source: NoiseSource,
    master_seed: u64,
    index: u64,
) -> Result<TrajectoryRecord> {
    let seed = trajectory_seed(master_seed, index);
    let (feed, calculus) = feed_for(config, source, seed)?;
    simulate(config, psi0, feed, calculus, seed, 0)
}

/// Aggregate outcome statistics of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub n_traj: usize,
    /// Count per outcome index.
    pub outcome_counts: Vec<usize>,
    /// Trajectories that did not collapse within the horizon.
    pub undecided: usize,
    /// Mean collapse time over decided trajectories.
    pub mean_collapse_time: Option<f64>,
    /// `⟨ψ₀|Pᵢ|ψ₀⟩` per outcome.
    pub born_probabilities: Vec<f64>,
    pub norm_drift_max: f64,
}

impl EnsembleStats {
    /// Aggregates records given in trajectory-index order.
    pub fn aggregate(config: &CslConfig, psi0: &ComplexStateVector, records: &[TrajectoryRecord]) -> Result<Self> {
        let born_probabilities = config.outcome_probabilities(psi0)?;
        let mut outcome_counts = vec![0; born_probabilities.len()];
        let mut undecided = 0;
        let mut t_sum = 0.0;
        let mut drift: f64 = 0.0;
        for r in records {
            match r.outcome_index {
                Some(i) => outcome_counts[i] += 1,
                None => undecided += 1,
            }
            t_sum += r.collapse_time.unwrap_or(0.0);
            drift = drift.max(r.norm_drift_max);
        }
        let decided = records.len() - undecided;
        Ok(Self {
            n_traj: records.len(),
            outcome_counts,
            undecided,
            mean_collapse_time: (decided > 0).then(|| t_sum / decided as f64),
            born_probabilities,
            norm_drift_max: drift,
        })
    }

    /// Observed frequency of outcome `i` among all trajectories.
    pub fn frequency(&self, i: usize) -> f64 {
        self.outcome_counts[i] as f64 / self.n_traj as f64
    }
}

/// Sequential ensemble of `n_traj` trajectories with seeds derived from
/// `master_seed`.
pub fn run_ensemble(
    config: &CslConfig,
    psi0: &ComplexStateVector,
    source: NoiseSource,
    n_traj: usize,
    master_seed: u64,
) -> Result<EnsembleStats> {
    if n_traj == 0 {
        return Err(Error::invalid("need at least one trajectory"));
    }
    let records = (0..n_traj as u64)
        .map(|i| ensemble_member(config, psi0, source, master_seed, i))
        .collect::<Result<Vec<_>>>()?;
    EnsembleStats::aggregate(config, psi0, &records)
}
