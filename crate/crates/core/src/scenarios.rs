//! Ready-made experiments: Stern-Gerlach collapse, EPR reduction through a
//! massive apparatus, and the rest-vs-boosted noise comparison.
//!
//! Basis conventions: spin up is index 0 of each qubit, and composite systems
//! are ordered `A ⊗ B ⊗ apparatus` (row-major, first factor slowest). The
//! apparatus is a single pointer whose collapse operator has eigenvalues
//! `±gap/2`, so the reduction rate grows with `gap²`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{
    ensemble_member, run_trajectory, run_with_noise, Calculus, CslConfig, EnsembleStats, NoiseSource,
};
use crate::hilbert::{ComplexStateVector, DenseOperator};
use crate::noise::{NoiseKind, NoiseSpectrum, NoiseTrajectory, SpectralDraw};
use crate::relativity::Boost;
use crate::rng::derive_seed;
use crate::{Error, Result};

fn pointer_operator(prefix_dim: usize, gap: f64) -> Result<DenseOperator> {
    let mut d = Vec::with_capacity(2 * prefix_dim);
    for _ in 0..prefix_dim {
        d.push(0.5 * gap);
        d.push(-0.5 * gap);
    }
    DenseOperator::diag(&d)
}

/// A spin measured by a pointer: `√p|↑⟩|p↑⟩ + √(1-p)|↓⟩|p↓⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SternGerlach {
    pub p_up: f64,
    pub gap: f64,
    pub gamma: f64,
    pub dt: f64,
    pub n_steps_max: usize,
}

impl SternGerlach {
    pub fn state(&self) -> Result<ComplexStateVector> {
        if !(0.0..=1.0).contains(&self.p_up) {
            return Err(Error::invalid("p_up must lie in [0, 1]"));
        }
        ComplexStateVector::from_real(&[self.p_up.sqrt(), 0.0, 0.0, (1.0 - self.p_up).sqrt()])
    }

    /// Outcome 0 is spin up.
    pub fn config(&self) -> Result<CslConfig> {
        if !(self.gap > 0.0) {
            return Err(Error::invalid("pointer gap must be positive"));
        }
        CslConfig::new(None, vec![pointer_operator(2, self.gap)?], self.gamma, self.dt, self.n_steps_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EprSetup {
    /// Eigenvalue separation of the apparatus collapse operator; at least 10.
    pub apparatus_mass_gap: f64,
    pub gamma: f64,
    pub dt: f64,
    pub n_steps_max: usize,
    pub collapse_threshold: f64,
}

impl Default for EprSetup {
    /// `γ·gap² = 1` and `γ·gap²·dt = 10⁻³`.
    fn default() -> Self {
        Self { apparatus_mass_gap: 100.0, gamma: 1e-4, dt: 1e-3, n_steps_max: 200_000, collapse_threshold: 1.0 - 1e-6 }
    }
}

impl EprSetup {
    pub fn config(&self) -> Result<CslConfig> {
        if !(self.apparatus_mass_gap >= 10.0) {
            return Err(Error::invalid("apparatus mass gap must be at least 10"));
        }
        CslConfig::new(
            None,
            vec![pointer_operator(4, self.apparatus_mass_gap)?],
            self.gamma,
            self.dt,
            self.n_steps_max,
        )?
        .with_collapse_threshold(self.collapse_threshold)
    }
}

const EPR_UP: usize = 2; // A↑ B↓ app↑
const EPR_DOWN: usize = 5; // A↓ B↑ app↓

/// `2^{-1/2}[|A↑⟩|B↓⟩|app↑⟩ - |A↓⟩|B↑⟩|app↓⟩]` in `A ⊗ B ⊗ apparatus` order.
pub fn build_epr_state() -> ComplexStateVector {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let mut amps = [0.0; 8];
    amps[EPR_UP] = h;
    amps[EPR_DOWN] = -h;
    ComplexStateVector::from_real(&amps).expect("fixed 8-dim state")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EprOutcome {
    /// A up, B down, pointer up.
    Up,
    /// A down, B up, pointer down.
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EprRecord {
    /// `None` when the run did not reduce within the horizon.
    pub outcome: Option<EprOutcome>,
    /// `⟨σz⟩` of each spin in the final state.
    pub a_spin: f64,
    pub b_spin: f64,
    pub collapse_time: Option<f64>,
    /// Overlap probability with the reduced state of the reported branch.
    pub fidelity: f64,
    pub final_norm: f64,
    pub seed: u64,
}

fn spin_z(psi: &ComplexStateVector, factor: usize) -> f64 {
    // factor 0 = A (stride 4), 1 = B (stride 2)
    let stride = if factor == 0 { 4 } else { 2 };
    psi.amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| if (i / stride) % 2 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}

fn epr_record(r: &crate::dynamics::TrajectoryRecord) -> EprRecord {
    let psi = &r.final_state;
    let outcome = r.outcome_index.map(|i| if i == 0 { EprOutcome::Up } else { EprOutcome::Down });
    let fidelity = match outcome {
        Some(EprOutcome::Up) => psi.amplitudes()[EPR_UP].norm_sqr(),
        Some(EprOutcome::Down) => psi.amplitudes()[EPR_DOWN].norm_sqr(),
        None => 0.0,
    };
    EprRecord {
        outcome,
        a_spin: spin_z(psi, 0),
        b_spin: spin_z(psi, 1),
        collapse_time: r.collapse_time,
        fidelity,
        final_norm: psi.norm(),
        seed: r.seed,
    }
}

/// One white-noise EPR reduction.
pub fn run_epr(setup: &EprSetup, seed: u64) -> Result<EprRecord> {
    let cfg = setup.config()?.with_trace_stride(0);
    Ok(epr_record(&run_trajectory(&cfg, &build_epr_state(), NoiseSource::White, seed)?))
}

/// Run `index` of an EPR ensemble under `master_seed`.
pub fn epr_member(config: &CslConfig, master_seed: u64, index: u64) -> Result<EprRecord> {
    Ok(epr_record(&ensemble_member(config, &build_epr_state(), NoiseSource::White, master_seed, index)?))
}

/// Rest-frame vs boosted-frame collapse runs sharing their randomness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameComparison {
    /// Boost speed, m/s, in `[0, c)`.
    pub boost_v: f64,
    pub base_seed: u64,
    pub n_pairs: usize,
    /// Only the correlation time matters; the noise strength is carried by
    /// `experiment.gamma`.
    pub spectrum: NoiseSpectrum,
    pub experiment: SternGerlach,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairResult {
    pub pair_index: usize,
    pub outcome_rest: Option<usize>,
    pub outcome_boosted: Option<usize>,
    pub collapse_time_rest: Option<f64>,
    pub collapse_time_boosted: Option<f64>,
}

impl PairResult {
    pub fn diverges(&self) -> bool {
        self.outcome_rest != self.outcome_boosted
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameResult {
    pub pairs: Vec<PairResult>,
    pub n_divergent_outcomes: usize,
    pub stats_rest: EnsembleStats,
    pub stats_boosted: EnsembleStats,
    /// Lorentz factor of the boost.
    pub gamma_boost: f64,
}

impl FrameComparison {
    fn validate(&self) -> Result<Boost> {
        if self.spectrum.kind() == NoiseKind::White {
            return Err(Error::Unsupported(
                "white noise is Lorentz invariant under the boost; a colored spectrum is required".into(),
            ));
        }
        if !(self.boost_v >= 0.0) {
            return Err(Error::invalid("boost speed must be non-negative"));
        }
        if self.n_pairs == 0 {
            return Err(Error::invalid("need at least one pair"));
        }
        Boost::new(self.boost_v)
    }

    /// The pair at `index`: one set of frequency-domain draws synthesized with
    /// the rest spectrum and with its correlation time dilated by the Lorentz
    /// factor.
    pub fn run_pair(&self, index: usize) -> Result<PairResult> {
        let boost = self.validate()?;
        let exp = &self.experiment;
        let cfg = exp.config()?.with_trace_stride(0);
        let psi0 = exp.state()?;
        let rest = NoiseSpectrum::gaussian_cutoff(1.0, self.spectrum.t_c(), self.spectrum.r_c())?;
        let moving = rest.dilated(boost.gamma())?;
        let seed = derive_seed(self.base_seed, index as u64);
        let draw = SpectralDraw::new(exp.n_steps_max, seed)?;
        let run = |spec: &NoiseSpectrum| -> Result<crate::dynamics::TrajectoryRecord> {
            let xi = draw.synthesize(spec, exp.dt)?;
            let inc = xi.into_iter().map(|x| x * exp.dt).collect();
            let tr = NoiseTrajectory::from_increments(1, exp.dt, inc, seed, NoiseKind::GaussianCutoff)?;
            run_with_noise(&cfg, &psi0, &tr, Some(Calculus::Stratonovich))
        };
        let a = run(&rest)?;
        let b = run(&moving)?;
        Ok(PairResult {
            pair_index: index,
            outcome_rest: a.outcome_index,
            outcome_boosted: b.outcome_index,
            collapse_time_rest: a.collapse_time,
            collapse_time_boosted: b.collapse_time,
        })
    }

    /// Assembles pair results (in pair-index order) into the summary.
    pub fn summarize(&self, pairs: Vec<PairResult>) -> Result<FrameResult> {
        let boost = self.validate()?;
        let exp = &self.experiment;
        let cfg = exp.config()?;
        let psi0 = exp.state()?;
        let born = cfg.outcome_probabilities(&psi0)?;
        let n_out = born.len();
        let tally = |boosted: bool| -> EnsembleStats {
            let mut counts = vec![0; n_out];
            let mut undecided = 0;
            let mut t_sum = 0.0;
            for p in &pairs {
                let (o, t) = if boosted {
                    (p.outcome_boosted, p.collapse_time_boosted)
                } else {
                    (p.outcome_rest, p.collapse_time_rest)
                };
                match o {
                    Some(i) => {
                        counts[i] += 1;
                        t_sum += t.unwrap_or(0.0);
                    }
                    None => undecided += 1,
                }
            }
            let decided = pairs.len() - undecided;
            EnsembleStats {
                n_traj: pairs.len(),
                outcome_counts: counts,
                undecided,
                mean_collapse_time: (decided > 0).then(|| t_sum / decided as f64),
                born_probabilities: born.clone(),
                norm_drift_max: 0.0,
            }
        };
        let stats_rest = tally(false);
        let stats_boosted = tally(true);
        Ok(FrameResult {
            n_divergent_outcomes: pairs.iter().filter(|p| p.diverges()).count(),
            pairs,
            stats_rest,
            stats_boosted,
            gamma_boost: boost.gamma(),
        })
    }
}

/// All pairs, sequentially.
pub fn frame_experiment(cmp: &FrameComparison) -> Result<FrameResult> {
    let pairs = (0..cmp.n_pairs).map(|i| cmp.run_pair(i)).collect::<Result<Vec<_>>>()?;
    cmp.summarize(pairs)
}

/// Divergence counts over a grid of correlation times and boost speeds.
pub fn divergence_sweep(base: &FrameComparison, t_cs: &[f64], speeds: &[f64]) -> Result<Vec<(f64, f64, usize)>> {
    let mut out = Vec::with_capacity(t_cs.len() * speeds.len());
    for &t_c in t_cs {
        let spectrum = NoiseSpectrum::gaussian_cutoff(1.0, t_c, base.spectrum.r_c())?;
        for &v in speeds {
            let cmp = FrameComparison { boost_v: v, spectrum, ..*base };
            out.push((t_c, v, frame_experiment(&cmp)?.n_divergent_outcomes));
        }
    }
    Ok(out)
}

/// Mean collapse time of the Stern-Gerlach experiment for each correlation
/// time, with the number of undecided runs.
pub fn collapse_time_sweep(
    experiment: &SternGerlach,
    t_cs: &[f64],
    n_traj: usize,
    master_seed: u64,
) -> Result<Vec<(f64, Option<f64>, usize)>> {
    let cfg = experiment.config()?.with_trace_stride(0);
    let psi0 = experiment.state()?;
    t_cs.iter()
        .map(|&t_c| {
            let recs = (0..n_traj as u64)
                .map(|i| ensemble_member(&cfg, &psi0, NoiseSource::Colored { t_c }, master_seed, i))
                .collect::<Result<Vec<_>>>()?;
            let s = EnsembleStats::aggregate(&cfg, &psi0, &recs)?;
            Ok((t_c, s.mean_collapse_time, s.undecided))
        })
        .collect()
}
