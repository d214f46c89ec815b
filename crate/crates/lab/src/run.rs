//! Subcommand runners. Each turns a [`RunConfig`] into in-memory data files;
//! writing them is left to [`crate::output::write_run`].
//!
//! Ensemble members depend only on the master seed and their index, so the
//! parallel and sequential executors produce identical files.

use rayon::prelude::*;
use serde::Serialize;

use csl_core::dynamics::{
    csl_coupling, ensemble_member, run_trajectory, trajectory_seed, CslConfig, EnsembleStats, NoiseSource,
    TrajectoryRecord,
};
use csl_core::heating::{self, bound_check, threshold_beta, PhononDispersion};
use csl_core::hilbert::{ComplexStateVector, DenseOperator};
use csl_core::mott::{self, AmplitudeForm, MottConfig, MottQuadrature};
use csl_core::noise::{self, autocovariance, NoiseSpectrum};
use csl_core::physconst::constants;
use csl_core::relativity::{self, Boost, EffectiveVelocity, Event, Ordering};
use csl_core::rng::derive_seed;
use csl_core::scenarios::{epr_member, EprOutcome, EprRecord, EprSetup, FrameComparison, SternGerlach};

use crate::config::{
    CollapseParams, EprParams, FrameParams, HeatingParams, MottParams, NoiseChoice, NoiseParams, OrderingParams,
    Params, RunConfig,
};
use crate::error::LabError;
use crate::output::{floats, fmt_f64, fmt_opt, json_bytes, opt, Artifacts, Csv, F};

type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

fn map_indices<T, G>(n: usize, exec: Exec, f: G) -> Result<Vec<T>>
where
    T: Send,
    G: Fn(usize) -> csl_core::Result<T> + Sync,
{
    let out = match exec {
        Exec::Sequential => (0..n).map(&f).collect::<csl_core::Result<Vec<T>>>(),
        Exec::Parallel => (0..n).into_par_iter().map(&f).collect::<csl_core::Result<Vec<T>>>(),
    };
    Ok(out?)
}

/// Runs the configured experiment.
pub fn run(cfg: &RunConfig, exec: Exec) -> Result<Artifacts> {
    match &cfg.params {
        Params::Collapse(p) => collapse(p, cfg.seed, exec),
        Params::Epr(p) => epr(p, cfg.seed, exec),
        Params::Frame(p) => frame(p, cfg.seed, exec),
        Params::Mott(p) => mott(p, exec),
        Params::Heating(p) => heating(p, exec),
        Params::Ordering(p) => ordering(p),
        Params::Noise(p) => noise(p, cfg.seed, exec),
    }
}

/// Collapse rate: explicit, derived from `lambda`, `r_c` and the cell size, or
/// 1/s.
pub fn collapse_gamma(p: &CollapseParams) -> Result<f64> {
    Ok(match (p.gamma, p.cell_size) {
        (Some(g), _) => g.si(),
        (None, Some(cell)) => csl_coupling(p.lambda.si(), p.r_c.si(), cell.si().powi(3))?,
        (None, None) => 1.0,
    })
}

pub fn collapse_setup(p: &CollapseParams) -> Result<(CslConfig, ComplexStateVector, NoiseSource)> {
    let ops = p.collapse_operators.iter().map(|d| DenseOperator::diag(d)).collect::<csl_core::Result<Vec<_>>>()?;
    let h = match &p.hamiltonian {
        Some(rows) => {
            let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x.si()).collect()).collect();
            let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
            Some(DenseOperator::from_real_rows(&refs)?)
        }
        None => None,
    };
    let cfg = CslConfig::new(h, ops, collapse_gamma(p)?, p.dt.si(), p.n_steps_max)?
        .with_collapse_threshold(p.collapse_threshold)?;
    let amps: Vec<f64> = p.probabilities.iter().map(|x| x.sqrt()).collect();
    let psi0 = ComplexStateVector::from_real(&amps)?;
    let source = match (p.noise, p.t_c) {
        (NoiseChoice::Colored, Some(t)) => NoiseSource::Colored { t_c: t.si() },
        _ => NoiseSource::White,
    };
    Ok((cfg, psi0, source))
}

#[derive(Serialize)]
struct CollapseSummary {
    n_traj: usize,
    seed: u64,
    gamma: F,
    dt: F,
    outcome_counts: Vec<usize>,
    frequencies: Vec<F>,
    born_probabilities: Vec<F>,
    undecided: usize,
    mean_collapse_time: Option<F>,
    norm_drift_max: F,
}

fn collapse(p: &CollapseParams, seed: u64, exec: Exec) -> Result<Artifacts> {
    let (cfg, psi0, source) = collapse_setup(p)?;
    let quiet = cfg.clone().with_trace_stride(0);
    let traced = cfg.clone().with_trace_stride(p.trace_stride);
    let n_traced = p.traces.min(p.trajectories);
    let records: Vec<TrajectoryRecord> = map_indices(p.trajectories, exec, |j| {
        if j < n_traced && p.trace_stride > 0 {
            run_trajectory(&traced, &psi0, source, trajectory_seed(seed, j as u64))
        } else {
            ensemble_member(&quiet, &psi0, source, seed, j as u64)
        }
    })?;
    let stats = EnsembleStats::aggregate(&cfg, &psi0, &records)?;

    let mut art = Artifacts::default();
    let mut csv = Csv::new(&["trajectory", "seed", "outcome", "collapse_time", "steps", "norm_drift_max"]);
    for (j, r) in records.iter().enumerate() {
        csv.row(&[
            j.to_string(),
            r.seed.to_string(),
            r.outcome_index.map(|i| i.to_string()).unwrap_or_default(),
            fmt_opt(r.collapse_time),
            r.steps_executed.to_string(),
            fmt_f64(r.norm_drift_max),
        ]);
    }
    art.push("outcomes.csv", csv.into_bytes());

    for (j, r) in records.iter().enumerate().take(n_traced) {
        if r.times.is_empty() {
            continue;
        }
        let mut header = vec!["time".to_string()];
        header.extend((0..r.observable_traces.len()).map(|c| format!("expect_{c}")));
        header.push("norm_drift".into());
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut t = Csv::new(&header_refs);
        for (k, time) in r.times.iter().enumerate() {
            let mut row = vec![fmt_f64(*time)];
            row.extend(r.observable_traces.iter().map(|tr| fmt_f64(tr[k])));
            row.push(fmt_f64(r.norm_trace[k]));
            t.row(&row);
        }
        art.push(format!("trace_{j}.csv"), t.into_bytes());
    }

    let frequencies: Vec<f64> = (0..stats.outcome_counts.len()).map(|i| stats.frequency(i)).collect();
    let summary = CollapseSummary {
        n_traj: stats.n_traj,
        seed,
        gamma: F(cfg.gamma()),
        dt: F(cfg.dt()),
        outcome_counts: stats.outcome_counts.clone(),
        frequencies: floats(&frequencies),
        born_probabilities: floats(&stats.born_probabilities),
        undecided: stats.undecided,
        mean_collapse_time: opt(stats.mean_collapse_time),
        norm_drift_max: F(stats.norm_drift_max),
    };
    art.push("summary.json", json_bytes(&summary));
    art.report_line(format!("collapse: {} trajectories, {} undecided", stats.n_traj, stats.undecided));
    for (i, (f, b)) in frequencies.iter().zip(&stats.born_probabilities).enumerate() {
        art.report_line(format!("  outcome {i}: frequency {f:.4}, Born {b:.4}"));
    }
    art.report_line(format!("  max norm defect {:.3e}", stats.norm_drift_max));
    Ok(art)
}

pub fn epr_setup(p: &EprParams) -> EprSetup {
    EprSetup {
        apparatus_mass_gap: p.apparatus_mass_gap,
        gamma: p.gamma.si(),
        dt: p.dt.si(),
        n_steps_max: p.n_steps_max,
        collapse_threshold: p.collapse_threshold,
    }
}

/// Completed with both spins definite and opposite.
pub fn anticorrelated(r: &EprRecord) -> bool {
    r.outcome.is_some() && r.a_spin.abs() > 0.99 && r.b_spin.abs() > 0.99 && r.a_spin * r.b_spin < 0.0
}

#[derive(Serialize)]
struct EprSummary {
    n_runs: usize,
    seed: u64,
    n_completed: usize,
    n_anticorrelated: usize,
    n_up: usize,
    n_down: usize,
    fraction_up: Option<F>,
    mean_collapse_time: Option<F>,
    min_fidelity: Option<F>,
}

fn epr(p: &EprParams, seed: u64, exec: Exec) -> Result<Artifacts> {
    let cfg = epr_setup(p).config()?.with_trace_stride(0);
    let recs: Vec<EprRecord> = map_indices(p.trajectories, exec, |j| epr_member(&cfg, seed, j as u64))?;

    let mut csv = Csv::new(&["run", "seed", "outcome", "a_spin", "b_spin", "collapse_time", "fidelity"]);
    for (j, r) in recs.iter().enumerate() {
        let outcome = match r.outcome {
            Some(EprOutcome::Up) => "up",
            Some(EprOutcome::Down) => "down",
            None => "",
        };
        csv.row(&[
            j.to_string(),
            r.seed.to_string(),
            outcome.to_string(),
            fmt_f64(r.a_spin),
            fmt_f64(r.b_spin),
            fmt_opt(r.collapse_time),
            fmt_f64(r.fidelity),
        ]);
    }
    let done: Vec<&EprRecord> = recs.iter().filter(|r| r.outcome.is_some()).collect();
    let n_up = done.iter().filter(|r| r.outcome == Some(EprOutcome::Up)).count();
    let n_anti = done.iter().filter(|r| anticorrelated(r)).count();
    let mean_t = (!done.is_empty())
        .then(|| done.iter().map(|r| r.collapse_time.unwrap_or(0.0)).sum::<f64>() / done.len() as f64);
    let summary = EprSummary {
        n_runs: recs.len(),
        seed,
        n_completed: done.len(),
        n_anticorrelated: n_anti,
        n_up,
        n_down: done.len() - n_up,
        fraction_up: (!done.is_empty()).then(|| F(n_up as f64 / done.len() as f64)),
        mean_collapse_time: opt(mean_t),
        min_fidelity: done.iter().map(|r| r.fidelity).reduce(f64::min).map(F),
    };
    let mut art = Artifacts::default();
    art.push("epr.csv", csv.into_bytes());
    art.push("summary.json", json_bytes(&summary));
    art.report_line(format!(
        "epr: {} runs, {} completed, {} anti-correlated, {} up",
        recs.len(),
        done.len(),
        n_anti,
        n_up
    ));
    Ok(art)
}

pub fn frame_comparison(p: &FrameParams, seed: u64) -> Result<FrameComparison> {
    Ok(FrameComparison {
        boost_v: p.boost_v.si(),
        base_seed: seed,
        n_pairs: p.n_pairs,
        spectrum: NoiseSpectrum::gaussian_cutoff(1.0, p.t_c.si(), constants().r_c_standard)?,
        experiment: SternGerlach {
            p_up: p.p_up,
            gap: p.gap,
            gamma: p.gamma.si(),
            dt: p.dt.si(),
            n_steps_max: p.n_steps_max,
        },
    })
}

/// `(n_rest - n_boosted) / √(2 n p (1-p))` for outcome 0, with `p` the Born
/// probability; the spread of a difference of two binomial counts.
pub fn histogram_z(n: usize, p: f64, rest: usize, boosted: usize) -> f64 {
    let sd = (2.0 * n as f64 * p * (1.0 - p)).sqrt();
    (rest as f64 - boosted as f64) / sd
}

#[derive(Serialize)]
struct FrameSummary {
    n_pairs: usize,
    seed: u64,
    boost_v: F,
    gamma_boost: F,
    t_c: F,
    n_divergent_outcomes: usize,
    outcome_counts_rest: Vec<usize>,
    outcome_counts_boosted: Vec<usize>,
    undecided_rest: usize,
    undecided_boosted: usize,
    born_probabilities: Vec<F>,
    histogram_z: F,
}

fn frame(p: &FrameParams, seed: u64, exec: Exec) -> Result<Artifacts> {
    let cmp = frame_comparison(p, seed)?;
    let pairs = map_indices(p.n_pairs, exec, |i| cmp.run_pair(i))?;
    let res = cmp.summarize(pairs)?;
    let mut csv =
        Csv::new(&["pair_index", "outcome_rest", "outcome_boosted", "collapse_time_rest", "collapse_time_boosted"]);
    let idx = |o: Option<usize>| o.map(|i| i.to_string()).unwrap_or_default();
    for q in &res.pairs {
        csv.row(&[
            q.pair_index.to_string(),
            idx(q.outcome_rest),
            idx(q.outcome_boosted),
            fmt_opt(q.collapse_time_rest),
            fmt_opt(q.collapse_time_boosted),
        ]);
    }
    let born = &res.stats_rest.born_probabilities;
    let z = histogram_z(p.n_pairs, born[0], res.stats_rest.outcome_counts[0], res.stats_boosted.outcome_counts[0]);
    let summary = FrameSummary {
        n_pairs: p.n_pairs,
        seed,
        boost_v: F(p.boost_v.si()),
        gamma_boost: F(res.gamma_boost),
        t_c: F(p.t_c.si()),
        n_divergent_outcomes: res.n_divergent_outcomes,
        outcome_counts_rest: res.stats_rest.outcome_counts.clone(),
        outcome_counts_boosted: res.stats_boosted.outcome_counts.clone(),
        undecided_rest: res.stats_rest.undecided,
        undecided_boosted: res.stats_boosted.undecided,
        born_probabilities: floats(born),
        histogram_z: F(z),
    };
    let mut art = Artifacts::default();
    art.push("pairs.csv", csv.into_bytes());
    art.push("summary.json", json_bytes(&summary));
    art.report_line(format!(
        "frame: {} pairs, {} divergent outcomes, histogram z = {z:.3}",
        p.n_pairs, res.n_divergent_outcomes
    ));
    Ok(art)
}

pub fn mott_config(p: &MottParams) -> Result<MottConfig> {
    let q = MottQuadrature {
        radial_points: p.radial_points,
        angular_points: p.angular_points,
        azimuth_points: p.azimuth_points,
        support_widths: p.support_widths,
    };
    Ok(MottConfig::new(p.k.si(), [p.a[0].si(), p.a[1].si(), p.a[2].si()], p.sigma.si(), q)?)
}

#[derive(Serialize)]
struct ProfileSummary {
    peak_index: usize,
    peak_cos_theta: F,
    half_width: Option<F>,
}

#[derive(Serialize)]
struct MottSummary {
    k: F,
    sigma: F,
    a_distance: F,
    k_sigma: F,
    exact: ProfileSummary,
    approx: ProfileSummary,
    forward_abs_exact: F,
    forward_abs_approx: F,
    /// `|f_exact| / |f_approx|` along `â`.
    forward_ratio: F,
}

fn mott(p: &MottParams, exec: Exec) -> Result<Artifacts> {
    let cfg = mott_config(p)?;
    let forms = [AmplitudeForm::Exact, AmplitudeForm::Approx];
    let profiles = map_indices(2, exec, |i| mott::angular_profile(&cfg, p.n_angles, p.cos_min, forms[i]))?;
    let f_exact = mott::amplitude_exact(&cfg, cfg.a_hat())?.norm();
    let f_approx = mott::amplitude_approx(&cfg, cfg.a_hat())?.norm();

    let mut art = Artifacts::default();
    for (name, prof) in ["profile_exact.csv", "profile_approx.csv"].iter().zip(&profiles) {
        let mut csv = Csv::new(&["cos_theta", "intensity"]);
        for (c, i) in prof.cos_theta.iter().zip(&prof.intensity) {
            csv.row(&[fmt_f64(*c), fmt_f64(*i)]);
        }
        art.push(*name, csv.into_bytes());
    }
    let summarize = |prof: &mott::AngularProfile| {
        let i = prof.peak_index();
        ProfileSummary { peak_index: i, peak_cos_theta: F(prof.cos_theta[i]), half_width: opt(prof.half_width) }
    };
    let a = cfg.a();
    let summary = MottSummary {
        k: F(cfg.k()),
        sigma: F(cfg.sigma()),
        a_distance: F((a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()),
        k_sigma: F(cfg.k() * cfg.sigma()),
        exact: summarize(&profiles[0]),
        approx: summarize(&profiles[1]),
        forward_abs_exact: F(f_exact),
        forward_abs_approx: F(f_approx),
        forward_ratio: F(f_exact / f_approx),
    };
    art.push("summary.json", json_bytes(&summary));
    art.report_line(format!(
        "mott: peak at cos θ = {:.6}, half-width {:?} rad, |f_exact/f_approx| forward = {:.4}",
        profiles[0].cos_theta[profiles[0].peak_index()],
        profiles[0].half_width,
        f_exact / f_approx
    ));
    Ok(art)
}

#[derive(Serialize)]
struct HeatingReport {
    lambda0: F,
    r_c: F,
    v_s: F,
    bound: F,
    cutoff_frequency: F,
    white_lambda_eff: F,
    white_passes_bound: bool,
    threshold_beta: F,
    threshold_t_c: F,
    max_relative_deviation_from_closed_form: F,
    max_quadrature_error_estimate: F,
}

fn heating(p: &HeatingParams, exec: Exec) -> Result<Artifacts> {
    let mut k = constants();
    k.bulk_heating_bound = p.bound.si();
    let disp = PhononDispersion::linear(p.v_s.si())?;
    let (l0, r_c, v_s) = (p.lambda0.si(), p.r_c.si(), p.v_s.si());
    let spectrum_at = |beta: f64| {
        if beta == 0.0 {
            NoiseSpectrum::white(l0, r_c)
        } else {
            NoiseSpectrum::gaussian_cutoff(l0, beta * r_c / v_s, r_c)
        }
    };
    let betas: Vec<f64> = (0..p.n_beta).map(|i| p.beta_max * i as f64 / (p.n_beta - 1) as f64).collect();
    let results = map_indices(betas.len(), exec, |i| heating::lambda_eff(&spectrum_at(betas[i])?, &disp, &k))?;

    let mut csv = Csv::new(&["beta", "lambda_eff_over_lambda0"]);
    let mut dev: f64 = 0.0;
    let mut qerr: f64 = 0.0;
    for (b, r) in betas.iter().zip(&results) {
        csv.row(&[fmt_f64(*b), fmt_f64(r.lambda_eff / l0)]);
        dev = dev.max((r.lambda_eff / r.closed_form - 1.0).abs());
        qerr = qerr.max(r.quadrature_error_estimate);
    }
    let white = heating::lambda_eff(&NoiseSpectrum::white(l0, r_c)?, &disp, &k)?;
    let check = bound_check(&white, &k);
    let beta_star = threshold_beta(l0, p.bound.si())?;
    let report = HeatingReport {
        lambda0: F(l0),
        r_c: F(r_c),
        v_s: F(v_s),
        bound: F(p.bound.si()),
        cutoff_frequency: F(check.cutoff_frequency),
        white_lambda_eff: F(white.lambda_eff),
        white_passes_bound: check.bulk_ok,
        threshold_beta: F(beta_star),
        threshold_t_c: F(beta_star * r_c / v_s),
        max_relative_deviation_from_closed_form: F(dev),
        max_quadrature_error_estimate: F(qerr),
    };
    let mut art = Artifacts::default();
    art.push("heating_sweep.csv", csv.into_bytes());
    art.push("bound_report.json", json_bytes(&report));
    art.report_line(format!(
        "heating: cutoff v_s/r_c = {:e} 1/s, white passes bound: {}, threshold beta = {beta_star:.4}",
        check.cutoff_frequency, check.bulk_ok
    ));
    Ok(art)
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct OrderingReport {
    v_AB: Option<F>,
    v_AB_infinite: bool,
    boost_v: F,
    delta_t_boosted: F,
    ordering: &'static str,
    v_MIN: Option<F>,
}

pub fn ordering_name(o: Ordering) -> &'static str {
    match o {
        Ordering::Same => "Same",
        Ordering::Inverted => "Inverted",
        Ordering::Simultaneous => "Simultaneous",
    }
}

fn ordering(p: &OrderingParams) -> Result<Artifacts> {
    let a = Event::new(p.x_a.si(), p.t_a.si())?;
    let b = Event::new(p.x_b.si(), p.t_b.si())?;
    let boost = Boost::new(p.boost_v.si())?;
    let v_ab = relativity::effective_velocity(a, b);
    let order = relativity::time_order(a, b, boost);
    let v_min = match relativity::min_inversion_boost(a, b) {
        Ok(v) => Some(v),
        Err(csl_core::Error::NoInversionPossible { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let report = OrderingReport {
        v_AB: match v_ab {
            EffectiveVelocity::Finite(v) => Some(F(v)),
            EffectiveVelocity::Infinite => None,
        },
        v_AB_infinite: v_ab == EffectiveVelocity::Infinite,
        boost_v: F(boost.v()),
        delta_t_boosted: F(order.delta_t_boosted),
        ordering: ordering_name(order.ordering),
        v_MIN: opt(v_min),
    };
    let mut art = Artifacts::default();
    art.push("ordering.json", json_bytes(&report));
    art.report_line(format!("ordering: {} (Δt' = {:e} s)", report.ordering, order.delta_t_boosted));
    Ok(art)
}

/// Lags of the autocorrelation check, in units of `t_c`.
pub const NOISE_LAGS: [f64; 4] = [0.0, 1.0, 2.0, 4.0];

#[derive(Serialize)]
struct LagSummary {
    lag_steps: usize,
    tau: F,
    estimate: F,
    standard_error: F,
    expected: F,
    z: F,
}

#[derive(Serialize)]
struct NoiseSummary {
    kind: &'static str,
    n_trajectories: usize,
    channels: usize,
    n_steps: usize,
    dt: F,
    seed: u64,
    lags: Vec<LagSummary>,
}

/// Expected autocovariance of the noise rate at `tau`: `C(τ)` for colored
/// noise, and `λ0/dt` at zero lag for white increments.
fn expected_rate_covariance(p: &NoiseParams, tau: f64) -> Result<f64> {
    Ok(match p.kind {
        NoiseChoice::White => {
            if tau == 0.0 {
                p.lambda0.si() / p.dt.si()
            } else {
                0.0
            }
        }
        NoiseChoice::Colored => {
            let s = NoiseSpectrum::gaussian_cutoff(p.lambda0.si(), p.t_c.si(), p.r_c.si())?;
            noise::correlation_time(&s, tau)?
        }
    })
}

fn noise(p: &NoiseParams, seed: u64, exec: Exec) -> Result<Artifacts> {
    let dt = p.dt.si();
    let lag_steps: Vec<usize> = NOISE_LAGS.iter().map(|m| (m * p.t_c.si() / dt).round() as usize).collect();
    // Per trajectory: autocovariance per lag (averaged over channels), and the
    // CSV of trajectory 0.
    let per_traj = map_indices(p.trajectories, exec, |j| {
        let s = derive_seed(seed, j as u64);
        let tr = match p.kind {
            NoiseChoice::White => {
                let w = noise::sample_white(p.channels, p.n_steps, dt, s)?;
                let scale = p.lambda0.si().sqrt();
                let inc = w.increments().iter().map(|x| x * scale).collect();
                noise::NoiseTrajectory::from_increments(p.channels, dt, inc, s, w.kind())?
            }
            NoiseChoice::Colored => {
                let spec = NoiseSpectrum::gaussian_cutoff(p.lambda0.si(), p.t_c.si(), p.r_c.si())?;
                noise::sample_colored(&spec, p.channels, p.n_steps, dt, s)?
            }
        };
        let est: Vec<f64> = lag_steps
            .iter()
            .map(|&l| (0..p.channels).map(|c| autocovariance(&tr.rates(c), l)).sum::<f64>() / p.channels as f64)
            .collect();
        let csv = (j == 0).then(|| {
            let mut csv = Csv::new(&["step", "channel", "increment"]);
            for step in 0..p.n_steps {
                for c in 0..p.channels {
                    csv.row(&[step.to_string(), c.to_string(), fmt_f64(tr.increment(c, step))]);
                }
            }
            csv.into_bytes()
        });
        Ok((est, csv))
    })?;

    let n = per_traj.len() as f64;
    let mut lags = Vec::new();
    for (i, &l) in lag_steps.iter().enumerate() {
        let vals: Vec<f64> = per_traj.iter().map(|(e, _)| e[i]).collect();
        let mean = vals.iter().sum::<f64>() / n;
        let var =
            if vals.len() > 1 { vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { f64::NAN };
        let se = (var / n).sqrt();
        let tau = l as f64 * dt;
        let expected = expected_rate_covariance(p, tau)?;
        lags.push(LagSummary {
            lag_steps: l,
            tau: F(tau),
            estimate: F(mean),
            standard_error: F(se),
            expected: F(expected),
            z: F((mean - expected) / se),
        });
    }
    let mut art = Artifacts::default();
    let mut per_traj = per_traj;
    if let Some(csv) = per_traj.get_mut(0).and_then(|(_, c)| c.take()) {
        art.push("noise.csv", csv);
    }
    for l in &lags {
        art.report_line(format!(
            "noise: lag {} steps: {:.6e} vs {:.6e} (z = {:.2})",
            l.lag_steps, l.estimate.0, l.expected.0, l.z.0
        ));
    }
    let summary = NoiseSummary {
        kind: match p.kind {
            NoiseChoice::White => "white",
            NoiseChoice::Colored => "colored",
        },
        n_trajectories: p.trajectories,
        channels: p.channels,
        n_steps: p.n_steps,
        dt: F(dt),
        seed,
        lags,
    };
    art.push("summary.json", json_bytes(&summary));
    Ok(art)
}
