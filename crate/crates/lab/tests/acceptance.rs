//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p csl-lab --test acceptance`.

use std::path::Path;
use std::time::Instant;

use csl_core::heating::{self, PhononDispersion};
use csl_core::mott::{self, AmplitudeForm, MottConfig};
use csl_core::noise::NoiseSpectrum;
use csl_core::physconst::{constants, SPEED_OF_LIGHT as C};
use csl_core::relativity::{min_inversion_boost, time_order, Boost, Event, Ordering};
use csl_core::rng::GaussianStream;
use csl_core::Complex;
use csl_lab::output::Artifacts;
use csl_lab::{parse_config, run, Exec, Params, RunConfig};
use serde_json::Value;

type Outcome = Result<String, String>;

fn fixture(name: &str) -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    parse_config(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn json(art: &Artifacts, name: &str) -> Value {
    serde_json::from_slice(art.get(name).unwrap_or_else(|| panic!("missing {name}"))).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

/// Runs recorded for the reproducibility check.
struct Ledger {
    runs: Vec<(RunConfig, Artifacts)>,
}

impl Ledger {
    fn run(&mut self, cfg: RunConfig) -> Artifacts {
        let art = run(&cfg, Exec::Parallel).expect("fixture run");
        self.runs.push((cfg, art.clone()));
        art
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn born_and_norm(ledger: &mut Ledger) -> (Outcome, Outcome) {
    let cfg = fixture("born.toml");
    let Params::Collapse(p) = &cfg.params else { unreachable!() };
    let dm = 2.0;
    let stiffness = p.gamma.unwrap().si() * dm * dm * p.dt.si();
    let t0 = Instant::now();
    let art = ledger.run(cfg.clone());
    let secs = t0.elapsed().as_secs_f64();
    let s = json(&art, "summary.json");
    let f0 = num(&s["frequencies"][0]);
    let undecided = s["undecided"].as_u64().unwrap();
    let drift = num(&s["norm_drift_max"]);
    let born = check(
        (f0 - 0.3).abs() <= 0.0183 && undecided == 0 && secs < 60.0,
        format!("outcome-0 frequency {f0:.4} (target 0.3 ± 0.0183), {undecided} undecided, {secs:.1} s (< 60 s)"),
    );
    let norm = check(
        drift < 1e-8 && stiffness <= 1e-3 * (1.0 + 1e-12),
        format!("max pre-renormalization |‖ψ‖²-1| = {drift:.2e} (< 1e-8) at γ·Δm²·dt = {stiffness:.1e}"),
    );
    (born, norm)
}

fn epr(ledger: &mut Ledger) -> Outcome {
    let art = ledger.run(fixture("epr.toml"));
    let s = json(&art, "summary.json");
    let done = s["n_completed"].as_u64().unwrap();
    let anti = s["n_anticorrelated"].as_u64().unwrap();
    let up = num(&s["fraction_up"]);
    check(
        done > 0 && anti == done && (up - 0.5).abs() <= 0.02,
        format!("{anti}/{done} completed runs anti-correlated (of {}), up fraction {up:.4} (0.5 ± 0.02)", s["n_runs"]),
    )
}

fn heating_closed_form(ledger: &mut Ledger) -> Outcome {
    let k = constants();
    let disp = PhononDispersion::linear(4000.0).unwrap();
    let mut g = GaussianStream::new(0x4ea7);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let lambda0 = 10f64.powf(-14.0 + 14.0 * g.uniform());
        let beta = 50.0 * g.uniform();
        let r_c = 1e-7;
        let s = NoiseSpectrum::gaussian_cutoff(lambda0, beta * r_c / 4000.0, r_c).unwrap();
        let r = heating::lambda_eff(&s, &disp, &k).unwrap();
        let closed = lambda0 * (1.0 + beta * beta).powf(-2.5);
        worst = worst.max((r.lambda_eff / closed - 1.0).abs());
    }
    let white = heating::lambda_eff(&NoiseSpectrum::white(3.7e-9, 1e-7).unwrap(), &disp, &k).unwrap();
    let white_err = (white.lambda_eff / 3.7e-9 - 1.0).abs();

    let art = ledger.run(fixture("heating.toml"));
    let report = json(&art, "bound_report.json");
    let cutoff = num(&report["cutoff_frequency"]);
    check(
        worst < 1e-6 && white_err < 1e-6 && cutoff == 4.0e10 && cutoff == k.phonon_cutoff_estimate,
        format!(
            "max rel. deviation {worst:.1e} over 50 pairs, white {white_err:.1e} (< 1e-6); cutoff {cutoff:e} 1/s (= 4e10 exactly)"
        ),
    )
}

fn colored_noise(ledger: &mut Ledger) -> Outcome {
    let t0 = Instant::now();
    let art = ledger.run(fixture("noise.toml"));
    let secs = t0.elapsed().as_secs_f64();
    let s = json(&art, "summary.json");
    let lags = s["lags"].as_array().unwrap();
    let zs: Vec<f64> = lags.iter().map(|l| num(&l["z"])).collect();
    let ok = lags.len() == 4 && zs.iter().all(|z| z.abs() < 5.0) && secs < 120.0;
    check(
        ok,
        format!(
            "z at lags 0, t_c, 2t_c, 4t_c = [{}] (|z| < 5), 64 x 2^18 steps in {secs:.1} s",
            zs.iter().map(|z| format!("{z:+.2}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

/// Monte Carlo estimate of the exact amplitude: sample `R ~ N(a, σ²)`, so
/// `f = (2πσ²)^{3/2} E[e^{ikR(1 - k̂·R̂)}/R]`.
fn mott_monte_carlo(c: &MottConfig, k_hat: [f64; 3], n: usize, seed: u64) -> (Complex, f64) {
    let mut g = GaussianStream::new(seed);
    let a = c.a();
    let (mut sr, mut si, mut sr2, mut si2) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let r = [a[0] + c.sigma() * g.normal(), a[1] + c.sigma() * g.normal(), a[2] + c.sigma() * g.normal()];
        let rn = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        let phase = c.k() * (rn - (k_hat[0] * r[0] + k_hat[1] * r[1] + k_hat[2] * r[2]));
        let (x, y) = (phase.cos() / rn, phase.sin() / rn);
        sr += x;
        si += y;
        sr2 += x * x;
        si2 += y * y;
    }
    let nf = n as f64;
    let scale = (2.0 * std::f64::consts::PI * c.sigma() * c.sigma()).powf(1.5);
    let (mr, mi) = (sr / nf, si / nf);
    let se = ((sr2 / nf - mr * mr + si2 / nf - mi * mi) / nf).sqrt();
    (Complex::new(mr, mi) * scale, se * scale)
}

fn mott_collimation(ledger: &mut Ledger) -> Outcome {
    let cfg_run = fixture("mott.toml");
    let Params::Mott(p) = &cfg_run.params else { unreachable!() };
    let cfg = csl_lab::run::mott_config(p).unwrap();
    let art = ledger.run(cfg_run.clone());
    let s = json(&art, "summary.json");

    let grid = mott::profile_grid(p.n_angles, p.cos_min).unwrap();
    let nearest_one = (0..grid.len()).min_by(|&i, &j| (1.0 - grid[i]).abs().total_cmp(&(1.0 - grid[j]).abs())).unwrap();
    let peak_ok = s["exact"]["peak_index"].as_u64() == Some(nearest_one as u64);

    let hw1 = mott::angular_profile(&cfg, p.n_angles, p.cos_min, AmplitudeForm::Exact).unwrap().half_width;
    let cfg2 = cfg.with_k(2.0 * cfg.k()).unwrap();
    let hw2 = mott::angular_profile(&cfg2, p.n_angles, p.cos_min, AmplitudeForm::Exact).unwrap().half_width;
    let narrow_ok = matches!((hw1, hw2), (Some(a), Some(b)) if b < a);

    let ratio = num(&s["forward_ratio"]).powi(2);
    let forms_ok = (ratio - 1.0).abs() <= 0.05;

    let k_hat = cfg.a_hat();
    let f = mott::amplitude_exact(&cfg, k_hat).unwrap();
    let (mc, se) = mott_monte_carlo(&cfg, k_hat, 10_000_000, 0x3077);
    let mc_sigmas = (f - mc).norm() / se;
    let mc_ok = mc_sigmas < 3.0;

    let mark = |b: bool| if b { "ok" } else { "FAILED" };
    check(
        peak_ok && narrow_ok && forms_ok && mc_ok,
        format!(
            "peak at grid point nearest 1: {}; half-width {:.4} -> {:.4} rad when k doubles: {}; \
             exact/approx |f|² at peak = {ratio:.4} (within 5%): {}; quadrature vs 1e7-sample MC {mc_sigmas:.2} SE (< 3): {}",
            mark(peak_ok),
            hw1.unwrap_or(f64::NAN),
            hw2.unwrap_or(f64::NAN),
            mark(narrow_ok),
            mark(forms_ok),
            mark(mc_ok),
        ),
    )
}

fn ordering(ledger: &mut Ledger) -> Outcome {
    let mut g = GaussianStream::new(0x0bde);
    let mut violations = 0usize;
    for _ in 0..1000 {
        let dt = 1.0 + 9.0 * g.uniform();
        let dx = C * dt * (2.0 * g.uniform() - 1.0) * 0.999;
        let (a, b) = (Event::new(0.0, 0.0).unwrap(), Event::new(dx, dt).unwrap());
        for _ in 0..1000 {
            let v = C * (2.0 * g.uniform() - 1.0) * 0.999_999;
            if time_order(a, b, Boost::new(v).unwrap()).ordering != Ordering::Same {
                violations += 1;
            }
        }
    }

    let art = ledger.run(fixture("ordering.toml"));
    let fixture_order = json(&art, "ordering.json")["ordering"].as_str().unwrap_or("").to_string();

    let mut grid_failures = 0usize;
    for _ in 0..100 {
        let dt = 1.0 + g.uniform();
        let sign = if g.uniform() < 0.5 { -1.0 } else { 1.0 };
        let dx = sign * C * dt * (1.05 + 10.0 * g.uniform());
        let (a, b) = (Event::new(0.0, 0.0).unwrap(), Event::new(dx, dt).unwrap());
        let v_min = min_inversion_boost(a, b).unwrap();
        let below = time_order(a, b, Boost::new(0.99 * v_min).unwrap()).ordering;
        let above = time_order(a, b, Boost::new(1.01 * v_min).unwrap()).ordering;
        if below != Ordering::Same || above != Ordering::Inverted {
            grid_failures += 1;
        }
    }
    check(
        violations == 0 && fixture_order == "Inverted" && grid_failures == 0,
        format!(
            "{violations} violations in 1e3 x 1e3 subluminal pairs/boosts; v_AB = 2c at 0.6c -> {fixture_order}; \
             {grid_failures}/100 failures at ±1% of v_MIN"
        ),
    )
}

fn frame(ledger: &mut Ledger) -> Outcome {
    let cfg = fixture("frame.toml");
    let art = ledger.run(cfg);
    let s = json(&art, "summary.json");
    let n = s["n_pairs"].as_u64().unwrap() as f64;
    let div = s["n_divergent_outcomes"].as_u64().unwrap();
    let p = num(&s["born_probabilities"][0]);
    let sd = (n * p * (1.0 - p)).sqrt();
    let rest = s["outcome_counts_rest"][0].as_u64().unwrap() as f64;
    let boosted = s["outcome_counts_boosted"][0].as_u64().unwrap() as f64;
    let z = num(&s["histogram_z"]);
    let (z_rest, z_boost) = ((rest - n * p) / sd, (boosted - n * p) / sd);
    check(
        div >= 1 && z.abs() < 4.0 && z_rest.abs() < 4.0 && z_boost.abs() < 4.0,
        format!(
            "{div} divergent outcomes in {n} pairs (>= 1); outcome-0 counts {rest} vs {boosted}, \
             difference {z:+.2}σ, vs Born {z_rest:+.2}σ / {z_boost:+.2}σ (all < 4σ)"
        ),
    )
}

fn reproducibility(ledger: &Ledger) -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut mismatched = Vec::new();
    let mut n_files = 0;
    for (i, (cfg, first)) in ledger.runs.iter().enumerate() {
        let mut a = cfg.clone();
        a.output_dir = tmp.path().join(format!("{i}a"));
        let mut b = cfg.clone();
        b.output_dir = tmp.path().join(format!("{i}b"));
        csl_lab::output::write_run(&a.output_dir, &a, first).unwrap();
        let (second, _) = csl_lab::execute(&b, Exec::Sequential).unwrap();
        for (name, _) in &second.files {
            n_files += 1;
            let x = std::fs::read(a.output_dir.join(name)).unwrap();
            let y = std::fs::read(b.output_dir.join(name)).unwrap();
            if x != y {
                mismatched.push(format!("{}/{name}", cfg.subcommand()));
            }
        }
    }
    check(
        mismatched.is_empty() && n_files > 0,
        format!(
            "{n_files} data files from {} runs rerun (sequentially); mismatches: {mismatched:?}",
            ledger.runs.len()
        ),
    )
}

fn main() {
    let mut ledger = Ledger { runs: Vec::new() };
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let (born, norm) = born_and_norm(&mut ledger);
    results.push(("born-rule", born));
    results.push(("norm-preservation", norm));
    results.push(("epr-anticorrelation", epr(&mut ledger)));
    results.push(("heating-closed-form", heating_closed_form(&mut ledger)));
    results.push(("colored-noise-fidelity", colored_noise(&mut ledger)));
    results.push(("mott-collimation", mott_collimation(&mut ledger)));
    results.push(("ordering-properties", ordering(&mut ledger)));
    results.push(("frame-dependence", frame(&mut ledger)));
    results.push(("reproducibility", reproducibility(&ledger)));

    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(d) => println!("PASS {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name}: {d}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
