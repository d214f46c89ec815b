//! File layouts consumed by the plotting scripts, and executor independence.

use csl_lab::output::Artifacts;
use csl_lab::{parse_config, run, Exec};
use serde_json::Value;

fn small(sub: &str, table: &str) -> csl_lab::RunConfig {
    parse_config(&format!("subcommand = \"{sub}\"\nseed = 77\n[{sub}]\n{table}")).unwrap()
}

fn configs() -> Vec<csl_lab::RunConfig> {
    vec![
        small("collapse", "trajectories = 40\ntraces = 2\ntrace_stride = 50\n"),
        small("collapse", "trajectories = 8\nnoise = \"colored\"\nt_c = \"5 ms\"\ndt = \"1 ms\"\ngamma = \"0.5 1/s\"\nn_steps_max = 30000\ntraces = 1\n"),
        small("epr", "trajectories = 30\n"),
        small("frame", "n_pairs = 12\n"),
        small("mott", "n_angles = 16\nk = \"10 1/nm\"\n"),
        small("heating", "n_beta = 11\n"),
        small("ordering", ""),
        small("noise", "n_steps = 4096\ntrajectories = 3\nchannels = 2\n"),
    ]
}

fn header(art: &Artifacts, name: &str) -> Vec<String> {
    let text = std::str::from_utf8(art.get(name).unwrap_or_else(|| panic!("missing {name}"))).unwrap();
    text.lines().next().unwrap().split(',').map(String::from).collect()
}

fn json(art: &Artifacts, name: &str) -> Value {
    serde_json::from_slice(art.get(name).unwrap()).unwrap()
}

#[test]
fn csv_schemas() {
    let arts: Vec<Artifacts> = configs().iter().map(|c| run(c, Exec::Sequential).unwrap()).collect();
    assert_eq!(
        header(&arts[0], "outcomes.csv"),
        ["trajectory", "seed", "outcome", "collapse_time", "steps", "norm_drift_max"]
    );
    assert_eq!(header(&arts[0], "trace_0.csv"), ["time", "expect_0", "norm_drift"]);
    assert!(arts[0].get("trace_2.csv").is_none());
    assert_eq!(
        header(&arts[2], "epr.csv"),
        ["run", "seed", "outcome", "a_spin", "b_spin", "collapse_time", "fidelity"]
    );
    assert_eq!(
        header(&arts[3], "pairs.csv"),
        ["pair_index", "outcome_rest", "outcome_boosted", "collapse_time_rest", "collapse_time_boosted"]
    );
    assert_eq!(header(&arts[4], "profile_exact.csv"), ["cos_theta", "intensity"]);
    assert_eq!(header(&arts[4], "profile_approx.csv"), ["cos_theta", "intensity"]);
    assert_eq!(header(&arts[5], "heating_sweep.csv"), ["beta", "lambda_eff_over_lambda0"]);
    assert_eq!(header(&arts[7], "noise.csv"), ["step", "channel", "increment"]);
    let noise_rows = std::str::from_utf8(arts[7].get("noise.csv").unwrap()).unwrap().lines().count();
    assert_eq!(noise_rows, 1 + 4096 * 2);
}

#[test]
fn json_keys() {
    let cfgs = configs();
    let arts: Vec<Artifacts> = cfgs.iter().map(|c| run(c, Exec::Sequential).unwrap()).collect();
    let s = json(&arts[0], "summary.json");
    for k in [
        "n_traj",
        "outcome_counts",
        "frequencies",
        "born_probabilities",
        "undecided",
        "mean_collapse_time",
        "norm_drift_max",
    ] {
        assert!(s.get(k).is_some(), "collapse summary lacks {k}");
    }
    assert!((s["born_probabilities"][0].as_f64().unwrap() - 0.3).abs() < 1e-12);
    let o = json(&arts[6], "ordering.json");
    for k in ["v_AB", "delta_t_boosted", "ordering", "v_MIN"] {
        assert!(o.get(k).is_some(), "ordering lacks {k}");
    }
    let h = json(&arts[5], "bound_report.json");
    assert_eq!(h["cutoff_frequency"].as_f64(), Some(4e10));
    assert_eq!(h["white_passes_bound"], false);
    let f = json(&arts[3], "summary.json");
    assert!(f.get("n_divergent_outcomes").is_some() && f.get("histogram_z").is_some());
}

#[test]
fn heating_sweep_matches_closed_form() {
    let art = run(&small("heating", "n_beta = 21\nbeta_max = 10.0\n"), Exec::Sequential).unwrap();
    let text = std::str::from_utf8(art.get("heating_sweep.csv").unwrap()).unwrap();
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] / (1.0 + v[0] * v[0]).powf(-2.5) - 1.0).abs() < 1e-6);
    }
}

#[test]
fn floats_have_seventeen_digits() {
    let art = run(&small("mott", "n_angles = 16\n"), Exec::Sequential).unwrap();
    let text = std::str::from_utf8(art.get("profile_exact.csv").unwrap()).unwrap();
    for field in text.lines().skip(1).flat_map(|l| l.split(',')) {
        let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 17, "{field}");
    }
}

#[test]
fn parallel_equals_sequential() {
    for cfg in configs() {
        let a = run(&cfg, Exec::Sequential).unwrap();
        let b = run(&cfg, Exec::Parallel).unwrap();
        assert_eq!(a, b, "{}", cfg.subcommand());
    }
}

#[test]
fn data_files_hold_no_clock_or_host() {
    let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).unwrap().as_secs();
    let stamps = [now.to_string(), (now - 1).to_string()];
    let host = std::fs::read_to_string("/etc/hostname").unwrap_or_default().trim().to_string();
    for cfg in configs() {
        let art = run(&cfg, Exec::Parallel).unwrap();
        for (name, bytes) in &art.files {
            let text = std::str::from_utf8(bytes).unwrap();
            assert!(stamps.iter().all(|t| !text.contains(t.as_str())), "{name} contains a time stamp");
            assert!(host.is_empty() || !text.contains(&host), "{name} contains the host name");
        }
    }
}
