use cogrelay::config::ExperimentConfig;
use cogrelay::sweep::{evaluate_sweep, RunOptions, SweepRow};

const ANALYTIC: RunOptions = RunOptions {
    analytic: true,
    monte_carlo: false,
};

fn config(scenario: &str, sweep: &str) -> ExperimentConfig {
    let (relays, overrides) = if scenario == "b" {
        (3, "[relay.2.s1_r]\nm = 3\nmean_gain = 0.7\n\n[relay.3.r_px]\nm = 1\nmean_gain = 0.3\n")
    } else {
        (1, "[relay.1.s1_r]\nm = 3\nmean_gain = 0.7\n")
    };
    ExperimentConfig::parse(&format!(
        r#"
[primary]
rate = 1.0
snr_db = 15.0

[secondary]
scenario = "{scenario}"
relays = {relays}
max_source_snr_db = 20.0
max_relay_snr_db = 20.0

[links.default]
m = 2
mean_gain = 1.0

[links.pt_s1]
m = 1
mean_gain = 0.05

[links.pt_s2]
m = 1
mean_gain = 0.05

[links.pt_r]
m = 1
mean_gain = 0.05

{overrides}{sweep}"#
    ))
    .unwrap()
}

fn rows(cfg: &ExperimentConfig) -> Vec<SweepRow> {
    let plan = cfg.sweep_plan(None).unwrap();
    evaluate_sweep(cfg, &plan, ANALYTIC).unwrap()
}

fn oc(r: &SweepRow) -> f64 {
    r.analytic_oc.unwrap()
}

#[test]
fn looser_constraint_never_hurts() {
    for scenario in ["a", "b"] {
        let cfg = config(
            scenario,
            r#"
[sweep.t]
x_axis = "primary_snr_db"
start_db = 10.0
stop_db = 30.0
step_db = 2.5
thresholds = [0.05, 0.1, 0.2]
"#,
        );
        let rows = rows(&cfg);
        for w in rows.chunks(3) {
            assert!(w.iter().all(|r| r.flags.iter().all(|f| !f.starts_with("error"))));
            assert!(oc(&w[0]) >= oc(&w[1]) - 1e-12 && oc(&w[1]) >= oc(&w[2]) - 1e-12, "{w:?}");
            assert!(w[0].gamma_s <= w[1].gamma_s && w[1].gamma_s <= w[2].gamma_s);
        }
    }
}

#[test]
fn more_candidate_relays_never_hurt() {
    let cfg = config(
        "b",
        r#"
[sweep.k]
x_axis = "secondary_snr_db"
start_db = 0.0
stop_db = 30.0
step_db = 5.0
thresholds = [0.1]
relays = [1, 2, 3]
"#,
    );
    let rows = rows(&cfg);
    assert_eq!(rows.len(), 21);
    for w in rows.chunks(3) {
        assert_eq!(w.iter().map(|r| r.k).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(oc(&w[0]) >= oc(&w[1]) - 1e-12 && oc(&w[1]) >= oc(&w[2]) - 1e-12, "{w:?}");
    }
}

#[test]
fn capped_powers_then_outage_stops_improving() {
    let cfg = config(
        "a",
        r#"
[sweep.p]
x_axis = "primary_snr_db"
start_db = 20.0
stop_db = 50.0
step_db = 2.0
thresholds = [0.1]
"#,
    );
    let rows = rows(&cfg);
    let capped: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.flags.iter().any(|f| f == "source_at_cap") && r.flags.iter().any(|f| f == "relay_at_cap"))
        .collect();
    assert!(capped.len() >= 5, "{rows:?}");
    for r in &capped {
        assert_eq!((r.gamma_s, r.gamma_r), (100.0, 100.0));
    }
    for w in capped.windows(2) {
        assert!(oc(w[1]) >= oc(w[0]) - 1e-12);
    }
}

#[test]
fn reversed_range_yields_no_rows() {
    let cfg = config(
        "a",
        r#"
[sweep.e]
x_axis = "primary_snr_db"
start_db = 10.0
stop_db = 0.0
step_db = 1.0
thresholds = [0.1]
"#,
    );
    assert!(rows(&cfg).is_empty());
}
