use cogrelay::config::ExperimentConfig;
use proptest::prelude::*;

fn link() -> impl Strategy<Value = (u32, f64)> {
    (1u32..=6, 0.01f64..10.0)
}

prop_compose! {
    fn source()(
        rate in 0.1f64..4.0,
        snr in -10.0f64..40.0,
        scenario_b in any::<bool>(),
        relays in 1u32..=4,
        caps in (-5.0f64..40.0, -5.0f64..40.0),
        modulation in prop::sample::select(vec![2u32, 4, 8]),
        default in link(),
        pt_px in link(),
        relay_link in link(),
        thresholds in prop::collection::vec(0.0f64..1.0, 1..4),
        grid in (-10.0f64..20.0, 0.0f64..30.0, 0.5f64..10.0),
        seed in any::<u32>(),
    ) -> String {
        let scenario = if scenario_b { "b" } else { "a" };
        let relays = if scenario_b { relays } else { 1 };
        let thresholds: Vec<String> = thresholds.iter().map(|t| format!("{t:?}")).collect();
        format!(
            r#"
[primary]
rate = {rate:?}
snr_db = {snr:?}

[secondary]
scenario = "{scenario}"
relays = {relays}
max_source_snr_db = {:?}
max_relay_snr_db = {:?}
modulation = {modulation}

[links.default]
m = {}
mean_gain = {:?}

[links.pt_px]
m = {}
mean_gain = {:?}

[relay.{relays}.s2_r]
m = {}
mean_gain = {:?}

[sweep.s]
x_axis = "secondary_snr_db"
start_db = {:?}
stop_db = {:?}
step_db = {:?}
thresholds = [{}]
seed = {seed}
"#,
            caps.0, caps.1, default.0, default.1, pt_px.0, pt_px.1, relay_link.0, relay_link.1,
            grid.0, grid.0 + grid.1, grid.2, thresholds.join(", "),
        )
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialized_config_parses_to_same_experiment(text in source()) {
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let out = cfg.to_toml().unwrap();
        let back = ExperimentConfig::parse(&out).unwrap();
        prop_assert_eq!(back.network().unwrap(), cfg.network().unwrap());
        prop_assert_eq!(back.sweep_plan(None).unwrap(), cfg.sweep_plan(None).unwrap());
        prop_assert_eq!(back.modulation(), cfg.modulation());
        prop_assert_eq!(back.to_toml().unwrap(), out);
    }
}
