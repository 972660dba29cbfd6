use ofdm_phn::harness::EstimatorSpec;
use ofdm_phn_cli::{
    cmd_single, cmd_sweep, cmd_trace, filter_estimators, parse_config, render_aggregate_csv,
    scenario_grid, CliError, AGGREGATE_HEADER,
};

const MINIMAL: &str = "
n_c = 64
l = 4
delta_f_hz = 5000
snr_db = 25
trials = 2
estimators = tqm
";

fn errors_of(text: &str) -> Vec<String> {
    match parse_config(text) {
        Err(CliError::Config(errors)) => errors,
        other => panic!("expected config errors, got {other:?}"),
    }
}

#[test]
fn minimal_config_parses() {
    let config = parse_config(MINIMAL).unwrap();
    assert_eq!(config.n_c, vec![64]);
    assert_eq!(config.l, 4);
    assert_eq!(config.trials, 2);
    assert_eq!(config.estimators, vec![EstimatorSpec::Tqm]);
    // Defaults.
    assert_eq!(config.decay_rate, 0.7);
    assert_eq!(config.f_s_hz, 2e7);
    assert_eq!(config.master_seed, 0);
    assert_eq!(config.phase_models, vec!["wiener".to_string()]);
}

#[test]
fn comments_and_blank_lines_are_ignored() {
    let text = format!("# leading comment\n\n{MINIMAL}\nmaster_seed = 9 # trailing\n");
    let config = parse_config(&text).unwrap();
    assert_eq!(config.master_seed, 9);
}

#[test]
fn pct_divisibility_error_names_both_values() {
    let text = "
n_c = 1024
l = 10
delta_f_hz = 5000
snr_db = 25
trials = 1
estimators = tqm-pct:48
";
    let errors = errors_of(text);
    assert!(
        errors.iter().any(|e| e.contains("48") && e.contains("1024")),
        "{errors:?}"
    );
}

#[test]
fn non_power_of_two_n_c_is_rejected() {
    let text = MINIMAL.replace("n_c = 64", "n_c = 48");
    let errors = errors_of(&text);
    assert!(errors.iter().any(|e| e.contains("power of two")), "{errors:?}");
}

#[test]
fn empty_estimator_list_is_rejected() {
    let text = MINIMAL.replace("estimators = tqm", "estimators = ");
    let errors = errors_of(&text);
    assert!(!errors.is_empty());
}

#[test]
fn unknown_keys_are_errors_not_warnings() {
    let text = format!("{MINIMAL}\nsubcarriers = 64\n");
    let errors = errors_of(&text);
    assert!(errors.iter().any(|e| e.contains("subcarriers")), "{errors:?}");
}

#[test]
fn all_errors_are_collected_at_once() {
    let text = "
n_c = 48
l = 0
delta_f_hz = -5
snr_db = 25
trials = 0
estimators = tqm, gradient
bogus = 1
";
    let errors = errors_of(text);
    // power-of-two, l, delta_f, trials, unknown estimator, unknown key.
    assert!(errors.len() >= 6, "{errors:?}");
}

#[test]
fn missing_required_keys_are_reported() {
    let errors = errors_of("l = 4\n");
    for key in ["n_c", "delta_f_hz", "snr_db", "trials", "estimators"] {
        assert!(errors.iter().any(|e| e.contains(key)), "missing {key}: {errors:?}");
    }
}

#[test]
fn grid_is_the_cartesian_product_in_declared_order() {
    let text = "
n_c = 64, 128
l = 4
phase_model = wiener, gaussian
delta_f_hz = 500, 5000
snr_db = 15, 35
trials = 1
estimators = tqm
";
    let config = parse_config(text).unwrap();
    let grid = scenario_grid(&config);
    assert_eq!(grid.len(), 16);
    assert_eq!(grid[0].id, "nc64-wiener-df500-snr15");
    assert_eq!(grid[1].id, "nc64-wiener-df500-snr35");
    assert_eq!(grid[15].id, "nc128-gaussian-df5000-snr35");
}

#[test]
fn estimator_filter_keeps_the_named_subset() {
    let specs = vec![EstimatorSpec::Tqm, EstimatorSpec::Lqm, EstimatorSpec::AltMm];
    let kept = filter_estimators(&specs, "lqm, altmm").unwrap();
    assert_eq!(kept, vec![EstimatorSpec::Lqm, EstimatorSpec::AltMm]);
    assert!(filter_estimators(&specs, "altopt").is_err());
    assert!(filter_estimators(&specs, "not-a-name").is_err());
}

#[test]
fn aggregate_csv_round_trips_through_parsing() {
    let config = parse_config(MINIMAL).unwrap();
    let grid = scenario_grid(&config);
    let rows = ofdm_phn::harness::run_monte_carlo(&grid, &config.estimators, 3).unwrap();
    let csv = render_aggregate_csv(&rows);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), AGGREGATE_HEADER);
    let n_cols = AGGREGATE_HEADER.split(',').count();
    for (line, row) in lines.zip(&rows) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), n_cols);
        assert_eq!(fields[0], row.scenario_id);
        assert_eq!(fields[1].parse::<usize>().unwrap(), row.n_c);
        let phase_mean: f64 = fields[9].parse().unwrap();
        let rel = (phase_mean - row.phase_mse_mean).abs() / row.phase_mse_mean.abs().max(1e-300);
        assert!(rel <= 1e-11, "phase_mse_mean {phase_mean} vs {}", row.phase_mse_mean);
        let wall_min: f64 = fields[17].parse().unwrap();
        assert!(wall_min >= 0.0);
        // bic empty for plain tqm.
        assert_eq!(fields[19], "");
    }
}

#[test]
fn sweep_trace_and_single_emit_consistent_csv() {
    let config = parse_config(MINIMAL).unwrap();

    let sweep = cmd_sweep(&config).unwrap();
    assert_eq!(sweep.lines().count(), 2);

    let trace = cmd_trace(&config).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), "estimator,iteration,objective,delta_u_norm");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "tqm");
    assert_eq!(first[1], "0");
    assert_eq!(first[3], "");
    // Objective column is nonincreasing down the trace.
    let objectives: Vec<f64> = trace
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(objectives.len() >= 2);
    for w in objectives.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-9));
    }

    let single = cmd_single(&config).unwrap();
    let mut lines = single.lines();
    assert_eq!(lines.next().unwrap(), "index,theta_true,theta_hat:tqm");
    assert_eq!(single.lines().count(), 65);
    let first: Vec<&str> = single.lines().nth(1).unwrap().split(',').collect();
    // theta[0] is pinned to zero by the model and by the estimator.
    assert_eq!(first[1], "0");
    assert_eq!(first[2], "0");
}

#[test]
fn trace_and_single_require_a_single_cell() {
    let text = MINIMAL.replace("snr_db = 25", "snr_db = 15, 25");
    let config = parse_config(&text).unwrap();
    assert!(matches!(cmd_trace(&config), Err(CliError::Config(_))));
    assert!(matches!(cmd_single(&config), Err(CliError::Config(_))));
}
