use std::fs;

use fps_hybrid::experiment::{detail_csv, run_experiment, summary_csv, write_outputs, ExperimentConfig};

const CONFIG: &str = r#"
n_realizations = 5
methods = ["fully-digital", "fps-altmin"]

[system]
n_tx = 16
n_rx = 2
n_rf_tx = 2
n_rf_rx = 1
n_users = 2
n_streams = 1
n_subcarriers = 4

[channel]
base_seed = 40

[arch]
n_ps = 5

[sweep]
axis = "snr_db"
values = [-5.0, 0.0, 5.0]
"#;

#[test]
fn row_counts_and_summary_means() {
    let cfg = ExperimentConfig::from_toml_str(CONFIG).unwrap();
    let res = run_experiment(&cfg).unwrap();
    assert_eq!(res.detail.len(), 30);
    assert_eq!(res.summary.len(), 6);
    assert_eq!(res.n_failed(), 0);
    for s in &res.summary {
        let xs: Vec<f64> = res
            .detail
            .iter()
            .filter(|d| d.sweep_value == s.sweep_value && d.method == s.method)
            .map(|d| d.se_bits_per_hz.unwrap())
            .collect();
        assert_eq!(xs.len(), 5);
        let mean = xs.iter().sum::<f64>() / 5.0;
        assert!((mean - s.mean_se.unwrap()).abs() <= 1e-12);
    }
    let seeds: Vec<u64> = res.detail.iter().filter(|d| d.method == "fps-altmin" && d.sweep_value == 0.0).map(|d| d.seed).collect();
    assert_eq!(seeds, vec![40, 41, 42, 43, 44]);
}

#[test]
fn rerun_is_byte_identical_across_worker_counts() {
    let mut cfg = ExperimentConfig::from_toml_str(CONFIG).unwrap();
    cfg.workers = Some(1);
    let one = run_experiment(&cfg).unwrap();
    cfg.workers = Some(4);
    let four = run_experiment(&cfg).unwrap();
    // The echoed worker count is the only expected difference.
    let body = |b: Vec<u8>| String::from_utf8(b).unwrap().lines().filter(|l| !l.starts_with("# workers")).collect::<Vec<_>>().join("\n");
    assert_eq!(body(detail_csv(&one).unwrap()), body(detail_csv(&four).unwrap()));
    assert_eq!(body(summary_csv(&one).unwrap()), body(summary_csv(&four).unwrap()));
    assert_eq!(detail_csv(&four).unwrap(), detail_csv(&run_experiment(&cfg).unwrap()).unwrap());
}

#[test]
fn outputs_carry_schema_and_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_toml_str(CONFIG).unwrap();
    cfg.n_realizations = 1;
    cfg.output.dir = dir.path().to_path_buf();
    cfg.output.prefix = "t".into();
    let paths = write_outputs(&run_experiment(&cfg).unwrap()).unwrap();
    assert_eq!(paths.len(), 3);
    let detail = fs::read_to_string(dir.path().join("t_detail.csv")).unwrap();
    assert!(detail.starts_with("# schema: fpsim-detail/1"));
    assert!(detail.contains("# arch.n_ps = 5"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("t_report.json")).unwrap()).unwrap();
    assert_eq!(json["detail"].as_array().unwrap().len(), 6);
}
