use std::process::Command;

use mixfirst::netcore::{db20, read_s1p, s11};
use mixfirst::rxmodel;
use mixfirst::sweep::{
    emit, parse_config, parse_csv, run_sweep, run_sweep_with_jobs, to_csv, to_json, to_svg, Format, Metric,
    OracleMode,
};
use mixfirst::Error;

const MILLER: &str = r#"
title = "miller"
[grid]
start_ghz = 28.0
stop_ghz = 32.0
points = 5
[receiver]
architecture = "MillerMatched"
duty = 0.25
"#;

const THREE_WAY: &str = r#"
metrics = ["nf_db", "gain_db", "zin"]
[grid]
points_ghz = [25.0, 30.0, 35.0]
[receiver]
duty = 0.5
[[compare]]
label = "resistor"
architecture = "ShuntResistor"
[[compare]]
label = "tline"
architecture = "QuarterWaveDivider"
match = { kind = "QuarterWave", f_design_ghz = 30.0, loss_db_per_mm = 0.5 }
[[compare]]
label = "tunable"
architecture = "TunableLMatch"
match = { kind = "TunableLMatch", f_design_ghz = 30.0, f_band_low_ghz = 25.0 }
"#;

fn config_error(text: &str) -> String {
    match parse_config(text) {
        Err(e @ Error::Config(_)) => e.to_string(),
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn csv_round_trip() {
    let cfg = parse_config(THREE_WAY).unwrap();
    let res = run_sweep(&cfg);
    assert_eq!(res.failures(), 0);
    let table = parse_csv(&to_csv(&res)).unwrap();
    assert_eq!(
        table.header,
        ["freq_ghz", "nf_db", "gain_db", "zin_re_ohm", "zin_im_ohm", "f_lo_ghz", "series", "error"]
    );
    let rows: Vec<_> = res.series.iter().flat_map(|s| &s.rows).collect();
    assert_eq!(table.rows.len(), rows.len());
    for (i, r) in rows.iter().enumerate() {
        for (col, want) in [
            ("freq_ghz", Some(r.freq_ghz)),
            ("nf_db", r.nf_db),
            ("gain_db", r.gain_db),
            ("zin_re_ohm", r.zin_re_ohm),
            ("zin_im_ohm", r.zin_im_ohm),
        ] {
            let got = table.value(i, col).unwrap();
            let (g, w) = (got.unwrap(), want.unwrap());
            assert!((g - w).abs() <= 1e-9 * w.abs().max(1.0), "{col}");
        }
    }
}

#[test]
fn outputs_are_deterministic_and_parallel_safe() {
    let cfg = parse_config(THREE_WAY).unwrap();
    let serial = run_sweep_with_jobs(&cfg, 1).unwrap();
    let parallel = run_sweep_with_jobs(&cfg, 4).unwrap();
    assert_eq!(serial, parallel);
    assert_eq!(to_csv(&serial), to_csv(&run_sweep(&cfg)));
    assert_eq!(to_json(&serial).unwrap(), to_json(&parallel).unwrap());
}

#[test]
fn single_point_equals_direct_model() {
    let cfg = parse_config(&MILLER.replace("points = 5", "points = 1").replace("stop_ghz = 32.0", "stop_ghz = 28.0"))
        .unwrap();
    let res = run_sweep(&cfg);
    let row = &res.series[0].rows[0];
    let f = 28e9;
    let mut spec = cfg.receiver().clone();
    spec.f_lo = f / (1.0 + cfg.if_ratio);
    let lti = rxmodel::build_lti(&spec, f).unwrap();
    assert_eq!(row.gain_db, Some(rxmodel::conversion_gain_lti(&spec, &lti, f)));
    assert_eq!(row.nf_db, Some(rxmodel::noise_figure_db(rxmodel::noise_factor_arch(&spec, &lti))));
    assert_eq!(row.zin_re_ohm, Some(lti.z_in.re));
    assert_eq!(row.s11_db, Some(db20(s11(lti.z_in, 50.0).norm())));
}

#[test]
fn verify_mode_fills_deltas() {
    let text = format!("metrics = [\"gain_db\", \"zin\"]\n{}", MILLER.replace("points = 5", "points = 3"));
    let mut cfg = parse_config(&text).unwrap();
    cfg.oracle.mode = OracleMode::Verify;
    let res = run_sweep(&cfg);
    let header = parse_csv(&to_csv(&res)).unwrap().header;
    assert!(header.contains(&"delta_zin_rel".to_string()));
    for r in &res.series[0].rows {
        let o = r.oracle.as_ref().expect("oracle row");
        // Miller at 25 % duty: the LTI model is within 10 % of the switched network.
        assert!(o.delta_zin_rel < 0.10, "{}", o.delta_zin_rel);
        assert!(o.delta_gain_db.abs() < 1.0, "{}", o.delta_gain_db);
    }
}

#[test]
fn config_rejections() {
    assert!(config_error(&MILLER.replace("duty = 0.25", "duty = 0.6")).contains("duty"));
    let e = config_error(&MILLER.replace("MillerMatched", "LMatch"));
    assert!(e.contains("matching network required"), "{e}");
    let e = config_error(&format!("metrics = []\n{MILLER}"));
    assert!(e.contains("metrics"), "{e}");
    let e = config_error(&MILLER.replace("duty = 0.25", "duty = 0.25\nr_sww = 3.0"));
    assert!(e.contains("r_sww"), "{e}");
    let e = config_error(&format!("metrics = [\"nf_db\"]\n{MILLER}\n[emit]\nformats = [\"s1p\"]\n"));
    assert!(e.contains("s1p"), "{e}");
}

#[test]
fn emitted_files() {
    let cfg = parse_config(THREE_WAY).unwrap();
    let res = run_sweep(&cfg);
    let svg = to_svg(&res, Metric::Zin);
    assert_eq!(svg.matches("<polyline").count(), 6);
    assert!(svg.contains("Frequency [GHz]"));
    assert_eq!(to_svg(&res, Metric::NfDb).matches("<polyline").count(), 3);
    assert!(to_json(&res).unwrap().contains("\"schema_version\": 1"));

    let dir = tempfile::tempdir().unwrap();
    let files = emit(&res, &[Format::Csv, Format::Json, Format::Svg, Format::S1p], dir.path(), "t").unwrap();
    assert_eq!(files.len(), 1 + 1 + 3 + 3);
    let s1p = std::fs::read_to_string(dir.path().join("t_tline.s1p")).unwrap();
    let points = read_s1p(&s1p).unwrap();
    let row = &res.series[1].rows[1];
    let want = s11(mixfirst::netcore::C64::new(row.zin_re_ohm.unwrap(), row.zin_im_ohm.unwrap()), 50.0);
    assert!((points[1].1 - want).norm() < 1e-9);

    let e = emit(&res, &[Format::Csv], &dir.path().join("t.csv").join("sub"), "x").unwrap_err();
    assert!(e.to_string().contains("t.csv"), "{e}");
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mixfirst")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(&good, MILLER).unwrap();
    let out = dir.path().join("out");
    let o = cli(&[
        "sweep",
        "--config",
        good.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--format",
        "csv,json",
        "--jobs",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("sweep.csv").exists() && out.join("sweep.json").exists());

    let o = cli(&["synth", "--config", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, MILLER.replace("duty = 0.25", "duty = 0.6")).unwrap();
    assert_eq!(cli(&["sweep", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(cli(&["sweep", "--config", "/nonexistent.toml"]).status.code(), Some(1));

    // No overlap at 25 % duty: nothing to calibrate.
    let o = cli(&["calibrate", "--config", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no overlap to calibrate"));

    // A tunable match outside the reach of its inductor fails per point.
    let narrow = dir.path().join("narrow.toml");
    std::fs::write(
        &narrow,
        r#"
[grid]
points_ghz = [12.0, 30.0]
[receiver]
architecture = "TunableLMatch"
match = { kind = "TunableLMatch", f_design_ghz = 30.0, f_band_low_ghz = 25.0 }
"#,
    )
    .unwrap();
    let o = cli(&["sweep", "--config", narrow.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn cli_simulate_and_calibrate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        MILLER.replace("duty = 0.25", "duty = 0.5\nf_lo_ghz = 30.0\nrise_fraction = 0.0").replace("points = 5", "points = 1"),
    )
    .unwrap();
    let o = cli(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = std::fs::read_to_string(dir.path().join("sweep_trace.csv")).unwrap();
    assert!(trace.starts_with("time_s,v_in,"));

    let o = cli(&["calibrate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["k_cal"].as_f64().unwrap() > 0.0);
}
