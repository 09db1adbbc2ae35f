use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::PowerLog;
use crate::output::{csv_path, meta_path, read_csv, to_csv};
use crate::stats::*;
use crate::{run, CliError, ExperimentConfig, Intensity, Kind};
use ppl_core::exactlaw::{log_sf_cdf, solve_a_tau, solve_r_tau, ModelParams, Regime};

fn config(kind: Kind, d: Vec<u64>, intensity: Intensity, reps: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind, d, intensity);
    c.reps = reps;
    c.seed = 11;
    c
}

fn field_of(err: CliError) -> String {
    match err {
        CliError::Config { field, .. } => field,
        other => panic!("expected config error, got {other}"),
    }
}

#[test]
fn sf_cdf_matches_direct_calls() {
    let res = run(&config(Kind::SfCdf, vec![50], Intensity::Explicit { l: 25.0 }, 1)).unwrap();
    assert_eq!(res.rows.len(), 101);
    let (ri, li) = (res.column("r").unwrap(), res.column("log_cdf").unwrap());
    let p = ModelParams::new(50, 25.0).unwrap();
    for (i, row) in res.rows.iter().enumerate() {
        let r = row[ri].as_f64().unwrap();
        assert_eq!(r, i as f64 / 100.0);
        assert_eq!(row[li].as_f64().unwrap().to_bits(), log_sf_cdf(&p, r).unwrap().ln().to_bits());
    }
}

#[test]
fn every_row_has_regime_and_surrogate() {
    let res = run(&config(Kind::SfSample, vec![8, 16], Intensity::Critical { x: 1.0, y: 0.0 }, 20)).unwrap();
    assert_eq!(&res.columns[..4], ["d", "L", "regime", "h_surrogate"]);
    for row in &res.rows {
        assert_eq!(row[2].render(), "critical");
        assert!(matches!(row[3], crate::Cell::Bool(_)));
    }
    assert_eq!(res.rows_tagged("median").count(), 2);
}

#[test]
fn same_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let mut c = config(Kind::Gumbel1d, vec![16, 64], Intensity::Critical { x: 1.0, y: 0.0 }, 500);
    c.out = Some(out("a"));
    run(&c).unwrap();
    c.out = Some(out("b"));
    run(&c).unwrap();
    let a = std::fs::read(csv_path(&out("a"))).unwrap();
    let b = std::fs::read(csv_path(&out("b"))).unwrap();
    assert_eq!(a, b);

    // one worker thread gives the same bytes
    c.out = None;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let single = pool.install(|| run(&c)).unwrap();
    assert_eq!(to_csv(&single).unwrap(), a);

    c.seed = 12;
    assert_ne!(to_csv(&run(&c).unwrap()).unwrap(), a);
}

#[test]
fn csv_and_meta_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rt").to_string_lossy().into_owned();
    let mut c = config(Kind::PolysimCrosscheck, vec![3], Intensity::MeanCount { mean: 30.0 }, 300);
    c.out = Some(out.clone());
    let res = run(&c).unwrap();
    let (header, rows) = read_csv(&csv_path(&out)).unwrap();
    assert_eq!(header, res.columns);
    assert_eq!(rows.len(), res.rows.len());
    for (raw, cells) in rows.iter().zip(&res.rows) {
        for (s, cell) in raw.iter().zip(cells) {
            match cell.as_f64() {
                Some(v) => assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits()),
                None => assert_eq!(s, &cell.render()),
            }
        }
    }
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(meta_path(&out)).unwrap()).unwrap();
    assert_eq!(meta["seed"], 11);
    assert_eq!(meta["config_hash"].as_str().unwrap(), res.config_hash);
    assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(meta["rows"], res.rows.len());
    let echoed: ExperimentConfig = serde_json::from_value(meta["config"].clone()).unwrap();
    assert_eq!(echoed, c);
}

#[test]
fn config_validation_names_fields() {
    let base = config(Kind::SfCdf, vec![10], Intensity::Explicit { l: 3.0 }, 1);
    let mut c = base.clone();
    c.reps = 0;
    assert_eq!(field_of(run(&c).unwrap_err()), "reps");
    let mut c = base.clone();
    c.d = vec![10, 10];
    assert_eq!(field_of(run(&c).unwrap_err()), "d");
    let mut c = base.clone();
    c.r = vec![1.5];
    assert_eq!(field_of(run(&c).unwrap_err()), "r");
    let mut c = base.clone();
    c.intensity = Intensity::MeanCount { mean: -1.0 };
    assert_eq!(field_of(run(&c).unwrap_err()), "intensity");
    assert!(ExperimentConfig::from_json(r#"{"kind":"sf-cdf","d":[3],"intensity":{"explicit":{"l":1}},"bogus":1}"#).is_err());

    let text = r#"{"kind":"gumbel-md","d":[100,200],"intensity":{"subcritical":{"c":1,"a":0.5,"b":1}},"tau":[-1,0]}"#;
    let c = ExperimentConfig::from_json(text).unwrap();
    assert_eq!(c.m, 2);
    assert_eq!(c.reps, 10_000);
    assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    let l = c.intensity.l_at(100.0);
    assert!((l - 10.0 * 100f64.ln()).abs() < 1e-12);
}

#[test]
fn exit_codes_by_error_class() {
    use ppl_core::Error as E;
    assert_eq!(CliError::Config { field: "d".into(), msg: String::new() }.exit_code(), 2);
    assert_eq!(CliError::Core(E::Domain(String::new())).exit_code(), 2);
    assert_eq!(CliError::Core(E::ResourceCap(String::new())).exit_code(), 3);
    assert_eq!(CliError::Core(E::RootBracket(String::new())).exit_code(), 4);
    assert_eq!(CliError::Core(E::Numeric(String::new())).exit_code(), 4);
}

#[test]
fn ks_examples() {
    assert_eq!(ks_distance(&[0.0], |x| if x < 0.0 { 0.0 } else { 0.5 }).unwrap(), 0.5);
    assert!(ks_distance(&[], gumbel_cdf).is_err());
    assert!((gumbel_cdf(0.0) - 0.36787944117144233).abs() < 1e-16);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xs: Vec<f64> = (0..100_000).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let ks = ks_distance(&xs, |x| if x < 0.0 { 0.0 } else { -(-x).exp_m1() }).unwrap();
    assert!(ks <= 0.01, "{ks}");
}

#[test]
fn gumbel_1d_summary_row() {
    let res = run(&config(Kind::Gumbel1d, vec![1024], Intensity::Critical { x: 1.0, y: 0.0 }, 10_000)).unwrap();
    assert_eq!(res.rows_tagged("sample").count(), 10_000);
    let vi = res.column("value").unwrap();
    let ks: Vec<f64> = res.rows_tagged("ks").map(|r| r[vi].as_f64().unwrap()).collect();
    assert_eq!(ks.len(), 1);
    assert!(ks[0] > 0.0 && ks[0] < 0.05, "{ks:?}");
}

#[test]
fn statistic_1d_reaches_tau_along_ladder() {
    let regime = Regime::critical(1.0).unwrap();
    for tau in [-1.0, 0.0, 1.0] {
        let mut prev = f64::INFINITY;
        for d in [1_000u64, 10_000, 100_000, 1_000_000, 10_000_000] {
            let p = ModelParams::new(d, d as f64).unwrap();
            let t = gumbel_statistic_1d_at(&p, &regime, &solve_r_tau(&p, tau).unwrap()).unwrap();
            let gap = (t - tau).abs();
            assert!(gap < prev, "tau={tau} d={d}: {gap}");
            prev = gap;
        }
        assert!(prev < 1e-5);
    }
}

#[test]
fn statistic_md_gap_shrinks_along_ladder() {
    for tau in [-1.0, 0.0, 1.0] {
        let mut prev = f64::INFINITY;
        for d in [1_000u64, 10_000, 100_000, 1_000_000, 10_000_000] {
            let p = ModelParams::new(d, d as f64).unwrap();
            let t = gumbel_statistic_md_at(&p, 2, &solve_a_tau(&p, 2, tau).unwrap().level).unwrap();
            let gap = (t - tau).abs();
            assert!(gap < prev, "tau={tau} d={d}: {gap}");
            prev = gap;
        }
    }
}

#[test]
fn statistic_domain_errors() {
    let p = ModelParams::new(100, 100.0).unwrap();
    let reg = Regime::critical(1.0).unwrap();
    assert!(gumbel_statistic_1d(&p, &reg, 0.0).is_err());
    assert!(gumbel_statistic_1d(&p, &reg, 1.0).is_err());
    assert!(gumbel_statistic_md(&p, 2, -0.1).is_err());
}

#[test]
fn regime_recipes_classify() {
    let sub = Intensity::Subcritical(PowerLog { c: 1.0, a: 0.5, b: 1.0 });
    let res = run(&config(Kind::RegimesTable, vec![2048], sub, 1)).unwrap();
    assert_eq!(res.rows[0][2].render(), "subcritical");
    assert!(res.warnings.is_empty(), "{:?}", res.warnings);
    let sup = Intensity::Supercritical(PowerLog { c: 10.0, a: 1.0, b: 0.0 });
    let res = run(&config(Kind::RegimesTable, vec![2048], sup, 1)).unwrap();
    assert_eq!(res.rows[0][2].render(), "supercritical");
    assert_eq!(res.rows[0][4].render(), "1-h");
    // a mislabelled recipe is kept but flagged
    let odd = Intensity::Subcritical(PowerLog { c: 2.0, a: 1.0, b: 0.0 });
    let res = run(&config(Kind::RegimesTable, vec![2048], odd, 1)).unwrap();
    assert_eq!(res.warnings.len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn statistic_1d_increasing(d in 10u64..5000, x in 0.2f64..3.0, r1 in 0.01f64..0.99, r2 in 0.01f64..0.99) {
        let p = ModelParams::new(d, x * d as f64).unwrap();
        let reg = Regime::critical(x).unwrap();
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(gumbel_statistic_1d(&p, &reg, lo).unwrap() <= gumbel_statistic_1d(&p, &reg, hi).unwrap());
    }

    #[test]
    fn statistic_md_decreasing(d in 10u64..5000, x in 0.2f64..3.0, r1 in 0.01f64..0.99, r2 in 0.01f64..0.99) {
        let p = ModelParams::new(d, x * d as f64).unwrap();
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(gumbel_statistic_md(&p, 2, lo).unwrap() >= gumbel_statistic_md(&p, 2, hi).unwrap());
    }

    #[test]
    fn ks_in_unit_interval(xs in prop::collection::vec(-5.0f64..5.0, 1..50)) {
        let ks = ks_distance(&xs, gumbel_cdf).unwrap();
        prop_assert!((0.0..=1.0).contains(&ks));
        prop_assert!(ks >= 0.5 / xs.len() as f64 - 1e-15);
    }
}
