use std::fs;

use wgqed::harness::manifest::{read_manifest, sha256_hex};
use wgqed::harness::{
    builtin_scenario, ingest_csv, run_scenario, verify_manifest, Ingested, Scenario, BUILTIN_SCENARIOS,
};
use wgqed::Error;

fn read(dir: &std::path::Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn builtins_rerun_byte_identical() {
    for (name, _) in BUILTIN_SCENARIOS {
        let s = builtin_scenario(name).unwrap();
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_scenario(&s, a.path()).unwrap();
        run_scenario(&s, b.path()).unwrap();
        let m = read_manifest(a.path()).unwrap();
        assert_eq!(fs::read(a.path().join("manifest.json")).unwrap(), fs::read(b.path().join("manifest.json")).unwrap());
        for f in &m.files {
            assert_eq!(fs::read(a.path().join(&f.path)).unwrap(), fs::read(b.path().join(&f.path)).unwrap(), "{name}/{}", f.path);
        }
    }
}

#[test]
fn manifests_match_contents_and_csvs_reingest() {
    for (name, _) in BUILTIN_SCENARIOS {
        let s = builtin_scenario(name).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let m = run_scenario(&s, dir.path()).unwrap();
        assert_eq!(verify_manifest(dir.path()).unwrap(), m);
        assert_eq!(m.prng, "ChaCha20");
        assert_eq!(m.seed, s.seed);
        let csvs: Vec<_> = m.files.iter().filter(|f| f.path.ends_with(".csv")).collect();
        assert!(!csvs.is_empty(), "{name}");
        for f in csvs {
            ingest_csv(dir.path().join(&f.path)).unwrap_or_else(|e| panic!("{name}/{}: {e}", f.path));
        }
    }
}

#[test]
fn tampered_file_fails_verification() {
    let s = builtin_scenario("s4-power-sweep").unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_scenario(&s, dir.path()).unwrap();
    fs::write(dir.path().join("power_sweep.csv"), "power_nW,extinction\n0,0\n").unwrap();
    assert!(matches!(verify_manifest(dir.path()), Err(Error::Data(_))));
}

#[test]
fn transmission_scenario_outputs() {
    let s = builtin_scenario("fig3b-transmission").unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_scenario(&s, dir.path()).unwrap();
    match ingest_csv(dir.path().join("spectrum.csv")).unwrap() {
        Ingested::Spectrum { spectrum, value_column } => {
            assert_eq!(value_column, "transmission");
            assert_eq!(spectrum.len(), 401);
            // unit baseline far from the dip
            assert!((spectrum.y[0] - 1.0).abs() < 0.05);
        }
        other => panic!("{other:?}"),
    }
    let report = read(dir.path(), "fit_fano.txt");
    assert!(report.contains("model=fano") && report.contains("q_sigma="), "{report}");
    // the written scenario reproduces the run
    let again = Scenario::from_toml(&read(dir.path(), "scenario.toml")).unwrap();
    assert_eq!(again, s);
}

#[test]
fn seed_changes_noisy_output_only() {
    let s = builtin_scenario("fig3b-transmission").unwrap();
    let mut t = s.clone();
    t.seed = Some(s.seed.unwrap() + 1);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = run_scenario(&s, a.path()).unwrap();
    let mb = run_scenario(&t, b.path()).unwrap();
    let hash = |m: &wgqed::harness::Manifest, p: &str| m.files.iter().find(|f| f.path == p).unwrap().sha256.clone();
    assert_ne!(hash(&ma, "spectrum.csv"), hash(&mb, "spectrum.csv"));
    assert_eq!(hash(&ma, "spectrum_model.csv"), hash(&mb, "spectrum_model.csv"));
}

#[test]
fn bunching_scenario_gives_detuning_curve() {
    let s = builtin_scenario("fig4b-bunching").unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_scenario(&s, dir.path()).unwrap();
    let Ingested::Spectrum { spectrum, value_column } = ingest_csv(dir.path().join("bunching.csv")).unwrap() else {
        panic!()
    };
    assert_eq!(value_column, "g2_max");
    let (i, peak) = spectrum.y.iter().enumerate().fold((0, 0.0), |m, (i, v)| if *v > m.1 { (i, *v) } else { m });
    assert!((spectrum.x[i]).abs() < 0.5);
    assert!((peak - 1.14).abs() < 0.01, "{peak}");
}

#[test]
fn power_sweep_csv_decreases() {
    let s = builtin_scenario("s4-power-sweep").unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_scenario(&s, dir.path()).unwrap();
    let text = read(dir.path(), "power_sweep.csv");
    assert!(text.starts_with("power_nW,extinction\n"));
    let Ingested::PowerSweep(p) = ingest_csv(dir.path().join("power_sweep.csv")).unwrap() else {
        panic!()
    };
    assert!(p.extinction.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn empty_sweep_grid_is_validation_error() {
    let mut s = builtin_scenario("s4-power-sweep").unwrap();
    s.sweep.power_nw = Some(vec![]);
    let dir = tempfile::tempdir().unwrap();
    match run_scenario(&s, dir.path()) {
        Err(Error::Validation { field, .. }) => assert_eq!(field, "sweep.power_nW"),
        other => panic!("{other:?}"),
    }
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn manifest_hash_is_sha256_of_bytes() {
    let s = builtin_scenario("fig2e-rf-switch").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let m = run_scenario(&s, dir.path()).unwrap();
    let f = m.files.iter().find(|f| f.path == "switch.csv").unwrap();
    let bytes = fs::read(dir.path().join("switch.csv")).unwrap();
    assert_eq!(f.sha256, sha256_hex(&bytes));
    assert_eq!(f.bytes, bytes.len() as u64);
    assert!(!bytes.contains(&b'\r'));
}
