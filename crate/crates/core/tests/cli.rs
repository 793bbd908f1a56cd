use std::path::Path;
use std::process::Command;

fn ergolat(args: &[&str], out: &Path, workers: &str) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ergolat"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("ERGOLAT_WORKERS", workers)
        .output()
        .expect("binary runs")
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    assert!(std::fs::read_to_string(path).unwrap().starts_with("# command="));
    ergolat::experiments::read_csv(path).unwrap().1
}

#[test]
fn output_is_independent_of_worker_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["siso-curves", "--model", "nakagami:m=2", "--snr-db=-10..20:5", "--samples", "50000", "--seed", "9"];
    assert!(ergolat(&args, a.path(), "1").status.success());
    assert!(ergolat(&args, b.path(), "3").status.success());
    let read = |d: &Path| std::fs::read(d.join("siso-curves.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn gap_bounds_sweep_decreases_from_log2_3() {
    let d = tempfile::tempdir().unwrap();
    let out = ergolat(&["gap-bounds", "--nt", "1", "--nr", "2..16", "--snr-db", "10", "--samples", "5000", "--seed", "1"], d.path(), "2");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let bounds: Vec<f64> = data_rows(&d.path().join("gap-bounds.csv")).iter().map(|r| r[4].parse().unwrap()).collect();
    assert_eq!(bounds.len(), 15);
    assert!((bounds[0] - 3f64.log2()).abs() < 1e-12);
    assert!(bounds.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn siso_curves_stay_under_bounds() {
    let d = tempfile::tempdir().unwrap();
    let out = ergolat(&["siso-curves", "--model", "rayleigh", "--snr-db=-10..30:2", "--samples", "50000", "--seed", "4"], d.path(), "2");
    assert!(out.status.success());
    let rows = data_rows(&d.path().join("siso-curves.csv"));
    assert_eq!(rows.len(), 21);
    for r in rows {
        let (gap, bound): (f64, f64) = (r[9].parse().unwrap(), r[12].parse().unwrap());
        assert!(gap <= bound && r[13] == "true");
    }
}

#[test]
fn verify_lemmas_passes() {
    let d = tempfile::tempdir().unwrap();
    let out = ergolat(&["verify-lemmas", "--all", "--seed", "7", "--samples", "50000", "--trials", "1000"], d.path(), "2");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(data_rows(&d.path().join("verify-lemmas.csv")).iter().all(|r| r[2] == "true"));
}

#[test]
fn bad_input_exits_nonzero() {
    let d = tempfile::tempdir().unwrap();
    let out = ergolat(&["siso-curves", "--snr-db", "5..1:1", "--seed", "1"], d.path(), "1");
    assert_eq!(out.status.code(), Some(2));
    let out = ergolat(&["siso-curves", "--model", "rician", "--seed", "1"], d.path(), "1");
    assert_eq!(out.status.code(), Some(2));
    // the many-antenna bound needs N_r > K·N_t, and Nakagami is refused there
    let out = ergolat(&["mac-gap", "--model", "nakagami:m=2", "--nr", "4", "--seed", "1"], d.path(), "1");
    assert_eq!(out.status.code(), Some(2));
}
