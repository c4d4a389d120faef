use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qimage_core::pgm::{self, PgmFormat};
use qimage_core::GrayImage;
use serde_json::Value;

fn qimage() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qimage"))
}

fn write_pgm(dir: &Path, name: &str, side: usize, seed: u8, format: PgmFormat) -> PathBuf {
    let pixels = (0..side * side)
        .map(|i| (i as u8).wrapping_mul(37).wrapping_add(seed))
        .collect();
    let img = GrayImage::new(side, side, pixels).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, pgm::encode(&img, format)).unwrap();
    path
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("failed to launch qimage")
}

fn report(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn high_precision_synthesis_never_overflows() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_pgm(dir.path(), "a.pgm", 4, 3, PgmFormat::Ascii);
    let b = write_pgm(dir.path(), "b.pgm", 4, 90, PgmFormat::Binary);
    let rep = dir.path().join("r.json");
    let out = run(qimage()
        .args(["synthesize", "--n1", "1000000", "--n2", "1000000"])
        .arg("--carrier")
        .arg(&a)
        .arg("--embedder")
        .arg(&b)
        .arg("--report")
        .arg(&rep)
        .arg("--out")
        .arg(dir.path().join("o.pgm")));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&rep);
    assert_eq!(r["aggregate"]["corrected"]["overflow_rate"].as_f64(), Some(0.0));
    assert_eq!(r["per_pixel"].as_array().unwrap().len(), 16);
    let img = pgm::decode(&std::fs::read(dir.path().join("o.pgm")).unwrap()).unwrap();
    assert_eq!((img.width, img.height), (4, 4));
}

#[test]
fn both_operators_report_paired_rates() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_pgm(dir.path(), "a.pgm", 8, 200, PgmFormat::Binary);
    let b = write_pgm(dir.path(), "b.pgm", 8, 150, PgmFormat::Binary);
    let rep = dir.path().join("r.json");
    let out = run(qimage()
        .args(["synthesize", "--operator", "both", "--n1", "64", "--n2", "64"])
        .arg("--carrier")
        .arg(&a)
        .arg("--embedder")
        .arg(&b)
        .arg("--report")
        .arg(&rep)
        .arg("--out")
        .arg(dir.path().join("o.pgm")));
    assert!(out.status.success());
    let cmp = &report(&rep)["aggregate"]["comparison"];
    assert!(cmp["corrected_exception_rate"].as_f64().unwrap() <= cmp["naive_exception_rate"].as_f64().unwrap());
    assert!(dir.path().join("o.corrected.pgm").exists());
    assert!(dir.path().join("o.naive.pgm").exists());
}

#[test]
fn reports_are_byte_identical_and_keys_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_pgm(dir.path(), "a.pgm", 4, 1, PgmFormat::Binary);
    let b = write_pgm(dir.path(), "b.pgm", 4, 2, PgmFormat::Binary);
    let mut bytes = Vec::new();
    for _ in 0..2 {
        let out = run(qimage()
            .args(["analyze", "--mode", "povm", "--trials", "5000", "--seed", "9"])
            .arg("--carrier")
            .arg(&a)
            .arg("--embedder")
            .arg(&b));
        assert!(out.status.success());
        bytes.push(out.stdout);
    }
    assert_eq!(bytes[0], bytes[1]);

    let mut keys = Vec::new();
    for command in ["encode", "synthesize", "mpe-bench"] {
        let rep = dir.path().join(format!("{command}.json"));
        let out = run(qimage()
            .args([command, "--trials", "2000"])
            .arg("--carrier")
            .arg(&a)
            .arg("--embedder")
            .arg(&b)
            .arg("--report")
            .arg(&rep));
        assert!(out.status.success(), "{command}");
        let r = report(&rep);
        let top: Vec<String> = r.as_object().unwrap().keys().cloned().collect();
        let agg: Vec<String> = r["aggregate"].as_object().unwrap().keys().cloned().collect();
        keys.push((top, agg));
    }
    assert!(keys.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn mpe_bench_bounds_hold() {
    let out = run(qimage().args([
        "mpe-bench", "--mode", "povm", "--resources", "1,4,16", "--trials", "100000",
    ]));
    assert!(out.status.success());
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let bounds = &r["aggregate"]["bounds"];
    assert_eq!(bounds["all_hold"], Value::Bool(true));
    assert_eq!(bounds["single"].as_array().unwrap().len(), 3);

    let single = run(qimage().args(["mpe-bench", "--resources", "8", "--trials", "1000"]));
    let r: Value = serde_json::from_slice(&single.stdout).unwrap();
    assert_eq!(r["aggregate"]["trend"]["single"].as_array().unwrap().len(), 1);
}

#[test]
fn environment_overrides_flags() {
    let a = run(qimage()
        .args(["mpe-bench", "--trials", "1000"])
        .env("QIMG_RESOURCES", "2,8")
        .env("QIMG_SEED", "77"));
    let b = run(qimage().args(["mpe-bench", "--trials", "1000", "--resources", "2,8", "--seed", "77"]));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let r: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r["config"]["resources"], serde_json::json!([2, 8]));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let small = write_pgm(dir.path(), "s.pgm", 4, 0, PgmFormat::Binary);
    let other = write_pgm(dir.path(), "o.pgm", 8, 0, PgmFormat::Binary);
    let huge = write_pgm(dir.path(), "h.pgm", 128, 0, PgmFormat::Binary);

    let code = |cmd: &mut Command| run(cmd).status.code();
    assert_eq!(
        code(qimage().arg("synthesize").arg("--carrier").arg(&small).arg("--embedder").arg(dir.path().join("missing.pgm"))),
        Some(1)
    );
    assert_eq!(
        code(qimage().arg("synthesize").arg("--carrier").arg(&small).arg("--embedder").arg(&other)),
        Some(2)
    );
    assert_eq!(
        code(qimage().arg("synthesize").arg("--carrier").arg(&huge).arg("--embedder").arg(&huge)),
        Some(3)
    );
    assert_eq!(code(qimage().args(["mpe-bench", "--epsilon", "1.0"])), Some(2));
    assert_eq!(code(qimage().args(["mpe-bench", "--mode", "povm", "--resources", "5000", "--trials", "10"])), Some(3));
}

#[test]
fn encode_round_trips_pixels() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_pgm(dir.path(), "a.pgm", 16, 5, PgmFormat::Ascii);
    let rep = dir.path().join("e.json");
    let out_img = dir.path().join("back.pgm");
    let out = run(qimage()
        .args(["encode", "--format", "p2"])
        .arg("--carrier")
        .arg(&a)
        .arg("--out")
        .arg(&out_img)
        .arg("--report")
        .arg(&rep));
    assert!(out.status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&out_img).unwrap());
    let enc = &report(&rep)["aggregate"]["encoding"];
    assert_eq!(enc["hadamard_count"], 9);
    assert_eq!(enc["controlled_rotation_count"], 256);
    assert_eq!(enc["mpe_dim"], 257);
    assert_eq!(enc["mismatched_pixels"], 0);
}
