//! End-to-end runs of the `ant` binary: format round trips, exit codes, and
//! golden renders.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ant() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ant"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ant-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn zero_steps_round_trip_is_byte_identical() {
    let first = tmp("roundtrip-1.antpat");
    let second = tmp("roundtrip-2.antpat");
    let run = ant()
        .args(["simulate", "--rule", "LLRL", "--white", "--steps", "137"])
        .args(["--out", first.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(run.status.success(), "{run:?}");

    let run = ant()
        .args(["simulate", "--rule", "LLRL", "--steps", "0"])
        .args(["--input", first.to_str().unwrap()])
        .args(["--out", second.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(run.status.success(), "{run:?}");
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );
}

#[test]
fn detect_writes_a_catalog_the_verifier_accepts() {
    let catalog = tmp("lr-detected.json");
    let run = ant()
        .args(["detect", "--rule", "LR", "--white", "--max-steps", "20000"])
        .args(["--max-period", "512"])
        .args(["--out", catalog.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(run.status.success(), "{run:?}");
    let text = stdout(&run);
    assert!(text.contains("outcome=highway period=104"), "{text}");

    let run = ant()
        .args(["verify", "--catalog", catalog.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(run.status.success(), "{run:?}");
    assert!(stdout(&run).contains("verdict=accept"));
}

#[test]
fn construct_fundamental_k3_has_period_50_and_verifies() {
    let catalog = tmp("l6r-fundamental.json");
    let run = ant()
        .args(["construct", "--family", "l2kr", "--k", "3"])
        .args(["--variant", "fundamental"])
        .args(["--out", catalog.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(run.status.success(), "{run:?}");
    assert!(stdout(&run).contains("constructed period=50"));

    let run = ant()
        .args(["verify", "--catalog", catalog.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(run.status.success());
}

#[test]
fn construct_llrlrl_n5_has_period_340() {
    let catalog = tmp("llrlrl-n5.json");
    let run = ant()
        .args(["construct", "--family", "llrlrl", "--n", "5"])
        .args(["--out", catalog.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(run.status.success(), "{run:?}");
    assert!(stdout(&run).contains("constructed period=340"));

    let run = ant()
        .args(["verify", "--catalog", catalog.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(run.status.success());
}

#[test]
fn tampered_catalog_record_exits_one_with_reason() {
    let catalog = tmp("tampered.json");
    let run = ant()
        .args(["construct", "--family", "l2kr", "--k", "2"])
        .args(["--out", catalog.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(run.status.success());
    let text = std::fs::read_to_string(&catalog).unwrap();
    // Halving the period breaks the recurrence.
    let text = text.replace("\"period\": 34", "\"period\": 17");
    std::fs::write(&catalog, text).unwrap();

    let run = ant()
        .args(["verify", "--catalog", catalog.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(1));
    assert!(stdout(&run).contains("verdict=reject"));
    assert!(!run.stderr.is_empty(), "reject reason goes to stderr");
}

#[test]
fn census_reports_and_checkpoints() {
    let report = tmp("census.json");
    let csv = tmp("census.csv");
    let checkpoint = tmp("census.ckpt");
    let run = ant()
        .args(["census", "--rule", "LR", "--runs", "96", "--seed", "7"])
        .args(["--workers", "2"])
        .args(["--out", report.to_str().unwrap()])
        .args(["--csv", csv.to_str().unwrap()])
        .args(["--checkpoint", checkpoint.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(run.status.success(), "{run:?}");
    let text = stdout(&run);
    assert!(text.contains("runs=96 highways=96 no_highway=0"), "{text}");
    assert!(text.contains("period=104 count=96"));
    assert!(checkpoint.exists());

    let json = std::fs::read_to_string(&report).unwrap();
    assert!(json.contains("\"total_runs\": 96"));
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("period,count,frequency\n"));
    assert!(csv_text.contains("104,96,1\n"));
}

#[test]
fn usage_errors_exit_two() {
    let run = ant().args(["census", "--rule", "LR"]).output().unwrap();
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn mine_llr_finds_the_single_class() {
    let catalog = tmp("llr-mined.json");
    let run = ant()
        .args(["mine", "--rule", "LLR", "--budget", "64", "--seed", "5"])
        .args(["--distinct", "1", "--workers", "2"])
        .args(["--out", catalog.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(run.status.success(), "{run:?}");
    assert!(stdout(&run).contains("highway period=18"));

    let run = ant()
        .args(["verify", "--catalog", catalog.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(run.status.success());
}

#[test]
fn llrr_butterfly_render_is_mirror_symmetric() {
    // LLRR from white builds closed trajectories with bilateral symmetry
    // about the horizontal axis between rows 0 and -1; rendered over a
    // region symmetric about that axis, the raster equals its row mirror.
    let out = tmp("llrr_817888.pgm");
    let run = ant()
        .args(["simulate", "--rule", "LLRR", "--white", "--steps", "817888"])
        .args(["--render", out.to_str().unwrap()])
        .args(["--cell-px", "1", "--no-ant-marker", "--region=-50,-50,30,49"])
        .output()
        .unwrap();
    assert!(run.status.success(), "{run:?}");
    let bytes = std::fs::read(&out).unwrap();
    let text = String::from_utf8_lossy(&bytes);
    let mut header_lines = text.splitn(4, '\n');
    assert_eq!(header_lines.next(), Some("P5"));
    let dims = header_lines.next().unwrap();
    let (w, h): (usize, usize) = {
        let mut it = dims.split(' ');
        (
            it.next().unwrap().parse().unwrap(),
            it.next().unwrap().parse().unwrap(),
        )
    };
    let header_len = bytes.len() - w * h;
    let raster = &bytes[header_len..];
    for row in 0..h {
        let top = &raster[row * w..(row + 1) * w];
        let bottom = &raster[(h - 1 - row) * w..(h - row) * w];
        assert_eq!(top, bottom, "row {row} breaks the mirror");
    }
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

#[test]
fn pgm_render_matches_golden_bytes() {
    let out = tmp("lr_white_500.pgm");
    let run = ant()
        .args(["simulate", "--rule", "LR", "--white", "--steps", "500"])
        .args(["--render", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(run.status.success(), "{run:?}");
    assert_eq!(
        std::fs::read(&out).unwrap(),
        std::fs::read(golden("lr_white_500.pgm")).unwrap(),
        "PGM output drifted from the golden file"
    );
}

#[test]
fn svg_render_matches_golden_bytes() {
    let out = tmp("llr_white_300.svg");
    let run = ant()
        .args(["simulate", "--rule", "LLR", "--white", "--steps", "300"])
        .args(["--render", out.to_str().unwrap(), "--cell-px", "6"])
        .output()
        .unwrap();
    assert!(run.status.success(), "{run:?}");
    assert_eq!(
        std::fs::read(&out).unwrap(),
        std::fs::read(golden("llr_white_300.svg")).unwrap(),
        "SVG output drifted from the golden file"
    );
}
