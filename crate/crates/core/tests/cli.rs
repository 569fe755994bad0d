mod common;

use common::{bowl_dem, composite_dem};
use flatdrain::raster::{read_ascii_grid, write_ascii_grid};
use flatdrain::Grid;
use std::fs::{self, File};
use std::path::Path;
use std::process::{Command, Output};

fn flatdrain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatdrain"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_dem(path: &Path, dem: &Grid<f64>) {
    write_ascii_grid(dem, File::create(path).unwrap()).unwrap();
}

fn read(path: &Path) -> Grid<f64> {
    read_ascii_grid(File::open(path).unwrap()).unwrap()
}

#[test]
fn worked_example_round_trip_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let dem = dir.path().join("dem.asc");
    let dirs = dir.path().join("dirs.asc");
    let out = flatdrain(&["gen", "paper-example", "--out", p(&dem)]);
    assert!(out.status.success());

    let out = flatdrain(&["flowdirs", p(&dem), p(&dirs), "--edge-policy", "pseudocode"]);
    assert_eq!(out.status.code(), Some(0));
    let codes = read(&dirs);
    let zeros = (1..6)
        .flat_map(|r| (1..6).map(move |c| (r, c)))
        .filter(|&(r, c)| codes.to_rows()[r][c] == 0.0)
        .count();
    assert_eq!(zeros, 22);
}

#[test]
fn resolve_writes_every_requested_raster() {
    let dir = tempfile::tempdir().unwrap();
    let dem = dir.path().join("dem.asc");
    let mask = dir.path().join("mask.asc");
    let labels = dir.path().join("labels.asc");
    let dirs = dir.path().join("dirs.asc");
    let altered = dir.path().join("altered.asc");
    flatdrain(&["gen", "paper-example", "--out", p(&dem)]);
    let out = flatdrain(&[
        "resolve",
        p(&dem),
        "--flatmask",
        p(&mask),
        "--labels",
        p(&labels),
        "--flowdirs",
        p(&dirs),
        "--alter",
        p(&altered),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("outcome=AllDrainable"), "{stdout}");
    assert!(stdout.contains("significance_violations=0"), "{stdout}");

    assert_eq!(
        read(&mask).to_rows()[1],
        vec![0.0, 12.0, 12.0, 12.0, 12.0, 12.0, 0.0]
    );
    assert_eq!(
        read(&labels)
            .as_slice()
            .iter()
            .filter(|&&v| v == 1.0)
            .count(),
        25
    );
    assert!(read(&dirs).as_slice().iter().all(|&v| v > 0.0));
    assert!(read(&altered).to_rows()[1][1] > 1.0);
}

#[test]
fn bowl_exits_with_none_drainable() {
    let dir = tempfile::tempdir().unwrap();
    let dem = dir.path().join("bowl.asc");
    let mask = dir.path().join("mask.asc");
    write_dem(&dem, &bowl_dem());
    let out = flatdrain(&["resolve", p(&dem), "--flatmask", p(&mask)]);
    assert_eq!(out.status.code(), Some(5));
    assert!(read(&mask).as_slice().iter().all(|&v| v == 0.0));
}

#[test]
fn composite_exits_with_some_undrainable() {
    let dir = tempfile::tempdir().unwrap();
    let dem = dir.path().join("composite.asc");
    write_dem(&dem, &composite_dem());
    let out = flatdrain(&["resolve", p(&dem)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("outcome=SomeUndrainable"));
}

#[test]
fn malformed_header_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let dem = dir.path().join("bad.asc");
    fs::write(&dem, "ncols 3\nnrows two\n1 2 3\n4 5 6\n").unwrap();
    let out = flatdrain(&["resolve", p(&dem)]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = flatdrain(&["resolve", p(&dir.path().join("absent.asc"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn colliding_output_paths_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let dem = dir.path().join("dem.asc");
    flatdrain(&["gen", "paper-example", "--out", p(&dem)]);
    let before = fs::read(&dem).unwrap();
    let out = flatdrain(&["resolve", p(&dem), "--flatmask", p(&dem)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(fs::read(&dem).unwrap(), before);
}

#[test]
fn gen_square_flat_has_the_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let dem = dir.path().join("square.asc");
    let out = flatdrain(&["gen", "square-flat", "--side", "100", "--out", p(&dem)]);
    assert!(out.status.success());
    let g = read(&dem);
    assert_eq!((g.rows(), g.cols()), (102, 102));
    assert_eq!(g.as_slice().iter().filter(|&&v| v == 0.0).count(), 1);

    let out = flatdrain(&["gen", "square-flat", "--side", "3", "--out", p(&dem)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_random_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.asc");
    let b = dir.path().join("b.asc");
    for path in [&a, &b] {
        let out = flatdrain(&[
            "gen",
            "random",
            "--rows",
            "20",
            "--cols",
            "30",
            "--seed",
            "7",
            "--out",
            p(path),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn bench_writes_one_row_per_side_and_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let out = flatdrain(&["bench", "--sides", "10,20", "--reps", "3", "--out", p(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("algorithm,side,cells,seconds,visits"));
    assert_eq!(lines.count(), 4);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("algorithm,exponent\n"), "{stdout}");

    let out = flatdrain(&["bench", "--sides", "10", "--reps", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(flatdrain(&["smooth"]).status.code(), Some(2));
    assert_eq!(flatdrain(&["--help"]).status.code(), Some(0));
}

#[test]
fn run_can_be_driven_in_process() {
    let dir = tempfile::tempdir().unwrap();
    let dem = dir.path().join("bowl.asc");
    write_dem(&dem, &bowl_dem());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = flatdrain::cli::run(["flatdrain", "resolve", p(&dem)], &mut out, &mut err);
    assert_eq!(code, flatdrain::cli::EXIT_NONE_DRAINABLE);
    let line = String::from_utf8(out).unwrap();
    assert!(
        line.starts_with("flat_count=1 drainable_flat_count=0 "),
        "{line}"
    );
}
