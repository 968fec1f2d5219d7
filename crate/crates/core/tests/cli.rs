use std::path::Path;
use std::process::{Command, Output};

use mandelbrot_rows::analysis::{read_csv, ReportRow};
use mandelbrot_rows::image::ppm_len;
use mandelbrot_rows::partition::{expected_message_count, Scheme};
use regex::Regex;
use tempfile::TempDir;

const SMALL: [&str; 6] = ["--width", "48", "--height", "40", "--max-iterations", "120"];

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mandelbrot-rows"))
        .env("MANDELBROT_ROWS_OUTPUT_DIR", dir)
        .args(args)
        .output()
        .expect("spawn binary")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn render(dir: &Path, scheme: &str, tasks: &str, name: &str) -> Vec<u8> {
    let path = dir.join(name);
    let mut args = vec!["render", "--scheme", scheme, "--tasks", tasks, "--output", path.to_str().unwrap()];
    args.extend(SMALL);
    let out = bin(dir, &args);
    assert!(out.status.success(), "{scheme}: {}", String::from_utf8_lossy(&out.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn render_prints_progress_and_timings() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["render", "--scheme", "alternating", "--tasks", "3"];
    args.extend(SMALL);
    let out = bin(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let expected = Regex::new(
        r"(?m)\AFile: .*Mandelbrot\.ppm successfully opened for writing\.
Computing Mandelbrot Set\. Please wait\.\.\.
Mandelbrot computational process time: \d+\.\d{6}
Completed Computing Mandelbrot Set\.
File: .*Mandelbrot\.ppm successfully closed\.
Mandelbrot total process time: \d+\.\d{6}
Messages sent: 2
\z",
    )
    .unwrap();
    assert!(expected.is_match(&text), "{text}");
    let image = std::fs::read(dir.path().join("Mandelbrot.ppm")).unwrap();
    assert_eq!(image.len(), ppm_len(48, 40));
}

#[test]
fn every_scheme_writes_the_serial_image() {
    let dir = TempDir::new().unwrap();
    let serial = render(dir.path(), "serial", "1", "serial.ppm");
    for (scheme, tasks) in [("naive", "3"), ("fcfs", "4"), ("alternating", "3")] {
        assert_eq!(render(dir.path(), scheme, tasks, &format!("{scheme}.ppm")), serial, "{scheme}");
    }
    // rerunning is byte-identical too
    assert_eq!(render(dir.path(), "fcfs", "4", "fcfs.ppm"), serial);
}

#[test]
fn socket_transport_from_cli() {
    let dir = TempDir::new().unwrap();
    let serial = render(dir.path(), "serial", "1", "serial.ppm");
    let path = dir.path().join("sock.ppm");
    let mut args = vec!["render", "--scheme", "fcfs", "--tasks", "3", "--transport", "socket"];
    args.extend(["--output", path.to_str().unwrap()]);
    args.extend(SMALL);
    let out = bin(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("Messages sent: 80"));
    assert_eq!(std::fs::read(path).unwrap(), serial);
}

#[test]
fn invalid_arguments_exit_with_usage_code() {
    let dir = TempDir::new().unwrap();
    for args in [
        vec!["render", "--tasks", "0"],
        vec!["render", "--scheme", "fcfs", "--tasks", "1"],
        vec!["render", "--scheme", "serial", "--tasks", "2"],
        vec!["render", "--scheme", "naive", "--tasks", "50", "--height", "10"],
        vec!["render", "--re-min", "1", "--re-max", "1"],
        vec!["render", "--scheme", "bogus"],
        vec!["bench", "--reps", "0"],
        vec!["frobnicate"],
    ] {
        let out = bin(dir.path(), &args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let out = bin(dir.path(), &["render", "--width", "8", "--height", "8", "--output", "/nonexistent/dir/x.ppm"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bench_then_report() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["bench", "--schemes", "naive,fcfs,alternating", "--tasks", "2,4", "--reps", "2"];
    args.extend(SMALL);
    let out = bin(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(dir.path().join("Mandelbrot.ppm")).unwrap().len(), ppm_len(48, 40));

    let csv_path = dir.path().join("bench.csv");
    let rows: Vec<ReportRow> = read_csv(std::fs::File::open(&csv_path).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let scheme: Scheme = row.scheme.parse().unwrap();
        assert_eq!(row.repetitions, 2);
        assert_eq!(row.messages, Some(expected_message_count(scheme, 40, row.tasks).unwrap()));
        assert!(row.actual_speedup.unwrap() > 0.0);
        let t = row.theoretical_speedup.unwrap();
        assert!(t >= 1.0 && t <= row.tasks as f64 + 1e-9);
    }

    let out = bin(dir.path(), &["report", "--input", csv_path.to_str().unwrap()]);
    assert!(out.status.success());
    let table = stdout(&out);
    assert_eq!(table.lines().filter(|l| l.contains(" ok")).count(), 6, "{table}");
    assert!(table.lines().next().unwrap().contains("% diff"));
}

#[test]
fn report_without_input_prints_model_table() {
    let dir = TempDir::new().unwrap();
    let out = bin(dir.path(), &["report"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for value in ["1.99440", "3.96659", "7.84583", "15.35350", "29.43820"] {
        assert!(text.contains(value), "{value} missing from\n{text}");
    }
}
