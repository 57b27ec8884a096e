use std::process::{Command, Output};

use guesswork::exact::ExactResult;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_guesswork"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn bound_examples_print_short_values() {
    let out = run(&["bound", "--kind", "dictator", "--s", "1", "--delta", "0.1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0.6\n");

    let out = run(&["bound", "--kind", "gdic", "--epsilon", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0.5\n");

    let out = run(&["bound", "--kind", "majority", "--s", "2", "--delta", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0.25\n");
}

#[test]
fn exact_text_output_reports_unit_ratio_at_half_noise() {
    let out = run(&[
        "exact", "--channel", "bsc", "--delta", "0.5", "--n", "3", "--f", "majority",
        "--s", "1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("moment 4.5\n"), "{text}");
    assert!(text.ends_with("ratio 1.0\n"), "{text}");
}

#[test]
fn exact_json_deserializes() {
    let out = run(&[
        "exact", "--channel", "bec", "--epsilon", "0.5", "--n", "2", "--f", "gdic",
        "--json",
    ]);
    assert!(out.status.success());
    let r: ExactResult = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(r.n, 2);
    assert!((r.moment - 1.875).abs() < 1e-13);
    assert!((r.ratio - 0.75).abs() < 1e-13);
}

#[test]
fn named_and_hex_functions_agree() {
    let by_name = run(&[
        "exact", "--channel", "bsc", "--delta", "0.2", "--n", "3", "--f", "dictator-k:1",
    ]);
    let by_hex = run(&[
        "exact", "--channel", "bsc", "--delta", "0.2", "--n", "3", "--f", "hex:cc",
    ]);
    assert!(by_name.status.success() && by_hex.status.success());
    assert_eq!(stdout(&by_name), stdout(&by_hex));
}

#[test]
fn search_output_is_byte_identical_across_runs() {
    let args = ["search", "--channel", "bsc", "--delta", "0", "--n", "2", "--s", "1"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    let text = stdout(&a);
    assert_eq!(text, stdout(&b));
    assert!(text.contains("\"best_function_hex\": \"3\""), "{text}");
    assert!(text.contains("\"candidates_evaluated\": 16"), "{text}");
    assert!(!text.contains("wall_time"), "{text}");
}

#[test]
fn bec_search_reports_gdic_attainment() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "search", "--channel", "bec", "--epsilon", "0.3", "--n", "2", "--s", "1",
        "--out", report_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\"gdic_attains\": true"), "{text}");
    let on_disk = std::fs::read_to_string(&report_path).unwrap();
    assert_eq!(on_disk, format!("{text}"));
}

#[test]
fn curves_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str| {
        let path = dir.path().join(name);
        let out = run(&[
            "curves", "--figure", "bsc", "--s", "1", "--grid", "0:0.5:0.1",
            "--overlay-n", "2", "--conditional-bounds", "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        std::fs::read_to_string(path).unwrap()
    };
    let a = write("a.csv");
    let b = write("b.csv");
    assert_eq!(a, b);
    assert!(a.starts_with("param,value,kind,label,flags\n"));
    assert!(a.contains(",upper,dictator,"));
    assert!(a.contains(",lower,maxent-improved,conditional"));
    assert!(a.contains(",exact,search-min-n2,"));
}

#[test]
fn sdpi_recovers_the_symmetric_channel_constant() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bsc.txt");
    std::fs::write(&path, "2 2\n0.9 0.1\n0.1 0.9\n").unwrap();
    let out = run(&["sdpi", "--file", path.to_str().unwrap()]);
    assert!(out.status.success());
    let eta: f64 = stdout(&out).trim().parse().expect("float eta");
    assert!((eta - 0.64).abs() < 1e-4, "eta = {eta}");
}

#[test]
fn verify_suites_pass() {
    let out = run(&["verify", "--suite", "prop2", "--n", "3", "--epsilon", "0.3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("PASS"), "{text}");
    assert!(!text.contains("FAIL"), "{text}");

    let out = run(&[
        "verify", "--suite", "mc-majority", "--delta", "0.2", "--s", "1", "--samples",
        "200000", "--seed", "7",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
}

#[test]
fn usage_errors_exit_one() {
    // missing required parameter for the requested bound
    let out = run(&["bound", "--kind", "dictator", "--s", "1"]);
    assert_eq!(out.status.code(), Some(1));
    // unknown flag
    let out = run(&["bound", "--kind", "dictator", "--nope", "1"]);
    assert_eq!(out.status.code(), Some(1));
    // out-of-range parameter
    let out = run(&["bound", "--kind", "dictator", "--s", "1", "--delta", "0.7"]);
    assert_eq!(out.status.code(), Some(1));
    // block length above the default search cap
    let out = run(&["search", "--channel", "bsc", "--delta", "0.1", "--n", "5"]);
    assert_eq!(out.status.code(), Some(1));
    // help goes to stdout and succeeds
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("bound"));
}

#[test]
fn threads_flag_does_not_change_results() {
    let base = run(&["search", "--channel", "bsc", "--delta", "0.15", "--n", "3"]);
    let forced = run(&[
        "search", "--channel", "bsc", "--delta", "0.15", "--n", "3", "--threads", "1",
    ]);
    assert!(base.status.success() && forced.status.success());
    assert_eq!(stdout(&base), stdout(&forced));
}

#[test]
fn bad_matrix_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "2 2\n0.9 0.1\n0.1\n").unwrap();
    let out = run(&["sdpi", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    std::fs::write(&path, "2 2\n0.9 0.3\n0.1 0.9\n").unwrap();
    let out = run(&["sdpi", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let missing = dir.path().join("nope.txt");
    let out = run(&["sdpi", "--file", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
