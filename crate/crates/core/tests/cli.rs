use bec_order::cli::{run, EXIT_FAILS, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use bec_order::PolarWord;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("bec-order").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn compare_holds_for_the_first_pair() {
    let (code, out, _) = call(&["compare", "--left", "011", "--right", "100"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["holds"], true);
    assert!(v["min_gap"].as_f64().unwrap() >= -1e-12);
}

#[test]
fn compare_reports_a_witness_when_it_fails() {
    let (code, out, _) = call(&["compare", "--left", "100", "--right", "011"]);
    assert_eq!(code, EXIT_FAILS);
    let v = json(&out);
    assert_eq!(v["holds"], false);
    let x = v["witness"].as_f64().unwrap();
    assert!(x > 0.0 && x < 1.0);
}

#[test]
fn decide_one_one_fails_with_nine_sixteenths() {
    let (code, out, _) = call(&["decide", "--m", "1", "--n", "1"]);
    assert_eq!(code, EXIT_FAILS);
    let v = json(&out);
    assert_eq!(v["threshold_value"], 0.5625);
    assert_eq!(v["exact_threshold"], "9/16");
    let (code, out, _) = call(&["decide", "--m", "1", "--n", "2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["exact_threshold"], "81/256");
}

#[test]
fn decide_on_the_boundary_is_a_numerical_failure() {
    let (_, out, _) = call(&["m-of-m", "--m", "1.5"]);
    let big_m = json(&out)["M"].as_f64().unwrap();
    let (code, out, _) = call(&["decide", "--m", "1.5", "--n", &format!("{big_m:e}")]);
    assert_eq!(code, EXIT_NUMERICAL, "{out}");
}

#[test]
fn reproduce_ivp_row_two() {
    let (code, out, _) = call(&["reproduce", "--table", "ivp"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("t,Y,Z,P,Q,J,K"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 101);
    let row: Vec<&str> = rows.iter().find(|r| r.starts_with("2.0,")).unwrap().split(',').collect();
    assert_eq!(row[1], "0.10995");
    assert_eq!(row[4], "1.66897");
}

#[test]
fn usage_errors() {
    assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(call(&["compare", "--left", "01x", "--right", "1"]).0, EXIT_USAGE);
    assert_eq!(call(&["eval", "--word", "01", "--x", "1.5"]).0, EXIT_USAGE);
    assert_eq!(call(&["decide", "--m", "0", "--n", "1"]).0, EXIT_USAGE);
    let (code, _, err) = call(&["verify-grid"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--input"));
    assert_eq!(call(&["--help"]).0, EXIT_OK);
}

#[test]
fn eval_exact_fraction() {
    let (code, out, _) = call(&["eval", "--word", "01011", "--x", "1/2", "--exact"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["exact"], "2458930495/4294967296");
    assert!((v["value"].as_f64().unwrap() - 0.5725143698509783).abs() < 1e-15);
}

#[test]
fn printed_words_reparse_identically() {
    for text in ["011", "0^1.5 1^2", "0^2 0^3 1", "1^-0.25,0^3.5", "0 1 0 1 1"] {
        let (code, out, _) = call(&["eval", "--word", text, "--x", "0.3"]);
        assert_eq!(code, EXIT_OK);
        let printed = json(&out)["word"].as_str().unwrap().to_string();
        let original = PolarWord::parse(text).unwrap();
        assert_eq!(PolarWord::parse(&printed).unwrap(), original, "{text} -> {printed}");
    }
    let (_, out, _) = call(&["compare", "--left", "0^2 0 1", "--right", "1 1 0^3"]);
    let v = json(&out);
    for key in ["left", "right"] {
        let printed = v[key].as_str().unwrap();
        assert_eq!(PolarWord::parse(printed).unwrap().to_string(), printed);
    }
    let (_, out, _) = call(&["enumerate", "--max-len", "6"]);
    for line in out.lines() {
        let (a, b) = line.split_once(" >= ").unwrap();
        assert_eq!(PolarWord::parse(a).unwrap(), PolarWord::from_bits(a).unwrap());
        assert_eq!(PolarWord::parse(b).unwrap(), PolarWord::from_bits(b).unwrap());
    }
}

#[test]
fn out_files_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let runs = [
        vec!["reproduce", "--table", "integrals"],
        vec!["grid", "--width", "3", "--height", "2", "--delta", "0.125"],
        vec!["enumerate", "--max-len", "8"],
        vec!["ivp", "--t-max", "3", "--full"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let files: Vec<_> = (0..2).map(|k| dir.path().join(format!("{i}-{k}"))).collect();
        for f in &files {
            let mut a = args.clone();
            let p = f.to_str().unwrap();
            a.extend(["--out", p]);
            let (code, stdout, _) = call(&a);
            assert_eq!(code, EXIT_OK, "{args:?}");
            assert!(stdout.is_empty());
        }
        let (a, b) = (std::fs::read(&files[0]).unwrap(), std::fs::read(&files[1]).unwrap());
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn grid_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("grid.json");
    let p = file.to_str().unwrap();
    let (code, _, _) = call(&["grid", "--width", "4", "--height", "3", "--delta", "0.0625", "--out", p]);
    assert_eq!(code, EXIT_OK);
    let (code, out, _) = call(&["verify-grid", "--input", p]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert_eq!(out.lines().count(), 1 + 12);
}

#[test]
fn printed_labels_verify() {
    let labels = "0.616,0.632,0.677,0.764,0.906,1.122,1.450,1.969,2.818,4.211";
    let (code, out, _) = call(&["verify-grid", "--labels", labels, "--grid-tol", "1e-3"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert_eq!(out.lines().count(), 1 + 24);
}

#[test]
fn loop_and_transport() {
    let (code, out, _) = call(&["loop", "--mu", "2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["holds"], true);
    let (code, _, _) = call(&["loop", "--mu", "2", "--clockwise"]);
    assert_eq!(code, EXIT_OK);
    let (code, out, _) = call(&["transport", "--path", "0,0 2,0 2,2 0,2 0,0", "--x", "0.5"]);
    assert_eq!(code, EXIT_OK);
    assert!((json(&out)["value"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert_eq!(call(&["transport", "--path", "0,0 40,0", "--x", "0.5"]).0, EXIT_NUMERICAL);
    assert_eq!(call(&["transport", "--path", "0,0 1", "--x", "0.5"]).0, EXIT_USAGE);
}

#[test]
fn dyck_and_enumerate() {
    let (code, out, _) = call(&["dyck", "--word", "01011"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["criterion"], true);
    let (code, out, _) = call(&["dyck", "--word", "000111"]);
    assert_eq!(code, EXIT_FAILS);
    assert_eq!(json(&out)["failed_at"], 6);
    let (_, out, _) = call(&["enumerate", "--max-len", "6"]);
    assert!(out.lines().any(|l| l == "011 >= 100"));
    assert!(out.lines().any(|l| l == "001111 >= 110000"));
}

#[test]
fn pairs_and_integrals_tables() {
    let (code, out, _) = call(&["reproduce", "--table", "pairs"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 6);
    for line in out.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_ne!(cols[2], "none", "{line}");
        assert!(cols[3].parse::<f64>().unwrap() >= -1e-12, "{line}");
    }
    let (code, out, _) = call(&["integrals", "--mu", "2", "--t-max", "2"]);
    assert_eq!(code, EXIT_OK);
    let row: Vec<f64> = out.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!((row[3] - 0.5).abs() < 1e-4);
}

#[test]
fn tolerance_flag_beats_default() {
    let (code, a, _) = call(&["ivp", "--t-max", "1", "--full", "--tol", "1e-6"]);
    assert_eq!(code, EXIT_OK);
    let (_, b, _) = call(&["ivp", "--t-max", "1", "--full"]);
    assert_ne!(a, b);
    assert_eq!(call(&["ivp", "--step", "0"]).0, EXIT_USAGE);
}
