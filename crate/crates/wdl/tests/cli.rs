use serde_json::Value;
use wdl::cli::{execute, Outcome, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_IO, EXIT_PASS};

fn wdl(args: &str) -> Outcome {
    execute(std::iter::once("wdl").chain(args.split_whitespace()))
}

fn json(o: &Outcome) -> Value {
    serde_json::from_str(&o.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", o.stdout))
}

#[test]
fn identity_schedule_starts_at_unit_scale() {
    let o = wdl("schedule --family identity --depth 3");
    assert_eq!(o.code, EXIT_PASS, "{}", o.stderr);
    let v = json(&o);
    assert_eq!(v["schema"], "wdl/1");
    assert_eq!(v["alpha_log2"][0].as_f64(), Some(0.0));
}

#[test]
fn square_schedule_degrees() {
    let v = json(&wdl("schedule --family square --depth 1"));
    assert_eq!(v["degrees"], serde_json::json!([2, 2]));
}

#[test]
fn deep_schedule_reports_log_magnitudes() {
    let o = wdl("schedule --family par13 --depth 60");
    assert_eq!(o.code, EXIT_PASS);
    let a60 = json(&o)["alpha_log2"][60].as_f64().unwrap();
    assert!(a60.is_finite() && a60 < -1e17);
}

#[test]
fn schedule_tables() {
    let csv = wdl("schedule --family semi --depth 4 --format csv");
    assert!(csv.stdout.starts_with("n,ell_n,degree,alpha_log2"));
    assert_eq!(csv.stdout.lines().count(), 6);
    let md = wdl("schedule --family semi --depth 4 --format md");
    assert!(md.stdout.starts_with("| n | ell_n |"));
}

#[test]
fn examples_from_the_command_line() {
    let a = wdl("example --id 3a --depth 30");
    assert_eq!(a.code, EXIT_PASS, "{}", a.stderr);
    let v = json(&a);
    assert_eq!(v["hyperbolic_class"], "eventually_isometric");
    assert_eq!(v["boundary_class"], "bungee");

    let b = wdl("example --id 1b --depth 40");
    assert_eq!(b.code, EXIT_PASS, "{}", b.stderr);
    assert_eq!(json(&b)["hyperbolic_class"], "contracting");
    assert_eq!(json(&b)["boundary_class"], "converging");

    let c = wdl("example --id 2b --seed 7 --envelope 0.9");
    assert_eq!(c.code, EXIT_PASS, "{}", c.stderr);
    assert_eq!(json(&c)["hyperbolic_class"], "semi_contracting");
    assert_eq!(json(&c)["boundary_class"], "converging");
}

#[test]
fn report_lists_all_six() {
    let o = wdl("report --depth 30 --format csv");
    assert_eq!(o.code, EXIT_PASS, "{}", o.stderr);
    assert_eq!(o.stdout.lines().count(), 7);
    let v = json(&wdl("report --depth 30"));
    assert_eq!(v["examples"].as_array().unwrap().len(), 6);
}

#[test]
fn lemma_sweeps() {
    let o = wdl("verify --lemma 4.2 --grid 99x999");
    assert_eq!(o.code, EXIT_PASS, "{}", o.stderr);
    let v = json(&o);
    assert!(v["items"][0]["detail"]["min_margin"].as_f64().unwrap() > 0.0);
    for lemma in ["hyperbolic --grid 12x200", "semi", "rates", "orbit-error --depth 8 --draws 5", "2.4 --grid 8x50"] {
        let o = wdl(&format!("verify --lemma {lemma}"));
        assert_eq!(o.code, EXIT_PASS, "{lemma}: {}", o.stderr);
    }
}

#[test]
fn full_suite_and_negative_control() {
    let o = wdl("verify --family semi --depth 8 --draws 3");
    assert_eq!(o.code, EXIT_PASS, "{}", o.stderr);
    let v = json(&o);
    assert_eq!(v["passed"], true);
    let names: Vec<&str> = v["items"].as_array().unwrap().iter().map(|i| i["name"].as_str().unwrap()).collect();
    for want in ["laws", "disjointness", "reefs", "surrounds", "kn_bracket", "eps_definition"] {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }

    let bad = wdl("verify --family square --depth 8 --draws 3 --envelope 8.0");
    assert_eq!(bad.code, EXIT_FAIL);
    assert!(bad.stderr.contains("surrounds: fail"), "{}", bad.stderr);
}

#[test]
fn output_is_deterministic() {
    for args in ["schedule --family att12 --depth 6", "example --id 2a --depth 12 --seed 3", "orbit --family att56 --depth 6 --seed 5"] {
        assert_eq!(wdl(args).stdout, wdl(args).stdout, "{args}");
    }
}

#[test]
fn orbit_formats() {
    let o = wdl("orbit --family square --depth 5 --start 4.02,0.01");
    assert_eq!(o.code, EXIT_PASS, "{}", o.stderr);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines.len(), wdl::ell(5).unwrap() as usize + 1);
    let first: Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(first["m"], 0);
    let csv = wdl("orbit --family square --depth 5 --format csv");
    assert_eq!(csv.stdout.lines().count(), 7);
}

#[test]
fn usage_errors_and_infeasible_input() {
    assert_eq!(wdl("schedule --family nosuch").code, EXIT_INCONCLUSIVE);
    assert_eq!(wdl("schedule --depth 0").code, EXIT_INCONCLUSIVE);
    assert_eq!(wdl("example --id 9z").code, EXIT_INCONCLUSIVE);
    assert_eq!(wdl("example --id 1a --envelope 1.5").code, EXIT_INCONCLUSIVE);
    assert_eq!(wdl("verify --lemma 4.2 --grid 99by999").code, EXIT_INCONCLUSIVE);
    assert_eq!(wdl("frobnicate").code, EXIT_INCONCLUSIVE);
    assert_eq!(wdl("--help").code, EXIT_PASS);
}

#[test]
fn writes_to_output_file() {
    let dir = std::env::temp_dir().join(format!("wdl-cli-{}", std::process::id()));
    let path = dir.join("nested").join("s.json");
    let o = wdl(&format!("schedule --family identity --depth 2 --output {}", path.display()));
    assert_eq!(o.code, EXIT_PASS, "{}", o.stderr);
    assert!(o.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["family"], "identity");

    // a regular file where a directory is needed
    let blocked = dir.join("nested").join("s.json").join("x.json");
    assert_eq!(wdl(&format!("schedule --output {}", blocked.display())).code, EXIT_IO);
    std::fs::remove_dir_all(&dir).unwrap();
}
