use std::process::{Command, Output};

use apery_core::casebook::AperyReport;

fn apery(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apery")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn temp_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("apery-cli-{}-{name}", std::process::id()))
}

#[test]
fn periods_of_v10() {
    let o = apery(&["periods", "v10", "--terms", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1 6 114 2940 87570");
    let o = apery(&["periods", "v10", "--terms", "5", "--no-prune"]);
    assert_eq!(stdout(&o).trim(), "1 6 114 2940 87570");
}

#[test]
fn recognize_zeta3_over_six() {
    let o = apery(&["recognize", "--value", "0.2003428171932657142332896935852416651275", "--basis", "one,zeta3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "1/6 * zeta3");
}

#[test]
fn recognize_reads_files() {
    let path = temp_path("value.txt");
    std::fs::write(&path, "0.16449340668482264364724151666460251892189499012068\n").unwrap();
    let o = apery(&["recognize", "--value", path.to_str().unwrap(), "--basis", "one,zeta2"]);
    std::fs::remove_file(&path).ok();
    assert_eq!(stdout(&o).trim(), "1/10 * zeta2");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(apery(&["periods", "v11"]).status.code(), Some(2));
    assert_eq!(apery(&["periods", "v10", "--bogus"]).status.code(), Some(2));
    assert_eq!(apery(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(apery(&["periods", "a3"]).status.code(), Some(2));
}

#[test]
fn failed_checks_exit_one_and_name_the_check() {
    let o = apery(&["polytope", "ex32-2", "--check", "tempered"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("tempered"), "{}", stderr(&o));
    let o = apery(&["polytope", "ex32-1", "--check", "tempered"]);
    assert_eq!(o.status.code(), Some(0));
    let o = apery(&["polytope", "ex32-3", "--check", "volume"]);
    assert_eq!(stdout(&o).trim(), "volume 7");
    let o = apery(&["polytope", "p2-elliptic", "--check", "reflexive"]);
    assert_eq!(stdout(&o).trim(), "reflexive true");
}

#[test]
fn fit_from_case_and_stdin() {
    let o = apery(&["fit", "v14", "--order", "3", "--degree", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("D^3 - 26*t*D^3"), "{text}");
    let o = apery(&["fit", "v14", "--order", "2", "--degree", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("operator_fit"));

    let mut child = Command::new(env!("CARGO_BIN_EXE_apery"))
        .args(["fit", "--stdin", "--order", "1", "--degree", "1", "--guard", "5"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    {
        use std::io::Write;
        let central: Vec<String> = (0..15u32).map(|n| rug::Integer::from(rug::Integer::binomial_u(2 * n, n)).to_string()).collect();
        child.stdin.take().unwrap().write_all(central.join(" ").as_bytes()).unwrap();
    }
    let o = child.wait_with_output().unwrap();
    assert_eq!(stdout(&o).trim(), "D - 4*t*D - 2*t");
}

#[test]
fn limit_decimals_are_stable_under_precision_doubling() {
    let parse = |o: &Output| -> (String, f64) {
        let text = stdout(o);
        let value = text.lines().find_map(|l| l.strip_prefix("limit ")).unwrap().to_string();
        let err = text.lines().find_map(|l| l.strip_prefix("error_estimate ")).unwrap().parse().unwrap();
        (value, err)
    };
    let (lo, err) = parse(&apery(&["limit", "v12", "--terms", "200", "--precision", "256"]));
    let (hi, _) = parse(&apery(&["limit", "v12", "--terms", "200", "--precision", "512"]));
    // digits covered by the reported error bound must agree
    let safe = (-err.log10()).floor() as usize - 2;
    assert!(safe > 40);
    assert_eq!(lo[..safe], hi[..safe]);
    assert!(hi.len() > lo.len());
}

#[test]
fn thnf_prints_fixed_point() {
    let o = apery(&["thnf", "v16", "--coeff", "0", "--digits", "30"]);
    let text = stdout(&o);
    assert!(text.starts_with("re 8.41439832211715999779816713"), "{text}");
    assert_eq!(apery(&["thnf", "v16", "--coeff", "1"]).status.code(), Some(1));
}

#[test]
fn verify_report_round_trips_and_is_deterministic() {
    let first = temp_path("v16-a.json");
    let second = temp_path("v16-b.json");
    for p in [&first, &second] {
        let o = apery(&["verify", "v16", "--report", p.to_str().unwrap(), "--precision", "256", "--terms", "300"]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
    let read = |p: &std::path::Path| -> serde_json::Value { serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap() };
    let (a, b) = (read(&first), read(&second));
    std::fs::remove_file(&first).ok();
    std::fs::remove_file(&second).ok();
    let report_text = serde_json::to_string(&a["reports"][0]).unwrap();
    let report = AperyReport::from_json(&report_text).unwrap();
    assert_eq!(serde_json::to_value(&report).unwrap(), a["reports"][0]);
    let strip = |v: &serde_json::Value| {
        let r = AperyReport::from_json(&serde_json::to_string(&v["reports"][0]).unwrap()).unwrap();
        r.to_json_without_timings()
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(report.kappa.unwrap().exact.as_deref(), Some("32"));
}

#[test]
fn verify_all_passes() {
    let path = temp_path("all.json");
    let o = apery(&["verify", "all", "--report", path.to_str().unwrap()]);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let reports = doc["reports"].as_array().unwrap();
    let ids: Vec<&str> = reports.iter().map(|r| r["case"].as_str().unwrap()).collect();
    assert_eq!(&ids[..5], ["v10", "v12", "v14", "v16", "v18"]);
    assert!(reports.iter().all(|r| r["passed"] == true));
}
