use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SCHEDULE: &str = r#"
[[cohort]]
year = 1950
new_nodes = 300
mean_team_size = 2.0
law = { law = "weibull", k = 0.5, lambda = 5.0 }

[[cohort]]
year = 1951
new_nodes = 300
law = { law = "fixed", years = 3.0 }
"#;

const OUTPUTS: [&str; 4] = ["cohorts.tsv", "cohort_totals.tsv", "fits.tsv", "single_year.tsv"];

fn collabspan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collabspan"))
        .args(args)
        .output()
        .expect("spawn collabspan")
}

fn ok(args: &[&str]) -> Output {
    let out = collabspan(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Generates the two-cohort event file into `dir`.
fn events(dir: &Path) -> PathBuf {
    let schedule = dir.join("schedule.toml");
    std::fs::write(&schedule, SCHEDULE).unwrap();
    let input = dir.join("events.csv");
    ok(&["generate", "--schedule", s(&schedule), "--seed", "3", "--out", s(&input)]);
    input
}

fn data_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(str::to_owned)
        .collect()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere.csv");
    let out = collabspan(&["analyze", "--input", s(&missing), "--out", s(&dir.path().join("out"))]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("nowhere.csv"), "{stderr}");
}

#[test]
fn analyze_writes_one_row_per_cohort() {
    let dir = tempfile::tempdir().unwrap();
    let input = events(dir.path());
    let out = dir.path().join("out");
    ok(&["analyze", "--input", s(&input), "--out", s(&out)]);
    for name in OUTPUTS.iter().chain(["manifest.toml"].iter()) {
        assert!(out.join(name).is_file(), "{name} missing");
    }

    let totals = data_rows(&out.join("cohort_totals.tsv"));
    let node_cohorts: Vec<&str> = totals
        .iter()
        .filter(|r| r.starts_with("node\t"))
        .map(|r| r.split('\t').nth(1).unwrap())
        .collect();
    assert_eq!(node_cohorts, ["1948", "1949"]);

    let single = data_rows(&out.join("single_year.tsv"));
    assert_eq!(single.len(), node_cohorts.len());

    // Every variant has a row per cohort, fitted or not.
    let fits = data_rows(&out.join("fits.tsv"));
    assert_eq!(fits.len(), 3 * totals.len());
    let fixed = fits
        .iter()
        .find(|r| r.starts_with("node\tpowerlaw\t1949\t"))
        .expect("row for the fixed-lifetime cohort");
    assert!(fixed.ends_with("nofit: insufficient bins at or above xmin (1 < 2)"), "{fixed}");
}

#[test]
fn reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = events(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["analyze", "--input", s(&input), "--out", s(&a)]);
    ok(&["analyze", "--input", s(&input), "--out", s(&b), "--threads", "1"]);
    for name in OUTPUTS.iter().chain(["manifest.toml"].iter()) {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
    }
}

#[test]
fn sweep_of_one_point_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = events(dir.path());
    let out = collabspan(&[
        "sensitivity",
        "--input",
        s(&input),
        "--out",
        s(&dir.path().join("out")),
        "--taus",
        "2",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least two"));
}

#[test]
fn zero_sigma_matches_fixed_duration() {
    let dir = tempfile::tempdir().unwrap();
    let input = events(dir.path());
    let fixed = dir.path().join("fixed");
    let gauss = dir.path().join("gauss");
    ok(&["analyze", "--input", s(&input), "--out", s(&fixed), "--tau-project", "2"]);
    ok(&[
        "analyze",
        "--input",
        s(&input),
        "--out",
        s(&gauss),
        "--duration-model",
        "gaussian",
        "--tau-project",
        "2",
        "--sigma",
        "0",
        "--seed",
        "9",
    ]);
    for name in OUTPUTS {
        assert_eq!(read(&fixed, name), read(&gauss, name), "{name}");
    }
}

#[test]
fn sensitivity_writes_tables_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let input = events(dir.path());
    let out = dir.path().join("out");
    ok(&[
        "sensitivity",
        "--input",
        s(&input),
        "--out",
        s(&out),
        "--taus",
        "1,2",
        "--gaussian",
        "2:0.5",
    ]);
    for sub in ["fixed-1", "fixed-2", "gaussian-2-0.5"] {
        assert!(out.join(sub).join("fits.tsv").is_file(), "{sub}");
    }
    let summary = data_rows(&out.join("sensitivity_summary.tsv"));
    assert!(summary.iter().any(|r| r.starts_with("node\tweibull\tfixed:2\t")), "{summary:?}");
    assert!(out.join("sensitivity.tsv").is_file());
}

#[test]
fn generated_file_reingests_and_records_seed() {
    let dir = tempfile::tempdir().unwrap();
    let input = events(dir.path());
    let manifest: toml::Table = std::fs::read_to_string(dir.path().join("events.csv.manifest.toml"))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(manifest["seed"].as_integer(), Some(3));
    assert_eq!(manifest["stats"]["participants"].as_integer(), Some(600));

    let out = dir.path().join("out");
    let run = ok(&["analyze", "--input", s(&input), "--out", s(&out)]);
    assert!(String::from_utf8_lossy(&run.stderr).contains("600 participants"));
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let input = events(dir.path());
    let first = dir.path().join("first");
    ok(&[
        "analyze",
        "--input",
        s(&input),
        "--out",
        s(&first),
        "--tau-project",
        "1.5",
        "--variants",
        "weibull,powerlaw",
        "--max-lifetime",
        "40",
    ]);
    let again = dir.path().join("again");
    ok(&["analyze", "--config", s(&first.join("manifest.toml")), "--out", s(&again)]);
    for name in OUTPUTS {
        assert_eq!(read(&first, name), read(&again, name), "{name}");
    }
}
