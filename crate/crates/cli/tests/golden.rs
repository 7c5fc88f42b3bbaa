//! Byte-exact JSON output. Set `CHIRAL_BLESS=1` to rewrite the expected files
//! after an intentional schema change.

use std::path::PathBuf;
use std::process::Command;

const CASES: &[(&str, &[&str])] = &[
    ("ope_virasoro", &["ope", "T", "T"]),
    ("nf_lemma", &["nf", ":T d T: - :d T T:"]),
    ("rp_nested", &["rp", "T", "1", ":T T:"]),
    ("wick_left_virasoro", &["wick-left", "T", "T", "T"]),
    (
        "wick_right_sugawara",
        &["--preset", "su2", "wick-right", "sum(b){J^b}", "J^b", "J^a"],
    ),
    (
        "check_borcherds",
        &["check-borcherds", "T", "T", "T", "--window", "0..2,0..2,0..2"],
    ),
    ("check_algebra_su2", &["--preset", "su2", "check-algebra", "--cutoff", "2"]),
    ("check_algebra_broken", &["--algebra", "@broken.alg", "check-algebra", "--cutoff", "2"]),
    (
        "oracle_vacuum",
        &["oracle-verify", "T_(1) :T T:", "--bindings", "c=1/2", "--level", "6"],
    ),
    ("script_sugawara", &["run", "@sugawara.chiral"]),
    ("show_algebra", &["--algebra", "@virasoro.alg", "show-algebra"]),
];

fn dir(sub: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join(sub)
}

#[test]
fn json_output_matches_golden_files() {
    let bless = std::env::var_os("CHIRAL_BLESS").is_some();
    let mut stale = Vec::new();
    for (name, args) in CASES {
        let args: Vec<String> = args
            .iter()
            .map(|a| match a.strip_prefix('@') {
                Some(file) => dir("data").join(file).to_string_lossy().into_owned(),
                None => a.to_string(),
            })
            .collect();
        let out = Command::new(env!("CARGO_BIN_EXE_chiral"))
            .arg("--format")
            .arg("json")
            .args(&args)
            .env_remove("CHIRAL_STEP_BUDGET")
            .output()
            .expect("binary runs");
        assert!(out.status.code().unwrap() <= 1, "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let actual = String::from_utf8(out.stdout).unwrap();
        serde_json::from_str::<serde_json::Value>(&actual).expect("valid JSON");
        let path = dir("golden").join(format!("{name}.json"));
        if bless {
            std::fs::write(&path, &actual).unwrap();
            continue;
        }
        let expected = std::fs::read_to_string(&path).unwrap_or_default();
        if expected != actual {
            stale.push(*name);
        }
    }
    assert!(stale.is_empty(), "JSON output differs from golden files: {stale:?}");
}

#[test]
fn every_report_carries_the_schema_version() {
    for entry in std::fs::read_dir(dir("golden")).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schema"], "chiral-cli/1");
    }
}
