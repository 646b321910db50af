//! Seeded pipeline outputs pinned against files in `tests/golden`.
//! Regenerate with `UPDATE_GOLDEN=1 cargo test --test golden`.

mod common;

use std::path::{Path, PathBuf};

use common::{benchmark_config, run, s};

const CONFIG: &str = r#"
[backtest]
models = ["lagged_regression", "nlinear"]
[covariates]
sets = ["none", "common"]
"#;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn check(produced: &Path, name: &str) {
    let actual = std::fs::read_to_string(produced).unwrap();
    let golden = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&golden).unwrap_or_else(|e| panic!("{}: {e}", golden.display()));
    assert_eq!(actual, expected, "{name} drifted from its golden file");
}

#[test]
fn seeded_pipeline_matches_golden_files() {
    let tmp = tempfile::tempdir().unwrap();
    let config = benchmark_config(tmp.path(), CONFIG);
    let out = tmp.path().join("out");
    for cmd in ["sparsity", "fill-eval"] {
        assert_eq!(run(&[cmd, "--config", s(&config), "--out", s(&out)]), 0);
    }
    assert_eq!(run(&["backtest", "--config", s(&config), "--out", s(&out)]), 0);

    let mut args = vec!["compare".to_string(), "--out".into(), s(&out).into()];
    for model in ["lagged_regression", "nlinear"] {
        for covs in ["none", "common"] {
            args.push("--report".into());
            args.push(s(&out.join(format!("reports/{model}__{covs}__expanding.json"))).into());
        }
    }
    assert_eq!(run(&args.iter().map(String::as_str).collect::<Vec<_>>()), 0);

    check(&out.join("sparsity.csv"), "sparsity.csv");
    check(&out.join("fill_eval.csv"), "fill_eval.csv");
    check(&out.join("summary.csv"), "summary.csv");
    check(&out.join("comparison.csv"), "comparison.csv");
    check(&out.join("comparison.txt"), "comparison.txt");
}
