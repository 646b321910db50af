mod common;

use common::{benchmark_config, run, s};
use panelcast::backtest::BacktestReport;
use panelcast::panel::Level;

const QUICK: &str = r#"
[train]
epochs = 2
[covariates]
sets = ["none"]
[expanding]
step = 12
"#;

#[test]
fn synth_writes_byte_stable_files() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run(&["synth", "--out", s(&a)]), 0);
    assert_eq!(run(&["synth", "--out", s(&b)]), 0);
    for name in ["events.csv", "hierarchy.csv", "static.csv", "ledger.json", "run.toml", "channels/dispensing.csv"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let c = tmp.path().join("c");
    assert_eq!(run(&["synth", "--out", s(&c), "--seed", "7"]), 0);
    assert_ne!(std::fs::read(a.join("events.csv")).unwrap(), std::fs::read(c.join("events.csv")).unwrap());
}

#[test]
fn bad_input_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "months = 10\n").unwrap();
    assert_eq!(run(&["synth", "--config", s(&bad), "--out", s(tmp.path())]), 2);

    let missing = tmp.path().join("missing.toml");
    std::fs::write(&missing, "[data]\nevents = \"nope.csv\"\nhierarchy = \"nope.csv\"\n").unwrap();
    assert_eq!(run(&["sparsity", "--config", s(&missing), "--out", s(tmp.path())]), 2);

    let unknown = tmp.path().join("unknown.toml");
    std::fs::write(&unknown, "[window]\ninput_len = 12\ncolour = 3\n").unwrap();
    assert_eq!(run(&["backtest", "--config", s(&unknown), "--out", s(tmp.path())]), 2);

    assert_eq!(run(&["backtest", "--out", s(tmp.path())]), 2);
    assert_eq!(run(&["frobnicate"]), 2);
}

#[test]
fn sparsity_and_fill_eval_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let config = benchmark_config(tmp.path(), "");
    let out = tmp.path().join("out");
    assert_eq!(run(&["sparsity", "--config", s(&config), "--out", s(&out)]), 0);
    let table = std::fs::read_to_string(out.join("sparsity.csv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "grouping,groupings,Yearly,Quarterly,Monthly,Weekly");
    assert_eq!(table.lines().count(), 4);

    assert_eq!(run(&["fill-eval", "--config", s(&config), "--out", s(&out)]), 0);
    let fill = std::fs::read_to_string(out.join("fill_eval.csv")).unwrap();
    assert_eq!(fill.lines().next().unwrap(), "channel,constant_mean,iterative_impute,exp_smooth");
    assert_eq!(fill.lines().count(), 3);
}

#[test]
fn backtest_covers_models_by_regimes_and_plots() {
    let tmp = tempfile::tempdir().unwrap();
    let config = benchmark_config(tmp.path(), QUICK);
    let out = tmp.path().join("out");
    assert_eq!(run(&["backtest", "--plot", "--config", s(&config), "--out", s(&out)]), 0);

    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 3 * 2, "{summary}");
    assert!(summary.lines().skip(1).all(|l| l.split(',').count() == 7));

    for model in ["lagged_regression", "nlinear", "tft_lite"] {
        let svg = std::fs::read_to_string(out.join("plots").join(format!("{model}__none.svg"))).unwrap();
        let doc = roxmltree::Document::parse(&svg).expect("well-formed SVG");
        let chart_a = doc.descendants().find(|n| n.attribute("id") == Some("chart-a")).unwrap();
        let lines: Vec<_> = chart_a.descendants().filter(|n| n.has_tag_name("polyline")).collect();
        assert_eq!(lines.len(), 2);
        assert!(lines.iter().all(|l| l.attribute("points").is_some_and(|p| p.split(' ').count() > 10)));
        let chart_b = doc.descendants().find(|n| n.attribute("id") == Some("chart-b")).unwrap();
        assert_eq!(chart_b.descendants().filter(|n| n.has_tag_name("polyline")).count(), 1);
    }

    let report = BacktestReport::from_json(&std::fs::read_to_string(out.join("reports/nlinear__none__expanding.json")).unwrap()).unwrap();
    assert_eq!(report.label(), "nlinear/none");
    assert_eq!(report.mode, "expanding");
}

#[test]
fn compare_of_a_duplicated_report_is_null() {
    let tmp = tempfile::tempdir().unwrap();
    let config = benchmark_config(tmp.path(), "[backtest]\nmodels = [\"lagged_regression\"]\nregimes = [\"split\"]\n[covariates]\nsets = [\"none\"]\n");
    let out = tmp.path().join("out");
    assert_eq!(run(&["backtest", "--config", s(&config), "--out", s(&out)]), 0);
    let report = out.join("reports/lagged_regression__none__split.json");
    let a = format!("first={}", s(&report));
    let b = format!("second={}", s(&report));
    let cmp = tmp.path().join("cmp");
    assert_eq!(run(&["compare", "--report", &a, "--report", &b, "--out", s(&cmp)]), 0);

    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(cmp.join("comparison.json")).unwrap()).unwrap();
    let levels = json["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 2, "state level has one region and is skipped");
    for level in levels {
        assert_eq!(level["statistic"], 0.0);
        assert_eq!(level["p_value"], 1.0);
        assert!(level["pairwise"].as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap()).all(|p| p == 1.0));
    }
    assert!(std::fs::read_to_string(cmp.join("comparison.csv")).unwrap().starts_with("level,config_a,config_b,p_value,same_architecture\n"));

    // Dropping one county from a copy must be reported by name.
    let mut partial = BacktestReport::from_json(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let dropped = partial.records.iter().find(|r| r.region.level() == Level::County).unwrap().region.clone();
    partial.records.retain(|r| r.region != dropped);
    let partial_path = tmp.path().join("partial.json");
    std::fs::write(&partial_path, partial.to_json().unwrap()).unwrap();
    let c = format!("partial={}", s(&partial_path));
    let err = panelcast::cli::compare(
        &panelcast::cli::RunConfig {
            compare: panelcast::cli::CompareConfig {
                reports: vec![
                    panelcast::cli::LabeledReport { label: "first".into(), path: report.clone() },
                    panelcast::cli::LabeledReport { label: "partial".into(), path: partial_path.clone() },
                ],
                ..Default::default()
            },
            ..Default::default()
        },
        &cmp,
    )
    .unwrap_err();
    assert!(err.to_string().contains(&dropped.to_string()), "{err}");
    assert_eq!(run(&["compare", "--report", &a, "--report", &c, "--out", s(&cmp)]), 2);
}
