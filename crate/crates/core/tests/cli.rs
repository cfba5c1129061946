mod common;

use common::{completion, prompt_of, write_json, StubServer};
use moralbench::adapters::{
    read_records, PolicyRule, PolicySpec, RespondentKind, RespondentSpec, TieBreak,
};
use moralbench::cli::{sha256_hex, AmceReport, RunManifest};
use moralbench::compare::ComparisonReport;
use moralbench::stats::Attribute;
use std::path::{Path, PathBuf};
use std::process::Command;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn mb(dir: &Path, args: &[&str]) -> Out {
    let o = Command::new(env!("CARGO_BIN_EXE_moralbench"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    Out {
        code: o.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&o.stdout).into(),
        stderr: String::from_utf8_lossy(&o.stderr).into(),
    }
}

fn ok(dir: &Path, args: &[&str]) -> Out {
    let o = mb(dir, args);
    assert_eq!(
        o.code, 0,
        "{args:?}\nstdout: {}\nstderr: {}",
        o.stdout, o.stderr
    );
    o
}

fn synthetic(dir: &Path, name: &str, policy: PolicySpec) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    write_json(&path, &RespondentSpec::synthetic(name, policy));
    path
}

fn lex(rules: Vec<PolicyRule>) -> PolicySpec {
    PolicySpec::lexicographic(rules, TieBreak::CoinFlip { seed: 11 })
}

fn lines(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn zero_scenarios_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = mb(dir.path(), &["generate", "--n", "0"]);
    assert_eq!(o.code, 2, "{}", o.stderr);
    let o = mb(dir.path(), &["frobnicate"]);
    assert_eq!(o.code, 2);
}

#[test]
fn generation_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        ok(
            dir.path(),
            &["--out", out, "generate", "--n", "1000", "--seed", "42"],
        );
    }
    let a = std::fs::read(dir.path().join("a/deck.jsonl")).unwrap();
    let b = std::fs::read(dir.path().join("b/deck.jsonl")).unwrap();
    assert_eq!(sha256_hex(&a), sha256_hex(&b));
    let m = RunManifest::load_or_new(&dir.path().join("a"));
    assert_eq!(m.files["deck.jsonl"].sha256, sha256_hex(&a));
    assert!(m.commands.contains_key("generate"));
}

#[test]
fn full_size_deck() {
    let dir = tempfile::tempdir().unwrap();
    let o = ok(dir.path(), &["generate", "--n", "50000", "--seed", "1"]);
    assert!(o.stdout.contains("50000 scenarios"));
    assert_eq!(lines(&dir.path().join("out/deck.jsonl")), 50_000);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"outDir": "fromcfg", "generate": {"count": 30, "seed": 9}}"#,
    )
    .unwrap();
    ok(dir.path(), &["--config", "cfg.json", "generate"]);
    assert_eq!(lines(&dir.path().join("fromcfg/deck.jsonl")), 30);
    ok(
        dir.path(),
        &["--config", "cfg.json", "generate", "--n", "20"],
    );
    assert_eq!(lines(&dir.path().join("fromcfg/deck.jsonl")), 20);

    std::fs::write(dir.path().join("bad.json"), r#"{"generate": {"count": 0}}"#).unwrap();
    assert_eq!(
        mb(dir.path(), &["--config", "bad.json", "generate"]).code,
        2
    );
    std::fs::write(dir.path().join("typo.json"), r#"{"genrate": {}}"#).unwrap();
    assert_eq!(
        mb(dir.path(), &["--config", "typo.json", "generate"]).code,
        2
    );
}

#[test]
fn synthetic_run_and_species_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let spec = synthetic(
        dir.path(),
        "humans-first",
        lex(vec![PolicyRule::SpareHumans]),
    );
    ok(dir.path(), &["generate", "--n", "1000", "--seed", "3"]);
    let o = ok(
        dir.path(),
        &[
            "run",
            "--respondent",
            spec.to_str().unwrap(),
            "--concurrency",
            "8",
        ],
    );
    assert!(o.stdout.contains("requested=1000 completed=1000"));
    assert_eq!(
        read_records(&dir.path().join("out/responses.jsonl"))
            .unwrap()
            .len(),
        1000
    );

    ok(dir.path(), &["analyze"]);
    let csv = std::fs::read_to_string(dir.path().join("out/amce.csv")).unwrap();
    assert!(csv.starts_with("# generatorVersion="));
    assert!(csv.lines().any(|l| l.starts_with("species,1,0,")), "{csv}");
    let validity: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/validity.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(validity["rate"], 1.0);
    assert!(dir.path().join("out/figures/amce.svg").exists());

    let m = RunManifest::load_or_new(&dir.path().join("out"));
    for f in [
        "deck.jsonl",
        "responses.jsonl",
        "amce.csv",
        "amce.json",
        "validity.json",
    ] {
        let bytes = std::fs::read(dir.path().join("out").join(f)).unwrap();
        assert_eq!(m.files[f].sha256, sha256_hex(&bytes), "{f}");
    }
    assert_eq!(m.respondent.unwrap().model_name, "humans-first");

    ok(dir.path(), &["report"]);
    let md = std::fs::read_to_string(dir.path().join("out/report.md")).unwrap();
    assert!(md.contains("| species | +1.0000 |"));
}

#[test]
fn all_invalid_log_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["generate", "--n", "40", "--seed", "5"]);
    let deck = moralbench::scenario::read_deck(&dir.path().join("out/deck.jsonl")).unwrap();
    let fixture: String = deck
        .iter()
        .map(|s| {
            serde_json::json!({"scenarioId": s.id, "rawText": "Both outcomes are tragic."})
                .to_string()
                + "\n"
        })
        .collect();
    std::fs::write(dir.path().join("fixture.jsonl"), fixture).unwrap();
    let spec = RespondentSpec {
        kind: RespondentKind::Replay,
        fixture_path: Some(dir.path().join("fixture.jsonl")),
        policy: None,
        ..RespondentSpec::synthetic("refuser", PolicySpec::default())
    };
    write_json(&dir.path().join("replay.json"), &spec);
    ok(dir.path(), &["run", "--respondent", "replay.json"]);
    let o = mb(dir.path(), &["analyze"]);
    assert_eq!(o.code, 3, "{}", o.stderr);
    let validity: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/validity.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(validity["rate"], 0.0);
    assert_eq!(validity["total"], 40);
    assert!(!dir.path().join("out/amce.csv").exists());
}

#[test]
fn transport_total_failure_exits_4() {
    let stub = StubServer::start(|_| (503, "{}".into()));
    let dir = tempfile::tempdir().unwrap();
    write_json(&dir.path().join("http.json"), &stub.spec("down"));
    ok(dir.path(), &["generate", "--n", "5"]);
    let o = mb(
        dir.path(),
        &[
            "run",
            "--respondent",
            "http.json",
            "--max-attempts",
            "2",
            "--base-delay-ms",
            "1",
        ],
    );
    assert_eq!(o.code, 4, "{}", o.stderr);
    assert_eq!(stub.count(), 10);
    assert!(o.stdout.contains("failed=5"));
}

#[test]
fn missing_deck_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = synthetic(dir.path(), "x", PolicySpec::coin_flip(1));
    let o = mb(dir.path(), &["run", "--respondent", spec.to_str().unwrap()]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("generate"));
}

fn analyzed_profile(root: &Path, name: &str, policy: PolicySpec) -> PathBuf {
    let out = root.join(name);
    let out_s = out.to_str().unwrap();
    ok(
        root,
        &["--out", out_s, "generate", "--n", "600", "--seed", "8"],
    );
    let spec = synthetic(root, name, policy);
    ok(
        root,
        &[
            "--out",
            out_s,
            "run",
            "--respondent",
            spec.to_str().unwrap(),
        ],
    );
    ok(root, &["--out", out_s, "analyze"]);
    out.join("amce.json")
}

fn baseline_file(root: &Path) -> PathBuf {
    let values: serde_json::Map<String, serde_json::Value> = Attribute::ALL
        .iter()
        .map(|a| {
            (
                a.name().to_string(),
                serde_json::json!(0.1 * (a.index() as f64 - 4.0) / 4.0),
            )
        })
        .collect();
    let path = root.join("baseline.json");
    write_json(
        &path,
        &serde_json::json!({"label": "reference", "values": values, "provenance": "synthetic test values"}),
    );
    path
}

fn read_compare(dir: &Path) -> ComparisonReport {
    serde_json::from_str(&std::fs::read_to_string(dir.join("compare.json")).unwrap()).unwrap()
}

#[test]
fn compare_two_and_five_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let base = baseline_file(root);
    // Complete profiles need every attribute contrasted with both outcomes.
    let policies = [
        ("coin-a", PolicySpec::coin_flip(1)),
        ("coin-b", PolicySpec::coin_flip(2)),
        ("humans", lex(vec![PolicyRule::SpareHumans])),
        (
            "lawful",
            lex(vec![PolicyRule::SpareLawful, PolicyRule::SpareYoung]),
        ),
    ];
    let amces: Vec<PathBuf> = policies
        .into_iter()
        .map(|(n, p)| analyzed_profile(root, n, p))
        .collect();
    let report: AmceReport =
        serde_json::from_str(&std::fs::read_to_string(&amces[0]).unwrap()).unwrap();
    assert!(report.profile.estimates.iter().all(|e| e.delta_p.is_some()));

    let o = ok(
        root,
        &[
            "--out",
            "cmp2",
            "compare",
            "--baseline",
            base.to_str().unwrap(),
            "--profile",
            amces[0].to_str().unwrap(),
        ],
    );
    assert!(o.stdout.contains("PCA skipped"));
    let two = read_compare(&root.join("cmp2"));
    assert_eq!(two.reference, "reference");
    assert_eq!(two.distance["reference"], Some(0.0));
    assert!(two.pca.is_none());
    assert!(root.join("cmp2/compare.csv").exists());
    assert!(!root.join("cmp2/compare_pca.csv").exists());

    let mut args: Vec<String> = [
        "--out",
        "cmp5",
        "compare",
        "--baseline",
        base.to_str().unwrap(),
    ]
    .map(String::from)
    .to_vec();
    for a in &amces {
        args.push("--profile".into());
        args.push(a.to_str().unwrap().into());
    }
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    ok(root, &args);
    let five = read_compare(&root.join("cmp5"));
    let pca = five.pca.expect("five complete profiles");
    assert_eq!(pca.coordinates.len(), 5);
    assert!(pca.explained_variance_ratio[0] >= pca.explained_variance_ratio[1]);
    for f in [
        "compare.csv",
        "compare_pca.csv",
        "figures/pca.svg",
        "figures/distance.svg",
        "figures/amce_compare.svg",
    ] {
        assert!(root.join("cmp5").join(f).exists(), "{f}");
    }

    let o = mb(
        root,
        &[
            "--out",
            "cmp1",
            "compare",
            "--profile",
            amces[0].to_str().unwrap(),
        ],
    );
    assert_eq!(o.code, 2);
    std::fs::write(
        root.join("bad_base.json"),
        r#"{"label": "h", "values": {"species": 1.7}}"#,
    )
    .unwrap();
    let o = mb(
        root,
        &[
            "--out",
            "cmpx",
            "compare",
            "--baseline",
            "bad_base.json",
            "--profile",
            amces[0].to_str().unwrap(),
        ],
    );
    assert_eq!(o.code, 2);
}

#[test]
fn rationale_probe_with_no_candidates_writes_empty_log() {
    let dir = tempfile::tempdir().unwrap();
    let spec = synthetic(dir.path(), "fit", lex(vec![PolicyRule::SpareFit]));
    ok(dir.path(), &["generate", "--n", "50", "--focal", "species"]);
    ok(dir.path(), &["run", "--respondent", spec.to_str().unwrap()]);
    let o = ok(dir.path(), &["rationale", "--focal", "fitness"]);
    assert!(o.stdout.contains("notice"));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("out/rationale.jsonl")).unwrap(),
        ""
    );
}

#[test]
fn utilitarian_probe_reuses_choices() {
    let dir = tempfile::tempdir().unwrap();
    let spec = synthetic(dir.path(), "fewer", lex(vec![PolicyRule::SpareFewer]));
    ok(
        dir.path(),
        &[
            "generate",
            "--n",
            "300",
            "--seed",
            "12",
            "--focal",
            "utilitarian",
        ],
    );
    ok(dir.path(), &["run", "--respondent", spec.to_str().unwrap()]);

    let stub = StubServer::start(|_| {
        (
            200,
            completion("Case 1. The smaller group has fewer lives at risk."),
        )
    });
    write_json(&dir.path().join("http.json"), &stub.spec("fewer"));
    let o = ok(
        dir.path(),
        &[
            "rationale",
            "--focal",
            "utilitarian",
            "--respondent",
            "http.json",
        ],
    );
    let probed = read_records(&dir.path().join("out/rationale.jsonl")).unwrap();
    assert!(!probed.is_empty(), "{}", o.stdout);
    assert_eq!(stub.count(), probed.len());
    let bodies = stub.bodies.lock().unwrap();
    assert!(bodies
        .iter()
        .all(|b| prompt_of(b).contains("provide a rationale")));
    let choice_mode = bodies
        .iter()
        .filter(|b| !prompt_of(b).contains("rationale"))
        .count();
    assert_eq!(choice_mode, 0);
    // Every probed scenario is a two-lane one in which the smaller group was spared.
    let deck = moralbench::scenario::read_deck(&dir.path().join("out/deck.jsonl")).unwrap();
    let ids: std::collections::HashSet<_> = probed.iter().map(|r| r.scenario_id.as_str()).collect();
    let expected = moralbench::scenario::filter_for_rationale_probe(&deck, None).len();
    assert_eq!(ids.len(), expected);
}
