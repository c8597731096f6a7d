use std::path::Path;
use std::process::{Command, Output};

use rapidkit_core::config::ToolkitConfig;
use rapidkit_core::corpus::ConventionSpec;
use rapidkit_core::transforms::TransformPolicy;

const PLAIN_IN: &str = "PROC mvid1_id2()
    !From:  Start Position
    !To:    End Position
    MoveJ id1,position1,velocity,zone,tool\\WObj:=world_object\\NoMove;
    MoveJ id2,position2,velocity,zone,tool\\WObj:=world_object;
ENDPROC
";
const OFFSET_OUT: &str = "PROC mvid1_id2()
    !From:  Start Position
    !To:    End Position
    MoveJ id1,position1,velocity,zone,tool\\WObj:=world_object\\NoMove;
    MoveJ id_intermediate,RelTool(position1,0,200,0),velocity,zone,tool\\WObj:=world_object\\NoMove;
    MoveJ id2,position2,velocity,zone,tool\\WObj:=world_object;
ENDPROC
";
const REVERSE_OUT: &str = "PROC mvid2_id1()
    !From:  End Position
    !To:    Start Position
    MoveJ id2,position2,velocity,zone,tool\\WObj:=world_object\\NoMove;
    MoveJ id1,position1,velocity,zone,tool\\WObj:=world_object;
ENDPROC
";

fn rapidkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rapidkit"))
        .args(args)
        .current_dir(dir)
        .env_remove("RAPIDKIT_CONFIG")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Workspace with the anonymized placeholder convention configured.
fn anonymized_workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let config = ToolkitConfig {
        convention: ConventionSpec::anonymized(),
        policy: TransformPolicy::anonymized(),
        ..Default::default()
    };
    std::fs::write(dir.path().join("anon.json"), config.to_json()).unwrap();
    std::fs::write(dir.path().join("plain.mod"), PLAIN_IN).unwrap();
    dir
}

#[test]
fn transforms_regenerate_the_worked_examples() {
    let dir = anonymized_workspace();
    let d = dir.path();
    let o = rapidkit(
        d,
        &[
            "--config",
            "anon.json",
            "transform",
            "offset",
            "plain.mod",
            "--anchor",
            "after-start",
            "--function",
            "RelTool",
            "--offset",
            "0,200,0",
            "--check",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), OFFSET_OUT);

    let o = rapidkit(d, &["--config", "anon.json", "transform", "reverse", "plain.mod", "--out", "rev.mod"]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(d.join("rev.mod")).unwrap(), REVERSE_OUT);

    let o = rapidkit(
        d,
        &["--config", "anon.json", "transform", "modify", "plain.mod", "--kind", "velocity", "--value", "velocity_2"],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), PLAIN_IN.replace(",velocity,", ",velocity_2,"));
}

#[test]
fn validate_reports_findings_with_exit_1() {
    let dir = anonymized_workspace();
    let d = dir.path();
    std::fs::write(d.join("good.mod"), REVERSE_OUT).unwrap();
    std::fs::write(d.join("bad.mod"), REVERSE_OUT.replace("!From:  End", "!From:  Start")).unwrap();
    let base = ["--config", "anon.json", "validate", "--task", "reverse", "--input", "plain.mod", "--output"];
    let ok = rapidkit(d, &[&base[..], &["good.mod"]].concat());
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));
    let bad = rapidkit(d, &[&base[..], &["bad.mod", "--json"]].concat());
    assert_eq!(code(&bad), 1);
    let report: serde_json::Value = serde_json::from_str(&stdout(&bad)).unwrap();
    assert_eq!(report["mistakes"][0]["kind"], "wrong_reverse_logic");
}

#[test]
fn exit_codes_distinguish_failure_classes() {
    let dir = anonymized_workspace();
    let d = dir.path();
    std::fs::write(d.join("broken.mod"), "PROC mv1_2()\n    MoveJ p1,v,z,t\\WObj:=w;\nENDPROC\n").unwrap();
    assert_eq!(code(&rapidkit(d, &["--config", "anon.json", "transform", "reverse", "broken.mod"])), 2);

    std::fs::write(d.join("typo.json"), r#"{"sede": 4}"#).unwrap();
    assert_eq!(code(&rapidkit(d, &["--config", "typo.json", "corpus", "synth", "--n", "3", "--out", "c.jsonl"])), 3);
    assert_eq!(code(&rapidkit(d, &["--config", "missing.json", "corpus", "synth", "--n", "3", "--out", "c.jsonl"])), 3);
    assert_eq!(code(&rapidkit(d, &["eval", "--task", "reverse", "--inputs", "2", "--backend", "bogus"])), 3);
    assert_eq!(
        code(&rapidkit(
            d,
            &["--config", "anon.json", "transform", "modify", "plain.mod", "--kind", "id", "--value", "no-pair"]
        )),
        3
    );

    std::fs::write(
        d.join("dead.json"),
        r#"{"inference": {"endpoint": "http://127.0.0.1:9/v1/chat/completions", "timeout_secs": 5, "samples_per_input": 1}}"#,
    )
    .unwrap();
    let o = rapidkit(
        d,
        &[
            "--config",
            "dead.json",
            "eval",
            "--task",
            "reverse",
            "--inputs",
            "2",
            "--backend",
            "live",
            "--run-dir",
            "dead",
        ],
    );
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("dead/run.jsonl").exists());
}

#[test]
fn config_comes_from_the_environment_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("cfg.json"), r#"{"seed": 5}"#).unwrap();
    let run = |extra: &[&str], out: &str| {
        let mut args = vec!["corpus", "synth", "--n", "4", "--out", out];
        args.extend_from_slice(extra);
        let o = Command::new(env!("CARGO_BIN_EXE_rapidkit"))
            .args(&args)
            .current_dir(d)
            .env("RAPIDKIT_CONFIG", "cfg.json")
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        std::fs::read_to_string(d.join(out)).unwrap()
    };
    assert!(run(&[], "a.jsonl").contains(r#""id":"s5-00000""#));
    assert!(run(&["--seed", "6"], "b.jsonl").contains(r#""id":"s6-00000""#));
}

#[test]
fn corpus_commands_feed_eval_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&rapidkit(d, &["corpus", "synth", "--n", "40", "--out", "all.jsonl"])), 0);
    let o = rapidkit(
        d,
        &["corpus", "split", "--corpus", "all.jsonl", "--prompt-out", "prompt.jsonl", "--test-out", "test.jsonl"],
    );
    assert_eq!(stdout(&o), "11 prompt examples, 29 test routines\n");

    let o = rapidkit(
        d,
        &[
            "--lang",
            "de",
            "eval",
            "--task",
            "modify_argument",
            "--corpus",
            "test.jsonl",
            "--prompt-set",
            "prompt.jsonl",
            "--backend",
            "stub:p=0.7",
            "--retry",
            "2",
            "--samples",
            "4",
            "--run-dir",
            "run",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["run.jsonl", "report.json", "report.txt", "histogram.csv", "config.json"] {
        assert!(d.join("run").join(f).exists(), "{f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("run/report.json")).unwrap()).unwrap();
    assert_eq!(
        (report["language"].as_str(), report["samples_per_input"].as_u64(), report["inputs"].as_u64()),
        (Some("de"), Some(4), Some(29))
    );
    assert_eq!(report["run"]["max_attempts"], 2);

    let o = rapidkit(d, &["report", "--log", "run/run.jsonl", "--out", "again"]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read(d.join("again/report.json")).unwrap(), std::fs::read(d.join("run/report.json")).unwrap());
    assert_eq!(stdout(&o), std::fs::read_to_string(d.join("run/report.txt")).unwrap());
}

#[test]
fn languages_can_be_compared() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for lang in ["en", "de"] {
        let o = rapidkit(
            d,
            &[
                "--lang",
                lang,
                "eval",
                "--task",
                "reverse",
                "--inputs",
                "15",
                "--backend",
                "stub:p=0.6",
                "--samples",
                "3",
                "--run-dir",
                lang,
            ],
        );
        assert_eq!(code(&o), 0);
    }
    let o = rapidkit(d, &["report", "--log", "en/run.jsonl", "--compare", "de/run.jsonl"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("Delta"));
    let o = rapidkit(
        d,
        &[
            "eval",
            "--task",
            "add_offset",
            "--inputs",
            "15",
            "--backend",
            "stub",
            "--samples",
            "3",
            "--run-dir",
            "offset",
        ],
    );
    assert_eq!(code(&o), 0);
    let o = rapidkit(d, &["report", "--log", "en/run.jsonl", "--compare", "offset/run.jsonl"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn extraction_summarizes_a_project_tree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let project = d.join("cell7/backup_2024/RAPID");
    std::fs::create_dir_all(&project).unwrap();
    let routine = "PROC mv400_410()\n    !From:  Vorposition 400\n    !To:    Vorposition 410\n    MoveJ pR7_400,vR7_rapid,z50,toR7_active\\WObj:=woR7_Base\\NoMove;\n    MoveL pR7_410,vR7_rapid,z50,toR7_active\\WObj:=woR7_Base;\nENDPROC\n";
    std::fs::write(
        project.join("Moves.mod"),
        format!("MODULE Moves\n{routine}PROC helper()\n    x := 1;\nENDPROC\nENDMODULE\n"),
    )
    .unwrap();
    let o = rapidkit(d, &["corpus", "extract", "cell7", "--out", "corpus.jsonl", "--summary", "summary.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("summary.json")).unwrap()).unwrap();
    assert_eq!(
        (summary["files"].as_u64(), summary["unique_simple"].as_u64(), summary["other"].as_u64()),
        (Some(1), Some(1), Some(1))
    );
    let o = rapidkit(
        d,
        &[
            "eval",
            "--task",
            "reverse",
            "--corpus",
            "corpus.jsonl",
            "--backend",
            "stub",
            "--samples",
            "2",
            "--run-dir",
            "r",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("100.00%"));
}
