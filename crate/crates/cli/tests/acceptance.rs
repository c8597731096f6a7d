//! Acceptance criteria, one pass/fail line each. Exits non-zero if any
//! criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rapidkit_core::corpus::{synthesize_corpus, CorpusEntry, NamingConvention, SynthOptions};
use rapidkit_core::exec::Execution;
use rapidkit_core::metrics::{accuracy, bucket_share, frequency, render_percent, OutcomeMatrix, Percent};
use rapidkit_core::prompts::Language;
use rapidkit_core::syntax::{parse_routine, print_routine, Offset, OffsetFunction};
use rapidkit_core::transforms::{apply, reverse, Anchor, ArgumentKind, TaskKind, TaskRequest, TransformPolicy};
use rapidkit_core::validator::mutation::mutation_kill;
use rapidkit_core::validator::validate;

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn site() -> (NamingConvention, TransformPolicy) {
    (NamingConvention::new(Default::default()).unwrap(), TransformPolicy::default())
}

fn corpus(seed: u64, n: usize) -> Vec<CorpusEntry> {
    let (c, p) = site();
    synthesize_corpus(seed, n, &c, &p, &SynthOptions::default()).unwrap()
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    if elapsed > Duration::from_secs(limit_secs) {
        Err(format!("took {:.2} s, limit {limit_secs} s", elapsed.as_secs_f64()))
    } else {
        Ok(())
    }
}

fn parser_round_trip() -> Outcome {
    let texts: Vec<String> = corpus(1, 1000).iter().map(|e| print_routine(&e.routine)).collect();
    let start = Instant::now();
    let mut fixpoints = 0;
    for text in &texts {
        let once = print_routine(&parse_routine(text).map_err(|e| e.to_string())?);
        let twice = print_routine(&parse_routine(&once).map_err(|e| e.to_string())?);
        fixpoints += usize::from(once == *text && twice == once);
    }
    let elapsed = start.elapsed();
    if fixpoints != texts.len() {
        return Err(format!("{fixpoints}/{} at a fixpoint", texts.len()));
    }
    within(elapsed, 5)?;
    Ok(format!("{fixpoints}/1000 fixpoints in {:.2} s", elapsed.as_secs_f64()))
}

fn mutation_kill_rate() -> Outcome {
    let (c, p) = site();
    let entries = corpus(2, 300);
    for e in &entries {
        for (task, request) in &e.requests {
            let out = parse_routine(&e.oracle_outputs[task]).map_err(|x| x.to_string())?;
            let report = validate(&e.routine, &out, request, &c, &p);
            if !report.is_correct {
                return Err(format!("unmutated {} {task}: {:?}", e.id, report.kinds()));
            }
        }
    }
    let stats = mutation_kill(&entries, &c, &p, Execution::default());
    let killed = stats.iter().filter(|s| s.all_killed()).count();
    let mutants: usize = stats.iter().map(|s| s.mutants).sum();
    if killed != 19 {
        let escaped: Vec<String> = stats.iter().filter(|s| !s.all_killed()).map(|s| format!("{:?}", s.kind)).collect();
        return Err(format!("{killed}/19 kinds killed; escaped: {}", escaped.join(", ")));
    }
    Ok(format!("19/19 kinds killed over {mutants} mutants; unmutated outputs clean"))
}

fn oracle_equivalence() -> Outcome {
    let (c, p) = site();
    let entries = corpus(3, 500);
    let start = Instant::now();
    let (mut clean, mut departures, mut returns) = (0, 0, 0);
    for e in &entries {
        let first = &e.routine.instructions[0];
        let last = e.routine.instructions.last().unwrap();
        departures += usize::from(p.targets_home(first, &c));
        returns += usize::from(p.targets_home(last, &c));
        for task in TaskKind::ALL {
            let request = &e.requests[&task];
            let out = apply(&e.routine, request, &p, &c).map_err(|x| format!("{} {task}: {x}", e.id))?;
            clean += usize::from(validate(&e.routine, &out, request, &c, &p).is_correct);
        }
    }
    let elapsed = start.elapsed();
    if clean != 1500 {
        return Err(format!("{clean}/1500 validator-clean"));
    }
    if departures == 0 || returns == 0 {
        return Err(format!("HOME variants missing: {departures} departures, {returns} returns"));
    }
    within(elapsed, 10)?;
    Ok(format!("1500/1500 clean ({departures} HOME departures, {returns} returns) in {:.2} s", elapsed.as_secs_f64()))
}

fn involution() -> Outcome {
    let (c, p) = site();
    let mut checked = 0;
    for e in corpus(4, 700) {
        if e.routine.instructions.iter().any(|i| p.targets_home(i, &c)) {
            continue;
        }
        let twice =
            reverse(&reverse(&e.routine, &p, &c).map_err(|x| x.to_string())?, &p, &c).map_err(|x| x.to_string())?;
        if twice != e.routine.canonical() {
            return Err(format!("{} is not restored", e.id));
        }
        checked += 1;
    }
    if checked < 500 {
        return Err(format!("only {checked} non-HOME routines"));
    }
    Ok(format!("reverse(reverse(r)) == canonical(r) for {checked} routines"))
}

fn profile_matrix() -> Outcome {
    let mut counts = vec![0usize; 11];
    counts[0] = 11;
    counts[10] = 1275;
    counts[9] = 1720 - 11 - 1275;
    let m = OutcomeMatrix::from_bucket_counts(TaskKind::ModifyArgument, Language::En, &counts)
        .map_err(|e| e.to_string())?;
    let acc = accuracy(&m);
    let target = Percent::new(9936, 100);
    let tolerance = Percent::new(5, 1000);
    let diff = if acc > target { acc - target } else { target - acc };
    let buckets = frequency(&m);
    let (full, zero) =
        (render_percent(bucket_share(&buckets[10], m.len())), render_percent(bucket_share(&buckets[0], m.len())));
    if diff > tolerance || full != "74.13" || zero != "0.64" {
        return Err(format!("accuracy {}, 100% bucket {full}, 0% bucket {zero}", render_percent(acc)));
    }
    Ok(format!(
        "accuracy {} (exact {}/{}), 100% bucket {full}%, 0% bucket {zero}%",
        render_percent(acc),
        acc.numer(),
        acc.denom()
    ))
}

fn rapidkit(args: &[&str], dir: &Path) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_rapidkit"))
        .args(args)
        .current_dir(dir)
        .env_remove("RAPIDKIT_CONFIG")
        .output()
        .map_err(|e| e.to_string())
}

fn report_json(dir: &Path) -> Result<serde_json::Value, String> {
    let text = std::fs::read_to_string(dir.join("report.json")).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn stub_statistics(work: &Path) -> Outcome {
    let start = Instant::now();
    let out = rapidkit(
        &[
            "eval",
            "--task",
            "reverse",
            "--inputs",
            "1000",
            "--backend",
            "stub:p=0.5",
            "--samples",
            "10",
            "--run-dir",
            "stub",
        ],
        work,
    )?;
    let elapsed = start.elapsed();
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let report = report_json(&work.join("stub"))?;
    let exact = report["accuracy_exact"].as_str().ok_or("report lacks accuracy_exact")?;
    let (n, d) = exact.split_once('/').ok_or("malformed accuracy_exact")?;
    let acc = n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap();
    let q = 1.0 - 0.5f64.powi(10);
    let se = (q * (1.0 - q) / 1000.0).sqrt() * 100.0;
    let z = (acc - q * 100.0) / se;
    if z.abs() > 3.0 {
        return Err(format!("accuracy {acc:.2} is {z:.2} SE from {:.2}", q * 100.0));
    }
    within(elapsed, 30)?;
    Ok(format!("accuracy {acc:.2}% vs expected {:.2}% ({z:+.2} SE) in {:.2} s", q * 100.0, elapsed.as_secs_f64()))
}

fn replay_determinism(work: &Path) -> Outcome {
    let run = |args: &[&str]| -> Result<(), String> {
        let out = rapidkit(args, work)?;
        if out.status.success() {
            Ok(())
        } else {
            Err(String::from_utf8_lossy(&out.stderr).into_owned())
        }
    };
    run(&["eval", "--task", "add_offset", "--inputs", "60", "--backend", "stub:p=0.4", "--run-dir", "orig"])?;
    run(&["eval", "--backend", "replay", "--log", "orig/run.jsonl", "--run-dir", "replay1"])?;
    run(&["eval", "--backend", "replay", "--log", "orig/run.jsonl", "--run-dir", "replay2", "--sequential"])?;
    let read = |d: &str| std::fs::read(work.join(d).join("report.json")).map_err(|e| e.to_string());
    let (a, b, o) = (read("replay1")?, read("replay2")?, read("orig")?);
    if a != b {
        return Err("replayed reports differ".into());
    }
    if a != o {
        return Err("replayed report differs from the original run".into());
    }
    Ok(format!("two replays byte-identical ({} bytes), equal to the original run", a.len()))
}

const VELOCITY_IN: &str = "PROC mvid1_id2()
    !From:  Start Position
    !To:    End Position
    MoveJ id1,position1,velocity_1,zone,tool\\WObj:=world_object\\NoMove;
    MoveJ id2,position2,velocity_1,zone,tool\\WObj:=world_object;
ENDPROC";
const VELOCITY_OUT: &str = "PROC mvid1_id2()
    !From:  Start Position
    !To:    End Position
    MoveJ id1,position1,velocity_2,zone,tool\\WObj:=world_object\\NoMove;
    MoveJ id2,position2,velocity_2,zone,tool\\WObj:=world_object;
ENDPROC";
const PLAIN_IN: &str = "PROC mvid1_id2()
    !From:  Start Position
    !To:    End Position
    MoveJ id1,position1,velocity,zone,tool\\WObj:=world_object\\NoMove;
    MoveJ id2,position2,velocity,zone,tool\\WObj:=world_object;
ENDPROC";
const OFFSET_OUT: &str = "PROC mvid1_id2()
    !From:  Start Position
    !To:    End Position
    MoveJ id1,position1,velocity,zone,tool\\WObj:=world_object\\NoMove;
    MoveJ id_intermediate,RelTool(position1,0,200,0),velocity,zone,tool\\WObj:=world_object\\NoMove;
    MoveJ id2,position2,velocity,zone,tool\\WObj:=world_object;
ENDPROC";
const REVERSE_OUT: &str = "PROC mvid2_id1()
    !From:  End Position
    !To:    Start Position
    MoveJ id2,position2,velocity,zone,tool\\WObj:=world_object\\NoMove;
    MoveJ id1,position1,velocity,zone,tool\\WObj:=world_object;
ENDPROC";

fn worked_tables() -> Outcome {
    let (c, p) = (NamingConvention::anonymized(), TransformPolicy::anonymized());
    let cases = [
        (
            "velocity modification",
            VELOCITY_IN,
            VELOCITY_OUT,
            TaskRequest::ModifyArgument { argument: ArgumentKind::Velocity, new_value: "velocity_2".into() },
        ),
        (
            "RelTool offset",
            PLAIN_IN,
            OFFSET_OUT,
            TaskRequest::AddOffset {
                anchor: Anchor::AfterStart,
                function: OffsetFunction::RelTool,
                offset: Offset::new(0, 200, 0),
            },
        ),
        ("reversal", PLAIN_IN, REVERSE_OUT, TaskRequest::Reverse),
    ];
    for (name, input, expected, request) in cases {
        let input = parse_routine(input).map_err(|e| format!("{name}: {e}"))?;
        let expected_routine = parse_routine(expected).map_err(|e| format!("{name}: {e}"))?;
        let report = validate(&input, &expected_routine, &request, &c, &p);
        if !report.is_correct {
            return Err(format!("{name} output flagged: {:?}", report.kinds()));
        }
        let generated = print_routine(&apply(&input, &request, &p, &c).map_err(|e| format!("{name}: {e}"))?);
        if generated != expected {
            return Err(format!("{name} regenerated as:\n{generated}"));
        }
    }
    Ok("velocity, RelTool offset (Y=200) and reversal examples validate clean and regenerate byte-exact".into())
}

fn main() {
    let work = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<(&str, Check)> = vec![
        ("parser round-trip on 1000 synthetic routines (< 5 s)", Box::new(parser_round_trip)),
        ("validator mutation kill 19/19, unmutated outputs clean", Box::new(mutation_kill_rate)),
        ("oracle equivalence 3 x 500 inputs with HOME variants (< 10 s)", Box::new(oracle_equivalence)),
        ("reversal involution on >= 500 non-HOME routines", Box::new(involution)),
        ("EN profile matrix: 99.36 / 74.13 / 0.64", Box::new(profile_matrix)),
        (
            "stub p=0.5, 10 samples, 1000 inputs within 3 SE of 99.90 (< 30 s)",
            Box::new(|| stub_statistics(work.path())),
        ),
        ("replay runs produce byte-identical reports", Box::new(|| replay_determinism(work.path()))),
        ("worked examples regenerate exactly", Box::new(worked_tables)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
