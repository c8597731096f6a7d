mod common;

use std::collections::HashMap;
use std::sync::Arc;

use rapidkit_core::corpus::{coverage_features, read_corpus, split_corpus, write_corpus};
use rapidkit_core::exec::Execution;
use rapidkit_core::inference::{
    run_task, Backend, InferenceConfig, RunContext, RunHeader, RunInput, RunLog, RunLogWriter, StubBackend,
    StubBehavior, TaskInput, LOG_VERSION,
};
use rapidkit_core::metrics::{accuracy, mistake_breakdown, MetricsReport, OutcomeMatrix, RunMeta};
use rapidkit_core::prompts::{select_few_shot, FewShotAllocation, Language, PromptTemplate};
use rapidkit_core::syntax::print_routine;
use rapidkit_core::transforms::TaskKind;

#[test]
fn corpus_files_round_trip_and_split_covers_variants() {
    let (c, _) = common::site();
    let entries = common::corpus(9, 120);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.jsonl");
    write_corpus(&path, &entries).unwrap();
    assert_eq!(read_corpus(&path, &c).unwrap(), entries);

    let (prompt, test) = split_corpus(&entries, 11, 4).unwrap();
    assert_eq!((prompt.len(), test.len()), (11, 109));
    let covered: std::collections::BTreeSet<String> = prompt.iter().flat_map(coverage_features).collect();
    for feature in ["home_departure", "home_return", "offset_target"] {
        assert!(covered.contains(feature), "{feature} missing from {covered:?}");
    }
    assert_eq!(split_corpus(&entries, 11, 4).unwrap().0, prompt);
}

#[test]
fn prompts_render_in_both_languages_with_validated_examples() {
    let (c, p) = common::site();
    let entries = common::corpus(12, 60);
    let allocation = FewShotAllocation::default();
    for task in TaskKind::ALL {
        let shots = select_few_shot(&entries, task, allocation.for_task(task));
        assert_eq!(shots.len(), allocation.for_task(task));
        let en = PromptTemplate::new(task, Language::En, shots.clone(), &c, &p).unwrap();
        let de = PromptTemplate::new(task, Language::De, shots, &c, &p).unwrap();
        let e = &entries[59];
        let routines = std::slice::from_ref(&e.routine);
        let (en, de) =
            (en.render(&e.requests[&task], routines).unwrap(), de.render(&e.requests[&task], routines).unwrap());
        assert_ne!(en.system, de.system);
        assert!(en.user.contains(e.routine.name.as_str()) && de.user.contains(e.routine.name.as_str()));
        assert_eq!(en.token_estimate, (en.system.chars().count() + en.user.chars().count()).div_ceil(4));
    }
}

fn stub_run(p: f64, n: usize, dir: &std::path::Path) -> (OutcomeMatrix, MetricsReport, std::path::PathBuf) {
    let (c, pol) = common::site();
    let entries = common::corpus(21, n);
    let task = TaskKind::AddOffset;
    let inputs: Vec<TaskInput> = entries
        .iter()
        .map(|e| TaskInput {
            id: e.id.clone(),
            routines: vec![e.routine.canonical()],
            request: e.requests[&task].clone(),
        })
        .collect();
    let answers: HashMap<_, _> =
        entries.iter().map(|e| (e.id.clone(), (e.oracle_outputs[&task].clone(), print_routine(&e.routine)))).collect();
    let config = InferenceConfig::default();
    let template = PromptTemplate::new(task, Language::En, vec![], &c, &pol).unwrap();
    let header = RunHeader {
        version: LOG_VERSION,
        task,
        language: Language::En,
        backend: "stub".into(),
        seed: 21,
        max_attempts: None,
        inference: config.clone(),
        convention: c.spec().clone(),
        policy: pol.clone(),
        inputs: inputs.iter().map(RunInput::from).collect(),
    };
    let log_path = dir.join("run.jsonl");
    let writer = RunLogWriter::create(&log_path, &header).unwrap();
    let backend: Arc<dyn Backend> = Arc::new(StubBackend::new(StubBehavior::Oracle { p, seed: 21, answers }));
    let ctx = RunContext {
        template: &template,
        backend,
        config: &config,
        convention: &c,
        policy: &pol,
        execution: Execution::default(),
        max_attempts: None,
        log: Some(&writer),
    };
    let records = run_task(&inputs, &ctx).unwrap();
    let ids: Vec<String> = inputs.iter().map(|i| i.id.clone()).collect();
    let m = OutcomeMatrix::from_records(task, Language::En, &ids, 10, &records).unwrap();
    let b = mistake_breakdown(&m, &records).unwrap();
    let report = MetricsReport::new(
        &m,
        &b,
        RunMeta { backend: "stub".into(), model: config.model.clone(), seed: 21, max_attempts: None },
    );
    (m, report, log_path)
}

#[test]
fn stub_accuracy_matches_the_binomial_expectation() {
    let dir = tempfile::tempdir().unwrap();
    let (m, _, _) = stub_run(0.5, 1000, dir.path());
    let acc = *accuracy(&m).numer() as f64 / *accuracy(&m).denom() as f64;
    let q = 1.0 - 0.5f64.powi(10);
    let se = (q * (1.0 - q) / 1000.0).sqrt() * 100.0;
    assert!((acc - q * 100.0).abs() <= 3.0 * se, "accuracy {acc} vs {}", q * 100.0);
}

#[test]
fn replaying_a_log_reproduces_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let (_, original, log_path) = stub_run(0.3, 40, dir.path());
    let log = RunLog::read(&log_path).unwrap();
    let (c, p) = common::site();
    let inputs = log.task_inputs().unwrap();
    let template = PromptTemplate::new(log.header.task, log.header.language, vec![], &c, &p).unwrap();
    let ctx = RunContext {
        template: &template,
        backend: Arc::new(log.replay_backend()),
        config: &log.header.inference,
        convention: &c,
        policy: &p,
        execution: Execution::Sequential,
        max_attempts: None,
        log: None,
    };
    let records = run_task(&inputs, &ctx).unwrap();
    let ids: Vec<String> = inputs.iter().map(|i| i.id.clone()).collect();
    let m = OutcomeMatrix::from_records(log.header.task, log.header.language, &ids, 10, &records).unwrap();
    let b = mistake_breakdown(&m, &records).unwrap();
    let replayed = MetricsReport::new(&m, &b, original.run.clone());
    assert_eq!(replayed.to_json(), original.to_json());
}
