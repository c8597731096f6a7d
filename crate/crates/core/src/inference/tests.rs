use std::collections::HashMap;

use super::*;
use crate::corpus::{synthesize_corpus, SynthOptions};
use crate::prompts::Language;
use crate::syntax::print_routine;
use crate::transforms::TaskKind;

struct Fixture {
    convention: NamingConvention,
    policy: TransformPolicy,
    inputs: Vec<TaskInput>,
    answers: HashMap<String, (String, String)>,
    template: PromptTemplate,
}

fn fixture(n: usize, task: TaskKind) -> Fixture {
    let convention = NamingConvention::default();
    let policy = TransformPolicy::default();
    let entries = synthesize_corpus(11, n, &convention, &policy, &SynthOptions::default()).unwrap();
    let inputs = entries
        .iter()
        .map(|e| TaskInput { id: e.id.clone(), routines: vec![e.routine.clone()], request: e.requests[&task].clone() })
        .collect();
    let answers =
        entries.iter().map(|e| (e.id.clone(), (e.oracle_outputs[&task].clone(), print_routine(&e.routine)))).collect();
    let template = PromptTemplate::new(task, Language::En, vec![], &convention, &policy).unwrap();
    Fixture { convention, policy, inputs, answers, template }
}

fn ctx<'a>(f: &'a Fixture, backend: Arc<dyn Backend>, config: &'a InferenceConfig) -> RunContext<'a> {
    RunContext {
        template: &f.template,
        backend,
        config,
        convention: &f.convention,
        policy: &f.policy,
        execution: Execution::Parallel,
        max_attempts: None,
        log: None,
    }
}

#[test]
fn oracle_stub_is_always_correct() {
    let f = fixture(20, TaskKind::Reverse);
    let config = InferenceConfig::default();
    let stub = StubBackend::new(StubBehavior::Oracle { p: 1.0, seed: 0, answers: f.answers.clone() });
    let records = run_task(&f.inputs, &ctx(&f, Arc::new(stub), &config)).unwrap();
    assert_eq!(records.len(), 200);
    assert!(records.iter().all(|r| r.correct), "{:?}", records.iter().find(|r| !r.correct));
    let keys: std::collections::HashSet<_> = records.iter().map(GenerationRecord::key).collect();
    assert_eq!(keys.len(), 200);
    assert_eq!(records[0].input_id, f.inputs[0].id);
    assert_eq!(records[9].sample_index, 9);
}

#[test]
fn wrong_answers_and_parse_failures_are_incorrect() {
    let f = fixture(3, TaskKind::AddOffset);
    let config = InferenceConfig { samples_per_input: 2, ..Default::default() };
    let stub = StubBackend::new(StubBehavior::Oracle { p: 0.0, seed: 0, answers: f.answers.clone() });
    let records = run_task(&f.inputs, &ctx(&f, Arc::new(stub), &config)).unwrap();
    assert!(records
        .iter()
        .all(|r| !r.correct && r.report.as_ref().unwrap().has(crate::validator::MistakeKind::NoOffset)));

    let echo = StubBackend::new(StubBehavior::Echo("Sure! Here is the routine.".into()));
    let records = run_task(&f.inputs, &ctx(&f, Arc::new(echo), &config)).unwrap();
    assert_eq!(records.len(), 6);
    assert!(records.iter().all(|r| !r.correct && r.parse_failure.is_some() && r.raw_text.is_some()));
}

#[test]
fn fenced_answers_are_accepted_and_kept_verbatim() {
    let f = fixture(1, TaskKind::Reverse);
    let (right, _) = f.answers[&f.inputs[0].id].clone();
    let fenced = format!("```rapid\n{right}\n```\n");
    let config = InferenceConfig { samples_per_input: 1, ..Default::default() };
    let records =
        run_task(&f.inputs, &ctx(&f, Arc::new(StubBackend::new(StubBehavior::Echo(fenced.clone()))), &config)).unwrap();
    assert!(records[0].correct);
    assert_eq!(records[0].raw_text.as_deref(), Some(fenced.as_str()));

    let twice = format!("{right}\n\n{right}");
    let records =
        run_task(&f.inputs, &ctx(&f, Arc::new(StubBackend::new(StubBehavior::Echo(twice))), &config)).unwrap();
    assert!(records[0].report.as_ref().unwrap().has(crate::validator::MistakeKind::MoreRoutines));
}

#[test]
fn timeouts_and_overlong_outputs_are_recorded() {
    let f = fixture(1, TaskKind::Reverse);
    let config = InferenceConfig { samples_per_input: 1, timeout_secs: 0.1, ..Default::default() };
    let slow = StubBackend::new(StubBehavior::Echo("x".into())).with_delay(Duration::from_millis(400));
    let records = run_task(&f.inputs, &ctx(&f, Arc::new(slow), &config)).unwrap();
    assert_eq!(records[0].error, Some(InferenceError::Timeout { after_ms: 100 }));
    assert!(!records[0].correct);

    let config = InferenceConfig { samples_per_input: 1, max_tokens: 2, ..Default::default() };
    let long = StubBackend::new(StubBehavior::Echo("0123456789".into()));
    let records = run_task(&f.inputs, &ctx(&f, Arc::new(long), &config)).unwrap();
    assert_eq!(records[0].error, Some(InferenceError::OverlongOutput { tokens: 3, limit: 2 }));
}

#[test]
fn retry_until_valid() {
    let f = fixture(1, TaskKind::Reverse);
    let id = f.inputs[0].id.clone();
    let (right, wrong) = f.answers[&id].clone();
    let config = InferenceConfig { samples_per_input: 1, ..Default::default() };
    let prompt = f.template.render(&f.inputs[0].request, &f.inputs[0].routines).unwrap();

    let script = |texts: Vec<String>| -> Arc<dyn Backend> {
        Arc::new(StubBackend::new(StubBehavior::Scripted(HashMap::from([(id.clone(), texts)]))))
    };
    let c = ctx(&f, script(vec![right.clone()]), &config);
    let out = generate_until_valid(&f.inputs[0], &prompt, 0, 10, &c).unwrap();
    assert_eq!((out.attempts, out.accepted.as_deref()), (1, Some(right.as_str())));

    let c = ctx(&f, script(vec![wrong.clone(), wrong.clone(), right.clone()]), &config);
    let out = generate_until_valid(&f.inputs[0], &prompt, 0, 10, &c).unwrap();
    assert_eq!(out.attempts, 3);
    assert!(out.accepted.is_some());

    let c = ctx(&f, script(vec![wrong]), &config);
    let out = generate_until_valid(&f.inputs[0], &prompt, 0, 10, &c).unwrap();
    assert_eq!((out.attempts, out.records.len(), out.accepted), (10, 10, None));
    assert!(matches!(generate_until_valid(&f.inputs[0], &prompt, 0, 0, &c), Err(RunError::NoAttempts)));
}

#[test]
fn log_round_trip_and_replay() {
    let f = fixture(5, TaskKind::ModifyArgument);
    let config = InferenceConfig { samples_per_input: 4, ..Default::default() };
    let stub = StubBackend::new(StubBehavior::Oracle { p: 0.5, seed: 3, answers: f.answers.clone() });
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.jsonl");
    let header = RunHeader {
        version: LOG_VERSION,
        task: TaskKind::ModifyArgument,
        language: Language::En,
        backend: stub.describe(),
        seed: 3,
        max_attempts: None,
        inference: config.clone(),
        convention: f.convention.spec().clone(),
        policy: f.policy.clone(),
        inputs: f.inputs.iter().map(RunInput::from).collect(),
    };
    let writer = RunLogWriter::create(&path, &header).unwrap();
    let mut c = ctx(&f, Arc::new(stub), &config);
    c.log = Some(&writer);
    let records = run_task(&f.inputs, &c).unwrap();
    drop(writer);

    let log = RunLog::read(&path).unwrap();
    assert_eq!(log.header, header);
    assert_eq!(log.records.len(), 20);
    assert_eq!(log.task_inputs().unwrap(), f.inputs);
    let replay: Arc<dyn Backend> = Arc::new(log.replay_backend());
    let c = ctx(&f, replay, &config);
    let again = run_task(&f.inputs, &c).unwrap();
    let outcome =
        |rs: &[GenerationRecord]| rs.iter().map(|r| (r.key(), r.correct, r.raw_text.clone())).collect::<Vec<_>>();
    assert_eq!(outcome(&records), outcome(&again));
}

#[test]
fn shared_conversation_mode_keeps_history() {
    let f = fixture(2, TaskKind::Reverse);
    let config =
        InferenceConfig { samples_per_input: 3, sample_mode: SampleMode::SharedConversation, ..Default::default() };
    let stub = StubBackend::new(StubBehavior::Oracle { p: 1.0, seed: 0, answers: f.answers.clone() });
    let records = run_task(&f.inputs, &ctx(&f, Arc::new(stub), &config)).unwrap();
    assert_eq!(records.len(), 6);
    assert!(records.iter().all(|r| r.correct));
}

#[test]
fn config_validation() {
    assert!(InferenceConfig::default().validate().is_ok());
    for bad in [
        InferenceConfig { samples_per_input: 0, ..Default::default() },
        InferenceConfig { top_p: 0.0, ..Default::default() },
        InferenceConfig { temperature: -1.0, ..Default::default() },
        InferenceConfig { max_parallel: 0, ..Default::default() },
    ] {
        assert!(bad.validate().is_err());
    }
    let parsed: InferenceConfig = serde_json::from_str(r#"{"model":"m"}"#).unwrap();
    assert_eq!(parsed.samples_per_input, 10);
    assert!(serde_json::from_str::<InferenceConfig>(r#"{"modle":"m"}"#).is_err());
}
