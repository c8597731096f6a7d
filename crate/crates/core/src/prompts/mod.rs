//! Bilingual system and user prompts with validated few-shot examples.

mod resources;

pub use resources::{PromptResources, ResourceError};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusEntry, IdentParts, NamingConvention};
use crate::syntax::{
    print_instruction, print_routine, IdentRole, Identifier, InstructionId, MoveKind, MovementInstruction, Routine,
    TargetExpr,
};
use crate::transforms::{split_id_pair, Anchor, ArgumentKind, TaskKind, TaskRequest, TransformPolicy};
use crate::validator::{validate, Mistake};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Language {
    #[default]
    En,
    De,
}

impl Language {
    pub const ALL: [Language; 2] = [Language::En, Language::De];

    pub fn as_str(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::De => "de",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "en" | "english" => Ok(Language::En),
            "de" | "german" | "deutsch" => Ok(Language::De),
            other => Err(format!("unknown language `{other}` (expected en or de)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PromptError {
    #[error("few-shot example {index} is not validator-clean: {}", render_mistakes(.mistakes))]
    UnvalidatedExamples { index: usize, mistakes: Vec<Mistake> },
    #[error("request for {found} used where {expected} was expected")]
    TaskMismatch { expected: TaskKind, found: TaskKind },
    #[error("a prompt needs at least one routine")]
    NoRoutines,
    #[error("{task} takes exactly one routine, got {count}")]
    TooManyRoutines { task: TaskKind, count: usize },
    #[error("prompt resources: {0}")]
    Resource(#[from] ResourceError),
}

fn render_mistakes(mistakes: &[Mistake]) -> String {
    mistakes.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// One input/output demonstration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewShot {
    pub input: Routine,
    pub request: TaskRequest,
    pub output: Routine,
}

impl FewShot {
    /// Pair built from a corpus entry's stored request and oracle output.
    pub fn from_entry(entry: &CorpusEntry, task: TaskKind) -> Option<Self> {
        let request = entry.requests.get(&task)?.clone();
        let output = crate::syntax::parse_routine(entry.oracle_outputs.get(&task)?).ok()?;
        Some(Self { input: entry.routine.clone(), request, output })
    }
}

/// Number of few-shot examples per task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FewShotAllocation {
    pub modify_argument: usize,
    pub add_offset: usize,
    pub reverse: usize,
}

impl Default for FewShotAllocation {
    /// Eleven examples in total.
    fn default() -> Self {
        Self { modify_argument: 4, add_offset: 4, reverse: 3 }
    }
}

impl FewShotAllocation {
    pub fn for_task(&self, task: TaskKind) -> usize {
        match task {
            TaskKind::ModifyArgument => self.modify_argument,
            TaskKind::AddOffset => self.add_offset,
            TaskKind::Reverse => self.reverse,
        }
    }

    pub fn total(&self) -> usize {
        self.modify_argument + self.add_offset + self.reverse
    }
}

/// Takes up to `count` examples for `task` from a prompt set, in order.
pub fn select_few_shot(prompt_set: &[CorpusEntry], task: TaskKind, count: usize) -> Vec<FewShot> {
    prompt_set.iter().filter_map(|e| FewShot::from_entry(e, task)).take(count).collect()
}

/// Validated prompt template for one task and language.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplate {
    pub language: Language,
    pub task: TaskKind,
    /// Rendered rules in order: shared rules, then task rules.
    pub system_rules: Vec<String>,
    pub few_shot: Vec<FewShot>,
    resources: PromptResources,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub system: String,
    pub user: String,
    /// Rough token count: one token per four characters.
    pub token_estimate: usize,
}

fn example_move(convention: &NamingConvention, policy: &TransformPolicy, kind: MoveKind) -> String {
    let station = "R7";
    let labelled = |role, label: &str| {
        let mut parts = IdentParts::labelled(Some(station), label);
        parts.name = Some(label.to_string());
        convention.render(role, &parts).unwrap_or_else(|| label.to_string())
    };
    let position = convention
        .render(
            IdentRole::Position,
            &IdentParts {
                station: Some(station.into()),
                id: Some("400".into()),
                name: Some("position1".into()),
                ..Default::default()
            },
        )
        .unwrap_or_else(|| "position1".into());
    let zone = convention
        .render(
            IdentRole::Zone,
            &IdentParts { digits: Some("50".into()), name: Some("zone".into()), ..Default::default() },
        )
        .unwrap_or_else(|| "zone".into());
    let ident = |role, text: String| {
        Identifier::new(role, text.clone()).unwrap_or_else(|_| Identifier::new(role, "x").expect("static identifier"))
    };
    let instr = MovementInstruction {
        kind,
        id: kind.is_machine_tending().then(|| InstructionId::Number("400".into())),
        target: TargetExpr::Direct(ident(IdentRole::Position, position)),
        velocity: ident(IdentRole::Velocity, labelled(IdentRole::Velocity, &policy.default_velocity_label)),
        zone: ident(IdentRole::Zone, zone),
        tool: ident(IdentRole::Tool, labelled(IdentRole::Tool, &policy.default_tool_label)),
        work_object: Some(ident(IdentRole::WorkObject, labelled(IdentRole::WorkObject, &policy.default_wobj_label))),
        no_move: false,
        leading: Vec::new(),
    };
    print_instruction(&instr)
}

fn fill(text: &str, vars: &[(&str, String)]) -> String {
    vars.iter().fold(text.to_string(), |acc, (k, v)| acc.replace(&format!("{{{k}}}"), v))
}

impl PromptTemplate {
    /// Builds the template, rejecting any example the validator flags.
    pub fn new(
        task: TaskKind,
        language: Language,
        few_shot: Vec<FewShot>,
        convention: &NamingConvention,
        policy: &TransformPolicy,
    ) -> Result<Self, PromptError> {
        Self::with_resources(PromptResources::builtin(language), task, few_shot, convention, policy)
    }

    pub fn with_resources(
        resources: PromptResources,
        task: TaskKind,
        few_shot: Vec<FewShot>,
        convention: &NamingConvention,
        policy: &TransformPolicy,
    ) -> Result<Self, PromptError> {
        for (index, shot) in few_shot.iter().enumerate() {
            if shot.request.kind() != task {
                return Err(PromptError::TaskMismatch { expected: task, found: shot.request.kind() });
            }
            let report = validate(&shot.input, &shot.output, &shot.request, convention, policy);
            if !report.is_correct {
                return Err(PromptError::UnvalidatedExamples { index, mistakes: report.mistakes });
            }
        }
        let routine_pattern = convention.spec().routine.replace("{src}", "<source>").replace("{dst}", "<destination>");
        let home_position = policy
            .home_position_id
            .as_deref()
            .and_then(|id| {
                convention.render(
                    IdentRole::Position,
                    &IdentParts {
                        station: Some("R7".into()),
                        id: Some(id.into()),
                        name: Some(id.into()),
                        ..Default::default()
                    },
                )
            })
            .unwrap_or_else(|| policy.home_name.clone());
        let o = &policy.intermediate_offset;
        let vars = [
            ("example_move", example_move(convention, policy, MoveKind::MoveJ)),
            ("example_mt_move", example_move(convention, policy, MoveKind::MtMoveJ)),
            ("default_velocity", policy.default_velocity_label.to_lowercase()),
            ("default_tool", policy.default_tool_label.to_lowercase()),
            ("default_wobj", policy.default_wobj_label.to_lowercase()),
            ("routine_pattern", routine_pattern),
            ("home_name", policy.home_name.clone()),
            ("home_function", policy.intermediate_function.keyword().to_string()),
            ("home_position", home_position),
            ("home_offset", format!("{},{},{}", o.dx, o.dy, o.dz)),
        ];
        let system_rules = resources.rules().iter().chain(resources.task_rules(task)).map(|r| fill(r, &vars)).collect();
        Ok(Self { language: resources.language(), task, system_rules, few_shot, resources })
    }

    /// Rules followed by the examples block (omitted without examples).
    pub fn system_prompt(&self) -> String {
        let mut out = self.system_rules.join("\n");
        if !self.few_shot.is_empty() {
            out.push_str("\n\n");
            out.push_str(self.resources.label("examples"));
            for shot in &self.few_shot {
                let user =
                    self.user_prompt(&shot.request, std::slice::from_ref(&shot.input)).expect("validated example");
                out.push_str(&format!(
                    "\n\n{}\n{}\n\n{}\n{}",
                    self.resources.label("input"),
                    user,
                    self.resources.label("output"),
                    print_routine(&shot.output)
                ));
            }
        }
        out
    }

    /// Instruction sentence (if any) followed by the canonical routine text.
    pub fn user_prompt(&self, request: &TaskRequest, routines: &[Routine]) -> Result<String, PromptError> {
        if request.kind() != self.task {
            return Err(PromptError::TaskMismatch { expected: self.task, found: request.kind() });
        }
        build_user_prompt(&self.resources, request, routines)
    }

    pub fn render(&self, request: &TaskRequest, routines: &[Routine]) -> Result<RenderedPrompt, PromptError> {
        let system = self.system_prompt();
        let user = self.user_prompt(request, routines)?;
        let token_estimate = (system.chars().count() + user.chars().count()).div_ceil(4);
        Ok(RenderedPrompt { system, user, token_estimate })
    }
}

/// Builds the system prompt for a task; see [`PromptTemplate`].
pub fn build_system_prompt(
    task: TaskKind,
    language: Language,
    few_shot: Vec<FewShot>,
    convention: &NamingConvention,
    policy: &TransformPolicy,
) -> Result<String, PromptError> {
    Ok(PromptTemplate::new(task, language, few_shot, convention, policy)?.system_prompt())
}

/// Instruction sentence for a request, `None` for reversal.
pub fn instruction_sentence(resources: &PromptResources, request: &TaskRequest) -> Option<String> {
    match request {
        TaskRequest::ModifyArgument { argument, new_value } => {
            let template = resources.user(argument.as_str());
            Some(match (argument, split_id_pair(new_value)) {
                (ArgumentKind::Id, Some((src, dst))) => fill(template, &[("src", src.into()), ("dst", dst.into())]),
                _ => fill(template, &[("value", new_value.clone())]),
            })
        }
        TaskRequest::AddOffset { anchor, function, offset } => {
            let anchor = resources.word(match anchor {
                Anchor::AfterStart => "after_start",
                Anchor::BeforeEnd => "before_end",
            });
            let axes: Vec<String> = [("X", &offset.dx), ("Y", &offset.dy), ("Z", &offset.dz)]
                .into_iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|(axis, v)| fill(resources.word("axis"), &[("value", v.to_string()), ("axis", axis.into())]))
                .collect();
            let joiner = format!(" {} ", resources.word("and"));
            Some(fill(
                resources.user("offset"),
                &[
                    ("function", resources.word(function.keyword()).to_string()),
                    ("anchor", anchor.to_string()),
                    ("axes", axes.join(&joiner)),
                ],
            ))
        }
        TaskRequest::Reverse => None,
    }
}

/// User prompt: sentence, blank line, routine text. Reversal accepts several
/// routines separated by blank lines and has no sentence.
pub fn build_user_prompt(
    resources: &PromptResources,
    request: &TaskRequest,
    routines: &[Routine],
) -> Result<String, PromptError> {
    if routines.is_empty() {
        return Err(PromptError::NoRoutines);
    }
    if request.kind() != TaskKind::Reverse && routines.len() > 1 {
        return Err(PromptError::TooManyRoutines { task: request.kind(), count: routines.len() });
    }
    let body = routines.iter().map(print_routine).collect::<Vec<_>>().join("\n\n");
    Ok(match instruction_sentence(resources, request) {
        Some(sentence) => format!("{sentence}\n\n{body}"),
        None => body,
    })
}
