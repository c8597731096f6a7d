//! Rule-based validation of candidate outputs.
//!
//! Each check is written against the task semantics directly and never
//! calls the rewrite engine.

mod mistakes;
pub mod mutation;

pub use mistakes::{Location, Mistake, MistakeKind, MistakeScope, ValidationReport};

use crate::corpus::NamingConvention;
use crate::syntax::{
    print_target, IdentRole, Identifier, Interpolation, MoveKind, MovementInstruction, Routine, Slot, TargetExpr,
};
use crate::transforms::{
    endpoint_id, routine_endpoints, split_id_pair, Anchor, ArgumentKind, TaskKind, TaskRequest, TransformPolicy,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("validator for {expected} called with a {found} request")]
    TaskMismatch { expected: TaskKind, found: TaskKind },
}

/// Validates one output against its input with the validator matching the
/// request.
pub fn validate(
    input: &Routine,
    output: &Routine,
    request: &TaskRequest,
    convention: &NamingConvention,
    policy: &TransformPolicy,
) -> ValidationReport {
    let report = match request.kind() {
        TaskKind::ModifyArgument => validate_argument_modification(input, output, request, convention, policy),
        TaskKind::AddOffset => validate_offset_addition(input, output, request, convention, policy),
        TaskKind::Reverse => Ok(validate_reversal(input, output, policy, convention)),
    };
    report.expect("dispatch matches the request kind")
}

/// Shape of a routine with respect to HOME.
struct HomeShape<'a> {
    /// Instructions without a departure intermediate.
    core: Vec<&'a MovementInstruction>,
    returns_home: bool,
}

impl<'a> HomeShape<'a> {
    fn of(routine: &'a Routine, policy: &TransformPolicy, convention: &NamingConvention) -> Self {
        let instrs = &routine.instructions;
        let Some(first) = instrs.first() else {
            return Self { core: Vec::new(), returns_home: false };
        };
        let departs_home = policy.targets_home(first, convention);
        let returns_home = policy.targets_home(instrs.last().unwrap(), convention);
        let mut core: Vec<_> = instrs.iter().collect();
        if departs_home && core.len() > 2 && TransformPolicy::is_home_intermediate(core[1], first.target.position()) {
            core.remove(1);
        }
        Self { core, returns_home }
    }
}

fn expected_len(
    input: &Routine,
    request: &TaskRequest,
    convention: &NamingConvention,
    policy: &TransformPolicy,
) -> usize {
    let n = input.instructions.len();
    match request.kind() {
        TaskKind::ModifyArgument => n,
        TaskKind::AddOffset => n + 1,
        TaskKind::Reverse => {
            let shape = HomeShape::of(input, policy, convention);
            shape.core.len() + usize::from(shape.returns_home)
        }
    }
}

/// Checks shared by all tasks: `\NoMove` on the first instruction,
/// identifier formatting, instruction count and default values of the first
/// instruction. Defaults are not enforced on a slot the request rewrites.
pub fn validate_common(
    input: &Routine,
    output: &Routine,
    request: &TaskRequest,
    convention: &NamingConvention,
    policy: &TransformPolicy,
) -> Vec<Mistake> {
    let mut out = Vec::new();

    if let Some(first) = output.instructions.first() {
        if !first.no_move {
            out.push(Mistake::new(
                MistakeKind::NoMoveMissing,
                Location::Instruction(0),
                "first instruction lacks \\NoMove",
            ));
        }
    }

    for (i, instr) in output.instructions.iter().enumerate() {
        for (role, text) in convention.violations(instr) {
            let detail = if text.is_empty() { format!("missing {role}") } else { format!("invalid {role} `{text}`") };
            out.push(Mistake::new(MistakeKind::InvalidIdentifier, Location::Instruction(i), detail));
        }
    }

    let expected = expected_len(input, request, convention, policy);
    let actual = output.instructions.len();
    if actual > expected {
        out.push(Mistake::new(
            MistakeKind::MoreInstructions,
            Location::Routine,
            format!("expected {expected} instructions, found {actual}"),
        ));
    } else if actual < expected {
        out.push(Mistake::new(
            MistakeKind::LessInstructions,
            Location::Routine,
            format!("expected {expected} instructions, found {actual}"),
        ));
    }

    if let Some(first) = output.instructions.first() {
        let rewritten = match request {
            TaskRequest::ModifyArgument { argument, .. } => Some(*argument),
            _ => None,
        };
        let mut wrong = Vec::new();
        for (role, kind, value) in [
            (IdentRole::Velocity, ArgumentKind::Velocity, Some(&first.velocity)),
            (IdentRole::Tool, ArgumentKind::Tool, Some(&first.tool)),
            (IdentRole::WorkObject, ArgumentKind::WorkObject, first.work_object.as_ref()),
        ] {
            if rewritten != Some(kind) && !policy.has_default_label(role, value, convention) {
                wrong.push(format!("{role} `{}`", value.map_or("<none>", Identifier::as_str)));
            }
        }
        if !wrong.is_empty() {
            out.push(Mistake::new(
                MistakeKind::WrongDefaultValues,
                Location::Instruction(0),
                format!("non-default {}", wrong.join(", ")),
            ));
        }
    }
    out
}

/// Routine-level keys that no task except an id rewrite may change.
#[derive(Debug, Clone, PartialEq)]
struct Keys {
    header: String,
    reverse_name: Option<String>,
    source_name: Option<String>,
    destination_name: Option<String>,
    source_id: String,
    destination_id: String,
    start_position: Option<String>,
    end_position: Option<String>,
    tool: Option<String>,
}

fn reverse_name(name: &str, convention: &NamingConvention) -> Option<String> {
    let (s, d) = convention
        .routine_ids(name)
        .or_else(|| crate::syntax::split_routine_name(name).map(|(s, d)| (s.to_string(), d.to_string())))?;
    convention.routine_name(&d, &s).or_else(|| Some(format!("mv{d}_{s}")))
}

fn keys_of(routine: &Routine, convention: &NamingConvention) -> Keys {
    let (source_id, destination_id) = routine_endpoints(routine, convention);
    Keys {
        header: routine.name.to_string(),
        reverse_name: reverse_name(routine.name.as_str(), convention),
        source_name: routine.from_comment.clone(),
        destination_name: routine.to_comment.clone(),
        source_id,
        destination_id,
        start_position: routine.instructions.first().map(|i| i.target.position().to_string()),
        end_position: routine.instructions.last().map(|i| i.target.position().to_string()),
        tool: routine.instructions.first().map(|i| i.tool.to_string()),
    }
}

fn compare_keys(expected: &Keys, actual: &Keys) -> Vec<Mistake> {
    let mut out = Vec::new();
    let mut check = |name: &str, e: Option<&str>, a: Option<&str>| {
        if e != a {
            out.push(Mistake::new(
                MistakeKind::KeyChanged,
                Location::Header,
                format!("{name}: expected `{}`, found `{}`", e.unwrap_or("<none>"), a.unwrap_or("<none>")),
            ));
        }
    };
    check("header", Some(&expected.header), Some(&actual.header));
    check("reverse name", expected.reverse_name.as_deref(), actual.reverse_name.as_deref());
    check("source name", expected.source_name.as_deref(), actual.source_name.as_deref());
    check("source id", Some(&expected.source_id), Some(&actual.source_id));
    check("destination name", expected.destination_name.as_deref(), actual.destination_name.as_deref());
    check("destination id", Some(&expected.destination_id), Some(&actual.destination_id));
    check("start position", expected.start_position.as_deref(), actual.start_position.as_deref());
    check("end position", expected.end_position.as_deref(), actual.end_position.as_deref());
    check("tool", expected.tool.as_deref(), actual.tool.as_deref());
    out
}

fn target_with_position(target: &TargetExpr, position: &str) -> String {
    let mut t = target.clone();
    if let Ok(p) = Identifier::new(IdentRole::Position, position) {
        *t.position_mut() = p;
        print_target(&t)
    } else {
        match target {
            TargetExpr::Direct(_) => position.to_string(),
            TargetExpr::OffsetCall { function, offset, .. } => {
                format!("{}({},{},{},{})", function.keyword(), position, offset.dx, offset.dy, offset.dz)
            }
        }
    }
}

/// What the argument rewrite should leave in each slot of instruction `i`.
struct ArgumentExpectation<'a> {
    argument: ArgumentKind,
    value: &'a str,
    n: usize,
    old_rule: Option<String>,
    new_rule: Option<String>,
}

impl ArgumentExpectation<'_> {
    fn slot(&self, instr: &MovementInstruction, i: usize, slot: Slot, convention: &NamingConvention) -> Option<String> {
        let current = slot.value_of(instr);
        let restation = |role: IdentRole, text: &str| {
            convention.replace_station(role, text, self.value).unwrap_or_else(|| text.to_string())
        };
        match (self.argument, slot) {
            (ArgumentKind::Station, Slot::Target) => {
                let pos = restation(IdentRole::Position, instr.target.position().as_str());
                Some(target_with_position(&instr.target, &pos))
            }
            (ArgumentKind::Station, Slot::Velocity) => Some(restation(IdentRole::Velocity, instr.velocity.as_str())),
            (ArgumentKind::Station, Slot::Tool) => Some(restation(IdentRole::Tool, instr.tool.as_str())),
            (ArgumentKind::Station, Slot::WorkObject) => {
                instr.work_object.as_ref().map(|w| restation(IdentRole::WorkObject, w.as_str()))
            }
            (ArgumentKind::Id, Slot::Id) => {
                let (src, dst) = split_id_pair(self.value)?;
                let id = instr.id.as_ref()?.as_str().to_string();
                Some(if i == 0 {
                    src.to_string()
                } else if i + 1 == self.n {
                    dst.to_string()
                } else if self.old_rule.as_deref() == Some(id.as_str()) {
                    self.new_rule.clone().unwrap_or(id)
                } else {
                    id
                })
            }
            (ArgumentKind::Position, Slot::Target) => Some(target_with_position(&instr.target, self.value)),
            (ArgumentKind::Velocity, Slot::Velocity)
            | (ArgumentKind::Zone, Slot::Zone)
            | (ArgumentKind::Tool, Slot::Tool) => Some(self.value.to_string()),
            (ArgumentKind::WorkObject, Slot::WorkObject) => current.map(|_| self.value.to_string()),
            _ => current,
        }
    }

    fn keys(&self, input: &Routine, convention: &NamingConvention) -> Keys {
        let mut keys = keys_of(input, convention);
        let restation = |role: IdentRole, text: &str| {
            convention.replace_station(role, text, self.value).unwrap_or_else(|| text.to_string())
        };
        match self.argument {
            ArgumentKind::Id => {
                if let Some((src, dst)) = split_id_pair(self.value) {
                    keys.header = convention.routine_name(src, dst).unwrap_or(keys.header);
                    keys.reverse_name = reverse_name(&keys.header, convention);
                    keys.source_id = src.to_string();
                    keys.destination_id = dst.to_string();
                }
            }
            ArgumentKind::Station => {
                keys.start_position = keys.start_position.map(|p| restation(IdentRole::Position, &p));
                keys.end_position = keys.end_position.map(|p| restation(IdentRole::Position, &p));
                keys.tool = keys.tool.map(|t| restation(IdentRole::Tool, &t));
            }
            ArgumentKind::Position => {
                keys.start_position = Some(self.value.to_string());
                keys.end_position = Some(self.value.to_string());
                let new_id = convention.position_id(self.value);
                let ids_from_positions = |instr: Option<&MovementInstruction>| instr.is_some_and(|i| i.id.is_none());
                if ids_from_positions(input.instructions.first()) {
                    if let Some(id) = &new_id {
                        keys.source_id = id.clone();
                    }
                }
                if ids_from_positions(input.instructions.last()) {
                    if let Some(id) = &new_id {
                        keys.destination_id = id.clone();
                    }
                }
            }
            ArgumentKind::Tool => keys.tool = Some(self.value.to_string()),
            _ => {}
        }
        keys
    }
}

/// Checks an argument-modification output: the requested slot holds the new
/// value everywhere, nothing else moved, and the routine keys are intact.
pub fn validate_argument_modification(
    input: &Routine,
    output: &Routine,
    request: &TaskRequest,
    convention: &NamingConvention,
    policy: &TransformPolicy,
) -> Result<ValidationReport, ValidationError> {
    let TaskRequest::ModifyArgument { argument, new_value } = request else {
        return Err(ValidationError::TaskMismatch { expected: TaskKind::ModifyArgument, found: request.kind() });
    };
    let (old_src, old_dst) = routine_endpoints(input, convention);
    let (new_src, new_dst) = split_id_pair(new_value).unwrap_or((&old_src, &old_dst));
    let expectation = ArgumentExpectation {
        argument: *argument,
        value: new_value,
        n: input.instructions.len(),
        old_rule: policy.intermediate_id(&old_src, &old_dst, &old_src).ok().map(|i| i.to_string()),
        new_rule: policy.intermediate_id(new_src, new_dst, new_src).ok().map(|i| i.to_string()),
    };

    let mut mistakes = Vec::new();
    for (i, (before, after)) in input.instructions.iter().zip(&output.instructions).enumerate() {
        let mut wrong = Vec::new();
        for slot in Slot::ALL {
            let expected = expectation.slot(before, i, slot, convention);
            let found = slot.value_of(after);
            if expected != found {
                wrong.push(format!(
                    "{slot}: expected `{}`, found `{}`",
                    expected.as_deref().unwrap_or("<none>"),
                    found.as_deref().unwrap_or("<none>")
                ));
            }
        }
        if !wrong.is_empty() {
            mistakes.push(Mistake::new(MistakeKind::WrongArgument, Location::Instruction(i), wrong.join("; ")));
        }
    }
    mistakes.extend(compare_keys(&expectation.keys(input, convention), &keys_of(output, convention)));
    mistakes.extend(validate_common(input, output, request, convention, policy));
    Ok(ValidationReport::new(input.name.as_str(), mistakes))
}

fn slot_mismatches(a: &MovementInstruction, b: &MovementInstruction) -> Vec<Slot> {
    Slot::ALL.into_iter().filter(|s| s.value_of(a) != s.value_of(b)).collect()
}

/// Checks an offset-addition output: exactly one offset instruction was
/// inserted at the requested place, with the requested function, wrapping
/// the requested position; original instructions and keys are unchanged.
pub fn validate_offset_addition(
    input: &Routine,
    output: &Routine,
    request: &TaskRequest,
    convention: &NamingConvention,
    policy: &TransformPolicy,
) -> Result<ValidationReport, ValidationError> {
    let TaskRequest::AddOffset { anchor, function, offset } = request else {
        return Err(ValidationError::TaskMismatch { expected: TaskKind::AddOffset, found: request.kind() });
    };
    let n = input.instructions.len();
    let expected_at = match anchor {
        Anchor::AfterStart => 1,
        Anchor::BeforeEnd => n.saturating_sub(1),
    };
    let mut mistakes = Vec::new();

    // Locate the inserted instruction: the removal that best aligns the
    // output with the input, preferring offset instructions and then the
    // requested position.
    let inserted = if output.instructions.len() > n {
        (0..output.instructions.len())
            .map(|k| {
                let rest = output.instructions.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, i)| i);
                let cost: usize = rest.zip(&input.instructions).map(|(o, i)| slot_mismatches(i, o).len()).sum();
                let not_offset = usize::from(!output.instructions[k].target.is_offset());
                (cost, not_offset, k.abs_diff(expected_at), k)
            })
            .min()
            .map(|(_, _, _, k)| k)
    } else {
        None
    };

    let remaining: Vec<(usize, &MovementInstruction)> =
        output.instructions.iter().enumerate().filter(|(j, _)| Some(*j) != inserted).collect();
    for ((j, after), before) in remaining.iter().zip(&input.instructions) {
        let changed = slot_mismatches(before, after);
        if !changed.is_empty() {
            let names: Vec<_> = changed.iter().map(ToString::to_string).collect();
            mistakes.push(Mistake::new(
                MistakeKind::InstructionChanged,
                Location::Instruction(*j),
                format!("changed {}", names.join(", ")),
            ));
        }
    }

    match inserted.map(|k| (k, &output.instructions[k])) {
        Some((k, instr)) if instr.target.is_offset() => {
            let TargetExpr::OffsetCall { function: f, position, offset: o } = &instr.target else { unreachable!() };
            let anchor_instr = match anchor {
                Anchor::AfterStart => input.instructions.first(),
                Anchor::BeforeEnd => input.instructions.last(),
            };
            let mut wrong = Vec::new();
            if let Some(a) = anchor_instr {
                if position != a.target.position() {
                    wrong.push(format!("offset wraps `{position}` instead of `{}`", a.target.position()));
                }
            }
            if k != expected_at {
                wrong.push(format!("inserted at instruction {} instead of {}", k + 1, expected_at + 1));
            }
            if !o.numerically_eq(offset) {
                wrong.push(format!(
                    "displacement ({},{},{}) instead of ({},{},{})",
                    o.dx, o.dy, o.dz, offset.dx, offset.dy, offset.dz
                ));
            }
            if !wrong.is_empty() {
                mistakes.push(Mistake::new(MistakeKind::WrongPosition, Location::Instruction(k), wrong.join("; ")));
            }
            if f != function {
                mistakes.push(Mistake::new(
                    MistakeKind::WrongFunction,
                    Location::Instruction(k),
                    format!("used {} instead of {}", f.keyword(), function.keyword()),
                ));
            }
        }
        Some((k, _)) => {
            mistakes.push(Mistake::new(
                MistakeKind::NoOffset,
                Location::Instruction(k),
                "added instruction has no offset function",
            ));
        }
        None => mistakes.push(Mistake::new(MistakeKind::NoOffset, Location::Routine, "no instruction was added")),
    }

    mistakes.extend(compare_keys(&keys_of(input, convention), &keys_of(output, convention)));
    mistakes.extend(validate_common(input, output, request, convention, policy));
    Ok(ValidationReport::new(input.name.as_str(), mistakes))
}

/// A routine is a special case for reversal when it mixes joint and linear
/// movements.
fn mixes_interpolations(instrs: &[&MovementInstruction]) -> bool {
    let joint = instrs.iter().any(|i| i.kind.interpolation() == Interpolation::Joint);
    let linear = instrs.iter().any(|i| i.kind.interpolation() == Interpolation::Linear);
    joint && linear
}

/// Checks a reversal output.
pub fn validate_reversal(
    input: &Routine,
    output: &Routine,
    policy: &TransformPolicy,
    convention: &NamingConvention,
) -> ValidationReport {
    let mut mistakes = Vec::new();
    let shape = HomeShape::of(input, policy, convention);
    let out = &output.instructions;

    // Separate HOME intermediates from the retraced instructions.
    let mut core: Vec<(usize, &MovementInstruction)> = out.iter().enumerate().collect();
    let departure = out.first().filter(|f| policy.targets_home(f, convention)).and_then(|_| {
        out.get(1).filter(|i| {
            i.target.is_offset() && out.len() > 2 || TransformPolicy::is_home_intermediate(i, out[0].target.position())
        })
    });
    if departure.is_some() {
        core.remove(1);
    }
    if out.len() >= 2 {
        let last = &out[out.len() - 1];
        let before_last = &out[out.len() - 2];
        let is_departure = departure.is_some() && out.len() - 2 == 1;
        if !is_departure
            && policy.targets_home(last, convention)
            && TransformPolicy::is_home_intermediate(before_last, last.target.position())
        {
            mistakes.push(Mistake::new(
                MistakeKind::ReturningHomeWrongly,
                Location::Instruction(out.len() - 2),
                "intermediate instruction before returning HOME",
            ));
            core.retain(|(j, _)| *j != out.len() - 2);
        }
    }

    if shape.returns_home && departure.is_none() {
        mistakes.push(Mistake::new(
            MistakeKind::LeavingHomeWrongly,
            Location::Instruction(1),
            "routine leaves HOME without an intermediate instruction",
        ));
    }
    if let (Some(inter), Some(home)) = (departure, out.first()) {
        let (src, dst) = routine_endpoints(output, convention);
        let wants_id = convention.requires_id(inter.kind) || (home.id.is_some() && convention.allows_id(inter.kind));
        let expected_id = if wants_id {
            let anchor = home.id.as_ref().map_or(src.clone(), |i| i.to_string());
            policy.intermediate_id(&src, &dst, &anchor).ok().map(|i| i.to_string())
        } else {
            None
        };
        let found_id = inter.id.as_ref().map(ToString::to_string);
        if expected_id != found_id {
            mistakes.push(Mistake::new(
                MistakeKind::WrongId,
                Location::Instruction(1),
                format!(
                    "intermediate id `{}` instead of `{}`",
                    found_id.as_deref().unwrap_or("<none>"),
                    expected_id.as_deref().unwrap_or("<none>")
                ),
            ));
        }
        let ok_target = match &inter.target {
            TargetExpr::OffsetCall { function, position, offset } => {
                *function == policy.intermediate_function
                    && position == home.target.position()
                    && offset.numerically_eq(&policy.intermediate_offset)
            }
            TargetExpr::Direct(_) => false,
        };
        if !ok_target {
            mistakes.push(Mistake::new(
                MistakeKind::WrongPosition,
                Location::Instruction(1),
                format!(
                    "intermediate target `{}` instead of {}({},{},{},{})",
                    print_target(&inter.target),
                    policy.intermediate_function.keyword(),
                    home.target.position(),
                    policy.intermediate_offset.dx,
                    policy.intermediate_offset.dy,
                    policy.intermediate_offset.dz
                ),
            ));
        }
    }

    // Header-level reversal logic.
    let mut logic = Vec::new();
    let expected_targets: Vec<String> = shape.core.iter().rev().map(|i| print_target(&i.target)).collect();
    let found_targets: Vec<String> = core.iter().map(|(_, i)| print_target(&i.target)).collect();
    if expected_targets != found_targets {
        logic.push(format!("targets [{}] instead of [{}]", found_targets.join(", "), expected_targets.join(", ")));
    }
    let (in_src, in_dst) = routine_endpoints(input, convention);
    let (out_src, out_dst) = routine_endpoints(output, convention);
    if (out_src.as_str(), out_dst.as_str()) != (in_dst.as_str(), in_src.as_str()) {
        logic.push(format!("source/destination {out_src}/{out_dst} instead of {in_dst}/{in_src}"));
    }
    let expected_name =
        convention.routine_name(&in_dst, &in_src).or_else(|| reverse_name(input.name.as_str(), convention));
    if expected_name.as_deref() != Some(output.name.as_str()) {
        logic.push(format!("header `{}` instead of `{}`", output.name, expected_name.as_deref().unwrap_or("?")));
    }
    if output.from_comment != input.to_comment || output.to_comment != input.from_comment {
        logic.push("From/To comments not swapped".to_string());
    }
    if !logic.is_empty() {
        mistakes.push(Mistake::new(MistakeKind::WrongReverseLogic, Location::Header, logic.join("; ")));
    }

    // Per-instruction checks when the retraced instructions line up.
    if expected_targets == found_targets {
        let m = shape.core.len();
        let special = mixes_interpolations(&shape.core);
        for (j, (idx, found)) in core.iter().enumerate() {
            let original = shape.core[m - 1 - j];
            let interpolation = if j == 0 { Interpolation::Joint } else { shape.core[m - j].kind.interpolation() };
            let expected_kind: MoveKind = original.kind.with_interpolation(interpolation);
            if found.kind != expected_kind {
                let kind = if special { MistakeKind::WrongMovementType } else { MistakeKind::MismatchingTypes };
                mistakes.push(Mistake::new(
                    kind,
                    Location::Instruction(*idx),
                    format!("{} instead of {}", found.kind, expected_kind),
                ));
            }
            let mut changed = Vec::new();
            for slot in [Slot::Id, Slot::Zone, Slot::Velocity, Slot::Tool, Slot::WorkObject] {
                let defaults_slot = matches!(slot, Slot::Velocity | Slot::Tool | Slot::WorkObject);
                if j == 0 && defaults_slot {
                    continue;
                }
                if slot.value_of(original) != slot.value_of(found) {
                    changed.push(slot.to_string());
                }
            }
            if j > 0 && found.no_move {
                changed.push("\\NoMove on a later instruction".into());
            }
            if !changed.is_empty() {
                mistakes.push(Mistake::new(
                    MistakeKind::WrongReverseLogic,
                    Location::Instruction(*idx),
                    format!("changed {}", changed.join(", ")),
                ));
            }
        }
    }

    mistakes.extend(validate_common(input, output, &TaskRequest::Reverse, convention, policy));
    ValidationReport::new(input.name.as_str(), mistakes)
}

/// Validation of a batch of routines (e.g. several routines reversed in one
/// prompt). Inputs and outputs are paired in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchReport {
    pub reports: Vec<ValidationReport>,
    /// MoreRoutines / LessRoutines findings.
    pub batch_mistakes: Vec<Mistake>,
}

impl BatchReport {
    pub fn is_correct(&self) -> bool {
        self.batch_mistakes.is_empty() && self.reports.iter().all(|r| r.is_correct)
    }

    /// Single report with every finding.
    pub fn merged(&self, input_ref: impl Into<String>) -> ValidationReport {
        let mut mistakes = self.batch_mistakes.clone();
        mistakes.extend(self.reports.iter().flat_map(|r| r.mistakes.iter().cloned()));
        ValidationReport::new(input_ref, mistakes)
    }
}

pub fn validate_batch(
    inputs: &[Routine],
    outputs: &[Routine],
    request: &TaskRequest,
    convention: &NamingConvention,
    policy: &TransformPolicy,
) -> BatchReport {
    let mut batch_mistakes = Vec::new();
    if outputs.len() > inputs.len() {
        batch_mistakes.push(Mistake::new(
            MistakeKind::MoreRoutines,
            Location::Batch,
            format!("{} routines for {} inputs", outputs.len(), inputs.len()),
        ));
    } else if outputs.len() < inputs.len() {
        batch_mistakes.push(Mistake::new(
            MistakeKind::LessRoutines,
            Location::Batch,
            format!("{} routines for {} inputs", outputs.len(), inputs.len()),
        ));
    }
    let reports = inputs.iter().zip(outputs).map(|(i, o)| validate(i, o, request, convention, policy)).collect();
    BatchReport { reports, batch_mistakes }
}

/// Id an endpoint instruction would be known by; exposed for diagnostics.
pub fn instruction_key(instr: &MovementInstruction, convention: &NamingConvention) -> Option<String> {
    endpoint_id(instr, convention)
}
