//! Mutation operators that inject one mistake kind into a correct output,
//! and a driver measuring how many of those mutants the validator detects.

use serde::{Deserialize, Serialize};

use super::{validate_batch, MistakeKind};
use crate::corpus::{CorpusEntry, IdentParts, NamingConvention};
use crate::exec::Execution;
use crate::syntax::{
    parse_routine, Decimal, IdentRole, Identifier, InstructionId, Interpolation, MovementInstruction, OffsetFunction,
    Routine, TargetExpr,
};
use crate::transforms::{TaskKind, TaskRequest, TransformPolicy};

fn flip(i: &mut MovementInstruction) {
    let other = match i.kind.interpolation() {
        Interpolation::Joint => Interpolation::Linear,
        Interpolation::Linear => Interpolation::Joint,
    };
    i.kind = i.kind.with_interpolation(other);
}

fn has_home(routine: &Routine, policy: &TransformPolicy, convention: &NamingConvention) -> bool {
    routine.instructions.iter().any(|i| policy.targets_home(i, convention))
}

fn mixes(routine: &Routine) -> bool {
    let kinds = routine.instructions.iter().map(|i| i.kind.interpolation());
    let joint = kinds.clone().any(|k| k == Interpolation::Joint);
    joint && kinds.clone().any(|k| k == Interpolation::Linear)
}

/// Index of the instruction an offset request inserted into `output`.
fn inserted_index(input: &Routine, output: &Routine) -> Option<usize> {
    (0..output.instructions.len()).find(|&i| {
        output.instructions[i].target.is_offset()
            && input.instructions.get(i).is_none_or(|orig| orig.target != output.instructions[i].target)
    })
}

/// Output with exactly one defect of kind `kind` injected into a correct
/// `oracle` output, or `None` when the operator does not apply to this
/// input and task.
pub fn mutate(
    kind: MistakeKind,
    input: &Routine,
    request: &TaskRequest,
    oracle: &Routine,
    convention: &NamingConvention,
    policy: &TransformPolicy,
) -> Option<Vec<Routine>> {
    let task = request.kind();
    let mut out = oracle.clone();
    let n = out.instructions.len();
    match kind {
        MistakeKind::WrongArgument => {
            if task != TaskKind::ModifyArgument {
                return None;
            }
            let i = (0..n).find(|&i| input.instructions[i] != out.instructions[i])?;
            let no_move = out.instructions[i].no_move;
            out.instructions[i] = input.instructions[i].clone();
            out.instructions[i].no_move = no_move;
        }
        MistakeKind::KeyChanged => {
            if task == TaskKind::Reverse {
                return None;
            }
            out.from_comment = Some(format!("{} moved", out.from_comment.as_deref().unwrap_or("Start")));
        }
        MistakeKind::NoOffset | MistakeKind::WrongPosition | MistakeKind::WrongFunction => {
            if task != TaskKind::AddOffset {
                return None;
            }
            let i = inserted_index(input, oracle)?;
            let target = &mut out.instructions[i].target;
            match (kind, target.clone()) {
                (MistakeKind::NoOffset, t) => *target = TargetExpr::Direct(t.position().clone()),
                (MistakeKind::WrongPosition, TargetExpr::OffsetCall { function, position, mut offset }) => {
                    offset.dx = Decimal::from(offset.dx.value().round() as i64 + 7);
                    *target = TargetExpr::OffsetCall { function, position, offset };
                }
                (MistakeKind::WrongFunction, TargetExpr::OffsetCall { function, position, offset }) => {
                    let function = match function {
                        OffsetFunction::Offs => OffsetFunction::RelTool,
                        OffsetFunction::RelTool => OffsetFunction::Offs,
                    };
                    *target = TargetExpr::OffsetCall { function, position, offset };
                }
                _ => return None,
            }
        }
        MistakeKind::InstructionChanged => {
            if task != TaskKind::AddOffset {
                return None;
            }
            flip(out.instructions.last_mut()?);
        }
        MistakeKind::WrongReverseLogic => {
            if task != TaskKind::Reverse {
                return None;
            }
            std::mem::swap(&mut out.from_comment, &mut out.to_comment);
        }
        MistakeKind::LeavingHomeWrongly | MistakeKind::WrongId => {
            let departs = task == TaskKind::Reverse
                && n > 2
                && policy.targets_home(&out.instructions[0], convention)
                && out.instructions[1].target.is_offset();
            if !departs {
                return None;
            }
            if kind == MistakeKind::LeavingHomeWrongly {
                out.instructions.remove(1);
            } else {
                let inter = &mut out.instructions[1];
                inter.id = match &inter.id {
                    Some(id) => InstructionId::parse(&format!("{}9", id.as_str())),
                    None => InstructionId::parse("9"),
                };
            }
        }
        MistakeKind::ReturningHomeWrongly => {
            let home_start = task == TaskKind::Reverse
                && input.instructions.len() > 2
                && policy.targets_home(&input.instructions[0], convention)
                && TransformPolicy::is_home_intermediate(
                    &input.instructions[1],
                    input.instructions[0].target.position(),
                );
            if !home_start {
                return None;
            }
            let mut inter = input.instructions[1].clone();
            inter.no_move = false;
            out.instructions.insert(n - 1, inter);
        }
        MistakeKind::WrongMovementType | MistakeKind::MismatchingTypes => {
            let wants_mix = kind == MistakeKind::WrongMovementType;
            if task != TaskKind::Reverse || has_home(input, policy, convention) || mixes(input) != wants_mix {
                return None;
            }
            flip(out.instructions.last_mut()?);
        }
        MistakeKind::NoMoveMissing => out.instructions.first_mut()?.no_move = false,
        MistakeKind::InvalidIdentifier => {
            let last = out.instructions.last_mut()?;
            last.velocity = Identifier::new(IdentRole::Velocity, "velocity_fast").ok()?;
            if convention.violations(last).is_empty() {
                return None;
            }
        }
        MistakeKind::MoreInstructions => {
            let mut extra = out.instructions.last()?.clone();
            extra.no_move = false;
            out.instructions.insert(n - 1, extra);
        }
        MistakeKind::LessInstructions => {
            if n < 3 {
                return None;
            }
            out.instructions.remove(n - 2);
        }
        MistakeKind::MoreRoutines => return Some(vec![out.clone(), out]),
        MistakeKind::LessRoutines => return Some(Vec::new()),
        MistakeKind::WrongDefaultValues => {
            if matches!(
                request,
                TaskRequest::ModifyArgument { argument: crate::transforms::ArgumentKind::Velocity, .. }
            ) {
                return None;
            }
            let first = out.instructions.first_mut()?;
            let station = convention.station_of(IdentRole::Velocity, first.velocity.as_str());
            let text = convention.render(IdentRole::Velocity, &IdentParts::labelled(station.as_deref(), "mutant"))?;
            first.velocity = Identifier::new(IdentRole::Velocity, text).ok()?;
        }
    }
    Some(vec![out])
}

/// Detection statistics of one mistake kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillStats {
    pub kind: MistakeKind,
    /// Mutants generated.
    pub mutants: usize,
    /// Mutants whose report contains the injected kind.
    pub killed: usize,
    /// Up to three mutants that escaped, as `entry id/task`.
    pub survivors: Vec<String>,
}

impl KillStats {
    pub fn all_killed(&self) -> bool {
        self.mutants > 0 && self.killed == self.mutants
    }
}

/// Applies every operator to every stored request and oracle output of
/// `entries` and validates each mutant.
pub fn mutation_kill(
    entries: &[CorpusEntry],
    convention: &NamingConvention,
    policy: &TransformPolicy,
    execution: Execution,
) -> Vec<KillStats> {
    let per_entry = execution.map(entries, |entry| {
        let mut rows = vec![(0usize, 0usize, Vec::new()); MistakeKind::ALL.len()];
        for (task, request) in &entry.requests {
            let Some(oracle) = entry.oracle_outputs.get(task).and_then(|t| parse_routine(t).ok()) else {
                continue;
            };
            for (k, kind) in MistakeKind::ALL.into_iter().enumerate() {
                let Some(outputs) = mutate(kind, &entry.routine, request, &oracle, convention, policy) else {
                    continue;
                };
                let report =
                    validate_batch(std::slice::from_ref(&entry.routine), &outputs, request, convention, policy)
                        .merged(entry.id.as_str());
                rows[k].0 += 1;
                if report.has(kind) {
                    rows[k].1 += 1;
                } else {
                    rows[k].2.push(format!("{}/{task}", entry.id));
                }
            }
        }
        rows
    });
    MistakeKind::ALL
        .into_iter()
        .enumerate()
        .map(|(k, kind)| {
            let mut stats = KillStats { kind, mutants: 0, killed: 0, survivors: Vec::new() };
            for rows in &per_entry {
                stats.mutants += rows[k].0;
                stats.killed += rows[k].1;
                stats.survivors.extend(rows[k].2.iter().cloned());
            }
            stats.survivors.truncate(3);
            stats
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{synthesize_corpus, SynthOptions};

    #[test]
    fn every_kind_is_generated_and_killed() {
        let convention = NamingConvention::new(Default::default()).unwrap();
        let policy = TransformPolicy::default();
        let entries = synthesize_corpus(3, 200, &convention, &policy, &SynthOptions::default()).unwrap();
        for stats in mutation_kill(&entries, &convention, &policy, Execution::default()) {
            assert!(stats.all_killed(), "{stats:?}");
        }
    }
}
