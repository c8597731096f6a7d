//! Deterministic rewrite engine for the three modification tasks.
//!
//! The engine works directly on the syntax tree. Its outputs double as
//! ground truth when evaluating generated rewrites.

mod policy;
mod request;

pub use policy::{endpoint_id, routine_endpoints, PolicyError, TransformPolicy};
pub use request::{split_id_pair, Anchor, ArgumentKind, TaskKind, TaskRequest};

use crate::corpus::NamingConvention;
use crate::syntax::{
    is_identifier_text, IdentRole, Identifier, InstructionId, Interpolation, MovementInstruction, Routine, TargetExpr,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("`{value}` is not a valid {kind} value under the naming convention")]
    InvalidValue { kind: ArgumentKind, value: String },
    #[error("routine `{routine}` has no {kind} to modify")]
    UnsupportedKind { kind: ArgumentKind, routine: String },
    #[error("routine `{0}` is not a simple movement routine")]
    NotSimpleRoutine(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("HOME handling required for `{0}`")]
    UnknownHome(String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

/// Applies any request.
pub fn apply(
    routine: &Routine,
    request: &TaskRequest,
    policy: &TransformPolicy,
    convention: &NamingConvention,
) -> Result<Routine, TransformError> {
    match request {
        TaskRequest::ModifyArgument { argument, new_value } => {
            modify_argument(routine, *argument, new_value, convention, policy)
        }
        TaskRequest::AddOffset { .. } => add_offset(routine, request, policy, convention),
        TaskRequest::Reverse => reverse(routine, policy, convention),
    }
}

fn identifier(role: IdentRole, kind: ArgumentKind, value: &str) -> Result<Identifier, TransformError> {
    Identifier::new(role, value).map_err(|_| TransformError::InvalidValue { kind, value: value.to_string() })
}

fn check_value(kind: ArgumentKind, value: &str, convention: &NamingConvention) -> Result<(), TransformError> {
    let ok = match kind {
        ArgumentKind::Id => split_id_pair(value).is_some_and(|(s, d)| {
            [s, d].iter().all(|v| InstructionId::parse(v).is_some() && convention.matches(IdentRole::InstructionId, v))
        }),
        ArgumentKind::Station => convention.matches(IdentRole::Station, value),
        other => is_identifier_text(value) && convention.matches(other.role(), value),
    };
    if ok {
        Ok(())
    } else {
        Err(TransformError::InvalidValue { kind, value: value.to_string() })
    }
}

/// Replaces one argument family in every instruction.
///
/// `Station` rewrites the station component of every station-bearing
/// identifier. `Id` takes `SRC,DST`: the first instruction gets `SRC`, the
/// last `DST`, the header is renamed accordingly, and inner instructions
/// whose id was derived from the intermediate-id rule are re-derived.
pub fn modify_argument(
    routine: &Routine,
    kind: ArgumentKind,
    new_value: &str,
    convention: &NamingConvention,
    policy: &TransformPolicy,
) -> Result<Routine, TransformError> {
    check_value(kind, new_value, convention)?;
    let unsupported = || TransformError::UnsupportedKind { kind, routine: routine.name.to_string() };
    let mut out = routine.clone();

    match kind {
        ArgumentKind::Station => {
            let mut touched = false;
            for instr in &mut out.instructions {
                let pos = instr.target.position_mut();
                if let Some(t) = convention.replace_station(IdentRole::Position, pos.as_str(), new_value) {
                    *pos = identifier(IdentRole::Position, kind, &t)?;
                    touched = true;
                }
                for (role, slot) in [(IdentRole::Velocity, &mut instr.velocity), (IdentRole::Tool, &mut instr.tool)] {
                    if let Some(t) = convention.replace_station(role, slot.as_str(), new_value) {
                        *slot = identifier(role, kind, &t)?;
                        touched = true;
                    }
                }
                if let Some(wo) = &mut instr.work_object {
                    if let Some(t) = convention.replace_station(IdentRole::WorkObject, wo.as_str(), new_value) {
                        *wo = identifier(IdentRole::WorkObject, kind, &t)?;
                        touched = true;
                    }
                }
            }
            if !touched {
                return Err(unsupported());
            }
        }
        ArgumentKind::Id => {
            let (src, dst) = split_id_pair(new_value).expect("checked above");
            let n = out.instructions.len();
            if n == 0 || out.instructions[0].id.is_none() || out.instructions[n - 1].id.is_none() {
                return Err(unsupported());
            }
            let (old_src, old_dst) = routine_endpoints(routine, convention);
            let old_rule = policy.intermediate_id(&old_src, &old_dst, &old_src).ok();
            let new_rule = policy.intermediate_id(src, dst, src).ok();
            for (i, instr) in out.instructions.iter_mut().enumerate() {
                let Some(id) = &instr.id else { continue };
                let replacement = if i == 0 {
                    InstructionId::parse(src)
                } else if i == n - 1 {
                    InstructionId::parse(dst)
                } else if old_rule.as_ref() == Some(id) {
                    new_rule.clone()
                } else {
                    None
                };
                if let Some(r) = replacement {
                    instr.id = Some(r);
                }
            }
            if let Some(name) = convention.routine_name(src, dst) {
                out.name = identifier(IdentRole::RoutineName, kind, &name)?;
            }
        }
        ArgumentKind::Position => {
            let value = identifier(IdentRole::Position, kind, new_value)?;
            for instr in &mut out.instructions {
                *instr.target.position_mut() = value.clone();
            }
        }
        ArgumentKind::Velocity | ArgumentKind::Zone | ArgumentKind::Tool => {
            let value = identifier(kind.role(), kind, new_value)?;
            for instr in &mut out.instructions {
                let slot = match kind {
                    ArgumentKind::Velocity => &mut instr.velocity,
                    ArgumentKind::Zone => &mut instr.zone,
                    _ => &mut instr.tool,
                };
                *slot = value.clone();
            }
        }
        ArgumentKind::WorkObject => {
            let value = identifier(IdentRole::WorkObject, kind, new_value)?;
            let mut touched = false;
            for wo in out.instructions.iter_mut().filter_map(|i| i.work_object.as_mut()) {
                *wo = value.clone();
                touched = true;
            }
            if !touched {
                return Err(unsupported());
            }
        }
    }
    Ok(out.canonical())
}

fn require_simple(routine: &Routine) -> Result<(), TransformError> {
    if routine.is_simple() {
        Ok(())
    } else {
        Err(TransformError::NotSimpleRoutine(routine.name.to_string()))
    }
}

/// Id for an instruction derived from `model`, or `None` when the
/// convention does not want one on this kind.
fn derived_id(
    model: &MovementInstruction,
    src: &str,
    dst: &str,
    policy: &TransformPolicy,
    convention: &NamingConvention,
) -> Result<Option<InstructionId>, TransformError> {
    let wanted = convention.requires_id(model.kind) || (model.id.is_some() && convention.allows_id(model.kind));
    if !wanted {
        return Ok(None);
    }
    let anchor = model.id.as_ref().map_or(src, |i| i.as_str());
    Ok(Some(policy.intermediate_id(src, dst, anchor)?))
}

/// Inserts one offset instruction next to the start or end position.
pub fn add_offset(
    routine: &Routine,
    request: &TaskRequest,
    policy: &TransformPolicy,
    convention: &NamingConvention,
) -> Result<Routine, TransformError> {
    let TaskRequest::AddOffset { anchor, function, offset } = request else {
        return Err(TransformError::InvalidRequest(format!("expected add_offset, got {}", request.kind())));
    };
    require_simple(routine)?;
    let n = routine.instructions.len();
    let (anchor_at, insert_at) = match anchor {
        Anchor::AfterStart => (0, 1),
        Anchor::BeforeEnd => (n - 1, n - 1),
    };
    let model = &routine.instructions[anchor_at];
    let (src, dst) = routine_endpoints(routine, convention);
    let inserted = MovementInstruction {
        id: derived_id(model, &src, &dst, policy, convention)?,
        target: TargetExpr::OffsetCall {
            function: *function,
            position: model.target.position().clone(),
            offset: offset.clone(),
        },
        // never the final instruction
        no_move: true,
        leading: Vec::new(),
        ..model.clone()
    };
    let mut out = routine.clone();
    out.instructions.insert(insert_at, inserted);
    Ok(out.canonical())
}

/// Generates the routine travelling the opposite way.
///
/// Instruction order is reversed and the header and From/To comments are
/// swapped. The first instruction becomes the `\NoMove` instruction with the
/// policy default velocity, tool and work object. Each retraced segment
/// keeps the interpolation of the segment it retraces; the new first
/// instruction is joint. A routine now leaving HOME gets an intermediate
/// offset instruction after the first one, and the intermediate of a routine
/// that used to leave HOME is dropped.
pub fn reverse(
    routine: &Routine,
    policy: &TransformPolicy,
    convention: &NamingConvention,
) -> Result<Routine, TransformError> {
    require_simple(routine)?;
    let name = routine.name.to_string();
    let mentions_home = policy.is_home_comment(routine.from_comment.as_deref())
        || policy.is_home_comment(routine.to_comment.as_deref());
    if policy.home_position_id.is_none() && mentions_home {
        return Err(TransformError::UnknownHome(format!("{name}: HOME position id is not configured")));
    }

    let instrs = &routine.instructions;
    let first_home = policy.targets_home(&instrs[0], convention);
    let last_home = policy.targets_home(&instrs[instrs.len() - 1], convention);
    if first_home && last_home {
        return Err(TransformError::UnknownHome(format!("{name}: both endpoints are HOME")));
    }

    let mut core: Vec<&MovementInstruction> = instrs.iter().collect();
    if first_home && core.len() > 2 && TransformPolicy::is_home_intermediate(core[1], instrs[0].target.position()) {
        core.remove(1);
    }
    let m = core.len();

    let mut out_instrs = Vec::with_capacity(m + 1);
    for j in 0..m {
        let source = core[m - 1 - j];
        let mut instr = source.clone();
        let interpolation = if j == 0 { Interpolation::Joint } else { core[m - j].kind.interpolation() };
        instr.kind = source.kind.with_interpolation(interpolation);
        instr.no_move = j == 0;
        if j == 0 {
            let station = convention.station_of(IdentRole::Position, instr.target.position().as_str());
            if let Some(v) =
                policy.default_identifier(IdentRole::Velocity, Some(&instr.velocity), station.clone(), convention)
            {
                instr.velocity = v;
            }
            if let Some(t) = policy.default_identifier(IdentRole::Tool, Some(&instr.tool), station.clone(), convention)
            {
                instr.tool = t;
            }
            if let Some(w) =
                policy.default_identifier(IdentRole::WorkObject, instr.work_object.as_ref(), station, convention)
            {
                instr.work_object = Some(w);
            }
        }
        out_instrs.push(instr);
    }

    let mut out = routine.clone();
    out.from_comment = routine.to_comment.clone();
    out.to_comment = routine.from_comment.clone();
    out.instructions = out_instrs;

    let (src, dst) = routine_endpoints(&out, convention);
    if last_home {
        let home = &out.instructions[0];
        let intermediate = MovementInstruction {
            id: derived_id(home, &src, &dst, policy, convention)?,
            target: TargetExpr::OffsetCall {
                function: policy.intermediate_function,
                position: home.target.position().clone(),
                offset: policy.intermediate_offset.clone(),
            },
            no_move: false,
            leading: Vec::new(),
            ..home.clone()
        };
        out.instructions.insert(1, intermediate);
    }

    let renamed = convention
        .routine_name(&src, &dst)
        .or_else(|| routine.name_ids().map(|(s, d)| format!("mv{d}_{s}")))
        .ok_or_else(|| TransformError::NotSimpleRoutine(name.clone()))?;
    out.name =
        Identifier::new(IdentRole::RoutineName, renamed).map_err(|e| TransformError::InvalidRequest(e.to_string()))?;
    Ok(out.canonical())
}
