use std::fmt;

use serde::{Deserialize, Serialize};

/// Task group a mistake belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MistakeScope {
    ArgumentModification,
    AddingOffset,
    Reversing,
    AllTasks,
}

/// Every mistake the validator can report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MistakeKind {
    /// The requested argument was wrongly changed or left unchanged.
    WrongArgument,
    /// Header, source/destination, start/end position or tool changed.
    KeyChanged,
    NoOffset,
    /// An original instruction was altered while adding an offset.
    InstructionChanged,
    /// Offset applied to the wrong position, or wrong position of a HOME
    /// intermediate instruction.
    WrongPosition,
    WrongFunction,
    WrongReverseLogic,
    LeavingHomeWrongly,
    ReturningHomeWrongly,
    /// Movement type not adjusted in a routine mixing joint and linear moves.
    WrongMovementType,
    /// Movement type changed in a routine using a single interpolation.
    MismatchingTypes,
    WrongId,
    NoMoveMissing,
    InvalidIdentifier,
    MoreInstructions,
    LessInstructions,
    MoreRoutines,
    LessRoutines,
    WrongDefaultValues,
}

impl MistakeKind {
    pub const ALL: [MistakeKind; 19] = [
        MistakeKind::WrongArgument,
        MistakeKind::KeyChanged,
        MistakeKind::NoOffset,
        MistakeKind::InstructionChanged,
        MistakeKind::WrongPosition,
        MistakeKind::WrongFunction,
        MistakeKind::WrongReverseLogic,
        MistakeKind::LeavingHomeWrongly,
        MistakeKind::ReturningHomeWrongly,
        MistakeKind::WrongMovementType,
        MistakeKind::MismatchingTypes,
        MistakeKind::WrongId,
        MistakeKind::NoMoveMissing,
        MistakeKind::InvalidIdentifier,
        MistakeKind::MoreInstructions,
        MistakeKind::LessInstructions,
        MistakeKind::MoreRoutines,
        MistakeKind::LessRoutines,
        MistakeKind::WrongDefaultValues,
    ];

    pub fn scopes(self) -> &'static [MistakeScope] {
        use MistakeScope::*;
        match self {
            MistakeKind::WrongArgument => &[ArgumentModification],
            MistakeKind::KeyChanged => &[ArgumentModification, AddingOffset],
            MistakeKind::NoOffset | MistakeKind::InstructionChanged | MistakeKind::WrongFunction => &[AddingOffset],
            MistakeKind::WrongPosition => &[AddingOffset, Reversing],
            MistakeKind::WrongReverseLogic
            | MistakeKind::LeavingHomeWrongly
            | MistakeKind::ReturningHomeWrongly
            | MistakeKind::WrongMovementType
            | MistakeKind::MismatchingTypes
            | MistakeKind::WrongId => &[Reversing],
            _ => &[AllTasks],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MistakeKind::WrongArgument => "Wrong argument",
            MistakeKind::KeyChanged => "Key was changed",
            MistakeKind::NoOffset => "No offset",
            MistakeKind::InstructionChanged => "Instruction changed",
            MistakeKind::WrongPosition => "Wrong position",
            MistakeKind::WrongFunction => "Wrong function",
            MistakeKind::WrongReverseLogic => "Wrong reverse logic",
            MistakeKind::LeavingHomeWrongly => "Leaving HOME wrongly",
            MistakeKind::ReturningHomeWrongly => "Returning HOME wrongly",
            MistakeKind::WrongMovementType => "Wrong movement type",
            MistakeKind::MismatchingTypes => "Mismatching types",
            MistakeKind::WrongId => "Wrong ID",
            MistakeKind::NoMoveMissing => "NoMove instruction",
            MistakeKind::InvalidIdentifier => "Invalid identifier",
            MistakeKind::MoreInstructions => "More instructions",
            MistakeKind::LessInstructions => "Less instructions",
            MistakeKind::MoreRoutines => "More routines",
            MistakeKind::LessRoutines => "Less routines",
            MistakeKind::WrongDefaultValues => "Wrong default values",
        }
    }
}

impl fmt::Display for MistakeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Header,
    /// 0-based index into the output's instructions.
    Instruction(usize),
    Routine,
    Batch,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Header => f.write_str("header"),
            Location::Instruction(i) => write!(f, "instruction {}", i + 1),
            Location::Routine => f.write_str("routine"),
            Location::Batch => f.write_str("batch"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mistake {
    pub kind: MistakeKind,
    pub location: Location,
    pub detail: String,
}

impl Mistake {
    pub fn new(kind: MistakeKind, location: Location, detail: impl Into<String>) -> Self {
        Self { kind, location, detail: detail.into() }
    }
}

impl fmt::Display for Mistake {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}: {}", self.kind, self.location, self.detail)
    }
}

/// Result of validating one candidate output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub input_ref: String,
    pub mistakes: Vec<Mistake>,
    pub is_correct: bool,
}

impl ValidationReport {
    pub fn new(input_ref: impl Into<String>, mistakes: Vec<Mistake>) -> Self {
        let is_correct = mistakes.is_empty();
        Self { input_ref: input_ref.into(), mistakes, is_correct }
    }

    pub fn kinds(&self) -> Vec<MistakeKind> {
        self.mistakes.iter().map(|m| m.kind).collect()
    }

    pub fn has(&self, kind: MistakeKind) -> bool {
        self.mistakes.iter().any(|m| m.kind == kind)
    }
}
