use std::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax::{IdentRole, Offset, OffsetFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    ModifyArgument,
    AddOffset,
    Reverse,
}

impl TaskKind {
    pub const ALL: [TaskKind; 3] = [TaskKind::ModifyArgument, TaskKind::AddOffset, TaskKind::Reverse];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::ModifyArgument => "modify_argument",
            TaskKind::AddOffset => "add_offset",
            TaskKind::Reverse => "reverse",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "modify_argument" | "modify" => Ok(TaskKind::ModifyArgument),
            "add_offset" | "offset" => Ok(TaskKind::AddOffset),
            "reverse" => Ok(TaskKind::Reverse),
            other => Err(format!("unknown task `{other}`")),
        }
    }
}

/// Argument family addressed by an argument-modification request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgumentKind {
    /// Not an instruction argument; the station component embedded in
    /// position, velocity, tool and work-object identifiers.
    Station,
    Id,
    Position,
    Velocity,
    Zone,
    Tool,
    WorkObject,
}

impl ArgumentKind {
    pub const ALL: [ArgumentKind; 7] = [
        ArgumentKind::Station,
        ArgumentKind::Id,
        ArgumentKind::Position,
        ArgumentKind::Velocity,
        ArgumentKind::Zone,
        ArgumentKind::Tool,
        ArgumentKind::WorkObject,
    ];

    pub fn role(self) -> IdentRole {
        match self {
            ArgumentKind::Station => IdentRole::Station,
            ArgumentKind::Id => IdentRole::InstructionId,
            ArgumentKind::Position => IdentRole::Position,
            ArgumentKind::Velocity => IdentRole::Velocity,
            ArgumentKind::Zone => IdentRole::Zone,
            ArgumentKind::Tool => IdentRole::Tool,
            ArgumentKind::WorkObject => IdentRole::WorkObject,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ArgumentKind::Station => "station",
            ArgumentKind::Id => "id",
            ArgumentKind::Position => "position",
            ArgumentKind::Velocity => "velocity",
            ArgumentKind::Zone => "zone",
            ArgumentKind::Tool => "tool",
            ArgumentKind::WorkObject => "work_object",
        }
    }
}

impl fmt::Display for ArgumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ArgumentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace(['-', ' '], "_");
        ArgumentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm || (norm == "wobj" && *k == ArgumentKind::WorkObject))
            .ok_or_else(|| format!("unknown argument kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// Insert after the first instruction, displacing the start position.
    AfterStart,
    /// Insert before the last instruction, displacing the end position.
    BeforeEnd,
}

/// One of the three modification tasks with its parameters.
///
/// For [`ArgumentKind::Id`] the new value is `SRC,DST`: the first
/// instruction receives the source id and the last the destination id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskRequest {
    ModifyArgument { argument: ArgumentKind, new_value: String },
    AddOffset { anchor: Anchor, function: OffsetFunction, offset: Offset },
    Reverse,
}

impl TaskRequest {
    pub fn kind(&self) -> TaskKind {
        match self {
            TaskRequest::ModifyArgument { .. } => TaskKind::ModifyArgument,
            TaskRequest::AddOffset { .. } => TaskKind::AddOffset,
            TaskRequest::Reverse => TaskKind::Reverse,
        }
    }
}

/// Splits an id-modification value `SRC,DST`.
pub fn split_id_pair(value: &str) -> Option<(&str, &str)> {
    let (a, b) = value.split_once(',')?;
    let (a, b) = (a.trim(), b.trim());
    (!a.is_empty() && !b.is_empty()).then_some((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_json_shape() {
        let r = TaskRequest::AddOffset {
            anchor: Anchor::AfterStart,
            function: OffsetFunction::RelTool,
            offset: Offset::new(0, 200, 0),
        };
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(
            json,
            r#"{"task":"add_offset","anchor":"after_start","function":"RelTool","offset":{"dx":"0","dy":"200","dz":"0"}}"#
        );
        assert_eq!(serde_json::from_str::<TaskRequest>(&json).unwrap(), r);
        let m: TaskRequest =
            serde_json::from_str(r#"{"task":"modify_argument","argument":"velocity","new_value":"velocity_2"}"#)
                .unwrap();
        assert_eq!(m.kind(), TaskKind::ModifyArgument);
        assert!(serde_json::from_str::<TaskRequest>(r#"{"task":"modify_argument","argument":"velocity"}"#).is_err());
    }

    #[test]
    fn argument_kind_names() {
        assert_eq!("wobj".parse::<ArgumentKind>(), Ok(ArgumentKind::WorkObject));
        assert_eq!("Work-Object".parse::<ArgumentKind>(), Ok(ArgumentKind::WorkObject));
        assert_eq!("velocity".parse::<ArgumentKind>(), Ok(ArgumentKind::Velocity));
        assert!("speed".parse::<ArgumentKind>().is_err());
    }

    #[test]
    fn id_pairs() {
        assert_eq!(split_id_pair("400, 410"), Some(("400", "410")));
        assert_eq!(split_id_pair("400"), None);
        assert_eq!(split_id_pair(",1"), None);
    }
}
