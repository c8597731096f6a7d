use std::fmt;

use serde::{Deserialize, Serialize};

use super::{print_instruction, print_target, BodyLine, MovementInstruction, Routine};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeaderField {
    Local,
    Name,
    FromComment,
    ToComment,
    Trailing,
}

/// Argument slot of a movement instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Kind,
    Id,
    Target,
    Velocity,
    Zone,
    Tool,
    WorkObject,
    NoMove,
    Comments,
}

impl Slot {
    pub const ALL: [Slot; 9] = [
        Slot::Kind,
        Slot::Id,
        Slot::Target,
        Slot::Velocity,
        Slot::Zone,
        Slot::Tool,
        Slot::WorkObject,
        Slot::NoMove,
        Slot::Comments,
    ];

    /// Printable value of this slot, `None` for an absent optional slot.
    pub fn value_of(self, instr: &MovementInstruction) -> Option<String> {
        match self {
            Slot::Kind => Some(instr.kind.keyword().to_string()),
            Slot::Id => instr.id.as_ref().map(ToString::to_string),
            Slot::Target => Some(print_target(&instr.target)),
            Slot::Velocity => Some(instr.velocity.to_string()),
            Slot::Zone => Some(instr.zone.to_string()),
            Slot::Tool => Some(instr.tool.to_string()),
            Slot::WorkObject => instr.work_object.as_ref().map(ToString::to_string),
            Slot::NoMove => Some(instr.no_move.to_string()),
            Slot::Comments => {
                if instr.leading.is_empty() {
                    None
                } else {
                    Some(body_lines(&instr.leading))
                }
            }
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Slot::Kind => "kind",
            Slot::Id => "id",
            Slot::Target => "target",
            Slot::Velocity => "velocity",
            Slot::Zone => "zone",
            Slot::Tool => "tool",
            Slot::WorkObject => "work_object",
            Slot::NoMove => "no_move",
            Slot::Comments => "comments",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldPath {
    Header(HeaderField),
    InstructionCount,
    Instruction(usize, Slot),
    /// A whole instruction present on only one side.
    ExtraInstruction(usize),
}

impl fmt::Display for FieldPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldPath::Header(h) => write!(f, "{h:?}"),
            FieldPath::InstructionCount => f.write_str("instructions.len"),
            FieldPath::Instruction(i, slot) => write!(f, "instructions[{i}].{slot}"),
            FieldPath::ExtraInstruction(i) => write!(f, "instructions[{i}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldChange {
    pub path: FieldPath,
    pub before: Option<String>,
    pub after: Option<String>,
}

impl FieldChange {
    pub fn reversed(&self) -> FieldChange {
        FieldChange { path: self.path.clone(), before: self.after.clone(), after: self.before.clone() }
    }
}

fn body_lines(lines: &[BodyLine]) -> String {
    lines
        .iter()
        .map(|l| match l {
            BodyLine::Comment(c) => format!("!{c}"),
            BodyLine::Statement(s) => s.clone(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Every differing field between two parsed routines. Instructions are
/// compared positionally.
pub fn structural_diff(a: &Routine, b: &Routine) -> Vec<FieldChange> {
    let mut out = Vec::new();
    let mut header = |field: HeaderField, x: Option<String>, y: Option<String>| {
        if x != y {
            out.push(FieldChange { path: FieldPath::Header(field), before: x, after: y });
        }
    };
    header(HeaderField::Local, Some(a.local.to_string()), Some(b.local.to_string()));
    header(HeaderField::Name, Some(a.name.to_string()), Some(b.name.to_string()));
    header(HeaderField::FromComment, a.from_comment.clone(), b.from_comment.clone());
    header(HeaderField::ToComment, a.to_comment.clone(), b.to_comment.clone());
    let trailing = |r: &Routine| (!r.trailing.is_empty()).then(|| body_lines(&r.trailing));
    header(HeaderField::Trailing, trailing(a), trailing(b));

    let (na, nb) = (a.instructions.len(), b.instructions.len());
    if na != nb {
        out.push(FieldChange {
            path: FieldPath::InstructionCount,
            before: Some(na.to_string()),
            after: Some(nb.to_string()),
        });
    }
    for (i, (x, y)) in a.instructions.iter().zip(&b.instructions).enumerate() {
        for slot in Slot::ALL {
            let (vx, vy) = (slot.value_of(x), slot.value_of(y));
            if vx != vy {
                out.push(FieldChange { path: FieldPath::Instruction(i, slot), before: vx, after: vy });
            }
        }
    }
    for i in nb..na {
        out.push(FieldChange {
            path: FieldPath::ExtraInstruction(i),
            before: Some(print_instruction(&a.instructions[i])),
            after: None,
        });
    }
    for i in na..nb {
        out.push(FieldChange {
            path: FieldPath::ExtraInstruction(i),
            before: None,
            after: Some(print_instruction(&b.instructions[i])),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse_routine;
    use super::*;

    const TABLE_2_IN: &str = "PROC mvid1_id2()
    !From:  Start Position
    !To:    End Position
    MoveJ id1,position1,velocity_1,zone,tool\\WObj:=world_object\\NoMove;
    MoveJ id2,position2,velocity_1,zone,tool\\WObj:=world_object;
ENDPROC";

    #[test]
    fn identical_routines_have_no_changes() {
        let r = parse_routine(TABLE_2_IN).unwrap();
        assert!(structural_diff(&r, &r).is_empty());
    }

    #[test]
    fn velocity_rewrite_is_two_changes() {
        let a = parse_routine(TABLE_2_IN).unwrap();
        let b = parse_routine(&TABLE_2_IN.replace("velocity_1", "velocity_2")).unwrap();
        let d = structural_diff(&a, &b);
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|c| matches!(c.path, FieldPath::Instruction(_, Slot::Velocity))));
        assert_eq!(d[0].before.as_deref(), Some("velocity_1"));
        assert_eq!(d[0].after.as_deref(), Some("velocity_2"));
    }

    #[test]
    fn whitespace_is_ignored() {
        let a = parse_routine(TABLE_2_IN).unwrap();
        let b = parse_routine(&TABLE_2_IN.replace(",zone,", " , zone ,  ")).unwrap();
        assert!(structural_diff(&a, &b).is_empty());
    }

    #[test]
    fn removed_instruction_is_reported() {
        let a = parse_routine(&TABLE_2_IN.replace("ENDPROC", "    MoveL id3,position3,v,z,t;\nENDPROC")).unwrap();
        let b = parse_routine(TABLE_2_IN).unwrap();
        let d = structural_diff(&a, &b);
        assert_eq!(d[0].path, FieldPath::InstructionCount);
        assert_eq!(d[1].path, FieldPath::ExtraInstruction(2));
        assert!(d[1].after.is_none());
        let back = structural_diff(&b, &a);
        assert_eq!(back, d.iter().map(FieldChange::reversed).collect::<Vec<_>>());
    }
}
