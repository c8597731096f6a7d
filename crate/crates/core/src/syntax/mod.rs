//! Typed syntax tree for the RAPID movement-routine subset.
//!
//! Only `PROC ... ENDPROC` blocks made of comment lines and the four
//! movement instructions (`MoveJ`, `MoveL`, `MT_MoveJ`, `MT_MoveL`) are
//! modelled. Everything else in a module survives as opaque text.

mod diff;
mod parser;
mod printer;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use diff::{structural_diff, FieldChange, FieldPath, HeaderField, Slot};
pub use parser::{parse_module, parse_routine, ModuleItem, SourceModule, SyntaxError, Warning};
pub use printer::{print_instruction, print_module, print_routine, print_target};

/// What an identifier names. Used for convention checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentRole {
    Station,
    InstructionId,
    Position,
    Velocity,
    Zone,
    Tool,
    WorkObject,
    RoutineName,
}

impl fmt::Display for IdentRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IdentRole::Station => "station",
            IdentRole::InstructionId => "id",
            IdentRole::Position => "position",
            IdentRole::Velocity => "velocity",
            IdentRole::Zone => "zone",
            IdentRole::Tool => "tool",
            IdentRole::WorkObject => "work object",
            IdentRole::RoutineName => "routine name",
        };
        f.write_str(s)
    }
}

/// A RAPID identifier tagged with its role.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Identifier {
    role: IdentRole,
    text: String,
}

impl Identifier {
    pub fn new(role: IdentRole, text: impl Into<String>) -> Result<Self, InvalidIdentifier> {
        let text = text.into();
        if is_identifier_text(&text) {
            Ok(Self { role, text })
        } else {
            Err(InvalidIdentifier { role, text })
        }
    }

    pub fn role(&self) -> IdentRole {
        self.role
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{text}` is not a valid {role} identifier")]
pub struct InvalidIdentifier {
    pub role: IdentRole,
    pub text: String,
}

/// Letters, digits and underscore, not starting with a digit.
pub fn is_identifier_text(text: &str) -> bool {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Signed decimal kept as its source text so reprinting never drifts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DecimalRepr", into = "String")]
pub struct Decimal(String);

#[derive(Deserialize)]
#[serde(untagged)]
enum DecimalRepr {
    Text(String),
    Number(serde_json::Number),
}

impl TryFrom<DecimalRepr> for Decimal {
    type Error = InvalidDecimal;

    fn try_from(value: DecimalRepr) -> Result<Self, Self::Error> {
        match value {
            DecimalRepr::Text(s) => s.parse(),
            DecimalRepr::Number(n) => n.to_string().parse(),
        }
    }
}

impl From<Decimal> for String {
    fn from(d: Decimal) -> String {
        d.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{0}` is not a finite decimal")]
pub struct InvalidDecimal(pub String);

impl std::str::FromStr for Decimal {
    type Err = InvalidDecimal;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s.strip_prefix(['-', '+']).unwrap_or(s);
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (body, None),
        };
        let digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
        let ok = digits(int) && frac.is_none_or(digits);
        if ok {
            Ok(Decimal(s.to_string()))
        } else {
            Err(InvalidDecimal(s.to_string()))
        }
    }
}

impl Decimal {
    pub fn zero() -> Self {
        Decimal("0".into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn value(&self) -> f64 {
        self.0.parse().expect("validated on construction")
    }

    /// Numeric comparison; `100`, `100.0` and `+100` are equal.
    pub fn numerically_eq(&self, other: &Decimal) -> bool {
        self.value() == other.value()
    }

    pub fn is_zero(&self) -> bool {
        self.value() == 0.0
    }
}

impl From<i64> for Decimal {
    fn from(v: i64) -> Self {
        Decimal(v.to_string())
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OffsetFunction {
    Offs,
    RelTool,
}

impl OffsetFunction {
    pub fn keyword(self) -> &'static str {
        match self {
            OffsetFunction::Offs => "Offs",
            OffsetFunction::RelTool => "RelTool",
        }
    }
}

/// Displacement along x, y, z in millimetres.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Offset {
    pub dx: Decimal,
    pub dy: Decimal,
    pub dz: Decimal,
}

impl Offset {
    pub fn new(dx: impl Into<Decimal>, dy: impl Into<Decimal>, dz: impl Into<Decimal>) -> Self {
        Self { dx: dx.into(), dy: dy.into(), dz: dz.into() }
    }

    pub fn numerically_eq(&self, other: &Offset) -> bool {
        self.dx.numerically_eq(&other.dx) && self.dy.numerically_eq(&other.dy) && self.dz.numerically_eq(&other.dz)
    }

    pub fn is_zero(&self) -> bool {
        self.dx.is_zero() && self.dy.is_zero() && self.dz.is_zero()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TargetExpr {
    Direct(Identifier),
    OffsetCall { function: OffsetFunction, position: Identifier, offset: Offset },
}

impl TargetExpr {
    pub fn position(&self) -> &Identifier {
        match self {
            TargetExpr::Direct(p) => p,
            TargetExpr::OffsetCall { position, .. } => position,
        }
    }

    pub fn position_mut(&mut self) -> &mut Identifier {
        match self {
            TargetExpr::Direct(p) => p,
            TargetExpr::OffsetCall { position, .. } => position,
        }
    }

    pub fn is_offset(&self) -> bool {
        matches!(self, TargetExpr::OffsetCall { .. })
    }

    pub fn function(&self) -> Option<OffsetFunction> {
        match self {
            TargetExpr::Direct(_) => None,
            TargetExpr::OffsetCall { function, .. } => Some(*function),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveKind {
    MoveJ,
    MoveL,
    #[serde(rename = "MT_MoveJ")]
    MtMoveJ,
    #[serde(rename = "MT_MoveL")]
    MtMoveL,
}

/// Interpolation class of a movement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Interpolation {
    Joint,
    Linear,
}

impl MoveKind {
    pub const ALL: [MoveKind; 4] = [MoveKind::MoveJ, MoveKind::MoveL, MoveKind::MtMoveJ, MoveKind::MtMoveL];

    pub fn keyword(self) -> &'static str {
        match self {
            MoveKind::MoveJ => "MoveJ",
            MoveKind::MoveL => "MoveL",
            MoveKind::MtMoveJ => "MT_MoveJ",
            MoveKind::MtMoveL => "MT_MoveL",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.keyword() == word)
    }

    /// Machine-Tending variants carry a mandatory id.
    pub fn is_machine_tending(self) -> bool {
        matches!(self, MoveKind::MtMoveJ | MoveKind::MtMoveL)
    }

    pub fn interpolation(self) -> Interpolation {
        match self {
            MoveKind::MoveJ | MoveKind::MtMoveJ => Interpolation::Joint,
            MoveKind::MoveL | MoveKind::MtMoveL => Interpolation::Linear,
        }
    }

    /// Same family (plain or Machine-Tending), given interpolation.
    pub fn with_interpolation(self, interpolation: Interpolation) -> Self {
        match (self.is_machine_tending(), interpolation) {
            (false, Interpolation::Joint) => MoveKind::MoveJ,
            (false, Interpolation::Linear) => MoveKind::MoveL,
            (true, Interpolation::Joint) => MoveKind::MtMoveJ,
            (true, Interpolation::Linear) => MoveKind::MtMoveL,
        }
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Leading instruction id: a symbolic name (`id1`) or an integer literal (`400`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum InstructionId {
    Name(Identifier),
    Number(String),
}

impl InstructionId {
    /// Builds from text, choosing the integer form for all-digit input.
    pub fn parse(text: &str) -> Option<Self> {
        if !text.is_empty() && text.bytes().all(|b| b.is_ascii_digit()) {
            Some(InstructionId::Number(text.to_string()))
        } else {
            Identifier::new(IdentRole::InstructionId, text).ok().map(InstructionId::Name)
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            InstructionId::Name(i) => i.as_str(),
            InstructionId::Number(n) => n,
        }
    }
}

impl fmt::Display for InstructionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A non-movement line inside a routine body.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BodyLine {
    /// `!` comment other than the From/To header, text without the `!`.
    Comment(String),
    /// Any other statement, kept verbatim (e.g. `Stop;`).
    Statement(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MovementInstruction {
    pub kind: MoveKind,
    pub id: Option<InstructionId>,
    pub target: TargetExpr,
    pub velocity: Identifier,
    pub zone: Identifier,
    pub tool: Identifier,
    pub work_object: Option<Identifier>,
    pub no_move: bool,
    /// Body lines directly preceding this instruction.
    pub leading: Vec<BodyLine>,
}

impl MovementInstruction {
    /// Text of every identifier in the instruction together with its role.
    pub fn identifiers(&self) -> Vec<(IdentRole, &str)> {
        let mut out = Vec::with_capacity(7);
        if let Some(id) = &self.id {
            out.push((IdentRole::InstructionId, id.as_str()));
        }
        out.push((IdentRole::Position, self.target.position().as_str()));
        out.push((IdentRole::Velocity, self.velocity.as_str()));
        out.push((IdentRole::Zone, self.zone.as_str()));
        out.push((IdentRole::Tool, self.tool.as_str()));
        if let Some(wo) = &self.work_object {
            out.push((IdentRole::WorkObject, wo.as_str()));
        }
        out
    }
}

/// A parsed `PROC` block.
///
/// Equality is structural: `raw_text` and the ids derived from the name are
/// ignored.
#[derive(Debug, Clone)]
pub struct Routine {
    pub local: bool,
    pub name: Identifier,
    pub from_comment: Option<String>,
    pub to_comment: Option<String>,
    pub instructions: Vec<MovementInstruction>,
    /// Body lines after the last instruction.
    pub trailing: Vec<BodyLine>,
    pub raw_text: String,
}

impl PartialEq for Routine {
    fn eq(&self, other: &Self) -> bool {
        self.local == other.local
            && self.name == other.name
            && self.from_comment == other.from_comment
            && self.to_comment == other.to_comment
            && self.instructions == other.instructions
            && self.trailing == other.trailing
    }
}

impl Eq for Routine {}

impl Routine {
    /// `(source, destination)` from a name shaped `mv<src>_<dst>`.
    pub fn name_ids(&self) -> Option<(&str, &str)> {
        split_routine_name(self.name.as_str())
    }

    pub fn source_id(&self) -> &str {
        self.name_ids().map_or("", |(s, _)| s)
    }

    pub fn destination_id(&self) -> &str {
        self.name_ids().map_or("", |(_, d)| d)
    }

    pub fn has_statements(&self) -> bool {
        self.instructions
            .iter()
            .flat_map(|i| i.leading.iter())
            .chain(self.trailing.iter())
            .any(|l| matches!(l, BodyLine::Statement(_)))
    }

    /// Standard two-endpoint structure: From/To header, `mv<src>_<dst>` name,
    /// at least two movement instructions and no foreign statements.
    pub fn is_simple(&self) -> bool {
        self.instructions.len() >= 2
            && !self.has_statements()
            && self.from_comment.is_some()
            && self.to_comment.is_some()
            && self.name_ids().is_some()
    }

    /// Copy with `raw_text` replaced by the canonical print.
    pub fn canonical(&self) -> Routine {
        let mut r = self.clone();
        r.raw_text = print_routine(self);
        r
    }
}

pub fn split_routine_name(name: &str) -> Option<(&str, &str)> {
    let rest = name.strip_prefix("mv")?;
    let (src, dst) = rest.split_once('_')?;
    if src.is_empty() || dst.is_empty() {
        return None;
    }
    Some((src, dst))
}
