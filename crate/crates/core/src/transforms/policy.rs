use serde::{Deserialize, Serialize};

use crate::corpus::{IdentParts, NamingConvention};
use crate::syntax::{
    IdentRole, Identifier, InstructionId, MovementInstruction, Offset, OffsetFunction, Routine, TargetExpr,
};

/// Site-specific rules applied by the rewrite engine and checked by the
/// validator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransformPolicy {
    /// Velocity label of the first instruction of every routine.
    pub default_velocity_label: String,
    pub default_tool_label: String,
    pub default_wobj_label: String,
    /// Id of the HOME position; `None` disables HOME handling.
    pub home_position_id: Option<String>,
    /// Name used for HOME in `!From:`/`!To:` comments.
    pub home_name: String,
    pub intermediate_function: OffsetFunction,
    pub intermediate_offset: Offset,
    /// Template for ids of inserted instructions. Placeholders: `{src}`,
    /// `{dst}` (routine endpoint ids) and `{anchor}` (id of the instruction
    /// the new one is derived from).
    pub intermediate_id_rule: String,
}

impl Default for TransformPolicy {
    fn default() -> Self {
        Self {
            default_velocity_label: "rapid".into(),
            default_tool_label: "active".into(),
            default_wobj_label: "Base".into(),
            home_position_id: Some("100".into()),
            home_name: "HOME".into(),
            intermediate_function: OffsetFunction::Offs,
            intermediate_offset: Offset::new(0, 0, 100),
            intermediate_id_rule: "{src}5".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid transform policy: {0}")]
pub struct PolicyError(pub String);

impl TransformPolicy {
    /// Defaults matching the placeholder names of anonymized listings.
    pub fn anonymized() -> Self {
        Self {
            default_velocity_label: "velocity".into(),
            default_tool_label: "tool".into(),
            default_wobj_label: "world_object".into(),
            home_position_id: Some("home".into()),
            intermediate_id_rule: "id_intermediate".into(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        for (name, v) in [
            ("default_velocity_label", &self.default_velocity_label),
            ("default_tool_label", &self.default_tool_label),
            ("default_wobj_label", &self.default_wobj_label),
            ("intermediate_id_rule", &self.intermediate_id_rule),
        ] {
            if v.trim().is_empty() {
                return Err(PolicyError(format!("{name} must not be empty")));
            }
        }
        if self.intermediate_offset.is_zero() {
            return Err(PolicyError("intermediate_offset must be non-zero on at least one axis".into()));
        }
        if self.home_position_id.as_deref().is_some_and(|h| h.trim().is_empty()) {
            return Err(PolicyError("home_position_id must not be empty".into()));
        }
        Ok(())
    }

    /// Renders [`Self::intermediate_id_rule`].
    pub fn intermediate_id(&self, src: &str, dst: &str, anchor: &str) -> Result<InstructionId, PolicyError> {
        let text = self.intermediate_id_rule.replace("{src}", src).replace("{dst}", dst).replace("{anchor}", anchor);
        InstructionId::parse(&text)
            .ok_or_else(|| PolicyError(format!("intermediate id rule produced invalid id `{text}`")))
    }

    /// Instruction targets the HOME position directly.
    pub fn targets_home(&self, instr: &MovementInstruction, convention: &NamingConvention) -> bool {
        let (Some(home), TargetExpr::Direct(p)) = (&self.home_position_id, &instr.target) else {
            return false;
        };
        p.as_str() == home || convention.position_id(p.as_str()).as_deref() == Some(home.as_str())
    }

    /// Offset instruction wrapping the given HOME position.
    pub fn is_home_intermediate(instr: &MovementInstruction, home: &Identifier) -> bool {
        matches!(&instr.target, TargetExpr::OffsetCall { position, .. } if position == home)
    }

    pub fn is_home_comment(&self, comment: Option<&str>) -> bool {
        comment.is_some_and(|c| c.trim().eq_ignore_ascii_case(self.home_name.trim()))
    }

    /// Rendered identifier carrying a default label, keeping the station of
    /// `current` (or of `fallback_station`). `None` if the convention cannot
    /// render it.
    pub fn default_identifier(
        &self,
        role: IdentRole,
        current: Option<&Identifier>,
        fallback_station: Option<String>,
        convention: &NamingConvention,
    ) -> Option<Identifier> {
        let label = match role {
            IdentRole::Velocity => &self.default_velocity_label,
            IdentRole::Tool => &self.default_tool_label,
            IdentRole::WorkObject => &self.default_wobj_label,
            _ => return None,
        };
        let station = current.and_then(|c| convention.station_of(role, c.as_str())).or(fallback_station);
        let text = convention.render(role, &IdentParts::labelled(station.as_deref(), label))?;
        Identifier::new(role, text).ok()
    }

    /// Whether the default label is present on the given slot.
    pub fn has_default_label(
        &self,
        role: IdentRole,
        ident: Option<&Identifier>,
        convention: &NamingConvention,
    ) -> bool {
        let label = match role {
            IdentRole::Velocity => &self.default_velocity_label,
            IdentRole::Tool => &self.default_tool_label,
            IdentRole::WorkObject => &self.default_wobj_label,
            _ => return true,
        };
        ident.and_then(|i| convention.label_of(role, i.as_str())).is_some_and(|l| &l == label)
    }
}

/// Id used to name a routine endpoint: the instruction id if present,
/// otherwise the `{id}` part of its position.
pub fn endpoint_id(instr: &MovementInstruction, convention: &NamingConvention) -> Option<String> {
    match &instr.id {
        Some(id) => Some(id.as_str().to_string()),
        None => convention.position_id(instr.target.position().as_str()),
    }
}

/// Source and destination ids of a routine, derived from its first and last
/// instruction and falling back to the name.
pub fn routine_endpoints(routine: &Routine, convention: &NamingConvention) -> (String, String) {
    let from_name = convention
        .routine_ids(routine.name.as_str())
        .unwrap_or_else(|| (routine.source_id().to_string(), routine.destination_id().to_string()));
    let src = routine.instructions.first().and_then(|i| endpoint_id(i, convention)).unwrap_or(from_name.0);
    let dst = routine.instructions.last().and_then(|i| endpoint_id(i, convention)).unwrap_or(from_name.1);
    (src, dst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_routine;

    #[test]
    fn default_policy_is_valid() {
        TransformPolicy::default().validate().unwrap();
        TransformPolicy::anonymized().validate().unwrap();
        let bad = TransformPolicy { intermediate_offset: Offset::new(0, 0, 0), ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = TransformPolicy { default_tool_label: " ".into(), ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn intermediate_ids() {
        let p = TransformPolicy::default();
        assert_eq!(p.intermediate_id("100", "400", "100").unwrap(), InstructionId::Number("1005".into()));
        let p = TransformPolicy { intermediate_id_rule: "{src}-x".into(), ..Default::default() };
        assert!(p.intermediate_id("1", "2", "1").is_err());
    }

    #[test]
    fn home_detection_and_endpoints() {
        let c = NamingConvention::default();
        let p = TransformPolicy::default();
        let r = parse_routine(
            "PROC mv100_400()\n!From: HOME\n!To: x\nMoveJ pR7_100,vR7_rapid,z50,toR7_active\\WObj:=woR7_Base\\NoMove;\nMoveJ Offs(pR7_100,0,0,100),vR7_rapid,z50,toR7_active\\WObj:=woR7_Base;\nMoveL pR7_400,vR7_rapid,z50,toR7_active\\WObj:=woR7_Base;\nENDPROC",
        )
        .unwrap();
        assert!(p.targets_home(&r.instructions[0], &c));
        assert!(!p.targets_home(&r.instructions[1], &c));
        assert!(TransformPolicy::is_home_intermediate(&r.instructions[1], r.instructions[0].target.position()));
        assert_eq!(routine_endpoints(&r, &c), ("100".into(), "400".into()));
        assert!(p.is_home_comment(r.from_comment.as_deref()));
        assert!(p.has_default_label(IdentRole::Velocity, Some(&r.instructions[0].velocity), &c));
        let d = p.default_identifier(IdentRole::Tool, None, Some("R9".into()), &c).unwrap();
        assert_eq!(d.as_str(), "toR9_active");
    }
}
