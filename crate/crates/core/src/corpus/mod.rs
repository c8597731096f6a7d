//! Corpus construction: extraction from project backups, deduplication,
//! classification, seeded synthesis, splitting and line-delimited storage.

mod convention;
mod extract;
mod records;
mod split;
mod synth;

pub use convention::{
    ClassMarkers, ConventionError, ConventionSpec, IdPresence, IdentParts, NamingConvention, PositionClass,
    PositionMarkers,
};
pub use extract::{extract_corpus, extract_source, CorpusSummary, Extraction, FileDiagnostic, SOURCE_EXTENSIONS};
pub use records::{read_corpus, write_corpus, CorpusRecord, RecordError, RECORD_VERSION};
pub use split::{coverage_features, split_corpus, SplitError};
pub use synth::{synthesize_corpus, SynthError, SynthOptions};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::syntax::{print_routine, MovementInstruction, Routine, TargetExpr};
use crate::transforms::{TaskKind, TaskRequest};

/// Where an entry came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Project { project: String, backup: String },
    Synthetic { seed: u64, index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Simple,
    Complex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub id: String,
    pub routine: Routine,
    pub origin: Origin,
    pub classification: Classification,
    /// One class per instruction; empty when some instruction is
    /// unclassifiable.
    pub position_classes: Vec<PositionClass>,
    pub dedup_key: String,
    /// Task requests attached to the entry, at most one per task.
    pub requests: BTreeMap<TaskKind, TaskRequest>,
    /// Reference outputs for the attached requests, in canonical print.
    pub oracle_outputs: BTreeMap<TaskKind, String>,
}

impl CorpusEntry {
    /// Entry without requests, classified and keyed from the routine.
    pub fn new(id: impl Into<String>, routine: Routine, origin: Origin, convention: &NamingConvention) -> Self {
        let classification = if routine.is_simple() { Classification::Simple } else { Classification::Complex };
        let position_classes = routine
            .instructions
            .iter()
            .map(|i| classify_position(i, convention))
            .collect::<Result<Vec<_>, _>>()
            .unwrap_or_default();
        let dedup_key = dedup_key(&routine);
        Self {
            id: id.into(),
            routine,
            origin,
            classification,
            position_classes,
            dedup_key,
            requests: BTreeMap::new(),
            oracle_outputs: BTreeMap::new(),
        }
    }

    /// The entry's routine endpoints are both Pre-Positions, the population
    /// the tasks are evaluated on.
    pub fn is_pre_position_routine(&self) -> bool {
        self.classification == Classification::Simple
            && matches!(self.position_classes.first(), Some(PositionClass::Pre))
            && matches!(self.position_classes.last(), Some(PositionClass::Pre))
    }
}

/// Hex SHA-256 of the canonical print.
pub fn dedup_key(routine: &Routine) -> String {
    hex::encode(Sha256::digest(print_routine(routine).as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("instruction `{0}` matches no position class")]
pub struct Unclassifiable(pub String);

/// Off for offset targets; otherwise End, then Work, by the convention's
/// velocity-label and zone markers, falling back to the configured default.
pub fn classify_position(
    instr: &MovementInstruction,
    convention: &NamingConvention,
) -> Result<PositionClass, Unclassifiable> {
    if let TargetExpr::OffsetCall { .. } = instr.target {
        return Ok(PositionClass::Off);
    }
    let markers = convention.markers();
    let label = convention.label_of(crate::syntax::IdentRole::Velocity, instr.velocity.as_str());
    let hit = |m: &ClassMarkers| {
        m.zones.iter().any(|z| z == instr.zone.as_str())
            || label.as_ref().is_some_and(|l| m.velocity_labels.iter().any(|v| v == l))
    };
    if hit(&markers.end) {
        Ok(PositionClass::End)
    } else if hit(&markers.work) {
        Ok(PositionClass::Work)
    } else {
        markers.fallback.ok_or_else(|| Unclassifiable(crate::syntax::print_instruction(instr)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_routine;

    const LISTING1: &str = "PROC mv400_410()
    !From:  Vorposition 400
    !To:    Vorposition 410
    MoveJ pR7_400,vR7_rapid,z50,toR7_active\\WObj:=woR7_Base\\NoMove;
    MoveJ pR7_410,vR7_rapid,z50,toR7_active\\WObj:=woR7_Base;
ENDPROC";

    #[test]
    fn position_classes() {
        let c = NamingConvention::default();
        let r = parse_routine(LISTING1).unwrap();
        for i in &r.instructions {
            assert_eq!(classify_position(i, &c), Ok(PositionClass::Pre));
        }
        let mut off = r.instructions[0].clone();
        off.target = TargetExpr::OffsetCall {
            function: crate::syntax::OffsetFunction::Offs,
            position: off.target.position().clone(),
            offset: crate::syntax::Offset::new(0, 0, 50),
        };
        assert_eq!(classify_position(&off, &c), Ok(PositionClass::Off));
        let end =
            parse_routine(&LISTING1.replace("z50,toR7_active\\WObj:=woR7_Base;", "z0,toR7_active\\WObj:=woR7_Base;"))
                .unwrap();
        assert_eq!(classify_position(&end.instructions[1], &c), Ok(PositionClass::End));
        let work = parse_routine(
            &LISTING1
                .replace("vR7_rapid,z50,toR7_active\\WObj:=woR7_Base;", "vR7_work,z50,toR7_active\\WObj:=woR7_Base;"),
        )
        .unwrap();
        assert_eq!(classify_position(&work.instructions[1], &c), Ok(PositionClass::Work));

        let mut spec = ConventionSpec::default();
        spec.position_markers.fallback = None;
        let strict = NamingConvention::new(spec).unwrap();
        assert!(classify_position(&r.instructions[0], &strict).is_err());
    }

    #[test]
    fn entries_and_keys() {
        let c = NamingConvention::default();
        let r = parse_routine(LISTING1).unwrap();
        let e = CorpusEntry::new("a", r.clone(), Origin::Synthetic { seed: 1, index: 0 }, &c);
        assert_eq!(e.classification, Classification::Simple);
        assert!(e.is_pre_position_routine());
        assert_eq!(e.dedup_key.len(), 64);
        let spaced = parse_routine(&LISTING1.replace(",vR7", ", vR7")).unwrap();
        assert_eq!(dedup_key(&spaced), e.dedup_key);
    }
}
