//! Identifier naming conventions.
//!
//! Each role is described by one or more templates such as `p{station}_{id}`.
//! A template compiles to an anchored regex (for checking and splitting
//! identifiers) and can be rendered back from its parts (for building new
//! identifiers). The first template of a role is the one used for rendering.

use std::collections::BTreeMap;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::syntax::{IdentRole, MoveKind, MovementInstruction};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConventionError {
    #[error("template `{template}` for {role}: {reason}")]
    BadTemplate { role: IdentRole, template: String, reason: String },
    #[error("{role} has no template")]
    MissingTemplate { role: IdentRole },
}

/// Which instructions carry a leading id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IdPresence {
    /// Only `MT_` instructions carry an id; plain moves must not.
    #[default]
    MachineTendingOnly,
    /// Every instruction carries an id.
    Always,
    /// Ids are never checked.
    Optional,
}

/// Pre/Work/End/Off taxonomy of target positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PositionClass {
    Pre,
    Work,
    End,
    Off,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassMarkers {
    /// Velocity labels (the `{label}` part) marking the class.
    pub velocity_labels: Vec<String>,
    /// Full zone identifiers marking the class.
    pub zones: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PositionMarkers {
    pub end: ClassMarkers,
    pub work: ClassMarkers,
    /// Class for instructions matching no marker; `None` makes them
    /// unclassifiable.
    pub fallback: Option<PositionClass>,
}

impl Default for PositionMarkers {
    fn default() -> Self {
        Self {
            end: ClassMarkers { velocity_labels: vec![], zones: vec!["fine".into(), "z0".into()] },
            work: ClassMarkers { velocity_labels: vec!["work".into(), "process".into()], zones: vec!["z1".into()] },
            fallback: Some(PositionClass::Pre),
        }
    }
}

/// Serializable description of a naming convention.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConventionSpec {
    pub station_pattern: String,
    pub id_pattern: String,
    pub label_pattern: String,
    pub position: Vec<String>,
    pub velocity: Vec<String>,
    pub zone: Vec<String>,
    pub tool: Vec<String>,
    pub work_object: Vec<String>,
    pub instruction_id: Vec<String>,
    pub routine: String,
    pub id_presence: IdPresence,
    pub position_markers: PositionMarkers,
}

impl Default for ConventionSpec {
    fn default() -> Self {
        Self {
            station_pattern: "R[0-9]+".into(),
            id_pattern: "[0-9]+".into(),
            label_pattern: "[A-Za-z0-9]+".into(),
            position: vec!["p{station}_{id}".into()],
            velocity: vec!["v{station}_{label}".into()],
            zone: vec!["z{digits}".into(), "fine".into()],
            tool: vec!["to{station}_{label}".into()],
            work_object: vec!["wo{station}_{label}".into()],
            instruction_id: vec!["{id}".into()],
            routine: "mv{src}_{dst}".into(),
            id_presence: IdPresence::MachineTendingOnly,
            position_markers: PositionMarkers::default(),
        }
    }
}

impl ConventionSpec {
    /// Accepts the placeholder names used in anonymized listings
    /// (`position1`, `velocity`, `world_object`, `id1`, ...).
    pub fn anonymized() -> Self {
        let any = || vec!["{name}".to_string()];
        Self {
            station_pattern: "[A-Za-z0-9]+".into(),
            id_pattern: "[A-Za-z0-9]+".into(),
            label_pattern: "[A-Za-z0-9]+".into(),
            position: any(),
            velocity: any(),
            zone: any(),
            tool: any(),
            work_object: any(),
            instruction_id: any(),
            routine: "mv{src}_{dst}".into(),
            id_presence: IdPresence::Always,
            position_markers: PositionMarkers::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Placeholder {
    Station,
    Id,
    Label,
    Digits,
    Src,
    Dst,
    Name,
}

impl Placeholder {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "station" => Placeholder::Station,
            "id" => Placeholder::Id,
            "label" => Placeholder::Label,
            "digits" => Placeholder::Digits,
            "src" => Placeholder::Src,
            "dst" => Placeholder::Dst,
            "name" => Placeholder::Name,
            _ => return None,
        })
    }

    fn group(self) -> &'static str {
        match self {
            Placeholder::Station => "station",
            Placeholder::Id => "id",
            Placeholder::Label => "label",
            Placeholder::Digits => "digits",
            Placeholder::Src => "src",
            Placeholder::Dst => "dst",
            Placeholder::Name => "name",
        }
    }
}

#[derive(Debug, Clone)]
enum Piece {
    Lit(String),
    Hole(Placeholder),
}

#[derive(Debug, Clone)]
struct Template {
    regex: Regex,
    pieces: Vec<Piece>,
}

/// Named pieces of an identifier.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdentParts {
    pub station: Option<String>,
    pub id: Option<String>,
    pub label: Option<String>,
    pub digits: Option<String>,
    pub src: Option<String>,
    pub dst: Option<String>,
    pub name: Option<String>,
}

impl IdentParts {
    fn get(&self, p: Placeholder) -> Option<&str> {
        match p {
            Placeholder::Station => self.station.as_deref(),
            Placeholder::Id => self.id.as_deref(),
            Placeholder::Label => self.label.as_deref(),
            Placeholder::Digits => self.digits.as_deref(),
            Placeholder::Src => self.src.as_deref(),
            Placeholder::Dst => self.dst.as_deref(),
            Placeholder::Name => self.name.as_deref(),
        }
    }

    fn set(&mut self, p: Placeholder, v: String) {
        let slot = match p {
            Placeholder::Station => &mut self.station,
            Placeholder::Id => &mut self.id,
            Placeholder::Label => &mut self.label,
            Placeholder::Digits => &mut self.digits,
            Placeholder::Src => &mut self.src,
            Placeholder::Dst => &mut self.dst,
            Placeholder::Name => &mut self.name,
        };
        *slot = Some(v);
    }

    /// Parts for a labelled identifier (`v{station}_{label}` or `{name}`).
    pub fn labelled(station: Option<&str>, label: &str) -> Self {
        Self {
            station: station.map(str::to_string),
            label: Some(label.to_string()),
            name: Some(label.to_string()),
            ..Self::default()
        }
    }
}

/// Compiled naming convention.
#[derive(Debug, Clone)]
pub struct NamingConvention {
    spec: ConventionSpec,
    templates: BTreeMap<IdentRole, Vec<Template>>,
    station: Regex,
}

impl Default for NamingConvention {
    fn default() -> Self {
        Self::new(ConventionSpec::default()).expect("default convention compiles")
    }
}

impl PartialEq for NamingConvention {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl NamingConvention {
    pub fn new(spec: ConventionSpec) -> Result<Self, ConventionError> {
        let station = anchored(&spec.station_pattern).map_err(|reason| ConventionError::BadTemplate {
            role: IdentRole::Station,
            template: spec.station_pattern.clone(),
            reason,
        })?;
        let mut templates = BTreeMap::new();
        let roles: [(IdentRole, Vec<String>); 7] = [
            (IdentRole::Position, spec.position.clone()),
            (IdentRole::Velocity, spec.velocity.clone()),
            (IdentRole::Zone, spec.zone.clone()),
            (IdentRole::Tool, spec.tool.clone()),
            (IdentRole::WorkObject, spec.work_object.clone()),
            (IdentRole::InstructionId, spec.instruction_id.clone()),
            (IdentRole::RoutineName, vec![spec.routine.clone()]),
        ];
        for (role, sources) in roles {
            if sources.is_empty() {
                return Err(ConventionError::MissingTemplate { role });
            }
            let compiled = sources
                .iter()
                .map(|t| {
                    compile(&spec, t).map_err(|reason| ConventionError::BadTemplate {
                        role,
                        template: t.clone(),
                        reason,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            templates.insert(role, compiled);
        }
        Ok(Self { spec, templates, station })
    }

    pub fn anonymized() -> Self {
        Self::new(ConventionSpec::anonymized()).expect("anonymized convention compiles")
    }

    pub fn spec(&self) -> &ConventionSpec {
        &self.spec
    }

    pub fn id_presence(&self) -> IdPresence {
        self.spec.id_presence
    }

    pub fn markers(&self) -> &PositionMarkers {
        &self.spec.position_markers
    }

    pub fn matches(&self, role: IdentRole, text: &str) -> bool {
        match role {
            IdentRole::Station => self.station.is_match(text),
            _ => self.templates[&role].iter().any(|t| t.regex.is_match(text)),
        }
    }

    pub fn parts(&self, role: IdentRole, text: &str) -> Option<IdentParts> {
        if role == IdentRole::Station {
            return self
                .station
                .is_match(text)
                .then(|| IdentParts { station: Some(text.into()), ..Default::default() });
        }
        self.templates[&role].iter().find_map(|t| {
            let caps = t.regex.captures(text)?;
            let mut parts = IdentParts::default();
            for piece in &t.pieces {
                if let Piece::Hole(p) = piece {
                    parts.set(*p, caps[p.group()].to_string());
                }
            }
            Some(parts)
        })
    }

    /// Renders with the first template whose placeholders are all supplied.
    pub fn render(&self, role: IdentRole, parts: &IdentParts) -> Option<String> {
        if role == IdentRole::Station {
            return parts.station.clone().filter(|s| self.station.is_match(s));
        }
        self.templates[&role].iter().find_map(|t| {
            let mut out = String::new();
            for piece in &t.pieces {
                match piece {
                    Piece::Lit(l) => out.push_str(l),
                    Piece::Hole(p) => out.push_str(parts.get(*p)?),
                }
            }
            t.regex.is_match(&out).then_some(out)
        })
    }

    /// Rewrites the station component of a station-bearing identifier.
    /// `None` when the identifier has no station component.
    pub fn replace_station(&self, role: IdentRole, text: &str, station: &str) -> Option<String> {
        if role == IdentRole::Station {
            return Some(station.to_string());
        }
        self.templates[&role].iter().find_map(|t| {
            let caps = t.regex.captures(text)?;
            let m = caps.name("station")?;
            Some(format!("{}{}{}", &text[..m.start()], station, &text[m.end()..]))
        })
    }

    pub fn station_of(&self, role: IdentRole, text: &str) -> Option<String> {
        self.parts(role, text)?.station
    }

    /// The `{label}` part, or the whole identifier for `{name}` templates.
    pub fn label_of(&self, role: IdentRole, text: &str) -> Option<String> {
        let p = self.parts(role, text)?;
        p.label.or(p.name)
    }

    /// The `{id}` part of a position, or the whole name for `{name}` templates.
    pub fn position_id(&self, text: &str) -> Option<String> {
        let p = self.parts(IdentRole::Position, text)?;
        p.id.or(p.name)
    }

    pub fn routine_name(&self, src: &str, dst: &str) -> Option<String> {
        let parts = IdentParts { src: Some(src.into()), dst: Some(dst.into()), ..Default::default() };
        self.render(IdentRole::RoutineName, &parts)
    }

    pub fn routine_ids(&self, name: &str) -> Option<(String, String)> {
        let p = self.parts(IdentRole::RoutineName, name)?;
        Some((p.src?, p.dst?))
    }

    /// Whether an instruction of this kind must carry an id.
    pub fn requires_id(&self, kind: MoveKind) -> bool {
        match self.spec.id_presence {
            IdPresence::Always => true,
            IdPresence::MachineTendingOnly | IdPresence::Optional => kind.is_machine_tending(),
        }
    }

    /// Whether an instruction of this kind may carry an id.
    pub fn allows_id(&self, kind: MoveKind) -> bool {
        match self.spec.id_presence {
            IdPresence::MachineTendingOnly => kind.is_machine_tending(),
            IdPresence::Always | IdPresence::Optional => true,
        }
    }

    /// Convention violations of one instruction as `(role, offending text)`;
    /// a missing or forbidden id is reported with an empty or the actual text.
    pub fn violations<'a>(&self, instr: &'a MovementInstruction) -> Vec<(IdentRole, &'a str)> {
        let mut out: Vec<(IdentRole, &str)> =
            instr.identifiers().into_iter().filter(|(role, text)| !self.matches(*role, text)).collect();
        match &instr.id {
            None if self.requires_id(instr.kind) => out.push((IdentRole::InstructionId, "")),
            Some(id) if !self.allows_id(instr.kind) && !out.iter().any(|(r, _)| *r == IdentRole::InstructionId) => {
                out.push((IdentRole::InstructionId, id.as_str()))
            }
            _ => {}
        }
        out
    }
}

fn anchored(pattern: &str) -> Result<Regex, String> {
    Regex::new(&format!("^(?:{pattern})$")).map_err(|e| e.to_string())
}

fn compile(spec: &ConventionSpec, template: &str) -> Result<Template, String> {
    let mut pieces = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        if open > 0 {
            pieces.push(Piece::Lit(rest[..open].to_string()));
        }
        let close = rest[open..].find('}').ok_or("unclosed `{`")? + open;
        let name = &rest[open + 1..close];
        let hole = Placeholder::parse(name).ok_or_else(|| format!("unknown placeholder `{{{name}}}`"))?;
        if pieces.iter().any(|p| matches!(p, Piece::Hole(h) if *h == hole)) {
            return Err(format!("placeholder `{{{name}}}` used twice"));
        }
        pieces.push(Piece::Hole(hole));
        rest = &rest[close + 1..];
    }
    if !rest.is_empty() {
        pieces.push(Piece::Lit(rest.to_string()));
    }
    if pieces.is_empty() {
        return Err("empty template".into());
    }
    let mut pattern = String::from("^");
    for piece in &pieces {
        match piece {
            Piece::Lit(l) => pattern.push_str(&regex::escape(l)),
            Piece::Hole(h) => {
                let inner = match h {
                    Placeholder::Station => spec.station_pattern.as_str(),
                    Placeholder::Id | Placeholder::Src | Placeholder::Dst => spec.id_pattern.as_str(),
                    Placeholder::Label => spec.label_pattern.as_str(),
                    Placeholder::Digits => "[0-9]+",
                    Placeholder::Name => "[A-Za-z_][A-Za-z0-9_]*",
                };
                pattern.push_str(&format!("(?P<{}>{inner})", h.group()));
            }
        }
    }
    pattern.push('$');
    let regex = Regex::new(&pattern).map_err(|e| e.to_string())?;
    Ok(Template { regex, pieces })
}
