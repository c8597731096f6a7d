use std::collections::{BTreeMap, HashSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CorpusEntry, IdentParts, NamingConvention, Origin};
use crate::syntax::{
    IdentRole, Identifier, InstructionId, MoveKind, MovementInstruction, Offset, OffsetFunction, Routine, TargetExpr,
};
use crate::transforms::{apply, reverse, Anchor, ArgumentKind, TaskKind, TaskRequest, TransformError, TransformPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthOptions {
    /// Share of routines that start or end at HOME (rounded to a count).
    pub home_fraction: f64,
    pub station_pool: Vec<String>,
    /// Inclusive range of position ids.
    pub id_range: (u32, u32),
    /// Maximum number of via positions between the endpoints.
    pub max_via: usize,
    /// Share of routines using machine-tending (`MT_`) instructions.
    pub machine_tending_fraction: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            home_fraction: 0.1,
            station_pool: vec!["R7".into()],
            id_range: (400, 999),
            max_via: 2,
            machine_tending_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("cannot synthesize {requested} unique routines: only {available} distinct names exist for the id range")]
    ExhaustedNamespace { requested: usize, available: usize },
    #[error("invalid synthesis options: {0}")]
    InvalidOptions(String),
    #[error("the naming convention cannot render {0}")]
    Unrenderable(IdentRole),
    #[error("oracle transform failed: {0}")]
    Oracle(#[from] TransformError),
}

const ZONES: [&str; 4] = ["z10", "z20", "z50", "z100"];
const VIA_VELOCITY_LABELS: [&str; 3] = ["slow", "medium", "fast"];
const NEW_VELOCITY_LABELS: [&str; 3] = ["slow", "medium", "fast"];
const NEW_TOOL_LABELS: [&str; 3] = ["gripper", "welder", "vacuum"];
const NEW_WOBJ_LABELS: [&str; 3] = ["Table", "Fixture", "Conveyor"];
const OFFSET_MAGNITUDES: [i64; 6] = [50, 100, 150, 200, -50, -100];

struct Builder<'a> {
    convention: &'a NamingConvention,
    policy: &'a TransformPolicy,
    station: String,
}

impl Builder<'_> {
    fn render(&self, role: IdentRole, parts: IdentParts) -> Result<Identifier, SynthError> {
        let text = self.convention.render(role, &parts).ok_or(SynthError::Unrenderable(role))?;
        Identifier::new(role, text).map_err(|_| SynthError::Unrenderable(role))
    }

    fn labelled(&self, role: IdentRole, label: &str) -> Result<Identifier, SynthError> {
        let mut parts = IdentParts::labelled(Some(&self.station), label);
        if self.convention.spec().velocity.iter().any(|t| t.contains("{name}")) {
            parts.name = Some(label.to_string());
        }
        self.render(role, parts)
    }

    fn position(&self, id: &str) -> Result<Identifier, SynthError> {
        self.render(
            IdentRole::Position,
            IdentParts {
                station: Some(self.station.clone()),
                id: Some(id.to_string()),
                name: Some(format!("p{}_{id}", self.station)),
                ..Default::default()
            },
        )
    }

    fn zone(&self, text: &str) -> Result<Identifier, SynthError> {
        let digits = text.trim_start_matches('z');
        self.render(
            IdentRole::Zone,
            IdentParts { digits: Some(digits.into()), name: Some(text.into()), ..Default::default() },
        )
    }

    fn instruction(
        &self,
        kind: MoveKind,
        id: &str,
        zone: &str,
        velocity_label: &str,
    ) -> Result<MovementInstruction, SynthError> {
        let instr_id = if self.convention.requires_id(kind) {
            Some(InstructionId::parse(id).ok_or(SynthError::Unrenderable(IdentRole::InstructionId))?)
        } else {
            None
        };
        Ok(MovementInstruction {
            kind,
            id: instr_id,
            target: TargetExpr::Direct(self.position(id)?),
            velocity: self.labelled(IdentRole::Velocity, velocity_label)?,
            zone: self.zone(zone)?,
            tool: self.labelled(IdentRole::Tool, &self.policy.default_tool_label)?,
            work_object: Some(self.labelled(IdentRole::WorkObject, &self.policy.default_wobj_label)?),
            no_move: false,
            leading: Vec::new(),
        })
    }
}

#[derive(Clone, Copy, PartialEq)]
enum HomeRole {
    None,
    Departure,
    Return,
}

fn pick_kind(mt: bool, joint: bool) -> MoveKind {
    match (mt, joint) {
        (false, true) => MoveKind::MoveJ,
        (false, false) => MoveKind::MoveL,
        (true, true) => MoveKind::MtMoveJ,
        (true, false) => MoveKind::MtMoveL,
    }
}

#[allow(clippy::too_many_arguments)]
fn build_routine(
    rng: &mut ChaCha8Rng,
    builder: &Builder<'_>,
    src: &str,
    dst: &str,
    vias: &[String],
    mt: bool,
    home_role: HomeRole,
) -> Result<Routine, SynthError> {
    let policy = builder.policy;
    let default_velocity = policy.default_velocity_label.as_str();
    // Departure routines are the reversals of return routines.
    let (from, to) = (src, dst);
    let mut instrs = Vec::with_capacity(vias.len() + 2);
    let mut first = builder.instruction(pick_kind(mt, true), from, ZONES.choose(rng).unwrap(), default_velocity)?;
    first.no_move = true;
    instrs.push(first);
    for via in vias {
        let label = if rng.random_bool(0.3) { VIA_VELOCITY_LABELS.choose(rng).unwrap() } else { default_velocity };
        let joint = rng.random_bool(0.5);
        instrs.push(builder.instruction(pick_kind(mt, joint), via, ZONES.choose(rng).unwrap(), label)?);
    }
    let joint = rng.random_bool(0.5);
    instrs.push(builder.instruction(pick_kind(mt, joint), to, ZONES.choose(rng).unwrap(), default_velocity)?);

    let home = policy.home_position_id.as_deref().unwrap_or_default();
    let comment = |id: &str| {
        if id == home && home_role != HomeRole::None {
            policy.home_name.clone()
        } else {
            format!("Vorposition {id}")
        }
    };
    let name = builder.convention.routine_name(from, to).ok_or(SynthError::Unrenderable(IdentRole::RoutineName))?;
    let routine = Routine {
        local: false,
        name: Identifier::new(IdentRole::RoutineName, name)
            .map_err(|_| SynthError::Unrenderable(IdentRole::RoutineName))?,
        from_comment: Some(comment(from)),
        to_comment: Some(comment(to)),
        instructions: instrs,
        trailing: Vec::new(),
        raw_text: String::new(),
    };
    if home_role == HomeRole::Departure {
        Ok(reverse(&routine, policy, builder.convention)?)
    } else {
        Ok(routine.canonical())
    }
}

fn modify_request(
    rng: &mut ChaCha8Rng,
    builder: &Builder<'_>,
    routine: &Routine,
    options: &SynthOptions,
    used_ids: &HashSet<String>,
) -> Result<TaskRequest, SynthError> {
    let has_ids = routine.instructions.iter().all(|i| i.id.is_some());
    let mut kinds = vec![ArgumentKind::Velocity, ArgumentKind::Zone, ArgumentKind::Tool, ArgumentKind::WorkObject];
    if options.station_pool.len() > 1 {
        kinds.push(ArgumentKind::Station);
    }
    if has_ids {
        kinds.push(ArgumentKind::Id);
    }
    let kind = *kinds.choose(rng).unwrap();
    let value = match kind {
        ArgumentKind::Velocity => {
            builder.labelled(IdentRole::Velocity, NEW_VELOCITY_LABELS.choose(rng).unwrap())?.to_string()
        }
        ArgumentKind::Zone => {
            let current = routine.instructions[0].zone.as_str().to_string();
            let choices: Vec<&&str> = ZONES.iter().filter(|z| **z != current).collect();
            builder.zone(choices.choose(rng).unwrap())?.to_string()
        }
        ArgumentKind::Tool => builder.labelled(IdentRole::Tool, NEW_TOOL_LABELS.choose(rng).unwrap())?.to_string(),
        ArgumentKind::WorkObject => {
            builder.labelled(IdentRole::WorkObject, NEW_WOBJ_LABELS.choose(rng).unwrap())?.to_string()
        }
        ArgumentKind::Station => {
            let others: Vec<&String> = options.station_pool.iter().filter(|s| **s != builder.station).collect();
            (*others.choose(rng).unwrap()).clone()
        }
        ArgumentKind::Id => {
            let (lo, hi) = options.id_range;
            let mut fresh = || loop {
                let id = rng.random_range(lo..=hi).to_string();
                if !used_ids.contains(&id) {
                    break id;
                }
            };
            let (a, b) = (fresh(), fresh());
            if a == b {
                format!("{a},{}", b.clone() + "0")
            } else {
                format!("{a},{b}")
            }
        }
        ArgumentKind::Position => unreachable!("position rewrites are not synthesized"),
    };
    Ok(TaskRequest::ModifyArgument { argument: kind, new_value: value })
}

fn offset_request(rng: &mut ChaCha8Rng) -> TaskRequest {
    let anchor = if rng.random_bool(0.5) { Anchor::AfterStart } else { Anchor::BeforeEnd };
    let function = if rng.random_bool(0.5) { OffsetFunction::Offs } else { OffsetFunction::RelTool };
    let magnitude = *OFFSET_MAGNITUDES.choose(rng).unwrap();
    let offset = match rng.random_range(0..3) {
        0 => Offset::new(magnitude, 0, 0),
        1 => Offset::new(0, magnitude, 0),
        _ => Offset::new(0, 0, magnitude),
    };
    TaskRequest::AddOffset { anchor, function, offset }
}

/// Generates `n` unique simple routines with one request and oracle output
/// per task. Deterministic for a fixed seed and configuration.
pub fn synthesize_corpus(
    seed: u64,
    n: usize,
    convention: &NamingConvention,
    policy: &TransformPolicy,
    options: &SynthOptions,
) -> Result<Vec<CorpusEntry>, SynthError> {
    if n == 0 {
        return Err(SynthError::InvalidOptions("n must be positive".into()));
    }
    if options.station_pool.is_empty() {
        return Err(SynthError::InvalidOptions("station_pool must not be empty".into()));
    }
    if !(0.0..=1.0).contains(&options.home_fraction) || !(0.0..=1.0).contains(&options.machine_tending_fraction) {
        return Err(SynthError::InvalidOptions("fractions must lie in [0, 1]".into()));
    }
    let (lo, hi) = options.id_range;
    if lo > hi {
        return Err(SynthError::InvalidOptions("id_range is empty".into()));
    }
    let home = policy.home_position_id.clone();
    let home_num: Option<u32> = home.as_deref().and_then(|h| h.parse().ok());
    let ids: Vec<u32> = (lo..=hi).filter(|i| Some(*i) != home_num).collect();
    let k = ids.len();
    let home_count = if home.is_some() { (n as f64 * options.home_fraction).round() as usize } else { 0 };
    let available_plain = k * k.saturating_sub(1);
    let available_home = 2 * k;
    if n - home_count > available_plain || home_count > available_home {
        return Err(SynthError::ExhaustedNamespace {
            requested: n,
            available: available_plain + available_home.min(home_count),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut roles = vec![HomeRole::None; n];
    for (i, role) in roles.iter_mut().take(home_count).enumerate() {
        *role = if i % 2 == 0 { HomeRole::Return } else { HomeRole::Departure };
    }
    roles.shuffle(&mut rng);

    let mut names = HashSet::new();
    let mut entries = Vec::with_capacity(n);
    for (index, role) in roles.into_iter().enumerate() {
        let station = options.station_pool.choose(&mut rng).unwrap().clone();
        let builder = Builder { convention, policy, station };
        let mt = rng.random_bool(options.machine_tending_fraction);
        let mut attempts = 0usize;
        let routine = loop {
            attempts += 1;
            if attempts > 10_000 {
                return Err(SynthError::ExhaustedNamespace { requested: n, available: names.len() });
            }
            let a = ids.choose(&mut rng).unwrap().to_string();
            let b = match role {
                HomeRole::None => ids.choose(&mut rng).unwrap().to_string(),
                _ => home.clone().unwrap(),
            };
            if a == b {
                continue;
            }
            let via_count = rng.random_range(0..=options.max_via);
            let mut vias = Vec::new();
            while vias.len() < via_count && k > vias.len() + 2 {
                let v = ids.choose(&mut rng).unwrap().to_string();
                if v != a && v != b && !vias.contains(&v) {
                    vias.push(v);
                }
            }
            let r = build_routine(&mut rng, &builder, &a, &b, &vias, mt, role)?;
            if names.insert(r.name.to_string()) {
                break r;
            }
        };

        let used: HashSet<String> =
            routine.instructions.iter().filter_map(|i| i.id.as_ref().map(|x| x.to_string())).collect();
        let requests = [
            modify_request(&mut rng, &builder, &routine, options, &used)?,
            offset_request(&mut rng),
            TaskRequest::Reverse,
        ];
        let mut entry =
            CorpusEntry::new(format!("s{seed}-{index:05}"), routine, Origin::Synthetic { seed, index }, convention);
        let mut oracle_outputs = BTreeMap::new();
        let mut request_map = BTreeMap::new();
        for request in requests {
            let out = apply(&entry.routine, &request, policy, convention)?;
            oracle_outputs.insert(request.kind(), crate::syntax::print_routine(&out));
            request_map.insert(request.kind(), request);
        }
        entry.requests = request_map;
        entry.oracle_outputs = oracle_outputs;
        entries.push(entry);
    }
    Ok(entries)
}

impl CorpusEntry {
    pub fn request(&self, task: TaskKind) -> Option<&TaskRequest> {
        self.requests.get(&task)
    }
}
