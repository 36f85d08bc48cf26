//! Scenario forge: benign scene generation, attack applicability analysis,
//! and the attack-mutator registry that turns benign scenes into adversarial
//! ones.
//!
//! Adversarial scenes follow the 4-undisturbed + 3-perturbed frame structure:
//! the perturbation starts at `start_frame` and affects every later frame,
//! while frames before it stay byte-identical to the benign scene.
//!
//! Relative kinematics convention (shared with the oracle): for an object
//! with absolute direction `d` and ego heading `h`, per Δt the relative
//! position advances by `(speed·cos(d−h) − ego_speed)·Δt` longitudinally and
//! `−speed·sin(d−h)·Δt` laterally.

use crate::scene::{
    ContextualData, DrivingScene, DynamicKind, DynamicObject, EgoState, Event, LaneCondition,
    LaneSide, MapKind, RelPosition, SignMessage, StaticObject, TrackedObject, WeatherPreset,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Frame period in seconds.
pub const FRAME_DT: f64 = 1.0;
/// Default adversarial scene structure.
pub const BENIGN_FRAMES: usize = 4;
pub const PERTURBED_FRAMES: usize = 3;

/// Created vehicles/pedestrians appear this far ahead in the ego lane.
pub const CREATION_AHEAD_M: f64 = 15.0;
/// Created stop signs appear this far ahead.
pub const CREATION_SIGN_AHEAD_M: f64 = 25.0;

// ---------------------------------------------------------------------------
// attack taxonomy

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackType {
    Creation,
    Removal,
    Misclassification,
    BboxMoveIn,
    BboxMoveOut,
}

impl AttackType {
    pub const ALL: [AttackType; 5] = [
        AttackType::Creation,
        AttackType::Removal,
        AttackType::Misclassification,
        AttackType::BboxMoveIn,
        AttackType::BboxMoveOut,
    ];

    pub fn token(self) -> &'static str {
        match self {
            AttackType::Creation => "creation",
            AttackType::Removal => "removal",
            AttackType::Misclassification => "misclassification",
            AttackType::BboxMoveIn => "bbox_move_in",
            AttackType::BboxMoveOut => "bbox_move_out",
        }
    }

    /// Short tag used in filenames and reports.
    pub fn short(self) -> &'static str {
        match self {
            AttackType::Creation => "cre",
            AttackType::Removal => "rem",
            AttackType::Misclassification => "mis",
            AttackType::BboxMoveIn => "in",
            AttackType::BboxMoveOut => "out",
        }
    }

    /// Perception stage the attack targets.
    pub fn targets_tracking(self) -> bool {
        matches!(self, AttackType::BboxMoveIn | AttackType::BboxMoveOut)
    }
}

impl fmt::Display for AttackType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// The traffic hazard an attack is engineered to cause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Consequence {
    Crash,
    UnnecessaryStop,
}

/// The thirteen concrete attack goals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackGoal {
    // misclassification
    StopToSpeedLimit,
    StopToVehicle,
    VehicleToStop,
    // removal
    RemoveVehicle,
    RemoveStopSign,
    RemovePedestrian,
    // creation
    AddVehicle,
    AddStopSign,
    AddPedestrian,
    // bbox move-in
    MoveInPedestrian,
    MoveInVehicle,
    // bbox move-out
    MoveOutPedestrian,
    MoveOutVehicle,
}

impl AttackGoal {
    pub const ALL: [AttackGoal; 13] = [
        AttackGoal::StopToSpeedLimit,
        AttackGoal::StopToVehicle,
        AttackGoal::VehicleToStop,
        AttackGoal::RemoveVehicle,
        AttackGoal::RemoveStopSign,
        AttackGoal::RemovePedestrian,
        AttackGoal::AddVehicle,
        AttackGoal::AddStopSign,
        AttackGoal::AddPedestrian,
        AttackGoal::MoveInPedestrian,
        AttackGoal::MoveInVehicle,
        AttackGoal::MoveOutPedestrian,
        AttackGoal::MoveOutVehicle,
    ];

    pub fn attack_type(self) -> AttackType {
        match self {
            AttackGoal::StopToSpeedLimit | AttackGoal::StopToVehicle | AttackGoal::VehicleToStop => {
                AttackType::Misclassification
            }
            AttackGoal::RemoveVehicle | AttackGoal::RemoveStopSign | AttackGoal::RemovePedestrian => {
                AttackType::Removal
            }
            AttackGoal::AddVehicle | AttackGoal::AddStopSign | AttackGoal::AddPedestrian => {
                AttackType::Creation
            }
            AttackGoal::MoveInPedestrian | AttackGoal::MoveInVehicle => AttackType::BboxMoveIn,
            AttackGoal::MoveOutPedestrian | AttackGoal::MoveOutVehicle => AttackType::BboxMoveOut,
        }
    }

    /// Misclassification, removal and move-out aim at a crash; creation and
    /// move-in aim at an unnecessary stop.
    pub fn consequence(self) -> Consequence {
        match self.attack_type() {
            AttackType::Misclassification | AttackType::Removal | AttackType::BboxMoveOut => {
                Consequence::Crash
            }
            AttackType::Creation | AttackType::BboxMoveIn => Consequence::UnnecessaryStop,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            AttackGoal::StopToSpeedLimit => "stop_to_speed_limit",
            AttackGoal::StopToVehicle => "stop_to_vehicle",
            AttackGoal::VehicleToStop => "vehicle_to_stop",
            AttackGoal::RemoveVehicle => "remove_vehicle",
            AttackGoal::RemoveStopSign => "remove_stop_sign",
            AttackGoal::RemovePedestrian => "remove_pedestrian",
            AttackGoal::AddVehicle => "add_vehicle",
            AttackGoal::AddStopSign => "add_stop_sign",
            AttackGoal::AddPedestrian => "add_pedestrian",
            AttackGoal::MoveInPedestrian => "move_in_pedestrian",
            AttackGoal::MoveInVehicle => "move_in_vehicle",
            AttackGoal::MoveOutPedestrian => "move_out_pedestrian",
            AttackGoal::MoveOutVehicle => "move_out_vehicle",
        }
    }

    /// Role the target object must hold; `None` for creation goals.
    pub fn required_role(self) -> Option<Role> {
        match self {
            AttackGoal::StopToSpeedLimit | AttackGoal::StopToVehicle | AttackGoal::RemoveStopSign => {
                Some(Role::TrafficSign)
            }
            AttackGoal::VehicleToStop | AttackGoal::RemoveVehicle | AttackGoal::MoveOutVehicle => {
                Some(Role::FrontVehicle)
            }
            AttackGoal::MoveInVehicle => Some(Role::SideVehicle),
            AttackGoal::RemovePedestrian
            | AttackGoal::MoveInPedestrian
            | AttackGoal::MoveOutPedestrian => Some(Role::Pedestrian),
            AttackGoal::AddVehicle | AttackGoal::AddStopSign | AttackGoal::AddPedestrian => None,
        }
    }
}

impl FromStr for AttackGoal {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        AttackGoal::ALL
            .into_iter()
            .find(|g| g.token() == norm)
            .ok_or_else(|| format!("unknown attack goal: {s:?}"))
    }
}

impl fmt::Display for AttackGoal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Goal-specific payload of an attack.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AttackParams {
    /// Misclassified speed-limit value in km/h (stop → speed limit).
    pub sign_value: Option<u32>,
    /// Creation placement override (meters ahead in ego lane).
    pub placement_ahead: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub attack_type: AttackType,
    pub goal: AttackGoal,
    /// Absent for creation goals.
    pub target_id: Option<u64>,
    /// First perturbed frame index.
    pub start_frame: usize,
    #[serde(default)]
    pub params: AttackParams,
}

impl AttackSpec {
    pub fn new(goal: AttackGoal, target_id: Option<u64>, start_frame: usize) -> Self {
        AttackSpec {
            attack_type: goal.attack_type(),
            goal,
            target_id,
            start_frame,
            params: AttackParams::default(),
        }
    }
}

// ---------------------------------------------------------------------------
// role classification + Alg.-1 applicability analysis

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    FrontVehicle,
    SideVehicle,
    Pedestrian,
    TrafficSign,
}

/// Object id → role at one frame. Vehicles outside the front/side bands get
/// no role (and no attack targets them).
pub type RoleMap = BTreeMap<u64, Role>;

/// Geometric role predicates: front vehicle ⇔ |lateral| ≤ lane_width/2 and
/// longitudinal > 0; side vehicle ⇔ lane_width/2 < |lateral| ≤ 1.5·lane_width.
pub fn classify_roles(scene: &DrivingScene, frame: usize) -> RoleMap {
    let mut roles = RoleMap::new();
    let Some(event) = scene.event(frame) else {
        return roles;
    };
    let w = event.lane.lane_width;
    for obj in &event.objects {
        let role = match obj {
            TrackedObject::Static(_) => Some(Role::TrafficSign),
            TrackedObject::Dynamic(d) => match d.kind {
                DynamicKind::Pedestrian => Some(Role::Pedestrian),
                DynamicKind::Vehicle => {
                    let lat = d.position.lateral.abs();
                    if lat <= w / 2.0 && d.position.longitudinal > 0.0 {
                        Some(Role::FrontVehicle)
                    } else if lat > w / 2.0 && lat <= 1.5 * w {
                        Some(Role::SideVehicle)
                    } else {
                        None
                    }
                }
            },
        };
        if let Some(role) = role {
            roles.insert(obj.id(), role);
        }
    }
    roles
}

/// Which attack types apply to the scene: creation always; signs enable
/// misclassification and removal; a front vehicle additionally enables
/// move-out, a side vehicle move-in, and a pedestrian both.
pub fn analyze_scene(scene: &DrivingScene) -> BTreeSet<AttackType> {
    let mut types = BTreeSet::new();
    types.insert(AttackType::Creation);
    for frame in 0..scene.events.len() {
        for role in classify_roles(scene, frame).values() {
            match role {
                Role::TrafficSign => {
                    types.insert(AttackType::Misclassification);
                    types.insert(AttackType::Removal);
                }
                Role::FrontVehicle => {
                    types.insert(AttackType::Misclassification);
                    types.insert(AttackType::Removal);
                    types.insert(AttackType::BboxMoveOut);
                }
                Role::SideVehicle => {
                    types.insert(AttackType::Misclassification);
                    types.insert(AttackType::Removal);
                    types.insert(AttackType::BboxMoveIn);
                }
                Role::Pedestrian => {
                    types.insert(AttackType::Misclassification);
                    types.insert(AttackType::Removal);
                    types.insert(AttackType::BboxMoveOut);
                    types.insert(AttackType::BboxMoveIn);
                }
            }
        }
    }
    types
}

// ---------------------------------------------------------------------------
// benign scene generation

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AgentCensus {
    pub vehicles: usize,
    pub pedestrians: usize,
    pub signs: usize,
}

/// Explicit initial placement of one agent, bypassing random placement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentInit {
    pub kind: AgentInitKind,
    pub lateral: f64,
    pub longitudinal: f64,
    pub speed: f64,
    pub direction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentInitKind {
    Vehicle,
    Pedestrian,
    Sign(SignMessage),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSeed {
    pub map: MapKind,
    pub weather: WeatherPreset,
    pub rng_seed: u64,
    #[serde(default)]
    pub census: AgentCensus,
    /// Placed first, ids 1..=len, before any random census agents.
    #[serde(default)]
    pub explicit: Vec<AgentInit>,
    /// Override of the per-map cruising speed.
    #[serde(default)]
    pub ego_speed: Option<f64>,
}

impl SceneSeed {
    pub fn new(map: MapKind, weather: WeatherPreset, rng_seed: u64) -> Self {
        SceneSeed {
            map,
            weather,
            rng_seed,
            census: AgentCensus::default(),
            explicit: Vec::new(),
            ego_speed: None,
        }
    }
}

/// Cruising speed the ego holds on each map.
pub fn ego_speed_for(map: MapKind) -> f64 {
    match map {
        MapKind::Highway => 30.0,
        MapKind::CityStreet => 12.0,
        MapKind::SchoolStreet => 8.0,
    }
}

const LANE_WIDTH: f64 = 3.5;
const EGO_HEADING: f64 = 90.0;

#[derive(Debug, Error, PartialEq)]
pub enum GenerationError {
    #[error("cannot place {0} agents without initial overlap")]
    CannotPlace(&'static str),
    #[error("frame count must be >= 1")]
    NoFrames,
}

#[derive(Debug, Clone, Copy)]
struct AgentState {
    id: u64,
    kind: AgentInitKind,
    lat: f64,
    long: f64,
    speed: f64,
    direction: f64,
}

fn agent_object(a: &AgentState) -> TrackedObject {
    let position = RelPosition::new(a.lat, a.long);
    match a.kind {
        AgentInitKind::Vehicle => TrackedObject::Dynamic(DynamicObject {
            id: a.id,
            kind: DynamicKind::Vehicle,
            position,
            speed: a.speed,
            direction: a.direction,
        }),
        AgentInitKind::Pedestrian => TrackedObject::Dynamic(DynamicObject {
            id: a.id,
            kind: DynamicKind::Pedestrian,
            position,
            speed: a.speed,
            direction: a.direction,
        }),
        AgentInitKind::Sign(message) => TrackedObject::Static(StaticObject {
            id: a.id,
            position,
            direction: a.direction,
            message,
        }),
    }
}

/// Deterministic kinematic stepper: the ego cruises at constant speed and
/// heading; agents hold their speed and direction; per frame every relative
/// position advances exactly by the closed-form displacement. Same seed →
/// byte-identical scene.
pub fn generate_benign(seed: &SceneSeed, frames: usize) -> Result<DrivingScene, GenerationError> {
    if frames == 0 {
        return Err(GenerationError::NoFrames);
    }
    let ego_speed = seed.ego_speed.unwrap_or_else(|| ego_speed_for(seed.map));
    let mut rng = ChaCha8Rng::seed_from_u64(seed.rng_seed);
    let mut agents: Vec<AgentState> = Vec::new();
    let mut next_id = 1u64;

    for init in &seed.explicit {
        agents.push(AgentState {
            id: next_id,
            kind: init.kind,
            lat: init.lateral,
            long: init.longitudinal,
            speed: init.speed,
            direction: init.direction,
        });
        next_id += 1;
    }

    // random census placements; same-lane vehicles need clear spacing
    let min_gap = 12.0;
    for _ in 0..seed.census.vehicles {
        let mut placed = false;
        for _ in 0..64 {
            let lane: i32 = rng.gen_range(-1..=1);
            let lat = lane as f64 * LANE_WIDTH;
            let long = rng.gen_range(25.0..110.0);
            let speed = (ego_speed + rng.gen_range(-4.0..4.0)).max(1.0);
            let clear = agents.iter().all(|a| {
                !matches!(a.kind, AgentInitKind::Vehicle)
                    || (a.lat - lat).abs() > LANE_WIDTH / 2.0
                    || (a.long - long).abs() > min_gap
            });
            if clear {
                agents.push(AgentState {
                    id: next_id,
                    kind: AgentInitKind::Vehicle,
                    lat,
                    long,
                    speed,
                    direction: EGO_HEADING,
                });
                next_id += 1;
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(GenerationError::CannotPlace("vehicle"));
        }
    }
    for _ in 0..seed.census.pedestrians {
        let side = if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
        // sidewalk, walking toward the road
        let direction = if side < 0.0 { 0.0 } else { 180.0 };
        agents.push(AgentState {
            id: next_id,
            kind: AgentInitKind::Pedestrian,
            lat: side * 2.0 * LANE_WIDTH,
            long: rng.gen_range(20.0..80.0),
            speed: rng.gen_range(0.8..2.0),
            direction,
        });
        next_id += 1;
    }
    for _ in 0..seed.census.signs {
        let message = match seed.map {
            MapKind::Highway => SignMessage::SpeedLimit(100),
            MapKind::CityStreet => SignMessage::SpeedLimit(50),
            MapKind::SchoolStreet => SignMessage::Stop,
        };
        agents.push(AgentState {
            id: next_id,
            kind: AgentInitKind::Sign(message),
            lat: 1.5 * LANE_WIDTH,
            long: rng.gen_range(30.0..90.0),
            speed: 0.0,
            direction: 270.0,
        });
        next_id += 1;
    }

    let mut events = Vec::with_capacity(frames);
    for frame in 0..frames {
        if frame > 0 {
            for a in &mut agents {
                let delta = (a.direction - EGO_HEADING).to_radians();
                a.long += (a.speed * delta.cos() - ego_speed) * FRAME_DT;
                a.lat += -a.speed * delta.sin() * FRAME_DT;
            }
        }
        events.push(Event {
            frame: frame as u64,
            ego: EgoState { speed: ego_speed, heading: EGO_HEADING },
            lane: LaneCondition::new(LANE_WIDTH, vec![LaneSide::Left, LaneSide::Right]),
            objects: agents.iter().map(agent_object).collect(),
        });
    }

    let scene = DrivingScene {
        contextual: ContextualData {
            map: seed.map,
            time_of_day: seed.weather.default_time(),
            weather: seed.weather,
        },
        events,
    };
    debug_assert!(crate::scene::validate_scene(&scene).is_empty());
    Ok(scene)
}

// ---------------------------------------------------------------------------
// attack mutators (strategy registry)

#[derive(Debug, Error, PartialEq)]
pub enum AttackError {
    #[error("attack type {0} not applicable to this scene")]
    Inapplicable(AttackType),
    #[error("target object {0} not found at the attack start frame")]
    TargetNotFound(u64),
    #[error("no object with the required role for goal {0}")]
    NoEligibleTarget(AttackGoal),
    #[error("start frame {start} out of range for a {len}-frame scene")]
    BadStartFrame { start: usize, len: usize },
    #[error("spec attack type {spec} does not match goal {goal}")]
    TypeMismatch { spec: AttackType, goal: AttackGoal },
    #[error("no mutator registered for goal {0:?}")]
    UnknownGoal(String),
}

/// One attack-goal strategy: how to pick a target in a benign scene and how
/// to perturb a single frame. Implementations are registered by goal token
/// in [`MutatorRegistry`] and selected at runtime.
pub trait AttackMutator: Send + Sync {
    fn goal(&self) -> AttackGoal;

    /// Picks a target id at the given frame, or `None` when the goal needs
    /// no target (creation) — in which case applicability is unconditional.
    fn pick_target(&self, scene: &DrivingScene, frame: usize) -> Option<u64> {
        let role = self.goal().required_role()?;
        classify_roles(scene, frame)
            .into_iter()
            .find(|(_, r)| *r == role)
            .map(|(id, _)| id)
    }

    /// Perturbs one frame in place. `benign` is the unperturbed event (the
    /// mutation source); `k` counts perturbed frames (0 at start_frame).
    fn mutate(&self, event: &mut Event, spec: &AttackSpec, k: usize, ctx: &MutationCtx)
        -> Result<(), AttackError>;
}

/// Frame-independent facts mutators need: ego cruise speed, lane width and
/// the fresh id chosen for created objects.
#[derive(Debug, Clone, Copy)]
pub struct MutationCtx {
    pub ego_speed: f64,
    pub lane_width: f64,
    pub fresh_id: u64,
    /// Lateral shift applied by move attacks, fixed at the start frame.
    pub move_shift: f64,
}

fn find_target<'a>(event: &'a mut Event, spec: &AttackSpec) -> Result<&'a mut TrackedObject, AttackError> {
    let id = spec.target_id.ok_or(AttackError::NoEligibleTarget(spec.goal))?;
    event
        .objects
        .iter_mut()
        .find(|o| o.id() == id)
        .ok_or(AttackError::TargetNotFound(id))
}

struct Misclassify {
    goal: AttackGoal,
}

impl AttackMutator for Misclassify {
    fn goal(&self) -> AttackGoal {
        self.goal
    }

    fn mutate(&self, event: &mut Event, spec: &AttackSpec, _k: usize, _ctx: &MutationCtx)
        -> Result<(), AttackError> {
        let obj = find_target(event, spec)?;
        *obj = match (self.goal, &*obj) {
            (AttackGoal::StopToSpeedLimit, TrackedObject::Static(s)) => {
                let value = spec.params.sign_value.unwrap_or(100);
                TrackedObject::Static(StaticObject { message: SignMessage::SpeedLimit(value), ..*s })
            }
            // a stop sign reported as a stationary vehicle
            (AttackGoal::StopToVehicle, TrackedObject::Static(s)) => {
                TrackedObject::Dynamic(DynamicObject {
                    id: s.id,
                    kind: DynamicKind::Vehicle,
                    position: s.position,
                    speed: 0.0,
                    direction: s.direction,
                })
            }
            // a moving vehicle reported as a stop sign (that travels with it)
            (AttackGoal::VehicleToStop, TrackedObject::Dynamic(d)) => {
                TrackedObject::Static(StaticObject {
                    id: d.id,
                    position: d.position,
                    direction: d.direction,
                    message: SignMessage::Stop,
                })
            }
            _ => return Err(AttackError::TargetNotFound(obj.id())),
        };
        Ok(())
    }
}

struct Remove {
    goal: AttackGoal,
}

impl AttackMutator for Remove {
    fn goal(&self) -> AttackGoal {
        self.goal
    }

    fn mutate(&self, event: &mut Event, spec: &AttackSpec, _k: usize, _ctx: &MutationCtx)
        -> Result<(), AttackError> {
        let id = spec.target_id.ok_or(AttackError::NoEligibleTarget(spec.goal))?;
        let before = event.objects.len();
        event.objects.retain(|o| o.id() != id);
        if event.objects.len() == before {
            return Err(AttackError::TargetNotFound(id));
        }
        Ok(())
    }
}

struct Create {
    goal: AttackGoal,
}

impl AttackMutator for Create {
    fn goal(&self) -> AttackGoal {
        self.goal
    }

    fn mutate(&self, event: &mut Event, spec: &AttackSpec, k: usize, ctx: &MutationCtx)
        -> Result<(), AttackError> {
        let obj = match self.goal {
            // fabricated vehicle keeps station ahead of the ego
            AttackGoal::AddVehicle => TrackedObject::Dynamic(DynamicObject {
                id: ctx.fresh_id,
                kind: DynamicKind::Vehicle,
                position: RelPosition::new(
                    0.0,
                    spec.params.placement_ahead.unwrap_or(CREATION_AHEAD_M),
                ),
                speed: ctx.ego_speed,
                direction: EGO_HEADING,
            }),
            // fabricated pedestrian crossing the ego lane
            AttackGoal::AddPedestrian => {
                let speed = 1.5;
                TrackedObject::Dynamic(DynamicObject {
                    id: ctx.fresh_id,
                    kind: DynamicKind::Pedestrian,
                    position: RelPosition::new(
                        speed * k as f64 * FRAME_DT,
                        spec.params.placement_ahead.unwrap_or(CREATION_AHEAD_M),
                    ),
                    speed,
                    direction: 0.0,
                })
            }
            // fabricated roadside stop sign, receding like real street furniture
            AttackGoal::AddStopSign => TrackedObject::Static(StaticObject {
                id: ctx.fresh_id,
                position: RelPosition::new(
                    ctx.lane_width,
                    spec.params.placement_ahead.unwrap_or(CREATION_SIGN_AHEAD_M)
                        - ctx.ego_speed * k as f64 * FRAME_DT,
                ),
                direction: 270.0,
                message: SignMessage::Stop,
            }),
            _ => return Err(AttackError::NoEligibleTarget(self.goal)),
        };
        event.objects.push(obj);
        Ok(())
    }
}

struct MoveLateral {
    goal: AttackGoal,
}

impl AttackMutator for MoveLateral {
    fn goal(&self) -> AttackGoal {
        self.goal
    }

    fn mutate(&self, event: &mut Event, spec: &AttackSpec, _k: usize, ctx: &MutationCtx)
        -> Result<(), AttackError> {
        let obj = find_target(event, spec)?;
        let position = obj.position();
        let shifted = RelPosition::new(position.lateral + ctx.move_shift, position.longitudinal);
        match obj {
            TrackedObject::Dynamic(d) => d.position = shifted,
            TrackedObject::Static(s) => s.position = shifted,
        }
        Ok(())
    }
}

/// Goal-token → mutator registry. The standard set covers all 13 goals;
/// custom strategies can be registered over or alongside them.
pub struct MutatorRegistry {
    by_token: BTreeMap<String, Box<dyn AttackMutator>>,
}

impl MutatorRegistry {
    pub fn empty() -> Self {
        MutatorRegistry { by_token: BTreeMap::new() }
    }

    pub fn standard() -> Self {
        let mut reg = Self::empty();
        for goal in [AttackGoal::StopToSpeedLimit, AttackGoal::StopToVehicle, AttackGoal::VehicleToStop] {
            reg.register(Box::new(Misclassify { goal }));
        }
        for goal in [AttackGoal::RemoveVehicle, AttackGoal::RemoveStopSign, AttackGoal::RemovePedestrian] {
            reg.register(Box::new(Remove { goal }));
        }
        for goal in [AttackGoal::AddVehicle, AttackGoal::AddStopSign, AttackGoal::AddPedestrian] {
            reg.register(Box::new(Create { goal }));
        }
        for goal in [
            AttackGoal::MoveInPedestrian,
            AttackGoal::MoveInVehicle,
            AttackGoal::MoveOutPedestrian,
            AttackGoal::MoveOutVehicle,
        ] {
            reg.register(Box::new(MoveLateral { goal }));
        }
        reg
    }

    pub fn register(&mut self, mutator: Box<dyn AttackMutator>) {
        self.by_token.insert(mutator.goal().token().to_string(), mutator);
    }

    pub fn get(&self, token: &str) -> Option<&dyn AttackMutator> {
        self.by_token.get(token).map(|b| b.as_ref())
    }

    pub fn for_goal(&self, goal: AttackGoal) -> Result<&dyn AttackMutator, AttackError> {
        self.get(goal.token())
            .ok_or_else(|| AttackError::UnknownGoal(goal.token().to_string()))
    }

    pub fn goals(&self) -> impl Iterator<Item = &str> {
        self.by_token.keys().map(|s| s.as_str())
    }

    /// Applies an attack: frames before `start_frame` are untouched, every
    /// later frame is perturbed. Pure with respect to the input scene.
    pub fn apply(&self, scene: &DrivingScene, spec: &AttackSpec) -> Result<DrivingScene, AttackError> {
        if spec.attack_type != spec.goal.attack_type() {
            return Err(AttackError::TypeMismatch { spec: spec.attack_type, goal: spec.goal });
        }
        if spec.start_frame >= scene.events.len() {
            return Err(AttackError::BadStartFrame {
                start: spec.start_frame,
                len: scene.events.len(),
            });
        }
        if !analyze_scene(scene).contains(&spec.attack_type) {
            return Err(AttackError::Inapplicable(spec.attack_type));
        }
        let mutator = self.for_goal(spec.goal)?;

        let fresh_id = scene
            .events
            .iter()
            .flat_map(|e| e.objects.iter().map(|o| o.id()))
            .max()
            .unwrap_or(0)
            + 1;
        let start_event = &scene.events[spec.start_frame];
        let move_shift = match spec.goal.attack_type() {
            // into the ego lane: toward lateral 0
            AttackType::BboxMoveIn => {
                let lat = spec
                    .target_id
                    .and_then(|id| start_event.object(id))
                    .map(|o| o.position().lateral)
                    .unwrap_or(0.0);
                -lat.signum() * start_event.lane.lane_width
            }
            // out of the ego lane: one lane to the right
            AttackType::BboxMoveOut => start_event.lane.lane_width,
            _ => 0.0,
        };
        let ctx = MutationCtx {
            ego_speed: start_event.ego.speed,
            lane_width: start_event.lane.lane_width,
            fresh_id,
            move_shift,
        };

        let mut out = scene.clone();
        for (k, event) in out.events[spec.start_frame..].iter_mut().enumerate() {
            mutator.mutate(event, spec, k, &ctx)?;
        }
        Ok(out)
    }
}

/// Applies an attack using the standard mutator set.
pub fn apply_attack(scene: &DrivingScene, spec: &AttackSpec) -> Result<DrivingScene, AttackError> {
    MutatorRegistry::standard().apply(scene, spec)
}

// ---------------------------------------------------------------------------
// campaign enumeration

/// Which goals run on which maps. Data, not code: serializable and
/// overridable by config. The default excludes, on the highway, every goal
/// that presupposes a stop sign or a pedestrian — leaving 33 (goal, map)
/// setups out of the full 39.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalMapMatrix {
    pub allowed: Vec<(AttackGoal, MapKind)>,
}

impl Default for GoalMapMatrix {
    fn default() -> Self {
        let mut allowed = Vec::new();
        for goal in AttackGoal::ALL {
            for map in MapKind::ALL {
                let needs_street = matches!(
                    goal,
                    AttackGoal::StopToSpeedLimit
                        | AttackGoal::StopToVehicle
                        | AttackGoal::RemoveStopSign
                        | AttackGoal::RemovePedestrian
                        | AttackGoal::MoveInPedestrian
                        | AttackGoal::MoveOutPedestrian
                );
                if needs_street && map == MapKind::Highway {
                    continue;
                }
                allowed.push((goal, map));
            }
        }
        GoalMapMatrix { allowed }
    }
}

impl GoalMapMatrix {
    pub fn allows(&self, goal: AttackGoal, map: MapKind) -> bool {
        self.allowed.contains(&(goal, map))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignEntry {
    pub goal: AttackGoal,
    pub map: MapKind,
    pub weather: WeatherPreset,
    pub rep: u32,
    pub rng_seed: u64,
    pub scene: DrivingScene,
    pub spec: AttackSpec,
}

/// Derives the per-entry RNG seed from the campaign seed and coordinates, so
/// every entry replays bit-identically and independently.
pub fn entry_seed(campaign_seed: u64, goal: AttackGoal, map: MapKind, weather: WeatherPreset, rep: u32) -> u64 {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(campaign_seed.to_le_bytes());
    h.update(goal.token().as_bytes());
    h.update(map.token().as_bytes());
    h.update(weather.token().as_bytes());
    h.update(rep.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Benign seed guaranteed to contain the goal's target role, with seeded
/// jitter so repetitions differ.
pub fn seed_for_goal(goal: AttackGoal, map: MapKind, weather: WeatherPreset, rng_seed: u64) -> SceneSeed {
    let mut seed = SceneSeed::new(map, weather, rng_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let ego = ego_speed_for(map);
    let jitter_long: f64 = rng.gen_range(-8.0..8.0);
    let jitter_speed: f64 = rng.gen_range(-1.5..1.5);
    match goal.required_role() {
        Some(Role::TrafficSign) => seed.explicit.push(AgentInit {
            kind: AgentInitKind::Sign(SignMessage::Stop),
            lateral: 1.5 * LANE_WIDTH,
            longitudinal: 60.0 + jitter_long,
            speed: 0.0,
            direction: 270.0,
        }),
        Some(Role::FrontVehicle) => seed.explicit.push(AgentInit {
            kind: AgentInitKind::Vehicle,
            lateral: 0.0,
            longitudinal: 50.0 + jitter_long,
            // slightly slower than the ego: hiding it sets up a crash
            speed: (ego - 4.0 + jitter_speed).max(1.0),
            direction: EGO_HEADING,
        }),
        Some(Role::SideVehicle) => seed.explicit.push(AgentInit {
            kind: AgentInitKind::Vehicle,
            lateral: -LANE_WIDTH,
            longitudinal: 15.0 + jitter_long,
            speed: (ego + jitter_speed).max(1.0),
            direction: EGO_HEADING,
        }),
        Some(Role::Pedestrian) => {
            // move-out needs the pedestrian in the ego's path; the other
            // pedestrian goals start from the sidewalk
            let (lateral, direction) = if goal == AttackGoal::MoveOutPedestrian {
                (0.0, 0.0)
            } else {
                (-2.0 * LANE_WIDTH, 0.0)
            };
            seed.explicit.push(AgentInit {
                kind: AgentInitKind::Pedestrian,
                lateral,
                longitudinal: 40.0 + jitter_long,
                speed: 1.2,
                direction,
            });
        }
        None => {}
    }
    seed
}

/// Deterministic cartesian expansion of the campaign: every (goal, map) pair
/// the matrix allows × every weather × `reps` repetitions. Each entry is a
/// 4-benign + 3-perturbed adversarial scene with its attack spec.
pub fn enumerate_campaign(
    maps: &[MapKind],
    weathers: &[WeatherPreset],
    goals: &[AttackGoal],
    reps: u32,
    campaign_seed: u64,
    matrix: &GoalMapMatrix,
) -> Result<Vec<CampaignEntry>, AttackError> {
    let mut out = Vec::new();
    for &goal in goals {
        for &map in maps {
            if !matrix.allows(goal, map) {
                continue;
            }
            for &weather in weathers {
                for rep in 0..reps {
                    let rng_seed = entry_seed(campaign_seed, goal, map, weather, rep);
                    let seed = seed_for_goal(goal, map, weather, rng_seed);
                    let benign = generate_benign(&seed, BENIGN_FRAMES + PERTURBED_FRAMES)
                        .expect("explicit placements never overlap");
                    let target = goal
                        .required_role()
                        .map(|_| {
                            standard_target(&benign, goal, BENIGN_FRAMES)
                                .ok_or(AttackError::NoEligibleTarget(goal))
                        })
                        .transpose()?;
                    let spec = AttackSpec::new(goal, target, BENIGN_FRAMES);
                    let scene = apply_attack(&benign, &spec)?;
                    out.push(CampaignEntry { goal, map, weather, rep, rng_seed, scene, spec });
                }
            }
        }
    }
    Ok(out)
}

fn standard_target(scene: &DrivingScene, goal: AttackGoal, frame: usize) -> Option<u64> {
    let role = goal.required_role()?;
    classify_roles(scene, frame)
        .into_iter()
        .find(|(_, r)| *r == role)
        .map(|(id, _)| id)
}

/// The benign counterpart of a campaign entry (same seed, no attack), used
/// as the ground truth for safe-decision judging.
pub fn benign_counterpart(entry: &CampaignEntry) -> DrivingScene {
    let seed = seed_for_goal(entry.goal, entry.map, entry.weather, entry.rng_seed);
    generate_benign(&seed, BENIGN_FRAMES + PERTURBED_FRAMES)
        .expect("explicit placements never overlap")
}

// ---------------------------------------------------------------------------
// fixtures

/// Benign version of the motivating highway scene: ego 30 m/s, vehicle 1 in
/// the left lane at 35 m/s, vehicle 2 in the ego lane initially 80 m ahead at
/// 31 m/s then braking to 20 m/s.
pub fn motivating_example_benign() -> DrivingScene {
    let lane = || LaneCondition::new(5.0, vec![LaneSide::Left, LaneSide::Right]);
    let vehicle = |id: u64, lat: f64, long: f64, speed: f64| {
        TrackedObject::Dynamic(DynamicObject {
            id,
            kind: DynamicKind::Vehicle,
            position: RelPosition::new(lat, long),
            speed,
            direction: EGO_HEADING,
        })
    };
    // vehicle 1 (left lane) pulls away; vehicle 2 brakes hard at time 2 and
    // is then 50 m ahead closing at 10 m/s
    let frames = [
        vec![vehicle(1, -5.0, 20.0, 35.0), vehicle(2, 0.0, 80.0, 31.0)],
        vec![vehicle(1, -5.0, 100.0, 35.0), vehicle(2, 0.0, 81.0, 31.0)],
        vec![vehicle(1, -5.0, 130.0, 35.0), vehicle(2, 0.0, 50.0, 20.0)],
        vec![vehicle(1, -5.0, 150.0, 35.0), vehicle(2, 0.0, 40.0, 20.0)],
    ];
    DrivingScene {
        contextual: ContextualData {
            map: MapKind::Highway,
            time_of_day: crate::scene::TimeOfDay::new(22, 0).unwrap(),
            weather: WeatherPreset::CloudyNoon,
        },
        events: frames
            .into_iter()
            .enumerate()
            .map(|(i, objects)| Event {
                frame: i as u64,
                ego: EgoState { speed: 30.0, heading: EGO_HEADING },
                lane: lane(),
                objects,
            })
            .collect(),
    }
}

/// The object-removal attack of the motivating example: vehicle 2 vanishes
/// from perception in the last frame.
pub fn motivating_example_spec() -> AttackSpec {
    AttackSpec::new(AttackGoal::RemoveVehicle, Some(2), 3)
}

/// The adversarial motivating scene (benign scene + removal attack).
pub fn motivating_example_adversarial() -> DrivingScene {
    apply_attack(&motivating_example_benign(), &motivating_example_spec())
        .expect("fixture attack is applicable")
}

/// Benign single-frame scene where accelerate, maintain and change-right are
/// safe and the planner picks maintain: a slow vehicle far ahead in the left
/// lane and an open right lane.
pub fn safe_decision_example() -> DrivingScene {
    DrivingScene {
        contextual: ContextualData {
            map: MapKind::Highway,
            time_of_day: crate::scene::TimeOfDay::new(12, 0).unwrap(),
            weather: WeatherPreset::ClearNoon,
        },
        events: vec![Event {
            frame: 0,
            ego: EgoState { speed: 20.0, heading: EGO_HEADING },
            lane: LaneCondition::new(3.5, vec![LaneSide::Left, LaneSide::Right]),
            objects: vec![TrackedObject::Dynamic(DynamicObject {
                id: 1,
                kind: DynamicKind::Vehicle,
                position: RelPosition::new(-3.5, 30.0),
                speed: 12.0,
                direction: EGO_HEADING,
            })],
        }],
    }
}

/// Paper-scale campaign configuration: all goals, all maps, all weathers,
/// 10 repetitions — 33 setups × 10 × 10 = 3300 entries under the default
/// matrix.
pub fn paper_campaign() -> (Vec<MapKind>, Vec<WeatherPreset>, Vec<AttackGoal>, u32) {
    (
        MapKind::ALL.to_vec(),
        WeatherPreset::ALL.to_vec(),
        AttackGoal::ALL.to_vec(),
        10,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::serialize_scene;
    use crate::scene::{validate_scene, ControlDecision};

    fn one_frame(objects: Vec<TrackedObject>) -> DrivingScene {
        DrivingScene {
            contextual: ContextualData {
                map: MapKind::Highway,
                time_of_day: crate::scene::TimeOfDay::new(12, 0).unwrap(),
                weather: WeatherPreset::ClearNoon,
            },
            events: vec![Event {
                frame: 0,
                ego: EgoState { speed: 20.0, heading: EGO_HEADING },
                lane: LaneCondition::new(4.0, vec![LaneSide::Left, LaneSide::Right]),
                objects,
            }],
        }
    }

    fn front_vehicle(id: u64) -> TrackedObject {
        TrackedObject::Dynamic(DynamicObject {
            id,
            kind: DynamicKind::Vehicle,
            position: RelPosition::new(0.0, 50.0),
            speed: 18.0,
            direction: EGO_HEADING,
        })
    }

    fn side_vehicle(id: u64) -> TrackedObject {
        TrackedObject::Dynamic(DynamicObject {
            id,
            kind: DynamicKind::Vehicle,
            position: RelPosition::new(5.0, 20.0),
            speed: 20.0,
            direction: EGO_HEADING,
        })
    }

    fn pedestrian(id: u64) -> TrackedObject {
        TrackedObject::Dynamic(DynamicObject {
            id,
            kind: DynamicKind::Pedestrian,
            position: RelPosition::new(-8.0, 30.0),
            speed: 1.2,
            direction: 0.0,
        })
    }

    fn stop_sign(id: u64) -> TrackedObject {
        TrackedObject::Static(StaticObject {
            id,
            position: RelPosition::new(6.0, 40.0),
            direction: 270.0,
            message: SignMessage::Stop,
        })
    }

    #[test]
    fn goal_taxonomy_is_consistent() {
        assert_eq!(AttackGoal::ALL.len(), 13);
        for goal in AttackGoal::ALL {
            assert_eq!(goal.token().parse::<AttackGoal>().unwrap(), goal);
            let c = goal.consequence();
            match goal.attack_type() {
                AttackType::Creation | AttackType::BboxMoveIn => {
                    assert_eq!(c, Consequence::UnnecessaryStop)
                }
                _ => assert_eq!(c, Consequence::Crash),
            }
        }
    }

    #[test]
    fn roles_match_geometric_predicates() {
        let scene = one_frame(vec![front_vehicle(1), side_vehicle(2), pedestrian(3), stop_sign(4)]);
        let roles = classify_roles(&scene, 0);
        assert_eq!(roles.get(&1), Some(&Role::FrontVehicle));
        assert_eq!(roles.get(&2), Some(&Role::SideVehicle)); // 2 < 5 <= 6
        assert_eq!(roles.get(&3), Some(&Role::Pedestrian));
        assert_eq!(roles.get(&4), Some(&Role::TrafficSign));
    }

    #[test]
    fn vehicle_behind_or_far_gets_no_role() {
        let behind = TrackedObject::Dynamic(DynamicObject {
            id: 1,
            kind: DynamicKind::Vehicle,
            position: RelPosition::new(0.0, -10.0),
            speed: 20.0,
            direction: EGO_HEADING,
        });
        let far = TrackedObject::Dynamic(DynamicObject {
            id: 2,
            kind: DynamicKind::Vehicle,
            position: RelPosition::new(9.0, 10.0), // > 1.5 * 4.0
            speed: 20.0,
            direction: EGO_HEADING,
        });
        let roles = classify_roles(&one_frame(vec![behind, far]), 0);
        assert!(roles.is_empty());
    }

    #[test]
    fn analyze_empty_scene() {
        let set = analyze_scene(&one_frame(vec![]));
        assert_eq!(set, [AttackType::Creation].into_iter().collect());
    }

    #[test]
    fn analyze_front_vehicle_only() {
        let set = analyze_scene(&one_frame(vec![front_vehicle(1)]));
        let want = [
            AttackType::Creation,
            AttackType::Misclassification,
            AttackType::Removal,
            AttackType::BboxMoveOut,
        ]
        .into_iter()
        .collect();
        assert_eq!(set, want);
    }

    #[test]
    fn analyze_pedestrian_and_side_vehicle() {
        let set = analyze_scene(&one_frame(vec![pedestrian(1), side_vehicle(2)]));
        assert_eq!(set.len(), 5); // all five types
    }

    #[test]
    fn benign_empty_census() {
        let seed = SceneSeed::new(MapKind::Highway, WeatherPreset::ClearNoon, 1);
        let scene = generate_benign(&seed, 7).unwrap();
        assert_eq!(scene.events.len(), 7);
        assert!(scene.events.iter().all(|e| e.objects.is_empty()));
        assert!(validate_scene(&scene).is_empty());
    }

    #[test]
    fn benign_is_deterministic() {
        let mut seed = SceneSeed::new(MapKind::CityStreet, WeatherPreset::RainNoon, 99);
        seed.census = AgentCensus { vehicles: 3, pedestrians: 2, signs: 1 };
        let a = serialize_scene(&generate_benign(&seed, 7).unwrap()).unwrap();
        let b = serialize_scene(&generate_benign(&seed, 7).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn benign_motivating_kinematics() {
        // ego 30 m/s; vehicle 2 ahead at 80 m doing 31 m/s: gap grows 1 m per frame
        let mut seed = SceneSeed::new(MapKind::Highway, WeatherPreset::CloudyNoon, 7);
        seed.ego_speed = Some(30.0);
        seed.explicit = vec![
            AgentInit {
                kind: AgentInitKind::Vehicle,
                lateral: -5.0,
                longitudinal: 20.0,
                speed: 35.0,
                direction: EGO_HEADING,
            },
            AgentInit {
                kind: AgentInitKind::Vehicle,
                lateral: 0.0,
                longitudinal: 80.0,
                speed: 31.0,
                direction: EGO_HEADING,
            },
        ];
        let scene = generate_benign(&seed, 4).unwrap();
        let gap_at = |frame: usize, id: u64| {
            scene.events[frame].object(id).unwrap().position().longitudinal
        };
        assert!((gap_at(1, 2) - 81.0).abs() < 1e-9);
        assert!((gap_at(1, 1) - 25.0).abs() < 1e-9);
        assert!((gap_at(3, 2) - 83.0).abs() < 1e-9);
    }

    #[test]
    fn benign_kinematic_consistency_bound() {
        let mut seed = SceneSeed::new(MapKind::SchoolStreet, WeatherPreset::SoftRainNoon, 42);
        seed.census = AgentCensus { vehicles: 2, pedestrians: 2, signs: 1 };
        let scene = generate_benign(&seed, 7).unwrap();
        let ego = scene.events[0].ego.speed;
        for pair in scene.events.windows(2) {
            for obj in &pair[0].objects {
                let next = pair[1].object(obj.id()).expect("objects persist");
                let (speed, dir) = match obj {
                    TrackedObject::Dynamic(d) => (d.speed, d.direction),
                    TrackedObject::Static(s) => (0.0, s.direction),
                };
                let delta = (dir - EGO_HEADING).to_radians();
                let pred_long =
                    obj.position().longitudinal + (speed * delta.cos() - ego) * FRAME_DT;
                let pred_lat = obj.position().lateral - speed * delta.sin() * FRAME_DT;
                let err = ((next.position().longitudinal - pred_long).powi(2)
                    + (next.position().lateral - pred_lat).powi(2))
                .sqrt();
                assert!(err <= 0.1, "prediction error {err} for object {}", obj.id());
            }
        }
    }

    #[test]
    fn removal_attack_prefix_preserved() {
        let benign = motivating_example_benign();
        let spec = motivating_example_spec();
        let attacked = apply_attack(&benign, &spec).unwrap();
        // prefix byte-identical
        for i in 0..spec.start_frame {
            assert_eq!(benign.events[i], attacked.events[i]);
        }
        // vehicle 2 gone from the perturbed frames, vehicle 1 persists
        for event in &attacked.events[spec.start_frame..] {
            assert!(event.object(2).is_none());
            assert!(event.object(1).is_some());
        }
        // input untouched
        assert!(benign.events[3].object(2).is_some());
    }

    #[test]
    fn misclassification_changes_sign_message() {
        let benign = one_frame(vec![stop_sign(1)]);
        let mut spec = AttackSpec::new(AttackGoal::StopToSpeedLimit, Some(1), 0);
        spec.params.sign_value = Some(100);
        let attacked = apply_attack(&benign, &spec).unwrap();
        let sign = attacked.events[0].object(1).unwrap().as_static().unwrap();
        assert_eq!(sign.message, SignMessage::SpeedLimit(100));
    }

    #[test]
    fn creation_uses_fresh_id() {
        let benign = one_frame(vec![front_vehicle(7)]);
        let spec = AttackSpec::new(AttackGoal::AddStopSign, None, 0);
        let attacked = apply_attack(&benign, &spec).unwrap();
        let event = &attacked.events[0];
        assert_eq!(event.objects.len(), 2);
        let new_id = event.objects.last().unwrap().id();
        assert_eq!(new_id, 8);
        assert_eq!(
            event.object(new_id).unwrap().as_static().unwrap().message,
            SignMessage::Stop
        );
    }

    #[test]
    fn move_in_shifts_toward_ego_lane() {
        let benign = one_frame(vec![side_vehicle(1)]);
        let spec = AttackSpec::new(AttackGoal::MoveInVehicle, Some(1), 0);
        let attacked = apply_attack(&benign, &spec).unwrap();
        let lat = attacked.events[0].object(1).unwrap().position().lateral;
        assert!((lat - 1.0).abs() < 1e-9); // 5.0 - 4.0 lane width
    }

    #[test]
    fn inapplicable_attack_is_rejected() {
        let benign = one_frame(vec![]);
        let spec = AttackSpec::new(AttackGoal::RemoveVehicle, Some(1), 0);
        assert_eq!(
            apply_attack(&benign, &spec),
            Err(AttackError::Inapplicable(AttackType::Removal))
        );
    }

    #[test]
    fn missing_target_is_rejected() {
        let benign = one_frame(vec![front_vehicle(1)]);
        let spec = AttackSpec::new(AttackGoal::RemoveVehicle, Some(99), 0);
        assert_eq!(apply_attack(&benign, &spec), Err(AttackError::TargetNotFound(99)));
    }

    #[test]
    fn default_matrix_yields_33_setups() {
        let matrix = GoalMapMatrix::default();
        assert_eq!(matrix.allowed.len(), 33);
        assert!(!matrix.allows(AttackGoal::StopToSpeedLimit, MapKind::Highway));
        assert!(matrix.allows(AttackGoal::StopToSpeedLimit, MapKind::SchoolStreet));
        assert!(matrix.allows(AttackGoal::AddStopSign, MapKind::Highway));
    }

    #[test]
    fn campaign_shape() {
        let (maps, weathers, goals, _) = paper_campaign();
        let matrix = GoalMapMatrix::default();
        // 1 rep across everything: 33 setups x 10 weathers
        let entries =
            enumerate_campaign(&maps, &weathers, &goals, 1, 2024, &matrix).unwrap();
        assert_eq!(entries.len(), 330);
        for entry in &entries {
            assert_eq!(entry.scene.events.len(), BENIGN_FRAMES + PERTURBED_FRAMES);
            assert_eq!(entry.spec.start_frame, BENIGN_FRAMES);
            // perturbed suffix differs from the benign counterpart
            let benign = benign_counterpart(entry);
            for i in 0..BENIGN_FRAMES {
                assert_eq!(benign.events[i], entry.scene.events[i]);
            }
            assert_ne!(benign.events[BENIGN_FRAMES], entry.scene.events[BENIGN_FRAMES]);
        }
    }

    #[test]
    fn campaign_enumeration_is_deterministic() {
        let matrix = GoalMapMatrix::default();
        let goals = [AttackGoal::AddVehicle, AttackGoal::RemoveVehicle];
        let weathers = [WeatherPreset::ClearNoon];
        let maps = [MapKind::Highway, MapKind::CityStreet];
        let a = enumerate_campaign(&maps, &weathers, &goals, 2, 7, &matrix).unwrap();
        let b = enumerate_campaign(&maps, &weathers, &goals, 2, 7, &matrix).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
    }

    #[test]
    fn motivating_fixture_is_structurally_valid() {
        let benign = motivating_example_benign();
        assert!(validate_scene(&benign).is_empty());
        let adversarial = motivating_example_adversarial();
        assert!(crate::scene::structurally_valid(&adversarial));
        assert_eq!(adversarial.events.len(), 4);
    }

    #[test]
    fn safe_decision_fixture_matches_caption() {
        use crate::oracle::{safe_set, SafetyConfig};
        let scene = safe_decision_example();
        let set = safe_set(&scene, 0, 10.0, &SafetyConfig::default()).unwrap();
        for d in [
            ControlDecision::Accelerate,
            ControlDecision::Maintain,
            ControlDecision::ChangeLaneRight,
        ] {
            assert!(set.is_safe(d), "{d} should be safe");
        }
        assert_eq!(set.ground_truth, ControlDecision::Maintain);
    }

    #[test]
    fn motivating_oracle_last_frame() {
        use crate::oracle::{safe_set, SafetyConfig};
        let benign = motivating_example_benign();
        let set = safe_set(&benign, 3, 10.0, &SafetyConfig::default()).unwrap();
        assert!(!set.is_safe(ControlDecision::Maintain));
        assert!(set.is_safe(ControlDecision::ChangeLaneLeft));
    }
}
