//! Domain model for driving scenes and control decisions.
//!
//! Conventions used throughout the crate:
//! - Headings are degrees in `[0, 360)` with 90° = north (0° = east,
//!   counter-clockwise). This matches the narrative style of the scene
//!   descriptions ("moving in the north (90°) direction") and differs from
//!   compass bearings.
//! - Lateral position is signed meters, positive = right of the ego vehicle.
//!   Longitudinal position is signed meters, positive = ahead of the ego.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Perception range limits for ego-relative positions.
pub const MAX_LATERAL_M: f64 = 50.0;
pub const MAX_LONGITUDINAL_M: f64 = 200.0;

/// Plausibility bounds. Validation-layer only: attack mutators bypass
/// validation so that implausible scenes can be constructed on purpose.
pub const MAX_PEDESTRIAN_SPEED: f64 = 12.0;
pub const MAX_VEHICLE_SPEED: f64 = 70.0;

pub const SPEED_LIMIT_VALUES: [u32; 4] = [30, 50, 80, 100];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Highway,
    CityStreet,
    SchoolStreet,
}

impl MapKind {
    pub const ALL: [MapKind; 3] = [MapKind::Highway, MapKind::CityStreet, MapKind::SchoolStreet];

    /// Canonical lowercase snake-case token.
    pub fn token(self) -> &'static str {
        match self {
            MapKind::Highway => "highway",
            MapKind::CityStreet => "city_street",
            MapKind::SchoolStreet => "school_street",
        }
    }

    /// Human form used by the scene file surface syntax ("school street").
    pub fn display_name(self) -> &'static str {
        match self {
            MapKind::Highway => "highway",
            MapKind::CityStreet => "city street",
            MapKind::SchoolStreet => "school street",
        }
    }
}

impl FromStr for MapKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        match norm.as_str() {
            "highway" => Ok(MapKind::Highway),
            "city_street" => Ok(MapKind::CityStreet),
            "school_street" => Ok(MapKind::SchoolStreet),
            _ => Err(format!("unknown map kind: {s:?}")),
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// The ten preset weather conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeatherPreset {
    ClearNoon,
    CloudyNoon,
    WetNoon,
    WetCloudyNoon,
    WetSunset,
    RainNoon,
    SoftRainNoon,
    WetCloudySunset,
    SoftRainSunset,
    MidRainSunset,
}

impl WeatherPreset {
    pub const ALL: [WeatherPreset; 10] = [
        WeatherPreset::ClearNoon,
        WeatherPreset::CloudyNoon,
        WeatherPreset::WetNoon,
        WeatherPreset::WetCloudyNoon,
        WeatherPreset::WetSunset,
        WeatherPreset::RainNoon,
        WeatherPreset::SoftRainNoon,
        WeatherPreset::WetCloudySunset,
        WeatherPreset::SoftRainSunset,
        WeatherPreset::MidRainSunset,
    ];

    /// Canonical lowercase snake-case token.
    pub fn token(self) -> &'static str {
        match self {
            WeatherPreset::ClearNoon => "clear_noon",
            WeatherPreset::CloudyNoon => "cloudy_noon",
            WeatherPreset::WetNoon => "wet_noon",
            WeatherPreset::WetCloudyNoon => "wet_cloudy_noon",
            WeatherPreset::WetSunset => "wet_sunset",
            WeatherPreset::RainNoon => "rain_noon",
            WeatherPreset::SoftRainNoon => "soft_rain_noon",
            WeatherPreset::WetCloudySunset => "wet_cloudy_sunset",
            WeatherPreset::SoftRainSunset => "soft_rain_sunset",
            WeatherPreset::MidRainSunset => "mid_rain_sunset",
        }
    }

    /// Short word for prose rendering ("cloudy", "soft rain").
    pub fn display_name(self) -> &'static str {
        match self {
            WeatherPreset::ClearNoon => "clear",
            WeatherPreset::CloudyNoon => "cloudy",
            WeatherPreset::WetNoon => "wet",
            WeatherPreset::WetCloudyNoon => "wet and cloudy",
            WeatherPreset::WetSunset => "wet",
            WeatherPreset::RainNoon => "rainy",
            WeatherPreset::SoftRainNoon => "soft rain",
            WeatherPreset::WetCloudySunset => "wet and cloudy",
            WeatherPreset::SoftRainSunset => "soft rain",
            WeatherPreset::MidRainSunset => "rainy",
        }
    }

    /// Clock time implied by the preset's lighting.
    pub fn default_time(self) -> TimeOfDay {
        match self {
            WeatherPreset::ClearNoon
            | WeatherPreset::CloudyNoon
            | WeatherPreset::WetNoon
            | WeatherPreset::WetCloudyNoon
            | WeatherPreset::RainNoon
            | WeatherPreset::SoftRainNoon => TimeOfDay::new(12, 0).unwrap(),
            WeatherPreset::WetSunset
            | WeatherPreset::WetCloudySunset
            | WeatherPreset::SoftRainSunset
            | WeatherPreset::MidRainSunset => TimeOfDay::new(18, 0).unwrap(),
        }
    }
}

impl FromStr for WeatherPreset {
    type Err = String;

    /// Accepts canonical tokens, CamelCase preset names, and the loose
    /// adjectives that appear in raw logs ("cloudy", "rainy", "sunny").
    /// Serialization always emits the canonical token.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace([' ', '-', '_'], "");
        let preset = match norm.as_str() {
            "clearnoon" | "clear" | "sunny" => WeatherPreset::ClearNoon,
            "cloudynoon" | "cloudy" => WeatherPreset::CloudyNoon,
            "wetnoon" | "wet" => WeatherPreset::WetNoon,
            "wetcloudynoon" | "wetcloudy" => WeatherPreset::WetCloudyNoon,
            "wetsunset" => WeatherPreset::WetSunset,
            "rainnoon" | "rain" | "rainy" => WeatherPreset::RainNoon,
            "softrainnoon" | "softrain" => WeatherPreset::SoftRainNoon,
            "wetcloudysunset" => WeatherPreset::WetCloudySunset,
            "softrainsunset" => WeatherPreset::SoftRainSunset,
            "midrainsunset" | "midrain" => WeatherPreset::MidRainSunset,
            _ => return Err(format!("unknown weather preset: {s:?}")),
        };
        Ok(preset)
    }
}

impl fmt::Display for WeatherPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// 24-hour clock time, minute resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TimeOfDay {
    hour: u8,
    minute: u8,
}

impl TimeOfDay {
    pub fn new(hour: u8, minute: u8) -> Result<Self, String> {
        if hour > 23 || minute > 59 {
            return Err(format!("time of day out of range: {hour:02}:{minute:02}"));
        }
        Ok(TimeOfDay { hour, minute })
    }

    pub fn hour(self) -> u8 {
        self.hour
    }

    pub fn minute(self) -> u8 {
        self.minute
    }
}

impl FromStr for TimeOfDay {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (h, m) = s
            .split_once(':')
            .ok_or_else(|| format!("expected HH:MM, got {s:?}"))?;
        let hour: u8 = h.parse().map_err(|_| format!("bad hour in {s:?}"))?;
        let minute: u8 = m.parse().map_err(|_| format!("bad minute in {s:?}"))?;
        TimeOfDay::new(hour, minute)
    }
}

impl TryFrom<String> for TimeOfDay {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<TimeOfDay> for String {
    fn from(t: TimeOfDay) -> String {
        t.to_string()
    }
}

impl fmt::Display for TimeOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.hour, self.minute)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextualData {
    pub map: MapKind,
    pub time_of_day: TimeOfDay,
    pub weather: WeatherPreset,
}

/// Ego-relative position. Positive lateral = right of ego, positive
/// longitudinal = ahead of ego.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelPosition {
    pub lateral: f64,
    pub longitudinal: f64,
}

impl RelPosition {
    pub fn new(lateral: f64, longitudinal: f64) -> Self {
        RelPosition { lateral, longitudinal }
    }

    pub fn in_range(&self) -> bool {
        self.lateral.is_finite()
            && self.longitudinal.is_finite()
            && self.lateral.abs() <= MAX_LATERAL_M
            && self.longitudinal.abs() <= MAX_LONGITUDINAL_M
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicKind {
    Vehicle,
    Pedestrian,
}

impl DynamicKind {
    pub fn label(self) -> &'static str {
        match self {
            DynamicKind::Vehicle => "vehicle",
            DynamicKind::Pedestrian => "pedestrian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicObject {
    pub id: u64,
    pub kind: DynamicKind,
    pub position: RelPosition,
    /// m/s, >= 0.
    pub speed: f64,
    /// Degrees in [0, 360), 90° = north.
    pub direction: f64,
}

/// Payload carried by a traffic sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMessage {
    Stop,
    /// Value in km/h, one of 30/50/80/100.
    SpeedLimit(u32),
    Yield,
}

impl fmt::Display for SignMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignMessage::Stop => f.write_str("stop"),
            SignMessage::SpeedLimit(v) => write!(f, "speed_limit({v})"),
            SignMessage::Yield => f.write_str("yield"),
        }
    }
}

impl FromStr for SignMessage {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        if t == "stop" {
            return Ok(SignMessage::Stop);
        }
        if t == "yield" {
            return Ok(SignMessage::Yield);
        }
        if let Some(rest) = t.strip_prefix("speed_limit(").and_then(|r| r.strip_suffix(')')) {
            let v: u32 = rest.parse().map_err(|_| format!("bad speed limit: {s:?}"))?;
            return Ok(SignMessage::SpeedLimit(v));
        }
        Err(format!("unknown sign message: {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticObject {
    pub id: u64,
    pub position: RelPosition,
    /// Facing direction in degrees.
    pub direction: f64,
    pub message: SignMessage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum TrackedObject {
    Dynamic(DynamicObject),
    Static(StaticObject),
}

impl TrackedObject {
    pub fn id(&self) -> u64 {
        match self {
            TrackedObject::Dynamic(d) => d.id,
            TrackedObject::Static(s) => s.id,
        }
    }

    pub fn position(&self) -> RelPosition {
        match self {
            TrackedObject::Dynamic(d) => d.position,
            TrackedObject::Static(s) => s.position,
        }
    }

    pub fn as_dynamic(&self) -> Option<&DynamicObject> {
        match self {
            TrackedObject::Dynamic(d) => Some(d),
            TrackedObject::Static(_) => None,
        }
    }

    pub fn as_static(&self) -> Option<&StaticObject> {
        match self {
            TrackedObject::Static(s) => Some(s),
            TrackedObject::Dynamic(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoState {
    /// m/s, >= 0.
    pub speed: f64,
    /// Degrees in [0, 360), 90° = north.
    pub heading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneSide {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneCondition {
    /// Meters, in (2.0, 6.0).
    pub lane_width: f64,
    /// Sorted, deduplicated subset of {left, right}.
    pub change_options: Vec<LaneSide>,
}

impl LaneCondition {
    pub fn new(lane_width: f64, mut change_options: Vec<LaneSide>) -> Self {
        change_options.sort();
        change_options.dedup();
        LaneCondition { lane_width, change_options }
    }

    pub fn allows(&self, side: LaneSide) -> bool {
        self.change_options.contains(&side)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub frame: u64,
    pub ego: EgoState,
    pub lane: LaneCondition,
    pub objects: Vec<TrackedObject>,
}

impl Event {
    pub fn object(&self, id: u64) -> Option<&TrackedObject> {
        self.objects.iter().find(|o| o.id() == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivingScene {
    pub contextual: ContextualData,
    pub events: Vec<Event>,
}

impl DrivingScene {
    pub fn event(&self, frame: usize) -> Option<&Event> {
        self.events.get(frame)
    }

    pub fn last_frame(&self) -> usize {
        self.events.len().saturating_sub(1)
    }
}

/// The six high-level control decisions offered to the LLM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlDecision {
    Maintain,
    Slower,
    Stop,
    ChangeLaneLeft,
    ChangeLaneRight,
    Accelerate,
}

impl ControlDecision {
    pub const ALL: [ControlDecision; 6] = [
        ControlDecision::Maintain,
        ControlDecision::Slower,
        ControlDecision::Stop,
        ControlDecision::ChangeLaneLeft,
        ControlDecision::ChangeLaneRight,
        ControlDecision::Accelerate,
    ];

    pub fn token(self) -> &'static str {
        match self {
            ControlDecision::Maintain => "maintain",
            ControlDecision::Slower => "slower",
            ControlDecision::Stop => "stop",
            ControlDecision::ChangeLaneLeft => "change_lane_left",
            ControlDecision::ChangeLaneRight => "change_lane_right",
            ControlDecision::Accelerate => "accelerate",
        }
    }

    /// Uppercase token used in the response-format menu and model replies.
    pub fn menu_token(self) -> &'static str {
        match self {
            ControlDecision::Maintain => "MAINTAIN",
            ControlDecision::Slower => "SLOWER",
            ControlDecision::Stop => "STOP",
            ControlDecision::ChangeLaneLeft => "CHANGE LANES TO LEFT",
            ControlDecision::ChangeLaneRight => "CHANGE LANES TO RIGHT",
            ControlDecision::Accelerate => "ACCELERATE",
        }
    }

    /// True for decisions that reduce the ego's speed.
    pub fn reduces_speed(self) -> bool {
        matches!(self, ControlDecision::Slower | ControlDecision::Stop)
    }
}

impl FromStr for ControlDecision {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        match norm.as_str() {
            "maintain" => Ok(ControlDecision::Maintain),
            "slower" => Ok(ControlDecision::Slower),
            "stop" => Ok(ControlDecision::Stop),
            "change_lane_left" => Ok(ControlDecision::ChangeLaneLeft),
            "change_lane_right" => Ok(ControlDecision::ChangeLaneRight),
            "accelerate" => Ok(ControlDecision::Accelerate),
            _ => Err(format!("unknown control decision: {s:?}")),
        }
    }
}

impl fmt::Display for ControlDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// A single structural or plausibility problem found in a scene.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyScene,
    /// Frame numbers must start at 0 and increase by exactly 1.
    NonContiguousFrames { index: usize, expected: u64, found: u64 },
    DuplicateObjectId { frame: u64, id: u64 },
    /// Dynamic-object speed above the plausibility bound for its kind.
    ImplausibleSpeed { frame: u64, id: u64, speed: f64 },
    NegativeSpeed { frame: u64, id: Option<u64>, speed: f64 },
    PositionOutOfRange { frame: u64, id: u64 },
    HeadingOutOfRange { frame: u64, id: Option<u64>, degrees: f64 },
    LaneWidthOutOfRange { frame: u64, width: f64 },
    BadSpeedLimitValue { frame: u64, id: u64, value: u32 },
}

impl Violation {
    /// Structural violations break the scene representation itself and make
    /// it unserializable. Plausibility violations are deliberately producible
    /// by attack mutators.
    pub fn is_structural(&self) -> bool {
        matches!(
            self,
            Violation::EmptyScene
                | Violation::NonContiguousFrames { .. }
                | Violation::DuplicateObjectId { .. }
        )
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyScene => write!(f, "scene has no events"),
            Violation::NonContiguousFrames { index, expected, found } => write!(
                f,
                "event {index}: expected frame {expected}, found {found}"
            ),
            Violation::DuplicateObjectId { frame, id } => {
                write!(f, "frame {frame}: duplicate object id {id}")
            }
            Violation::ImplausibleSpeed { frame, id, speed } => {
                write!(f, "frame {frame}: object {id} has implausible speed {speed} m/s")
            }
            Violation::NegativeSpeed { frame, id, speed } => match id {
                Some(id) => write!(f, "frame {frame}: object {id} has negative speed {speed}"),
                None => write!(f, "frame {frame}: ego has negative speed {speed}"),
            },
            Violation::PositionOutOfRange { frame, id } => {
                write!(f, "frame {frame}: object {id} outside perception range")
            }
            Violation::HeadingOutOfRange { frame, id, degrees } => match id {
                Some(id) => write!(f, "frame {frame}: object {id} direction {degrees} out of [0,360)"),
                None => write!(f, "frame {frame}: ego heading {degrees} out of [0,360)"),
            },
            Violation::LaneWidthOutOfRange { frame, width } => {
                write!(f, "frame {frame}: lane width {width} outside (2.0, 6.0)")
            }
            Violation::BadSpeedLimitValue { frame, id, value } => {
                write!(f, "frame {frame}: sign {id} has speed limit {value}, not one of 30/50/80/100")
            }
        }
    }
}

fn heading_ok(deg: f64) -> bool {
    deg.is_finite() && (0.0..360.0).contains(&deg)
}

/// Returns every invariant violation in the scene. Empty list = valid.
/// Pure: the same input always yields the same list, in the same order.
pub fn validate_scene(scene: &DrivingScene) -> Vec<Violation> {
    let mut out = Vec::new();
    if scene.events.is_empty() {
        out.push(Violation::EmptyScene);
        return out;
    }
    for (index, event) in scene.events.iter().enumerate() {
        let frame = event.frame;
        if frame != index as u64 {
            out.push(Violation::NonContiguousFrames {
                index,
                expected: index as u64,
                found: frame,
            });
        }
        if !event.ego.speed.is_finite() || event.ego.speed < 0.0 {
            out.push(Violation::NegativeSpeed { frame, id: None, speed: event.ego.speed });
        }
        if !heading_ok(event.ego.heading) {
            out.push(Violation::HeadingOutOfRange { frame, id: None, degrees: event.ego.heading });
        }
        if !(event.lane.lane_width > 2.0 && event.lane.lane_width < 6.0) {
            out.push(Violation::LaneWidthOutOfRange { frame, width: event.lane.lane_width });
        }
        let mut seen = Vec::new();
        for obj in &event.objects {
            let id = obj.id();
            if seen.contains(&id) {
                out.push(Violation::DuplicateObjectId { frame, id });
            } else {
                seen.push(id);
            }
            if !obj.position().in_range() {
                out.push(Violation::PositionOutOfRange { frame, id });
            }
            match obj {
                TrackedObject::Dynamic(d) => {
                    if !d.speed.is_finite() || d.speed < 0.0 {
                        out.push(Violation::NegativeSpeed { frame, id: Some(id), speed: d.speed });
                    } else {
                        let bound = match d.kind {
                            DynamicKind::Pedestrian => MAX_PEDESTRIAN_SPEED,
                            DynamicKind::Vehicle => MAX_VEHICLE_SPEED,
                        };
                        if d.speed > bound {
                            out.push(Violation::ImplausibleSpeed { frame, id, speed: d.speed });
                        }
                    }
                    if !heading_ok(d.direction) {
                        out.push(Violation::HeadingOutOfRange {
                            frame,
                            id: Some(id),
                            degrees: d.direction,
                        });
                    }
                }
                TrackedObject::Static(s) => {
                    if !heading_ok(s.direction) {
                        out.push(Violation::HeadingOutOfRange {
                            frame,
                            id: Some(id),
                            degrees: s.direction,
                        });
                    }
                    if let SignMessage::SpeedLimit(v) = s.message {
                        if !SPEED_LIMIT_VALUES.contains(&v) {
                            out.push(Violation::BadSpeedLimitValue { frame, id, value: v });
                        }
                    }
                }
            }
        }
    }
    out
}

/// True when the scene has no structural violations; plausibility violations
/// are tolerated (adversarial scenes stay representable).
pub fn structurally_valid(scene: &DrivingScene) -> bool {
    validate_scene(scene).iter().all(|v| !v.is_structural())
}
