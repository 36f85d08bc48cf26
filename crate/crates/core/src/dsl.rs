//! Scene file codec and raw log ingestion.
//!
//! The scene file surface syntax is a JSON-shaped structured-log document
//! headed by a `Driving Scene{ ... }` block:
//!
//! ```text
//! Driving Scene{
//!     "Contextual scene": {
//!         "map": "school street",
//!         "time_of_day": "22:00",
//!         "weather": "cloudy_noon"
//!     },
//!     "events": [
//!         {
//!             "frame": 0,
//!             "vehicle_speed": 5,
//!             "heading_direction": "90",
//!             "lane_width": 3.5,
//!             "lane_condition": "right lane change only",
//!             "vehicle_1": {
//!                 "position_right": 3,
//!                 "position_ahead": 5,
//!                 "speed": 4,
//!                 "direction": "90"
//!             }
//!         }
//!     ]
//! }
//! ```
//!
//! Object keys are `vehicle_<id>`, `pedestrian_<id>` and `sign_<id>`. Signs
//! carry a `message` field (`stop`, `yield`, `speed_limit(<kmh>)`); the
//! `sign_<id>`/`message` spelling is this crate's choice of lexical form.
//! The parser tolerates trailing commas and a missing `Driving Scene` header;
//! the serializer always emits the canonical form above with stable key order
//! and fixed number formatting (integers without a decimal point, reals with
//! at most two decimal places).
//!
//! Raw per-frame logs are newline-delimited records (`t`, `TO`, `EP`, `LC`,
//! `EI`); see [`LogRecord`]. World positions in logs are converted to
//! ego-relative coordinates with, for ego heading `h` (degrees) and world
//! deltas `(du, dv)`:
//!
//! ```text
//! longitudinal =  cos(h)·du + sin(h)·dv
//! lateral      = -sin(h)·du + cos(h)·dv
//! ```

use crate::scene::{
    ContextualData, DrivingScene, DynamicKind, DynamicObject, EgoState, Event, LaneCondition,
    LaneSide, MapKind, RelPosition, SignMessage, StaticObject, TimeOfDay, TrackedObject,
    Violation, WeatherPreset,
};
use serde_json::Value as Json;
use std::fmt;
use thiserror::Error;

/// Maximum nesting depth accepted by the parser.
const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at {line}:{col}: expected {expected}, found {found:?}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Error)]
pub enum DslError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("scene violates structural invariants: {}", format_violations(.0))]
    Validation(Vec<Violation>),
}

fn format_violations(vs: &[Violation]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("empty log: no records")]
    Empty,
    #[error("record {index}: timestamp {t} not strictly greater than previous {prev}")]
    NonMonotoneTimestamps { index: usize, t: f64, prev: f64 },
    #[error("record {index}: environment info drifted ({field}: {first:?} -> {found:?})")]
    ContextDrift { index: usize, field: &'static str, first: String, found: String },
    #[error("record {index}: unknown tracked-object label {label:?}")]
    UnknownLabel { index: usize, label: String },
    #[error("record {index}: {message}")]
    BadRecord { index: usize, message: String },
    #[error("line {line}: not a valid log record: {message}")]
    BadLine { line: usize, message: String },
}

// ---------------------------------------------------------------------------
// number formatting

/// Fixed number formatting: round to 2 decimal places, print integers without
/// a decimal point and reals without trailing zeros.
pub fn fmt_num(x: f64) -> String {
    let r = (x * 100.0).round() / 100.0;
    let r = if r == 0.0 { 0.0 } else { r }; // normalize -0
    if r == r.trunc() && r.abs() < 1e15 {
        format!("{}", r as i64)
    } else {
        let s = format!("{r:.2}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

// ---------------------------------------------------------------------------
// lexer / generic value tree

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: u32,
    col: u32,
}

#[derive(Debug, Clone)]
enum Val {
    Str(String),
    Num(f64),
    // accepted by the lexer for error-message quality; no scene field is boolean
    #[allow(dead_code)]
    Bool(bool),
    Null,
    Obj(Vec<(String, Sp)>),
    Arr(Vec<Sp>),
}

#[derive(Debug, Clone)]
struct Sp {
    val: Val,
    pos: Pos,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { chars: src.chars().peekable(), pos: Pos { line: 1, col: 1 } }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn err(&self, expected: &str, found: impl Into<String>) -> ParseError {
        ParseError {
            line: self.pos.line,
            col: self.pos.col,
            expected: expected.to_string(),
            found: found.into(),
        }
    }

    fn found_desc(&mut self) -> String {
        match self.peek() {
            Some(c) => c.to_string(),
            None => "end of input".to_string(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            let found = self.found_desc();
            Err(self.err(&format!("'{c}'"), found))
        }
    }

    fn string(&mut self) -> Result<String, ParseError> {
        self.expect('"')?;
        let mut out = String::new();
        loop {
            match self.bump() {
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some(c) => out.push(c),
                    None => return Err(self.err("escape character", "end of input")),
                },
                Some('\n') => return Err(self.err("closing '\"'", "newline")),
                Some(c) => out.push(c),
                None => return Err(self.err("closing '\"'", "end of input")),
            }
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        let mut s = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || "+-.eE".contains(c)) {
            s.push(self.bump().unwrap());
        }
        s.parse::<f64>().map_err(|_| ParseError {
            line: start.line,
            col: start.col,
            expected: "number".to_string(),
            found: s,
        })
    }

    fn value(&mut self, depth: usize) -> Result<Sp, ParseError> {
        if depth > MAX_DEPTH {
            let found = self.found_desc();
            return Err(self.err("value at shallower nesting", found));
        }
        self.skip_ws();
        let pos = self.pos;
        let val = match self.peek() {
            Some('"') => Val::Str(self.string()?),
            Some('{') => {
                self.bump();
                let mut fields = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some('}') => {
                            self.bump();
                            break;
                        }
                        Some('"') => {
                            let key = self.string()?;
                            self.expect(':')?;
                            let v = self.value(depth + 1)?;
                            fields.push((key, v));
                            self.skip_ws();
                            if self.peek() == Some(',') {
                                self.bump();
                            }
                        }
                        _ => {
                            let found = self.found_desc();
                            return Err(self.err("'\"' or '}'", found));
                        }
                    }
                }
                Val::Obj(fields)
            }
            Some('[') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(']') => {
                            self.bump();
                            break;
                        }
                        Some(',') => {
                            self.bump();
                        }
                        Some(_) => items.push(self.value(depth + 1)?),
                        None => {
                            return Err(self.err("']' or value", "end of input"));
                        }
                    }
                }
                Val::Arr(items)
            }
            Some(c) if c.is_ascii_digit() || c == '-' || c == '+' => Val::Num(self.number()?),
            Some(c) if c.is_ascii_alphabetic() => {
                let mut word = String::new();
                while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
                    word.push(self.bump().unwrap());
                }
                match word.as_str() {
                    "true" => Val::Bool(true),
                    "false" => Val::Bool(false),
                    "null" => Val::Null,
                    _ => {
                        return Err(ParseError {
                            line: pos.line,
                            col: pos.col,
                            expected: "value".to_string(),
                            found: word,
                        })
                    }
                }
            }
            other => {
                let found = match other {
                    Some(c) => c.to_string(),
                    None => "end of input".to_string(),
                };
                return Err(self.err("value", found));
            }
        };
        Ok(Sp { val, pos })
    }
}

// ---------------------------------------------------------------------------
// parse_scene

struct SceneReader;

impl SceneReader {
    fn err(pos: Pos, expected: impl Into<String>, found: impl Into<String>) -> ParseError {
        ParseError { line: pos.line, col: pos.col, expected: expected.into(), found: found.into() }
    }

    fn as_obj<'a>(sp: &'a Sp, what: &str) -> Result<&'a Vec<(String, Sp)>, ParseError> {
        match &sp.val {
            Val::Obj(fields) => Ok(fields),
            other => Err(Self::err(sp.pos, format!("{what} object"), kind_name(other))),
        }
    }

    fn as_str<'a>(sp: &'a Sp, what: &str) -> Result<&'a str, ParseError> {
        match &sp.val {
            Val::Str(s) => Ok(s),
            other => Err(Self::err(sp.pos, format!("{what} string"), kind_name(other))),
        }
    }

    fn as_num(sp: &Sp, what: &str) -> Result<f64, ParseError> {
        match &sp.val {
            Val::Num(n) => Ok(*n),
            // directions are serialized as quoted numerals
            Val::Str(s) => s.trim().parse::<f64>().map_err(|_| {
                Self::err(sp.pos, format!("{what} number"), s.clone())
            }),
            other => Err(Self::err(sp.pos, format!("{what} number"), kind_name(other))),
        }
    }

    fn field<'a>(fields: &'a [(String, Sp)], key: &str) -> Option<&'a Sp> {
        fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    fn require<'a>(
        fields: &'a [(String, Sp)],
        key: &str,
        pos: Pos,
    ) -> Result<&'a Sp, ParseError> {
        Self::field(fields, key)
            .ok_or_else(|| Self::err(pos, format!("field {key:?}"), "missing field"))
    }

    fn contextual(sp: &Sp) -> Result<ContextualData, ParseError> {
        let fields = Self::as_obj(sp, "contextual")?;
        for (k, v) in fields {
            if !matches!(k.as_str(), "map" | "time_of_day" | "weather") {
                return Err(Self::err(v.pos, "one of map/time_of_day/weather", k.clone()));
            }
        }
        let map_sp = Self::require(fields, "map", sp.pos)?;
        let map: MapKind = Self::as_str(map_sp, "map")?
            .parse()
            .map_err(|e: String| Self::err(map_sp.pos, "map kind", e))?;
        let time_sp = Self::require(fields, "time_of_day", sp.pos)?;
        let time_of_day: TimeOfDay = Self::as_str(time_sp, "time_of_day")?
            .parse()
            .map_err(|e: String| Self::err(time_sp.pos, "HH:MM time", e))?;
        let weather_sp = Self::require(fields, "weather", sp.pos)?;
        let weather: WeatherPreset = Self::as_str(weather_sp, "weather")?
            .parse()
            .map_err(|e: String| Self::err(weather_sp.pos, "weather preset", e))?;
        Ok(ContextualData { map, time_of_day, weather })
    }

    fn lane_condition(text: &str, pos: Pos) -> Result<Vec<LaneSide>, ParseError> {
        let t = text.trim().to_ascii_lowercase();
        let options = match t.as_str() {
            "no lane change" => vec![],
            "left lane change only" => vec![LaneSide::Left],
            "right lane change only" => vec![LaneSide::Right],
            "left and right lane change" | "both lane changes" | "both" => {
                vec![LaneSide::Left, LaneSide::Right]
            }
            _ => return Err(Self::err(pos, "lane condition phrase", text)),
        };
        Ok(options)
    }

    /// Parses `position_left`/`position_right` + `position_ahead`/`position_behind`
    /// into a signed ego-relative position.
    fn position(fields: &[(String, Sp)], pos: Pos) -> Result<RelPosition, ParseError> {
        let left = Self::field(fields, "position_left");
        let right = Self::field(fields, "position_right");
        let lateral = match (left, right) {
            (Some(l), None) => -Self::as_num(l, "position_left")?,
            (None, Some(r)) => Self::as_num(r, "position_right")?,
            (None, None) => {
                return Err(Self::err(pos, "position_left or position_right", "neither present"))
            }
            (Some(_), Some(r)) => {
                return Err(Self::err(r.pos, "only one lateral position field", "both present"))
            }
        };
        let ahead = Self::field(fields, "position_ahead");
        let behind = Self::field(fields, "position_behind");
        let longitudinal = match (ahead, behind) {
            (Some(a), None) => Self::as_num(a, "position_ahead")?,
            (None, Some(b)) => -Self::as_num(b, "position_behind")?,
            (None, None) => {
                return Err(Self::err(pos, "position_ahead or position_behind", "neither present"))
            }
            (Some(_), Some(b)) => {
                return Err(Self::err(b.pos, "only one longitudinal position field", "both present"))
            }
        };
        Ok(RelPosition::new(lateral, longitudinal))
    }

    fn dynamic_object(
        id: u64,
        kind: DynamicKind,
        sp: &Sp,
    ) -> Result<TrackedObject, ParseError> {
        let fields = Self::as_obj(sp, "object")?;
        for (k, v) in fields {
            if !matches!(
                k.as_str(),
                "position_left" | "position_right" | "position_ahead" | "position_behind"
                    | "speed" | "direction"
            ) {
                return Err(Self::err(v.pos, "dynamic-object field", k.clone()));
            }
        }
        let position = Self::position(fields, sp.pos)?;
        let speed = Self::as_num(Self::require(fields, "speed", sp.pos)?, "speed")?;
        let direction =
            Self::as_num(Self::require(fields, "direction", sp.pos)?, "direction")?;
        Ok(TrackedObject::Dynamic(DynamicObject { id, kind, position, speed, direction }))
    }

    fn static_object(id: u64, sp: &Sp) -> Result<TrackedObject, ParseError> {
        let fields = Self::as_obj(sp, "sign")?;
        for (k, v) in fields {
            if !matches!(
                k.as_str(),
                "position_left" | "position_right" | "position_ahead" | "position_behind"
                    | "direction" | "message"
            ) {
                return Err(Self::err(v.pos, "sign field", k.clone()));
            }
        }
        let position = Self::position(fields, sp.pos)?;
        let direction =
            Self::as_num(Self::require(fields, "direction", sp.pos)?, "direction")?;
        let msg_sp = Self::require(fields, "message", sp.pos)?;
        let message: SignMessage = Self::as_str(msg_sp, "message")?
            .parse()
            .map_err(|e: String| Self::err(msg_sp.pos, "sign message", e))?;
        Ok(TrackedObject::Static(StaticObject { id, position, direction, message }))
    }

    fn event(sp: &Sp) -> Result<Event, ParseError> {
        let fields = Self::as_obj(sp, "event")?;
        let frame = Self::as_num(Self::require(fields, "frame", sp.pos)?, "frame")? as u64;
        let speed =
            Self::as_num(Self::require(fields, "vehicle_speed", sp.pos)?, "vehicle_speed")?;
        let heading = Self::as_num(
            Self::require(fields, "heading_direction", sp.pos)?,
            "heading_direction",
        )?;
        let lane_width = match Self::field(fields, "lane_width") {
            Some(w) => Self::as_num(w, "lane_width")?,
            None => 3.5, // standard lane when the document omits the width
        };
        let lc_sp = Self::require(fields, "lane_condition", sp.pos)?;
        let options = Self::lane_condition(Self::as_str(lc_sp, "lane_condition")?, lc_sp.pos)?;

        let mut objects = Vec::new();
        for (key, v) in fields {
            match key.as_str() {
                "frame" | "vehicle_speed" | "heading_direction" | "lane_width"
                | "lane_condition" => continue,
                _ => {}
            }
            let parse_id = |prefix: &str| -> Option<u64> {
                key.strip_prefix(prefix).and_then(|s| s.parse::<u64>().ok())
            };
            let obj = if let Some(id) = parse_id("vehicle_") {
                Self::dynamic_object(id, DynamicKind::Vehicle, v)?
            } else if let Some(id) = parse_id("pedestrian_") {
                Self::dynamic_object(id, DynamicKind::Pedestrian, v)?
            } else if let Some(id) = parse_id("sign_") {
                Self::static_object(id, v)?
            } else {
                return Err(Self::err(
                    v.pos,
                    "vehicle_<id>, pedestrian_<id> or sign_<id>",
                    key.clone(),
                ));
            };
            objects.push(obj);
        }
        Ok(Event {
            frame,
            ego: EgoState { speed, heading },
            lane: LaneCondition::new(lane_width, options),
            objects,
        })
    }

    fn scene(sp: &Sp) -> Result<DrivingScene, ParseError> {
        let fields = Self::as_obj(sp, "driving scene")?;
        for (k, v) in fields {
            if !matches!(k.as_str(), "Contextual scene" | "events") {
                return Err(Self::err(v.pos, "\"Contextual scene\" or \"events\"", k.clone()));
            }
        }
        let contextual = Self::contextual(Self::require(fields, "Contextual scene", sp.pos)?)?;
        let events_sp = Self::require(fields, "events", sp.pos)?;
        let raw_events = match &events_sp.val {
            Val::Arr(items) => items,
            other => {
                return Err(Self::err(events_sp.pos, "events array", kind_name(other)));
            }
        };
        let mut events = Vec::with_capacity(raw_events.len());
        for e in raw_events {
            events.push(Self::event(e)?);
        }
        Ok(DrivingScene { contextual, events })
    }
}

fn kind_name(v: &Val) -> &'static str {
    match v {
        Val::Str(_) => "string",
        Val::Num(_) => "number",
        Val::Bool(_) => "boolean",
        Val::Null => "null",
        Val::Obj(_) => "object",
        Val::Arr(_) => "array",
    }
}

/// Parses a scene document. Total over arbitrary input: returns an error,
/// never panics.
pub fn parse_scene(text: &str) -> Result<DrivingScene, DslError> {
    let mut lx = Lexer::new(text);
    lx.skip_ws();
    // optional "Driving Scene" header before the opening brace
    while matches!(lx.peek(), Some(c) if c.is_ascii_alphabetic()) {
        let mut word = String::new();
        while matches!(lx.peek(), Some(c) if c.is_ascii_alphabetic()) {
            word.push(lx.bump().unwrap());
        }
        if !matches!(word.to_ascii_lowercase().as_str(), "driving" | "scene") {
            let found = word.clone();
            return Err(lx.err("\"Driving Scene\" header or '{'", found).into());
        }
        lx.skip_ws();
    }
    let root = lx.value(0)?;
    lx.skip_ws();
    if lx.peek().is_some() {
        let found = lx.found_desc();
        return Err(lx.err("end of document", found).into());
    }
    let scene = SceneReader::scene(&root)?;
    let structural: Vec<Violation> = crate::scene::validate_scene(&scene)
        .into_iter()
        .filter(|v| v.is_structural())
        .collect();
    if !structural.is_empty() {
        return Err(DslError::Validation(structural));
    }
    Ok(scene)
}

// ---------------------------------------------------------------------------
// serialize_scene

struct Writer {
    out: String,
    indent: usize,
}

impl Writer {
    fn line(&mut self, s: &str) {
        for _ in 0..self.indent {
            self.out.push_str("    ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }
}

fn lane_phrase(lane: &LaneCondition) -> &'static str {
    match (lane.allows(LaneSide::Left), lane.allows(LaneSide::Right)) {
        (false, false) => "no lane change",
        (true, false) => "left lane change only",
        (false, true) => "right lane change only",
        (true, true) => "left and right lane change",
    }
}

fn write_position(w: &mut Writer, pos: RelPosition) {
    // pick the side from the rounded value, not the raw one: a tiny negative
    // like -1e-15 prints as 0 and must canonicalize to the same key that a
    // reparsed 0 would, or serialization would not be a fixpoint
    let lat = (pos.lateral * 100.0).round() / 100.0;
    let lat_key = if lat < 0.0 { "position_left" } else { "position_right" };
    w.line(&format!("\"{lat_key}\": {},", fmt_num(lat.abs())));
    let long = (pos.longitudinal * 100.0).round() / 100.0;
    let long_key = if long < 0.0 { "position_behind" } else { "position_ahead" };
    w.line(&format!("\"{long_key}\": {},", fmt_num(long.abs())));
}

/// Serializes a scene to its canonical document. Deterministic: two calls on
/// the same scene are byte-identical. Fails if the scene breaks structural
/// invariants (adversarial scenes with plausibility violations serialize
/// fine).
pub fn serialize_scene(scene: &DrivingScene) -> Result<String, DslError> {
    let structural: Vec<Violation> = crate::scene::validate_scene(scene)
        .into_iter()
        .filter(|v| v.is_structural())
        .collect();
    if !structural.is_empty() {
        return Err(DslError::Validation(structural));
    }

    let mut w = Writer { out: String::new(), indent: 0 };
    w.line("Driving Scene{");
    w.indent = 1;
    w.line("\"Contextual scene\": {");
    w.indent = 2;
    w.line(&format!("\"map\": \"{}\",", scene.contextual.map.display_name()));
    w.line(&format!("\"time_of_day\": \"{}\",", scene.contextual.time_of_day));
    w.line(&format!("\"weather\": \"{}\"", scene.contextual.weather.token()));
    w.indent = 1;
    w.line("},");
    w.line("\"events\": [");
    w.indent = 2;
    for (i, event) in scene.events.iter().enumerate() {
        w.line("{");
        w.indent = 3;
        w.line(&format!("\"frame\": {},", event.frame));
        w.line(&format!("\"vehicle_speed\": {},", fmt_num(event.ego.speed)));
        w.line(&format!("\"heading_direction\": \"{}\",", fmt_num(event.ego.heading)));
        w.line(&format!("\"lane_width\": {},", fmt_num(event.lane.lane_width)));
        let lc_comma = if event.objects.is_empty() { "" } else { "," };
        w.line(&format!("\"lane_condition\": \"{}\"{lc_comma}", lane_phrase(&event.lane)));
        for (j, obj) in event.objects.iter().enumerate() {
            let last = j + 1 == event.objects.len();
            match obj {
                TrackedObject::Dynamic(d) => {
                    w.line(&format!("\"{}_{}\": {{", d.kind.label(), d.id));
                    w.indent = 4;
                    write_position(&mut w, d.position);
                    w.line(&format!("\"speed\": {},", fmt_num(d.speed)));
                    w.line(&format!("\"direction\": \"{}\"", fmt_num(d.direction)));
                }
                TrackedObject::Static(s) => {
                    w.line(&format!("\"sign_{}\": {{", s.id));
                    w.indent = 4;
                    write_position(&mut w, s.position);
                    w.line(&format!("\"direction\": \"{}\",", fmt_num(s.direction)));
                    w.line(&format!("\"message\": \"{}\"", s.message));
                }
            }
            w.indent = 3;
            w.line(if last { "}" } else { "}," });
        }
        w.indent = 2;
        w.line(if i + 1 == scene.events.len() { "}" } else { "}," });
    }
    w.indent = 1;
    w.line("]");
    w.indent = 0;
    w.line("}");
    Ok(w.out)
}

// ---------------------------------------------------------------------------
// raw log ingestion

#[derive(Debug, Clone, PartialEq)]
pub struct TrackedEntry {
    pub label: String,
    /// World position (u, v) in the log's planar frame.
    pub x: f64,
    pub y: f64,
    /// Facing direction, degrees.
    pub heading: f64,
    /// m/s. Zero for static objects.
    pub speed: f64,
    /// Sign payload, when the label is a traffic sign.
    pub message: Option<String>,
    /// Tracking id; when absent, the 1-based position in the TO list is used.
    pub id: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub t: f64,
    pub tracked: Vec<TrackedEntry>,
    pub ego_x: f64,
    pub ego_y: f64,
    pub ego_heading: f64,
    pub ego_speed: f64,
    pub lane_width: f64,
    pub lane_options: Vec<LaneSide>,
    pub weather: String,
    pub map: String,
    pub time: String,
}

fn norm_key(k: &str) -> String {
    k.to_ascii_lowercase().replace([' ', '_', '-'], "")
}

fn get<'a>(obj: &'a serde_json::Map<String, Json>, want: &str) -> Option<&'a Json> {
    obj.iter().find(|(k, _)| norm_key(k) == want).map(|(_, v)| v)
}

fn num_of(v: &Json) -> Option<f64> {
    match v {
        Json::Number(n) => n.as_f64(),
        // tolerate unit suffixes like "3m/s" or "5m"
        Json::String(s) => {
            let t = s.trim();
            let cut = t
                .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-' || c == '+'))
                .unwrap_or(t.len());
            t[..cut].parse::<f64>().ok()
        }
        _ => None,
    }
}

/// Position sample shape: `[[x, y], heading_degrees]`.
fn pose_of(v: &Json) -> Option<(f64, f64, f64)> {
    let arr = v.as_array()?;
    if arr.len() != 2 {
        return None;
    }
    let xy = arr[0].as_array()?;
    if xy.len() != 2 {
        return None;
    }
    Some((num_of(&xy[0])?, num_of(&xy[1])?, num_of(&arr[1])?))
}

fn bad(index: usize, message: impl Into<String>) -> IngestError {
    IngestError::BadRecord { index, message: message.into() }
}

fn record_from_json(index: usize, v: &Json) -> Result<LogRecord, IngestError> {
    let obj = v.as_object().ok_or_else(|| bad(index, "record is not an object"))?;
    let t = get(obj, "t")
        .and_then(num_of)
        .ok_or_else(|| bad(index, "missing numeric field \"t\""))?;

    let ep = get(obj, "ep")
        .and_then(Json::as_object)
        .ok_or_else(|| bad(index, "missing \"EP\" object"))?;
    let (ego_x, ego_y, ego_heading) = get(ep, "position")
        .and_then(pose_of)
        .ok_or_else(|| bad(index, "EP.position must be [[x, y], heading]"))?;
    let ego_speed = get(ep, "speed")
        .and_then(num_of)
        .ok_or_else(|| bad(index, "missing EP.speed"))?;

    let lc = get(obj, "lc")
        .and_then(Json::as_object)
        .ok_or_else(|| bad(index, "missing \"LC\" object"))?;
    let lane_width = get(lc, "lanewidth")
        .and_then(num_of)
        .ok_or_else(|| bad(index, "missing LC lane width"))?;
    let lane_options = match get(lc, "lanechangeoption") {
        Some(Json::Array(items)) => {
            let mut opts = Vec::new();
            for item in items {
                match item.as_str().map(|s| s.trim().to_ascii_lowercase()).as_deref() {
                    Some("left") => opts.push(LaneSide::Left),
                    Some("right") => opts.push(LaneSide::Right),
                    _ => return Err(bad(index, "LC lane change option must be left/right")),
                }
            }
            opts
        }
        Some(_) => return Err(bad(index, "LC lane change option must be an array")),
        None => Vec::new(),
    };

    let ei = get(obj, "ei")
        .and_then(Json::as_object)
        .ok_or_else(|| bad(index, "missing \"EI\" object"))?;
    let weather = get(ei, "weathercondition")
        .or_else(|| get(ei, "weather"))
        .and_then(Json::as_str)
        .ok_or_else(|| bad(index, "missing EI weather"))?
        .to_string();
    let map = get(ei, "map")
        .and_then(Json::as_str)
        .ok_or_else(|| bad(index, "missing EI map"))?
        .to_string();
    let time = get(ei, "time")
        .and_then(Json::as_str)
        .ok_or_else(|| bad(index, "missing EI time"))?
        .to_string();

    let mut tracked = Vec::new();
    if let Some(to) = get(obj, "to") {
        let items = to
            .as_array()
            .ok_or_else(|| bad(index, "\"TO\" must be an array"))?;
        for item in items {
            let entry = item
                .as_object()
                .ok_or_else(|| bad(index, "TO entry is not an object"))?;
            let label = get(entry, "label")
                .and_then(Json::as_str)
                .ok_or_else(|| bad(index, "TO entry missing label"))?
                .to_string();
            let (x, y, heading) = get(entry, "position")
                .and_then(pose_of)
                .ok_or_else(|| bad(index, "TO position must be [[x, y], heading]"))?;
            let speed = get(entry, "speed").and_then(num_of).unwrap_or(0.0);
            let message = get(entry, "message")
                .and_then(Json::as_str)
                .map(|s| s.to_string());
            let id = get(entry, "id").and_then(num_of).map(|n| n as u64);
            tracked.push(TrackedEntry { label, x, y, heading, speed, message, id });
        }
    }

    Ok(LogRecord {
        t,
        tracked,
        ego_x,
        ego_y,
        ego_heading,
        ego_speed,
        lane_width,
        lane_options,
        weather,
        map,
        time,
    })
}

/// Parses newline-delimited log records (one JSON object per line; blank
/// lines skipped).
pub fn parse_log_lines(text: &str) -> Result<Vec<LogRecord>, IngestError> {
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let json: Json = serde_json::from_str(line).map_err(|e| IngestError::BadLine {
            line: lineno + 1,
            message: e.to_string(),
        })?;
        records.push(record_from_json(records.len(), &json)?);
    }
    Ok(records)
}

/// Converts a world position/heading into the ego-relative frame.
pub fn world_to_relative(
    ego_x: f64,
    ego_y: f64,
    ego_heading_deg: f64,
    x: f64,
    y: f64,
) -> RelPosition {
    let h = ego_heading_deg.to_radians();
    let du = x - ego_x;
    let dv = y - ego_y;
    RelPosition::new(
        -h.sin() * du + h.cos() * dv,
        h.cos() * du + h.sin() * dv,
    )
}

/// Builds a scene from ordered raw records. Contextual data comes from the
/// first record's EI; any later EI drift is an error, as is an unknown
/// tracked-object label (schema drift is surfaced, not dropped).
pub fn ingest_log(records: &[LogRecord]) -> Result<DrivingScene, IngestError> {
    let first = records.first().ok_or(IngestError::Empty)?;

    for (index, rec) in records.iter().enumerate().skip(1) {
        let prev = records[index - 1].t;
        if rec.t <= prev {
            return Err(IngestError::NonMonotoneTimestamps { index, t: rec.t, prev });
        }
        for (field, a, b) in [
            ("weather", &first.weather, &rec.weather),
            ("map", &first.map, &rec.map),
            ("time", &first.time, &rec.time),
        ] {
            if norm_key(a) != norm_key(b) {
                return Err(IngestError::ContextDrift {
                    index,
                    field,
                    first: a.clone(),
                    found: b.clone(),
                });
            }
        }
    }

    let map: MapKind = first
        .map
        .parse()
        .map_err(|e: String| bad(0, e))?;
    let weather: WeatherPreset = first
        .weather
        .parse()
        .map_err(|e: String| bad(0, e))?;
    let time_of_day: TimeOfDay = first
        .time
        .parse()
        .map_err(|e: String| bad(0, e))?;

    let mut events = Vec::with_capacity(records.len());
    for (index, rec) in records.iter().enumerate() {
        let mut objects = Vec::with_capacity(rec.tracked.len());
        for (slot, entry) in rec.tracked.iter().enumerate() {
            let id = entry.id.unwrap_or(slot as u64 + 1);
            let position =
                world_to_relative(rec.ego_x, rec.ego_y, rec.ego_heading, entry.x, entry.y);
            let obj = match norm_key(&entry.label).as_str() {
                "vehicle" | "car" => TrackedObject::Dynamic(DynamicObject {
                    id,
                    kind: DynamicKind::Vehicle,
                    position,
                    speed: entry.speed,
                    direction: entry.heading,
                }),
                "pedestrian" => TrackedObject::Dynamic(DynamicObject {
                    id,
                    kind: DynamicKind::Pedestrian,
                    position,
                    speed: entry.speed,
                    direction: entry.heading,
                }),
                "trafficsign" | "sign" | "stopsign" | "speedlimitsign" | "yieldsign" => {
                    let message = match entry.message.as_deref() {
                        Some(m) => m
                            .parse::<SignMessage>()
                            .map_err(|e: String| bad(index, e))?,
                        None => match norm_key(&entry.label).as_str() {
                            "stopsign" => SignMessage::Stop,
                            "yieldsign" => SignMessage::Yield,
                            _ => return Err(bad(index, "traffic sign missing message")),
                        },
                    };
                    TrackedObject::Static(StaticObject {
                        id,
                        position,
                        direction: entry.heading,
                        message,
                    })
                }
                _ => {
                    return Err(IngestError::UnknownLabel {
                        index,
                        label: entry.label.clone(),
                    })
                }
            };
            objects.push(obj);
        }
        events.push(Event {
            frame: index as u64,
            ego: EgoState { speed: rec.ego_speed, heading: rec.ego_heading },
            lane: LaneCondition::new(rec.lane_width, rec.lane_options.clone()),
            objects,
        });
    }

    Ok(DrivingScene {
        contextual: ContextualData { map, time_of_day, weather },
        events,
    })
}

impl fmt::Display for DrivingScene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match serialize_scene(self) {
            Ok(s) => f.write_str(&s),
            Err(_) => f.write_str("<structurally invalid scene>"),
        }
    }
}
