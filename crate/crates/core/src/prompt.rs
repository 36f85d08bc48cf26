//! Prompt engine: renders scenes into the natural-language description
//! template, assembles the system prompt (role/goal, the three-consistency
//! driving instructions, response format) and builds complete queries.
//!
//! The exact template wording is pinned by golden files under
//! `crates/core/golden/`; regenerate them with `GOLDEN_UPDATE=1 cargo test`.

use crate::dsl::fmt_num;
use crate::scene::{
    ControlDecision, DrivingScene, DynamicKind, LaneSide, SignMessage, TrackedObject,
};
use std::fmt::Write as _;
use thiserror::Error;

/// The four driving-instruction sentences (contextual, spatial, temporal
/// consistency checks and the action rule). Quoted verbatim, including the
/// original "inconsistecies" spelling, so scripted replies and ablation
/// diffs stay stable.
pub const INSTRUCTION_SENTENCES: [&str; 4] = [
    "Be cautious of types and rationale of traffic signs by relating to your driving location.",
    "Be cautious in scenarios when the change of vehicle or pedestrian positions is not consistent with their speed or direction.",
    "Be cautious in scenarios where the vehicles' or pedestrians' positions, or labels are rapidly changing or suddenly missing.",
    "When inconsistecies are detected, use history frames to predict detected objects' paths and speeds, and use this information while making decisions.",
];

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct PromptConfig {
    /// Ablation switch: include the four consistency instructions.
    pub include_driving_instruction: bool,
    /// How many trailing frames of the scene go into the description.
    pub history_frames: usize,
    /// Optional extra note about local traffic rules.
    pub locale_rules_note: Option<String>,
}

impl Default for PromptConfig {
    fn default() -> Self {
        PromptConfig {
            include_driving_instruction: true,
            history_frames: 7,
            locale_rules_note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub system_prompt: String,
    pub user_message: String,
    pub decision_vocabulary: Vec<String>,
}

/// Inclusive frame window; `last` is the decision frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameWindow {
    pub first: usize,
    pub last: usize,
}

impl FrameWindow {
    /// The trailing `n` frames of the scene (all frames when n exceeds the
    /// scene length).
    pub fn last_n(scene: &DrivingScene, n: usize) -> Self {
        let last = scene.last_frame();
        FrameWindow { first: (last + 1).saturating_sub(n.max(1)), last }
    }

    pub fn all(scene: &DrivingScene) -> Self {
        FrameWindow { first: 0, last: scene.last_frame() }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("frame window {first}..={last} outside the scene's {len} frames")]
    WindowOutOfRange { first: usize, last: usize, len: usize },
    #[error("history_frames must be >= 1")]
    EmptyWindow,
}

// ---------------------------------------------------------------------------
// scene rendering

fn cardinal(deg: f64) -> Option<&'static str> {
    for (name, at) in [("east", 0.0), ("north", 90.0), ("west", 180.0), ("south", 270.0)] {
        let mut d = (deg - at).abs() % 360.0;
        if d > 180.0 {
            d = 360.0 - d;
        }
        if d <= 1.0 {
            return Some(name);
        }
    }
    None
}

/// "north" when within 1° of a cardinal direction, else degrees.
fn heading_phrase(deg: f64) -> String {
    match cardinal(deg) {
        Some(name) => name.to_string(),
        None => format!("in the {}\u{b0} direction", fmt_num(deg)),
    }
}

/// "in the north (90°) direction" or "in the 47° direction".
fn moving_phrase(deg: f64) -> String {
    match cardinal(deg) {
        Some(name) => format!("in the {name} ({}\u{b0}) direction", fmt_num(deg)),
        None => format!("in the {}\u{b0} direction", fmt_num(deg)),
    }
}

fn day_period(hour: u8) -> &'static str {
    match hour {
        0..=5 | 21..=23 => "night",
        6..=11 => "morning",
        12..=13 => "noon",
        14..=17 => "afternoon",
        _ => "evening",
    }
}

fn lane_sentence(left: bool, right: bool) -> &'static str {
    match (left, right) {
        (true, true) => "You can change to both the left and right lanes.",
        (true, false) => "You can only change to your left lane.",
        (false, true) => "You can only change to your right lane.",
        (false, false) => "You cannot change lanes.",
    }
}

fn position_phrase(lateral: f64, longitudinal: f64) -> String {
    let lat = if lateral < 0.0 {
        format!("positioned on the left at {}m", fmt_num(-lateral))
    } else if lateral > 0.0 {
        format!("positioned on the right at {}m", fmt_num(lateral))
    } else {
        "positioned in your lane".to_string()
    };
    let long = if longitudinal < 0.0 {
        format!("position behind at {}m", fmt_num(-longitudinal))
    } else {
        format!("position ahead at {}m", fmt_num(longitudinal))
    };
    format!("{lat}, {long}")
}

fn sign_name(message: SignMessage) -> String {
    match message {
        SignMessage::Stop => "A stop sign".to_string(),
        SignMessage::SpeedLimit(v) => format!("A speed limit sign of {v} km/h"),
        SignMessage::Yield => "A yield sign".to_string(),
    }
}

fn object_sentences(out: &mut String, obj: &TrackedObject) {
    match obj {
        TrackedObject::Dynamic(d) => {
            let noun = match d.kind {
                DynamicKind::Vehicle => "Vehicle",
                DynamicKind::Pedestrian => "Pedestrian",
            };
            let _ = write!(
                out,
                " {noun} (id:{}) is {}, and at a speed of {} m/s. It is moving {}.",
                d.id,
                position_phrase(d.position.lateral, d.position.longitudinal),
                fmt_num(d.speed),
                moving_phrase(d.direction),
            );
        }
        TrackedObject::Static(s) => {
            let _ = write!(
                out,
                " {} (id:{}) is {}.",
                sign_name(s.message),
                s.id,
                position_phrase(s.position.lateral, s.position.longitudinal),
            );
        }
    }
}

/// Renders the window of a scene into the fixed description template:
/// contextual opening sentence, then one "At time k" paragraph per frame.
/// Deterministic; no numeral appears that is not a scene field.
pub fn render_scene_description(
    scene: &DrivingScene,
    window: FrameWindow,
) -> Result<String, PromptError> {
    if window.first > window.last || window.last >= scene.events.len() {
        return Err(PromptError::WindowOutOfRange {
            first: window.first,
            last: window.last,
            len: scene.events.len(),
        });
    }
    let ctx = &scene.contextual;
    let mut out = format!(
        "This scene takes place on a {} during the {} at {}. The weather conditions are {}.\n",
        ctx.map.display_name(),
        day_period(ctx.time_of_day.hour()),
        ctx.time_of_day,
        ctx.weather.display_name(),
    );
    for event in &scene.events[window.first..=window.last] {
        let _ = write!(
            out,
            "\nAt time {}, your speed is {} m/s, heading {}. {}",
            event.frame,
            fmt_num(event.ego.speed),
            heading_phrase(event.ego.heading),
            lane_sentence(event.lane.allows(LaneSide::Left), event.lane.allows(LaneSide::Right)),
        );
        for obj in &event.objects {
            object_sentences(&mut out, obj);
        }
        out.push('\n');
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// system prompt assembly

const ROLE_GOAL: &str = "You are an experienced driver following a list of driving instructions. \
Your driving instructions are: obey the local traffic laws, arrive at the destination effectively, \
and make a control decision for the last frame of the scene description. \
Consider the traffic laws at your geographical location, but you may ignore the traffic laws \
only if following the laws cannot ensure the safety of the ego vehicle.";

/// Role/goal preamble, optionally the four consistency instructions, then
/// the response format. Deterministic; the two ablation arms differ exactly
/// by the instruction block.
pub fn build_system_prompt(config: &PromptConfig) -> String {
    let mut out = String::from(ROLE_GOAL);
    out.push('\n');
    if config.include_driving_instruction {
        out.push('\n');
        for sentence in INSTRUCTION_SENTENCES {
            out.push_str(sentence);
            out.push('\n');
        }
    }
    if let Some(note) = &config.locale_rules_note {
        out.push('\n');
        out.push_str(note);
        out.push('\n');
    }
    out.push('\n');
    out.push_str(&build_response_format());
    out
}

/// The enforced answer template: a Plausibility line, free-text reasoning,
/// and a final Decision line drawn from the six-entry menu.
pub fn build_response_format() -> String {
    let menu = ControlDecision::ALL
        .iter()
        .map(|d| d.menu_token())
        .collect::<Vec<_>>()
        .join(" | ");
    format!(
        "Answer in exactly this format:\n\
         Plausibility: <Yes, or No followed by which part of the scene is inconsistent and why>\n\
         <your reasoning: justify your decision and state why you rejected the other decisions>\n\
         Decision: <one of {menu}>\n"
    )
}

/// Composes the full query: rendered description as the user message, the
/// assembled instructions + response format as the system prompt.
pub fn build_query(
    scene: &DrivingScene,
    window: FrameWindow,
    config: &PromptConfig,
) -> Result<Query, PromptError> {
    if config.history_frames == 0 {
        return Err(PromptError::EmptyWindow);
    }
    let user_message = render_scene_description(scene, window)?;
    Ok(Query {
        system_prompt: build_system_prompt(config),
        user_message,
        decision_vocabulary: ControlDecision::ALL
            .iter()
            .map(|d| d.menu_token().to_string())
            .collect(),
    })
}
