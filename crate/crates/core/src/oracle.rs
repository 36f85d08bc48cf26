//! Safe-decision oracle: time-to-collision analysis per control decision,
//! conservative labeling, and a brute-force forward simulator used as an
//! independent check in tests.
//!
//! All motion is evaluated in the ego-relative frame of the chosen frame's
//! event. An object with absolute direction `d` and the ego heading `h` moves
//! with relative direction `delta = d - h`:
//!
//! ```text
//! d(longitudinal)/dt = speed * cos(delta) - ego_speed(t)
//! d(lateral)/dt      = -speed * sin(delta)
//! ```
//!
//! so an object whose direction equals the ego heading tracks the ego's lane,
//! and (with the ego heading north at 90°) an object moving east drifts to
//! the right.
//!
//! The decision kinematics and the 3-second TTC threshold are configurable
//! defaults declared in [`SafetyConfig`]; they are not taken from any
//! external source of truth.

use crate::scene::{
    ControlDecision, DrivingScene, DynamicKind, Event, LaneSide, TrackedObject,
};
use std::collections::BTreeSet;
use thiserror::Error;

/// Ego/agent footprints: vehicles are 4.5 m x 1.8 m rectangles, pedestrians
/// 0.5 m radius disks (treated as squares of that half-extent for overlap).
pub const VEHICLE_HALF_LENGTH: f64 = 2.25;
pub const VEHICLE_HALF_WIDTH: f64 = 0.9;
pub const PEDESTRIAN_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy)]
pub struct SafetyConfig {
    /// TTC safety margin in seconds (3-second spacing rule).
    pub ttc_threshold: f64,
    /// Look-ahead horizon in seconds.
    pub horizon: f64,
    /// accelerate: +accel for accel_duration, then hold.
    pub accel: f64,
    pub accel_duration: f64,
    /// slower: -decel for decel_duration, then hold (floored at 0).
    pub decel: f64,
    pub decel_duration: f64,
    /// stop: -stop_decel down to zero.
    pub stop_decel: f64,
    /// Lane changes shift laterally by one lane width over this many seconds
    /// at constant forward speed.
    pub lane_change_duration: f64,
    /// Step size of the forward simulator.
    pub sim_dt: f64,
}

impl Default for SafetyConfig {
    fn default() -> Self {
        SafetyConfig {
            ttc_threshold: 3.0,
            horizon: 10.0,
            accel: 2.0,
            accel_duration: 2.0,
            decel: 2.0,
            decel_duration: 2.0,
            stop_decel: 4.0,
            lane_change_duration: 2.0,
            sim_dt: 0.02,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("gap must be non-negative, got {0}")]
    NegativeGap(f64),
    #[error("frame {0} does not exist in the scene")]
    NoSuchFrame(usize),
}

/// Time to collision in seconds; infinite when not closing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ttc {
    Finite(f64),
    Infinite,
}

impl Ttc {
    pub fn seconds(self) -> Option<f64> {
        match self {
            Ttc::Finite(s) => Some(s),
            Ttc::Infinite => None,
        }
    }

    pub fn exceeds(self, threshold: f64) -> bool {
        match self {
            Ttc::Finite(s) => s > threshold,
            Ttc::Infinite => true,
        }
    }
}

/// gap / closing_speed when closing, infinite otherwise.
pub fn ttc(gap: f64, closing_speed: f64) -> Result<Ttc, OracleError> {
    if gap.is_nan() || gap < 0.0 {
        return Err(OracleError::NegativeGap(gap));
    }
    if closing_speed > 0.0 {
        Ok(Ttc::Finite(gap / closing_speed))
    } else {
        Ok(Ttc::Infinite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TtcEntry {
    pub ttc_front: Ttc,
    pub ttc_rear: Ttc,
    pub target_lane: Option<LaneSide>,
}

#[derive(Debug, Clone)]
pub struct TtcReport {
    pub per_decision: Vec<(ControlDecision, TtcEntry)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SafeDecisionSet {
    pub safe: BTreeSet<ControlDecision>,
    /// Subset of `safe` that reduces speed although a speed-maintaining safe
    /// alternative exists.
    pub conservative: BTreeSet<ControlDecision>,
    /// The scripted planner's pick.
    pub ground_truth: ControlDecision,
}

impl SafeDecisionSet {
    pub fn is_safe(&self, d: ControlDecision) -> bool {
        self.safe.contains(&d)
    }

    pub fn is_conservative(&self, d: ControlDecision) -> bool {
        self.conservative.contains(&d)
    }
}

// ---------------------------------------------------------------------------
// relative agent state

#[derive(Debug, Clone, Copy)]
struct Agent {
    id: u64,
    lat: f64,
    long: f64,
    /// Longitudinal speed component along the ego heading (absolute, m/s).
    long_speed: f64,
    /// Lateral (rightward) speed component (m/s).
    lat_speed: f64,
    half_length: f64,
    half_width: f64,
}

fn agents_of(event: &Event) -> Vec<Agent> {
    let heading = event.ego.heading;
    event
        .objects
        .iter()
        .filter_map(|obj| match obj {
            // static roadside objects (signs) are not collision candidates
            TrackedObject::Static(_) => None,
            TrackedObject::Dynamic(d) => {
                let delta = (d.direction - heading).to_radians();
                let (half_length, half_width) = match d.kind {
                    DynamicKind::Vehicle => (VEHICLE_HALF_LENGTH, VEHICLE_HALF_WIDTH),
                    DynamicKind::Pedestrian => (PEDESTRIAN_RADIUS, PEDESTRIAN_RADIUS),
                };
                Some(Agent {
                    id: d.id,
                    lat: d.position.lateral,
                    long: d.position.longitudinal,
                    long_speed: d.speed * delta.cos(),
                    lat_speed: -d.speed * delta.sin(),
                    half_length,
                    half_width,
                })
            }
        })
        .collect()
}

fn lane_shift(decision: ControlDecision, lane_width: f64) -> f64 {
    match decision {
        ControlDecision::ChangeLaneLeft => -lane_width,
        ControlDecision::ChangeLaneRight => lane_width,
        _ => 0.0,
    }
}

/// Piecewise-constant-acceleration ego profile for one decision.
struct EgoProfile {
    /// (phase end time, speed at phase start, acceleration during phase).
    /// The last phase extends to infinity with zero acceleration.
    phases: Vec<(f64, f64, f64)>,
    /// Longitudinal distance covered at each phase start.
    dist_at_start: Vec<f64>,
    /// Lateral shift target and duration (0 shift for non-lane-change).
    lat_shift: f64,
    lat_duration: f64,
}

impl EgoProfile {
    fn new(decision: ControlDecision, v0: f64, lane_width: f64, cfg: &SafetyConfig) -> Self {
        let mut phases: Vec<(f64, f64, f64)> = Vec::new();
        match decision {
            ControlDecision::Maintain
            | ControlDecision::ChangeLaneLeft
            | ControlDecision::ChangeLaneRight => {
                phases.push((f64::INFINITY, v0, 0.0));
            }
            ControlDecision::Accelerate => {
                phases.push((cfg.accel_duration, v0, cfg.accel));
                phases.push((f64::INFINITY, v0 + cfg.accel * cfg.accel_duration, 0.0));
            }
            ControlDecision::Slower => {
                let t_zero = v0 / cfg.decel;
                let ramp = cfg.decel_duration.min(t_zero);
                phases.push((ramp, v0, -cfg.decel));
                phases.push((f64::INFINITY, (v0 - cfg.decel * ramp).max(0.0), 0.0));
            }
            ControlDecision::Stop => {
                let t_zero = v0 / cfg.stop_decel;
                phases.push((t_zero, v0, -cfg.stop_decel));
                phases.push((f64::INFINITY, 0.0, 0.0));
            }
        }
        let mut dist_at_start = Vec::with_capacity(phases.len());
        let mut dist = 0.0;
        let mut t_prev = 0.0;
        for &(end, v, a) in &phases {
            dist_at_start.push(dist);
            if end.is_finite() {
                let dt = end - t_prev;
                dist += v * dt + 0.5 * a * dt * dt;
                t_prev = end;
            }
        }
        EgoProfile {
            phases,
            dist_at_start,
            lat_shift: lane_shift(decision, lane_width),
            lat_duration: cfg.lane_change_duration,
        }
    }

    fn speed(&self, t: f64) -> f64 {
        let mut t_prev = 0.0;
        for &(end, v, a) in &self.phases {
            if t <= end {
                return (v + a * (t - t_prev)).max(0.0);
            }
            t_prev = end;
        }
        0.0
    }

    fn distance(&self, t: f64) -> f64 {
        let mut t_prev = 0.0;
        for (i, &(end, v, a)) in self.phases.iter().enumerate() {
            if t <= end {
                let dt = t - t_prev;
                return self.dist_at_start[i] + v * dt + 0.5 * a * dt * dt;
            }
            t_prev = end;
        }
        *self.dist_at_start.last().unwrap_or(&0.0)
    }

    fn lateral(&self, t: f64) -> f64 {
        if self.lat_shift == 0.0 {
            0.0
        } else if t >= self.lat_duration {
            self.lat_shift
        } else {
            self.lat_shift * t / self.lat_duration
        }
    }

    /// Phase boundaries (longitudinal ramps plus the lateral ramp end).
    fn boundaries(&self, t_max: f64) -> Vec<f64> {
        let mut out = vec![0.0];
        for &(end, _, _) in &self.phases {
            if end.is_finite() && end > 0.0 && end < t_max {
                out.push(end);
            }
        }
        if self.lat_shift != 0.0 && self.lat_duration < t_max {
            out.push(self.lat_duration);
        }
        out.push(t_max);
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }
}

// ---------------------------------------------------------------------------
// analytic earliest-contact solver

/// Intervals within [lo, hi] where |c0 + c1 t + c2 t^2| < bound.
fn intervals_abs_lt(c0: f64, c1: f64, c2: f64, bound: f64, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    // sub-interval endpoints: roots of value = +-bound
    let mut cuts = vec![lo, hi];
    for target in [bound, -bound] {
        let (a, b, c) = (c2, c1, c0 - target);
        if a.abs() < 1e-12 {
            if b.abs() > 1e-12 {
                let r = -c / b;
                if r > lo && r < hi {
                    cuts.push(r);
                }
            }
        } else {
            let disc = b * b - 4.0 * a * c;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                for r in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                    if r > lo && r < hi {
                        cuts.push(r);
                    }
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut out: Vec<(f64, f64)> = Vec::new();
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let mid = 0.5 * (a + b);
        if (c0 + c1 * mid + c2 * mid * mid).abs() < bound {
            match out.last_mut() {
                Some(&mut (_, ref mut prev_end)) if (*prev_end - a).abs() < 1e-12 => {
                    *prev_end = b;
                }
                _ => out.push((a, b)),
            }
        }
    }
    out
}

/// Earliest time in [0, t_max] at which the agent's footprint overlaps the
/// ego's, under the decision's closed-form kinematics. `None` if no contact.
fn earliest_contact(profile: &EgoProfile, agent: &Agent, t_max: f64) -> Option<f64> {
    let len_bound = VEHICLE_HALF_LENGTH + agent.half_length;
    let wid_bound = VEHICLE_HALF_WIDTH + agent.half_width;
    let boundaries = profile.boundaries(t_max);
    let mut best: Option<f64> = None;
    for pair in boundaries.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi - lo < 1e-12 {
            continue;
        }
        // longitudinal gap: quadratic in local time s = t - lo
        let v_ego = profile.speed(lo);
        let (_, _, a_ego) = {
            // acceleration in effect during this sub-interval
            let mut t_prev = 0.0;
            let mut acc = 0.0;
            for &(end, _, a) in &profile.phases {
                if lo < end {
                    acc = a;
                    break;
                }
                t_prev = end;
            }
            let _ = t_prev;
            (0.0, 0.0, acc)
        };
        // guard: during stop, past v=0, acceleration is 0 (phase split covers it)
        let g0 = (agent.long + agent.long_speed * lo) - profile.distance(lo);
        let g1 = agent.long_speed - v_ego;
        let g2 = -0.5 * a_ego;

        // lateral gap: linear in local time
        let ego_lat_lo = profile.lateral(lo);
        let ego_lat_hi = profile.lateral(hi);
        let ego_lat_rate = (ego_lat_hi - ego_lat_lo) / (hi - lo);
        let l0 = (agent.lat + agent.lat_speed * lo) - ego_lat_lo;
        let l1 = agent.lat_speed - ego_lat_rate;

        let long_ints = intervals_abs_lt(g0, g1, g2, len_bound, 0.0, hi - lo);
        if long_ints.is_empty() {
            continue;
        }
        let lat_ints = intervals_abs_lt(l0, l1, 0.0, wid_bound, 0.0, hi - lo);
        for &(la, lb) in &long_ints {
            for &(ma, mb) in &lat_ints {
                let start = la.max(ma);
                let end = lb.min(mb);
                if start < end {
                    let t = lo + start;
                    if best.is_none_or(|b| t < b) {
                        best = Some(t);
                    }
                }
            }
        }
    }
    best
}

// ---------------------------------------------------------------------------
// safe_set

fn lane_of(lat: f64, lane_width: f64) -> Option<LaneSide> {
    let half = lane_width / 2.0;
    if lat.abs() <= half {
        None // ego lane
    } else if lat < 0.0 && lat >= -1.5 * lane_width {
        Some(LaneSide::Left)
    } else if lat > 0.0 && lat <= 1.5 * lane_width {
        Some(LaneSide::Right)
    } else {
        Some(if lat < 0.0 { LaneSide::Left } else { LaneSide::Right })
    }
}

fn classic_ttc_pair(event: &Event, target: Option<LaneSide>, ego_speed: f64) -> (Ttc, Ttc) {
    let lane_width = event.lane.lane_width;
    let mut front = Ttc::Infinite;
    let mut rear = Ttc::Infinite;
    for agent in agents_of(event) {
        if lane_of(agent.lat, lane_width) != target {
            continue;
        }
        if agent.long > 0.0 {
            let gap = (agent.long - VEHICLE_HALF_LENGTH - agent.half_length).max(0.0);
            let closing = ego_speed - agent.long_speed;
            if let Ok(t) = ttc(gap, closing) {
                front = min_ttc(front, t);
            }
        } else {
            let gap = (-agent.long - VEHICLE_HALF_LENGTH - agent.half_length).max(0.0);
            let closing = agent.long_speed - ego_speed;
            if let Ok(t) = ttc(gap, closing) {
                rear = min_ttc(rear, t);
            }
        }
    }
    (front, rear)
}

fn min_ttc(a: Ttc, b: Ttc) -> Ttc {
    match (a, b) {
        (Ttc::Finite(x), Ttc::Finite(y)) => Ttc::Finite(x.min(y)),
        (Ttc::Finite(x), Ttc::Infinite) | (Ttc::Infinite, Ttc::Finite(x)) => Ttc::Finite(x),
        (Ttc::Infinite, Ttc::Infinite) => Ttc::Infinite,
    }
}

/// Per-decision TTC to the closest front and rear agent in the decision's
/// target lane, from the instantaneous speeds at the chosen frame.
pub fn ttc_report(scene: &DrivingScene, frame: usize) -> Result<TtcReport, OracleError> {
    let event = scene.event(frame).ok_or(OracleError::NoSuchFrame(frame))?;
    let mut per_decision = Vec::new();
    for d in ControlDecision::ALL {
        let target = match d {
            ControlDecision::ChangeLaneLeft => Some(LaneSide::Left),
            ControlDecision::ChangeLaneRight => Some(LaneSide::Right),
            _ => None,
        };
        let (ttc_front, ttc_rear) = classic_ttc_pair(event, target, event.ego.speed);
        per_decision.push((d, TtcEntry { ttc_front, ttc_rear, target_lane: target }));
    }
    Ok(TtcReport { per_decision })
}

/// True when, under the decision's kinematic effect, no footprint contact is
/// predicted within `horizon + ttc_threshold` seconds (the threshold acts as
/// a safety margin on top of the look-ahead horizon).
fn decision_is_safe(
    event: &Event,
    decision: ControlDecision,
    cfg: &SafetyConfig,
    horizon: f64,
) -> bool {
    match decision {
        ControlDecision::ChangeLaneLeft if !event.lane.allows(LaneSide::Left) => return false,
        ControlDecision::ChangeLaneRight if !event.lane.allows(LaneSide::Right) => return false,
        _ => {}
    }
    let profile = EgoProfile::new(decision, event.ego.speed, event.lane.lane_width, cfg);
    let t_max = horizon + cfg.ttc_threshold;
    for agent in agents_of(event) {
        if earliest_contact(&profile, &agent, t_max).is_some() {
            return false;
        }
    }
    true
}

/// Computes the safe decision set, conservative flags and the scripted
/// planner's ground-truth pick for one frame.
pub fn safe_set(
    scene: &DrivingScene,
    frame: usize,
    horizon: f64,
    cfg: &SafetyConfig,
) -> Result<SafeDecisionSet, OracleError> {
    let event = scene.event(frame).ok_or(OracleError::NoSuchFrame(frame))?;
    let mut safe: BTreeSet<ControlDecision> = ControlDecision::ALL
        .into_iter()
        .filter(|&d| decision_is_safe(event, d, cfg, horizon))
        .collect();
    if safe.is_empty() {
        // last resort: braking to a halt is always on the table
        safe.insert(ControlDecision::Stop);
    }
    let conservative = conservative_subset(&safe);
    let ground_truth = planner_pick(&safe);
    Ok(SafeDecisionSet { safe, conservative, ground_truth })
}

/// slower/stop are conservative iff a speed-maintaining decision is also safe.
pub fn conservative_subset(safe: &BTreeSet<ControlDecision>) -> BTreeSet<ControlDecision> {
    let has_maintaining = safe.iter().any(|d| !d.reduces_speed());
    if has_maintaining {
        safe.iter().copied().filter(|d| d.reduces_speed()).collect()
    } else {
        BTreeSet::new()
    }
}

/// Re-derives conservative flags on an existing set (pure).
pub fn conservative_flags(set: &SafeDecisionSet) -> SafeDecisionSet {
    SafeDecisionSet {
        safe: set.safe.clone(),
        conservative: conservative_subset(&set.safe),
        ground_truth: set.ground_truth,
    }
}

/// The scripted planner: prefer safe decisions that keep up forward progress,
/// ties broken maintain > accelerate > change left > change right > slower >
/// stop.
fn planner_pick(safe: &BTreeSet<ControlDecision>) -> ControlDecision {
    const ORDER: [ControlDecision; 6] = [
        ControlDecision::Maintain,
        ControlDecision::Accelerate,
        ControlDecision::ChangeLaneLeft,
        ControlDecision::ChangeLaneRight,
        ControlDecision::Slower,
        ControlDecision::Stop,
    ];
    for d in ORDER {
        if safe.contains(&d) {
            return d;
        }
    }
    ControlDecision::Stop
}

// ---------------------------------------------------------------------------
// forward simulator (independent test oracle)

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Ok,
    Collision { t: f64, id: u64 },
    Halted,
}

impl Outcome {
    pub fn is_collision(&self) -> bool {
        matches!(self, Outcome::Collision { .. })
    }
}

/// Steps all agents at constant velocity and the ego per the decision's
/// kinematic effect; reports the first footprint overlap, or `Halted` when
/// the ego comes to rest collision-free.
pub fn simulate_decision(
    scene: &DrivingScene,
    frame: usize,
    decision: ControlDecision,
    horizon: f64,
    cfg: &SafetyConfig,
) -> Result<Outcome, OracleError> {
    let event = scene.event(frame).ok_or(OracleError::NoSuchFrame(frame))?;
    let agents = agents_of(event);
    let lane_width = event.lane.lane_width;

    let mut ego_speed = event.ego.speed;
    let mut ego_long = 0.0;
    let mut ego_lat = 0.0;
    let shift = lane_shift(decision, lane_width);
    let lat_rate = shift / cfg.lane_change_duration;

    let dt = cfg.sim_dt;
    let steps = (horizon / dt).ceil() as usize;
    let mut t = 0.0;
    for _ in 0..=steps {
        for agent in &agents {
            let ax = agent.long + agent.long_speed * t;
            let ay = agent.lat + agent.lat_speed * t;
            let len_bound = VEHICLE_HALF_LENGTH + agent.half_length;
            let wid_bound = VEHICLE_HALF_WIDTH + agent.half_width;
            if (ax - ego_long).abs() < len_bound && (ay - ego_lat).abs() < wid_bound {
                return Ok(Outcome::Collision { t, id: agent.id });
            }
        }
        // advance ego
        let accel = match decision {
            ControlDecision::Accelerate if t < cfg.accel_duration => cfg.accel,
            ControlDecision::Slower if t < cfg.decel_duration => -cfg.decel,
            ControlDecision::Stop => -cfg.stop_decel,
            _ => 0.0,
        };
        ego_long += ego_speed * dt + 0.5 * accel * dt * dt;
        ego_speed = (ego_speed + accel * dt).max(0.0);
        if shift != 0.0 && t < cfg.lane_change_duration {
            let remaining = (cfg.lane_change_duration - t).min(dt);
            ego_lat += lat_rate * remaining;
        }
        t += dt;
    }
    if ego_speed <= 1e-9 && event.ego.speed > 0.0 {
        return Ok(Outcome::Halted);
    }
    Ok(Outcome::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{
        ContextualData, DrivingScene, DynamicKind, DynamicObject, EgoState, Event, LaneCondition,
        MapKind, RelPosition, TimeOfDay, WeatherPreset,
    };

    fn scene_with(ego_speed: f64, options: Vec<LaneSide>, objects: Vec<TrackedObject>) -> DrivingScene {
        DrivingScene {
            contextual: ContextualData {
                map: MapKind::Highway,
                time_of_day: TimeOfDay::new(12, 0).unwrap(),
                weather: WeatherPreset::ClearNoon,
            },
            events: vec![Event {
                frame: 0,
                ego: EgoState { speed: ego_speed, heading: 90.0 },
                lane: LaneCondition::new(4.0, options),
                objects,
            }],
        }
    }

    fn vehicle(id: u64, lat: f64, long: f64, speed: f64) -> TrackedObject {
        TrackedObject::Dynamic(DynamicObject {
            id,
            kind: DynamicKind::Vehicle,
            position: RelPosition::new(lat, long),
            speed,
            direction: 90.0,
        })
    }

    #[test]
    fn ttc_quotient() {
        assert_eq!(ttc(50.0, 5.0).unwrap(), Ttc::Finite(10.0));
        assert_eq!(ttc(80.0, -1.0).unwrap(), Ttc::Infinite);
        assert_eq!(ttc(0.0, 5.0).unwrap(), Ttc::Finite(0.0));
        assert_eq!(ttc(-1.0, 5.0), Err(OracleError::NegativeGap(-1.0)));
    }

    #[test]
    fn ttc_scale_consistent() {
        for k in [0.5, 2.0, 7.25] {
            let a = ttc(40.0, 8.0).unwrap().seconds().unwrap();
            let b = ttc(40.0 * k, 8.0 * k).unwrap().seconds().unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_road_all_safe_and_slow_decisions_conservative() {
        let s = scene_with(20.0, vec![LaneSide::Left, LaneSide::Right], vec![]);
        let set = safe_set(&s, 0, 10.0, &SafetyConfig::default()).unwrap();
        assert_eq!(set.safe.len(), 6);
        let cons: Vec<_> = set.conservative.iter().copied().collect();
        assert_eq!(cons, vec![ControlDecision::Slower, ControlDecision::Stop]);
        assert_eq!(set.ground_truth, ControlDecision::Maintain);
    }

    #[test]
    fn closing_front_vehicle_blocks_maintain() {
        // front vehicle 50 m ahead at 25 m/s vs ego 30 m/s: contact ~9.1 s
        let s = scene_with(
            30.0,
            vec![LaneSide::Left, LaneSide::Right],
            vec![vehicle(2, 0.0, 50.0, 25.0)],
        );
        let set = safe_set(&s, 0, 10.0, &SafetyConfig::default()).unwrap();
        assert!(!set.is_safe(ControlDecision::Maintain));
        assert!(!set.is_safe(ControlDecision::Accelerate));
        assert!(set.is_safe(ControlDecision::ChangeLaneLeft));
        assert!(set.is_safe(ControlDecision::Slower));
    }

    #[test]
    fn opening_front_vehicle_is_no_threat() {
        // 80 m ahead at 31 vs ego 30: opening
        let s = scene_with(30.0, vec![], vec![vehicle(2, 0.0, 80.0, 31.0)]);
        let set = safe_set(&s, 0, 10.0, &SafetyConfig::default()).unwrap();
        assert!(set.is_safe(ControlDecision::Maintain));
    }

    #[test]
    fn lane_change_requires_option() {
        let s = scene_with(20.0, vec![LaneSide::Right], vec![]);
        let set = safe_set(&s, 0, 10.0, &SafetyConfig::default()).unwrap();
        assert!(!set.is_safe(ControlDecision::ChangeLaneLeft));
        assert!(set.is_safe(ControlDecision::ChangeLaneRight));
    }

    #[test]
    fn conservative_rules() {
        use ControlDecision::*;
        let set: BTreeSet<_> = [Maintain, Slower].into_iter().collect();
        assert_eq!(conservative_subset(&set), [Slower].into_iter().collect());

        let set: BTreeSet<_> = [Stop].into_iter().collect();
        assert!(conservative_subset(&set).is_empty());

        let set: BTreeSet<_> = [Slower, Stop, ChangeLaneLeft].into_iter().collect();
        assert_eq!(conservative_subset(&set), [Slower, Stop].into_iter().collect());
    }

    #[test]
    fn simulate_collision_with_slow_front_vehicle() {
        let s = scene_with(30.0, vec![], vec![vehicle(2, 0.0, 50.0, 25.0)]);
        let out = simulate_decision(&s, 0, ControlDecision::Maintain, 10.0, &SafetyConfig::default())
            .unwrap();
        match out {
            Outcome::Collision { t, id } => {
                assert_eq!(id, 2);
                // contact when gap (50) closes to 4.5 at 5 m/s => ~9.1 s
                assert!((t - 9.1).abs() < 0.1, "t = {t}");
            }
            other => panic!("expected collision, got {other:?}"),
        }
    }

    #[test]
    fn simulate_lane_change_into_empty_lane_is_ok() {
        let s = scene_with(
            30.0,
            vec![LaneSide::Left, LaneSide::Right],
            vec![vehicle(2, 0.0, 50.0, 25.0)],
        );
        let out = simulate_decision(&s, 0, ControlDecision::ChangeLaneLeft, 10.0, &SafetyConfig::default())
            .unwrap();
        assert_eq!(out, Outcome::Ok);
    }

    #[test]
    fn simulate_stop_on_empty_road_halts() {
        let s = scene_with(20.0, vec![], vec![]);
        let out = simulate_decision(&s, 0, ControlDecision::Stop, 10.0, &SafetyConfig::default())
            .unwrap();
        assert_eq!(out, Outcome::Halted);
    }

    #[test]
    fn removing_agent_never_shrinks_safe_set() {
        let objects = vec![vehicle(1, 0.0, 40.0, 20.0), vehicle(2, -4.0, -10.0, 35.0)];
        let full = scene_with(30.0, vec![LaneSide::Left, LaneSide::Right], objects.clone());
        let full_set = safe_set(&full, 0, 10.0, &SafetyConfig::default()).unwrap();
        for drop_idx in 0..objects.len() {
            let mut reduced = objects.clone();
            reduced.remove(drop_idx);
            let s = scene_with(30.0, vec![LaneSide::Left, LaneSide::Right], reduced);
            let set = safe_set(&s, 0, 10.0, &SafetyConfig::default()).unwrap();
            assert!(full_set.safe.is_subset(&set.safe));
        }
    }

    #[test]
    fn conservative_always_subset_of_safe() {
        let s = scene_with(
            30.0,
            vec![LaneSide::Left],
            vec![vehicle(1, 0.0, 30.0, 10.0), vehicle(2, -4.0, 10.0, 30.0)],
        );
        let set = safe_set(&s, 0, 10.0, &SafetyConfig::default()).unwrap();
        assert!(set.conservative.is_subset(&set.safe));
    }
}
