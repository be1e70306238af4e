use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{affine_spacing_check, AffineSpacingPolicy, InteractionPair, HEADING_MIN_SPEED};
use crate::ingest::{AgentType, TrajectoryFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaneContext {
    Same,
    Adjacent,
    Crossing,
    Other,
}

impl LaneContext {
    pub const ALL: [LaneContext; 4] =
        [LaneContext::Same, LaneContext::Adjacent, LaneContext::Crossing, LaneContext::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            LaneContext::Same => "same",
            LaneContext::Adjacent => "adjacent",
            LaneContext::Crossing => "crossing",
            LaneContext::Other => "other",
        }
    }

    pub fn on_route(self) -> bool {
        matches!(self, LaneContext::Same | LaneContext::Adjacent)
    }
}

/// Lane adjacency and the lateral gate used when lane ids are unavailable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LaneTopology {
    pub adjacency: Vec<(String, String)>,
    pub lane_width: f64,
}

impl Default for LaneTopology {
    fn default() -> Self {
        Self { adjacency: Vec::new(), lane_width: 3.5 }
    }
}

impl LaneTopology {
    pub fn adjacent(&self, a: &str, b: &str) -> bool {
        self.adjacency.iter().any(|(x, y)| (x == a && y == b) || (x == b && y == a))
    }
}

/// Roadway relation of `agent` to `ego`.
///
/// An agent moving at 45°–135° to the ego heading is crossing. Otherwise lane ids decide
/// when both are known; without them the lateral offset is gated at half a lane (same) and
/// one and a half lanes (adjacent).
pub fn lane_context(
    ego: &TrajectoryFrame,
    agent: &TrajectoryFrame,
    pair: &InteractionPair,
    ego_heading: f64,
    topo: &LaneTopology,
) -> LaneContext {
    if agent.speed() >= HEADING_MIN_SPEED {
        let rel = (agent.vy.atan2(agent.vx) - ego_heading).to_degrees();
        let rel = super::wrap_degrees(rel).abs();
        if (45.0..=135.0).contains(&rel) {
            return LaneContext::Crossing;
        }
    }
    match (ego.lane_id.as_deref(), agent.lane_id.as_deref()) {
        (Some(a), Some(b)) if a == b => LaneContext::Same,
        (Some(a), Some(b)) if topo.adjacent(a, b) => LaneContext::Adjacent,
        (Some(_), Some(_)) => LaneContext::Other,
        _ => {
            let lat = pair.lateral.abs();
            if lat < 0.5 * topo.lane_width {
                LaneContext::Same
            } else if lat < 1.5 * topo.lane_width {
                LaneContext::Adjacent
            } else {
                LaneContext::Other
            }
        }
    }
}

/// Thresholds of the leader/follower validation checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    /// Follower must be moving faster than this, m/s.
    pub min_follower_speed: f64,
    /// Pair distance must be below this, m.
    pub max_distance: f64,
    /// Follower acceleration magnitude must be below this, m/s².
    pub max_follower_accel: f64,
    /// Window for the gap-rate finite difference, s.
    pub gap_window: f64,
    /// Speed differences and gap rates below this count as agreeing, m/s.
    pub motion_deadband: f64,
    /// Subtract half of each vehicle length before the spacing-policy test.
    pub length_correction: bool,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            min_follower_speed: 0.1,
            max_distance: 120.0,
            max_follower_accel: 5.0,
            gap_window: 0.5,
            motion_deadband: 0.3,
            length_correction: false,
        }
    }
}

/// Speed and acceleration magnitude of the ego at the current step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgoMotion {
    pub speed: f64,
    pub accel: f64,
    pub length: Option<f64>,
}

/// A zoned pair plus what the validation checks need to know about the agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub pair: InteractionPair,
    pub agent_type: AgentType,
    pub lane: LaneContext,
    pub speed: f64,
    pub accel: f64,
    pub length: Option<f64>,
    /// Rate of change of the pair distance over the gap window, m/s. `None` when the
    /// history is too short to tell.
    pub gap_rate: Option<f64>,
}

/// Number of candidates rejected by each check.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckCounts {
    pub zone: usize,
    pub route: usize,
    pub speed: usize,
    pub distance: usize,
    pub accel: usize,
    pub motion: usize,
    pub spacing: usize,
}

impl CheckCounts {
    pub fn add(&mut self, other: &CheckCounts) {
        self.zone += other.zone;
        self.route += other.route;
        self.speed += other.speed;
        self.distance += other.distance;
        self.accel += other.accel;
        self.motion += other.motion;
        self.spacing += other.spacing;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub agent_id: Option<String>,
    pub distance: Option<f64>,
    pub failures: CheckCounts,
}

fn consistent_motion(gap_rate: Option<f64>, lead_minus_follow: f64, deadband: f64) -> bool {
    match gap_rate {
        None => true,
        Some(g) if g.abs() <= deadband || lead_minus_follow.abs() <= deadband => true,
        Some(g) => g.signum() == lead_minus_follow.signum(),
    }
}

fn nearest<'a>(passing: impl Iterator<Item = &'a Candidate>) -> Option<&'a Candidate> {
    passing.min_by(|a, b| {
        a.pair
            .s_ij
            .partial_cmp(&b.pair.s_ij)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.pair.agent_id.cmp(&b.pair.agent_id))
    })
}

/// Nearest forward-zone vehicle on the same or an adjacent lane that passes the validation
/// checks. The ego is the follower: its speed and acceleration are tested.
pub fn find_leader(ego: &EgoMotion, candidates: &[Candidate], cfg: &SelectionConfig) -> Selection {
    let mut fails = CheckCounts::default();
    let passing: Vec<&Candidate> = candidates
        .iter()
        .filter(|c| {
            if c.pair.zone.as_deref() != Some("forward") || !c.agent_type.is_vehicle() {
                fails.zone += 1;
                return false;
            }
            if !c.lane.on_route() {
                fails.route += 1;
                return false;
            }
            if !(ego.speed > cfg.min_follower_speed) {
                fails.speed += 1;
                return false;
            }
            if !(c.pair.s_ij < cfg.max_distance) {
                fails.distance += 1;
                return false;
            }
            if !(ego.accel.abs() < cfg.max_follower_accel) {
                fails.accel += 1;
                return false;
            }
            if !consistent_motion(c.gap_rate, c.speed - ego.speed, cfg.motion_deadband) {
                fails.motion += 1;
                return false;
            }
            true
        })
        .collect();
    let best = nearest(passing.into_iter());
    Selection { agent_id: best.map(|c| c.pair.agent_id.clone()), distance: best.map(|c| c.pair.s_ij), failures: fails }
}

/// Nearest rear-zone vehicle on the same or an adjacent lane whose spacing satisfies the
/// affine policy at the ego speed and which passes the same motion checks (applied to the
/// candidate, which is the follower here).
pub fn find_follower(
    ego: &EgoMotion,
    candidates: &[Candidate],
    policy: &AffineSpacingPolicy,
    cfg: &SelectionConfig,
) -> Selection {
    let mut fails = CheckCounts::default();
    let passing: Vec<&Candidate> = candidates
        .iter()
        .filter(|c| {
            if c.pair.zone.as_deref() != Some("rear") || !c.agent_type.is_vehicle() {
                fails.zone += 1;
                return false;
            }
            if !c.lane.on_route() {
                fails.route += 1;
                return false;
            }
            let spacing = match (cfg.length_correction, ego.length, c.length) {
                (true, Some(le), Some(la)) => (c.pair.s_ij - 0.5 * (le + la)).max(0.0),
                _ => c.pair.s_ij,
            };
            if !affine_spacing_check(spacing, ego.speed, policy) {
                fails.spacing += 1;
                return false;
            }
            if !(c.speed > cfg.min_follower_speed) {
                fails.speed += 1;
                return false;
            }
            if !(c.pair.s_ij < cfg.max_distance) {
                fails.distance += 1;
                return false;
            }
            if !(c.accel.abs() < cfg.max_follower_accel) {
                fails.accel += 1;
                return false;
            }
            if !consistent_motion(c.gap_rate, ego.speed - c.speed, cfg.motion_deadband) {
                fails.motion += 1;
                return false;
            }
            true
        })
        .collect();
    let best = nearest(passing.into_iter());
    Selection { agent_id: best.map(|c| c.pair.agent_id.clone()), distance: best.map(|c| c.pair.s_ij), failures: fails }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::{assign_zone, compute_pair_geometry, Heading, ZoneConfig};

    fn frame(x: f64, y: f64, vx: f64, lane: &str) -> TrajectoryFrame {
        let mut f = TrajectoryFrame::new(0.0, 0, x, y);
        f.vx = vx;
        f.vy = 0.0;
        f.lane_id = Some(lane.to_string());
        f
    }

    fn candidate(id: &str, x: f64, speed: f64, accel: f64) -> Candidate {
        let ego = frame(0.0, 0.0, 10.0, "L1");
        let agent = frame(x, 0.0, speed, "L1");
        let mut pair = compute_pair_geometry("ego", &ego, Heading { angle: 0.0, held: false }, id, &agent);
        assign_zone(&mut pair, &ZoneConfig::default());
        let lane = lane_context(&ego, &agent, &pair, 0.0, &LaneTopology::default());
        Candidate { pair, agent_type: AgentType::Car, lane, speed, accel, length: Some(4.5), gap_rate: Some(0.0) }
    }

    fn ego(accel: f64) -> EgoMotion {
        EgoMotion { speed: 10.0, accel, length: Some(4.5) }
    }

    #[test]
    fn unique_valid_leader() {
        let sel = find_leader(&ego(0.0), &[candidate("a", 30.0, 10.0, 0.0)], &SelectionConfig::default());
        assert_eq!(sel.agent_id.as_deref(), Some("a"));
    }

    #[test]
    fn nearest_leader_wins() {
        let c = [candidate("far", 50.0, 10.0, 0.0), candidate("near", 30.0, 10.0, 0.0)];
        let sel = find_leader(&ego(0.0), &c, &SelectionConfig::default());
        assert_eq!(sel.agent_id.as_deref(), Some("near"));
        assert_eq!(sel.distance, Some(30.0));
    }

    #[test]
    fn ties_break_on_agent_id() {
        let c = [candidate("b", 30.0, 10.0, 0.0), candidate("a", 30.0, 10.0, 0.0)];
        let sel = find_leader(&ego(0.0), &c, &SelectionConfig::default());
        assert_eq!(sel.agent_id.as_deref(), Some("a"));
        let rev = [c[1].clone(), c[0].clone()];
        assert_eq!(find_leader(&ego(0.0), &rev, &SelectionConfig::default()).agent_id, sel.agent_id);
    }

    #[test]
    fn harsh_follower_acceleration_rejects() {
        let sel = find_leader(&ego(6.0), &[candidate("a", 20.0, 10.0, 0.0)], &SelectionConfig::default());
        assert_eq!(sel.agent_id, None);
        assert_eq!(sel.failures.accel, 1);
    }

    #[test]
    fn inconsistent_gap_rate_rejects() {
        let mut c = candidate("a", 30.0, 14.0, 0.0);
        // leader faster by 4 m/s yet the gap is closing
        c.gap_rate = Some(-2.0);
        let sel = find_leader(&ego(0.0), &[c], &SelectionConfig::default());
        assert_eq!(sel.agent_id, None);
        assert_eq!(sel.failures.motion, 1);
    }

    #[test]
    fn leader_must_be_forward() {
        let sel = find_leader(&ego(0.0), &[candidate("r", -24.0, 10.0, 0.0)], &SelectionConfig::default());
        assert_eq!(sel.agent_id, None);
        assert_eq!(sel.failures.zone, 1);
    }

    #[test]
    fn follower_in_band_selected() {
        let sel = find_follower(
            &ego(0.0),
            &[candidate("f", -24.0, 10.0, 0.0)],
            &AffineSpacingPolicy::default(),
            &SelectionConfig::default(),
        );
        assert_eq!(sel.agent_id.as_deref(), Some("f"));
    }

    #[test]
    fn follower_outside_band_rejected() {
        // 40 m is also beyond the default rear range; widen it to isolate the band test
        let mut c = candidate("f", -40.0, 10.0, 0.0);
        c.pair.zone = Some("rear".into());
        let sel = find_follower(&ego(0.0), &[c], &AffineSpacingPolicy::default(), &SelectionConfig::default());
        assert_eq!(sel.agent_id, None);
        assert_eq!(sel.failures.spacing, 1);
    }

    #[test]
    fn nearest_follower_in_band() {
        let c = [candidate("f27", -27.0, 10.0, 0.0), candidate("f23", -23.0, 10.0, 0.0)];
        let sel = find_follower(&ego(0.0), &c, &AffineSpacingPolicy::default(), &SelectionConfig::default());
        assert_eq!(sel.agent_id.as_deref(), Some("f23"));
    }

    #[test]
    fn length_correction_shifts_spacing() {
        let cfg = SelectionConfig { length_correction: true, ..Default::default() };
        // 30 m center gap, 4.5 m vehicles -> 25.5 m bumper gap, inside [19, 29]
        let mut c = candidate("f", -30.0, 10.0, 0.0);
        c.pair.zone = Some("rear".into());
        assert!(find_follower(&ego(0.0), &[c.clone()], &AffineSpacingPolicy::default(), &SelectionConfig::default())
            .agent_id
            .is_none());
        assert!(find_follower(&ego(0.0), &[c], &AffineSpacingPolicy::default(), &cfg).agent_id.is_some());
    }

    #[test]
    fn lane_context_from_ids_and_offsets() {
        let topo = LaneTopology { adjacency: vec![("L1".into(), "L2".into())], lane_width: 3.5 };
        let ego = frame(0.0, 0.0, 10.0, "L1");
        let h = Heading { angle: 0.0, held: false };
        let adj = frame(10.0, 3.5, 10.0, "L2");
        let p = compute_pair_geometry("e", &ego, h, "a", &adj);
        assert_eq!(lane_context(&ego, &adj, &p, 0.0, &topo), LaneContext::Adjacent);
        let far = frame(10.0, 7.0, 10.0, "L3");
        let p = compute_pair_geometry("e", &ego, h, "a", &far);
        assert_eq!(lane_context(&ego, &far, &p, 0.0, &topo), LaneContext::Other);

        let mut e2 = ego.clone();
        e2.lane_id = None;
        let mut a2 = adj.clone();
        a2.lane_id = None;
        let p = compute_pair_geometry("e", &e2, h, "a", &a2);
        assert_eq!(lane_context(&e2, &a2, &p, 0.0, &topo), LaneContext::Adjacent);

        let mut cross = frame(10.0, 5.0, 0.0, "L9");
        cross.vy = -8.0;
        let p = compute_pair_geometry("e", &ego, h, "a", &cross);
        assert_eq!(lane_context(&ego, &cross, &p, 0.0, &topo), LaneContext::Crossing);
    }
}
