//! Ego-relative geometry, detection zones, the affine spacing policy and leader/follower
//! selection.

mod select;
mod zones;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ingest::{AgentTrack, TrajectoryFrame};

pub use select::{
    find_follower, find_leader, lane_context, Candidate, CheckCounts, EgoMotion, LaneContext, LaneTopology, Selection,
    SelectionConfig,
};
pub use zones::{Zone, ZoneConfig};

/// Minimum speed for which the direction of travel defines a heading, m/s.
pub const HEADING_MIN_SPEED: f64 = 0.1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Leader,
    Follower,
    Neighbor,
    #[default]
    None,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Leader => "leader",
            Role::Follower => "follower",
            Role::Neighbor => "neighbor",
            Role::None => "none",
        }
    }
}

/// Relation between an ego vehicle and one surrounding agent at one timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionPair {
    pub ego_id: String,
    pub agent_id: String,
    pub t: f64,
    pub step: i64,
    /// Center-to-center distance, m.
    pub s_ij: f64,
    /// Bearing of the agent in the ego heading frame, degrees in (-180, 180], positive left.
    pub rho_ij: f64,
    /// Magnitude of the velocity difference, m/s.
    pub rel_speed: f64,
    /// Offset along the ego heading, m.
    pub longitudinal: f64,
    /// Offset to the left of the ego heading, m.
    pub lateral: f64,
    pub zone: Option<String>,
    pub role: Role,
    /// The ego heading was held over from an earlier moving sample.
    pub heading_held: bool,
}

/// Ego heading in radians plus whether it was carried over from an earlier sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Heading {
    pub angle: f64,
    pub held: bool,
}

/// Heading per frame from the velocity direction. Below [`HEADING_MIN_SPEED`] the last
/// valid heading is held; before the first moving sample the first valid heading is used.
pub fn heading_series(track: &AgentTrack) -> Vec<Heading> {
    let raw: Vec<Option<f64>> =
        track.frames.iter().map(|f| (f.speed() >= HEADING_MIN_SPEED).then(|| f.vy.atan2(f.vx))).collect();
    let first = raw.iter().flatten().next().copied();
    let mut last = None;
    raw.iter()
        .map(|h| match h {
            Some(a) => {
                last = Some(*a);
                Heading { angle: *a, held: false }
            }
            None => Heading { angle: last.or(first).unwrap_or(0.0), held: true },
        })
        .collect()
}

/// Wrap an angle in degrees into (-180, 180].
pub fn wrap_degrees(a: f64) -> f64 {
    let w = (a + 180.0).rem_euclid(360.0) - 180.0;
    if w <= -180.0 {
        w + 360.0
    } else {
        w
    }
}

/// Distance, bearing and relative speed of `agent` seen from `ego`. Zone and role are unset.
pub fn compute_pair_geometry(
    ego_id: &str,
    ego: &TrajectoryFrame,
    heading: Heading,
    agent_id: &str,
    agent: &TrajectoryFrame,
) -> InteractionPair {
    let (dx, dy) = (agent.x - ego.x, agent.y - ego.y);
    let (c, s) = (heading.angle.cos(), heading.angle.sin());
    let longitudinal = dx * c + dy * s;
    let lateral = -dx * s + dy * c;
    let rho = if dx == 0.0 && dy == 0.0 { 0.0 } else { wrap_degrees(lateral.atan2(longitudinal).to_degrees()) };
    let rel_speed = (agent.vx - ego.vx).hypot(agent.vy - ego.vy);
    InteractionPair {
        ego_id: ego_id.to_string(),
        agent_id: agent_id.to_string(),
        t: ego.t,
        step: ego.step,
        s_ij: dx.hypot(dy),
        rho_ij: rho,
        rel_speed: if rel_speed.is_finite() { rel_speed } else { 0.0 },
        longitudinal,
        lateral,
        zone: None,
        role: Role::None,
        heading_held: heading.held,
    }
}

/// Set `pair.zone` to the first configured zone containing the bearing within range.
pub fn assign_zone(pair: &mut InteractionPair, zones: &ZoneConfig) {
    pair.zone = zones.locate(pair.rho_ij, pair.s_ij).map(|z| z.name.clone());
}

/// Affine spacing policy: standstill distance `d0`, time gap `h`, tolerance `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineSpacingPolicy {
    pub d0: f64,
    pub h: f64,
    pub eps: f64,
}

impl Default for AffineSpacingPolicy {
    fn default() -> Self {
        Self { d0: 4.0, h: 2.0, eps: 5.0 }
    }
}

impl AffineSpacingPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.d0 < 0.0 || !(self.h > 0.0) || self.eps < 0.0 {
            return Err(crate::Error::Config(format!("invalid affine spacing policy {self:?}")));
        }
        Ok(())
    }

    pub fn target(&self, speed: f64) -> f64 {
        self.d0 + self.h * speed
    }
}

/// `|d_actual - (d0 + h v)| <= eps`.
pub fn affine_spacing_check(d_actual: f64, v_i: f64, policy: &AffineSpacingPolicy) -> bool {
    (d_actual - policy.target(v_i)).abs() <= policy.eps
}

pub const PAIRS_HEADER: [&str; 8] = ["ego_id", "agent_id", "t", "s", "rho", "rel_speed", "zone", "role"];

pub fn write_pairs_table<W: Write>(writer: W, pairs: &[InteractionPair]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PAIRS_HEADER)?;
    for p in pairs {
        w.write_record([
            p.ego_id.as_str(),
            p.agent_id.as_str(),
            &format!("{}", p.t),
            &format!("{}", p.s_ij),
            &format!("{}", p.rho_ij),
            &format!("{}", p.rel_speed),
            p.zone.as_deref().unwrap_or(""),
            p.role.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
