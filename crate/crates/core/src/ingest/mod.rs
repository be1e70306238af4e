//! Trajectory ingestion: table loading, pixel-to-meter rescaling, Gaussian smoothing and
//! finite-difference kinematics.
//!
//! Kinematic fields that could not be derived (too-short runs, missing inputs) are stored
//! as `NaN` and written as empty cells in the canonical frames table.

pub(crate) mod kinematics;
mod load;
mod smoothing;
pub(crate) mod table;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use kinematics::{derive_kinematics, difference, KinematicsSource};
pub use load::{load_trajectories, read_trajectories, ColumnSchema, LoadReport};
pub use smoothing::{gaussian_kernel, gaussian_smooth};
pub use table::{read_frames_table, write_frames_table, FRAMES_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentType {
    Av,
    Car,
    Truck,
    Bus,
    Pedestrian,
    Cyclist,
    Scooter,
    Other,
}

impl AgentType {
    pub const ALL: [AgentType; 8] = [
        AgentType::Av,
        AgentType::Car,
        AgentType::Truck,
        AgentType::Bus,
        AgentType::Pedestrian,
        AgentType::Cyclist,
        AgentType::Scooter,
        AgentType::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentType::Av => "av",
            AgentType::Car => "car",
            AgentType::Truck => "truck",
            AgentType::Bus => "bus",
            AgentType::Pedestrian => "pedestrian",
            AgentType::Cyclist => "cyclist",
            AgentType::Scooter => "scooter",
            AgentType::Other => "other",
        }
    }

    /// Motorized road vehicles; only these can act as leaders or followers.
    pub fn is_vehicle(self) -> bool {
        matches!(self, AgentType::Av | AgentType::Car | AgentType::Truck | AgentType::Bus | AgentType::Other)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for AgentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentType {
    type Err = std::convert::Infallible;

    /// Lenient parse of the labels found in common trajectory releases; unknown labels map
    /// to [`AgentType::Other`].
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        Ok(match s.as_str() {
            "av" | "automated" | "autonomous" | "automated vehicle" | "autonomous vehicle" => AgentType::Av,
            "car" | "passenger car" | "passenger_car" | "vehicle" | "sedan" | "suv" => AgentType::Car,
            "truck" | "heavy vehicle" | "heavy_vehicle" => AgentType::Truck,
            "bus" => AgentType::Bus,
            "pedestrian" | "ped" | "person" => AgentType::Pedestrian,
            "cyclist" | "bicycle" | "bike" => AgentType::Cyclist,
            "scooter" | "e-scooter" | "escooter" => AgentType::Scooter,
            _ => AgentType::Other,
        })
    }
}

/// One agent's state at one timestep. Positions in meters, velocity in m/s, acceleration in
/// m/s², jerk in m/s³.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFrame {
    pub t: f64,
    /// Integer grid index, `round(t / dt)`; the join key across agents.
    pub step: i64,
    pub x: f64,
    pub y: f64,
    pub lane_id: Option<String>,
    pub vx: f64,
    pub vy: f64,
    pub ax: f64,
    pub ay: f64,
    pub jx: f64,
    pub jy: f64,
}

impl TrajectoryFrame {
    pub fn new(t: f64, step: i64, x: f64, y: f64) -> Self {
        Self {
            t,
            step,
            x,
            y,
            lane_id: None,
            vx: f64::NAN,
            vy: f64::NAN,
            ax: f64::NAN,
            ay: f64::NAN,
            jx: f64::NAN,
            jy: f64::NAN,
        }
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }

    pub fn accel_mag(&self) -> f64 {
        self.ax.hypot(self.ay)
    }

    pub fn jerk_mag(&self) -> f64 {
        self.jx.hypot(self.jy)
    }

    /// Acceleration projected on the direction of travel. `NaN` at standstill.
    pub fn longitudinal_accel(&self) -> f64 {
        let v = self.speed();
        if v > 0.0 {
            (self.ax * self.vx + self.ay * self.vy) / v
        } else {
            f64::NAN
        }
    }
}

/// All frames of one agent, sorted by timestep. Type and dimensions are per agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentTrack {
    pub agent_id: String,
    pub agent_type: AgentType,
    pub length: Option<f64>,
    pub width: Option<f64>,
    pub frames: Vec<TrajectoryFrame>,
}

impl AgentTrack {
    pub fn frame_at(&self, step: i64) -> Option<&TrajectoryFrame> {
        self.frames.binary_search_by_key(&step, |f| f.step).ok().map(|i| &self.frames[i])
    }

    pub fn index_of(&self, step: i64) -> Option<usize> {
        self.frames.binary_search_by_key(&step, |f| f.step).ok()
    }
}

/// Affine pixel-to-meter map with the origin at the lower-left reference corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameTransform {
    pub scale_x: f64,
    pub scale_y: f64,
    pub origin_x: f64,
    pub origin_y: f64,
}

impl Default for FrameTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl FrameTransform {
    pub fn identity() -> Self {
        Self { scale_x: 1.0, scale_y: 1.0, origin_x: 0.0, origin_y: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale_x > 0.0 && self.scale_y > 0.0) {
            return Err(Error::Config(format!(
                "frame transform scales must be positive (got {}, {})",
                self.scale_x, self.scale_y
            )));
        }
        if !(self.origin_x.is_finite() && self.origin_y.is_finite()) {
            return Err(Error::Config("frame transform origin must be finite".into()));
        }
        Ok(())
    }

    pub fn apply(&self, x_px: f64, y_px: f64) -> (f64, f64) {
        ((x_px - self.origin_x) * self.scale_x, (y_px - self.origin_y) * self.scale_y)
    }

    pub fn invert(&self, x_m: f64, y_m: f64) -> (f64, f64) {
        (x_m / self.scale_x + self.origin_x, y_m / self.scale_y + self.origin_y)
    }
}

/// Rescale every track from pixels to meters. Any kinematic fields already present are
/// scaled as well; vehicle dimensions are assumed to be in meters already.
pub fn pixel_to_meter(tracks: &mut [AgentTrack], transform: &FrameTransform) -> Result<()> {
    transform.validate()?;
    let (sx, sy) = (transform.scale_x, transform.scale_y);
    for frame in tracks.iter_mut().flat_map(|t| t.frames.iter_mut()) {
        let (x, y) = transform.apply(frame.x, frame.y);
        frame.x = x;
        frame.y = y;
        frame.vx *= sx;
        frame.vy *= sy;
        frame.ax *= sx;
        frame.ay *= sy;
        frame.jx *= sx;
        frame.jy *= sy;
    }
    Ok(())
}

pub fn meter_to_pixel(tracks: &mut [AgentTrack], transform: &FrameTransform) -> Result<()> {
    transform.validate()?;
    let (sx, sy) = (transform.scale_x, transform.scale_y);
    for frame in tracks.iter_mut().flat_map(|t| t.frames.iter_mut()) {
        let (x, y) = transform.invert(frame.x, frame.y);
        frame.x = x;
        frame.y = y;
        frame.vx /= sx;
        frame.vy /= sy;
        frame.ax /= sx;
        frame.ay /= sy;
        frame.jx /= sx;
        frame.jy /= sy;
    }
    Ok(())
}

/// Gaussian smoothing parameters. `sigma` is in seconds, `kernel_radius` in samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    pub sigma: f64,
    pub kernel_radius: usize,
    pub dt: f64,
    /// Smooth positions before differencing.
    pub positions: bool,
    /// Additionally smooth each derived series (velocity, acceleration) before the next
    /// difference.
    pub derivatives: bool,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self::with_sigma(0.3, crate::DEFAULT_DT)
    }
}

impl SmoothingConfig {
    /// Smallest admissible radius for `sigma` at sampling interval `dt`.
    pub fn min_radius(sigma: f64, dt: f64) -> usize {
        (3.0 * sigma / dt - 1e-9).ceil().max(0.0) as usize
    }

    pub fn with_sigma(sigma: f64, dt: f64) -> Self {
        Self { sigma, kernel_radius: Self::min_radius(sigma, dt), dt, positions: true, derivatives: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::Config(format!("smoothing sigma must be > 0 (got {})", self.sigma)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("sampling interval must be > 0 (got {})", self.dt)));
        }
        let min = Self::min_radius(self.sigma, self.dt);
        if self.kernel_radius < min {
            return Err(Error::Config(format!("kernel radius {} below 3-sigma minimum {}", self.kernel_radius, min)));
        }
        Ok(())
    }
}
