//! Small deterministic mixed-traffic scenarios: a two-lane freeway with car-following
//! platoons and an urban left turn with pedestrians and a cyclist.
//!
//! Vehicles move along fixed paths. A platoon head tracks a speed profile; everyone else
//! follows its predecessor with a delayed gap/speed-difference law, so followers respond to
//! disturbances with a known lag.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::ingest::table::fmt_f64;
use crate::ingest::AgentType;
use crate::interaction::LaneTopology;

/// One row of a raw trajectory table.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub id: String,
    pub time: f64,
    pub x: f64,
    pub y: f64,
    pub lane: Option<String>,
    pub agent_type: AgentType,
    pub length: f64,
    pub width: f64,
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub name: String,
    pub topology: LaneTopology,
    pub rows: Vec<RawRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub duration: f64,
    pub dt: f64,
    /// Standard deviation of the measurement noise added to positions, in meters.
    pub position_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { duration: 60.0, dt: crate::DEFAULT_DT, position_noise: 0.03 }
    }
}

#[derive(Debug, Clone, Copy)]
enum Path {
    /// Straight line from `origin` along the unit vector `dir`.
    Line { origin: (f64, f64), dir: (f64, f64), lane: &'static str },
    /// Eastbound approach ending at the origin, a quarter-circle left turn of `radius`, then
    /// northbound. Arc length 0 is at `x = -approach`.
    LeftTurn { approach: f64, radius: f64 },
}

impl Path {
    fn at(&self, s: f64) -> (f64, f64, &'static str) {
        match *self {
            Path::Line { origin, dir, lane } => (origin.0 + s * dir.0, origin.1 + s * dir.1, lane),
            Path::LeftTurn { approach, radius } => {
                let arc = radius * FRAC_PI_2;
                if s <= approach {
                    (s - approach, 0.0, "E1")
                } else if s <= approach + arc {
                    let phi = (s - approach) / radius;
                    let lane = if phi < FRAC_PI_2 / 2.0 { "E1" } else { "N1" };
                    (radius * phi.sin(), radius * (1.0 - phi.cos()), lane)
                } else {
                    (radius, radius + (s - approach - arc), "N1")
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Control {
    /// Platoon head tracking a speed profile.
    Head(fn(f64, f64, &Disturbance) -> f64),
    /// Follows vehicle `leader` (an earlier index) with reaction delay `delay_steps`.
    Follow { leader: usize, delay_steps: usize, headway: f64, standstill: f64 },
    /// Constant speed (pedestrians).
    Cruise,
}

/// Per-head random parameters of the speed profile.
#[derive(Debug, Clone, Copy)]
struct Disturbance {
    base: f64,
    amp: f64,
    phase: f64,
    brake_at: f64,
    brake_for: f64,
    brake: f64,
}

struct Agent {
    id: String,
    kind: AgentType,
    length: f64,
    width: f64,
    path: Path,
    control: Control,
    dist: Disturbance,
    s: Vec<f64>,
    v: Vec<f64>,
    /// Last applied acceleration; commands are rate-limited to `MAX_JERK`.
    a: f64,
}

/// Actuator rate limit, m/s³.
const MAX_JERK: f64 = 6.0;

fn freeway_profile(t: f64, _s: f64, d: &Disturbance) -> f64 {
    let osc = d.base + d.amp * (2.0 * std::f64::consts::PI * t / 20.0 + d.phase).sin();
    if t >= d.brake_at && t < d.brake_at + d.brake_for {
        (osc - d.brake * (t - d.brake_at)).max(0.0)
    } else if t >= d.brake_at + d.brake_for {
        // recover at 1.5 m/s²
        let low = (osc - d.brake * d.brake_for).max(0.0);
        (low + 1.5 * (t - d.brake_at - d.brake_for)).min(osc)
    } else {
        osc
    }
}

/// Approach at `base`, slow for the turn, stop at a red light until `brake_at`.
fn urban_profile(t: f64, s: f64, d: &Disturbance) -> f64 {
    let stop_line = 115.0;
    let cruise = d.base;
    let turn_speed = 6.0_f64;
    let to_turn = (118.0 - s).max(0.0);
    let mut v = cruise.min((turn_speed * turn_speed + 2.0 * 1.5 * to_turn).sqrt());
    if t < d.brake_at && s < stop_line {
        v = v.min((2.0 * d.brake * (stop_line - s - 0.5).max(0.0)).sqrt());
    }
    if s > 118.0 + 12.0 * FRAC_PI_2 {
        v = cruise;
    }
    v
}

fn simulate(agents: &mut [Agent], steps: usize, dt: f64) {
    for k in 0..steps.saturating_sub(1) {
        let t = k as f64 * dt;
        for i in 0..agents.len() {
            let (s, v) = (agents[i].s[k], agents[i].v[k]);
            let a = match agents[i].control {
                Control::Head(profile) => {
                    let d = agents[i].dist;
                    let target = profile(t, s, &d);
                    (1.2 * (target - v)).clamp(-6.0, 2.5)
                }
                Control::Follow { leader, delay_steps, headway, standstill } => {
                    let kd = k.saturating_sub(delay_steps);
                    let l = &agents[leader];
                    let gap = l.s[kd] - agents[i].s[kd];
                    let desired = standstill + 0.5 * (l.length + agents[i].length) + headway * agents[i].v[kd];
                    (0.3 * (gap - desired) + 0.9 * (l.v[kd] - agents[i].v[kd])).clamp(-7.0, 2.5)
                }
                Control::Cruise => 0.0,
            };
            let a = a.clamp(agents[i].a - MAX_JERK * dt, agents[i].a + MAX_JERK * dt);
            agents[i].a = a;
            let v_next = (v + a * dt).max(0.0);
            agents[i].v.push(v_next);
            agents[i].s.push(s + 0.5 * (v + v_next) * dt);
        }
    }
}

fn to_rows(agents: &[Agent], steps: usize, dt: f64, noise: f64, rng: &mut ChaCha8Rng) -> Vec<RawRow> {
    let eps = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).expect("finite noise");
    let mut rows = Vec::with_capacity(agents.len() * steps);
    for a in agents {
        for k in 0..steps {
            let (x, y, lane) = a.path.at(a.s[k]);
            let (nx, ny) = if noise > 0.0 { (eps.sample(rng), eps.sample(rng)) } else { (0.0, 0.0) };
            let lane = (a.kind.is_vehicle() || a.kind == AgentType::Cyclist).then(|| lane.to_string());
            rows.push(RawRow {
                id: a.id.clone(),
                time: (k as f64 * dt * 1e6).round() / 1e6,
                x: x + nx,
                y: y + ny,
                lane,
                agent_type: a.kind,
                length: a.length,
                width: a.width,
            });
        }
    }
    rows
}

fn dims(kind: AgentType) -> (f64, f64) {
    match kind {
        AgentType::Truck => (12.0, 2.5),
        AgentType::Bus => (12.0, 2.6),
        AgentType::Pedestrian => (0.5, 0.5),
        AgentType::Cyclist => (1.8, 0.6),
        _ => (4.6, 1.9),
    }
}

fn calm() -> Disturbance {
    Disturbance { base: 0.0, amp: 0.0, phase: 0.0, brake_at: f64::INFINITY, brake_for: 0.0, brake: 0.0 }
}

/// Append a platoon on `path` from `kinds` (first = head), spaced at equilibrium gaps.
#[allow(clippy::too_many_arguments)]
fn platoon(
    agents: &mut Vec<Agent>,
    prefix: &str,
    kinds: &[AgentType],
    path: Path,
    s_head: f64,
    head: fn(f64, f64, &Disturbance) -> f64,
    dist: Disturbance,
    rng: &mut ChaCha8Rng,
) {
    let head_idx = agents.len();
    let mut s = s_head;
    let d0 = dist;
    let v0 = head(0.0, s_head, &d0);
    for (j, &kind) in kinds.iter().enumerate() {
        let (length, width) = dims(kind);
        let control = if j == 0 {
            Control::Head(head)
        } else {
            let (headway, delay) = if kind == AgentType::Av {
                (rng.random_range(0.9..1.2), rng.random_range(0.2..0.4))
            } else {
                (rng.random_range(1.8..2.1), rng.random_range(0.5..1.0))
            };
            let prev = &agents[head_idx + j - 1];
            let gap = 2.0 + 0.5 * (prev.length + length) + headway * v0;
            s -= gap;
            Control::Follow {
                leader: head_idx + j - 1,
                delay_steps: (delay / 0.1_f64).round() as usize,
                headway,
                standstill: 2.0,
            }
        };
        let label = match kind {
            AgentType::Av => "av",
            AgentType::Truck => "truck",
            AgentType::Bus => "bus",
            _ => "car",
        };
        agents.push(Agent {
            id: format!("{prefix}-{label}{j}"),
            kind,
            length,
            width,
            path,
            control,
            dist,
            s: vec![s],
            v: vec![v0],
            a: 0.0,
        });
    }
}

fn freeway(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> SyntheticDataset {
    use AgentType::*;
    let steps = (cfg.duration / cfg.dt).round() as usize + 1;
    let mut agents = Vec::new();
    let lanes = [("1", 0.0), ("2", 3.6)];
    let kinds: [&[AgentType]; 2] = [&[Car, Av, Car, Car, Av, Car, Truck], &[Car, Car, Av, Car, Bus, Av, Car]];
    for (li, ((lane, y), ks)) in lanes.iter().zip(kinds).enumerate() {
        let dist = Disturbance {
            base: rng.random_range(22.0..27.0),
            amp: rng.random_range(1.5..3.0),
            phase: rng.random_range(0.0..std::f64::consts::TAU),
            brake_at: rng.random_range(15.0..40.0),
            brake_for: rng.random_range(1.0..2.0),
            brake: rng.random_range(2.8..4.0),
        };
        let path = Path::Line { origin: (0.0, *y), dir: (1.0, 0.0), lane };
        platoon(&mut agents, &format!("fw{}", li + 1), ks, path, 400.0 + 15.0 * li as f64, freeway_profile, dist, rng);
    }
    simulate(&mut agents, steps, cfg.dt);
    SyntheticDataset {
        name: "freeway".into(),
        topology: LaneTopology { adjacency: vec![("1".into(), "2".into())], lane_width: 3.6 },
        rows: to_rows(&agents, steps, cfg.dt, cfg.position_noise, rng),
    }
}

fn urban(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> SyntheticDataset {
    use AgentType::*;
    let steps = (cfg.duration / cfg.dt).round() as usize + 1;
    let mut agents = Vec::new();
    let dist = Disturbance {
        base: rng.random_range(11.0..13.0),
        brake_at: rng.random_range(12.0..18.0),
        brake: 2.5,
        ..calm()
    };
    platoon(
        &mut agents,
        "ub",
        &[Car, Av, Car, Av, Car, Car],
        Path::LeftTurn { approach: 118.0, radius: 12.0 },
        90.0,
        urban_profile,
        dist,
        rng,
    );
    let through = Disturbance {
        base: rng.random_range(9.0..12.0),
        amp: 1.0,
        phase: rng.random_range(0.0..std::f64::consts::TAU),
        ..calm()
    };
    let path = Path::Line { origin: (150.0, 3.5), dir: (-1.0, 0.0), lane: "W1" };
    platoon(&mut agents, "ut", &[Car, Av, Car, Truck], path, 60.0, freeway_profile, through, rng);
    for (j, (x0, start)) in [(4.0, -8.0), (6.0, -12.0), (-20.0, 14.0)].into_iter().enumerate() {
        let (length, width) = dims(Pedestrian);
        let dir = if start < 0.0 { (0.0, 1.0) } else { (0.0, -1.0) };
        let speed = rng.random_range(1.1..1.5);
        agents.push(Agent {
            id: format!("ub-ped{j}"),
            kind: Pedestrian,
            length,
            width,
            path: Path::Line { origin: (x0, start), dir, lane: "" },
            control: Control::Cruise,
            dist: calm(),
            s: vec![0.0],
            v: vec![speed],
            a: 0.0,
        });
    }
    let (length, width) = dims(Cyclist);
    agents.push(Agent {
        id: "ub-bike0".into(),
        kind: Cyclist,
        length,
        width,
        path: Path::Line { origin: (-120.0, -1.4), dir: (1.0, 0.0), lane: "E1" },
        control: Control::Cruise,
        dist: calm(),
        s: vec![0.0],
        v: vec![rng.random_range(4.0..5.5)],
        a: 0.0,
    });
    simulate(&mut agents, steps, cfg.dt);
    SyntheticDataset {
        name: "urban".into(),
        topology: LaneTopology { adjacency: vec![("E1".into(), "W1".into())], lane_width: 3.5 },
        rows: to_rows(&agents, steps, cfg.dt, cfg.position_noise, rng),
    }
}

/// The bundled scenarios, fully determined by `seed`.
pub fn synthetic_datasets(seed: u64, cfg: &SynthConfig) -> Vec<SyntheticDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fw = freeway(cfg, &mut rng);
    let ub = urban(cfg, &mut rng);
    vec![fw, ub]
}

pub const RAW_HEADER: [&str; 8] = ["id", "time", "x", "y", "lane", "type", "length", "width"];

/// Write rows in the default raw-table layout understood by
/// [`ColumnSchema::default`](crate::ingest::ColumnSchema).
pub fn write_raw_table<W: Write>(writer: W, rows: &[RawRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RAW_HEADER)?;
    for r in rows {
        w.write_record([
            r.id.clone(),
            fmt_f64(r.time),
            fmt_f64(r.x),
            fmt_f64(r.y),
            r.lane.clone().unwrap_or_default(),
            r.agent_type.as_str().to_string(),
            fmt_f64(r.length),
            fmt_f64(r.width),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{read_trajectories, ColumnSchema};

    #[test]
    fn deterministic_and_loadable() {
        let cfg = SynthConfig::default();
        let a = synthetic_datasets(7, &cfg);
        let b = synthetic_datasets(7, &cfg);
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        write_raw_table(&mut buf_a, &a[0].rows).unwrap();
        write_raw_table(&mut buf_b, &b[0].rows).unwrap();
        assert_eq!(buf_a, buf_b);
        let loaded = read_trajectories(&buf_a[..], &ColumnSchema::default(), cfg.dt).unwrap();
        assert_eq!(loaded.dropped_rows, 0);
        assert_eq!(loaded.tracks.len(), 14);
    }

    #[test]
    fn scenarios_are_finite_and_nontrivial() {
        let cfg = SynthConfig { position_noise: 0.0, ..Default::default() };
        for ds in synthetic_datasets(3, &cfg) {
            assert!(ds.rows.len() > 1000, "{}", ds.name);
            for r in &ds.rows {
                assert!(r.x.is_finite() && r.y.is_finite());
            }
        }
    }

    #[test]
    fn turn_path_is_continuous() {
        let p = Path::LeftTurn { approach: 100.0, radius: 10.0 };
        let mut prev = p.at(0.0);
        for k in 1..3000 {
            let q = p.at(k as f64 * 0.1);
            let step = ((q.0 - prev.0).powi(2) + (q.1 - prev.1).powi(2)).sqrt();
            assert!(step <= 0.1 + 1e-9);
            prev = q;
        }
    }
}
