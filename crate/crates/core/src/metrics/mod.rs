//! Behavioral metrics per (ego, timestep): surrogate risk with a generalized Pareto tail,
//! headway to the validated leader, string-stability gain with estimated follower delay,
//! jerk, and deceleration events.

mod delay;
mod events;
mod features;
mod gain;
mod headway;
mod model_io;
mod network;
mod pipeline;
mod risk;
mod smoother;
mod spacing;
mod tail;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::table::{fmt_f64, fmt_opt};

pub use delay::{
    estimate_delay_samples, estimate_delay_xcorr, refine_delay, DelayModel, DelayObservation, DEFAULT_WINDOW,
    MAX_DELAY, MIN_DELAY_OBSERVATIONS,
};
pub use events::{
    detect_decel_events, jerk_flags, DecelEvent, JerkFlag, DECEL_MIN_FRAMES, DECEL_THRESHOLD, JERK_THRESHOLD,
};
pub use features::{FeatureEncoder, InteractionFeatures};
pub use gain::{interpolate, shifted_sample, stability_gain, DEFAULT_A_MIN};
pub use headway::{compute_headway, Headway};
pub use model_io::{read_models, write_models, MetricModels, ModelEncoding, MODEL_FORMAT_VERSION};
pub use network::{Network, NetworkConfig};
pub use pipeline::{compute_metrics, Dataset, GainAlignment, MetricsConfig, MetricsDiagnostics, MetricsOutput};
pub use risk::{risk_from_survival, risk_score, RiskScore, SURVIVAL_CLAMP};
pub use smoother::{fit_additive, AdditiveConfig, AdditiveModel, FactorTerm, SmoothTerm, SplineBasis};
pub use spacing::{
    fit_spacing_model, Regressor, RegressorKind, ScaleCorrection, SpacingFitConfig, SpacingModel, MIN_TRAINING_PAIRS,
};
pub use tail::{
    fit_gpd_exceedances, fit_gpd_tail, gpd_log_likelihood, gpd_moments, tail_exceedance_prob, TailModel,
    MIN_EXCEEDANCES, XI_MAX, XI_MIN,
};

/// Which metrics of a record could be computed, plus processing notes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricFlags {
    pub risk: bool,
    pub tail: bool,
    pub headway: bool,
    pub gain: bool,
    pub tau: bool,
    pub jerk: bool,
    pub decel: bool,
    /// The survival probability behind the risk score was clamped away from 0 or 1.
    pub risk_clamped: bool,
    /// `tau` comes from the context model rather than the raw cross-correlation.
    pub tau_refined: bool,
    /// The ego heading was held over from an earlier moving sample.
    pub heading_held: bool,
}

/// The five behavioral metrics of one ego at one timestep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub ego_id: String,
    pub group: String,
    pub t: f64,
    pub step: i64,
    /// Largest risk score over all agents detected in any zone.
    pub m_max: Option<f64>,
    pub m_agent: Option<String>,
    /// `P(M' > m_max)` from the tail model when `m_max` is above its threshold.
    pub tail_prob: Option<f64>,
    pub headway_dist: Option<f64>,
    pub headway_time: Option<f64>,
    pub leader_id: Option<String>,
    pub follower_id: Option<String>,
    pub gain: Option<f64>,
    pub tau: Option<f64>,
    pub jerk_mag: Option<f64>,
    pub jerk_flag: bool,
    /// Per-ego index of the deceleration event covering this timestep.
    pub decel_event_id: Option<usize>,
    /// Braking magnitude `max(0, -a_long)`, reported at every timestep.
    pub decel_mag: Option<f64>,
    pub flags: MetricFlags,
}

impl MetricRecord {
    pub fn empty(ego_id: &str, group: &str, t: f64, step: i64) -> Self {
        Self {
            ego_id: ego_id.to_string(),
            group: group.to_string(),
            t,
            step,
            m_max: None,
            m_agent: None,
            tail_prob: None,
            headway_dist: None,
            headway_time: None,
            leader_id: None,
            follower_id: None,
            gain: None,
            tau: None,
            jerk_mag: None,
            jerk_flag: false,
            decel_event_id: None,
            decel_mag: None,
            flags: MetricFlags::default(),
        }
    }
}

pub const METRICS_HEADER: [&str; 27] = [
    "ego_id",
    "group",
    "t",
    "step",
    "M_max",
    "m_agent",
    "tail_prob",
    "headway_dist",
    "headway_time",
    "leader_id",
    "follower_id",
    "gain",
    "tau",
    "jerk_mag",
    "jerk_flag",
    "decel_event_id",
    "decel_mag",
    "valid_risk",
    "valid_tail",
    "valid_headway",
    "valid_gain",
    "valid_tau",
    "valid_jerk",
    "valid_decel",
    "risk_clamped",
    "tau_refined",
    "heading_held",
];

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_metrics_table<W: Write>(writer: W, records: &[MetricRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(METRICS_HEADER)?;
    for r in records {
        let f = &r.flags;
        w.write_record([
            r.ego_id.clone(),
            r.group.clone(),
            fmt_f64(r.t),
            r.step.to_string(),
            fmt_opt(r.m_max),
            r.m_agent.clone().unwrap_or_default(),
            fmt_opt(r.tail_prob),
            fmt_opt(r.headway_dist),
            fmt_opt(r.headway_time),
            r.leader_id.clone().unwrap_or_default(),
            r.follower_id.clone().unwrap_or_default(),
            fmt_opt(r.gain),
            fmt_opt(r.tau),
            fmt_opt(r.jerk_mag),
            flag(r.jerk_flag).into(),
            r.decel_event_id.map(|i| i.to_string()).unwrap_or_default(),
            fmt_opt(r.decel_mag),
            flag(f.risk).into(),
            flag(f.tail).into(),
            flag(f.headway).into(),
            flag(f.gain).into(),
            flag(f.tau).into(),
            flag(f.jerk).into(),
            flag(f.decel).into(),
            flag(f.risk_clamped).into(),
            flag(f.tau_refined).into(),
            flag(f.heading_held).into(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Read a metrics table. Only `ego_id` and `t` are mandatory; missing metric columns read
/// as absent values, a missing `group` as `"default"`, a missing `step` as `round(t / dt)`.
/// Validity flags default to the presence of the corresponding value.
pub fn read_metrics_table<R: Read>(reader: R, dt: f64) -> Result<Vec<MetricRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let ego_c = col("ego_id").ok_or_else(|| Error::MissingColumn("ego_id".into()))?;
    let t_c = col("t").ok_or_else(|| Error::MissingColumn("t".into()))?;
    let cols: Vec<Option<usize>> = METRICS_HEADER.iter().map(|h| col(h)).collect();
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let text = |k: usize| cols[k].and_then(|c| rec.get(c)).map(str::trim).filter(|s| !s.is_empty());
        let num = |k: usize| -> Result<Option<f64>> {
            match text(k) {
                None => Ok(None),
                Some(s) => s.parse::<f64>().map(|v| v.is_finite().then_some(v)).map_err(|_| {
                    Error::Schema(format!("row {}: `{}` is not a number: {s:?}", line + 2, METRICS_HEADER[k]))
                }),
            }
        };
        let bool_at =
            |k: usize, default: bool| text(k).map(|s| s == "1" || s.eq_ignore_ascii_case("true")).unwrap_or(default);
        let t: f64 = rec
            .get(t_c)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| Error::Schema(format!("row {}: invalid time", line + 2)))?;
        let step = match text(3) {
            Some(s) => s.parse().map_err(|_| Error::Schema(format!("row {}: invalid step", line + 2)))?,
            None => (t / dt).round() as i64,
        };
        let mut r = MetricRecord::empty(rec.get(ego_c).unwrap_or(""), text(1).unwrap_or("default"), t, step);
        r.m_max = num(4)?;
        r.m_agent = text(5).map(String::from);
        r.tail_prob = num(6)?;
        r.headway_dist = num(7)?;
        r.headway_time = num(8)?;
        r.leader_id = text(9).map(String::from);
        r.follower_id = text(10).map(String::from);
        r.gain = num(11)?;
        r.tau = num(12)?;
        r.jerk_mag = num(13)?;
        r.jerk_flag = bool_at(14, r.jerk_mag.is_some_and(|j| j > JERK_THRESHOLD));
        r.decel_event_id = text(15).and_then(|s| s.parse().ok());
        r.decel_mag = num(16)?;
        r.flags = MetricFlags {
            risk: bool_at(17, r.m_max.is_some()),
            tail: bool_at(18, r.tail_prob.is_some()),
            headway: bool_at(19, r.headway_dist.is_some() || r.headway_time.is_some()),
            gain: bool_at(20, r.gain.is_some()),
            tau: bool_at(21, r.tau.is_some()),
            jerk: bool_at(22, r.jerk_mag.is_some()),
            decel: bool_at(23, r.decel_mag.is_some()),
            risk_clamped: bool_at(24, false),
            tau_refined: bool_at(25, false),
            heading_held: bool_at(26, false),
        };
        out.push(r);
    }
    Ok(out)
}
