//! Empirical multi-objective frontier learning for automated-vehicle trajectories.
//!
//! The crate walks a trajectory table through five layers:
//!
//! * [`ingest`]: load, rescale, smooth and differentiate agent tracks.
//! * [`interaction`]: ego-relative geometry, detection zones, leader and follower selection.
//! * [`metrics`]: surrogate risk with a generalized Pareto tail, headway, string-stability
//!   gain with estimated follower delay, jerk and deceleration events.
//! * [`objectives`]: min-max normalization, composite safety/efficiency/interaction scores
//!   and nearest-neighbour imputation.
//! * [`frontier`]: Pareto-optimal set, Gaussian-process frontier surface, headroom,
//!   convex-hull comparison and run summaries.
//!
//! [`synth`] generates small mixed-traffic datasets for tests and demos.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons deliberately reject NaN

pub mod error;
pub mod frontier;
pub mod ingest;
pub mod interaction;
pub mod metrics;
pub mod objectives;
pub mod stats;
pub mod synth;

mod optim;

pub use error::{Error, Result};
pub use frontier::{dominates, pareto_set, FrontierModel, HeadroomReport, ParetoResult, RunSummary};
pub use ingest::{AgentTrack, AgentType, FrameTransform, SmoothingConfig, TrajectoryFrame};
pub use interaction::{AffineSpacingPolicy, InteractionPair, Role, ZoneConfig};
pub use metrics::{MetricRecord, SpacingModel, TailModel};
pub use objectives::{NormalizationContext, ObjectiveVector, Objectives};

/// Sampling interval of every trajectory table handled by the pipeline, in seconds.
pub const DEFAULT_DT: f64 = 0.1;
