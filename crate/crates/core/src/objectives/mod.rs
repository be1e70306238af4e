//! Composite safety (S), efficiency (E) and interaction (I) objectives from metric records:
//! per-group min-max normalization, unweighted composite means and nearest-neighbour
//! imputation of missing objectives.

mod impute;

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::table::fmt_f64;
use crate::metrics::MetricRecord;
use crate::stats::percentile;

pub use impute::{knn_impute, ImputeReport};

/// Constituent metrics of the composites, in a fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Gssm,
    Headway,
    Gain,
    Jerk,
    Decel,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Gssm, Metric::Headway, Metric::Gain, Metric::Jerk, Metric::Decel];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Gssm => "gssm",
            Metric::Headway => "headway",
            Metric::Gain => "gain",
            Metric::Jerk => "jerk",
            Metric::Decel => "decel",
        }
    }

    /// Objective index (0 = S, 1 = E, 2 = I) the metric feeds.
    pub fn objective(self) -> usize {
        match self {
            Metric::Gssm => 0,
            Metric::Headway | Metric::Gain => 1,
            Metric::Jerk | Metric::Decel => 2,
        }
    }
}

pub const OBJECTIVE_NAMES: [&str; 3] = ["S", "E", "I"];

/// Which headway column feeds the efficiency objective.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadwayKind {
    #[default]
    Distance,
    Time,
}

/// How rows are grouped for normalization and imputation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grouping {
    /// One group per dataset source (the record's `group`).
    #[default]
    Dataset,
    /// All rows form a single group.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectivesConfig {
    pub headway: HeadwayKind,
    pub grouping: Grouping,
    /// Percentile band `(lo, hi)` outside of which rows are dropped before normalization.
    pub outlier_band: Option<(f64, f64)>,
    /// Groups with fewer rows than this skip the outlier filter.
    pub outlier_min_rows: usize,
    /// Lower-is-better flags, indexed like [`Metric::ALL`].
    pub invert: [bool; 5],
    pub knn_k: usize,
}

impl Default for ObjectivesConfig {
    fn default() -> Self {
        Self {
            headway: HeadwayKind::Distance,
            grouping: Grouping::Dataset,
            outlier_band: Some((0.1, 99.9)),
            outlier_min_rows: 1000,
            invert: [true; 5],
            knn_k: 5,
        }
    }
}

impl ObjectivesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.knn_k == 0 {
            return Err(Error::Config("knn k must be at least 1".into()));
        }
        if let Some((lo, hi)) = self.outlier_band {
            if !(0.0 <= lo && lo < hi && hi <= 100.0) {
                return Err(Error::Config(format!("outlier band ({lo}, {hi}) is not a percentile interval")));
            }
        }
        Ok(())
    }

    fn metric_value(&self, r: &MetricRecord, m: Metric) -> Option<f64> {
        match m {
            Metric::Gssm => r.m_max,
            Metric::Headway => match self.headway {
                HeadwayKind::Distance => r.headway_dist,
                HeadwayKind::Time => r.headway_time,
            },
            Metric::Gain => r.gain,
            Metric::Jerk => r.jerk_mag,
            Metric::Decel => r.decel_mag,
        }
        .filter(|v| v.is_finite())
    }

    fn group_of(&self, r: &MetricRecord) -> String {
        match self.grouping {
            Grouping::Dataset => r.group.clone(),
            Grouping::Global => "all".to_string(),
        }
    }
}

/// Observed range of one metric within a group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRange {
    pub metric: Metric,
    pub min: f64,
    pub max: f64,
    pub inverted: bool,
    /// Number of values the range was computed from.
    pub n: usize,
}

impl MetricRange {
    pub fn from_values(metric: Metric, values: &[f64], inverted: bool) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if values.is_empty() {
            Self { metric, min: 0.0, max: 0.0, inverted, n: 0 }
        } else {
            Self { metric, min, max, inverted, n: values.len() }
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.max <= self.min
    }

    /// Min-max map into [0, 1] (clamped when a frozen range is applied to new data), then
    /// `1 - x` when inverted. A degenerate range maps everything to 0.5.
    pub fn normalize(&self, v: f64) -> f64 {
        if self.is_degenerate() {
            return 0.5;
        }
        let x = ((v - self.min) / (self.max - self.min)).clamp(0.0, 1.0);
        if self.inverted {
            1.0 - x
        } else {
            x
        }
    }
}

/// Per-metric ranges of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationContext {
    pub group: String,
    pub ranges: Vec<MetricRange>,
}

impl NormalizationContext {
    pub fn range(&self, m: Metric) -> Option<&MetricRange> {
        self.ranges.iter().find(|r| r.metric == m)
    }
}

/// Normalize `values` against `range`; the flag reports a degenerate (constant) range.
pub fn minmax_normalize(values: &[f64], range: &MetricRange) -> (Vec<f64>, bool) {
    (values.iter().map(|v| range.normalize(*v)).collect(), range.is_degenerate())
}

/// `(S, E, I)` from normalized constituents (inversion already applied), indexed like
/// [`Metric::ALL`]. An objective with a missing constituent is missing.
pub fn composite_scores(normalized: &[Option<f64>; 5]) -> [Option<f64>; 3] {
    let mut out = [None; 3];
    for (o, slot) in out.iter_mut().enumerate() {
        let parts: Vec<Option<f64>> =
            Metric::ALL.iter().zip(normalized).filter(|(m, _)| m.objective() == o).map(|(_, v)| *v).collect();
        if parts.iter().all(Option::is_some) {
            *slot = Some(parts.iter().flatten().sum::<f64>() / parts.len() as f64);
        }
    }
    out
}

/// Objective triple of one (ego, timestep).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub ego_id: String,
    pub group: String,
    pub t: f64,
    pub step: i64,
    pub scores: [Option<f64>; 3],
    pub imputed: [bool; 3],
}

impl ObjectiveVector {
    pub fn is_complete(&self) -> bool {
        self.scores.iter().all(Option::is_some)
    }

    pub fn complete(&self) -> Option<[f64; 3]> {
        match self.scores {
            [Some(s), Some(e), Some(i)] => Some([s, e, i]),
            _ => None,
        }
    }
}

/// Result of the objectives stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Objectives {
    /// Same order as the surviving input records.
    pub vectors: Vec<ObjectiveVector>,
    pub contexts: Vec<NormalizationContext>,
    pub dropped_outliers: usize,
    pub warnings: Vec<String>,
}

impl Objectives {
    /// Complete `(S, E, I)` points in row order.
    pub fn points(&self) -> Vec<[f64; 3]> {
        self.vectors.iter().filter_map(ObjectiveVector::complete).collect()
    }
}

/// Rows inside the per-metric percentile band (all rows when the filter is off or the
/// group is small).
fn outlier_mask(rows: &[&MetricRecord], cfg: &ObjectivesConfig) -> Vec<bool> {
    let mut keep = vec![true; rows.len()];
    let Some((lo, hi)) = cfg.outlier_band else { return keep };
    if rows.len() < cfg.outlier_min_rows {
        return keep;
    }
    for m in Metric::ALL {
        let vals: Vec<f64> = rows.iter().filter_map(|r| cfg.metric_value(r, m)).collect();
        let (Some(a), Some(b)) = (percentile(&vals, lo), percentile(&vals, hi)) else { continue };
        for (k, r) in rows.iter().enumerate() {
            if let Some(v) = cfg.metric_value(r, m) {
                if v < a || v > b {
                    keep[k] = false;
                }
            }
        }
    }
    keep
}

/// Normalize, combine and impute. `frozen` contexts, when given, replace the ranges
/// computed from the data (every group present must have one).
pub fn build_objectives(
    records: &[MetricRecord],
    cfg: &ObjectivesConfig,
    frozen: Option<&[NormalizationContext]>,
) -> Result<Objectives> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    let mut warn = |msg: String| {
        log::warn!("{msg}");
        warnings.push(msg);
    };

    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        groups.entry(cfg.group_of(r)).or_default().push(i);
    }

    let mut keep = vec![true; records.len()];
    let mut contexts = Vec::new();
    for (group, idx) in &groups {
        let rows: Vec<&MetricRecord> = idx.iter().map(|&i| &records[i]).collect();
        for (k, ok) in outlier_mask(&rows, cfg).into_iter().enumerate() {
            keep[idx[k]] = ok;
        }
        let ctx = match frozen {
            Some(list) => list
                .iter()
                .find(|c| &c.group == group)
                .cloned()
                .ok_or_else(|| Error::Config(format!("no frozen normalization context for group `{group}`")))?,
            None => NormalizationContext {
                group: group.clone(),
                ranges: Metric::ALL
                    .iter()
                    .enumerate()
                    .map(|(mi, &m)| {
                        let vals: Vec<f64> = idx
                            .iter()
                            .filter(|&&i| keep[i])
                            .filter_map(|&i| cfg.metric_value(&records[i], m))
                            .collect();
                        MetricRange::from_values(m, &vals, cfg.invert[mi])
                    })
                    .collect(),
            },
        };
        for r in &ctx.ranges {
            if r.n > 0 && r.is_degenerate() {
                warn(format!(
                    "group `{group}`: metric `{}` is constant ({}); normalized to 0.5",
                    r.metric.as_str(),
                    r.min
                ));
            }
        }
        contexts.push(ctx);
    }
    let dropped = keep.iter().filter(|k| !**k).count();
    if dropped > 0 {
        log::info!("outlier filter dropped {dropped} rows");
    }

    let ctx_of: BTreeMap<&str, &NormalizationContext> = contexts.iter().map(|c| (c.group.as_str(), c)).collect();
    let mut vectors: Vec<ObjectiveVector> = records
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(r, _)| {
            let group = cfg.group_of(r);
            let ctx = ctx_of[group.as_str()];
            let mut norm = [None; 5];
            for (mi, m) in Metric::ALL.iter().enumerate() {
                norm[mi] = cfg.metric_value(r, *m).and_then(|v| ctx.range(*m).map(|rg| rg.normalize(v)));
            }
            ObjectiveVector {
                ego_id: r.ego_id.clone(),
                group,
                t: r.t,
                step: r.step,
                scores: composite_scores(&norm),
                imputed: [false; 3],
            }
        })
        .collect();

    let report = knn_impute(&mut vectors, cfg.knn_k)?;
    for w in report.warnings {
        warn(w);
    }
    Ok(Objectives { vectors, contexts, dropped_outliers: dropped, warnings })
}

pub const OBJECTIVES_HEADER: [&str; 9] = ["ego_id", "t", "S", "E", "I", "imputed_S", "imputed_E", "imputed_I", "group"];

pub fn write_objectives_table<W: Write>(writer: W, vectors: &[ObjectiveVector]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(OBJECTIVES_HEADER)?;
    for v in vectors {
        let s = |k: usize| v.scores[k].map(fmt_f64).unwrap_or_default();
        let b = |k: usize| if v.imputed[k] { "1" } else { "0" }.to_string();
        w.write_record([v.ego_id.clone(), fmt_f64(v.t), s(0), s(1), s(2), b(0), b(1), b(2), v.group.clone()])?;
    }
    w.flush()?;
    Ok(())
}

/// Read an objectives table; `S`, `E`, `I` and `t` are mandatory, other columns optional.
pub fn read_objectives_table<R: Read>(reader: R, dt: f64) -> Result<Vec<ObjectiveVector>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let need = |name: &str| col(name).ok_or_else(|| Error::MissingColumn(name.into()));
    let (t_c, s_c, e_c, i_c) = (need("t")?, need("S")?, need("E")?, need("I")?);
    let (ego_c, g_c) = (col("ego_id"), col("group"));
    let imp_c = [col("imputed_S"), col("imputed_E"), col("imputed_I")];
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let get = |c: Option<usize>| c.and_then(|c| rec.get(c)).map(str::trim).unwrap_or("");
        let num = |c: usize| -> Result<Option<f64>> {
            let s = get(Some(c));
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>().map(Some).map_err(|_| Error::Schema(format!("row {}: `{s}` is not a number", line + 2)))
        };
        let t = num(t_c)?.ok_or_else(|| Error::Schema(format!("row {}: missing time", line + 2)))?;
        out.push(ObjectiveVector {
            ego_id: get(ego_c).to_string(),
            group: Some(get(g_c)).filter(|g| !g.is_empty()).unwrap_or("default").to_string(),
            t,
            step: (t / dt).round() as i64,
            scores: [num(s_c)?, num(e_c)?, num(i_c)?],
            imputed: imp_c.map(|c| get(c) == "1"),
        });
    }
    Ok(out)
}

pub fn write_contexts<W: Write>(writer: W, contexts: &[NormalizationContext]) -> Result<()> {
    serde_json::to_writer_pretty(writer, contexts)?;
    Ok(())
}

pub fn read_contexts<R: Read>(reader: R) -> Result<Vec<NormalizationContext>> {
    Ok(serde_json::from_reader(reader)?)
}
