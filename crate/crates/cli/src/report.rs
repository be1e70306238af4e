//! Plot-ready histogram data.

use avfrontier::metrics::MetricRecord;
use serde::{Deserialize, Serialize};

use crate::config::Thresholds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` ascending edges; the last bin is closed on the right.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins spanning the data. A constant sample gets a unit-wide span centred
    /// on its value. `None` for an empty sample.
    pub fn build(values: &[f64], bins: usize) -> Option<Self> {
        if values.is_empty() || bins == 0 {
            return None;
        }
        let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi == lo {
            lo -= 0.5;
            hi += 0.5;
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|k| if k == bins { hi } else { lo + width * k as f64 }).collect();
        let mut counts = vec![0usize; bins];
        for v in values {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Some(Self { edges, counts })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// The five histogrammed metrics: name, metrics-table column, reference line.
pub fn histogram_specs(t: &Thresholds) -> [(&'static str, &'static str, f64); 5] {
    [
        ("m_max", "M_max", t.m_max),
        ("headway", "headway_time", t.headway),
        ("gain", "gain", t.gain),
        ("jerk", "jerk_mag", t.jerk),
        ("decel", "decel_mag", t.decel),
    ]
}

/// Values of one histogrammed metric over the rows whose validity flag is set.
pub fn valid_values(records: &[MetricRecord], metric: &str) -> Vec<f64> {
    records
        .iter()
        .filter_map(|r| match metric {
            "m_max" => r.m_max.filter(|_| r.flags.risk),
            "headway" => r.headway_time.filter(|_| r.flags.headway),
            "gain" => r.gain.filter(|_| r.flags.gain),
            "jerk" => r.jerk_mag.filter(|_| r.flags.jerk),
            "decel" => r.decel_mag.filter(|_| r.flags.decel),
            _ => None,
        })
        .filter(|v| v.is_finite())
        .collect()
}
