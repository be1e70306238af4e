use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angular sector `[min_angle, max_angle)` in degrees, measured counter-clockwise from the
/// ego heading, out to `max_range` meters. Sectors may wrap through ±180°.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub name: String,
    pub min_angle: f64,
    pub max_angle: f64,
    pub max_range: f64,
}

impl Zone {
    pub fn new(name: &str, min_angle: f64, max_angle: f64, max_range: f64) -> Self {
        Self { name: name.to_string(), min_angle, max_angle, max_range }
    }

    fn width(&self) -> f64 {
        self.max_angle - self.min_angle
    }

    /// Lower edge closed, upper edge open.
    pub fn contains_bearing(&self, rho: f64) -> bool {
        (rho - self.min_angle).rem_euclid(360.0) < self.width()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneConfig {
    pub zones: Vec<Zone>,
}

impl Default for ZoneConfig {
    fn default() -> Self {
        Self {
            zones: vec![
                Zone::new("forward", -30.0, 30.0, 80.0),
                Zone::new("forward_left", 30.0, 60.0, 60.0),
                Zone::new("forward_right", -60.0, -30.0, 60.0),
                Zone::new("left", 60.0, 120.0, 20.0),
                Zone::new("right", -120.0, -60.0, 20.0),
                Zone::new("rear", 120.0, 240.0, 80.0),
            ],
        }
    }
}

impl ZoneConfig {
    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        for z in &self.zones {
            if !(z.max_range > 0.0) {
                return Err(Error::Config(format!("zone `{}` needs max_range > 0", z.name)));
            }
            let w = z.width();
            if !(w > 0.0 && w <= 360.0) || !z.min_angle.is_finite() {
                return Err(Error::Config(format!(
                    "zone `{}` has an ill-formed angular interval [{}, {})",
                    z.name, z.min_angle, z.max_angle
                )));
            }
            if !names.insert(z.name.as_str()) {
                return Err(Error::Config(format!("duplicate zone name `{}`", z.name)));
            }
        }
        for required in ["forward", "rear"] {
            if !names.contains(required) {
                return Err(Error::Config(format!("zone config must define `{required}`")));
            }
        }
        Ok(())
    }

    /// First zone (in configuration order) covering the bearing and range.
    pub fn locate(&self, rho: f64, range: f64) -> Option<&Zone> {
        self.zones.iter().find(|z| z.contains_bearing(rho) && range <= z.max_range)
    }
}
