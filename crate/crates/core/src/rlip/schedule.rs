use serde::{Deserialize, Serialize};

/// Linear sampling-temperature schedule `base + iteration·step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperatureSchedule {
    pub base: f64,
    pub step: f64,
}

impl Default for TemperatureSchedule {
    fn default() -> Self {
        TemperatureSchedule { base: 1.0, step: 0.05 }
    }
}

impl TemperatureSchedule {
    pub fn at(&self, iteration: u32) -> f64 {
        temperature(iteration, self.base, self.step)
    }
}

pub fn temperature(iteration: u32, base: f64, step: f64) -> f64 {
    base + f64::from(iteration) * step
}
