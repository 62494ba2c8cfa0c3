//! Scenario generation, verification campaigns and scaling experiments.

mod experiment;
mod scenario;

use thiserror::Error;

pub use experiment::{
    bound_table, csv_string, demo, demo_on, run_campaign, run_scale, run_verify, sort_rows, write_csv, AxisMode,
    ExperimentSpec, LevelPolicy, ResultRow, CSV_HEADER, MAX_FULL_SIDE, MAX_ROW_SIDE, TRIAL_MIX,
};
pub use scenario::{
    generate_scenario, load_scenario, preset_scenario, random_line, random_scenario, save_scenario, scenario_from_json,
    scenario_to_json, Preset, SCENARIO_SCHEMA,
};

use crate::kernel::KernelError;
use crate::mmpb::ConfigError;
use crate::msb::MsbError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("n = {n}: round count changed between scenarios ({first} then {other})")]
    NotOblivious { n: usize, first: u64, other: u64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Msb(#[from] MsbError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<ConfigError> for HarnessError {
    fn from(e: ConfigError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl HarnessError {
    /// Whether the error is the user's configuration rather than a failure
    /// of the simulation.
    pub fn is_config(&self) -> bool {
        match self {
            HarnessError::Config(_) | HarnessError::Io(_) | HarnessError::Csv(_) | HarnessError::Msb(_) => true,
            HarnessError::Kernel(k) => matches!(
                k,
                KernelError::TooSmall(_) | KernelError::Config(_) | KernelError::Shape
            ),
            HarnessError::NotOblivious { .. } => false,
        }
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln() / k, b + y.ln() / k));
    let (num, den) = points.iter().fold((0.0, 0.0), |(num, den), (x, y)| {
        let dx = x.ln() - mx;
        (num + dx * (y.ln() - my), den + dx * dx)
    });
    num / den
}
