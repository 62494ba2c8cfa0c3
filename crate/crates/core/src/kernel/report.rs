//! Round accounting of a simulated step.

use serde::Serialize;

use crate::geom::Axis;
use crate::mmpb::BusModel;

/// Rounds spent at one recursion depth.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LevelTrace {
    pub depth: usize,
    /// Real PEs per virtual PE at this depth.
    pub stride: usize,
    /// Block size in virtual PEs (the whole line when no level is left).
    pub block: usize,
    /// Real level whose segments are the blocks.
    pub level: Option<usize>,
    /// Labeling inside the blocks.
    pub phase1: u64,
    /// Handing block boundaries to the leaders.
    pub gather: u64,
    /// Spreading the leaders' answers back into the blocks.
    pub distribute: u64,
}

impl LevelTrace {
    pub fn rounds(&self) -> u64 {
        self.phase1 + self.gather + self.distribute
    }
}

/// One axis (all rows, or all columns, in lockstep).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxisReport {
    pub axis: Axis,
    pub rounds: u64,
    pub bus_rounds: u64,
    pub trace: Vec<LevelTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub n: usize,
    pub levels: usize,
    pub lengths: Vec<usize>,
    pub model: BusModel,
    /// Rounds of the local-communication sub-step.
    pub local_rounds: u64,
    pub row: AxisReport,
    pub col: Option<AxisReport>,
    pub total_rounds: u64,
    pub bus_rounds: u64,
    /// The bound expression for all `L` levels.
    pub bound: f64,
}
