//! The host machine: an `n × n` mesh whose rows and columns each carry `L`
//! statically partitioned buses.

mod config;
mod machine;
mod program;
mod view;

pub use config::{BusModel, ConfigError, MmpbConfig, Shape};
pub use machine::{BusWrite, MachineError, Mmpb, Observation, PeId, PeObs, RoundAction, RoundKind};
pub use program::{run_program, Program};
pub use view::{make_virtual_view, Hop, HopDir, Sel, VirtualView, EMPTY, RELAY_COST, RELAY_REGS};

/// Index of the level-`level` segment containing line position `pos`.
pub fn segment_of(cfg: &MmpbConfig, pos: usize, level: usize) -> usize {
    pos / cfg.length(level)
}
