//! The simulation of a guest broadcast on the host.
//!
//! Each guest bus is a line of ports whose components are intervals; the
//! kernel computes, for every port, the minimum value written into its
//! component together with a conflict flag, which is exactly what the guest
//! bus delivers. Rows and columns are separate line problems, all lines of
//! one axis running in lockstep.

mod bound;
mod label;
mod linear;
mod recursive;
pub mod regs;
mod report;
mod step;

use thiserror::Error;

pub use bound::{choose_segment_lengths, eval_bound, level_term, wire_budget, StepBound, WireBudget};
pub use label::{Lab, CONFLICT, CONN_E, CONN_S, PHI};
pub use linear::{label_blocks_rounds, sub_block};
#[doc(hidden)]
pub use recursive::Fault;
pub use report::{AxisReport, LevelTrace, StepReport};
pub use step::{sim_bus_t, sim_bus_v, Host, MIN_HOST_SIDE};

use crate::mmpb::{ConfigError, MachineError};
use crate::msb::MsbError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("host side {0} is below the kernel minimum of 8")]
    TooSmall(usize),
    #[error("guest and host shapes do not match")]
    Shape,
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Msb(#[from] MsbError),
}
