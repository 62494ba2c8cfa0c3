//! Simulation of meshes with separable buses on meshes with statically
//! partitioned multi-level buses, with round-exact accounting.
//!
//! * [`bus`], [`pc_graph`], [`msb`]: the guest machine and its sequential
//!   reference semantics.
//! * [`mmpb`]: the host machine and its leader views.
//! * [`kernel`]: the simulation algorithm run on the host.
//! * [`harness`]: scenario generation, verification and scaling campaigns.

pub mod bus;
pub mod geom;
pub mod harness;
pub mod kernel;
pub mod mmpb;
pub mod msb;
pub mod pc_graph;
