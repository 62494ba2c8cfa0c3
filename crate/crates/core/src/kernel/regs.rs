//! Register map of the simulation kernel.
//!
//! Registers `0..RELAY_REGS` belong to the leader views. The scratch block is
//! shared by all recursion depths because a depth finishes with it before the
//! next one starts. Each depth owns a five-word frame holding its line
//! problem: switch, left port label and flags, right port label and flags.
//! The depth-`d` frame is overwritten with that depth's answer.

use crate::mmpb::RELAY_REGS;

pub const TMP_F: usize = RELAY_REGS;
pub const TMP_B: usize = TMP_F + 1;

// Running prefix / suffix labels of both ports during a sweep.
pub const PL: usize = TMP_B + 1;
pub const PLF: usize = PL + 1;
pub const PR: usize = PL + 2;
pub const PRF: usize = PL + 3;
pub const SL: usize = PL + 4;
pub const SLF: usize = PL + 5;
pub const SR: usize = PL + 6;
pub const SRF: usize = PL + 7;

// Labels local to the sub-block.
pub const LOC_L: usize = SRF + 1;
pub const LOC_LF: usize = LOC_L + 1;
pub const LOC_R: usize = LOC_L + 2;
pub const LOC_RF: usize = LOC_L + 3;

// Chain over sub-block boundaries.
pub const CH_PRE: usize = LOC_RF + 1;
pub const CH_PREF: usize = CH_PRE + 1;
pub const CH_SUF: usize = CH_PRE + 2;
pub const CH_SUFF: usize = CH_PRE + 3;
pub const CH_PIN: usize = CH_PRE + 4;
pub const CH_PINF: usize = CH_PRE + 5;
pub const CH_SIN: usize = CH_PRE + 6;
pub const CH_SINF: usize = CH_PRE + 7;

// Block-wide labels of the sub-block's boundary components.
pub const G_L: usize = CH_SINF + 1;
pub const G_LF: usize = G_L + 1;
pub const G_R: usize = G_L + 2;
pub const G_RF: usize = G_L + 3;

pub const FRAME_BASE: usize = G_RF + 1;
pub const FRAME_LEN: usize = 5;

/// Frame offsets.
pub const SW: usize = 0;
pub const L: usize = 1;
pub const LF: usize = 2;
pub const R: usize = 3;
pub const RF: usize = 4;

/// First register of the depth-`depth` frame.
pub const fn frame(depth: usize) -> usize {
    FRAME_BASE + FRAME_LEN * depth
}

/// Registers per PE needed for `levels` bus levels.
pub const fn reg_budget(levels: usize) -> usize {
    frame(levels + 1)
}
