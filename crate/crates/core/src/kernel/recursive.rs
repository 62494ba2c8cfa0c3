//! Multi-level line labeling.
//!
//! At a view whose shortest usable level has blocks of `λ` PEs:
//! 1. every block is labeled on its own segment ([`label_blocks`]);
//! 2. each block's rightmost PE hands its boundary label and through flag to
//!    the leader, which poses the leaders' line problem one frame deeper and
//!    solves it on the child view with one level fewer;
//! 3. each leader announces the two global boundary labels on its block
//!    segment and every port attached to a block boundary adopts them.
//!
//! With no usable level left, the whole line is one sweep.

use super::label::{unwire, wire, Lab, CONFLICT, CONN_E, CONN_S};
use super::linear::{finish_from_local, label_blocks, sweep};
use super::regs::*;
use super::report::LevelTrace;
use crate::bus::Word;
use crate::mmpb::{MachineError, Mmpb, Sel, VirtualView};

/// Deliberate kernel defects, for checking that verification notices them.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Leaders never hand the global boundary labels back to their blocks.
    SkipDistribute,
}

/// Solves the line problem held in the depth-`depth` frame of every line of
/// `view`, recording the rounds spent at each depth in `trace`.
pub fn solve_lines(
    m: &mut Mmpb,
    view: &VirtualView,
    depth: usize,
    trace: &mut Vec<LevelTrace>,
    fault: Option<Fault>,
) -> Result<(), MachineError> {
    let f = frame(depth);
    let start = m.rounds();
    let mut t = LevelTrace {
        depth,
        stride: view.stride(),
        block: view.len(),
        level: None,
        ..LevelTrace::default()
    };
    let Some(&level) = view.levels().last() else {
        sweep(m, view, view.len(), f)?;
        finish_from_local(m, view, f);
        t.phase1 = m.rounds() - start;
        trace.push(t);
        return Ok(());
    };
    let lambda = view.virtual_length(level);
    t.block = lambda;
    t.level = Some(level);
    label_blocks(m, view, level, lambda, f)?;
    t.phase1 = m.rounds() - start;
    if lambda == view.len() {
        trace.push(t);
        return Ok(());
    }

    let c = frame(depth + 1);
    let mark = m.rounds();
    gather(m, view, level, lambda, f, c)?;
    t.gather = m.rounds() - mark;
    let slot = trace.len();
    trace.push(t);

    let child = view.child().expect("a usable level yields a child view");
    solve_lines(m, &child, depth + 1, trace, fault)?;
    if fault == Some(Fault::SkipDistribute) {
        return Ok(());
    }

    let mark = m.rounds();
    distribute(m, view, level, lambda, f, c)?;
    trace[slot].distribute = m.rounds() - mark;
    Ok(())
}

/// Builds the leader's child frame from its block's boundary ports.
fn child_frame(regs: &mut [Word], f: usize, c: usize, right: Word, right_flags: Word) {
    regs[c + SW] = (right_flags & CONN_S != 0) as Word;
    regs[c + L] = regs[f + L];
    regs[c + LF] = regs[f + LF] & CONFLICT;
    regs[c + R] = right;
    regs[c + RF] = right_flags & CONFLICT;
}

fn gather(
    m: &mut Mmpb,
    view: &VirtualView,
    level: usize,
    lambda: usize,
    f: usize,
    c: usize,
) -> Result<(), MachineError> {
    if lambda == 1 {
        view.local(m, Sel::all(), |_, regs| {
            let (r, rf) = (regs[f + R], regs[f + RF]);
            child_frame(regs, f, c, r, rf);
        });
        return Ok(());
    }
    let rightmost = [Sel::new(lambda - 1, lambda)];
    let leader = [Sel::new(0, lambda)];
    view.bus_round(
        m,
        level,
        &rightmost,
        |_, regs| wire(regs[f + R]),
        &leader,
        |_, regs, sym| regs[TMP_F] = unwire(sym.data()),
    )?;
    view.bus_round(
        m,
        level,
        &rightmost,
        |_, regs| Some(regs[f + RF] & (CONFLICT | CONN_S)),
        &leader,
        |_, regs, sym| {
            let r = regs[TMP_F];
            child_frame(regs, f, c, r, sym.data().unwrap_or(0));
        },
    )
}

/// Ports attached to a block boundary adopt that boundary's global label.
fn adopt(regs: &mut [Word], f: usize, side: Word, global: Lab) {
    for port in [L, R] {
        let flags = regs[f + port + 1];
        if flags & side != 0 {
            global.store(regs, f + port, f + port + 1, flags & (CONN_S | CONN_E));
        }
    }
}

fn distribute(
    m: &mut Mmpb,
    view: &VirtualView,
    level: usize,
    lambda: usize,
    f: usize,
    c: usize,
) -> Result<(), MachineError> {
    if lambda == 1 {
        view.local(m, Sel::all(), |_, regs| {
            let (gl, gr) = (Lab::from_regs(regs, c + L, c + LF), Lab::from_regs(regs, c + R, c + RF));
            adopt(regs, f, CONN_S, gl);
            adopt(regs, f, CONN_E, gr);
        });
        return Ok(());
    }
    let leader = [Sel::new(0, lambda)];
    let block = [Sel::all()];
    for (port, side) in [(L, CONN_S), (R, CONN_E)] {
        view.bus_round(
            m,
            level,
            &leader,
            |_, regs| wire(regs[c + port]),
            &block,
            |_, regs, sym| regs[TMP_F] = unwire(sym.data()),
        )?;
        view.bus_round(
            m,
            level,
            &leader,
            |_, regs| Some(regs[c + port + 1] & CONFLICT),
            &block,
            |_, regs, sym| {
                let global = Lab::new(regs[TMP_F], sym.data().unwrap_or(0));
                adopt(regs, f, side, global);
            },
        )?;
    }
    Ok(())
}
