//! Labeling of every block of a line that owns one bus segment.
//!
//! A block of `λ` PEs is cut into `b` sub-blocks of `g` PEs. Sub-blocks are
//! labeled by a prefix sweep and a suffix sweep over local hops; their
//! boundary labels are chained across the block over the block's bus, one
//! sub-block per round pair; the block-wide labels of each sub-block's two
//! boundary components are then swept back through the sub-block.
//!
//! Every label travels as two words: the label, then its flags. The conflict
//! flag rides along, so collisions are found and spread by the same passes.

use super::label::{unwire, wire, Lab, CONFLICT, CONN_E, CONN_S};
use super::regs::*;
use crate::bus::{BusSymbol, Word};
use crate::mmpb::{Hop, HopDir, MachineError, Mmpb, Sel, VirtualView, RELAY_COST};

/// Real rounds of one exchange in `view`.
pub fn exchange_cost(view: &VirtualView) -> u64 {
    if view.stride() == 1 {
        1
    } else {
        RELAY_COST
    }
}

/// Sub-block size for a block of `lambda` PEs: the power of two minimizing
/// the round count of [`label_blocks`] when one exchange costs `xcost` rounds.
pub fn sub_block(lambda: usize, xcost: u64) -> usize {
    let cost = |g: usize| 4 * xcost * (g as u64 - 1) + 4 * ((lambda / g) as u64 - 1);
    let mut best = 1;
    let mut g = 1;
    while g <= lambda {
        if cost(g) < cost(best) {
            best = g;
        }
        g *= 2;
    }
    best
}

/// Round count of [`label_blocks`] on blocks of `lambda` PEs.
pub fn label_blocks_rounds(lambda: usize, xcost: u64) -> u64 {
    let g = sub_block(lambda, xcost);
    4 * xcost * (g as u64 - 1) + 4 * ((lambda / g) as u64 - 1)
}

#[inline]
fn frame_lab(regs: &[Word], f: usize, port: usize) -> Lab {
    Lab::from_regs(regs, f + port, f + port + 1)
}

/// PR from PL: through the switch when closed.
#[inline]
fn prefix_right(regs: &mut [Word], f: usize) {
    let r = frame_lab(regs, f, R);
    if regs[f + SW] != 0 {
        let conn = regs[PLF] & CONN_S;
        Lab::from_regs(regs, PL, PLF).merge(r).store(regs, PR, PRF, conn);
    } else {
        r.store(regs, PR, PRF, 0);
    }
}

/// SL from SR.
#[inline]
fn suffix_left(regs: &mut [Word], f: usize) {
    let l = frame_lab(regs, f, L);
    if regs[f + SW] != 0 {
        let conn = regs[SRF] & CONN_E;
        Lab::from_regs(regs, SR, SRF).merge(l).store(regs, SL, SLF, conn);
    } else {
        l.store(regs, SL, SLF, 0);
    }
}

/// Labels every sub-block of `g` PEs of the line problem in frame `f`: the
/// LOC registers receive each port's label within its sub-block, with
/// [`CONN_S`] / [`CONN_E`] telling whether the port reaches the sub-block's
/// first / last port.
pub fn sweep(m: &mut Mmpb, view: &VirtualView, g: usize, f: usize) -> Result<(), MachineError> {
    if g == 1 {
        view.local(m, Sel::all(), |_, regs| {
            frame_lab(regs, f, L).store(regs, PL, PLF, CONN_S);
            prefix_right(regs, f);
            frame_lab(regs, f, R).store(regs, SR, SRF, CONN_E);
            suffix_left(regs, f);
            local_labels(regs);
        });
        return Ok(());
    }
    view.local(m, Sel::new(0, g), |_, regs| {
        frame_lab(regs, f, L).store(regs, PL, PLF, CONN_S);
        prefix_right(regs, f);
    });
    view.local(m, Sel::new(g - 1, g), |_, regs| {
        frame_lab(regs, f, R).store(regs, SR, SRF, CONN_E);
        suffix_left(regs, f);
    });
    for t in 0..g - 1 {
        let hops = [
            Hop {
                dir: HopDir::Fwd,
                senders: Sel::new(t, g),
            },
            Hop {
                dir: HopDir::Back,
                senders: Sel::new(g - 1 - t, g),
            },
        ];
        view.exchange(
            m,
            &hops,
            |_, dir, regs| match dir {
                HopDir::Fwd => wire(regs[PR]),
                HopDir::Back => wire(regs[SL]),
            },
            |_, dir, regs, w| match dir {
                HopDir::Fwd => regs[TMP_F] = unwire(w),
                HopDir::Back => regs[TMP_B] = unwire(w),
            },
        )?;
        view.exchange(
            m,
            &hops,
            |_, dir, regs| match dir {
                HopDir::Fwd => Some(regs[PRF]),
                HopDir::Back => Some(regs[SLF]),
            },
            |_, dir, regs, w| {
                let fl = w.unwrap_or(0);
                match dir {
                    HopDir::Fwd => {
                        let pl = Lab::new(regs[TMP_F], fl).merge(frame_lab(regs, f, L));
                        pl.store(regs, PL, PLF, fl & CONN_S);
                        prefix_right(regs, f);
                    }
                    HopDir::Back => {
                        let sr = Lab::new(regs[TMP_B], fl).merge(frame_lab(regs, f, R));
                        sr.store(regs, SR, SRF, fl & CONN_E);
                        suffix_left(regs, f);
                    }
                }
            },
        )?;
    }
    view.local(m, Sel::all(), |_, regs| local_labels(regs));
    Ok(())
}

/// LOC from the prefix and suffix labels.
#[inline]
fn local_labels(regs: &mut [Word]) {
    let conn_l = (regs[PLF] & CONN_S) | (regs[SLF] & CONN_E);
    let loc_l = Lab::from_regs(regs, PL, PLF).merge(Lab::from_regs(regs, SL, SLF));
    loc_l.store(regs, LOC_L, LOC_LF, conn_l);
    let conn_r = (regs[PRF] & CONN_S) | (regs[SRF] & CONN_E);
    let loc_r = Lab::from_regs(regs, PR, PRF).merge(Lab::from_regs(regs, SR, SRF));
    loc_r.store(regs, LOC_R, LOC_RF, conn_r);
}

/// Writes the sweep result of the whole line into frame `f`.
pub fn finish_from_local(m: &mut Mmpb, view: &VirtualView, f: usize) {
    view.local(m, Sel::all(), |_, regs| {
        regs[f + L] = regs[LOC_L];
        regs[f + LF] = regs[LOC_LF];
        regs[f + R] = regs[LOC_R];
        regs[f + RF] = regs[LOC_RF];
    });
}

#[inline]
fn symbol_label(sym: BusSymbol) -> Word {
    debug_assert_ne!(sym, BusSymbol::Bot, "single-writer round collided");
    unwire(sym.data())
}

/// Labels each block of `lambda` PEs in place, every block using its own
/// segment of real bus `level`. Afterwards each port of frame `f` holds its
/// label within the block, and its [`CONN_S`] / [`CONN_E`] bits tell whether
/// it reaches the block's first / last port.
pub fn label_blocks(
    m: &mut Mmpb,
    view: &VirtualView,
    level: usize,
    lambda: usize,
    f: usize,
) -> Result<(), MachineError> {
    let g = sub_block(lambda, exchange_cost(view));
    let b = lambda / g;
    sweep(m, view, g, f)?;

    // Chain ends start from their local labels.
    view.local(m, Sel::new(g - 1, lambda), |_, regs| {
        let conn = regs[LOC_RF] & CONN_S;
        Lab::from_regs(regs, LOC_R, LOC_RF).store(regs, CH_PRE, CH_PREF, conn);
    });
    view.local(m, Sel::new((b - 1) * g, lambda), |_, regs| {
        let conn = regs[LOC_LF] & CONN_E;
        Lab::from_regs(regs, LOC_L, LOC_LF).store(regs, CH_SUF, CH_SUFF, conn);
    });

    // Prefix chain: the rightmost PE of sub-block q tells sub-block q + 1.
    for q in 0..b - 1 {
        let writer = [Sel::new(q * g + g - 1, lambda)];
        let both = [Sel::new((q + 1) * g, lambda), Sel::new((q + 1) * g + g - 1, lambda)];
        let listeners = if g == 1 { &both[..1] } else { &both[..] };
        view.bus_round(
            m,
            level,
            &writer,
            |_, regs| wire(regs[CH_PRE]),
            listeners,
            |_, regs, sym| regs[TMP_F] = symbol_label(sym),
        )?;
        view.bus_round(
            m,
            level,
            &writer,
            |_, regs| Some(regs[CH_PREF]),
            listeners,
            |v, regs, sym| {
                let fl = sym.data().unwrap_or(0);
                let prev = Lab::new(regs[TMP_F], fl);
                let off = v % lambda % g;
                if off == 0 {
                    prev.store(regs, CH_PIN, CH_PINF, fl & CONN_S);
                }
                if off == g - 1 {
                    let loc = Lab::from_regs(regs, LOC_R, LOC_RF);
                    if regs[LOC_RF] & CONN_S != 0 {
                        prev.merge(loc).store(regs, CH_PRE, CH_PREF, fl & CONN_S);
                    } else {
                        loc.store(regs, CH_PRE, CH_PREF, 0);
                    }
                }
            },
        )?;
    }

    // Suffix chain: the leftmost PE of sub-block q tells sub-block q − 1.
    for q in (1..b).rev() {
        let writer = [Sel::new(q * g, lambda)];
        let both = [Sel::new((q - 1) * g + g - 1, lambda), Sel::new((q - 1) * g, lambda)];
        let listeners = if g == 1 { &both[..1] } else { &both[..] };
        view.bus_round(
            m,
            level,
            &writer,
            |_, regs| wire(regs[CH_SUF]),
            listeners,
            |_, regs, sym| regs[TMP_F] = symbol_label(sym),
        )?;
        view.bus_round(
            m,
            level,
            &writer,
            |_, regs| Some(regs[CH_SUFF]),
            listeners,
            |v, regs, sym| {
                let fl = sym.data().unwrap_or(0);
                let next = Lab::new(regs[TMP_F], fl);
                let off = v % lambda % g;
                if off == g - 1 {
                    next.store(regs, CH_SIN, CH_SINF, fl & CONN_E);
                }
                if off == 0 {
                    let loc = Lab::from_regs(regs, LOC_L, LOC_LF);
                    if regs[LOC_LF] & CONN_E != 0 {
                        loc.merge(next).store(regs, CH_SUF, CH_SUFF, fl & CONN_E);
                    } else {
                        loc.store(regs, CH_SUF, CH_SUFF, 0);
                    }
                }
            },
        )?;
    }

    // Block-wide labels of the sub-block boundary components.
    let left = |v: usize, regs: &mut [Word]| {
        let suf = Lab::from_regs(regs, CH_SUF, CH_SUFF);
        let conn_e = regs[CH_SUFF] & CONN_E;
        if v % lambda / g == 0 {
            suf.store(regs, G_L, G_LF, CONN_S | conn_e);
        } else {
            let conn_s = regs[CH_PINF] & CONN_S;
            Lab::from_regs(regs, CH_PIN, CH_PINF)
                .merge(suf)
                .store(regs, G_L, G_LF, conn_s | conn_e);
        }
    };
    let right = |v: usize, regs: &mut [Word]| {
        let pre = Lab::from_regs(regs, CH_PRE, CH_PREF);
        let conn_s = regs[CH_PREF] & CONN_S;
        if v % lambda / g == b - 1 {
            pre.store(regs, G_R, G_RF, conn_s | CONN_E);
        } else {
            let conn_e = regs[CH_SINF] & CONN_E;
            pre.merge(Lab::from_regs(regs, CH_SIN, CH_SINF))
                .store(regs, G_R, G_RF, conn_s | conn_e);
        }
    };
    if g == 1 {
        view.local(m, Sel::all(), |v, regs| {
            left(v, regs);
            right(v, regs);
            block_labels(regs, f);
        });
        return Ok(());
    }
    view.local(m, Sel::new(0, g), left);
    view.local(m, Sel::new(g - 1, g), right);

    // Spread them through each sub-block.
    for t in 0..g - 1 {
        let hops = [
            Hop {
                dir: HopDir::Fwd,
                senders: Sel::new(t, g),
            },
            Hop {
                dir: HopDir::Back,
                senders: Sel::new(g - 1 - t, g),
            },
        ];
        view.exchange(
            m,
            &hops,
            |_, dir, regs| match dir {
                HopDir::Fwd => wire(regs[G_L]),
                HopDir::Back => wire(regs[G_R]),
            },
            |_, dir, regs, w| match dir {
                HopDir::Fwd => regs[G_L] = unwire(w),
                HopDir::Back => regs[G_R] = unwire(w),
            },
        )?;
        view.exchange(
            m,
            &hops,
            |_, dir, regs| match dir {
                HopDir::Fwd => Some(regs[G_LF]),
                HopDir::Back => Some(regs[G_RF]),
            },
            |_, dir, regs, w| match dir {
                HopDir::Fwd => regs[G_LF] = w.unwrap_or(0),
                HopDir::Back => regs[G_RF] = w.unwrap_or(0),
            },
        )?;
    }

    view.local(m, Sel::all(), |_, regs| block_labels(regs, f));
    Ok(())
}

/// Frame `f` from the local labels and the sub-block boundary labels.
#[inline]
fn block_labels(regs: &mut [Word], f: usize) {
    for (port, loc, locf) in [(L, LOC_L, LOC_LF), (R, LOC_R, LOC_RF)] {
        let lf = regs[locf];
        let (label, flags) = if lf & CONN_S != 0 {
            (regs[G_L], regs[G_LF])
        } else if lf & CONN_E != 0 {
            (regs[G_R], regs[G_RF])
        } else {
            (regs[loc], lf & CONFLICT)
        };
        regs[f + port] = label;
        regs[f + port + 1] = flags;
    }
}
