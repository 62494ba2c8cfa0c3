//! Block leaders of a host array seen as a shorter machine.
//!
//! A view with stride `s` exposes, on every line of one axis, the real PEs at
//! positions `0, s, 2s, …` as virtual PEs `0, 1, 2, …`. Virtual buses are the
//! real levels whose segments are longer than `s`; each such segment covers a
//! whole number of leaders. A virtual local hop is relayed through the real
//! level whose segment length equals `s` (the leader's own block):
//!
//! * forward: leader `p` drives its block segment, the rightmost PE of block
//!   `p` picks the word up and passes it over the real link to leader `p + 1`;
//! * backward: leader `p` sends over the real link to the rightmost PE of
//!   block `p − 1`, which drives block `p − 1`'s segment for leader `p − 1`.
//!
//! Both directions take the same two real rounds, so a virtual exchange costs
//! [`RELAY_COST`] real rounds and a virtual bus round costs one. Every view is
//! defined against the real machine, so the cost does not grow with nesting.
//! All lines of the axis advance in lockstep.

use super::config::Shape;
use super::machine::{Lane, MachineError, Mmpb, PeId, RoundKind};
use crate::bus::{BusSymbol, Word};
use crate::geom::Axis;

/// Registers every PE reserves for relaying virtual hops.
pub const RELAY_REGS: usize = 2;
const RELAY_FWD: usize = 0;
const RELAY_BACK: usize = 1;

/// Register value meaning "nothing was relayed". Payloads never reach it.
pub const EMPTY: Word = Word::MAX;

/// Real rounds per virtual exchange when leaders are not adjacent.
pub const RELAY_COST: u64 = 2;

/// Direction of travel along the line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HopDir {
    /// Towards higher positions.
    Fwd,
    /// Towards lower positions.
    Back,
}

/// Arithmetic selection of virtual positions `first, first + step, …`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sel {
    pub first: usize,
    pub step: usize,
}

impl Sel {
    pub fn new(first: usize, step: usize) -> Self {
        Sel { first, step }
    }

    pub fn all() -> Self {
        Sel { first: 0, step: 1 }
    }

    pub fn iter(self, len: usize) -> impl Iterator<Item = usize> {
        (self.first..len).step_by(self.step.max(1))
    }
}

/// One direction of a virtual exchange and who sends in it.
#[derive(Debug, Clone, Copy)]
pub struct Hop {
    pub dir: HopDir,
    pub senders: Sel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirtualView {
    axis: Axis,
    n: usize,
    lines: usize,
    stride: usize,
    len: usize,
    /// Real level whose segments are exactly one block; `None` at stride 1.
    relay: Option<usize>,
    /// Real levels usable as virtual buses, longest first.
    levels: Vec<usize>,
    lengths: Vec<usize>,
}

/// The leader view of `m` along `axis` whose blocks are the segments of real
/// `level`. Level 0 gives the array itself (stride 1, all levels usable).
pub fn make_virtual_view(m: &Mmpb, axis: Axis, level: usize) -> Result<VirtualView, MachineError> {
    let cfg = m.config();
    if level > cfg.levels() {
        return Err(MachineError::NoSuchLevel(level));
    }
    let lines = match (axis, m.shape()) {
        (Axis::Row, _) => m.rows(),
        (Axis::Col, Shape::Full) => m.cols(),
        (Axis::Col, Shape::RowOnly) => return Err(MachineError::NoColumnBuses),
    };
    let (stride, relay, usable) = if level == 0 {
        (1, None, cfg.levels())
    } else {
        (cfg.length(level), Some(level), level - 1)
    };
    Ok(VirtualView {
        axis,
        n: cfg.n(),
        lines,
        stride,
        len: cfg.n() / stride,
        relay,
        levels: (1..=usable).collect(),
        lengths: cfg.lengths().to_vec(),
    })
}

impl VirtualView {
    pub fn axis(&self) -> Axis {
        self.axis
    }

    /// Real PEs per virtual PE.
    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Virtual PEs per line.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn lines(&self) -> usize {
        self.lines
    }

    /// Real level numbers usable as virtual buses, longest first.
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// Segment length of real `level` counted in virtual PEs.
    pub fn virtual_length(&self, level: usize) -> usize {
        self.lengths[level - 1] / self.stride
    }

    /// The view whose virtual PEs are the leaders of this view's blocks on
    /// its shortest usable level.
    pub fn child(&self) -> Option<VirtualView> {
        let (&level, rest) = self.levels.split_last()?;
        let stride = self.lengths[level - 1];
        Some(VirtualView {
            stride,
            len: self.n / stride,
            relay: Some(level),
            levels: rest.to_vec(),
            ..self.clone()
        })
    }

    /// Real PE realizing virtual PE `vpos` of `line`.
    #[inline]
    pub fn real_pe(&self, line: usize, vpos: usize) -> PeId {
        self.at(line, vpos * self.stride)
    }

    #[inline]
    fn at(&self, line: usize, pos: usize) -> PeId {
        match self.axis {
            Axis::Row => line * self.n + pos,
            Axis::Col => pos * self.n + line,
        }
    }

    /// Visits `(line, vpos)` for every line and every selected position,
    /// in the order that walks the register file sequentially.
    #[inline]
    fn each<F>(&self, sel: Sel, mut f: F) -> Result<(), MachineError>
    where
        F: FnMut(usize, usize) -> Result<(), MachineError>,
    {
        match self.axis {
            Axis::Row => {
                for line in 0..self.lines {
                    for v in sel.iter(self.len) {
                        f(line, v)?;
                    }
                }
            }
            Axis::Col => {
                for v in sel.iter(self.len) {
                    for line in 0..self.lines {
                        f(line, v)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Free compute sub-step on the selected virtual PEs.
    pub fn local<F>(&self, m: &mut Mmpb, sel: Sel, mut f: F)
    where
        F: FnMut(usize, &mut [Word]),
    {
        let _ = self.each(sel, |line, v| {
            f(v, m.regs_mut(self.real_pe(line, v)));
            Ok(())
        });
    }

    /// One virtual bus round on real `level`: every selected writer for which
    /// `act` yields a word drives it, then every selected listener gets the
    /// symbol on its segment.
    pub fn bus_round<A, R>(
        &self,
        m: &mut Mmpb,
        level: usize,
        writers: &[Sel],
        mut act: A,
        listeners: &[Sel],
        mut recv: R,
    ) -> Result<(), MachineError>
    where
        A: FnMut(usize, &[Word]) -> Option<Word>,
        R: FnMut(usize, &mut [Word], BusSymbol),
    {
        if !self.levels.contains(&level) {
            return Err(MachineError::NoSuchLevel(level));
        }
        let lane = self.open_bus(m, level)?;
        let sent = (|| {
            for &sel in writers {
                self.each(sel, |line, v| {
                    let pe = self.real_pe(line, v);
                    if let Some(w) = act(v, m.regs(pe)) {
                        m.drive(pe, lane, w)?;
                    }
                    Ok(())
                })?;
            }
            Ok(())
        })();
        if let Err(e) = sent {
            m.abort_round();
            return Err(e);
        }
        m.end_round()?;
        for &sel in listeners {
            self.each(sel, |line, v| {
                let pe = self.real_pe(line, v);
                let sym = m.listen(pe, lane);
                recv(v, m.regs_mut(pe), sym);
                Ok(())
            })?;
        }
        Ok(())
    }

    /// Opens a bus round on real `level` of this view's axis.
    fn open_bus(&self, m: &mut Mmpb, level: usize) -> Result<Lane, MachineError> {
        m.begin_round(RoundKind::Bus)?;
        m.check_bus(self.axis, level).inspect_err(|_| m.abort_round())
    }

    /// One virtual exchange: each sender of each hop may pass one word to its
    /// neighbor in the hop's direction; the neighbor then gets `recv(vpos,
    /// dir, regs, word)`, with `None` when the sender stayed silent. Senders
    /// without a neighbor are skipped.
    pub fn exchange<A, R>(&self, m: &mut Mmpb, hops: &[Hop], mut act: A, mut recv: R) -> Result<(), MachineError>
    where
        A: FnMut(usize, HopDir, &[Word]) -> Option<Word>,
        R: FnMut(usize, HopDir, &mut [Word], Option<Word>),
    {
        match self.relay {
            None => self.exchange_direct(m, hops, &mut act, &mut recv),
            Some(level) => self.exchange_relayed(m, level, hops, &mut act, &mut recv),
        }
    }

    #[inline]
    fn target(&self, v: usize, dir: HopDir) -> Option<usize> {
        match dir {
            HopDir::Fwd => (v + 1 < self.len).then_some(v + 1),
            HopDir::Back => v.checked_sub(1),
        }
    }

    fn real_dir(&self, dir: HopDir) -> crate::geom::Dir {
        match dir {
            HopDir::Fwd => self.axis.forward(),
            HopDir::Back => self.axis.backward(),
        }
    }

    fn exchange_direct<A, R>(&self, m: &mut Mmpb, hops: &[Hop], act: &mut A, recv: &mut R) -> Result<(), MachineError>
    where
        A: FnMut(usize, HopDir, &[Word]) -> Option<Word>,
        R: FnMut(usize, HopDir, &mut [Word], Option<Word>),
    {
        m.begin_round(RoundKind::Local)?;
        let sent = (|| {
            for hop in hops {
                let dir = self.real_dir(hop.dir);
                self.each(hop.senders, |line, v| {
                    if self.target(v, hop.dir).is_some() {
                        let pe = self.real_pe(line, v);
                        if let Some(w) = act(v, hop.dir, m.regs(pe)) {
                            m.send(pe, dir, w)?;
                        }
                    }
                    Ok(())
                })?;
            }
            Ok(())
        })();
        if let Err(e) = sent {
            m.abort_round();
            return Err(e);
        }
        m.end_round()?;
        for hop in hops {
            let from = self.real_dir(hop.dir).opposite();
            self.each(hop.senders, |line, v| {
                if let Some(t) = self.target(v, hop.dir) {
                    let pe = self.real_pe(line, t);
                    let got = m.inbox(pe, from);
                    recv(t, hop.dir, m.regs_mut(pe), got);
                }
                Ok(())
            })?;
        }
        Ok(())
    }

    fn exchange_relayed<A, R>(
        &self,
        m: &mut Mmpb,
        level: usize,
        hops: &[Hop],
        act: &mut A,
        recv: &mut R,
    ) -> Result<(), MachineError>
    where
        A: FnMut(usize, HopDir, &[Word]) -> Option<Word>,
        R: FnMut(usize, HopDir, &mut [Word], Option<Word>),
    {
        let s = self.stride;
        let axis = self.axis;
        let fwd = axis.forward();
        let back = axis.backward();
        // Relay of block p sits at position (p + 1)s − 1.
        let relay = |line: usize, p: usize| self.at(line, (p + 1) * s - 1);

        // Leaders hand their words to the relays.
        let lane = self.open_bus(m, level)?;
        let sent = (|| {
            for hop in hops {
                self.each(hop.senders, |line, v| {
                    if self.target(v, hop.dir).is_none() {
                        return Ok(());
                    }
                    let pe = self.real_pe(line, v);
                    if let Some(w) = act(v, hop.dir, m.regs(pe)) {
                        match hop.dir {
                            HopDir::Fwd => m.drive(pe, lane, w)?,
                            HopDir::Back => m.send(pe, back, w)?,
                        }
                    }
                    Ok(())
                })?;
            }
            Ok(())
        })();
        if let Err(e) = sent {
            m.abort_round();
            return Err(e);
        }
        m.end_round()?;
        for hop in hops {
            self.each(hop.senders, |line, v| {
                let Some(t) = self.target(v, hop.dir) else {
                    return Ok(());
                };
                match hop.dir {
                    HopDir::Fwd => {
                        let r = relay(line, v);
                        let got = m.listen(r, lane).data().unwrap_or(EMPTY);
                        m.regs_mut(r)[RELAY_FWD] = got;
                    }
                    HopDir::Back => {
                        let r = relay(line, t);
                        let got = m.inbox(r, fwd).unwrap_or(EMPTY);
                        m.regs_mut(r)[RELAY_BACK] = got;
                    }
                }
                Ok(())
            })?;
        }

        // Relays deliver.
        let lane = self.open_bus(m, level)?;
        let sent = (|| {
            for hop in hops {
                self.each(hop.senders, |line, v| {
                    let Some(t) = self.target(v, hop.dir) else {
                        return Ok(());
                    };
                    match hop.dir {
                        HopDir::Fwd => {
                            let r = relay(line, v);
                            let w = m.regs(r)[RELAY_FWD];
                            if w != EMPTY {
                                m.send(r, fwd, w)?;
                            }
                        }
                        HopDir::Back => {
                            let r = relay(line, t);
                            let w = m.regs(r)[RELAY_BACK];
                            if w != EMPTY {
                                m.drive(r, lane, w)?;
                            }
                        }
                    }
                    Ok(())
                })?;
            }
            Ok(())
        })();
        if let Err(e) = sent {
            m.abort_round();
            return Err(e);
        }
        m.end_round()?;
        for hop in hops {
            self.each(hop.senders, |line, v| {
                if let Some(t) = self.target(v, hop.dir) {
                    let pe = self.real_pe(line, t);
                    let got = match hop.dir {
                        HopDir::Fwd => m.inbox(pe, back),
                        HopDir::Back => m.listen(pe, lane).data(),
                    };
                    recv(t, hop.dir, m.regs_mut(pe), got);
                }
                Ok(())
            })?;
        }
        Ok(())
    }
}
