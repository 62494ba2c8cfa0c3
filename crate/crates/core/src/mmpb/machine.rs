//! Round-synchronous host array with statically partitioned buses.
//!
//! A round is opened with [`Mmpb::begin_round`], filled with local sends and
//! bus writes, and closed with [`Mmpb::end_round`]. Between `end_round` and
//! the next `begin_round` every PE may read its inbox and all `2L` segments it
//! sits on. State is kept in stamp-tagged dense tables so a round costs time
//! proportional to the traffic it carries, not to the size of the array.

use thiserror::Error;

use super::config::{BusModel, ConfigError, MmpbConfig, Shape};
use crate::bus::{check_payload, BusError, BusSymbol, SegmentState, Word};
use crate::geom::{Axis, Coord, Dir};

/// Row-major PE index.
pub type PeId = usize;

/// Declared traffic class of a round. Bus rounds are the ones that the bit
/// model serializes; the class must come from the schedule, never from data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoundKind {
    Local,
    Bus,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("PE {pe} issued more than one bus write in one round")]
    MultipleBusWrites { pe: PeId },
    #[error("PE {pe} has no {dir:?} neighbor")]
    NoNeighbor { pe: PeId, dir: Dir },
    #[error("PE {pe} sent twice towards {dir:?} in one round")]
    DuplicateSend { pe: PeId, dir: Dir },
    #[error("PE {pe} wrote a bus in a round declared local")]
    UndeclaredBusRound { pe: PeId },
    #[error("bus level {0} does not exist")]
    NoSuchLevel(usize),
    #[error("column buses do not exist in row-only mode")]
    NoColumnBuses,
    #[error("no round is in progress")]
    NoRound,
    #[error("a round is already in progress")]
    RoundInProgress,
    #[error("PE {0} does not exist")]
    NoSuchPe(PeId),
    #[error(transparent)]
    Bus(#[from] BusError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// What one PE does in one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RoundAction {
    /// Outgoing local words, indexed by [`Dir::index`].
    pub sends: [Option<Word>; 4],
    pub write: Option<BusWrite>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BusWrite {
    pub axis: Axis,
    /// 1-based level.
    pub level: usize,
    pub payload: Word,
}

#[derive(Debug, Clone)]
struct Geometry {
    n: usize,
    log_n: u32,
    rows: usize,
    levels: usize,
    /// Per `(axis, level)` at `axis * levels + level - 1`: offset of its
    /// segment table, segment-length shift and segments-per-line shift.
    seg_tab: Vec<(usize, u32, u32)>,
    segs: usize,
}

impl Geometry {
    fn new(cfg: &MmpbConfig, shape: Shape) -> Self {
        let n = cfg.n();
        let rows = match shape {
            Shape::Full => n,
            Shape::RowOnly => 1,
        };
        let shifts: Vec<u32> = cfg.lengths().iter().map(|l| l.trailing_zeros()).collect();
        let mut seg_tab = Vec::new();
        let mut total = 0;
        for axis in Axis::BOTH {
            let lines = match (axis, shape) {
                (Axis::Row, _) => rows,
                (Axis::Col, Shape::Full) => n,
                (Axis::Col, Shape::RowOnly) => 0,
            };
            for &s in &shifts {
                seg_tab.push((total, s, n.trailing_zeros() - s));
                total += lines * (n >> s);
            }
        }
        Geometry {
            n,
            log_n: n.trailing_zeros(),
            rows,
            levels: cfg.levels(),
            seg_tab,
            segs: total,
        }
    }

    #[inline(always)]
    fn lane(&self, axis: Axis, level: usize) -> Lane {
        let (base, shift, per_line) = self.seg_tab[axis.index() * self.levels + level - 1];
        Lane {
            axis,
            base,
            shift,
            per_line,
        }
    }

    #[inline(always)]
    fn seg_in(&self, pe: PeId, lane: Lane) -> usize {
        let (line, pos) = match lane.axis {
            Axis::Row => (pe >> self.log_n, pe & (self.n - 1)),
            Axis::Col => (pe & (self.n - 1), pe >> self.log_n),
        };
        lane.base + (line << lane.per_line) + (pos >> lane.shift)
    }

    #[inline(always)]
    fn seg(&self, pe: PeId, axis: Axis, level: usize) -> usize {
        self.seg_in(pe, self.lane(axis, level))
    }

    #[inline]
    fn neighbor(&self, pe: PeId, dir: Dir) -> Option<PeId> {
        let (row, col) = (pe >> self.log_n, pe & (self.n - 1));
        match dir {
            Dir::North if row > 0 => Some(pe - self.n),
            Dir::South if row + 1 < self.rows => Some(pe + self.n),
            Dir::West if col > 0 => Some(pe - 1),
            Dir::East if col + 1 < self.n => Some(pe + 1),
            _ => None,
        }
    }
}

/// An existing `(axis, level)` bus with its segment numbering resolved.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Lane {
    axis: Axis,
    base: usize,
    shift: u32,
    per_line: u32,
}

#[derive(Debug, Clone, Copy, Default)]
struct Msg {
    stamp: u32,
    word: Word,
}

#[derive(Debug, Clone, Copy, Default)]
struct Seg {
    stamp: u32,
    state: SegmentState,
}

#[derive(Debug, Clone)]
struct Network {
    stamp: u32,
    open: Option<RoundKind>,
    write_stamp: Vec<u32>,
    inbox: Vec<Msg>,
    segs: Vec<Seg>,
    /// Bit model: segments driven in the open round, and per segment the
    /// slots where some writer drove a one and where some writer drove a zero.
    pending: Vec<usize>,
    wires: Vec<(Word, Word)>,
}

impl Network {
    #[inline]
    fn bus(&self, seg: usize) -> BusSymbol {
        let s = self.segs[seg];
        if s.stamp == self.stamp && self.open.is_none() {
            s.state.symbol()
        } else {
            BusSymbol::Phi
        }
    }

    #[inline]
    fn inbox(&self, pe: PeId, from: Dir) -> Option<Word> {
        let m = self.inbox[pe * 4 + from.index()];
        (m.stamp == self.stamp && self.open.is_none()).then_some(m.word)
    }
}

/// Read-only view of what one PE observed in the last completed round.
pub struct PeObs<'a> {
    pe: PeId,
    geo: &'a Geometry,
    net: &'a Network,
}

impl PeObs<'_> {
    /// Symbol on this PE's segment of the given bus.
    #[inline]
    pub fn bus(&self, axis: Axis, level: usize) -> BusSymbol {
        self.net.bus(self.geo.seg(self.pe, axis, level))
    }

    /// Word received from the neighbor on side `from`.
    #[inline]
    pub fn inbox(&self, from: Dir) -> Option<Word> {
        self.net.inbox(self.pe, from)
    }
}

/// Observation of the whole array after [`Mmpb::run_round`].
pub struct Observation<'a> {
    machine: &'a Mmpb,
}

impl Observation<'_> {
    pub fn bus(&self, pe: PeId, axis: Axis, level: usize) -> BusSymbol {
        self.machine.observe(pe, axis, level)
    }

    pub fn inbox(&self, pe: PeId, from: Dir) -> Option<Word> {
        self.machine.inbox(pe, from)
    }
}

/// The host array.
#[derive(Debug, Clone)]
pub struct Mmpb {
    cfg: MmpbConfig,
    shape: Shape,
    model: BusModel,
    width: u32,
    geo: Geometry,
    reg_count: usize,
    regs: Vec<Word>,
    net: Network,
    rounds: u64,
    bus_rounds: u64,
}

impl Mmpb {
    /// Builds an idle machine with `reg_count` zeroed registers per PE.
    pub fn new(cfg: MmpbConfig, shape: Shape, model: BusModel, reg_count: usize) -> Self {
        let geo = Geometry::new(&cfg, shape);
        let pes = geo.rows * geo.n;
        let width = cfg.width();
        let wires = match model {
            BusModel::Word => Vec::new(),
            BusModel::Bit => vec![(0, 0); geo.segs],
        };
        let net = Network {
            stamp: 0,
            open: None,
            write_stamp: vec![0; pes],
            inbox: vec![Msg::default(); pes * 4],
            segs: vec![Seg::default(); geo.segs],
            pending: Vec::new(),
            wires,
        };
        Mmpb {
            cfg,
            shape,
            model,
            width,
            geo,
            reg_count,
            regs: vec![0; pes * reg_count],
            net,
            rounds: 0,
            bus_rounds: 0,
        }
    }

    pub fn config(&self) -> &MmpbConfig {
        &self.cfg
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn model(&self) -> BusModel {
        self.model
    }

    /// Word width; also the number of bit slots per bus round in the bit model.
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn rows(&self) -> usize {
        self.geo.rows
    }

    pub fn cols(&self) -> usize {
        self.geo.n
    }

    pub fn pes(&self) -> usize {
        self.geo.rows * self.geo.n
    }

    pub fn reg_count(&self) -> usize {
        self.reg_count
    }

    pub fn coord(&self, pe: PeId) -> Coord {
        Coord::new(pe / self.geo.n, pe % self.geo.n)
    }

    pub fn pe_at(&self, c: Coord) -> PeId {
        c.row * self.geo.n + c.col
    }

    /// Rounds executed so far (bit rounds count individually).
    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    /// Rounds that carried bus traffic (bit rounds count individually).
    pub fn bus_rounds(&self) -> u64 {
        self.bus_rounds
    }

    pub fn regs(&self, pe: PeId) -> &[Word] {
        &self.regs[pe * self.reg_count..(pe + 1) * self.reg_count]
    }

    pub fn regs_mut(&mut self, pe: PeId) -> &mut [Word] {
        &mut self.regs[pe * self.reg_count..(pe + 1) * self.reg_count]
    }

    /// Zeroes all registers and counters.
    pub fn reset(&mut self) {
        self.regs.fill(0);
        self.rounds = 0;
        self.bus_rounds = 0;
        self.net.open = None;
    }

    pub fn begin_round(&mut self, kind: RoundKind) -> Result<(), MachineError> {
        if self.net.open.is_some() {
            return Err(MachineError::RoundInProgress);
        }
        self.net.stamp = self.net.stamp.wrapping_add(1);
        if self.net.stamp == 0 {
            self.net.write_stamp.fill(0);
            self.net.inbox.fill(Msg::default());
            self.net.segs.fill(Seg::default());
            self.net.stamp = 1;
        }
        self.net.pending.clear();
        self.net.open = Some(kind);
        Ok(())
    }

    /// Local-communication sub-step: `pe` sends `word` to its `dir` neighbor.
    #[inline]
    pub fn send(&mut self, pe: PeId, dir: Dir, word: Word) -> Result<(), MachineError> {
        if self.net.open.is_none() {
            return Err(MachineError::NoRound);
        }
        check_payload(word, self.width)?;
        let to = self.geo.neighbor(pe, dir).ok_or(MachineError::NoNeighbor { pe, dir })?;
        let slot = &mut self.net.inbox[to * 4 + dir.opposite().index()];
        if slot.stamp == self.net.stamp {
            return Err(MachineError::DuplicateSend { pe, dir });
        }
        *slot = Msg {
            stamp: self.net.stamp,
            word,
        };
        Ok(())
    }

    /// Broadcast sub-step: `pe` drives `payload` onto its segment of a bus.
    #[inline]
    pub fn write(&mut self, pe: PeId, axis: Axis, level: usize, payload: Word) -> Result<(), MachineError> {
        if self.net.open == Some(RoundKind::Local) {
            return Err(MachineError::UndeclaredBusRound { pe });
        }
        let lane = self.check_bus(axis, level)?;
        self.drive(pe, lane, payload)
    }

    /// Checks that a bus round is open and that `(axis, level)` exists.
    pub(crate) fn check_bus(&self, axis: Axis, level: usize) -> Result<Lane, MachineError> {
        if self.net.open != Some(RoundKind::Bus) {
            return Err(MachineError::NoRound);
        }
        if level == 0 || level > self.geo.levels {
            return Err(MachineError::NoSuchLevel(level));
        }
        if axis == Axis::Col && self.shape == Shape::RowOnly {
            return Err(MachineError::NoColumnBuses);
        }
        Ok(self.geo.lane(axis, level))
    }

    /// [`Mmpb::write`] on a bus already accepted by [`Mmpb::check_bus`].
    #[inline]
    pub(crate) fn drive(&mut self, pe: PeId, lane: Lane, payload: Word) -> Result<(), MachineError> {
        if pe >= self.pes() {
            return Err(MachineError::NoSuchPe(pe));
        }
        check_payload(payload, self.width)?;
        let stamp = self.net.stamp;
        if self.net.write_stamp[pe] == stamp {
            return Err(MachineError::MultipleBusWrites { pe });
        }
        self.net.write_stamp[pe] = stamp;
        let idx = self.geo.seg_in(pe, lane);
        let seg = &mut self.net.segs[idx];
        let fresh = seg.stamp != stamp;
        if fresh {
            *seg = Seg {
                stamp,
                state: SegmentState::Idle,
            };
        }
        match self.model {
            BusModel::Word => seg.state = seg.state.push(payload),
            BusModel::Bit => {
                let mask = (((1u64) << self.width) - 1) as Word;
                if fresh {
                    self.net.wires[idx] = (0, 0);
                    self.net.pending.push(idx);
                }
                let (ones, zeros) = &mut self.net.wires[idx];
                *ones |= payload;
                *zeros |= !payload & mask;
            }
        }
        Ok(())
    }

    pub fn end_round(&mut self) -> Result<(), MachineError> {
        let kind = self.net.open.ok_or(MachineError::NoRound)?;
        let mut cost = 1;
        if kind == RoundKind::Bus && self.model == BusModel::Bit {
            cost = self.width as u64;
            self.transmit_bits();
        }
        self.net.open = None;
        self.rounds += cost;
        if kind == RoundKind::Bus {
            self.bus_rounds += cost;
        }
        Ok(())
    }

    /// Bit model: slot `t` of a segment carries bit `w - 1 - t` of every
    /// writer, so a slot collides exactly where one writer drove a one and
    /// another a zero. Every writer drives all `w` slots, so no slot of a
    /// written segment stays idle and the word reassembles as the ones.
    fn transmit_bits(&mut self) {
        let net = &mut self.net;
        for &idx in &net.pending {
            let (ones, zeros) = net.wires[idx];
            net.segs[idx].state = if ones & zeros != 0 {
                SegmentState::Collided
            } else {
                SegmentState::One(ones)
            };
        }
    }

    /// Drops an open round without counting it.
    pub fn abort_round(&mut self) {
        if self.net.open.take().is_some() {
            self.net.stamp = self.net.stamp.wrapping_add(1);
        }
    }

    /// Symbol observed by `pe` on its segment of `(axis, level)` in the last round.
    #[inline]
    pub fn observe(&self, pe: PeId, axis: Axis, level: usize) -> BusSymbol {
        if axis == Axis::Col && self.shape == Shape::RowOnly {
            return BusSymbol::Phi;
        }
        self.net.bus(self.geo.seg(pe, axis, level))
    }

    /// [`Mmpb::observe`] on a lane from [`Mmpb::check_bus`].
    #[inline]
    pub(crate) fn listen(&self, pe: PeId, lane: Lane) -> BusSymbol {
        self.net.bus(self.geo.seg_in(pe, lane))
    }

    /// Word `pe` received from side `from` in the last round.
    #[inline]
    pub fn inbox(&self, pe: PeId, from: Dir) -> Option<Word> {
        self.net.inbox(pe, from)
    }

    /// Compute sub-step of one PE: it may update its own registers from its
    /// own observation and nothing else.
    #[inline]
    pub fn compute<F, R>(&mut self, pe: PeId, f: F) -> R
    where
        F: FnOnce(&mut [Word], &PeObs<'_>) -> R,
    {
        let obs = PeObs {
            pe,
            geo: &self.geo,
            net: &self.net,
        };
        let regs = &mut self.regs[pe * self.reg_count..(pe + 1) * self.reg_count];
        f(regs, &obs)
    }

    /// Executes one round from explicit per-PE actions. The round is a bus
    /// round iff some action writes a bus.
    pub fn run_round(&mut self, actions: &[(PeId, RoundAction)]) -> Result<Observation<'_>, MachineError> {
        let kind = if actions.iter().any(|(_, a)| a.write.is_some()) {
            RoundKind::Bus
        } else {
            RoundKind::Local
        };
        self.run_round_as(kind, actions)
    }

    /// As [`Mmpb::run_round`] with the round kind fixed by the caller.
    pub fn run_round_as(
        &mut self,
        kind: RoundKind,
        actions: &[(PeId, RoundAction)],
    ) -> Result<Observation<'_>, MachineError> {
        self.begin_round(kind)?;
        if let Err(e) = self.apply(actions) {
            self.abort_round();
            return Err(e);
        }
        self.end_round()?;
        Ok(Observation { machine: self })
    }

    fn apply(&mut self, actions: &[(PeId, RoundAction)]) -> Result<(), MachineError> {
        for &(pe, ref a) in actions {
            if pe >= self.pes() {
                return Err(MachineError::NoSuchPe(pe));
            }
            for dir in Dir::ALL {
                if let Some(w) = a.sends[dir.index()] {
                    self.send(pe, dir, w)?;
                }
            }
            if let Some(w) = a.write {
                self.write(pe, w.axis, w.level, w.payload)?;
            }
        }
        Ok(())
    }
}
