//! Reference executor for the guest mesh with separable row/column buses.
//!
//! Broadcasts are computed exactly with the port-graph oracle; rows and
//! columns are independent buses.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bus::{check_payload, word_width, BusError, BusSymbol, Word};
use crate::geom::{Coord, Dir};
use crate::pc_graph::{resolve_broadcast, LinePcGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowSide {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColSide {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowWrite {
    pub side: RowSide,
    pub payload: Word,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColWrite {
    pub side: ColSide,
    pub payload: Word,
}

/// Switch settings and bus writes of one PE for one broadcast sub-step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MsbPe {
    pub row_switch: bool,
    pub col_switch: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_write: Option<RowWrite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub col_write: Option<ColWrite>,
}

/// One broadcast sub-step of an `n × n` guest, PEs in row-major order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MsbScenario {
    n: usize,
    pes: Vec<MsbPe>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MsbError {
    #[error("scenario side must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("expected {expected} PEs, got {got}")]
    PeCount { expected: usize, got: usize },
    #[error("PE {at:?}: {source}")]
    Payload { at: Coord, source: BusError },
    #[error("PE {at:?} sends {dir:?} off the mesh")]
    NoNeighbor { at: Coord, dir: Dir },
    #[error("guest state shape does not match the scenario")]
    StateShape,
}

impl MsbScenario {
    pub fn new(n: usize, pes: Vec<MsbPe>) -> Result<Self, MsbError> {
        if n < 2 {
            return Err(MsbError::TooSmall(n));
        }
        if pes.len() != n * n {
            return Err(MsbError::PeCount {
                expected: n * n,
                got: pes.len(),
            });
        }
        let s = MsbScenario { n, pes };
        s.validate()?;
        Ok(s)
    }

    /// Every switch open, nobody writing.
    pub fn quiet(n: usize) -> Result<Self, MsbError> {
        Self::new(n, vec![MsbPe::default(); n * n])
    }

    pub fn validate(&self) -> Result<(), MsbError> {
        let w = self.width();
        for (idx, pe) in self.pes.iter().enumerate() {
            let at = Coord::new(idx / self.n, idx % self.n);
            let payloads = pe.row_write.map(|x| x.payload).into_iter();
            for p in payloads.chain(pe.col_write.map(|x| x.payload)) {
                check_payload(p, w).map_err(|source| MsbError::Payload { at, source })?;
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> u32 {
        word_width(self.n)
    }

    pub fn pes(&self) -> &[MsbPe] {
        &self.pes
    }

    pub fn pe(&self, row: usize, col: usize) -> &MsbPe {
        &self.pes[row * self.n + col]
    }

    pub fn pe_mut(&mut self, row: usize, col: usize) -> &mut MsbPe {
        &mut self.pes[row * self.n + col]
    }

    /// Port graph of row `i`: PE `j` contributes ports `2j` (left), `2j+1` (right).
    pub fn row_graph(&self, i: usize) -> LinePcGraph {
        let mut sw = Vec::with_capacity(self.n);
        let mut init = vec![None; 2 * self.n];
        for j in 0..self.n {
            let pe = self.pe(i, j);
            sw.push(pe.row_switch);
            if let Some(wr) = pe.row_write {
                let port = 2 * j + (wr.side == RowSide::Right) as usize;
                init[port] = Some(wr.payload);
            }
        }
        LinePcGraph::new(self.width(), sw, init).expect("validated scenario")
    }

    /// Port graph of column `j`: PE `i` contributes ports `2i` (up), `2i+1` (down).
    pub fn col_graph(&self, j: usize) -> LinePcGraph {
        let mut sw = Vec::with_capacity(self.n);
        let mut init = vec![None; 2 * self.n];
        for i in 0..self.n {
            let pe = self.pe(i, j);
            sw.push(pe.col_switch);
            if let Some(wr) = pe.col_write {
                let port = 2 * i + (wr.side == ColSide::Down) as usize;
                init[port] = Some(wr.payload);
            }
        }
        LinePcGraph::new(self.width(), sw, init).expect("validated scenario")
    }
}

/// The four bus ports of a PE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Port {
    RowLeft,
    RowRight,
    ColUp,
    ColDown,
}

impl Port {
    pub const ALL: [Port; 4] = [Port::RowLeft, Port::RowRight, Port::ColUp, Port::ColDown];
}

pub type PortSymbols = [BusSymbol; 4];

/// Received symbol at every port of every PE.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MsbOutcome {
    n: usize,
    ports: Vec<PortSymbols>,
}

impl MsbOutcome {
    pub fn filled(n: usize, sym: BusSymbol) -> Self {
        MsbOutcome {
            n,
            ports: vec![[sym; 4]; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize, port: Port) -> BusSymbol {
        self.ports[row * self.n + col][port as usize]
    }

    pub fn set(&mut self, row: usize, col: usize, port: Port, sym: BusSymbol) {
        self.ports[row * self.n + col][port as usize] = sym;
    }

    pub fn at(&self, row: usize, col: usize) -> &PortSymbols {
        &self.ports[row * self.n + col]
    }

    /// Number of ports whose symbols differ.
    pub fn mismatches(&self, other: &MsbOutcome) -> usize {
        if self.n != other.n {
            return 4 * self.n.max(other.n).pow(2);
        }
        self.ports
            .iter()
            .zip(&other.ports)
            .map(|(a, b)| a.iter().zip(b).filter(|(x, y)| x != y).count())
            .sum()
    }
}

/// Exact outcome of one broadcast sub-step.
pub fn msb_execute_broadcast(s: &MsbScenario) -> Result<MsbOutcome, MsbError> {
    s.validate()?;
    let n = s.n;
    let mut out = MsbOutcome::filled(n, BusSymbol::Phi);
    for i in 0..n {
        let r = resolve_broadcast(&s.row_graph(i));
        for j in 0..n {
            out.set(i, j, Port::RowLeft, r[2 * j]);
            out.set(i, j, Port::RowRight, r[2 * j + 1]);
        }
    }
    for j in 0..n {
        let r = resolve_broadcast(&s.col_graph(j));
        for i in 0..n {
            out.set(i, j, Port::ColUp, r[2 * i]);
            out.set(i, j, Port::ColDown, r[2 * i + 1]);
        }
    }
    Ok(out)
}

/// Per-PE guest registers, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuestState {
    n: usize,
    per_pe: usize,
    regs: Vec<Word>,
}

impl GuestState {
    pub fn new(n: usize, per_pe: usize) -> Self {
        GuestState {
            n,
            per_pe,
            regs: vec![0; n * n * per_pe],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn regs(&self, row: usize, col: usize) -> &[Word] {
        let b = (row * self.n + col) * self.per_pe;
        &self.regs[b..b + self.per_pe]
    }

    pub fn regs_mut(&mut self, row: usize, col: usize) -> &mut [Word] {
        let b = (row * self.n + col) * self.per_pe;
        &mut self.regs[b..b + self.per_pe]
    }
}

/// Outgoing local messages of one PE, indexed by [`Dir::index`].
pub type LocalOut = [Option<Word>; 4];
/// Received local messages, indexed by the direction they arrived from.
pub type Inbox = [Option<Word>; 4];

/// Routes one local-communication sub-step on an `n × n` grid.
pub fn deliver_local(n: usize, local_out: &[LocalOut]) -> Result<Vec<Inbox>, MsbError> {
    if local_out.len() != n * n {
        return Err(MsbError::StateShape);
    }
    let mut inbox = vec![[None; 4]; n * n];
    for (idx, out) in local_out.iter().enumerate() {
        let at = Coord::new(idx / n, idx % n);
        for dir in Dir::ALL {
            if let Some(word) = out[dir.index()] {
                let to = at.step(dir, n, n).ok_or(MsbError::NoNeighbor { at, dir })?;
                inbox[to.row * n + to.col][dir.opposite().index()] = Some(word);
            }
        }
    }
    Ok(inbox)
}

/// One full guest step: local communication, broadcast, compute.
pub fn msb_execute_step<F>(
    s: &MsbScenario,
    local_out: &[LocalOut],
    state: &mut GuestState,
    mut transition: F,
) -> Result<MsbOutcome, MsbError>
where
    F: FnMut(Coord, &mut [Word], &Inbox, &PortSymbols),
{
    if state.n != s.n {
        return Err(MsbError::StateShape);
    }
    let inbox = deliver_local(s.n, local_out)?;
    let outcome = msb_execute_broadcast(s)?;
    for i in 0..s.n {
        for j in 0..s.n {
            let idx = i * s.n + j;
            transition(Coord::new(i, j), state.regs_mut(i, j), &inbox[idx], outcome.at(i, j));
        }
    }
    Ok(outcome)
}
