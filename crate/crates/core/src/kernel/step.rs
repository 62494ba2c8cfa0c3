//! Guest steps and guest bus lines run on the host.

use super::bound::eval_bound;
use super::label::{Lab, PHI};
use super::recursive::{solve_lines, Fault};
use super::regs::{frame, reg_budget, L, LF, R, RF, SW};
use super::report::{AxisReport, StepReport};
use super::KernelError;
use crate::bus::{BusSymbol, Word};
use crate::geom::{Axis, Coord, Dir};
use crate::mmpb::{make_virtual_view, BusModel, MachineError, Mmpb, MmpbConfig, RoundKind, Shape};
use crate::msb::{GuestState, Inbox, LocalOut, MsbOutcome, MsbScenario, Port, PortSymbols};
use crate::pc_graph::LinePcGraph;

/// Smallest host side: flag words need three bits.
pub const MIN_HOST_SIDE: usize = 8;

/// A host array prepared for the simulation kernel.
#[derive(Debug, Clone)]
pub struct Host {
    machine: Mmpb,
    fault: Option<Fault>,
}

impl Host {
    pub fn new(cfg: MmpbConfig, shape: Shape, model: BusModel) -> Result<Self, KernelError> {
        if cfg.n() < MIN_HOST_SIDE {
            return Err(KernelError::TooSmall(cfg.n()));
        }
        let regs = reg_budget(cfg.levels());
        Ok(Host {
            machine: Mmpb::new(cfg, shape, model, regs),
            fault: None,
        })
    }

    #[doc(hidden)]
    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = Some(fault);
        self
    }

    pub fn machine(&self) -> &Mmpb {
        &self.machine
    }

    pub fn config(&self) -> &MmpbConfig {
        self.machine.config()
    }

    pub fn n(&self) -> usize {
        self.machine.config().n()
    }

    /// Labels every line of `axis` whose problem has been loaded into frame 0.
    fn run_axis(&mut self, axis: Axis) -> Result<AxisReport, KernelError> {
        let m = &mut self.machine;
        let view = make_virtual_view(m, axis, 0)?;
        let (r0, b0) = (m.rounds(), m.bus_rounds());
        let mut trace = Vec::new();
        solve_lines(m, &view, 0, &mut trace, self.fault)?;
        Ok(AxisReport {
            axis,
            rounds: m.rounds() - r0,
            bus_rounds: m.bus_rounds() - b0,
            trace,
        })
    }

    /// Real PE at `pos` on `line` of `axis`.
    fn pe(&self, axis: Axis, line: usize, pos: usize) -> usize {
        match axis {
            Axis::Row => line * self.n() + pos,
            Axis::Col => pos * self.n() + line,
        }
    }

    fn load(&mut self, axis: Axis, line: usize, g: &LinePcGraph) {
        let f = frame(0);
        for pos in 0..self.n() {
            let pe = self.pe(axis, line, pos);
            let regs = self.machine.regs_mut(pe);
            regs[f + SW] = g.switch_closed()[pos] as Word;
            regs[f + L] = g.port_init()[2 * pos].unwrap_or(PHI);
            regs[f + LF] = 0;
            regs[f + R] = g.port_init()[2 * pos + 1].unwrap_or(PHI);
            regs[f + RF] = 0;
        }
    }

    fn port(&self, axis: Axis, line: usize, pos: usize) -> (BusSymbol, BusSymbol) {
        let f = frame(0);
        let regs = self.machine.regs(self.pe(axis, line, pos));
        (
            Lab::from_regs(regs, f + L, f + LF).symbol(),
            Lab::from_regs(regs, f + R, f + RF).symbol(),
        )
    }

    /// Labels one guest bus per host row; returns the symbol at every port.
    pub fn simulate_rows(&mut self, lines: &[LinePcGraph]) -> Result<(Vec<Vec<BusSymbol>>, AxisReport), KernelError> {
        let n = self.n();
        if lines.len() != self.machine.rows() || lines.iter().any(|g| g.pes() != n) {
            return Err(KernelError::Shape);
        }
        for (i, g) in lines.iter().enumerate() {
            if g.width() > self.machine.width() {
                return Err(KernelError::Shape);
            }
            self.load(Axis::Row, i, g);
        }
        let report = self.run_axis(Axis::Row)?;
        let out = (0..lines.len())
            .map(|i| {
                (0..n)
                    .flat_map(|j| {
                        let (l, r) = self.port(Axis::Row, i, j);
                        [l, r]
                    })
                    .collect()
            })
            .collect();
        Ok((out, report))
    }

    /// One guest broadcast sub-step: all rows in lockstep, then all columns.
    pub fn simulate_broadcast(&mut self, s: &MsbScenario) -> Result<(MsbOutcome, StepReport), KernelError> {
        let n = self.n();
        if s.n() != n || self.machine.shape() != Shape::Full {
            return Err(KernelError::Shape);
        }
        s.validate()?;
        let (r0, b0) = (self.machine.rounds(), self.machine.bus_rounds());
        let mut out = MsbOutcome::filled(n, BusSymbol::Phi);
        for i in 0..n {
            self.load(Axis::Row, i, &s.row_graph(i));
        }
        let row = self.run_axis(Axis::Row)?;
        for i in 0..n {
            for j in 0..n {
                let (l, r) = self.port(Axis::Row, i, j);
                out.set(i, j, Port::RowLeft, l);
                out.set(i, j, Port::RowRight, r);
            }
        }
        for j in 0..n {
            self.load(Axis::Col, j, &s.col_graph(j));
        }
        let col = self.run_axis(Axis::Col)?;
        for j in 0..n {
            for i in 0..n {
                let (u, d) = self.port(Axis::Col, j, i);
                out.set(i, j, Port::ColUp, u);
                out.set(i, j, Port::ColDown, d);
            }
        }
        let cfg = self.machine.config();
        let report = StepReport {
            n,
            levels: cfg.levels(),
            lengths: cfg.lengths().to_vec(),
            model: self.machine.model(),
            local_rounds: 0,
            row,
            col: Some(col),
            total_rounds: self.machine.rounds() - r0,
            bus_rounds: self.machine.bus_rounds() - b0,
            bound: eval_bound(n, cfg.lengths(), cfg.levels()),
        };
        Ok((out, report))
    }

    /// One full guest step: the local-communication sub-step in one host
    /// round, the broadcast sub-step, then the compute sub-step folded into
    /// the last round.
    pub fn simulate_msb_step<F>(
        &mut self,
        s: &MsbScenario,
        local_out: &[LocalOut],
        state: &mut GuestState,
        mut transition: F,
    ) -> Result<(MsbOutcome, StepReport), KernelError>
    where
        F: FnMut(Coord, &mut [Word], &Inbox, &PortSymbols),
    {
        let n = self.n();
        if s.n() != n || state.n() != n || local_out.len() != n * n {
            return Err(KernelError::Shape);
        }
        let m = &mut self.machine;
        m.begin_round(RoundKind::Local)?;
        let sent = (|| {
            for (pe, out) in local_out.iter().enumerate() {
                for dir in Dir::ALL {
                    if let Some(w) = out[dir.index()] {
                        m.send(pe, dir, w)?;
                    }
                }
            }
            Ok::<(), MachineError>(())
        })();
        if let Err(e) = sent {
            m.abort_round();
            return Err(e.into());
        }
        m.end_round()?;
        let inbox: Vec<Inbox> = (0..n * n).map(|pe| Dir::ALL.map(|d| m.inbox(pe, d))).collect();

        let (outcome, mut report) = self.simulate_broadcast(s)?;
        report.local_rounds = 1;
        report.total_rounds += 1;
        for i in 0..n {
            for j in 0..n {
                transition(
                    Coord::new(i, j),
                    state.regs_mut(i, j),
                    &inbox[i * n + j],
                    outcome.at(i, j),
                );
            }
        }
        Ok((outcome, report))
    }
}

/// Labels one guest line on a `1 × n` host using the first `k` levels of
/// `lengths`.
pub fn sim_bus_t(
    lengths: &[usize],
    k: usize,
    g: &LinePcGraph,
    model: BusModel,
) -> Result<(Vec<BusSymbol>, AxisReport), KernelError> {
    if k == 0 || k > lengths.len() {
        return Err(KernelError::Config(crate::mmpb::ConfigError::Invalid(format!(
            "k = {k} outside 1..={}",
            lengths.len()
        ))));
    }
    let cfg = MmpbConfig::new(g.pes(), lengths[..k].to_vec())?;
    let mut host = Host::new(cfg, Shape::RowOnly, model)?;
    let (mut out, report) = host.simulate_rows(std::slice::from_ref(g))?;
    Ok((out.pop().expect("one line"), report))
}

/// Labels one guest line on a `1 × m` host with a single full-length bus.
pub fn sim_bus_v(g: &LinePcGraph, model: BusModel) -> Result<(Vec<BusSymbol>, AxisReport), KernelError> {
    sim_bus_t(&[g.pes()], 1, g, model)
}
