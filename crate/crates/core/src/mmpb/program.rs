//! SPMD driver: every PE runs the same transition, round after round.

use super::machine::{MachineError, Mmpb, PeId, PeObs, RoundAction, RoundKind};
use crate::bus::Word;

/// A round-by-round program for every PE of the host.
///
/// The schedule (its length and the kind of each round) must depend only on
/// the machine parameters, never on register contents.
pub trait Program {
    /// Number of rounds.
    fn rounds(&self) -> usize;

    fn kind(&self, round: usize) -> RoundKind;

    /// What `pe` does in `round`, decided from its registers at round start.
    fn act(&self, round: usize, pe: PeId, regs: &[Word]) -> RoundAction;

    /// Compute sub-step of `pe` after `round`.
    fn update(&self, round: usize, pe: PeId, regs: &mut [Word], obs: &PeObs<'_>);
}

/// Runs `p` to completion and returns the number of rounds it consumed.
pub fn run_program<P: Program + ?Sized>(m: &mut Mmpb, p: &P) -> Result<u64, MachineError> {
    let start = m.rounds();
    let pes = m.pes();
    let mut actions = Vec::with_capacity(pes);
    for round in 0..p.rounds() {
        actions.clear();
        for pe in 0..pes {
            actions.push((pe, p.act(round, pe, m.regs(pe))));
        }
        m.run_round_as(p.kind(round), &actions)?;
        for pe in 0..pes {
            m.compute(pe, |regs, obs| p.update(round, pe, regs, obs));
        }
    }
    Ok(m.rounds() - start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bus::BusSymbol;
    use crate::geom::Axis;
    use crate::mmpb::config::{BusModel, MmpbConfig, Shape};
    use crate::mmpb::machine::BusWrite;

    struct Idle(usize);

    impl Program for Idle {
        fn rounds(&self) -> usize {
            self.0
        }
        fn kind(&self, _: usize) -> RoundKind {
            RoundKind::Local
        }
        fn act(&self, _: usize, _: PeId, _: &[Word]) -> RoundAction {
            RoundAction::default()
        }
        fn update(&self, _: usize, _: PeId, _: &mut [Word], _: &PeObs<'_>) {}
    }

    /// Each segment leader writes register 0; everybody stores what it saw.
    struct Ping;

    impl Program for Ping {
        fn rounds(&self) -> usize {
            1
        }
        fn kind(&self, _: usize) -> RoundKind {
            RoundKind::Bus
        }
        fn act(&self, _: usize, pe: PeId, regs: &[Word]) -> RoundAction {
            let write = pe.is_multiple_of(4).then_some(BusWrite {
                axis: Axis::Row,
                level: 1,
                payload: regs[0],
            });
            RoundAction {
                write,
                ..Default::default()
            }
        }
        fn update(&self, _: usize, _: PeId, regs: &mut [Word], obs: &PeObs<'_>) {
            regs[1] = match obs.bus(Axis::Row, 1) {
                BusSymbol::Data(v) => v,
                _ => Word::MAX,
            };
        }
    }

    #[test]
    fn idle_program_counts_rounds() {
        let mut m = Mmpb::new(MmpbConfig::new(8, vec![4]).unwrap(), Shape::Full, BusModel::Word, 1);
        assert_eq!(run_program(&mut m, &Idle(5)).unwrap(), 5);
        assert_eq!(m.rounds(), 5);
    }

    #[test]
    fn ping_reads_back_own_segment() {
        for model in [BusModel::Word, BusModel::Bit] {
            let mut m = Mmpb::new(MmpbConfig::new(8, vec![4]).unwrap(), Shape::RowOnly, model, 2);
            for pe in 0..8 {
                m.regs_mut(pe)[0] = pe as Word;
            }
            run_program(&mut m, &Ping).unwrap();
            for pe in 0..8 {
                assert_eq!(m.regs(pe)[1], (pe - pe % 4) as Word);
            }
        }
    }
}
