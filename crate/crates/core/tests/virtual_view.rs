//! Virtual views against freestanding machines of the virtual size.

use busmesh::bus::{BusSymbol, Word};
use busmesh::geom::Axis;
use busmesh::mmpb::{
    make_virtual_view, segment_of, BusModel, Hop, HopDir, Mmpb, MmpbConfig, Sel, Shape, VirtualView, RELAY_REGS,
};
use proptest::prelude::*;

const A: usize = RELAY_REGS;
const B: usize = RELAY_REGS + 1;

fn row_machine(n: usize, lengths: Vec<usize>) -> Mmpb {
    Mmpb::new(
        MmpbConfig::new(n, lengths).unwrap(),
        Shape::RowOnly,
        BusModel::Word,
        RELAY_REGS + 2,
    )
}

#[test]
fn leader_view_shape() {
    let m = row_machine(16, vec![16, 4]);
    let v = make_virtual_view(&m, Axis::Row, 2).unwrap();
    assert_eq!(v.len(), 4);
    assert_eq!(v.stride(), 4);
    assert_eq!(v.levels(), &[1]);
    assert_eq!(v.virtual_length(1), 4);
    assert_eq!(v.real_pe(0, 3), 12);
    assert!(make_virtual_view(&m, Axis::Row, 3).is_err());
    assert!(make_virtual_view(&m, Axis::Col, 0).is_err());
}

#[test]
fn hops_between_leaders_take_two_rounds() {
    let mut m = row_machine(16, vec![16, 4]);
    let v = make_virtual_view(&m, Axis::Row, 2).unwrap();
    m.regs_mut(0)[A] = 9;
    m.regs_mut(12)[A] = 5;
    let hops = [
        Hop {
            dir: HopDir::Fwd,
            senders: Sel::new(0, 4),
        },
        Hop {
            dir: HopDir::Back,
            senders: Sel::new(3, 4),
        },
    ];
    v.exchange(
        &mut m,
        &hops,
        |_, _, regs| Some(regs[A]),
        |_, _, regs, w| regs[B] = w.unwrap(),
    )
    .unwrap();
    assert_eq!(m.rounds(), 2);
    assert_eq!(m.regs(4)[B], 9);
    assert_eq!(m.regs(8)[B], 5);
    assert!((0..16).filter(|pe| ![4, 8].contains(pe)).all(|pe| m.regs(pe)[B] == 0));
}

#[test]
fn backward_hop_reaches_previous_leader() {
    let mut m = row_machine(16, vec![16, 4]);
    let v = make_virtual_view(&m, Axis::Row, 2).unwrap();
    m.regs_mut(8)[A] = 5;
    let hops = [Hop {
        dir: HopDir::Back,
        senders: Sel::new(2, 4),
    }];
    v.exchange(
        &mut m,
        &hops,
        |_, _, regs| Some(regs[A]),
        |_, _, regs, w| regs[B] = w.unwrap(),
    )
    .unwrap();
    assert!(m.rounds() <= 2);
    assert_eq!(m.regs(4)[B], 5);
    assert!((0..16).filter(|&pe| pe != 4).all(|pe| m.regs(pe)[B] == 0));
}

#[test]
fn full_stride_view_is_a_single_pe() {
    let mut m = row_machine(16, vec![16]);
    let v = make_virtual_view(&m, Axis::Row, 1).unwrap();
    assert_eq!(v.len(), 1);
    assert!(v.levels().is_empty());
    assert!(v.child().is_none());
    let mut calls = 0;
    v.local(&mut m, Sel::all(), |_, _| calls += 1);
    assert_eq!(calls, 1);
    assert_eq!(m.rounds(), 0);
}

#[test]
fn segment_index() {
    let cfg = MmpbConfig::new(16, vec![16, 4]).unwrap();
    for level in 1..=2 {
        assert_eq!(segment_of(&cfg, 0, level), 0);
        let l = cfg.length(level);
        if l < 16 {
            assert_eq!(segment_of(&cfg, l, level), 1);
        }
        assert_eq!(segment_of(&cfg, 15, level), 16 / l - 1);
    }
}

#[derive(Debug, Clone)]
enum Op {
    Bus {
        level: usize,
        first: usize,
        step: usize,
    },
    Hop {
        fwd_first: usize,
        back_first: usize,
        step: usize,
    },
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (1usize..=2, 0usize..16, prop::sample::select(vec![1usize, 2, 4, 8, 16])).prop_map(|(level, first, step)| {
            Op::Bus {
                level,
                first: first % step,
                step,
            }
        }),
        (0usize..16, 0usize..16, prop::sample::select(vec![2usize, 4, 8, 16])).prop_map(|(f, b, step)| Op::Hop {
            fwd_first: f % step,
            back_first: b % step,
            step
        }),
    ]
}

fn encode(sym: BusSymbol) -> Word {
    match sym {
        BusSymbol::Data(v) => v,
        BusSymbol::Phi => 100,
        BusSymbol::Bot => 101,
    }
}

/// Runs `ops` on `view`: payloads stay below 16 so both widths accept them.
fn run(m: &mut Mmpb, view: &VirtualView, ops: &[Op]) {
    for op in ops {
        match *op {
            Op::Bus { level, first, step } => view
                .bus_round(
                    m,
                    level,
                    &[Sel::new(first, step)],
                    |_, regs| Some(regs[A]),
                    &[Sel::all()],
                    |_, regs, sym| {
                        regs[B] = regs[B].wrapping_mul(31).wrapping_add(encode(sym));
                        if let Some(v) = sym.data() {
                            regs[A] = (regs[A] + v) % 16;
                        }
                    },
                )
                .unwrap(),
            Op::Hop {
                fwd_first,
                back_first,
                step,
            } => {
                let hops = [
                    Hop {
                        dir: HopDir::Fwd,
                        senders: Sel::new(fwd_first, step),
                    },
                    Hop {
                        dir: HopDir::Back,
                        senders: Sel::new(back_first, step),
                    },
                ];
                view.exchange(
                    m,
                    &hops,
                    |_, _, regs| (regs[A] % 3 != 0).then_some(regs[A]),
                    |_, dir, regs, w| {
                        let tag = if dir == HopDir::Fwd { 7 } else { 11 };
                        regs[B] = regs[B].wrapping_mul(tag).wrapping_add(w.map_or(200, |x| x));
                        regs[A] = (regs[A] + w.unwrap_or(1)) % 16;
                    },
                )
                .unwrap()
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Leaders of a 1 × 64 host with lengths (64, 16, 4) behave like a
    /// freestanding 1 × 16 host with lengths (16, 4), at most two real rounds
    /// per virtual round.
    #[test]
    fn leaders_match_a_freestanding_machine(
        init in prop::collection::vec(0 as Word..16, 16),
        ops in prop::collection::vec(op(), 1..12),
    ) {
        let mut host = row_machine(64, vec![64, 16, 4]);
        let view = make_virtual_view(&host, Axis::Row, 3).unwrap();
        let mut free = row_machine(16, vec![16, 4]);
        let base = make_virtual_view(&free, Axis::Row, 0).unwrap();
        prop_assert_eq!(view.len(), 16);
        prop_assert_eq!(view.virtual_length(1), 16);
        prop_assert_eq!(view.virtual_length(2), 4);
        for (p, &x) in init.iter().enumerate() {
            host.regs_mut(view.real_pe(0, p))[A] = x;
            free.regs_mut(p)[A] = x;
        }
        run(&mut host, &view, &ops);
        run(&mut free, &base, &ops);
        for p in 0..16 {
            let (h, f) = (host.regs(view.real_pe(0, p)), free.regs(p));
            prop_assert_eq!(&h[A..], &f[A..], "virtual PE {}", p);
        }
        prop_assert!(host.rounds() <= 2 * free.rounds());
    }
}
