//! Port-connectivity graph of one separable bus, and the sequential
//! reference labeling that every parallel simulation is checked against.
//!
//! A line of `m` PEs has `2m` ports. Port `2j` is the left (or upper) port of
//! PE `j` and `2j + 1` its right (or lower) port. The wire between PE `j` and
//! PE `j + 1` always joins ports `2j + 1` and `2j + 2`; the sectioning switch
//! of PE `j` joins `2j` and `2j + 1` when closed. Every component is therefore
//! a contiguous run of ports.

use std::ops::Range;

use crate::bus::{check_payload, BusError, BusSymbol, SegmentState, Word};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinePcGraph {
    width: u32,
    switch_closed: Vec<bool>,
    /// Initial port labels; `None` is φ.
    port_init: Vec<Option<Word>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("{ports} port labels given for {pes} PEs")]
    PortCount { pes: usize, ports: usize },
    #[error(transparent)]
    Bus(#[from] BusError),
}

impl LinePcGraph {
    pub fn new(width: u32, switch_closed: Vec<bool>, port_init: Vec<Option<Word>>) -> Result<Self, GraphError> {
        if port_init.len() != 2 * switch_closed.len() {
            return Err(GraphError::PortCount {
                pes: switch_closed.len(),
                ports: port_init.len(),
            });
        }
        for v in port_init.iter().flatten() {
            check_payload(*v, width)?;
        }
        Ok(LinePcGraph {
            width,
            switch_closed,
            port_init,
        })
    }

    /// A line with every port silent.
    pub fn silent(width: u32, switch_closed: Vec<bool>) -> Self {
        let ports = 2 * switch_closed.len();
        LinePcGraph {
            width,
            switch_closed,
            port_init: vec![None; ports],
        }
    }

    pub fn pes(&self) -> usize {
        self.switch_closed.len()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn switch_closed(&self) -> &[bool] {
        &self.switch_closed
    }

    pub fn port_init(&self) -> &[Option<Word>] {
        &self.port_init
    }

    /// Explicit edge list: wire edges then closed-switch edges.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let m = self.pes();
        let wires = (0..m.saturating_sub(1)).map(|j| (2 * j + 1, 2 * j + 2));
        let switches = (0..m).filter(|&j| self.switch_closed[j]).map(|j| (2 * j, 2 * j + 1));
        wires.chain(switches).collect()
    }
}

/// Components of the graph as port intervals, left to right.
pub fn components(g: &LinePcGraph) -> Vec<Range<usize>> {
    let ports = 2 * g.pes();
    let mut out = Vec::new();
    let mut start = 0;
    for p in 1..ports {
        // Odd ports hang off their PE's switch; even ports off a wire.
        if p % 2 == 1 && !g.switch_closed[p / 2] {
            out.push(start..p);
            start = p;
        }
    }
    if ports > 0 {
        out.push(start..ports);
    }
    out
}

/// Component labels: the minimum initial label of each component, φ being
/// greater than every word.
pub fn label_components(g: &LinePcGraph) -> Vec<Option<Word>> {
    let mut labels = vec![None; 2 * g.pes()];
    for c in components(g) {
        let min = g.port_init[c.clone()].iter().flatten().min().copied();
        labels[c].fill(min);
    }
    labels
}

/// What every port receives in the broadcast sub-step, collisions included.
pub fn resolve_broadcast(g: &LinePcGraph) -> Vec<BusSymbol> {
    let mut out = vec![BusSymbol::Phi; 2 * g.pes()];
    for c in components(g) {
        let state = g.port_init[c.clone()]
            .iter()
            .flatten()
            .fold(SegmentState::Idle, |s, v| s.push(*v));
        out[c].fill(state.symbol());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Union-find over the explicit edge list; shares nothing with the scan.
    struct Dsu(Vec<usize>);

    impl Dsu {
        fn find(&mut self, mut x: usize) -> usize {
            while self.0[x] != x {
                self.0[x] = self.0[self.0[x]];
                x = self.0[x];
            }
            x
        }
        fn union(&mut self, a: usize, b: usize) {
            let (a, b) = (self.find(a), self.find(b));
            self.0[a] = b;
        }
    }

    fn dsu_roots(g: &LinePcGraph) -> Vec<usize> {
        let mut d = Dsu((0..2 * g.pes()).collect());
        for (a, b) in g.edges() {
            d.union(a, b);
        }
        (0..2 * g.pes()).map(|p| d.find(p)).collect()
    }

    fn oracle_labels(g: &LinePcGraph) -> Vec<Option<Word>> {
        let roots = dsu_roots(g);
        (0..roots.len())
            .map(|p| {
                (0..roots.len())
                    .filter(|&q| roots[q] == roots[p])
                    .filter_map(|q| g.port_init[q])
                    .min()
            })
            .collect()
    }

    fn oracle_broadcast(g: &LinePcGraph) -> Vec<BusSymbol> {
        let roots = dsu_roots(g);
        (0..roots.len())
            .map(|p| {
                let mut vals: Vec<Word> = (0..roots.len())
                    .filter(|&q| roots[q] == roots[p])
                    .filter_map(|q| g.port_init[q])
                    .collect();
                vals.sort_unstable();
                vals.dedup();
                match vals.len() {
                    0 => BusSymbol::Phi,
                    1 => BusSymbol::Data(vals[0]),
                    _ => BusSymbol::Bot,
                }
            })
            .collect()
    }

    fn graph_strategy() -> impl Strategy<Value = LinePcGraph> {
        (1usize..=64).prop_flat_map(|m| {
            (
                proptest::collection::vec(any::<bool>(), m),
                proptest::collection::vec(proptest::option::weighted(0.3, 0u32..8), 2 * m),
            )
                .prop_map(|(sw, init)| LinePcGraph::new(3, sw, init).unwrap())
        })
    }

    #[test]
    fn all_open_and_all_closed() {
        let open = LinePcGraph::silent(2, vec![false; 4]);
        assert_eq!(components(&open), vec![0..1, 1..3, 3..5, 5..7, 7..8]);
        let closed = LinePcGraph::silent(2, vec![true; 4]);
        assert_eq!(components(&closed), vec![0..8]);
    }

    #[test]
    fn mixed_switches_match_union_find() {
        let g = LinePcGraph::silent(2, vec![true, false, true]);
        assert_eq!(components(&g), vec![0..3, 3..6]);
        let roots = dsu_roots(&g);
        assert!(roots[..3].iter().all(|r| *r == roots[0]));
        assert!(roots[3..].iter().all(|r| *r == roots[3]));
        assert_ne!(roots[0], roots[3]);
    }

    #[test]
    fn labeling_examples() {
        let g = LinePcGraph::silent(4, vec![true, false, true, false]);
        assert!(label_components(&g).iter().all(Option::is_none));

        let mut init = vec![None; 10];
        init[7] = Some(9);
        let g = LinePcGraph::new(4, vec![true; 5], init).unwrap();
        assert!(label_components(&g).iter().all(|l| *l == Some(9)));
    }

    #[test]
    fn broadcast_examples() {
        // Ports 0..4 form one component (PEs 0 and 1 closed).
        let mut init = vec![None; 8];
        init[0] = Some(4);
        init[3] = Some(4);
        let g = LinePcGraph::new(3, vec![true, true, false, false], init).unwrap();
        let r = resolve_broadcast(&g);
        assert!(r[..4].iter().all(|s| *s == BusSymbol::Data(4)));
        assert!(r[5..].iter().all(|s| *s == BusSymbol::Phi));

        let mut init = vec![None; 8];
        init[1] = Some(2);
        init[6] = Some(6);
        let g = LinePcGraph::new(3, vec![true; 4], init).unwrap();
        assert!(resolve_broadcast(&g).iter().all(|s| *s == BusSymbol::Bot));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(LinePcGraph::new(3, vec![true; 2], vec![None; 3]).is_err());
        assert!(LinePcGraph::new(3, vec![true; 1], vec![Some(8), None]).is_err());
    }

    proptest! {
        #[test]
        fn components_are_partitioning_intervals(g in graph_strategy()) {
            let comps = components(&g);
            let mut next = 0;
            for c in &comps {
                prop_assert_eq!(c.start, next);
                prop_assert!(c.end > c.start);
                next = c.end;
            }
            prop_assert_eq!(next, 2 * g.pes());
            let roots = dsu_roots(&g);
            for c in &comps {
                prop_assert!(c.clone().all(|p| roots[p] == roots[c.start]));
            }
            prop_assert_eq!(
                comps.len(),
                {
                    let mut r = roots.clone();
                    r.sort_unstable();
                    r.dedup();
                    r.len()
                }
            );
        }

        #[test]
        fn scan_agrees_with_union_find(g in graph_strategy()) {
            prop_assert_eq!(label_components(&g), oracle_labels(&g));
            prop_assert_eq!(resolve_broadcast(&g), oracle_broadcast(&g));
        }

        #[test]
        fn opening_a_switch_refines(g in graph_strategy(), pick in any::<usize>()) {
            let before = components(&g);
            let j = pick % g.pes();
            let mut sw = g.switch_closed().to_vec();
            sw[j] = false;
            let h = LinePcGraph::new(g.width(), sw, g.port_init().to_vec()).unwrap();
            for c in components(&h) {
                prop_assert!(before.iter().any(|b| b.start <= c.start && c.end <= b.end));
            }
        }

        #[test]
        fn broadcast_matches_labels_without_collisions(g in graph_strategy()) {
            let labels = label_components(&g);
            for (p, sym) in resolve_broadcast(&g).into_iter().enumerate() {
                match sym {
                    BusSymbol::Bot => {}
                    BusSymbol::Phi => prop_assert_eq!(labels[p], None),
                    BusSymbol::Data(v) => prop_assert_eq!(labels[p], Some(v)),
                }
            }
        }
    }
}
