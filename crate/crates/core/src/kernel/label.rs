//! Component labels with a conflict bit, and their register encoding.

use crate::bus::{BusSymbol, Word};
use crate::mmpb::EMPTY;

/// Label of an empty component (no writer): greater than every payload.
pub const PHI: Word = EMPTY;

/// Flag bits stored next to every label.
pub const CONFLICT: Word = 1;
/// The port is connected to the start of the current span.
pub const CONN_S: Word = 2;
/// The port is connected to the end of the current span.
pub const CONN_E: Word = 4;

/// A partial component label: the minimum writer value seen so far and
/// whether two distinct values have met.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lab {
    pub label: Word,
    pub conflict: bool,
}

impl Lab {
    pub const EMPTY: Lab = Lab {
        label: PHI,
        conflict: false,
    };

    #[inline]
    pub fn new(label: Word, flags: Word) -> Self {
        Lab {
            label,
            conflict: flags & CONFLICT != 0,
        }
    }

    #[inline]
    pub fn from_regs(regs: &[Word], label: usize, flags: usize) -> Self {
        Lab::new(regs[label], regs[flags])
    }

    /// Associative, commutative and idempotent merge.
    #[inline]
    pub fn merge(self, o: Lab) -> Lab {
        let clash = self.label != PHI && o.label != PHI && self.label != o.label;
        Lab {
            label: self.label.min(o.label),
            conflict: self.conflict || o.conflict || clash,
        }
    }

    #[inline]
    pub fn flags(self) -> Word {
        self.conflict as Word
    }

    /// Stores the label and its flags with the given connection bits.
    #[inline]
    pub fn store(self, regs: &mut [Word], label: usize, flags: usize, conn: Word) {
        regs[label] = self.label;
        regs[flags] = self.flags() | conn;
    }

    /// The symbol every port of the component receives.
    pub fn symbol(self) -> BusSymbol {
        if self.conflict {
            BusSymbol::Bot
        } else if self.label == PHI {
            BusSymbol::Phi
        } else {
            BusSymbol::Data(self.label)
        }
    }

    /// Initial label of a port from the word written through it.
    pub fn written(w: Option<Word>) -> Lab {
        Lab {
            label: w.unwrap_or(PHI),
            conflict: false,
        }
    }
}

/// Word to put on the wire for a label; an empty label stays silent.
#[inline]
pub fn wire(label: Word) -> Option<Word> {
    (label != PHI).then_some(label)
}

/// Label from a received word.
#[inline]
pub fn unwire(w: Option<Word>) -> Word {
    w.unwrap_or(PHI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bus::resolve_segment;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn merge_is_a_semilattice(a in 0u32..6, b in 0u32..6, c in 0u32..6, fa: bool, fb: bool, fc: bool) {
            let mk = |v: u32, f: bool| Lab { label: if v == 5 { PHI } else { v }, conflict: f };
            let (a, b, c) = (mk(a, fa), mk(b, fb), mk(c, fc));
            prop_assert_eq!(a.merge(b), b.merge(a));
            prop_assert_eq!(a.merge(b).merge(c), a.merge(b.merge(c)));
            prop_assert_eq!(a.merge(a), a);
        }

        #[test]
        fn folding_writers_resolves_the_segment(ws in proptest::collection::vec(0u32..8, 0..5)) {
            let lab = ws.iter().fold(Lab::EMPTY, |acc, w| acc.merge(Lab::written(Some(*w))));
            prop_assert_eq!(lab.symbol(), resolve_segment(ws.iter().copied(), 3).unwrap());
        }
    }
}
