//! Bus value domain and single-segment resolution.
//!
//! Every bus segment in both machines resolves the same way: no writer yields
//! [`BusSymbol::Phi`], writers that all agree deliver their word, and two or
//! more distinct words collide into [`BusSymbol::Bot`]. `Phi` and `Bot` are
//! out-of-band tags, so the whole `2^w` payload space stays usable.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A machine word. Payloads on buses and links are always `< 2^w`.
pub type Word = u32;

/// Largest supported word width (a machine side of up to `2^31`).
pub const MAX_WIDTH: u32 = 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum BusError {
    #[error("payload {payload} does not fit in {width} bits")]
    PayloadOverflow { payload: Word, width: u32 },
    #[error("word width {0} is outside 1..={MAX_WIDTH}")]
    BadWidth(u32),
    #[error("bit slots mix undriven and driven positions")]
    MixedSlots,
}

/// Word width of a machine of side `n`: `⌈log₂ n⌉`, at least one bit.
pub fn word_width(n: usize) -> u32 {
    if n <= 2 {
        1
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// Checks `payload < 2^width`.
pub fn check_payload(payload: Word, width: u32) -> Result<(), BusError> {
    if width == 0 || width > MAX_WIDTH {
        return Err(BusError::BadWidth(width));
    }
    if payload >> width != 0 {
        return Err(BusError::PayloadOverflow { payload, width });
    }
    Ok(())
}

/// What a PE observes on a bus segment (or sends through a port).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BusSymbol {
    Data(Word),
    Phi,
    Bot,
}

impl BusSymbol {
    pub fn data(self) -> Option<Word> {
        match self {
            BusSymbol::Data(v) => Some(v),
            _ => None,
        }
    }
}

/// Running resolution of one segment. Feeding writes one at a time gives
/// the same result as [`resolve_segment`] over the whole multiset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SegmentState {
    #[default]
    Idle,
    One(Word),
    Collided,
}

impl SegmentState {
    #[inline]
    pub fn push(self, payload: Word) -> SegmentState {
        match self {
            SegmentState::Idle => SegmentState::One(payload),
            SegmentState::One(v) if v == payload => self,
            _ => SegmentState::Collided,
        }
    }

    #[inline]
    pub fn symbol(self) -> BusSymbol {
        match self {
            SegmentState::Idle => BusSymbol::Phi,
            SegmentState::One(v) => BusSymbol::Data(v),
            SegmentState::Collided => BusSymbol::Bot,
        }
    }
}

/// Resolves the writes of one segment in one step (Common-CRCW semantics).
pub fn resolve_segment<I>(writes: I, width: u32) -> Result<BusSymbol, BusError>
where
    I: IntoIterator<Item = Word>,
{
    if width == 0 || width > MAX_WIDTH {
        return Err(BusError::BadWidth(width));
    }
    let mut state = SegmentState::Idle;
    for w in writes {
        check_payload(w, width)?;
        state = state.push(w);
    }
    Ok(state.symbol())
}

/// Outcome of one bit slot on a single-wire bus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BitOutcome {
    Zero,
    One,
    #[default]
    PhiBit,
    BotBit,
}

impl BitOutcome {
    /// Folds one more driven bit into the slot.
    #[inline]
    pub fn drive(self, bit: bool) -> BitOutcome {
        let driven = if bit { BitOutcome::One } else { BitOutcome::Zero };
        match self {
            BitOutcome::PhiBit => driven,
            BitOutcome::BotBit => BitOutcome::BotBit,
            same if same == driven => same,
            _ => BitOutcome::BotBit,
        }
    }
}

/// Serializes `payload` into `width` bits, most significant first.
pub fn bit_decompose(payload: Word, width: u32) -> Result<Vec<bool>, BusError> {
    check_payload(payload, width)?;
    Ok((0..width).rev().map(|i| (payload >> i) & 1 == 1).collect())
}

/// Rebuilds the word-level symbol from `width` slot outcomes.
pub fn bit_reassemble(slots: &[BitOutcome]) -> Result<BusSymbol, BusError> {
    if slots.is_empty() || slots.len() > MAX_WIDTH as usize {
        return Err(BusError::BadWidth(slots.len() as u32));
    }
    let idle = slots.iter().filter(|s| **s == BitOutcome::PhiBit).count();
    if idle == slots.len() {
        return Ok(BusSymbol::Phi);
    }
    if idle != 0 {
        return Err(BusError::MixedSlots);
    }
    let mut value: Word = 0;
    for slot in slots {
        value = match slot {
            BitOutcome::Zero => value << 1,
            BitOutcome::One => (value << 1) | 1,
            BitOutcome::BotBit => return Ok(BusSymbol::Bot),
            BitOutcome::PhiBit => unreachable!(),
        };
    }
    Ok(BusSymbol::Data(value))
}

/// Transmits a set of concurrent word writes bit-serially over one wire:
/// slot `t` carries bit `t` of every writer. Returns the per-slot outcomes.
pub fn transmit_bit_serial<I>(writes: I, width: u32) -> Result<Vec<BitOutcome>, BusError>
where
    I: IntoIterator<Item = Word>,
{
    if width == 0 || width > MAX_WIDTH {
        return Err(BusError::BadWidth(width));
    }
    let mut slots = vec![BitOutcome::PhiBit; width as usize];
    for w in writes {
        for (slot, bit) in slots.iter_mut().zip(bit_decompose(w, width)?) {
            *slot = slot.drive(bit);
        }
    }
    Ok(slots)
}
