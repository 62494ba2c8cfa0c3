use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bus::word_width;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("side {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("side {0} is below the minimum of 4")]
    TooSmall(usize),
    #[error("at least one bus level is required")]
    NoLevels,
    #[error("{levels} levels exceed log2(n) = {max}")]
    TooManyLevels { levels: usize, max: usize },
    #[error("level {level} length {length} must be a power of two in 1..=n")]
    BadLength { level: usize, length: usize },
    #[error("level {level} length does not divide the length of level {prev}")]
    NotChained { level: usize, prev: usize },
    #[error("{0}")]
    Invalid(String),
}

/// Host geometry: side `n` and the segment length of every bus level.
///
/// All lengths are powers of two with `ℓ_L | … | ℓ_1 | n`, so every block
/// at every recursion depth lines up with whole segments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MmpbConfig {
    n: usize,
    lengths: Vec<usize>,
}

impl MmpbConfig {
    pub fn new(n: usize, lengths: Vec<usize>) -> Result<Self, ConfigError> {
        if !n.is_power_of_two() {
            return Err(ConfigError::NotPowerOfTwo(n));
        }
        if n < 4 {
            return Err(ConfigError::TooSmall(n));
        }
        if lengths.is_empty() {
            return Err(ConfigError::NoLevels);
        }
        for (i, &len) in lengths.iter().enumerate() {
            if !len.is_power_of_two() || len > n {
                return Err(ConfigError::BadLength {
                    level: i + 1,
                    length: len,
                });
            }
            if i > 0 && len > lengths[i - 1] {
                return Err(ConfigError::NotChained { level: i + 1, prev: i });
            }
        }
        Ok(MmpbConfig { n, lengths })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> usize {
        self.lengths.len()
    }

    /// Segment lengths `ℓ_1 … ℓ_L`.
    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    /// Segment length of 1-based `level`.
    pub fn length(&self, level: usize) -> usize {
        self.lengths[level - 1]
    }

    /// Word (and word-model bus) width `⌈log₂ n⌉`.
    pub fn width(&self) -> u32 {
        word_width(self.n)
    }

    pub fn lengths_label(&self) -> String {
        self.lengths.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(":")
    }
}

/// Which part of the mesh is instantiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shape {
    /// The whole `n × n` array with row and column buses.
    Full,
    /// A single `1 × n` row; only row buses exist.
    RowOnly,
}

/// Width of every partitioned bus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BusModel {
    /// `⌈log₂ n⌉` wires: one word per round.
    Word,
    /// One wire: one bit per round.
    Bit,
}

impl BusModel {
    pub fn name(self) -> &'static str {
        match self {
            BusModel::Word => "word",
            BusModel::Bit => "bit",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(MmpbConfig::new(16, vec![16, 4]).is_ok());
        assert!(MmpbConfig::new(1024, vec![1024, 32]).is_ok());
        assert_eq!(MmpbConfig::new(12, vec![4]), Err(ConfigError::NotPowerOfTwo(12)));
        assert_eq!(MmpbConfig::new(2, vec![2]), Err(ConfigError::TooSmall(2)));
        assert_eq!(MmpbConfig::new(16, vec![]), Err(ConfigError::NoLevels));
        assert!(matches!(
            MmpbConfig::new(16, vec![32]),
            Err(ConfigError::BadLength { .. })
        ));
        assert!(matches!(
            MmpbConfig::new(16, vec![6]),
            Err(ConfigError::BadLength { .. })
        ));
        assert!(matches!(
            MmpbConfig::new(16, vec![4, 8]),
            Err(ConfigError::NotChained { level: 2, prev: 1 })
        ));
        assert_eq!(MmpbConfig::new(16, vec![16, 4]).unwrap().lengths_label(), "16:4");
    }
}
