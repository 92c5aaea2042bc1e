use std::fmt;

use serde::{Deserialize, Serialize};

use super::EngineError;

/// Bits per strategy parameter.
pub const GENE_BITS: u32 = 3;
/// Number of quantization levels per parameter.
pub const LEVELS: u8 = 1 << GENE_BITS;
/// Total genome length in bits (B, L, Q).
pub const GENOME_BITS: u32 = 3 * GENE_BITS;
pub const GENOME_MASK: u16 = (1 << GENOME_BITS) - 1;

/// Smallest decodable quality, used as `Q_min` in the posting probability.
pub const Q_MIN: f64 = 1.0 / LEVELS as f64;

const GENE_MASK: u16 = (1 << GENE_BITS) - 1;

/// An agent's posting strategy: posting rate B, comment rate L and article
/// quality Q, each quantized to eight levels decoded as `(level + 1) / 8`.
///
/// The bit layout is `BBB LLL QQQ` with B in the high bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Genome {
    bits: u16,
}

impl Genome {
    /// Panics if any level is 8 or above.
    pub fn from_levels(b_level: u8, l_level: u8, q_level: u8) -> Self {
        assert!(
            b_level < LEVELS && l_level < LEVELS && q_level < LEVELS,
            "gene levels must be below {LEVELS}"
        );
        let bits = (u16::from(b_level) << (2 * GENE_BITS))
            | (u16::from(l_level) << GENE_BITS)
            | u16::from(q_level);
        Genome { bits }
    }

    /// Decodes a 9-bit string; bits above the genome length are ignored.
    pub fn from_bits(bits: u16) -> Self {
        Genome {
            bits: bits & GENOME_MASK,
        }
    }

    pub fn bits(self) -> u16 {
        self.bits
    }

    pub fn b_level(self) -> u8 {
        ((self.bits >> (2 * GENE_BITS)) & GENE_MASK) as u8
    }

    pub fn l_level(self) -> u8 {
        ((self.bits >> GENE_BITS) & GENE_MASK) as u8
    }

    pub fn q_level(self) -> u8 {
        (self.bits & GENE_MASK) as u8
    }

    /// Posting rate B.
    pub fn posting_rate(self) -> f64 {
        decode_level(self.b_level())
    }

    /// Comment rate L.
    pub fn comment_rate(self) -> f64 {
        decode_level(self.l_level())
    }

    /// Article quality Q; never below [`Q_MIN`].
    pub fn quality(self) -> f64 {
        decode_level(self.q_level())
    }

    pub fn strategy(self) -> Strategy {
        Strategy {
            posting_rate: self.posting_rate(),
            comment_rate: self.comment_rate(),
            quality: self.quality(),
        }
    }
}

/// Decoded behavior the game engine plays with.
///
/// Genomes always decode to levels in `{1/8, ..., 1}`; building a strategy
/// directly also admits zero posting and comment rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub posting_rate: f64,
    pub comment_rate: f64,
    pub quality: f64,
}

impl Strategy {
    pub fn new(posting_rate: f64, comment_rate: f64, quality: f64) -> Result<Self, EngineError> {
        for (name, value) in [("posting_rate", posting_rate), ("comment_rate", comment_rate)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(EngineError::InvalidParam { name, value });
            }
        }
        if !(Q_MIN..=1.0).contains(&quality) {
            return Err(EngineError::QualityBelowMinimum {
                q: quality,
                q_min: Q_MIN,
            });
        }
        Ok(Strategy {
            posting_rate,
            comment_rate,
            quality,
        })
    }
}

impl From<Genome> for Strategy {
    fn from(genome: Genome) -> Self {
        genome.strategy()
    }
}

pub fn decode_level(level: u8) -> f64 {
    f64::from(level + 1) / f64::from(LEVELS)
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "B={} L={} Q={}",
            self.posting_rate(),
            self.comment_rate(),
            self.quality()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};

    #[test]
    fn decodes_levels() {
        let g = Genome::from_levels(0, 3, 7);
        assert_eq!(g.posting_rate(), 0.125);
        assert_eq!(g.comment_rate(), 0.5);
        assert_eq!(g.quality(), 1.0);
        assert_eq!(g.bits(), 0b000_011_111);
    }

    #[test]
    fn quality_floor_is_q_min() {
        for bits in 0..=GENOME_MASK {
            assert!(Genome::from_bits(bits).quality() >= Q_MIN);
        }
    }

    #[test]
    fn strategy_bounds() {
        assert!(Strategy::new(0.0, 0.0, Q_MIN).is_ok());
        assert!(Strategy::new(0.5, 0.5, 0.1).is_err());
        assert!(Strategy::new(1.1, 0.5, 0.5).is_err());
        let s = Genome::from_levels(1, 2, 3).strategy();
        assert_eq!((s.posting_rate, s.comment_rate, s.quality), (0.25, 0.375, 0.5));
    }

    #[test]
    #[should_panic]
    fn rejects_level_eight() {
        Genome::from_levels(8, 0, 0);
    }

    proptest! {
        #[test]
        fn bit_codec_round_trips(bits in 0u16..512) {
            let g = Genome::from_bits(bits);
            prop_assert_eq!(g.bits(), bits);
            prop_assert_eq!(Genome::from_levels(g.b_level(), g.l_level(), g.q_level()), g);
        }

        #[test]
        fn decoded_values_are_eighths(b in 0u8..8, l in 0u8..8, q in 0u8..8) {
            let g = Genome::from_levels(b, l, q);
            for v in [g.posting_rate(), g.comment_rate(), g.quality()] {
                let k = v * 8.0;
                prop_assert!(k.fract() == 0.0 && (1.0..=8.0).contains(&k));
            }
        }
    }
}
