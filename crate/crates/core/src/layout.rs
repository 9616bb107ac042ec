//! Geometry of the two quantum registers.
//!
//! Register `B` holds the problem-setting (the drawer number), register `A`
//! holds the candidate solution. Both have `n` bits, so the joint state lives
//! in a space of dimension `2^(2n)`. A joint basis index packs the `B` content
//! in the high `n` bits and the `A` content in the low `n` bits, which keeps
//! all amplitudes of one setting contiguous.
//!
//! Bit positions inside a register count from the left of the printed
//! bitstring: position 0 is the most significant bit. For `n = 2` this makes
//! position 0 the "left" bit and position 1 the "right" bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense simulation is capped at 8 bits per register (joint dimension 65536).
pub const MAX_BITS: u32 = 8;

/// One of the two registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Register {
    /// Problem-setting register (drawer with the ball).
    B,
    /// Solution register (drawer opened).
    A,
}

impl std::fmt::Display for Register {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Register::B => write!(f, "B"),
            Register::A => write!(f, "A"),
        }
    }
}

/// Sizes and index conventions for the joint `B ⊗ A` space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterLayout {
    n_bits: u32,
}

impl RegisterLayout {
    pub fn new(n_bits: u32) -> Result<Self> {
        if n_bits == 0 || n_bits > MAX_BITS {
            return Err(Error::InvalidLayout { n_bits });
        }
        Ok(Self { n_bits })
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    /// Number of basis states per register; equals the drawer count `N`.
    pub fn register_dim(&self) -> usize {
        1 << self.n_bits
    }

    /// Dimension of the joint space, `2^(2n)`.
    pub fn joint_dim(&self) -> usize {
        1 << (2 * self.n_bits)
    }

    /// Pack register contents into a joint basis index (`B` high, `A` low).
    pub fn joint_index(&self, b: u64, a: u64) -> usize {
        debug_assert!(b < self.register_dim() as u64 && a < self.register_dim() as u64);
        ((b as usize) << self.n_bits) | a as usize
    }

    /// Split a joint basis index into `(b, a)` register contents.
    pub fn split_index(&self, index: usize) -> (u64, u64) {
        let mask = self.register_dim() - 1;
        ((index >> self.n_bits) as u64, (index & mask) as u64)
    }

    /// Bit of `value` at `position`, counting position 0 as the leftmost
    /// (most significant) bit of the printed bitstring.
    pub fn bit_of(&self, value: u64, position: u32) -> bool {
        debug_assert!(position < self.n_bits);
        (value >> (self.n_bits - 1 - position)) & 1 == 1
    }

    /// Render a register value as an `n`-bit string, most significant first.
    pub fn format_value(&self, value: u64) -> String {
        (0..self.n_bits)
            .map(|p| if self.bit_of(value, p) { '1' } else { '0' })
            .collect()
    }

    /// Parse an `n`-bit string such as `"01"` into a register value.
    pub fn parse_value(&self, input: &str) -> Result<u64> {
        let bad = || Error::InvalidBitstring {
            input: input.to_string(),
            expected: self.n_bits,
        };
        if input.len() != self.n_bits as usize {
            return Err(bad());
        }
        let mut value = 0u64;
        for ch in input.chars() {
            value = (value << 1)
                | match ch {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(bad()),
                };
        }
        Ok(value)
    }

    /// All register values, in ascending order.
    pub fn values(&self) -> impl Iterator<Item = u64> {
        0..self.register_dim() as u64
    }

    /// The bits of `value` for positions `0..n`, leftmost first.
    pub fn value_bits(&self, value: u64) -> Vec<bool> {
        (0..self.n_bits).map(|p| self.bit_of(value, p)).collect()
    }

    /// Assemble a register value from per-position bits (a sparse complement
    /// of [`value_bits`](Self::value_bits)).
    pub fn value_from_bits(&self, positions: &[u32], bits: &[bool]) -> u64 {
        debug_assert_eq!(positions.len(), bits.len());
        positions
            .iter()
            .zip(bits)
            .filter(|(_, &bit)| bit)
            .map(|(&p, _)| 1u64 << (self.n_bits - 1 - p))
            .sum()
    }
}
