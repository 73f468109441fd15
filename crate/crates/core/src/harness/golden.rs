use crate::circuits::{min_generator_bits, Direction};

use super::HarnessError;

pub(crate) fn mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Logical shift with zero fill, in register bit-index terms.
///
/// `Right` moves bit i to i+k (so the numeric value grows), `Left` moves
/// bit i to i-k. Bits pushed past either end are dropped.
pub fn golden_shift(word: u64, width: usize, k: u32, dir: Direction) -> Result<u64, HarnessError> {
    if word & !mask(width) != 0 {
        return Err(HarnessError::WordOutOfRange { word, width });
    }
    if k >= 1 << min_generator_bits(width) {
        return Err(HarnessError::ShiftOutOfRange { k, width });
    }
    if k as usize >= width {
        return Ok(0);
    }
    Ok(match dir {
        Direction::Right => (word << k) & mask(width),
        Direction::Left => word >> k,
    })
}
