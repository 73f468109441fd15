use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuits::Direction;

use super::golden::{golden_shift, mask};
use super::program::{OpProgram, Operation};

/// Single bit walked across every output: the LSB shifted right by
/// `0..N`, then the MSB shifted left by `0..N`.
pub fn staircase_pattern(width: usize) -> OpProgram {
    let mut p = OpProgram::new(width);
    let msb = 1u64 << (width - 1);
    for k in 0..width as u32 {
        p.push(1, Direction::Right, k, 1 << k);
    }
    for k in 0..width as u32 {
        p.push(msb, Direction::Left, k, msb >> k);
    }
    p
}

fn op(word: u64, width: usize, dir: Direction, k: u32) -> Operation {
    Operation {
        word,
        dir,
        k,
        expected: golden_shift(word, width, k, dir).expect("k < width is always encodable"),
    }
}

/// Every word, every shift amount below `width`, both directions.
/// Ordered by direction, then shift amount, then word.
pub fn exhaustive_operations(width: usize) -> Vec<Operation> {
    assert!(width <= 20, "exhaustive enumeration of {width}-bit words");
    let mut ops = Vec::with_capacity((2 * width) << width);
    for dir in Direction::BOTH {
        for k in 0..width as u32 {
            for word in 0..1u64 << width {
                ops.push(op(word, width, dir, k));
            }
        }
    }
    ops
}

/// `words` seeded random words, each with every shift amount in both
/// directions.
pub fn random_operations(width: usize, words: usize, seed: u64) -> Vec<Operation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ops = Vec::with_capacity(words * 2 * width);
    for _ in 0..words {
        let word = rng.random::<u64>() & mask(width);
        for dir in Direction::BOTH {
            for k in 0..width as u32 {
                ops.push(op(word, width, dir, k));
            }
        }
    }
    ops
}
