//! Reference models that never touch the event kernel.

#![allow(dead_code)]

use pulseflow::circuits::Direction;

/// Plain state machine for a ring of `bits` toggle flip-flops preloaded
/// with `a`. A toggle on a clear cell sets it and feeds a pulse back to
/// cell 0; on a set cell it clears it and carries into the next cell.
/// Returns (feedback pulses, readout pulses, final state).
pub fn ring_enumerate(bits: u32, a: u32) -> (u32, u32, Vec<bool>) {
    let mut state: Vec<bool> = (0..bits).map(|i| a >> i & 1 == 1).collect();
    let (mut feedback, mut readout) = (0, 0);
    // a launch is a toggle at cell 0
    let mut pending_toggles = 1;
    let mut guard = 0;
    while pending_toggles > 0 {
        pending_toggles -= 1;
        let mut i = 0usize;
        loop {
            guard += 1;
            assert!(guard < 1 << 20, "ring oracle does not terminate");
            if !state[i] {
                state[i] = true;
                feedback += 1;
                pending_toggles += 1;
                break;
            }
            state[i] = false;
            i += 1;
            if i == bits as usize {
                readout += 1;
                break;
            }
        }
    }
    (feedback, readout, state)
}

/// Logical shift over an explicit bit vector, one position per step.
pub fn shift_by_steps(word: u64, width: usize, k: u32, dir: Direction) -> u64 {
    let mut cells: Vec<bool> = (0..width).map(|i| word >> i & 1 == 1).collect();
    for _ in 0..k {
        let mut next = vec![false; width];
        for i in 0..width {
            match dir {
                Direction::Right if i + 1 < width => next[i + 1] = cells[i],
                Direction::Left if i > 0 => next[i - 1] = cells[i],
                _ => {}
            }
        }
        cells = next;
    }
    cells
        .iter()
        .enumerate()
        .map(|(i, &b)| u64::from(b) << i)
        .sum()
}

/// Same walk as [`shift_by_steps`] with cell `cut` unable to hold a bit.
pub fn shift_with_cut(word: u64, width: usize, k: u32, dir: Direction, cut: usize) -> u64 {
    let mut cells: Vec<bool> = (0..width).map(|i| i != cut && word >> i & 1 == 1).collect();
    for _ in 0..k {
        let mut next = vec![false; width];
        for (i, &bit) in cells.iter().enumerate() {
            let to = match dir {
                Direction::Right => i + 1,
                Direction::Left => i.wrapping_sub(1),
            };
            if to < width && to != cut {
                next[to] = bit;
            }
        }
        cells = next;
    }
    cells
        .iter()
        .enumerate()
        .map(|(i, &b)| u64::from(b) << i)
        .sum()
}
