use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

/// Simulation time in integer femtoseconds.
///
/// Every delay in the cell library is an exact multiple of one femtosecond, so
/// event ordering never depends on floating-point rounding.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TimeFs(pub u64);

impl TimeFs {
    pub const ZERO: TimeFs = TimeFs(0);

    pub const fn from_ps(ps: u64) -> TimeFs {
        TimeFs(ps * 1_000)
    }

    pub const fn fs(self) -> u64 {
        self.0
    }

    pub fn saturating_sub(self, rhs: TimeFs) -> TimeFs {
        TimeFs(self.0.saturating_sub(rhs.0))
    }
}

impl fmt::Display for TimeFs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fs", self.0)
    }
}

impl Add<u64> for TimeFs {
    type Output = TimeFs;

    fn add(self, rhs: u64) -> TimeFs {
        TimeFs(self.0 + rhs)
    }
}

impl Add for TimeFs {
    type Output = TimeFs;

    fn add(self, rhs: TimeFs) -> TimeFs {
        TimeFs(self.0 + rhs.0)
    }
}

impl AddAssign<u64> for TimeFs {
    fn add_assign(&mut self, rhs: u64) {
        self.0 += rhs;
    }
}

impl Sub for TimeFs {
    type Output = TimeFs;

    fn sub(self, rhs: TimeFs) -> TimeFs {
        TimeFs(self.0 - rhs.0)
    }
}
