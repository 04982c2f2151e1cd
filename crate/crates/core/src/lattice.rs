//! Integer Fourier modes of the two-dimensional torus restricted to a Euclidean ball.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integer wave vector `(k1, k2)`. The derived ordering is lexicographic.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mode(pub i32, pub i32);

impl Mode {
    pub const ZERO: Mode = Mode(0, 0);

    pub fn norm2(self) -> i64 {
        let (a, b) = (self.0 as i64, self.1 as i64);
        a * a + b * b
    }

    pub fn norm(self) -> f64 {
        (self.norm2() as f64).sqrt()
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0 && self.1 == 0
    }

    /// Coordinate swap `(k1, k2) -> (k2, k1)`.
    pub fn swap(self) -> Mode {
        Mode(self.1, self.0)
    }
}

impl Add for Mode {
    type Output = Mode;
    fn add(self, o: Mode) -> Mode {
        Mode(self.0 + o.0, self.1 + o.1)
    }
}

impl Sub for Mode {
    type Output = Mode;
    fn sub(self, o: Mode) -> Mode {
        Mode(self.0 - o.0, self.1 - o.1)
    }
}

impl Neg for Mode {
    type Output = Mode;
    fn neg(self) -> Mode {
        Mode(-self.0, -self.1)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

/// All modes `k` with `0 < |k| <= N`, sorted lexicographically.
///
/// Since negation reverses the lexicographic order on a symmetric set, the
/// conjugate of slot `s` is `len - 1 - s`. Slots in the upper half are used as
/// representatives of conjugate pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeLattice {
    cutoff_n: u32,
    modes: Vec<Mode>,
    norms: Vec<f64>,
    grid: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl ModeLattice {
    pub fn new(cutoff_n: u32) -> Result<Self> {
        if cutoff_n == 0 {
            return Err(Error::ZeroCutoff(cutoff_n));
        }
        let n = cutoff_n as i32;
        let n2 = (n as i64) * (n as i64);
        let side = (2 * n + 1) as usize;
        let mut modes = Vec::new();
        for k1 in -n..=n {
            for k2 in -n..=n {
                let k = Mode(k1, k2);
                if !k.is_zero() && k.norm2() <= n2 {
                    modes.push(k);
                }
            }
        }
        let mut grid = vec![ABSENT; side * side];
        for (s, k) in modes.iter().enumerate() {
            grid[((k.0 + n) as usize) * side + (k.1 + n) as usize] = s as u32;
        }
        let norms = modes.iter().map(|k| k.norm()).collect();
        Ok(Self { cutoff_n, modes, norms, grid })
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff_n
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode(&self, slot: usize) -> Mode {
        self.modes[slot]
    }

    /// `|k|` for the mode in `slot`.
    pub fn norm(&self, slot: usize) -> f64 {
        self.norms[slot]
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// Slot of `k`, or `None` if `k` is zero or outside the ball.
    pub fn slot(&self, k: Mode) -> Option<usize> {
        let n = self.cutoff_n as i32;
        if k.0.abs() > n || k.1.abs() > n {
            return None;
        }
        let side = (2 * n + 1) as usize;
        match self.grid[((k.0 + n) as usize) * side + (k.1 + n) as usize] {
            ABSENT => None,
            s => Some(s as usize),
        }
    }

    pub fn contains(&self, k: Mode) -> bool {
        self.slot(k).is_some()
    }

    /// Slot of `-k` given the slot of `k`.
    pub fn conj_index(&self, slot: usize) -> usize {
        self.modes.len() - 1 - slot
    }

    /// One slot per conjugate pair (the lexicographically positive member).
    pub fn representatives(&self) -> std::ops::Range<usize> {
        self.modes.len() / 2..self.modes.len()
    }
}
