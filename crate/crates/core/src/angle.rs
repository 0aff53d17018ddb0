//! Exact rational angles.
//!
//! Every series evaluation goes through [`RationalAngle`]: the point
//! `x = 2*pi*j/N` is kept as the integer pair `(j, N)` so that `b * x mod 2*pi`
//! can be reduced in integer arithmetic even when `b = 2^(q^k)` has
//! hundreds of thousands of bits.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Default snapping grid, `2^20 * 3^2 * 5 * 7`.
pub const DEFAULT_GRID: u64 = (1 << 20) * 9 * 5 * 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalAngle {
    j: u64,
    n: u64,
}

impl RationalAngle {
    /// `2*pi*j/n`, with `j` taken modulo `n`.
    pub fn new(j: u64, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "grid denominator must be >= 1"));
        }
        Ok(RationalAngle { j: j % n, n })
    }

    pub fn zero() -> Self {
        RationalAngle { j: 0, n: 1 }
    }

    /// Snap a real angle to the grid `j/n` and report the snap distance in radians.
    pub fn snap(x: f64, n: u64) -> Result<(Self, f64)> {
        if n == 0 {
            return Err(Error::param("n", "grid denominator must be >= 1"));
        }
        if !x.is_finite() {
            return Err(Error::param("x", "angle must be finite"));
        }
        let turns = (x / TAU).rem_euclid(1.0);
        let scaled = turns * n as f64;
        let j = (scaled.round() as u64) % n;
        let angle = RationalAngle { j, n };
        let mut dist = (turns - j as f64 / n as f64).abs();
        dist = dist.min(1.0 - dist);
        Ok((angle, dist * TAU))
    }

    pub fn numerator(&self) -> u64 {
        self.j
    }

    pub fn denominator(&self) -> u64 {
        self.n
    }

    pub fn radians(&self) -> f64 {
        TAU * self.j as f64 / self.n as f64
    }

    /// The reflected angle `2*pi - x`.
    pub fn reflected(&self) -> Self {
        RationalAngle {
            j: (self.n - self.j) % self.n,
            n: self.n,
        }
    }

    /// Numerator of `2^exponent * x` reduced modulo the grid, i.e.
    /// `(2^exponent * j) mod N`.
    pub fn dyadic_multiple(&self, exponent: u64) -> u64 {
        mulmod(pow2_mod(exponent, self.n), self.j, self.n)
    }

    /// `sin` and `cos` of `2^exponent * x` computed from the exactly reduced angle.
    pub fn dyadic_sin_cos(&self, exponent: u64) -> (f64, f64) {
        sin_cos_fraction(self.dyadic_multiple(exponent), self.n)
    }
}

pub(crate) fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `2^e mod m` by square-and-multiply.
pub fn pow2_mod(mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut result = 1u64;
    let mut base = 2 % m;
    while e != 0 {
        if e & 1 == 1 {
            result = mulmod(result, base, m);
        }
        base = mulmod(base, base, m);
        e >>= 1;
    }
    result
}

/// Signed representative of `num/den` turns in `(-1/2, 1/2]`.
pub(crate) fn centered_turns(num: u64, den: u64) -> f64 {
    let r = num % den;
    if 2 * (r as u128) > den as u128 {
        -((den - r) as f64) / den as f64
    } else {
        r as f64 / den as f64
    }
}

/// `sin`/`cos` of `2*pi*num/den`, reduced symmetrically so that
/// `num` and `den - num` give exactly opposite sines.
pub fn sin_cos_fraction(num: u64, den: u64) -> (f64, f64) {
    sin_cos_turns(centered_turns(num, den))
}

/// `sin`/`cos` of `2*pi*t` for a turn count `t` of moderate size.
pub fn sin_cos_turns(t: f64) -> (f64, f64) {
    let t = t - t.round();
    (TAU * t).sin_cos()
}
