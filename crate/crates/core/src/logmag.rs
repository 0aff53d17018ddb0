use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// A positive quantity stored as its base-2 logarithm.
///
/// `a_m * b_m = 2^(q^m) / q^m` leaves the f64 range from `m = 3` on, so the
/// condition checks and interval estimates carry magnitudes in this form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogMagnitude {
    pub log2_value: f64,
}

impl LogMagnitude {
    pub const ZERO: LogMagnitude = LogMagnitude {
        log2_value: f64::NEG_INFINITY,
    };
    pub const ONE: LogMagnitude = LogMagnitude { log2_value: 0.0 };

    pub fn from_log2(log2_value: f64) -> Self {
        LogMagnitude { log2_value }
    }

    /// `None` for negative or NaN input.
    pub fn from_value(x: f64) -> Option<Self> {
        if x >= 0.0 {
            Some(LogMagnitude {
                log2_value: x.log2(),
            })
        } else {
            None
        }
    }

    pub fn value(&self) -> f64 {
        self.log2_value.exp2()
    }

    pub fn is_zero(&self) -> bool {
        self.log2_value == f64::NEG_INFINITY
    }

    pub fn mul(self, other: LogMagnitude) -> Self {
        LogMagnitude::from_log2(self.log2_value + other.log2_value)
    }

    pub fn div(self, other: LogMagnitude) -> Self {
        LogMagnitude::from_log2(self.log2_value - other.log2_value)
    }

    pub fn powf(self, p: f64) -> Self {
        if self.is_zero() {
            return self;
        }
        LogMagnitude::from_log2(self.log2_value * p)
    }

    /// Log-sum-exp addition.
    pub fn add(self, other: LogMagnitude) -> Self {
        let (hi, lo) = if self.log2_value >= other.log2_value {
            (self.log2_value, other.log2_value)
        } else {
            (other.log2_value, self.log2_value)
        };
        if lo == f64::NEG_INFINITY {
            return LogMagnitude::from_log2(hi);
        }
        LogMagnitude::from_log2(hi + (lo - hi).exp2().ln_1p() / std::f64::consts::LN_2)
    }

    pub fn sum<I: IntoIterator<Item = LogMagnitude>>(items: I) -> Self {
        items
            .into_iter()
            .fold(LogMagnitude::ZERO, |acc, x| acc.add(x))
    }
}

impl PartialOrd for LogMagnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.log2_value.partial_cmp(&other.log2_value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_is_additive_identity() {
        let x = LogMagnitude::from_log2(12.5);
        assert_eq!(x.add(LogMagnitude::ZERO), x);
        assert_eq!(LogMagnitude::ZERO.add(x), x);
        assert!(LogMagnitude::ZERO.add(LogMagnitude::ZERO).is_zero());
        assert!(LogMagnitude::from_value(-1.0).is_none());
    }

    #[test]
    fn huge_magnitudes_compare_without_overflow() {
        let a = LogMagnitude::from_log2(287_496.0);
        let b = LogMagnitude::from_log2(4356.0);
        assert!(a.add(b) >= a && a > b);
        assert_eq!(a.add(b).log2_value, a.log2_value);
        assert!(a.value().is_infinite());
    }

    proptest! {
        #[test]
        fn add_matches_direct_sum(x in 1e-6f64..1e6, y in 1e-6f64..1e6) {
            let s = LogMagnitude::from_value(x).unwrap().add(LogMagnitude::from_value(y).unwrap());
            prop_assert!((s.value() - (x + y)).abs() <= 1e-12 * (x + y));
        }

        #[test]
        fn mul_and_pow_match(x in 1e-3f64..1e3, p in 0.5f64..4.0) {
            let lx = LogMagnitude::from_value(x).unwrap();
            prop_assert!((lx.powf(p).value() - x.powf(p)).abs() <= 1e-11 * x.powf(p));
            prop_assert!((lx.mul(lx).value() - x * x).abs() <= 1e-12 * x * x);
        }
    }
}
