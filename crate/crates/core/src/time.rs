// SPDX-License-Identifier: Apache-2.0

//! Fixed-point time values.
//!
//! All delays, arrivals and slacks are stored as integer femtoseconds so that
//! incremental updates and from-scratch recomputation agree bit for bit.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Time(i64);

impl Time {
    pub const ZERO: Time = Time(0);
    pub const MAX: Time = Time(i64::MAX / 4);

    pub const fn from_fs(fs: i64) -> Self {
        Time(fs)
    }

    /// Rounds to the nearest femtosecond.
    pub fn from_ps(ps: f64) -> Self {
        Time((ps * 1000.0).round() as i64)
    }

    pub const fn fs(self) -> i64 {
        self.0
    }

    pub fn ps(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn abs(self) -> Self {
        Time(self.0.abs())
    }

    /// Clock frequency in GHz for a period of `self`.
    pub fn frequency_ghz(self) -> f64 {
        if self.0 <= 0 {
            0.0
        } else {
            1.0e6 / self.0 as f64
        }
    }

    /// Halves towards negative infinity.
    pub fn half_floor(self) -> Self {
        Time(self.0.div_euclid(2))
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let a = self.0.unsigned_abs();
        write!(f, "{}{}.{:03}", sign, a / 1000, a % 1000)
    }
}

impl std::str::FromStr for Time {
    type Err = String;

    /// Parses a picosecond decimal with at most three fractional digits.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() || frac.len() > 3 {
            return Err(format!("bad time literal `{s}`"));
        }
        let whole: i64 = int.parse().map_err(|_| format!("bad time literal `{s}`"))?;
        let mut frac_fs = 0i64;
        for (i, c) in frac.chars().enumerate() {
            let d = c.to_digit(10).ok_or_else(|| format!("bad time literal `{s}`"))? as i64;
            frac_fs += d * [100, 10, 1][i];
        }
        let v = whole * 1000 + frac_fs;
        Ok(Time(if neg { -v } else { v }))
    }
}

impl Add for Time {
    type Output = Time;
    fn add(self, rhs: Time) -> Time {
        Time(self.0 + rhs.0)
    }
}

impl AddAssign for Time {
    fn add_assign(&mut self, rhs: Time) {
        self.0 += rhs.0;
    }
}

impl Sub for Time {
    type Output = Time;
    fn sub(self, rhs: Time) -> Time {
        Time(self.0 - rhs.0)
    }
}

impl SubAssign for Time {
    fn sub_assign(&mut self, rhs: Time) {
        self.0 -= rhs.0;
    }
}

impl Neg for Time {
    type Output = Time;
    fn neg(self) -> Time {
        Time(-self.0)
    }
}

impl Mul<i64> for Time {
    type Output = Time;
    fn mul(self, rhs: i64) -> Time {
        Time(self.0 * rhs)
    }
}

impl Sum for Time {
    fn sum<I: Iterator<Item = Time>>(iter: I) -> Time {
        Time(iter.map(|t| t.0).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse_agree() {
        for fs in [0, 1, 999, 1000, 13_200, -2_500, 400] {
            let t = Time::from_fs(fs);
            assert_eq!(t.to_string().parse::<Time>().unwrap(), t);
        }
        assert_eq!(Time::from_fs(-2_500).to_string(), "-2.500");
    }

    #[test]
    fn ps_rounding() {
        assert_eq!(Time::from_ps(0.4).fs(), 400);
        assert_eq!(Time::from_ps(13.2).fs(), 13_200);
    }
}
