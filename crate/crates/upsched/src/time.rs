//! Simulation clock: integer nanosecond ticks.
//!
//! Every duration in the simulator is derived from `bits / bandwidth` through
//! [`div_round_half_up`]; the analytic formulas (`t_min`, slack initialization)
//! use the same rounding, so simulated and computed times agree exactly.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, AddAssign, Sub};

/// A point in simulated time, in nanosecond ticks from simulation start.
#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    /// Sentinel for "run until drained".
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub fn from_nanos(ns: u64) -> SimTime {
        SimTime(ns)
    }
    pub fn from_micros(us: u64) -> SimTime {
        SimTime(us * 1_000)
    }
    pub fn from_millis(ms: u64) -> SimTime {
        SimTime(ms * 1_000_000)
    }
    pub fn from_secs(s: u64) -> SimTime {
        SimTime(s * 1_000_000_000)
    }
    pub fn as_nanos(self) -> u64 {
        self.0
    }
    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1e9
    }
    /// Signed view, for slack arithmetic that may go negative.
    pub fn as_i64(self) -> i64 {
        self.0 as i64
    }
    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }
    pub fn checked_sub(self, rhs: SimTime) -> Option<SimTime> {
        self.0.checked_sub(rhs.0).map(SimTime)
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        self.0 += rhs.0;
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.checked_sub(rhs.0).expect("SimTime underflow"))
    }
}

impl fmt::Debug for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ns", self.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `numer / denom` rounded half up. The one rounding rule used everywhere.
pub fn div_round_half_up(numer: u128, denom: u128) -> u128 {
    debug_assert!(denom > 0);
    (numer + denom / 2) / denom
}

/// Transmission time of `size_bits` over a link of `bits_per_sec`, in ticks.
pub fn tx_time_ns(size_bits: u64, bits_per_sec: u64) -> SimTime {
    let ns = div_round_half_up(size_bits as u128 * 1_000_000_000, bits_per_sec as u128);
    SimTime(u64::try_from(ns).expect("transmission time overflows u64 ns"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_half_up() {
        // 1 bit at 1 Gbps is exactly 1 ns.
        assert_eq!(tx_time_ns(1, 1_000_000_000), SimTime(1));
        // 3 bits at 2 Gbps = 1.5 ns, rounds up to 2.
        assert_eq!(tx_time_ns(3, 2_000_000_000), SimTime(2));
        // 1 bit at 3 Gbps = 0.333 ns, rounds down to 0.
        assert_eq!(tx_time_ns(1, 3_000_000_000), SimTime(0));
        // 1500 B at 1 Gbps = 12 us exactly.
        assert_eq!(tx_time_ns(12_000, 1_000_000_000), SimTime(12_000));
        // 1500 B at 10 Gbps = 1.2 us exactly.
        assert_eq!(tx_time_ns(12_000, 10_000_000_000), SimTime(1_200));
    }

    #[test]
    fn simtime_arithmetic() {
        let a = SimTime::from_micros(3);
        let b = SimTime::from_nanos(500);
        assert_eq!(a + b, SimTime(3_500));
        assert_eq!((a + b) - b, a);
        assert_eq!(SimTime::from_millis(1).as_nanos(), 1_000_000);
        assert_eq!(SimTime::from_secs(2).as_secs_f64(), 2.0);
        assert_eq!(b.saturating_sub(a), SimTime::ZERO);
    }
}
