//! Counting calculators: how many functions a single generalized gate can
//! realize versus how many small threshold circuits exist.

use serde::Serialize;

use crate::ball::binom_le;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct CountingReport {
    pub n: u32,
    pub k: u32,
    /// `binom(n, <=k)`: free ball entries of one gate.
    pub ball_entries: u128,
    /// log2 of the generalized-gate count lower bound `2^binom(n,<=k)`.
    pub log2_gate_count: u128,
    /// Least circuit size s where the gate count exceeds the threshold
    /// circuit count bound `(4s)^s (s+n+2)^s`; None if no s up to the search
    /// limit works (only when the ball is trivial).
    pub tc0_size_threshold: Option<u64>,
}

/// `log2((4s)^s (s+n+2)^s) = s (log2(4s) + log2(s+n+2))`.
fn log2_tc0_count(s: u64, n: u32) -> f64 {
    let s_f = s as f64;
    s_f * ((4.0 * s_f).log2() + (s_f + n as f64 + 2.0).log2())
}

pub fn counting_bounds(n: u32, k: u32) -> Result<CountingReport> {
    if n > 10_000 {
        return Err(Error::Input(format!("n = {n} out of range")));
    }
    let ball = binom_le(n as u64, k.min(n) as u64);
    // Find the least s with binom(n, <=k) > s (log2(4s) + log2(s+n+2)) by
    // doubling then binary search. Saturated binomials stay comparable
    // because the threshold is f64.
    let exceeds = |s: u64| (ball as f64) > log2_tc0_count(s, n);
    let threshold = if !exceeds(1) {
        None
    } else {
        let mut hi = 1u64;
        while exceeds(hi) && hi < u64::MAX / 4 {
            hi *= 2;
        }
        let mut lo = hi / 2;
        // Largest s that still exceeds, then report it: circuits of that
        // size are outnumbered by gates.
        while lo + 1 < hi {
            let mid = lo + (hi - lo) / 2;
            if exceeds(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    };
    Ok(CountingReport {
        n,
        k,
        ball_entries: ball,
        log2_gate_count: ball,
        tc0_size_threshold: threshold,
    })
}
