//! Canonical Hamming-ball enumeration.
//!
//! Bit strings are masks with bit `i-1` holding the value of variable `x_i`
//! (the same convention truth tables use). The canonical ball order, fixed
//! once and used by interpolation inputs, generalized-gate tables, and their
//! serialization, is: weight ascending, then lexicographic on the string
//! `x1 x2 ... xn` with `x1` most significant.

use crate::error::{Error, Result};

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i + 1) as u128,
            None => return u128::MAX,
        };
    }
    acc
}

/// `binom(n, 0) + ... + binom(n, k)`, saturating.
pub fn binom_le(n: u64, k: u64) -> u128 {
    let mut acc: u128 = 0;
    for i in 0..=k.min(n) {
        acc = acc.saturating_add(binom(n, i));
    }
    acc
}

#[inline]
fn rev_mask(mask: u64, n: u32) -> u64 {
    if n == 0 {
        0
    } else {
        mask.reverse_bits() >> (64 - n)
    }
}

/// All weight-`w` masks on `n` bits in canonical order.
fn weight_class(n: u32, w: u32) -> Vec<u64> {
    assert!(n <= 63);
    if w > n {
        return Vec::new();
    }
    if w == 0 {
        return vec![0];
    }
    // Lexicographic order on (x1..xn) = ascending numeric order of the
    // reversed mask; walk reversed masks with Gosper's hack.
    let mut out = Vec::with_capacity(binom(n as u64, w as u64) as usize);
    let mut v: u64 = (1 << w) - 1;
    let limit: u64 = 1 << n;
    while v < limit {
        out.push(rev_mask(v, n));
        let c = v & v.wrapping_neg();
        let r = v + c;
        if r >= limit || c == 0 {
            break;
        }
        v = (((r ^ v) >> 2) / c) | r;
    }
    out
}

/// All masks of weight at most `k` in canonical ball order.
pub fn ball_points(n: u32, k: u32) -> Vec<u64> {
    let mut out = Vec::new();
    for w in 0..=k.min(n) {
        out.extend(weight_class(n, w));
    }
    out
}

/// Number of points in the radius-`k` ball, checked against a cap.
pub fn ball_size_checked(n: u32, k: u32, cap: u64) -> Result<usize> {
    let size = binom_le(n as u64, k.min(n) as u64);
    if size > cap as u128 {
        return Err(Error::Resource(format!(
            "ball of radius {k} on {n} variables has {size} points, cap {cap}"
        )));
    }
    Ok(size as usize)
}

/// Index of `mask` in the canonical ball order of radius `k`.
/// `mask` must have weight at most `k`.
pub fn ball_index(n: u32, k: u32, mask: u64) -> usize {
    let w = mask.count_ones();
    debug_assert!(w <= k && n <= 63 && mask < (1u64 << n));
    let mut idx: u128 = 0;
    for w2 in 0..w {
        idx += binom(n as u64, w2 as u64);
    }
    // Rank of the reversed mask among weight-w masks in ascending numeric
    // order (colex combinadic).
    let rev = rev_mask(mask, n);
    let mut j = 1u64;
    for p in 0..n as u64 {
        if rev >> p & 1 == 1 {
            idx += binom(p, j);
            j += 1;
        }
    }
    idx as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binom(10, 2), 45);
        assert_eq!(binom_le(10, 2), 56);
        assert_eq!(binom_le(10, 10), 1024);
        assert_eq!(binom_le(4, 0), 1);
    }

    #[test]
    fn canonical_order_small() {
        // n = 2: 00, then weight-1 strings "01" < "10" on (x1,x2),
        // i.e. x2 alone before x1 alone, then 11.
        let pts = ball_points(2, 2);
        assert_eq!(pts, vec![0b00, 0b10, 0b01, 0b11]);
        // n = 3, weight 2: (011) < (101) < (110) as x1x2x3 strings,
        // i.e. {x2,x3} < {x1,x3} < {x1,x2}.
        let pts = ball_points(3, 2);
        assert_eq!(pts, vec![0b000, 0b100, 0b010, 0b001, 0b110, 0b101, 0b011]);
    }

    #[test]
    fn index_inverts_enumeration() {
        for n in 0..=10u32 {
            for k in 0..=n {
                let pts = ball_points(n, k);
                assert_eq!(pts.len() as u128, binom_le(n as u64, k as u64));
                for (i, &m) in pts.iter().enumerate() {
                    assert_eq!(ball_index(n, k, m), i, "n={n} k={k} mask={m:b}");
                }
            }
        }
    }
}
