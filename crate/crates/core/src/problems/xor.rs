//! XOR-lemma checker for distributions over `Z_q^r`: the maximum nontrivial
//! character bias times `sqrt(q^r)` bounds the total-variation distance to
//! uniform.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct XorReport {
    pub q: u32,
    pub r: u32,
    /// `max over a != 0 of |E[chi_a(X)]|`.
    pub max_bias: f64,
    pub tv_distance: f64,
    /// `tv <= max_bias * sqrt(q^r)`.
    pub inequality_holds: bool,
    pub bound_value: f64,
}

/// Radix-q fast character transform in place: after the pass,
/// `out[a] = sum_z dist[z] omega^(<a, z>)` as (re, im) pairs.
fn character_transform(dist: &[f64], q: u32, r: u32) -> Vec<(f64, f64)> {
    let size = dist.len();
    let mut data: Vec<(f64, f64)> = dist.iter().map(|&p| (p, 0.0)).collect();
    let omegas: Vec<(f64, f64)> = (0..q)
        .map(|j| {
            let th = 2.0 * std::f64::consts::PI * j as f64 / q as f64;
            (th.cos(), th.sin())
        })
        .collect();
    let mut stride = 1usize;
    for _ in 0..r {
        let block = stride * q as usize;
        let mut scratch = vec![(0.0, 0.0); q as usize];
        for base in (0..size).step_by(block) {
            for off in 0..stride {
                for (a, slot) in scratch.iter_mut().enumerate() {
                    let mut acc = (0.0f64, 0.0f64);
                    for z in 0..q as usize {
                        let (pr, pi) = data[base + off + z * stride];
                        let (wr, wi) = omegas[a * z % q as usize];
                        acc.0 += pr * wr - pi * wi;
                        acc.1 += pr * wi + pi * wr;
                    }
                    *slot = acc;
                }
                for (a, &v) in scratch.iter().enumerate() {
                    data[base + off + a * stride] = v;
                }
            }
        }
        stride = block;
    }
    data
}

/// Check the abelian XOR lemma on an explicit distribution over `Z_q^r`
/// given as `q^r` probabilities in row-major order (coordinate 0 varies
/// fastest).
pub fn xor_lemma_check(dist: &[f64], q: u32, r: u32) -> Result<XorReport> {
    let size = (q as u128)
        .checked_pow(r)
        .ok_or_else(|| Error::Input("q^r overflows".into()))?;
    if size > 1 << 20 {
        return Err(Error::Resource(format!("q^r = {size} exceeds the cap")));
    }
    if dist.len() as u128 != size {
        return Err(Error::Input(format!(
            "distribution has {} entries, expected q^r = {size}",
            dist.len()
        )));
    }
    if dist.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::Input(
            "probabilities must be finite and nonnegative".into(),
        ));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Input(format!("distribution sums to {total}, not 1")));
    }
    let size = size as usize;
    let transformed = character_transform(dist, q, r);
    let mut max_bias = 0.0f64;
    for (a, &(re, im)) in transformed.iter().enumerate() {
        if a == 0 {
            continue;
        }
        max_bias = max_bias.max((re * re + im * im).sqrt());
    }
    let uniform = 1.0 / size as f64;
    let tv = 0.5 * dist.iter().map(|&p| (p - uniform).abs()).sum::<f64>();
    let bound = max_bias * (size as f64).sqrt();
    Ok(XorReport {
        q,
        r,
        max_bias,
        tv_distance: tv,
        inequality_holds: tv <= bound + 1e-9,
        bound_value: bound,
    })
}
