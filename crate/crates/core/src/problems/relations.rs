//! Relation-problem instances and verifiers.
//!
//! Weight conventions: for bit strings the weight is the number of ones; for
//! trit strings it is the sum of the trit values. Trits cross a bit-level
//! interface as two bits each (0 -> 00, 1 -> 01, 2 -> 10).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::CounterRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelationTag {
    /// Parity halving: even-parity inputs; each `|y_i| = |x_i|/2 (mod 2)`;
    /// all coordinates must succeed.
    Php,
    /// Parity bending over trits: `|y_i| = 0 (mod 2)` iff `|x_i| = 0 (mod 3)`;
    /// at least a 2/3 + 0.005 fraction must succeed.
    ParityBending3,
    /// Parity bending mod q over bits: `|y_i| = 0 (mod q)` iff `|x_i|` even;
    /// at least a 2/3 + 0.005 fraction must succeed.
    QrParityBending(u32),
    /// Single instance: output one trit congruent to the input weight mod 3.
    ThreeOutputMod3,
}

/// Inputs of one relation instance. Strings are digit strings over the
/// tag's input alphabet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelationInstance {
    pub tag: RelationTag,
    pub n: u32,
    pub m: u32,
    pub r: u32,
    pub inputs: Vec<String>,
}

/// Proposed outputs, digit strings over the tag's output alphabet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelationOutput {
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationReport {
    pub tag: RelationTag,
    pub coordinates: u32,
    pub correct: u32,
    pub success_fraction: f64,
    pub threshold_num: u32,
    pub threshold_den: u32,
    pub success: bool,
}

fn parse_digits(s: &str, radix: u8) -> Result<Vec<u8>> {
    s.chars()
        .map(|ch| {
            let d = ch
                .to_digit(10)
                .ok_or_else(|| Error::Input(format!("bad digit '{ch}'")))?;
            if d >= radix as u32 {
                return Err(Error::Input(format!("digit {d} outside radix {radix}")));
            }
            Ok(d as u8)
        })
        .collect()
}

fn weight(digits: &[u8]) -> u64 {
    digits.iter().map(|&d| d as u64).sum()
}

/// Trits packed two bits each, low bit first: 0 -> 00, 1 -> 01, 2 -> 10.
pub fn trits_to_two_bit(trits: &[u8]) -> Vec<bool> {
    let mut out = Vec::with_capacity(trits.len() * 2);
    for &t in trits {
        out.push(t & 1 == 1);
        out.push(t >> 1 & 1 == 1);
    }
    out
}

pub fn trits_from_two_bit(bits: &[bool]) -> Result<Vec<u8>> {
    if bits.len() % 2 != 0 {
        return Err(Error::Input("two-bit trit encoding has odd length".into()));
    }
    bits.chunks(2)
        .map(|pair| {
            let v = pair[0] as u8 | (pair[1] as u8) << 1;
            if v > 2 {
                return Err(Error::Input("11 is not a trit encoding".into()));
            }
            Ok(v)
        })
        .collect()
}

impl RelationInstance {
    /// Random instance respecting the tag's promise.
    pub fn random(tag: RelationTag, n: u32, m: u32, r: u32, seed: u64) -> Result<RelationInstance> {
        let mut rng = CounterRng::new(seed);
        let coords = match tag {
            RelationTag::ThreeOutputMod3 => 1,
            _ => r,
        };
        let mut inputs = Vec::with_capacity(coords as usize);
        for _ in 0..coords {
            let s: String = match tag {
                RelationTag::Php => {
                    // Even parity promise: resample the last bit.
                    let mut bits: Vec<u8> = (0..n).map(|_| rng.next_below(2) as u8).collect();
                    let parity: u64 = weight(&bits) % 2;
                    if parity == 1 {
                        let last = bits.last_mut().expect("n >= 1");
                        *last ^= 1;
                    }
                    bits.iter().map(|b| char::from(b'0' + b)).collect()
                }
                RelationTag::ParityBending3 | RelationTag::ThreeOutputMod3 => (0..n)
                    .map(|_| char::from(b'0' + rng.next_below(3) as u8))
                    .collect(),
                RelationTag::QrParityBending(_) => (0..n)
                    .map(|_| char::from(b'0' + rng.next_below(2) as u8))
                    .collect(),
            };
            inputs.push(s);
        }
        Ok(RelationInstance {
            tag,
            n,
            m,
            r,
            inputs,
        })
    }
}

/// Check one proposed output against an instance: per-coordinate predicate
/// plus the tag's fraction threshold. Promise violations are input errors.
pub fn verify_relation(inst: &RelationInstance, out: &RelationOutput) -> Result<RelationReport> {
    let coords = inst.inputs.len();
    if out.outputs.len() != coords {
        return Err(Error::Input(format!(
            "expected {coords} output strings, got {}",
            out.outputs.len()
        )));
    }
    let mut correct = 0u32;
    // Threshold as an exact fraction: numerator/denominator of the required
    // success rate. PHP and the single-output problem require everything.
    let (num, den) = match inst.tag {
        RelationTag::Php | RelationTag::ThreeOutputMod3 => (1, 1),
        RelationTag::ParityBending3 | RelationTag::QrParityBending(_) => (403, 600), // 2/3 + 0.005
    };
    for (xi, yi) in inst.inputs.iter().zip(&out.outputs) {
        let ok = match inst.tag {
            RelationTag::Php => {
                let x = parse_digits(xi, 2)?;
                let y = parse_digits(yi, 2)?;
                if x.len() != inst.n as usize || y.len() != inst.m as usize {
                    return Err(Error::Input("coordinate length mismatch".into()));
                }
                let wx = weight(&x);
                if wx % 2 != 0 {
                    return Err(Error::Input(format!(
                        "promise violated: input '{xi}' has odd parity"
                    )));
                }
                weight(&y) % 2 == (wx / 2) % 2
            }
            RelationTag::ParityBending3 => {
                let x = parse_digits(xi, 3)?;
                let y = parse_digits(yi, 2)?;
                if x.len() != inst.n as usize || y.len() != inst.n as usize {
                    return Err(Error::Input("coordinate length mismatch".into()));
                }
                if weight(&x) % 3 == 0 {
                    weight(&y) % 2 == 0
                } else {
                    weight(&y) % 2 == 1
                }
            }
            RelationTag::QrParityBending(q) => {
                let x = parse_digits(xi, 2)?;
                let y = parse_digits(yi, 2)?;
                if x.len() != inst.n as usize || y.len() != inst.n as usize {
                    return Err(Error::Input("coordinate length mismatch".into()));
                }
                if weight(&x) % 2 == 0 {
                    weight(&y) % q as u64 == 0
                } else {
                    weight(&y) % q as u64 != 0
                }
            }
            RelationTag::ThreeOutputMod3 => {
                let x = parse_digits(xi, 3)?;
                let y = parse_digits(yi, 3)?;
                if x.len() != inst.n as usize || y.len() != 1 {
                    return Err(Error::Input("coordinate length mismatch".into()));
                }
                y[0] as u64 == weight(&x) % 3
            }
        };
        if ok {
            correct += 1;
        }
    }
    // success iff correct/coords >= num/den, decided in integers.
    let success = correct as u64 * den as u64 >= num as u64 * coords as u64;
    Ok(RelationReport {
        tag: inst.tag,
        coordinates: coords as u32,
        correct,
        success_fraction: correct as f64 / coords.max(1) as f64,
        threshold_num: num,
        threshold_den: den,
        success,
    })
}
