//! The 2D hidden linear function problem: given a quadratic form
//! `q(u) = u^T A u + b^T u (mod 4)` over grid adjacency, output `z` with
//! `q(x) = 2 z^T x (mod 4)` on the linearity set `L_q`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng::CounterRng;

/// Instance file format: `{"side": g, "A": "<row-major 0/1 string>",
/// "b": "<digit string over 0..3>"}`.
#[derive(Debug, Clone)]
pub struct HlfInstance {
    /// Grid side; vertices n = side^2, row-major indexing.
    pub side: u32,
    /// Symmetric 0/1 adjacency, row-major, zero diagonal.
    pub a: Vec<u8>,
    /// Coefficients in {0,1,2,3}.
    pub b: Vec<u8>,
}

impl Serialize for HlfInstance {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let digits = |v: &[u8]| -> String { v.iter().map(|d| char::from(b'0' + d)).collect() };
        let mut s = ser.serialize_struct("HlfInstance", 3)?;
        s.serialize_field("side", &self.side)?;
        s.serialize_field("A", &digits(&self.a))?;
        s.serialize_field("b", &digits(&self.b))?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for HlfInstance {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            side: u32,
            #[serde(rename = "A")]
            a: String,
            b: String,
        }
        let raw = Raw::deserialize(de)?;
        let digits = |s: &str, radix: u8| -> std::result::Result<Vec<u8>, D::Error> {
            s.chars()
                .map(|ch| match ch.to_digit(10) {
                    Some(d) if d < radix as u32 => Ok(d as u8),
                    _ => Err(D::Error::custom(format!("bad digit '{ch}'"))),
                })
                .collect()
        };
        Ok(HlfInstance {
            side: raw.side,
            a: digits(&raw.a, 2)?,
            b: digits(&raw.b, 4)?,
        })
    }
}

impl HlfInstance {
    pub fn n(&self) -> u32 {
        self.side * self.side
    }

    /// Grid instance with the stated adjacency and given `b`.
    pub fn new(side: u32, b: Vec<u8>) -> Result<HlfInstance> {
        let n = (side * side) as usize;
        if side == 0 || n > 20 {
            return Err(Error::Input(format!("grid side {side} out of range")));
        }
        if b.len() != n || b.iter().any(|&v| v > 3) {
            return Err(Error::Input("b must hold n values in 0..=3".into()));
        }
        let mut a = vec![0u8; n * n];
        let idx = |r: u32, c: u32| (r * side + c) as usize;
        for r in 0..side {
            for c in 0..side {
                if c + 1 < side {
                    a[idx(r, c) * n + idx(r, c + 1)] = 1;
                    a[idx(r, c + 1) * n + idx(r, c)] = 1;
                }
                if r + 1 < side {
                    a[idx(r, c) * n + idx(r + 1, c)] = 1;
                    a[idx(r + 1, c) * n + idx(r, c)] = 1;
                }
            }
        }
        Ok(HlfInstance { side, a, b })
    }

    /// Random instance: grid adjacency with uniform `b`.
    pub fn random(side: u32, seed: u64) -> Result<HlfInstance> {
        let n = (side * side) as usize;
        let mut rng = CounterRng::new(seed);
        let b: Vec<u8> = (0..n).map(|_| rng.next_below(4) as u8).collect();
        HlfInstance::new(side, b)
    }

    /// Validate an externally supplied instance.
    pub fn validate(&self) -> Result<()> {
        let n = self.n() as usize;
        if self.a.len() != n * n || self.b.len() != n {
            return Err(Error::Input(
                "instance dimensions do not match the grid".into(),
            ));
        }
        for i in 0..n {
            if self.a[i * n + i] != 0 {
                return Err(Error::Input("adjacency has a nonzero diagonal".into()));
            }
            for j in 0..n {
                if self.a[i * n + j] > 1 || self.a[i * n + j] != self.a[j * n + i] {
                    return Err(Error::Input("adjacency must be symmetric 0/1".into()));
                }
            }
        }
        if self.b.iter().any(|&v| v > 3) {
            return Err(Error::Input("b entries must lie in 0..=3".into()));
        }
        Ok(())
    }

    /// `q(u) = u^T A u + b^T u (mod 4)` for `u` as a bit mask.
    pub fn q(&self, u: u64) -> u8 {
        let n = self.n() as usize;
        let mut acc: u64 = 0;
        for i in 0..n {
            if u >> i & 1 == 0 {
                continue;
            }
            acc += self.b[i] as u64;
            for j in 0..n {
                if u >> j & 1 == 1 {
                    acc += self.a[i * n + j] as u64;
                }
            }
        }
        (acc % 4) as u8
    }

    /// Membership in `L_q` by the definitional universal test.
    pub fn in_lq_definitional(&self, u: u64) -> bool {
        let n = self.n();
        (0..1u64 << n).all(|v| self.q(u ^ v) == (self.q(u) + self.q(v)) % 4)
    }

    /// Membership in `L_q` by the bilinear identity: over F_2,
    /// `q(u xor v) - q(u) - q(v) = 2 (u^T A v - sum b_i u_i v_i)`, so `u` is
    /// in `L_q` exactly when `(A u)_j = b_j u_j (mod 2)` for every `j`.
    pub fn in_lq(&self, u: u64) -> bool {
        let n = self.n() as usize;
        for j in 0..n {
            let mut au = 0u64;
            for i in 0..n {
                if u >> i & 1 == 1 {
                    au += self.a[j * n + i] as u64;
                }
            }
            let rhs = (self.b[j] as u64 & 1) * (u >> j & 1);
            if au % 2 != rhs % 2 {
                return false;
            }
        }
        true
    }

    /// Basis of `L_q` = kernel of `A + diag(b mod 2)` over F_2.
    pub fn lq_basis(&self) -> Vec<u64> {
        let n = self.n() as usize;
        // Rows of the matrix as masks.
        let mut rows: Vec<u64> = (0..n)
            .map(|j| {
                let mut r = 0u64;
                for i in 0..n {
                    if self.a[j * n + i] & 1 == 1 {
                        r ^= 1 << i;
                    }
                }
                r ^ (((self.b[j] & 1) as u64) << j)
            })
            .collect();
        // Gaussian elimination to row echelon; track pivot columns.
        let mut pivots = Vec::new();
        let mut rank = 0usize;
        for col in 0..n {
            let Some(pr) = (rank..n).find(|&r| rows[r] >> col & 1 == 1) else {
                continue;
            };
            rows.swap(rank, pr);
            for r in 0..n {
                if r != rank && rows[r] >> col & 1 == 1 {
                    rows[r] ^= rows[rank];
                }
            }
            pivots.push(col);
            rank += 1;
        }
        // Kernel basis: one vector per free column.
        let mut basis = Vec::new();
        for col in 0..n {
            if pivots.contains(&col) {
                continue;
            }
            let mut v = 1u64 << col;
            for (ri, &pc) in pivots.iter().enumerate() {
                if rows[ri] >> col & 1 == 1 {
                    v |= 1 << pc;
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Every member of `L_q`.
    pub fn lq_members(&self) -> Vec<u64> {
        let basis = self.lq_basis();
        let mut out = Vec::with_capacity(1 << basis.len());
        for combo in 0..1u64 << basis.len() {
            let mut v = 0u64;
            for (i, &b) in basis.iter().enumerate() {
                if combo >> i & 1 == 1 {
                    v ^= b;
                }
            }
            out.push(v);
        }
        out
    }
}

/// Brute-force solver: compute a basis of `L_q`, read off `z` from the
/// linear constraints `z^T v = q(v)/2 (mod 2)` on the basis (the values are
/// even on `L_q`), extending freely off `L_q`.
pub fn solve_2dhlf_bruteforce(inst: &HlfInstance) -> Result<u64> {
    inst.validate()?;
    let n = inst.n() as usize;
    if n > 20 {
        return Err(Error::Resource(format!("solver on {n} vertices refused")));
    }
    let basis = inst.lq_basis();
    // L_q is a subspace (kernel); assert closure as a sanity check on the
    // bilinear route.
    for &v in &basis {
        debug_assert!(inst.in_lq(v));
    }
    // Solve z . v_i = q(v_i)/2 over F_2.
    let mut rows: Vec<(u64, u64)> = Vec::with_capacity(basis.len());
    for &v in &basis {
        let qv = inst.q(v);
        if qv % 2 != 0 {
            return Err(Error::Internal(format!(
                "q takes odd value {qv} on a linearity-set member"
            )));
        }
        rows.push((v, (qv / 2) as u64 & 1));
    }
    // Gauss-Jordan: keep every reduced row's pivot out of all other rows,
    // so setting z's pivot bits to the right-hand sides solves the system.
    let mut reduced: Vec<(u64, u64)> = Vec::new();
    for (mut v, mut rhs) in rows {
        for &(rv, rr) in &reduced {
            if v >> rv.trailing_zeros() & 1 == 1 {
                v ^= rv;
                rhs ^= rr;
            }
        }
        if v == 0 {
            if rhs != 0 {
                return Err(Error::Internal("inconsistent linear system for z".into()));
            }
            continue;
        }
        let pivot = v.trailing_zeros();
        for (rv, rr) in reduced.iter_mut() {
            if *rv >> pivot & 1 == 1 {
                *rv ^= v;
                *rr ^= rhs;
            }
        }
        reduced.push((v, rhs));
    }
    let mut z = 0u64;
    for &(v, rhs) in &reduced {
        if rhs == 1 {
            z ^= 1 << v.trailing_zeros();
        }
    }
    for &v in &basis {
        debug_assert_eq!((z & v).count_ones() as u64 % 2, (inst.q(v) / 2) as u64 & 1);
    }
    Ok(z)
}

/// True when `q(x) = 2 z^T x (mod 4)` for every `x` in `L_q`.
pub fn verify_2dhlf(inst: &HlfInstance, z: u64) -> Result<bool> {
    inst.validate()?;
    if inst.n() > 20 {
        return Err(Error::Resource("verifier cap exceeded".into()));
    }
    Ok(inst
        .lq_members()
        .into_iter()
        .all(|x| inst.q(x) as u64 == 2 * ((z & x).count_ones() as u64 % 2) % 4))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_instance() {
        // A = 0 cannot happen on a real grid, so build b = 0 on a grid and
        // check the solver output verifies; then hand-build A = 0.
        let inst = HlfInstance {
            side: 2,
            a: vec![0; 16],
            b: vec![0; 4],
        };
        // L_q is everything, q = 0, z = 0 works.
        assert!(inst.in_lq(0b1011));
        let z = solve_2dhlf_bruteforce(&inst).unwrap();
        assert!(verify_2dhlf(&inst, z).unwrap());
        assert!(verify_2dhlf(&inst, 0).unwrap());
        // z = e1 fails: q(e1) = 0 but 2 z.e1 = 2.
        assert!(!verify_2dhlf(&inst, 1).unwrap());
    }

    #[test]
    fn linear_instance() {
        // A = 0, b even: q(u) = sum b_i u_i = 2 sum (b_i/2) u_i, so z = b/2.
        let inst = HlfInstance {
            side: 2,
            a: vec![0; 16],
            b: vec![2, 0, 2, 2],
        };
        let want_z = 0b1101u64;
        assert!(verify_2dhlf(&inst, want_z).unwrap());
        let z = solve_2dhlf_bruteforce(&inst).unwrap();
        assert!(verify_2dhlf(&inst, z).unwrap());
    }

    #[test]
    fn membership_routes_agree() {
        for seed in 0..10u64 {
            let inst = HlfInstance::random(2, seed).unwrap();
            for u in 0..16u64 {
                assert_eq!(
                    inst.in_lq(u),
                    inst.in_lq_definitional(u),
                    "seed={seed} u={u:04b}"
                );
            }
        }
    }

    #[test]
    fn solver_output_verifies_and_lq_is_closed() {
        for side in 2..=4u32 {
            for seed in 0..12u64 {
                let inst = HlfInstance::random(side, seed).unwrap();
                let z = solve_2dhlf_bruteforce(&inst).unwrap();
                assert!(verify_2dhlf(&inst, z).unwrap(), "side={side} seed={seed}");
                // Closure of L_q under xor.
                let members = inst.lq_members();
                let set: std::collections::HashSet<u64> = members.iter().copied().collect();
                for &u in members.iter().take(64) {
                    for &v in members.iter().take(64) {
                        assert!(set.contains(&(u ^ v)));
                    }
                }
                for &u in &members {
                    assert!(inst.in_lq(u));
                }
            }
        }
    }

    #[test]
    fn instance_file_format_roundtrip() {
        let inst = HlfInstance::random(2, 4).unwrap();
        let json = crate::report::to_json(&inst);
        // Row-major bit string for A, digit string for b.
        assert!(json.contains("\"A\":\""));
        assert!(json.contains("\"b\":\""));
        let back: HlfInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(back.side, inst.side);
        assert_eq!(back.a, inst.a);
        assert_eq!(back.b, inst.b);
        assert!(
            serde_json::from_str::<HlfInstance>("{\"side\":2,\"A\":\"01\",\"b\":\"9\"}").is_err()
        );
    }

    #[test]
    fn grid_adjacency_shape() {
        let inst = HlfInstance::new(3, vec![0; 9]).unwrap();
        inst.validate().unwrap();
        let n = 9usize;
        // Vertex 4 (center) has 4 neighbors.
        let deg: usize = (0..n).map(|j| inst.a[4 * n + j] as usize).sum();
        assert_eq!(deg, 4);
        // Corner has 2.
        let deg: usize = (0..n).map(|j| inst.a[j] as usize).sum();
        assert_eq!(deg, 2);
    }
}
