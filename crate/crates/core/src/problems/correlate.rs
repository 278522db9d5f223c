//! Exact correlation measurement between circuits and hard targets.

use crate::ball::binom;
use crate::circuit::{Circuit, TruthTable};
use crate::error::{Caps, Error, Result};
use crate::field::PrimeField;

pub enum CorrelationTarget<'a> {
    Maj,
    Mod(u32),
    Table(&'a TruthTable),
}

/// `Pr_x[c(x) = target(x)]` over the uniform distribution, exact by
/// whole-cube comparison.
pub fn exact_correlation(c: &Circuit, target: &CorrelationTarget, caps: &Caps) -> Result<f64> {
    let n = c.ninputs();
    if n > 24 {
        return Err(Error::Resource(format!(
            "correlation sweep on {n} variables refused"
        )));
    }
    let mine = c.truth_table(0, caps)?;
    let theirs = match target {
        CorrelationTarget::Maj => TruthTable::maj(n),
        CorrelationTarget::Mod(m) => TruthTable::mod_m(n, *m),
        CorrelationTarget::Table(t) => {
            if t.nvars() != n {
                return Err(Error::Input("target arity mismatch".into()));
            }
            (*t).clone()
        }
    };
    let mut agree = 0u64;
    for x in 0..1u64 << n {
        if mine.get(x) == theirs.get(x) {
            agree += 1;
        }
    }
    Ok(agree as f64 / (1u64 << n) as f64)
}

/// Maximum agreement of degree-one polynomials over `F_q` with a symmetric
/// target, exhaustively over all `q^(n+1)` polynomials.
///
/// For `n <= 12` the sweep enumerates polynomials directly. Above that the
/// symmetric structure is exploited: the agreement of
/// `c0 + sum c_i x_i` depends only on `c0` and the counts of each nonzero
/// coefficient value, so the sweep runs over count profiles with multinomial
/// weights. Both routes agree on the overlap (tested).
pub fn best_linear_agreement(n: u32, q: u64, target: &TruthTable) -> Result<f64> {
    if target.nvars() != n {
        return Err(Error::Input("target arity mismatch".into()));
    }
    let symmetric = (0..=n).all(|w| {
        let vals: Vec<bool> = (0..1u64 << n)
            .filter(|x| x.count_ones() == w)
            .map(|x| target.get(x))
            .collect();
        vals.windows(2).all(|p| p[0] == p[1])
    });
    if symmetric && n > 7 {
        return best_linear_symmetric(n, q, target);
    }
    if n > 12 {
        return Err(Error::Resource(
            "exhaustive linear sweep above 12 variables needs a symmetric target".into(),
        ));
    }
    best_linear_naive(n, q, target)
}

fn best_linear_naive(n: u32, q: u64, target: &TruthTable) -> Result<f64> {
    let field = PrimeField::new(q)?;
    let size = 1usize << n;
    // Odometer over (c0, c1..cn) with incremental value maintenance.
    let mut coeffs = vec![0u64; n as usize + 1];
    let mut values = vec![0u64; size];
    let mut agree: u64 = (0..size).filter(|&x| !target.get(x as u64)).count() as u64;
    let mut best = agree;
    loop {
        let mut j = 0usize;
        loop {
            if j > n as usize {
                return Ok(best as f64 / size as f64);
            }
            coeffs[j] = (coeffs[j] + 1) % q;
            // Bump coefficient j: constant affects all points, variable j
            // affects points with that bit set.
            for x in 0..size {
                if j > 0 && x >> (j - 1) & 1 == 0 {
                    continue;
                }
                let want = target.get(x as u64) as u64;
                let old_ok = values[x] == want;
                values[x] = field.add(values[x], 1);
                let new_ok = values[x] == want;
                if old_ok && !new_ok {
                    agree -= 1;
                } else if !old_ok && new_ok {
                    agree += 1;
                }
            }
            if coeffs[j] != 0 {
                break;
            }
            j += 1;
        }
        best = best.max(agree);
    }
}

fn best_linear_symmetric(n: u32, q: u64, target: &TruthTable) -> Result<f64> {
    let field = PrimeField::new(q)?;
    // Target value per weight.
    let by_weight: Vec<bool> = (0..=n)
        .map(|w| {
            let x = (1u64 << w) - 1;
            target.get(x)
        })
        .collect();
    let size = (1u128 << n) as f64;
    let mut best = 0f64;
    // Counts n_v of coefficients equal to v, for v = 1..q-1; rest zero.
    // Agreement depends only on (c0, n_1, ..., n_{q-1}).
    let mut counts = vec![0u32; q as usize];
    fn rec(
        v: usize,
        left: u32,
        counts: &mut Vec<u32>,
        q: u64,
        n: u32,
        field: &PrimeField,
        by_weight: &[bool],
        best: &mut f64,
        size: f64,
    ) {
        if v == q as usize {
            if left > 0 {
                return;
            }
            for c0 in 0..q {
                let agree = symmetric_agreement(c0, counts, q, n, field, by_weight);
                let frac = agree as f64 / size;
                if frac > *best {
                    *best = frac;
                }
            }
            return;
        }
        if v == q as usize - 1 {
            counts[v] = left;
            rec(v + 1, 0, counts, q, n, field, by_weight, best, size);
            counts[v] = 0;
            return;
        }
        for c in 0..=left {
            counts[v] = c;
            rec(v + 1, left - c, counts, q, n, field, by_weight, best, size);
        }
        counts[v] = 0;
    }
    // counts[0] is the number of zero coefficients; iterate splits of n over
    // values 0..q-1 (slot q-1 absorbs the remainder).
    rec(0, n, &mut counts, q, n, &field, &by_weight, &mut best, size);
    Ok(best)
}

/// Number of agreeing points for the symmetric profile: choose a_v ones
/// among the coefficients of value v; the polynomial value is
/// `c0 + sum v a_v`, the target value depends on the total weight.
fn symmetric_agreement(
    c0: u64,
    counts: &[u32],
    q: u64,
    _n: u32,
    field: &PrimeField,
    by_weight: &[bool],
) -> u128 {
    // Distribution over (poly value, weight) built per coefficient class.
    // dp[(value, weight)] = number of assignments.
    let mut dp: Vec<Vec<u128>> = vec![vec![0; by_weight.len()]; q as usize];
    dp[c0 as usize][0] = 1;
    for (v, &cnt) in counts.iter().enumerate() {
        if cnt == 0 {
            continue;
        }
        let mut next: Vec<Vec<u128>> = vec![vec![0; by_weight.len()]; q as usize];
        for val in 0..q as usize {
            for w in 0..by_weight.len() {
                let ways = dp[val][w];
                if ways == 0 {
                    continue;
                }
                for a in 0..=cnt {
                    let w2 = w + a as usize;
                    if w2 >= by_weight.len() {
                        break;
                    }
                    let val2 = field.add(val as u64, v as u64 * a as u64 % q) as usize;
                    next[val2][w2] += ways * binom(cnt as u64, a as u64);
                }
            }
        }
        dp = next;
    }
    let mut agree: u128 = 0;
    for val in 0..q as usize {
        for (w, &t) in by_weight.iter().enumerate() {
            let ok = if t { val == 1 } else { val == 0 };
            if ok {
                agree += dp[val][w];
            }
        }
    }
    agree
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{GateKind, Operand};

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn self_correlation_is_one() {
        let mut c = Circuit::new(3);
        let m = c
            .push_gate(GateKind::Maj, (1..=3).map(Operand::Input).collect())
            .unwrap();
        c.set_outputs(vec![m]).unwrap();
        assert_eq!(
            exact_correlation(&c, &CorrelationTarget::Maj, &caps()).unwrap(),
            1.0
        );
    }

    #[test]
    fn constant_zero_vs_parity_is_half() {
        for n in 1..=6u32 {
            let mut c = Circuit::new(n);
            let a = c
                .push_gate(GateKind::And, vec![Operand::Const(false)])
                .unwrap();
            c.set_outputs(vec![a]).unwrap();
            let corr = exact_correlation(&c, &CorrelationTarget::Mod(2), &caps()).unwrap();
            assert_eq!(corr, 0.5, "n={n}");
        }
    }

    #[test]
    fn correlation_invariant_under_relabeling() {
        // Swap x1 and x2 in both the circuit and the target table.
        let mut c = Circuit::new(3);
        let a = c
            .push_gate(GateKind::And, vec![Operand::Input(1), Operand::Input(3)])
            .unwrap();
        c.set_outputs(vec![a]).unwrap();
        let t = TruthTable::from_fn(3, |x| x.count_ones() >= 2);
        let base = exact_correlation(&c, &CorrelationTarget::Table(&t), &caps()).unwrap();

        let mut c2 = Circuit::new(3);
        let a2 = c2
            .push_gate(GateKind::And, vec![Operand::Input(2), Operand::Input(3)])
            .unwrap();
        c2.set_outputs(vec![a2]).unwrap();
        let t2 = TruthTable::from_fn(3, |x| {
            let swapped = (x & !3) | (x & 1) << 1 | (x >> 1 & 1);
            t.get(swapped)
        });
        let swapped = exact_correlation(&c2, &CorrelationTarget::Table(&t2), &caps()).unwrap();
        assert_eq!(base, swapped);
    }

    #[test]
    fn linear_agreement_routes_match() {
        for n in [3u32, 5, 7] {
            let maj = TruthTable::maj(n);
            let naive = best_linear_naive(n, 3, &maj).unwrap();
            let smart = best_linear_symmetric(n, 3, &maj).unwrap();
            assert!(
                (naive - smart).abs() < 1e-12,
                "n={n}: naive={naive} smart={smart}"
            );
        }
    }

    #[test]
    fn linear_agreement_against_majority_decays() {
        let mut last = 1.0f64;
        for n in [5u32, 7, 9, 11] {
            let maj = TruthTable::maj(n);
            let a = best_linear_agreement(n, 3, &maj).unwrap();
            assert!(a < 1.0, "degree-1 polynomials cannot compute majority");
            assert!(a > 0.5, "agreement stays above chance at this scale");
            assert!(a < last, "n={n}: {a} should drop below {last}");
            last = a;
        }
    }
}
