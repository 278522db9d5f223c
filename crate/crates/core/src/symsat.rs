//! Symmetric-top circuits and the satisfiability pipeline.
//!
//! A `SymPlusCircuit` is a layer of AND gates (monomials, with multiplicity)
//! under a single symmetric function of the satisfied-gate count. The
//! pipeline converts a circuit over AND/OR/NOT/MOD_q/GK into one such
//! circuit per random tape, evaluates the whole cube with a subset-sum
//! transform, and decides satisfiability by splitting on a prefix of the
//! variables and majority-voting the evaluations.

use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{Cell, Circuit, GateKind, Operand, Restriction, TruthTable};
use crate::depthred::VvParams;
use crate::error::{Caps, Error, Result};
use crate::field::{is_prime, PrimeField};
use crate::poly::Monomial;
use crate::rng::CounterRng;

/// Depth-2 circuit: AND monomials feeding one symmetric top function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymPlusCircuit {
    nvars: u32,
    /// Monomials with multiplicity.
    and_gates: Vec<(Monomial, u32)>,
    /// One bit per possible satisfied-AND count, 0..=total.
    sym: Vec<bool>,
}

impl SymPlusCircuit {
    pub fn new(
        nvars: u32,
        and_gates: Vec<(Monomial, u32)>,
        sym: Vec<bool>,
    ) -> Result<SymPlusCircuit> {
        let total: u64 = and_gates.iter().map(|(_, m)| *m as u64).sum();
        if sym.len() as u64 != total + 1 {
            return Err(Error::Input(format!(
                "symmetric table has {} entries for {total} gates",
                sym.len()
            )));
        }
        for (m, _) in &and_gates {
            if nvars < 64 && m.mask() >> nvars != 0 {
                return Err(Error::Input(
                    "monomial reads a variable out of range".into(),
                ));
            }
        }
        Ok(SymPlusCircuit {
            nvars,
            and_gates,
            sym,
        })
    }

    pub fn nvars(&self) -> u32 {
        self.nvars
    }

    pub fn and_gates(&self) -> &[(Monomial, u32)] {
        &self.and_gates
    }

    pub fn total_gates(&self) -> u64 {
        self.and_gates.iter().map(|(_, m)| *m as u64).sum()
    }

    pub fn sym(&self) -> &[bool] {
        &self.sym
    }

    /// Satisfied-gate count at one point.
    pub fn count_at(&self, x: u64) -> u64 {
        self.and_gates
            .iter()
            .filter(|(m, _)| m.satisfied_by(x))
            .map(|(_, mult)| *mult as u64)
            .sum()
    }

    pub fn eval_point(&self, x: u64) -> bool {
        self.sym[self.count_at(x) as usize]
    }

    /// Whole-cube evaluation via the subset-lattice zeta transform:
    /// `counts[x] = sum of multiplicities of monomials contained in x`, in
    /// `O(2^n n)` word operations, then the symmetric table pointwise.
    pub fn eval_all(&self, caps: &Caps) -> Result<TruthTable> {
        caps.check_tt_vars(self.nvars, "symmetric evaluation")?;
        let counts = self.counts_all()?;
        let mut out = TruthTable::new_false(self.nvars);
        for (x, &c) in counts.iter().enumerate() {
            if self.sym[c as usize] {
                out.set(x as u64, true);
            }
        }
        Ok(out)
    }

    /// The satisfied-count vector for every point.
    pub fn counts_all(&self) -> Result<Vec<u32>> {
        let size = 1usize << self.nvars;
        let mut counts = vec![0u32; size];
        for (m, mult) in &self.and_gates {
            counts[m.mask() as usize] += mult;
        }
        for i in 0..self.nvars {
            let bit = 1usize << i;
            for x in 0..size {
                if x & bit != 0 {
                    counts[x] += counts[x ^ bit];
                }
            }
        }
        Ok(counts)
    }

    /// Reference evaluation: per-point counting, no transform.
    pub fn eval_all_naive(&self, caps: &Caps) -> Result<TruthTable> {
        caps.check_tt_vars(self.nvars, "symmetric evaluation")?;
        Ok(TruthTable::from_fn(self.nvars, |x| self.eval_point(x)))
    }
}

/// The `count != 0 mod q` symmetric table over `total` gates.
pub fn mod_sym_table(total: u64, q: u64) -> Vec<bool> {
    (0..=total).map(|c| c % q != 0).collect()
}

/// Outcome of one randomized conversion to a symmetric-top circuit.
#[derive(Debug)]
pub struct CollapseOutcome {
    pub symplus: SymPlusCircuit,
    /// Per-point error bound of this conversion (over the tape).
    pub point_error: f64,
    /// Error budget assigned to each generalized gate.
    pub per_gate_eps: f64,
    /// Generalized gates replaced.
    pub gk_gates: usize,
    /// Random bits consumed from the shared tape.
    pub tape_bits: u32,
}

/// Per-gate bound evaluators for one drawn tape.
enum LocalEval {
    Not,
    ModQ,
    And,
    Or,
    /// Gate-cube tables of the ball interpolation and the drawn threshold
    /// values, plus the outside constant.
    Gk {
        pvals: Vec<u64>,
        qvals: Vec<u8>,
        c: u64,
    },
}

struct BoundCircuit<'a> {
    circuit: &'a Circuit,
    q: u64,
    evals: Vec<LocalEval>,
}

impl BoundCircuit<'_> {
    /// Evaluate one point of the bound randomized circuit (all per-gate
    /// samples fixed by the tape).
    fn eval_point(&self, x: u64) -> Result<bool> {
        let field = PrimeField::new(self.q)?;
        let mut vals = vec![0u64; self.circuit.nodes().len()];
        for (i, node) in self.circuit.nodes().iter().enumerate() {
            let bit = |op: Operand| -> u64 {
                match op {
                    Operand::Input(v) => x >> (v - 1) & 1,
                    Operand::Const(b) => b as u64,
                    Operand::Gate(g) => vals[g as usize],
                }
            };
            vals[i] = match &self.evals[i] {
                LocalEval::Not => 1 - bit(node.inputs[0]),
                LocalEval::ModQ => {
                    let mut s = 0u64;
                    for &op in &node.inputs {
                        s = field.add(s, bit(op));
                    }
                    field.fermat(s)
                }
                LocalEval::And => node.inputs.iter().map(|&op| bit(op)).product(),
                LocalEval::Or => 1 - node.inputs.iter().map(|&op| 1 - bit(op)).product::<u64>(),
                LocalEval::Gk { pvals, qvals, c } => {
                    let mut idx = 0usize;
                    for (j, &op) in node.inputs.iter().enumerate() {
                        idx |= (bit(op) as usize & 1) << j;
                    }
                    let body =
                        field.add(field.mul(pvals[idx], field.sub(1, qvals[idx] as u64)), *c);
                    field.fermat(body)
                }
            };
        }
        Ok(vals[self.circuit.outputs()[0] as usize] == 1)
    }
}

fn bind_gates<'a>(
    c: &'a Circuit,
    q: u64,
    per_gate_eps: f64,
    seed: u64,
    caps: &Caps,
) -> Result<(BoundCircuit<'a>, usize, u32)> {
    let field = PrimeField::new(q)?;
    // One shared tape: every generalized gate reads the same prefix of
    // random bits, so gates of equal shape share their randomness exactly.
    let tape_rng = CounterRng::new(seed);
    let mut tape: Vec<bool> = Vec::new();
    let ensure_tape = |tape: &mut Vec<bool>, len: usize| {
        let mut rng = tape_rng.clone();
        rng = rng.split(0);
        while tape.len() < len {
            let i = tape.len();
            let mut r = rng.split(i as u64);
            tape.push(r.next_bool());
        }
    };
    let mut gk_count = 0usize;
    let mut evals = Vec::with_capacity(c.nodes().len());
    for node in c.nodes() {
        let fanin = node.inputs.len() as u32;
        let ev = match &node.kind {
            GateKind::Not => LocalEval::Not,
            GateKind::Mod { m } => {
                if *m as u64 != q {
                    return Err(Error::Unsupported(format!(
                        "MOD_{m} gate in a collapse over F_{q}"
                    )));
                }
                LocalEval::ModQ
            }
            GateKind::And => LocalEval::And,
            GateKind::Or => LocalEval::Or,
            GateKind::Gk {
                k,
                default,
                ball_table,
            } => {
                gk_count += 1;
                if fanin > 20 {
                    return Err(Error::Resource(format!(
                        "generalized gate fan-in {fanin} too large to collapse"
                    )));
                }
                let params = VvParams::new(fanin, *k, q, per_gate_eps, caps)?;
                ensure_tape(&mut tape, params.rand_bits() as usize);
                let det = params.detector_outputs_cube(&tape[..params.rand_bits() as usize])?;
                let qvals: Vec<u8> = det.iter().map(|&d| 1 - d as u8).collect();
                let cbit = *default as u64;
                let truth: Vec<u64> = ball_table
                    .iter()
                    .map(|&b| field.sub(b as u64, cbit))
                    .collect();
                let p = crate::poly::interpolate_ball(
                    &truth,
                    fanin,
                    (*k).min(fanin),
                    q,
                    caps.max_ball_entries,
                )?;
                LocalEval::Gk {
                    pvals: p.values_on_cube()?,
                    qvals,
                    c: cbit,
                }
            }
            other => {
                return Err(Error::Unsupported(format!(
                    "{} gate outside the collapse fragment",
                    other.name()
                )))
            }
        };
        evals.push(ev);
    }
    let bits = tape.len() as u32;
    Ok((
        BoundCircuit {
            circuit: c,
            q,
            evals,
        },
        gk_count,
        bits,
    ))
}

/// Replace every generalized gate by a drawn instance of its randomness-
/// efficient depth-2 approximation (all gates sharing one tape), fold the
/// exact gates algebraically, and read the result off as a symmetric-top
/// circuit over the original inputs.
///
/// For each point, the produced circuit equals the input circuit unless some
/// generalized gate's draw erred locally, so with per-gate budget
/// `point_budget / #gk-gates` the per-point error is at most `point_budget`.
/// AND/OR/NOT/MOD_q are handled exactly and consume neither randomness nor
/// error budget; in particular a circuit that is already a MOD_q of ANDs
/// converts exactly with no randomness.
pub fn collapse_to_symplus(
    c: &Circuit,
    q: u64,
    seed: u64,
    point_budget: f64,
    caps: &Caps,
) -> Result<CollapseOutcome> {
    if c.outputs().len() != 1 {
        return Err(Error::Input("collapse expects a single output".into()));
    }
    if !is_prime(q) {
        return Err(Error::Unsupported(format!("modulus {q} is not prime")));
    }
    if q > 251 {
        // Value tables and Moebius coefficients live in bytes.
        return Err(Error::Unsupported(format!(
            "modulus {q} too large for the collapse"
        )));
    }
    if !(0.0..1.0).contains(&point_budget) || point_budget == 0.0 {
        return Err(Error::Input(format!(
            "point budget {point_budget} outside (0,1)"
        )));
    }
    caps.check_tt_vars(c.ninputs(), "collapse")?;
    let gk_total = c
        .nodes()
        .iter()
        .filter(|n| matches!(n.kind, GateKind::Gk { .. }))
        .count()
        .max(1);
    let per_gate_eps = point_budget / gk_total as f64;
    let (bound, gk_gates, tape_bits) = bind_gates(c, q, per_gate_eps, seed, caps)?;

    // Values of the bound circuit on the cube, gate by gate over blocks.
    let n = c.ninputs();
    let size = 1usize << n;
    let field = PrimeField::new(q)?;
    let mut values = vec![0u8; size];
    let block = 1usize << 14;
    let mut node_vals: Vec<Vec<u8>> = vec![Vec::new(); c.nodes().len()];
    let out_node = c.outputs()[0] as usize;
    for start in (0..size).step_by(block) {
        let len = block.min(size - start);
        for (i, node) in c.nodes().iter().enumerate() {
            let mut v = vec![0u8; len];
            for (off, slot) in v.iter_mut().enumerate() {
                let x = (start + off) as u64;
                let bit = |op: Operand| -> u64 {
                    match op {
                        Operand::Input(vi) => x >> (vi - 1) & 1,
                        Operand::Const(b) => b as u64,
                        Operand::Gate(g) => node_vals[g as usize][off] as u64,
                    }
                };
                *slot = match &bound.evals[i] {
                    LocalEval::Not => (1 - bit(node.inputs[0])) as u8,
                    LocalEval::ModQ => {
                        let mut s = 0u64;
                        for &op in &node.inputs {
                            s = field.add(s, bit(op));
                        }
                        field.fermat(s) as u8
                    }
                    LocalEval::And => node.inputs.iter().all(|&op| bit(op) == 1) as u8,
                    LocalEval::Or => node.inputs.iter().any(|&op| bit(op) == 1) as u8,
                    LocalEval::Gk { pvals, qvals, c } => {
                        let mut idx = 0usize;
                        for (j, &op) in node.inputs.iter().enumerate() {
                            idx |= (bit(op) as usize & 1) << j;
                        }
                        let body =
                            field.add(field.mul(pvals[idx], field.sub(1, qvals[idx] as u64)), *c);
                        field.fermat(body) as u8
                    }
                };
            }
            node_vals[i] = v;
        }
        values[start..start + len].copy_from_slice(&node_vals[out_node]);
    }

    // Moebius inversion over F_q turns the 0/1 value vector into the
    // multilinear monomials of the composed polynomial; coefficients become
    // AND-gate multiplicities.
    let mut coeffs: Vec<u8> = values;
    for i in 0..n {
        let bit = 1usize << i;
        for x in 0..size {
            if x & bit != 0 {
                coeffs[x] = field.sub(coeffs[x] as u64, coeffs[x ^ bit] as u64) as u8;
            }
        }
    }
    let mut and_gates: Vec<(Monomial, u32)> = Vec::new();
    for (mask, &cf) in coeffs.iter().enumerate() {
        if cf != 0 {
            and_gates.push((Monomial::from_mask(mask as u64), cf as u32));
        }
    }
    let total: u64 = and_gates.iter().map(|(_, m)| *m as u64).sum();
    let symplus = SymPlusCircuit::new(n, and_gates, mod_sym_table(total, q))?;
    Ok(CollapseOutcome {
        symplus,
        point_error: per_gate_eps * gk_gates as f64,
        per_gate_eps,
        gk_gates,
        tape_bits,
    })
}

/// One point of the bound randomized circuit, recomputed without the
/// transform machinery (an independent check of the collapse).
pub fn collapse_reference_point(
    c: &Circuit,
    q: u64,
    seed: u64,
    point_budget: f64,
    caps: &Caps,
    x: u64,
) -> Result<bool> {
    let gk_total = c
        .nodes()
        .iter()
        .filter(|n| matches!(n.kind, GateKind::Gk { .. }))
        .count()
        .max(1);
    let per_gate_eps = point_budget / gk_total as f64;
    let (bound, _, _) = bind_gates(c, q, per_gate_eps, seed, caps)?;
    bound.eval_point(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown,
}

/// Satisfiability report. A SAT verdict always carries a witness verified
/// against the original circuit by direct evaluation; UNSAT is probabilistic
/// with the stated residual bound.
#[derive(Debug, Clone, Serialize)]
pub struct SatReport {
    pub verdict: Verdict,
    /// Witness bits, x1 first.
    pub witness: Option<String>,
    pub repeats: u32,
    pub residual_bound: f64,
    pub elapsed_ms: f64,
    pub points_voted: u64,
    pub modulus: u64,
    pub ell: u32,
    pub point_budget: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SatOptions {
    /// Per-point error budget of each randomized conversion.
    pub point_budget: f64,
    /// Largest acceptable residual bound before the verdict degrades to
    /// UNKNOWN.
    pub max_residual: f64,
    /// Modulus override; inferred from the circuit's MOD gates when absent.
    pub modulus: Option<u64>,
}

impl Default for SatOptions {
    fn default() -> Self {
        SatOptions {
            point_budget: 0.05,
            max_residual: 1e-3,
            modulus: None,
        }
    }
}

fn witness_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Exact binomial upper tail `P[Bin(n, p) >= k]`.
pub fn binomial_tail(n: u32, p: f64, k: u32) -> f64 {
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return 1.0;
    }
    let mut acc = 0.0f64;
    for i in k..=n {
        let mut logterm = 0.0f64;
        for j in 0..i {
            logterm += ((n - j) as f64).ln() - ((j + 1) as f64).ln();
        }
        logterm += i as f64 * p.ln() + (n - i) as f64 * (1.0 - p).ln();
        acc += logterm.exp();
    }
    acc.min(1.0)
}

fn infer_modulus(c: &Circuit, opts: &SatOptions) -> Result<u64> {
    let mut found: Option<u64> = None;
    for node in c.nodes() {
        if let GateKind::Mod { m } = node.kind {
            match found {
                None => found = Some(m as u64),
                Some(q) if q != m as u64 => {
                    return Err(Error::Unsupported(format!(
                        "mixed moduli {q} and {m}; the pipeline handles one prime"
                    )))
                }
                _ => {}
            }
        }
    }
    let q = opts.modulus.or(found).unwrap_or(3);
    if !is_prime(q) {
        return Err(Error::Unsupported(format!(
            "modulus {q} is composite; the pipeline handles one prime"
        )));
    }
    Ok(q)
}

/// Satisfiability by splitting: build the OR of `2^ell` prefix-restricted
/// copies, convert per tape, majority-vote the cube evaluations, decode any
/// positive point back through the branches, and verify the witness against
/// the original circuit. The OR of the copies folds exactly (it consumes no
/// randomness), so only generalized gates contribute error.
pub fn gc_sat(
    c: &Circuit,
    ell: u32,
    repeats: u32,
    seed: u64,
    opts: &SatOptions,
    caps: &Caps,
) -> Result<SatReport> {
    let start = std::time::Instant::now();
    if c.outputs().len() != 1 {
        return Err(Error::Input(
            "satisfiability expects a single output".into(),
        ));
    }
    let n = c.ninputs();
    if ell >= n {
        return Err(Error::Input(format!("ell = {ell} must be below n = {n}")));
    }
    if repeats == 0 {
        return Err(Error::Input("repeats must be positive".into()));
    }
    let nfree = n - ell;
    caps.check_tt_vars(nfree, "split evaluation")?;
    let q = infer_modulus(c, opts)?;

    // C' = OR over the prefix assignments, one restricted copy each.
    let mut merged = Circuit::new(nfree);
    let mut copy_outputs = Vec::with_capacity(1 << ell);
    for j in 0..1u64 << ell {
        let mut rho = Restriction::all_free(n);
        for b in 0..ell {
            rho.set(
                b as usize,
                if j >> b & 1 == 1 {
                    Cell::One
                } else {
                    Cell::Zero
                },
            );
        }
        let copy = c.restrict(&rho)?;
        let offset = merged.nodes().len() as u32;
        for node in copy.nodes() {
            let inputs = node
                .inputs
                .iter()
                .map(|&op| match op {
                    Operand::Gate(g) => Operand::Gate(g + offset),
                    other => other,
                })
                .collect();
            merged.push_gate(node.kind.clone(), inputs)?;
        }
        copy_outputs.push(Operand::Gate(copy.outputs()[0] + offset));
        if merged.nodes().len() > caps.max_gates {
            return Err(Error::Resource("split circuit exceeds the gate cap".into()));
        }
    }
    let top = merged.push_gate(GateKind::Or, copy_outputs)?;
    merged.set_outputs(vec![top])?;

    // Vote across repeats. Each repeat draws from its own seed split, so
    // the tables are worker-count independent and the vote aggregation is
    // order-independent.
    let root = CounterRng::new(seed);
    let size = 1usize << nfree;
    let tables: Vec<TruthTable> = (0..repeats)
        .into_par_iter()
        .map(|r| {
            let outcome = collapse_to_symplus(
                &merged,
                q,
                root.split(r as u64).next_u64(),
                opts.point_budget,
                caps,
            )?;
            outcome.symplus.eval_all(caps)
        })
        .collect::<Result<_>>()?;
    let mut votes = vec![0u32; size];
    for table in &tables {
        for (x, v) in votes.iter_mut().enumerate() {
            if table.get(x as u64) {
                *v += 1;
            }
        }
    }
    let threshold = repeats / 2 + 1;
    let voted: Vec<u64> = (0..size as u64)
        .filter(|&x| votes[x as usize] >= threshold)
        .collect();

    // Decode: re-evaluate the original circuit on every branch of every
    // voted point; only a verified witness yields SAT.
    for &y in &voted {
        for j in 0..1u64 << ell {
            let mut x = vec![false; n as usize];
            for b in 0..ell {
                x[b as usize] = j >> b & 1 == 1;
            }
            for b in 0..nfree {
                x[(ell + b) as usize] = y >> b & 1 == 1;
            }
            if c.evaluate(&x)?[0] {
                return Ok(SatReport {
                    verdict: Verdict::Sat,
                    witness: Some(witness_string(&x)),
                    repeats,
                    residual_bound: 0.0,
                    elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
                    points_voted: voted.len() as u64,
                    modulus: q,
                    ell,
                    point_budget: opts.point_budget,
                });
            }
        }
    }

    // No verified witness: probabilistic UNSAT. A true satisfying point
    // evades detection only if its majority vote failed, so the residual is
    // the union bound over evaluation points of the majority failure
    // probability at the per-point conversion error.
    let tail = binomial_tail(repeats, opts.point_budget, repeats - threshold + 1);
    let residual = (size as f64 * tail).min(1.0);
    let verdict = if residual <= opts.max_residual {
        Verdict::Unsat
    } else {
        Verdict::Unknown
    };
    Ok(SatReport {
        verdict,
        witness: None,
        repeats,
        residual_bound: residual,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        points_voted: voted.len() as u64,
        modulus: q,
        ell,
        point_budget: opts.point_budget,
    })
}

/// Exhaustive satisfiability scan; first witness in index order.
pub fn brute_force_sat(c: &Circuit, caps: &Caps) -> Result<SatReport> {
    let start = std::time::Instant::now();
    if c.outputs().len() != 1 {
        return Err(Error::Input(
            "satisfiability expects a single output".into(),
        ));
    }
    caps.check_tt_vars(c.ninputs(), "brute force scan")?;
    let n = c.ninputs();
    for x in 0..1u64 << n {
        let bits: Vec<bool> = (0..n).map(|i| x >> i & 1 == 1).collect();
        if c.evaluate(&bits)?[0] {
            return Ok(SatReport {
                verdict: Verdict::Sat,
                witness: Some(witness_string(&bits)),
                repeats: 0,
                residual_bound: 0.0,
                elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
                points_voted: 0,
                modulus: 0,
                ell: 0,
                point_budget: 0.0,
            });
        }
    }
    Ok(SatReport {
        verdict: Verdict::Unsat,
        witness: None,
        repeats: 0,
        residual_bound: 0.0,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        points_voted: 0,
        modulus: 0,
        ell: 0,
        point_budget: 0.0,
    })
}
