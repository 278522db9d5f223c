//! Gate and circuit model.
//!
//! Circuits are DAGs in topological order: every node's operands refer to
//! earlier nodes, to inputs `x1..xn`, or to the constants 0/1 (constants are
//! first-class operands because several constructions wire `q-1` ones into a
//! modular gate). Size and depth both exclude NOT gates.
//!
//! The generalized gate `GK(k)` computes an arbitrary table on inputs of
//! Hamming weight at most `k` (indexed in canonical ball order) and a fixed
//! default bit on heavier inputs.

use serde::{Deserialize, Serialize};

use crate::ball::{ball_index, ball_points, binom_le};
use crate::error::{Caps, Error, Result};
use crate::poly::MAX_VARS;

mod text;
pub use text::{parse_circuit, serialize_circuit};

/// Standalone description of a generalized gate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GkGate {
    pub fanin: u32,
    pub k: u32,
    pub default: bool,
    /// One bit per ball point, canonical ball order; length `binom(fanin, <=k)`.
    pub ball_table: Vec<bool>,
}

impl GkGate {
    pub fn new(fanin: u32, k: u32, default: bool, ball_table: Vec<bool>) -> Result<GkGate> {
        let want = binom_le(fanin as u64, k.min(fanin) as u64);
        if ball_table.len() as u128 != want {
            return Err(Error::Input(format!(
                "ball table length {} does not match binom({fanin}, <={k}) = {want}",
                ball_table.len()
            )));
        }
        if fanin > MAX_VARS {
            return Err(Error::Input(format!(
                "fan-in {fanin} exceeds limit {MAX_VARS}"
            )));
        }
        Ok(GkGate {
            fanin,
            k,
            default,
            ball_table,
        })
    }

    /// Evaluate on an input mask (bit `i-1` = operand `i`).
    pub fn eval_mask(&self, x: u64) -> bool {
        if x.count_ones() <= self.k {
            self.ball_table[ball_index(self.fanin, self.k.min(self.fanin), x)]
        } else {
            self.default
        }
    }

    /// Ball values as F_q elements (0/1).
    pub fn ball_values(&self) -> Vec<u64> {
        self.ball_table.iter().map(|&b| b as u64).collect()
    }

    /// Wrap the gate as a single-node circuit over its fan-in.
    pub fn as_circuit(&self) -> Circuit {
        let mut c = Circuit::new(self.fanin);
        let g = c
            .push_gate(
                GateKind::Gk {
                    k: self.k,
                    default: self.default,
                    ball_table: self.ball_table.clone(),
                },
                (1..=self.fanin).map(Operand::Input).collect(),
            )
            .expect("inputs in range");
        c.set_outputs(vec![g]).expect("node exists");
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Operand {
    /// Input `x_i`, 1-based.
    Input(u32),
    /// Earlier gate, by node index.
    Gate(u32),
    /// Constant 0 or 1.
    Const(bool),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GateKind {
    And,
    Or,
    Not,
    Maj,
    /// Outputs 0 iff the input sum is divisible by `m`.
    Mod {
        m: u32,
    },
    /// Outputs 1 iff the input weight is greater than `k`.
    Thr {
        k: u32,
    },
    /// Arbitrary inside the radius-`k` ball, constant outside.
    Gk {
        k: u32,
        default: bool,
        ball_table: Vec<bool>,
    },
    /// Arbitrary symmetric gate: one bit per possible input count.
    Sym {
        table: Vec<bool>,
    },
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Not => "NOT",
            GateKind::Maj => "MAJ",
            GateKind::Mod { .. } => "MOD",
            GateKind::Thr { .. } => "THR",
            GateKind::Gk { .. } => "GK",
            GateKind::Sym { .. } => "SYM",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: GateKind,
    pub inputs: Vec<Operand>,
}

/// A validation finding: the node index and what is wrong with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub node: Option<u32>,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.node {
            Some(i) => write!(f, "node {}: {}", i, self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    ninputs: u32,
    nodes: Vec<Node>,
    outputs: Vec<u32>,
}

impl Circuit {
    pub fn new(ninputs: u32) -> Circuit {
        Circuit {
            ninputs,
            nodes: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn ninputs(&self) -> u32 {
        self.ninputs
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn outputs(&self) -> &[u32] {
        &self.outputs
    }

    pub fn noutputs(&self) -> usize {
        self.outputs.len()
    }

    /// Append a gate; operands must point backward. Returns the node index.
    pub fn push_gate(&mut self, kind: GateKind, inputs: Vec<Operand>) -> Result<u32> {
        let idx = self.nodes.len() as u32;
        for op in &inputs {
            match *op {
                Operand::Input(i) if i == 0 || i > self.ninputs => {
                    return Err(Error::Input(format!("operand x{i} out of range")));
                }
                Operand::Gate(g) if g >= idx => {
                    return Err(Error::Input(format!(
                        "gate {idx} refers to non-earlier node {g}"
                    )));
                }
                _ => {}
            }
        }
        self.nodes.push(Node { kind, inputs });
        Ok(idx)
    }

    pub fn set_outputs(&mut self, outputs: Vec<u32>) -> Result<()> {
        for &o in &outputs {
            if o as usize >= self.nodes.len() {
                return Err(Error::Input(format!("output {o} does not name a node")));
            }
        }
        self.outputs = outputs;
        Ok(())
    }

    /// Gate count, NOT gates excluded.
    pub fn size(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| !matches!(n.kind, GateKind::Not))
            .count()
    }

    /// Longest input-to-output path counting every gate except NOT.
    pub fn depth(&self) -> u32 {
        let mut level = vec![0u32; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            let below = node
                .inputs
                .iter()
                .map(|op| match *op {
                    Operand::Gate(g) => level[g as usize],
                    _ => 0,
                })
                .max()
                .unwrap_or(0);
            level[i] = below
                + if matches!(node.kind, GateKind::Not) {
                    0
                } else {
                    1
                };
        }
        self.outputs
            .iter()
            .map(|&o| level[o as usize])
            .max()
            .unwrap_or(0)
    }

    /// Structured well-formedness diagnostics; never aborts.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut diag = |node: Option<u32>, message: String| out.push(Diagnostic { node, message });
        for (i, node) in self.nodes.iter().enumerate() {
            let idx = i as u32;
            let fanin = node.inputs.len();
            for op in &node.inputs {
                match *op {
                    Operand::Input(v) if v == 0 || v > self.ninputs => {
                        diag(Some(idx), format!("operand x{v} out of range"));
                    }
                    Operand::Gate(g) if g >= idx => {
                        diag(
                            Some(idx),
                            format!("reference to node {g} violates ordering"),
                        );
                    }
                    _ => {}
                }
            }
            match &node.kind {
                GateKind::Not if fanin != 1 => {
                    diag(Some(idx), format!("NOT has fan-in {fanin}, must be 1"));
                }
                GateKind::Mod { m } if *m < 2 => {
                    diag(Some(idx), format!("MOD modulus {m} must be at least 2"));
                }
                GateKind::Gk { k, ball_table, .. } => {
                    let want = binom_le(fanin as u64, (*k).min(fanin as u32) as u64);
                    if ball_table.len() as u128 != want {
                        diag(
                            Some(idx),
                            format!(
                                "ball table length {} does not match binom({fanin}, <={k}) = {want}",
                                ball_table.len()
                            ),
                        );
                    }
                }
                GateKind::Sym { table } if table.len() != fanin + 1 => {
                    diag(
                        Some(idx),
                        format!(
                            "SYM table length {} must be fan-in + 1 = {}",
                            table.len(),
                            fanin + 1
                        ),
                    );
                }
                _ => {}
            }
        }
        for &o in &self.outputs {
            if o as usize >= self.nodes.len() {
                diag(None, format!("output {o} does not name a node"));
            }
        }
        if self.outputs.is_empty() {
            diag(None, "circuit has no outputs".to_string());
        }
        out
    }

    /// Evaluate all nodes at one input point; returns the per-node values.
    pub fn eval_nodes(&self, x: &[bool]) -> Result<Vec<bool>> {
        if x.len() != self.ninputs as usize {
            return Err(Error::Input(format!(
                "input has {} bits, circuit reads {}",
                x.len(),
                self.ninputs
            )));
        }
        let mut vals = vec![false; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            vals[i] = self.eval_gate(node, |op| match op {
                Operand::Input(v) => x[(v - 1) as usize],
                Operand::Gate(g) => vals[g as usize],
                Operand::Const(b) => b,
            });
        }
        Ok(vals)
    }

    fn eval_gate(&self, node: &Node, read: impl Fn(Operand) -> bool) -> bool {
        let bits = || node.inputs.iter().map(|&op| read(op));
        let count = || bits().filter(|&b| b).count() as u32;
        match &node.kind {
            GateKind::And => bits().all(|b| b),
            GateKind::Or => bits().any(|b| b),
            GateKind::Not => !read(node.inputs[0]),
            GateKind::Maj => 2 * count() >= node.inputs.len() as u32,
            GateKind::Mod { m } => count() % m != 0,
            GateKind::Thr { k } => count() > *k,
            GateKind::Gk {
                k,
                default,
                ball_table,
            } => {
                let mut mask = 0u64;
                for (j, b) in bits().enumerate() {
                    if b {
                        mask |= 1 << j;
                    }
                }
                if mask.count_ones() <= *k {
                    ball_table[ball_index(
                        node.inputs.len() as u32,
                        (*k).min(node.inputs.len() as u32),
                        mask,
                    )]
                } else {
                    *default
                }
            }
            GateKind::Sym { table } => table[count() as usize],
        }
    }

    /// Evaluate the circuit: one bit per output.
    pub fn evaluate(&self, x: &[bool]) -> Result<Vec<bool>> {
        let vals = self.eval_nodes(x)?;
        Ok(self.outputs.iter().map(|&o| vals[o as usize]).collect())
    }

    /// Evaluate at a point given as an index mask (`x_i` = bit `i-1`).
    pub fn evaluate_mask(&self, mask: u64) -> Result<Vec<bool>> {
        let x: Vec<bool> = (0..self.ninputs).map(|i| mask >> i & 1 == 1).collect();
        self.evaluate(&x)
    }

    /// Exhaustive truth table of one output. Parallelized over index ranges
    /// for large tables; the result is bit-identical to sequential
    /// evaluation because workers own disjoint ranges.
    pub fn truth_table(&self, output: usize, caps: &Caps) -> Result<TruthTable> {
        if output >= self.outputs.len() {
            return Err(Error::Input(format!("no output {output}")));
        }
        caps.check_tt_vars(self.ninputs, "truth table")?;
        let n = self.ninputs;
        let total = 1usize << n;
        let node = self.outputs[output] as usize;
        let chunk = 1usize << 12;
        let mut bits = vec![0u64; total.div_ceil(64)];
        if total <= chunk {
            for x in 0..total {
                if self.eval_nodes_mask(x as u64)[node] {
                    bits[x >> 6] |= 1 << (x & 63);
                }
            }
        } else {
            use rayon::prelude::*;
            let words: Vec<Vec<u64>> = (0..total / chunk)
                .into_par_iter()
                .map(|c| {
                    let mut w = vec![0u64; chunk / 64];
                    for j in 0..chunk {
                        let x = c * chunk + j;
                        if self.eval_nodes_mask(x as u64)[node] {
                            w[j >> 6] |= 1 << (j & 63);
                        }
                    }
                    w
                })
                .collect();
            for (c, w) in words.into_iter().enumerate() {
                let base = c * chunk / 64;
                bits[base..base + w.len()].copy_from_slice(&w);
            }
        }
        Ok(TruthTable { nvars: n, bits })
    }

    fn eval_nodes_mask(&self, mask: u64) -> Vec<bool> {
        let x: Vec<bool> = (0..self.ninputs).map(|i| mask >> i & 1 == 1).collect();
        self.eval_nodes(&x).expect("mask evaluation is in range")
    }

    /// Truth tables of all outputs.
    pub fn truth_tables(&self, caps: &Caps) -> Result<Vec<TruthTable>> {
        (0..self.outputs.len())
            .map(|o| self.truth_table(o, caps))
            .collect()
    }

    /// Replace fixed variables with constants and renumber the free ones,
    /// preserving their order. For every completion `y` of the free
    /// variables, `restrict(c, rho)(y) = c(rho composed with y)`.
    pub fn restrict(&self, rho: &Restriction) -> Result<Circuit> {
        if rho.len() != self.ninputs as usize {
            return Err(Error::Input(format!(
                "restriction covers {} variables, circuit reads {}",
                rho.len(),
                self.ninputs
            )));
        }
        let mut newvar = vec![0u32; self.ninputs as usize];
        let mut next = 0u32;
        for i in 0..self.ninputs as usize {
            if rho.0[i] == Cell::Free {
                next += 1;
                newvar[i] = next;
            }
        }
        let mut out = Circuit::new(next);
        for node in &self.nodes {
            let inputs = node
                .inputs
                .iter()
                .map(|&op| match op {
                    Operand::Input(v) => match rho.0[(v - 1) as usize] {
                        Cell::Free => Operand::Input(newvar[(v - 1) as usize]),
                        Cell::Zero => Operand::Const(false),
                        Cell::One => Operand::Const(true),
                    },
                    other => other,
                })
                .collect();
            out.nodes.push(Node {
                kind: node.kind.clone(),
                inputs,
            });
        }
        out.outputs = self.outputs.clone();
        Ok(out)
    }
}

/// Packed truth table; `x_i` is bit `i-1` of the index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    nvars: u32,
    bits: Vec<u64>,
}

impl TruthTable {
    pub fn new_false(nvars: u32) -> TruthTable {
        assert!(nvars <= 26, "truth table on {nvars} variables refused");
        TruthTable {
            nvars,
            bits: vec![0u64; (1usize << nvars).div_ceil(64)],
        }
    }

    pub fn from_fn(nvars: u32, mut f: impl FnMut(u64) -> bool) -> TruthTable {
        let mut t = TruthTable::new_false(nvars);
        for x in 0..1u64 << nvars {
            if f(x) {
                t.set(x, true);
            }
        }
        t
    }

    pub fn from_bits(nvars: u32, values: &[bool]) -> Result<TruthTable> {
        if values.len() != 1usize << nvars {
            return Err(Error::Input(format!(
                "expected 2^{nvars} bits, got {}",
                values.len()
            )));
        }
        Ok(TruthTable::from_fn(nvars, |x| values[x as usize]))
    }

    pub fn nvars(&self) -> u32 {
        self.nvars
    }

    pub fn len(&self) -> usize {
        1usize << self.nvars
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, x: u64) -> bool {
        self.bits[(x >> 6) as usize] >> (x & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, x: u64, v: bool) {
        let w = &mut self.bits[(x >> 6) as usize];
        if v {
            *w |= 1 << (x & 63);
        } else {
            *w &= !(1 << (x & 63));
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    /// Majority: 1 iff at least half the inputs are 1.
    pub fn maj(nvars: u32) -> TruthTable {
        TruthTable::from_fn(nvars, |x| 2 * x.count_ones() >= nvars)
    }

    /// MOD_m: outputs 0 iff the weight is divisible by m.
    pub fn mod_m(nvars: u32, m: u32) -> TruthTable {
        TruthTable::from_fn(nvars, |x| x.count_ones() % m != 0)
    }

    pub fn parity(nvars: u32) -> TruthTable {
        TruthTable::from_fn(nvars, |x| x.count_ones() % 2 == 1)
    }

    /// Restrict to the given partial assignment; free variables renumber in
    /// order.
    pub fn restrict(&self, rho: &Restriction) -> Result<TruthTable> {
        if rho.len() != self.nvars as usize {
            return Err(Error::Input("restriction arity mismatch".into()));
        }
        let free: Vec<usize> = (0..self.nvars as usize)
            .filter(|&i| rho.0[i] == Cell::Free)
            .collect();
        let mut base = 0u64;
        for (i, c) in rho.0.iter().enumerate() {
            if *c == Cell::One {
                base |= 1 << i;
            }
        }
        let mut out = TruthTable::new_false(free.len() as u32);
        for y in 0..1u64 << free.len() {
            let mut x = base;
            for (j, &i) in free.iter().enumerate() {
                if y >> j & 1 == 1 {
                    x |= 1 << i;
                }
            }
            if self.get(x) {
                out.set(y, true);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cell {
    Zero,
    One,
    Free,
}

/// Partial assignment over `[n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction(pub Vec<Cell>);

impl Restriction {
    pub fn all_free(n: u32) -> Restriction {
        Restriction(vec![Cell::Free; n as usize])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn free_count(&self) -> usize {
        self.0.iter().filter(|&&c| c == Cell::Free).count()
    }

    pub fn set(&mut self, i: usize, c: Cell) {
        self.0[i] = c;
    }

    /// Compose: apply `other` to this restriction's free slots (in free
    /// order).
    pub fn then(&self, other: &Restriction) -> Result<Restriction> {
        if other.len() != self.free_count() {
            return Err(Error::Input(
                "restriction composition arity mismatch".into(),
            ));
        }
        let mut out = self.clone();
        let mut j = 0;
        for i in 0..out.0.len() {
            if out.0[i] == Cell::Free {
                out.0[i] = other.0[j];
                j += 1;
            }
        }
        Ok(out)
    }
}

/// Expand a generalized gate as a CNF: an AND of OR-clauses (negations of
/// inputs appear as NOT nodes, which count toward neither size nor depth).
///
/// Construction: one full clause per ball point where the gate is 0; when the
/// default is 0, additionally one negative clause per (k+1)-subset, which
/// falsifies exactly the inputs of weight over k. Clause count is at most
/// `binom(f, <=k+1)`.
pub fn gk_to_cnf(g: &GkGate, caps: &Caps) -> Result<Circuit> {
    let f = g.fanin;
    if binom_le(f as u64, (g.k.min(f) + 1).min(f) as u64) > caps.max_ball_entries as u128 {
        return Err(Error::Resource(format!(
            "CNF of GK(k={}) with fan-in {f} exceeds ball cap",
            g.k
        )));
    }
    let mut c = Circuit::new(f);
    // NOT nodes for each input, created lazily.
    let mut neg: Vec<Option<u32>> = vec![None; f as usize];
    let mut clauses: Vec<u32> = Vec::new();
    let points = ball_points(f, g.k.min(f));
    for (bi, &pt) in points.iter().enumerate() {
        if g.ball_table[bi] {
            continue;
        }
        // Clause violated exactly at `pt`: positive literals where pt has a
        // zero, negated literals where pt has a one.
        let mut lits: Vec<Operand> = Vec::with_capacity(f as usize);
        for i in 0..f {
            if pt >> i & 1 == 1 {
                let ni = match neg[i as usize] {
                    Some(v) => v,
                    None => {
                        let v = c.push_gate(GateKind::Not, vec![Operand::Input(i + 1)])?;
                        neg[i as usize] = Some(v);
                        v
                    }
                };
                lits.push(Operand::Gate(ni));
            } else {
                lits.push(Operand::Input(i + 1));
            }
        }
        clauses.push(c.push_gate(GateKind::Or, lits)?);
    }
    if !g.default && g.k < f {
        // Kill every input of weight > k: for each (k+1)-subset T, the
        // clause OR of negated T-literals.
        let heavy: Vec<u64> = ball_points(f, g.k + 1)
            .into_iter()
            .filter(|m| m.count_ones() == g.k + 1)
            .collect();
        for t in heavy {
            let mut lits = Vec::new();
            for i in 0..f {
                if t >> i & 1 == 1 {
                    let ni = match neg[i as usize] {
                        Some(v) => v,
                        None => {
                            let v = c.push_gate(GateKind::Not, vec![Operand::Input(i + 1)])?;
                            neg[i as usize] = Some(v);
                            v
                        }
                    };
                    lits.push(Operand::Gate(ni));
                }
            }
            clauses.push(c.push_gate(GateKind::Or, lits)?);
        }
    }
    let top = if clauses.is_empty() {
        // Empty CNF is the constant 1.
        c.push_gate(GateKind::And, vec![Operand::Const(true)])?
    } else {
        c.push_gate(
            GateKind::And,
            clauses.into_iter().map(Operand::Gate).collect(),
        )?
    };
    c.set_outputs(vec![top])?;
    Ok(c)
}

/// Result of converting a linear threshold function to a generalized gate.
#[derive(Debug, Clone)]
pub struct LtfGate {
    pub gate: GkGate,
    /// True when no radius below the fan-in passed the detection inequality
    /// and the gate fell back to `k = fanin`.
    pub rejected: bool,
}

/// Convert the threshold function `[sum_i w_i x_i > theta]` into a
/// generalized gate.
///
/// The radius search takes the least `k` with
/// `sum_{i>k} |w_i| - sum_{i<=k} |w_i| < |theta|` over the weights sorted by
/// ascending magnitude. That inequality alone does not force the function to
/// be constant above weight `k` (unit weights with theta = 3.5 pass at k = 1
/// but take both values on heavier inputs), so the radius is then advanced
/// to the least value at which constancy actually holds, decided exactly by
/// extremizing the weight sum over inputs of weight > k. The ball table is
/// the threshold function itself and the default is its true constant value
/// outside the ball.
pub fn biased_ltf_to_gk(weights: &[f64], theta: f64, caps: &Caps) -> Result<LtfGate> {
    let f = weights.len() as u32;
    if f == 0 || f > MAX_VARS {
        return Err(Error::Input(format!("fan-in {f} out of range")));
    }
    let mut sorted: Vec<f64> = weights.iter().map(|w| w.abs()).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let total: f64 = sorted.iter().sum();
    let mut head = 0.0;
    let mut detected = None;
    for k in 0..f {
        // head = sum of the k smallest magnitudes.
        if (total - head) - head < theta.abs() {
            detected = Some(k);
            break;
        }
        head += sorted[k as usize];
    }
    let ltf = |x: u64| -> bool {
        let mut s = 0.0;
        for (i, w) in weights.iter().enumerate() {
            if x >> i & 1 == 1 {
                s += w;
            }
        }
        s > theta
    };
    let mut k = detected.unwrap_or(f);
    let rejected = detected.is_none();
    // Advance k until the function is provably constant above weight k.
    let constant_above = |k: u32| -> Option<bool> {
        if k >= f {
            return Some(false); // value irrelevant: no points above weight f
        }
        let (lo, hi) = extreme_sums(weights, k + 1);
        if lo > theta {
            Some(true)
        } else if hi <= theta {
            Some(false)
        } else {
            None
        }
    };
    let default = loop {
        match constant_above(k) {
            Some(d) => break d,
            None => k += 1,
        }
    };
    let size = crate::ball::ball_size_checked(f, k.min(f), caps.max_ball_entries)?;
    let points = ball_points(f, k.min(f));
    let mut table = Vec::with_capacity(size);
    for &pt in &points {
        table.push(ltf(pt));
    }
    Ok(LtfGate {
        gate: GkGate::new(f, k, default, table)?,
        rejected: rejected || k >= f,
    })
}

/// Minimum and maximum of `sum_{i in x} w_i` over inputs with at least
/// `need` ones.
fn extreme_sums(weights: &[f64], need: u32) -> (f64, f64) {
    let mut asc: Vec<f64> = weights.to_vec();
    asc.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Min: all negative weights, padded with the smallest positives up to
    // `need` picks.
    let mut lo: f64 = asc.iter().filter(|w| **w < 0.0).sum();
    let negs = asc.iter().filter(|w| **w < 0.0).count();
    if (negs as u32) < need {
        lo += asc
            .iter()
            .filter(|w| **w >= 0.0)
            .take((need as usize) - negs)
            .sum::<f64>();
    }
    // Max symmetric.
    let mut hi: f64 = asc.iter().filter(|w| **w > 0.0).sum();
    let poss = asc.iter().filter(|w| **w > 0.0).count();
    if (poss as u32) < need {
        hi += asc
            .iter()
            .rev()
            .filter(|w| **w <= 0.0)
            .take((need as usize) - poss)
            .sum::<f64>();
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::random_gk;
    use crate::rng::CounterRng;

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn gate_evaluation_examples() {
        // GK(k=1, default=1, ball all-0) on x=110: weight 2 > k, default.
        let g = GkGate::new(3, 1, true, vec![false; 4]).unwrap();
        let mut c = Circuit::new(3);
        let gi = c
            .push_gate(
                GateKind::Gk {
                    k: 1,
                    default: true,
                    ball_table: vec![false; 4],
                },
                vec![Operand::Input(1), Operand::Input(2), Operand::Input(3)],
            )
            .unwrap();
        c.set_outputs(vec![gi]).unwrap();
        assert_eq!(c.evaluate(&[true, true, false]).unwrap(), vec![true]);
        assert!(g.eval_mask(0b011));
        assert!(!g.eval_mask(0b001));

        // NOT chain of length 2 is the identity.
        let mut c = Circuit::new(1);
        let n1 = c.push_gate(GateKind::Not, vec![Operand::Input(1)]).unwrap();
        let n2 = c.push_gate(GateKind::Not, vec![Operand::Gate(n1)]).unwrap();
        c.set_outputs(vec![n2]).unwrap();
        assert_eq!(c.evaluate(&[true]).unwrap(), vec![true]);
        assert_eq!(c.size(), 0); // NOT gates do not count
        assert_eq!(c.depth(), 0);

        // MOD(3) on 111 -> 0.
        let mut c = Circuit::new(3);
        let m = c
            .push_gate(
                GateKind::Mod { m: 3 },
                vec![Operand::Input(1), Operand::Input(2), Operand::Input(3)],
            )
            .unwrap();
        c.set_outputs(vec![m]).unwrap();
        assert_eq!(c.evaluate(&[true, true, true]).unwrap(), vec![false]);
        assert_eq!(c.evaluate(&[true, true, false]).unwrap(), vec![true]);
    }

    #[test]
    fn truth_table_examples() {
        // AND2 -> bits 0001 in index order 00, 10, 01, 11.
        let mut c = Circuit::new(2);
        let a = c
            .push_gate(GateKind::And, vec![Operand::Input(1), Operand::Input(2)])
            .unwrap();
        c.set_outputs(vec![a]).unwrap();
        let t = c.truth_table(0, &caps()).unwrap();
        let got: Vec<bool> = (0..4).map(|x| t.get(x)).collect();
        assert_eq!(got, vec![false, false, false, true]);

        // Single wire x1 via a fan-in-1 AND.
        let mut c = Circuit::new(1);
        let w = c.push_gate(GateKind::And, vec![Operand::Input(1)]).unwrap();
        c.set_outputs(vec![w]).unwrap();
        let t = c.truth_table(0, &caps()).unwrap();
        assert!(!t.get(0));
        assert!(t.get(1));

        // MOD(2) of three inputs is the parity table.
        let mut c = Circuit::new(3);
        let m = c
            .push_gate(
                GateKind::Mod { m: 2 },
                vec![Operand::Input(1), Operand::Input(2), Operand::Input(3)],
            )
            .unwrap();
        c.set_outputs(vec![m]).unwrap();
        assert_eq!(c.truth_table(0, &caps()).unwrap(), TruthTable::parity(3));
    }

    #[test]
    fn parallel_truth_table_is_bit_identical() {
        // 13 inputs crosses the chunked parallel path; compare against the
        // one-point-at-a-time loop.
        let mut rng = CounterRng::new(90);
        let c = crate::gen::random_gc0_circuit(
            &crate::gen::RandomCircuitSpec {
                n: 13,
                k: 1,
                q: 3,
                depth: 3,
                width: 5,
            },
            &mut rng,
        );
        let t = c.truth_table(0, &caps()).unwrap();
        for x in 0..1u64 << 13 {
            assert_eq!(t.get(x), c.evaluate_mask(x).unwrap()[0], "x={x}");
        }
    }

    #[test]
    fn validation_diagnostics() {
        let mut c = Circuit::new(2);
        c.nodes.push(Node {
            kind: GateKind::Gk {
                k: 1,
                default: false,
                ball_table: vec![false; 2],
            },
            inputs: vec![Operand::Input(1), Operand::Input(2)],
        });
        c.nodes.push(Node {
            kind: GateKind::Not,
            inputs: vec![Operand::Input(1), Operand::Input(2)],
        });
        c.outputs = vec![0];
        let diags = c.validate();
        assert!(diags
            .iter()
            .any(|d| d.message.contains("ball table length")));
        assert!(diags.iter().any(|d| d.message.contains("fan-in 2")));

        let mut ok = Circuit::new(2);
        let g = ok
            .push_gate(GateKind::Or, vec![Operand::Input(1), Operand::Input(2)])
            .unwrap();
        ok.set_outputs(vec![g]).unwrap();
        assert!(ok.validate().is_empty());
    }

    #[test]
    fn restriction_semantics() {
        let mut rng = CounterRng::new(123);
        // All-free restriction preserves the truth table.
        let g = random_gk(5, 2, &mut rng);
        let c = g.as_circuit();
        let rho = Restriction::all_free(5);
        assert_eq!(
            c.restrict(&rho).unwrap().truth_table(0, &caps()).unwrap(),
            c.truth_table(0, &caps()).unwrap()
        );

        // AND2 with x2 -> 1 equals the x1 wire.
        let mut c = Circuit::new(2);
        let a = c
            .push_gate(GateKind::And, vec![Operand::Input(1), Operand::Input(2)])
            .unwrap();
        c.set_outputs(vec![a]).unwrap();
        let mut rho = Restriction::all_free(2);
        rho.set(1, Cell::One);
        let r = c.restrict(&rho).unwrap();
        assert_eq!(r.ninputs(), 1);
        let t = r.truth_table(0, &caps()).unwrap();
        assert!(!t.get(0));
        assert!(t.get(1));

        // Parity of 3 with x1 -> 1 is the negated parity of 2.
        let mut c = Circuit::new(3);
        let m = c
            .push_gate(
                GateKind::Mod { m: 2 },
                vec![Operand::Input(1), Operand::Input(2), Operand::Input(3)],
            )
            .unwrap();
        c.set_outputs(vec![m]).unwrap();
        let mut rho = Restriction::all_free(3);
        rho.set(0, Cell::One);
        let t = c.restrict(&rho).unwrap().truth_table(0, &caps()).unwrap();
        let negpar = TruthTable::from_fn(2, |x| x.count_ones() % 2 == 0);
        assert_eq!(t, negpar);
    }

    #[test]
    fn restrict_then_evaluate_is_evaluate_then_substitute() {
        let mut rng = CounterRng::new(77);
        for trial in 0..30 {
            let n = 4 + (trial % 5) as u32;
            let c = crate::gen::random_gc0_circuit(
                &crate::gen::RandomCircuitSpec {
                    n,
                    k: 1,
                    q: 3,
                    depth: 3,
                    width: 4,
                },
                &mut rng,
            );
            let mut rho = Restriction::all_free(n);
            for i in 0..n as usize {
                match rng.next_below(3) {
                    0 => rho.set(i, Cell::Zero),
                    1 => rho.set(i, Cell::One),
                    _ => {}
                }
            }
            let r = c.restrict(&rho).unwrap();
            let free: Vec<usize> = (0..n as usize)
                .filter(|&i| rho.0[i] == Cell::Free)
                .collect();
            for y in 0..1u64 << free.len() {
                let mut x = vec![false; n as usize];
                for (i, cell) in rho.0.iter().enumerate() {
                    x[i] = *cell == Cell::One;
                }
                for (j, &i) in free.iter().enumerate() {
                    x[i] = y >> j & 1 == 1;
                }
                let yv: Vec<bool> = (0..free.len()).map(|j| y >> j & 1 == 1).collect();
                assert_eq!(r.evaluate(&yv).unwrap(), c.evaluate(&x).unwrap());
            }
        }
    }

    #[test]
    fn gk_to_cnf_examples() {
        // GK(k=0, default=1, table 0 -> 0) is OR: one clause x1 | ... | xf.
        let g = GkGate::new(4, 0, true, vec![false]).unwrap();
        let cnf = gk_to_cnf(&g, &caps()).unwrap();
        let or_count = cnf
            .nodes()
            .iter()
            .filter(|n| matches!(n.kind, GateKind::Or))
            .count();
        assert_eq!(or_count, 1);
        let want = TruthTable::from_fn(4, |x| x != 0);
        assert_eq!(cnf.truth_table(0, &caps()).unwrap(), want);

        // Constant-1 gate -> empty CNF (true).
        let g = GkGate::new(3, 0, true, vec![true]).unwrap();
        let cnf = gk_to_cnf(&g, &caps()).unwrap();
        assert_eq!(
            cnf.truth_table(0, &caps()).unwrap(),
            TruthTable::from_fn(3, |_| true)
        );
    }

    #[test]
    fn gk_to_cnf_agrees_exhaustively() {
        let mut rng = CounterRng::new(31);
        let mut cases: Vec<(u32, u32)> = Vec::new();
        for f in 1..=8u32 {
            for k in 0..=f {
                cases.push((f, k));
            }
        }
        cases.push((16, 1)); // wide gate at the stated fan-in limit
        for (f, k) in cases {
            let g = random_gk(f, k, &mut rng);
            let cnf = gk_to_cnf(&g, &caps()).unwrap();
            let t = cnf.truth_table(0, &caps()).unwrap();
            for x in 0..1u64 << f {
                assert_eq!(t.get(x), g.eval_mask(x), "f={f} k={k} x={x:b}");
            }
            // Clause bound from the construction.
            let clauses = cnf
                .nodes()
                .iter()
                .filter(|n| matches!(n.kind, GateKind::Or))
                .count();
            assert!(clauses as u128 <= binom_le(f as u64, (k + 1).min(f) as u64) << (k + 1));
        }
    }

    #[test]
    fn gk_with_full_radius_represents_anything() {
        let mut rng = CounterRng::new(9);
        for n in 1..=4u32 {
            for _ in 0..10 {
                let t = TruthTable::from_fn(n, |_| rng.next_bool());
                let points = ball_points(n, n);
                let table: Vec<bool> = points.iter().map(|&m| t.get(m)).collect();
                let g = GkGate::new(n, n, false, table).unwrap();
                for x in 0..1u64 << n {
                    assert_eq!(g.eval_mask(x), t.get(x));
                }
            }
        }
    }

    #[test]
    fn biased_ltf_examples() {
        // Unit weights, theta = 0.5: OR-like; k=0 fails the inequality.
        let res = biased_ltf_to_gk(&[1.0, 1.0, 1.0, 1.0], 0.5, &caps()).unwrap();
        assert!(res.gate.k > 0);
        for x in 0..16u64 {
            let want = x != 0;
            assert_eq!(res.gate.eval_mask(x), want, "x={x:b}");
        }

        // theta above the total weight: constant gate with k = 0.
        let res = biased_ltf_to_gk(&[1.0, 2.0, 1.0], 5.0, &caps()).unwrap();
        assert_eq!(res.gate.k, 0);
        assert!(!res.gate.default);
        for x in 0..8u64 {
            assert!(!res.gate.eval_mask(x));
        }

        // Heavy coordinate: (4, 1, 1), theta = 2.
        let res = biased_ltf_to_gk(&[4.0, 1.0, 1.0], 2.0, &caps()).unwrap();
        for x in 0..8u64 {
            let s = [4.0, 1.0, 1.0]
                .iter()
                .enumerate()
                .filter(|(i, _)| x >> i & 1 == 1)
                .map(|(_, w)| *w)
                .sum::<f64>();
            assert_eq!(res.gate.eval_mask(x), s > 2.0);
        }
    }

    #[test]
    fn biased_ltf_agrees_exhaustively() {
        let mut rng = CounterRng::new(55);
        let mut cases = Vec::new();
        for f in 1..=12u32 {
            for _ in 0..20 {
                cases.push(f);
            }
        }
        cases.push(16); // stated fan-in limit
        for f in cases {
            let weights: Vec<f64> = (0..f).map(|_| rng.next_f64() * 8.0 - 4.0).collect();
            let theta = rng.next_f64() * 6.0 - 3.0;
            let res = biased_ltf_to_gk(&weights, theta, &caps()).unwrap();
            for x in 0..1u64 << f {
                let s: f64 = weights
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| x >> i & 1 == 1)
                    .map(|(_, w)| *w)
                    .sum();
                assert_eq!(res.gate.eval_mask(x), s > theta, "f={f} x={x:b}");
            }
        }
    }

    #[test]
    fn depth_and_size_conventions() {
        let mut c = Circuit::new(3);
        let n1 = c.push_gate(GateKind::Not, vec![Operand::Input(1)]).unwrap();
        let o1 = c
            .push_gate(GateKind::Or, vec![Operand::Gate(n1), Operand::Input(2)])
            .unwrap();
        let n2 = c.push_gate(GateKind::Not, vec![Operand::Gate(o1)]).unwrap();
        let a1 = c
            .push_gate(GateKind::And, vec![Operand::Gate(n2), Operand::Input(3)])
            .unwrap();
        let m1 = c
            .push_gate(
                GateKind::Maj,
                vec![Operand::Gate(a1), Operand::Gate(o1), Operand::Const(true)],
            )
            .unwrap();
        let t1 = c
            .push_gate(GateKind::Thr { k: 1 }, vec![Operand::Gate(m1)])
            .unwrap();
        c.set_outputs(vec![t1]).unwrap();
        assert_eq!(c.size(), 4); // OR, AND, MAJ, THR
        assert_eq!(c.depth(), 4);
    }
}
