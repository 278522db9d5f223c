//! Randomness-efficient probabilistic circuits for generalized gates.
//!
//! The construction follows three steps. A weight detector built from
//! pairwise-independent hashing outputs 1 on every input of weight at most
//! `k` and, over its random bits, 0 with probability at least 1/4 on heavier
//! inputs; AND-ing independent copies amplifies the one-sided error. Gluing
//! the detector to the exact ball interpolation yields a depth-5 circuit of
//! alternating AND / MOD_q layers computing the gate with few random bits.
//! Finally an algebraic depth-reduction collapses alternating MOD_q / AND
//! towers to a single MOD_q of ANDs.

use std::collections::HashMap;
use std::rc::Rc;

use serde::Serialize;

use crate::ball::{ball_points, binom};
use crate::circuit::{Cell, Circuit, GateKind, GkGate, Operand, Restriction};
use crate::error::{Caps, Error, Result};
use crate::field::PrimeField;
use crate::rng::CounterRng;

/// Shared parameters of the hash-based weight detector for fan-in `n`,
/// radius `k`, modulus `q`, target one-sided error `eps`.
#[derive(Debug, Clone)]
pub struct VvParams {
    pub n: u32,
    pub k: u32,
    pub q: u64,
    pub eps: f64,
    /// Hash length: floor(log2 binom(n, k+1)) + 1; 0 when no heavy subsets
    /// exist.
    pub m: u32,
    /// Independent detector copies: least c with (3/4)^c <= eps.
    pub copies: u32,
    /// All (k+1)-subsets as input masks, canonical order.
    pub subsets: Vec<u64>,
}

impl VvParams {
    pub fn new(n: u32, k: u32, q: u64, eps: f64, caps: &Caps) -> Result<VvParams> {
        PrimeField::new(q)?;
        if !(0.0..1.0).contains(&eps) || eps == 0.0 {
            return Err(Error::Input(format!("error target {eps} outside (0,1)")));
        }
        let count = binom(n as u64, (k + 1) as u64);
        if count > caps.max_ball_entries as u128 {
            return Err(Error::Resource(format!(
                "detector needs binom({n},{}) = {count} subsets, cap {}",
                k + 1,
                caps.max_ball_entries
            )));
        }
        if count == 0 {
            return Ok(VvParams {
                n,
                k,
                q,
                eps,
                m: 0,
                copies: 0,
                subsets: Vec::new(),
            });
        }
        let m = (count as f64).log2().floor() as u32 + 1;
        let mut copies = 0u32;
        let mut p = 1.0f64;
        while p > eps {
            p *= 0.75;
            copies += 1;
        }
        let subsets: Vec<u64> = ball_points(n, k + 1)
            .into_iter()
            .filter(|s| s.count_ones() == k + 1)
            .collect();
        Ok(VvParams {
            n,
            k,
            q,
            eps,
            m,
            copies,
            subsets,
        })
    }

    /// Random bits consumed per draw: copies * m^2.
    pub fn rand_bits(&self) -> u32 {
        self.copies * self.m * self.m
    }

    /// The m-bit code of subset index `si`: its rank in canonical order,
    /// bit `j-1` of the rank feeding hash coordinate `j`.
    #[inline]
    pub fn code(&self, si: usize) -> u64 {
        si as u64
    }

    /// Hash vectors for one draw, copy-major: `w[copy][i]` is an m-bit mask,
    /// reading tape bit `copy*m^2 + i*m + j` for coordinate `j`.
    pub fn hash_vectors(&self, tape: &[bool]) -> Vec<Vec<u64>> {
        let m = self.m as usize;
        let mut out = Vec::with_capacity(self.copies as usize);
        for c in 0..self.copies as usize {
            let mut ws = Vec::with_capacity(m);
            for i in 0..m {
                let mut w = 0u64;
                for j in 0..m {
                    if tape[c * m * m + i * m + j] {
                        w |= 1 << j;
                    }
                }
                ws.push(w);
            }
            out.push(ws);
        }
        out
    }

    /// For one copy's hash vectors: survival length of each subset, i.e. the
    /// number of leading hash coordinates whose dot product with the
    /// subset's code is zero.
    pub fn survival(&self, ws: &[u64]) -> Vec<u32> {
        self.subsets
            .iter()
            .enumerate()
            .map(|(si, _)| {
                let code = self.code(si);
                let mut l = 0u32;
                for &w in ws {
                    if (code & w).count_ones() % 2 != 0 {
                        break;
                    }
                    l += 1;
                }
                l
            })
            .collect()
    }

    /// One detector copy at one input mask: 1 iff no level isolates
    /// count = 1 mod q among the live subsets.
    pub fn copy_output(&self, x: u64, survival: &[u32]) -> bool {
        let m = self.m;
        let mut hist = vec![0u64; m as usize + 2];
        for (si, &s) in self.subsets.iter().enumerate() {
            if s & !x == 0 {
                hist[survival[si] as usize] += 1;
            }
        }
        // count_l = number of live subsets with survival >= l.
        let mut count = 0u64;
        let mut counts_desc = vec![0u64; m as usize + 1];
        for l in (0..=m as usize).rev() {
            count += hist[l];
            counts_desc[l] = count;
        }
        (0..=m as usize).all(|l| counts_desc[l] % self.q != 1)
    }

    /// Amplified detector (AND of all copies) at one input, from a tape.
    pub fn detector_output(&self, x: u64, tape: &[bool]) -> bool {
        if self.m == 0 {
            return true;
        }
        self.hash_vectors(tape)
            .iter()
            .all(|ws| self.copy_output(x, &self.survival(ws)))
    }

    /// Amplified detector on every point of the cube (fan-in <= 24).
    pub fn detector_outputs_cube(&self, tape: &[bool]) -> Result<Vec<bool>> {
        if self.n > 24 {
            return Err(Error::Resource(format!(
                "detector cube sweep on {} inputs refused",
                self.n
            )));
        }
        let mut out = vec![true; 1 << self.n];
        if self.m == 0 {
            return Ok(out);
        }
        let survivals: Vec<Vec<u32>> = self
            .hash_vectors(tape)
            .iter()
            .map(|ws| self.survival(ws))
            .collect();
        for x in 0..1u64 << self.n {
            if x.count_ones() <= self.k {
                continue; // always 1 on the ball
            }
            for surv in &survivals {
                if !self.copy_output(x, surv) {
                    out[x as usize] = false;
                    break;
                }
            }
        }
        Ok(out)
    }

    /// Fresh tape bits for a draw.
    pub fn draw_tape(&self, seed: u64) -> Vec<bool> {
        let mut rng = CounterRng::new(seed);
        (0..self.rand_bits()).map(|_| rng.next_bool()).collect()
    }
}

/// One layer of a profile: gate kinds present, gate count, max fan-in.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct LayerStat {
    pub level: u32,
    pub kinds: Vec<String>,
    pub count: usize,
    pub max_fanin: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct LayerProfile {
    pub layers: Vec<LayerStat>,
}

/// Levels count every gate except NOT, inputs at level 0.
pub fn layer_profile(c: &Circuit) -> LayerProfile {
    let mut level = vec![0u32; c.nodes().len()];
    let mut stats: HashMap<u32, (std::collections::BTreeSet<String>, usize, usize)> =
        HashMap::new();
    for (i, node) in c.nodes().iter().enumerate() {
        let below = node
            .inputs
            .iter()
            .map(|op| match *op {
                Operand::Gate(g) => level[g as usize],
                _ => 0,
            })
            .max()
            .unwrap_or(0);
        if matches!(node.kind, GateKind::Not) {
            level[i] = below;
            continue;
        }
        level[i] = below + 1;
        let entry = stats.entry(level[i]).or_default();
        entry.0.insert(node.kind.name().to_string());
        entry.1 += 1;
        entry.2 = entry.2.max(node.inputs.len());
    }
    let mut layers: Vec<LayerStat> = stats
        .into_iter()
        .map(|(lvl, (kinds, count, max_fanin))| LayerStat {
            level: lvl,
            kinds: kinds.into_iter().collect(),
            count,
            max_fanin,
        })
        .collect();
    layers.sort_by_key(|l| l.level);
    LayerProfile { layers }
}

/// A probabilistic circuit: a fixed base circuit over `n` inputs plus
/// `rand_bits` random inputs, drawn by fixing the random inputs from a seed.
#[derive(Debug, Clone)]
pub struct ProbCircuitSampler {
    pub base: Circuit,
    pub n: u32,
    pub rand_bits: u32,
    pub error: f64,
    pub profile: LayerProfile,
    pub params: VvParams,
}

impl ProbCircuitSampler {
    /// Fix the random inputs from the seed; the result reads only `x`.
    pub fn draw(&self, seed: u64) -> Circuit {
        let tape = self.params.draw_tape(seed);
        self.bind(&tape)
    }

    pub fn bind(&self, tape: &[bool]) -> Circuit {
        let mut rho = Restriction::all_free(self.n + self.rand_bits);
        for (t, &b) in tape.iter().enumerate() {
            rho.set(self.n as usize + t, if b { Cell::One } else { Cell::Zero });
        }
        self.base.restrict(&rho).expect("arity matches")
    }

    pub fn eval_seeded(&self, x: &[bool], seed: u64) -> Result<Vec<bool>> {
        let tape = self.params.draw_tape(seed);
        let mut full: Vec<bool> = x.to_vec();
        full.extend_from_slice(&tape);
        self.base.evaluate(&full)
    }
}

fn push_const_ones(ops: &mut Vec<Operand>, count: u64) {
    for _ in 0..count {
        ops.push(Operand::Const(true));
    }
}

/// Depth-5 probabilistic circuit for a generalized gate: an AND of (a) the
/// ball interpolation rendered as a MOD_q of ANDs and (b) the amplified
/// weight detector. One-sided: on inputs of weight at most `k` the output
/// equals the gate with probability 1.
pub fn vv_gk_circuit(g: &GkGate, q: u64, eps: f64, caps: &Caps) -> Result<ProbCircuitSampler> {
    let params = VvParams::new(g.fanin, g.k, q, eps, caps)?;
    let n = g.fanin;
    let field = PrimeField::new(q)?;

    // Normalize to default = 0; a default-1 gate is negated here and the
    // output is negated again with a MOD_q fed q-1 constant ones.
    let negate = g.default;
    let table: Vec<u64> = if negate {
        g.ball_table.iter().map(|&b| !b as u64).collect()
    } else {
        g.ball_values()
    };

    let mut c = Circuit::new(n + params.rand_bits());
    let mut top_ops: Vec<Operand> = Vec::new();

    // C1: MOD_q over multiplicity-weighted AND gates for the monomials of
    // the degree-k interpolation of the ball table.
    let p1 = crate::poly::interpolate_ball(&table, n, g.k.min(n), q, caps.max_ball_entries)?;
    let mut c1_ops: Vec<Operand> = Vec::new();
    for (mono, coeff) in p1.terms() {
        let op = if mono.degree() == 0 {
            Operand::Const(true)
        } else {
            let lits: Vec<Operand> = mono.vars().map(Operand::Input).collect();
            Operand::Gate(c.push_gate(GateKind::And, lits)?)
        };
        for _ in 0..coeff {
            c1_ops.push(op);
        }
    }
    if c1_ops.is_empty() {
        c1_ops.push(Operand::Const(false));
    }
    let c1 = c.push_gate(GateKind::Mod { m: q as u32 }, c1_ops)?;
    top_ops.push(Operand::Gate(c1));

    // C2 copies. Random input for tape position t is x_{n+1+t}.
    let m = params.m as usize;
    let rand_input = |copy: usize, i: usize, j: usize| -> Operand {
        Operand::Input(n + 1 + (copy * m * m + i * m + j) as u32)
    };
    for copy in 0..params.copies as usize {
        // Even-parity gates: abar[i][si] = [ <code(S), w_i> = 0 ], one
        // MOD_q over mutually exclusive even-parity minterms of the hashed
        // coordinates.
        let mut abar: Vec<Vec<Operand>> = Vec::with_capacity(m);
        for i in 0..m {
            let mut row = Vec::with_capacity(params.subsets.len());
            for si in 0..params.subsets.len() {
                let code = params.code(si);
                let bits: Vec<usize> = (0..m).filter(|j| code >> j & 1 == 1).collect();
                if bits.is_empty() {
                    row.push(Operand::Const(true));
                    continue;
                }
                let mut minterms: Vec<Operand> = Vec::new();
                for a in 0..1u64 << bits.len() {
                    if a.count_ones() % 2 != 0 {
                        continue;
                    }
                    let mut lits = Vec::with_capacity(bits.len());
                    for (bi, &j) in bits.iter().enumerate() {
                        let w = rand_input(copy, i, j);
                        if a >> bi & 1 == 1 {
                            lits.push(w);
                        } else {
                            let neg = c.push_gate(GateKind::Not, vec![w])?;
                            lits.push(Operand::Gate(neg));
                        }
                    }
                    minterms.push(Operand::Gate(c.push_gate(GateKind::And, lits)?));
                }
                row.push(Operand::Gate(
                    c.push_gate(GateKind::Mod { m: q as u32 }, minterms)?,
                ));
            }
            abar.push(row);
        }
        // B_{S,l} = x^S AND (abar_{S,1..l}); D_l = MOD_q(all B_{S,l}, q-1
        // ones), which is 0 exactly when the live count is 1 mod q.
        for l in 0..=m {
            let mut d_ops: Vec<Operand> = Vec::with_capacity(params.subsets.len());
            for (si, &s) in params.subsets.iter().enumerate() {
                let mut lits: Vec<Operand> = (0..n)
                    .filter(|i| s >> i & 1 == 1)
                    .map(|i| Operand::Input(i + 1))
                    .collect();
                for row in abar.iter().take(l) {
                    lits.push(row[si]);
                }
                d_ops.push(Operand::Gate(c.push_gate(GateKind::And, lits)?));
            }
            push_const_ones(&mut d_ops, q - 1);
            let d = c.push_gate(GateKind::Mod { m: q as u32 }, d_ops)?;
            top_ops.push(Operand::Gate(d));
        }
        if c.nodes().len() > caps.max_gates {
            return Err(Error::Resource(format!(
                "detector circuit exceeds {} gates",
                caps.max_gates
            )));
        }
    }

    let top = c.push_gate(GateKind::And, top_ops)?;
    let out = if negate {
        let mut ops = vec![Operand::Gate(top)];
        push_const_ones(&mut ops, q - 1);
        c.push_gate(GateKind::Mod { m: q as u32 }, ops)?
    } else {
        top
    };
    c.set_outputs(vec![out])?;
    debug_assert_eq!(field.modulus(), q);

    let profile = layer_profile(&c);
    Ok(ProbCircuitSampler {
        base: c,
        n,
        rand_bits: params.rand_bits(),
        error: eps,
        profile,
        params,
    })
}

// ---------------------------------------------------------------------------
// Algebraic collapse of AND / MOD_q / NOT circuits to MOD_q of ANDs.
// ---------------------------------------------------------------------------

/// Literal code: input i positive -> 2i, negated -> 2i+1 (i zero-based).
type Lit = u16;

/// Multilinear polynomial whose monomials are products of input literals.
/// Contradictory monomials (x and not-x) are dropped; repeated literals
/// merge by idempotence.
#[derive(Debug, Clone)]
struct LitPoly {
    q: u64,
    terms: HashMap<Box<[Lit]>, u64>,
}

impl LitPoly {
    fn zero(q: u64) -> LitPoly {
        LitPoly {
            q,
            terms: HashMap::new(),
        }
    }

    fn constant(q: u64, c: u64) -> LitPoly {
        let mut p = LitPoly::zero(q);
        if c % q != 0 {
            p.terms.insert(Box::from([]), c % q);
        }
        p
    }

    fn atom(q: u64, lit: Lit) -> LitPoly {
        let mut p = LitPoly::zero(q);
        p.terms.insert(Box::from([lit]), 1);
        p
    }

    fn add_term(&mut self, mono: Box<[Lit]>, c: u64) {
        let c = c % self.q;
        if c == 0 {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                let v = (*e.get() + c) % self.q;
                if v == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    fn add(&mut self, other: &LitPoly) {
        for (m, &c) in &other.terms {
            self.add_term(m.clone(), c);
        }
    }

    fn mul(&self, other: &LitPoly, cap: usize) -> Result<LitPoly> {
        let mut out = LitPoly::zero(self.q);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                if let Some(m) = merge_lits(ma, mb) {
                    out.add_term(m, ca * cb % self.q);
                }
            }
            if out.terms.len() > cap {
                return Err(Error::Resource(format!(
                    "collapse exceeded {cap} monomials"
                )));
            }
        }
        Ok(out)
    }

    fn pow(&self, e: u64, cap: usize) -> Result<LitPoly> {
        let mut acc = LitPoly::constant(self.q, 1);
        for _ in 0..e {
            acc = acc.mul(self, cap)?;
        }
        Ok(acc)
    }

    /// 1 - self.
    fn complement(&self) -> LitPoly {
        let mut out = LitPoly::constant(self.q, 1);
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), (self.q - c) % self.q);
        }
        out
    }
}

/// Union of sorted literal lists; None on a contradictory pair.
fn merge_lits(a: &[Lit], b: &[Lit]) -> Option<Box<[Lit]>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = if j >= b.len() || (i < a.len() && a[i] <= b[j]) {
            let v = a[i];
            i += 1;
            v
        } else {
            let v = b[j];
            j += 1;
            v
        };
        match out.last() {
            Some(&last) if last == next => {} // idempotent
            Some(&last) if last ^ 1 == next && last >> 1 == next >> 1 => return None,
            _ => out.push(next),
        }
    }
    Some(out.into_boxed_slice())
}

/// Turn an AND/MOD_q/NOT circuit node into its literal polynomial: ANDs
/// multiply, a MOD_q becomes the (q-1)th power of its operand sum, NOT of a
/// gate complements, NOT of an input is an atom.
fn algebraize(c: &Circuit, q: u64, caps: &Caps) -> Result<LitPoly> {
    let mut memo: Vec<Option<Rc<LitPoly>>> = vec![None; c.nodes().len()];
    let cap = caps.max_poly_terms;

    fn operand_poly(
        c: &Circuit,
        op: Operand,
        q: u64,
        cap: usize,
        memo: &mut Vec<Option<Rc<LitPoly>>>,
        caps: &Caps,
    ) -> Result<Rc<LitPoly>> {
        match op {
            Operand::Const(b) => Ok(Rc::new(LitPoly::constant(q, b as u64))),
            Operand::Input(v) => Ok(Rc::new(LitPoly::atom(q, ((v - 1) * 2) as Lit))),
            Operand::Gate(g) => node_poly(c, g, q, cap, memo, caps),
        }
    }

    fn node_poly(
        c: &Circuit,
        idx: u32,
        q: u64,
        cap: usize,
        memo: &mut Vec<Option<Rc<LitPoly>>>,
        caps: &Caps,
    ) -> Result<Rc<LitPoly>> {
        if let Some(p) = &memo[idx as usize] {
            return Ok(p.clone());
        }
        let node = &c.nodes()[idx as usize];
        let poly = match &node.kind {
            GateKind::And => {
                let mut acc = LitPoly::constant(q, 1);
                for &op in &node.inputs {
                    let p = operand_poly(c, op, q, cap, memo, caps)?;
                    acc = acc.mul(&p, cap)?;
                }
                acc
            }
            GateKind::Mod { m } => {
                if *m as u64 != q {
                    return Err(Error::Unsupported(format!(
                        "MOD_{m} gate in a collapse over F_{q}"
                    )));
                }
                let mut sum = LitPoly::zero(q);
                for &op in &node.inputs {
                    let p = operand_poly(c, op, q, cap, memo, caps)?;
                    sum.add(&p);
                }
                sum.pow(q - 1, cap)?
            }
            GateKind::Not => match node.inputs[0] {
                Operand::Input(v) => LitPoly::atom(q, ((v - 1) * 2 + 1) as Lit),
                Operand::Const(b) => LitPoly::constant(q, !b as u64),
                Operand::Gate(g) => node_poly(c, g, q, cap, memo, caps)?.complement(),
            },
            other => {
                return Err(Error::Input(format!(
                    "{} gate outside the AND/MOD/NOT fragment",
                    other.name()
                )))
            }
        };
        let rc = Rc::new(poly);
        memo[idx as usize] = Some(rc.clone());
        Ok(rc)
    }

    if c.outputs().len() != 1 {
        return Err(Error::Input("collapse expects a single output".into()));
    }
    // The root is rendered as a MOD_q gate, which applies [sum != 0 mod q]
    // natively; a MOD root therefore contributes its operand sum directly,
    // without the Fermat power (which would square the output size).
    let root = c.outputs()[0];
    if let GateKind::Mod { m } = c.nodes()[root as usize].kind {
        if m as u64 != q {
            return Err(Error::Unsupported(format!(
                "MOD_{m} root in a collapse over F_{q}"
            )));
        }
        let mut sum = LitPoly::zero(q);
        let inputs = c.nodes()[root as usize].inputs.clone();
        for op in inputs {
            let p = operand_poly(c, op, q, cap, &mut memo, caps)?;
            sum.add(&p);
        }
        return Ok(sum);
    }
    let out = node_poly(c, root, q, cap, &mut memo, caps)?;
    Ok((*out).clone())
}

/// Render a literal polynomial as a depth-2 circuit: one MOD_q over one AND
/// gate per unit of coefficient. The output is 1 exactly where the
/// polynomial is nonzero mod q, so it equals any 0/1-valued polynomial.
fn emit_mod_of_ands(poly: &LitPoly, ninputs: u32, q: u64, caps: &Caps) -> Result<Circuit> {
    let mut monos: Vec<(&Box<[Lit]>, u64)> = poly.terms.iter().map(|(m, &c)| (m, c)).collect();
    monos.sort_by(|a, b| (a.0.len(), a.0.as_ref()).cmp(&(b.0.len(), b.0.as_ref())));
    let total: u64 = monos.iter().map(|(_, c)| *c).sum();
    if total as usize > caps.max_gates {
        return Err(Error::Resource(format!(
            "collapsed circuit needs {total} AND gates, cap {}",
            caps.max_gates
        )));
    }
    let mut c = Circuit::new(ninputs);
    let mut negs: Vec<Option<u32>> = vec![None; ninputs as usize];
    let mut mod_ops: Vec<Operand> = Vec::new();
    for (mono, coeff) in monos {
        let op = if mono.is_empty() {
            Operand::Const(true)
        } else {
            let mut lits = Vec::with_capacity(mono.len());
            for &l in mono.iter() {
                let v = (l >> 1) as u32;
                if l & 1 == 0 {
                    lits.push(Operand::Input(v + 1));
                } else {
                    let ni = match negs[v as usize] {
                        Some(g) => g,
                        None => {
                            let g = c.push_gate(GateKind::Not, vec![Operand::Input(v + 1)])?;
                            negs[v as usize] = Some(g);
                            g
                        }
                    };
                    lits.push(Operand::Gate(ni));
                }
            }
            Operand::Gate(c.push_gate(GateKind::And, lits)?)
        };
        for _ in 0..coeff {
            mod_ops.push(op);
        }
    }
    if mod_ops.is_empty() {
        mod_ops.push(Operand::Const(false));
    }
    let top = c.push_gate(GateKind::Mod { m: q as u32 }, mod_ops)?;
    c.set_outputs(vec![top])?;
    Ok(c)
}

/// Shape parameters of a strict depth-4 instance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Depth4Shape {
    pub p: u64,
    pub s1: usize,
    pub t: usize,
    pub s2: usize,
    pub r: usize,
}

impl Depth4Shape {
    /// Size bounds promised by the collapse: AND count (with multiplicity)
    /// and AND fan-in.
    pub fn and_count_bound(&self) -> u128 {
        let mut acc: u128 = self.s1 as u128;
        for _ in 0..(self.t as u64 * (self.p - 1)) {
            acc = acc.saturating_mul(self.s2.max(1) as u128);
        }
        acc
    }

    pub fn fanin_bound(&self) -> u128 {
        self.r as u128 * self.t as u128 * (self.p - 1) as u128
    }
}

fn operand_is_atom(c: &Circuit, op: Operand) -> bool {
    match op {
        Operand::Input(_) | Operand::Const(_) => true,
        Operand::Gate(g) => {
            let node = &c.nodes()[g as usize];
            matches!(node.kind, GateKind::Not) && matches!(node.inputs[0], Operand::Input(_))
        }
    }
}

/// Check the strict MOD_p / AND / MOD_p / AND layer shape and report its
/// parameters. Inputs, constants, and negated inputs may stand in for gates
/// at any layer.
pub fn validate_depth4_shape(c: &Circuit) -> Result<Depth4Shape> {
    let wrong = |msg: String| Error::Input(format!("wrong shape: {msg}"));
    if c.outputs().len() != 1 {
        return Err(wrong("expected a single output".into()));
    }
    let top_idx = c.outputs()[0];
    let top = &c.nodes()[top_idx as usize];
    let p = match top.kind {
        GateKind::Mod { m } => m as u64,
        _ => return Err(wrong("top gate must be MOD".into())),
    };
    let (mut t, mut s2, mut r) = (0usize, 0usize, 0usize);
    for &and_op in &top.inputs {
        let and_gate = match and_op {
            Operand::Gate(g) if matches!(c.nodes()[g as usize].kind, GateKind::And) => {
                &c.nodes()[g as usize]
            }
            op if operand_is_atom(c, op) => continue,
            _ => return Err(wrong("second layer must be AND gates or literals".into())),
        };
        let mut mods_here = 0usize;
        for &mod_op in &and_gate.inputs {
            let mod_gate = match mod_op {
                Operand::Gate(g) => {
                    let node = &c.nodes()[g as usize];
                    match node.kind {
                        GateKind::Mod { m } if m as u64 == p => node,
                        _ if operand_is_atom(c, mod_op) => continue,
                        _ => return Err(wrong("third layer must be MOD gates or literals".into())),
                    }
                }
                op if operand_is_atom(c, op) => continue,
                _ => return Err(wrong("third layer must be MOD gates or literals".into())),
            };
            mods_here += 1;
            s2 = s2.max(mod_gate.inputs.len());
            for &bot_op in &mod_gate.inputs {
                match bot_op {
                    Operand::Gate(g) if matches!(c.nodes()[g as usize].kind, GateKind::And) => {
                        let bot = &c.nodes()[g as usize];
                        for &lit in &bot.inputs {
                            if !operand_is_atom(c, lit) {
                                return Err(wrong(
                                    "bottom AND gates must read inputs or literals".into(),
                                ));
                            }
                        }
                        r = r.max(bot.inputs.len());
                    }
                    op if operand_is_atom(c, op) => {
                        r = r.max(1);
                    }
                    _ => return Err(wrong("fourth layer must be AND gates or literals".into())),
                }
            }
        }
        t = t.max(mods_here);
    }
    Ok(Depth4Shape {
        p,
        s1: top.inputs.len(),
        t,
        s2,
        r,
    })
}

/// Collapse a strict depth-4 MOD_p / AND / MOD_p / AND circuit to a depth-2
/// MOD_p of ANDs agreeing with it on every input. The emitted circuit has at
/// most `s1 * s2^(t(p-1))` AND gates counted with multiplicity, each of
/// fan-in at most `r * t * (p-1)`.
pub fn ah_collapse(c: &Circuit, caps: &Caps) -> Result<Circuit> {
    let shape = validate_depth4_shape(c)?;
    let poly = algebraize(c, shape.p, caps)?;
    emit_mod_of_ands(&poly, c.ninputs(), shape.p, caps)
}

/// The depth-2 probabilistic circuit for a generalized gate: the depth-5
/// construction with every alternating AND/MOD tower algebraically
/// collapsed, leaving one MOD_q over AND gates (plus input negations).
pub fn gk_depth2(g: &GkGate, q: u64, eps: f64, caps: &Caps) -> Result<ProbCircuitSampler> {
    let five = vv_gk_circuit(g, q, eps, caps)?;
    let poly = algebraize(&five.base, q, caps)?;
    let collapsed = emit_mod_of_ands(&poly, five.base.ninputs(), q, caps)?;
    let profile = layer_profile(&collapsed);
    Ok(ProbCircuitSampler {
        base: collapsed,
        n: five.n,
        rand_bits: five.rand_bits,
        error: five.error,
        profile,
        params: five.params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::TruthTable;
    use crate::gen::{random_gk, random_shaped_depth4, ShapedDepth4Spec};

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn detector_is_one_on_ball_and_quarter_zero_above() {
        let params = VvParams::new(8, 1, 3, 0.05, &caps()).unwrap();
        assert_eq!(params.m, 5); // binom(8,2)=28, floor(log2)=4
        let trials = 3000u64;
        // On the ball the single copy is 1 for every tape.
        for seed in 0..50 {
            let tape = params.draw_tape(seed);
            let ws = &params.hash_vectors(&tape)[0];
            let surv = params.survival(ws);
            for &x in &[0u64, 1, 2, 128] {
                assert!(params.copy_output(x, &surv));
            }
        }
        // Above the ball a single copy is 0 with probability >= 1/4 - slack.
        for &x in &[0b11u64, 0b111, 0b1111_1111] {
            let mut zeros = 0u64;
            for seed in 0..trials {
                let tape = params.draw_tape(seed);
                let ws = &params.hash_vectors(&tape)[0];
                if !params.copy_output(x, &params.survival(ws)) {
                    zeros += 1;
                }
            }
            let freq = zeros as f64 / trials as f64;
            let sigma = (0.25 * 0.75 / trials as f64).sqrt();
            assert!(freq >= 0.25 - 3.0 * sigma, "x={x:b} freq={freq}");
        }
    }

    #[test]
    fn isolation_statistic() {
        // Empirical restatement of the isolation guarantee: for the family
        // induced by any |x| > k, some level has exactly one survivor with
        // probability at least 1/4 (the constant the detector analysis
        // rests on). Measured frequencies run well above it but below 3/4
        // for large families, e.g. ~0.38 for the 28-subset family.
        let params = VvParams::new(8, 1, 3, 0.5, &caps()).unwrap();
        let trials = 4000u64;
        for &x in &[0b11u64, 0b11111, 0xff] {
            let live: Vec<usize> = (0..params.subsets.len())
                .filter(|&si| params.subsets[si] & !x == 0)
                .collect();
            assert!(!live.is_empty());
            let mut isolated = 0u64;
            for seed in 0..trials {
                let tape = params.draw_tape(seed);
                let ws = &params.hash_vectors(&tape)[0];
                let surv = params.survival(ws);
                let hit =
                    (0..=params.m).any(|l| live.iter().filter(|&&si| surv[si] >= l).count() == 1);
                if hit {
                    isolated += 1;
                }
            }
            let freq = isolated as f64 / trials as f64;
            let sigma = (0.25 * 0.75 / trials as f64).sqrt();
            assert!(freq >= 0.25 - 3.0 * sigma, "x={x:b} freq={freq}");
        }
    }

    #[test]
    fn vv_circuit_exact_on_ball_and_bounded_error_above() {
        let mut rng = CounterRng::new(99);
        for &(n, k, q) in &[(6u32, 1u32, 3u64), (5, 2, 2)] {
            let g = random_gk(n, k, &mut rng);
            let eps = 0.2;
            let sampler = vv_gk_circuit(&g, q, eps, &caps()).unwrap();
            assert_eq!(
                sampler.rand_bits,
                sampler.params.copies * sampler.params.m * sampler.params.m
            );
            let seeds = 300u64;
            for x in 0..1u64 << n {
                let xb: Vec<bool> = (0..n).map(|i| x >> i & 1 == 1).collect();
                let mut wrong = 0u64;
                for seed in 0..seeds {
                    let out = sampler.eval_seeded(&xb, seed).unwrap()[0];
                    if out != g.eval_mask(x) {
                        wrong += 1;
                    }
                }
                if x.count_ones() <= k {
                    assert_eq!(wrong, 0, "ball point {x:b} must be exact");
                } else {
                    let freq = wrong as f64 / seeds as f64;
                    let sigma = (eps * (1.0 - eps) / seeds as f64).sqrt();
                    assert!(freq <= eps + 4.0 * sigma, "n={n} x={x:b} err={freq}");
                }
            }
        }
    }

    #[test]
    fn vv_circuit_matches_fast_detector_path() {
        let mut rng = CounterRng::new(7);
        let g = random_gk(6, 1, &mut rng);
        // Force default-0 so the circuit is AND(C1, C2') without a wrapper;
        // then C2' alone equals the fast path.
        let g = GkGate::new(g.fanin, g.k, false, g.ball_table.clone()).unwrap();
        let sampler = vv_gk_circuit(&g, 3, 0.3, &caps()).unwrap();
        for seed in 0..40 {
            let tape = sampler.params.draw_tape(seed);
            let det = sampler.params.detector_outputs_cube(&tape).unwrap();
            let bound = sampler.bind(&tape);
            for x in 0..1u64 << 6 {
                let xb: Vec<bool> = (0..6).map(|i| x >> i & 1 == 1).collect();
                let out = bound.evaluate(&xb).unwrap()[0];
                // C1 is exact on the ball; above the ball output = C1 AND det.
                if x.count_ones() <= 1 {
                    assert_eq!(out, g.eval_mask(x));
                } else if !det[x as usize] {
                    assert!(!out);
                }
            }
        }
    }

    #[test]
    fn vv_layer_profile_alternates() {
        let mut rng = CounterRng::new(3);
        let g = random_gk(6, 1, &mut rng);
        let g = GkGate::new(6, 1, false, g.ball_table).unwrap();
        let sampler = vv_gk_circuit(&g, 3, 0.3, &caps()).unwrap();
        let kinds: Vec<Vec<String>> = sampler
            .profile
            .layers
            .iter()
            .map(|l| l.kinds.clone())
            .collect();
        assert_eq!(kinds.len(), 5);
        assert_eq!(kinds[0], vec!["AND"]);
        assert_eq!(kinds[1], vec!["MOD"]);
        assert_eq!(kinds[2], vec!["AND"]);
        assert_eq!(kinds[3], vec!["MOD"]);
        assert_eq!(kinds[4], vec!["AND"]);
    }

    #[test]
    fn ah_collapse_examples() {
        // s1=1, t=1, s2=2, r=2, p=2: at most 1*2^1 = 2 ANDs of fan-in <= 2.
        let mut rng = CounterRng::new(21);
        let spec = ShapedDepth4Spec {
            n: 4,
            p: 2,
            s1: 1,
            t: 1,
            s2: 2,
            r: 2,
        };
        let c = random_shaped_depth4(&spec, &mut rng);
        let shape = validate_depth4_shape(&c).unwrap();
        let collapsed = ah_collapse(&c, &caps()).unwrap();
        assert_eq!(
            collapsed.truth_table(0, &caps()).unwrap(),
            c.truth_table(0, &caps()).unwrap()
        );
        let (count, maxfan) = mod_of_ands_stats(&collapsed);
        assert!(count as u128 <= shape.and_count_bound());
        assert!(maxfan as u128 <= shape.fanin_bound().max(1));

        // Degenerate t=0: AND of nothing is constant 1.
        let mut c = Circuit::new(2);
        let a = c.push_gate(GateKind::And, vec![]).unwrap();
        let m = c
            .push_gate(GateKind::Mod { m: 2 }, vec![Operand::Gate(a)])
            .unwrap();
        c.set_outputs(vec![m]).unwrap();
        let collapsed = ah_collapse(&c, &caps()).unwrap();
        assert_eq!(
            collapsed.truth_table(0, &caps()).unwrap(),
            TruthTable::from_fn(2, |_| true)
        );
    }

    /// AND gates counted with the multiplicity of their MOD wires.
    fn mod_of_ands_stats(c: &Circuit) -> (usize, usize) {
        let top = &c.nodes()[c.outputs()[0] as usize];
        assert!(matches!(top.kind, GateKind::Mod { .. }));
        let count = top.inputs.len();
        let maxfan = c
            .nodes()
            .iter()
            .filter(|n| matches!(n.kind, GateKind::And))
            .map(|n| n.inputs.len())
            .max()
            .unwrap_or(0);
        (count, maxfan)
    }

    #[test]
    fn ah_collapse_random_instances() {
        let mut rng = CounterRng::new(2025);
        for trial in 0..60 {
            let p = if trial % 2 == 0 { 2 } else { 3 };
            let spec = ShapedDepth4Spec {
                n: 4 + (trial % 5) as u32,
                p,
                s1: 1 + rng.next_below(3) as u32,
                t: 1 + rng.next_below(2) as u32,
                s2: 1 + rng.next_below(3) as u32,
                r: 1 + rng.next_below(3) as u32,
            };
            let c = random_shaped_depth4(&spec, &mut rng);
            let shape = validate_depth4_shape(&c).unwrap();
            let collapsed = ah_collapse(&c, &caps()).unwrap();
            assert_eq!(
                collapsed.truth_table(0, &caps()).unwrap(),
                c.truth_table(0, &caps()).unwrap(),
                "trial {trial}"
            );
            let (count, maxfan) = mod_of_ands_stats(&collapsed);
            assert!(count as u128 <= shape.and_count_bound());
            assert!(maxfan as u128 <= shape.fanin_bound().max(1));
        }
    }

    #[test]
    fn ah_collapse_rejects_wrong_shape() {
        let mut c = Circuit::new(2);
        let o = c
            .push_gate(GateKind::Or, vec![Operand::Input(1), Operand::Input(2)])
            .unwrap();
        c.set_outputs(vec![o]).unwrap();
        assert!(matches!(ah_collapse(&c, &caps()), Err(Error::Input(_))));
    }

    #[test]
    fn gk_depth2_shape_and_equivalence() {
        let mut rng = CounterRng::new(31);
        // The explicit depth-2 construction is exponential in the number of
        // detector copies, so only micro parameters stay within caps. The
        // k = 0 entries use NOR (ball value 1, default 0) and OR (ball value
        // 0, default 1); the latter exercises the negation wrapper.
        let nor = GkGate::new(5, 0, false, vec![true]).unwrap();
        let or = GkGate::new(5, 0, true, vec![false]).unwrap();
        let cases: Vec<(GkGate, u64, f64)> = vec![
            (random_gk(4, 1, &mut rng), 2, 0.4),
            (random_gk(4, 1, &mut rng), 3, 0.6),
            (nor, 3, 0.6),
            (or, 3, 0.6),
        ];
        for (g, q, eps) in cases {
            let (n, k) = (g.fanin, g.k);
            let five = vv_gk_circuit(&g, q, eps, &caps()).unwrap();
            let two = match gk_depth2(&g, q, eps, &caps()) {
                Ok(t) => t,
                Err(Error::Resource(m)) => panic!("cap hit at n={n} k={k} q={q}: {m}"),
                Err(e) => panic!("{e}"),
            };
            // Shape: exactly one MOD top gate, every other non-NOT gate AND.
            let top = &two.base.nodes()[two.base.outputs()[0] as usize];
            assert!(matches!(top.kind, GateKind::Mod { .. }));
            for node in two.base.nodes() {
                assert!(matches!(
                    node.kind,
                    GateKind::And | GateKind::Not | GateKind::Mod { .. }
                ));
            }
            let mods = two
                .base
                .nodes()
                .iter()
                .filter(|n| matches!(n.kind, GateKind::Mod { .. }))
                .count();
            assert_eq!(mods, 1);
            // Per-seed equivalence with the depth-5 circuit on all inputs.
            for seed in 0..8 {
                let tape = five.params.draw_tape(seed);
                let a = five.bind(&tape);
                let b = two.bind(&tape);
                for x in 0..1u64 << n {
                    let xb: Vec<bool> = (0..n).map(|i| x >> i & 1 == 1).collect();
                    assert_eq!(
                        a.evaluate(&xb).unwrap(),
                        b.evaluate(&xb).unwrap(),
                        "n={n} k={k} q={q} seed={seed} x={x:b}"
                    );
                }
            }
        }
    }

    #[test]
    fn gk_depth2_reads_as_field_polynomial() {
        // Convert the collapsed MOD-of-ANDs to a field polynomial and
        // compare evaluations against the drawn circuit.
        let mut rng = CounterRng::new(8);
        let g = random_gk(4, 1, &mut rng);
        let q = 3u64;
        let two = gk_depth2(&g, q, 0.6, &caps()).unwrap();
        for seed in 0..5 {
            let drawn = two.draw(seed);
            let poly = mod_of_ands_to_poly(&drawn, q).unwrap();
            for x in 0..1u64 << 4 {
                let xb: Vec<bool> = (0..4).map(|i| x >> i & 1 == 1).collect();
                let want = drawn.evaluate(&xb).unwrap()[0] as u64;
                assert_eq!(poly.eval_mask(x), want);
            }
        }
    }

    /// Read a MOD-of-ANDs circuit as the field polynomial (sum of monomial
    /// products raised to q-1).
    fn mod_of_ands_to_poly(c: &Circuit, q: u64) -> Result<crate::poly::FieldPoly> {
        use crate::poly::FieldPoly;
        let n = c.ninputs();
        let top = &c.nodes()[c.outputs()[0] as usize];
        let mut sum = FieldPoly::zero(q, n)?;
        for &op in &top.inputs {
            let term = match op {
                Operand::Const(b) => FieldPoly::constant(q, n, b as u64)?,
                Operand::Input(v) => FieldPoly::var(q, n, v)?,
                Operand::Gate(gi) => {
                    let node = &c.nodes()[gi as usize];
                    let mut prod = FieldPoly::constant(q, n, 1)?;
                    for &lit in &node.inputs {
                        let f = match lit {
                            Operand::Input(v) => FieldPoly::var(q, n, v)?,
                            Operand::Const(b) => FieldPoly::constant(q, n, b as u64)?,
                            Operand::Gate(ng) => {
                                let inner = &c.nodes()[ng as usize];
                                assert!(matches!(inner.kind, GateKind::Not));
                                match inner.inputs[0] {
                                    Operand::Input(v) => FieldPoly::constant(q, n, 1)?
                                        .sub(&FieldPoly::var(q, n, v)?)?,
                                    Operand::Const(b) => FieldPoly::constant(q, n, !b as u64)?,
                                    _ => unreachable!("negations wrap inputs or constants"),
                                }
                            }
                        };
                        prod = prod.mul(&f)?;
                    }
                    prod
                }
            };
            sum = sum.add(&term)?;
        }
        Ok(sum.pow_fermat())
    }
}
