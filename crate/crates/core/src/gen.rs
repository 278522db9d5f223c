//! Seeded random instance generators used by experiments and tests.

use crate::ball::binom_le;
use crate::circuit::{Circuit, GateKind, GkGate, Operand};
use crate::rng::CounterRng;
use crate::symsat::SymPlusCircuit;

/// Uniformly random generalized gate: random ball table, random default.
pub fn random_gk(fanin: u32, k: u32, rng: &mut CounterRng) -> GkGate {
    let size = binom_le(fanin as u64, k.min(fanin) as u64) as usize;
    let table: Vec<bool> = (0..size).map(|_| rng.next_bool()).collect();
    let default = rng.next_bool();
    GkGate::new(fanin, k, default, table).expect("table sized to fan-in")
}

/// Shape of a random layered circuit over AND/OR/NOT/MOD_q/GK(k).
#[derive(Debug, Clone)]
pub struct RandomCircuitSpec {
    pub n: u32,
    pub k: u32,
    pub q: u32,
    pub depth: u32,
    /// Gates per internal layer.
    pub width: u32,
}

/// Random single-output layered circuit in the class the SAT pipeline
/// accepts. Every layer wires from inputs and all earlier layers.
pub fn random_gc0_circuit(spec: &RandomCircuitSpec, rng: &mut CounterRng) -> Circuit {
    let mut c = Circuit::new(spec.n);
    let mut pool: Vec<Operand> = (1..=spec.n).map(Operand::Input).collect();
    let mut last = None;
    for layer in 0..spec.depth {
        let width = if layer + 1 == spec.depth {
            1
        } else {
            spec.width
        };
        let mut new_ops = Vec::new();
        for _ in 0..width {
            let fanin = 2 + rng.next_below(3) as usize;
            let mut inputs = Vec::with_capacity(fanin);
            for _ in 0..fanin {
                inputs.push(pool[rng.next_below(pool.len() as u64) as usize]);
            }
            let kind = match rng.next_below(5) {
                0 => GateKind::And,
                1 => GateKind::Or,
                2 => GateKind::Mod { m: spec.q },
                3 => {
                    let f = inputs.len() as u32;
                    let k = spec.k.min(f);
                    let size = binom_le(f as u64, k as u64) as usize;
                    GateKind::Gk {
                        k,
                        default: rng.next_bool(),
                        ball_table: (0..size).map(|_| rng.next_bool()).collect(),
                    }
                }
                _ => {
                    // A NOT over a random operand, then keep going with an
                    // AND so the layer width stays as planned.
                    let target = inputs[0];
                    let ni = c
                        .push_gate(GateKind::Not, vec![target])
                        .expect("backward ref");
                    inputs[0] = Operand::Gate(ni);
                    GateKind::And
                }
            };
            let g = c.push_gate(kind, inputs).expect("backward ref");
            new_ops.push(Operand::Gate(g));
            last = Some(g);
        }
        pool.extend(new_ops);
    }
    c.set_outputs(vec![last.expect("at least one layer")])
        .expect("node exists");
    c
}

/// Layer shape for the depth-4 collapse input: one MOD_p over ANDs over
/// MOD_ps over ANDs of input literals.
#[derive(Debug, Clone, Copy)]
pub struct ShapedDepth4Spec {
    pub n: u32,
    pub p: u32,
    /// Top MOD fan-in.
    pub s1: u32,
    /// Middle AND fan-in.
    pub t: u32,
    /// Inner MOD fan-in.
    pub s2: u32,
    /// Bottom AND fan-in.
    pub r: u32,
}

/// Random strictly-shaped depth-4 instance.
pub fn random_shaped_depth4(spec: &ShapedDepth4Spec, rng: &mut CounterRng) -> Circuit {
    let mut c = Circuit::new(spec.n);
    let mut negs: Vec<Option<u32>> = vec![None; spec.n as usize];
    let mut top_ops = Vec::new();
    for _ in 0..spec.s1 {
        let mut and_ops = Vec::new();
        for _ in 0..spec.t {
            let mut mod_ops = Vec::new();
            for _ in 0..spec.s2 {
                let mut lits = Vec::new();
                for _ in 0..spec.r {
                    let v = rng.next_below(spec.n as u64) as usize;
                    if rng.next_bool() {
                        lits.push(Operand::Input(v as u32 + 1));
                    } else {
                        let ni = match negs[v] {
                            Some(g) => g,
                            None => {
                                let g = c
                                    .push_gate(GateKind::Not, vec![Operand::Input(v as u32 + 1)])
                                    .expect("backward ref");
                                negs[v] = Some(g);
                                g
                            }
                        };
                        lits.push(Operand::Gate(ni));
                    }
                }
                let a = c.push_gate(GateKind::And, lits).expect("backward ref");
                mod_ops.push(Operand::Gate(a));
            }
            let m = c
                .push_gate(GateKind::Mod { m: spec.p }, mod_ops)
                .expect("backward ref");
            and_ops.push(Operand::Gate(m));
        }
        let a = c.push_gate(GateKind::And, and_ops).expect("backward ref");
        top_ops.push(Operand::Gate(a));
    }
    let top = c
        .push_gate(GateKind::Mod { m: spec.p }, top_ops)
        .expect("backward ref");
    c.set_outputs(vec![top]).expect("node exists");
    c
}

/// Random symmetric-top circuit: AND monomials with multiplicities plus a
/// random symmetric table.
pub fn random_symplus(nvars: u32, ngates: usize, rng: &mut CounterRng) -> SymPlusCircuit {
    let mut gates = Vec::with_capacity(ngates);
    let mut total = 0u32;
    for _ in 0..ngates {
        let mask = rng.next_u64() & ((1u64 << nvars) - 1);
        let mult = 1 + rng.next_below(3) as u32;
        total += mult;
        gates.push((crate::poly::Monomial::from_mask(mask), mult));
    }
    let sym: Vec<bool> = (0..=total).map(|_| rng.next_bool()).collect();
    SymPlusCircuit::new(nvars, gates, sym).expect("table sized to gate count")
}
