//! Probabilistic polynomials: seedable distributions over proper
//! polynomials approximating a gate or circuit pointwise.
//!
//! A sampler is an immutable description; drawing with a caller-supplied
//! seed is pure, so independent workers drawing distinct seeds are
//! deterministic and merge-order independent.

use serde::Serialize;

use crate::ball::ball_points;
use crate::circuit::{Circuit, GateKind, GkGate, Operand, TruthTable};
use crate::depthred::VvParams;
use crate::error::{Caps, Error, Result};
use crate::field::PrimeField;
use crate::poly::{interpolate_ball, FieldPoly};
use crate::rng::CounterRng;

/// Seedable distribution over proper polynomials.
pub trait PolySampler {
    fn nvars(&self) -> u32;
    fn modulus(&self) -> u64;
    /// Declared degree bound; every drawn sample stays at or below it.
    fn degree_bound(&self) -> u32;
    /// Declared per-point error bound.
    fn error_bound(&self) -> f64;
    fn draw(&self, seed: u64) -> Result<FieldPoly>;
    /// Values of the drawn sample on the whole cube; equal to
    /// `draw(seed)?.values_on_cube()` but usually much cheaper.
    fn draw_values(&self, seed: u64) -> Result<Vec<u64>> {
        self.draw(seed)?.values_on_cube()
    }
}

/// A deterministic polynomial as a (point-mass) sampler.
pub struct DeterministicSampler(pub FieldPoly);

impl PolySampler for DeterministicSampler {
    fn nvars(&self) -> u32 {
        self.0.nvars()
    }
    fn modulus(&self) -> u64 {
        self.0.modulus()
    }
    fn degree_bound(&self) -> u32 {
        self.0.degree()
    }
    fn error_bound(&self) -> f64 {
        0.0
    }
    fn draw(&self, _seed: u64) -> Result<FieldPoly> {
        Ok(self.0.clone())
    }
}

/// Smallest `t` with `q^-t <= eps`.
fn log_ceil(q: u64, eps: f64) -> u32 {
    let mut t = 0u32;
    let mut p = 1.0f64;
    while p > eps {
        p /= q as f64;
        t += 1;
    }
    t
}

/// OR sampler: `P(x) = 1 - prod_j (1 - L_j(x)^(q-1))` over `t` uniformly
/// random linear forms. Exact on the all-zero input (one-sided), per-point
/// error at most `q^-t <= eps`, degree `t (q-1)`.
pub struct OrPolySampler {
    pub n: u32,
    pub q: u64,
    pub eps: f64,
    pub t: u32,
}

pub fn or_poly_sampler(n: u32, q: u64, eps: f64) -> Result<OrPolySampler> {
    PrimeField::new(q)?;
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(Error::Input(format!("error target {eps} outside (0,1)")));
    }
    Ok(OrPolySampler {
        n,
        q,
        eps,
        t: log_ceil(q, eps),
    })
}

impl OrPolySampler {
    /// The random form coefficients for a draw: `t` rows of `n` field
    /// elements.
    pub fn coefficients(&self, seed: u64) -> Vec<Vec<u64>> {
        let mut rng = CounterRng::new(seed);
        (0..self.t)
            .map(|_| (0..self.n).map(|_| rng.next_below(self.q)).collect())
            .collect()
    }
}

impl PolySampler for OrPolySampler {
    fn nvars(&self) -> u32 {
        self.n
    }
    fn modulus(&self) -> u64 {
        self.q
    }
    fn degree_bound(&self) -> u32 {
        self.t * (self.q - 1) as u32
    }
    fn error_bound(&self) -> f64 {
        self.eps
    }

    fn draw(&self, seed: u64) -> Result<FieldPoly> {
        let rows = self.coefficients(seed);
        let one = FieldPoly::constant(self.q, self.n, 1)?;
        let mut prod = one.clone();
        for row in &rows {
            let mut form = FieldPoly::zero(self.q, self.n)?;
            for (i, &c) in row.iter().enumerate() {
                form.add_term(crate::poly::Monomial::var(i as u32 + 1), c);
            }
            prod = prod.mul(&one.sub(&form.pow_fermat())?)?;
        }
        one.sub(&prod)
    }

    fn draw_values(&self, seed: u64) -> Result<Vec<u64>> {
        if self.n > 26 {
            return Err(Error::Resource("cube sweep refused".into()));
        }
        let field = PrimeField::new(self.q)?;
        let rows = self.coefficients(seed);
        let size = 1usize << self.n;
        // prod[x] = prod_j [L_j(x) = 0]; L values via a subset-sum pass.
        let mut keep = vec![1u8; size];
        for row in &rows {
            let mut vals = vec![0u64; size];
            for (i, &c) in row.iter().enumerate() {
                vals[1 << i] = c;
            }
            for i in 0..self.n {
                let bit = 1usize << i;
                for x in 0..size {
                    if x & bit != 0 {
                        vals[x] = field.add(vals[x], vals[x ^ bit]);
                    }
                }
            }
            for x in 0..size {
                if vals[x] != 0 {
                    keep[x] = 0;
                }
            }
        }
        Ok(keep.iter().map(|&k| 1 - k as u64).collect())
    }
}

/// Pluggable supplier of probabilistic polynomials for the weight-threshold
/// predicate `[|x| > k]`.
pub trait ThrSource {
    fn n(&self) -> u32;
    fn k(&self) -> u32;
    fn modulus(&self) -> u64;
    fn error(&self) -> f64;
    /// Exact 0 on the ball with probability 1.
    fn one_sided(&self) -> bool;
    fn degree_bound(&self) -> u32;
    fn draw(&self, seed: u64) -> Result<FieldPoly>;
    fn draw_values(&self, seed: u64) -> Result<Vec<u64>>;
}

/// Threshold source backed by the isolation detector: `Q = 1 - C2'` where
/// `C2'` is the amplified detector polynomial. One-sided (exactly 0 on the
/// ball), error `eps` above it.
pub struct DetectorThr {
    pub params: VvParams,
}

impl DetectorThr {
    pub fn new(n: u32, k: u32, q: u64, eps: f64, caps: &Caps) -> Result<DetectorThr> {
        Ok(DetectorThr {
            params: VvParams::new(n, k, q, eps, caps)?,
        })
    }
}

impl ThrSource for DetectorThr {
    fn n(&self) -> u32 {
        self.params.n
    }
    fn k(&self) -> u32 {
        self.params.k
    }
    fn modulus(&self) -> u64 {
        self.params.q
    }
    fn error(&self) -> f64 {
        self.params.eps
    }
    fn one_sided(&self) -> bool {
        true
    }
    fn degree_bound(&self) -> u32 {
        // Each level predicate has degree (k+1)(q-1); a copy multiplies
        // m+1 of them, and the amplification multiplies the copies.
        (self.params.k + 1)
            * (self.params.q - 1) as u32
            * (self.params.m + 1)
            * self.params.copies.max(1)
    }

    fn draw(&self, seed: u64) -> Result<FieldPoly> {
        let p = &self.params;
        let q = p.q;
        let one = FieldPoly::constant(q, p.n, 1)?;
        if p.m == 0 {
            // No heavy subsets: THR is identically 0.
            return FieldPoly::zero(q, p.n);
        }
        let tape = p.draw_tape(seed);
        let mut c2 = one.clone();
        for ws in &p.hash_vectors(&tape) {
            let surv = p.survival(ws);
            for l in 0..=p.m {
                // D_l = (count_l - 1)^(q-1) with count_l the monomial sum of
                // the subsets surviving at least l levels.
                let mut count = FieldPoly::constant(q, p.n, q - 1)?; // -1
                for (si, &s) in p.subsets.iter().enumerate() {
                    if surv[si] >= l {
                        count.add_term(crate::poly::Monomial::from_mask(s), 1);
                    }
                }
                c2 = c2.mul(&count.pow_fermat())?;
            }
        }
        one.sub(&c2)
    }

    fn draw_values(&self, seed: u64) -> Result<Vec<u64>> {
        let tape = self.params.draw_tape(seed);
        let det = self.params.detector_outputs_cube(&tape)?;
        Ok(det.iter().map(|&d| 1 - d as u64).collect())
    }
}

/// Exact weight-threshold polynomial for tiny fan-in: the full-degree
/// multilinear interpolation of `[|x| > k]`. Deterministic baseline.
pub struct ExactThr {
    n: u32,
    k: u32,
    poly: FieldPoly,
}

impl ExactThr {
    pub fn new(n: u32, k: u32, q: u64) -> Result<ExactThr> {
        if n > 16 {
            return Err(Error::Resource(format!(
                "exact threshold on {n} inputs refused"
            )));
        }
        let values: Vec<u64> = (0..1u64 << n)
            .map(|x| (x.count_ones() > k) as u64)
            .collect();
        Ok(ExactThr {
            n,
            k,
            poly: FieldPoly::from_values_on_cube(q, n, &values)?,
        })
    }
}

impl ThrSource for ExactThr {
    fn n(&self) -> u32 {
        self.n
    }
    fn k(&self) -> u32 {
        self.k
    }
    fn modulus(&self) -> u64 {
        self.poly.modulus()
    }
    fn error(&self) -> f64 {
        0.0
    }
    fn one_sided(&self) -> bool {
        true
    }
    fn degree_bound(&self) -> u32 {
        self.poly.degree()
    }
    fn draw(&self, _seed: u64) -> Result<FieldPoly> {
        Ok(self.poly.clone())
    }
    fn draw_values(&self, _seed: u64) -> Result<Vec<u64>> {
        self.poly.values_on_cube()
    }
}

/// Probabilistic polynomial for a generalized gate: with `p` interpolating
/// `f - c` on the ball and `Q` drawn from the threshold source, each sample
/// is `(p (1 - Q) + c)^(q-1)`. With a one-sided source the sample equals the
/// gate on every ball point with probability 1.
pub struct GkPolySampler {
    pub gate: GkGate,
    pub q: u64,
    pub eps: f64,
    thr: Box<dyn ThrSource>,
    p: FieldPoly,
    p_values: Vec<u64>,
    c: u64,
}

pub fn gk_poly_sampler(
    gate: &GkGate,
    q: u64,
    eps: f64,
    thr: Box<dyn ThrSource>,
    caps: &Caps,
) -> Result<GkPolySampler> {
    if thr.n() != gate.fanin || thr.k() != gate.k || thr.modulus() != q {
        return Err(Error::Input(
            "threshold source does not match the gate".into(),
        ));
    }
    if thr.error() > eps {
        return Err(Error::Input(format!(
            "threshold source error {} exceeds budget {eps}",
            thr.error()
        )));
    }
    let field = PrimeField::new(q)?;
    let c = gate.default as u64;
    let truth: Vec<u64> = gate
        .ball_table
        .iter()
        .map(|&b| field.sub(b as u64, c))
        .collect();
    let p = interpolate_ball(
        &truth,
        gate.fanin,
        gate.k.min(gate.fanin),
        q,
        caps.max_ball_entries,
    )?;
    let p_values = if gate.fanin <= 24 {
        p.values_on_cube()?
    } else {
        Vec::new()
    };
    Ok(GkPolySampler {
        gate: gate.clone(),
        q,
        eps,
        thr,
        p,
        p_values,
        c,
    })
}

impl GkPolySampler {
    pub fn interpolation(&self) -> &FieldPoly {
        &self.p
    }
    pub fn thr(&self) -> &dyn ThrSource {
        self.thr.as_ref()
    }
}

impl PolySampler for GkPolySampler {
    fn nvars(&self) -> u32 {
        self.gate.fanin
    }
    fn modulus(&self) -> u64 {
        self.q
    }
    fn degree_bound(&self) -> u32 {
        (self.gate.k.min(self.gate.fanin) + self.thr.degree_bound()) * (self.q - 1) as u32
    }
    fn error_bound(&self) -> f64 {
        self.eps
    }

    fn draw(&self, seed: u64) -> Result<FieldPoly> {
        let q_poly = self.thr.draw(seed)?;
        let one = FieldPoly::constant(self.q, self.gate.fanin, 1)?;
        let body = self.p.mul(&one.sub(&q_poly)?)?.add(&FieldPoly::constant(
            self.q,
            self.gate.fanin,
            self.c,
        )?)?;
        Ok(body.pow_fermat())
    }

    fn draw_values(&self, seed: u64) -> Result<Vec<u64>> {
        let field = PrimeField::new(self.q)?;
        let qv = self.thr.draw_values(seed)?;
        if self.p_values.is_empty() {
            return Err(Error::Resource(
                "gate fan-in too large for cube sweep".into(),
            ));
        }
        Ok(self
            .p_values
            .iter()
            .zip(&qv)
            .map(|(&pv, &q1)| {
                let body = field.add(field.mul(pv, field.sub(1, q1)), self.c);
                field.fermat(body)
            })
            .collect())
    }
}

/// Which threshold source the circuit sampler builds for its generalized
/// gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThrKind {
    Detector,
    Exact,
}

enum GatePlan {
    /// Exact local polynomial (NOT, MOD_q), consumes no error budget.
    Deterministic(FieldPoly),
    /// OR of the fan-in, or AND via De Morgan.
    OrLike {
        sampler: OrPolySampler,
        demorgan: bool,
    },
    Gk(GkPolySampler),
}

impl GatePlan {
    fn degree_bound(&self) -> u32 {
        match self {
            GatePlan::Deterministic(p) => p.degree().max(1),
            GatePlan::OrLike { sampler, .. } => sampler.degree_bound().max(1),
            GatePlan::Gk(s) => s.degree_bound().max(1),
        }
    }
}

/// Whole-circuit sampler: per-gate samplers composed along the circuit
/// structure. Gates strictly below the top get error budget `eps / (2 size)`
/// each and the top gate gets `eps / 2`; deterministic gates consume none.
pub struct CircuitPolySampler {
    circuit: Circuit,
    q: u64,
    eps: f64,
    plans: Vec<GatePlan>,
    degree: u32,
}

pub fn circuit_poly_sampler(
    circuit: &Circuit,
    q: u64,
    eps: f64,
    thr_kind: ThrKind,
    caps: &Caps,
) -> Result<CircuitPolySampler> {
    if circuit.outputs().len() != 1 {
        return Err(Error::Input(
            "circuit sampler expects a single output".into(),
        ));
    }
    PrimeField::new(q)?;
    let size = circuit.size().max(1);
    let top = circuit.outputs()[0];
    let mut plans = Vec::with_capacity(circuit.nodes().len());
    for (i, node) in circuit.nodes().iter().enumerate() {
        let fanin = node.inputs.len() as u32;
        let budget = if i as u32 == top {
            eps / 2.0
        } else {
            eps / (2.0 * size as f64)
        };
        let plan = match &node.kind {
            GateKind::Not => {
                let one = FieldPoly::constant(q, 1, 1)?;
                GatePlan::Deterministic(one.sub(&FieldPoly::var(q, 1, 1)?)?)
            }
            GateKind::Mod { m } => {
                if *m as u64 != q {
                    return Err(Error::Unsupported(format!(
                        "MOD_{m} gate in an F_{q} approximation"
                    )));
                }
                let mut sum = FieldPoly::zero(q, fanin)?;
                for v in 1..=fanin {
                    sum.add_term(crate::poly::Monomial::var(v), 1);
                }
                GatePlan::Deterministic(sum.pow_fermat())
            }
            GateKind::Or => GatePlan::OrLike {
                sampler: or_poly_sampler(fanin, q, budget)?,
                demorgan: false,
            },
            GateKind::And => GatePlan::OrLike {
                sampler: or_poly_sampler(fanin, q, budget)?,
                demorgan: true,
            },
            GateKind::Gk {
                k,
                default,
                ball_table,
            } => {
                let gate = GkGate::new(fanin, *k, *default, ball_table.clone())?;
                let thr: Box<dyn ThrSource> = match thr_kind {
                    ThrKind::Detector => Box::new(DetectorThr::new(fanin, *k, q, budget, caps)?),
                    ThrKind::Exact => Box::new(ExactThr::new(fanin, *k, q)?),
                };
                GatePlan::Gk(gk_poly_sampler(&gate, q, budget, thr, caps)?)
            }
            other => {
                return Err(Error::Unsupported(format!(
                    "{} gate has no polynomial plan",
                    other.name()
                )))
            }
        };
        plans.push(plan);
    }
    // Degree bound: product of per-gate bounds along any path.
    let mut bound = vec![1u64; circuit.nodes().len()];
    for (i, node) in circuit.nodes().iter().enumerate() {
        let child = node
            .inputs
            .iter()
            .map(|op| match *op {
                Operand::Gate(g) => bound[g as usize],
                _ => 1,
            })
            .max()
            .unwrap_or(1);
        bound[i] = (plans[i].degree_bound() as u64).saturating_mul(child);
    }
    let degree = bound[top as usize].min(u32::MAX as u64) as u32;
    Ok(CircuitPolySampler {
        circuit: circuit.clone(),
        q,
        eps,
        plans,
        degree,
    })
}

impl CircuitPolySampler {
    /// Per-gate local samples (value tables over each gate's own cube).
    /// Gate `i` draws from `seed` split by its index.
    fn local_tables(&self, seed: u64) -> Result<Vec<Vec<u64>>> {
        let root = CounterRng::new(seed);
        let mut out = Vec::with_capacity(self.plans.len());
        for (i, plan) in self.plans.iter().enumerate() {
            let gate_seed = root.split(i as u64).next_u64();
            let fanin = self.circuit.nodes()[i].inputs.len() as u32;
            if fanin > 20 {
                return Err(Error::Resource(format!("gate fan-in {fanin} too large")));
            }
            let table = match plan {
                GatePlan::Deterministic(p) => p.values_on_cube()?,
                GatePlan::OrLike { sampler, demorgan } => {
                    let vals = sampler.draw_values(gate_seed)?;
                    if *demorgan {
                        // AND(y) = 1 - OR(1 - y): complement inputs and output.
                        let size = 1usize << fanin;
                        (0..size).map(|x| 1 - vals[size - 1 - x]).collect()
                    } else {
                        vals
                    }
                }
                GatePlan::Gk(s) => s.draw_values(gate_seed)?,
            };
            out.push(table);
        }
        Ok(out)
    }

    /// Per-gate local correctness flags at input point `x`, plus the composed
    /// sample value there. If every flag is set the sample equals the
    /// circuit at `x`.
    pub fn draw_trace(&self, seed: u64, x: u64) -> Result<(u64, Vec<bool>)> {
        let tables = self.local_tables(seed)?;
        let xb: Vec<bool> = (0..self.circuit.ninputs())
            .map(|i| x >> i & 1 == 1)
            .collect();
        let true_vals = self.circuit.eval_nodes(&xb)?;
        let mut sampled = vec![0u64; self.plans.len()];
        let mut flags = Vec::with_capacity(self.plans.len());
        for (i, node) in self.circuit.nodes().iter().enumerate() {
            let mut true_idx = 0u64;
            let mut samp_idx = 0u64;
            for (j, &op) in node.inputs.iter().enumerate() {
                let (tv, sv) = match op {
                    Operand::Input(v) => (xb[(v - 1) as usize] as u64, xb[(v - 1) as usize] as u64),
                    Operand::Const(b) => (b as u64, b as u64),
                    Operand::Gate(g) => (true_vals[g as usize] as u64, sampled[g as usize]),
                };
                true_idx |= tv << j;
                samp_idx |= (sv & 1) << j;
            }
            sampled[i] = tables[i][samp_idx as usize];
            // Local correctness: the gate's sample agrees with the gate on
            // the gate's true input pattern.
            let local = tables[i][true_idx as usize] == true_vals[i] as u64;
            flags.push(local);
        }
        Ok((sampled[self.circuit.outputs()[0] as usize], flags))
    }
}

impl PolySampler for CircuitPolySampler {
    fn nvars(&self) -> u32 {
        self.circuit.ninputs()
    }
    fn modulus(&self) -> u64 {
        self.q
    }
    fn degree_bound(&self) -> u32 {
        self.degree
    }
    fn error_bound(&self) -> f64 {
        self.eps
    }

    fn draw(&self, seed: u64) -> Result<FieldPoly> {
        let root = CounterRng::new(seed);
        let n = self.circuit.ninputs();
        let mut polys: Vec<FieldPoly> = Vec::with_capacity(self.plans.len());
        for (i, plan) in self.plans.iter().enumerate() {
            let gate_seed = root.split(i as u64).next_u64();
            let local = match plan {
                GatePlan::Deterministic(p) => p.clone(),
                GatePlan::OrLike { sampler, demorgan } => {
                    let p = sampler.draw(gate_seed)?;
                    if *demorgan {
                        // 1 - P(1-y_1, ..., 1-y_f)
                        let f = sampler.n;
                        let one = FieldPoly::constant(self.q, f, 1)?;
                        let args: Vec<FieldPoly> = (1..=f)
                            .map(|v| one.sub(&FieldPoly::var(self.q, f, v)?))
                            .collect::<Result<_>>()?;
                        one.sub(&p.compose(&args)?)?
                    } else {
                        p
                    }
                }
                GatePlan::Gk(s) => s.draw(gate_seed)?,
            };
            // Substitute child polynomials.
            let args: Vec<FieldPoly> = self.circuit.nodes()[i]
                .inputs
                .iter()
                .map(|&op| match op {
                    Operand::Input(v) => FieldPoly::var(self.q, n, v),
                    Operand::Const(b) => FieldPoly::constant(self.q, n, b as u64),
                    Operand::Gate(g) => Ok(polys[g as usize].clone()),
                })
                .collect::<Result<_>>()?;
            polys.push(local.compose(&args)?);
        }
        Ok(polys[self.circuit.outputs()[0] as usize].clone())
    }

    fn draw_values(&self, seed: u64) -> Result<Vec<u64>> {
        let n = self.circuit.ninputs();
        if n > 24 {
            return Err(Error::Resource("cube sweep refused".into()));
        }
        let tables = self.local_tables(seed)?;
        let size = 1usize << n;
        let mut vals: Vec<Vec<u64>> = Vec::with_capacity(self.plans.len());
        for (i, node) in self.circuit.nodes().iter().enumerate() {
            let mut v = vec![0u64; size];
            for (x, slot) in v.iter_mut().enumerate() {
                let mut idx = 0u64;
                for (j, &op) in node.inputs.iter().enumerate() {
                    let b = match op {
                        Operand::Input(vi) => (x >> (vi - 1)) as u64 & 1,
                        Operand::Const(b) => b as u64,
                        Operand::Gate(g) => vals[g as usize][x],
                    };
                    idx |= (b & 1) << j;
                }
                *slot = tables[i][idx as usize];
            }
            vals.push(v);
        }
        Ok(vals[self.circuit.outputs()[0] as usize].clone())
    }
}

/// Which points an error estimate sweeps.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum PointSet {
    Exhaustive,
    Sampled(u32),
}

/// Empirical per-point error report with a Wilson 99% upper bound on the
/// worst point.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub target: String,
    pub q: u64,
    pub eps: f64,
    pub seeds: u64,
    pub points: usize,
    pub max_point_error: f64,
    pub wilson_hi: f64,
    pub avg_agreement: f64,
    pub worst_point: u64,
}

pub const Z99: f64 = 2.5758293035489004;

/// Wilson score upper bound.
pub fn wilson_upper(errors: u64, trials: u64, z: f64) -> f64 {
    if trials == 0 {
        return 1.0;
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    ((p + z2 / (2.0 * n) + z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()) / (1.0 + z2 / n))
        .min(1.0)
}

/// Estimate the sampler's pointwise error against a reference truth table.
pub fn estimate_pointwise_error(
    sampler: &dyn PolySampler,
    reference: &TruthTable,
    trials: u64,
    points: PointSet,
    seed: u64,
    target: &str,
) -> Result<ErrorReport> {
    if sampler.nvars() != reference.nvars() {
        return Err(Error::Input(
            "sampler and reference disagree on arity".into(),
        ));
    }
    let n = sampler.nvars();
    let point_list: Vec<u64> = match points {
        PointSet::Exhaustive => (0..1u64 << n).collect(),
        PointSet::Sampled(count) => {
            let mut rng = CounterRng::new(seed ^ 0x517c_c1b7_2722_0a95);
            (0..count).map(|_| rng.next_below(1 << n)).collect()
        }
    };
    let mut errors = vec![0u64; point_list.len()];
    let mut agree_total = 0u64;
    let root = CounterRng::new(seed);
    for t in 0..trials {
        let vals = sampler.draw_values(root.split(t).next_u64())?;
        for (pi, &x) in point_list.iter().enumerate() {
            let want = reference.get(x) as u64;
            if vals[x as usize] != want {
                errors[pi] += 1;
            } else {
                agree_total += 1;
            }
        }
    }
    let (worst_idx, &worst) = errors
        .iter()
        .enumerate()
        .max_by_key(|(_, &e)| e)
        .unwrap_or((0, &0));
    Ok(ErrorReport {
        target: target.to_string(),
        q: sampler.modulus(),
        eps: sampler.error_bound(),
        seeds: trials,
        points: point_list.len(),
        max_point_error: worst as f64 / trials as f64,
        wilson_hi: wilson_upper(worst, trials, Z99),
        avg_agreement: agree_total as f64 / (trials as f64 * point_list.len() as f64),
        worst_point: point_list[worst_idx],
    })
}

/// Least degree `d <= dmax` admitting a multilinear polynomial over `F_q`
/// whose error against `f` under the integer-weighted input distribution is
/// at most `eps`; `None` when no such degree exists. Exhaustive search in
/// ascending degree, exact per-distribution error.
pub fn min_prob_degree_oracle(
    f: &TruthTable,
    weights: &[u64],
    eps: f64,
    q: u64,
    dmax: u32,
    caps: &Caps,
) -> Result<Option<u32>> {
    let n = f.nvars();
    if n > 16 {
        return Err(Error::Resource(format!(
            "degree oracle on {n} variables refused"
        )));
    }
    if weights.len() != 1usize << n {
        return Err(Error::Input("distribution must weight every input".into()));
    }
    PrimeField::new(q)?;
    let total: u64 = weights.iter().sum();
    if total == 0 {
        return Err(Error::Input("distribution has zero mass".into()));
    }
    let budget = eps * total as f64 + 1e-9;
    for d in 0..=dmax.min(n) {
        // Candidate count q^(number of monomials of degree <= d).
        let monos = ball_points(n, d);
        let mut candidates: u128 = 1;
        for _ in 0..monos.len() {
            candidates = candidates.saturating_mul(q as u128);
            if candidates > caps.max_oracle_polys {
                return Err(Error::Resource(format!(
                    "degree-{d} search needs more than {} candidates",
                    caps.max_oracle_polys
                )));
            }
        }
        if search_degree(f, weights, budget, q, &monos) {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// Odometer walk over all coefficient vectors with incremental value and
/// error maintenance.
fn search_degree(f: &TruthTable, weights: &[u64], budget: f64, q: u64, monos: &[u64]) -> bool {
    let n = f.nvars();
    let size = 1usize << n;
    let mut coeffs = vec![0u64; monos.len()];
    let mut values = vec![0u64; size];
    // Supersets of each monomial, for incremental updates.
    let supersets: Vec<Vec<u32>> = monos
        .iter()
        .map(|&m| {
            (0..size as u64)
                .filter(|x| m & !x == 0)
                .map(|x| x as u32)
                .collect()
        })
        .collect();
    // Start from the zero polynomial: its error weight is the mass of the
    // points where f is 1.
    let mut err: u64 = (0..size)
        .filter(|&x| f.get(x as u64))
        .map(|x| weights[x])
        .sum();
    let mut err_now = err;
    loop {
        if (err_now as f64) <= budget {
            return true;
        }
        // Increment the odometer: bump position j, carrying.
        let mut j = 0;
        loop {
            if j == monos.len() {
                return false; // wrapped around: all candidates visited
            }
            coeffs[j] = (coeffs[j] + 1) % q;
            // Adding 1 to coefficient j shifts values on its supersets.
            for &x in &supersets[j] {
                let x = x as usize;
                let want = f.get(x as u64) as u64;
                let old_ok = values[x] == want;
                values[x] = (values[x] + 1) % q;
                let new_ok = values[x] == want;
                if old_ok && !new_ok {
                    err_now += weights[x];
                } else if !old_ok && new_ok {
                    err_now -= weights[x];
                }
            }
            if coeffs[j] != 0 {
                break;
            }
            j += 1; // carried
        }
        err = err.min(err_now);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::random_gk;

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn or_sampler_parameters_and_exactness_at_zero() {
        // n=3, q=3, eps=1/9 -> t=2, degree 4.
        let s = or_poly_sampler(3, 3, 1.0 / 9.0).unwrap();
        assert_eq!(s.t, 2);
        assert_eq!(s.degree_bound(), 4);
        for seed in 0..200 {
            let p = s.draw(seed).unwrap();
            assert_eq!(p.eval_mask(0), 0, "exact at the all-zero point");
            assert!(p.degree() <= s.degree_bound());
        }
    }

    #[test]
    fn or_sampler_error_and_value_route_agree() {
        let s = or_poly_sampler(5, 3, 1.0 / 9.0).unwrap();
        let mut wrong = vec![0u64; 32];
        let trials = 2000u64;
        for seed in 0..trials {
            let vals = s.draw_values(seed).unwrap();
            if seed < 30 {
                let slow = s.draw(seed).unwrap().values_on_cube().unwrap();
                assert_eq!(vals, slow);
            }
            for x in 1..32u64 {
                if vals[x as usize] != 1 {
                    wrong[x as usize] += 1;
                }
            }
        }
        for x in 1..32usize {
            let freq = wrong[x] as f64 / trials as f64;
            assert!(freq <= 1.0 / 9.0 + 0.03, "x={x} err={freq}");
        }
    }

    #[test]
    fn or_sampler_exact_error_tiny_case() {
        // n=2, q=3, t=2: exact error at any nonzero point is q^-t = 1/9,
        // computed by enumerating all coefficient matrices.
        let s = or_poly_sampler(2, 3, 1.0 / 9.0).unwrap();
        assert_eq!(s.t, 2);
        // Point x1=1, x2=0: each row's form value is its x1 coefficient.
        let mut bad = 0u64;
        let mut total = 0u64;
        for c in 0..81u64 {
            // two rows of two coefficients each, base-3 digits
            let r = [[c % 3, c / 3 % 3], [c / 9 % 3, c / 27 % 3]];
            let fails = r.iter().all(|row| row[0] % 3 == 0); // L_j(x)=r_j1
            total += 1;
            if fails {
                bad += 1;
            }
        }
        assert_eq!(bad * 9, total); // exactly 1/9

        // And the empirical Wilson upper bound covers it.
        let reference = TruthTable::from_fn(2, |x| x != 0);
        let rep = estimate_pointwise_error(&s, &reference, 4000, PointSet::Exhaustive, 99, "or2")
            .unwrap();
        assert!(rep.wilson_hi >= 1.0 / 9.0 - 0.02);
        assert!(rep.max_point_error <= 1.0 / 9.0 + 0.05);
    }

    #[test]
    fn gk_sampler_or_case_is_detector_power() {
        // g = OR as GK(0, default 1, ball value 0): p = -1, so each sample
        // is Q^(q-1), exact at the all-zero point.
        let g = GkGate::new(4, 0, true, vec![false]).unwrap();
        let q = 3;
        let thr: Box<dyn ThrSource> = Box::new(DetectorThr::new(4, 0, q, 0.1, &caps()).unwrap());
        let s = gk_poly_sampler(&g, q, 0.1, thr, &caps()).unwrap();
        assert_eq!(s.interpolation().coeff(crate::poly::Monomial::ONE), q - 1);
        for seed in 0..100 {
            let sample = s.draw(seed).unwrap();
            let qs = s.thr().draw(seed).unwrap().pow_fermat();
            assert_eq!(sample, qs);
            assert_eq!(sample.eval_mask(0), 0);
        }
    }

    #[test]
    fn gk_sampler_constant_gate() {
        // Constant gate: ball table all-c, default c; sampler is constant c.
        let g = GkGate::new(3, 1, true, vec![true; 4]).unwrap();
        let thr: Box<dyn ThrSource> = Box::new(ExactThr::new(3, 1, 3).unwrap());
        let s = gk_poly_sampler(&g, 3, 0.1, thr, &caps()).unwrap();
        let p = s.draw(7).unwrap();
        for x in 0..8u64 {
            assert_eq!(p.eval_mask(x), 1);
        }
    }

    #[test]
    fn gk_sampler_properness_degree_and_one_sidedness() {
        let mut rng = crate::rng::CounterRng::new(42);
        for &(n, k, q) in &[(6u32, 1u32, 3u64), (5, 2, 2), (6, 0, 5), (10, 1, 3)] {
            let g = random_gk(n, k, &mut rng);
            let thr: Box<dyn ThrSource> =
                Box::new(DetectorThr::new(n, k, q, 0.1, &caps()).unwrap());
            let s = gk_poly_sampler(&g, q, 0.1, thr, &caps()).unwrap();
            let seeds = if n >= 10 { 4 } else { 25 };
            for seed in 0..seeds {
                let p = s.draw(seed).unwrap();
                assert!(p.degree() <= s.degree_bound(), "degree bound");
                let vals = p.values_on_cube().unwrap();
                let fast = s.draw_values(seed).unwrap();
                assert_eq!(vals, fast, "explicit and value routes agree");
                for x in 0..1u64 << n {
                    assert!(vals[x as usize] <= 1, "proper");
                    if x.count_ones() <= k {
                        assert_eq!(vals[x as usize], g.eval_mask(x) as u64, "one-sided");
                    }
                }
            }
        }
    }

    #[test]
    fn gk_sampler_error_with_detector() {
        let mut rng = crate::rng::CounterRng::new(1);
        let n = 8u32;
        for &k in &[1u32, 2] {
            let g = random_gk(n, k, &mut rng);
            let eps = 0.05;
            let thr: Box<dyn ThrSource> =
                Box::new(DetectorThr::new(n, k, 3, eps, &caps()).unwrap());
            let s = gk_poly_sampler(&g, 3, eps, thr, &caps()).unwrap();
            let trials = 400u64;
            let mut wrong = vec![0u64; 1 << n];
            for seed in 0..trials {
                let vals = s.draw_values(seed).unwrap();
                for x in 0..1u64 << n {
                    if vals[x as usize] != g.eval_mask(x) as u64 {
                        wrong[x as usize] += 1;
                    }
                }
            }
            for x in 0..1u64 << n {
                if x.count_ones() <= k {
                    assert_eq!(wrong[x as usize], 0);
                } else {
                    assert!(
                        wilson_upper(wrong[x as usize], trials, Z99) <= eps + 0.05,
                        "k={k} x={x:b}"
                    );
                }
            }
        }
    }

    #[test]
    fn circuit_sampler_deterministic_cases() {
        // Single NOT: deterministic 1 - x1, error 0.
        let mut c = Circuit::new(1);
        let n1 = c.push_gate(GateKind::Not, vec![Operand::Input(1)]).unwrap();
        c.set_outputs(vec![n1]).unwrap();
        let s = circuit_poly_sampler(&c, 3, 0.1, ThrKind::Exact, &caps()).unwrap();
        let p = s.draw(0).unwrap();
        let q = s.draw(12345).unwrap();
        assert_eq!(p, q, "deterministic");
        assert_eq!(p.eval_mask(0), 1);
        assert_eq!(p.eval_mask(1), 0);

        // Single MOD_3 of three variables: deterministic, matches the gate.
        let mut c = Circuit::new(3);
        let m = c
            .push_gate(
                GateKind::Mod { m: 3 },
                vec![Operand::Input(1), Operand::Input(2), Operand::Input(3)],
            )
            .unwrap();
        c.set_outputs(vec![m]).unwrap();
        let s = circuit_poly_sampler(&c, 3, 0.1, ThrKind::Exact, &caps()).unwrap();
        let p = s.draw(0).unwrap();
        for x in 0..8u64 {
            let want = (x.count_ones() % 3 != 0) as u64;
            assert_eq!(p.eval_mask(x), want, "x={x:b}");
        }

        // Composite modulus is unsupported.
        let mut c = Circuit::new(2);
        let m = c
            .push_gate(
                GateKind::Mod { m: 6 },
                vec![Operand::Input(1), Operand::Input(2)],
            )
            .unwrap();
        c.set_outputs(vec![m]).unwrap();
        assert!(matches!(
            circuit_poly_sampler(&c, 3, 0.1, ThrKind::Exact, &caps()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn circuit_sampler_depth2_error_and_properness() {
        let mut rng = crate::rng::CounterRng::new(13);
        // GK over ANDs, n=8.
        let mut c = Circuit::new(8);
        let a1 = c
            .push_gate(GateKind::And, vec![Operand::Input(1), Operand::Input(2)])
            .unwrap();
        let a2 = c
            .push_gate(GateKind::And, vec![Operand::Input(3), Operand::Input(4)])
            .unwrap();
        let a3 = c
            .push_gate(
                GateKind::And,
                vec![Operand::Input(5), Operand::Input(6), Operand::Input(7)],
            )
            .unwrap();
        let gk = random_gk(4, 1, &mut rng);
        let g = c
            .push_gate(
                GateKind::Gk {
                    k: 1,
                    default: gk.default,
                    ball_table: gk.ball_table.clone(),
                },
                vec![
                    Operand::Gate(a1),
                    Operand::Gate(a2),
                    Operand::Gate(a3),
                    Operand::Input(8),
                ],
            )
            .unwrap();
        c.set_outputs(vec![g]).unwrap();
        let eps = 0.15;
        let s = circuit_poly_sampler(&c, 3, eps, ThrKind::Detector, &caps()).unwrap();
        let reference = c.truth_table(0, &caps()).unwrap();
        let trials = 300u64;
        let mut wrong = vec![0u64; 256];
        for seed in 0..trials {
            let vals = s.draw_values(seed).unwrap();
            for x in 0..256u64 {
                assert!(vals[x as usize] <= 1, "proper");
                if vals[x as usize] != reference.get(x) as u64 {
                    wrong[x as usize] += 1;
                }
            }
        }
        for x in 0..256usize {
            let freq = wrong[x] as f64 / trials as f64;
            assert!(freq <= eps + 0.08, "x={x:b} err={freq}");
        }
        // Spot-check that the explicit draw matches the value route.
        for seed in 0..3 {
            let p = s.draw(seed).unwrap();
            assert_eq!(p.values_on_cube().unwrap(), s.draw_values(seed).unwrap());
            assert!(p.degree() <= s.degree_bound());
        }
    }

    #[test]
    fn composition_soundness_flags() {
        let mut rng = crate::rng::CounterRng::new(4);
        let c = crate::gen::random_gc0_circuit(
            &crate::gen::RandomCircuitSpec {
                n: 6,
                k: 1,
                q: 3,
                depth: 2,
                width: 3,
            },
            &mut rng,
        );
        let s = circuit_poly_sampler(&c, 3, 0.2, ThrKind::Detector, &caps()).unwrap();
        let reference = c.truth_table(0, &caps()).unwrap();
        for seed in 0..40 {
            for x in [0u64, 7, 21, 63] {
                let (val, flags) = s.draw_trace(seed, x).unwrap();
                if flags.iter().all(|&f| f) {
                    assert_eq!(val, reference.get(x) as u64, "seed={seed} x={x}");
                }
            }
        }
    }

    #[test]
    fn degree_oracle_examples() {
        let caps = caps();
        // Constant function: degree 0 for any distribution.
        let f = TruthTable::from_fn(2, |_| true);
        let d = min_prob_degree_oracle(&f, &[1, 1, 1, 1], 0.0, 3, 2, &caps).unwrap();
        assert_eq!(d, Some(0));

        // AND2 exactly: no degree-1 polynomial works, degree 2 does.
        let and2 = TruthTable::from_fn(2, |x| x == 3);
        let d = min_prob_degree_oracle(&and2, &[1, 1, 1, 1], 0.0, 3, 2, &caps).unwrap();
        assert_eq!(d, Some(2));

        // AND2 with eps = 0.25 under uniform: the zero polynomial errs only
        // on 11, so degree 0 suffices (and certainly <= 1).
        let d = min_prob_degree_oracle(&and2, &[1, 1, 1, 1], 0.25, 3, 2, &caps).unwrap();
        assert_eq!(d, Some(0));

        // none <= dmax
        let d = min_prob_degree_oracle(&and2, &[1, 1, 1, 1], 0.0, 3, 1, &caps).unwrap();
        assert_eq!(d, None);

        // Candidate-count cap is a resource error.
        let f4 = TruthTable::from_fn(4, |x| x == 15);
        assert!(matches!(
            min_prob_degree_oracle(&f4, &[1; 16], 0.0, 5, 3, &caps),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn degree_oracle_monotone_in_eps() {
        let mut rng = crate::rng::CounterRng::new(66);
        let caps = caps();
        for _ in 0..10 {
            let f = TruthTable::from_fn(3, |_| rng.next_bool());
            let weights = [1u64; 8];
            let mut last = None;
            for eps in [0.0, 0.1, 0.2, 0.4, 0.6] {
                let d = min_prob_degree_oracle(&f, &weights, eps, 2, 3, &caps).unwrap();
                if let (Some(prev), Some(cur)) = (last.flatten(), d) {
                    assert!(cur <= prev, "monotone in eps");
                }
                last = Some(d);
            }
        }
    }

    #[test]
    fn exact_thr_matches_detector_semantics() {
        let thr = ExactThr::new(5, 2, 3).unwrap();
        let p = thr.draw(0).unwrap();
        for x in 0..32u64 {
            assert_eq!(p.eval_mask(x), (x.count_ones() > 2) as u64);
        }
    }
}
