//! Random restrictions, exact decision-tree depth, common-tree membership,
//! and Walsh-Hadamard analysis.

use std::collections::HashMap;

use serde::Serialize;

use crate::circuit::{Cell, Circuit, Restriction, TruthTable};
use crate::error::{Caps, Error, Result};
use crate::rng::CounterRng;

/// The standard p-random restriction: each coordinate independently free
/// with probability `p`, otherwise fixed to 0 or 1 with equal probability.
pub fn sample_restriction(n: u32, p: f64, seed: u64) -> Result<Restriction> {
    if !(0.0..=1.0).contains(&p) || p == 0.0 {
        return Err(Error::Input(format!("star probability {p} outside (0,1]")));
    }
    let mut rng = CounterRng::new(seed);
    let mut rho = Restriction::all_free(n);
    for i in 0..n as usize {
        if rng.next_f64() < p {
            continue;
        }
        rho.set(
            i,
            if rng.next_bool() {
                Cell::One
            } else {
                Cell::Zero
            },
        );
    }
    Ok(rho)
}

/// Decision tree with multi-output leaves. No variable repeats on a
/// root-to-leaf path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecisionTree {
    Leaf(Vec<bool>),
    /// Query `var` (1-based); children for value 0 and 1.
    Node {
        var: u32,
        zero: Box<DecisionTree>,
        one: Box<DecisionTree>,
    },
}

impl DecisionTree {
    pub fn depth(&self) -> u32 {
        match self {
            DecisionTree::Leaf(_) => 0,
            DecisionTree::Node { zero, one, .. } => 1 + zero.depth().max(one.depth()),
        }
    }

    pub fn eval(&self, x: u64) -> &[bool] {
        match self {
            DecisionTree::Leaf(out) => out,
            DecisionTree::Node { var, zero, one } => {
                if x >> (var - 1) & 1 == 1 {
                    one.eval(x)
                } else {
                    zero.eval(x)
                }
            }
        }
    }

    /// No variable repeats on any root-to-leaf path.
    pub fn paths_valid(&self) -> bool {
        fn walk(t: &DecisionTree, seen: u64) -> bool {
            match t {
                DecisionTree::Leaf(_) => true,
                DecisionTree::Node { var, zero, one } => {
                    let bit = 1u64 << (var - 1);
                    seen & bit == 0 && walk(zero, seen | bit) && walk(one, seen | bit)
                }
            }
        }
        walk(self, 0)
    }
}

/// Exact minimum decision-tree depth of a truth table, by memoized
/// recursion over restrictions: 0 for constants, else
/// `1 + min over variables of the max over both branch depths`.
pub fn min_dt_depth(f: &TruthTable) -> Result<u32> {
    if f.nvars() > 14 {
        return Err(Error::Resource(format!(
            "exact tree depth on {} variables refused",
            f.nvars()
        )));
    }
    let mut memo: HashMap<(u32, u32), u8> = HashMap::new();
    Ok(depth_rec(f, 0, 0, f.nvars(), &mut memo))
}

fn subcube_constant(f: &TruthTable, fixed: u32, vals: u32, n: u32) -> Option<bool> {
    let free: Vec<u32> = (0..n).filter(|i| fixed >> i & 1 == 0).collect();
    let base = (vals & fixed) as u64;
    let first = f.get(base | spread(0, &free));
    for y in 1..1u64 << free.len() {
        if f.get(base | spread(y, &free)) != first {
            return None;
        }
    }
    Some(first)
}

#[inline]
fn spread(y: u64, free: &[u32]) -> u64 {
    let mut x = 0u64;
    for (j, &i) in free.iter().enumerate() {
        if y >> j & 1 == 1 {
            x |= 1 << i;
        }
    }
    x
}

fn depth_rec(
    f: &TruthTable,
    fixed: u32,
    vals: u32,
    n: u32,
    memo: &mut HashMap<(u32, u32), u8>,
) -> u32 {
    if let Some(&d) = memo.get(&(fixed, vals)) {
        return d as u32;
    }
    if subcube_constant(f, fixed, vals, n).is_some() {
        memo.insert((fixed, vals), 0);
        return 0;
    }
    let mut best = u32::MAX;
    for i in 0..n {
        let bit = 1u32 << i;
        if fixed & bit != 0 {
            continue;
        }
        let d0 = depth_rec(f, fixed | bit, vals, n, memo);
        if d0 + 1 >= best {
            continue;
        }
        let d1 = depth_rec(f, fixed | bit, vals | bit, n, memo);
        best = best.min(1 + d0.max(d1));
    }
    memo.insert((fixed, vals), best as u8);
    best
}

/// An optimal decision tree for a (small) truth table, for certificates.
pub fn min_dt_tree(f: &TruthTable) -> Result<DecisionTree> {
    let depth = min_dt_depth(f)?;
    Ok(build_tree(f, 0, 0, f.nvars(), depth))
}

fn build_tree(f: &TruthTable, fixed: u32, vals: u32, n: u32, budget: u32) -> DecisionTree {
    if let Some(c) = subcube_constant(f, fixed, vals, n) {
        return DecisionTree::Leaf(vec![c]);
    }
    let mut memo = HashMap::new();
    for i in 0..n {
        let bit = 1u32 << i;
        if fixed & bit != 0 {
            continue;
        }
        let d0 = depth_rec(f, fixed | bit, vals, n, &mut memo);
        let d1 = depth_rec(f, fixed | bit, vals | bit, n, &mut memo);
        if d0.max(d1) < budget {
            return DecisionTree::Node {
                var: i + 1,
                zero: Box::new(build_tree(f, fixed | bit, vals, n, budget - 1)),
                one: Box::new(build_tree(f, fixed | bit, vals | bit, n, budget - 1)),
            };
        }
    }
    unreachable!("a branch within budget exists at every non-constant node")
}

/// Certificate for a YES membership answer: a common query tree of depth at
/// most `t` whose leaves give every output its own tree of depth at most `r`.
#[derive(Debug, Clone)]
pub struct CommonTreeCertificate {
    pub common: DecisionTree,
    /// Per-leaf, per-output trees; leaves indexed in discovery order and
    /// recorded in the common tree's leaf payloads as indices.
    pub leaf_trees: Vec<Vec<DecisionTree>>,
}

#[derive(Debug)]
pub enum Membership {
    Yes(Box<CommonTreeCertificate>),
    Unknown,
}

impl Membership {
    pub fn is_yes(&self) -> bool {
        matches!(self, Membership::Yes(_))
    }
}

/// Sufficient membership check for the class of a depth-`t` common tree over
/// per-output depth-`r` trees. Greedy: at each node query the variable
/// minimizing the worst residual exact tree depth across outputs and
/// branches. YES answers are certified; UNKNOWN never asserts
/// non-membership.
pub fn common_dt_membership(fs: &[TruthTable], t: u32, r: u32) -> Result<Membership> {
    if fs.is_empty() {
        return Err(Error::Input("no outputs given".into()));
    }
    let n = fs[0].nvars();
    if fs.iter().any(|f| f.nvars() != n) {
        return Err(Error::Input("outputs disagree on arity".into()));
    }
    let mut memos: Vec<HashMap<(u32, u32), u8>> = vec![HashMap::new(); fs.len()];
    let mut leaf_trees: Vec<Vec<DecisionTree>> = Vec::new();
    match try_common(fs, 0, 0, n, t, r, &mut memos, &mut leaf_trees)? {
        Some(common) => Ok(Membership::Yes(Box::new(CommonTreeCertificate {
            common,
            leaf_trees,
        }))),
        None => Ok(Membership::Unknown),
    }
}

fn try_common(
    fs: &[TruthTable],
    fixed: u32,
    vals: u32,
    n: u32,
    t: u32,
    r: u32,
    memos: &mut [HashMap<(u32, u32), u8>],
    leaf_trees: &mut Vec<Vec<DecisionTree>>,
) -> Result<Option<DecisionTree>> {
    let worst = (0..fs.len())
        .map(|oi| depth_rec(&fs[oi], fixed, vals, n, &mut memos[oi]))
        .max()
        .unwrap();
    if worst <= r {
        // Leaf: each output gets its own restricted tree of depth <= r.
        let mut trees = Vec::with_capacity(fs.len());
        for f in fs {
            let rho = restriction_of(fixed, vals, n);
            let sub = f.restrict(&rho)?;
            let tree = min_dt_tree(&sub)?;
            trees.push(relabel_tree(tree, &rho));
        }
        leaf_trees.push(trees);
        // The leaf's index in discovery (zero-branch-first) order names its
        // entry in `leaf_trees`.
        return Ok(Some(DecisionTree::Leaf(Vec::new())));
    }
    if t == 0 {
        return Ok(None);
    }
    // Pick the variable minimizing the worst branch residual.
    let mut best: Option<(u32, u32)> = None;
    for i in 0..n {
        let bit = 1u32 << i;
        if fixed & bit != 0 {
            continue;
        }
        let score = (0..fs.len())
            .map(|oi| {
                let d0 = depth_rec(&fs[oi], fixed | bit, vals, n, &mut memos[oi]);
                let d1 = depth_rec(&fs[oi], fixed | bit, vals | bit, n, &mut memos[oi]);
                d0.max(d1)
            })
            .max()
            .unwrap();
        if best.is_none_or(|(s, _)| score < s) {
            best = Some((score, i));
        }
    }
    let (_, var) = match best {
        Some(b) => b,
        None => return Ok(None), // no free variable left
    };
    let bit = 1u32 << var;
    let zero = try_common(fs, fixed | bit, vals, n, t - 1, r, memos, leaf_trees)?;
    let zero = match zero {
        Some(z) => z,
        None => return Ok(None),
    };
    let one = try_common(fs, fixed | bit, vals | bit, n, t - 1, r, memos, leaf_trees)?;
    let one = match one {
        Some(o) => o,
        None => return Ok(None),
    };
    Ok(Some(DecisionTree::Node {
        var: var + 1,
        zero: Box::new(zero),
        one: Box::new(one),
    }))
}

fn restriction_of(fixed: u32, vals: u32, n: u32) -> Restriction {
    let mut rho = Restriction::all_free(n);
    for i in 0..n as usize {
        if fixed >> i & 1 == 1 {
            rho.set(
                i,
                if vals >> i & 1 == 1 {
                    Cell::One
                } else {
                    Cell::Zero
                },
            );
        }
    }
    rho
}

/// Map a tree over renumbered free variables back to original indices.
fn relabel_tree(t: DecisionTree, rho: &Restriction) -> DecisionTree {
    let free: Vec<u32> = (0..rho.len() as u32)
        .filter(|&i| rho.0[i as usize] == Cell::Free)
        .collect();
    fn walk(t: DecisionTree, free: &[u32]) -> DecisionTree {
        match t {
            DecisionTree::Leaf(v) => DecisionTree::Leaf(v),
            DecisionTree::Node { var, zero, one } => DecisionTree::Node {
                var: free[(var - 1) as usize] + 1,
                zero: Box::new(walk(*zero, free)),
                one: Box::new(walk(*one, free)),
            },
        }
    }
    walk(t, &free)
}

/// Verify a certificate: walking the common tree and then each leaf tree
/// reproduces every output everywhere.
pub fn verify_certificate(fs: &[TruthTable], cert: &CommonTreeCertificate) -> bool {
    fn count_leaves(t: &DecisionTree) -> usize {
        match t {
            DecisionTree::Leaf(_) => 1,
            DecisionTree::Node { zero, one, .. } => count_leaves(zero) + count_leaves(one),
        }
    }
    // Leaf index in discovery (zero-branch-first) order.
    fn locate(t: &DecisionTree, x: u64) -> usize {
        match t {
            DecisionTree::Leaf(_) => 0,
            DecisionTree::Node { var, zero, one } => {
                if x >> (var - 1) & 1 == 1 {
                    count_leaves(zero) + locate(one, x)
                } else {
                    locate(zero, x)
                }
            }
        }
    }
    let n = fs[0].nvars();
    for x in 0..1u64 << n {
        let li = locate(&cert.common, x);
        for (oi, f) in fs.iter().enumerate() {
            if cert.leaf_trees[li][oi].eval(x)[0] != f.get(x) {
                return false;
            }
        }
    }
    true
}

/// One row of a switching experiment.
#[derive(Debug, Clone, Serialize)]
pub struct SwitchTrial {
    pub trial: u64,
    pub free_vars: u32,
    pub member: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SwitchReport {
    pub trials: u64,
    pub t: u32,
    pub r: u32,
    pub schedule: Vec<f64>,
    /// Fraction of trials where the greedy membership check failed (an
    /// upper bound on the true non-membership frequency).
    pub empirical_failure: f64,
    /// Instantiated theoretical bound with all unknown universal constants
    /// set to 1.
    pub bound_value: f64,
    pub bound_kind: String,
    pub constants_note: String,
    pub sigma: f64,
    pub verdict: String,
}

/// Which theoretical bound shape the experiment instantiates. The bound
/// carries its own exponents; the membership test parameters are chosen by
/// the caller to match the bounded event (e.g. the event `depth >= t` is
/// non-membership at depth `t - 1`).
#[derive(Debug, Clone, Copy)]
pub enum BoundSpec {
    /// Tree-depth shrinkage `(2 e p l / t)^t` with `l` the source's exact
    /// tree depth.
    Syntactic { source_depth: u32, t: u32 },
    /// Circuit-shape bound `((2^k s1)^(1/r) p w)^t` with constants 1.
    MultiSwitch {
        k: u32,
        s1: u64,
        w: u32,
        t: u32,
        r: u32,
    },
}

impl BoundSpec {
    pub fn value(&self, p: f64) -> f64 {
        match *self {
            BoundSpec::Syntactic { source_depth, t } => {
                let base = 2.0 * std::f64::consts::E * p * source_depth as f64 / t.max(1) as f64;
                base.powi(t as i32).min(1.0)
            }
            BoundSpec::MultiSwitch { k, s1, w, t, r } => {
                let base =
                    ((2f64.powi(k as i32) * s1 as f64).powf(1.0 / r.max(1) as f64)) * p * w as f64;
                base.powi(t as i32).min(1.0)
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            BoundSpec::Syntactic { .. } => "tree-depth-shrinkage",
            BoundSpec::MultiSwitch { .. } => "multi-switch-shape",
        }
    }
}

/// Monte-Carlo switching experiment: restrict with the product of the
/// schedule's stages, then test membership in the common-tree class. The
/// failure frequency is compared against the instantiated bound; the verdict
/// is CONSISTENT when the empirical value is within the bound plus three
/// standard errors. This is a consistency check, never a theorem test: the
/// universal constants are set to 1.
pub fn switching_experiment(
    c: &Circuit,
    schedule: &[f64],
    t: u32,
    r: u32,
    trials: u64,
    seed: u64,
    bound: BoundSpec,
    caps: &Caps,
) -> Result<(SwitchReport, Vec<SwitchTrial>)> {
    if schedule.is_empty() {
        return Err(Error::Input("empty restriction schedule".into()));
    }
    let tables = c.truth_tables(caps)?;
    let n = c.ninputs();
    let root = CounterRng::new(seed);
    let mut rows = Vec::with_capacity(trials as usize);
    let mut failures = 0u64;
    for trial in 0..trials {
        let mut rho = Restriction::all_free(n);
        let mut stage_rng = root.split(trial);
        for &p in schedule {
            let free = rho.free_count() as u32;
            let stage = sample_restriction(free, p, stage_rng.next_u64())?;
            rho = rho.then(&stage)?;
        }
        let restricted: Vec<TruthTable> = tables
            .iter()
            .map(|f| f.restrict(&rho))
            .collect::<Result<_>>()?;
        let member = if restricted[0].nvars() == 0 {
            true
        } else if tables.len() == 1 && r == 0 {
            // Single output, plain depth-t tree.
            min_dt_depth(&restricted[0])? <= t
        } else {
            common_dt_membership(&restricted, t, r)?.is_yes()
        };
        if !member {
            failures += 1;
        }
        rows.push(SwitchTrial {
            trial,
            free_vars: rho.free_count() as u32,
            member,
        });
    }
    let p_total: f64 = schedule.iter().product();
    let emp = failures as f64 / trials as f64;
    let sigma = (emp * (1.0 - emp) / trials as f64)
        .sqrt()
        .max(1.0 / trials as f64);
    let bound_value = bound.value(p_total);
    let verdict = if emp <= bound_value + 3.0 * sigma {
        "CONSISTENT"
    } else {
        "INCONCLUSIVE"
    };
    Ok((
        SwitchReport {
            trials,
            t,
            r,
            schedule: schedule.to_vec(),
            empirical_failure: emp,
            bound_value,
            bound_kind: bound.kind().to_string(),
            constants_note: "universal constants set to 1; consistency check only".to_string(),
            sigma,
            verdict: verdict.to_string(),
        },
        rows,
    ))
}

// ---------------------------------------------------------------------------
// Walsh-Hadamard analysis.
// ---------------------------------------------------------------------------

/// Walsh-Hadamard coefficients of `f` as a plus/minus-one function
/// (bit 0 maps to +1): `coeffs[S] = E[f(x) chi_S(x)]`.
pub fn fourier_coefficients(f: &TruthTable, caps: &Caps) -> Result<Vec<f64>> {
    caps.check_tt_vars(f.nvars(), "Fourier transform")?;
    if f.nvars() > 22 {
        return Err(Error::Resource(format!(
            "Fourier transform on {} variables refused",
            f.nvars()
        )));
    }
    let n = f.nvars();
    let size = 1usize << n;
    let mut a: Vec<i64> = (0..size)
        .map(|x| if f.get(x as u64) { -1 } else { 1 })
        .collect();
    wht_in_place(&mut a);
    Ok(a.into_iter().map(|v| v as f64 / size as f64).collect())
}

/// In-place Walsh-Hadamard butterfly.
pub fn wht_in_place(a: &mut [i64]) {
    let n = a.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(h * 2) {
            for i in block..block + h {
                let (x, y) = (a[i], a[i + h]);
                a[i] = x + y;
                a[i + h] = x - y;
            }
        }
        h *= 2;
    }
}

/// `sum over |S| = level of |f_hat(S)|`.
pub fn fourier_level_mass(f: &TruthTable, level: u32, caps: &Caps) -> Result<f64> {
    let coeffs = fourier_coefficients(f, caps)?;
    Ok(coeffs
        .iter()
        .enumerate()
        .filter(|(s, _)| (*s as u64).count_ones() == level)
        .map(|(_, c)| c.abs())
        .sum())
}

/// `sum f_hat(S)^2`; exactly 1 for any boolean function.
pub fn parseval_sum(f: &TruthTable, caps: &Caps) -> Result<f64> {
    Ok(fourier_coefficients(f, caps)?.iter().map(|c| c * c).sum())
}
