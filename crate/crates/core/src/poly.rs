//! Sparse multilinear polynomials over prime fields.
//!
//! A [`FieldPoly`] is a map from multilinear monomials to nonzero
//! coefficients in `F_q`. Polynomials are kept multilinear at all times
//! (`x_i^2 -> x_i`), which is sound because every evaluation point is
//! boolean. Negative constants are represented as `q - 1` etc., so
//! characteristic 2 needs no special casing.
//!
//! The canonical text form sorts terms by variable set (lexicographic,
//! constant first): `F3[n=4]: 2 + x1*x2 + 2*x3`.

use std::collections::BTreeMap;
use std::fmt;

use crate::ball::{ball_points, ball_size_checked};
use crate::error::{Error, Result};
use crate::field::PrimeField;

/// Product of distinct variables, stored as a bitmask with bit `i-1` for
/// `x_i`. The empty set is the constant monomial. At most 63 variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(u64);

pub const MAX_VARS: u32 = 63;

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn var(i: u32) -> Monomial {
        assert!(i >= 1 && i <= MAX_VARS, "variable index {i} out of range");
        Monomial(1 << (i - 1))
    }

    pub fn from_vars(vars: &[u32]) -> Result<Monomial> {
        let mut mask = 0u64;
        for &i in vars {
            if i < 1 || i > MAX_VARS {
                return Err(Error::Input(format!("variable index {i} out of range")));
            }
            let bit = 1 << (i - 1);
            if mask & bit != 0 {
                return Err(Error::Input(format!("duplicate variable x{i} in monomial")));
            }
            mask |= bit;
        }
        Ok(Monomial(mask))
    }

    pub fn from_mask(mask: u64) -> Monomial {
        Monomial(mask)
    }

    #[inline]
    pub fn mask(&self) -> u64 {
        self.0
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.0.count_ones()
    }

    /// Variable indices, ascending.
    pub fn vars(&self) -> impl Iterator<Item = u32> + '_ {
        (0..64u32).filter(|b| self.0 >> b & 1 == 1).map(|b| b + 1)
    }

    /// Multilinear product: union of the variable sets.
    #[inline]
    pub fn union(&self, other: Monomial) -> Monomial {
        Monomial(self.0 | other.0)
    }

    /// True when the monomial evaluates to 1 at the point `x` (as mask).
    #[inline]
    pub fn satisfied_by(&self, x: u64) -> bool {
        self.0 & !x == 0
    }

    /// Ordering key for the canonical text form: variable lists compared
    /// lexicographically, constant first.
    fn lex_key(&self) -> Vec<u32> {
        self.vars().collect()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for v in self.vars() {
            if !first {
                write!(f, "*")?;
            }
            write!(f, "x{v}")?;
            first = false;
        }
        Ok(())
    }
}

/// Sparse multilinear polynomial over `F_q` in variables `x1..xn`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldPoly {
    field: PrimeField,
    nvars: u32,
    terms: BTreeMap<Monomial, u64>,
}

impl FieldPoly {
    pub fn zero(q: u64, nvars: u32) -> Result<FieldPoly> {
        if nvars > MAX_VARS {
            return Err(Error::Input(format!(
                "{nvars} variables exceeds limit {MAX_VARS}"
            )));
        }
        Ok(FieldPoly {
            field: PrimeField::new(q)?,
            nvars,
            terms: BTreeMap::new(),
        })
    }

    pub fn constant(q: u64, nvars: u32, c: u64) -> Result<FieldPoly> {
        let mut p = FieldPoly::zero(q, nvars)?;
        p.add_term(Monomial::ONE, c);
        Ok(p)
    }

    pub fn var(q: u64, nvars: u32, i: u32) -> Result<FieldPoly> {
        if i < 1 || i > nvars {
            return Err(Error::Input(format!(
                "variable x{i} out of range for n={nvars}"
            )));
        }
        let mut p = FieldPoly::zero(q, nvars)?;
        p.add_term(Monomial::var(i), 1);
        Ok(p)
    }

    pub fn modulus(&self) -> u64 {
        self.field.modulus()
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn nvars(&self) -> u32 {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, u64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn coeff(&self, m: Monomial) -> u64 {
        self.terms.get(&m).copied().unwrap_or(0)
    }

    /// Add `c * m`, dropping the entry if the coefficient cancels.
    pub fn add_term(&mut self, m: Monomial, c: u64) {
        let c = c % self.field.modulus();
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(m).or_insert(0);
        *entry = self.field.add(*entry, c);
        if *entry == 0 {
            self.terms.remove(&m);
        }
    }

    fn check_compat(&self, other: &FieldPoly) -> Result<()> {
        if self.field.modulus() != other.field.modulus() {
            return Err(Error::Input(format!(
                "modulus mismatch: {} vs {}",
                self.field.modulus(),
                other.field.modulus()
            )));
        }
        if self.nvars != other.nvars {
            return Err(Error::Input(format!(
                "variable count mismatch: {} vs {}",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &FieldPoly) -> Result<FieldPoly> {
        self.check_compat(other)?;
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &FieldPoly) -> Result<FieldPoly> {
        self.check_compat(other)?;
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m, self.field.neg(c));
        }
        Ok(out)
    }

    pub fn scale(&self, c: u64) -> FieldPoly {
        let mut out = FieldPoly {
            field: self.field,
            nvars: self.nvars,
            terms: BTreeMap::new(),
        };
        for (m, a) in self.terms() {
            out.add_term(m, self.field.mul(a, c));
        }
        out
    }

    /// Product, reduced multilinearly (`x_i^2 -> x_i`), so the result agrees
    /// with the unreduced product on every boolean point.
    pub fn mul(&self, other: &FieldPoly) -> Result<FieldPoly> {
        self.check_compat(other)?;
        let mut out = FieldPoly {
            field: self.field,
            nvars: self.nvars,
            terms: BTreeMap::new(),
        };
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                out.add_term(ma.union(mb), self.field.mul(ca, cb));
            }
        }
        Ok(out)
    }

    /// `self^(q-1)`, multilinearly reduced. On boolean points the value is
    /// 0 where `self` vanishes and 1 elsewhere (Fermat), so the output is
    /// proper.
    pub fn pow_fermat(&self) -> FieldPoly {
        let mut exp = self.field.modulus() - 1;
        let mut acc = FieldPoly::constant(self.field.modulus(), self.nvars, 1).unwrap();
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base).unwrap();
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base).unwrap();
            }
        }
        acc
    }

    /// Evaluate at a boolean point given as a slice of bits.
    pub fn eval(&self, x: &[bool]) -> Result<u64> {
        if x.len() != self.nvars as usize {
            return Err(Error::Input(format!(
                "point has {} bits, polynomial has {} variables",
                x.len(),
                self.nvars
            )));
        }
        let mut mask = 0u64;
        for (i, &b) in x.iter().enumerate() {
            if b {
                mask |= 1 << i;
            }
        }
        Ok(self.eval_mask(mask))
    }

    /// Evaluate at the point encoded as a mask (bit `i-1` = `x_i`).
    pub fn eval_mask(&self, x: u64) -> u64 {
        let mut acc = 0u64;
        for (m, c) in self.terms() {
            if m.satisfied_by(x) {
                acc = self.field.add(acc, c);
            }
        }
        acc
    }

    /// Values on the whole cube `{0,1}^n`, index convention
    /// `idx = sum x_i 2^(i-1)`. Subset-sum (zeta) transform of the
    /// coefficients, `O(2^n n)`.
    pub fn values_on_cube(&self) -> Result<Vec<u64>> {
        if self.nvars > 26 {
            return Err(Error::Resource(format!(
                "cube evaluation on {} variables refused",
                self.nvars
            )));
        }
        let n = self.nvars;
        let mut vals = vec![0u64; 1 << n];
        for (m, c) in self.terms() {
            vals[m.mask() as usize] = c;
        }
        for i in 0..n {
            let bit = 1usize << i;
            for x in 0..vals.len() {
                if x & bit != 0 {
                    vals[x] = self.field.add(vals[x], vals[x ^ bit]);
                }
            }
        }
        Ok(vals)
    }

    /// The unique multilinear polynomial with the given values on the cube
    /// (Moebius inversion, the inverse of [`FieldPoly::values_on_cube`]).
    pub fn from_values_on_cube(q: u64, nvars: u32, values: &[u64]) -> Result<FieldPoly> {
        if nvars > 26 || values.len() != 1usize << nvars {
            return Err(Error::Input(format!(
                "expected 2^{nvars} values, got {}",
                values.len()
            )));
        }
        let field = PrimeField::new(q)?;
        let mut coeffs: Vec<u64> = values.iter().map(|&v| v % q).collect();
        for i in 0..nvars {
            let bit = 1usize << i;
            for x in 0..coeffs.len() {
                if x & bit != 0 {
                    coeffs[x] = field.sub(coeffs[x], coeffs[x ^ bit]);
                }
            }
        }
        let mut out = FieldPoly::zero(q, nvars)?;
        for (mask, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                out.terms.insert(Monomial::from_mask(mask as u64), c);
            }
        }
        Ok(out)
    }

    /// Substitute `args[i-1]` for `x_i` and reduce multilinearly.
    pub fn compose(&self, args: &[FieldPoly]) -> Result<FieldPoly> {
        if args.len() != self.nvars as usize {
            return Err(Error::Input(format!(
                "composition needs {} arguments, got {}",
                self.nvars,
                args.len()
            )));
        }
        let (q, out_vars) = match args.first() {
            Some(a) => (a.modulus(), a.nvars()),
            None => (self.modulus(), 0),
        };
        for a in args {
            if a.modulus() != q || a.nvars() != out_vars {
                return Err(Error::Input(
                    "composition arguments disagree on field or arity".into(),
                ));
            }
        }
        if q != self.modulus() {
            return Err(Error::Input("composition modulus mismatch".into()));
        }
        let mut out = FieldPoly::zero(q, out_vars)?;
        for (m, c) in self.terms() {
            let mut prod = FieldPoly::constant(q, out_vars, c)?;
            for v in m.vars() {
                prod = prod.mul(&args[(v - 1) as usize])?;
            }
            out = out.add(&prod)?;
        }
        Ok(out)
    }

    /// True when the polynomial takes only values 0 and 1 on the cube.
    pub fn is_proper(&self) -> Result<bool> {
        Ok(self.values_on_cube()?.iter().all(|&v| v <= 1))
    }

    /// Canonical text form.
    pub fn to_text(&self) -> String {
        format!("{self}")
    }

    pub fn from_text(text: &str) -> Result<FieldPoly> {
        parse_poly(text)
    }
}

impl fmt::Display for FieldPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}[n={}]: ", self.field.modulus(), self.nvars)?;
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut ordered: Vec<(Monomial, u64)> = self.terms().collect();
        ordered.sort_by_key(|a| a.0.lex_key());
        for (i, (m, c)) in ordered.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if m.degree() == 0 {
                write!(f, "{c}")?;
            } else if *c == 1 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{c}*{m}")?;
            }
        }
        Ok(())
    }
}

fn parse_poly(text: &str) -> Result<FieldPoly> {
    let bad = |msg: &str| Error::Parse {
        line: 1,
        col: 1,
        msg: msg.to_string(),
    };
    let text = text.trim();
    let rest = text
        .strip_prefix('F')
        .ok_or_else(|| bad("expected 'F<q>[n=<n>]:' header"))?;
    let open = rest.find('[').ok_or_else(|| bad("missing '[' in header"))?;
    let q: u64 = rest[..open].parse().map_err(|_| bad("bad modulus"))?;
    let close = rest.find(']').ok_or_else(|| bad("missing ']' in header"))?;
    let nspec = &rest[open + 1..close];
    let nvars: u32 = nspec
        .strip_prefix("n=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("bad variable count"))?;
    let body = rest[close + 1..]
        .strip_prefix(':')
        .ok_or_else(|| bad("missing ':' after header"))?
        .trim();
    let mut poly = FieldPoly::zero(q, nvars)?;
    if body == "0" {
        return Ok(poly);
    }
    for term in body.split('+') {
        let term = term.trim();
        if term.is_empty() {
            return Err(bad("empty term"));
        }
        let mut coeff: u64 = 1;
        let mut vars = Vec::new();
        let mut saw_coeff = false;
        for factor in term.split('*') {
            let factor = factor.trim();
            if let Some(v) = factor.strip_prefix('x') {
                let i: u32 = v.parse().map_err(|_| bad("bad variable"))?;
                if i < 1 || i > nvars {
                    return Err(bad(&format!("variable x{i} out of range")));
                }
                vars.push(i);
            } else {
                if saw_coeff {
                    return Err(bad("two coefficients in one term"));
                }
                coeff = factor.parse().map_err(|_| bad("bad coefficient"))?;
                saw_coeff = true;
            }
        }
        poly.add_term(Monomial::from_vars(&vars)?, coeff);
    }
    Ok(poly)
}

/// The unique degree-at-most-`k` multilinear polynomial over `F_q` matching
/// `truth` on the radius-`k` Hamming ball, via Moebius inversion
/// `c_S = sum_{T subset S} (-1)^{|S - T|} truth(1_T)`.
///
/// `truth` lists the value at every ball point in canonical ball order
/// (exactly `binom(n, <=k)` entries).
pub fn interpolate_ball(truth: &[u64], n: u32, k: u32, q: u64, cap: u64) -> Result<FieldPoly> {
    if n > MAX_VARS {
        return Err(Error::Input(format!(
            "{n} variables exceeds limit {MAX_VARS}"
        )));
    }
    let size = ball_size_checked(n, k, cap)?;
    if truth.len() != size {
        return Err(Error::Input(format!(
            "truth table has {} entries, ball of radius {k} on {n} variables has {size}",
            truth.len()
        )));
    }
    let field = PrimeField::new(q)?;
    let points = ball_points(n, k);
    let mut value_at = std::collections::HashMap::with_capacity(size);
    for (i, &m) in points.iter().enumerate() {
        value_at.insert(m, truth[i] % q);
    }
    let mut poly = FieldPoly::zero(q, n)?;
    for &s in &points {
        // Sum over subsets T of S with sign (-1)^{|S| - |T|}.
        let mut c = 0u64;
        let mut t = s;
        loop {
            let v = value_at[&t];
            if (s.count_ones() - t.count_ones()) % 2 == 0 {
                c = field.add(c, v);
            } else {
                c = field.sub(c, v);
            }
            if t == 0 {
                break;
            }
            t = (t - 1) & s;
        }
        if c != 0 {
            poly.terms.insert(Monomial::from_mask(s), c);
        }
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::ball_points;
    use crate::rng::CounterRng;

    fn random_poly(q: u64, nvars: u32, terms: usize, rng: &mut CounterRng) -> FieldPoly {
        let mut p = FieldPoly::zero(q, nvars).unwrap();
        for _ in 0..terms {
            let mask = rng.next_u64() & ((1 << nvars) - 1);
            p.add_term(Monomial::from_mask(mask), rng.next_below(q));
        }
        p
    }

    #[test]
    fn eval_identities() {
        // x1*x2 over F3 at 11 -> 1.
        let q = 3;
        let p = FieldPoly::var(q, 2, 1)
            .unwrap()
            .mul(&FieldPoly::var(q, 2, 2).unwrap())
            .unwrap();
        assert_eq!(p.eval(&[true, true]).unwrap(), 1);
        // Zero polynomial evaluates to 0 everywhere.
        let z = FieldPoly::zero(q, 2).unwrap();
        assert_eq!(z.eval(&[true, false]).unwrap(), 0);
        // 2*x1 + x2 over F3 at 11 -> 2 + 1 = 0.
        let mut p = FieldPoly::zero(q, 2).unwrap();
        p.add_term(Monomial::var(1), 2);
        p.add_term(Monomial::var(2), 1);
        assert_eq!(p.eval(&[true, true]).unwrap(), 0);
        // Dimension mismatch is an input error.
        assert!(p.eval(&[true]).is_err());
    }

    #[test]
    fn mul_reduces_multilinearly() {
        let q = 5;
        let x1 = FieldPoly::var(q, 2, 1).unwrap();
        assert_eq!(x1.mul(&x1).unwrap(), x1); // x1 * x1 -> x1
                                              // (x1 + x2)^2 over F2 = x1 + x2 + 2 x1x2 = x1 + x2.
        let s = FieldPoly::var(2, 2, 1)
            .unwrap()
            .add(&FieldPoly::var(2, 2, 2).unwrap())
            .unwrap();
        let sq = s.mul(&s).unwrap();
        assert_eq!(sq, s);
        for x in 0..4u64 {
            assert_eq!(sq.eval_mask(x), s.eval_mask(x) * s.eval_mask(x) % 2);
        }
        // a * 0 = 0.
        let z = FieldPoly::zero(q, 2).unwrap();
        assert!(x1.mul(&z).unwrap().is_zero());
        // Modulus mismatch rejected.
        assert!(FieldPoly::var(3, 2, 1)
            .unwrap()
            .mul(&FieldPoly::var(5, 2, 1).unwrap())
            .is_err());
    }

    #[test]
    fn mul_matches_pointwise_product() {
        let mut rng = CounterRng::new(11);
        for q in [2u64, 3, 5] {
            for trial in 0..20 {
                let n = if trial < 15 { 8 } else { 10 };
                let a = random_poly(q, n, 6, &mut rng);
                let b = random_poly(q, n, 6, &mut rng);
                let ab = a.mul(&b).unwrap();
                for x in 0..1u64 << n {
                    let want = a.eval_mask(x) * b.eval_mask(x) % q;
                    assert_eq!(ab.eval_mask(x), want);
                }
            }
        }
    }

    #[test]
    fn pow_fermat_is_boolean_valued() {
        // a = x1 + x2 over F3: a^2 takes value 1 on 01, 10 and 11 (2^2 = 4 = 1).
        let a = FieldPoly::var(3, 2, 1)
            .unwrap()
            .add(&FieldPoly::var(3, 2, 2).unwrap())
            .unwrap();
        let sq = a.pow_fermat();
        assert_eq!(sq.eval_mask(0b00), 0);
        assert_eq!(sq.eval_mask(0b01), 1);
        assert_eq!(sq.eval_mask(0b10), 1);
        assert_eq!(sq.eval_mask(0b11), 1);
        // q = 2: a^1 = a.
        let a2 = FieldPoly::var(2, 3, 2).unwrap();
        assert_eq!(a2.pow_fermat(), a2);
        // Constant 2 over F3 -> constant 1.
        let c = FieldPoly::constant(3, 2, 2).unwrap();
        assert_eq!(c.pow_fermat(), FieldPoly::constant(3, 2, 1).unwrap());
        // Property: output in {0,1} at every boolean point, exhaustive
        // through ten variables.
        let mut rng = CounterRng::new(5);
        for q in [2u64, 3, 5] {
            for n in [7u32, 10] {
                let p = random_poly(q, n, 10, &mut rng);
                let f = p.pow_fermat();
                for x in 0..1u64 << n {
                    let v = f.eval_mask(x);
                    assert!(v <= 1);
                    assert_eq!(v, if p.eval_mask(x) == 0 { 0 } else { 1 });
                }
            }
        }
    }

    #[test]
    fn cube_transforms_roundtrip() {
        let mut rng = CounterRng::new(9);
        for q in [2u64, 3, 5] {
            let p = random_poly(q, 6, 12, &mut rng);
            let vals = p.values_on_cube().unwrap();
            for x in 0..64u64 {
                assert_eq!(vals[x as usize], p.eval_mask(x));
            }
            let back = FieldPoly::from_values_on_cube(q, 6, &vals).unwrap();
            assert_eq!(back, p);
        }
    }

    #[test]
    fn interpolate_ball_examples() {
        // Constant truth on the ball -> constant polynomial.
        let n = 4;
        let size = ball_points(n, 2).len();
        let p = interpolate_ball(&vec![2u64; size], n, 2, 3, 1 << 20).unwrap();
        assert_eq!(p, FieldPoly::constant(3, n, 2).unwrap());

        // n=2, k=2, AND truth in canonical ball order (00, 01, 10, 11 as
        // x1x2 strings -> masks 00, 10, 01, 11) -> x1*x2.
        let p = interpolate_ball(&[0, 0, 0, 1], 2, 2, 3, 1 << 20).unwrap();
        let want = FieldPoly::var(3, 2, 1)
            .unwrap()
            .mul(&FieldPoly::var(3, 2, 2).unwrap())
            .unwrap();
        assert_eq!(p, want);

        // n=2, k=1, truth(00)=0, truth(01)=truth(10)=1 -> x1 + x2.
        let p = interpolate_ball(&[0, 1, 1], 2, 1, 3, 1 << 20).unwrap();
        let want = FieldPoly::var(3, 2, 1)
            .unwrap()
            .add(&FieldPoly::var(3, 2, 2).unwrap())
            .unwrap();
        assert_eq!(p, want);

        // Wrong number of ball points is an input error.
        assert!(interpolate_ball(&[0, 1], 2, 1, 3, 1 << 20).is_err());
        // Cap exceeded is a resource error.
        assert!(matches!(
            interpolate_ball(&[0; 10], 20, 2, 3, 8),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn interpolate_ball_matches_truth_and_degree() {
        let mut rng = CounterRng::new(17);
        for q in [2u64, 3, 5] {
            for n in 1..=8u32 {
                for k in 0..=n.min(3) {
                    let pts = ball_points(n, k);
                    let truth: Vec<u64> = pts.iter().map(|_| rng.next_below(q)).collect();
                    let p = interpolate_ball(&truth, n, k, q, 1 << 20).unwrap();
                    assert!(p.degree() <= k);
                    for (i, &m) in pts.iter().enumerate() {
                        assert_eq!(p.eval_mask(m), truth[i], "q={q} n={n} k={k}");
                    }
                    // Uniqueness: rerunning produces the identical term map.
                    let p2 = interpolate_ball(&truth, n, k, q, 1 << 20).unwrap();
                    assert_eq!(p, p2);
                }
            }
        }
    }

    #[test]
    fn compose_substitutes() {
        // p = x1*x2 composed with (x1+x2, 1) = x1 + x2 on boolean points.
        let q = 3;
        let p = FieldPoly::var(q, 2, 1)
            .unwrap()
            .mul(&FieldPoly::var(q, 2, 2).unwrap())
            .unwrap();
        let a = FieldPoly::var(q, 2, 1)
            .unwrap()
            .add(&FieldPoly::var(q, 2, 2).unwrap())
            .unwrap();
        let b = FieldPoly::constant(q, 2, 1).unwrap();
        let c = p.compose(&[a.clone(), b]).unwrap();
        for x in 0..4u64 {
            assert_eq!(c.eval_mask(x), a.eval_mask(x));
        }
    }

    #[test]
    fn text_roundtrip() {
        let mut p = FieldPoly::zero(3, 4).unwrap();
        p.add_term(Monomial::ONE, 2);
        p.add_term(Monomial::from_vars(&[1, 2]).unwrap(), 1);
        p.add_term(Monomial::var(3), 2);
        assert_eq!(p.to_text(), "F3[n=4]: 2 + x1*x2 + 2*x3");
        assert_eq!(FieldPoly::from_text(&p.to_text()).unwrap(), p);
        assert_eq!(
            FieldPoly::from_text("F3[n=2]: 0").unwrap(),
            FieldPoly::zero(3, 2).unwrap()
        );
        let mut rng = CounterRng::new(3);
        for _ in 0..50 {
            let p = random_poly(5, 9, 8, &mut rng);
            assert_eq!(FieldPoly::from_text(&p.to_text()).unwrap(), p);
        }
    }
}
