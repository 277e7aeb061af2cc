//! Sums of rational powers of polynomials.
//!
//! A [`PowerExpression`] is a finite sum of terms `c * prod_j B_j^{e_j}` with
//! rational coefficients `c`, primitive polynomial bases `B_j`, and rational
//! exponents `e_j`. This is the smallest algebra that holds the non-natural
//! Lagrangians of the second-order hierarchy members, their energies,
//! multipliers, and symplectic densities, while keeping every identity check
//! exact.
//!
//! Zero testing works per group of terms whose exponents differ by integers:
//! factoring out the minimal power of each base leaves an ordinary polynomial
//! whose canonical form decides the group. Groups with incompatible
//! fractional exponents cannot cancel against each other through any of the
//! operations performed here unless the bases satisfy hidden algebraic
//! relations, which is reported as [`ZeroTest::Indeterminate`] rather than
//! guessed at.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::poly::{JetPolynomial, JetSpace, VarId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PowerError {
    #[error("jet coordinate x{needed} exceeds the configured maximum order {max}")]
    JetOrderOverflow { needed: u32, max: u32 },
}

/// One base raised to a rational exponent.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PowerFactor {
    pub base: JetPolynomial,
    pub exponent: BigRational,
}

/// One summand: rational coefficient times a product of power factors,
/// kept sorted by base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerTerm {
    pub coeff: BigRational,
    pub factors: Vec<PowerFactor>,
}

/// Canonicalized sum of power terms. The zero expression is the empty sum.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PowerExpression {
    terms: Vec<PowerTerm>,
}

/// Outcome of the exact zero test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroTest {
    Zero,
    NonZero,
    /// More than one exponent-incompatible group fails to vanish on its own;
    /// cancellation would require algebraic relations between the bases.
    Indeterminate,
}

/// `c^(1/q)` as an exact rational, when `c > 0` is a perfect q-th power.
fn rational_root(c: &BigRational, q: u32) -> Option<BigRational> {
    let rn = c.numer().nth_root(q);
    let rd = c.denom().nth_root(q);
    if &rn.pow(q) == c.numer() && &rd.pow(q) == c.denom() {
        Some(BigRational::new(rn, rd))
    } else {
        None
    }
}

fn pow_i32(c: &BigRational, e: i32) -> BigRational {
    c.pow(e)
}

/// Folds `c^e` (constant base) into the coefficient when that is exactly
/// rational; otherwise records a canonical constant-base factor. Perfect
/// q-th-power contents always fold, so e.g. `(6v+2kx^3)^(2/3)` and
/// `2^(2/3) * (3v+kx^3)^(2/3)` share one representation.
fn fold_constant_power(
    coeff: &mut BigRational,
    factors: &mut BTreeMap<JetPolynomial, BigRational>,
    c: &BigRational,
    e: &BigRational,
) {
    debug_assert!(!c.is_zero());
    if c.is_one() {
        return;
    }
    if e.is_integer() {
        let p = e.to_integer().to_i32().expect("exponent out of range");
        *coeff *= pow_i32(c, p);
        return;
    }
    let p = e.numer().to_i32().expect("exponent out of range");
    let q = e.denom().to_u32().expect("exponent out of range");
    let mut c = c.clone();
    if c.is_negative() {
        if q % 2 == 1 {
            if p % 2 != 0 {
                *coeff = -coeff.clone();
            }
            c = -c;
        } else {
            // Not representable over the rationals; keep the signed constant
            // as an opaque base so canonical forms stay comparable.
            *factors
                .entry(JetPolynomial::constant(c))
                .or_insert_with(BigRational::zero) += e;
            return;
        }
    }
    match rational_root(&c, q) {
        Some(r) => *coeff *= pow_i32(&r, p),
        None => {
            *factors
                .entry(JetPolynomial::constant(c))
                .or_insert_with(BigRational::zero) += e;
        }
    }
}

/// Normalizes one raw factor into the coefficient and the base map.
fn push_factor(
    coeff: &mut BigRational,
    factors: &mut BTreeMap<JetPolynomial, BigRational>,
    base: &JetPolynomial,
    exponent: &BigRational,
) {
    if coeff.is_zero() || exponent.is_zero() {
        return;
    }
    if base.is_zero() {
        assert!(
            exponent.is_positive(),
            "zero base with non-positive exponent"
        );
        *coeff = BigRational::zero();
        return;
    }
    let (content, prim) = base.content_and_primitive();
    fold_constant_power(coeff, factors, &content, exponent);
    if !prim.is_one() {
        *factors
            .entry(prim)
            .or_insert_with(BigRational::zero) += exponent;
    }
}

impl PowerTerm {
    fn canonical(coeff: BigRational, raw: Vec<(JetPolynomial, BigRational)>) -> Option<PowerTerm> {
        let mut coeff = coeff;
        let mut map: BTreeMap<JetPolynomial, BigRational> = BTreeMap::new();
        for (base, exp) in &raw {
            push_factor(&mut coeff, &mut map, base, exp);
            if coeff.is_zero() {
                return None;
            }
        }
        let mut factors = Vec::with_capacity(map.len());
        for (base, exponent) in map {
            if exponent.is_zero() {
                continue;
            }
            // Exponent merging can leave a constant base with an integer
            // exponent; fold it now.
            if let Some(c) = base.constant_value() {
                if exponent.is_integer() {
                    let p = exponent.to_integer().to_i32().expect("exponent out of range");
                    coeff *= pow_i32(&c, p);
                    continue;
                }
            }
            factors.push(PowerFactor { base, exponent });
        }
        if coeff.is_zero() {
            None
        } else {
            Some(PowerTerm { coeff, factors })
        }
    }

    fn exponent_of(&self, base: &JetPolynomial) -> BigRational {
        self.factors
            .iter()
            .find(|f| &f.base == base)
            .map(|f| f.exponent.clone())
            .unwrap_or_else(BigRational::zero)
    }
}

impl PowerExpression {
    pub fn zero() -> Self {
        PowerExpression { terms: Vec::new() }
    }

    pub fn one() -> Self {
        PowerExpression::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        PowerExpression::from_raw(vec![(c, Vec::new())])
    }

    pub fn constant_int(c: i64) -> Self {
        PowerExpression::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn from_poly(p: &JetPolynomial) -> Self {
        PowerExpression::from_factor(p, BigRational::one())
    }

    /// `base^exponent` as a one-term expression.
    pub fn from_factor(base: &JetPolynomial, exponent: BigRational) -> Self {
        PowerExpression::from_raw(vec![(
            BigRational::one(),
            vec![(base.clone(), exponent)],
        )])
    }

    /// Normalizing constructor from raw (coefficient, factor list) data.
    pub fn from_raw(raw: Vec<(BigRational, Vec<(JetPolynomial, BigRational)>)>) -> Self {
        let mut merged: BTreeMap<Vec<PowerFactor>, BigRational> = BTreeMap::new();
        for (coeff, factors) in raw {
            if coeff.is_zero() {
                continue;
            }
            let Some(term) = PowerTerm::canonical(coeff, factors) else {
                continue;
            };
            match merged.entry(term.factors) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(term.coeff);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let sum = e.get() + term.coeff;
                    if sum.is_zero() {
                        e.remove();
                    } else {
                        *e.get_mut() = sum;
                    }
                }
            }
        }
        PowerExpression {
            terms: merged
                .into_iter()
                .map(|(factors, coeff)| PowerTerm { coeff, factors })
                .collect(),
        }
    }

    pub fn terms(&self) -> &[PowerTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(c)` when the expression canonicalizes to the constant `c`.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 if self.terms[0].factors.is_empty() => Some(self.terms[0].coeff.clone()),
            _ => None,
        }
    }

    fn vars(&self) -> std::collections::BTreeSet<VarId> {
        self.terms
            .iter()
            .flat_map(|t| t.factors.iter().flat_map(|f| f.base.vars()))
            .collect()
    }

    /// Exact rational evaluation. `Ok(None)` when a fractional power of an
    /// evaluated base has no rational value at the sample.
    pub fn evaluate_exact(
        &self,
        assignment: &BTreeMap<VarId, BigRational>,
    ) -> Result<Option<BigRational>, crate::poly::PolyError> {
        let mut total = BigRational::zero();
        for term in &self.terms {
            let mut prod = term.coeff.clone();
            for f in &term.factors {
                let value = f.base.evaluate(assignment)?;
                if f.exponent.is_integer() {
                    let p = f.exponent.to_integer().to_i32().expect("exponent out of range");
                    if value.is_zero() {
                        if p > 0 {
                            prod = BigRational::zero();
                            continue;
                        }
                        return Ok(None);
                    }
                    prod *= pow_i32(&value, p);
                    continue;
                }
                let p = f.exponent.numer().to_i32().expect("exponent out of range");
                let q = f.exponent.denom().to_u32().expect("exponent out of range");
                let mut value = value;
                if value.is_negative() {
                    if q % 2 == 0 {
                        return Ok(None);
                    }
                    if p % 2 != 0 {
                        prod = -prod;
                    }
                    value = -value;
                }
                if value.is_zero() {
                    return Ok(None);
                }
                match rational_root(&value, q) {
                    Some(root) => prod *= pow_i32(&root, p),
                    None => return Ok(None),
                }
            }
            total += prod;
        }
        Ok(Some(total))
    }

    /// Semantic constant test: `Some(c)` iff the expression equals `c`
    /// identically. Unlike [`as_constant`](Self::as_constant) this detects
    /// constants hidden behind unfactored bases, by exact evaluation at a
    /// sample followed by an exact zero test of the difference.
    pub fn constant_value(&self) -> Option<BigRational> {
        if let Some(c) = self.as_constant() {
            return Some(c);
        }
        let vars: Vec<VarId> = self.vars().into_iter().collect();
        const PRIMES: [i64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
        'samples: for shift in 0..PRIMES.len() {
            let assignment: BTreeMap<VarId, BigRational> = vars
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    (
                        *v,
                        BigRational::from_integer(BigInt::from(PRIMES[(i + shift) % PRIMES.len()])),
                    )
                })
                .collect();
            for term in &self.terms {
                for f in &term.factors {
                    if f.base.evaluate(&assignment).ok()?.is_zero() {
                        continue 'samples;
                    }
                }
            }
            let Ok(Some(c)) = self.evaluate_exact(&assignment) else {
                return None;
            };
            let diff = self - &PowerExpression::constant(c.clone());
            return match diff.zero_test() {
                ZeroTest::Zero => Some(c),
                _ => None,
            };
        }
        None
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return PowerExpression::zero();
        }
        PowerExpression {
            terms: self
                .terms
                .iter()
                .map(|t| PowerTerm {
                    coeff: &t.coeff * c,
                    factors: t.factors.clone(),
                })
                .collect(),
        }
    }

    fn raw_terms(&self) -> Vec<(BigRational, Vec<(JetPolynomial, BigRational)>)> {
        self.terms
            .iter()
            .map(|t| {
                (
                    t.coeff.clone(),
                    t.factors
                        .iter()
                        .map(|f| (f.base.clone(), f.exponent.clone()))
                        .collect(),
                )
            })
            .collect()
    }

    /// Formal partial derivative: chain rule per factor, product rule per term.
    pub fn derivative(&self, v: VarId) -> Self {
        let mut raw = Vec::new();
        for term in &self.terms {
            for (i, f) in term.factors.iter().enumerate() {
                let dbase = f.base.partial_derivative(v);
                if dbase.is_zero() {
                    continue;
                }
                let mut factors: Vec<(JetPolynomial, BigRational)> = Vec::new();
                for (j, g) in term.factors.iter().enumerate() {
                    if i == j {
                        factors.push((g.base.clone(), &g.exponent - BigRational::one()));
                    } else {
                        factors.push((g.base.clone(), g.exponent.clone()));
                    }
                }
                factors.push((dbase, BigRational::one()));
                raw.push((&term.coeff * &f.exponent, factors));
            }
        }
        PowerExpression::from_raw(raw)
    }

    /// Substitutes a polynomial for a variable inside every base.
    pub fn substitute(&self, v: VarId, r: &JetPolynomial) -> Self {
        let raw = self
            .terms
            .iter()
            .map(|t| {
                (
                    t.coeff.clone(),
                    t.factors
                        .iter()
                        .map(|f| (f.base.substitute(v, r), f.exponent.clone()))
                        .collect(),
                )
            })
            .collect();
        PowerExpression::from_raw(raw)
    }

    pub fn max_jet_index(&self) -> Option<u32> {
        self.terms
            .iter()
            .flat_map(|t| t.factors.iter().filter_map(|f| f.base.max_jet_index()))
            .max()
    }

    /// Total time derivative on the jet space: `sum_i x_{i+1} * d/dx_i + d/dt`.
    pub fn total_time_derivative(&self, space: JetSpace) -> Result<Self, PowerError> {
        let mut out = self.derivative(VarId::T);
        if let Some(top) = self.max_jet_index() {
            if top + 1 > space.max_order() {
                return Err(PowerError::JetOrderOverflow {
                    needed: top + 1,
                    max: space.max_order(),
                });
            }
            for i in 1..=top {
                let d = self.derivative(VarId::x(i));
                if d.is_zero() {
                    continue;
                }
                out = &out + &(&PowerExpression::from_poly(&JetPolynomial::var(VarId::x(i + 1))) * &d);
            }
        }
        Ok(out)
    }

    /// Exact zero test; see the module docs for the grouping strategy.
    pub fn zero_test(&self) -> ZeroTest {
        if self.terms.is_empty() {
            return ZeroTest::Zero;
        }
        let combinable = |a: &PowerTerm, b: &PowerTerm| {
            let mut bases: Vec<&JetPolynomial> =
                a.factors.iter().chain(b.factors.iter()).map(|f| &f.base).collect();
            bases.sort();
            bases.dedup();
            bases
                .iter()
                .all(|base| (a.exponent_of(base) - b.exponent_of(base)).is_integer())
        };
        let mut groups: Vec<Vec<&PowerTerm>> = Vec::new();
        'outer: for term in &self.terms {
            for g in groups.iter_mut() {
                if combinable(g[0], term) {
                    g.push(term);
                    continue 'outer;
                }
            }
            groups.push(vec![term]);
        }
        let mut nonzero_groups = 0usize;
        for group in &groups {
            if !group_vanishes(group) {
                nonzero_groups += 1;
            }
        }
        match nonzero_groups {
            0 => ZeroTest::Zero,
            1 => ZeroTest::NonZero,
            _ => ZeroTest::Indeterminate,
        }
    }
}

/// Factors out the minimal exponent of each base within the group and tests
/// the remaining polynomial combination exactly.
fn group_vanishes(group: &[&PowerTerm]) -> bool {
    let mut bases: Vec<&JetPolynomial> = group
        .iter()
        .flat_map(|t| t.factors.iter().map(|f| &f.base))
        .collect();
    bases.sort();
    bases.dedup();
    // exponent_of reports 0 for absent bases, so absent factors take part
    // in the minimum as the zeroth power.
    let minima: Vec<BigRational> = bases
        .iter()
        .map(|base| {
            group
                .iter()
                .map(|t| t.exponent_of(base))
                .min()
                .expect("nonempty group")
        })
        .collect();
    let mut residual = JetPolynomial::zero();
    for term in group {
        let mut part = JetPolynomial::constant(term.coeff.clone());
        for (base, min) in bases.iter().zip(minima.iter()) {
            let diff = term.exponent_of(base) - min;
            debug_assert!(diff.is_integer() && !diff.is_negative());
            let e = diff.to_integer().to_u32().expect("exponent out of range");
            if e > 0 {
                part = &part * &base.pow(e);
            }
        }
        residual = &residual + &part;
    }
    residual.is_zero()
}

impl Add for &PowerExpression {
    type Output = PowerExpression;
    fn add(self, rhs: &PowerExpression) -> PowerExpression {
        let mut raw = self.raw_terms();
        raw.extend(rhs.raw_terms());
        PowerExpression::from_raw(raw)
    }
}

impl Sub for &PowerExpression {
    type Output = PowerExpression;
    fn sub(self, rhs: &PowerExpression) -> PowerExpression {
        self + &(-rhs)
    }
}

impl Neg for &PowerExpression {
    type Output = PowerExpression;
    fn neg(self) -> PowerExpression {
        PowerExpression {
            terms: self
                .terms
                .iter()
                .map(|t| PowerTerm {
                    coeff: -t.coeff.clone(),
                    factors: t.factors.clone(),
                })
                .collect(),
        }
    }
}

impl Mul for &PowerExpression {
    type Output = PowerExpression;
    fn mul(self, rhs: &PowerExpression) -> PowerExpression {
        let mut raw = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                let mut factors: Vec<(JetPolynomial, BigRational)> = a
                    .factors
                    .iter()
                    .map(|f| (f.base.clone(), f.exponent.clone()))
                    .collect();
                factors.extend(
                    b.factors
                        .iter()
                        .map(|f| (f.base.clone(), f.exponent.clone())),
                );
                raw.push((&a.coeff * &b.coeff, factors));
            }
        }
        PowerExpression::from_raw(raw)
    }
}

/// Vector field whose components are power expressions, acting as a
/// derivation. Component `i` belongs to the coordinate `x_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerVectorField {
    pub components: Vec<PowerExpression>,
}

impl PowerVectorField {
    pub fn new(components: Vec<PowerExpression>) -> Self {
        PowerVectorField { components }
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    /// Applies the field as a derivation: `sum_i X^i * de/dx_i`.
    pub fn apply(&self, e: &PowerExpression) -> PowerExpression {
        let mut out = PowerExpression::zero();
        for (i, comp) in self.components.iter().enumerate() {
            let d = e.derivative(VarId::x(i as u32 + 1));
            if d.is_zero() {
                continue;
            }
            out = &out + &(comp * &d);
        }
        out
    }

    /// Lie bracket `[self, other]`, component-wise.
    pub fn commutator(&self, other: &PowerVectorField) -> PowerVectorField {
        assert_eq!(self.dimension(), other.dimension());
        let components = (0..self.dimension())
            .map(|i| &self.apply(&other.components[i]) - &other.apply(&self.components[i]))
            .collect();
        PowerVectorField { components }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rational;
    use proptest::prelude::*;

    const K: VarId = VarId::K;

    fn x(i: u32) -> VarId {
        VarId::x(i)
    }

    /// v + k*x^3 in jet coordinates.
    fn p1() -> JetPolynomial {
        &JetPolynomial::var(x(2)) + &JetPolynomial::term(1, 1, &[(K, 1), (x(1), 3)])
    }

    /// 3v + k*x^3.
    fn q1() -> JetPolynomial {
        &JetPolynomial::term(3, 1, &[(x(2), 1)]) + &JetPolynomial::term(1, 1, &[(K, 1), (x(1), 3)])
    }

    #[test]
    fn chain_rule_on_inverse_square() {
        // d/dv (v+kx^3)^(-2) = -2 (v+kx^3)^(-3)
        let l = PowerExpression::from_factor(&p1(), rational(-2, 1));
        let got = l.derivative(x(2));
        let expected = PowerExpression::from_factor(&p1(), rational(-3, 1)).scale(&rational(-2, 1));
        assert_eq!(got, expected);
    }

    #[test]
    fn chain_rule_with_fractional_exponent() {
        // d/dv (3v+kx^3)^(2/3) = 2 (3v+kx^3)^(-1/3)
        let l = PowerExpression::from_factor(&q1(), rational(2, 3));
        let got = l.derivative(x(2));
        let expected = PowerExpression::from_factor(&q1(), rational(-1, 3)).scale(&rational(2, 1));
        assert_eq!(got, expected);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let c = PowerExpression::constant_int(7);
        assert!(c.derivative(x(1)).is_zero());
        assert!(c.derivative(VarId::T).is_zero());
    }

    #[test]
    fn identical_terms_cancel() {
        let a = PowerExpression::from_factor(&p1(), rational(-3, 1)).scale(&rational(2, 1));
        assert_eq!((&a - &a).zero_test(), ZeroTest::Zero);
    }

    #[test]
    fn telescoping_group_cancels() {
        // (v+kx^3)^(-3) * ((v+kx^3) - v - kx^3) = 0 after grouping
        let pinv3 = PowerExpression::from_factor(&p1(), rational(-3, 1));
        let v = PowerExpression::from_poly(&JetPolynomial::var(x(2)));
        let kx3 = PowerExpression::from_poly(&JetPolynomial::term(1, 1, &[(K, 1), (x(1), 3)]));
        let p = PowerExpression::from_poly(&p1());
        let e = &(&pinv3 * &p) - &(&pinv3 * &(&v + &kx3));
        assert_eq!(e.zero_test(), ZeroTest::Zero);
    }

    #[test]
    fn content_is_extracted_from_bases() {
        // (6v+2kx^3)^(2/3) == 2^(2/3) * (3v+kx^3)^(2/3)
        let scaled = &JetPolynomial::term(6, 1, &[(x(2), 1)])
            + &JetPolynomial::term(2, 1, &[(K, 1), (x(1), 3)]);
        let lhs = PowerExpression::from_factor(&scaled, rational(2, 3));
        let two23 = PowerExpression::from_factor(&JetPolynomial::constant_int(2), rational(2, 3));
        let rhs = &two23 * &PowerExpression::from_factor(&q1(), rational(2, 3));
        assert_eq!((&lhs - &rhs).zero_test(), ZeroTest::Zero);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn perfect_power_content_folds_to_rational() {
        // (24v+8kx^3)^(2/3) = 4 (3v+kx^3)^(2/3)
        let scaled = &JetPolynomial::term(24, 1, &[(x(2), 1)])
            + &JetPolynomial::term(8, 1, &[(K, 1), (x(1), 3)]);
        let lhs = PowerExpression::from_factor(&scaled, rational(2, 3));
        let rhs = PowerExpression::from_factor(&q1(), rational(2, 3)).scale(&rational(4, 1));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn negative_integer_content_folds() {
        // (-2v)^3 = -8 v^3
        let base = JetPolynomial::term(-2, 1, &[(x(2), 1)]);
        let lhs = PowerExpression::from_factor(&base, rational(3, 1));
        let v3 = JetPolynomial::term(1, 1, &[(x(2), 3)]);
        assert_eq!((&lhs + &PowerExpression::from_poly(&v3).scale(&rational(8, 1))).zero_test(), ZeroTest::Zero);
    }

    #[test]
    fn incompatible_groups_are_indeterminate() {
        let a = PowerExpression::from_factor(&JetPolynomial::var(x(1)), rational(1, 2));
        let b = PowerExpression::from_factor(&JetPolynomial::var(x(2)), rational(1, 2));
        assert_eq!((&a + &b).zero_test(), ZeroTest::Indeterminate);
    }

    #[test]
    fn single_group_nonzero_is_definite() {
        let b = &JetPolynomial::var(x(1)) + &JetPolynomial::one();
        let root = PowerExpression::from_factor(&b, rational(1, 2));
        let v = PowerExpression::from_poly(&JetPolynomial::var(x(2)));
        let u = PowerExpression::from_poly(&JetPolynomial::var(x(1)));
        let e = &(&root * &v) - &(&root * &u);
        assert_eq!(e.zero_test(), ZeroTest::NonZero);
    }

    #[test]
    fn total_time_derivative_examples() {
        let space = JetSpace::default();
        // d/dt (v + kx^3) = a + 3kx^2 v
        let got = PowerExpression::from_poly(&p1()).total_time_derivative(space).unwrap();
        let expected = &JetPolynomial::var(x(3))
            + &JetPolynomial::term(3, 1, &[(K, 1), (x(1), 2), (x(2), 1)]);
        assert_eq!((&got - &PowerExpression::from_poly(&expected)).zero_test(), ZeroTest::Zero);
        // d/dt x = v
        let got = PowerExpression::from_poly(&JetPolynomial::var(x(1)))
            .total_time_derivative(space)
            .unwrap();
        assert_eq!(got, PowerExpression::from_poly(&JetPolynomial::var(x(2))));
    }

    #[test]
    fn total_time_derivative_of_momentum() {
        // d/dt (-2 (v+kx^3)^(-3)) = 6 (v+kx^3)^(-4) (a + 3kx^2 v)
        let space = JetSpace::default();
        let e = PowerExpression::from_factor(&p1(), rational(-3, 1)).scale(&rational(-2, 1));
        let got = e.total_time_derivative(space).unwrap();
        let pdot = &JetPolynomial::var(x(3))
            + &JetPolynomial::term(3, 1, &[(K, 1), (x(1), 2), (x(2), 1)]);
        let expected = &PowerExpression::from_factor(&p1(), rational(-4, 1)).scale(&rational(6, 1))
            * &PowerExpression::from_poly(&pdot);
        assert_eq!((&got - &expected).zero_test(), ZeroTest::Zero);
    }

    #[test]
    fn jet_overflow_in_total_derivative() {
        let small = JetSpace::new(2);
        let e = PowerExpression::from_poly(&JetPolynomial::var(x(2)));
        assert_eq!(
            e.total_time_derivative(small),
            Err(PowerError::JetOrderOverflow { needed: 3, max: 2 })
        );
    }

    #[test]
    fn constants_are_recognized() {
        assert_eq!(PowerExpression::zero().as_constant(), Some(rational(0, 1)));
        assert_eq!(
            PowerExpression::constant(rational(-1, 1)).as_constant(),
            Some(rational(-1, 1))
        );
        assert_eq!(PowerExpression::from_poly(&p1()).as_constant(), None);
        // 2^3 folds into the coefficient
        let folded = PowerExpression::from_factor(&JetPolynomial::constant_int(2), rational(3, 1));
        assert_eq!(folded.as_constant(), Some(rational(8, 1)));
    }

    #[test]
    fn commutator_of_coordinate_fields() {
        // [d/dx, x d/dx] = d/dx
        let one = PowerExpression::one();
        let xe = PowerExpression::from_poly(&JetPolynomial::var(x(1)));
        let z = PowerVectorField::new(vec![one.clone()]);
        let w = PowerVectorField::new(vec![xe]);
        let c = z.commutator(&w);
        assert_eq!((&c.components[0] - &one).zero_test(), ZeroTest::Zero);
    }

    fn arb_pe() -> impl Strategy<Value = PowerExpression> {
        // Small expressions built from the bases v+kx^3 and x1 with mixed
        // integer/fractional exponents.
        proptest::collection::vec(
            (
                -4i64..5,
                -2i64..3,
                prop_oneof![Just(rational(1, 1)), Just(rational(-1, 2)), Just(rational(2, 3))],
            ),
            0..4,
        )
        .prop_map(|spec| {
            let raw = spec
                .into_iter()
                .map(|(c, e1, e2)| {
                    (
                        rational(c, 1),
                        vec![
                            (p1(), BigRational::from_integer(BigInt::from(e1))),
                            (JetPolynomial::var(VarId::x(1)), e2),
                        ],
                    )
                })
                .collect();
            PowerExpression::from_raw(raw)
        })
    }

    proptest! {
        #[test]
        fn derivative_is_linear(a in arb_pe(), b in arb_pe()) {
            let v = VarId::x(2);
            let lhs = (&a + &b).derivative(v);
            let rhs = &a.derivative(v) + &b.derivative(v);
            prop_assert_eq!((&lhs - &rhs).zero_test(), ZeroTest::Zero);
        }

        #[test]
        fn derivative_satisfies_leibniz(a in arb_pe(), b in arb_pe()) {
            let v = VarId::x(1);
            let lhs = (&a * &b).derivative(v);
            let rhs = &(&a.derivative(v) * &b) + &(&a * &b.derivative(v));
            prop_assert_eq!((&lhs - &rhs).zero_test(), ZeroTest::Zero);
        }

        #[test]
        fn subtraction_of_equal_products_is_zero(a in arb_pe(), b in arb_pe()) {
            let p = &a * &b;
            let q = &b * &a;
            prop_assert_eq!((&p - &q).zero_test(), ZeroTest::Zero);
        }
    }
}
