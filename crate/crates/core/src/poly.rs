//! Exact sparse multivariate polynomial arithmetic over the jet variables.
//!
//! Everything downstream (hierarchy generation, Lie derivatives, Darboux
//! verification, first integrals) is built on [`JetPolynomial`]: a sparse
//! polynomial in `Q[t, k, x1, x2, ...]` with arbitrary-precision rational
//! coefficients and a unique canonical representation, so that symbolic
//! equality is a plain representation check.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Default bound on the jet order (highest admissible `x_i`).
pub const DEFAULT_MAX_JET_ORDER: u32 = 16;

/// One variable of the jet space: time `t`, the parameter `k`, or a jet
/// coordinate `x_i` standing for the (i-1)-th time derivative of `x`.
///
/// The derived ordering is the canonical variable order `t < k < x1 < x2 < ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarId {
    T,
    K,
    X(u32),
}

impl VarId {
    /// Jet coordinate `x_i`. Indices start at 1 (`x1` is the dependent
    /// variable itself).
    pub fn x(i: u32) -> VarId {
        assert!(i >= 1, "jet coordinates are indexed from 1");
        VarId::X(i)
    }

    pub fn jet_index(self) -> Option<u32> {
        match self {
            VarId::X(i) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::T => write!(f, "t"),
            VarId::K => write!(f, "k"),
            VarId::X(i) => write!(f, "x{i}"),
        }
    }
}

/// Construction-time jet-space configuration: how many jet coordinates exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JetSpace {
    max_order: u32,
}

impl Default for JetSpace {
    fn default() -> Self {
        JetSpace::new(DEFAULT_MAX_JET_ORDER)
    }
}

impl JetSpace {
    pub fn new(max_order: u32) -> Self {
        assert!(max_order >= 1, "the jet space needs at least x1");
        JetSpace { max_order }
    }

    pub fn max_order(self) -> u32 {
        self.max_order
    }

    /// Checks that a variable exists in this jet space.
    pub fn check_var(self, v: VarId) -> Result<(), PolyError> {
        match v {
            VarId::X(i) if i == 0 || i > self.max_order => Err(PolyError::JetOrderExceeded {
                index: i,
                max: self.max_order,
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("division by the zero polynomial")]
    DivisionByZeroPolynomial,
    #[error("no value supplied for variable {0}")]
    MissingVariable(VarId),
    #[error("jet coordinate x{index} exceeds the configured maximum order {max}")]
    JetOrderExceeded { index: u32, max: u32 },
}

/// Exponent-sparse power product. No zero exponents are stored and the
/// variable list is kept sorted, so equality is structural.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<(VarId, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { exps: Vec::new() }
    }

    pub fn var(v: VarId) -> Self {
        Monomial { exps: vec![(v, 1)] }
    }

    /// Builds a monomial from arbitrary (variable, exponent) pairs, merging
    /// duplicates and dropping zero exponents.
    pub fn from_exponents<I: IntoIterator<Item = (VarId, u32)>>(pairs: I) -> Self {
        let mut map: BTreeMap<VarId, u32> = BTreeMap::new();
        for (v, e) in pairs {
            if e > 0 {
                *map.entry(v).or_insert(0) += e;
            }
        }
        Monomial {
            exps: map.into_iter().collect(),
        }
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, v: VarId) -> u32 {
        self.exps
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn exponents(&self) -> &[(VarId, u32)] {
        &self.exps
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial::from_exponents(self.exps.iter().chain(other.exps.iter()).copied())
    }

    /// Whether `self` divides `other` component-wise.
    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().all(|(v, e)| other.exponent(*v) >= *e)
    }

    /// Component-wise quotient `self / other`, when it exists.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        if !other.divides(self) {
            return None;
        }
        let mut exps = Vec::with_capacity(self.exps.len());
        for (v, e) in &self.exps {
            let q = e - other.exponent(*v);
            if q > 0 {
                exps.push((*v, q));
            }
        }
        Some(Monomial { exps })
    }

    pub fn max_jet_index(&self) -> Option<u32> {
        self.exps.iter().filter_map(|(v, _)| v.jet_index()).max()
    }

    /// Lexicographic sweep from the most significant variable (highest jet
    /// coordinate) down to `t`; the first differing exponent decides.
    fn lex_cmp(&self, other: &Monomial) -> Ordering {
        let mut a = self.exps.iter().rev();
        let mut b = other.exps.iter().rev();
        let (mut na, mut nb) = (a.next(), b.next());
        loop {
            match (na, nb) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                    Ordering::Greater => return Ordering::Greater,
                    Ordering::Less => return Ordering::Less,
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(eb);
                        }
                        na = a.next();
                        nb = b.next();
                    }
                },
            }
        }
    }
}

/// Graded-lexicographic monomial order: total degree first, then the
/// lexicographic sweep. This is the canonical storage order.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.lex_cmp(other))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Comparator used only for rendering: highest derivative first, matching the
/// usual way the hierarchy members are written out.
pub(crate) fn display_cmp(a: &Monomial, b: &Monomial) -> Ordering {
    b.lex_cmp(a)
}

/// Sparse polynomial over `Q[t, k, x1, x2, ...]` in canonical form: nonzero
/// coefficients only, monomials strictly increasing in graded-lex order. The
/// zero polynomial is the empty term list, so `==` decides symbolic equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct JetPolynomial {
    terms: Vec<(Monomial, BigRational)>,
}

/// Convenience constructor for rational constants.
pub fn rational(num: i64, den: i64) -> BigRational {
    assert!(den != 0);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl JetPolynomial {
    pub fn zero() -> Self {
        JetPolynomial { terms: Vec::new() }
    }

    pub fn one() -> Self {
        JetPolynomial::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        if c.is_zero() {
            JetPolynomial::zero()
        } else {
            JetPolynomial {
                terms: vec![(Monomial::one(), c)],
            }
        }
    }

    pub fn constant_int(c: i64) -> Self {
        JetPolynomial::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn var(v: VarId) -> Self {
        JetPolynomial {
            terms: vec![(Monomial::var(v), BigRational::one())],
        }
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        if c.is_zero() {
            JetPolynomial::zero()
        } else {
            JetPolynomial { terms: vec![(m, c)] }
        }
    }

    /// Single-term convenience: `num/den * prod v^e`. Mostly used by tests
    /// and the transcribed reference tables.
    pub fn term(num: i64, den: i64, pairs: &[(VarId, u32)]) -> Self {
        JetPolynomial::monomial(
            Monomial::from_exponents(pairs.iter().copied()),
            rational(num, den),
        )
    }

    /// Normalizing constructor: merges duplicate monomials, drops zeros, sorts.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, BigRational)>>(iter: I) -> Self {
        let mut map: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (m, c) in iter {
            if c.is_zero() {
                continue;
            }
            match map.entry(m) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let sum = e.get() + c;
                    if sum.is_zero() {
                        e.remove();
                    } else {
                        *e.get_mut() = sum;
                    }
                }
            }
        }
        JetPolynomial {
            terms: map.into_iter().collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    /// `Some(c)` when the polynomial is the constant `c` (including zero).
    pub fn constant_value(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 if self.terms[0].0.is_one() => Some(self.terms[0].1.clone()),
            _ => None,
        }
    }

    pub fn terms(&self) -> &[(Monomial, BigRational)] {
        &self.terms
    }

    /// Leading term in the canonical (graded-lex) order.
    pub fn leading(&self) -> Option<&(Monomial, BigRational)> {
        self.terms.last()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        match self.terms.binary_search_by(|(mm, _)| mm.cmp(m)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => BigRational::zero(),
        }
    }

    pub fn constant_term(&self) -> BigRational {
        self.coefficient(&Monomial::one())
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.terms
            .iter()
            .flat_map(|(m, _)| m.exponents().iter().map(|(v, _)| *v))
            .collect()
    }

    pub fn max_jet_index(&self) -> Option<u32> {
        self.terms.iter().filter_map(|(m, _)| m.max_jet_index()).max()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: VarId) -> u32 {
        self.terms.iter().map(|(m, _)| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return JetPolynomial::zero();
        }
        JetPolynomial {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = JetPolynomial::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative with respect to `v`.
    pub fn partial_derivative(&self, v: VarId) -> Self {
        JetPolynomial::from_terms(self.terms.iter().filter_map(|(m, c)| {
            let e = m.exponent(v);
            if e == 0 {
                return None;
            }
            let mut exps: Vec<(VarId, u32)> = m
                .exponents()
                .iter()
                .filter(|(w, _)| *w != v)
                .copied()
                .collect();
            if e > 1 {
                exps.push((v, e - 1));
            }
            Some((
                Monomial::from_exponents(exps),
                c * BigRational::from_integer(BigInt::from(e)),
            ))
        }))
    }

    /// Substitutes the polynomial `r` for every occurrence of `v`.
    pub fn substitute(&self, v: VarId, r: &JetPolynomial) -> Self {
        let max_e = self.degree_in(v);
        if max_e == 0 {
            return self.clone();
        }
        // Powers of the replacement, computed once.
        let mut powers = Vec::with_capacity(max_e as usize + 1);
        powers.push(JetPolynomial::one());
        for i in 1..=max_e as usize {
            powers.push(&powers[i - 1] * r);
        }
        let mut acc = JetPolynomial::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            let rest = Monomial::from_exponents(
                m.exponents().iter().filter(|(w, _)| *w != v).copied(),
            );
            let base = JetPolynomial::monomial(rest, c.clone());
            acc = &acc + &(&base * &powers[e as usize]);
        }
        acc
    }

    /// Exact polynomial division. Returns `Ok(Some(q))` with `self = q * d`,
    /// `Ok(None)` when no polynomial quotient exists.
    pub fn exact_divide(&self, d: &JetPolynomial) -> Result<Option<JetPolynomial>, PolyError> {
        if d.is_zero() {
            return Err(PolyError::DivisionByZeroPolynomial);
        }
        let (dm, dc) = d.leading().expect("nonzero divisor");
        let mut remainder = self.clone();
        let mut quotient: Vec<(Monomial, BigRational)> = Vec::new();
        while let Some((rm, rc)) = remainder.leading() {
            let Some(qm) = rm.div(dm) else {
                return Ok(None);
            };
            let qc = rc / dc;
            let qterm = JetPolynomial::monomial(qm.clone(), qc.clone());
            remainder = &remainder - &(&qterm * d);
            quotient.push((qm, qc));
        }
        Ok(Some(JetPolynomial::from_terms(quotient)))
    }

    /// Exact evaluation under a rational assignment.
    pub fn evaluate(
        &self,
        assignment: &BTreeMap<VarId, BigRational>,
    ) -> Result<BigRational, PolyError> {
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut prod = c.clone();
            for (v, e) in m.exponents() {
                let val = assignment
                    .get(v)
                    .ok_or(PolyError::MissingVariable(*v))?;
                prod *= val.pow(*e as i32);
            }
            total += prod;
        }
        Ok(total)
    }

    /// IEEE double evaluation under a float assignment.
    pub fn evaluate_f64(&self, assignment: &BTreeMap<VarId, f64>) -> Result<f64, PolyError> {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut prod = c.to_f64().expect("rational out of f64 range");
            for (v, e) in m.exponents() {
                let val = assignment
                    .get(v)
                    .ok_or(PolyError::MissingVariable(*v))?;
                prod *= val.powi(*e as i32);
            }
            total += prod;
        }
        Ok(total)
    }

    /// Splits `self = content * primitive` with the primitive part having
    /// coprime integer coefficients and positive leading coefficient. The
    /// zero polynomial yields `(0, 0)`.
    pub fn content_and_primitive(&self) -> (BigRational, JetPolynomial) {
        if self.is_zero() {
            return (BigRational::zero(), JetPolynomial::zero());
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for (_, c) in &self.terms {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut content = BigRational::new(num_gcd, den_lcm);
        if self.leading().expect("nonzero").1.is_negative() {
            content = -content;
        }
        let prim = JetPolynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c / &content))
                .collect(),
        };
        (content, prim)
    }
}

impl Add for &JetPolynomial {
    type Output = JetPolynomial;
    fn add(self, rhs: &JetPolynomial) -> JetPolynomial {
        // Merge of two sorted term lists.
        let mut out = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < rhs.terms.len() {
            match self.terms[i].0.cmp(&rhs.terms[j].0) {
                Ordering::Less => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(rhs.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &self.terms[i].1 + &rhs.terms[j].1;
                    if !c.is_zero() {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&rhs.terms[j..]);
        JetPolynomial { terms: out }
    }
}

impl Sub for &JetPolynomial {
    type Output = JetPolynomial;
    fn sub(self, rhs: &JetPolynomial) -> JetPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &JetPolynomial {
    type Output = JetPolynomial;
    fn neg(self) -> JetPolynomial {
        JetPolynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Mul for &JetPolynomial {
    type Output = JetPolynomial;
    fn mul(self, rhs: &JetPolynomial) -> JetPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return JetPolynomial::zero();
        }
        let mut map: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let m = ma.mul(mb);
                let c = ca * cb;
                match map.entry(m) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        let sum = e.get() + c;
                        if sum.is_zero() {
                            e.remove();
                        } else {
                            *e.get_mut() = sum;
                        }
                    }
                }
            }
        }
        JetPolynomial {
            terms: map.into_iter().collect(),
        }
    }
}

impl fmt::Display for JetPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::render::render(self, crate::render::Style::Indexed))
    }
}
