//! Time-polynomial first integrals of the order-n hierarchy members.
//!
//! The chain polynomials give rise to the rational functions
//! `T_r = P_{r-1} / P_{n-1}` whose time evolution is a shift along the chain,
//! and from those to the first integrals `J_tr` that depend polynomially on
//! time. Equivalently the integrals are quotients of the time-dependent
//! Darboux family, arranged in the matrix `J_ab = D_a / D_b`. All
//! conservation identities are verified as cleared-denominator polynomial
//! identities; they hold away from the singular surface `P_{n-1} = 0`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::dynamics::{build_gamma, chain_polynomials, time_dependent_darboux, DynamicsError};
use crate::hierarchy::OperatorKind;
use crate::poly::{JetPolynomial, JetSpace, PolyError, VarId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IntegralsError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("chain identity failed during construction: {0}")]
    ChainIdentityViolation(String),
    #[error("sample lies on or too close to the singular surface")]
    SingularSample,
}

/// Quotient of two jet polynomials. No reduction is attempted beyond the
/// sign convention that the denominator's leading canonical coefficient is
/// positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalSurface {
    numerator: JetPolynomial,
    denominator: JetPolynomial,
}

impl RationalSurface {
    pub fn new(numerator: JetPolynomial, denominator: JetPolynomial) -> Self {
        assert!(!denominator.is_zero(), "zero denominator");
        if denominator.leading().expect("nonzero").1.is_negative() {
            RationalSurface {
                numerator: -&numerator,
                denominator: -&denominator,
            }
        } else {
            RationalSurface {
                numerator,
                denominator,
            }
        }
    }

    pub fn numerator(&self) -> &JetPolynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &JetPolynomial {
        &self.denominator
    }

    /// Identically one, i.e. numerator and denominator coincide.
    pub fn is_one(&self) -> bool {
        self.numerator == self.denominator
    }

    pub fn mul(&self, other: &RationalSurface) -> RationalSurface {
        RationalSurface::new(
            &self.numerator * &other.numerator,
            &self.denominator * &other.denominator,
        )
    }

    /// Evaluates numerator and denominator separately and divides last.
    pub fn evaluate_f64(&self, assignment: &BTreeMap<VarId, f64>) -> Result<f64, PolyError> {
        let num = self.numerator.evaluate_f64(assignment)?;
        let den = self.denominator.evaluate_f64(assignment)?;
        Ok(num / den)
    }
}

/// First integral polynomial in time: a sum of terms
/// `coeff * t^power * surface`, where the surface `None` stands for the
/// constant 1 (the pure time-power term).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimePolynomialIntegral {
    terms: Vec<(BigRational, u32, Option<RationalSurface>)>,
}

impl TimePolynomialIntegral {
    pub fn terms(&self) -> &[(BigRational, u32, Option<RationalSurface>)] {
        &self.terms
    }

    /// Degree in t.
    pub fn t_degree(&self) -> u32 {
        self.terms.iter().map(|(_, p, _)| *p).max().unwrap_or(0)
    }

    pub fn leading_t_coefficient(&self) -> BigRational {
        let deg = self.t_degree();
        self.terms
            .iter()
            .filter(|(_, p, _)| *p == deg)
            .map(|(c, _, _)| c.clone())
            .sum()
    }

    /// The integral written over the common denominator `P_{n-1}`:
    /// numerator polynomial in `(t, k, x)` and the denominator.
    pub fn over_common_denominator(&self) -> (JetPolynomial, JetPolynomial) {
        let den = self
            .terms
            .iter()
            .find_map(|(_, _, s)| s.as_ref().map(|s| s.denominator().clone()))
            .expect("at least one surface term");
        let mut num = JetPolynomial::zero();
        for (coeff, power, surface) in &self.terms {
            let tpow = JetPolynomial::term(1, 1, &[(VarId::T, *power)]).scale(coeff);
            let part = match surface {
                Some(s) => {
                    debug_assert_eq!(s.denominator(), &den);
                    &tpow * s.numerator()
                }
                None => &tpow * &den,
            };
            num = &num + &part;
        }
        (num, den)
    }

    pub fn evaluate_f64(&self, assignment: &BTreeMap<VarId, f64>) -> Result<f64, PolyError> {
        let (num, den) = self.over_common_denominator();
        Ok(num.evaluate_f64(assignment)? / den.evaluate_f64(assignment)?)
    }
}

/// The sequence `T_1, ..., T_n` with `T_r = P_{r-1} / P_{n-1}`. Verifies the
/// shift property `Gamma(T_r) = T_{r+1}` (cross-multiplied) and `T_n = 1`,
/// `Gamma(T_n) = 0` before returning.
pub fn t_sequence(
    space: JetSpace,
    kind: OperatorKind,
    n: u32,
) -> Result<Vec<RationalSurface>, IntegralsError> {
    assert!(n >= 1);
    let chain = chain_polynomials(space, kind, n)?;
    let gamma = build_gamma(space, kind, n)?;
    let den = chain[(n - 1) as usize].clone();
    let d_den = gamma.lie_derivative(&den)?;
    let sequence: Vec<RationalSurface> = (0..n as usize)
        .map(|r| RationalSurface::new(chain[r].clone(), den.clone()))
        .collect();
    for r in 0..n as usize {
        // d/dt (N/D) = (N' D - N D') / D^2 must equal T_{r+1} = P_r'/D,
        // i.e. N' D - N D' = P_{r+1} D; for r = n-1 the right side is 0.
        let num = &sequence[r].numerator;
        let d_num = gamma.lie_derivative(num)?;
        let lhs = &(&d_num * &den) - &(num * &d_den);
        let rhs = if r + 1 < n as usize {
            &chain[r + 1] * &den
        } else {
            JetPolynomial::zero()
        };
        if lhs != rhs {
            return Err(IntegralsError::ChainIdentityViolation(format!(
                "T-sequence shift at n={n}, r={}",
                r + 1
            )));
        }
    }
    if !sequence[(n - 1) as usize].is_one() {
        return Err(IntegralsError::ChainIdentityViolation(format!(
            "T_{n} != 1 at n={n}"
        )));
    }
    Ok(sequence)
}

/// The `n-1` first integrals
/// `J_tr = sum_{j=0}^{r} (-1)^j t^j / j! * T_{n-r+j}`, with the `j = r` term
/// being the pure time power. Conservation under the suspended field is
/// verified (cleared-denominator) before returning.
pub fn j_integrals(
    space: JetSpace,
    kind: OperatorKind,
    n: u32,
) -> Result<Vec<TimePolynomialIntegral>, IntegralsError> {
    assert!(n >= 2);
    let ts = t_sequence(space, kind, n)?;
    let gamma_t = build_gamma(space, kind, n)?.suspend();
    let mut integrals = Vec::with_capacity((n - 1) as usize);
    for r in 1..n {
        let mut terms = Vec::with_capacity(r as usize + 1);
        let mut factorial = BigInt::one();
        for j in 0..=r {
            if j > 0 {
                factorial *= BigInt::from(j);
            }
            let mut coeff = BigRational::new(BigInt::one(), factorial.clone());
            if j % 2 == 1 {
                coeff = -coeff;
            }
            let index = n - r + j; // 1-based index into the T sequence
            let surface = if index == n {
                None
            } else {
                Some(ts[(index - 1) as usize].clone())
            };
            terms.push((coeff, j, surface));
        }
        let integral = TimePolynomialIntegral { terms };
        //

        // Conservation: with J = U/D, Gamma_t(J) = 0 iff
        // Gamma_t(U) D - U Gamma_t(D) = 0.
        let (num, den) = integral.over_common_denominator();
        let d_num = gamma_t.lie_derivative(&num)?;
        let d_den = gamma_t.lie_derivative(&den)?;
        let residual = &(&d_num * &den) - &(&num * &d_den);
        if !residual.is_zero() {
            return Err(IntegralsError::ChainIdentityViolation(format!(
                "conservation of J_t{r} at n={n}"
            )));
        }
        integrals.push(integral);
    }
    Ok(integrals)
}

/// The n-by-n matrix of first integrals `J_ab = D_a / D_b` built from the
/// time-dependent Darboux family; every entry is verified conserved under
/// the suspended field (cleared-denominator).
pub fn j_matrix(
    space: JetSpace,
    kind: OperatorKind,
    n: u32,
) -> Result<Vec<Vec<RationalSurface>>, IntegralsError> {
    assert!(n >= 1);
    let family = time_dependent_darboux(space, kind, n)?;
    let gamma_t = build_gamma(space, kind, n)?.suspend();
    let derivatives: Vec<JetPolynomial> = family
        .iter()
        .map(|d| gamma_t.lie_derivative(d))
        .collect::<Result<_, _>>()?;
    let mut matrix = Vec::with_capacity(n as usize);
    for a in 0..n as usize {
        let mut row = Vec::with_capacity(n as usize);
        for b in 0..n as usize {
            let residual =
                &(&derivatives[a] * &family[b]) - &(&family[a] * &derivatives[b]);
            if !residual.is_zero() {
                return Err(IntegralsError::ChainIdentityViolation(format!(
                    "conservation of J_{}{} at n={n}",
                    a + 1,
                    b + 1
                )));
            }
            row.push(RationalSurface::new(family[a].clone(), family[b].clone()));
        }
        matrix.push(row);
    }
    Ok(matrix)
}

/// Numeric witness for functional independence: the rank of the
/// `(n-1) x n` Jacobian of `(J_t1, ..., J_t,n-1)` with respect to
/// `(x1, ..., xn)`, using exact symbolic partials evaluated at the sample.
/// Singular values below `1e-8` times the largest do not count.
pub fn independence_rank(
    space: JetSpace,
    kind: OperatorKind,
    n: u32,
    sample: &BTreeMap<VarId, f64>,
    t: f64,
) -> Result<usize, IntegralsError> {
    assert!(n >= 2);
    let chain = chain_polynomials(space, kind, n)?;
    let mut assignment = sample.clone();
    assignment.insert(VarId::T, t);
    let guard = chain[(n - 1) as usize].evaluate_f64(&assignment)?;
    if guard.abs() <= 1e-6 {
        return Err(IntegralsError::SingularSample);
    }
    let integrals = j_integrals(space, kind, n)?;
    let rows = (n - 1) as usize;
    let cols = n as usize;
    let mut jac = DMatrix::<f64>::zeros(rows, cols);
    for (r, integral) in integrals.iter().enumerate() {
        let (num, den) = integral.over_common_denominator();
        let num_val = num.evaluate_f64(&assignment)?;
        let den_val = den.evaluate_f64(&assignment)?;
        for c in 0..cols {
            let v = VarId::x(c as u32 + 1);
            let dn = num.partial_derivative(v).evaluate_f64(&assignment)?;
            let dd = den.partial_derivative(v).evaluate_f64(&assignment)?;
            jac[(r, c)] = (dn * den_val - num_val * dd) / (den_val * den_val);
        }
    }
    let svd = jac.svd(false, false);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if max_sv == 0.0 {
        return Ok(0);
    }
    Ok(svd
        .singular_values
        .iter()
        .filter(|s| **s > 1e-8 * max_sv)
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rational;

    const K: VarId = VarId::K;

    fn x(i: u32) -> VarId {
        VarId::x(i)
    }

    fn space() -> JetSpace {
        JetSpace::default()
    }

    fn abel_ts(n: u32) -> Vec<RationalSurface> {
        t_sequence(space(), OperatorKind::Abel, n).unwrap()
    }

    #[test]
    fn t1_of_order_two() {
        // T_1^(2) = x / (v + k x^3)
        let ts = abel_ts(2);
        assert_eq!(ts[0].numerator(), &JetPolynomial::var(x(1)));
        let p1 = &JetPolynomial::var(x(2)) + &JetPolynomial::term(1, 1, &[(K, 1), (x(1), 3)]);
        assert_eq!(ts[0].denominator(), &p1);
        assert!(ts[1].is_one());
    }

    #[test]
    fn t2_of_order_four() {
        // T_2^(4) = (v + k x^3) / P_3
        let ts = abel_ts(4);
        let p1 = &JetPolynomial::var(x(2)) + &JetPolynomial::term(1, 1, &[(K, 1), (x(1), 3)]);
        assert_eq!(ts[1].numerator(), &p1);
        let chain = chain_polynomials(space(), OperatorKind::Abel, 4).unwrap();
        assert_eq!(ts[1].denominator(), &chain[3]);
    }

    #[test]
    fn t_sequences_verify_for_small_orders() {
        for n in 1..=6u32 {
            let ts = abel_ts(n);
            assert_eq!(ts.len(), n as usize);
            assert!(ts[(n - 1) as usize].is_one());
        }
    }

    #[test]
    fn j_t1_of_order_two() {
        // J_t1 = T_1 - t: two terms with coefficients 1 and -1.
        let js = j_integrals(space(), OperatorKind::Abel, 2).unwrap();
        assert_eq!(js.len(), 1);
        let j = &js[0];
        assert_eq!(j.terms().len(), 2);
        assert_eq!(j.terms()[0].0, rational(1, 1));
        assert!(j.terms()[0].2.is_some());
        assert_eq!(j.terms()[1], (rational(-1, 1), 1, None));
    }

    #[test]
    fn j_t3_of_order_four_structure() {
        // J_t3 = T_1 - t T_2 + (1/2) t^2 T_3 - (1/6) t^3
        let js = j_integrals(space(), OperatorKind::Abel, 4).unwrap();
        let j = &js[2];
        assert_eq!(j.t_degree(), 3);
        let coeffs: Vec<BigRational> = j.terms().iter().map(|(c, _, _)| c.clone()).collect();
        assert_eq!(
            coeffs,
            vec![rational(1, 1), rational(-1, 1), rational(1, 2), rational(-1, 6)]
        );
        assert!(j.terms()[3].2.is_none());
    }

    #[test]
    fn j_reduces_to_t_at_time_zero() {
        let n = 4u32;
        let ts = abel_ts(n);
        let js = j_integrals(space(), OperatorKind::Abel, n).unwrap();
        for (r, j) in js.iter().enumerate() {
            // only the j = 0 term survives at t = 0
            let (num, den) = j.over_common_denominator();
            let num0 = num.substitute(VarId::T, &JetPolynomial::zero());
            let t_index = (n as usize - 1) - (r + 1); // T_{n-r}, 0-based
            assert_eq!(&num0, ts[t_index].numerator(), "r={}", r + 1);
            assert_eq!(&den, ts[t_index].denominator());
        }
    }

    #[test]
    fn degree_structure_of_j_integrals() {
        for n in 2..=6u32 {
            let js = j_integrals(space(), OperatorKind::Abel, n).unwrap();
            for (idx, j) in js.iter().enumerate() {
                let r = idx as u32 + 1;
                assert_eq!(j.t_degree(), r);
                assert_eq!(j.terms().len(), r as usize + 1);
                let mut expected = rational(1, 1);
                let mut fact = BigInt::one();
                for i in 1..=r {
                    fact *= BigInt::from(i);
                }
                expected /= BigRational::from_integer(fact);
                if r % 2 == 1 {
                    expected = -expected;
                }
                assert_eq!(j.leading_t_coefficient(), expected, "n={n}, r={r}");
            }
        }
    }

    #[test]
    fn j_integrals_match_darboux_quotients() {
        // J_tr over the common denominator equals D_{r+1} / D_1 exactly.
        for n in 2..=6u32 {
            let js = j_integrals(space(), OperatorKind::Abel, n).unwrap();
            let family = time_dependent_darboux(space(), OperatorKind::Abel, n).unwrap();
            for (idx, j) in js.iter().enumerate() {
                let (num, den) = j.over_common_denominator();
                assert_eq!(num, family[idx + 1], "numerator n={n}, r={}", idx + 1);
                assert_eq!(den, family[0], "denominator n={n}");
            }
        }
    }

    #[test]
    fn j_matrix_structure() {
        let n = 3u32;
        let m = j_matrix(space(), OperatorKind::Abel, n).unwrap();
        for a in 0..n as usize {
            assert!(m[a][a].is_one());
            for b in 0..n as usize {
                assert!(m[a][b].mul(&m[b][a]).is_one());
            }
        }
    }

    #[test]
    fn j_matrix_entry_at_time_zero_is_t1() {
        // entry (n, 1) at t=0: P_0 / P_{n-1} = T_1
        let n = 2u32;
        let m = j_matrix(space(), OperatorKind::Abel, n).unwrap();
        let entry = &m[(n - 1) as usize][0];
        let ts = abel_ts(n);
        let num0 = entry.numerator().substitute(VarId::T, &JetPolynomial::zero());
        let den0 = entry.denominator().substitute(VarId::T, &JetPolynomial::zero());
        assert_eq!(&num0, ts[0].numerator());
        assert_eq!(&den0, ts[0].denominator());
    }

    fn sample_map(vals: &[(VarId, f64)]) -> BTreeMap<VarId, f64> {
        vals.iter().copied().collect()
    }

    #[test]
    fn rank_at_reference_sample() {
        let sample = sample_map(&[
            (x(1), 1.0),
            (x(2), 1.0),
            (x(3), 1.0),
            (K, 1.0),
        ]);
        let rank = independence_rank(space(), OperatorKind::Abel, 3, &sample, 0.0).unwrap();
        assert_eq!(rank, 2);
    }

    #[test]
    fn rank_for_order_two_and_four() {
        let sample = sample_map(&[(x(1), 1.0), (x(2), 0.5), (K, 1.0)]);
        assert_eq!(
            independence_rank(space(), OperatorKind::Abel, 2, &sample, 0.0).unwrap(),
            1
        );
        let sample = sample_map(&[
            (x(1), 1.0),
            (x(2), 0.5),
            (x(3), -0.5),
            (x(4), 2.0),
            (K, 1.0),
        ]);
        assert_eq!(
            independence_rank(space(), OperatorKind::Abel, 4, &sample, 0.0).unwrap(),
            3
        );
    }

    #[test]
    fn singular_sample_is_rejected() {
        // P_1 = v + k x^3 = 0 at (x, v) = (1, -1), k = 1.
        let sample = sample_map(&[(x(1), 1.0), (x(2), -1.0), (K, 1.0)]);
        assert_eq!(
            independence_rank(space(), OperatorKind::Abel, 2, &sample, 0.0),
            Err(IntegralsError::SingularSample)
        );
    }

    #[test]
    fn riccati_integrals_also_verify() {
        for n in 2..=4u32 {
            j_integrals(space(), OperatorKind::Riccati, n).unwrap();
            j_matrix(space(), OperatorKind::Riccati, n).unwrap();
        }
    }
}
