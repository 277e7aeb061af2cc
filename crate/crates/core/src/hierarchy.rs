//! Generation of the Riccati and Abel equation hierarchies.
//!
//! The two hierarchies arise from repeated application of the operator
//! `D = d/dt + k*x^s` (s = 1 for Riccati, s = 2 for Abel) to the dependent
//! variable. On the jet space the total time derivative acts as
//! `sum_i x_{i+1} * d/dx_i + d/dt`, so every member is an exact polynomial
//! and the chain can be generated to any order within the configured jet
//! bounds.

use serde::Serialize;
use thiserror::Error;

use crate::poly::{JetPolynomial, JetSpace, VarId};

/// Which first-order seed equation the chain grows from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Riccati,
    Abel,
}

impl OperatorKind {
    /// Exponent `s` in the multiplicative part `k*x1^s`.
    pub fn power(self) -> u32 {
        match self {
            OperatorKind::Riccati => 1,
            OperatorKind::Abel => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Riccati => "riccati",
            OperatorKind::Abel => "abel",
        }
    }

    /// `k*x1^s`, the multiplicative part of the operator.
    pub fn multiplier(self) -> JetPolynomial {
        JetPolynomial::term(1, 1, &[(VarId::K, 1), (VarId::x(1), self.power())])
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HierarchyError {
    #[error("jet coordinate x{needed} exceeds the configured maximum order {max}")]
    JetOrderOverflow { needed: u32, max: u32 },
    #[error("superposition coefficient {index} involves a non-time variable")]
    NonTimeCoefficient { index: usize },
}

/// One member of a hierarchy: the order-m expression `D^m x` together with
/// the force `F_m` such that the equation reads `x_{m+1} = F_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HierarchyMember {
    pub kind: OperatorKind,
    pub order: u32,
    /// `D^m x` in jet coordinates; equals `x_{m+1} - force`.
    pub expression: JetPolynomial,
    /// The highest derivative solved for: `F_m = x_{m+1} - expression`.
    pub force: JetPolynomial,
}

/// Total time derivative realized on the jet space:
/// `sum_i x_{i+1} * df/dx_i + df/dt`.
pub fn total_derivative(space: JetSpace, f: &JetPolynomial) -> Result<JetPolynomial, HierarchyError> {
    if let Some(j) = f.max_jet_index() {
        if j + 1 > space.max_order() {
            return Err(HierarchyError::JetOrderOverflow {
                needed: j + 1,
                max: space.max_order(),
            });
        }
    }
    let mut out = f.partial_derivative(VarId::T);
    if let Some(j) = f.max_jet_index() {
        for i in 1..=j {
            let df = f.partial_derivative(VarId::x(i));
            if df.is_zero() {
                continue;
            }
            out = &out + &(&JetPolynomial::var(VarId::x(i + 1)) * &df);
        }
    }
    Ok(out)
}

/// One application of the hierarchy operator: `total derivative + k*x1^s * f`.
pub fn apply_operator(
    space: JetSpace,
    kind: OperatorKind,
    f: &JetPolynomial,
) -> Result<JetPolynomial, HierarchyError> {
    let dt = total_derivative(space, f)?;
    Ok(&dt + &(&kind.multiplier() * f))
}

/// The order-m member `D^m x`, generated by m-fold operator application.
pub fn hierarchy_member(
    space: JetSpace,
    kind: OperatorKind,
    m: u32,
) -> Result<HierarchyMember, HierarchyError> {
    let mut expression = JetPolynomial::var(VarId::x(1));
    for _ in 0..m {
        expression = apply_operator(space, kind, &expression)?;
    }
    let force = &JetPolynomial::var(VarId::x(m + 1)) - &expression;
    Ok(HierarchyMember {
        kind,
        order: m,
        expression,
        force,
    })
}

/// General superposition with polynomial-in-time coefficients:
/// `coefficients[i]` multiplies the member of order `n - i`, where `n` is the
/// number of coefficients, and `tail` is the inhomogeneous term. So
/// `[p0, p1]` with tail `q` builds `p0*D^2 x + p1*D x + q`.
pub fn superposition_equation(
    space: JetSpace,
    kind: OperatorKind,
    coefficients: &[JetPolynomial],
    tail: &JetPolynomial,
) -> Result<JetPolynomial, HierarchyError> {
    assert!(!coefficients.is_empty(), "at least one coefficient required");
    let time_only = |p: &JetPolynomial| p.vars().iter().all(|v| *v == VarId::T);
    for (index, c) in coefficients.iter().enumerate() {
        if !time_only(c) {
            return Err(HierarchyError::NonTimeCoefficient { index });
        }
    }
    if !time_only(tail) {
        return Err(HierarchyError::NonTimeCoefficient {
            index: coefficients.len(),
        });
    }
    let n = coefficients.len() as u32;
    let mut out = tail.clone();
    for (i, c) in coefficients.iter().enumerate() {
        let member = hierarchy_member(space, kind, n - i as u32)?;
        out = &out + &(c * &member.expression);
    }
    Ok(out)
}

/// Hand-transcribed reference expansions of the first hierarchy members, used
/// as regression fixtures for the generator.
pub mod tables {
    use super::*;

    fn t(num: i64, pairs: &[(VarId, u32)]) -> JetPolynomial {
        JetPolynomial::term(num, 1, pairs)
    }

    const K: VarId = VarId::K;

    /// Riccati members `D_R^m x` for m = 0..=4 as classically tabulated.
    pub fn riccati_expansion(m: u32) -> Option<JetPolynomial> {
        let x = VarId::x;
        let p = match m {
            0 => t(1, &[(x(1), 1)]),
            1 => &t(1, &[(x(2), 1)]) + &t(1, &[(K, 1), (x(1), 2)]),
            2 => {
                let mut p = t(1, &[(x(3), 1)]);
                p = &p + &t(3, &[(K, 1), (x(1), 1), (x(2), 1)]);
                &p + &t(1, &[(K, 2), (x(1), 3)])
            }
            3 => {
                let mut p = t(1, &[(x(4), 1)]);
                p = &p + &t(4, &[(K, 1), (x(1), 1), (x(3), 1)]);
                p = &p + &t(6, &[(K, 2), (x(1), 2), (x(2), 1)]);
                p = &p + &t(3, &[(K, 1), (x(2), 2)]);
                &p + &t(1, &[(K, 3), (x(1), 4)])
            }
            4 => {
                let mut p = t(1, &[(x(5), 1)]);
                p = &p + &t(5, &[(K, 1), (x(1), 1), (x(4), 1)]);
                p = &p + &t(10, &[(K, 1), (x(2), 1), (x(3), 1)]);
                p = &p + &t(15, &[(K, 2), (x(1), 1), (x(2), 2)]);
                p = &p + &t(10, &[(K, 2), (x(1), 2), (x(3), 1)]);
                p = &p + &t(10, &[(K, 3), (x(1), 3), (x(2), 1)]);
                &p + &t(1, &[(K, 4), (x(1), 5)])
            }
            _ => return None,
        };
        Some(p)
    }

    /// Abel members `D_A^m x` for m = 0..=4 as classically tabulated.
    ///
    /// The order-4 entry reproduces a known misprint in the classical
    /// listing: the term `2*k^2*x1^3 * 7*x1*x2` should read
    /// `2*k^2*x1^3 * 7*x1*x3` (the corresponding chain computation shows the
    /// `14*k^2*x1^4*x3` term). Use [`abel_expansion_corrected`] for the
    /// operator-generated form.
    pub fn abel_expansion(m: u32) -> Option<JetPolynomial> {
        let x = VarId::x;
        let p = match m {
            0 => t(1, &[(x(1), 1)]),
            1 => &t(1, &[(x(2), 1)]) + &t(1, &[(K, 1), (x(1), 3)]),
            2 => {
                let mut p = t(1, &[(x(3), 1)]);
                p = &p + &t(4, &[(K, 1), (x(1), 2), (x(2), 1)]);
                &p + &t(1, &[(K, 2), (x(1), 5)])
            }
            3 => {
                let mut p = t(1, &[(x(4), 1)]);
                p = &p + &t(5, &[(K, 1), (x(1), 2), (x(3), 1)]);
                p = &p + &t(8, &[(K, 1), (x(1), 1), (x(2), 2)]);
                p = &p + &t(9, &[(K, 2), (x(1), 4), (x(2), 1)]);
                &p + &t(1, &[(K, 3), (x(1), 7)])
            }
            4 => {
                // Misprinted final term: 14*k^2*x1^4*x2 instead of
                // 14*k^2*x1^4*x3.
                let p = abel4_common();
                &p + &t(14, &[(K, 2), (x(1), 4), (x(2), 1)])
            }
            _ => return None,
        };
        Some(p)
    }

    /// The order-4 Abel member as the operator actually produces it.
    pub fn abel_expansion_corrected(m: u32) -> Option<JetPolynomial> {
        let x = VarId::x;
        match m {
            4 => {
                let p = abel4_common();
                Some(&p + &t(14, &[(K, 2), (x(1), 4), (x(3), 1)]))
            }
            _ => abel_expansion(m),
        }
    }

    /// All order-4 Abel terms that the classical listing and the generator
    /// agree on.
    fn abel4_common() -> JetPolynomial {
        let x = VarId::x;
        let mut p = t(1, &[(x(5), 1)]);
        p = &p + &t(8, &[(K, 1), (x(2), 3)]);
        p = &p + &t(26, &[(K, 1), (x(1), 1), (x(2), 1), (x(3), 1)]);
        p = &p + &t(6, &[(K, 1), (x(1), 2), (x(4), 1)]);
        p = &p + &t(44, &[(K, 2), (x(1), 3), (x(2), 2)]);
        p = &p + &t(16, &[(K, 3), (x(1), 6), (x(2), 1)]);
        &p + &t(1, &[(K, 4), (x(1), 9)])
    }
}
