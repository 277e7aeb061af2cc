//! Lagrangian, symplectic, and symmetry structure of the second-order Abel
//! equation.
//!
//! The second-order member admits two algebraic non-natural Lagrangians,
//! `L = (v + k x^3)^(-2)` and `L~ = (3v + k x^3)^(2/3)`, tied to the two
//! Darboux polynomials of the field through the Jacobi multiplier relation
//! `d^2 L / dv^2 = R`. This module verifies the Euler-Lagrange reduction of
//! both, the Helmholtz condition on both multipliers, the conserved energy
//! and its Darboux-quotient form, the symplectic relation, and the dynamical
//! non-Cartan symmetry generated by `x / (v + k x^3)`. Everything is exact.

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::dynamics::{build_gamma, DynamicsError};
use crate::hierarchy::{hierarchy_member, HierarchyError, OperatorKind};
use crate::poly::{rational, JetPolynomial, JetSpace, VarId};
use crate::power::{PowerError, PowerExpression, PowerVectorField, ZeroTest};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LagrangianError {
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("exponent m = -1 is outside the Lagrangian family")]
    InvalidExponent,
    #[error("the symmetry acts on the energy by a non-constant expression")]
    NonConstantEnergyAction,
    #[error("zero test could not decide: {context}")]
    IndeterminateZeroTest { context: String },
    #[error("antiderivative is not algebraic (exponent -1 in {context})")]
    LogarithmicPrimitive { context: String },
}

/// Report of the non-Cartan symmetry checks for the order-2 Abel system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonCartanReport {
    /// `[Z1, Gamma] = 0` component-wise.
    pub commutes: bool,
    /// The constant value of `Z1(E)`.
    pub energy_action: BigRational,
    /// `i(Z1) omega_L = dT1` component-wise.
    pub hamiltonian_rel: bool,
    /// `Z1(W) + W div Z1 = 0` for the symplectic density `W`.
    pub symplectic_sym: bool,
}

const X1: VarId = VarId::X(1);
const X2: VarId = VarId::X(2);

/// `v + k x^3`, the first Darboux polynomial of the order-2 field.
pub fn darboux_base_primary() -> JetPolynomial {
    &JetPolynomial::var(X2) + &JetPolynomial::term(1, 1, &[(VarId::K, 1), (X1, 3)])
}

/// `3v + k x^3`, the second Darboux polynomial.
pub fn darboux_base_secondary() -> JetPolynomial {
    &JetPolynomial::term(3, 1, &[(X2, 1)]) + &JetPolynomial::term(1, 1, &[(VarId::K, 1), (X1, 3)])
}

/// `L = (v + k x^3)^(-2)`.
pub fn lagrangian_primary() -> PowerExpression {
    PowerExpression::from_factor(&darboux_base_primary(), rational(-2, 1))
}

/// The alternative Lagrangian `(3v + k x^3)^(2/3)`.
pub fn lagrangian_alternative() -> PowerExpression {
    PowerExpression::from_factor(&darboux_base_secondary(), rational(2, 3))
}

/// Multiplier `g = (v + k x^3)^(-4)` behind the primary Lagrangian.
pub fn multiplier_primary() -> PowerExpression {
    PowerExpression::from_factor(&darboux_base_primary(), rational(-4, 1))
}

/// Multiplier `g = (3v + k x^3)^(-4/3)` behind the alternative Lagrangian.
pub fn multiplier_alternative() -> PowerExpression {
    PowerExpression::from_factor(&darboux_base_secondary(), rational(-4, 3))
}

/// Generator `T1 = x / (v + k x^3)` of the time-dependent integral.
pub fn generator_t1() -> PowerExpression {
    &PowerExpression::from_poly(&JetPolynomial::var(X1))
        * &PowerExpression::from_factor(&darboux_base_primary(), rational(-1, 1))
}

fn expect_decided(test: ZeroTest, context: &str) -> Result<bool, LagrangianError> {
    match test {
        ZeroTest::Zero => Ok(true),
        ZeroTest::NonZero => Ok(false),
        ZeroTest::Indeterminate => Err(LagrangianError::IndeterminateZeroTest {
            context: context.to_string(),
        }),
    }
}

/// `d/dt (dL/dv) - dL/dx` over the off-shell jet `(x, v, a, t)`.
pub fn euler_lagrange_residual(
    space: JetSpace,
    lagrangian: &PowerExpression,
) -> Result<PowerExpression, LagrangianError> {
    let momentum = lagrangian.derivative(X2);
    let dt = momentum.total_time_derivative(space)?;
    Ok(&dt - &lagrangian.derivative(X1))
}

/// Substitutes the force of the order-n member for `x_{n+1}` in every base.
pub fn on_shell_reduce(
    space: JetSpace,
    kind: OperatorKind,
    e: &PowerExpression,
    n: u32,
) -> Result<PowerExpression, LagrangianError> {
    let force = hierarchy_member(space, kind, n)?.force;
    Ok(e.substitute(VarId::x(n + 1), &force))
}

/// Helmholtz condition for the order-2 Abel force:
/// `v dg/dx + F dg/dv + (dF/dv) g = 0`.
pub fn helmholtz_check(space: JetSpace, g: &PowerExpression) -> Result<bool, LagrangianError> {
    let force = hierarchy_member(space, OperatorKind::Abel, 2)?.force;
    let residual = &(&(&PowerExpression::from_poly(&JetPolynomial::var(X2)) * &g.derivative(X1))
        + &(&PowerExpression::from_poly(&force) * &g.derivative(X2)))
        + &(&PowerExpression::from_poly(&force.partial_derivative(X2)) * g);
    expect_decided(residual.zero_test(), "Helmholtz residual")
}

/// Lagrangian energy `E = v dL/dv - L`.
pub fn lagrangian_energy(lagrangian: &PowerExpression) -> PowerExpression {
    let v = PowerExpression::from_poly(&JetPolynomial::var(X2));
    &(&v * &lagrangian.derivative(X2)) - lagrangian
}

/// The energy of the primary Lagrangian as a polynomial quotient:
/// `E = -(3v + k x^3) / (v + k x^3)^3`.
pub fn energy_quotient() -> (JetPolynomial, JetPolynomial) {
    (-&darboux_base_secondary(), darboux_base_primary().pow(3))
}

/// Checks that the Euler-Lagrange equation of `(v + k U)^(-m)` is the stated
/// second-order equation: the residual equals
/// `m (m+1) (v + k U)^(-m-2) * (a + ((2+m)/(1+m)) k U_x v
///   + (1/(1+m)) k^2 U U_x + k U_t)`.
pub fn family_equation_check(
    space: JetSpace,
    u: &JetPolynomial,
    m: &BigRational,
) -> Result<bool, LagrangianError> {
    if *m == rational(-1, 1) {
        return Err(LagrangianError::InvalidExponent);
    }
    assert!(
        u.vars().iter().all(|v| *v == VarId::T || *v == X1),
        "U must involve only x and t"
    );
    let k = JetPolynomial::var(VarId::K);
    let base = &JetPolynomial::var(X2) + &(&k * u);
    let lagrangian = PowerExpression::from_factor(&base, -m.clone());
    let residual = euler_lagrange_residual(space, &lagrangian)?;

    let one_plus_m = BigRational::one() + m;
    let u_x = u.partial_derivative(X1);
    let u_t = u.partial_derivative(VarId::T);
    let mut target = JetPolynomial::var(VarId::x(3));
    target = &target
        + &(&(&k * &u_x) * &JetPolynomial::var(X2))
            .scale(&((rational(2, 1) + m) / &one_plus_m));
    target = &target + &(&(&(&k * &k) * u) * &u_x).scale(&(BigRational::one() / &one_plus_m));
    target = &target + &(&k * &u_t);

    let factor = PowerExpression::from_factor(&base, -(m + rational(2, 1)))
        .scale(&(m * &one_plus_m));
    let diff = &residual - &(&factor * &PowerExpression::from_poly(&target));
    expect_decided(diff.zero_test(), "family equation residual")
}

/// Symplectic relation `i(Gamma) omega_L = dE` for the primary Lagrangian,
/// with `omega_L = W dx ^ dv` and `W = d^2 L / dv^2`.
pub fn symplectic_relation_check(space: JetSpace) -> Result<bool, LagrangianError> {
    let lagrangian = lagrangian_primary();
    let density = lagrangian.derivative(X2).derivative(X2);
    symplectic_relation_with_density(space, &density)
}

/// Same check with an explicit density, used to show that rescaled densities
/// fail.
pub fn symplectic_relation_with_density(
    space: JetSpace,
    density: &PowerExpression,
) -> Result<bool, LagrangianError> {
    let gamma = build_gamma(space, OperatorKind::Abel, 2)?;
    let energy = lagrangian_energy(&lagrangian_primary());
    // i(Gamma)(W dx^dv) = W Gamma^x dv - W Gamma^v dx must equal
    // (dE/dx) dx + (dE/dv) dv.
    let dv_component = &(density * &PowerExpression::from_poly(gamma.component(1)))
        - &energy.derivative(X2);
    let dx_component = &(&(-density) * &PowerExpression::from_poly(gamma.component(2)))
        - &energy.derivative(X1);
    Ok(expect_decided(dv_component.zero_test(), "symplectic dv component")?
        && expect_decided(dx_component.zero_test(), "symplectic dx component")?)
}

/// The Hamiltonian vector field of `T1`:
/// `Z1 = -(1/6)(v + k x^3)^2 (x d/dx + (v - 2 k x^3) d/dv)`.
pub fn noncartan_generator() -> PowerVectorField {
    let p_sq = darboux_base_primary().pow(2);
    let scale = rational(-1, 6);
    let zx = (&p_sq * &JetPolynomial::var(X1)).scale(&scale);
    let zv = (&p_sq
        * &(&JetPolynomial::var(X2) + &JetPolynomial::term(-2, 1, &[(VarId::K, 1), (X1, 3)])))
        .scale(&scale);
    PowerVectorField::new(vec![
        PowerExpression::from_poly(&zx),
        PowerExpression::from_poly(&zv),
    ])
}

/// Verifies the four structural properties of the non-Cartan symmetry `Z1`.
pub fn noncartan_symmetry_check(space: JetSpace) -> Result<NonCartanReport, LagrangianError> {
    let z1 = noncartan_generator();
    let gamma = build_gamma(space, OperatorKind::Abel, 2)?;
    let gamma_power = gamma.to_power_field();

    let bracket = z1.commutator(&gamma_power);
    let mut commutes = true;
    for (i, comp) in bracket.components.iter().enumerate() {
        commutes &= expect_decided(comp.zero_test(), &format!("commutator component {i}"))?;
    }

    let energy = lagrangian_energy(&lagrangian_primary());
    let action = z1.apply(&energy);
    let energy_action = action
        .constant_value()
        .ok_or(LagrangianError::NonConstantEnergyAction)?;

    let density = lagrangian_primary().derivative(X2).derivative(X2);
    let t1 = generator_t1();
    // i(Z1) omega_L = W Z1^x dv - W Z1^v dx = dT1
    let dv_component = &(&density * &z1.components[0]) - &t1.derivative(X2);
    let dx_component = &(&(-&density) * &z1.components[1]) - &t1.derivative(X1);
    let hamiltonian_rel = expect_decided(dv_component.zero_test(), "i(Z1)omega dv component")?
        && expect_decided(dx_component.zero_test(), "i(Z1)omega dx component")?;

    // L_{Z1} omega_L = 0 in divergence form: Z1(W) + W div Z1 = 0.
    let div_z1 = &z1.components[0].derivative(X1) + &z1.components[1].derivative(X2);
    let lie_density = &z1.apply(&density) + &(&density * &div_z1);
    let symplectic_sym = expect_decided(lie_density.zero_test(), "symplectic symmetry")?;

    Ok(NonCartanReport {
        commutes,
        energy_action,
        hamiltonian_rel,
        symplectic_sym,
    })
}

/// `Gamma(T1) = 1` and, for the suspension, `Gamma_t(T1 - t) = 0`.
pub fn generator_chain_check(space: JetSpace) -> Result<bool, LagrangianError> {
    let gamma = build_gamma(space, OperatorKind::Abel, 2)?;
    let t1 = generator_t1();
    let first = &gamma.lie_derivative_power(&t1) - &PowerExpression::one();
    let ok_first = expect_decided(first.zero_test(), "Gamma(T1) = 1")?;

    let gamma_t = gamma.suspend();
    let j = &t1 - &PowerExpression::from_poly(&JetPolynomial::var(VarId::T));
    let second = gamma_t.lie_derivative_power(&j);
    let ok_second = expect_decided(second.zero_test(), "Gamma_t(T1 - t) = 0")?;
    Ok(ok_first && ok_second)
}

/// Integrates a multiplier twice in `v` with both gauge constants fixed to
/// zero, recovering a Lagrangian with `d^2 L / dv^2 = g` up to the gauge
/// freedom. Every term must have exactly one `v`-dependent base, linear in
/// `v`.
pub fn lagrangian_from_multiplier(
    g: &PowerExpression,
) -> Result<PowerExpression, LagrangianError> {
    let once = integrate_in_v(g)?;
    integrate_in_v(&once)
}

fn integrate_in_v(e: &PowerExpression) -> Result<PowerExpression, LagrangianError> {
    let mut total = PowerExpression::zero();
    for term in e.terms() {
        let v_factors: Vec<_> = term
            .factors
            .iter()
            .filter(|f| f.base.degree_in(X2) > 0)
            .collect();
        let term_expr = PowerExpression::from_raw(vec![(
            term.coeff.clone(),
            term.factors
                .iter()
                .map(|f| (f.base.clone(), f.exponent.clone()))
                .collect(),
        )]);
        let integrated = match v_factors.as_slice() {
            [] => {
                // constant in v: multiply by v
                &term_expr * &PowerExpression::from_poly(&JetPolynomial::var(X2))
            }
            [factor] => {
                assert!(
                    factor.base.degree_in(X2) == 1,
                    "base must be linear in v to integrate in closed form"
                );
                let slope = factor.base.partial_derivative(X2);
                let slope = slope
                    .constant_value()
                    .expect("linear-in-v base has constant slope");
                let new_exp = &factor.exponent + BigRational::one();
                if new_exp.is_zero() {
                    return Err(LagrangianError::LogarithmicPrimitive {
                        context: format!("{}^{}", factor.base, factor.exponent),
                    });
                }
                let mut factors: Vec<(JetPolynomial, BigRational)> = term
                    .factors
                    .iter()
                    .filter(|f| f.base != factor.base)
                    .map(|f| (f.base.clone(), f.exponent.clone()))
                    .collect();
                factors.push((factor.base.clone(), new_exp.clone()));
                PowerExpression::from_raw(vec![(
                    &term.coeff / (&slope * &new_exp),
                    factors,
                )])
            }
            _ => panic!("more than one v-dependent base in a multiplier term"),
        };
        total = &total + &integrated;
    }
    Ok(total)
}
