//! Symbolic-numeric engine for the Riccati and Abel equation hierarchies.
//!
//! The crate generates the hierarchy members by repeated operator
//! application on the jet space, verifies the structural identities they
//! satisfy (Darboux polynomial chains, cofactors, Jacobi multipliers,
//! time-polynomial first integrals, and the second-order Lagrangian and
//! symplectic structure), and integrates the resulting ODE systems
//! numerically with conservation tracking for every first integral.
//!
//! All symbolic computation is exact: polynomial coefficients are
//! arbitrary-precision rationals and every identity check is a canonical-form
//! zero test, never a numerical tolerance.

pub mod poly;
pub mod power;
pub mod dynamics;
pub mod hierarchy;
pub mod integrals;
pub mod lagrangian;
pub mod numerics;
pub mod render;
pub mod verify;

pub use poly::{JetPolynomial, JetSpace, Monomial, PolyError, VarId};
