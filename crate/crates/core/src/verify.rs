//! Verification suites: every structural identity of the hierarchies as a
//! pass/fail record.
//!
//! Each suite re-derives its objects from the operator definition and checks
//! the claimed identities exactly. Records carry the order `n`, a stable
//! identity name, a status, and the elapsed wall time, so runs are
//! machine-comparable; only the elapsed field varies between identical runs.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{
    build_gamma, check_darboux, solve_multiplier_exponents, time_dependent_darboux,
    verify_multiplier,
};
use crate::hierarchy::{hierarchy_member, tables, OperatorKind};
use crate::integrals::{independence_rank, j_integrals, j_matrix, t_sequence};
use crate::lagrangian;
use crate::poly::{rational, JetPolynomial, JetSpace, VarId};
use crate::power::PowerExpression;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// A transcription knowingly differs from the regenerated form; see the
    /// record detail.
    DocumentedDiscrepancy,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityRecord {
    pub n: u32,
    pub identity: String,
    pub status: Status,
    pub elapsed_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub family: String,
    pub records: Vec<IdentityRecord>,
}

impl SuiteReport {
    /// True when nothing failed; documented discrepancies do not count as
    /// failures.
    pub fn all_verified(&self) -> bool {
        self.records.iter().all(|r| r.status != Status::Fail)
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let mut pass = 0;
        let mut fail = 0;
        let mut discrepancy = 0;
        for r in &self.records {
            match r.status {
                Status::Pass => pass += 1,
                Status::Fail => fail += 1,
                Status::DocumentedDiscrepancy => discrepancy += 1,
            }
        }
        (pass, fail, discrepancy)
    }
}

fn record(n: u32, identity: &str, check: impl FnOnce() -> Result<bool, String>) -> IdentityRecord {
    let start = Instant::now();
    let (status, detail) = match check() {
        Ok(true) => (Status::Pass, None),
        Ok(false) => (Status::Fail, None),
        Err(message) => (Status::Fail, Some(message)),
    };
    IdentityRecord {
        n,
        identity: identity.to_string(),
        status,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        detail,
    }
}

/// Regeneration fidelity against the hand-transcribed tables. The
/// fourth-order Abel entry differs from the classical listing in one term;
/// that known misprint is reported as a documented discrepancy, with the
/// regenerated form checked against the corrected table.
pub fn fidelity_records(space: JetSpace, kind: OperatorKind) -> Vec<IdentityRecord> {
    let mut records = Vec::new();
    for m in 0..=4u32 {
        let start = Instant::now();
        let generated = match hierarchy_member(space, kind, m) {
            Ok(member) => member.expression,
            Err(e) => {
                records.push(IdentityRecord {
                    n: m,
                    identity: format!("expansion-order-{m}"),
                    status: Status::Fail,
                    elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
                    detail: Some(e.to_string()),
                });
                continue;
            }
        };
        let listed = match kind {
            OperatorKind::Riccati => tables::riccati_expansion(m),
            OperatorKind::Abel => tables::abel_expansion(m),
        }
        .expect("table covers orders 0..=4");
        let corrected = match kind {
            OperatorKind::Riccati => tables::riccati_expansion(m),
            OperatorKind::Abel => tables::abel_expansion_corrected(m),
        }
        .expect("table covers orders 0..=4");
        let (status, detail) = if generated == listed {
            (Status::Pass, None)
        } else if generated == corrected {
            (
                Status::DocumentedDiscrepancy,
                Some(
                    "regenerated form disagrees with the classical listing in the known \
                     misprinted term (7*x1*x2 for 7*x1*x3); the corrected table matches"
                        .to_string(),
                ),
            )
        } else {
            (Status::Fail, Some("regenerated form matches neither table".to_string()))
        };
        records.push(IdentityRecord {
            n: m,
            identity: format!("expansion-order-{m}"),
            status,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            detail,
        });
    }
    records
}

fn expected_divergence(kind: OperatorKind, n: u32) -> JetPolynomial {
    // -(n + s) k x1^s
    JetPolynomial::term(
        -((n + kind.power()) as i64),
        1,
        &[(VarId::K, 1), (VarId::x(1), kind.power())],
    )
}

/// Chain identities, divergence values, the time-dependent Darboux family,
/// and the pinned order-2 cofactors.
pub fn run_darboux(space: JetSpace, kind: OperatorKind, orders: (u32, u32)) -> SuiteReport {
    let mut records = Vec::new();
    for n in orders.0.max(1)..=orders.1 {
        records.push(record(n, "chain-identities", || {
            crate::dynamics::chain_polynomials(space, kind, n)
                .map(|_| true)
                .map_err(|e| e.to_string())
        }));
        records.push(record(n, "divergence", || {
            let gamma = build_gamma(space, kind, n).map_err(|e| e.to_string())?;
            Ok(gamma.divergence() == expected_divergence(kind, n))
        }));
        records.push(record(n, "time-darboux-family", || {
            time_dependent_darboux(space, kind, n)
                .map(|_| true)
                .map_err(|e| e.to_string())
        }));
        records.push(record(n, "cofactor-chain-top", || {
            let gamma = build_gamma(space, kind, n).map_err(|e| e.to_string())?;
            let top = hierarchy_member(space, kind, n - 1)
                .map_err(|e| e.to_string())?
                .expression;
            let pair = check_darboux(&gamma, &top).map_err(|e| e.to_string())?;
            Ok(pair.cofactor() == &(-&kind.multiplier()))
        }));
    }
    if kind == OperatorKind::Abel && (orders.0..=orders.1).contains(&2) {
        records.push(record(2, "cofactor-primary", || {
            let gamma = build_gamma(space, kind, 2).map_err(|e| e.to_string())?;
            let pair = check_darboux(&gamma, &lagrangian::darboux_base_primary())
                .map_err(|e| e.to_string())?;
            Ok(pair.cofactor() == &JetPolynomial::term(-1, 1, &[(VarId::K, 1), (VarId::x(1), 2)]))
        }));
        records.push(record(2, "cofactor-secondary", || {
            let gamma = build_gamma(space, kind, 2).map_err(|e| e.to_string())?;
            let pair = check_darboux(&gamma, &lagrangian::darboux_base_secondary())
                .map_err(|e| e.to_string())?;
            Ok(pair.cofactor() == &JetPolynomial::term(-3, 1, &[(VarId::K, 1), (VarId::x(1), 2)]))
        }));
    }
    SuiteReport {
        suite: "darboux".into(),
        family: kind.name().into(),
        records,
    }
}

/// Multiplier exponents from the exponent condition and the multiplier
/// identity itself, for the pinned order-2 pairs and the whole family.
pub fn run_multipliers(space: JetSpace, kind: OperatorKind, orders: (u32, u32)) -> SuiteReport {
    let mut records = Vec::new();
    if kind == OperatorKind::Abel && (orders.0..=orders.1).contains(&2) {
        records.push(record(2, "exponent-primary", || {
            let gamma = build_gamma(space, kind, 2).map_err(|e| e.to_string())?;
            let pair = check_darboux(&gamma, &lagrangian::darboux_base_primary())
                .map_err(|e| e.to_string())?;
            let nu = solve_multiplier_exponents(&gamma, &[pair]).map_err(|e| e.to_string())?;
            Ok(nu == vec![rational(-4, 1)])
        }));
        records.push(record(2, "exponent-secondary", || {
            let gamma = build_gamma(space, kind, 2).map_err(|e| e.to_string())?;
            let pair = check_darboux(&gamma, &lagrangian::darboux_base_secondary())
                .map_err(|e| e.to_string())?;
            let nu = solve_multiplier_exponents(&gamma, &[pair]).map_err(|e| e.to_string())?;
            Ok(nu == vec![rational(-4, 3)])
        }));
        records.push(record(2, "multiplier-primary-verified", || {
            let gamma = build_gamma(space, kind, 2).map_err(|e| e.to_string())?;
            verify_multiplier(&gamma, &lagrangian::multiplier_primary()).map_err(|e| e.to_string())
        }));
        records.push(record(2, "multiplier-secondary-verified", || {
            let gamma = build_gamma(space, kind, 2).map_err(|e| e.to_string())?;
            verify_multiplier(&gamma, &lagrangian::multiplier_alternative())
                .map_err(|e| e.to_string())
        }));
    }
    for n in orders.0.max(2)..=orders.1 {
        records.push(record(n, "exponent-family", || {
            let gamma_t = build_gamma(space, kind, n).map_err(|e| e.to_string())?.suspend();
            let family = time_dependent_darboux(space, kind, n).map_err(|e| e.to_string())?;
            let expected = rational(-((n + kind.power()) as i64), 1);
            for d in &family {
                let pair = check_darboux(&gamma_t, d).map_err(|e| e.to_string())?;
                let nu = solve_multiplier_exponents(&gamma_t, &[pair]).map_err(|e| e.to_string())?;
                if nu != vec![expected.clone()] {
                    return Ok(false);
                }
            }
            Ok(true)
        }));
        records.push(record(n, "multipliers-verified", || {
            let gamma_t = build_gamma(space, kind, n).map_err(|e| e.to_string())?.suspend();
            let family = time_dependent_darboux(space, kind, n).map_err(|e| e.to_string())?;
            let mu = rational(-((n + kind.power()) as i64), 1);
            for d in &family {
                let r = PowerExpression::from_factor(d, mu.clone());
                if !verify_multiplier(&gamma_t, &r).map_err(|e| e.to_string())? {
                    return Ok(false);
                }
            }
            Ok(true)
        }));
    }
    SuiteReport {
        suite: "multipliers".into(),
        family: kind.name().into(),
        records,
    }
}

/// Draws a non-singular integer sample from the box `[-3, 3]^n` (zero
/// coordinates excluded) with `k` in `{1, 2, 3}` and `t` in `{-1, 0, 1}`.
fn draw_sample(
    rng: &mut ChaCha8Rng,
    space: JetSpace,
    kind: OperatorKind,
    n: u32,
) -> (BTreeMap<VarId, f64>, f64) {
    let guard = hierarchy_member(space, kind, n - 1)
        .expect("jet order bound")
        .expression;
    loop {
        let mut sample = BTreeMap::new();
        for i in 1..=n {
            let mut v = 0i64;
            while v == 0 {
                v = rng.gen_range(-3i64..=3);
            }
            sample.insert(VarId::x(i), v as f64);
        }
        sample.insert(VarId::K, rng.gen_range(1i64..=3) as f64);
        let t = rng.gen_range(-1i64..=1) as f64;
        let mut assignment = sample.clone();
        assignment.insert(VarId::T, t);
        let p = guard.evaluate_f64(&assignment).expect("complete assignment");
        if p.abs() > 1e-6 {
            return (sample, t);
        }
    }
}

/// T-sequence shifts, conservation of the time-polynomial integrals, their
/// agreement with the Darboux quotients, the quotient matrix, and the
/// numeric rank witness for functional independence.
pub fn run_integrals(
    space: JetSpace,
    kind: OperatorKind,
    orders: (u32, u32),
    seed: u64,
) -> SuiteReport {
    let mut records = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in orders.0.max(2)..=orders.1 {
        records.push(record(n, "t-sequence", || {
            t_sequence(space, kind, n).map(|_| true).map_err(|e| e.to_string())
        }));
        records.push(record(n, "j-integrals-conserved", || {
            j_integrals(space, kind, n).map(|_| true).map_err(|e| e.to_string())
        }));
        records.push(record(n, "j-matrix-conserved", || {
            j_matrix(space, kind, n).map(|_| true).map_err(|e| e.to_string())
        }));
        records.push(record(n, "darboux-quotient-consistency", || {
            let js = j_integrals(space, kind, n).map_err(|e| e.to_string())?;
            let family = time_dependent_darboux(space, kind, n).map_err(|e| e.to_string())?;
            for (idx, j) in js.iter().enumerate() {
                let (num, den) = j.over_common_denominator();
                if num != family[idx + 1] || den != family[0] {
                    return Ok(false);
                }
            }
            Ok(true)
        }));
        records.push(record(n, "degree-structure", || {
            let js = j_integrals(space, kind, n).map_err(|e| e.to_string())?;
            for (idx, j) in js.iter().enumerate() {
                let r = idx as u32 + 1;
                if j.t_degree() != r || j.terms().len() != r as usize + 1 {
                    return Ok(false);
                }
                let mut fact = BigInt::from(1);
                for i in 1..=r {
                    fact *= BigInt::from(i);
                }
                let mut expected = BigRational::new(BigInt::from(1), fact);
                if r % 2 == 1 {
                    expected = -expected;
                }
                if j.leading_t_coefficient() != expected {
                    return Ok(false);
                }
            }
            Ok(true)
        }));
        if n <= 5 {
            let samples: Vec<_> = (0..20).map(|_| draw_sample(&mut rng, space, kind, n)).collect();
            records.push(record(n, "independence-rank", move || {
                for (sample, t) in &samples {
                    let rank = independence_rank(space, kind, n, sample, *t)
                        .map_err(|e| e.to_string())?;
                    if rank != (n - 1) as usize {
                        return Err(format!("rank {rank} at sample {sample:?}, t={t}"));
                    }
                }
                Ok(true)
            }));
        }
    }
    SuiteReport {
        suite: "integrals".into(),
        family: kind.name().into(),
        records,
    }
}

/// The full order-2 Lagrangian battery.
pub fn run_lagrangian(space: JetSpace) -> SuiteReport {
    let mut records = Vec::new();
    records.push(record(2, "euler-lagrange-onshell", || {
        let residual =
            lagrangian::euler_lagrange_residual(space, &lagrangian::lagrangian_primary())
                .map_err(|e| e.to_string())?;
        let reduced = lagrangian::on_shell_reduce(space, OperatorKind::Abel, &residual, 2)
            .map_err(|e| e.to_string())?;
        Ok(reduced.zero_test() == crate::power::ZeroTest::Zero)
    }));
    records.push(record(2, "euler-lagrange-onshell-alt", || {
        let residual =
            lagrangian::euler_lagrange_residual(space, &lagrangian::lagrangian_alternative())
                .map_err(|e| e.to_string())?;
        let reduced = lagrangian::on_shell_reduce(space, OperatorKind::Abel, &residual, 2)
            .map_err(|e| e.to_string())?;
        Ok(reduced.zero_test() == crate::power::ZeroTest::Zero)
    }));
    records.push(record(2, "helmholtz-multiplier", || {
        lagrangian::helmholtz_check(space, &lagrangian::multiplier_primary())
            .map_err(|e| e.to_string())
    }));
    records.push(record(2, "helmholtz-multiplier-alt", || {
        lagrangian::helmholtz_check(space, &lagrangian::multiplier_alternative())
            .map_err(|e| e.to_string())
    }));
    records.push(record(2, "lagrangian-energy", || {
        let energy = lagrangian::lagrangian_energy(&lagrangian::lagrangian_primary());
        let (num, den) = lagrangian::energy_quotient();
        let expected = &PowerExpression::from_poly(&num)
            * &PowerExpression::from_factor(&den, rational(-1, 1));
        if (&energy - &expected).zero_test() != crate::power::ZeroTest::Zero {
            return Ok(false);
        }
        let gamma = build_gamma(space, OperatorKind::Abel, 2).map_err(|e| e.to_string())?;
        if gamma.lie_derivative_power(&energy).zero_test() != crate::power::ZeroTest::Zero {
            return Ok(false);
        }
        // E * D1^3 + D2 = 0: the energy is the Darboux quotient -D2/D1^3.
        let cube = PowerExpression::from_poly(&lagrangian::darboux_base_primary().pow(3));
        let residual = &(&energy * &cube)
            + &PowerExpression::from_poly(&lagrangian::darboux_base_secondary());
        Ok(residual.zero_test() == crate::power::ZeroTest::Zero)
    }));
    records.push(record(2, "family-equation", || {
        let cubic = JetPolynomial::term(1, 1, &[(VarId::x(1), 3)]);
        let quadratic = JetPolynomial::term(1, 1, &[(VarId::x(1), 2)]);
        Ok(
            lagrangian::family_equation_check(space, &cubic, &rational(2, 1))
                .map_err(|e| e.to_string())?
                && lagrangian::family_equation_check(space, &quadratic, &rational(1, 1))
                    .map_err(|e| e.to_string())?,
        )
    }));
    records.push(record(2, "symplectic-relation", || {
        lagrangian::symplectic_relation_check(space).map_err(|e| e.to_string())
    }));
    records.push(record(2, "noncartan-symmetry", || {
        let report = lagrangian::noncartan_symmetry_check(space).map_err(|e| e.to_string())?;
        if report.energy_action != rational(-1, 1) {
            return Err(format!("energy action {}", report.energy_action));
        }
        Ok(report.commutes && report.hamiltonian_rel && report.symplectic_sym)
    }));
    records.push(record(2, "generator-chain", || {
        lagrangian::generator_chain_check(space).map_err(|e| e.to_string())
    }));
    SuiteReport {
        suite: "lagrangian".into(),
        family: OperatorKind::Abel.name().into(),
        records,
    }
}
