//! Numerical integration of the hierarchy systems with conservation
//! tracking.
//!
//! The order-n member integrates as the first-order system
//! `x_i' = x_{i+1}`, `x_n' = F_n(x; k)`. Two steppers are provided: a fixed
//! step classical RK4 and the adaptive Fehlberg 4(5) pair. Runs are guarded
//! against the singular surface of the first integrals (`P_{n-1} = 0`) and
//! against finite-time blow-up; a guarded run truncates with an explicit
//! flag instead of producing spurious samples.


use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::hierarchy::{hierarchy_member, OperatorKind};
use crate::integrals::IntegralsError;
use crate::lagrangian;
use crate::poly::{JetPolynomial, JetSpace, VarId};

#[derive(Debug, Error, PartialEq)]
pub enum NumericsError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Integrals(#[from] IntegralsError),
    #[error("initial state violates the singular-surface guard")]
    ImmediateSingularity,
    #[error("initial state is not finite")]
    NonFiniteState,
}

/// Stepping scheme and its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "method")]
pub enum Method {
    Rk4 { step: f64 },
    Rkf45 { abs_tol: f64, rel_tol: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_span: (f64, f64),
    /// Truncate when `|P_{n-1}(state)|` falls below this.
    pub singular_guard: f64,
}

impl IntegratorConfig {
    pub fn new(method: Method, t_span: (f64, f64)) -> Self {
        assert!(t_span.1 > t_span.0, "empty time span");
        match method {
            Method::Rk4 { step } => assert!(step > 0.0),
            Method::Rkf45 { abs_tol, rel_tol } => {
                assert!(abs_tol > 0.0 && rel_tol > 0.0)
            }
        }
        IntegratorConfig {
            method,
            t_span,
            singular_guard: 1e-6,
        }
    }
}

/// Why a trajectory stopped before the end of the requested span.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "reason", content = "t")]
pub enum Truncation {
    SingularSurface(f64),
    StateNormExceeded(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub kind: OperatorKind,
    pub n: u32,
    pub k: BigRational,
    /// `(t, state)` samples with strictly increasing `t`.
    pub samples: Vec<(f64, Vec<f64>)>,
    pub truncated: Option<Truncation>,
}

/// Conservation record for one tracked first integral.
#[derive(Clone, Debug, Serialize)]
pub struct DriftEntry {
    pub name: String,
    pub initial: f64,
    pub max_abs_deviation: f64,
    pub worst_t: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftReport {
    pub entries: Vec<DriftEntry>,
}

/// Norm bound beyond which the run counts as blown up.
const BLOWUP_NORM: f64 = 1e12;

/// Polynomial compiled to f64 for fast repeated evaluation. Slot 0 is `t`,
/// slot 1 is `k`, slot `1 + i` is `x_i`.
struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    fn compile(p: &JetPolynomial) -> CompiledPoly {
        let terms = p
            .terms()
            .iter()
            .map(|(m, c)| {
                let coeff = c.to_f64().expect("coefficient out of f64 range");
                let slots = m
                    .exponents()
                    .iter()
                    .map(|(v, e)| {
                        let slot = match v {
                            VarId::T => 0,
                            VarId::K => 1,
                            VarId::X(i) => 1 + *i as usize,
                        };
                        (slot, *e as i32)
                    })
                    .collect();
                (coeff, slots)
            })
            .collect();
        CompiledPoly { terms }
    }

    /// `vals[0] = t`, `vals[1] = k`, `vals[1 + i] = x_i`.
    fn eval(&self, vals: &[f64]) -> f64 {
        let mut total = 0.0;
        for (coeff, slots) in &self.terms {
            let mut prod = *coeff;
            for (slot, exp) in slots {
                prod *= vals[*slot].powi(*exp);
            }
            total += prod;
        }
        total
    }
}

struct System {
    n: usize,
    force: CompiledPoly,
    guard: CompiledPoly,
    k: f64,
}

impl System {
    fn build(space: JetSpace, kind: OperatorKind, n: u32, k: f64) -> Result<System, NumericsError> {
        let force = hierarchy_member(space, kind, n)
            .map_err(DynamicsError::from)?
            .force;
        let guard = hierarchy_member(space, kind, n - 1)
            .map_err(DynamicsError::from)?
            .expression;
        Ok(System {
            n: n as usize,
            force: CompiledPoly::compile(&force),
            guard: CompiledPoly::compile(&guard),
            k,
        })
    }

    fn slots(&self, t: f64, state: &[f64]) -> Vec<f64> {
        let mut vals = Vec::with_capacity(self.n + 2);
        vals.push(t);
        vals.push(self.k);
        vals.extend_from_slice(state);
        vals
    }

    fn rhs(&self, t: f64, state: &[f64], out: &mut [f64]) {
        for i in 0..self.n - 1 {
            out[i] = state[i + 1];
        }
        out[self.n - 1] = self.force.eval(&self.slots(t, state));
    }

    fn guard_value(&self, t: f64, state: &[f64]) -> f64 {
        self.guard.eval(&self.slots(t, state))
    }
}

fn norm_inf(state: &[f64]) -> f64 {
    state.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn rk4_step(sys: &System, t: f64, y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    sys.rhs(t, y, &mut k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    sys.rhs(t + 0.5 * h, &tmp, &mut k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    sys.rhs(t + 0.5 * h, &tmp, &mut k3);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    sys.rhs(t + h, &tmp, &mut k4);
    (0..n)
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

// Fehlberg 4(5) tableau.
const RKF_C: [f64; 6] = [0.0, 0.25, 3.0 / 8.0, 12.0 / 13.0, 1.0, 0.5];
const RKF_A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const RKF_B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];
const RKF_B4: [f64; 6] = [
    25.0 / 216.0,
    0.0,
    1408.0 / 2565.0,
    2197.0 / 4104.0,
    -1.0 / 5.0,
    0.0,
];

/// One Fehlberg step: fifth-order solution and fourth/fifth difference.
fn rkf_step(sys: &System, t: f64, y: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let mut stages: Vec<Vec<f64>> = Vec::with_capacity(6);
    let mut tmp = vec![0.0; n];
    for s in 0..6 {
        for i in 0..n {
            let mut acc = y[i];
            for (j, stage) in stages.iter().enumerate() {
                acc += h * RKF_A[s][j] * stage[i];
            }
            tmp[i] = acc;
        }
        let mut k = vec![0.0; n];
        sys.rhs(t + RKF_C[s] * h, &tmp, &mut k);
        stages.push(k);
    }
    let mut y5 = vec![0.0; n];
    let mut err = vec![0.0; n];
    for i in 0..n {
        let mut hi = y[i];
        let mut lo = y[i];
        for s in 0..6 {
            hi += h * RKF_B5[s] * stages[s][i];
            lo += h * RKF_B4[s] * stages[s][i];
        }
        y5[i] = hi;
        err[i] = hi - lo;
    }
    (y5, err)
}

/// Integrates the order-n system from `x0`. Truncates (flagged) when the
/// state reaches the singular surface of the first integrals or exceeds the
/// blow-up norm; errs immediately when `x0` already violates a guard.
pub fn integrate(
    space: JetSpace,
    kind: OperatorKind,
    n: u32,
    k: &BigRational,
    x0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory, NumericsError> {
    assert_eq!(x0.len(), n as usize, "initial state has wrong dimension");
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::NonFiniteState);
    }
    let kf = k.to_f64().expect("k out of f64 range");
    let sys = System::build(space, kind, n, kf)?;
    let (t0, t1) = cfg.t_span;
    if sys.guard_value(t0, x0).abs() < cfg.singular_guard || norm_inf(x0) > BLOWUP_NORM {
        return Err(NumericsError::ImmediateSingularity);
    }

    let mut samples = vec![(t0, x0.to_vec())];
    let mut truncated = None;
    let mut t = t0;
    let mut y = x0.to_vec();

    let push_checked = |t_new: f64, y_new: Vec<f64>, samples: &mut Vec<(f64, Vec<f64>)>| {
        if sys.guard_value(t_new, &y_new).abs() < cfg.singular_guard {
            return Some(Truncation::SingularSurface(t_new));
        }
        if norm_inf(&y_new) > BLOWUP_NORM {
            return Some(Truncation::StateNormExceeded(t_new));
        }
        samples.push((t_new, y_new));
        None
    };

    match cfg.method {
        Method::Rk4 { step } => {
            while t < t1 && truncated.is_none() {
                let h = step.min(t1 - t);
                let y_new = rk4_step(&sys, t, &y, h);
                let t_new = t + h;
                truncated = push_checked(t_new, y_new.clone(), &mut samples);
                if truncated.is_none() {
                    t = t_new;
                    y = y_new;
                }
            }
        }
        Method::Rkf45 { abs_tol, rel_tol } => {
            let mut h = (t1 - t0) / 100.0;
            let min_step = (t1 - t0) * 1e-14;
            while t < t1 && truncated.is_none() {
                h = h.min(t1 - t);
                let (y_new, err) = rkf_step(&sys, t, &y, h);
                let mut ratio = 0.0f64;
                for i in 0..y.len() {
                    let scale = abs_tol + rel_tol * y[i].abs().max(y_new[i].abs());
                    ratio = ratio.max((err[i] / scale).abs());
                }
                if ratio <= 1.0 || h <= min_step {
                    let t_new = t + h;
                    truncated = push_checked(t_new, y_new.clone(), &mut samples);
                    if truncated.is_none() {
                        t = t_new;
                        y = y_new;
                    }
                }
                let factor = if ratio > 0.0 {
                    (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
                } else {
                    5.0
                };
                h = (h * factor).max(min_step);
            }
        }
    }

    Ok(Trajectory {
        kind,
        n,
        k: k.clone(),
        samples,
        truncated,
    })
}

/// The integrals tracked along a trajectory, as polynomial quotients in
/// `(t, k, x)`: the time-polynomial integrals `J_tr = D_{r+1} / D_1`, plus
/// the Lagrangian energy for the order-2 Abel system.
pub fn tracked_integrals(
    space: JetSpace,
    kind: OperatorKind,
    n: u32,
) -> Result<Vec<(String, JetPolynomial, JetPolynomial)>, NumericsError> {
    let mut tracked = Vec::new();
    if n >= 2 {
        let family = crate::dynamics::time_dependent_darboux(space, kind, n)?;
        for r in 1..n as usize {
            tracked.push((
                format!("J_t{r}"),
                family[r].clone(),
                family[0].clone(),
            ));
        }
    }
    if n == 2 && kind == OperatorKind::Abel {
        let (num, den) = lagrangian::energy_quotient();
        tracked.push(("E_L".to_string(), num, den));
    }
    Ok(tracked)
}

/// Evaluates every tracked integral along the trajectory and reports the
/// maximum deviation from its initial value.
pub fn drift_report(space: JetSpace, traj: &Trajectory) -> Result<DriftReport, NumericsError> {
    assert!(!traj.samples.is_empty());
    let kf = traj.k.to_f64().expect("k out of f64 range");
    let tracked = tracked_integrals(space, traj.kind, traj.n)?;
    let mut entries = Vec::with_capacity(tracked.len());
    for (name, num, den) in &tracked {
        let num = CompiledPoly::compile(num);
        let den = CompiledPoly::compile(den);
        let eval = |t: f64, state: &[f64]| {
            let mut vals = Vec::with_capacity(state.len() + 2);
            vals.push(t);
            vals.push(kf);
            vals.extend_from_slice(state);
            num.eval(&vals) / den.eval(&vals)
        };
        let (t0, s0) = &traj.samples[0];
        let initial = eval(*t0, s0);
        let mut max_abs_deviation = 0.0f64;
        let mut worst_t = *t0;
        for (t, state) in &traj.samples {
            let dev = (eval(*t, state) - initial).abs();
            if dev > max_abs_deviation {
                max_abs_deviation = dev;
                worst_t = *t;
            }
        }
        entries.push(DriftEntry {
            name: name.clone(),
            initial,
            max_abs_deviation,
            worst_t,
        });
    }
    Ok(DriftReport { entries })
}

/// Outcome of the RK4 order estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "outcome", content = "order")]
pub enum ConvergenceOrder {
    Order(f64),
    /// Errors at machine level, e.g. polynomial trajectories that RK4
    /// integrates exactly.
    NotApplicable,
}

/// Richardson estimate of the RK4 order: endpoint errors at steps `h`,
/// `h/2`, `h/4` against a tight adaptive reference, averaged over the two
/// `log2` ratios.
pub fn convergence_order(
    space: JetSpace,
    kind: OperatorKind,
    n: u32,
    k: &BigRational,
    x0: &[f64],
    t_span: (f64, f64),
    base_step: f64,
) -> Result<ConvergenceOrder, NumericsError> {
    let reference_cfg = IntegratorConfig::new(
        Method::Rkf45 {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
        },
        t_span,
    );
    let reference = integrate(space, kind, n, k, x0, &reference_cfg)?;
    assert!(reference.truncated.is_none(), "reference run was truncated");
    let ref_end = &reference.samples.last().expect("nonempty").1;

    let mut errors = Vec::with_capacity(3);
    for divisor in [1.0, 2.0, 4.0] {
        let cfg = IntegratorConfig::new(
            Method::Rk4 {
                step: base_step / divisor,
            },
            t_span,
        );
        let run = integrate(space, kind, n, k, x0, &cfg)?;
        assert!(run.truncated.is_none(), "order-test run was truncated");
        let end = &run.samples.last().expect("nonempty").1;
        let err: f64 = end
            .iter()
            .zip(ref_end.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        errors.push(err);
    }
    let scale = 1.0 + norm_inf(ref_end);
    if errors[1] < 1e-13 * scale || errors[2] < 1e-14 * scale {
        return Ok(ConvergenceOrder::NotApplicable);
    }
    let r1 = (errors[0] / errors[1]).log2();
    let r2 = (errors[1] / errors[2]).log2();
    Ok(ConvergenceOrder::Order(0.5 * (r1 + r2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rational;

    fn space() -> JetSpace {
        JetSpace::default()
    }

    fn rkf_tight() -> Method {
        Method::Rkf45 {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
        }
    }

    #[test]
    fn first_order_abel_matches_closed_form() {
        // x' = -k x^3, x(0) = 1, k = 1: x(t) = (1 + 2t)^(-1/2)
        let cfg = IntegratorConfig::new(rkf_tight(), (0.0, 1.0));
        let traj = integrate(space(), OperatorKind::Abel, 1, &rational(1, 1), &[1.0], &cfg).unwrap();
        assert!(traj.truncated.is_none());
        let (t_end, state) = traj.samples.last().unwrap();
        assert!((t_end - 1.0).abs() < 1e-12);
        let exact = (1.0 + 2.0 * t_end).powf(-0.5);
        assert!((state[0] - exact).abs() < 1e-8, "got {} want {}", state[0], exact);
    }

    #[test]
    fn zero_k_gives_polynomial_solution() {
        // x''' = 0 with x0 = (1, 1, 1): x(t) = 1 + t + t^2/2
        let cfg = IntegratorConfig::new(rkf_tight(), (0.0, 2.0));
        let traj = integrate(
            space(),
            OperatorKind::Abel,
            3,
            &rational(0, 1),
            &[1.0, 1.0, 1.0],
            &cfg,
        )
        .unwrap();
        for (t, state) in &traj.samples {
            let exact = 1.0 + t + 0.5 * t * t;
            assert!((state[0] - exact).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn first_order_decay_is_monotone() {
        let cfg = IntegratorConfig::new(Method::Rk4 { step: 0.01 }, (0.0, 2.0));
        let traj = integrate(space(), OperatorKind::Abel, 1, &rational(2, 1), &[1.5], &cfg).unwrap();
        let mut prev = f64::INFINITY;
        for (_, state) in &traj.samples {
            assert!(state[0].abs() <= prev + 1e-12);
            prev = state[0].abs();
        }
    }

    #[test]
    fn immediate_singularity_is_reported() {
        // P_1 = v + k x^3 = 0 at (1, -1), k = 1.
        let cfg = IntegratorConfig::new(rkf_tight(), (0.0, 1.0));
        assert_eq!(
            integrate(space(), OperatorKind::Abel, 2, &rational(1, 1), &[1.0, -1.0], &cfg),
            Err(NumericsError::ImmediateSingularity)
        );
        assert_eq!(
            integrate(space(), OperatorKind::Abel, 2, &rational(1, 1), &[1.0, f64::NAN], &cfg),
            Err(NumericsError::NonFiniteState)
        );
    }

    #[test]
    fn drift_stays_small_at_tight_tolerance() {
        let cfg = IntegratorConfig::new(rkf_tight(), (0.0, 1.0));
        let traj = integrate(
            space(),
            OperatorKind::Abel,
            2,
            &rational(1, 1),
            &[1.0, 1.0],
            &cfg,
        )
        .unwrap();
        let report = drift_report(space(), &traj).unwrap();
        let names: Vec<&str> = report.entries.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, vec!["J_t1", "E_L"]);
        for entry in &report.entries {
            assert!(
                entry.max_abs_deviation < 1e-6,
                "{} drifted {}",
                entry.name,
                entry.max_abs_deviation
            );
        }
    }

    #[test]
    fn order_three_integrals_are_conserved() {
        let cfg = IntegratorConfig::new(rkf_tight(), (0.0, 1.0));
        let traj = integrate(
            space(),
            OperatorKind::Abel,
            3,
            &rational(1, 1),
            &[1.0, 0.5, -0.5],
            &cfg,
        )
        .unwrap();
        let report = drift_report(space(), &traj).unwrap();
        assert_eq!(report.entries.len(), 2);
        for entry in &report.entries {
            assert!(entry.max_abs_deviation < 1e-6, "{}", entry.name);
        }
    }

    #[test]
    fn single_sample_trajectory_has_zero_drift() {
        let traj = Trajectory {
            kind: OperatorKind::Abel,
            n: 2,
            k: rational(1, 1),
            samples: vec![(0.0, vec![1.0, 1.0])],
            truncated: None,
        };
        let report = drift_report(space(), &traj).unwrap();
        for entry in &report.entries {
            assert_eq!(entry.max_abs_deviation, 0.0);
        }
    }

    #[test]
    fn rk4_has_fourth_order_convergence() {
        let order = convergence_order(
            space(),
            OperatorKind::Abel,
            2,
            &rational(1, 1),
            &[1.0, 1.0],
            (0.0, 1.0),
            0.05,
        )
        .unwrap();
        match order {
            ConvergenceOrder::Order(p) => {
                assert!((p - 4.0).abs() < 0.2, "estimated order {p}");
            }
            ConvergenceOrder::NotApplicable => panic!("expected a definite order"),
        }
    }

    #[test]
    fn rk4_order_three_case() {
        let order = convergence_order(
            space(),
            OperatorKind::Abel,
            3,
            &rational(1, 1),
            &[1.0, 0.5, -0.5],
            (0.0, 1.0),
            0.05,
        )
        .unwrap();
        match order {
            ConvergenceOrder::Order(p) => assert!((p - 4.0).abs() < 0.2, "estimated order {p}"),
            ConvergenceOrder::NotApplicable => panic!("expected a definite order"),
        }
    }

    #[test]
    fn linear_case_is_not_applicable() {
        // k = 0 makes the RK4 solution exact; errors sit at machine level.
        let order = convergence_order(
            space(),
            OperatorKind::Abel,
            3,
            &rational(0, 1),
            &[1.0, 1.0, 1.0],
            (0.0, 1.0),
            0.05,
        )
        .unwrap();
        assert_eq!(order, ConvergenceOrder::NotApplicable);
    }

    #[test]
    fn halving_rk4_step_scales_drift_fourth_order() {
        let drift_at = |step: f64| {
            let cfg = IntegratorConfig::new(Method::Rk4 { step }, (0.0, 1.0));
            let traj = integrate(
                space(),
                OperatorKind::Abel,
                2,
                &rational(1, 1),
                &[1.0, 1.0],
                &cfg,
            )
            .unwrap();
            let report = drift_report(space(), &traj).unwrap();
            report.entries[0].max_abs_deviation
        };
        let coarse = drift_at(0.05);
        let fine = drift_at(0.025);
        let factor = coarse / fine;
        assert!(
            (12.0..=20.0).contains(&factor),
            "drift reduction factor {factor}"
        );
    }

    #[test]
    fn blow_up_truncates_with_flag() {
        // k < 0 drives x' = -k x^3 = |k| x^3 to finite-time blow-up:
        // x(t) = (1 - 2t)^(-1/2) diverges at t = 1/2.
        let cfg = IntegratorConfig::new(Method::Rk4 { step: 1e-3 }, (0.0, 1.0));
        let traj = integrate(space(), OperatorKind::Abel, 1, &rational(-1, 1), &[1.0], &cfg).unwrap();
        match traj.truncated {
            Some(Truncation::StateNormExceeded(t)) | Some(Truncation::SingularSurface(t)) => {
                assert!(t <= 1.0);
            }
            None => panic!("expected truncation"),
        }
        assert!(traj.samples.len() >= 2);
    }
}
