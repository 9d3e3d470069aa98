//! Parity-split ratio limits and the limit identities.
//!
//! For a degenerated sequence the consecutive ratio `U_n / U_{n-1}` has an
//! even-index limit `L1 = lambda3 (c1+c3)/(c3-c1)` and an odd-index limit
//! `L2 = lambda3 (c3-c1)/(c1+c3)`. Their product is `lambda3^2` regardless
//! of initial conditions; their quotient is `gamma^2`, which does depend on
//! them. Zero denominators are first-class report states, not errors: they
//! mark the regimes where the parity split collapses (`c1 = 0` or `c3 = 0`,
//! the subjects of the convergence module) or disappears (`c1 = c3 = 0`).

use serde::Serialize;
use thiserror::Error;

use crate::binet::{solve_coefficients, BinetCoefficients};
use crate::numerics::{approx_eq, Backend, Scalar, Tolerance};
use crate::recurrence::{DegenerateRoots, RecurrenceSpec};

#[derive(Debug, Error)]
pub enum LimitsError {
    #[error("sequence vanishes, ratios undefined")]
    SequenceVanishes,
    #[error("n_max = {0} is below the minimum of 8 for empirical estimation")]
    WindowTooShort(usize),
}

/// Which limits exist, read off the Binet coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// c1 != 0 and c3 != 0: the consecutive ratio oscillates between L1 and L2.
    ParityOscillating,
    /// c3 = 0, c1 != 0: the ratio converges to -lambda3.
    ConvergentMinus,
    /// c1 = 0, c3 != 0: the ratio converges to +lambda3.
    ConvergentPlus,
    /// c1 = c3 = 0, c2 != 0: the sequence is geometric with ratio lambda2.
    GeometricLambda2,
    /// all coefficients zero.
    ZeroSequence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    #[serde(rename = "L1")]
    pub l1: Option<Scalar>,
    #[serde(rename = "L2")]
    pub l2: Option<Scalar>,
    pub gamma: Option<Scalar>,
    pub lambda3_squared: Scalar,
    pub gamma_squared: Option<Scalar>,
    pub regime: Regime,
}

fn zero_tol(backend: Backend) -> Tolerance {
    match backend {
        Backend::Exact => Tolerance::exact(),
        Backend::Float => Tolerance::default(),
    }
}

fn effectively_zero(s: &Scalar) -> bool {
    let tol = zero_tol(s.backend());
    approx_eq(s, &Scalar::zero(s.backend()), tol).unwrap()
}

pub fn regime_of(c: &BinetCoefficients) -> Regime {
    let c1_zero = effectively_zero(&c.c1);
    let c3_zero = effectively_zero(&c.c3);
    let c2_zero = effectively_zero(&c.c2);
    match (c1_zero, c3_zero) {
        (false, false) => Regime::ParityOscillating,
        (false, true) => Regime::ConvergentMinus,
        (true, false) => Regime::ConvergentPlus,
        (true, true) if !c2_zero => Regime::GeometricLambda2,
        (true, true) => Regime::ZeroSequence,
    }
}

/// `gamma = (c1+c3)/(-c1+c3)`; undefined when `c1 = c3`.
pub fn gamma_of(c: &BinetCoefficients) -> Option<Scalar> {
    let diff = &c.c3 - &c.c1;
    if effectively_zero(&diff) {
        None
    } else {
        Some(&(&c.c1 + &c.c3) / &diff)
    }
}

/// Analytic limits from the Binet coefficients, cross-checked against the
/// explicit forms in the initial conditions.
pub fn analytic_limits(
    roots: &DegenerateRoots,
    u0: &Scalar,
    u1: &Scalar,
    u2: &Scalar,
) -> LimitReport {
    let c = solve_coefficients(roots, u0, u1, u2);
    let l3 = roots.lambda3();
    let sum = &c.c1 + &c.c3;
    let diff = &c.c3 - &c.c1;
    let sum_zero = effectively_zero(&sum);
    let diff_zero = effectively_zero(&diff);

    let l1 = (!diff_zero).then(|| l3 * &(&sum / &diff));
    let l2 = (!sum_zero).then(|| l3 * &(&diff / &sum));
    let gamma = (!diff_zero).then(|| &sum / &diff);
    let gamma_squared = gamma.as_ref().map(Scalar::square);

    cross_check_explicit_forms(roots, u0, u1, u2, &l1, &l2);

    LimitReport {
        l1,
        l2,
        gamma,
        lambda3_squared: l3.square(),
        gamma_squared,
        regime: regime_of(&c),
    }
}

/// The end-of-derivation forms
/// `L1 = l3^2 (l2^2 u0 - u2) / (l3^2 (l2 u0 - u1) + l2 (l2 u1 - u2))` and the
/// reciprocal-shape `L2`, as functions of the initial conditions alone.
/// Returns `None` when the respective denominator vanishes.
pub fn explicit_limits(
    roots: &DegenerateRoots,
    u0: &Scalar,
    u1: &Scalar,
    u2: &Scalar,
) -> (Option<Scalar>, Option<Scalar>) {
    let l2 = roots.lambda2();
    let l3sq = roots.lambda3().square();
    let p = &(&l2.square() * u0) - u2;
    let q = &(&l3sq * &(&(l2 * u0) - u1)) + &(l2 * &(&(l2 * u1) - u2));
    let l1 = (!effectively_zero(&q)).then(|| &(&l3sq * &p) / &q);
    let l2_limit = (!effectively_zero(&p)).then(|| &q / &p);
    (l1, l2_limit)
}

fn cross_check_explicit_forms(
    roots: &DegenerateRoots,
    u0: &Scalar,
    u1: &Scalar,
    u2: &Scalar,
    l1: &Option<Scalar>,
    l2: &Option<Scalar>,
) {
    let tol = zero_tol(roots.backend());
    let (e1, e2) = explicit_limits(roots, u0, u1, u2);
    if let (Some(a), Some(b)) = (l1, &e1) {
        assert!(approx_eq(a, b, tol).unwrap(), "L1 explicit-form mismatch");
    }
    if let (Some(a), Some(b)) = (l2, &e2) {
        assert!(approx_eq(a, b, tol).unwrap(), "L2 explicit-form mismatch");
    }
}

/// One pass of windowed ratio traces. The window is renormalized by its
/// largest magnitude each step, which leaves every recorded ratio invariant
/// while keeping the iteration inside f64 range (`U_n` grows like lambda3^n).
struct RatioTraces {
    /// `(n, U_n / U_{n-1})` for n = 1..=n_max, `None` where the denominator vanishes
    consecutive: Vec<(usize, Option<f64>)>,
    /// `(n, U_n / U_{n-2})` for n = 2..=n_max
    two_step: Vec<(usize, Option<f64>)>,
    /// `(n, U_n U_{n-2} / U_{n-1}^2)` for n = 2..=n_max
    product: Vec<(usize, Option<f64>)>,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0 && num.is_finite() && den.is_finite()).then(|| num / den)
}

fn trace_ratios(spec: &RecurrenceSpec, n_max: usize) -> RatioTraces {
    let (a1, a2, a3) = (spec.a1.to_f64(), spec.a2.to_f64(), spec.a3.to_f64());
    let (mut w0, mut w1, mut w2) = (spec.u0.to_f64(), spec.u1.to_f64(), spec.u2.to_f64());

    let mut traces = RatioTraces {
        consecutive: Vec::with_capacity(n_max),
        two_step: Vec::with_capacity(n_max),
        product: Vec::with_capacity(n_max),
    };
    if n_max >= 1 {
        traces.consecutive.push((1, ratio(w1, w0)));
    }
    if n_max >= 2 {
        traces.consecutive.push((2, ratio(w2, w1)));
        traces.two_step.push((2, ratio(w2, w0)));
        traces.product.push((2, ratio(w2 * w0, w1 * w1)));
    }
    for n in 3..=n_max {
        let w3 = a1 * w2 + a2 * w1 + a3 * w0;
        traces.consecutive.push((n, ratio(w3, w2)));
        traces.two_step.push((n, ratio(w3, w1)));
        traces.product.push((n, ratio(w3 * w1, w2 * w2)));
        let scale = w1.abs().max(w2.abs()).max(w3.abs());
        if scale > 0.0 && scale.is_finite() {
            w0 = w1 / scale;
            w1 = w2 / scale;
            w2 = w3 / scale;
        } else {
            w0 = w1;
            w1 = w2;
            w2 = w3;
        }
    }
    traces
}

/// Fails when all of the final 6 candidate ratios are skipped; isolated
/// zero denominators are merely recorded.
fn tail_estimate(trace: &[(usize, Option<f64>)]) -> Result<f64, LimitsError> {
    let tail = &trace[trace.len().saturating_sub(6)..];
    if tail.iter().all(|(_, r)| r.is_none()) {
        return Err(LimitsError::SequenceVanishes);
    }
    trace
        .iter()
        .rev()
        .find_map(|(_, r)| *r)
        .ok_or(LimitsError::SequenceVanishes)
}

/// The consecutive-ratio trace `(n, U_n / U_{n-1})` for n = 1..=n_max,
/// computed on the renormalized window; `None` marks a vanishing denominator.
pub fn consecutive_ratios(spec: &RecurrenceSpec, n_max: usize) -> Vec<(usize, Option<f64>)> {
    trace_ratios(spec, n_max).consecutive
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParityEstimate {
    pub even: Scalar,
    pub odd: Scalar,
    pub converged: bool,
    pub skipped: Vec<usize>,
}

/// Estimates the even- and odd-index consecutive-ratio limits from the last
/// window of generated terms.
pub fn empirical_parity_limits(
    spec: &RecurrenceSpec,
    n_max: usize,
    tol: Tolerance,
) -> Result<ParityEstimate, LimitsError> {
    if n_max < 8 {
        return Err(LimitsError::WindowTooShort(n_max));
    }
    let traces = trace_ratios(spec, n_max);
    let trace = &traces.consecutive;
    let tail = &trace[trace.len() - 6..];
    if tail.iter().all(|(_, r)| r.is_none()) {
        return Err(LimitsError::SequenceVanishes);
    }
    let skipped: Vec<usize> = trace.iter().filter(|(_, r)| r.is_none()).map(|(n, _)| *n).collect();

    let last_two = |parity: usize| -> Vec<f64> {
        trace
            .iter()
            .rev()
            .filter(|(n, r)| n % 2 == parity && r.is_some())
            .take(2)
            .map(|(_, r)| r.unwrap())
            .collect()
    };
    let evens = last_two(0);
    let odds = last_two(1);
    if evens.is_empty() || odds.is_empty() {
        return Err(LimitsError::SequenceVanishes);
    }
    let within = |v: &[f64]| {
        v.len() == 2 && (v[0] - v[1]).abs() <= tol.absolute + tol.relative * v[0].abs().max(v[1].abs())
    };
    Ok(ParityEstimate {
        even: Scalar::Float(evens[0]),
        odd: Scalar::Float(odds[0]),
        converged: within(&evens) && within(&odds),
        skipped,
    })
}

/// Estimates `lim U_n / U_{n-2}`; for degenerated specs outside the
/// geometric and zero regimes this is `lambda3^2 = a2` for every choice of
/// initial conditions.
pub fn empirical_two_step_limit(
    spec: &RecurrenceSpec,
    n_max: usize,
    _tol: Tolerance,
) -> Result<Scalar, LimitsError> {
    if n_max < 8 {
        return Err(LimitsError::WindowTooShort(n_max));
    }
    let traces = trace_ratios(spec, n_max);
    tail_estimate(&traces.two_step).map(Scalar::Float)
}

/// Estimates `lim U_n U_{n-2} / U_{n-1}^2 = gamma^2`, which does depend on
/// the initial conditions.
pub fn empirical_gamma_squared(
    spec: &RecurrenceSpec,
    n_max: usize,
    _tol: Tolerance,
) -> Result<Scalar, LimitsError> {
    if n_max < 8 {
        return Err(LimitsError::WindowTooShort(n_max));
    }
    let traces = trace_ratios(spec, n_max);
    tail_estimate(&traces.product).map(Scalar::Float)
}
