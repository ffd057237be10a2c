//! Adaptive Gauss-Legendre quadrature.
//!
//! A 15-point rule is applied per panel; a panel is accepted when the
//! two-half refinement agrees with the single-panel estimate within the
//! panel's share of the global tolerance. Error budgets are proportional
//! to panel width, so the accumulated error of all accepted panels stays
//! below the requested absolute tolerance.

use crate::error::{Error, Result};
use std::sync::OnceLock;

const N: usize = 15;
const DEFAULT_MAX_EVALS: usize = 200_000;

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    /// Integral estimate.
    pub value: f64,
    /// Sum of per-panel error estimates for the accepted panels.
    pub error: f64,
    /// Number of integrand evaluations.
    pub evals: usize,
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol` with the
/// default evaluation budget.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<Quadrature> {
    integrate_with_budget(f, a, b, abs_tol, DEFAULT_MAX_EVALS)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol`, failing
/// once more than `max_evals` integrand evaluations would be needed.
pub fn integrate_with_budget<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_evals: usize,
) -> Result<Quadrature> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain("integration limits must be finite".into()));
    }
    if !(abs_tol > 0.0) {
        return Err(Error::Domain("abs_tol must be positive".into()));
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0, evals: 0 });
    }
    if a > b {
        let q = integrate_with_budget(f, b, a, abs_tol, max_evals)?;
        return Ok(Quadrature { value: -q.value, ..q });
    }

    let mut evals = 0usize;
    let mut value = 0.0;
    let mut error = 0.0;

    // Panels carry their own single-rule estimate so a split never
    // re-evaluates the parent interval.
    let mut stack: Vec<(f64, f64, f64, f64)> = Vec::new();
    let init = 8usize;
    let w = (b - a) / init as f64;
    for i in 0..init {
        let lo = a + i as f64 * w;
        let hi = if i + 1 == init { b } else { a + (i + 1) as f64 * w };
        let est = gl15_panel(&mut f, lo, hi);
        evals += N;
        stack.push((lo, hi, est, abs_tol / init as f64));
    }

    while let Some((lo, hi, whole, tol)) = stack.pop() {
        if evals + 2 * N > max_evals {
            return Err(Error::Numeric(format!(
                "integration budget of {max_evals} evaluations exhausted with {} panels \
                 unresolved (accepted error {error:.3e}, requested {abs_tol:.3e})",
                stack.len() + 1,
            )));
        }
        let mid = 0.5 * (lo + hi);
        let left = gl15_panel(&mut f, lo, mid);
        let right = gl15_panel(&mut f, mid, hi);
        evals += 2 * N;
        let refined = left + right;
        if !refined.is_finite() || !whole.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite integrand estimate on [{lo:.6e}, {hi:.6e}]"
            )));
        }
        let err = (refined - whole).abs();
        // The second clause stops refinement once the disagreement sits at
        // the rounding floor of the panel value; it is relative so that
        // integrals far below one still resolve.
        if err <= tol || err <= 16.0 * f64::EPSILON * refined.abs() {
            value += refined;
            error += err;
        } else {
            stack.push((lo, mid, left, 0.5 * tol));
            stack.push((mid, hi, right, 0.5 * tol));
        }
    }

    Ok(Quadrature { value, error, evals })
}

fn gl15_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gl15();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..N {
        acc += weights[i] * f(c + h * nodes[i]);
    }
    acc * h
}

/// Nodes and weights of the 15-point Gauss-Legendre rule on [-1, 1],
/// computed once by Newton iteration on the Legendre recurrence.
fn gl15() -> &'static ([f64; N], [f64; N]) {
    static TABLE: OnceLock<([f64; N], [f64; N])> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut nodes = [0.0; N];
        let mut weights = [0.0; N];
        for i in 0..N {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(N, x);
                let step = p / d;
                x -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre(N, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}
