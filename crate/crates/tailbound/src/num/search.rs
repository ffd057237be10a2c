//! Scalar root bracketing and unimodal line search.

use crate::error::{Error, Result};

/// Shrink factor of the golden-section search.
pub const TAU: f64 = 0.618;

/// Finds a root of `f` inside `[lo, hi]` by bisection.
///
/// The endpoints must bracket a sign change; an endpoint that is already
/// an exact zero is returned as-is. Stops once the bracket width falls
/// below `rel_tol` relative to the bracket magnitude.
pub fn bisect_root<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::Domain("bisection needs lo < hi".into()));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::Domain("rel_tol must be positive".into()));
    }
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::Numeric("non-finite value at bisection endpoint".into()));
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Domain("bisection endpoints do not bracket a root".into()));
    }
    for _ in 0..600 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * (0.5 * (lo.abs() + hi.abs())) + f64::MIN_POSITIVE {
            return Ok(mid);
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence { what: "bisection", residual: hi - lo })
}

/// Result of a golden-section search.
#[derive(Debug, Clone)]
pub struct GoldenMax {
    /// Midpoint of the two final interior probes.
    pub x: f64,
    /// Objective at the better of the two final probes.
    pub value: f64,
    /// Number of objective evaluations.
    pub evals: usize,
    /// Bracket after each iteration, for diagnostics.
    pub trace: Vec<(f64, f64)>,
}

/// Maximizes a unimodal `f` over `[a, b]` by golden-section search,
/// stopping when the bracket is narrower than `x_tol`.
pub fn golden_max<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    x_tol: f64,
) -> Result<GoldenMax> {
    if !(a < b) {
        return Err(Error::Domain("golden section needs a < b".into()));
    }
    if !(x_tol > 0.0) {
        return Err(Error::Domain("x_tol must be positive".into()));
    }
    let mut evals = 0usize;
    let mut trace = Vec::new();
    let mut x1 = b - TAU * (b - a);
    let mut x2 = a + TAU * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    evals += 2;
    for _ in 0..600 {
        if b - a <= x_tol {
            break;
        }
        if f1 < f2 {
            a = x1;
        } else {
            b = x2;
        }
        x1 = b - TAU * (b - a);
        x2 = a + TAU * (b - a);
        f1 = f(x1);
        f2 = f(x2);
        evals += 2;
        trace.push((a, b));
    }
    if b - a > x_tol {
        return Err(Error::Convergence { what: "golden section", residual: b - a });
    }
    let value = if f1 >= f2 { f1 } else { f2 };
    Ok(GoldenMax { x: 0.5 * (x1 + x2), value, evals, trace })
}
