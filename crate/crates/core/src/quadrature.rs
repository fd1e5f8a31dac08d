//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;
const PANELS: usize = 16;
// Forced refinements per panel before the error estimate is trusted.
const MIN_LEVELS: u32 = 4;

/// Integrates `f` over `[a, b]` (either orientation) to relative tolerance
/// `rel_tol`. A non-finite integrand value or an exhausted recursion budget
/// is reported as an error.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fail = Error::Quadrature { a, b, tol: rel_tol };
    // Start from uniform panels: a single coarse Simpson estimate can agree
    // with its halves by accident when the integrand has a sharp layer.
    let h = (b - a) / PANELS as f64;
    let xs: Vec<f64> = (0..=2 * PANELS).map(|i| a + 0.5 * h * i as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    if fs.iter().any(|v| !v.is_finite()) {
        return Err(fail);
    }
    // Scale the target by a cheap estimate of the integral of |f| so that
    // sign-definite integrands get a genuine relative tolerance.
    let scale: f64 = (0..PANELS)
        .map(|p| (h / 6.0 * (fs[2 * p].abs() + 4.0 * fs[2 * p + 1].abs() + fs[2 * p + 2].abs())).abs())
        .sum();
    let tol = rel_tol * scale.max(f64::MIN_POSITIVE) / PANELS as f64;
    let mut ok = true;
    let mut v = 0.0;
    for p in 0..PANELS {
        let (fa, fm, fb) = (fs[2 * p], fs[2 * p + 1], fs[2 * p + 2]);
        let whole = h / 6.0 * (fa + 4.0 * fm + fb);
        v += recurse(&f, xs[2 * p], xs[2 * p + 2], fa, fm, fb, whole, tol, MAX_DEPTH, &mut ok);
    }
    if ok && v.is_finite() {
        Ok(v)
    } else {
        Err(fail)
    }
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    ok: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !(flm.is_finite() && frm.is_finite()) {
        *ok = false;
        return f64::NAN;
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth <= MAX_DEPTH - MIN_LEVELS && diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    if depth == 0 {
        *ok = false;
        return left + right;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, ok)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, ok)
}
