//! Deterministic adaptive quadrature and special functions.
//!
//! The integrator is a globally adaptive Gauss-Kronrod 7-15 scheme: the
//! segment with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol * |value|)`. Everything is
//! sequential and tie-breaks by segment index, so identical inputs give
//! bit-identical outputs.

// Quadrature node tables keep their full published precision.
#![allow(clippy::excessive_precision)]

mod special;

pub use special::{erf, erfc};

use crate::error::{Error, Result};

/// Default relative tolerance for expectation integrals.
pub const DEFAULT_REL_TOL: f64 = 1e-9;
/// Default absolute tolerance for expectation integrals.
pub const DEFAULT_ABS_TOL: f64 = 1e-12;

const MAX_SEGMENTS: usize = 2048;
const INITIAL_PANELS: usize = 16;

/// Outcome of an adaptive quadrature run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

// Gauss-Kronrod 7-15 abscissae and weights on [-1, 1] (QUADPACK dqk15).
// XGK[2k+1] are the embedded 7-point Gauss abscissae.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Gauss-Kronrod 7-15 rule on [a, b] with the QUADPACK error estimate.
#[allow(clippy::needless_range_loop)]
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let centre = 0.5 * (a + b);
    let hlgth = 0.5 * (b - a);

    let fc = f(centre);
    let mut fv1 = [0.0_f64; 7];
    let mut fv2 = [0.0_f64; 7];

    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = fc.abs() * WGK[7];

    for j in 0..3 {
        let jtw = 2 * j + 1;
        let absc = hlgth * XGK[jtw];
        let f1 = f(centre - absc);
        let f2 = f(centre + absc);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        resg += WG[j] * (f1 + f2);
        resk += WGK[jtw] * (f1 + f2);
        resabs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..4 {
        let jtwm1 = 2 * j;
        let absc = hlgth * XGK[jtwm1];
        let f1 = f(centre - absc);
        let f2 = f(centre + absc);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        resk += WGK[jtwm1] * (f1 + f2);
        resabs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }

    let value = resk * hlgth;
    let resabs = resabs * hlgth.abs();
    let resasc = resasc * hlgth.abs();

    let mut error = ((resk - resg) * hlgth).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * 1.0_f64.min((200.0 * error / resasc).powf(1.5));
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }

    Segment { a, b, value, error }
}

/// Adaptive quadrature of `f` over the finite interval `[a, b]`.
///
/// Bisects until the summed error estimate satisfies
/// `max(abs_tol, rel_tol * |value|)`; non-convergence after the segment
/// budget returns [`Error::QuadratureNonConvergence`] carrying the best
/// estimate so far.
pub fn integrate_finite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integration bounds must be finite"));
    }
    if a >= b {
        return Err(Error::domain(format!(
            "lower bound {a} must be below upper bound {b}"
        )));
    }
    if rel_tol < 0.0 || abs_tol < 0.0 {
        return Err(Error::domain("tolerances must be nonnegative"));
    }

    let mut evaluations = 0_usize;
    let mut segments: Vec<Segment> = Vec::with_capacity(64);
    let width = (b - a) / INITIAL_PANELS as f64;
    for i in 0..INITIAL_PANELS {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == INITIAL_PANELS {
            b
        } else {
            a + (i + 1) as f64 * width
        };
        let seg = gk15(&f, lo, hi);
        evaluations += 15;
        if !seg.value.is_finite() {
            return Err(Error::domain(format!(
                "integrand is not finite on [{lo}, {hi}]"
            )));
        }
        segments.push(seg);
    }

    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let tolerance = abs_tol.max(rel_tol * value.abs());
        if error <= tolerance {
            return Ok(QuadratureResult {
                value,
                abs_error_estimate: error,
                evaluations,
            });
        }
        if segments.len() >= MAX_SEGMENTS {
            return Err(Error::QuadratureNonConvergence {
                best: QuadratureResult {
                    value,
                    abs_error_estimate: error,
                    evaluations,
                },
            });
        }

        // Lowest index wins ties, keeping refinement order deterministic.
        let mut worst = 0;
        for (i, seg) in segments.iter().enumerate() {
            if seg.error > segments[worst].error {
                worst = i;
            }
        }
        let Segment { a: lo, b: hi, .. } = segments[worst];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval exhausted at machine precision; cannot refine further.
            let best = QuadratureResult {
                value,
                abs_error_estimate: error,
                evaluations,
            };
            return Err(Error::QuadratureNonConvergence { best });
        }
        let left = gk15(&f, lo, mid);
        let right = gk15(&f, mid, hi);
        evaluations += 30;
        if !(left.value.is_finite() && right.value.is_finite()) {
            return Err(Error::domain(format!(
                "integrand is not finite on [{lo}, {hi}]"
            )));
        }
        segments[worst] = left;
        segments.push(right);
    }
}

/// Adaptive quadrature of `f` over `[a, infinity)`.
///
/// Uses the rational transform `u = (x - a) / (1 + x - a)`, mapping the
/// half-line onto `[0, 1)`; the integrand must decay to zero. Hard
/// truncation is deliberately avoided because a safe truncation radius
/// depends on the integrand's parameters.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadratureResult> {
    if !a.is_finite() {
        return Err(Error::domain("lower bound must be finite"));
    }
    let transformed = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let remaining = 1.0 - u;
        let x = a + u / remaining;
        f(x) / (remaining * remaining)
    };
    integrate_finite(transformed, 0.0, 1.0, rel_tol, abs_tol)
}
