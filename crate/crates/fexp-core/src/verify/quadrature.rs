//! Adaptive Simpson quadrature for the 1-D marginals used by the
//! small-blocklength lemma checks.

use crate::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Integrate `f` over `[a, b]` to the requested relative tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::domain(
            "integration bounds must be finite with a < b",
        ));
    }
    // Coarse pass to set the absolute tolerance scale.
    let panels = 64usize;
    let h = (b - a) / panels as f64;
    let mut coarse = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        coarse += w * f(a + i as f64 * h);
    }
    coarse *= h / 3.0;
    let eps = rel_tol * coarse.abs().max(1e-300);

    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, m, b, fa, fm, fb, whole, eps, MAX_DEPTH)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> Result<f64> {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::numerical(format!(
            "quadrature failed to converge on [{a}, {b}] (residual {delta:e})"
        )));
    }
    let l = recurse(f, a, lm, m, fa, flm, fm, left, 0.5 * eps, depth - 1)?;
    let r = recurse(f, m, rm, b, fm, frm, fb, right, 0.5 * eps, depth - 1)?;
    Ok(l + r)
}
