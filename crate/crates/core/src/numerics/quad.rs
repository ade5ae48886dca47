//! Adaptive subdivision on top of double-exponential (tanh-sinh) quadrature.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 40;
const ROUNDOFF: f64 = 1e-14;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`, bisecting any
/// panel whose tanh-sinh error estimate exceeds its share of the budget.
/// A panel is also accepted once its error estimate is at round-off level
/// relative to its own value.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_panel(&f, a, b, tol / (b - a).abs(), 0)
}

// `density` is the admissible error per unit length.
fn integrate_panel<F>(f: &F, a: f64, b: f64, density: f64, depth: u32) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let budget = density * (b - a).abs();
    let out = quadrature::integrate(f, a, b, budget);
    if out.integral.is_finite() && (out.error_estimate <= budget || out.error_estimate <= ROUNDOFF * out.integral.abs())
    {
        return Ok(out.integral);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature { a, b });
    }
    let mid = 0.5 * (a + b);
    let left = integrate_panel(f, a, mid, density, depth + 1)?;
    let right = integrate_panel(f, mid, b, density, depth + 1)?;
    Ok(left + right)
}
