//! Semiclassical propagation of the four field amplitudes and its reduction
//! to a nonlinear pendulum for symmetric inputs.
//!
//! All equations are written in ξ = (κ/Δ)·ζ.

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::numerics::ode::{find_event, integrate_on_grid, Dopri5, OdeOptions};
use crate::numerics::quad;
use crate::params::FieldState;

/// Ratio of the EIT denominator to the total intensity below which the field
/// equations are considered singular.
pub const SINGULAR_DENOMINATOR_RATIO: f64 = 1e-30;

fn derivative(fs: &FieldState) -> FieldState {
    let FieldState {
        omega1: o1,
        omega2: o2,
        e1,
        e2,
    } = *fs;
    let i = C64::i();
    let d = fs.denominator();
    let d2 = d * d;
    let de1 = -i * (o1.conj() * o1 * o1 * o2 * e2.conj() - e1 * e1 * e2 * o1.conj() * o2.conj()) / d2;
    let de2 = -i * o1 * o2 * e1.conj() / d;
    let do1 = i * (o1 * o1 * o2 * e1.conj() * e2.conj() - e1.norm_sqr() * e1 * e2 * o2.conj()) / d2;
    let do2 = -i * e1 * e2 * o1.conj() / d;
    FieldState::new(do1, do2, de1, de2)
}

fn check_denominator(fs: &FieldState) -> Result<()> {
    let total: f64 = fs.intensities().iter().sum();
    let d = fs.denominator();
    if !(d > SINGULAR_DENOMINATOR_RATIO * total) || d == 0.0 {
        return Err(Error::VanishingDenominator);
    }
    Ok(())
}

/// d/dξ of (Ω₁, Ω₂, E₁, E₂), returned in the same slots as a `FieldState`.
pub fn classical_rhs(fs: &FieldState) -> Result<FieldState> {
    check_denominator(fs)?;
    Ok(derivative(fs))
}

fn rhs_real(_xi: f64, y: &[f64], dy: &mut [f64]) {
    let d = derivative(&FieldState::from_slice(y));
    dy.copy_from_slice(&d.to_array());
}

fn options_for(fs: &FieldState, tol: f64) -> Result<OdeOptions> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(invalid("tol", format!("must lie in (0, 1e-3], got {tol}")));
    }
    let scale = fs.intensities().iter().sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    Ok(OdeOptions {
        rtol: tol,
        atol: tol * scale,
        ..OdeOptions::default()
    })
}

/// Adaptive integration from ξ = 0 to `xi_end`; returns every accepted step.
pub fn integrate_classical(fs0: &FieldState, xi_end: f64, tol: f64) -> Result<Vec<(f64, FieldState)>> {
    check_denominator(fs0)?;
    if !(xi_end >= 0.0) {
        return Err(invalid("xi_end", "must be nonnegative"));
    }
    let opts = options_for(fs0, tol)?;
    let mut stepper = Dopri5::new(rhs_real, 0.0, &fs0.to_array(), opts);
    let mut out = vec![(0.0, *fs0)];
    while stepper.x() < xi_end {
        stepper.step(xi_end)?;
        out.push((stepper.x(), FieldState::from_slice(stepper.y())));
    }
    Ok(out)
}

/// Integration sampled on an ascending grid of ξ ≥ 0.
pub fn integrate_classical_on_grid(fs0: &FieldState, grid: &[f64], tol: f64) -> Result<Vec<FieldState>> {
    check_denominator(fs0)?;
    let opts = options_for(fs0, tol)?;
    let states = integrate_on_grid(rhs_real, 0.0, &fs0.to_array(), grid, opts)?;
    Ok(states.iter().map(|s| FieldState::from_slice(s)).collect())
}

/// Normalized pump intensity y = |Ω₁|² / (|Ω₁|² + |E₁|²).
pub fn normalized_intensity(fs: &FieldState) -> f64 {
    fs.omega1.norm_sqr() / fs.denominator()
}

/// dy/dξ = −2·Im(Ω₁Ω₂E₁*E₂*) / (|Ω₁|² + |E₁|²)².
pub fn normalized_intensity_rate(fs: &FieldState) -> f64 {
    let d = fs.denominator();
    -2.0 * fs.four_field_product().im / (d * d)
}

/// Pendulum potential V(y) = −4y²(y − 1)².
pub fn pendulum_potential(y: f64) -> f64 {
    -4.0 * y * y * (y - 1.0) * (y - 1.0)
}

/// Effective mass of the pendulum: energy is (m/2)·ẏ² + V(y).
pub const PENDULUM_MASS: f64 = 2.0;

/// y″ = −V′(y)/m = 4y(y − 1)(2y − 1).
pub fn pendulum_acceleration(y: f64) -> f64 {
    4.0 * y * (y - 1.0) * (2.0 * y - 1.0)
}

pub fn pendulum_energy(y: f64, ydot: f64) -> f64 {
    0.5 * PENDULUM_MASS * ydot * ydot + pendulum_potential(y)
}

/// The (y, ẏ) pendulum coordinates of a symmetric field state.
pub fn pendulum_state(fs: &FieldState) -> (f64, f64) {
    (normalized_intensity(fs), normalized_intensity_rate(fs))
}

const PENDULUM_TOL: f64 = 1e-12;

fn check_y0(y0: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&y0) {
        return Err(invalid("y0", format!("must lie in [0, 1], got {y0}")));
    }
    Ok(())
}

/// Pendulum trajectory released from rest at `y0`, sampled on `xi_grid`.
pub fn pendulum_evolve(y0: f64, xi_grid: &[f64]) -> Result<Vec<f64>> {
    pendulum_evolve_with_velocity(y0, 0.0, xi_grid)
}

/// Pendulum trajectory from `(y0, ydot0)`, sampled on `xi_grid`.
pub fn pendulum_evolve_with_velocity(y0: f64, ydot0: f64, xi_grid: &[f64]) -> Result<Vec<f64>> {
    check_y0(y0)?;
    let states = integrate_on_grid(
        |_, s, ds| {
            ds[0] = s[1];
            ds[1] = pendulum_acceleration(s[0]);
        },
        0.0,
        &[y0, ydot0],
        xi_grid,
        OdeOptions::with_tol(PENDULUM_TOL),
    )?;
    Ok(states.into_iter().map(|s| s[0]).collect())
}

/// Period of the closed orbit through `(y0, 0)`.
///
/// The orbit runs between a = min(y0, 1 − y0) and b = 1 − a, and
/// V(y0) − V(y) = 4(y − a)(b − y)(y(1 − y) + ab); substituting
/// y = ½ − ½(b − a)cos φ removes both endpoint singularities:
/// T = ∫₀^π dφ / sqrt(y(1 − y) + ab).
pub fn pendulum_period(y0: f64) -> Result<f64> {
    if !(y0 > 0.0 && y0 < 1.0) || y0 == 0.5 {
        return Err(Error::DegenerateOrbit { y0 });
    }
    let a = y0.min(1.0 - y0);
    let b = 1.0 - a;
    let half_width = 0.5 * (b - a);
    let ab = a * b;
    let integrand = |phi: f64| {
        let y = 0.5 - half_width * phi.cos();
        1.0 / (y * (1.0 - y) + ab).sqrt()
    };
    quad::integrate(integrand, 0.0, std::f64::consts::PI, 1e-13)
}

/// Oscillation period of the full field equations for a symmetric seed that
/// starts the pendulum at rest (Im(Ω₁Ω₂E₁*E₂*) = 0): the ξ at which y returns
/// to its second turning point.
pub fn classical_period(fs0: &FieldState, xi_max: f64, tol: f64) -> Result<Option<f64>> {
    check_denominator(fs0)?;
    let opts = options_for(fs0, tol)?;
    let rate = |y: &[f64]| normalized_intensity_rate(&FieldState::from_slice(y));
    let start = fs0.to_array();
    // Decide which turning point comes first from the initial acceleration.
    let (y0, _) = pendulum_state(fs0);
    let falling = pendulum_acceleration(y0) < 0.0;
    let sign = if falling { -1.0 } else { 1.0 };
    let first = find_event(rhs_real, 0.0, &start, xi_max, opts, |_, y, _| sign * rate(y), false)?;
    let Some((x_half, state)) = first else {
        return Ok(None);
    };
    let second = find_event(rhs_real, x_half, &state, xi_max, opts, |_, y, _| -sign * rate(y), false)?;
    Ok(second.map(|(x, _)| x))
}
