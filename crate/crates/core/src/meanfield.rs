//! Gaussian mean-field theory for symmetric pumps with vacuum-seeded
//! generated modes.
//!
//! The dynamical variables are the pump photon number b = ⟨b₁†b₁⟩ and the
//! anomalous correlations B = ⟨b₁b₂⟩ = b₁₂e^{iφ_b}, A = ⟨a₁a₂⟩ = a₁₂e^{iφ_a}.
//! Decorrelating pumps from generated modes in the Heisenberg equations gives
//!
//! dB/dξ = −(i/d)(2b + 1)A,  dA/dξ = −(i/d)(2(d − b) + 1)B,
//! db/dξ = −(2/d) Im(A*B),
//!
//! with d = ⟨b₁†b₁ + a₁†a₁⟩ constant. Re(A*B) is conserved. For a coherent
//! start (b₁₂ = b = b₀, A = 0) one finds b₁₂² = b² + b − b₀ and
//! a₁₂² = (b − b₀)(b − b₀ − 1), and b obeys
//!
//! (db/dξ)² = (4/b₀²)(b² + b − b₀)(b − b₀)(b − b₀ − 1) = −2V(b),
//!
//! i.e. a unit-mass particle in the quartic potential V.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::numerics::{find_event, integrate_on_grid, quad, OdeOptions};
use crate::params::TrajectoryRecord;

/// Relative size of the initial generated correlation, a₁₂(0) = δ·b₀.
pub const DEFAULT_SEED: f64 = 1e-8;

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldState {
    pub b: f64,
    pub b12: f64,
    pub a12: f64,
    pub phi_b: f64,
    pub phi_a: f64,
    pub d: f64,
}

impl MeanFieldState {
    /// Coherent pumps of `b0` photons each and a generated correlation
    /// `delta·b0` at relative phase φ_a − φ_b = π/2.
    pub fn coherent(b0: f64, delta: f64) -> Self {
        Self {
            b: b0,
            b12: b0,
            a12: delta * b0,
            phi_b: 0.0,
            phi_a: PI / 2.0,
            d: b0,
        }
    }

    /// b₁₂a₁₂cos(φ_a − φ_b) = Re(A*B).
    pub fn phase_invariant(&self) -> f64 {
        self.b12 * self.a12 * (self.phi_a - self.phi_b).cos()
    }

    fn to_cartesian(self) -> [f64; 5] {
        [
            self.b12 * self.phi_b.cos(),
            self.b12 * self.phi_b.sin(),
            self.a12 * self.phi_a.cos(),
            self.a12 * self.phi_a.sin(),
            self.b,
        ]
    }

    fn from_cartesian(y: &[f64], d: f64) -> Self {
        Self {
            b: y[4],
            b12: y[0].hypot(y[1]),
            a12: y[2].hypot(y[3]),
            phi_b: y[1].atan2(y[0]),
            phi_a: y[3].atan2(y[2]),
            d,
        }
    }
}

/// Derivatives of (b₁₂, a₁₂, b, φ_b, φ_a) with respect to ξ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldDerivative {
    pub b12: f64,
    pub a12: f64,
    pub b: f64,
    pub phi_b: f64,
    pub phi_a: f64,
}

/// Right-hand side of the five real mean-field equations in amplitude-phase
/// form. The phase equations are singular where a magnitude vanishes with the
/// other nonzero; trajectories through such points are integrated in the
/// Cartesian form instead (see [`integrate_full_system`]).
pub fn meanfield_full_rhs(s: &MeanFieldState) -> Result<MeanFieldDerivative> {
    if !(s.d > 0.0) {
        return Err(invalid("d", "must be positive"));
    }
    if s.b12 == 0.0 && s.a12 == 0.0 {
        return Ok(MeanFieldDerivative {
            b12: 0.0,
            a12: 0.0,
            b: 0.0,
            phi_b: 0.0,
            phi_a: 0.0,
        });
    }
    if s.b12 <= 0.0 || s.a12 <= 0.0 {
        return Err(Error::Domain(
            "correlation magnitude vanished; phase equations are singular".into(),
        ));
    }
    let theta = s.phi_a - s.phi_b;
    let (sin, cos) = theta.sin_cos();
    let pump = 2.0 * s.b + 1.0;
    let gen = 2.0 * s.b - 2.0 * s.d - 1.0;
    Ok(MeanFieldDerivative {
        b12: pump * s.a12 * sin / s.d,
        a12: gen * s.b12 * sin / s.d,
        b: 2.0 * s.b12 * s.a12 * sin / s.d,
        phi_b: -pump * (s.a12 / s.b12) * cos / s.d,
        phi_a: gen * (s.b12 / s.a12) * cos / s.d,
    })
}

// y = (Re B, Im B, Re A, Im A, b)
fn cartesian_rhs(d: f64, y: &[f64], dy: &mut [f64]) {
    let pump = (2.0 * y[4] + 1.0) / d;
    let gen = (2.0 * (d - y[4]) + 1.0) / d;
    // −i·k·z = k·(Im z, −Re z)
    dy[0] = pump * y[3];
    dy[1] = -pump * y[2];
    dy[2] = gen * y[1];
    dy[3] = -gen * y[0];
    // Im(A*B) = Re A·Im B − Im A·Re B
    dy[4] = -2.0 / d * (y[2] * y[1] - y[3] * y[0]);
}

/// Full mean-field system from `s0`, sampled on an ascending grid starting at
/// or after ξ = 0.
pub fn integrate_full_system(s0: &MeanFieldState, grid: &[f64]) -> Result<Vec<MeanFieldState>> {
    if !(s0.d > 0.0) {
        return Err(invalid("d", "must be positive"));
    }
    let d = s0.d;
    let scale = s0.b.abs().max(s0.b12).max(1.0);
    let opts = OdeOptions {
        atol: TOL * scale,
        ..OdeOptions::with_tol(TOL)
    };
    let states = integrate_on_grid(|_, y, dy| cartesian_rhs(d, y, dy), 0.0, &s0.to_cartesian(), grid, opts)?;
    Ok(states.iter().map(|y| MeanFieldState::from_cartesian(y, d)).collect())
}

/// The quartic V(b) = −(2/b₀²)(b² + b − b₀)(b − b₀)(b − b₀ − 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticPotential {
    b0: f64,
}

impl QuarticPotential {
    pub fn new(b0: f64) -> Result<Self> {
        check_b0(b0)?;
        Ok(Self { b0 })
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    fn poly(&self, b: f64) -> f64 {
        let b0 = self.b0;
        (b * b + b - b0) * (b - b0) * (b - b0 - 1.0)
    }

    pub fn value(&self, b: f64) -> f64 {
        -2.0 / (self.b0 * self.b0) * self.poly(b)
    }

    pub fn derivative(&self, b: f64) -> f64 {
        let b0 = self.b0;
        let q = b * b + b - b0;
        let r = (b - b0) * (b - b0 - 1.0);
        let dp = (2.0 * b + 1.0) * r + q * (2.0 * b - 2.0 * b0 - 1.0);
        -2.0 / (b0 * b0) * dp
    }

    /// All four roots in ascending order.
    pub fn roots(&self) -> [f64; 4] {
        let s = (1.0 + 4.0 * self.b0).sqrt();
        [(-1.0 - s) / 2.0, (-1.0 + s) / 2.0, self.b0, self.b0 + 1.0]
    }

    /// Unit-mass energy ½(db/dξ)² + V(b).
    pub fn energy(&self, b: f64, db: f64) -> f64 {
        0.5 * db * db + self.value(b)
    }
}

fn check_b0(b0: f64) -> Result<()> {
    if !(b0 > 0.0 && b0.is_finite()) {
        return Err(invalid("b0", "must be positive and finite"));
    }
    Ok(())
}

/// |db/dξ| on the orbit starting from rest at b₀; the first half-period is
/// the descending branch db/dξ = −|db/dξ|.
pub fn reduced_ode_rhs(b: f64, b0: f64) -> Result<f64> {
    let v = QuarticPotential::new(b0)?;
    let p = v.poly(b);
    if p < 0.0 {
        let scale = b0 * b0 * (b.abs() + b0 + 1.0) * (b.abs() + b0 + 1.0);
        if p < -1e-12 * scale {
            return Err(Error::Domain(format!(
                "b = {b} outside the allowed region for b0 = {b0}"
            )));
        }
        return Ok(0.0);
    }
    Ok(2.0 / b0 * p.sqrt())
}

/// (b_min, b₀, b₀ + 1).
pub fn quartic_turning_points(b0: f64) -> Result<(f64, f64, f64)> {
    check_b0(b0)?;
    Ok((b_min(b0), b0, b0 + 1.0))
}

/// Inner turning point (−1 + sqrt(1 + 4b₀))/2, the pump photon number at
/// maximal conversion.
pub fn b_min(b0: f64) -> f64 {
    (-1.0 + (1.0 + 4.0 * b0).sqrt()) / 2.0
}

/// Converted fraction at the turning point, 1 − b_min/b₀.
pub fn efficiency(b0: f64) -> Result<f64> {
    check_b0(b0)?;
    Ok(1.0 - b_min(b0) / b0)
}

/// ξ from b₀ down to b_min,
/// ∫ db / sqrt(−2V) = (b₀/2) ∫₀^π dφ / sqrt((b − r₋)(b₀ + 1 − b)),
/// with b = (b₀ + b_min)/2 − (b₀ − b_min)/2·cos φ and r₋ the negative root.
pub fn conversion_distance(b0: f64) -> Result<f64> {
    let v = QuarticPotential::new(b0)?;
    let [r_neg, lo, hi, outer] = v.roots();
    let mid = 0.5 * (hi + lo);
    let half = 0.5 * (hi - lo);
    let integrand = |phi: f64| {
        let b = mid - half * phi.cos();
        1.0 / ((b - r_neg) * (outer - b)).sqrt()
    };
    let scale = PI / (b0 + 1.0).sqrt();
    Ok(0.5 * b0 * quad::integrate(integrand, 0.0, PI, 1e-14 * scale)?)
}

fn pendulum_rhs(v: QuarticPotential) -> impl FnMut(f64, &[f64], &mut [f64]) {
    move |_, s, ds| {
        ds[0] = s[1];
        ds[1] = -v.derivative(s[0]);
    }
}

fn pendulum_options(b0: f64) -> OdeOptions {
    OdeOptions {
        atol: TOL * b0,
        ..OdeOptions::with_tol(TOL)
    }
}

/// Pendulum trajectory released from rest at b₀, sampled on `grid`, with
/// columns `b` and `db`.
pub fn integrate_meanfield_on_grid(b0: f64, grid: &[f64]) -> Result<TrajectoryRecord> {
    if !(b0 >= 1.0 && b0.is_finite()) {
        return Err(invalid("b0", "must be at least 1"));
    }
    let v = QuarticPotential::new(b0)?;
    let states = integrate_on_grid(pendulum_rhs(v), 0.0, &[b0, 0.0], grid, pendulum_options(b0))?;
    let mut rec = TrajectoryRecord::new(["b", "db"]);
    for (&xi, s) in grid.iter().zip(states) {
        rec.push(xi, s)?;
    }
    Ok(rec)
}

/// Pendulum trajectory on [0, xi_end] sampled at 1000 equal intervals.
pub fn integrate_meanfield(b0: f64, xi_end: f64) -> Result<TrajectoryRecord> {
    if !(xi_end > 0.0) {
        return Err(invalid("xi_end", "must be positive"));
    }
    let grid: Vec<f64> = (0..=1000).map(|i| xi_end * i as f64 / 1000.0).collect();
    integrate_meanfield_on_grid(b0, &grid)
}

/// ξ of the first inner turning point and the full period, located as sign
/// changes of db/dξ along the integrated pendulum.
pub fn integrated_turning_points(b0: f64) -> Result<(f64, f64)> {
    let v = QuarticPotential::new(b0)?;
    let horizon = 10.0 * conversion_distance(b0)?;
    let opts = pendulum_options(b0);
    // descending first: -db/dξ is positive until the inner turning point
    let (x_half, state) =
        find_event(pendulum_rhs(v), 0.0, &[b0, 0.0], horizon, opts, |_, s, _| -s[1], false)?.ok_or(Error::NoMinimum)?;
    let second =
        find_event(pendulum_rhs(v), x_half, &state, horizon, opts, |_, s, _| s[1], false)?.ok_or(Error::NoMinimum)?;
    Ok((x_half, second.0))
}
