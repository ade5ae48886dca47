//! Adaptive Dormand–Prince 5(4) integrator for real ODE systems.
//!
//! The stepper never steps past a requested target, so output grids are hit
//! exactly instead of being interpolated.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Hard cap on accepted + rejected steps per `advance_to` call.
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            max_steps: 5_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Stateful Dormand–Prince stepper for `y' = f(x, y)`.
pub struct Dopri5<F> {
    rhs: F,
    opts: OdeOptions,
    x: f64,
    y: Vec<f64>,
    h: f64,
    // first-same-as-last derivative at (x, y)
    k1: Vec<f64>,
    k: [Vec<f64>; 6],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
}

impl<F> Dopri5<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    pub fn new(mut rhs: F, x0: f64, y0: &[f64], opts: OdeOptions) -> Self {
        let n = y0.len();
        let mut k1 = vec![0.0; n];
        rhs(x0, y0, &mut k1);
        let h = initial_step(x0, y0, &k1, &opts);
        Self {
            rhs,
            opts,
            x: x0,
            y: y0.to_vec(),
            h,
            k1,
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            y_new: vec![0.0; n],
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Derivative at the current point.
    pub fn dydx(&self) -> &[f64] {
        &self.k1
    }

    /// Restarts from a new point, keeping the current step-size guess.
    pub fn reset(&mut self, x: f64, y: &[f64]) {
        self.x = x;
        self.y.copy_from_slice(y);
        (self.rhs)(x, y, &mut self.k1);
    }

    /// Takes one accepted step, never passing `x_limit`.
    pub fn step(&mut self, x_limit: f64) -> Result<()> {
        let n = self.y.len();
        let mut attempts = 0usize;
        loop {
            attempts += 1;
            if attempts > self.opts.max_steps {
                return Err(Error::TooManySteps {
                    steps: attempts,
                    xi: self.x,
                });
            }
            let remaining = x_limit - self.x;
            if remaining <= 0.0 {
                return Ok(());
            }
            let mut h = self.h.min(remaining);
            // avoid leaving a sliver behind
            let landing = h >= remaining * (1.0 - 1e-12);
            if landing {
                h = remaining;
            }
            if !landing && h <= 1e-14 * self.x.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { xi: self.x });
            }

            let x = self.x;
            let y = &self.y;
            let k1 = &self.k1;
            let [k2, k3, k4, k5, k6, k7] = &mut self.k;
            let tmp = &mut self.tmp;

            for i in 0..n {
                tmp[i] = y[i] + h * A21 * k1[i];
            }
            (self.rhs)(x + C2 * h, tmp, k2);
            for i in 0..n {
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            (self.rhs)(x + C3 * h, tmp, k3);
            for i in 0..n {
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            (self.rhs)(x + C4 * h, tmp, k4);
            for i in 0..n {
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            (self.rhs)(x + C5 * h, tmp, k5);
            for i in 0..n {
                tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            (self.rhs)(x + h, tmp, k6);
            let y_new = &mut self.y_new;
            for i in 0..n {
                y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            let x_new = if landing { x_limit } else { x + h };
            (self.rhs)(x_new, y_new, k7);

            let mut err2 = 0.0;
            for i in 0..n {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = self.opts.atol + self.opts.rtol * y[i].abs().max(y_new[i].abs());
                err2 += (e / scale).powi(2);
            }
            let err = (err2 / n as f64).sqrt();
            if !err.is_finite() {
                self.h = h * 0.1;
                continue;
            }

            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                self.x = x_new;
                std::mem::swap(&mut self.y, &mut self.y_new);
                std::mem::swap(&mut self.k1, k7);
                // a landing step may have been artificially short
                if !landing || factor < 1.0 {
                    self.h = h * factor;
                }
                return Ok(());
            }
            self.h = h * factor.min(1.0);
        }
    }

    /// Integrates exactly up to `x_target`.
    pub fn advance_to(&mut self, x_target: f64) -> Result<()> {
        while self.x < x_target {
            self.step(x_target)?;
        }
        Ok(())
    }
}

fn initial_step(x0: f64, y0: &[f64], f0: &[f64], opts: &OdeOptions) -> f64 {
    let n = y0.len().max(1) as f64;
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (y, f) in y0.iter().zip(f0) {
        let sc = opts.atol + opts.rtol * y.abs();
        d0 += (y / sc).powi(2);
        d1 += (f / sc).powi(2);
    }
    let d0 = (d0 / n).sqrt();
    let d1 = (d1 / n).sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(0.1 * x0.abs().max(1.0))
}

/// Integrates from `(x0, y0)` and returns the state at every grid point.
/// Grid points must be ascending and not precede `x0`.
pub fn integrate_on_grid<F>(rhs: F, x0: f64, y0: &[f64], grid: &[f64], opts: OdeOptions) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut stepper = Dopri5::new(rhs, x0, y0, opts);
    let mut out = Vec::with_capacity(grid.len());
    let mut prev = x0;
    for &x in grid {
        if x < prev {
            return Err(Error::Domain(format!("output grid not ascending at {x}")));
        }
        prev = x;
        stepper.advance_to(x)?;
        out.push(stepper.y().to_vec());
    }
    Ok(out)
}

/// Finds the first `x` in `(x0, x_end]` where `event(x, y)` crosses zero from
/// positive to nonpositive (or in either direction if `any_direction`), and
/// returns the located point and state.
pub fn find_event<F, G>(
    rhs: F,
    x0: f64,
    y0: &[f64],
    x_end: f64,
    opts: OdeOptions,
    mut event: G,
    any_direction: bool,
) -> Result<Option<(f64, Vec<f64>)>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    G: FnMut(f64, &[f64], &[f64]) -> f64,
{
    let mut stepper = Dopri5::new(rhs, x0, y0, opts);
    let mut g_prev = event(stepper.x(), stepper.y(), stepper.dydx());
    let mut x_prev = stepper.x();
    let mut y_prev = stepper.y().to_vec();
    while stepper.x() < x_end {
        stepper.step(x_end)?;
        let g = event(stepper.x(), stepper.y(), stepper.dydx());
        let crossed = if any_direction {
            g_prev * g <= 0.0 && g_prev != 0.0
        } else {
            g_prev > 0.0 && g <= 0.0
        };
        if crossed {
            let (xa, ga, xb, gb) = (x_prev, g_prev, stepper.x(), g);
            let (x, y) = refine_event(&mut stepper, &mut event, &y_prev, xa, ga, xb, gb)?;
            return Ok(Some((x, y)));
        }
        g_prev = g;
        x_prev = stepper.x();
        y_prev.copy_from_slice(stepper.y());
    }
    Ok(None)
}

// Illinois-modified regula falsi; each trial point is reached by a fresh
// integration from the bracket's left end.
fn refine_event<F, G>(
    stepper: &mut Dopri5<F>,
    event: &mut G,
    y_left: &[f64],
    mut xa: f64,
    mut ga: f64,
    mut xb: f64,
    mut gb: f64,
) -> Result<(f64, Vec<f64>)>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    G: FnMut(f64, &[f64], &[f64]) -> f64,
{
    let mut ya = y_left.to_vec();
    let mut yb = stepper.y().to_vec();
    let mut side = 0i32;
    for _ in 0..200 {
        if (xb - xa).abs() <= 1e-15 * xb.abs().max(1.0) {
            break;
        }
        let mut xm = (xa * gb - xb * ga) / (gb - ga);
        if !(xm > xa && xm < xb) {
            xm = 0.5 * (xa + xb);
        }
        stepper.reset(xa, &ya);
        stepper.advance_to(xm)?;
        let gm = event(stepper.x(), stepper.y(), stepper.dydx());
        if gm == 0.0 {
            return Ok((xm, stepper.y().to_vec()));
        }
        if (gm > 0.0) == (ga > 0.0) {
            xa = xm;
            ga = gm;
            ya.copy_from_slice(stepper.y());
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            xb = xm;
            gb = gm;
            yb.copy_from_slice(stepper.y());
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
    }
    Ok((xb, yb))
}
