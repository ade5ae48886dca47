//! Physical parameters, classical field states and trajectory records shared
//! by every solver.

use num_complex::Complex64 as C64;

use crate::error::{invalid, Result};

/// Laboratory-unit parameters. The solvers work in the dimensionless
/// propagation coordinate ξ = (κ/Δ)·ζ; this type only converts to and from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    kappa: f64,
    delta: f64,
    gamma1: f64,
    gamma2: f64,
}

impl PhysicalParams {
    pub fn new(kappa: f64, delta: f64, gamma1: f64, gamma2: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(invalid("kappa", format!("must be positive, got {kappa}")));
        }
        if delta == 0.0 || !delta.is_finite() {
            return Err(invalid("delta", format!("must be finite and nonzero, got {delta}")));
        }
        if !(gamma1 >= 0.0 && gamma1.is_finite()) {
            return Err(invalid("gamma1", format!("must be nonnegative, got {gamma1}")));
        }
        if !(gamma2 >= 0.0 && gamma2.is_finite()) {
            return Err(invalid("gamma2", format!("must be nonnegative, got {gamma2}")));
        }
        Ok(Self {
            kappa,
            delta,
            gamma1,
            gamma2,
        })
    }

    /// Lossless parameters (γ₁ = γ₂ = 0).
    pub fn lossless(kappa: f64, delta: f64) -> Result<Self> {
        Self::new(kappa, delta, 0.0, 0.0)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    /// κ/Δ, signed.
    pub fn rate(&self) -> f64 {
        self.kappa / self.delta
    }

    /// Propagation distance ζ → ξ = (κ/Δ)·ζ.
    pub fn to_xi(&self, zeta: f64) -> f64 {
        self.rate() * zeta
    }

    pub fn to_zeta(&self, xi: f64) -> f64 {
        xi / self.rate()
    }
}

/// κ/Δ from raw numbers; rejects Δ = 0.
pub fn dimensionless_rate(kappa: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(invalid("delta", "dimensionless rate needs a nonzero detuning"));
    }
    Ok(kappa / delta)
}

/// Complex Rabi-frequency amplitudes of the two pumps and the two generated
/// fields.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldState {
    pub omega1: C64,
    pub omega2: C64,
    pub e1: C64,
    pub e2: C64,
}

impl FieldState {
    pub fn new(omega1: C64, omega2: C64, e1: C64, e2: C64) -> Self {
        Self { omega1, omega2, e1, e2 }
    }

    /// Real pumps, real generated fields.
    pub fn real(omega1: f64, omega2: f64, e1: f64, e2: f64) -> Self {
        Self::new(omega1.into(), omega2.into(), e1.into(), e2.into())
    }

    /// |Ω₁|² + |E₁|², the denominator of the effective interaction.
    pub fn denominator(&self) -> f64 {
        self.omega1.norm_sqr() + self.e1.norm_sqr()
    }

    /// Ω₁Ω₂E₁*E₂*; its real part is the phase constant of motion.
    pub fn four_field_product(&self) -> C64 {
        self.omega1 * self.omega2 * self.e1.conj() * self.e2.conj()
    }

    /// Intensities (|Ω₁|², |Ω₂|², |E₁|², |E₂|²).
    pub fn intensities(&self) -> [f64; 4] {
        [
            self.omega1.norm_sqr(),
            self.omega2.norm_sqr(),
            self.e1.norm_sqr(),
            self.e2.norm_sqr(),
        ]
    }

    pub fn is_finite(&self) -> bool {
        [self.omega1, self.omega2, self.e1, self.e2]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn to_array(self) -> [f64; 8] {
        [
            self.omega1.re,
            self.omega1.im,
            self.omega2.re,
            self.omega2.im,
            self.e1.re,
            self.e1.im,
            self.e2.re,
            self.e2.im,
        ]
    }

    pub(crate) fn from_slice(v: &[f64]) -> Self {
        Self::new(
            C64::new(v[0], v[1]),
            C64::new(v[2], v[3]),
            C64::new(v[4], v[5]),
            C64::new(v[6], v[7]),
        )
    }
}

/// The four classical Manley–Rowe quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManleyRowe {
    /// |Ω₁|² + |E₁|²
    pub m1: f64,
    /// |Ω₂|² + |E₂|²
    pub m2: f64,
    /// |Ω₁|² − |Ω₂|²
    pub m3: f64,
    /// 2·Re(Ω₁Ω₂E₁*E₂*)
    pub m4: f64,
}

impl ManleyRowe {
    pub fn as_array(&self) -> [f64; 4] {
        [self.m1, self.m2, self.m3, self.m4]
    }
}

pub fn manley_rowe(fs: &FieldState) -> ManleyRowe {
    let [o1, o2, e1, e2] = fs.intensities();
    ManleyRowe {
        m1: o1 + e1,
        m2: o2 + e2,
        m3: o1 - o2,
        m4: 2.0 * fs.four_field_product().re,
    }
}

/// A trajectory sampled at strictly increasing coordinates, with named
/// columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    labels: Vec<String>,
    coordinates: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl TrajectoryRecord {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        Self {
            labels: labels.into_iter().map(Into::into).collect(),
            coordinates: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Appends one sample. The coordinate must exceed the previous one and
    /// `values` must match the label count.
    pub fn push(&mut self, coordinate: f64, values: Vec<f64>) -> Result<()> {
        if values.len() != self.labels.len() {
            return Err(invalid(
                "values",
                format!("expected {} columns, got {}", self.labels.len(), values.len()),
            ));
        }
        if let Some(&last) = self.coordinates.last() {
            if coordinate <= last {
                return Err(invalid(
                    "coordinate",
                    format!("{coordinate} does not exceed previous {last}"),
                ));
            }
        }
        self.coordinates.push(coordinate);
        self.rows.push(values);
        Ok(())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.coordinates
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.coordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coordinates.is_empty()
    }

    /// One column by label.
    pub fn column(&self, label: &str) -> Option<Vec<f64>> {
        let idx = self.labels.iter().position(|l| l == label)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}
