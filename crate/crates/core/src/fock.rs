//! Exact quantum evolution inside one invariant number-state sector of the
//! effective Hamiltonian
//!
//! H = g·(b₁†b₂†a₁a₂ + a₁†a₂†b₁b₂) / (b₁†b₁ + a₁†a₁),  g = κc/Δ,
//!
//! where b are the pump modes (Ω₁, Ω₂) and a the generated modes (E₁, E₂).
//! A sector is labelled by the initial occupations (n₁, n₂, n₃, n₄) and
//! spanned by |n₁ − n, n₂ − n, n₃ + n, n₄ + n⟩ for n in
//! [−min(n₃, n₄), min(n₁, n₂)]. On a sector the denominator is the constant
//! d = n₁ + n₃, so H is a zero-diagonal real symmetric tridiagonal matrix in n.
//! Times τ are in units of 1/g.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::{symmetric_tridiagonal_eigen, TridiagEigen};

/// Initial occupations of the four modes, in the order (Ω₁, Ω₂, E₁, E₂).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockSector {
    pub n1: u32,
    pub n2: u32,
    pub n3: u32,
    pub n4: u32,
}

pub fn build_sector(n1: u32, n2: u32, n3: u32, n4: u32) -> FockSector {
    FockSector { n1, n2, n3, n4 }
}

impl FockSector {
    /// Vacuum-seeded sector with pump occupations (n₁, n₂).
    pub fn pumps(n1: u32, n2: u32) -> Self {
        build_sector(n1, n2, 0, 0)
    }

    pub fn n_min(&self) -> i64 {
        -(self.n3.min(self.n4) as i64)
    }

    pub fn n_max(&self) -> i64 {
        self.n1.min(self.n2) as i64
    }

    pub fn dimension(&self) -> usize {
        (self.n_max() - self.n_min() + 1) as usize
    }

    /// The constant value d = n₁ + n₃ of the denominator operator.
    pub fn denominator(&self) -> u64 {
        self.n1 as u64 + self.n3 as u64
    }

    /// A sector evolves only if it has at least two states; a one-dimensional
    /// sector (including every d = 0 sector) is frozen.
    pub fn is_frozen(&self) -> bool {
        self.dimension() == 1
    }

    /// Transfer coordinate of basis index `k`.
    pub fn transfer(&self, k: usize) -> i64 {
        self.n_min() + k as i64
    }

    pub fn index_of(&self, n: i64) -> Option<usize> {
        (self.n_min()..=self.n_max())
            .contains(&n)
            .then(|| (n - self.n_min()) as usize)
    }

    /// Occupations (Ω₁, Ω₂, E₁, E₂) of the basis state with transfer `n`.
    pub fn occupations(&self, n: i64) -> [i64; 4] {
        [
            self.n1 as i64 - n,
            self.n2 as i64 - n,
            self.n3 as i64 + n,
            self.n4 as i64 + n,
        ]
    }

    /// Tridiagonal Hamiltonian with the sector's own denominator.
    pub fn hamiltonian(&self) -> TridiagonalHamiltonian {
        self.hamiltonian_with_denominator(self.denominator() as f64)
    }

    /// Tridiagonal Hamiltonian with the denominator replaced by `d`
    /// (off-resonant, ordinary four-wave mixing when `d` is held fixed).
    /// A zero denominator yields a frozen (all-zero) Hamiltonian.
    pub fn hamiltonian_with_denominator(&self, d: f64) -> TridiagonalHamiltonian {
        let offdiag = ((self.n_min() + 1)..=self.n_max())
            .map(|n| {
                if d == 0.0 {
                    return 0.0;
                }
                let [p1, p2, g1, g2] = self.occupations(n);
                // ⟨n| a₁†a₂†b₁b₂ |n − 1⟩
                let amp = ((p1 + 1) as f64 * (p2 + 1) as f64 * g1 as f64 * g2 as f64).sqrt();
                amp / d
            })
            .collect();
        TridiagonalHamiltonian { offdiag }
    }
}

/// Zero-diagonal real symmetric tridiagonal matrix; `offdiag[k]` couples basis
/// indices k and k + 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalHamiltonian {
    offdiag: Vec<f64>,
}

impl TridiagonalHamiltonian {
    pub fn dimension(&self) -> usize {
        self.offdiag.len() + 1
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn eigen(&self) -> Result<TridiagEigen> {
        let diag = vec![0.0; self.dimension()];
        symmetric_tridiagonal_eigen(&diag, &self.offdiag)
    }

    pub fn apply(&self, c: &[C64]) -> Vec<C64> {
        let n = self.dimension();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (k, &h) in self.offdiag.iter().enumerate() {
            out[k] += h * c[k + 1];
            out[k + 1] += h * c[k];
        }
        out
    }
}

/// Complex amplitudes over a sector basis, indexed by k = n − n_min.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorAmplitudes {
    c: Vec<C64>,
}

impl SectorAmplitudes {
    pub fn new(c: Vec<C64>) -> Self {
        Self { c }
    }

    /// The basis state with transfer coordinate `n` (n = 0 is the initial
    /// occupation of the sector).
    pub fn basis(sector: &FockSector, n: i64) -> Result<Self> {
        let k = sector
            .index_of(n)
            .ok_or_else(|| Error::Domain(format!("transfer {n} outside sector {sector:?}")))?;
        let mut c = vec![C64::new(0.0, 0.0); sector.dimension()];
        c[k] = C64::new(1.0, 0.0);
        Ok(Self { c })
    }

    /// The sector's initial state |n₁, n₂, n₃, n₄⟩.
    pub fn initial(sector: &FockSector) -> Self {
        Self::basis(sector, 0).expect("n = 0 always lies in the sector")
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.c
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.c.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &SectorAmplitudes) -> C64 {
        self.c.iter().zip(&other.c).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Spectral decomposition of one sector Hamiltonian, reusable across any
/// number of evolution times.
#[derive(Debug, Clone)]
pub struct Propagator {
    sector: FockSector,
    eigen: TridiagEigen,
    // every coupling nonzero, so the spectrum is simple and ± paired
    paired: bool,
}

impl Propagator {
    pub fn new(sector: FockSector) -> Result<Self> {
        Self::from_hamiltonian(sector, &sector.hamiltonian())
    }

    pub fn with_denominator(sector: FockSector, d: f64) -> Result<Self> {
        Self::from_hamiltonian(sector, &sector.hamiltonian_with_denominator(d))
    }

    fn from_hamiltonian(sector: FockSector, h: &TridiagonalHamiltonian) -> Result<Self> {
        let eigen = h.eigen().map_err(|e| Error::Sector {
            n1: sector.n1,
            n2: sector.n2,
            n3: sector.n3,
            n4: sector.n4,
            source: Box::new(e),
        })?;
        let paired = h.offdiag().iter().all(|&t| t != 0.0);
        Ok(Self { sector, eigen, paired })
    }

    pub fn sector(&self) -> &FockSector {
        &self.sector
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.eigen.values()
    }

    /// exp(−iHτ)·c0.
    pub fn evolve(&self, c0: &SectorAmplitudes, tau: f64) -> SectorAmplitudes {
        let dim = self.eigen.dim();
        assert_eq!(c0.len(), dim, "amplitude vector does not match sector");
        if tau == 0.0 {
            return c0.clone();
        }
        let mut c = vec![C64::new(0.0, 0.0); dim];
        for k in 0..dim {
            let v = self.eigen.vector(k);
            let proj: C64 = v.iter().zip(&c0.c).map(|(&a, &b)| a * b).sum();
            let w = proj * C64::from_polar(1.0, -self.eigen.values()[k] * tau);
            for (ci, &vi) in c.iter_mut().zip(v) {
                *ci += w * vi;
            }
        }
        SectorAmplitudes { c }
    }

    /// Evolution from a basis state, prepared for repeated occupation-
    /// probability queries.
    pub fn from_basis_state(&self, n: i64) -> Result<BasisEvolution> {
        let k0 = self
            .sector
            .index_of(n)
            .ok_or_else(|| Error::Domain(format!("transfer {n} outside sector")))?;
        let dim = self.eigen.dim();
        if !self.paired {
            // weights[i * dim + k] = V_ik V_{k0,k}
            let mut weights = vec![0.0; dim * dim];
            for k in 0..dim {
                let v = self.eigen.vector(k);
                for i in 0..dim {
                    weights[i * dim + k] = v[i] * v[k0];
                }
            }
            return Ok(BasisEvolution {
                dim,
                start: k0,
                paired: false,
                freqs: self.eigen.values().to_vec(),
                weights,
                zero_mode: None,
            });
        }
        // A zero-diagonal tridiagonal matrix satisfies S H S = −H with
        // S = diag((−1)^i), so (−λ, S v) is an eigenpair whenever (λ, v) is.
        // Summing each pair gives 2 cos(λτ) on sites of the start's parity and
        // −2i sin(λτ) on the others, so only λ > 0 is needed.
        let half = dim / 2;
        let first = dim - half;
        let mut weights = vec![0.0; dim * half];
        for (j, k) in (first..dim).enumerate() {
            let v = self.eigen.vector(k);
            for i in 0..dim {
                weights[i * half + j] = 2.0 * v[i] * v[k0];
            }
        }
        let zero_mode = (dim % 2 == 1).then(|| {
            let v = self.eigen.vector(half);
            v.iter().map(|&vi| vi * v[k0]).collect()
        });
        Ok(BasisEvolution {
            dim,
            start: k0,
            paired: true,
            freqs: self.eigen.values()[first..].to_vec(),
            weights,
            zero_mode,
        })
    }
}

/// Occupation probabilities of a sector evolved from one basis state:
/// c_i(τ) = Σ_k V_ik V_{k0,k} e^{−iλ_k τ}.
#[derive(Debug, Clone)]
pub struct BasisEvolution {
    dim: usize,
    start: usize,
    paired: bool,
    freqs: Vec<f64>,
    weights: Vec<f64>,
    zero_mode: Option<Vec<f64>>,
}

impl BasisEvolution {
    /// Writes |c_i(τ)|² into `probs` (length = sector dimension); `scratch`
    /// holds the phase factors between calls.
    pub fn probabilities_into(&self, tau: f64, probs: &mut [f64], scratch: &mut Vec<f64>) {
        let dim = self.dim;
        if tau == 0.0 {
            probs[..dim].fill(0.0);
            probs[self.start] = 1.0;
            return;
        }
        let m = self.freqs.len();
        scratch.resize(2 * m, 0.0);
        let (cosv, sinv) = scratch.split_at_mut(m);
        for k in 0..m {
            let (s, c) = (self.freqs[k] * tau).sin_cos();
            cosv[k] = c;
            sinv[k] = s;
        }
        if !self.paired {
            for (i, p) in probs.iter_mut().enumerate().take(dim) {
                let row = &self.weights[i * m..(i + 1) * m];
                let re = dot(row, cosv);
                let im = dot(row, sinv);
                *p = re * re + im * im;
            }
            return;
        }
        for (i, p) in probs.iter_mut().enumerate().take(dim) {
            let row = &self.weights[i * m..(i + 1) * m];
            let z = self.zero_mode.as_ref().map_or(0.0, |v| v[i]);
            *p = if (i + self.start).is_multiple_of(2) {
                let re = z + dot(row, cosv);
                re * re
            } else {
                let im = dot(row, sinv);
                z * z + im * im
            };
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators let the compiler vectorise
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut tail = 0.0;
    for k in 4 * chunks..a.len() {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Evolves `c0` to every τ on the grid.
pub fn evolve_sector(s: &FockSector, c0: &SectorAmplitudes, tau_grid: &[f64]) -> Result<Vec<SectorAmplitudes>> {
    if c0.len() != s.dimension() {
        return Err(Error::Domain(format!(
            "amplitude vector has length {}, sector dimension is {}",
            c0.len(),
            s.dimension()
        )));
    }
    let prop = Propagator::new(*s)?;
    Ok(tau_grid.iter().map(|&t| prop.evolve(c0, t)).collect())
}

/// Eigendecompositions shared between callers, keyed by sector and the
/// denominator used.
#[derive(Debug, Default)]
pub struct SpectralCache {
    map: RwLock<HashMap<(FockSector, u64), Arc<Propagator>>>,
}

impl SpectralCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, sector: FockSector) -> Result<Arc<Propagator>> {
        self.get_with_denominator(sector, sector.denominator() as f64)
    }

    pub fn get_with_denominator(&self, sector: FockSector, d: f64) -> Result<Arc<Propagator>> {
        let key = (sector, d.to_bits());
        if let Some(p) = self.map.read().expect("cache lock poisoned").get(&key) {
            return Ok(Arc::clone(p));
        }
        let prop = Arc::new(Propagator::with_denominator(sector, d)?);
        let mut map = self.map.write().expect("cache lock poisoned");
        Ok(Arc::clone(map.entry(key).or_insert(prop)))
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// First and second moments of the transfer coordinate n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMoments {
    pub mean: f64,
    pub mean_sq: f64,
}

impl TransferMoments {
    pub fn from_probabilities(sector: &FockSector, probs: &[f64]) -> Self {
        let mut mean = 0.0;
        let mut mean_sq = 0.0;
        for (k, &p) in probs.iter().enumerate() {
            let n = sector.transfer(k) as f64;
            mean += p * n;
            mean_sq += p * n * n;
        }
        Self { mean, mean_sq }
    }

    pub fn variance(&self) -> f64 {
        (self.mean_sq - self.mean * self.mean).max(0.0)
    }
}

pub fn transfer_moments(s: &FockSector, c: &SectorAmplitudes) -> TransferMoments {
    TransferMoments::from_probabilities(s, &c.probabilities())
}

/// ⟨n_Ω₁⟩ = n₁ − ⟨n⟩.
pub fn pump_expectation(s: &FockSector, c: &SectorAmplitudes) -> f64 {
    s.n1 as f64 - transfer_moments(s, c).mean
}

/// ⟨n_E₁⟩ = n₃ + ⟨n⟩.
pub fn generated_expectation(s: &FockSector, c: &SectorAmplitudes) -> f64 {
    s.n3 as f64 + transfer_moments(s, c).mean
}

/// Var(n_Ω₁) = Var(n).
pub fn pump_variance(s: &FockSector, c: &SectorAmplitudes) -> f64 {
    transfer_moments(s, c).variance()
}

/// Var(n_E₁) = Var(n).
pub fn generated_variance(s: &FockSector, c: &SectorAmplitudes) -> f64 {
    transfer_moments(s, c).variance()
}

/// Mandel Q = Var/mean − 1.
pub fn mandel_q(mean: f64, var: f64) -> Result<f64> {
    if !(mean > 0.0) {
        return Err(Error::UndefinedStatistics);
    }
    Ok(var / mean - 1.0)
}

/// Var(n_E₁ − n_E₂). The difference is shifted by its value on the first basis
/// state before squaring, so a constant difference gives exactly zero.
pub fn intensity_difference_variance(s: &FockSector, c: &SectorAmplitudes) -> f64 {
    let diff = |k: usize| {
        let occ = s.occupations(s.transfer(k));
        (occ[2] - occ[3]) as f64
    };
    let shift = diff(0);
    let mut norm = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (k, p) in c.probabilities().into_iter().enumerate() {
        let x = diff(k) - shift;
        norm += p;
        m1 += p * x;
        m2 += p * x * x;
    }
    if norm == 0.0 {
        return 0.0;
    }
    let mean = m1 / norm;
    (m2 / norm - mean * mean).max(0.0)
}

/// Photon-number observables at one evolution time. Q is `None` where the
/// mode is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableRow {
    pub tau: f64,
    pub pump_mean: f64,
    pub pump_var: f64,
    pub gen_mean: f64,
    pub gen_var: f64,
    pub q_pump: Option<f64>,
    pub q_gen: Option<f64>,
    pub var_diff: f64,
}

impl ObservableRow {
    pub(crate) fn from_moments(
        tau: f64,
        pump_mean: f64,
        pump_var: f64,
        gen_mean: f64,
        gen_var: f64,
        var_diff: f64,
    ) -> Self {
        Self {
            tau,
            pump_mean,
            pump_var,
            gen_mean,
            gen_var,
            q_pump: mandel_q(pump_mean, pump_var).ok(),
            q_gen: mandel_q(gen_mean, gen_var).ok(),
            var_diff,
        }
    }
}

/// Observables of a sector started in its initial number state.
pub fn fock_observables(s: &FockSector, tau_grid: &[f64]) -> Result<Vec<ObservableRow>> {
    let c0 = SectorAmplitudes::initial(s);
    let states = evolve_sector(s, &c0, tau_grid)?;
    Ok(tau_grid
        .iter()
        .zip(&states)
        .map(|(&tau, c)| {
            let m = transfer_moments(s, c);
            ObservableRow::from_moments(
                tau,
                s.n1 as f64 - m.mean,
                m.variance(),
                s.n3 as f64 + m.mean,
                m.variance(),
                intensity_difference_variance(s, c),
            )
        })
        .collect())
}

/// Conversion length of a single-photon pair (1, 1, 0, 0): the pump is empty
/// at τ = π/2.
pub const SINGLE_PHOTON_CONVERSION_TAU: f64 = std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGateRow {
    pub label: String,
    pub input: [u32; 4],
    /// ⟨input| U(τ) |input⟩
    pub overlap: C64,
}

/// Truth table of the two-photon phase gate: every logical input is evolved
/// for twice the single-photon conversion length.
pub fn phase_gate_truth_table() -> Result<Vec<PhaseGateRow>> {
    phase_gate_at(2.0 * SINGLE_PHOTON_CONVERSION_TAU)
}

/// Phase-gate overlaps after an arbitrary evolution time.
pub fn phase_gate_at(tau: f64) -> Result<Vec<PhaseGateRow>> {
    [[0, 0, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0], [1, 1, 0, 0]]
        .into_iter()
        .map(|input| {
            let sector = build_sector(input[0], input[1], input[2], input[3]);
            let c0 = SectorAmplitudes::initial(&sector);
            let c = Propagator::new(sector)?.evolve(&c0, tau);
            Ok(PhaseGateRow {
                label: format!("|{},{},{},{}>", input[0], input[1], input[2], input[3]),
                input,
                overlap: c0.inner(&c),
            })
        })
        .collect()
}
