//! Coherent-state pumps as Poisson mixtures of vacuum-seeded sectors.
//!
//! Every reported observable is a function of photon numbers, and photon
//! numbers are block diagonal in the sector decomposition, so an ensemble
//! moment is the Poisson-weighted sum of sector moments. The coherent phases
//! never enter.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fock::{FockSector, ObservableRow, Propagator};
use crate::meanfield;
use crate::numerics::KahanSum;

pub const DEFAULT_EPS_TAIL: f64 = 1e-8;

/// Sectors per reduction chunk. Partial sums are formed per chunk and then
/// combined in chunk order, so the result does not depend on how chunks are
/// scheduled.
const CHUNK: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct SectorEnsemble {
    sectors: Vec<(FockSector, f64)>,
    tail_mass: f64,
    mean1: f64,
    mean2: f64,
}

impl SectorEnsemble {
    /// An arbitrary incoherent mixture of sectors, each started in its
    /// initial number state. Weights must be positive; they are normalised by
    /// their sum when moments are formed.
    pub fn from_sectors(sectors: Vec<(FockSector, f64)>, tail_mass: f64) -> Result<Self> {
        if sectors.is_empty() {
            return Err(invalid("sectors", "must be nonempty"));
        }
        if sectors.iter().any(|&(_, w)| !(w > 0.0 && w.is_finite())) {
            return Err(invalid("weight", "must be positive and finite"));
        }
        if !(tail_mass >= 0.0) {
            return Err(invalid("tail_mass", "must be nonnegative"));
        }
        let total: f64 = sectors.iter().map(|&(_, w)| w).sum();
        let mean1 = sectors.iter().map(|&(s, w)| w * s.n1 as f64).sum::<f64>() / total;
        let mean2 = sectors.iter().map(|&(s, w)| w * s.n2 as f64).sum::<f64>() / total;
        Ok(Self {
            sectors,
            tail_mass,
            mean1,
            mean2,
        })
    }

    pub fn sectors(&self) -> &[(FockSector, f64)] {
        &self.sectors
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn weight_mass(&self) -> f64 {
        self.sectors.iter().map(|&(_, w)| w).collect::<KahanSum>().value()
    }

    pub fn means(&self) -> (f64, f64) {
        (self.mean1, self.mean2)
    }

    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }
}

/// Truncated Poisson distribution on `lo..=hi`, with the discarded mass.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonWindow {
    pub lo: u32,
    pub probs: Vec<f64>,
    pub tail_mass: f64,
}

// P(n; mean) for n near the mean. For n ≥ 30 the Stirling series is written
// relative to the mean so that the large terms cancel analytically.
fn poisson_pmf(n: u32, mean: f64) -> f64 {
    if n < 30 {
        let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
        return (n as f64 * mean.ln() - mean - ln_fact).exp();
    }
    let x = n as f64;
    let correction =
        1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3)) + 1.0 / (1260.0 * x.powi(5)) - 1.0 / (1680.0 * x.powi(7));
    let ln_p = x * ((mean - x) / x).ln_1p() + (x - mean) - 0.5 * (2.0 * std::f64::consts::PI * x).ln() - correction;
    ln_p.exp()
}

/// Smallest window around the mean whose discarded probability is at most
/// `eps` and whose discarded first moment is at most `eps·mean`.
pub fn poisson_window(mean: f64, eps: f64) -> Result<PoissonWindow> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(invalid("mean", "must be positive and finite"));
    }
    if !(eps > 0.0 && eps <= 1e-4) {
        return Err(invalid("eps_tail", "must lie in (0, 1e-4]"));
    }
    let centre = mean.floor() as u32;
    let pc = poisson_pmf(centre, mean);
    let mut probs = vec![pc];
    let mut lo = centre;
    let mut hi = centre;
    // walk outwards by the pmf ratio recurrence
    let mut p_lo = pc;
    let mut p_hi = pc;
    loop {
        let lower = lower_tail(lo, p_lo, mean);
        let upper = upper_tail(hi, p_hi, mean);
        let mass = lower.0 + upper.0;
        let moment = lower.1 + upper.1;
        if mass <= eps && moment <= eps * mean {
            return Ok(PoissonWindow {
                lo,
                probs,
                tail_mass: mass,
            });
        }
        if lo > 0 && lower.0 >= upper.0 {
            p_lo *= lo as f64 / mean;
            lo -= 1;
            probs.insert(0, p_lo);
        } else {
            p_hi *= mean / (hi + 1) as f64;
            hi += 1;
            probs.push(p_hi);
        }
    }
}

// Mass and first moment strictly below `lo`, given P(lo).
fn lower_tail(lo: u32, p_lo: f64, mean: f64) -> (f64, f64) {
    let mut mass = KahanSum::new();
    let mut moment = KahanSum::new();
    let mut p = p_lo;
    let mut k = lo;
    while k > 0 {
        p *= k as f64 / mean;
        k -= 1;
        mass.add(p);
        moment.add(p * k as f64);
    }
    (mass.value(), moment.value())
}

// Mass and first moment strictly above `hi`, given P(hi).
fn upper_tail(hi: u32, p_hi: f64, mean: f64) -> (f64, f64) {
    let mut mass = KahanSum::new();
    let mut moment = KahanSum::new();
    let mut p = p_hi;
    let mut k = hi;
    loop {
        k += 1;
        p *= mean / k as f64;
        mass.add(p);
        moment.add(p * k as f64);
        if (k as f64) > mean && p * (k as f64) < 1e-30 * (moment.value() + f64::MIN_POSITIVE) {
            break;
        }
        if p == 0.0 {
            break;
        }
    }
    (mass.value(), moment.value())
}

/// Product of two truncated Poisson windows over (n₁, n₂), generated modes in
/// vacuum. The joint discarded mass is at most `eps_tail`.
pub fn build_ensemble(mean1: f64, mean2: f64, eps_tail: f64) -> Result<SectorEnsemble> {
    let w1 = poisson_window(mean1, eps_tail / 2.0)?;
    let w2 = poisson_window(mean2, eps_tail / 2.0)?;
    let mut sectors = Vec::with_capacity(w1.probs.len() * w2.probs.len());
    for (i, &p1) in w1.probs.iter().enumerate() {
        for (j, &p2) in w2.probs.iter().enumerate() {
            let w = p1 * p2;
            if w > 0.0 {
                sectors.push((FockSector::pumps(w1.lo + i as u32, w2.lo + j as u32), w));
            }
        }
    }
    let tail_mass = w1.tail_mass + w2.tail_mass - w1.tail_mass * w2.tail_mass;
    Ok(SectorEnsemble {
        sectors,
        tail_mass,
        mean1,
        mean2,
    })
}

/// How each sector's denominator is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DenominatorMode {
    /// d = n₁ + n₃ in every sector.
    Resonant,
    /// The same d in every sector, as for an intensity-independent nonlinearity.
    Constant(f64),
}

impl DenominatorMode {
    pub fn label(&self) -> &'static str {
        match self {
            DenominatorMode::Resonant => "resonant",
            DenominatorMode::Constant(_) => "constant",
        }
    }

    fn propagator(&self, s: FockSector) -> Result<Propagator> {
        match *self {
            DenominatorMode::Resonant => Propagator::new(s),
            DenominatorMode::Constant(d) => Propagator::with_denominator(s, d),
        }
    }
}

/// Execution settings for the ensemble map-reduce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleOptions {
    pub mode: DenominatorMode,
    /// Worker threads; 0 uses rayon's global pool.
    pub workers: usize,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            mode: DenominatorMode::Resonant,
            workers: 0,
        }
    }
}

/// Weighted sums over a run of sectors, one set per τ.
#[derive(Debug, Clone)]
struct Partial {
    // per τ: Σw·n₁, Σw·n₁², Σw⟨n⟩, Σw⟨n²⟩, Σw·n₁⟨n⟩, Σw⟨Δ⟩, Σw⟨Δ²⟩
    sums: Vec<[KahanSum; 7]>,
    weight: KahanSum,
}

impl Partial {
    fn new(ntau: usize) -> Self {
        Self {
            sums: vec![[KahanSum::new(); 7]; ntau],
            weight: KahanSum::new(),
        }
    }

    fn merge(&mut self, other: &Partial) {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            for (x, y) in a.iter_mut().zip(b) {
                x.add(y.value());
            }
        }
        self.weight.add(other.weight.value());
    }
}

fn accumulate_chunk(chunk: &[(FockSector, f64)], taus: &[f64], mode: DenominatorMode) -> Result<Partial> {
    let mut part = Partial::new(taus.len());
    let mut probs = Vec::new();
    let mut scratch = Vec::new();
    for &(s, w) in chunk {
        part.weight.add(w);
        let n1 = s.n1 as f64;
        // signal-minus-idler difference, shifted by its initial value
        let diff = |k: usize| {
            let occ = s.occupations(s.transfer(k));
            ((occ[2] - occ[3]) - (s.n3 as i64 - s.n4 as i64)) as f64
        };
        let shift = (s.n3 as f64) - (s.n4 as f64);
        let evo = mode
            .propagator(s)
            .and_then(|p| p.from_basis_state(0))
            .map_err(|e| with_sector(s, e))?;
        probs.resize(s.dimension(), 0.0);
        for (acc, &tau) in part.sums.iter_mut().zip(taus) {
            evo.probabilities_into(tau, &mut probs, &mut scratch);
            let mut m1 = 0.0;
            let mut m2 = 0.0;
            let mut d1 = 0.0;
            let mut d2 = 0.0;
            for (k, &p) in probs.iter().enumerate() {
                let n = s.transfer(k) as f64;
                m1 += p * n;
                m2 += p * n * n;
                let x = diff(k);
                d1 += p * x;
                d2 += p * x * x;
            }
            // moments of the unshifted difference
            let e1 = d1 + shift;
            let e2 = d2 + 2.0 * shift * d1 + shift * shift;
            acc[0].add(w * n1);
            acc[1].add(w * n1 * n1);
            acc[2].add(w * m1);
            acc[3].add(w * m2);
            acc[4].add(w * n1 * m1);
            acc[5].add(w * e1);
            acc[6].add(w * e2);
        }
    }
    Ok(part)
}

fn with_sector(s: FockSector, e: Error) -> Error {
    match e {
        e @ Error::Sector { .. } => e,
        e => Error::Sector {
            n1: s.n1,
            n2: s.n2,
            n3: s.n3,
            n4: s.n4,
            source: Box::new(e),
        },
    }
}

/// Ensemble-averaged observables on `tau_grid`.
pub fn ensemble_observables(
    e: &SectorEnsemble,
    tau_grid: &[f64],
    opts: &EnsembleOptions,
) -> Result<Vec<ObservableRow>> {
    let chunks: Vec<&[(FockSector, f64)]> = e.sectors.chunks(CHUNK).collect();
    let map = || -> Vec<Result<Partial>> {
        chunks
            .par_iter()
            .map(|c| accumulate_chunk(c, tau_grid, opts.mode))
            .collect()
    };
    let partials = if opts.workers == 0 {
        map()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|err| Error::Domain(format!("worker pool: {err}")))?
            .install(map)
    };
    let mut total = Partial::new(tau_grid.len());
    for p in partials {
        total.merge(&p?);
    }
    let w = total.weight.value();
    Ok(tau_grid
        .iter()
        .zip(&total.sums)
        .map(|(&tau, acc)| {
            let v: Vec<f64> = acc.iter().map(|s| s.value() / w).collect();
            let (n1, n1sq, m1, m2, n1m1, e1, e2) = (v[0], v[1], v[2], v[3], v[4], v[5], v[6]);
            let pump_mean = n1 - m1;
            let pump_var = (n1sq - 2.0 * n1m1 + m2 - pump_mean * pump_mean).max(0.0);
            let gen_var = (m2 - m1 * m1).max(0.0);
            let var_diff = (e2 - e1 * e1).max(0.0);
            ObservableRow::from_moments(tau, pump_mean, pump_var, m1, gen_var, var_diff)
        })
        .collect())
}

/// First local minimum of a sampled curve, refined by a quadratic through the
/// discrete minimum and its neighbours. Returns (position, value).
pub fn first_minimum(series: &[(f64, f64)]) -> Result<(f64, f64)> {
    for i in 1..series.len().saturating_sub(1) {
        let (x0, y0) = series[i - 1];
        let (x1, y1) = series[i];
        let (x2, y2) = series[i + 1];
        if y1 < y0 && y1 <= y2 {
            return Ok(parabola_vertex((x0, y0), (x1, y1), (x2, y2)));
        }
    }
    Err(Error::NoMinimum)
}

fn parabola_vertex((x0, y0): (f64, f64), (x1, y1): (f64, f64), (x2, y2): (f64, f64)) -> (f64, f64) {
    // Newton divided differences
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if a <= 0.0 {
        return (x1, y1);
    }
    let b = d01 - a * (x0 + x1);
    let x = (-b / (2.0 * a)).clamp(x0, x2);
    let y = y0 + d01 * (x - x0) + a * (x - x0) * (x - x1);
    (x, y)
}

/// First minimum of the pump expectation.
pub fn first_pump_minimum(rows: &[ObservableRow]) -> Result<(f64, f64)> {
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.tau, r.pump_mean)).collect();
    first_minimum(&series)
}

/// Mean converted fraction 1 − ⟨pump⟩/mean over rows with τ in [from, to].
pub fn converted_fraction(rows: &[ObservableRow], mean: f64, from: f64, to: f64) -> Result<f64> {
    let vals: Vec<f64> = rows
        .iter()
        .filter(|r| r.tau >= from && r.tau <= to)
        .map(|r| r.pump_mean)
        .collect();
    if vals.is_empty() {
        return Err(Error::Domain(format!("no samples in [{from}, {to}]")));
    }
    let avg = vals.iter().copied().collect::<KahanSum>().value() / vals.len() as f64;
    Ok(1.0 - avg / mean)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub mean: f64,
    pub tau_min: f64,
    pub value: f64,
    pub mode: DenominatorMode,
}

/// Settings for a conversion-distance scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub eps_tail: f64,
    /// Grid points per estimated conversion distance.
    pub resolution: usize,
    pub workers: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            eps_tail: DEFAULT_EPS_TAIL,
            resolution: 200,
            workers: 0,
        }
    }
}

/// Estimated τ of the first pump minimum, from mean-field theory. A constant
/// denominator d rescales time by d/mean.
pub fn estimated_conversion_tau(mean: f64, mode: DenominatorMode) -> Result<f64> {
    let z = meanfield::conversion_distance(mean)?;
    Ok(match mode {
        DenominatorMode::Resonant => z,
        DenominatorMode::Constant(d) => z * d / mean,
    })
}

/// Uniform grid on [0, tau_max] with `n` intervals.
pub fn uniform_grid(tau_max: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| tau_max * i as f64 / n as f64).collect()
}

/// First pump minimum of symmetric coherent pumps (mean, mean). The window
/// starts at twice the mean-field estimate and is doubled until a minimum is
/// bracketed.
pub fn coherent_first_minimum(mean: f64, mode: DenominatorMode, opts: &ScanOptions) -> Result<ScanRow> {
    let e = build_ensemble(mean, mean, opts.eps_tail)?;
    let est = estimated_conversion_tau(mean, mode)?;
    let eopts = EnsembleOptions {
        mode,
        workers: opts.workers,
    };
    let mut span = 2.0;
    for _ in 0..4 {
        let grid = uniform_grid(span * est, (span * opts.resolution as f64) as usize);
        let rows = ensemble_observables(&e, &grid, &eopts)?;
        match first_pump_minimum(&rows) {
            Ok((tau_min, value)) => {
                return Ok(ScanRow {
                    mean,
                    tau_min,
                    value,
                    mode,
                })
            }
            Err(Error::NoMinimum) => span *= 2.0,
            Err(err) => return Err(err),
        }
    }
    Err(Error::NoMinimum)
}

/// Conversion distance as a function of mean pump photon number.
pub fn conversion_scan(means: &[f64], mode: DenominatorMode, opts: &ScanOptions) -> Result<Vec<ScanRow>> {
    if means.is_empty() {
        return Err(invalid("means", "must be nonempty"));
    }
    if means.windows(2).any(|w| w[1] <= w[0]) || means.iter().any(|&m| !(m > 0.0)) {
        return Err(invalid("means", "must be positive and strictly ascending"));
    }
    means.iter().map(|&m| coherent_first_minimum(m, mode, opts)).collect()
}

/// Reference denominator for a constant-mode scan: the rounded geometric mean
/// of the scanned means.
pub fn default_constant_denominator(means: &[f64]) -> f64 {
    let ln = means.iter().map(|m| m.ln()).sum::<f64>() / means.len() as f64;
    ln.exp().round().max(1.0)
}
