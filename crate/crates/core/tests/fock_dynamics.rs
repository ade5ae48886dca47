mod common;

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rfwm_core::ensemble::{first_pump_minimum, uniform_grid};
use rfwm_core::fock::*;

fn pump_series(s: FockSector, taus: &[f64]) -> Vec<f64> {
    let prop = Propagator::new(s).unwrap();
    let c0 = SectorAmplitudes::initial(&s);
    taus.iter()
        .map(|&t| pump_expectation(&s, &prop.evolve(&c0, t)))
        .collect()
}

#[test]
fn reduced_basis_matches_brute_force_oracle() {
    let taus = [0.0, 0.3, 1.7, 6.1, 23.0];
    for n in [
        [1, 1, 0, 0],
        [3, 5, 0, 0],
        [4, 2, 1, 3],
        [6, 6, 2, 2],
        [0, 3, 2, 1],
        [9, 12, 3, 0],
    ] {
        let s = build_sector(n[0], n[1], n[2], n[3]);
        let oracle = common::brute_force_evolve(n, &taus);
        let out = evolve_sector(&s, &SectorAmplitudes::initial(&s), &taus).unwrap();
        for (c, o) in out.iter().zip(&oracle) {
            assert_eq!(o.len(), s.dimension());
            for k in 0..s.dimension() {
                let occ = s.occupations(s.transfer(k));
                assert!((c.amplitudes()[k] - o[&occ]).norm() < 1e-9, "{n:?}");
            }
        }
    }
}

#[test]
fn single_frequency_only_for_one_or_two_pairs() {
    let taus: Vec<f64> = (0..400).map(|i| i as f64 * 0.05).collect();
    for (n, max) in [(1, 1e-8), (2, 1e-8)] {
        let ys = pump_series(FockSector::pumps(n, n), &taus);
        let (_, r) = common::single_frequency_fit(&taus, &ys, 6.0);
        assert!(r < max, "n = {n}: residual {r}");
    }
    let ys = pump_series(FockSector::pumps(3, 3), &taus);
    let (_, r) = common::single_frequency_fit(&taus, &ys, 6.0);
    assert!(r > 1e-3, "n = 3: residual {r}");
}

#[test]
fn complete_conversion_recurs() {
    for n in 1..=5u32 {
        let s = FockSector::pumps(n, n);
        let prop = Propagator::new(s).unwrap();
        let be = prop.from_basis_state(0).unwrap();
        let mut probs = vec![0.0; s.dimension()];
        let mut scratch = Vec::new();
        let target = n as usize;
        let dt = 0.01;
        let mut best = f64::INFINITY;
        let mut tau = 0.0;
        while tau < 50_000.0 {
            be.probabilities_into(tau, &mut probs, &mut scratch);
            // pump expectation = Σ (n − k) p_k
            let pump: f64 = probs.iter().enumerate().map(|(k, p)| (target - k) as f64 * p).sum();
            best = best.min(pump);
            if best < 1e-2 {
                break;
            }
            tau += dt;
        }
        assert!(best < 1e-2, "n = {n}: closest approach {best}");
    }
}

#[test]
fn fock_period_grows_with_photon_number() {
    let mut last = 0.0;
    for n in [1, 2, 3, 5, 15] {
        let grid = uniform_grid(10.0, 4000);
        let rows = fock_observables(&FockSector::pumps(n, n), &grid).unwrap();
        let (t, _) = first_pump_minimum(&rows).unwrap();
        assert!(t > last, "n = {n}: {t} after {last}");
        last = t;
    }
}

#[test]
fn large_sector_stays_unitary() {
    let s = FockSector::pumps(1999, 2500);
    assert_eq!(s.dimension(), 2000);
    let prop = Propagator::new(s).unwrap();
    let c0 = SectorAmplitudes::initial(&s);
    for tau in [0.5, 7.0, 33.0, 100.0] {
        let c = prop.evolve(&c0, tau);
        assert!((c.norm_sqr() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn phase_gate_analytic_amplitudes() {
    let s = FockSector::pumps(1, 1);
    let c = evolve_sector(&s, &SectorAmplitudes::initial(&s), &[PI / 2.0, PI]).unwrap();
    assert!(c[0].amplitudes()[0].norm() < 1e-15);
    assert!((c[0].amplitudes()[1] - C64::new(0.0, -1.0)).norm() < 1e-15);
    assert!((c[1].amplitudes()[0] + 1.0).norm() < 1e-15);
}

#[test]
fn two_pair_conversion_time() {
    let s = FockSector::pumps(2, 2);
    let c = evolve_sector(&s, &SectorAmplitudes::initial(&s), &[PI / SQRT_2]).unwrap();
    assert!(pump_expectation(&s, &c[0]).abs() < 1e-13);
}

fn sector() -> impl Strategy<Value = FockSector> {
    (0u32..40, 0u32..40, 0u32..6, 0u32..6).prop_map(|(a, b, c, d)| build_sector(a, b, c, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sector_basis_is_physical(s in sector()) {
        prop_assert!(s.dimension() >= 1);
        prop_assert_eq!(s.denominator(), (s.n1 + s.n3) as u64);
        if s.denominator() == 0 {
            prop_assert!(s.is_frozen());
        }
        for k in 0..s.dimension() {
            prop_assert!(s.occupations(s.transfer(k)).iter().all(|&x| x >= 0));
        }
    }

    #[test]
    fn evolution_is_unitary(s in sector(), tau in 0.0f64..100.0) {
        let c = evolve_sector(&s, &SectorAmplitudes::initial(&s), &[tau]).unwrap();
        prop_assert!((c[0].norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spectrum_is_symmetric(s in sector()) {
        let prop = Propagator::new(s).unwrap();
        let ev = prop.eigenvalues();
        let m = ev.len();
        for k in 0..m {
            prop_assert!((ev[k] + ev[m - 1 - k]).abs() < 1e-9 * ev[m - 1].abs().max(1.0));
        }
    }

    #[test]
    fn number_difference_is_noiseless(s in sector(), tau in 0.0f64..50.0) {
        let c = evolve_sector(&s, &SectorAmplitudes::initial(&s), &[tau]).unwrap();
        prop_assert_eq!(intensity_difference_variance(&s, &c[0]), 0.0);
    }

    #[test]
    fn pump_and_generated_photons_are_exchanged(s in sector(), tau in 0.0f64..50.0) {
        let c = evolve_sector(&s, &SectorAmplitudes::initial(&s), &[tau]).unwrap();
        let total = pump_expectation(&s, &c[0]) + generated_expectation(&s, &c[0]);
        prop_assert!((total - (s.n1 + s.n3) as f64).abs() < 1e-9 * (1.0 + total));
    }
}
