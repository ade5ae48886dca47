//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Checks that need coherent means of 300 or 1000 run only when
//! RFWM_LONG_RUNNING=1 is set.

mod common;

use std::f64::consts::{PI, SQRT_2};
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use num_complex::Complex64 as C64;
use rfwm_core::adiabatic::{adiabatic_branch, build_five_level, convergence_order, lambda0_ladder};
use rfwm_core::classical::{classical_period, integrate_classical, pendulum_period, pendulum_state};
use rfwm_core::ensemble::*;
use rfwm_core::fock::*;
use rfwm_core::meanfield::{b_min, conversion_distance, efficiency};
use rfwm_core::{manley_rowe, FieldState, PhysicalParams};

type Check = Result<String, String>;
type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Check + 'a>);

fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1() -> Check {
    let grid = uniform_grid(20.0, 4000);
    let one = fock_observables(&FockSector::pumps(1, 1), &grid).map_err(|e| e.to_string())?;
    let two = fock_observables(&FockSector::pumps(2, 2), &grid).map_err(|e| e.to_string())?;
    let d1 = one
        .iter()
        .map(|r| (r.pump_mean - r.tau.cos().powi(2)).abs())
        .fold(0.0, f64::max);
    let d2 = two
        .iter()
        .map(|r| (r.pump_mean - (1.0 + (SQRT_2 * r.tau).cos())).abs())
        .fold(0.0, f64::max);
    verdict(
        d1 < 1e-10 && d2 < 1e-10,
        format!("max deviation {d1:.2e} (n=1), {d2:.2e} (n=2)"),
    )
}

fn criterion_2() -> Check {
    let table = phase_gate_truth_table().map_err(|e| e.to_string())?;
    let expect = [1.0, 1.0, 1.0, -1.0];
    let err = table
        .iter()
        .zip(expect)
        .map(|(r, e)| (r.overlap - C64::new(e, 0.0)).norm())
        .fold(0.0, f64::max);
    verdict(err < 1e-10, format!("max |overlap − target| {err:.2e}"))
}

fn criterion_3() -> Check {
    let taus = [0.3, 1.7, 6.1, 23.0];
    let mut worst = 0.0f64;
    let mut count = 0;
    for n1 in 0..=6 {
        for n2 in 0..=6 {
            for n3 in 0..=2 {
                for n4 in 0..=2 {
                    let s = build_sector(n1, n2, n3, n4);
                    let oracle = common::brute_force_evolve([n1, n2, n3, n4], &taus);
                    let out = evolve_sector(&s, &SectorAmplitudes::initial(&s), &taus).map_err(|e| e.to_string())?;
                    for (c, o) in out.iter().zip(&oracle) {
                        if o.len() != s.dimension() {
                            return Err(format!("dimension mismatch in {s:?}"));
                        }
                        for k in 0..s.dimension() {
                            let occ = s.occupations(s.transfer(k));
                            worst = worst.max((c.amplitudes()[k] - o[&occ]).norm());
                        }
                    }
                    count += 1;
                }
            }
        }
    }
    verdict(
        worst < 1e-9,
        format!("{count} sectors (n1,n2 ≤ 6, n3,n4 ≤ 2), max amplitude error {worst:.2e}"),
    )
}

fn criterion_4(coherent10: &[ObservableRow]) -> Check {
    let grid = uniform_grid(30.0, 600);
    let mut worst = 0.0f64;
    for n in 1..=15 {
        for r in fock_observables(&FockSector::pumps(n, n + 2), &grid).map_err(|e| e.to_string())? {
            worst = worst.max(r.var_diff.abs());
        }
    }
    let coherent = coherent10.iter().map(|r| r.var_diff.abs()).fold(0.0, f64::max);
    verdict(
        worst <= 1e-12 && coherent <= 1e-12,
        format!("max Var(n_E1 − n_E2): Fock {worst:.1e}, coherent {coherent:.1e}"),
    )
}

fn criterion_5(coherent10: &[ObservableRow]) -> Check {
    let mut fock_ok = true;
    for (n, conversion) in [(1u32, PI / 2.0), (2, PI / SQRT_2)] {
        let grid: Vec<f64> = (1..200).map(|i| conversion * i as f64 / 200.0).collect();
        for r in fock_observables(&FockSector::pumps(n, n), &grid).map_err(|e| e.to_string())? {
            fock_ok &= matches!(r.q_gen, Some(q) if q < 0.0);
        }
    }
    let sampled: Vec<&ObservableRow> = coherent10.iter().filter(|r| r.tau > 0.0).collect();
    let coherent_ok = sampled.iter().all(|r| matches!(r.q_gen, Some(q) if q > 0.0));
    let q_min = sampled.iter().filter_map(|r| r.q_gen).fold(f64::INFINITY, f64::min);
    verdict(
        fock_ok && coherent_ok,
        format!(
            "Fock n=1,2 Q_gen<0 over first conversion: {fock_ok}; coherent mean 10 Q_gen>0 at {} samples (min {q_min:.3e})",
            sampled.len()
        ),
    )
}

fn plateau(rows: &[ObservableRow], mean: f64) -> Result<(f64, f64), String> {
    let (t1, _) = first_pump_minimum(rows).map_err(|e| e.to_string())?;
    let f = converted_fraction(rows, mean, 8.0 * t1, 16.0 * t1).map_err(|e| e.to_string())?;
    Ok((t1, f))
}

fn criterion_6(coherent10: &[ObservableRow], coherent100: &[ObservableRow]) -> Check {
    let (t10, f10) = plateau(coherent10, 10.0)?;
    let (t100, f100) = plateau(coherent100, 100.0)?;
    let ok = (f10 - 1.0 / 3.0).abs() <= 0.1 && (f100 - 1.0 / 3.0).abs() <= 0.1;
    verdict(
        ok,
        format!("plateau conversion over [8, 16]·τ_min: mean 10 → {f10:.4} (τ_min {t10:.3}), mean 100 → {f100:.4} (τ_min {t100:.3})"),
    )
}

fn criterion_7() -> Check {
    let e2 = efficiency(2.0).map_err(|e| e.to_string())?;
    let bmin = b_min(100.0);
    let big = 1e4;
    let conv = efficiency(big).map_err(|e| e.to_string())?;
    let asym = 1.0 - 1.0 / big.sqrt();
    let ok = e2 == 0.5 && (bmin - 9.5125).abs() <= 1e-3 && rel(conv, asym) < 0.01;
    verdict(
        ok,
        format!("efficiency(2) = {e2}, b_min(100) = {bmin:.6}, efficiency(1e4) = {conv:.6} vs 1 − 1/√b0 = {asym:.6}"),
    )
}

fn compare_first_period(rows: &[ObservableRow], mean: f64) -> Result<(bool, String), String> {
    let (tq, vq) = first_pump_minimum(rows).map_err(|e| e.to_string())?;
    let depth_q = 1.0 - vq / mean;
    let tm = conversion_distance(mean).map_err(|e| e.to_string())?;
    let depth_m = efficiency(mean).map_err(|e| e.to_string())?;
    let dt = rel(tm, tq);
    let dd = rel(depth_m, depth_q);
    Ok((
        dt < 0.1 && dd < 0.1,
        format!(
            "mean {mean}: τ_min quantum {tq:.5} vs mean-field {tm:.5} (rel {dt:.4}); depth {depth_q:.4} vs {depth_m:.4} (rel {dd:.4})"
        ),
    ))
}

fn criterion_8(coherent100: &[ObservableRow], long: bool) -> Check {
    let (mut ok, mut detail) = compare_first_period(coherent100, 100.0)?;
    if long {
        let z = conversion_distance(1000.0).map_err(|e| e.to_string())?;
        let e = build_ensemble(1000.0, 1000.0, DEFAULT_EPS_TAIL).map_err(|e| e.to_string())?;
        let rows = ensemble_observables(&e, &uniform_grid(1.6 * z, 400), &EnsembleOptions::default())
            .map_err(|e| e.to_string())?;
        let (ok1000, d) = compare_first_period(&rows, 1000.0)?;
        ok &= ok1000;
        detail.push_str(&format!("; {d}"));
    } else {
        detail.push_str("; mean 1000 skipped (RFWM_LONG_RUNNING unset)");
    }
    verdict(ok, detail)
}

fn criterion_9(long: bool) -> Check {
    let means = [10.0, 30.0, 100.0, 300.0, 1000.0];
    let z: Vec<f64> = means
        .iter()
        .map(|&m| conversion_distance(m))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let ln: Vec<f64> = means.iter().map(|m: &f64| m.ln()).collect();
    let (_, slope, r2) = common::linear_r_squared(&ln, &z);
    let mf_ok = z.windows(2).all(|w| w[1] > w[0]) && r2 > 0.98;

    let quantum_means: &[f64] = if long { &means } else { &means[..3] };
    let opts = ScanOptions::default();
    let resonant = conversion_scan(quantum_means, DenominatorMode::Resonant, &opts).map_err(|e| e.to_string())?;
    let d_ref = default_constant_denominator(&means[..3]);
    let constant = conversion_scan(&means[..3], DenominatorMode::Constant(d_ref), &opts).map_err(|e| e.to_string())?;
    let res_ok = resonant.windows(2).all(|w| w[1].tau_min > w[0].tau_min);
    let con_ok = constant.windows(2).all(|w| w[1].tau_min < w[0].tau_min);
    let fmt = |rows: &[ScanRow]| {
        rows.iter()
            .map(|r| format!("{}:{:.4}", r.mean, r.tau_min))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let q_ln: Vec<f64> = resonant.iter().map(|r| r.mean.ln()).collect();
    let q_t: Vec<f64> = resonant.iter().map(|r| r.tau_min).collect();
    let (_, _, q_r2) = common::linear_r_squared(&q_ln, &q_t);
    verdict(
        mf_ok && res_ok && con_ok,
        format!(
            "mean-field z vs ln(mean): slope {slope:.4}, R² {r2:.5}; quantum resonant [{}] (R² {q_r2:.4}); constant d={d_ref} [{}]",
            fmt(&resonant),
            fmt(&constant)
        ),
    )
}

fn criterion_10() -> Check {
    let fs0 = FieldState::new(
        C64::new(1.0, 0.2),
        C64::new(0.7, -0.1),
        C64::new(0.05, 0.03),
        C64::new(0.02, -0.04),
    );
    let traj = integrate_classical(&fs0, 50.0, 1e-10).map_err(|e| e.to_string())?;
    let m0 = manley_rowe(&fs0).as_array();
    let scale = m0[0].abs().max(m0[1].abs());
    let drift = traj
        .iter()
        .flat_map(|(_, f)| {
            let m = manley_rowe(f).as_array();
            (0..4).map(move |k| (m[k] - m0[k]).abs() / scale)
        })
        .fold(0.0, f64::max);

    let seedless = FieldState::real(1.0, 1.0, 0.0, 0.0);
    let static_ok = integrate_classical(&seedless, 50.0, 1e-10)
        .map_err(|e| e.to_string())?
        .iter()
        .all(|(_, f)| *f == seedless);

    // each seed at phase π/2, pumps real
    let e = C64::new(0.0, 0.1);
    let seeded = FieldState::new(1.0.into(), 1.0.into(), e, e);
    let (y0, _) = pendulum_state(&seeded);
    let t_full = classical_period(&seeded, 200.0, 1e-11)
        .map_err(|e| e.to_string())?
        .ok_or("no closed orbit")?;
    let t_pend = pendulum_period(y0).map_err(|e| e.to_string())?;
    let dp = rel(t_full, t_pend);
    verdict(
        drift < 1e-8 && static_ok && dp < 1e-4,
        format!("Manley–Rowe drift {drift:.2e}; seedless static: {static_ok}; period full {t_full:.8} vs pendulum {t_pend:.8} (rel {dp:.2e})"),
    )
}

fn criterion_11() -> Check {
    let p = PhysicalParams::lossless(1.0, 1.0).map_err(|e| e.to_string())?;
    let fs = FieldState::real(1.0, 1.0, 0.5, 0.5);
    let ladder = lambda0_ladder(&fs, &p, &[0.1, 0.05, 0.025]).map_err(|e| e.to_string())?;
    let slope = convergence_order(&ladder);
    let errs: Vec<String> = ladder.iter().map(|l| format!("{:.3e}", l.rel_err)).collect();
    let slope_ok = (slope - 2.0).abs() <= 0.3;

    // pumps on, generated fields off: uncancelled shifts would be Ω²/Δ
    let mut stark_ok = true;
    let mut ratios = Vec::new();
    for omega in [0.04f64, 0.02, 0.01] {
        let b = adiabatic_branch(&build_five_level(&FieldState::real(omega, omega, 0.0, 0.0), &p))
            .map_err(|e| e.to_string())?
            .norm();
        stark_ok &= b <= 10.0 * omega.powi(4) && b < 1e-3 * omega * omega;
        ratios.push(format!("{:.2e}", b / omega.powi(4)));
    }
    verdict(
        slope_ok && stark_ok,
        format!(
            "rel. error vs lambda0 [{}], slope {slope:.3}; Stark |branch|·Δ³/Ω⁴ = [{}]",
            errs.join(", "),
            ratios.join(", ")
        ),
    )
}

fn criterion_12() -> Check {
    let e = build_ensemble(100.0, 100.0, DEFAULT_EPS_TAIL).map_err(|e| e.to_string())?;
    let grid = uniform_grid(8.0, 40);
    let run = |workers| {
        ensemble_observables(
            &e,
            &grid,
            &EnsembleOptions {
                workers,
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())
    };
    let bits = |rows: Vec<ObservableRow>| -> Vec<u64> {
        rows.iter()
            .flat_map(|r| {
                [
                    r.pump_mean,
                    r.pump_var,
                    r.gen_mean,
                    r.gen_var,
                    r.q_pump.unwrap_or(f64::NAN),
                    r.q_gen.unwrap_or(f64::NAN),
                    r.var_diff,
                ]
                .map(f64::to_bits)
            })
            .collect()
    };
    let a = bits(run(1)?);
    let b = bits(run(4)?);
    verdict(
        a == b,
        format!("{} values compared bitwise across 1 and 4 workers", a.len()),
    )
}

fn main() {
    let long = std::env::var("RFWM_LONG_RUNNING").is_ok_and(|v| v == "1");
    let started = Instant::now();

    let shared = || -> Result<(Vec<ObservableRow>, Vec<ObservableRow>), String> {
        let e10 = build_ensemble(10.0, 10.0, DEFAULT_EPS_TAIL).map_err(|e| e.to_string())?;
        let c10 = ensemble_observables(&e10, &uniform_grid(60.0, 2400), &EnsembleOptions::default())
            .map_err(|e| e.to_string())?;
        // fine sampling through the first minimum, coarser over the plateau
        let mut grid = uniform_grid(10.0, 500);
        grid.extend((1..=300).map(|i| 10.0 + 0.25 * i as f64));
        let e100 = build_ensemble(100.0, 100.0, DEFAULT_EPS_TAIL).map_err(|e| e.to_string())?;
        let c100 = ensemble_observables(&e100, &grid, &EnsembleOptions::default()).map_err(|e| e.to_string())?;
        Ok((c10, c100))
    };
    let (c10, c100) = match shared() {
        Ok(v) => v,
        Err(e) => {
            println!("coherent reference runs failed: {e}");
            std::process::exit(1);
        }
    };

    let criteria: Vec<Criterion> = vec![
        (1, "analytic Fock dynamics", Box::new(criterion_1)),
        (2, "phase gate", Box::new(criterion_2)),
        (3, "reduced basis vs brute force", Box::new(criterion_3)),
        (4, "number-difference squeezing", Box::new(|| criterion_4(&c10))),
        (5, "photon statistics", Box::new(|| criterion_5(&c10))),
        (6, "coherent plateau", Box::new(|| criterion_6(&c10, &c100))),
        (7, "mean-field closed forms", Box::new(criterion_7)),
        (8, "mean field vs quantum", Box::new(|| criterion_8(&c100, long))),
        (9, "conversion-distance scaling", Box::new(|| criterion_9(long))),
        (10, "classical layer", Box::new(criterion_10)),
        (11, "adiabatic elimination", Box::new(criterion_11)),
        (12, "determinism", Box::new(criterion_12)),
    ];

    let mut failed = Vec::new();
    for (id, name, check) in &criteria {
        let t = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {id:>2} PASS  {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                println!("criterion {id:>2} FAIL  {name}: {d} [{secs:.1}s]");
                failed.push(*id);
            }
        }
    }
    println!(
        "acceptance: {} passed, {} failed {:?} in {:.0}s",
        criteria.len() - failed.len(),
        failed.len(),
        failed,
        started.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
