#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Occupations (b₁, b₂, a₁, a₂).
pub type Occ = [i64; 4];

/// Brute-force evolution of |n1, n2, n3, n4⟩ on the four-mode product basis.
///
/// All product states sharing the three number constants of motion are
/// enumerated, the numerator b₁†b₂†a₁a₂ + a₁†a₂†b₁b₂ is built from ladder-
/// operator matrix elements and multiplied by the inverse of the diagonal
/// operator b₁†b₁ + a₁†a₁, and the real symmetric result is diagonalised
/// densely. Returns, per τ, the amplitude of every basis state.
pub fn brute_force_evolve(n: [u32; 4], taus: &[f64]) -> Vec<HashMap<Occ, C64>> {
    let [n1, n2, n3, n4] = n.map(|x| x as i64);
    let c1 = n1 + n3;
    let c2 = n2 + n4;
    let c3 = n1 - n2;
    let mut basis: Vec<Occ> = Vec::new();
    for p1 in 0..=c1 {
        for p2 in 0..=c2 {
            let g1 = c1 - p1;
            let g2 = c2 - p2;
            if p1 - p2 == c3 {
                basis.push([p1, p2, g1, g2]);
            }
        }
    }
    let index: HashMap<Occ, usize> = basis.iter().enumerate().map(|(i, &o)| (o, i)).collect();
    let dim = basis.len();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for (j, &o) in basis.iter().enumerate() {
        let den = (o[0] + o[2]) as f64;
        if den == 0.0 {
            continue;
        }
        // b₁†b₂†a₁a₂ |o⟩
        if o[2] > 0 && o[3] > 0 {
            let amp = ((o[0] + 1) as f64 * (o[1] + 1) as f64 * o[2] as f64 * o[3] as f64).sqrt();
            let t = [o[0] + 1, o[1] + 1, o[2] - 1, o[3] - 1];
            if let Some(&i) = index.get(&t) {
                h[(i, j)] += amp / den;
            }
        }
        // a₁†a₂†b₁b₂ |o⟩
        if o[0] > 0 && o[1] > 0 {
            let amp = (o[0] as f64 * o[1] as f64 * (o[2] + 1) as f64 * (o[3] + 1) as f64).sqrt();
            let t = [o[0] - 1, o[1] - 1, o[2] + 1, o[3] + 1];
            if let Some(&i) = index.get(&t) {
                h[(i, j)] += amp / den;
            }
        }
    }
    assert!(
        (&h - h.transpose()).abs().max() < 1e-14,
        "numerator and denominator must commute"
    );
    let eig = h.symmetric_eigen();
    let start = index[&[n1, n2, n3, n4]];
    taus.iter()
        .map(|&tau| {
            let mut out = HashMap::new();
            for (i, &o) in basis.iter().enumerate() {
                let mut c = C64::new(0.0, 0.0);
                for k in 0..dim {
                    let phase = C64::from_polar(1.0, -eig.eigenvalues[k] * tau);
                    c += eig.eigenvectors[(i, k)] * eig.eigenvectors[(start, k)] * phase;
                }
                out.insert(o, c);
            }
            out
        })
        .collect()
}

/// Best single-frequency fit a + b cos(ωτ) + c sin(ωτ); returns (ω, max abs
/// residual). ω is scanned on a grid over (0, omega_max] and refined by golden
/// section.
pub fn single_frequency_fit(taus: &[f64], ys: &[f64], omega_max: f64) -> (f64, f64) {
    let resid = |w: f64| linear_fit_residual(taus, ys, w);
    let n = 4000;
    let mut best = (omega_max / n as f64, f64::INFINITY);
    for i in 1..=n {
        let w = omega_max * i as f64 / n as f64;
        let r = resid(w);
        if r < best.1 {
            best = (w, r);
        }
    }
    let step = omega_max / n as f64;
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if resid(x1) < resid(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let w = 0.5 * (a + b);
    (w, resid(w))
}

// Least squares for (a, b, c) at fixed ω via 3×3 normal equations.
fn linear_fit_residual(taus: &[f64], ys: &[f64], w: f64) -> f64 {
    let rows: Vec<[f64; 3]> = taus.iter().map(|&t| [1.0, (w * t).cos(), (w * t).sin()]).collect();
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut aty = nalgebra::Vector3::<f64>::zeros();
    for (r, &y) in rows.iter().zip(ys) {
        for i in 0..3 {
            aty[i] += r[i] * y;
            for j in 0..3 {
                ata[(i, j)] += r[i] * r[j];
            }
        }
    }
    let Some(x) = ata.lu().solve(&aty) else {
        return f64::INFINITY;
    };
    rows.iter()
        .zip(ys)
        .map(|(r, &y)| (x[0] * r[0] + x[1] * r[1] + x[2] * r[2] - y).abs())
        .fold(0.0, f64::max)
}

/// Coefficient of determination of the least-squares line y = a + b·x.
pub fn linear_r_squared(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    (a, b, 1.0 - ss_res / ss_tot)
}
