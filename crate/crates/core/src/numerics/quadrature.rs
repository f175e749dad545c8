use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let step = p1 / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[n - 1 - i] = weights[i];
    }
    (nodes, weights)
}

/// Gauss-Hermite rule for the weight `exp(-t^2)` (Golub-Welsch).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Composite Gauss-Legendre rule on `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (t, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (ti, wi) in t.iter().zip(&w) {
            sum += wi * f(lo + 0.5 * h * (ti + 1.0));
        }
    }
    0.5 * h * sum
}

/// Integral over `[0, inf)` through the map `r = t / (1 - t)`, refined
/// until two successive panel counts agree to `rel_tol`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, rel_tol: f64) -> Result<f64> {
    let mapped = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - t;
        f(t / s) / (s * s)
    };
    let mut panels = 16;
    let mut prev = integrate(mapped, 0.0, 1.0, panels, 20);
    if !prev.is_finite() {
        return Err(Error::Invalid("integrand is not finite".into()));
    }
    while panels < 1 << 14 {
        panels *= 2;
        let cur = integrate(mapped, 0.0, 1.0, panels, 20);
        if !cur.is_finite() {
            return Err(Error::Invalid("integrand is not finite".into()));
        }
        if (cur - prev).abs() <= rel_tol * cur.abs() || (cur == 0.0 && prev == 0.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Invalid("integral over the half line did not converge".into()))
}
