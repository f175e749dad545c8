//! Small numerical building blocks shared by the physics modules.

pub mod chebyshev;
pub mod fit;
pub mod linalg;
pub mod qmc;
pub mod quadrature;

/// `n!` as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Product of factorials of the entries of a multi-index.
pub fn multi_factorial(alpha: &[usize]) -> f64 {
    alpha.iter().map(|&a| factorial(a)).product()
}

/// All multi-indices of length `dim` with total order `order`.
pub fn multi_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == dim {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in (0..=left).rev() {
            cur.push(a);
            rec(dim, left - a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if dim == 0 {
        return out;
    }
    rec(dim, order, &mut Vec::with_capacity(dim), &mut out);
    out
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// `C^infinity` step: 1 for `t <= 0`, 0 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    let g = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let (a, b) = (g(1.0 - t), g(t));
        a / (a + b)
    }
}

/// Radial plateau: 1 on `r <= inner`, 0 on `r >= outer`.
pub fn plateau(r: f64, inner: f64, outer: f64) -> f64 {
    smooth_step((r - inner) / (outer - inner))
}


/// Central finite-difference estimate of `d^alpha f(z)` built from nested
/// second-order stencils with step `h` on every axis.
pub fn central_difference<T, F>(f: &F, z: &[f64], alpha: &[usize], h: f64) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    F: Fn(&[f64]) -> T,
{
    let Some(axis) = alpha.iter().position(|&a| a > 0) else {
        return f(z);
    };
    let n = alpha[axis];
    let mut rest = alpha.to_vec();
    rest[axis] = 0;
    let mut shifted = z.to_vec();
    let mut binom = 1.0;
    let mut acc: Option<T> = None;
    for j in 0..=n {
        shifted[axis] = z[axis] + (0.5 * n as f64 - j as f64) * h;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let term = central_difference(f, &shifted, &rest, h) * (sign * binom);
        acc = Some(match acc {
            Some(a) => a + term,
            None => term,
        });
        binom = binom * (n - j) as f64 / (j + 1) as f64;
    }
    acc.expect("stencil has at least one point") * h.powi(-(n as i32))
}
