//! Exact partial derivatives of `1/|z|` in three dimensions.
//!
//! `D^a (1/r) = P_a(z) / r^(2|a|+1)` with polynomials built by the recursion
//! `P' = r^2 dP/dz_i - (2n+1) z_i P`.

use std::collections::BTreeMap;

type Poly = BTreeMap<[u32; 3], f64>;

fn add(p: &mut Poly, e: [u32; 3], c: f64) {
    *p.entry(e).or_insert(0.0) += c;
}

fn step(p: &Poly, n: u32, axis: usize) -> Poly {
    let mut out = Poly::new();
    for (e, &c) in p {
        if e[axis] > 0 {
            let mut de = *e;
            de[axis] -= 1;
            let dc = c * e[axis] as f64;
            for k in 0..3 {
                let mut t = de;
                t[k] += 2;
                add(&mut out, t, dc);
            }
        }
        let mut t = *e;
        t[axis] += 1;
        add(&mut out, t, -((2 * n + 1) as f64) * c);
    }
    out.retain(|_, c| *c != 0.0);
    out
}

fn polynomial(alpha: &[usize]) -> (Poly, u32) {
    let mut p = Poly::new();
    p.insert([0, 0, 0], 1.0);
    let mut n = 0;
    for (axis, &a) in alpha.iter().enumerate() {
        for _ in 0..a {
            p = step(&p, n, axis);
            n += 1;
        }
    }
    (p, n)
}

/// `D^alpha (1/|z|)` for `z` in three dimensions (real partial derivatives).
pub fn inverse_distance_derivative(z: &[f64], alpha: &[usize]) -> f64 {
    let (p, n) = polynomial(alpha);
    let r2: f64 = z.iter().map(|v| v * v).sum();
    let r = r2.sqrt();
    let val: f64 = p
        .iter()
        .map(|(e, c)| c * z[0].powi(e[0] as i32) * z[1].powi(e[1] as i32) * z[2].powi(e[2] as i32))
        .sum();
    val / r.powi(2 * n as i32 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders_match_closed_forms() {
        let z = [0.3, -1.1, 0.7];
        let r = (0.09f64 + 1.21 + 0.49).sqrt();
        assert!((inverse_distance_derivative(&z, &[0, 0, 0]) - 1.0 / r).abs() < 1e-15);
        assert!((inverse_distance_derivative(&z, &[0, 1, 0]) + z[1] / r.powi(3)).abs() < 1e-15);
        let want = (3.0 * z[0] * z[2]) / r.powi(5);
        assert!((inverse_distance_derivative(&z, &[1, 0, 1]) - want).abs() < 1e-14);
        let want = (3.0 * z[0] * z[0] - r * r) / r.powi(5);
        assert!((inverse_distance_derivative(&z, &[2, 0, 0]) - want).abs() < 1e-14);
    }

    #[test]
    fn on_axis_pure_derivative() {
        // d^n/dx^n (1/x) = (-1)^n n! / x^(n+1)
        let v = inverse_distance_derivative(&[2.0, 0.0, 0.0], &[4, 0, 0]);
        assert!((v - 24.0 / 32.0).abs() < 1e-14);
    }

    #[test]
    fn harmonic_away_from_origin() {
        let z = [0.4, 0.2, -0.9];
        let lap: f64 = (0..3)
            .map(|k| {
                let mut a = [1, 0, 0];
                a[k] += 2;
                inverse_distance_derivative(&z, &a)
            })
            .sum();
        assert!(lap.abs() < 1e-12);
    }
}
