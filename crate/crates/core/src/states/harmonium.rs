use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BoundState, Derivatives, StateKind};
use crate::error::{Error, Result};
use crate::numerics::{dist, norm, quadrature::integrate};

/// `-Delta_1 - Delta_2 + k (|r1|^2 + |r2|^2) + lambda / |r1 - r2|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmoniumParams {
    pub coupling: f64,
    pub confinement: f64,
}

impl HarmoniumParams {
    /// The exactly solvable member `k = lambda^4 / 64`.
    pub fn solvable(coupling: f64) -> Self {
        Self { coupling, confinement: coupling.powi(4) / 64.0 }
    }

    /// `lambda^2 / 16`, the Gaussian rate in `psi`.
    fn rate(&self) -> f64 {
        self.coupling * self.coupling / 16.0
    }

    pub fn energy(&self) -> f64 {
        self.coupling * self.coupling
    }

    pub fn norm_sq(&self) -> f64 {
        let (l, c) = (self.coupling, self.rate());
        let com = (PI / (4.0 * c)).powf(1.5);
        let rel = (PI / c).powf(1.5) + 0.5 * l * 2.0 * PI / (c * c) + l * l / 16.0 * 1.5 * PI.powf(1.5) / c.powf(2.5);
        com * rel
    }
}

/// Closed-form correlated ground state `(1 + lambda r12 / 4) exp(-lambda^2 (r1^2 + r2^2) / 16)`
/// with `E = lambda^2`.
pub fn harmonium_state(params: HarmoniumParams) -> Result<BoundState> {
    let l = params.coupling;
    if !(l > 0.0) {
        return Err(Error::Unsupported(format!("coupling must be positive, got {l}")));
    }
    let k = l.powi(4) / 64.0;
    if (params.confinement - k).abs() > 1e-12 * k {
        return Err(Error::Unsupported(format!(
            "closed form needs confinement lambda^4 / 64 = {k}, got {}",
            params.confinement
        )));
    }
    let c = params.rate();
    let value = move |z: &[f64]| {
        let r = dist(&z[..3], &z[3..6]);
        let s: f64 = z.iter().map(|v| v * v).sum();
        (1.0 + 0.25 * l * r) * (-c * s).exp()
    };
    let derivatives = Arc::new(move |z: &[f64]| {
        let r = dist(&z[..3], &z[3..6]);
        let s: f64 = z.iter().map(|v| v * v).sum();
        let gauss = (-c * s).exp();
        let g = 1.0 + 0.25 * l * r;
        let dg = 0.25 * l;
        let mut gradient = Vec::with_capacity(6);
        for i in 0..6 {
            let a = i % 3;
            let u = if r > 0.0 { (z[a] - z[a + 3]) / r } else { 0.0 };
            let dgi = if i < 3 { dg * u } else { -dg * u };
            gradient.push(Complex64::new((dgi - 2.0 * c * g * z[i]) * gauss, 0.0));
        }
        // Delta g = 2 (g'' + 2 g' / r), grad g . grad G = -2 c g' r G
        let lap = 2.0 * (2.0 * dg / r) - 4.0 * c * dg * r + g * (4.0 * c * c * s - 12.0 * c);
        Derivatives { value: Complex64::new(g * gauss, 0.0), gradient, laplacian: Complex64::new(lap * gauss, 0.0) }
    });
    Ok(BoundState::new(
        StateKind::Harmonium(params),
        3,
        2,
        params.energy(),
        params.norm_sq(),
        1.0 / c.sqrt(),
        Arc::new(move |z| Complex64::new(value(z), 0.0)),
        Some(derivatives),
    ))
}

/// One-electron density of the solvable state: the angular integral is done
/// in closed form and the remaining radial integral by Gauss-Legendre.
pub fn harmonium_density(params: HarmoniumParams, x: &[f64]) -> f64 {
    let l = params.coupling;
    let b = 2.0 * params.rate();
    let r = norm(x);
    let kernel = |s: f64| {
        let g = 1.0 + 0.25 * l * s;
        let ang = if r * s > 1e-8 {
            4.0 * PI * ((-b * (s - r).powi(2)).exp() - (-b * (s + r).powi(2)).exp()) / (4.0 * b * r * s)
        } else {
            4.0 * PI * (-b * (r * r + s * s)).exp() * (1.0 + 2.0 * (b * r * s).powi(2) / 3.0)
        };
        g * g * s * s * ang
    };
    let upper = r + 14.0 / b.sqrt();
    (-b * r * r).exp() * integrate(kernel, 0.0, upper, 96, 20)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exchange_symmetric() {
        let s = harmonium_state(HarmoniumParams::solvable(1.0)).unwrap();
        let a = [0.3, -1.2, 0.5, 2.0, 0.1, -0.7];
        let b = [2.0, 0.1, -0.7, 0.3, -1.2, 0.5];
        assert!((s.value(&a) - s.value(&b)).norm() <= 1e-15 * s.value(&a).norm());
    }

    #[test]
    fn unsolvable_confinement_rejected() {
        let p = HarmoniumParams { coupling: 1.0, confinement: 0.25 };
        assert!(matches!(harmonium_state(p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn density_integrates_to_norm() {
        let p = HarmoniumParams::solvable(1.0);
        let total = integrate(|r| 4.0 * PI * r * r * harmonium_density(p, &[r, 0.0, 0.0]), 0.0, 40.0, 80, 20);
        assert!((total - p.norm_sq()).abs() < 1e-9 * p.norm_sq(), "{total} vs {}", p.norm_sq());
    }

    #[test]
    fn analytic_laplacian_matches_differences() {
        let s = harmonium_state(HarmoniumParams::solvable(1.3)).unwrap();
        let z = [0.3, -1.2, 0.5, 2.0, 0.1, -0.7];
        let d = s.derivatives(&z);
        let h = 1e-3;
        let mut fd = 0.0;
        for i in 0..6 {
            let mut p = z;
            p[i] += h;
            let up = s.value(&p).re;
            p[i] -= 2.0 * h;
            let dn = s.value(&p).re;
            fd += (up + dn - 2.0 * s.value(&z).re) / (h * h);
            assert!(((up - dn) / (2.0 * h) - d.gradient[i].re).abs() < 1e-6);
        }
        assert!((fd - d.laplacian.re).abs() < 1e-5);
    }
}
