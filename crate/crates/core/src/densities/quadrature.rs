use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Estimate;
use crate::error::{Error, Result};
use crate::numerics::qmc::halton;
use crate::numerics::quadrature::gauss_hermite;
use crate::states::{BoundState, StateKind};
use crate::unitary::GridWavefunction;

/// How internal coordinates are integrated out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    /// Closed form when the state has one, otherwise the first applicable rule below.
    Auto,
    Analytic,
    GaussHermite,
    QuasiMonteCarlo { samples: usize, seed: u64 },
    Grid,
}

const HERMITE_ORDER: usize = 48;
const HERMITE_CHECK: usize = 36;
const MAX_HERMITE_COORDS: usize = 3;

pub(super) fn integrate_internal<F>(psi: &BoundState, k: usize, q: Quadrature, f: F) -> Result<Estimate<Complex64>>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let ny = (psi.electrons - k) * psi.dim;
    match (q, &psi.kind) {
        (Quadrature::Auto | Quadrature::Grid, StateKind::GridEigen(u) | StateKind::File(u)) => Ok(grid(u, k * psi.dim, f)),
        (Quadrature::Grid, _) => Err(Error::Unsupported("grid quadrature needs a grid state".into())),
        (Quadrature::QuasiMonteCarlo { samples, seed }, _) => Ok(qmc(ny, psi.scale, samples, seed, f)),
        (Quadrature::Auto, _) if ny > MAX_HERMITE_COORDS => Ok(qmc(ny, psi.scale, 1 << 20, 0x5eed, f)),
        (Quadrature::GaussHermite, _) if ny > MAX_HERMITE_COORDS => {
            Err(Error::Unsupported(format!("tensor Gauss-Hermite in {ny} coordinates")))
        }
        _ => {
            let a = hermite(ny, psi.scale, HERMITE_ORDER, &f);
            let b = hermite(ny, psi.scale, HERMITE_CHECK, &f);
            Ok(Estimate { value: a, error: (a - b).norm() })
        }
    }
}

fn hermite<F: Fn(&[f64]) -> Complex64 + Sync>(ny: usize, scale: f64, order: usize, f: &F) -> Complex64 {
    let (t, w) = gauss_hermite(order);
    let total = order.pow(ny as u32);
    (0..total)
        .into_par_iter()
        .map(|mut i| {
            let mut y = vec![0.0; ny];
            let mut wt = 1.0;
            for yk in y.iter_mut() {
                let j = i % order;
                i /= order;
                *yk = scale * t[j];
                wt *= scale * w[j] * (t[j] * t[j]).exp();
            }
            f(&y) * wt
        })
        .sum()
}

/// Randomly shifted Halton points pushed through Box-Muller; the spread over
/// the shifts gives the standard error.
fn qmc<F: Fn(&[f64]) -> Complex64 + Sync>(ny: usize, scale: f64, samples: usize, seed: u64, f: F) -> Estimate<Complex64> {
    const SHIFTS: usize = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = ny.div_ceil(2);
    let sigma = scale / std::f64::consts::SQRT_2;
    let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(0.5 * ny as f64);
    let per = (samples / SHIFTS).max(1);
    let means: Vec<Complex64> = (0..SHIFTS)
        .map(|_| {
            let shift: Vec<f64> = (0..2 * pairs).map(|_| rng.gen()).collect();
            let sum: Complex64 = (0..per as u64)
                .into_par_iter()
                .map(|i| {
                    let u = halton(i + 1, 2 * pairs, Some(&shift));
                    let mut y = Vec::with_capacity(2 * pairs);
                    for p in 0..pairs {
                        let r = (-2.0 * (1.0 - u[2 * p]).ln()).sqrt();
                        let th = 2.0 * std::f64::consts::PI * u[2 * p + 1];
                        y.push(sigma * r * th.cos());
                        y.push(sigma * r * th.sin());
                    }
                    y.truncate(ny);
                    let q: f64 = y.iter().map(|v| v * v).sum::<f64>() / (2.0 * sigma * sigma);
                    f(&y) * (norm * q.exp())
                })
                .sum();
            sum / per as f64
        })
        .collect();
    let mean = means.iter().sum::<Complex64>() / SHIFTS as f64;
    let var = means.iter().map(|m| (m - mean).norm_sqr()).sum::<f64>() / (SHIFTS * (SHIFTS - 1)) as f64;
    Estimate { value: mean, error: var.sqrt() }
}

/// Sum over the internal grid axes at an arbitrary external point.
fn grid<F: Fn(&[f64]) -> Complex64 + Sync>(u: &GridWavefunction, nx: usize, f: F) -> Estimate<Complex64> {
    let g = &u.grid;
    let inner: usize = g.sizes()[nx..].iter().product();
    let h: f64 = (nx..g.ndim()).map(|a| g.spacing(a)).product();
    let value = (0..inner)
        .into_par_iter()
        .map(|j| {
            let z = g.point(j);
            f(&z[nx..])
        })
        .sum::<Complex64>()
        * h;
    Estimate { value, error: 0.0 }
}
