//! Pair potentials of the admissible class, their derivative checks, the
//! Hardy ratio and the assembly of the total potential from pairings.

mod assembly;
mod coulomb;
mod hardy;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use assembly::{assemble_potential, PairAssembly, Pairing, Particle};
pub use coulomb::inverse_distance_derivative;
pub use hardy::{hardy_ratio, RadialProfile};

use crate::error::{Error, Result};
use crate::numerics::fit::{Growth, GrowthFit};
use crate::numerics::{central_difference, factorial, multi_indices, norm};

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type FieldFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;
pub type DerivativeFn = Arc<dyn Fn(&[f64], &[usize]) -> Complex64 + Send + Sync>;

/// Radial envelope and angular factor of a potential's leading behaviour.
#[derive(Clone)]
pub struct EnvelopeSpec {
    pub eta: RadialFn,
    pub eta0: f64,
    pub b0: f64,
    pub angular: FieldFn,
}

impl EnvelopeSpec {
    /// Envelope of `1/|z|`.
    pub fn inverse_distance() -> Self {
        Self {
            eta: Arc::new(|t| 1.0 / t),
            eta0: 0.5,
            b0: 2.0,
            angular: Arc::new(|_| Complex64::new(1.0, 0.0)),
        }
    }

    /// Leading part `eta(|z|) * angular(z / |z|)`.
    pub fn leading(&self, z: &[f64]) -> Complex64 {
        let r = norm(z);
        let dir: Vec<f64> = z.iter().map(|v| v / r).collect();
        (self.angular)(&dir) * (self.eta)(r)
    }

    /// Sampled doubling constant `sup eta(s) / eta(t)` over `|s - t| <= eta0 t`.
    pub fn doubling_constant(&self, radii: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for &t in radii {
            let et = (self.eta)(t);
            for i in 0..=64 {
                let s = t * (1.0 - self.eta0 + 2.0 * self.eta0 * i as f64 / 64.0);
                if s > 0.0 {
                    worst = worst.max((self.eta)(s) / et);
                }
            }
        }
        worst
    }
}

/// A pair potential together with its envelope and optional exact derivatives.
#[derive(Clone)]
pub struct ClassVPotential {
    pub name: String,
    pub dim: usize,
    pub value: FieldFn,
    pub envelope: EnvelopeSpec,
    /// Declared constant of the derivative bound.
    pub constant: f64,
    /// Exact partial derivatives `d^alpha v(z)`, when known.
    pub derivative: Option<DerivativeFn>,
}

impl std::fmt::Debug for ClassVPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClassVPotential").field("name", &self.name).field("dim", &self.dim).finish()
    }
}

impl ClassVPotential {
    pub fn eval(&self, z: &[f64]) -> Complex64 {
        (self.value)(z)
    }

    /// `d^alpha v(z)`, exact when available and by finite differences with
    /// step `1e-3 |z|` otherwise.
    pub fn partial(&self, z: &[f64], alpha: &[usize]) -> Complex64 {
        match &self.derivative {
            Some(d) => d(z, alpha),
            None => {
                let h = 1e-3 * norm(z);
                central_difference(&|p: &[f64]| (self.value)(p), z, alpha, h)
            }
        }
    }
}

/// The Coulomb potential `1/|z|` in three dimensions.
pub fn coulomb(dim: usize) -> Result<ClassVPotential> {
    if dim != 3 {
        return Err(Error::Unsupported(format!("Coulomb potential requires dimension 3, got {dim}")));
    }
    Ok(ClassVPotential {
        name: "coulomb".into(),
        dim,
        value: Arc::new(|z| Complex64::new(1.0 / norm(z), 0.0)),
        envelope: EnvelopeSpec::inverse_distance(),
        constant: 1.0,
        derivative: Some(Arc::new(|z, a| Complex64::new(inverse_distance_derivative(z, a), 0.0))),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativeSource {
    Exact,
    FiniteDifference,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShellFit {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub constant: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassVReport {
    /// Largest `|z|^n |D^a v| / (n! |v0|)` at each order `n`.
    pub per_order: Vec<f64>,
    pub fit: GrowthFit,
    /// Fitted constants on dyadic shells, outermost first.
    pub shells: Vec<ShellFit>,
    pub doubling_constant: f64,
    pub angular_range: (f64, f64),
    pub source: DerivativeSource,
    pub within_declared: bool,
    /// Set when no single constant fits: the shell constants blow up toward the origin.
    pub fails: bool,
}

fn ratios_at(pot: &ClassVPotential, z: &[f64], max_order: usize) -> Vec<f64> {
    let r = norm(z);
    let lead = pot.envelope.leading(z).norm();
    (0..=max_order)
        .map(|n| {
            multi_indices(pot.dim, n)
                .iter()
                .map(|a| r.powi(n as i32) * pot.partial(z, a).norm() / (factorial(n) * lead))
                .fold(0.0f64, |acc, v| if v.is_nan() { f64::NAN } else { acc.max(v) })
        })
        .collect()
}

/// Samples the derivative bound of the admissible class at the given points.
pub fn verify_class_v(pot: &ClassVPotential, max_order: usize, samples: &[Vec<f64>]) -> Result<ClassVReport> {
    if samples.is_empty() {
        return Err(Error::Invalid("no sample points".into()));
    }
    let mut per_point = Vec::with_capacity(samples.len());
    for z in samples {
        if z.len() != pot.dim {
            return Err(Error::Dimension(format!("sample of length {} for a {}-d potential", z.len(), pot.dim)));
        }
        let r = norm(z);
        if r == 0.0 {
            return Err(Error::Invalid("sample at the origin".into()));
        }
        per_point.push((r, ratios_at(pot, z, max_order)));
    }
    let fold = |rows: &mut dyn Iterator<Item = &Vec<f64>>| {
        let mut out = vec![0.0f64; max_order + 1];
        for row in rows {
            for (o, v) in out.iter_mut().zip(row) {
                *o = if v.is_nan() || o.is_nan() { f64::NAN } else { o.max(*v) };
            }
        }
        out
    };
    let per_order = fold(&mut per_point.iter().map(|(_, r)| r));
    let fit = GrowthFit::new(&per_order, Growth::Factorial);

    let mut keys: Vec<i32> = per_point.iter().map(|(r, _)| r.log2().floor() as i32).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.reverse();
    let shells: Vec<ShellFit> = keys
        .iter()
        .map(|&k| {
            let rows = fold(&mut per_point.iter().filter(|(r, _)| r.log2().floor() as i32 == k).map(|(_, r)| r));
            ShellFit {
                inner_radius: 2f64.powi(k),
                outer_radius: 2f64.powi(k + 1),
                constant: GrowthFit::new(&rows, Growth::Factorial).constant,
            }
        })
        .collect();
    let blows_up = shells.len() >= 3
        && shells.windows(3).last().is_some_and(|w| w[1].constant > 2.0 * w[0].constant && w[2].constant > 2.0 * w[1].constant);
    let fails = !fit.constant.is_finite() || blows_up;

    let radii: Vec<f64> = per_point.iter().map(|(r, _)| *r).collect();
    let mut angular_range = (f64::INFINITY, 0.0f64);
    for z in samples {
        let r = norm(z);
        let dir: Vec<f64> = z.iter().map(|v| v / r).collect();
        let a = (pot.envelope.angular)(&dir).norm();
        angular_range = (angular_range.0.min(a), angular_range.1.max(a));
    }
    Ok(ClassVReport {
        within_declared: fit.constant <= pot.constant * (1.0 + 1e-6),
        per_order,
        fit,
        shells,
        doubling_constant: pot.envelope.doubling_constant(&radii),
        angular_range,
        source: if pot.derivative.is_some() { DerivativeSource::Exact } else { DerivativeSource::FiniteDifference },
        fails,
    })
}
