use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BoundState, GaussianState, GridHamiltonian, HarmoniumParams, StateKind};
use crate::error::{Error, Result};
use crate::numerics::quadrature::{gauss_hermite, gauss_legendre, integrate};
use crate::numerics::{dist, norm};

pub type PotentialFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `(D - kappa)^2 + V` on `R^n`; a zero shift gives `-Delta + V`.
#[derive(Clone)]
pub struct SchrodingerOperator {
    pub name: String,
    pub coords: usize,
    pub shift: Vec<f64>,
    potential: PotentialFn,
}

impl std::fmt::Debug for SchrodingerOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SchrodingerOperator").field("name", &self.name).field("coords", &self.coords).finish()
    }
}

impl SchrodingerOperator {
    pub fn new(name: impl Into<String>, coords: usize, potential: PotentialFn) -> Self {
        Self { name: name.into(), coords, shift: vec![0.0; coords], potential }
    }

    pub fn with_shift(mut self, shift: Vec<f64>) -> Self {
        self.shift = shift;
        self
    }

    pub fn hydrogenic(charge: f64) -> Self {
        Self::new("hydrogenic", 3, Arc::new(move |z| -charge / norm(z)))
    }

    pub fn harmonium(p: HarmoniumParams) -> Self {
        Self::new(
            "harmonium",
            6,
            Arc::new(move |z| p.confinement * z.iter().map(|v| v * v).sum::<f64>() + p.coupling / dist(&z[..3], &z[3..6])),
        )
    }

    /// The operator for which the Gaussian toy is an eigenstate.
    pub fn gaussian(g: &GaussianState) -> Self {
        let a2 = g.width() * g.width();
        Self::new(
            "gaussian oscillator",
            g.coords(),
            Arc::new(move |z| {
                let v = nalgebra::DVector::from_column_slice(z);
                v.dot(&(&a2 * &v))
            }),
        )
        .with_shift(g.kappa().iter().copied().collect())
    }

    pub fn potential(&self, z: &[f64]) -> f64 {
        (self.potential)(z)
    }

    /// `(H - E) psi` at `z`.
    pub fn defect(&self, psi: &BoundState, energy: f64, z: &[f64]) -> Complex64 {
        let d = psi.derivatives(z);
        let k2: f64 = self.shift.iter().map(|k| k * k).sum();
        let drift: Complex64 = self.shift.iter().zip(&d.gradient).map(|(k, g)| g * *k).sum();
        -d.laplacian + Complex64::new(0.0, 2.0) * drift + d.value * (k2 + self.potential(z) - energy)
    }
}

#[derive(Clone, Debug)]
pub enum ModelHamiltonian {
    Continuum(SchrodingerOperator),
    Grid(GridHamiltonian),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `||(H - E) psi|| / ||psi||`.
    pub residual: f64,
    pub exclusion_radius: f64,
    /// Change of the residual when the exclusion radius doubles.
    pub sensitivity: f64,
}

pub const EXCLUSION_RADIUS: f64 = 1e-2;

/// Relative eigen-residual of `psi` at its stated energy.
pub fn residual_check(h: &ModelHamiltonian, psi: &BoundState) -> Result<ResidualReport> {
    residual_at_energy(h, psi, psi.energy)
}

/// As [`residual_check`] with the energy overridden.
pub fn residual_at_energy(h: &ModelHamiltonian, psi: &BoundState, energy: f64) -> Result<ResidualReport> {
    match h {
        ModelHamiltonian::Grid(g) => {
            let (StateKind::GridEigen(u) | StateKind::File(u)) = &psi.kind else {
                return Err(Error::Geometry("grid Hamiltonian needs a grid state".into()));
            };
            if u.grid != g.grid {
                return Err(Error::Geometry("state and Hamiltonian live on different grids".into()));
            }
            let hu = g.apply(u);
            let r = hu.sub(&u.scale(Complex64::new(energy, 0.0))).norm() / u.norm();
            Ok(ResidualReport { residual: r, exclusion_radius: 0.0, sensitivity: 0.0 })
        }
        ModelHamiltonian::Continuum(op) => {
            if op.coords != psi.coords() {
                return Err(Error::Geometry(format!(
                    "operator on {} coordinates, state on {}",
                    op.coords,
                    psi.coords()
                )));
            }
            let run = |eps: f64| -> Result<f64> {
                let num = match &psi.kind {
                    StateKind::Hydrogenic { .. } => radial(op, psi, energy, eps),
                    StateKind::Harmonium(_) => pair_radial(op, psi, energy, eps),
                    StateKind::Gaussian(_) => hermite(op, psi, energy)?,
                    _ => return Err(Error::Geometry("continuum Hamiltonian needs an analytic state".into())),
                };
                Ok((num / psi.norm_sq).sqrt())
            };
            let r = run(EXCLUSION_RADIUS)?;
            let r2 = run(2.0 * EXCLUSION_RADIUS)?;
            Ok(ResidualReport { residual: r, exclusion_radius: EXCLUSION_RADIUS, sensitivity: (r - r2).abs() })
        }
    }
}

fn radial(op: &SchrodingerOperator, psi: &BoundState, energy: f64, eps: f64) -> f64 {
    let f = |r: f64| 4.0 * PI * r * r * op.defect(psi, energy, &[r, 0.0, 0.0]).norm_sqr();
    integrate(f, eps, eps + 80.0 * psi.scale, 64, 20)
}

fn pair_radial(op: &SchrodingerOperator, psi: &BoundState, energy: f64, eps: f64) -> f64 {
    let (t, w) = gauss_legendre(24);
    let nodes = |lo: f64, hi: f64, panels: usize| -> Vec<(f64, f64)> {
        let h = (hi - lo) / panels as f64;
        (0..panels)
            .flat_map(|p| {
                let a = lo + p as f64 * h;
                t.iter().zip(&w).map(move |(ti, wi)| (a + 0.5 * h * (ti + 1.0), 0.5 * h * wi)).collect::<Vec<_>>()
            })
            .collect()
    };
    let s = psi.scale;
    let com = nodes(0.0, 6.0 * s, 12);
    let rel = nodes(eps, 12.0 * s, 24);
    com.par_iter()
        .map(|&(cm, wc)| {
            rel.iter()
                .map(|&(r, wr)| {
                    let z = [cm, 0.5 * r, 0.0, cm, -0.5 * r, 0.0];
                    wc * wr * 16.0 * PI * PI * cm * cm * r * r * op.defect(psi, energy, &z).norm_sqr()
                })
                .sum::<f64>()
        })
        .sum()
}

fn hermite(op: &SchrodingerOperator, psi: &BoundState, energy: f64) -> Result<f64> {
    let n = psi.coords();
    if n > 4 {
        return Err(Error::Unsupported(format!("tensor quadrature in {n} coordinates")));
    }
    let (t, w) = gauss_hermite(40);
    let s = psi.scale;
    let total = t.len().pow(n as u32);
    Ok((0..total)
        .into_par_iter()
        .map(|mut i| {
            let mut z = vec![0.0; n];
            let mut wt = 1.0;
            for zk in z.iter_mut() {
                let j = i % t.len();
                i /= t.len();
                *zk = s * t[j];
                wt *= s * w[j] * (t[j] * t[j]).exp();
            }
            wt * op.defect(psi, energy, &z).norm_sqr()
        })
        .sum())
}
