//! Toy bound states with certified eigen-residuals.

mod eigen;
mod gaussian;
mod harmonium;
mod hydrogenic;
mod residual;

pub use eigen::{grid_eigensolve, EigenOptions, GridHamiltonian};
pub use gaussian::GaussianState;
pub use harmonium::{harmonium_density, harmonium_state, HarmoniumParams};
pub use hydrogenic::hydrogenic_state;
pub use residual::{residual_check, ModelHamiltonian, ResidualReport, SchrodingerOperator};

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::unitary::{read_wavefunction, GridWavefunction};

pub type Evaluator = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;
pub type DerivativeEvaluator = Arc<dyn Fn(&[f64]) -> Derivatives + Send + Sync>;

/// Value, gradient and Laplacian at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivatives {
    pub value: Complex64,
    pub gradient: Vec<Complex64>,
    pub laplacian: Complex64,
}

#[derive(Clone, Debug)]
pub enum StateKind {
    Hydrogenic { charge: f64 },
    Gaussian(GaussianState),
    Harmonium(HarmoniumParams),
    GridEigen(GridWavefunction),
    File(GridWavefunction),
}

impl StateKind {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Hydrogenic { .. } => "hydrogenic",
            Self::Gaussian(_) => "separable-gaussian",
            Self::Harmonium(_) => "harmonium",
            Self::GridEigen(_) => "grid-eigen",
            Self::File(_) => "file",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualCertificate {
    pub residual: f64,
    pub tolerance: f64,
    pub exclusion_radius: f64,
    pub passed: bool,
}

/// A wavefunction of `electrons` points in `R^dim`, coordinates ordered by particle.
#[derive(Clone)]
pub struct BoundState {
    pub kind: StateKind,
    pub dim: usize,
    pub electrons: usize,
    pub energy: f64,
    pub norm_sq: f64,
    /// Length scale of the decay, used by generic quadratures.
    pub scale: f64,
    pub certificate: Option<ResidualCertificate>,
    eval: Evaluator,
    derivatives: Option<DerivativeEvaluator>,
}

impl std::fmt::Debug for BoundState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundState")
            .field("kind", &self.kind.tag())
            .field("dim", &self.dim)
            .field("electrons", &self.electrons)
            .field("energy", &self.energy)
            .field("norm_sq", &self.norm_sq)
            .finish()
    }
}

impl BoundState {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: StateKind,
        dim: usize,
        electrons: usize,
        energy: f64,
        norm_sq: f64,
        scale: f64,
        eval: Evaluator,
        derivatives: Option<DerivativeEvaluator>,
    ) -> Self {
        Self { kind, dim, electrons, energy, norm_sq, scale, certificate: None, eval, derivatives }
    }

    /// Separable or correlated Gaussian toy over `electrons * dim` coordinates.
    pub fn gaussian(g: GaussianState, dim: usize) -> Result<Self> {
        if dim == 0 || g.coords() % dim != 0 {
            return Err(Error::Dimension(format!("{} coordinates in dimension {dim}", g.coords())));
        }
        let eig = g.width().clone().symmetric_eigen().eigenvalues.min();
        let (ge, gd) = (g.clone(), g.clone());
        Ok(Self::new(
            StateKind::Gaussian(g.clone()),
            dim,
            g.coords() / dim,
            g.energy(),
            g.norm_sq(),
            1.0 / eig.sqrt(),
            Arc::new(move |z| ge.value(z)),
            Some(Arc::new(move |z| {
                let (value, gradient, laplacian) = gd.derivatives(z);
                Derivatives { value, gradient, laplacian }
            })),
        ))
    }

    /// Loads a grid wavefunction written by the unitary module.
    pub fn from_file(path: impl AsRef<Path>, dim: usize, energy: f64) -> Result<Self> {
        let psi = read_wavefunction(path)?;
        Self::from_grid(psi, dim, energy, true)
    }

    pub(crate) fn from_grid(psi: GridWavefunction, dim: usize, energy: f64, file: bool) -> Result<Self> {
        let axes = psi.grid.ndim();
        if dim == 0 || axes % dim != 0 {
            return Err(Error::Dimension(format!("{axes} grid axes in dimension {dim}")));
        }
        let scale = psi.grid.half_widths().iter().fold(0.0f64, |a, &b| a.max(b)) / 4.0;
        let norm_sq = psi.norm_sq();
        let shared = Arc::new(psi.clone());
        let kind = if file { StateKind::File(psi) } else { StateKind::GridEigen(psi) };
        Ok(Self::new(
            kind,
            dim,
            axes / dim,
            energy,
            norm_sq,
            scale,
            Arc::new(move |z| shared.interpolate(&[z.to_vec()])[0]),
            None,
        ))
    }

    pub fn with_certificate(mut self, c: ResidualCertificate) -> Self {
        self.certificate = Some(c);
        self
    }

    pub fn coords(&self) -> usize {
        self.dim * self.electrons
    }

    pub fn value(&self, z: &[f64]) -> Complex64 {
        (self.eval)(z)
    }

    /// `psi(x; y)` with the external block first.
    pub fn split_value(&self, x: &[f64], y: &[f64]) -> Complex64 {
        let z: Vec<f64> = x.iter().chain(y).copied().collect();
        self.value(&z)
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.derivatives.is_some()
    }

    /// Analytic when available, otherwise fourth-order central differences.
    pub fn derivatives(&self, z: &[f64]) -> Derivatives {
        if let Some(d) = &self.derivatives {
            return d(z);
        }
        let h = 1e-3 * self.scale.max(1e-3);
        let value = self.value(z);
        let mut gradient = Vec::with_capacity(z.len());
        let mut laplacian = Complex64::new(0.0, 0.0);
        let mut p = z.to_vec();
        for k in 0..z.len() {
            let mut f = |s: f64| {
                p[k] = z[k] + s;
                let v = self.value(&p);
                p[k] = z[k];
                v
            };
            let (p2, p1, m1, m2) = (f(2.0 * h), f(h), f(-h), f(-2.0 * h));
            gradient.push((-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h));
            laplacian += (-p2 + 16.0 * p1 - 30.0 * value + 16.0 * m1 - m2) / (12.0 * h * h);
        }
        Derivatives { value, gradient, laplacian }
    }
}
