//! Reduced densities, density matrices and currents, directly and through
//! the twist unitary, plus the analyticity scanner.

mod analyticity;
mod quadrature;
mod twisted;

pub use analyticity::{analyticity_scan, AnalyticityReport, Characterization, ScanOptions};
pub use quadrature::Quadrature;
pub use twisted::{direct_grid_density, doubled_twist, sample_internal_state, twisted_density, twisted_density_matrix};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{harmonium_density, BoundState, StateKind};

/// A quadrature result with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DensityKind {
    #[serde(rename = "rho_k")]
    Density,
    #[serde(rename = "gamma_k")]
    DensityMatrix,
    #[serde(rename = "current")]
    Current,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Twisted,
}

/// One evaluation point of a density report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub x: Vec<f64>,
    pub x_prime: Option<Vec<f64>>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub error: f64,
    /// Twisted-path value and its distance from the direct one, when computed.
    pub twisted: Option<f64>,
    pub discrepancy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub kind: DensityKind,
    pub k: usize,
    pub method: Method,
    pub quadrature: String,
    pub rows: Vec<DensityRow>,
}

fn check_split(psi: &BoundState, k: usize, x: &[f64]) -> Result<()> {
    if k == 0 || k > psi.electrons {
        return Err(Error::Invalid(format!("k = {k} for a state of {} electrons", psi.electrons)));
    }
    if x.len() != k * psi.dim {
        return Err(Error::Dimension(format!("external tuple of length {} for k = {k}", x.len())));
    }
    Ok(())
}

/// `rho_k(x) = int |psi(x; y)|^2 dy` with the state's preferred quadrature.
pub fn reduce_density(psi: &BoundState, k: usize, x: &[f64]) -> Result<Estimate<f64>> {
    reduce_density_with(psi, k, x, Quadrature::Auto)
}

pub fn reduce_density_with(psi: &BoundState, k: usize, x: &[f64], q: Quadrature) -> Result<Estimate<f64>> {
    check_split(psi, k, x)?;
    if k == psi.electrons {
        return Ok(Estimate { value: psi.value(x).norm_sqr(), error: 0.0 });
    }
    match (q, &psi.kind) {
        (Quadrature::Auto | Quadrature::Analytic, StateKind::Gaussian(g)) => Ok(Estimate { value: g.density(x)?, error: 0.0 }),
        (Quadrature::Auto | Quadrature::Analytic, StateKind::Harmonium(p)) => {
            let v = harmonium_density(*p, x);
            Ok(Estimate { value: v, error: 1e-13 * v })
        }
        (Quadrature::Analytic, _) => Err(Error::Unsupported(format!("no closed form for {}", psi.kind.tag()))),
        _ => {
            let e = quadrature::integrate_internal(psi, k, q, |y| psi.split_value(x, y).norm_sqr().into())?;
            Ok(Estimate { value: e.value.re, error: e.error })
        }
    }
}

/// `gamma_k(x, x') = int conj(psi(x; y)) psi(x'; y) dy`.
pub fn reduce_density_matrix(psi: &BoundState, k: usize, x: &[f64], xp: &[f64]) -> Result<Estimate<Complex64>> {
    reduce_density_matrix_with(psi, k, x, xp, Quadrature::Auto)
}

pub fn reduce_density_matrix_with(
    psi: &BoundState,
    k: usize,
    x: &[f64],
    xp: &[f64],
    q: Quadrature,
) -> Result<Estimate<Complex64>> {
    check_split(psi, k, x)?;
    check_split(psi, k, xp)?;
    if k == psi.electrons {
        return Ok(Estimate { value: psi.value(x).conj() * psi.value(xp), error: 0.0 });
    }
    match (q, &psi.kind) {
        (Quadrature::Auto | Quadrature::Analytic, StateKind::Gaussian(g)) => {
            Ok(Estimate { value: g.density_matrix(x, xp)?, error: 0.0 })
        }
        (Quadrature::Analytic, _) => Err(Error::Unsupported(format!("no closed form for {}", psi.kind.tag()))),
        _ => quadrature::integrate_internal(psi, k, q, |y| psi.split_value(x, y).conj() * psi.split_value(xp, y)),
    }
}

/// `C(x) = Im int conj(grad_x psi(x; y)) psi(x; y) dy`, conjugate on the gradient.
pub fn current_density(psi: &BoundState, k: usize, x: &[f64]) -> Result<Estimate<Vec<f64>>> {
    current_density_with(psi, k, x, Quadrature::Auto)
}

pub fn current_density_with(psi: &BoundState, k: usize, x: &[f64], q: Quadrature) -> Result<Estimate<Vec<f64>>> {
    check_split(psi, k, x)?;
    let nx = x.len();
    let local = |z: &[f64]| -> Vec<f64> {
        let d = psi.derivatives(z);
        d.gradient[..nx].iter().map(|g| (g.conj() * d.value).im).collect()
    };
    if k == psi.electrons {
        return Ok(Estimate { value: local(x), error: 0.0 });
    }
    if let (Quadrature::Auto | Quadrature::Analytic, StateKind::Gaussian(g)) = (q, &psi.kind) {
        return Ok(Estimate { value: g.current(x)?, error: 0.0 });
    }
    if q == Quadrature::Analytic {
        return Err(Error::Unsupported(format!("no closed form for {}", psi.kind.tag())));
    }
    let mut value = Vec::with_capacity(nx);
    let mut error = 0.0f64;
    for c in 0..nx {
        let e = quadrature::integrate_internal(psi, k, q, |y| {
            let z: Vec<f64> = x.iter().chain(y).copied().collect();
            Complex64::new(local(&z)[c], 0.0)
        })?;
        value.push(e.value.re);
        error = error.max(e.error);
    }
    Ok(Estimate { value, error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::GaussianState;
    use nalgebra::{DMatrix, DVector};

    fn toy() -> BoundState {
        let g = GaussianState::new(
            DMatrix::from_row_slice(2, 2, &[1.1, 0.35, 0.35, 0.9]),
            DVector::from_vec(vec![0.6, 0.25]),
        )
        .unwrap();
        BoundState::gaussian(g, 1).unwrap()
    }

    #[test]
    fn closed_form_and_quadrature_agree() {
        let s = toy();
        for x in [-1.0, 0.0, 0.7] {
            let a = reduce_density(&s, 1, &[x]).unwrap().value;
            let b = reduce_density_with(&s, 1, &[x], Quadrature::GaussHermite).unwrap().value;
            assert!((a - b).abs() < 1e-12, "{a} {b}");
            let ga = reduce_density_matrix(&s, 1, &[x], &[0.3]).unwrap().value;
            let gb = reduce_density_matrix_with(&s, 1, &[x], &[0.3], Quadrature::GaussHermite).unwrap().value;
            assert!((ga - gb).norm() < 1e-12);
            let ca = current_density(&s, 1, &[x]).unwrap().value[0];
            let cb = current_density_with(&s, 1, &[x], Quadrature::GaussHermite).unwrap().value[0];
            assert!((ca - cb).abs() < 1e-12, "{ca} {cb}");
        }
    }

    #[test]
    fn current_sign_follows_operand_order() {
        let s = toy();
        let rho = reduce_density(&s, 1, &[0.4]).unwrap().value;
        let c = current_density(&s, 1, &[0.4]).unwrap().value[0];
        assert!((c + 0.6 * rho).abs() < 1e-14);
    }

    #[test]
    fn real_state_has_no_current() {
        let g = GaussianState::isotropic(2, 1.0, vec![0.0, 0.0]).unwrap();
        let s = BoundState::gaussian(g, 1).unwrap();
        let c = current_density_with(&s, 1, &[0.3], Quadrature::GaussHermite).unwrap().value[0];
        assert!(c.abs() <= 1e-12);
    }

    #[test]
    fn wrong_split_is_rejected() {
        let s = toy();
        assert!(reduce_density(&s, 3, &[0.0, 0.0, 0.0]).is_err());
        assert!(reduce_density(&s, 1, &[0.0, 0.0]).is_err());
    }
}
