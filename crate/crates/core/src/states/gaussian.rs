use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `psi(z) = exp(-z^T A z / 2 + i kappa . z)` with `A` symmetric positive definite.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    a: DMatrix<f64>,
    kappa: DVector<f64>,
}

impl GaussianState {
    pub fn new(a: DMatrix<f64>, kappa: DVector<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || kappa.len() != n || n == 0 {
            return Err(Error::Dimension("Gaussian width matrix and wave vector disagree".into()));
        }
        if (&a - a.transpose()).amax() > 1e-12 * a.amax() {
            return Err(Error::Invalid("Gaussian width matrix must be symmetric".into()));
        }
        if a.clone().cholesky().is_none() {
            return Err(Error::Invalid("Gaussian width matrix must be positive definite".into()));
        }
        Ok(Self { a, kappa })
    }

    /// Product of identical isotropic factors `exp(-w |z|^2 / 2)`.
    pub fn isotropic(n: usize, width: f64, kappa: Vec<f64>) -> Result<Self> {
        Self::new(DMatrix::identity(n, n) * width, DVector::from_vec(kappa))
    }

    pub fn width(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn kappa(&self) -> &DVector<f64> {
        &self.kappa
    }
    pub fn coords(&self) -> usize {
        self.a.nrows()
    }

    fn exponent(&self, z: &[f64]) -> Complex64 {
        let v = DVector::from_column_slice(z);
        Complex64::new(-0.5 * v.dot(&(&self.a * &v)), self.kappa.dot(&v))
    }

    pub fn value(&self, z: &[f64]) -> Complex64 {
        self.exponent(z).exp()
    }

    /// `(psi, grad psi, Laplacian psi)`.
    pub fn derivatives(&self, z: &[f64]) -> (Complex64, Vec<Complex64>, Complex64) {
        let v = DVector::from_column_slice(z);
        let psi = self.value(z);
        let az = &self.a * &v;
        let g: Vec<Complex64> = az.iter().zip(self.kappa.iter()).map(|(a, k)| Complex64::new(-a, *k)).collect();
        let lap = g.iter().map(|c| c * c).sum::<Complex64>() - self.a.trace();
        (psi, g.iter().map(|c| c * psi).collect(), lap * psi)
    }

    /// `int |psi|^2`.
    pub fn norm_sq(&self) -> f64 {
        (PI.powi(self.coords() as i32) / self.a.determinant()).sqrt()
    }

    /// Eigenvalue of `(D - kappa)^2 + z^T A^2 z`.
    pub fn energy(&self) -> f64 {
        self.a.trace()
    }

    fn blocks(&self, nx: usize) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
        let n = self.coords();
        if nx > n {
            return Err(Error::Dimension(format!("{nx} external coordinates of {n}")));
        }
        let ny = n - nx;
        Ok((
            self.a.view((0, 0), (nx, nx)).into_owned(),
            self.a.view((0, nx), (nx, ny)).into_owned(),
            self.a.view((nx, nx), (ny, ny)).into_owned(),
        ))
    }

    /// Closed-form `int |psi(x; y)|^2 dy` over the trailing coordinates.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        let nx = x.len();
        let (axx, axy, ayy) = self.blocks(nx)?;
        let ny = self.coords() - nx;
        let v = DVector::from_column_slice(x);
        if ny == 0 {
            return Ok((-v.dot(&(&axx * &v))).exp());
        }
        let ayy_inv = ayy.clone().try_inverse().ok_or_else(|| Error::Singular("A_yy".into()))?;
        let schur = &axx - &axy * &ayy_inv * axy.transpose();
        Ok((PI.powi(ny as i32) / ayy.determinant()).sqrt() * (-v.dot(&(&schur * &v))).exp())
    }

    /// Closed-form `int conj(psi(x; y)) psi(x'; y) dy`.
    pub fn density_matrix(&self, x: &[f64], xp: &[f64]) -> Result<Complex64> {
        let nx = x.len();
        if xp.len() != nx {
            return Err(Error::Dimension("x and x' differ in length".into()));
        }
        let (axx, axy, ayy) = self.blocks(nx)?;
        let ny = self.coords() - nx;
        let (v, w) = (DVector::from_column_slice(x), DVector::from_column_slice(xp));
        let kx = self.kappa.rows(0, nx);
        let phase = kx.dot(&(&w - &v));
        let mut re = -0.5 * (v.dot(&(&axx * &v)) + w.dot(&(&axx * &w)));
        let mut pre = 1.0;
        if ny > 0 {
            let ayy_inv = ayy.clone().try_inverse().ok_or_else(|| Error::Singular("A_yy".into()))?;
            let s = &v + &w;
            let b = axy.transpose() * &s;
            re += 0.25 * b.dot(&(&ayy_inv * &b));
            pre = (PI.powi(ny as i32) / ayy.determinant()).sqrt();
        }
        Ok(Complex64::new(re, phase).exp() * pre)
    }

    /// Closed-form current `Im int conj(grad_x psi) psi dy = -kappa_x rho(x)`.
    pub fn current(&self, x: &[f64]) -> Result<Vec<f64>> {
        let rho = self.density(x)?;
        Ok(self.kappa.rows(0, x.len()).iter().map(|k| -k * rho).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quadrature::gauss_hermite;

    fn correlated() -> GaussianState {
        GaussianState::new(
            DMatrix::from_row_slice(2, 2, &[1.2, 0.4, 0.4, 0.9]),
            DVector::from_vec(vec![0.7, -0.3]),
        )
        .unwrap()
    }

    #[test]
    fn closed_forms_match_hermite_quadrature() {
        let g = correlated();
        let (t, w) = gauss_hermite(60);
        let (x, xp) = (0.4, -0.25);
        let mut rho = 0.0;
        let mut gamma = Complex64::new(0.0, 0.0);
        for (ti, wi) in t.iter().zip(&w) {
            let y = *ti;
            let fac = wi * (y * y).exp();
            rho += fac * g.value(&[x, y]).norm_sqr();
            gamma += fac * g.value(&[x, y]).conj() * g.value(&[xp, y]);
        }
        assert!((rho - g.density(&[x]).unwrap()).abs() < 1e-12);
        assert!((gamma - g.density_matrix(&[x], &[xp]).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn derivatives_match_differences() {
        let g = correlated();
        let z = [0.3, -0.6];
        let (_, grad, lap) = g.derivatives(&z);
        let h = 1e-4;
        let mut fd_lap = Complex64::new(0.0, 0.0);
        for k in 0..2 {
            let mut p = z;
            p[k] += h;
            let up = g.value(&p);
            p[k] -= 2.0 * h;
            let dn = g.value(&p);
            assert!(((up - dn) / (2.0 * h) - grad[k]).norm() < 1e-7);
            fd_lap += (up + dn - 2.0 * g.value(&z)) / (h * h);
        }
        assert!((fd_lap - lap).norm() < 1e-5);
    }

    #[test]
    fn rejects_indefinite_width() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(GaussianState::new(a, DVector::zeros(2)).is_err());
    }
}
