use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::twist::TwistMap;

/// Which map `G` the coefficients belong to: the lifted twist `F` or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Coefficients in `U^{-1} D_x U = D_x + J1 D_y + J2` and `U^{-1} D_y U = J3 D_y + J4`
/// (direction `Forward`), or the same with `U` and `U^{-1}` swapped (`Inverse`).
#[derive(Clone, Debug)]
pub struct JCoefficients {
    /// `md x pd`
    pub j1: DMatrix<f64>,
    /// Purely imaginary, length `md`.
    pub j2: DVector<Complex64>,
    /// `pd x pd`
    pub j3: DMatrix<f64>,
    /// Purely imaginary, length `pd`.
    pub j4: DVector<Complex64>,
}

/// The four coefficient fields of the twist at `(x; y)`.
pub fn j_coefficients(t: &TwistMap, x: &[f64], y: &[f64], dir: Direction) -> Result<JCoefficients> {
    if !t.in_domain(x) {
        return Err(Error::OutsideDomain("external point outside Omega(delta0)".into()));
    }
    j_coefficients_unchecked(t, x, y, dir)
}

pub(crate) fn j_coefficients_unchecked(t: &TwistMap, x: &[f64], y: &[f64], dir: Direction) -> Result<JCoefficients> {
    let (d, m) = (t.dim(), t.external_count());
    if y.is_empty() || y.len() % d != 0 {
        return Err(Error::Dimension(format!("internal tuple of length {}", y.len())));
    }
    let (md, pd) = (m * d, y.len());
    let mut j1 = DMatrix::zeros(md, pd);
    let mut j3 = DMatrix::zeros(pd, pd);
    let mut gx = DVector::<f64>::zeros(md);
    let mut gy = DVector::<f64>::zeros(pd);
    let i_half = Complex64::new(0.0, -0.5);
    for (k, yk) in y.chunks(d).enumerate() {
        // base point z where d_z f is evaluated
        let z = match dir {
            Direction::Forward => t.inverse_unchecked(x, yk)?,
            Direction::Inverse => yk.to_vec(),
        };
        let a = t.dz_unchecked(x, &z);
        let (lx, lz) = t.log_det_gradients(x, &z);
        let lz = DVector::from_vec(lz);
        match dir {
            Direction::Forward => {
                for j in 0..m {
                    let w = t.weight(j, &z);
                    for c in 0..d {
                        j1[(j * d + c, k * d + c)] = w;
                    }
                }
                j3.view_mut((k * d, k * d), (d, d)).copy_from(&a.transpose());
                gx += DVector::from_vec(lx);
                gy.rows_mut(k * d, d).copy_from(&lz);
            }
            Direction::Inverse => {
                let ainv_t = a
                    .try_inverse()
                    .ok_or_else(|| Error::Invalid("singular twist Jacobian".into()))?
                    .transpose();
                let dx = t.dx_at(&z);
                for j in 0..m {
                    let w = t.weight(j, &z);
                    j1.view_mut((j * d, k * d), (d, d)).copy_from(&(-w * &ainv_t));
                }
                j3.view_mut((k * d, k * d), (d, d)).copy_from(&ainv_t);
                let v = &ainv_t * &lz;
                gx += -DVector::from_vec(lx) + dx.transpose() * &v;
                gy.rows_mut(k * d, d).copy_from(&(-v));
            }
        }
    }
    Ok(JCoefficients {
        j1,
        j2: gx.map(|v| i_half * v),
        j3,
        j4: gy.map(|v| i_half * v),
    })
}
