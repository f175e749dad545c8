use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::jcoeff::{j_coefficients_unchecked, Direction};
use super::{Coefficients, Diff2Operator, Domain};
use crate::error::{Error, Result};
use crate::twist::TwistMap;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Rows of `U D_v U^{-1} = sum_w L_vw D_w + l_v` over all variables `(x, y)`.
fn transport(t: &TwistMap, x: &[f64], y: &[f64]) -> (DMatrix<Complex64>, DVector<Complex64>) {
    let (nx, ny) = (x.len(), y.len());
    let n = nx + ny;
    let Ok(j) = j_coefficients_unchecked(t, x, y, Direction::Inverse) else {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        return (DMatrix::from_element(n, n, nan), DVector::from_element(n, nan));
    };
    let mut l = DMatrix::zeros(n, n);
    for a in 0..nx {
        l[(a, a)] = Complex64::new(1.0, 0.0);
    }
    l.view_mut((0, nx), (nx, ny)).copy_from(&j.j1.map(|v| Complex64::new(v, 0.0)));
    l.view_mut((nx, nx), (ny, ny)).copy_from(&j.j3.map(|v| Complex64::new(v, 0.0)));
    let mut lv = DVector::zeros(n);
    lv.rows_mut(0, nx).copy_from(&j.j2);
    lv.rows_mut(nx, ny).copy_from(&j.j4);
    (l, lv)
}

fn shifted(x: &[f64], y: &[f64], var: usize, h: f64) -> (Vec<f64>, Vec<f64>) {
    let (mut xs, mut ys) = (x.to_vec(), y.to_vec());
    if var < x.len() {
        xs[var] += h;
    } else {
        ys[var - x.len()] += h;
    }
    (xs, ys)
}

/// `U P U^{-1}` with `U` the twist unitary, as a new second-order operator on
/// `Omega(delta0) x R^{pd}`.
///
/// Derivatives of the transport coefficients are taken by fourth-order
/// central differences.
pub fn conjugate_operator(p: &Diff2Operator, t: &TwistMap) -> Result<Diff2Operator> {
    let lay = p.layout;
    if lay.m != t.external_count() || lay.d != t.dim() {
        return Err(Error::Dimension(format!(
            "operator layout {lay:?} does not match a twist with m = {}, d = {}",
            t.external_count(),
            t.dim()
        )));
    }
    let base = p.coefficient_fn();
    let t = Arc::new(t.clone());
    let domain = Domain::Balls { centres: t.x0().to_vec(), radius: t.delta0() };
    let h = 1e-3 * t.r0();
    let coefficients = Arc::new(move |x: &[f64], y: &[f64]| -> Coefficients {
        let n = x.len() + y.len();
        let w = t.lift_unchecked(x, y);
        let c = base(x, &w);
        let (l, lv) = transport(&t, x, y);
        let second = l.transpose() * &c.second * &l;
        let nmat = &c.second * &l;
        let mut first = (lv.transpose() * &c.second * &l).transpose() * Complex64::new(2.0, 0.0)
            + (c.first.transpose() * &l).transpose();
        let mut zeroth = (lv.transpose() * &c.second * &lv)[0] + (c.first.transpose() * &lv)[0] + c.zeroth;
        for var in 0..n {
            let stencil = [(2.0, -1.0), (1.0, 8.0), (-1.0, -8.0), (-2.0, 1.0)];
            let mut dl = DMatrix::<Complex64>::zeros(n, n);
            let mut dlv = DVector::<Complex64>::zeros(n);
            for (s, wgt) in stencil {
                let (xs, ys) = shifted(x, y, var, s * h);
                let (ls, lvs) = transport(&t, &xs, &ys);
                dl += ls * Complex64::new(wgt / (12.0 * h), 0.0);
                dlv += lvs * Complex64::new(wgt / (12.0 * h), 0.0);
            }
            let col = nmat.column(var);
            first += (col.transpose() * &dl).transpose() * (-I);
            zeroth += -I * (col.transpose() * &dlv)[0];
        }
        Coefficients { second, first, zeroth }
    });
    Ok(Diff2Operator::new(format!("twisted {}", p.name), lay, domain, coefficients))
}

/// Principal symbol of `U P U^{-1}` from the covector transformation:
/// `sigma_P(x; F(x;y); xi + J1 eta; J3 eta)` with the inverse-direction coefficients.
pub fn twisted_principal_symbol(
    p: &Diff2Operator,
    t: &TwistMap,
    x: &[f64],
    y: &[f64],
    xi: &[f64],
    eta: &[f64],
) -> Result<Complex64> {
    let j = super::j_coefficients(t, x, y, Direction::Inverse)?;
    let eta_v = DVector::from_column_slice(eta);
    let xi2 = DVector::from_column_slice(xi) + &j.j1 * &eta_v;
    let eta2 = &j.j3 * &eta_v;
    let w = t.lift(x, y)?;
    Ok(p.principal_symbol(x, &w, xi2.as_slice(), eta2.as_slice()))
}

/// Top-order part of `e^{-i phase} P e^{i phase}` separated by its parity in the covector.
pub fn principal_symbol_by_homogeneity(op: &Diff2Operator, x: &[f64], y: &[f64], xi: &[f64], eta: &[f64]) -> Complex64 {
    let neg = |v: &[f64]| v.iter().map(|a| -a).collect::<Vec<f64>>();
    let zero_x = vec![0.0; xi.len()];
    let zero_y = vec![0.0; eta.len()];
    let plus = op.total_symbol(x, y, xi, eta);
    let minus = op.total_symbol(x, y, &neg(xi), &neg(eta));
    let at0 = op.total_symbol(x, y, &zero_x, &zero_y);
    0.5 * (plus + minus - 2.0 * at0)
}
