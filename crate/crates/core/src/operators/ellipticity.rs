use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::jcoeff::Direction;
use super::{conjugate::twisted_principal_symbol, j_coefficients, Diff2Operator};
use crate::error::{Error, Result};
use crate::numerics::linalg::spectral_norm;
use crate::numerics::qmc::covectors;
use crate::twist::TwistMap;

/// Sampled global ellipticity: `sign * Re sigma_P >= constant * |zeta|^2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EllipticityCertificate {
    pub constant: f64,
    pub sign: i8,
    pub samples: usize,
    pub worst_ratio: f64,
    pub worst_point: Vec<f64>,
}

fn split(zeta: &[f64], nx: usize) -> (&[f64], &[f64]) {
    zeta.split_at(nx)
}

/// Samples `Re sigma_P / |zeta|^2` over the given points and `covector_count`
/// low-discrepancy covectors with `|zeta|^2` in `[1, 1e4]`.
pub fn ellipticity_certificate(
    p: &Diff2Operator,
    points: &[(Vec<f64>, Vec<f64>)],
    covector_count: usize,
) -> Result<EllipticityCertificate> {
    let nx = p.layout.nx();
    let zetas = covectors(covector_count, p.layout.n(), 1.0, 1e4);
    let ratios: Vec<(f64, usize, usize)> = points
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, (x, y))| {
            let c = p.coefficients(x, y);
            zetas
                .iter()
                .enumerate()
                .map(move |(k, z)| (c.principal(z).re / z.iter().map(|v| v * v).sum::<f64>(), i, k))
                .collect::<Vec<_>>()
        })
        .collect();
    certificate_from_ratios(&ratios, points, &zetas, nx)
}

fn certificate_from_ratios(
    ratios: &[(f64, usize, usize)],
    points: &[(Vec<f64>, Vec<f64>)],
    zetas: &[Vec<f64>],
    nx: usize,
) -> Result<EllipticityCertificate> {
    let witness = |i: usize, k: usize| {
        let (xi, eta) = split(&zetas[k], nx);
        format!("x = {:?}, y = {:?}, xi = {xi:?}, eta = {eta:?}", points[i].0, points[i].1)
    };
    let Some(&(first, _, _)) = ratios.iter().find(|r| r.0.abs() > 1e-12) else {
        return Err(Error::NotElliptic("principal symbol vanishes on every sample".into()));
    };
    let sign: i8 = if first > 0.0 { 1 } else { -1 };
    let mut worst = (f64::INFINITY, 0, 0);
    for &(r, i, k) in ratios {
        let s = f64::from(sign) * r;
        if s.is_nan() {
            return Err(Error::NotElliptic(format!("symbol is not finite at {}", witness(i, k))));
        }
        if s < worst.0 {
            worst = (s, i, k);
        }
    }
    if worst.0 <= 1e-12 {
        return Err(Error::NotElliptic(format!(
            "real part of the symbol changes sign or degenerates at {}",
            witness(worst.1, worst.2)
        )));
    }
    let (i, k) = (worst.1, worst.2);
    let mut worst_point = points[i].0.clone();
    worst_point.extend(&points[i].1);
    worst_point.extend(&zetas[k]);
    Ok(EllipticityCertificate {
        constant: worst.0,
        sign,
        samples: ratios.len(),
        worst_ratio: worst.0,
        worst_point,
    })
}

/// Ellipticity of `U P U^{-1}` with the constant derived from the untwisted one.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwistedEllipticity {
    /// Certificate of the untwisted operator at the image points.
    pub base: EllipticityCertificate,
    /// Sup of `||J1||` over the samples.
    pub j1_sup: f64,
    /// Two-sided bound `C^{-1} |eta| <= |J3 eta| <= C |eta|`.
    pub j3_bound: f64,
    /// `sqrt(1 + 4 j1_sup^2)`
    pub s_factor: f64,
    /// `min(1/4, C^{-2}, C^{-2} S^{-2}) * base.constant`
    pub derived_constant: f64,
    pub worst_ratio: f64,
    pub samples: usize,
    pub passed: bool,
}

/// Samples the twisted symbol and checks it against the derived lower bound.
pub fn twisted_ellipticity(
    p: &Diff2Operator,
    t: &TwistMap,
    points: &[(Vec<f64>, Vec<f64>)],
    covector_count: usize,
) -> Result<TwistedEllipticity> {
    let nx = p.layout.nx();
    let images: Vec<(Vec<f64>, Vec<f64>)> =
        points.iter().map(|(x, y)| Ok((x.clone(), t.lift(x, y)?))).collect::<Result<_>>()?;
    let base = ellipticity_certificate(p, &images, covector_count)?;
    let mut j1_sup = 0.0f64;
    let mut j3_bound = 1.0f64;
    for (x, y) in points {
        let j = j_coefficients(t, x, y, Direction::Inverse)?;
        j1_sup = j1_sup.max(spectral_norm(&j.j1));
        let inv = j.j3.clone().try_inverse().ok_or_else(|| Error::Invalid("singular J3".into()))?;
        j3_bound = j3_bound.max(spectral_norm(&j.j3)).max(spectral_norm(&inv));
    }
    let s_factor = (1.0 + 4.0 * j1_sup * j1_sup).sqrt();
    let c2 = j3_bound.powi(-2);
    let derived_constant = 0.25f64.min(c2).min(c2 / (s_factor * s_factor)) * base.constant;
    let zetas = covectors(covector_count, p.layout.n(), 1.0, 1e4);
    let sign = f64::from(base.sign);
    let ratios: Vec<f64> = points
        .par_iter()
        .map(|(x, y)| {
            zetas
                .iter()
                .map(|z| {
                    let (xi, eta) = split(z, nx);
                    let s = twisted_principal_symbol(p, t, x, y, xi, eta)?;
                    Ok(sign * s.re / z.iter().map(|v| v * v).sum::<f64>())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let worst_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(TwistedEllipticity {
        passed: worst_ratio >= derived_constant * (1.0 - 1e-6),
        base,
        j1_sup,
        j3_bound,
        s_factor,
        derived_constant,
        worst_ratio,
        samples: ratios.len(),
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_complex::Complex64;

    use super::*;
    use crate::geometry::{MoleculeConfig, Nucleus};
    use crate::operators::{Layout, ScalarCoefficient, Term};
    use crate::twist::{build_twist, CutoffFunction};

    fn pts(n: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
        (0..n).map(|i| (vec![0.01 * i as f64], vec![0.1 * i as f64 - 1.0])).collect()
    }

    #[test]
    fn laplacian_has_unit_constant() {
        let c = ellipticity_certificate(&Diff2Operator::laplacian(Layout::new(1, 1, 1)), &pts(5), 200).unwrap();
        assert_eq!(c.sign, 1);
        assert!((c.constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_laplacian_flips_sign() {
        let minus: ScalarCoefficient = Arc::new(|_, _| Complex64::new(-1.0, 0.0));
        let op = Diff2Operator::from_terms(
            "plus-delta",
            Layout::new(1, 1, 1),
            vec![
                Term { alpha: vec![2], beta: vec![0], coefficient: minus.clone() },
                Term { alpha: vec![0], beta: vec![2], coefficient: minus },
            ],
        )
        .unwrap();
        let c = ellipticity_certificate(&op, &pts(3), 100).unwrap();
        assert_eq!(c.sign, -1);
        assert!((c.constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wave_operator_is_rejected() {
        let one: ScalarCoefficient = Arc::new(|_, _| Complex64::new(1.0, 0.0));
        let minus: ScalarCoefficient = Arc::new(|_, _| Complex64::new(-1.0, 0.0));
        // d_x^2 - d_y^2 = -D_x^2 + D_y^2
        let op = Diff2Operator::from_terms(
            "wave",
            Layout::new(1, 1, 1),
            vec![
                Term { alpha: vec![2], beta: vec![0], coefficient: minus },
                Term { alpha: vec![0], beta: vec![2], coefficient: one },
            ],
        )
        .unwrap();
        match ellipticity_certificate(&op, &pts(3), 100) {
            Err(Error::NotElliptic(msg)) => assert!(msg.contains("xi")),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn trivial_twist_keeps_quarter_bound() {
        let nuclei = vec![Nucleus { position: vec![4.0], charge: 1.0 }];
        let cfg = MoleculeConfig::new(1, nuclei, 2, 1).unwrap();
        let t = build_twist(&cfg, &[0.0], CutoffFunction::bump(1), 0.5).unwrap();
        let lap = Diff2Operator::laplacian(Layout::new(1, 1, 1));
        let points: Vec<_> = (0..20).map(|i| (vec![0.0], vec![-6.0 + 0.6 * i as f64])).collect();
        let r = twisted_ellipticity(&lap, &t, &points, 300).unwrap();
        assert!((r.j3_bound - 1.0).abs() < 1e-14);
        assert!(r.derived_constant >= 0.25 / r.s_factor.powi(2) - 1e-14);
        assert!(r.passed && r.worst_ratio >= 0.25);
    }
}
