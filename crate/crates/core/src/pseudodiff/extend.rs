use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{dist, plateau};
use crate::operators::{Coefficients, Diff2Operator, Domain, EllipticityCertificate};

/// Product of radial plateaus around each external centre.
#[derive(Clone, Debug, PartialEq)]
pub struct ExternalCutoff {
    pub centres: Vec<f64>,
    pub dim: usize,
    pub inner: f64,
    pub outer: f64,
}

impl ExternalCutoff {
    pub fn new(centres: Vec<f64>, dim: usize, inner: f64, outer: f64) -> Result<Self> {
        if dim == 0 || centres.len() % dim != 0 {
            return Err(Error::Dimension("cutoff centres do not match the dimension".into()));
        }
        if !(inner > 0.0 && outer > inner) {
            return Err(Error::Invalid(format!("cutoff radii must satisfy 0 < inner < outer, got {inner}, {outer}")));
        }
        Ok(Self { centres, dim, inner, outer })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        x.chunks(self.dim)
            .zip(self.centres.chunks(self.dim))
            .map(|(a, c)| plateau(dist(a, c), self.inner, self.outer))
            .product()
    }
}

/// Globally elliptic extension: second-order coefficients
/// `chi a + (1 - chi) sign C_P I`, lower-order coefficients `chi b`, `chi c`.
pub fn extend_operator(p: &Diff2Operator, chi: &ExternalCutoff, certificate: &EllipticityCertificate) -> Result<Diff2Operator> {
    if chi.dim != p.layout.d || chi.centres.len() != p.layout.nx() {
        return Err(Error::Dimension("cutoff does not match the operator layout".into()));
    }
    if let Domain::Balls { centres, radius } = &p.domain {
        let inside = centres.len() == chi.centres.len()
            && chi
                .centres
                .chunks(chi.dim)
                .zip(centres.chunks(chi.dim))
                .all(|(a, c)| dist(a, c) + chi.outer <= *radius);
        if !inside {
            return Err(Error::Geometry("cutoff support escapes the operator's domain".into()));
        }
    }
    let n = p.layout.n();
    let blend = certificate.sign as f64 * certificate.constant;
    let inner = p.clone();
    let chi = chi.clone();
    let coeffs = Arc::new(move |x: &[f64], y: &[f64]| {
        let w = chi.value(x);
        let identity = DMatrix::<Complex64>::identity(n, n) * Complex64::new((1.0 - w) * blend, 0.0);
        if w == 0.0 {
            return Coefficients { second: identity, ..Coefficients::zeros(n) };
        }
        let c = inner.coefficients(x, y);
        Coefficients { second: c.second * Complex64::new(w, 0.0) + identity, first: c.first * Complex64::new(w, 0.0), zeroth: c.zeroth * w }
    });
    Ok(Diff2Operator::new(format!("{} (extended)", p.name), p.layout, Domain::Everywhere, coeffs))
}
