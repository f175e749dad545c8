use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{apply_operator, quantize, SymbolFunction};
use crate::error::{Error, Result};
use crate::numerics::{norm, plateau};
use crate::operators::{ellipticity_certificate, Diff2Operator, EllipticityCertificate};
use crate::unitary::GridWavefunction;

/// Radial frequency cutoff, 1 on `|zeta| <= inner` and 0 beyond `outer`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyCutoff {
    pub inner: f64,
    pub outer: f64,
}

impl Default for FrequencyCutoff {
    fn default() -> Self {
        Self { inner: 1.0, outer: 2.0 }
    }
}

impl FrequencyCutoff {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner >= 1.0 && outer > inner) {
            return Err(Error::Invalid(format!("frequency cutoff needs 1 <= inner < outer, got {inner}, {outer}")));
        }
        Ok(Self { inner, outer })
    }

    pub fn value(&self, zeta: &[f64]) -> f64 {
        plateau(norm(zeta), self.inner, self.outer)
    }
}

/// `Q` and `R = I - Q P` built from `q1 = (1 - tau) / sigma_P`.
///
/// `R3 = Q1 P - I`, `Q = (I - R3) Q1`, hence `R = R3^2`.
#[derive(Clone, Debug)]
pub struct Parametrix {
    pub operator: Diff2Operator,
    pub cutoff: FrequencyCutoff,
    pub q1: SymbolFunction,
    pub certificate: EllipticityCertificate,
}

/// Builds the parametrix of a globally elliptic operator; ellipticity is
/// certified on `points` before anything else.
pub fn build_parametrix(
    p_hat: &Diff2Operator,
    cutoff: FrequencyCutoff,
    points: &[(Vec<f64>, Vec<f64>)],
    covector_count: usize,
) -> Result<Parametrix> {
    let certificate = ellipticity_certificate(p_hat, points, covector_count)?;
    let sigma = SymbolFunction::from_operator(p_hat);
    let layout = p_hat.layout;
    let q1 = SymbolFunction::new(-2, layout, move |z, zeta| {
        let w = 1.0 - cutoff.value(zeta);
        if w == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            w / sigma.eval(z, zeta)
        }
    });
    Ok(Parametrix { operator: p_hat.clone(), cutoff, q1, certificate })
}

impl Parametrix {
    pub fn apply_p(&self, u: &GridWavefunction) -> GridWavefunction {
        apply_operator(&self.operator, u)
    }

    pub fn apply_q1(&self, u: &GridWavefunction) -> GridWavefunction {
        quantize(&self.q1, u)
    }

    /// `R3 u = Q1 P u - u`.
    pub fn apply_r3(&self, u: &GridWavefunction) -> GridWavefunction {
        self.apply_q1(&self.apply_p(u)).sub(u)
    }

    /// `Q u = Q1 u - R3 Q1 u`.
    pub fn apply_q(&self, u: &GridWavefunction) -> GridWavefunction {
        let q1u = self.apply_q1(u);
        q1u.sub(&self.apply_r3(&q1u))
    }

    /// `R u = u - Q P u`.
    pub fn apply_r(&self, u: &GridWavefunction) -> GridWavefunction {
        u.sub(&self.apply_q(&self.apply_p(u)))
    }

    /// `R3 (R3 u)`, the remainder through the other association.
    pub fn apply_r_composed(&self, u: &GridWavefunction) -> GridWavefunction {
        self.apply_r3(&self.apply_r3(u))
    }
}
