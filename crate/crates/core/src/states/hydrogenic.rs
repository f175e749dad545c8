use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::{BoundState, Derivatives, StateKind};
use crate::error::{Error, Result};
use crate::numerics::norm;

/// `psi = exp(-Z |x| / 2)` with `E = -Z^2 / 4` for `-Delta - Z / |x|`.
pub fn hydrogenic_state(charge: f64, dim: usize) -> Result<BoundState> {
    if dim != 3 {
        return Err(Error::Unsupported(format!("hydrogenic state needs d = 3, got {dim}")));
    }
    if !(charge > 0.0) {
        return Err(Error::Invalid(format!("nuclear charge must be positive, got {charge}")));
    }
    let a = 0.5 * charge;
    let derivatives = Arc::new(move |z: &[f64]| {
        let r = norm(z);
        let value = (-a * r).exp();
        let gradient = if r > 0.0 { z.iter().map(|v| Complex64::new(-a * v / r * value, 0.0)).collect() } else { vec![Complex64::new(0.0, 0.0); 3] };
        // psi'' + 2 psi' / r
        let laplacian = Complex64::new((a * a - 2.0 * a / r) * value, 0.0);
        Derivatives { value: Complex64::new(value, 0.0), gradient, laplacian }
    });
    Ok(BoundState::new(
        StateKind::Hydrogenic { charge },
        3,
        1,
        -0.25 * charge * charge,
        8.0 * PI / charge.powi(3),
        1.0 / charge,
        Arc::new(move |z| Complex64::new((-a * norm(z)).exp(), 0.0)),
        Some(derivatives),
    ))
}
