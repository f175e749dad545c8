use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::quadrature::integrate_half_line;

/// Radial profile `f(|x|)` of a function on three-space.
#[derive(Clone)]
pub struct RadialProfile {
    value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    derivative: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl RadialProfile {
    pub fn new(value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { value: Arc::new(value), derivative: None }
    }

    pub fn with_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn value(&self, r: f64) -> f64 {
        (self.value)(r)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(r),
            None => {
                let h = 1e-5 * r.max(1.0);
                let lo = (r - h).max(0.0);
                ((self.value)(r + h) - (self.value)(lo)) / (r + h - lo)
            }
        }
    }
}

/// Ratio `int |f|^2/|x|^2 / int |grad f|^2` over three-space; at most 4.
pub fn hardy_ratio(f: &RadialProfile) -> Result<f64> {
    let num = integrate_half_line(|r| f.value(r).powi(2), 1e-13)?;
    let den = integrate_half_line(|r| (f.derivative(r) * r).powi(2), 1e-13)?;
    if den == 0.0 || num == 0.0 {
        return Err(Error::Invalid("profile has vanishing gradient or vanishes identically".into()));
    }
    Ok(num / den)
}
