use serde::{Deserialize, Serialize};

use super::factorial;

/// Reference growth in a bound of the form `|D^n g| <= A^(n+1) w(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Growth {
    /// `w(n) = n!`
    Factorial,
    /// `w(n) = (1 + n)^n`
    PowerTower,
}

impl Growth {
    pub fn weight(self, n: usize) -> f64 {
        match self {
            Growth::Factorial => factorial(n),
            Growth::PowerTower => ((1 + n) as f64).powi(n as i32),
        }
    }
}

/// Smallest constant `A` with `m[n] <= A^(n+1) w(n)` for every listed order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthFit {
    pub growth: Growth,
    /// The constant each order alone would need.
    pub per_order: Vec<f64>,
    pub constant: f64,
}

impl GrowthFit {
    pub fn new(magnitudes: &[f64], growth: Growth) -> Self {
        let per_order: Vec<f64> = magnitudes
            .iter()
            .enumerate()
            .map(|(n, &m)| (m / growth.weight(n)).powf(1.0 / (n + 1) as f64))
            .collect();
        let constant = per_order.iter().fold(0.0f64, |a, &c| if c.is_nan() { f64::NAN } else { a.max(c) });
        Self { growth, per_order, constant }
    }

    /// True when the bound holds with the fitted constant at every order.
    pub fn holds(&self, magnitudes: &[f64]) -> bool {
        magnitudes
            .iter()
            .enumerate()
            .all(|(n, &m)| m <= self.constant.powi(n as i32 + 1) * self.growth.weight(n) * (1.0 + 1e-12))
    }
}
