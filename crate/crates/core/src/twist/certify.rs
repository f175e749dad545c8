use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sample_ball, TwistMap};
use crate::error::Result;
use crate::numerics::linalg::spectral_norm;
use crate::numerics::{dist, norm};

/// Worst sampled value of one bound; `margin = bound - worst`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub bound: f64,
    pub worst: f64,
    pub margin: f64,
    pub passed: bool,
    pub witness: Option<String>,
}

impl BoundCheck {
    fn new(name: &str, bound: f64) -> Self {
        Self { name: name.into(), bound, worst: f64::NEG_INFINITY, margin: f64::INFINITY, passed: true, witness: None }
    }

    /// Records `value`, which must stay at or below the bound.
    fn observe(&mut self, value: f64, witness: impl FnOnce() -> String) {
        if value > self.worst || value.is_nan() {
            self.worst = value;
            self.margin = self.bound - value;
            let ok = value <= self.bound * (1.0 + 1e-12) + 1e-15;
            if !ok && self.passed {
                self.witness = Some(witness());
            }
            self.passed &= ok;
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwistCertificate {
    pub samples: usize,
    pub checks: Vec<BoundCheck>,
    pub passed: bool,
}

impl TwistMap {
    /// Samples the Lipschitz, contraction, bi-Lipschitz, support and inverse
    /// Jacobian bounds at `samples` random points of `Omega(delta0)`.
    pub fn certify<R: Rng>(&self, rng: &mut R, samples: usize) -> Result<TwistCertificate> {
        let q = self.contraction_bound();
        let lip = self.tau.lipschitz() / self.r0;
        let c_inv = 1.0 + q + 1.0 / (1.0 - q);
        let mut lipschitz = BoundCheck::new("cutoff_lipschitz", 1.0);
        let mut contraction = BoundCheck::new("contraction", q);
        let mut lower = BoundCheck::new("bi_lipschitz_lower", 1.0);
        let mut upper = BoundCheck::new("bi_lipschitz_upper", 1.0);
        let mut support = BoundCheck::new("identity_outside_support", 0.0);
        let mut inv_sum = BoundCheck::new("jacobian_norm_sum", c_inv);
        let mut inv_low = BoundCheck::new("jacobian_norm_sum_lower", 1.0);
        let reach = self.support_radius + self.r0;
        for s in 0..samples {
            let x = self.sample_domain(rng, 1.0);
            let j = s % self.m;
            let centre = &self.x0[j * self.d..(j + 1) * self.d];
            let mut z = sample_ball(rng, self.d, 1.2 * self.r0);
            z.iter_mut().zip(centre).for_each(|(v, c)| *v += c);
            let step = sample_ball(rng, self.d, 0.5 * self.r0);
            let z2: Vec<f64> = z.iter().zip(&step).map(|(a, b)| a + b).collect();
            let gap = dist(&z, &z2);
            if gap > 0.0 {
                for jj in 0..self.m {
                    let lhs = (self.weight(jj, &z) - self.weight(jj, &z2)).abs();
                    lipschitz.observe(lhs / (lip * gap), || format!("z = {z:?}, z' = {z2:?}"));
                }
                let fgap = dist(&self.forward_unchecked(&x, &z), &self.forward_unchecked(&x, &z2));
                lower.observe((1.0 - self.eta0) * gap / fgap, || format!("x = {x:?}, z = {z:?}"));
                upper.observe(fgap / ((1.0 + self.eta0) * gap), || format!("x = {x:?}, z = {z:?}"));
            }
            let a = self.dz_unchecked(&x, &z);
            let dev = spectral_norm(&(&a - nalgebra::DMatrix::identity(self.d, self.d)));
            contraction.observe(dev, || format!("x = {x:?}, z = {z:?}"));
            if let Some(ai) = a.clone().try_inverse() {
                let sum = spectral_norm(&a) + spectral_norm(&ai);
                inv_sum.observe(sum, || format!("x = {x:?}, z = {z:?}"));
                inv_low.observe(1.0 / (sum * c_inv), || format!("x = {x:?}, z = {z:?}"));
            } else {
                inv_sum.observe(f64::INFINITY, || format!("singular at x = {x:?}, z = {z:?}"));
            }
            let mut far = sample_ball(rng, self.d, 1.0);
            let n = norm(&far).max(1e-3);
            far.iter_mut().for_each(|v| *v *= (self.support_radius + reach * rng.gen::<f64>()) / n);
            let fa = self.dz_unchecked(&x, &far) - nalgebra::DMatrix::identity(self.d, self.d);
            let dev = fa.amax().max(self.dx_at(&far).amax());
            support.observe(dev, || format!("z = {far:?}"));
        }
        let checks = vec![lipschitz, contraction, lower, upper, support, inv_sum, inv_low];
        let passed = checks.iter().all(|c| c.passed);
        Ok(TwistCertificate { samples, checks, passed })
    }
}
