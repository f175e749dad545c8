use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{norm, qmc::halton};

type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type MatrixField = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

#[derive(Clone)]
enum Profile {
    Bump,
    Custom { value: ScalarField, gradient: VectorField, hessian: Option<MatrixField> },
}

/// Smooth cutoff equal to one at the origin and vanishing outside the unit ball.
#[derive(Clone)]
pub struct CutoffFunction {
    dim: usize,
    profile: Profile,
    lipschitz: f64,
}

impl std::fmt::Debug for CutoffFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.profile {
            Profile::Bump => "bump",
            Profile::Custom { .. } => "custom",
        };
        f.debug_struct("CutoffFunction").field("kind", &kind).field("lipschitz", &self.lipschitz).finish()
    }
}

fn bump_radial_slope(rho: f64) -> f64 {
    let s = rho * rho;
    if s >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - s;
    (1.0 - 1.0 / q).exp() * 2.0 * rho / (q * q)
}

fn bump_lipschitz() -> f64 {
    let n = 2000;
    let (mut best, mut at) = (0.0, 0.0);
    for i in 1..n {
        let rho = i as f64 / n as f64;
        let v = bump_radial_slope(rho);
        if v > best {
            best = v;
            at = rho;
        }
    }
    let (mut a, mut b) = (at - 1.0 / n as f64, at + 1.0 / n as f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if bump_radial_slope(c) > bump_radial_slope(d) {
            b = d;
        } else {
            a = c;
        }
    }
    bump_radial_slope(0.5 * (a + b)).max(best)
}

impl CutoffFunction {
    /// `exp(1 - 1/(1 - |z|^2))` inside the unit ball, zero outside.
    pub fn bump(dim: usize) -> Self {
        Self { dim, profile: Profile::Bump, lipschitz: bump_lipschitz() }
    }

    /// User-supplied cutoff. The sup of the gradient is estimated on a
    /// low-discrepancy sample of the unit ball.
    pub fn custom(
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        let value: ScalarField = Arc::new(value);
        let gradient: VectorField = Arc::new(gradient);
        let origin = vec![0.0; dim];
        if (value(&origin) - 1.0).abs() > 1e-14 {
            return Err(Error::Invalid(format!("cutoff equals {} at the origin", value(&origin))));
        }
        let mut lipschitz = 0.0f64;
        for i in 0..20_000u64 {
            let u = halton(i, dim, None);
            let z: Vec<f64> = u.iter().map(|v| 4.0 * v - 2.0).collect();
            let r = norm(&z);
            let t = value(&z);
            if r >= 1.0 && t != 0.0 {
                return Err(Error::Invalid(format!("cutoff is {t} at radius {r}")));
            }
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Invalid(format!("cutoff value {t} outside [0, 1]")));
            }
            if r < 1.0 {
                lipschitz = lipschitz.max(norm(&gradient(&z)));
            }
        }
        Ok(Self { dim, profile: Profile::Custom { value, gradient, hessian: None }, lipschitz })
    }

    pub fn with_hessian(mut self, h: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        if let Profile::Custom { hessian, .. } = &mut self.profile {
            *hessian = Some(Arc::new(h));
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sup of the gradient norm.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        match &self.profile {
            Profile::Bump => {
                let s: f64 = z.iter().map(|v| v * v).sum();
                if s >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - s)).exp()
                }
            }
            Profile::Custom { value, .. } => value(z),
        }
    }

    pub fn gradient(&self, z: &[f64]) -> Vec<f64> {
        match &self.profile {
            Profile::Bump => {
                let s: f64 = z.iter().map(|v| v * v).sum();
                if s >= 1.0 {
                    return vec![0.0; z.len()];
                }
                let q = 1.0 - s;
                let c = -2.0 * (1.0 - 1.0 / q).exp() / (q * q);
                z.iter().map(|v| c * v).collect()
            }
            Profile::Custom { gradient, .. } => gradient(z),
        }
    }

    pub fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        let n = z.len();
        match &self.profile {
            Profile::Bump => {
                let s: f64 = z.iter().map(|v| v * v).sum();
                if s >= 1.0 {
                    return DMatrix::zeros(n, n);
                }
                let q = 1.0 - s;
                let t = (1.0 - 1.0 / q).exp();
                let g1 = -1.0 / (q * q);
                let g2 = -2.0 / (q * q * q);
                DMatrix::from_fn(n, n, |i, j| {
                    let diag = if i == j { 2.0 * g1 } else { 0.0 };
                    t * (4.0 * z[i] * z[j] * (g1 * g1 + g2) + diag)
                })
            }
            Profile::Custom { hessian: Some(h), .. } => h(z),
            Profile::Custom { gradient, .. } => {
                let h = 1e-5;
                let mut out = DMatrix::zeros(n, n);
                let mut p = z.to_vec();
                for j in 0..n {
                    p[j] = z[j] + h;
                    let gp = gradient(&p);
                    p[j] = z[j] - h;
                    let gm = gradient(&p);
                    p[j] = z[j];
                    for i in 0..n {
                        out[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
                    }
                }
                0.5 * (&out + out.transpose())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_basics() {
        let t = CutoffFunction::bump(3);
        assert_eq!(t.value(&[0.0, 0.0, 0.0]), 1.0);
        assert_eq!(t.value(&[1.0, 0.0, 0.0]), 0.0);
        assert_eq!(t.value(&[0.0, 2.0, 0.0]), 0.0);
        assert!((t.lipschitz() - 2.17).abs() < 0.02, "{}", t.lipschitz());
    }

    #[test]
    fn bump_derivatives_match_differences() {
        let t = CutoffFunction::bump(3);
        let z = [0.3, -0.4, 0.2];
        let h = 1e-6;
        let g = t.gradient(&z);
        let hs = t.hessian(&z);
        for k in 0..3 {
            let mut p = z;
            let mut m = z;
            p[k] += h;
            m[k] -= h;
            assert!(((t.value(&p) - t.value(&m)) / (2.0 * h) - g[k]).abs() < 1e-8);
            let (gp, gm) = (t.gradient(&p), t.gradient(&m));
            for i in 0..3 {
                assert!(((gp[i] - gm[i]) / (2.0 * h) - hs[(i, k)]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn custom_must_equal_one_at_origin() {
        let r = CutoffFunction::custom(1, |z| 0.5 * (1.0 - z[0] * z[0]).max(0.0), |z| vec![-z[0]]);
        assert!(r.is_err());
    }

    #[test]
    fn custom_lipschitz_is_sampled() {
        let c = CutoffFunction::custom(
            1,
            |z| if z[0].abs() < 1.0 { (1.0 - z[0] * z[0]).powi(2) } else { 0.0 },
            |z| if z[0].abs() < 1.0 { vec![-4.0 * z[0] * (1.0 - z[0] * z[0])] } else { vec![0.0] },
        )
        .unwrap();
        // sup of 4 z (1 - z^2) is 8 / (3 sqrt 3)
        assert!((c.lipschitz() - 8.0 / (3.0 * 3f64.sqrt())).abs() < 1e-3);
    }
}
