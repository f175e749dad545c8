//! The twist map `f(x; z)` that drags the points `x0_j` to `x_j` while
//! fixing the nuclei, its inverse, Jacobians and the certified bounds.

mod certify;
mod cutoff;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use certify::{BoundCheck, TwistCertificate};
pub use cutoff::CutoffFunction;

use crate::error::{Error, Result};
use crate::geometry::{point, separation_radius, MoleculeConfig};
use crate::numerics::{dist, norm};

/// Derivatives of `f` and `f^{-1}` at one point; the inverse quantities are
/// evaluated at the image `w = f(x; z)`.
#[derive(Clone, Debug)]
pub struct JacobianPackage {
    /// `d_x f`, size `d x md`.
    pub dx: DMatrix<f64>,
    /// `d_z f`, size `d x d`.
    pub dz: DMatrix<f64>,
    /// `d_w f^{-1}(x; w)`.
    pub dz_inv: DMatrix<f64>,
    /// `d_x f^{-1}(x; w)`, size `d x md`.
    pub dx_inv: DMatrix<f64>,
}

/// Derivatives of the lifted map `F(x; y) = (f(x; y_1), ..., f(x; y_p))`.
#[derive(Clone, Debug)]
pub struct LiftedJacobians {
    /// `d_x F`, size `pd x md`.
    pub dx: DMatrix<f64>,
    /// `d_y F`, block diagonal `pd x pd`.
    pub dy: DMatrix<f64>,
    /// `d_y F^{-1}` at `F(x; y)`.
    pub dy_inv: DMatrix<f64>,
    /// `d_x F^{-1}` at `F(x; y)`.
    pub dx_inv: DMatrix<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct InverseSolver {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for InverseSolver {
    fn default() -> Self {
        Self { tolerance: 1e-12, max_iterations: 100 }
    }
}

#[derive(Clone, Debug)]
pub struct TwistMap {
    x0: Vec<f64>,
    nuclei: Vec<Vec<f64>>,
    r0: f64,
    delta0: f64,
    eta0: f64,
    m: usize,
    p: usize,
    d: usize,
    support_radius: f64,
    tau: CutoffFunction,
    solver: InverseSolver,
}

/// Builds the twist centred at the collision-free tuple `x0`.
///
/// `p` internal points are taken from the configuration.
pub fn build_twist(config: &MoleculeConfig, x0: &[f64], tau: CutoffFunction, eta0: f64) -> Result<TwistMap> {
    if !(eta0 > 0.0 && eta0 < 1.0) {
        return Err(Error::Invalid(format!("eta0 = {eta0} must lie in (0, 1)")));
    }
    let d = config.dim();
    if tau.dim() != d {
        return Err(Error::Dimension(format!("cutoff of dimension {} for {d}-d configuration", tau.dim())));
    }
    let m = config.count_points(x0)?;
    let r0 = separation_radius(config, x0)?;
    let q = eta0.min(1.0 - eta0);
    let delta0 = (0.5 * r0).min(r0 * q / (m as f64 * tau.lipschitz()));
    let support_radius = (0..m).map(|j| norm(point(x0, d, j))).fold(0.0, f64::max) + r0;
    Ok(TwistMap {
        x0: x0.to_vec(),
        nuclei: config.nuclei().iter().map(|n| n.position.clone()).collect(),
        r0,
        delta0,
        eta0,
        m,
        p: config.internal(),
        d,
        support_radius,
        tau,
        solver: InverseSolver::default(),
    })
}

impl TwistMap {
    /// Replaces the domain radius; values above `r0 / 2` are rejected.
    pub fn with_delta0(mut self, delta0: f64) -> Result<Self> {
        if !(delta0 > 0.0) || delta0 > 0.5 * self.r0 {
            return Err(Error::Invalid(format!("delta0 = {delta0} must lie in (0, r0/2 = {}]", 0.5 * self.r0)));
        }
        self.delta0 = delta0;
        Ok(self)
    }

    /// Shrinks the separation radius; `delta0` and the support follow.
    pub fn with_r0(mut self, r0: f64) -> Result<Self> {
        if !(r0 > 0.0) || r0 > self.r0 {
            return Err(Error::Invalid(format!("r0 = {r0} must lie in (0, {}]", self.r0)));
        }
        let q = self.contraction_bound();
        self.delta0 = (0.5 * r0).min(r0 * q / (self.m as f64 * self.tau.lipschitz()));
        self.support_radius += r0 - self.r0;
        self.r0 = r0;
        Ok(self)
    }

    pub fn with_solver(mut self, solver: InverseSolver) -> Self {
        self.solver = solver;
        self
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }
    pub fn nuclei(&self) -> &[Vec<f64>] {
        &self.nuclei
    }
    pub fn r0(&self) -> f64 {
        self.r0
    }
    pub fn delta0(&self) -> f64 {
        self.delta0
    }
    pub fn eta0(&self) -> f64 {
        self.eta0
    }
    pub fn external_count(&self) -> usize {
        self.m
    }
    pub fn internal_count(&self) -> usize {
        self.p
    }
    pub fn dim(&self) -> usize {
        self.d
    }
    /// Radius beyond which `f(x; .)` is the identity.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }
    pub fn cutoff(&self) -> &CutoffFunction {
        &self.tau
    }
    /// `min(eta0, 1 - eta0)`.
    pub fn contraction_bound(&self) -> f64 {
        self.eta0.min(1.0 - self.eta0)
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.x0.len() && (0..self.m).all(|j| dist(point(x, self.d, j), point(&self.x0, self.d, j)) < self.delta0)
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.x0.len() {
            return Err(Error::Dimension(format!("external tuple of length {}, expected {}", x.len(), self.x0.len())));
        }
        if !self.in_domain(x) {
            return Err(Error::OutsideDomain(format!("x is not within delta0 = {} of x0", self.delta0)));
        }
        Ok(())
    }

    fn check_point(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.d {
            return Err(Error::Dimension(format!("point of length {}, expected {}", z.len(), self.d)));
        }
        Ok(())
    }

    fn scaled(&self, j: usize, z: &[f64]) -> Vec<f64> {
        point(&self.x0, self.d, j).iter().zip(z).map(|(c, v)| (v - c) / self.r0).collect()
    }

    /// `tau((z - x0_j) / r0)`.
    pub fn weight(&self, j: usize, z: &[f64]) -> f64 {
        self.tau.value(&self.scaled(j, z))
    }

    /// Gradient in `z` of `tau((z - x0_j) / r0)`.
    pub fn weight_gradient(&self, j: usize, z: &[f64]) -> Vec<f64> {
        let mut g = self.tau.gradient(&self.scaled(j, z));
        g.iter_mut().for_each(|v| *v /= self.r0);
        g
    }

    /// Hessian in `z` of `tau((z - x0_j) / r0)`.
    pub fn weight_hessian(&self, j: usize, z: &[f64]) -> DMatrix<f64> {
        self.tau.hessian(&self.scaled(j, z)) / (self.r0 * self.r0)
    }

    pub(crate) fn forward_unchecked(&self, x: &[f64], z: &[f64]) -> Vec<f64> {
        let mut w = z.to_vec();
        for j in 0..self.m {
            let t = self.weight(j, z);
            if t != 0.0 {
                let (xj, cj) = (point(x, self.d, j), point(&self.x0, self.d, j));
                for a in 0..self.d {
                    w[a] += t * (xj[a] - cj[a]);
                }
            }
        }
        w
    }

    pub(crate) fn dz_unchecked(&self, x: &[f64], z: &[f64]) -> DMatrix<f64> {
        let mut a = DMatrix::identity(self.d, self.d);
        for j in 0..self.m {
            let g = self.weight_gradient(j, z);
            let (xj, cj) = (point(x, self.d, j), point(&self.x0, self.d, j));
            for r in 0..self.d {
                for c in 0..self.d {
                    a[(r, c)] += (xj[r] - cj[r]) * g[c];
                }
            }
        }
        a
    }

    pub(crate) fn dx_at(&self, z: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.d, self.m * self.d);
        for j in 0..self.m {
            let t = self.weight(j, z);
            for a in 0..self.d {
                out[(a, j * self.d + a)] = t;
            }
        }
        out
    }

    pub(crate) fn inverse_unchecked(&self, x: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        let tol = self.solver.tolerance * (1.0 + norm(w));
        let residual = |z: &[f64]| -> Vec<f64> { self.forward_unchecked(x, z).iter().zip(w).map(|(a, b)| a - b).collect() };
        let mut z = w.to_vec();
        let mut r = residual(&z);
        let mut rn = norm(&r);
        for _ in 0..self.solver.max_iterations {
            let newton = self
                .dz_unchecked(x, &z)
                .lu()
                .solve(&DVector::from_column_slice(&r))
                .map(|s| z.iter().zip(s.iter()).map(|(a, b)| a - b).collect::<Vec<f64>>());
            let converged = rn <= tol;
            let next = match newton {
                Some(cand) => {
                    let cr = residual(&cand);
                    if norm(&cr) <= rn {
                        Some((cand, cr))
                    } else {
                        None
                    }
                }
                None => None,
            };
            let (nz, nr) = next.unwrap_or_else(|| {
                let shift = self.forward_unchecked(x, &z);
                let fz: Vec<f64> = w.iter().zip(&shift).zip(&z).map(|((w, s), z)| w - (s - z)).collect();
                let fr = residual(&fz);
                (fz, fr)
            });
            z = nz;
            r = nr;
            rn = norm(&r);
            if converged {
                return Ok(z);
            }
        }
        if rn <= tol {
            return Ok(z);
        }
        Err(Error::NoConvergence { iterations: self.solver.max_iterations, residual: rn })
    }

    /// `f(x; z)`.
    pub fn forward(&self, x: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(x)?;
        self.check_point(z)?;
        Ok(self.forward_unchecked(x, z))
    }

    /// `f^{-1}(x; w)` by Newton iteration with a fixed-point fallback.
    pub fn inverse(&self, x: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(x)?;
        self.check_point(w)?;
        self.inverse_unchecked(x, w)
    }

    pub fn jacobians(&self, x: &[f64], z: &[f64]) -> Result<JacobianPackage> {
        self.check_domain(x)?;
        self.check_point(z)?;
        let dz = self.dz_unchecked(x, z);
        let dx = self.dx_at(z);
        let dz_inv = dz
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Invalid("singular twist Jacobian".into()))?;
        let dx_inv = -(&dz_inv * &dx);
        Ok(JacobianPackage { dx, dz, dz_inv, dx_inv })
    }

    /// `F(x; y)` for the internal tuple `y`.
    pub fn lift(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(x)?;
        self.check_internal(y)?;
        Ok(self.lift_unchecked(x, y))
    }

    pub(crate) fn lift_unchecked(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        y.chunks(self.d).flat_map(|z| self.forward_unchecked(x, z)).collect()
    }

    /// `F^{-1}(x; y)`.
    pub fn lift_inverse(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(x)?;
        self.check_internal(y)?;
        self.lift_inverse_unchecked(x, y)
    }

    pub(crate) fn lift_inverse_unchecked(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(y.len());
        for z in y.chunks(self.d) {
            out.extend(self.inverse_unchecked(x, z)?);
        }
        Ok(out)
    }

    pub fn lift_jacobians(&self, x: &[f64], y: &[f64]) -> Result<LiftedJacobians> {
        self.check_domain(x)?;
        self.check_internal(y)?;
        let (d, pd, md) = (self.d, y.len(), self.m * self.d);
        let mut out = LiftedJacobians {
            dx: DMatrix::zeros(pd, md),
            dy: DMatrix::zeros(pd, pd),
            dy_inv: DMatrix::zeros(pd, pd),
            dx_inv: DMatrix::zeros(pd, md),
        };
        for (k, z) in y.chunks(d).enumerate() {
            let jp = self.jacobians(x, z)?;
            out.dx.view_mut((k * d, 0), (d, md)).copy_from(&jp.dx);
            out.dy.view_mut((k * d, k * d), (d, d)).copy_from(&jp.dz);
            out.dy_inv.view_mut((k * d, k * d), (d, d)).copy_from(&jp.dz_inv);
            out.dx_inv.view_mut((k * d, 0), (d, md)).copy_from(&jp.dx_inv);
        }
        Ok(out)
    }

    fn check_internal(&self, y: &[f64]) -> Result<()> {
        if y.is_empty() || y.len() % self.d != 0 {
            return Err(Error::Dimension(format!("internal tuple of length {}", y.len())));
        }
        Ok(())
    }

    /// Gradients of `log |det d_z f(x; z)|` with respect to `x` and `z`.
    pub fn log_det_gradients(&self, x: &[f64], z: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let a = self.dz_unchecked(x, z);
        let ainv = a.try_inverse().unwrap_or_else(|| DMatrix::from_element(self.d, self.d, f64::NAN));
        let ainv_t = ainv.transpose();
        let mut gx = vec![0.0; self.m * self.d];
        let mut gz = DVector::zeros(self.d);
        for j in 0..self.m {
            let g = DVector::from_vec(self.weight_gradient(j, z));
            let v = &ainv_t * &g;
            gx[j * self.d..(j + 1) * self.d].copy_from_slice(v.as_slice());
            let disp = DVector::from_iterator(
                self.d,
                point(x, self.d, j).iter().zip(point(&self.x0, self.d, j)).map(|(a, b)| a - b),
            );
            gz += self.weight_hessian(j, z) * (&ainv * disp);
        }
        (gx, gz.as_slice().to_vec())
    }

    /// Uniform sample of `Omega(delta0)` shrunk by `shrink` in `(0, 1]`.
    pub fn sample_domain<R: Rng>(&self, rng: &mut R, shrink: f64) -> Vec<f64> {
        let mut x = self.x0.clone();
        for j in 0..self.m {
            let v = sample_ball(rng, self.d, self.delta0 * shrink);
            for a in 0..self.d {
                x[j * self.d + a] += v[a];
            }
        }
        x
    }
}

/// Uniform point of the open ball of radius `radius` centred at the origin.
pub fn sample_ball<R: Rng>(rng: &mut R, d: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n < 1.0 {
            return v.into_iter().map(|c| c * radius * (1.0 - 1e-12)).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Nucleus;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn config3() -> MoleculeConfig {
        let nuclei = vec![
            Nucleus { position: vec![1.5, 0.0, 0.0], charge: 1.0 },
            Nucleus { position: vec![-1.0, 1.0, 0.5], charge: 2.0 },
        ];
        MoleculeConfig::new(3, nuclei, 4, 2).unwrap()
    }

    fn twist3() -> TwistMap {
        let x0 = [0.0, 0.0, 0.0, 0.2, 0.9, -0.6];
        build_twist(&config3(), &x0, CutoffFunction::bump(3), 0.5).unwrap()
    }

    #[test]
    fn delta0_from_lipschitz_constant() {
        let nuclei = vec![Nucleus { position: vec![1.0], charge: 1.0 }];
        let c = MoleculeConfig::new(1, nuclei, 2, 1).unwrap();
        let tau = CutoffFunction::custom(
            1,
            |z| if z[0].abs() < 1.0 { (1.0 - z[0].abs()).powi(2) * (1.0 + 2.0 * z[0].abs()) } else { 0.0 },
            |z| {
                let a = z[0].abs();
                if a < 1.0 { vec![-6.0 * a * (1.0 - a) * z[0].signum()] } else { vec![0.0] }
            },
        )
        .unwrap();
        // sup |tau'| = 1.5 for this profile
        let t = build_twist(&c, &[0.0], tau, 0.5).unwrap();
        assert!((t.delta0() - 0.5 / 1.5).abs() < 1e-3);
    }

    #[test]
    fn pins_centres_and_nuclei() {
        let t = twist3();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = t.sample_domain(&mut rng, 1.0);
        for j in 0..2 {
            let w = t.forward(&x, point(t.x0(), 3, j)).unwrap();
            assert!(dist(&w, point(&x, 3, j)) <= 1e-14);
        }
        for n in t.nuclei().to_vec() {
            assert_eq!(t.forward(&x, &n).unwrap(), n);
        }
    }

    #[test]
    fn identity_far_away() {
        let t = twist3();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = t.sample_domain(&mut rng, 1.0);
        let z = [t.support_radius() + 0.1, 0.0, 0.0];
        assert_eq!(t.forward(&x, &z).unwrap(), z.to_vec());
    }

    #[test]
    fn rejects_outside_domain() {
        let t = twist3();
        let mut x = t.x0().to_vec();
        x[0] += t.delta0();
        assert!(matches!(t.forward(&x, &[0.0, 0.0, 0.0]), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn delta0_override_bounded_by_half_radius() {
        let t = twist3();
        let r0 = t.r0();
        assert!(t.clone().with_delta0(0.6 * r0).is_err());
        assert!(t.clone().with_delta0(0.4 * r0).is_ok());
        assert!(t.clone().with_r0(1.1 * r0).is_err());
        let s = t.with_r0(0.5 * r0).unwrap();
        assert!((s.r0() - 0.5 * r0).abs() < 1e-15 && s.delta0() <= 0.25 * r0);
    }

    #[test]
    fn inverse_round_trip() {
        let t = twist3();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let x = t.sample_domain(&mut rng, 1.0);
            let z = sample_ball(&mut rng, 3, 2.5);
            let w = t.forward(&x, &z).unwrap();
            let back = t.inverse(&x, &w).unwrap();
            assert!(dist(&back, &z) < 1e-12);
        }
    }

    #[test]
    fn log_det_gradients_match_differences() {
        let t = twist3();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = t.sample_domain(&mut rng, 0.9);
        let z = [0.3, 0.2, -0.1];
        let ld = |x: &[f64], z: &[f64]| t.dz_unchecked(x, z).determinant().abs().ln();
        let (gx, gz) = t.log_det_gradients(&x, &z);
        let h = 1e-6;
        for i in 0..x.len() {
            let (mut p, mut q) = (x.clone(), x.clone());
            p[i] += h;
            q[i] -= h;
            assert!(((ld(&p, &z) - ld(&q, &z)) / (2.0 * h) - gx[i]).abs() < 1e-7);
        }
        for i in 0..3 {
            let (mut p, mut q) = (z, z);
            p[i] += h;
            q[i] -= h;
            assert!(((ld(&x, &p) - ld(&x, &q)) / (2.0 * h) - gz[i]).abs() < 1e-7);
        }
    }
}
