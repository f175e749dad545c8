use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BoundState, ResidualCertificate};
use crate::error::{Error, Result};
use crate::operators::{Coefficients, Diff2Operator, Domain, Layout};
use crate::unitary::{Grid, GridWavefunction};

/// A second-order operator sampled on a periodic grid; coefficients are cached.
#[derive(Clone)]
pub struct GridHamiltonian {
    pub operator: Diff2Operator,
    pub grid: Grid,
    cache: Arc<Vec<Coefficients>>,
}

impl std::fmt::Debug for GridHamiltonian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridHamiltonian").field("operator", &self.operator).field("grid", &self.grid).finish()
    }
}

impl GridHamiltonian {
    pub fn new(operator: Diff2Operator, grid: Grid) -> Result<Self> {
        if grid.ndim() != operator.layout.n() {
            return Err(Error::Geometry(format!(
                "{} grid axes for an operator in {} variables",
                grid.ndim(),
                operator.layout.n()
            )));
        }
        let nx = operator.layout.nx();
        let cache = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let z = grid.point(i);
                let (x, y) = z.split_at(nx);
                operator.coefficients(x, y)
            })
            .collect();
        Ok(Self { operator, grid, cache: Arc::new(cache) })
    }

    /// `-Delta + V` with `V` a function of all coordinates.
    pub fn schrodinger(layout: Layout, grid: Grid, potential: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let n = layout.n();
        let op = Diff2Operator::new(
            "schrodinger",
            layout,
            Domain::Everywhere,
            Arc::new(move |x: &[f64], y: &[f64]| {
                let z: Vec<f64> = x.iter().chain(y).copied().collect();
                Coefficients {
                    second: DMatrix::identity(n, n),
                    zeroth: Complex64::new(potential(&z), 0.0),
                    ..Coefficients::zeros(n)
                }
            }),
        );
        Self::new(op, grid)
    }

    pub fn apply(&self, u: &GridWavefunction) -> GridWavefunction {
        let n = self.grid.ndim();
        let first: Vec<GridWavefunction> = (0..n).map(|v| u.multiply_spectrum(|k, _| Complex64::new(k[v], 0.0))).collect();
        let mut second = vec![None; n * n];
        for v in 0..n {
            for w in v..n {
                let needed = self.cache.iter().any(|c| c.second[(v, w)] != Complex64::new(0.0, 0.0) || c.second[(w, v)] != Complex64::new(0.0, 0.0));
                if needed {
                    second[v * n + w] = Some(u.multiply_spectrum(|k, _| Complex64::new(k[v] * k[w], 0.0)));
                }
            }
        }
        let values = (0..self.grid.len())
            .into_par_iter()
            .map(|i| {
                let c = &self.cache[i];
                let mut acc = c.zeroth * u.values[i];
                for v in 0..n {
                    acc += c.first[v] * first[v].values[i];
                    for w in v..n {
                        if let Some(s) = &second[v * n + w] {
                            let coef = if v == w { c.second[(v, v)] } else { c.second[(v, w)] + c.second[(w, v)] };
                            acc += coef * s.values[i];
                        }
                    }
                }
                acc
            })
            .collect();
        GridWavefunction { grid: self.grid.clone(), values }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 2000, seed: 0x5eed }
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Lowest eigenpair by single-vector LOBPCG with a Fourier preconditioner.
pub fn grid_eigensolve(h: &GridHamiltonian, opts: EigenOptions) -> Result<BoundState> {
    let grid = h.grid.clone();
    let layout = h.operator.layout;
    let len = grid.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let noise: Vec<Complex64> = (0..len).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, 0.0)).collect();
    let start = GridWavefunction { grid: grid.clone(), values: noise }
        .multiply_spectrum(|k, _| Complex64::new(1.0 / (1.0 + k.iter().map(|v| v * v).sum::<f64>()).powi(2), 0.0));
    let precondition = |r: &GridWavefunction| {
        r.multiply_spectrum(|k, _| Complex64::new(1.0 / (1.0 + k.iter().map(|v| v * v).sum::<f64>()), 0.0))
    };

    let mut x = start.values;
    let nx = dot(&x, &x).re.sqrt();
    x.iter_mut().for_each(|v| *v /= nx);
    let wrap = |v: Vec<Complex64>| GridWavefunction { grid: grid.clone(), values: v };
    let mut hx = h.apply(&wrap(x.clone())).values;
    let mut p: Option<(Vec<Complex64>, Vec<Complex64>)> = None;
    let mut lambda = dot(&x, &hx).re;
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let r: Vec<Complex64> = hx.iter().zip(&x).map(|(a, b)| a - lambda * b).collect();
        residual = dot(&r, &r).re.sqrt();
        if residual <= opts.tolerance {
            break;
        }
        let w = precondition(&wrap(r)).values;
        let mut basis = vec![(x.clone(), Vec::new()), (w, Vec::new())];
        if let Some(pp) = p.take() {
            basis.push(pp);
        }
        let basis: Vec<(Vec<Complex64>, Vec<Complex64>)> = orthonormalize(basis)
            .into_iter()
            .map(|(v, _)| {
                let hv = h.apply(&wrap(v.clone())).values;
                (v, hv)
            })
            .collect();
        let m = basis.len();
        let mut g = DMatrix::<Complex64>::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                g[(i, j)] = dot(&basis[i].0, &basis[j].1);
            }
        }
        let g = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = g.clone().symmetric_eigen();
        let imin = eig.eigenvalues.imin();
        let c = refine_ritz(&g, eig.eigenvalues[imin], eig.eigenvectors.column(imin).into_owned());
        let mut nxv = vec![Complex64::new(0.0, 0.0); len];
        let mut np = nxv.clone();
        for (i, (b, _)) in basis.iter().enumerate() {
            axpy(&mut nxv, c[i], b);
            if i > 0 {
                axpy(&mut np, c[i], b);
            }
        }
        let s = dot(&nxv, &nxv).re.sqrt();
        nxv.iter_mut().for_each(|v| *v /= s);
        hx = h.apply(&wrap(nxv.clone())).values;
        x = nxv;
        p = Some((np, Vec::new()));
        lambda = dot(&x, &hx).re;
    }
    if residual > opts.tolerance {
        return Err(Error::NoConvergence { iterations: opts.max_iterations, residual });
    }
    // fix the global phase so the largest component is real and positive
    let big = x.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(Complex64::new(1.0, 0.0));
    let phase = big.conj() / big.norm();
    let scale = phase / grid.cell_volume().sqrt();
    let psi = GridWavefunction { grid: grid.clone(), values: x.iter().map(|v| v * scale).collect() };
    let state = BoundState::from_grid(psi, layout.d, lambda, false)?;
    Ok(state.with_certificate(ResidualCertificate {
        residual,
        tolerance: opts.tolerance,
        exclusion_radius: 0.0,
        passed: true,
    }))
}

/// Sharpens the small components of a Ritz vector, which a dense
/// eigensolver only resolves to `eps * ||g||`.
fn refine_ritz(g: &DMatrix<Complex64>, mut lambda: f64, c: DVector<Complex64>) -> DVector<Complex64> {
    let m = c.len();
    let pivot = c.icamax();
    let rest: Vec<usize> = (0..m).filter(|&i| i != pivot).collect();
    if rest.is_empty() {
        return c;
    }
    let mut out = DVector::from_element(m, Complex64::new(0.0, 0.0));
    out[pivot] = Complex64::new(1.0, 0.0);
    for _ in 0..3 {
        let a = DMatrix::from_fn(rest.len(), rest.len(), |i, j| {
            g[(rest[i], rest[j])] - if i == j { Complex64::new(lambda, 0.0) } else { Complex64::new(0.0, 0.0) }
        });
        let b = DVector::from_fn(rest.len(), |i, _| -g[(rest[i], pivot)]);
        let Some(sol) = a.lu().solve(&b) else { return c };
        for (i, &k) in rest.iter().enumerate() {
            out[k] = sol[i];
        }
        lambda = (g[(pivot, pivot)] + rest.iter().map(|&k| g[(pivot, k)] * out[k]).sum::<Complex64>()).re;
    }
    out
}

/// Two passes of modified Gram-Schmidt, dropping nearly dependent vectors.
fn orthonormalize(mut basis: Vec<(Vec<Complex64>, Vec<Complex64>)>) -> Vec<(Vec<Complex64>, Vec<Complex64>)> {
    let mut out: Vec<(Vec<Complex64>, Vec<Complex64>)> = Vec::with_capacity(basis.len());
    for (mut v, _) in basis.drain(..) {
        let n0 = dot(&v, &v).re.sqrt();
        for _ in 0..2 {
            for (q, _) in &out {
                let c = dot(q, &v);
                axpy(&mut v, -c, q);
            }
        }
        let n = dot(&v, &v).re.sqrt();
        if n > 1e-10 * n0 && n > 0.0 {
            v.iter_mut().for_each(|e| *e /= n);
            out.push((v, Vec::new()));
        }
    }
    out
}
