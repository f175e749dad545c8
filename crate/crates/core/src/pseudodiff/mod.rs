//! Global symbols on periodic grids, their quantization and the parametrix.

mod extend;
mod parametrix;

pub use extend::{extend_operator, ExternalCutoff};
pub use parametrix::{build_parametrix, FrequencyCutoff, Parametrix};

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numerics::{central_difference, multi_indices, qmc::covectors};
use crate::operators::{Diff2Operator, Layout};
use crate::unitary::{Grid, GridWavefunction};

/// `(z, zeta) -> sigma` with `z = (x; y)` and `zeta = (xi; eta)`.
pub type SymbolFn = Arc<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>;

#[derive(Clone)]
enum Evaluator {
    Multiplier(Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>),
    General(SymbolFn),
}

/// A symbol of order `k` on the joint `(x; y)` space.
#[derive(Clone)]
pub struct SymbolFunction {
    order: i32,
    layout: Layout,
    eval: Evaluator,
}

impl std::fmt::Debug for SymbolFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolFunction")
            .field("order", &self.order)
            .field("layout", &self.layout)
            .field("position_independent", &self.is_position_independent())
            .finish()
    }
}

impl SymbolFunction {
    pub fn new(order: i32, layout: Layout, f: impl Fn(&[f64], &[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { order, layout, eval: Evaluator::General(Arc::new(f)) }
    }

    /// A symbol depending on the covector only.
    pub fn multiplier(order: i32, layout: Layout, f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { order, layout, eval: Evaluator::Multiplier(Arc::new(f)) }
    }

    pub fn identity(layout: Layout) -> Self {
        Self::multiplier(0, layout, |_| Complex64::new(1.0, 0.0))
    }

    /// Total symbol of a second-order differential operator.
    pub fn from_operator(op: &Diff2Operator) -> Self {
        let op = op.clone();
        let nx = op.layout.nx();
        Self::new(2, op.layout, move |z, zeta| {
            let (x, y) = z.split_at(nx);
            op.coefficients(x, y).total(zeta)
        })
    }

    pub fn order(&self) -> i32 {
        self.order
    }
    pub fn layout(&self) -> Layout {
        self.layout
    }
    pub fn is_position_independent(&self) -> bool {
        matches!(self.eval, Evaluator::Multiplier(_))
    }

    pub fn eval(&self, z: &[f64], zeta: &[f64]) -> Complex64 {
        match &self.eval {
            Evaluator::Multiplier(f) => f(zeta),
            Evaluator::General(f) => f(z, zeta),
        }
    }

    /// Sampled constants `C_{a,b}` of
    /// `(1 + |zeta|^2)^{(b - k)/2} |d_z^alpha d_zeta^beta sigma| <= C_{a,b}`
    /// over total orders `|alpha| = a`, `|beta| = b`, both at most `max_order`.
    pub fn seminorms(&self, points: &[Vec<f64>], covector_count: usize, max_order: usize) -> SeminormReport {
        let n = self.layout.n();
        let zetas = covectors(covector_count, n, 1e-2, 1e4);
        let mut entries = Vec::new();
        for a in 0..=max_order {
            for b in 0..=max_order {
                let alphas = multi_indices(n, a);
                let betas = multi_indices(n, b);
                let constant = points
                    .par_iter()
                    .map(|z| {
                        let mut worst = 0.0f64;
                        for zeta in &zetas {
                            let w2: f64 = 1.0 + zeta.iter().map(|v| v * v).sum::<f64>();
                            let hz = 1e-3;
                            let hzeta = 1e-3 * w2.sqrt();
                            for alpha in &alphas {
                                for beta in &betas {
                                    let inner = |zs: &[f64]| {
                                        central_difference(&|ks: &[f64]| self.eval(zs, ks), zeta, beta, hzeta)
                                    };
                                    let v: Complex64 = central_difference(&inner, z, alpha, hz);
                                    worst = worst.max(w2.powf(0.5 * (b as f64 - self.order as f64)) * v.norm());
                                }
                            }
                        }
                        worst
                    })
                    .reduce(|| 0.0, f64::max);
                entries.push(SeminormEntry { position_order: a, covector_order: b, constant });
            }
        }
        SeminormReport { order: self.order, samples: points.len() * zetas.len(), entries }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeminormEntry {
    pub position_order: usize,
    pub covector_order: usize,
    pub constant: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeminormReport {
    pub order: i32,
    pub samples: usize,
    pub entries: Vec<SeminormEntry>,
}

impl SeminormReport {
    pub fn max_constant(&self) -> f64 {
        self.entries.iter().map(|e| e.constant).fold(0.0, f64::max)
    }
}

fn signed(m: usize, n: usize) -> i64 {
    if m < n.div_ceil(2) {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// `sigma(z, D) u` (left quantization) on the periodic grid of `u`.
pub fn quantize(sigma: &SymbolFunction, u: &GridWavefunction) -> GridWavefunction {
    let grid = &u.grid;
    if let Evaluator::Multiplier(f) = &sigma.eval {
        return u.multiply_spectrum(|k, _| f(k));
    }
    let spec = u.spectrum();
    let nfreq = grid.len();
    let freqs: Vec<Vec<f64>> = (0..nfreq).map(|i| grid.frequency(i)).collect();
    let phase_tables: Vec<Vec<Complex64>> = grid
        .sizes()
        .iter()
        .map(|&n| (0..n).map(|r| Complex64::from_polar(1.0, 2.0 * PI * r as f64 / n as f64)).collect())
        .collect();
    let values = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let z = grid.point(j);
            let idx = multi_index(grid, j);
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, s) in spec.iter().enumerate() {
                let midx = multi_index(grid, m);
                let mut ph = Complex64::new(1.0, 0.0);
                for (a, &n) in grid.sizes().iter().enumerate() {
                    let r = (idx[a] as i64 * signed(midx[a], n)).rem_euclid(n as i64) as usize;
                    ph *= phase_tables[a][r];
                }
                acc += sigma.eval(&z, &freqs[m]) * s * ph;
            }
            acc / nfreq as f64
        })
        .collect();
    GridWavefunction { grid: grid.clone(), values }
}

fn multi_index(grid: &Grid, mut flat: usize) -> Vec<usize> {
    let mut out = vec![0; grid.ndim()];
    for a in (0..grid.ndim()).rev() {
        out[a] = flat % grid.sizes()[a];
        flat /= grid.sizes()[a];
    }
    out
}

/// Applies a second-order operator on the periodic grid through its
/// coefficient fields; identical to quantizing its total symbol.
pub fn apply_operator(op: &Diff2Operator, u: &GridWavefunction) -> GridWavefunction {
    let grid = &u.grid;
    let n = grid.ndim();
    let nx = op.layout.nx();
    let first: Vec<GridWavefunction> = (0..n).map(|v| u.multiply_spectrum(|k, _| Complex64::new(k[v], 0.0))).collect();
    let second: Vec<Vec<GridWavefunction>> = (0..n)
        .map(|v| (0..n).map(|w| u.multiply_spectrum(|k, _| Complex64::new(k[v] * k[w], 0.0))).collect())
        .collect();
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let z = grid.point(i);
            let (x, y) = z.split_at(nx);
            let c = op.coefficients(x, y);
            let mut acc = c.zeroth * u.values[i];
            for v in 0..n {
                acc += c.first[v] * first[v].values[i];
                for w in 0..n {
                    acc += c.second[(v, w)] * second[v][w].values[i];
                }
            }
            acc
        })
        .collect();
    GridWavefunction { grid: grid.clone(), values }
}

/// Spectral Sobolev norm with weight `(1 + |k|^2)^{s/2}`.
pub fn sobolev_norm(u: &GridWavefunction, s: f64) -> f64 {
    u.sobolev_norm(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{ScalarCoefficient, Term};

    fn line(n: usize) -> Grid {
        Grid::uniform(1, n, PI).unwrap()
    }

    #[test]
    fn identity_symbol() {
        let u = GridWavefunction::from_fn(line(32), |z| Complex64::new(z[0].sin().exp(), z[0].cos()));
        let l = Layout::new(1, 0, 1);
        let a = quantize(&SymbolFunction::identity(l), &u);
        let b = quantize(&SymbolFunction::new(0, l, |_, _| Complex64::new(1.0, 0.0)), &u);
        for i in 0..32 {
            assert!((a.values[i] - u.values[i]).norm() < 1e-13);
            assert!((b.values[i] - u.values[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn plane_wave_eigenfunction() {
        let g = Grid::uniform(2, 16, PI).unwrap();
        let u = GridWavefunction::from_fn(g, |z| Complex64::new(0.0, 3.0 * z[0] - 2.0 * z[1]).exp());
        let s = SymbolFunction::multiplier(2, Layout::new(1, 1, 1), |k| Complex64::new(k[0] * k[0] + k[1] * k[1], 0.0));
        let v = quantize(&s, &u);
        assert!(v.sub(&u.scale(Complex64::new(13.0, 0.0))).norm() < 1e-11);
        let s2 = u.sobolev_norm(2.0);
        assert!((s2 - 14.0 * u.norm()).abs() < 1e-10 * s2);
    }

    #[test]
    fn variable_symbol_matches_spectral_product() {
        let g = line(64);
        let u = GridWavefunction::from_fn(g.clone(), |z| Complex64::new((2.0 * z[0].cos()).exp(), 0.0));
        let a = |x: f64| 2.0 + x.sin();
        let s = SymbolFunction::new(1, Layout::new(1, 0, 1), move |z, k| Complex64::new(a(z[0]) * k[0], 0.0));
        let q = quantize(&s, &u);
        let du = u.multiply_spectrum(|k, _| Complex64::new(k[0], 0.0));
        let want: Vec<Complex64> = (0..64).map(|i| du.values[i] * a(g.point(i)[0])).collect();
        let err: f64 = q.values.iter().zip(&want).map(|(p, w)| (p - w).norm_sqr()).sum::<f64>().sqrt();
        let scale: f64 = want.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        assert!(err <= 1e-10 * scale, "{}", err / scale);
    }

    #[test]
    fn operator_application_matches_its_symbol() {
        let layout = Layout::new(1, 1, 1);
        let c: ScalarCoefficient = Arc::new(|x, y| Complex64::new(1.5 + 0.3 * (x[0] - y[0]).cos(), 0.0));
        let one: ScalarCoefficient = Arc::new(|_, y| Complex64::new(0.2 * y[0].sin(), 0.1));
        let op = Diff2Operator::from_terms(
            "p",
            layout,
            vec![
                Term { alpha: vec![2], beta: vec![0], coefficient: c.clone() },
                Term { alpha: vec![0], beta: vec![2], coefficient: c },
                Term { alpha: vec![1], beta: vec![1], coefficient: one.clone() },
                Term { alpha: vec![0], beta: vec![0], coefficient: one },
            ],
        )
        .unwrap();
        let u = GridWavefunction::from_fn(Grid::uniform(2, 12, PI).unwrap(), |z| {
            Complex64::new((z[0].cos() + z[1].sin()).exp(), 0.0)
        });
        let a = apply_operator(&op, &u);
        let b = quantize(&SymbolFunction::from_operator(&op), &u);
        assert!(a.sub(&b).norm() < 1e-10 * a.norm());
    }

    #[test]
    fn sobolev_norm_is_monotone() {
        let u = GridWavefunction::from_fn(line(64), |z| Complex64::new((-(z[0] * z[0])).exp(), 0.0));
        let mut last = 0.0;
        for s in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let v = sobolev_norm(&u, s);
            assert!(v >= last);
            last = v;
        }
        assert!((sobolev_norm(&u, 0.0) - u.norm()).abs() < 1e-12);
    }

    #[test]
    fn seminorms_of_order_two_symbol() {
        let s = SymbolFunction::multiplier(2, Layout::new(1, 0, 1), |k| Complex64::new(1.0 + k[0] * k[0], 0.0));
        let r = s.seminorms(&[vec![0.0]], 64, 2);
        assert!(r.max_constant() < 3.0, "{}", r.max_constant());
    }
}
