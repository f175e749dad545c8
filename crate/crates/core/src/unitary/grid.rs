use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic tensor grid on `[-L_a, L_a)` per axis; the last axis varies fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    sizes: Vec<usize>,
    half_widths: Vec<f64>,
}

impl Grid {
    pub fn new(sizes: Vec<usize>, half_widths: Vec<f64>) -> Result<Self> {
        if sizes.is_empty() || sizes.len() != half_widths.len() {
            return Err(Error::Dimension("grid needs one size and one half-width per axis".into()));
        }
        if sizes.iter().any(|&n| n < 2) || half_widths.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::Invalid("grid sizes must be >= 2 and half-widths positive".into()));
        }
        Ok(Self { sizes, half_widths })
    }

    /// Same size and half-width on every axis.
    pub fn uniform(axes: usize, size: usize, half_width: f64) -> Result<Self> {
        Self::new(vec![size; axes], vec![half_width; axes])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }
    pub fn half_widths(&self) -> &[f64] {
        &self.half_widths
    }
    pub fn ndim(&self) -> usize {
        self.sizes.len()
    }
    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.half_widths[axis] / self.sizes[axis] as f64
    }
    pub fn cell_volume(&self) -> f64 {
        (0..self.ndim()).map(|a| self.spacing(a)).product()
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        -self.half_widths[axis] + i as f64 * self.spacing(axis)
    }

    pub fn point(&self, mut flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.ndim()];
        for a in (0..self.ndim()).rev() {
            out[a] = self.coordinate(a, flat % self.sizes[a]);
            flat /= self.sizes[a];
        }
        out
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Angular frequencies of the DFT bins along `axis`, in FFT order; the
    /// Nyquist bin is reported as negative.
    pub fn frequencies(&self, axis: usize) -> Vec<f64> {
        let n = self.sizes[axis];
        let dk = PI / self.half_widths[axis];
        (0..n)
            .map(|m| {
                let s = if m < n.div_ceil(2) { m as f64 } else { m as f64 - n as f64 };
                s * dk
            })
            .collect()
    }

    /// Frequency vector of the flat spectral index.
    pub fn frequency(&self, mut flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.ndim()];
        for a in (0..self.ndim()).rev() {
            let n = self.sizes[a];
            let m = flat % n;
            flat /= n;
            let s = if m < n.div_ceil(2) { m as f64 } else { m as f64 - n as f64 };
            out[a] = s * PI / self.half_widths[a];
        }
        out
    }

    fn is_nyquist(&self, mut flat: usize) -> bool {
        for a in (0..self.ndim()).rev() {
            let n = self.sizes[a];
            if n % 2 == 0 && flat % n == n / 2 {
                return true;
            }
            flat /= n;
        }
        false
    }

    /// Whether the spectral index sits on the Nyquist bin of some axis.
    pub fn on_nyquist(&self, flat: usize) -> bool {
        self.is_nyquist(flat)
    }
}

/// In-place multi-dimensional FFT (unnormalised).
pub fn fft_nd(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let total = data.len();
    let mut stride = 1;
    for a in (0..grid.ndim()).rev() {
        let n = grid.sizes[a];
        let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let block = n * stride;
        for start in (0..total).step_by(block) {
            for off in 0..stride {
                for i in 0..n {
                    line[i] = data[start + off + i * stride];
                }
                fft.process(&mut line);
                for i in 0..n {
                    data[start + off + i * stride] = line[i];
                }
            }
        }
        stride *= n;
    }
}

/// Complex samples of a function on a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridWavefunction {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl GridWavefunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!("{} values for a grid of {} points", values.len(), grid.len())));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64 + Sync) -> Self {
        let values = (0..grid.len()).into_par_iter().map(|i| f(&grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self { grid, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `<self, other>`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.grid.cell_volume()
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut s = self.values.clone();
        fft_nd(&self.grid, &mut s, false);
        s
    }

    pub fn from_spectrum(grid: Grid, mut spec: Vec<Complex64>) -> Self {
        fft_nd(&grid, &mut spec, true);
        let n = grid.len() as f64;
        spec.iter_mut().for_each(|v| *v /= n);
        Self { grid, values: spec }
    }

    /// Applies the Fourier multiplier `m(k)`.
    pub fn multiply_spectrum(&self, m: impl Fn(&[f64], usize) -> Complex64) -> Self {
        let mut spec = self.spectrum();
        for (i, v) in spec.iter_mut().enumerate() {
            *v *= m(&self.grid.frequency(i), i);
        }
        Self::from_spectrum(self.grid.clone(), spec)
    }

    /// Spectral `D_a = -i d/dz_a`; the Nyquist bin is dropped.
    pub fn derivative(&self, axis: usize) -> Self {
        let g = self.grid.clone();
        self.multiply_spectrum(|k, i| if g.on_nyquist(i) { Complex64::new(0.0, 0.0) } else { Complex64::new(k[axis], 0.0) })
    }

    /// Trigonometric interpolant at arbitrary points (periodic extension).
    pub fn interpolate(&self, points: &[Vec<f64>]) -> Vec<Complex64> {
        let spec = self.spectrum();
        let n = self.grid.len() as f64;
        points.par_iter().map(|p| interpolate_spectrum(&self.grid, &spec, p) / n).collect()
    }

    /// Fraction of the Nyquist frequency beyond which every spectral
    /// coefficient is below `rel_tol` times the largest.
    pub fn band_fraction(&self, rel_tol: f64) -> f64 {
        let spec = self.spectrum();
        let max = spec.iter().fold(0.0f64, |a, v| a.max(v.norm()));
        let mut frac = 0.0f64;
        for (i, v) in spec.iter().enumerate() {
            if v.norm() > rel_tol * max {
                let k = self.grid.frequency(i);
                for (a, ka) in k.iter().enumerate() {
                    let nyq = PI / self.grid.spacing(a);
                    frac = frac.max(ka.abs() / nyq);
                }
            }
        }
        frac
    }

    /// `(sum (1 + |k|^2)^s |u_k|^2)^{1/2}` with the Parseval normalisation.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let spec = self.spectrum();
        let scale = self.grid.cell_volume() / self.grid.len() as f64;
        let sum: f64 = spec
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let k2: f64 = self.grid.frequency(i).iter().map(|k| k * k).sum();
                (1.0 + k2).powf(s) * v.norm_sqr()
            })
            .sum();
        (sum * scale).sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }
}

fn interpolate_spectrum(grid: &Grid, spec: &[Complex64], p: &[f64]) -> Complex64 {
    let phases: Vec<Vec<Complex64>> = (0..grid.ndim())
        .map(|a| {
            let n = grid.sizes[a];
            let shift = p[a] + grid.half_widths[a];
            grid.frequencies(a)
                .iter()
                .enumerate()
                .map(|(m, &k)| {
                    if n % 2 == 0 && m == n / 2 {
                        Complex64::new((k * shift).cos(), 0.0)
                    } else {
                        Complex64::new(0.0, k * shift).exp()
                    }
                })
                .collect()
        })
        .collect();
    let mut cur: Vec<Complex64> = spec.to_vec();
    for a in (0..grid.ndim()).rev() {
        let n = grid.sizes[a];
        cur = cur.chunks(n).map(|c| c.iter().zip(&phases[a]).map(|(v, w)| v * w).sum()).collect();
    }
    cur[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(z: &[f64]) -> Complex64 {
        Complex64::new(-0.5 * z.iter().map(|v| v * v).sum::<f64>(), 0.15 * z[0]).exp()
    }

    #[test]
    fn fft_round_trip_2d() {
        let g = Grid::new(vec![8, 6], vec![3.0, 2.0]).unwrap();
        let f = GridWavefunction::from_fn(g.clone(), |z| Complex64::new(z[0], z[1] * z[1]));
        let back = GridWavefunction::from_spectrum(g, f.spectrum());
        assert!(f.values.iter().zip(&back.values).all(|(a, b)| (a - b).norm() < 1e-13));
    }

    #[test]
    fn interpolation_is_exact_on_trig_polynomials() {
        let g = Grid::new(vec![16, 12], vec![std::f64::consts::PI, 2.0]).unwrap();
        let h = |z: &[f64]| Complex64::new((3.0 * z[0]).sin() + (PI * z[1] / 2.0).cos() * z[0].cos(), 0.0);
        let f = GridWavefunction::from_fn(g, h);
        let pts = vec![vec![0.123, -0.77], vec![-2.9, 1.4]];
        for (p, v) in pts.iter().zip(f.interpolate(&pts)) {
            assert!((v - h(p)).norm() < 1e-13);
        }
    }

    #[test]
    fn spectral_derivative_of_gaussian() {
        let g = Grid::uniform(1, 128, 10.0).unwrap();
        let f = GridWavefunction::from_fn(g.clone(), |z| Complex64::new((-z[0] * z[0]).exp(), 0.0));
        let d = f.derivative(0);
        for i in (0..128).step_by(7) {
            let x = g.point(i)[0];
            let want = Complex64::new(0.0, 2.0 * x * (-x * x).exp());
            assert!((d.values[i] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn norms_and_band() {
        let g = Grid::uniform(1, 128, 8.0).unwrap();
        let f = GridWavefunction::from_fn(g, |z| gauss(z));
        assert!(f.sobolev_norm(0.0) - f.norm() < 1e-12);
        assert!(f.sobolev_norm(1.0) > f.norm());
        assert!(f.band_fraction(1e-10) < 0.5);
    }
}
