use std::f64::consts::PI;

/// Chebyshev series on an interval `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct ChebSeries {
    coeffs: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl ChebSeries {
    /// Interpolates `f` at the `n + 1` Chebyshev-Lobatto points.
    pub fn interpolate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> Self {
        let n = n.max(1);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let vals: Vec<f64> = (0..=n).map(|j| f(mid + half * (PI * j as f64 / n as f64).cos())).collect();
        let mut coeffs = vec![0.0; n + 1];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut s = 0.0;
            for (j, v) in vals.iter().enumerate() {
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                s += w * v * (PI * (j * k) as f64 / n as f64).cos();
            }
            *c = 2.0 * s / n as f64;
        }
        coeffs[0] *= 0.5;
        coeffs[n] *= 0.5;
        Self { coeffs, lo, hi }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, t: f64) -> f64 {
        let s = (2.0 * t - self.lo - self.hi) / (self.hi - self.lo);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * s * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        s * b1 - b2 + self.coeffs[0]
    }

    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self { coeffs: vec![0.0], lo: self.lo, hi: self.hi };
        }
        let mut d = vec![0.0; n + 1];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        let scale = 2.0 / (self.hi - self.lo);
        d.iter_mut().for_each(|c| *c *= scale);
        Self { coeffs: d, lo: self.lo, hi: self.hi }
    }

    /// Drops the trailing coefficients that sit below `rel * max|c|`.
    pub fn chop(&mut self, rel: f64) {
        let floor = rel * self.max_abs();
        let keep = self.coeffs.iter().rposition(|c| c.abs() > floor).map_or(1, |k| k + 1);
        self.coeffs.truncate(keep);
    }

    /// Largest trailing coefficient relative to the largest one, over the last `k`.
    pub fn tail_ratio(&self, k: usize) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let n = self.coeffs.len();
        self.coeffs[n.saturating_sub(k)..].iter().fold(0.0f64, |a, c| a.max(c.abs())) / max
    }

    fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_exponential_and_derivatives() {
        let mut s = ChebSeries::interpolate(|t| (2.0 * t).exp(), -0.5, 0.5, 40);
        s.chop(1e-15);
        assert!((s.eval(0.1) - 0.2f64.exp()).abs() < 1e-14);
        let mut d = s.clone();
        for k in 1..=6 {
            d = d.derivative();
            assert!((d.eval(0.0) - 2f64.powi(k)).abs() < 1e-8 * 2f64.powi(k), "order {k}");
        }
    }

    #[test]
    fn kink_leaves_unresolved_tail() {
        let s = ChebSeries::interpolate(|t: f64| (-2.0 * t.abs()).exp(), -0.5, 0.5, 128);
        assert!(s.tail_ratio(8) > 1e-8);
        let smooth = ChebSeries::interpolate(|t: f64| (-2.0 * t).exp(), -0.5, 0.5, 128);
        assert!(smooth.tail_ratio(8) < 1e-14);
    }
}
