//! Halton points and low-discrepancy covector samples.

const PRIMES: [u64; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Halton point number `index` in `[0, 1)^dim`, optionally shifted modulo one.
pub fn halton(index: u64, dim: usize, shift: Option<&[f64]>) -> Vec<f64> {
    assert!(dim <= PRIMES.len(), "halton dimension too large");
    (0..dim)
        .map(|k| {
            let u = radical_inverse(index + 1, PRIMES[k]);
            match shift {
                Some(s) => (u + s[k]).fract(),
                None => u,
            }
        })
        .collect()
}

/// Low-discrepancy covectors with squared length log-uniform in `[r2_min, r2_max]`.
pub fn covectors(count: usize, dim: usize, r2_min: f64, r2_max: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let u = halton(i, dim + 1, None);
        i += 1;
        let dir: Vec<f64> = u[..dim].iter().map(|v| 2.0 * v - 1.0).collect();
        let n = super::norm(&dir);
        if n < 1e-3 {
            continue;
        }
        let r2 = r2_min * (r2_max / r2_min).powf(u[dim]);
        let scale = r2.sqrt() / n;
        out.push(dir.into_iter().map(|v| v * scale).collect());
    }
    out
}
