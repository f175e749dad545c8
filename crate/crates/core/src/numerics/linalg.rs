use nalgebra::{ComplexField, DMatrix};

/// Operator 2-norm (largest singular value).
pub fn spectral_norm<T: ComplexField>(m: &DMatrix<T>) -> T::RealField {
    if m.is_empty() {
        return nalgebra::zero();
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(nalgebra::zero(), |a: T::RealField, b| if b > a { b } else { a })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_of_diagonal() {
        let m: DMatrix<f64> = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -3.0, 2.0]));
        assert!((spectral_norm(&m) - 3.0f64).abs() < 1e-14);
    }
}
