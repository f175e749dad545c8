use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::ellipticity::{twisted_ellipticity, TwistedEllipticity};
use super::twisted_potential::twisted_potential;
use super::{conjugate_operator, Coefficients, Diff2Operator, Domain, Layout};
use crate::error::{Error, Result};
use crate::geometry::MoleculeConfig;
use crate::potentials::PairAssembly;
use crate::twist::TwistMap;

/// Whether the external block holds `x` (density) or `(x, x')` (density matrix).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Density,
    DensityMatrix,
}

pub type VectorPotential = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub enum KineticForm {
    /// `-Delta` over all variables.
    Laplacian,
    /// `(D - A)^2` with `A` a function of all variables `(x, y)`.
    Magnetic(VectorPotential),
    /// Any globally elliptic second-order operator.
    Custom(Diff2Operator),
}

/// The twisted operator `U (H - E) U^{-1}` with the certificate of its kinetic part.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    pub operator: Diff2Operator,
    pub kinetic: Diff2Operator,
    pub energy: f64,
    pub mode: Mode,
    pub certificate: TwistedEllipticity,
}

fn magnetic(layout: Layout, a: VectorPotential) -> Diff2Operator {
    let n = layout.n();
    let coefficients = Arc::new(move |x: &[f64], y: &[f64]| {
        let z: Vec<f64> = x.iter().chain(y).copied().collect();
        let av = a(&z);
        let h = 1e-5;
        let mut div = 0.0;
        let mut p = z.clone();
        for k in 0..n {
            p[k] = z[k] + h;
            let up = a(&p)[k];
            p[k] = z[k] - h;
            let dn = a(&p)[k];
            p[k] = z[k];
            div += (up - dn) / (2.0 * h);
        }
        Coefficients {
            second: DMatrix::identity(n, n),
            first: DVector::from_iterator(n, av.iter().map(|v| Complex64::new(-2.0 * v, 0.0))),
            zeroth: Complex64::new(av.iter().map(|v| v * v).sum(), div),
        }
    });
    Diff2Operator::new("magnetic laplacian", layout, Domain::Everywhere, coefficients)
}

/// Assembles `U (H - E) U^{-1}` at fixed external points and certifies the
/// ellipticity of its kinetic part on the sample points.
pub fn assemble_hamiltonian(
    config: &MoleculeConfig,
    t: &TwistMap,
    kinetic: KineticForm,
    assembly: PairAssembly,
    energy: f64,
    mode: Mode,
    points: &[(Vec<f64>, Vec<f64>)],
) -> Result<Hamiltonian> {
    let k = config.external();
    let want = match mode {
        Mode::Density => k,
        Mode::DensityMatrix => 2 * k,
    };
    if t.external_count() != want || t.internal_count() != config.internal() || t.dim() != config.dim() {
        return Err(Error::Dimension(format!(
            "twist with m = {}, p = {} does not fit mode {mode:?} of the configuration",
            t.external_count(),
            t.internal_count()
        )));
    }
    let layout = Layout::new(want, config.internal(), config.dim());
    let kinetic = match kinetic {
        KineticForm::Laplacian => Diff2Operator::laplacian(layout),
        KineticForm::Magnetic(a) => magnetic(layout, a),
        KineticForm::Custom(op) => {
            if op.layout != layout {
                return Err(Error::Dimension(format!("kinetic layout {:?}, expected {layout:?}", op.layout)));
            }
            op
        }
    };
    let certificate = twisted_ellipticity(&kinetic, t, points, 64)?;
    let conj = conjugate_operator(&kinetic, t)?;
    let conj_fn = conj.coefficient_fn();
    let tw = Arc::new(t.clone());
    let asm = Arc::new(assembly);
    let coefficients = Arc::new(move |x: &[f64], y: &[f64]| {
        let mut c = conj_fn(x, y);
        let mut w = Complex64::new(asm.constant - energy, 0.0);
        for p in &asm.pairings {
            w += twisted_potential(p, &tw, x, y).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        }
        c.zeroth += w;
        c
    });
    let operator = Diff2Operator::new(format!("twisted hamiltonian ({})", kinetic.name), layout, conj.domain.clone(), coefficients);
    Ok(Hamiltonian { operator, kinetic, energy, mode, certificate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Nucleus;
    use crate::twist::{build_twist, CutoffFunction};

    fn molecule() -> MoleculeConfig {
        let nuclei = vec![Nucleus { position: vec![2.0, 0.0, 0.0], charge: 1.0 }];
        MoleculeConfig::new(3, nuclei, 2, 1).unwrap()
    }

    fn points(t: &TwistMap) -> Vec<(Vec<f64>, Vec<f64>)> {
        (0..6).map(|i| (t.x0().to_vec(), vec![0.3 * i as f64 - 0.8, 0.2, -0.1])).collect()
    }

    #[test]
    fn twisted_potential_matches_untwisted_at_image() {
        let c = molecule();
        let t = build_twist(&c, &[0.0, 0.0, 0.0], CutoffFunction::bump(3), 0.5).unwrap();
        let asm = PairAssembly::molecular(&c).unwrap();
        let h = assemble_hamiltonian(&c, &t, KineticForm::Laplacian, asm.clone(), -0.5, Mode::Density, &points(&t)).unwrap();
        assert!(h.certificate.passed);
        let x = [0.05, 0.02, -0.03];
        let y = [0.4, -0.6, 0.9];
        let w = t.lift(&x, &y).unwrap();
        let direct = asm.evaluate(&c, &x, &w).unwrap() + 0.5;
        let lap = Diff2Operator::laplacian(Layout::new(1, 1, 3));
        let conj = conjugate_operator(&lap, &t).unwrap();
        let got = h.operator.coefficients(&x, &y).zeroth - conj.coefficients(&x, &y).zeroth;
        assert!((got - direct).norm() < 1e-12);
    }

    #[test]
    fn density_matrix_mode_needs_doubled_twist() {
        let c = molecule();
        let t = build_twist(&c, &[0.0, 0.0, 0.0], CutoffFunction::bump(3), 0.5).unwrap();
        let asm = PairAssembly::molecular(&c).unwrap();
        let r = assemble_hamiltonian(&c, &t, KineticForm::Laplacian, asm.clone(), 0.0, Mode::DensityMatrix, &points(&t));
        assert!(r.is_err());
        let t2 = build_twist(&c, &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0], CutoffFunction::bump(3), 0.5).unwrap();
        let pts: Vec<_> = (0..4).map(|i| (t2.x0().to_vec(), vec![0.2 * i as f64, -0.5, 0.3])).collect();
        let h = assemble_hamiltonian(&c, &t2, KineticForm::Laplacian, asm, 0.0, Mode::DensityMatrix, &pts).unwrap();
        assert_eq!(h.operator.layout.n(), 9);
    }

    #[test]
    fn magnetic_form_has_shifted_symbol() {
        let lay = Layout::new(1, 1, 1);
        let op = magnetic(lay, Arc::new(|z| vec![0.5, z[0]]));
        let c = op.coefficients(&[2.0], &[0.0]);
        // first-order coefficients -2A, zeroth |A|^2 + i div A
        assert!((c.first[1] - Complex64::new(-4.0, 0.0)).norm() < 1e-12);
        assert!((c.zeroth - Complex64::new(4.25, 0.0)).norm() < 1e-9);
    }
}
