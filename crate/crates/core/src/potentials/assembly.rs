use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{coulomb, ClassVPotential};
use crate::error::{Error, Result};
use crate::geometry::{point, MoleculeConfig};

/// A particle of the configuration; indices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Particle {
    External(usize),
    Internal(usize),
    Nucleus(usize),
}

impl Particle {
    pub fn position<'a>(&self, config: &'a MoleculeConfig, x: &'a [f64], y: &'a [f64]) -> Result<&'a [f64]> {
        let d = config.dim();
        let (buf, j, len) = match *self {
            Particle::External(j) => (x, j, x.len() / d),
            Particle::Internal(j) => (y, j, y.len() / d),
            Particle::Nucleus(l) => {
                return config
                    .nuclei()
                    .get(l)
                    .map(|n| n.position.as_slice())
                    .ok_or_else(|| Error::Invalid(format!("no nucleus {l}")))
            }
        };
        if j >= len {
            return Err(Error::Invalid(format!("particle {self:?} out of range")));
        }
        Ok(point(buf, d, j))
    }
}

/// One term `weight * v(X_a - X_b)` of the total potential.
#[derive(Clone, Debug)]
pub struct Pairing {
    pub a: Particle,
    pub b: Particle,
    pub weight: f64,
    pub potential: Arc<ClassVPotential>,
}

#[derive(Clone, Debug)]
pub struct PairAssembly {
    pub pairings: Vec<Pairing>,
    pub constant: f64,
}

impl PairAssembly {
    pub fn new(pairings: Vec<Pairing>, constant: f64) -> Result<Self> {
        for p in &pairings {
            if p.a == p.b {
                return Err(Error::Invalid(format!("pairing of {:?} with itself", p.a)));
            }
        }
        Ok(Self { pairings, constant })
    }

    /// Coulomb assembly of a molecule: electron pairs with weight 1,
    /// electron-nucleus pairs with weight `-Z`, nuclear pairs with `Z Z'`.
    pub fn molecular(config: &MoleculeConfig) -> Result<Self> {
        let v = Arc::new(coulomb(config.dim())?);
        let electrons: Vec<Particle> = (0..config.external())
            .map(Particle::External)
            .chain((0..config.internal()).map(Particle::Internal))
            .collect();
        let mut pairings = Vec::new();
        for (i, &a) in electrons.iter().enumerate() {
            for &b in &electrons[i + 1..] {
                pairings.push(Pairing { a, b, weight: 1.0, potential: v.clone() });
            }
            for (l, n) in config.nuclei().iter().enumerate() {
                pairings.push(Pairing { a, b: Particle::Nucleus(l), weight: -n.charge, potential: v.clone() });
            }
        }
        let nuclei = config.nuclei();
        for l in 0..nuclei.len() {
            for l2 in l + 1..nuclei.len() {
                pairings.push(Pairing {
                    a: Particle::Nucleus(l),
                    b: Particle::Nucleus(l2),
                    weight: nuclei[l].charge * nuclei[l2].charge,
                    potential: v.clone(),
                });
            }
        }
        Self::new(pairings, 0.0)
    }

    pub fn evaluate(&self, config: &MoleculeConfig, x: &[f64], y: &[f64]) -> Result<Complex64> {
        assemble_potential(self, config, x, y)
    }
}

/// Total potential at the configuration `(x; y)`.
pub fn assemble_potential(asm: &PairAssembly, config: &MoleculeConfig, x: &[f64], y: &[f64]) -> Result<Complex64> {
    let mut total = Complex64::new(asm.constant, 0.0);
    for p in &asm.pairings {
        let za = p.a.position(config, x, y)?;
        let zb = p.b.position(config, x, y)?;
        let diff: Vec<f64> = za.iter().zip(zb).map(|(a, b)| a - b).collect();
        if diff.iter().all(|&v| v == 0.0) {
            return Err(Error::Singular(format!("{:?} and {:?} coincide", p.a, p.b)));
        }
        let v = p.potential.eval(&diff);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Singular(format!("{:?}-{:?}", p.a, p.b)));
        }
        total += v * p.weight;
    }
    Ok(total)
}
