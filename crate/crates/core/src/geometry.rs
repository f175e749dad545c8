//! Molecular configurations and the collision sets of configuration space.
//!
//! Configurations are flat slices holding consecutive points of dimension
//! `dim`; particle labels in witnesses are 1-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::dist;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nucleus {
    pub position: Vec<f64>,
    pub charge: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoleculeConfig {
    dim: usize,
    nuclei: Vec<Nucleus>,
    electrons: usize,
    external: usize,
    nuclear_repulsion: f64,
}

impl MoleculeConfig {
    /// Builds a configuration with `electrons` electrons of which the first
    /// `external` are treated as external coordinates.
    pub fn new(dim: usize, nuclei: Vec<Nucleus>, electrons: usize, external: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Invalid(format!("spatial dimension {dim} not in 1..=3")));
        }
        if nuclei.is_empty() {
            return Err(Error::Invalid("at least one nucleus is required".into()));
        }
        if external == 0 || external >= electrons {
            return Err(Error::Invalid(format!(
                "external count {external} must satisfy 0 < k < N = {electrons}"
            )));
        }
        for (l, n) in nuclei.iter().enumerate() {
            if n.position.len() != dim {
                return Err(Error::Dimension(format!("nucleus {} has dimension {}", l + 1, n.position.len())));
            }
            if !(n.charge > 0.0) {
                return Err(Error::Invalid(format!("nucleus {} has non-positive charge", l + 1)));
            }
        }
        let mut e0 = 0.0;
        for a in 0..nuclei.len() {
            for b in a + 1..nuclei.len() {
                let r = dist(&nuclei[a].position, &nuclei[b].position);
                if r == 0.0 {
                    return Err(Error::Invalid(format!("nuclei {} and {} coincide", a + 1, b + 1)));
                }
                e0 += nuclei[a].charge * nuclei[b].charge / r;
            }
        }
        Ok(Self { dim, nuclei, electrons, external, nuclear_repulsion: e0 })
    }

    /// Overrides the constant shift added to the Hamiltonian.
    pub fn with_nuclear_repulsion(mut self, e0: f64) -> Self {
        self.nuclear_repulsion = e0;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nuclei(&self) -> &[Nucleus] {
        &self.nuclei
    }

    pub fn electrons(&self) -> usize {
        self.electrons
    }

    pub fn external(&self) -> usize {
        self.external
    }

    pub fn internal(&self) -> usize {
        self.electrons - self.external
    }

    pub fn nuclear_repulsion(&self) -> f64 {
        self.nuclear_repulsion
    }

    /// Number of points in a flat tuple, checking its length.
    pub fn count_points(&self, x: &[f64]) -> Result<usize> {
        if x.is_empty() || x.len() % self.dim != 0 {
            return Err(Error::Dimension(format!(
                "tuple of length {} is not a non-empty list of {}-dimensional points",
                x.len(),
                self.dim
            )));
        }
        Ok(x.len() / self.dim)
    }
}

/// Point `j` (0-based) of a flat tuple.
pub fn point(x: &[f64], dim: usize, j: usize) -> &[f64] {
    &x[j * dim..(j + 1) * dim]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// Two external electrons coincide.
    ElectronCollision,
    /// An external electron sits on a nucleus.
    NucleusCollision,
    /// Single tuple free of both collision types.
    CollisionFree,
    /// A point of the first tuple coincides with a point of the second.
    CrossCollision,
    /// Pair of collision-free tuples with no cross collision.
    PairCollisionFree,
}

impl Region {
    pub fn tag(self) -> &'static str {
        match self {
            Region::ElectronCollision => "C_k",
            Region::NucleusCollision => "R_k",
            Region::CollisionFree => "U1",
            Region::CrossCollision => "C2",
            Region::PairCollisionFree => "U2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub region: Region,
    /// Offending particle labels, 1-based. For a pair `(x, x')` the points of
    /// `x'` are numbered after those of `x`; cross collisions report `(j, j')`
    /// with each index local to its own tuple.
    pub witness: Option<(usize, usize)>,
}

impl RegionLabel {
    fn free(region: Region) -> Self {
        Self { region, witness: None }
    }

    pub fn is_free(&self) -> bool {
        matches!(self.region, Region::CollisionFree | Region::PairCollisionFree)
    }
}

fn first_collision(config: &MoleculeConfig, x: &[f64], offset: usize, tol: f64) -> Option<RegionLabel> {
    let d = config.dim;
    let m = x.len() / d;
    for j in 0..m {
        for j2 in j + 1..m {
            if dist(point(x, d, j), point(x, d, j2)) <= tol {
                return Some(RegionLabel {
                    region: Region::ElectronCollision,
                    witness: Some((offset + j + 1, offset + j2 + 1)),
                });
            }
        }
    }
    for j in 0..m {
        for (l, n) in config.nuclei.iter().enumerate() {
            if dist(point(x, d, j), &n.position) <= tol {
                return Some(RegionLabel { region: Region::NucleusCollision, witness: Some((offset + j + 1, l + 1)) });
            }
        }
    }
    None
}

/// Labels a tuple, or a pair of tuples, by the first collision found within `tol`.
pub fn classify_configuration(
    config: &MoleculeConfig,
    x: &[f64],
    x_prime: Option<&[f64]>,
    tol: f64,
) -> Result<RegionLabel> {
    let m = config.count_points(x)?;
    if let Some(label) = first_collision(config, x, 0, tol) {
        return Ok(label);
    }
    let Some(xp) = x_prime else {
        return Ok(RegionLabel::free(Region::CollisionFree));
    };
    let mp = config.count_points(xp)?;
    if let Some(label) = first_collision(config, xp, m, tol) {
        return Ok(label);
    }
    let d = config.dim;
    for j in 0..m {
        for j2 in 0..mp {
            if dist(point(x, d, j), point(xp, d, j2)) <= tol {
                return Ok(RegionLabel { region: Region::CrossCollision, witness: Some((j + 1, j2 + 1)) });
            }
        }
    }
    Ok(RegionLabel::free(Region::PairCollisionFree))
}

/// Smallest distance from a point of `x0` to a nucleus or to another point of `x0`.
pub fn separation_radius(config: &MoleculeConfig, x0: &[f64]) -> Result<f64> {
    let m = config.count_points(x0)?;
    let d = config.dim;
    let mut r0 = f64::INFINITY;
    for j in 0..m {
        let p = point(x0, d, j);
        for n in &config.nuclei {
            r0 = r0.min(dist(p, &n.position));
        }
        for j2 in j + 1..m {
            r0 = r0.min(dist(p, point(x0, d, j2)));
        }
    }
    if r0 > 0.0 {
        Ok(r0)
    } else {
        let label = classify_configuration(config, x0, None, 0.0)?;
        Err(Error::NotCollisionFree(format!("{} with witness {:?}", label.region.tag(), label.witness)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single(pos: Vec<f64>, dim: usize, n: usize, k: usize) -> MoleculeConfig {
        MoleculeConfig::new(dim, vec![Nucleus { position: pos, charge: 1.0 }], n, k).unwrap()
    }

    #[test]
    fn radius_to_nucleus() {
        let c = single(vec![1.0, 0.0, 0.0], 3, 2, 1);
        assert_eq!(separation_radius(&c, &[0.0, 0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn radius_between_electrons() {
        let c = single(vec![10.0, 0.0, 0.0], 3, 3, 2);
        let r = separation_radius(&c, &[0.0, 0.0, 0.0, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(r, 0.5);
    }

    #[test]
    fn electron_on_nucleus() {
        let c = single(vec![0.3, -0.2, 1.0], 3, 2, 1);
        let label = classify_configuration(&c, &[0.3, -0.2, 1.0], None, 0.0).unwrap();
        assert_eq!(label.region, Region::NucleusCollision);
        assert_eq!(label.witness, Some((1, 1)));
        assert!(matches!(separation_radius(&c, &[0.3, -0.2, 1.0]), Err(Error::NotCollisionFree(_))));
    }

    #[test]
    fn pair_labels() {
        let c = single(vec![5.0], 1, 2, 1);
        let l = classify_configuration(&c, &[0.0], Some(&[0.0]), 0.0).unwrap();
        assert_eq!(l.region, Region::CrossCollision);
        assert_eq!(l.witness, Some((1, 1)));
        let l = classify_configuration(&c, &[0.0], Some(&[1.0]), 0.0).unwrap();
        assert_eq!(l.region, Region::PairCollisionFree);
        let l = classify_configuration(&c, &[0.0], Some(&[5.0]), 0.0).unwrap();
        assert_eq!(l.region, Region::NucleusCollision);
        assert_eq!(l.witness, Some((2, 1)));
    }

    #[test]
    fn rejects_bad_shapes() {
        let c = single(vec![5.0, 0.0], 2, 2, 1);
        assert!(matches!(classify_configuration(&c, &[1.0, 2.0, 3.0], None, 0.0), Err(Error::Dimension(_))));
        assert!(MoleculeConfig::new(4, vec![], 2, 1).is_err());
        assert!(MoleculeConfig::new(1, vec![Nucleus { position: vec![0.0], charge: 1.0 }], 2, 2).is_err());
    }

    #[test]
    fn nuclear_repulsion_sum() {
        let nuclei = vec![
            Nucleus { position: vec![0.0, 0.0, 0.0], charge: 2.0 },
            Nucleus { position: vec![0.0, 0.0, 2.0], charge: 3.0 },
        ];
        let c = MoleculeConfig::new(3, nuclei, 3, 1).unwrap();
        assert!((c.nuclear_repulsion() - 3.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn radius_is_attained_and_minimal(pts in proptest::collection::vec(-5.0f64..5.0, 6)) {
            let c = single(vec![0.0, 0.0, 7.0], 3, 3, 2);
            if let Ok(r0) = separation_radius(&c, &pts) {
                let mut ds = vec![dist(&pts[0..3], &pts[3..6])];
                for j in 0..2 {
                    ds.push(dist(&pts[3 * j..3 * j + 3], &[0.0, 0.0, 7.0]));
                }
                prop_assert!(ds.iter().all(|&d| d >= r0));
                prop_assert!(ds.iter().any(|&d| d == r0));
                let label = classify_configuration(&c, &pts, None, 0.5 * r0).unwrap();
                prop_assert!(label.is_free());
            }
        }
    }
}
