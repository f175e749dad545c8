use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::point;
use crate::numerics::fit::{Growth, GrowthFit};
use crate::numerics::{dist, multi_indices, norm};
use crate::potentials::{Pairing, Particle};
use crate::twist::{sample_ball, TwistMap};

/// The six kinds of pairs, by particle type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairingCase {
    NucleusNucleus,
    ExternalExternal,
    ExternalNucleus,
    ExternalInternal,
    NucleusInternal,
    InternalInternal,
}

impl PairingCase {
    pub fn of(a: Particle, b: Particle) -> Self {
        use Particle::*;
        match (a, b) {
            (Nucleus(_), Nucleus(_)) => PairingCase::NucleusNucleus,
            (External(_), External(_)) => PairingCase::ExternalExternal,
            (External(_), Nucleus(_)) | (Nucleus(_), External(_)) => PairingCase::ExternalNucleus,
            (External(_), Internal(_)) | (Internal(_), External(_)) => PairingCase::ExternalInternal,
            (Nucleus(_), Internal(_)) | (Internal(_), Nucleus(_)) => PairingCase::NucleusInternal,
            (Internal(_), Internal(_)) => PairingCase::InternalInternal,
        }
    }

    /// Whether the twisted term depends on `y` through the twist.
    pub fn is_twisted(self) -> bool {
        matches!(self, PairingCase::ExternalInternal | PairingCase::NucleusInternal | PairingCase::InternalInternal)
    }
}

/// Untwisted anchor of a particle: `x0_j`, `R_l` or `y_k`.
fn anchor(t: &TwistMap, p: Particle, y: &[f64]) -> Result<Vec<f64>> {
    let d = t.dim();
    Ok(match p {
        Particle::External(j) if j < t.external_count() => point(t.x0(), d, j).to_vec(),
        Particle::Internal(k) if (k + 1) * d <= y.len() => point(y, d, k).to_vec(),
        Particle::Nucleus(l) if l < t.nuclei().len() => t.nuclei()[l].clone(),
        _ => return Err(Error::Invalid(format!("particle {p:?} out of range"))),
    })
}

/// Position after twisting: `x_j`, `R_l` or `f(x; y_k)`.
fn twisted_position(t: &TwistMap, p: Particle, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let d = t.dim();
    Ok(match p {
        Particle::External(j) => {
            anchor(t, p, y)?;
            point(x, d, j).to_vec()
        }
        Particle::Nucleus(_) => anchor(t, p, y)?,
        Particle::Internal(_) => t.forward(x, &anchor(t, p, y)?)?,
    })
}

fn argument(pairing: &Pairing, t: &TwistMap, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let a = twisted_position(t, pairing.a, x, y)?;
    let b = twisted_position(t, pairing.b, x, y)?;
    Ok(a.iter().zip(&b).map(|(p, q)| p - q).collect())
}

/// `weight * v(X_a - X_b)` with internal positions moved by the twist.
pub fn twisted_potential(pairing: &Pairing, t: &TwistMap, x: &[f64], y: &[f64]) -> Result<Complex64> {
    if !t.in_domain(x) {
        return Err(Error::OutsideDomain("external point outside Omega(delta0)".into()));
    }
    let z = match PairingCase::of(pairing.a, pairing.b) {
        PairingCase::NucleusNucleus => {
            let (a, b) = (anchor(t, pairing.a, y)?, anchor(t, pairing.b, y)?);
            a.iter().zip(&b).map(|(p, q)| p - q).collect()
        }
        _ => argument(pairing, t, x, y)?,
    };
    if norm(&z) == 0.0 {
        return Err(Error::Singular(format!("{:?} meets {:?}", pairing.a, pairing.b)));
    }
    Ok(pairing.potential.eval(&z) * pairing.weight)
}

/// `d^alpha_x` of the twisted pair term, `alpha` ranging over all `md` external coordinates.
///
/// The argument is affine in each `x_j` with slope `tau_j(a) - tau_j(b)` at the anchors.
pub fn twisted_potential_derivative(
    pairing: &Pairing,
    t: &TwistMap,
    x: &[f64],
    y: &[f64],
    alpha: &[usize],
) -> Result<Complex64> {
    let (d, m) = (t.dim(), t.external_count());
    if alpha.len() != m * d {
        return Err(Error::Dimension(format!("multi-index of length {}, expected {}", alpha.len(), m * d)));
    }
    if !t.in_domain(x) {
        return Err(Error::OutsideDomain("external point outside Omega(delta0)".into()));
    }
    if PairingCase::of(pairing.a, pairing.b) == PairingCase::NucleusNucleus {
        let zero = alpha.iter().all(|&a| a == 0);
        return if zero { twisted_potential(pairing, t, x, y) } else { Ok(Complex64::new(0.0, 0.0)) };
    }
    let (aa, ab) = (anchor(t, pairing.a, y)?, anchor(t, pairing.b, y)?);
    let mut factor = 1.0;
    let mut total = vec![0usize; d];
    for j in 0..m {
        let block = &alpha[j * d..(j + 1) * d];
        let order: usize = block.iter().sum();
        if order > 0 {
            factor *= (t.weight(j, &aa) - t.weight(j, &ab)).powi(order as i32);
        }
        for (c, &k) in block.iter().enumerate() {
            total[c] += k;
        }
    }
    if factor == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let z = argument(pairing, t, x, y)?;
    if norm(&z) == 0.0 {
        return Err(Error::Singular(format!("{:?} meets {:?}", pairing.a, pairing.b)));
    }
    Ok(pairing.potential.partial(&z, &total) * (factor * pairing.weight))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwistedPotentialReport {
    pub case: PairingCase,
    /// Sup over samples of `|d^alpha w| / eta(|a - b|)` at each order.
    pub per_order: Vec<f64>,
    pub fit: GrowthFit,
    /// Constants fitted on disjoint batches of external points.
    pub batch_constants: Vec<f64>,
    pub stable: bool,
    /// Largest relative gap between the chain-rule first derivatives and
    /// central differences.
    pub first_order_gap: f64,
}

/// Samples derivative growth of the twisted pair term up to `max_order`
/// over `samples` points of `Omega(delta0)` and the internal tuples `ys`.
pub fn twisted_potential_report<R: Rng>(
    pairing: &Pairing,
    t: &TwistMap,
    ys: &[Vec<f64>],
    rng: &mut R,
    samples: usize,
    max_order: usize,
) -> Result<TwistedPotentialReport> {
    let (d, m) = (t.dim(), t.external_count());
    let case = PairingCase::of(pairing.a, pairing.b);
    let batches = 4;
    let mut per_batch = vec![vec![0.0f64; max_order + 1]; batches];
    let mut first_order_gap = 0.0f64;
    let h = 1e-4 * t.r0();
    for s in 0..samples {
        let x = t.sample_domain(rng, 1.0 - 1e-3);
        let batch = &mut per_batch[s % batches];
        for y in ys {
            let (aa, ab) = (anchor(t, pairing.a, y)?, anchor(t, pairing.b, y)?);
            let sep = dist(&aa, &ab);
            if sep == 0.0 {
                continue;
            }
            let env = (pairing.potential.envelope.eta)(sep).abs();
            for (n, slot) in batch.iter_mut().enumerate() {
                for alpha in multi_indices(m * d, n) {
                    let v = match twisted_potential_derivative(pairing, t, &x, y, &alpha) {
                        Ok(v) => v,
                        Err(Error::Singular(_)) => continue,
                        Err(e) => return Err(e),
                    };
                    *slot = slot.max(v.norm() / env);
                    if n == 1 {
                        let c = alpha.iter().position(|&a| a == 1).expect("order one");
                        let (mut xp, mut xm) = (x.clone(), x.clone());
                        xp[c] += h;
                        xm[c] -= h;
                        let fd = (twisted_potential(pairing, t, &xp, y)? - twisted_potential(pairing, t, &xm, y)?) / (2.0 * h);
                        let scale = v.norm().max(twisted_potential(pairing, t, &x, y)?.norm() / sep);
                        if scale > 0.0 {
                            first_order_gap = first_order_gap.max((fd - v).norm() / scale);
                        }
                    }
                }
            }
        }
    }
    let mut per_order = vec![0.0f64; max_order + 1];
    for b in &per_batch {
        for (o, v) in per_order.iter_mut().zip(b) {
            *o = o.max(*v);
        }
    }
    let fit = GrowthFit::new(&per_order, Growth::Factorial);
    let batch_constants: Vec<f64> = per_batch.iter().map(|b| GrowthFit::new(b, Growth::Factorial).constant).collect();
    let (lo, hi) = batch_constants.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &c| (l.min(c), h.max(c)));
    let stable = fit.constant.is_finite() && (lo == hi || hi <= 1.5 * lo);
    Ok(TwistedPotentialReport { case, per_order, fit, batch_constants, stable, first_order_gap })
}

/// Internal tuples clustered near the external centres, for potential reports.
pub fn sample_internal<R: Rng>(t: &TwistMap, rng: &mut R, count: usize) -> Vec<Vec<f64>> {
    let (d, p) = (t.dim(), t.internal_count());
    (0..count)
        .map(|_| {
            (0..p)
                .flat_map(|_| {
                    let j = rng.gen_range(0..t.external_count());
                    let mut v = sample_ball(rng, d, 1.5 * t.r0());
                    v.iter_mut().zip(point(t.x0(), d, j)).for_each(|(a, c)| *a += c);
                    v
                })
                .collect()
        })
        .collect()
}
