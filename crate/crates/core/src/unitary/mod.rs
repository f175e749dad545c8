//! The twist unitary on periodic grids and checks of its conjugation identities.

mod grid;
mod io;

pub use grid::{fft_nd, Grid, GridWavefunction};
pub use io::{read_wavefunction, write_wavefunction};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::dist;
use crate::operators::jcoeff::j_coefficients_unchecked;
use crate::operators::{Direction, JCoefficients};
use crate::twist::TwistMap;

fn check_geometry(t: &TwistMap, grid: &Grid) -> Result<()> {
    let (d, p) = (t.dim(), grid.ndim() / t.dim().max(1));
    if grid.ndim() != p * d || p == 0 {
        return Err(Error::Dimension(format!("grid with {} axes for {d}-d internal points", grid.ndim())));
    }
    for k in 0..p {
        for c in t.x0().chunks(d) {
            for a in 0..d {
                let l = grid.half_widths()[k * d + a];
                if c[a].abs() + t.r0() >= l {
                    return Err(Error::Geometry(format!(
                        "cutoff ball around {c:?} reaches the box boundary on axis {}",
                        k * d + a
                    )));
                }
            }
        }
    }
    Ok(())
}

fn touches_support(t: &TwistMap, y: &[f64]) -> bool {
    let d = t.dim();
    y.chunks(d).any(|z| t.x0().chunks(d).any(|c| dist(z, c) < t.r0()))
}

fn jacobian_factor(t: &TwistMap, x: &[f64], base: &[f64]) -> f64 {
    base.chunks(t.dim()).map(|z| t.dz_unchecked(x, z).determinant().abs()).product()
}

fn transport(t: &TwistMap, x: &[f64], theta: &GridWavefunction, inverse: bool) -> Result<GridWavefunction> {
    if x.len() != t.x0().len() {
        return Err(Error::Dimension(format!("external tuple of length {}", x.len())));
    }
    if !t.in_domain(x) {
        return Err(Error::OutsideDomain(format!("x is not within delta0 = {} of x0", t.delta0())));
    }
    let grid = &theta.grid;
    check_geometry(t, grid)?;
    if x == t.x0() {
        return Ok(theta.clone());
    }
    let moved: Vec<usize> = (0..grid.len()).filter(|&i| touches_support(t, &grid.point(i))).collect();
    let targets: Vec<(Vec<f64>, f64)> = moved
        .par_iter()
        .map(|&i| {
            let y = grid.point(i);
            if inverse {
                let w = t.lift_inverse_unchecked(x, &y)?;
                let jac = jacobian_factor(t, x, &w);
                Ok((w, 1.0 / jac.sqrt()))
            } else {
                let jac = jacobian_factor(t, x, &y);
                Ok((t.lift_unchecked(x, &y), jac.sqrt()))
            }
        })
        .collect::<Result<_>>()?;
    let points: Vec<Vec<f64>> = targets.iter().map(|(w, _)| w.clone()).collect();
    let interp = theta.interpolate(&points);
    let mut values = theta.values.clone();
    for ((&i, (_, s)), v) in moved.iter().zip(&targets).zip(interp) {
        values[i] = v * *s;
    }
    Ok(GridWavefunction { grid: grid.clone(), values })
}

/// `y -> |det d_y F(x; y)|^{1/2} theta(F(x; y))`.
pub fn apply_u(t: &TwistMap, x: &[f64], theta: &GridWavefunction) -> Result<GridWavefunction> {
    transport(t, x, theta, false)
}

/// `y -> |det d_y F^{-1}(x; y)|^{1/2} theta(F^{-1}(x; y))`.
pub fn apply_u_inverse(t: &TwistMap, x: &[f64], theta: &GridWavefunction) -> Result<GridWavefunction> {
    transport(t, x, theta, true)
}

/// One of the four first-order conjugation identities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConjugationIdentity {
    /// `U^{-1} D_x U = D_x + J1(F) D_y + J2(F)`
    #[serde(rename = "1x")]
    InverseExternal,
    /// `U D_x U^{-1} = D_x + J1(F^{-1}) D_y + J2(F^{-1})`
    #[serde(rename = "2x")]
    ForwardExternal,
    /// `U^{-1} D_y U = J3(F) D_y + J4(F)`
    #[serde(rename = "1y")]
    InverseInternal,
    /// `U D_y U^{-1} = J3(F^{-1}) D_y + J4(F^{-1})`
    #[serde(rename = "2y")]
    ForwardInternal,
}

impl ConjugationIdentity {
    pub const ALL: [Self; 4] = [Self::InverseExternal, Self::ForwardExternal, Self::InverseInternal, Self::ForwardInternal];

    pub fn tag(self) -> &'static str {
        match self {
            Self::InverseExternal => "1x",
            Self::ForwardExternal => "2x",
            Self::InverseInternal => "1y",
            Self::ForwardInternal => "2y",
        }
    }

    fn direction(self) -> Direction {
        match self {
            Self::InverseExternal | Self::InverseInternal => Direction::Forward,
            Self::ForwardExternal | Self::ForwardInternal => Direction::Inverse,
        }
    }

    fn inner_is_u(self) -> bool {
        matches!(self, Self::InverseExternal | Self::InverseInternal)
    }
}

impl fmt::Display for ConjugationIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ConjugationIdentity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|i| i.tag() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown conjugation identity {s:?}")))
    }
}

/// Residual of a conjugation identity with both sides.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConjugationResidual {
    pub identity: ConjugationIdentity,
    pub relative: f64,
    pub lhs_norm: f64,
}

fn j_field(t: &TwistMap, x: &[f64], grid: &Grid, dir: Direction) -> Result<Vec<JCoefficients>> {
    (0..grid.len()).into_par_iter().map(|i| j_coefficients_unchecked(t, x, &grid.point(i), dir)).collect()
}

fn shifted(x: &[f64], c: usize, s: f64) -> Vec<f64> {
    let mut v = x.to_vec();
    v[c] += s;
    v
}

/// Fourth-order central difference of `D_x = -i d/dx_c`.
fn external_derivative(
    g: impl Fn(&[f64]) -> Result<GridWavefunction>,
    x: &[f64],
    c: usize,
    h: f64,
) -> Result<GridWavefunction> {
    let (p2, p1, m1, m2) = (g(&shifted(x, c, 2.0 * h))?, g(&shifted(x, c, h))?, g(&shifted(x, c, -h))?, g(&shifted(x, c, -2.0 * h))?);
    let scale = Complex64::new(0.0, -1.0 / (12.0 * h));
    let values = (0..p1.values.len())
        .map(|i| (-p2.values[i] + 8.0 * p1.values[i] - 8.0 * m1.values[i] + m2.values[i]) * scale)
        .collect();
    Ok(GridWavefunction { grid: p1.grid, values })
}

/// Relative L2 discrepancy between the two sides of `identity` applied to
/// the family `theta(x)`, summed over all derivative components.
///
/// Internal identities only use `theta(x)`; external ones difference the
/// family with step `1e-3 delta0`.
pub fn conjugation_residual(
    t: &TwistMap,
    x: &[f64],
    identity: ConjugationIdentity,
    theta: &(dyn Fn(&[f64]) -> Result<GridWavefunction> + Sync),
) -> Result<ConjugationResidual> {
    let base = theta(x)?;
    let grid = base.grid.clone();
    check_geometry(t, &grid)?;
    let jf = j_field(t, x, &grid, identity.direction())?;
    let inner = |x: &[f64], f: &GridWavefunction| if identity.inner_is_u() { apply_u(t, x, f) } else { apply_u_inverse(t, x, f) };
    let outer = |x: &[f64], f: &GridWavefunction| if identity.inner_is_u() { apply_u_inverse(t, x, f) } else { apply_u(t, x, f) };
    let dy: Vec<GridWavefunction> = (0..grid.ndim()).map(|b| base.derivative(b)).collect();
    let (mut num, mut den) = (0.0, 0.0);
    match identity {
        ConjugationIdentity::InverseInternal | ConjugationIdentity::ForwardInternal => {
            let moved = inner(x, &base)?;
            for c in 0..grid.ndim() {
                let lhs = outer(x, &moved.derivative(c))?;
                let rhs: Vec<Complex64> = (0..grid.len())
                    .map(|i| {
                        let j = &jf[i];
                        (0..grid.ndim()).map(|b| dy[b].values[i] * j.j3[(c, b)]).sum::<Complex64>() + j.j4[c] * base.values[i]
                    })
                    .collect();
                accumulate(&lhs.values, &rhs, &grid, &mut num, &mut den);
            }
        }
        ConjugationIdentity::InverseExternal | ConjugationIdentity::ForwardExternal => {
            let h = 1e-3 * t.delta0();
            for c in 0..x.len() {
                let dmoved = external_derivative(|xs| inner(xs, &theta(xs)?), x, c, h)?;
                let lhs = outer(x, &dmoved)?;
                let dx = external_derivative(theta, x, c, h)?;
                let rhs: Vec<Complex64> = (0..grid.len())
                    .map(|i| {
                        let j = &jf[i];
                        dx.values[i]
                            + (0..grid.ndim()).map(|b| dy[b].values[i] * j.j1[(c, b)]).sum::<Complex64>()
                            + j.j2[c] * base.values[i]
                    })
                    .collect();
                accumulate(&lhs.values, &rhs, &grid, &mut num, &mut den);
            }
        }
    }
    let relative = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    Ok(ConjugationResidual { identity, relative, lhs_norm: den.sqrt() })
}

fn accumulate(lhs: &[Complex64], rhs: &[Complex64], grid: &Grid, num: &mut f64, den: &mut f64) {
    let w = grid.cell_volume();
    *num += lhs.iter().zip(rhs).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() * w;
    *den += lhs.iter().map(|a| a.norm_sqr()).sum::<f64>() * w;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{MoleculeConfig, Nucleus};
    use crate::twist::{build_twist, CutoffFunction};

    fn setup() -> (TwistMap, Grid) {
        let cfg = MoleculeConfig::new(1, vec![Nucleus { position: vec![4.0], charge: 1.0 }], 2, 1).unwrap();
        let t = build_twist(&cfg, &[0.0], CutoffFunction::bump(1), 0.5).unwrap();
        (t, Grid::uniform(1, 128, 8.0).unwrap())
    }

    fn gaussian(grid: &Grid, shift: f64) -> GridWavefunction {
        GridWavefunction::from_fn(grid.clone(), |z| {
            let u = z[0] - 0.5 - shift;
            Complex64::new(-u * u, 0.7 * z[0]).exp()
        })
    }

    #[test]
    fn identity_at_base_point() {
        let (t, g) = setup();
        let th = gaussian(&g, 0.0);
        assert!(apply_u(&t, &[0.0], &th).unwrap() == th);
        assert!(apply_u_inverse(&t, &[0.0], &th).unwrap() == th);
    }

    #[test]
    fn unitary_and_invertible() {
        let (t, g) = setup();
        let th = gaussian(&g, 0.0);
        let x = [0.8 * t.delta0()];
        let u = apply_u(&t, &x, &th).unwrap();
        assert!((u.norm() - th.norm()).abs() <= 1e-8 * th.norm());
        let back = apply_u_inverse(&t, &x, &u).unwrap();
        assert!(back.sub(&th).norm() <= 1e-8 * th.norm());
        let ui = apply_u_inverse(&t, &x, &th).unwrap();
        assert!((ui.norm() - th.norm()).abs() <= 1e-8 * th.norm());
    }

    #[test]
    fn box_too_small_is_rejected() {
        let (t, _) = setup();
        let g = Grid::uniform(1, 64, 3.0).unwrap();
        assert!(matches!(apply_u(&t, &[0.1], &gaussian(&g, 0.0)), Err(Error::Geometry(_))));
    }

    #[test]
    fn all_identities_hold() {
        let (t, g) = setup();
        let x = [0.6 * t.delta0()];
        let fam = |xs: &[f64]| Ok(gaussian(&g, 0.3 * xs[0]));
        for id in ConjugationIdentity::ALL {
            let r = conjugation_residual(&t, &x, id, &fam).unwrap();
            assert!(r.relative <= 1e-6, "{id}: {}", r.relative);
        }
    }

    #[test]
    fn sobolev_norms_stay_comparable() {
        let (t, g) = setup();
        let th = gaussian(&g, 0.0);
        let u = apply_u(&t, &[0.9 * t.delta0()], &th).unwrap();
        for s in [1.0, 2.0] {
            let r = u.sobolev_norm(s) / th.sobolev_norm(s);
            assert!(r > 0.5 && r < 2.0, "{r}");
        }
    }

    #[test]
    fn tags_round_trip() {
        for id in ConjugationIdentity::ALL {
            assert_eq!(id.tag().parse::<ConjugationIdentity>().unwrap(), id);
        }
    }
}
