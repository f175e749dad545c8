use std::sync::Arc;

use num_complex::Complex64;
use twistcalc::geometry::MoleculeConfig;
use twistcalc::operators::{Coefficients, Diff2Operator, Domain, Layout, ScalarCoefficient, Term};
use twistcalc::states::{
    grid_eigensolve, harmonium_state, hydrogenic_state, BoundState, EigenOptions, GaussianState, GridHamiltonian,
    HarmoniumParams,
};
use twistcalc::twist::{build_twist, CutoffFunction, TwistMap};
use twistcalc::unitary::Grid;

use crate::config::{CutoffProfile, GridPotential, OperatorKind, RunConfig, StateSection};
use crate::error::{CliError, SetupExt};

pub fn layout(c: &RunConfig) -> Layout {
    Layout::new(c.molecule.external, c.internal(), c.molecule.dim)
}

pub fn molecule(c: &RunConfig) -> Result<MoleculeConfig, CliError> {
    let m = &c.molecule;
    MoleculeConfig::new(m.dim, m.nuclei.clone(), m.electrons, m.external).setup()
}

fn cutoff(c: &RunConfig) -> CutoffFunction {
    match c.twist.as_ref().map(|t| t.tau) {
        Some(CutoffProfile::Bump) | None => CutoffFunction::bump(c.molecule.dim),
    }
}

fn eta0(c: &RunConfig) -> f64 {
    c.twist.as_ref().map_or(0.5, |t| t.eta0)
}

/// The twist of the `[twist]` section with its overrides applied.
pub fn configured_twist(c: &RunConfig) -> Result<TwistMap, CliError> {
    let tw = c.require_twist()?;
    let mut t = build_twist(&molecule(c)?, &tw.x0, cutoff(c), tw.eta0).setup()?;
    if let Some(r0) = tw.r0 {
        t = t.with_r0(r0).setup()?;
    }
    if let Some(d0) = tw.delta0 {
        t = t.with_delta0(d0).setup()?;
    }
    Ok(t)
}

/// A twist whose domain contains `x`: the configured one when it does,
/// otherwise one centred half a domain radius away from `x`.
pub fn twist_around(c: &RunConfig, x: &[f64]) -> Result<TwistMap, CliError> {
    if c.twist.is_some() {
        let t = configured_twist(c)?;
        if t.in_domain(x) {
            return Ok(t);
        }
    }
    let mol = molecule(c)?;
    let here = build_twist(&mol, x, cutoff(c), eta0(c)).setup()?;
    let mut x0 = x.to_vec();
    x0[0] -= 0.5 * here.delta0();
    match build_twist(&mol, &x0, cutoff(c), eta0(c)) {
        Ok(t) if t.in_domain(x) => Ok(t),
        _ => Ok(here),
    }
}

pub fn internal_grid(c: &RunConfig) -> Result<Grid, CliError> {
    let g = c.require_grid()?;
    Grid::uniform(c.internal() * c.molecule.dim, g.points, g.half_width).setup()
}

fn grid_potential(kind: GridPotential, dim: usize) -> impl Fn(&[f64]) -> f64 + Send + Sync + 'static {
    move |z: &[f64]| {
        let harmonic = 0.5 * z.iter().map(|v| v * v).sum::<f64>();
        match kind {
            GridPotential::Harmonic => harmonic,
            GridPotential::Well => {
                let pts: Vec<&[f64]> = z.chunks(dim).collect();
                let mut w = 0.0;
                for i in 0..pts.len() {
                    for j in i + 1..pts.len() {
                        let r2: f64 = pts[i].iter().zip(pts[j]).map(|(a, b)| (a - b).powi(2)).sum();
                        w -= 1.5 * (-r2).exp();
                    }
                }
                harmonic + w
            }
        }
    }
}

pub fn state(c: &RunConfig, seed: u64) -> Result<BoundState, CliError> {
    let dim = c.molecule.dim;
    let s = match c.require_state()? {
        StateSection::Gaussian { width, kappa } => {
            BoundState::gaussian(GaussianState::new(width.clone(), kappa.clone()).setup()?, dim).setup()?
        }
        StateSection::Hydrogenic { charge } => hydrogenic_state(*charge, dim).setup()?,
        StateSection::Harmonium { coupling } => harmonium_state(HarmoniumParams::solvable(*coupling)).setup()?,
        StateSection::GridEigen { potential } => {
            let g = c.require_grid()?;
            let grid = Grid::uniform(c.molecule.electrons * dim, g.points, g.half_width).setup()?;
            let h = GridHamiltonian::schrodinger(layout(c), grid, grid_potential(*potential, dim)).setup()?;
            grid_eigensolve(&h, EigenOptions { seed, ..EigenOptions::default() })?
        }
        StateSection::File { path, energy } => BoundState::from_file(path, dim, *energy).setup()?,
    };
    if s.electrons != c.molecule.electrons || s.dim != dim {
        return Err(CliError::config(format!(
            "state has {} electrons in dimension {}, the molecule {} in dimension {dim}",
            s.electrons, s.dim, c.molecule.electrons
        )));
    }
    Ok(s)
}

fn constant(v: f64) -> ScalarCoefficient {
    Arc::new(move |_, _| Complex64::new(v, 0.0))
}

pub fn operator(c: &RunConfig) -> Result<Diff2Operator, CliError> {
    let lay = layout(c);
    let n = lay.n();
    let op = match c.require_operator()? {
        OperatorKind::Laplacian => Diff2Operator::laplacian(lay),
        OperatorKind::Variable => Diff2Operator::new(
            "variable",
            lay,
            Domain::Everywhere,
            Arc::new(move |x: &[f64], y: &[f64]| {
                let mut k = Coefficients::zeros(n);
                for (u, z) in x.iter().chain(y).enumerate() {
                    k.second[(u, u)] = Complex64::new(1.0 + 0.3 * z.sin(), 0.0);
                }
                k.zeroth = Complex64::new(1.0, 0.0);
                k
            }),
        ),
        OperatorKind::Indefinite => Diff2Operator::new(
            "indefinite",
            lay,
            Domain::Everywhere,
            Arc::new(move |_: &[f64], _: &[f64]| {
                let mut k = Coefficients::zeros(n);
                for u in 0..n {
                    k.second[(u, u)] = Complex64::new(if u == 0 { -1.0 } else { 1.0 }, 0.0);
                }
                k
            }),
        ),
        OperatorKind::OneMinusLaplacian | OperatorKind::DivergenceForm => {
            if lay.ny() != 0 || lay.nx() != 1 {
                return Err(CliError::config("periodic model operators need dim = 1 and external = electrons = 1"));
            }
            let mut terms = vec![Term { alpha: vec![0], beta: vec![], coefficient: constant(1.0) }];
            if c.operator == Some(OperatorKind::OneMinusLaplacian) {
                terms.push(Term { alpha: vec![2], beta: vec![], coefficient: constant(1.0) });
            } else {
                let a: ScalarCoefficient = Arc::new(|x, _| Complex64::new(2.0 + x[0].sin(), 0.0));
                let da: ScalarCoefficient = Arc::new(|x, _| Complex64::new(0.0, -x[0].cos()));
                terms.push(Term { alpha: vec![2], beta: vec![], coefficient: a });
                terms.push(Term { alpha: vec![1], beta: vec![], coefficient: da });
            }
            Diff2Operator::from_terms("periodic model", lay, terms).setup()?
        }
    };
    Ok(op)
}
