use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::MoleculeConfig;
use crate::states::BoundState;
use crate::twist::{build_twist, CutoffFunction, TwistMap};
use crate::unitary::{apply_u, Grid, GridWavefunction};

/// `y -> psi(x; y)` sampled on the internal grid.
pub fn sample_internal_state(psi: &BoundState, x: &[f64], grid: &Grid) -> Result<GridWavefunction> {
    if x.len() + grid.ndim() != psi.coords() {
        return Err(Error::Dimension(format!(
            "{} external and {} grid coordinates for a state in {}",
            x.len(),
            grid.ndim(),
            psi.coords()
        )));
    }
    Ok(GridWavefunction::from_fn(grid.clone(), |y| psi.split_value(x, y)))
}

/// Grid quadrature of `|psi(x; .)|^2` without any twist.
pub fn direct_grid_density(psi: &BoundState, x: &[f64], grid: &Grid) -> Result<f64> {
    Ok(sample_internal_state(psi, x, grid)?.norm_sq())
}

/// `||U_x psi(x; .)||^2` on the grid.
pub fn twisted_density(psi: &BoundState, t: &TwistMap, x: &[f64], grid: &Grid) -> Result<f64> {
    let theta = sample_internal_state(psi, x, grid)?;
    Ok(apply_u(t, x, &theta)?.norm_sq())
}

/// Twist around the doubled tuple `(x0, x0')`, used for density matrices.
pub fn doubled_twist(config: &MoleculeConfig, x0: &[f64], x0_prime: &[f64], tau: CutoffFunction, eta0: f64) -> Result<TwistMap> {
    let both: Vec<f64> = x0.iter().chain(x0_prime).copied().collect();
    build_twist(config, &both, tau, eta0)
}

/// `<U_{x,x'} psi(x; .), U_{x,x'} psi(x'; .)>` with the doubled twist.
pub fn twisted_density_matrix(psi: &BoundState, doubled: &TwistMap, x: &[f64], xp: &[f64], grid: &Grid) -> Result<Complex64> {
    let both: Vec<f64> = x.iter().chain(xp).copied().collect();
    let a = apply_u(doubled, &both, &sample_internal_state(psi, x, grid)?)?;
    let b = apply_u(doubled, &both, &sample_internal_state(psi, xp, grid)?)?;
    Ok(a.inner(&b))
}
