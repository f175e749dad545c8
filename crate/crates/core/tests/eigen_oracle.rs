use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use twistcalc::operators::Layout;
use twistcalc::states::{grid_eigensolve, EigenOptions, GridHamiltonian};
use twistcalc::unitary::Grid;

fn well(z: &[f64]) -> f64 {
    0.5 * z[0] * z[0] - 2.0 * (-z[0] * z[0]).exp()
}

/// Dense `-d^2/dx^2 + V` from the periodic sinc differentiation matrix.
fn dense_hamiltonian(grid: &Grid) -> DMatrix<f64> {
    let n = grid.sizes()[0];
    let half = grid.half_widths()[0];
    let h = 2.0 * PI / n as f64;
    let scale = (PI / half).powi(2);
    DMatrix::from_fn(n, n, |i, j| {
        let d2 = if i == j {
            -PI * PI / (3.0 * h * h) - 1.0 / 6.0
        } else {
            let k = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            -sign / (2.0 * (0.5 * k * h).sin().powi(2))
        };
        let v = if i == j { well(&grid.point(i)) } else { 0.0 };
        -scale * d2 + v
    })
}

#[test]
fn ground_state_matches_dense_diagonalisation() {
    let grid = Grid::uniform(1, 64, 8.0).unwrap();
    let dense = SymmetricEigen::new(dense_hamiltonian(&grid));
    let (imin, emin) = dense.eigenvalues.iter().enumerate().fold((0, f64::INFINITY), |a, (i, &e)| if e < a.1 { (i, e) } else { a });
    let h = GridHamiltonian::schrodinger(Layout::new(1, 0, 1), grid.clone(), well).unwrap();
    let state = grid_eigensolve(&h, EigenOptions::default()).unwrap();
    assert!((state.energy - emin).abs() <= 1e-8, "{} vs {emin}", state.energy);

    let v = dense.eigenvectors.column(imin);
    let psi: Vec<f64> = (0..64).map(|i| state.value(&grid.point(i)).re).collect();
    let np = psi.iter().map(|a| a * a).sum::<f64>().sqrt();
    let overlap = psi.iter().zip(v.iter()).map(|(a, b)| a * b).sum::<f64>().abs() / np;
    assert!((overlap - 1.0).abs() <= 1e-8, "overlap {overlap}");
}
