//! Second-order differential operators on `Omega x R^{pd}`, their symbols,
//! ellipticity certificates and conjugation by the twist unitary.

mod conjugate;
mod ellipticity;
mod hamiltonian;
pub(crate) mod jcoeff;
mod twisted_potential;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub use conjugate::{conjugate_operator, principal_symbol_by_homogeneity, twisted_principal_symbol};
pub use ellipticity::{ellipticity_certificate, twisted_ellipticity, EllipticityCertificate, TwistedEllipticity};
pub use hamiltonian::{assemble_hamiltonian, Hamiltonian, KineticForm, Mode};
pub use jcoeff::{j_coefficients, Direction, JCoefficients};
pub use twisted_potential::{
    sample_internal, twisted_potential, twisted_potential_derivative, twisted_potential_report, PairingCase,
    TwistedPotentialReport,
};

use crate::error::{Error, Result};

/// Variable counts: `m` external and `p` internal points in dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub m: usize,
    pub p: usize,
    pub d: usize,
}

impl Layout {
    pub fn new(m: usize, p: usize, d: usize) -> Self {
        Self { m, p, d }
    }
    pub fn nx(&self) -> usize {
        self.m * self.d
    }
    pub fn ny(&self) -> usize {
        self.p * self.d
    }
    pub fn n(&self) -> usize {
        self.nx() + self.ny()
    }
}

/// Coefficients at one point of `sum a_uv D_u D_v + sum b_u D_u + c`, where
/// `D = -i d` and the variables are `(x, y)` in that order. `a` is symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients {
    pub second: DMatrix<Complex64>,
    pub first: DVector<Complex64>,
    pub zeroth: Complex64,
}

impl Coefficients {
    pub fn zeros(n: usize) -> Self {
        Self { second: DMatrix::zeros(n, n), first: DVector::zeros(n), zeroth: Complex64::new(0.0, 0.0) }
    }

    /// Principal symbol `zeta^T a zeta`.
    pub fn principal(&self, zeta: &[f64]) -> Complex64 {
        let n = zeta.len();
        let mut s = Complex64::new(0.0, 0.0);
        for u in 0..n {
            for v in 0..n {
                s += self.second[(u, v)] * zeta[u] * zeta[v];
            }
        }
        s
    }

    /// Full symbol of the operator applied to `exp(i zeta . z)`.
    pub fn total(&self, zeta: &[f64]) -> Complex64 {
        let lin: Complex64 = self.first.iter().zip(zeta).map(|(b, z)| b * z).sum();
        self.principal(zeta) + lin + self.zeroth
    }
}

/// Where the operator's coefficients are defined in the external variables.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Everywhere,
    /// Product of balls of a common radius around the given centres.
    Balls { centres: Vec<f64>, radius: f64 },
}

impl Domain {
    pub fn contains(&self, x: &[f64], d: usize) -> bool {
        match self {
            Domain::Everywhere => true,
            Domain::Balls { centres, radius } => x
                .chunks(d)
                .zip(centres.chunks(d))
                .all(|(a, c)| crate::numerics::dist(a, c) < *radius),
        }
    }
}

pub type CoefficientFn = Arc<dyn Fn(&[f64], &[f64]) -> Coefficients + Send + Sync>;
pub type ScalarCoefficient = Arc<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>;

/// One term `c(x; y) D_x^alpha D_y^beta` with `|alpha| + |beta| <= 2`.
#[derive(Clone)]
pub struct Term {
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    pub coefficient: ScalarCoefficient,
}

#[derive(Clone)]
pub struct Diff2Operator {
    pub name: String,
    pub layout: Layout,
    pub domain: Domain,
    coefficients: CoefficientFn,
}

impl std::fmt::Debug for Diff2Operator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Diff2Operator").field("name", &self.name).field("layout", &self.layout).finish()
    }
}

impl Diff2Operator {
    pub fn new(name: impl Into<String>, layout: Layout, domain: Domain, coefficients: CoefficientFn) -> Self {
        Self { name: name.into(), layout, domain, coefficients }
    }

    /// Builds the operator from its terms `c_{alpha beta} D_x^alpha D_y^beta`.
    pub fn from_terms(name: impl Into<String>, layout: Layout, terms: Vec<Term>) -> Result<Self> {
        let n = layout.n();
        let mut slots = Vec::with_capacity(terms.len());
        for t in &terms {
            if t.alpha.len() != layout.nx() || t.beta.len() != layout.ny() {
                return Err(Error::Dimension("multi-index length does not match the layout".into()));
            }
            let vars: Vec<usize> = t
                .alpha
                .iter()
                .chain(&t.beta)
                .enumerate()
                .flat_map(|(v, &k)| std::iter::repeat(v).take(k))
                .collect();
            if vars.len() > 2 {
                return Err(Error::Invalid(format!("term of order {} in a second-order operator", vars.len())));
            }
            slots.push((vars, t.coefficient.clone()));
        }
        let coefficients: CoefficientFn = Arc::new(move |x, y| {
            let mut c = Coefficients::zeros(n);
            for (vars, f) in &slots {
                let v = f(x, y);
                match vars.as_slice() {
                    [] => c.zeroth += v,
                    [u] => c.first[*u] += v,
                    [u, w] if u == w => c.second[(*u, *u)] += v,
                    [u, w] => {
                        c.second[(*u, *w)] += 0.5 * v;
                        c.second[(*w, *u)] += 0.5 * v;
                    }
                    _ => unreachable!(),
                }
            }
            c
        });
        Ok(Self::new(name, layout, Domain::Everywhere, coefficients))
    }

    /// `-Delta_x - Delta_y`.
    pub fn laplacian(layout: Layout) -> Self {
        let n = layout.n();
        Self::new(
            "laplacian",
            layout,
            Domain::Everywhere,
            Arc::new(move |_, _| Coefficients {
                second: DMatrix::identity(n, n),
                ..Coefficients::zeros(n)
            }),
        )
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn coefficients(&self, x: &[f64], y: &[f64]) -> Coefficients {
        (self.coefficients)(x, y)
    }

    pub(crate) fn coefficient_fn(&self) -> CoefficientFn {
        self.coefficients.clone()
    }

    /// `c_{alpha beta}(x; y)`.
    pub fn coefficient(&self, alpha: &[usize], beta: &[usize], x: &[f64], y: &[f64]) -> Result<Complex64> {
        let idx: Vec<usize> = alpha
            .iter()
            .chain(beta)
            .enumerate()
            .flat_map(|(v, &k)| std::iter::repeat(v).take(k))
            .collect();
        let c = self.coefficients(x, y);
        Ok(match idx.as_slice() {
            [] => c.zeroth,
            [u] => c.first[*u],
            [u, w] if u == w => c.second[(*u, *u)],
            [u, w] => c.second[(*u, *w)] + c.second[(*w, *u)],
            _ => return Err(Error::Invalid("order above two".into())),
        })
    }

    /// Principal symbol at `(x, y, xi, eta)`.
    pub fn principal_symbol(&self, x: &[f64], y: &[f64], xi: &[f64], eta: &[f64]) -> Complex64 {
        let zeta: Vec<f64> = xi.iter().chain(eta).copied().collect();
        self.coefficients(x, y).principal(&zeta)
    }

    /// `e^{-i(x.xi + y.eta)} P e^{i(x.xi + y.eta)}`.
    pub fn total_symbol(&self, x: &[f64], y: &[f64], xi: &[f64], eta: &[f64]) -> Complex64 {
        let zeta: Vec<f64> = xi.iter().chain(eta).copied().collect();
        self.coefficients(x, y).total(&zeta)
    }
}
