use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use twistcalc::densities::{
    analyticity_scan, current_density, doubled_twist, reduce_density, reduce_density_matrix, twisted_density,
    twisted_density_matrix, DensityKind, DensityReport, DensityRow, Method, ScanOptions,
};
use twistcalc::geometry::point;
use twistcalc::numerics::dist;
use twistcalc::operators::{sample_internal, twisted_ellipticity};
use twistcalc::pseudodiff::{build_parametrix, sobolev_norm, FrequencyCutoff};
use twistcalc::twist::{CutoffFunction, TwistMap};
use twistcalc::unitary::{conjugation_residual, ConjugationIdentity, Grid, GridWavefunction};
use twistcalc::Error;

use crate::config::{Expectation, RunConfig};
use crate::error::{CliError, SetupExt};
use crate::model;
use crate::report::{fmt, Outcome, Table};

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    value: f64,
    tolerance: f64,
    passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value <= tolerance }
    }
}

fn checks_table(checks: &[Check]) -> Table {
    let mut t = Table::new("checks", &["name", "value", "tolerance", "passed"]);
    for c in checks {
        t.push(vec![c.name.clone(), fmt(c.value), fmt(c.tolerance), c.passed.to_string()]);
    }
    t
}

fn coord_header(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn total_differential(
    f: impl Fn(&[f64], &[f64]) -> twistcalc::Result<Vec<f64>>,
    x: &[f64],
    z: &[f64],
    h: f64,
) -> Result<DMatrix<f64>, CliError> {
    let nx = x.len();
    let at: Vec<f64> = x.iter().chain(z).copied().collect();
    let mut cols = Vec::with_capacity(at.len());
    for i in 0..at.len() {
        let (mut p, mut q) = (at.clone(), at.clone());
        p[i] += h;
        q[i] -= h;
        let (fp, fq) = (f(&p[..nx], &p[nx..])?, f(&q[..nx], &q[nx..])?);
        cols.push(DVector::from_iterator(fp.len(), fp.iter().zip(&fq).map(|(a, b)| (a - b) / (2.0 * h))));
    }
    Ok(DMatrix::from_columns(&cols))
}

fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    m.columns_mut(0, a.ncols()).copy_from(a);
    m.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    m
}

/// Point of the internal ball around a random external centre.
fn near_centre(t: &TwistMap, rng: &mut ChaCha8Rng) -> Vec<f64> {
    use rand::Rng;
    let d = t.dim();
    let j = rng.gen_range(0..t.external_count());
    let v = twistcalc::twist::sample_ball(rng, d, 1.2 * t.r0());
    point(t.x0(), d, j).iter().zip(v).map(|(a, b)| a + b).collect()
}

pub fn twist_verify(c: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let t = model::configured_twist(c)?;
    let grid = model::internal_grid(c)?;
    let tol = c.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = t.dim();

    let (mut pin, mut trip, mut jac) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..tol.samples {
        let x = t.sample_domain(&mut rng, 0.99);
        for j in 0..t.external_count() {
            pin = pin.max(dist(&t.forward(&x, point(t.x0(), d, j))?, point(&x, d, j)));
        }
        for n in t.nuclei() {
            pin = pin.max(dist(&t.forward(&x, n)?, n));
        }
        let z = near_centre(&t, &mut rng);
        let w = t.forward(&x, &z)?;
        trip = trip.max(dist(&t.inverse(&x, &w)?, &z));
        let pkg = t.jacobians(&x, &z)?;
        let total = hstack(&pkg.dx, &pkg.dz);
        let fd = total_differential(|x, z| t.forward(x, z), &x, &z, 1e-5)?;
        jac = jac.max((&total - fd).norm() / total.norm());
        let inv = hstack(&pkg.dx_inv, &pkg.dz_inv);
        let fd = total_differential(|x, w| t.inverse(x, w), &x, &w, 1e-5)?;
        jac = jac.max((&inv - fd).norm() / inv.norm());
    }
    let cert = t.certify(&mut rng, tol.samples)?;

    let mut checks = vec![
        Check::at_most("pinning", pin, tol.pinning),
        Check::at_most("round_trip", trip, tol.round_trip),
        Check::at_most("jacobian", jac, tol.jacobian),
    ];
    for b in &cert.checks {
        checks.push(Check { name: b.name.clone(), value: b.worst, tolerance: b.bound, passed: b.passed });
    }

    let x: Vec<f64> = t.x0().iter().enumerate().map(|(i, v)| if i == 0 { v + 0.6 * t.delta0() } else { *v }).collect();
    let nx = x.len();
    let family = |xs: &[f64]| -> twistcalc::Result<GridWavefunction> {
        Ok(GridWavefunction::from_fn(grid.clone(), |y| {
            let mut e = Complex64::new(0.0, 0.0);
            for (a, v) in y.iter().enumerate() {
                let u = v - 0.5 - 0.3 * xs[a % nx];
                e += Complex64::new(-u * u, 0.7 * v);
            }
            e.exp()
        }))
    };
    let mut residuals = Vec::new();
    for id in ConjugationIdentity::ALL {
        let r = conjugation_residual(&t, &x, id, &family)?;
        checks.push(Check::at_most(&format!("conjugation_{}", id.tag()), r.relative, tol.conjugation));
        residuals.push(r);
    }
    let passed = checks.iter().all(|c| c.passed);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    Ok(Outcome {
        passed,
        summary: if passed { format!("{} checks passed", checks.len()) } else { format!("failed: {}", failed.join(", ")) },
        body: json!({
            "r0": t.r0(),
            "delta0": t.delta0(),
            "eta0": t.eta0(),
            "samples": tol.samples,
            "checks": checks,
            "certificate": cert,
            "conjugation": residuals,
        }),
        tables: vec![checks_table(&checks)],
    })
}

fn domain_points(c: &RunConfig, t: &TwistMap, rng: &mut ChaCha8Rng) -> Vec<(Vec<f64>, Vec<f64>)> {
    let ys = sample_internal(t, rng, c.tolerances.points);
    ys.into_iter().map(|y| (t.sample_domain(rng, 1.0), y)).collect()
}

pub fn ellipticity(c: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let t = model::configured_twist(c)?;
    let p = model::operator(c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = domain_points(c, &t, &mut rng);
    match twisted_ellipticity(&p, &t, &points, c.tolerances.covectors) {
        Ok(r) => {
            let margin = r.worst_ratio - r.derived_constant;
            let mut table = Table::new("ellipticity", &["quantity", "value"]);
            for (k, v) in [
                ("C_P", r.base.constant),
                ("C", r.j3_bound),
                ("M", r.j1_sup),
                ("S", r.s_factor),
                ("bound", r.derived_constant),
                ("worst_ratio", r.worst_ratio),
                ("margin", margin),
            ] {
                table.push(vec![k.into(), fmt(v)]);
            }
            Ok(Outcome {
                passed: r.passed,
                summary: format!("worst ratio {:.6} against bound {:.6}", r.worst_ratio, r.derived_constant),
                body: json!({
                    "operator": p.name,
                    "C_P": r.base.constant,
                    "C": r.j3_bound,
                    "M": r.j1_sup,
                    "S": r.s_factor,
                    "bound": r.derived_constant,
                    "worst_ratio": r.worst_ratio,
                    "margin": margin,
                    "samples": r.samples,
                    "detail": r,
                }),
                tables: vec![table],
            })
        }
        Err(Error::NotElliptic(witness)) => Ok(Outcome {
            passed: false,
            summary: format!("not elliptic: {witness}"),
            body: json!({ "operator": p.name, "elliptic": false, "witness": witness }),
            tables: vec![],
        }),
        Err(e) => Err(e.into()),
    }
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(f64::MIN_POSITIVE)
}

pub fn density(c: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let psi = model::state(c, seed)?;
    let k = c.molecule.external;
    let twisted = c.scan.twisted && c.internal() > 0 && c.grid.is_some();
    let grid = if twisted { Some(model::internal_grid(c)?) } else { None };
    if c.scan.points.is_empty() {
        return Err(CliError::config("[scan] needs `points`"));
    }
    let nx = k * c.molecule.dim;
    let mut header = coord_header("x", nx);
    header.extend(["rho", "error", "twisted", "discrepancy"].map(String::from));
    let mut table = Table { name: "density".into(), header, rows: Vec::new() };
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for x in &c.scan.points {
        let e = reduce_density(&psi, k, x)?;
        let (tw, disc) = match &grid {
            Some(g) => {
                let t = model::twist_around(c, x)?;
                let v = twisted_density(&psi, &t, x, g)?;
                (Some(v), Some(relative(e.value, v)))
            }
            None => (None, None),
        };
        worst = worst.max(disc.unwrap_or(0.0));
        let mut row: Vec<String> = x.iter().map(|v| fmt(*v)).collect();
        row.extend([fmt(e.value), fmt(e.error), tw.map(fmt).unwrap_or_default(), disc.map(fmt).unwrap_or_default()]);
        table.push(row);
        rows.push(DensityRow { x: x.clone(), x_prime: None, re: vec![e.value], im: vec![0.0], error: e.error, twisted: tw, discrepancy: disc });
    }
    let passed = worst <= c.tolerances.discrepancy;
    let report = DensityReport {
        kind: DensityKind::Density,
        k,
        method: if twisted { Method::Twisted } else { Method::Direct },
        quadrature: psi.kind.tag().into(),
        rows,
    };
    Ok(Outcome {
        passed,
        summary: format!("{} points, max discrepancy {worst:.3e}", c.scan.points.len()),
        body: json!({ "report": report, "max_discrepancy": worst, "tolerance": c.tolerances.discrepancy }),
        tables: vec![table],
    })
}

pub fn gamma(c: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let psi = model::state(c, seed)?;
    let k = c.molecule.external;
    if c.scan.points.is_empty() || c.scan.primes.is_empty() {
        return Err(CliError::config("[scan] needs `points` and `primes`"));
    }
    let twisted = c.scan.twisted && c.internal() > 0 && c.grid.is_some();
    let grid = if twisted { Some(model::internal_grid(c)?) } else { None };
    let nx = k * c.molecule.dim;
    let mut header = coord_header("x", nx);
    header.extend(coord_header("xp", nx));
    header.extend(["re", "im", "error", "twisted_re", "twisted_im", "discrepancy"].map(String::from));
    let mut table = Table { name: "gamma".into(), header, rows: Vec::new() };
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mol = if twisted { Some(model::molecule(c)?) } else { None };
    for (x, xp) in c.scan.points.iter().zip(&c.scan.primes) {
        let e = reduce_density_matrix(&psi, k, x, xp)?;
        let tw = match (&grid, &mol) {
            (Some(g), Some(m)) => {
                let eta0 = c.twist.as_ref().map_or(0.5, |t| t.eta0);
                let t2 = doubled_twist(m, x, xp, CutoffFunction::bump(c.molecule.dim), eta0).setup()?;
                let both: Vec<f64> = x.iter().chain(xp).copied().collect();
                if !t2.in_domain(&both) {
                    return Err(CliError::config(format!("points {x:?}, {xp:?} are outside their doubled twist domain")));
                }
                Some(twisted_density_matrix(&psi, &t2, x, xp, g)?)
            }
            _ => None,
        };
        let disc = tw.map(|v| (v - e.value).norm() / e.value.norm().max(f64::MIN_POSITIVE));
        worst = worst.max(disc.unwrap_or(0.0));
        let mut row: Vec<String> = x.iter().chain(xp).map(|v| fmt(*v)).collect();
        row.extend([
            fmt(e.value.re),
            fmt(e.value.im),
            fmt(e.error),
            tw.map(|v| fmt(v.re)).unwrap_or_default(),
            tw.map(|v| fmt(v.im)).unwrap_or_default(),
            disc.map(fmt).unwrap_or_default(),
        ]);
        table.push(row);
        rows.push(DensityRow {
            x: x.clone(),
            x_prime: Some(xp.clone()),
            re: vec![e.value.re],
            im: vec![e.value.im],
            error: e.error,
            twisted: tw.map(|v| v.norm()),
            discrepancy: disc,
        });
    }
    let report = DensityReport {
        kind: DensityKind::DensityMatrix,
        k,
        method: if twisted { Method::Twisted } else { Method::Direct },
        quadrature: psi.kind.tag().into(),
        rows,
    };
    Ok(Outcome {
        passed: worst <= c.tolerances.discrepancy,
        summary: format!("{} pairs, max discrepancy {worst:.3e}", c.scan.points.len()),
        body: json!({ "report": report, "max_discrepancy": worst, "tolerance": c.tolerances.discrepancy }),
        tables: vec![table],
    })
}

pub fn current(c: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let psi = model::state(c, seed)?;
    let k = c.molecule.external;
    if c.scan.points.is_empty() {
        return Err(CliError::config("[scan] needs `points`"));
    }
    let nx = k * c.molecule.dim;
    let mut header = coord_header("x", nx);
    header.extend(coord_header("c", nx));
    header.push("error".into());
    let mut table = Table { name: "current".into(), header, rows: Vec::new() };
    let mut rows = Vec::new();
    for x in &c.scan.points {
        let e = current_density(&psi, k, x)?;
        let mut row: Vec<String> = x.iter().chain(&e.value).map(|v| fmt(*v)).collect();
        row.push(fmt(e.error));
        table.push(row);
        rows.push(DensityRow {
            x: x.clone(),
            x_prime: None,
            re: e.value.clone(),
            im: vec![0.0; nx],
            error: e.error,
            twisted: None,
            discrepancy: None,
        });
    }
    let report = DensityReport { kind: DensityKind::Current, k, method: Method::Direct, quadrature: psi.kind.tag().into(), rows };
    Ok(Outcome {
        passed: true,
        summary: format!("{} points", c.scan.points.len()),
        body: json!({ "report": report }),
        tables: vec![table],
    })
}

pub fn analyticity(c: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let psi = model::state(c, seed)?;
    let k = c.molecule.external;
    let s = &c.scan;
    let (Some(center), Some(direction)) = (&s.center, &s.direction) else {
        return Err(CliError::config("[scan] needs `center` and `direction`"));
    };
    let failure = std::sync::Mutex::new(None);
    let rho = |x: &[f64]| match reduce_density(&psi, k, x) {
        Ok(e) => e.value,
        Err(e) => {
            failure.lock().expect("lock").get_or_insert(e.to_string());
            f64::NAN
        }
    };
    let r = analyticity_scan(&rho, center, direction, s.max_order, s.radius, ScanOptions::default());
    if let Some(msg) = failure.into_inner().expect("lock") {
        return Err(CliError::Check(msg));
    }
    let r = r.map_err(|e| CliError::config(e.to_string()))?;
    let passed = match s.expect {
        None => true,
        Some(Expectation::Pass) => r.pass(),
        Some(Expectation::Cusp) => r.cusp,
    };
    let mut line = Table::new("analyticity_line", &["t", "value"]);
    for (t, v) in &r.line {
        line.push(vec![fmt(*t), fmt(*v)]);
    }
    let mut derivs = Table::new("analyticity_derivatives", &["order", "magnitude", "magnitude_half_radius"]);
    for (n, (a, b)) in r.derivatives.iter().zip(&r.derivatives_half).enumerate() {
        derivs.push(vec![n.to_string(), fmt(*a), fmt(*b)]);
    }
    Ok(Outcome {
        passed,
        summary: format!("A = {:.4}, stable = {}, cusp = {}", r.constant, r.stable, r.cusp),
        body: json!({ "cusp": r.cusp, "pass": r.pass(), "expect": s.expect.map(|e| format!("{e:?}").to_lowercase()), "scan": r }),
        tables: vec![line, derivs],
    })
}

pub fn parametrix(c: &RunConfig, _seed: u64) -> Result<Outcome, CliError> {
    let p = model::operator(c)?;
    let g = c.require_grid()?;
    let grid = Grid::uniform(1, g.points, g.half_width).setup()?;
    let pts: Vec<(Vec<f64>, Vec<f64>)> = (0..32).map(|i| (vec![-g.half_width + i as f64 * g.half_width / 16.0], vec![])).collect();
    let par = build_parametrix(&p, FrequencyCutoff::default(), &pts, 128)?;
    let u = GridWavefunction::from_fn(grid.clone(), |z| {
        let w = PI * z[0] / g.half_width;
        Complex64::new(w.cos().exp(), (2.0 * w).sin())
    });
    let cut = par.cutoff;
    let smoothing = u.multiply_spectrum(|k, _| Complex64::new(cut.value(k).powi(2), 0.0));
    let composed = par.apply_r(&u).sub(&par.apply_r_composed(&u)).norm() / u.norm();
    let identity = par.apply_q(&par.apply_p(&u)).sub(&u.sub(&par.apply_r(&u))).norm() / u.norm();
    let constant_case = p.coefficients(&[0.0], &[]) == p.coefficients(&[1.0], &[]);
    let mut checks = vec![Check::at_most("qp_equals_identity_minus_r", identity, c.tolerances.parametrix.max(1e-10))];
    if constant_case {
        let r = par.apply_r(&u).sub(&smoothing).norm() / u.norm();
        checks.push(Check::at_most("residual", r, c.tolerances.parametrix));
    } else {
        checks.push(Check::at_most("remainder_associativity", composed, 1e-8));
    }
    let nyquist = PI * g.points as f64 / (2.0 * g.half_width);
    let base = PI / g.half_width;
    let bands: Vec<f64> = (2..8).map(|e| base * 2f64.powi(e)).filter(|k| *k <= 0.5 * nyquist).collect();
    let mut ratios = Table::new("parametrix_ratios", &["s", "band", "ratio"]);
    let mut gains = Vec::new();
    for s in [-2.0, 0.0, 2.0] {
        let mut prev: Option<f64> = None;
        for &k in &bands {
            let w = GridWavefunction::from_fn(grid.clone(), |z| Complex64::new(0.0, k * z[0]).exp());
            let r = sobolev_norm(&par.apply_r(&w), s) / sobolev_norm(&w, s);
            ratios.push(vec![fmt(s), fmt(k), fmt(r)]);
            if let Some(q) = prev {
                gains.push(json!({ "s": s, "band": k, "factor": q / r }));
                if !constant_case && r > 0.0 {
                    checks.push(Check {
                        name: format!("order_gain_s{s}_k{k:.0}"),
                        value: q / r,
                        tolerance: c.tolerances.order_gain,
                        passed: q / r >= c.tolerances.order_gain,
                    });
                }
            }
            prev = Some(r);
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    let residual = checks.iter().find(|c| c.name == "residual").map(|c| c.value);
    Ok(Outcome {
        passed,
        summary: match residual {
            Some(r) => format!("constant coefficients, residual {r:.3e}"),
            None => format!("variable coefficients, {} order-gain checks", checks.len() - 2),
        },
        body: json!({
            "operator": p.name,
            "constant_coefficients": constant_case,
            "residual": residual,
            "certificate": par.certificate,
            "checks": checks,
            "gains": gains,
        }),
        tables: vec![checks_table(&checks), ratios],
    })
}
