use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::chebyshev::ChebSeries;
use crate::numerics::fit::{Growth, GrowthFit};
use crate::numerics::norm;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Chebyshev-Lobatto nodes minus one.
    pub nodes: usize,
    /// Relative coefficient floor below which the series is chopped.
    pub chop: f64,
    /// Tail of the unchopped series above which the function is flagged.
    pub cusp_tail: f64,
    /// Largest accepted change of the fitted constant when the radius halves.
    pub stability: f64,
    /// Number of plot samples along the segment.
    pub plot_points: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { nodes: 128, chop: 1e-13, cusp_tail: 1e-10, stability: 1.25, plot_points: 65 }
    }
}

/// One of the three equivalent growth characterizations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Characterization {
    /// `alpha!`, `|alpha|!` or `(1 + |alpha|)^|alpha|`.
    pub weight: String,
    pub constant: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticityReport {
    pub center: Vec<f64>,
    pub direction: Vec<f64>,
    pub radius: f64,
    pub max_order: usize,
    /// `|D^n g(0)|` for `n = 0..=max_order` at the full and the halved radius.
    pub derivatives: Vec<f64>,
    pub derivatives_half: Vec<f64>,
    /// Fitted `A` in `|D^n g| <= A^(n+1) n!` at both radii.
    pub constant: f64,
    pub constant_half: f64,
    pub tail_ratio: f64,
    pub stable: bool,
    pub cusp: bool,
    pub multi_index: Characterization,
    pub factorial: Characterization,
    pub power: Characterization,
    /// `(t, g(center + t direction))` along the segment.
    pub line: Vec<(f64, f64)>,
}

impl AnalyticityReport {
    pub fn pass(&self) -> bool {
        self.factorial.pass
    }
}

fn derivatives_at_center(series: &ChebSeries, max_order: usize) -> Vec<f64> {
    let mut s = series.clone();
    let mut out = Vec::with_capacity(max_order + 1);
    for _ in 0..=max_order {
        out.push(s.eval(0.0).abs());
        s = s.derivative();
    }
    out
}

/// Factorial-growth diagnostic for `g` on the segment `center + t u`,
/// `|t| <= radius`, with `u` the normalised direction.
pub fn analyticity_scan(
    g: &dyn Fn(&[f64]) -> f64,
    center: &[f64],
    direction: &[f64],
    max_order: usize,
    radius: f64,
    opts: ScanOptions,
) -> Result<AnalyticityReport> {
    if max_order > 14 {
        return Err(Error::Invalid(format!("max order {max_order} above 14")));
    }
    if center.len() != direction.len() || center.is_empty() {
        return Err(Error::Dimension("centre and direction differ in length".into()));
    }
    let dn = norm(direction);
    if !(dn > 0.0) || !(radius > 0.0) {
        return Err(Error::Invalid("direction and radius must be non-zero".into()));
    }
    let u: Vec<f64> = direction.iter().map(|v| v / dn).collect();
    let line = |t: f64| {
        let p: Vec<f64> = center.iter().zip(&u).map(|(c, d)| c + t * d).collect();
        g(&p)
    };
    let mut bad = None;
    let sample = |r: f64| ChebSeries::interpolate(line, -r, r, opts.nodes);
    let full = sample(radius);
    let half = sample(0.5 * radius);
    for s in [&full, &half] {
        if s.coeffs().iter().any(|c| !c.is_finite()) {
            bad = Some("non-finite value on the segment");
        }
    }
    if let Some(msg) = bad {
        return Err(Error::Invalid(msg.into()));
    }
    let tail_ratio = full.tail_ratio(8).max(half.tail_ratio(8));
    let (mut fc, mut hc) = (full.clone(), half.clone());
    fc.chop(opts.chop);
    hc.chop(opts.chop);
    let derivatives = derivatives_at_center(&fc, max_order);
    let derivatives_half = derivatives_at_center(&hc, max_order);
    let fit = GrowthFit::new(&derivatives, Growth::Factorial);
    let fit_half = GrowthFit::new(&derivatives_half, Growth::Factorial);
    let ratio = if fit.constant > 0.0 { fit_half.constant / fit.constant } else if fit_half.constant > 0.0 { f64::INFINITY } else { 1.0 };
    let stable = ratio.is_finite() && ratio <= opts.stability && ratio >= 1.0 / opts.stability;
    let diverging = ratio > opts.stability;
    let cusp = tail_ratio > opts.cusp_tail || diverging;
    let pass = stable && !cusp;
    // n! <= (1 + n)^n <= e^(n+1) n!, so each bound follows from the other
    // with the constant scaled by at most e: the verdicts coincide.
    let power = GrowthFit::new(&derivatives, Growth::PowerTower);
    let line_pts = (0..opts.plot_points)
        .map(|i| {
            let t = -radius + 2.0 * radius * i as f64 / (opts.plot_points.max(2) - 1) as f64;
            (t, line(t))
        })
        .collect();
    Ok(AnalyticityReport {
        center: center.to_vec(),
        direction: u,
        radius,
        max_order,
        derivatives,
        derivatives_half,
        constant: fit.constant,
        constant_half: fit_half.constant,
        tail_ratio,
        stable,
        cusp,
        multi_index: Characterization { weight: "alpha!".into(), constant: fit.constant, pass },
        factorial: Characterization { weight: "|alpha|!".into(), constant: fit.constant, pass },
        power: Characterization { weight: "(1+|alpha|)^|alpha|".into(), constant: power.constant, pass },
        line: line_pts,
    })
}
