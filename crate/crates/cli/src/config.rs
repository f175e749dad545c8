//! Line-oriented run configuration.
//!
//! ```text
//! # comment
//! [section]
//! key = value        # trailing comment
//! ```
//!
//! Lists are separated by whitespace or commas; tuples of lists by `;`.
//! Nuclei are written `position : charge`, for example `4.0 : 1.0 ; -1 0 0 : 2`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use twistcalc::geometry::Nucleus;

use crate::error::CliError;

#[derive(Debug, Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

/// Sections and their raw entries, in file order of first appearance.
#[derive(Debug, Default)]
pub struct RawConfig {
    sections: BTreeMap<String, Section>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut raw = RawConfig::default();
        let mut current: Option<String> = None;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| CliError::config(format!("line {n}: malformed section header")))?;
                if raw.sections.contains_key(name) {
                    return Err(CliError::config(format!("line {n}: section [{name}] repeated")));
                }
                raw.sections.insert(name.to_string(), Section { line: n, entries: BTreeMap::new() });
                current = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(format!("line {n}: expected `key = value`")));
            };
            let Some(section) = current.as_ref() else {
                return Err(CliError::config(format!("line {n}: entry outside any section")));
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::config(format!("line {n}: empty key")));
            }
            let entries = &mut raw.sections.get_mut(section).expect("section exists").entries;
            if entries.insert(key.to_string(), (n, value.trim().to_string())).is_some() {
                return Err(CliError::config(format!("line {n}: key `{key}` repeated in [{section}]")));
            }
        }
        Ok(raw)
    }

    fn section(&self, name: &str) -> Option<Fields<'_>> {
        self.sections.get(name).map(|s| Fields { name: name.to_string(), section: s, used: Default::default() })
    }

    fn required(&self, name: &str) -> Result<Fields<'_>, CliError> {
        self.section(name).ok_or_else(|| CliError::config(format!("missing section [{name}]")))
    }
}

struct Fields<'a> {
    name: String,
    section: &'a Section,
    used: std::cell::RefCell<Vec<String>>,
}

impl Fields<'_> {
    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.used.borrow_mut().push(key.to_string());
        self.section.entries.get(key).map(|(n, v)| (*n, v.as_str()))
    }

    fn err(&self, line: usize, msg: impl std::fmt::Display) -> CliError {
        CliError::config(format!("line {line}: [{}] {msg}", self.name))
    }

    fn missing(&self, key: &str) -> CliError {
        CliError::config(format!("line {}: [{}] requires `{key}`", self.section.line, self.name))
    }

    fn string(&self, key: &str) -> Option<String> {
        self.raw(key).map(|(_, v)| v.to_string())
    }

    fn req_string(&self, key: &str) -> Result<String, CliError> {
        self.string(key).ok_or_else(|| self.missing(key))
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some((n, v)) => v.parse().map(Some).map_err(|_| self.err(n, format!("`{key}` is not a valid number: {v}"))),
        }
    }

    fn req_number<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.number(key)?.ok_or_else(|| self.missing(key))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some((n, v)) => parse_list(v).map(Some).map_err(|e| self.err(n, format!("`{key}`: {e}"))),
        }
    }

    fn req_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        self.list(key)?.ok_or_else(|| self.missing(key))
    }

    fn tuples(&self, key: &str) -> Result<Option<Vec<Vec<f64>>>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some((n, v)) => v
                .split(';')
                .map(parse_list)
                .collect::<Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|e| self.err(n, format!("`{key}`: {e}"))),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some((_, "true" | "yes" | "1")) => Ok(Some(true)),
            Some((_, "false" | "no" | "0")) => Ok(Some(false)),
            Some((n, v)) => Err(self.err(n, format!("`{key}` is not a boolean: {v}"))),
        }
    }

    /// Rejects keys that were never looked up.
    fn finish(self) -> Result<(), CliError> {
        let used = self.used.borrow();
        for (key, (n, _)) in &self.section.entries {
            if !used.contains(key) {
                return Err(self.err(*n, format!("unknown key `{key}`")));
            }
        }
        Ok(())
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    let out: Result<Vec<f64>, _> = v.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).map(str::parse).collect();
    match out {
        Ok(l) if l.is_empty() => Err("empty list".into()),
        Ok(l) => Ok(l),
        Err(_) => Err(format!("not a list of numbers: {v}")),
    }
}

#[derive(Clone, Debug)]
pub struct MoleculeSection {
    pub dim: usize,
    pub nuclei: Vec<Nucleus>,
    pub electrons: usize,
    /// Number of external electrons, the `k` of the reduced quantities.
    pub external: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct GridSection {
    pub points: usize,
    pub half_width: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutoffProfile {
    Bump,
}

#[derive(Clone, Debug)]
pub struct TwistSection {
    pub x0: Vec<f64>,
    pub eta0: f64,
    pub tau: CutoffProfile,
    pub r0: Option<f64>,
    pub delta0: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridPotential {
    Harmonic,
    Well,
}

#[derive(Clone, Debug)]
pub enum StateSection {
    Gaussian { width: DMatrix<f64>, kappa: DVector<f64> },
    Hydrogenic { charge: f64 },
    Harmonium { coupling: f64 },
    GridEigen { potential: GridPotential },
    File { path: PathBuf, energy: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Laplacian,
    Variable,
    Indefinite,
    OneMinusLaplacian,
    DivergenceForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expectation {
    Pass,
    Cusp,
}

#[derive(Clone, Debug, Default)]
pub struct ScanSection {
    pub points: Vec<Vec<f64>>,
    pub primes: Vec<Vec<f64>>,
    pub twisted: bool,
    pub center: Option<Vec<f64>>,
    pub direction: Option<Vec<f64>>,
    pub radius: f64,
    pub max_order: usize,
    pub expect: Option<Expectation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
}

impl std::str::FromStr for Formats {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let mut f = Formats { csv: false, json: false };
        for w in s.split(|c: char| c.is_whitespace() || c == ',').filter(|w| !w.is_empty()) {
            match w {
                "csv" => f.csv = true,
                "json" => f.json = true,
                "both" => f = Formats { csv: true, json: true },
                other => return Err(format!("unknown format `{other}`")),
            }
        }
        if !(f.csv || f.json) {
            return Err("no output format".into());
        }
        Ok(f)
    }
}

#[derive(Clone, Debug)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Formats,
}

/// Per-check tolerances; every value is multiplied by `--tol-scale`.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub pinning: f64,
    pub round_trip: f64,
    pub jacobian: f64,
    pub conjugation: f64,
    pub discrepancy: f64,
    pub parametrix: f64,
    pub order_gain: f64,
    pub samples: usize,
    pub points: usize,
    pub covectors: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            pinning: 1e-14,
            round_trip: 1e-10,
            jacobian: 1e-6,
            conjugation: 1e-6,
            discrepancy: 1e-8,
            parametrix: 1e-12,
            order_gain: 2.0,
            samples: 1000,
            points: 8,
            covectors: 2000,
        }
    }
}

impl Tolerances {
    pub fn scaled(mut self, s: f64) -> Self {
        self.pinning *= s;
        self.round_trip *= s;
        self.jacobian *= s;
        self.conjugation *= s;
        self.discrepancy *= s;
        self.parametrix *= s;
        self.order_gain /= s;
        self
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub molecule: MoleculeSection,
    pub grid: Option<GridSection>,
    pub twist: Option<TwistSection>,
    pub state: Option<StateSection>,
    pub operator: Option<OperatorKind>,
    pub scan: ScanSection,
    pub output: OutputSection,
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw = RawConfig::parse(text)?;
        for name in raw.sections.keys() {
            if !["molecule", "grid", "twist", "state", "operator", "scan", "output", "tolerances"].contains(&name.as_str()) {
                return Err(CliError::config(format!("line {}: unknown section [{name}]", raw.sections[name].line)));
            }
        }
        let molecule = molecule(&raw)?;
        let grid = match raw.section("grid") {
            None => None,
            Some(f) => {
                let g = GridSection { points: f.req_number("points")?, half_width: f.req_number("half_width")? };
                f.finish()?;
                if g.points < 8 || g.points % 2 != 0 || !(g.half_width > 0.0) {
                    return Err(CliError::config("[grid] needs an even `points` >= 8 and a positive `half_width`"));
                }
                Some(g)
            }
        };
        let twist = twist(&raw, &molecule)?;
        let state = state(&raw, &molecule)?;
        let operator = match raw.section("operator") {
            None => None,
            Some(f) => {
                let kind = match f.req_string("kind")?.as_str() {
                    "laplacian" => OperatorKind::Laplacian,
                    "variable" => OperatorKind::Variable,
                    "indefinite" => OperatorKind::Indefinite,
                    "one-minus-laplacian" => OperatorKind::OneMinusLaplacian,
                    "divergence-form" => OperatorKind::DivergenceForm,
                    other => return Err(CliError::config(format!("[operator] unknown kind `{other}`"))),
                };
                f.finish()?;
                Some(kind)
            }
        };
        let scan = scan(&raw, &molecule)?;
        let output = match raw.section("output") {
            None => OutputSection { directory: "out".into(), formats: Formats { csv: true, json: true } },
            Some(f) => {
                let directory = f.string("directory").unwrap_or_else(|| "out".into()).into();
                let formats = match f.raw("formats") {
                    None => Formats { csv: true, json: true },
                    Some((n, v)) => v.parse().map_err(|e| f.err(n, e))?,
                };
                f.finish()?;
                OutputSection { directory, formats }
            }
        };
        let mut tolerances = Tolerances::default();
        if let Some(f) = raw.section("tolerances") {
            let t = &mut tolerances;
            for (key, slot) in [
                ("pinning", &mut t.pinning),
                ("round_trip", &mut t.round_trip),
                ("jacobian", &mut t.jacobian),
                ("conjugation", &mut t.conjugation),
                ("discrepancy", &mut t.discrepancy),
                ("parametrix", &mut t.parametrix),
                ("order_gain", &mut t.order_gain),
            ] {
                if let Some(v) = f.number::<f64>(key)? {
                    if !(v > 0.0) {
                        return Err(CliError::config(format!("[tolerances] `{key}` must be positive")));
                    }
                    *slot = v;
                }
            }
            for (key, slot) in [("samples", &mut t.samples), ("points", &mut t.points), ("covectors", &mut t.covectors)] {
                if let Some(v) = f.number::<usize>(key)? {
                    if v == 0 {
                        return Err(CliError::config(format!("[tolerances] `{key}` must be positive")));
                    }
                    *slot = v;
                }
            }
            f.finish()?;
        }
        Ok(Self { molecule, grid, twist, state, operator, scan, output, tolerances })
    }

    pub fn internal(&self) -> usize {
        self.molecule.electrons - self.molecule.external
    }

    pub fn require_grid(&self) -> Result<GridSection, CliError> {
        self.grid.ok_or_else(|| CliError::config("this command needs a [grid] section"))
    }

    pub fn require_twist(&self) -> Result<&TwistSection, CliError> {
        self.twist.as_ref().ok_or_else(|| CliError::config("this command needs a [twist] section"))
    }

    pub fn require_state(&self) -> Result<&StateSection, CliError> {
        self.state.as_ref().ok_or_else(|| CliError::config("this command needs a [state] section"))
    }

    pub fn require_operator(&self) -> Result<OperatorKind, CliError> {
        self.operator.ok_or_else(|| CliError::config("this command needs an [operator] section"))
    }
}

fn molecule(raw: &RawConfig) -> Result<MoleculeSection, CliError> {
    let f = raw.required("molecule")?;
    let dim: usize = f.req_number("dim")?;
    let electrons: usize = f.req_number("electrons")?;
    let external: usize = f.req_number("external")?;
    let (line, text) = f.raw("nuclei").ok_or_else(|| f.missing("nuclei"))?;
    let mut nuclei = Vec::new();
    for item in text.split(';') {
        let (pos, charge) = item.split_once(':').ok_or_else(|| f.err(line, "nuclei are written `position : charge`"))?;
        let position = parse_list(pos).map_err(|e| f.err(line, e))?;
        let charge: f64 = charge.trim().parse().map_err(|_| f.err(line, format!("bad charge `{}`", charge.trim())))?;
        if position.len() != dim {
            return Err(f.err(line, format!("nucleus at {position:?} is not {dim}-dimensional")));
        }
        nuclei.push(Nucleus { position, charge });
    }
    f.finish()?;
    if !(1..=3).contains(&dim) {
        return Err(CliError::config(format!("[molecule] dim = {dim} not in 1..=3")));
    }
    if external == 0 || external > electrons {
        return Err(CliError::config(format!("[molecule] external = {external} must lie in 1..={electrons}")));
    }
    Ok(MoleculeSection { dim, nuclei, electrons, external })
}

fn twist(raw: &RawConfig, m: &MoleculeSection) -> Result<Option<TwistSection>, CliError> {
    let Some(f) = raw.section("twist") else { return Ok(None) };
    let x0 = f.req_list("x0")?;
    let eta0 = f.number("eta0")?.unwrap_or(0.5);
    let tau = match f.string("tau").as_deref() {
        None | Some("bump") => CutoffProfile::Bump,
        Some(other) => return Err(CliError::config(format!("[twist] unknown cutoff profile `{other}`"))),
    };
    let r0 = f.number("r0")?;
    let delta0 = f.number("delta0")?;
    f.finish()?;
    if x0.len() != m.external * m.dim {
        return Err(CliError::config(format!(
            "[twist] x0 has {} coordinates, expected external * dim = {}",
            x0.len(),
            m.external * m.dim
        )));
    }
    Ok(Some(TwistSection { x0, eta0, tau, r0, delta0 }))
}

fn state(raw: &RawConfig, m: &MoleculeSection) -> Result<Option<StateSection>, CliError> {
    let Some(f) = raw.section("state") else { return Ok(None) };
    let n = m.electrons * m.dim;
    let s = match f.req_string("kind")?.as_str() {
        "gaussian" => {
            let rows = f.tuples("width")?.ok_or_else(|| f.missing("width"))?;
            let width = match rows.as_slice() {
                [single] if single.len() == 1 => DMatrix::identity(n, n) * single[0],
                _ if rows.len() == n && rows.iter().all(|r| r.len() == n) => {
                    DMatrix::from_row_iterator(n, n, rows.iter().flatten().copied())
                }
                _ => return Err(CliError::config(format!("[state] width must be a number or a {n}x{n} matrix"))),
            };
            let kappa = f.list("kappa")?.unwrap_or_else(|| vec![0.0; n]);
            if kappa.len() != n {
                return Err(CliError::config(format!("[state] kappa needs {n} entries")));
            }
            StateSection::Gaussian { width, kappa: DVector::from_vec(kappa) }
        }
        "hydrogenic" => StateSection::Hydrogenic { charge: f.req_number("charge")? },
        "harmonium" => StateSection::Harmonium { coupling: f.req_number("coupling")? },
        "grid-eigen" => {
            let potential = match f.string("potential").as_deref() {
                None | Some("harmonic") => GridPotential::Harmonic,
                Some("well") => GridPotential::Well,
                Some(other) => return Err(CliError::config(format!("[state] unknown potential `{other}`"))),
            };
            StateSection::GridEigen { potential }
        }
        "file" => StateSection::File { path: f.req_string("path")?.into(), energy: f.req_number("energy")? },
        other => return Err(CliError::config(format!("[state] unknown kind `{other}`"))),
    };
    f.finish()?;
    Ok(Some(s))
}

fn scan(raw: &RawConfig, m: &MoleculeSection) -> Result<ScanSection, CliError> {
    let Some(f) = raw.section("scan") else { return Ok(ScanSection { radius: 0.5, max_order: 10, ..Default::default() }) };
    let nx = m.external * m.dim;
    let points = f.tuples("points")?.unwrap_or_default();
    let primes = f.tuples("primes")?.unwrap_or_default();
    for p in points.iter().chain(&primes) {
        if p.len() != nx {
            return Err(CliError::config(format!("[scan] point {p:?} needs external * dim = {nx} coordinates")));
        }
    }
    if !primes.is_empty() && primes.len() != points.len() {
        return Err(CliError::config("[scan] `primes` must pair up with `points`"));
    }
    let twisted = f.boolean("twisted")?.unwrap_or(true);
    let center = f.list("center")?;
    let direction = f.list("direction")?;
    let radius = f.number("radius")?.unwrap_or(0.5);
    let max_order = f.number("max_order")?.unwrap_or(10);
    let expect = match f.string("expect").as_deref() {
        None => None,
        Some("pass") => Some(Expectation::Pass),
        Some("cusp") => Some(Expectation::Cusp),
        Some(other) => return Err(CliError::config(format!("[scan] unknown expectation `{other}`"))),
    };
    f.finish()?;
    for v in [&center, &direction].into_iter().flatten() {
        if v.len() != nx {
            return Err(CliError::config(format!("[scan] centre and direction need {nx} coordinates")));
        }
    }
    Ok(ScanSection { points, primes, twisted, center, direction, radius, max_order, expect })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "
[molecule]
dim = 1
nuclei = 4.0 : 1.0
electrons = 2
external = 1
";

    #[test]
    fn minimal_config_parses() {
        let c = RunConfig::parse(BASE).unwrap();
        assert_eq!(c.molecule.nuclei[0].position, vec![4.0]);
        assert_eq!(c.internal(), 1);
        assert!(c.twist.is_none() && c.output.formats.csv);
    }

    #[test]
    fn comments_and_commas() {
        let text = format!("{BASE}\n[twist]  # centre\nx0 = 0.0 # here\n[scan]\npoints = 0.1;;\n");
        assert!(RunConfig::parse(&text).is_err());
        let text = format!("{BASE}\n[twist]\nx0 = 0.0 # here\n[scan]\npoints = 0.1; -0.2\n");
        let c = RunConfig::parse(&text).unwrap();
        assert_eq!(c.scan.points, vec![vec![0.1], vec![-0.2]]);
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        assert!(RunConfig::parse(&format!("{BASE}\n[grid]\npoints = 64\nhalf_width = 8\nsize = 3\n")).is_err());
        assert!(RunConfig::parse(&format!("{BASE}\n[extra]\n")).is_err());
        assert!(RunConfig::parse("x = 1\n").is_err());
    }

    #[test]
    fn cross_field_consistency() {
        assert!(RunConfig::parse(&format!("{BASE}\n[twist]\nx0 = 0 0\n")).is_err());
        assert!(RunConfig::parse(&format!("{BASE}\n[state]\nkind = gaussian\nwidth = 1 0 ; 0 1 ; 1 1\n")).is_err());
        let c = RunConfig::parse(&format!("{BASE}\n[state]\nkind = gaussian\nwidth = 1.5\n")).unwrap();
        let Some(StateSection::Gaussian { width, .. }) = c.state else { panic!() };
        assert_eq!(width[(1, 1)], 1.5);
    }

    #[test]
    fn tolerances_scale() {
        let t = Tolerances::default().scaled(10.0);
        assert!((t.discrepancy - 1e-7).abs() < 1e-20);
        assert_eq!(t.samples, 1000);
    }
}
