//! Sectioned key-value configuration files.
//!
//! ```text
//! # interval benchmark
//! [domain]
//! kind = interval
//! a = -1
//! b = 1
//!
//! [potential]
//! f = -100
//!
//! [nonlinearity]
//! kappa = 1
//!
//! [sweep]
//! n = 2000
//! r_points = 200
//!
//! [output]
//! dir = out/interval
//! ```
//!
//! `#` starts a comment. Values may be wrapped in double quotes. Keys not
//! listed below are rejected, as are keys given twice.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::bifurcation::{self, NonlinearitySpec};
use crate::discretize::DEFAULT_NU_MAX;
use crate::geometry::DomainSpec;
use crate::potential::PotentialField;
use crate::sweep;

/// A configuration problem; `line` is 1-based, or 0 for a missing key.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}{message}", if *.line > 0 { format!("line {line}: ") } else { String::new() })]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearityConfig {
    /// Run the bifurcation stage.
    pub enabled: bool,
    /// Quadratic coefficient `q(x)`, expression source.
    pub q: String,
    /// Cubic coefficient `κ(x)`, expression source.
    pub kappa: String,
    /// Seed amplitude; `None` selects `0.1 · diameter^{−1/2}`.
    pub epsilon: Option<f64>,
    pub delta_max: f64,
    pub tol_newton: f64,
    pub max_iter: usize,
    pub match_tol: f64,
}

impl Default for NonlinearityConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            q: "0".into(),
            kappa: "1".into(),
            epsilon: None,
            delta_max: bifurcation::DEFAULT_DELTA_MAX,
            tol_newton: bifurcation::DEFAULT_TOL_NEWTON,
            max_iter: bifurcation::DEFAULT_MAX_ITER,
            match_tol: bifurcation::DEFAULT_MATCH_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Interior nodes per line (interval) or per radius (disk).
    pub n: usize,
    pub nu_max: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub r_points: usize,
    /// Eigenvalues recorded per grid point.
    pub k: usize,
    /// `None` selects `10 h² sup|f| + 1e-9`.
    pub tol_zero: Option<f64>,
    pub refine_tol: f64,
    pub max_bisections: usize,
    pub fd_delta: f64,
    /// Boundary quadrature points on the disk.
    pub boundary_points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            nu_max: DEFAULT_NU_MAX,
            r_min: sweep::DEFAULT_R_MIN,
            r_max: 1.0,
            r_points: sweep::DEFAULT_R_POINTS,
            k: 8,
            tol_zero: None,
            refine_tol: sweep::DEFAULT_REFINE_TOL,
            max_bisections: sweep::DEFAULT_MAX_BISECTIONS,
            fd_delta: crate::crossing_form::DEFAULT_FD_DELTA,
            boundary_points: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub domain: DomainSpec,
    /// Linear coefficient `f(x)`, expression source.
    pub potential: String,
    pub nonlinearity: NonlinearityConfig,
    pub sweep: SweepConfig,
    pub output_dir: PathBuf,
}

impl ProblemSpec {
    pub fn new(domain: DomainSpec, potential: impl Into<String>) -> Self {
        Self {
            domain,
            potential: potential.into(),
            nonlinearity: NonlinearityConfig::default(),
            sweep: SweepConfig::default(),
            output_dir: PathBuf::from("out"),
        }
    }

    pub fn dimension(&self) -> usize {
        match self.domain {
            DomainSpec::Interval { .. } => 1,
            DomainSpec::Disk { .. } => 2,
        }
    }

    fn diameter(&self) -> f64 {
        match self.domain {
            DomainSpec::Interval { a, b } => b - a,
            DomainSpec::Disk { radius } => 2.0 * radius,
        }
    }

    pub fn potential_field(&self) -> crate::Result<PotentialField> {
        PotentialField::from_source(&self.potential, self.dimension(), self.diameter())
    }

    pub fn nonlinearity_spec(&self) -> crate::Result<NonlinearitySpec> {
        let (dim, diam) = (self.dimension(), self.diameter());
        Ok(NonlinearitySpec::new(
            self.potential_field()?,
            PotentialField::from_source(&self.nonlinearity.q, dim, diam)?,
            PotentialField::from_source(&self.nonlinearity.kappa, dim, diam)?,
        ))
    }

    /// Canonical text form; `parse_config(&spec.render())` returns `spec`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str("[domain]\n");
        match self.domain {
            DomainSpec::Interval { a, b } => {
                let _ = writeln!(s, "kind = interval\na = {a:?}\nb = {b:?}");
            }
            DomainSpec::Disk { radius } => {
                let _ = writeln!(s, "kind = disk\nradius = {radius:?}");
            }
        }
        let _ = writeln!(s, "\n[potential]\nf = {}", self.potential);
        let nl = &self.nonlinearity;
        let _ = writeln!(s, "\n[nonlinearity]\nenabled = {}\nq = {}\nkappa = {}", nl.enabled, nl.q, nl.kappa);
        if let Some(e) = nl.epsilon {
            let _ = writeln!(s, "epsilon = {e:?}");
        }
        let _ = writeln!(
            s,
            "delta_max = {:?}\ntol_newton = {:?}\nmax_iter = {}\nmatch_tol = {:?}",
            nl.delta_max, nl.tol_newton, nl.max_iter, nl.match_tol
        );
        let sw = &self.sweep;
        let _ = writeln!(
            s,
            "\n[sweep]\nn = {}\nnu_max = {}\nr_min = {:?}\nr_max = {:?}\nr_points = {}\nk = {}",
            sw.n, sw.nu_max, sw.r_min, sw.r_max, sw.r_points, sw.k
        );
        if let Some(t) = sw.tol_zero {
            let _ = writeln!(s, "tol_zero = {t:?}");
        }
        let _ = writeln!(
            s,
            "refine_tol = {:?}\nmax_bisections = {}\nfd_delta = {:?}\nboundary_points = {}",
            sw.refine_tol, sw.max_bisections, sw.fd_delta, sw.boundary_points
        );
        let _ = writeln!(s, "\n[output]\ndir = {}", self.output_dir.display());
        s
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("domain", &["kind", "a", "b", "radius"]),
    ("potential", &["f"]),
    (
        "nonlinearity",
        &["enabled", "q", "kappa", "epsilon", "delta_max", "tol_newton", "max_iter", "match_tol"],
    ),
    (
        "sweep",
        &[
            "n",
            "nu_max",
            "r_min",
            "r_max",
            "r_points",
            "k",
            "tol_zero",
            "refine_tol",
            "max_bisections",
            "fd_delta",
            "boundary_points",
        ],
    ),
    ("output", &["dir"]),
];

struct Entries {
    map: HashMap<(String, String), (String, usize)>,
}

impl Entries {
    fn raw(&self, section: &str, key: &str) -> Option<(&str, usize)> {
        self.map
            .get(&(section.to_string(), key.to_string()))
            .map(|(v, l)| (v.as_str(), *l))
    }

    fn parsed<T: std::str::FromStr>(&self, section: &str, key: &str, what: &str) -> Result<Option<(T, usize)>, ConfigError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some((v, line)) => match v.parse::<T>() {
                Ok(x) => Ok(Some((x, line))),
                Err(_) => err(line, format!("{key} must be {what}, got '{v}'")),
            },
        }
    }

    fn float(&self, section: &str, key: &str) -> Result<Option<(f64, usize)>, ConfigError> {
        let v = self.parsed::<f64>(section, key, "a number")?;
        if let Some((x, line)) = v {
            if !x.is_finite() {
                return err(line, format!("{key} must be finite"));
            }
        }
        Ok(v)
    }

    fn positive(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.float(section, key)? {
            None => Ok(default),
            Some((x, _)) if x > 0.0 => Ok(x),
            Some((_, line)) => err(line, format!("{key} must be positive")),
        }
    }

    fn count(&self, section: &str, key: &str, default: usize, min: usize) -> Result<usize, ConfigError> {
        match self.parsed::<usize>(section, key, "a non-negative integer")? {
            None => Ok(default),
            Some((x, _)) if x >= min => Ok(x),
            Some((_, line)) => err(line, format!("{key} must be at least {min}")),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn unquote(v: &str) -> &str {
    let v = v.trim();
    if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
        &v[1..v.len() - 1]
    } else {
        v
    }
}

fn check_expression(
    src: &str,
    line: usize,
    key: &str,
    dim: usize,
    diameter: f64,
) -> Result<(), ConfigError> {
    match PotentialField::from_source(src, dim, diameter) {
        Ok(field) => {
            if dim == 2 && !field.is_radial() {
                return err(line, format!("{key} must be radial on the disk: write it in terms of rho"));
            }
            Ok(())
        }
        Err(crate::Error::Expression(e)) => err(line, format!("{key}: {e}")),
        Err(e) => err(line, format!("{key}: {e}")),
    }
}

/// Parse and validate a configuration, applying defaults.
pub fn parse_config(text: &str) -> Result<ProblemSpec, ConfigError> {
    let mut map: HashMap<(String, String), (String, usize)> = HashMap::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return err(line, format!("malformed section header '{content}'"));
            };
            let name = name.trim();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return err(line, format!("unknown section [{name}]"));
            }
            section = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return err(line, format!("expected 'key = value', got '{content}'"));
        };
        let key = key.trim();
        let Some(sec) = &section else {
            return err(line, format!("key '{key}' appears before any section"));
        };
        let allowed = KEYS.iter().find(|(s, _)| s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return err(line, format!("unknown key '{key}' in [{sec}]"));
        }
        let value = unquote(value);
        if value.is_empty() {
            return err(line, format!("empty value for '{key}'"));
        }
        let slot = (sec.clone(), key.to_string());
        if let Some((_, first)) = map.get(&slot) {
            return err(
                line,
                format!("duplicate key '{key}' in [{sec}] (lines {first} and {line})"),
            );
        }
        map.insert(slot, (value.to_string(), line));
    }
    let e = Entries { map };

    // [domain]
    let Some((kind, kind_line)) = e.raw("domain", "kind") else {
        return err(0, "missing [domain] kind (interval or disk)");
    };
    let domain = match kind {
        "interval" => {
            if let Some((_, l)) = e.raw("domain", "radius") {
                return err(l, "radius does not apply to an interval domain");
            }
            let a = e.float("domain", "a")?.map_or(-1.0, |v| v.0);
            let b = e.float("domain", "b")?;
            let (b, bline) = b.unwrap_or((1.0, kind_line));
            if a >= b {
                return err(bline, format!("interval needs a < b, got a = {a}, b = {b}"));
            }
            DomainSpec::Interval { a, b }
        }
        "disk" => {
            for k in ["a", "b"] {
                if let Some((_, l)) = e.raw("domain", k) {
                    return err(l, format!("{k} does not apply to a disk domain"));
                }
            }
            DomainSpec::Disk {
                radius: e.positive("domain", "radius", 1.0)?,
            }
        }
        other => return err(kind_line, format!("unknown domain kind '{other}' (interval or disk)")),
    };
    let mut spec = ProblemSpec::new(domain, String::new());
    let (dim, diam) = (spec.dimension(), spec.diameter());

    // [potential]
    let Some((f, fline)) = e.raw("potential", "f") else {
        return err(0, "missing [potential] f");
    };
    check_expression(f, fline, "f", dim, diam)?;
    spec.potential = f.to_string();

    // [nonlinearity]
    let nl = &mut spec.nonlinearity;
    if let Some((v, line)) = e.raw("nonlinearity", "enabled") {
        nl.enabled = match v {
            "true" => true,
            "false" => false,
            _ => return err(line, format!("enabled must be true or false, got '{v}'")),
        };
    }
    for (key, slot) in [("q", &mut nl.q), ("kappa", &mut nl.kappa)] {
        if let Some((v, line)) = e.raw("nonlinearity", key) {
            check_expression(v, line, key, dim, diam)?;
            *slot = v.to_string();
        }
    }
    if let Some((x, line)) = e.float("nonlinearity", "epsilon")? {
        if x <= 0.0 {
            return err(line, "epsilon must be positive");
        }
        nl.epsilon = Some(x);
    }
    nl.delta_max = e.positive("nonlinearity", "delta_max", nl.delta_max)?;
    nl.tol_newton = e.positive("nonlinearity", "tol_newton", nl.tol_newton)?;
    nl.max_iter = e.count("nonlinearity", "max_iter", nl.max_iter, 1)?;
    nl.match_tol = e.positive("nonlinearity", "match_tol", nl.match_tol)?;

    // [sweep]
    let sw = &mut spec.sweep;
    sw.n = e.count("sweep", "n", sw.n, 3)?;
    sw.nu_max = e.count("sweep", "nu_max", sw.nu_max, 0)?;
    if let Some((x, line)) = e.float("sweep", "r_min")? {
        if x <= 0.0 {
            return err(line, "r_min must be positive");
        }
        sw.r_min = x;
    }
    if let Some((x, line)) = e.float("sweep", "r_max")? {
        if x > 1.0 || x <= 0.0 {
            return err(line, "r_max must lie in (0, 1]");
        }
        sw.r_max = x;
    }
    if sw.r_min >= sw.r_max {
        let line = e
            .raw("sweep", "r_min")
            .or(e.raw("sweep", "r_max"))
            .map_or(0, |v| v.1);
        return err(line, format!("r_min = {} must be below r_max = {}", sw.r_min, sw.r_max));
    }
    sw.r_points = e.count("sweep", "r_points", sw.r_points, 2)?;
    sw.k = e.count("sweep", "k", sw.k, 1)?;
    if let Some((x, line)) = e.float("sweep", "tol_zero")? {
        if x <= 0.0 {
            return err(line, "tol_zero must be positive");
        }
        sw.tol_zero = Some(x);
    }
    sw.refine_tol = e.positive("sweep", "refine_tol", sw.refine_tol)?;
    sw.max_bisections = e.count("sweep", "max_bisections", sw.max_bisections, 1)?;
    sw.fd_delta = e.positive("sweep", "fd_delta", sw.fd_delta)?;
    sw.boundary_points = e.count("sweep", "boundary_points", sw.boundary_points, 1)?;
    if dim == 2 && sw.boundary_points <= 2 * sw.nu_max {
        let line = e.raw("sweep", "boundary_points").map_or(0, |v| v.1);
        return err(
            line,
            format!("boundary_points must exceed 2 · nu_max = {}", 2 * sw.nu_max),
        );
    }

    // [output]
    if let Some((v, _)) = e.raw("output", "dir") {
        spec.output_dir = PathBuf::from(v);
    }
    Ok(spec)
}

/// Parse a coefficient expression for a domain of dimension `dim`.
pub fn parse_potential_expr(source: &str, dim: usize) -> crate::Result<PotentialField> {
    PotentialField::from_source(source, dim, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[domain]\nkind = interval\n\n[potential]\nf = -100\n";

    #[test]
    fn minimal_config_takes_defaults() {
        let spec = parse_config(MINIMAL).unwrap();
        assert_eq!(spec.domain, DomainSpec::Interval { a: -1.0, b: 1.0 });
        assert_eq!(spec.potential, "-100");
        assert_eq!(spec.sweep, SweepConfig::default());
        assert_eq!(spec.nonlinearity, NonlinearityConfig::default());
        assert_eq!(spec.potential_field().unwrap(), PotentialField::constant(-100.0, 1));
    }

    #[test]
    fn r_min_zero_is_rejected() {
        let text = format!("{MINIMAL}[sweep]\nr_min = 0\n");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.line, 7);
        assert!(e.message.contains("r_min must be positive"));
    }

    #[test]
    fn duplicate_key_names_both_lines() {
        let text = "[domain]\nkind = disk\n[potential]\nf = -36 # c = 6\nf = -25\n";
        let e = parse_config(text).unwrap_err();
        assert_eq!(e.line, 5);
        assert!(e.message.contains("lines 4 and 5"), "{}", e.message);
    }

    #[test]
    fn unknown_keys_and_sections() {
        let e = parse_config("[domain]\nkind = interval\nradiux = 2\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_config("[domian]\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_config("kind = interval\n").unwrap_err();
        assert_eq!(e.line, 1);
    }

    #[test]
    fn expression_errors_carry_line_and_position() {
        let e = parse_config("[domain]\nkind = interval\n[potential]\nf = sin(x\n").unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.message.contains('6'), "{}", e.message);
        let e = parse_config("[domain]\nkind = interval\n[potential]\nf = y\n").unwrap_err();
        assert_eq!(e.line, 4);
        let e = parse_config("[domain]\nkind = disk\n[potential]\nf = x^2\n").unwrap_err();
        assert!(e.message.contains("radial"));
    }

    #[test]
    fn type_errors() {
        let e = parse_config(&format!("{MINIMAL}[sweep]\nn = many\n")).unwrap_err();
        assert_eq!(e.line, 7);
        let e = parse_config(&format!("{MINIMAL}[sweep]\nr_min = 0.5\nr_max = 0.4\n")).unwrap_err();
        assert!(e.message.contains("below"));
        let e = parse_config(&format!("{MINIMAL}[nonlinearity]\nenabled = yes\n")).unwrap_err();
        assert_eq!(e.line, 7);
    }

    #[test]
    fn render_round_trips() {
        let mut spec = ProblemSpec::new(DomainSpec::Disk { radius: 1.5 }, "-(10 + rho^2)^2");
        spec.sweep.tol_zero = Some(1.25e-3);
        spec.sweep.nu_max = 4;
        spec.nonlinearity.epsilon = Some(0.1);
        spec.nonlinearity.q = "rho".into();
        spec.output_dir = PathBuf::from("out/disk run");
        assert_eq!(parse_config(&spec.render()).unwrap(), spec);
        let spec = parse_config(MINIMAL).unwrap();
        assert_eq!(parse_config(&spec.render()).unwrap(), spec);
    }

    #[test]
    fn constant_expressions_fold() {
        let f = parse_potential_expr("-(10 + rho^2)^2", 2).unwrap();
        assert_eq!(f.value(&[0.0, 0.0]), -100.0);
        assert!(parse_potential_expr("0", 1).unwrap().is_zero());
    }
}
