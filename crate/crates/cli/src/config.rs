//! `key = value` run configuration with `[section]` headers.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use fracwave_core::discretization::{InitRule, SchemeKind};
use fracwave_core::extension::WeightSpec;
use fracwave_core::reglab::DEFAULT_MU;
use fracwave_core::spectral::{make_domain, project, DomainKind, ModeExpansion, SpectralDomain};
use fracwave_core::wavesolve::{Forcing, FracWaveProblem, TimeProfile};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Validation(msg.into()))
}

/// Spatial data preset.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSpec {
    Zero,
    /// sum of eigenmodes with unit (or given) weights, e.g. `mode:1` or `mode:1*0.5+mode:3`
    Modes(Vec<(usize, f64)>),
    /// x(L-x) on the interval, x(Lx-x)y(Ly-y) on the rectangle
    Bump,
    /// explicit coefficients
    Coeffs(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSpec {
    Constant(f64),
    Sine(f64, f64, f64),
    Exp(f64, f64),
    Poly(Vec<f64>),
    /// forcing for which u_k(t) = t³ with zero initial data
    Cubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegSuite {
    Time,
    Space,
    SpaceTime,
}

impl RegSuite {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "time" => Ok(Self::Time),
            "space" => Ok(Self::Space),
            "spacetime" => Ok(Self::SpaceTime),
            _ => invalid(format!("suite must be time, space or spacetime, got '{s}'")),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Time => "time",
            Self::Space => "space",
            Self::SpaceTime => "spacetime",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain: DomainKind,
    pub n_modes: usize,
    pub s: f64,
    pub gamma: f64,
    pub t_final: f64,
    pub g: DataSpec,
    pub h: DataSpec,
    /// (mode, profile)
    pub f: Vec<(usize, ProfileSpec)>,
    pub weight: WeightSpec,
    pub scheme: SchemeKind,
    /// refinement levels start at τ = T 2^{-first_level}
    pub first_level: u32,
    pub levels: u32,
    pub init_rule: String,
    pub times: Vec<f64>,
    pub x_points: usize,
    pub y_values: Vec<f64>,
    pub sigma: f64,
    pub nu: f64,
    pub rho: f64,
    pub ell_max: usize,
    pub mu: f64,
    pub suite: RegSuite,
    pub seed: u64,
    pub out: String,
}

const KEYS: &[(&str, &[&str])] = &[
    ("domain", &["kind", "length", "lx", "ly", "n_modes"]),
    ("problem", &["s", "gamma", "T"]),
    ("data", &["g", "h", "f"]),
    ("weight", &["beta", "theta"]),
    ("scheme", &["name", "first_level", "levels", "init_rule"]),
    ("output", &["times", "x_points", "y"]),
    ("regularity", &["sigma", "nu", "rho", "ell_max", "mu", "suite"]),
    ("run", &["seed", "out"]),
];

/// Parses `pi`, `2*pi`, `pi/2` and plain numbers.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('*') {
        return Some(parse_number(a)? * parse_number(b)?);
    }
    if let Some((a, b)) = s.rsplit_once('/') {
        return Some(parse_number(a)? / parse_number(b)?);
    }
    match s {
        "pi" => Some(PI),
        "-pi" => Some(-PI),
        _ => s.parse().ok().filter(|v: &f64| v.is_finite()),
    }
}

type Table = BTreeMap<(String, String), (usize, String)>;

fn tokenize(text: &str) -> Result<Table, ConfigError> {
    let mut section = String::new();
    let mut out = Table::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Parse { line, msg: format!("unterminated section header '{body}'") })?
                .trim();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(ConfigError::Parse { line, msg: format!("unknown section [{name}]") });
            }
            section = name.to_string();
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| ConfigError::Parse { line, msg: format!("expected 'key = value', got '{body}'") })?;
        let k = k.trim();
        if section.is_empty() {
            return Err(ConfigError::Parse { line, msg: format!("key '{k}' outside any section") });
        }
        let allowed = KEYS.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&k) {
            return Err(ConfigError::Parse { line, msg: format!("unknown key '{k}' in [{section}]") });
        }
        if out.insert((section.clone(), k.to_string()), (line, v.trim().to_string())).is_some() {
            return Err(ConfigError::Parse { line, msg: format!("duplicate key '{k}'") });
        }
    }
    Ok(out)
}

struct Reader {
    table: Table,
}

impl Reader {
    fn raw(&self, sec: &str, key: &str) -> Option<&(usize, String)> {
        self.table.get(&(sec.to_string(), key.to_string()))
    }

    fn num(&self, sec: &str, key: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        match self.raw(sec, key) {
            Some((line, v)) => parse_number(v)
                .ok_or_else(|| ConfigError::Parse { line: *line, msg: format!("'{key}' is not a number: '{v}'") }),
            None => default.ok_or_else(|| ConfigError::Validation(format!("missing required key [{sec}] {key}"))),
        }
    }

    fn int(&self, sec: &str, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.raw(sec, key) {
            Some((line, v)) => v
                .parse()
                .map_err(|_| ConfigError::Parse { line: *line, msg: format!("'{key}' is not a non-negative integer: '{v}'") }),
            None => Ok(default),
        }
    }

    fn list(&self, sec: &str, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.raw(sec, key) {
            Some((line, v)) => v
                .split(',')
                .map(|p| {
                    parse_number(p).ok_or_else(|| ConfigError::Parse { line: *line, msg: format!("bad number '{}' in {key}", p.trim()) })
                })
                .collect(),
            None => Ok(default.to_vec()),
        }
    }

    fn text(&self, sec: &str, key: &str, default: &str) -> (usize, String) {
        self.raw(sec, key).cloned().unwrap_or((0, default.to_string()))
    }
}

fn parse_data(line: usize, v: &str) -> Result<DataSpec, ConfigError> {
    let perr = |msg: String| ConfigError::Parse { line, msg };
    let v = v.trim();
    if v == "zero" {
        return Ok(DataSpec::Zero);
    }
    if v == "bump" {
        return Ok(DataSpec::Bump);
    }
    if let Some(c) = v.strip_prefix("coeffs:") {
        let c: Option<Vec<f64>> = c.split(',').map(parse_number).collect();
        return c.map(DataSpec::Coeffs).ok_or_else(|| perr(format!("bad coefficient list '{v}'")));
    }
    let mut modes = Vec::new();
    for term in v.split('+') {
        let term = term.trim();
        let (m, w) = match term.split_once('*') {
            Some((m, w)) => (m.trim(), parse_number(w).ok_or_else(|| perr(format!("bad weight in '{term}'")))?),
            None => (term, 1.0),
        };
        let k = m
            .strip_prefix("mode:")
            .and_then(|k| k.trim().parse::<usize>().ok())
            .ok_or_else(|| perr(format!("expected zero, bump, coeffs:... or mode:K, got '{term}'")))?;
        modes.push((k, w));
    }
    Ok(DataSpec::Modes(modes))
}

fn parse_profile(line: usize, v: &str) -> Result<ProfileSpec, ConfigError> {
    let perr = || ConfigError::Parse { line, msg: format!("bad time profile '{v}'") };
    let v = v.trim();
    if v == "cubic" {
        return Ok(ProfileSpec::Cubic);
    }
    let (name, args) = v.split_once('(').ok_or_else(perr)?;
    let args = args.strip_suffix(')').ok_or_else(perr)?;
    let a: Vec<f64> = args.split(',').map(parse_number).collect::<Option<_>>().ok_or_else(perr)?;
    match (name.trim(), a.len()) {
        ("const", 1) => Ok(ProfileSpec::Constant(a[0])),
        ("sine", 3) => Ok(ProfileSpec::Sine(a[0], a[1], a[2])),
        ("exp", 2) => Ok(ProfileSpec::Exp(a[0], a[1])),
        ("poly", n) if n > 0 => Ok(ProfileSpec::Poly(a)),
        _ => Err(perr()),
    }
}

/// `f = 1:sine(1,2,0); 3:const(0.5)` or `zero`.
fn parse_forcing(line: usize, v: &str) -> Result<Vec<(usize, ProfileSpec)>, ConfigError> {
    if v.trim() == "zero" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for part in v.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, p) = part
            .split_once(':')
            .ok_or_else(|| ConfigError::Parse { line, msg: format!("expected 'K:profile', got '{part}'") })?;
        let k = k
            .trim()
            .parse::<usize>()
            .map_err(|_| ConfigError::Parse { line, msg: format!("bad mode index in '{part}'") })?;
        out.push((k, parse_profile(line, p)?));
    }
    Ok(out)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let r = Reader { table: tokenize(text)? };
    let (_, kind) = r.text("domain", "kind", "interval");
    let domain = match kind.as_str() {
        "interval" => DomainKind::Interval { length: r.num("domain", "length", Some(PI))? },
        "rectangle" => DomainKind::Rectangle { lx: r.num("domain", "lx", Some(PI))?, ly: r.num("domain", "ly", Some(PI))? },
        other => return invalid(format!("domain kind must be interval or rectangle, got '{other}'")),
    };
    let (gl, gv) = r.text("data", "g", "zero");
    let (hl, hv) = r.text("data", "h", "zero");
    let (fl, fv) = r.text("data", "f", "zero");
    let (_, scheme) = r.text("scheme", "name", SchemeKind::L2Midpoint.name());
    let (_, init_rule) = r.text("scheme", "init_rule", InitRule::FractionalTaylor.name());
    let (_, suite) = r.text("regularity", "suite", "time");
    let (_, out) = r.text("run", "out", "fracwave-out");
    let gamma = r.num("problem", "gamma", None)?;
    let cfg = RunConfig {
        domain,
        n_modes: r.int("domain", "n_modes", 8)? as usize,
        s: r.num("problem", "s", None)?,
        gamma,
        t_final: r.num("problem", "T", Some(1.0))?,
        g: parse_data(gl, &gv)?,
        h: parse_data(hl, &hv)?,
        f: parse_forcing(fl, &fv)?,
        weight: WeightSpec { beta: r.num("weight", "beta", Some(0.0))?, theta: r.num("weight", "theta", Some(0.0))? },
        scheme: SchemeKind::from_name(&scheme).map_err(|e| ConfigError::Validation(e.to_string()))?,
        first_level: r.int("scheme", "first_level", 6)? as u32,
        levels: r.int("scheme", "levels", 7)? as u32,
        init_rule,
        times: r.list("output", "times", &[0.25, 0.5, 1.0])?,
        x_points: r.int("output", "x_points", 9)? as usize,
        y_values: r.list("output", "y", &[0.0, 0.1, 0.5, 1.0])?,
        sigma: r.num("regularity", "sigma", Some(0.0))?,
        nu: r.num("regularity", "nu", Some(0.0))?,
        rho: r.num("regularity", "rho", Some(5.0 - 2.0 * gamma + 0.2))?,
        ell_max: r.int("regularity", "ell_max", 3)? as usize,
        mu: r.num("regularity", "mu", Some(DEFAULT_MU))?,
        suite: RegSuite::parse(&suite)?,
        seed: r.int("run", "seed", 42)?,
        out,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

fn fmt_data(d: &DataSpec) -> String {
    match d {
        DataSpec::Zero => "zero".into(),
        DataSpec::Bump => "bump".into(),
        DataSpec::Coeffs(c) => format!("coeffs:{}", c.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")),
        DataSpec::Modes(m) => m.iter().map(|(k, w)| format!("mode:{k}*{w:?}")).collect::<Vec<_>>().join(" + "),
    }
}

fn fmt_profile(p: &ProfileSpec) -> String {
    let j = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
    match p {
        ProfileSpec::Constant(c) => format!("const({c:?})"),
        ProfileSpec::Sine(a, w, ph) => format!("sine({})", j(&[*a, *w, *ph])),
        ProfileSpec::Exp(a, b) => format!("exp({})", j(&[*a, *b])),
        ProfileSpec::Poly(c) => format!("poly({})", j(c)),
        ProfileSpec::Cubic => "cubic".into(),
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.gamma > 1.0 && self.gamma <= 2.0) {
            return invalid("gamma must lie in (1,2]");
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return invalid("s must lie in (0,1)");
        }
        if !(self.t_final > 0.0) {
            return invalid("T must be positive");
        }
        if self.n_modes == 0 || self.n_modes > 4096 {
            return invalid("n_modes must lie in 1..=4096");
        }
        let lam1 = self.lambda_1();
        let b = self.weight.beta;
        if !(b > -1.0 - 4.0 * self.s) {
            return invalid(format!("beta must be > -1-4s = {}", -1.0 - 4.0 * self.s));
        }
        if !(self.weight.theta >= 0.0 && self.weight.theta < 2.0 * lam1.sqrt()) {
            return invalid(format!(
                "theta must be < 2*sqrt(lambda_1) = {:.6} (weight e^(theta*y) needs 0 <= theta < 2 sqrt(lambda_1))",
                2.0 * lam1.sqrt()
            ));
        }
        let check_modes = |d: &DataSpec, name: &str| -> Result<(), ConfigError> {
            match d {
                DataSpec::Modes(m) if m.iter().any(|(k, _)| *k == 0 || *k > self.n_modes) => {
                    invalid(format!("{name}: mode index outside 1..={}", self.n_modes))
                }
                DataSpec::Coeffs(c) if c.len() > self.n_modes => invalid(format!("{name}: more coefficients than modes")),
                _ => Ok(()),
            }
        };
        check_modes(&self.g, "g")?;
        check_modes(&self.h, "h")?;
        if self.f.iter().any(|(k, _)| *k == 0 || *k > self.n_modes) {
            return invalid(format!("f: mode index outside 1..={}", self.n_modes));
        }
        if self.times.is_empty() || self.times.iter().any(|t| !(*t > 0.0 && *t <= self.t_final)) {
            return invalid("output times must lie in (0, T]");
        }
        if self.y_values.iter().any(|y| !(*y >= 0.0)) {
            return invalid("y values must be non-negative");
        }
        if self.x_points < 2 {
            return invalid("x_points must be at least 2");
        }
        if self.levels < 2 || self.first_level + self.levels > 20 {
            return invalid("levels must be ≥ 2 with first_level + levels ≤ 20");
        }
        if !["fractional-taylor", "linear"].contains(&self.init_rule.as_str()) {
            return invalid("init_rule must be fractional-taylor or linear");
        }
        if !(self.sigma >= 0.0 && self.sigma < self.s) {
            return invalid("sigma must lie in [0, s)");
        }
        if !(self.nu >= 0.0 && self.nu < 1.0 + self.s) {
            return invalid("nu must lie in [0, 1+s)");
        }
        if self.ell_max > 4 {
            return invalid("ell_max must be at most 4");
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return invalid("mu must lie in (0,1)");
        }
        Ok(())
    }

    pub fn lambda_1(&self) -> f64 {
        match self.domain {
            DomainKind::Interval { length } => (PI / length).powi(2),
            DomainKind::Rectangle { lx, ly } => (PI / lx).powi(2) + (PI / ly).powi(2),
            DomainKind::UserSupplied => 1.0,
        }
    }

    pub fn init(&self) -> InitRule {
        if self.init_rule == "linear" {
            InitRule::Linear
        } else {
            InitRule::FractionalTaylor
        }
    }

    /// True when every mode is the manufactured t³ solution with zero initial data.
    pub fn is_manufactured(&self) -> bool {
        self.g == DataSpec::Zero
            && self.h == DataSpec::Zero
            && !self.f.is_empty()
            && self.f.iter().all(|(_, p)| *p == ProfileSpec::Cubic)
    }

    /// Canonical text of the configuration with every default filled in.
    pub fn resolved(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "[domain]");
        match self.domain {
            DomainKind::Interval { length } => {
                let _ = writeln!(o, "kind = interval\nlength = {length:?}");
            }
            DomainKind::Rectangle { lx, ly } => {
                let _ = writeln!(o, "kind = rectangle\nlx = {lx:?}\nly = {ly:?}");
            }
            DomainKind::UserSupplied => {}
        }
        let _ = writeln!(o, "n_modes = {}\n", self.n_modes);
        let _ = writeln!(o, "[problem]\ns = {:?}\ngamma = {:?}\nT = {:?}\n", self.s, self.gamma, self.t_final);
        let f = if self.f.is_empty() {
            "zero".to_string()
        } else {
            self.f.iter().map(|(k, p)| format!("{k}:{}", fmt_profile(p))).collect::<Vec<_>>().join("; ")
        };
        let _ = writeln!(o, "[data]\ng = {}\nh = {}\nf = {f}\n", fmt_data(&self.g), fmt_data(&self.h));
        let _ = writeln!(o, "[weight]\nbeta = {:?}\ntheta = {:?}\n", self.weight.beta, self.weight.theta);
        let _ = writeln!(
            o,
            "[scheme]\nname = {}\nfirst_level = {}\nlevels = {}\ninit_rule = {}\n",
            self.scheme.name(),
            self.first_level,
            self.levels,
            self.init_rule
        );
        let _ = writeln!(o, "[output]\ntimes = {}\nx_points = {}\ny = {}\n", fmt_list(&self.times), self.x_points, fmt_list(&self.y_values));
        let _ = writeln!(
            o,
            "[regularity]\nsigma = {:?}\nnu = {:?}\nrho = {:?}\nell_max = {}\nmu = {:?}\nsuite = {}\n",
            self.sigma,
            self.nu,
            self.rho,
            self.ell_max,
            self.mu,
            self.suite.name()
        );
        let _ = writeln!(o, "[run]\nseed = {}\nout = {}", self.seed, self.out);
        o
    }

    fn expansion(&self, dom: &Arc<SpectralDomain>, d: &DataSpec) -> anyhow::Result<ModeExpansion> {
        let n = dom.n_modes();
        Ok(match d {
            DataSpec::Zero => ModeExpansion::zeros(dom.clone()),
            DataSpec::Modes(m) => {
                let mut c = vec![0.0; n];
                for (k, w) in m {
                    c[k - 1] += w;
                }
                ModeExpansion::new(dom.clone(), c)?
            }
            DataSpec::Coeffs(v) => {
                let mut c = v.clone();
                c.resize(n, 0.0);
                ModeExpansion::new(dom.clone(), c)?
            }
            DataSpec::Bump => match self.domain {
                DomainKind::Interval { length } => project(dom, |x| x[0] * (length - x[0]))?,
                DomainKind::Rectangle { lx, ly } => project(dom, |x| x[0] * (lx - x[0]) * x[1] * (ly - x[1]))?,
                DomainKind::UserSupplied => anyhow::bail!("bump data needs a closed-form domain"),
            },
        })
    }

    pub fn problem(&self) -> anyhow::Result<FracWaveProblem> {
        let dom = Arc::new(make_domain(self.domain, self.n_modes)?);
        let g = self.expansion(&dom, &self.g)?;
        let h = self.expansion(&dom, &self.h)?;
        let mut f = Forcing::zero(self.n_modes);
        for (k, p) in &self.f {
            let rate = dom.lambda(*k).powf(self.s);
            let prof = match p {
                ProfileSpec::Constant(c) => TimeProfile::constant(*c),
                ProfileSpec::Sine(a, w, ph) => TimeProfile::sine(*a, *w, *ph),
                ProfileSpec::Exp(a, b) => TimeProfile::exponential(*a, *b),
                ProfileSpec::Poly(c) => TimeProfile::polynomial(c.clone()),
                ProfileSpec::Cubic => TimeProfile::manufactured_cubic(self.gamma, rate),
            };
            f = f.with_mode(*k, prof);
        }
        Ok(FracWaveProblem::new(dom, self.s, self.gamma, self.t_final, g, h, f)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[domain]\nkind = interval\nlength = pi\n[problem]\ns = 0.5\ngamma = 1.5\nT = 1\n[data]\ng = mode:1\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.domain, DomainKind::Interval { length: PI });
        assert_eq!(c.n_modes, 8);
        assert_eq!(c.g, DataSpec::Modes(vec![(1, 1.0)]));
        assert_eq!(c.h, DataSpec::Zero);
        assert_eq!(c.seed, 42);
        assert!((c.rho - 2.2).abs() < 1e-15);
        // the resolved text parses back to the same configuration
        assert_eq!(parse_config(&c.resolved()).unwrap(), c);
    }

    #[test]
    fn gamma_out_of_range() {
        let e = parse_config(&MINIMAL.replace("gamma = 1.5", "gamma = 2.5")).unwrap_err();
        assert_eq!(e, ConfigError::Validation("gamma must lie in (1,2]".into()));
    }

    #[test]
    fn theta_too_large() {
        let e = parse_config(&format!("{MINIMAL}[weight]\ntheta = 10\n")).unwrap_err();
        assert!(e.to_string().contains("theta must be < 2*sqrt(lambda_1)"), "{e}");
    }

    #[test]
    fn unknown_key_reports_line() {
        let e = parse_config(&format!("{MINIMAL}[weight]\nthetta = 1\n")).unwrap_err();
        assert_eq!(e, ConfigError::Parse { line: 11, msg: "unknown key 'thetta' in [weight]".into() });
        let e = parse_config("[problem]\ns 0.5\n").unwrap_err();
        assert!(matches!(e, ConfigError::Parse { line: 2, .. }));
    }

    #[test]
    fn numbers_and_presets() {
        assert_eq!(parse_number("pi/2"), Some(PI / 2.0));
        assert_eq!(parse_number("2*pi"), Some(2.0 * PI));
        assert_eq!(parse_number("nan"), None);
        assert_eq!(parse_data(1, "mode:1*0.5 + mode:3").unwrap(), DataSpec::Modes(vec![(1, 0.5), (3, 1.0)]));
        assert_eq!(
            parse_forcing(1, "1:sine(1,2,0); 2:cubic").unwrap(),
            vec![(1, ProfileSpec::Sine(1.0, 2.0, 0.0)), (2, ProfileSpec::Cubic)]
        );
        assert!(parse_profile(1, "sine(1,2)").is_err());
    }
}
