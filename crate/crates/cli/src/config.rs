//! Experiment configuration: a small sectioned `key = value` format.
//!
//! ```text
//! kind = validate
//!
//! [problem]
//! generator = laplacian
//! alpha = 0.5
//! t = 1
//! domain = interval
//! length = pi
//! initial = sine-mode(1, pi)
//!
//! [method]
//! methods = spectral, fd, mc-killed
//! seed = 7
//!
//! [output]
//! svg = true
//! ```
//!
//! `#` starts a comment. Lists are comma separated. Reals accept `pi`,
//! `k*pi` and `pi/k`. Every error carries a 1-based line and column, and all
//! errors in a document are reported together.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use conformable::FractionalOrder;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    DerivativeCheck,
    Simulate,
    Solve,
    Validate,
    Table,
}

impl Kind {
    const ALL: [(Kind, &'static str); 5] = [
        (Kind::DerivativeCheck, "derivative-check"),
        (Kind::Simulate, "simulate"),
        (Kind::Solve, "solve"),
        (Kind::Validate, "validate"),
        (Kind::Table, "table"),
    ];

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(k, _)| *k == self).map(|(_, n)| *n).expect("listed")
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().find(|(_, n)| *n == s).map(|(k, _)| *k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Spectral,
    Fourier,
    Fd,
    Mc,
    McKilled,
}

impl Method {
    const ALL: [(Method, &'static str); 5] = [
        (Method::Spectral, "spectral"),
        (Method::Fourier, "fourier"),
        (Method::Fd, "fd"),
        (Method::Mc, "mc"),
        (Method::McKilled, "mc-killed"),
    ];

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(k, _)| *k == self).map(|(_, n)| *n).expect("listed")
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().find(|(_, n)| *n == s).map(|(k, _)| *k)
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Method::Mc | Method::McKilled)
    }
}

/// The operator `L` (or, for `Fbm`, the process of the fBm representation).
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// `psi(k) = -scale |k|^2`.
    Laplacian { scale: f64, dim: usize },
    /// `psi(k) = -scale |k|^beta`.
    Stable { beta: f64, scale: f64, dim: usize },
    /// `psi(k) = scale sum_j (i k_j)^beta_j`.
    Independent { betas: Vec<f64>, scale: f64 },
    /// `psi(k) = i k.drift - k.diag(diffusion).k / 2`.
    Gaussian { drift: Vec<f64>, diffusion: Vec<f64> },
    Fbm { hurst: f64, dim: usize },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Laplacian { .. } => "laplacian",
            Generator::Stable { .. } => "stable",
            Generator::Independent { .. } => "independent",
            Generator::Gaussian { .. } => "gaussian",
            Generator::Fbm { .. } => "fbm",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Generator::Laplacian { dim, .. } | Generator::Stable { dim, .. } | Generator::Fbm { dim, .. } => *dim,
            Generator::Independent { betas, .. } => betas.len(),
            Generator::Gaussian { diffusion, .. } => diffusion.len(),
        }
    }

    /// Stable index and scale when the generator is `-|k|^beta` up to scale.
    pub fn stable_index(&self) -> Option<(f64, f64)> {
        match self {
            Generator::Laplacian { scale, .. } => Some((2.0, *scale)),
            Generator::Stable { beta, scale, .. } => Some((*beta, *scale)),
            _ => None,
        }
    }

    fn keys(&self) -> &'static [&'static str] {
        match self {
            Generator::Laplacian { .. } => &["scale", "dim"],
            Generator::Stable { .. } => &["beta", "scale", "dim"],
            Generator::Independent { .. } => &["betas", "scale"],
            Generator::Gaussian { .. } => &["drift", "diffusion"],
            Generator::Fbm { .. } => &["hurst", "dim"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// `[0, length]` with zero boundary values.
    Interval { length: f64 },
    /// Free space, discretized on the periodic window `[lo, hi)`.
    Periodic { lo: f64, hi: f64 },
}

/// Initial datum catalog; in two dimensions the datum is `f(x) f(y)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Datum {
    /// Centered Gaussian density with standard deviation `sigma`.
    Gaussian { sigma: f64 },
    /// `sin(n pi x / L)`.
    SineMode { n: u32, length: f64 },
    /// `sum_i c_i x^i`.
    Polynomial { coeffs: Vec<f64> },
    /// One on `[a, b]`, zero elsewhere.
    Indicator { a: f64, b: f64 },
}

impl Datum {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Datum::Gaussian { sigma } => (-x * x / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt()),
            Datum::SineMode { n, length } => (*n as f64 * PI * x / length).sin(),
            Datum::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            Datum::Indicator { a, b } => {
                if x >= *a && x <= *b {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn eval_point(&self, p: &[f64]) -> f64 {
        p.iter().map(|x| self.eval(*x)).product()
    }

    fn render(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| real(*x)).collect::<Vec<_>>().join(", ");
        match self {
            Datum::Gaussian { sigma } => format!("gaussian({})", real(*sigma)),
            Datum::SineMode { n, length } => format!("sine-mode({n}, {})", real(*length)),
            Datum::Polynomial { coeffs } => format!("polynomial({})", list(coeffs)),
            Datum::Indicator { a, b } => format!("indicator({}, {})", real(*a), real(*b)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdMode {
    Direct,
    Substituted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub generator: Option<Generator>,
    pub alpha: Vec<FractionalOrder>,
    pub t: Vec<f64>,
    pub domain: Option<Domain>,
    pub initial: Option<Datum>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodBlock {
    /// Single solver for `solve` and `table`.
    pub solver: Option<Method>,
    /// Methods compared by `validate`; the first is the reference.
    pub methods: Vec<Method>,
    pub grid_points: usize,
    pub modes: usize,
    pub tail_tol: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub fd_steps: usize,
    pub fd_mode: FdMode,
    pub fd_safety: f64,
    pub seed: Option<u64>,
    pub tolerance: f64,
    /// Monte Carlo is evaluated at every `query_stride`-th grid point.
    pub query_stride: usize,
    /// Random cases per property in `derivative-check`.
    pub cases: usize,
    /// Marginal samples written by `simulate`.
    pub samples: usize,
    /// Time steps per simulated path.
    pub steps: usize,
    /// Number of simulated paths written.
    pub paths: usize,
}

impl Default for MethodBlock {
    fn default() -> Self {
        Self {
            solver: None,
            methods: Vec::new(),
            grid_points: 201,
            modes: conformable::solvers::DEFAULT_MODES,
            tail_tol: 1e-12,
            n_paths: 10_000,
            dt: 1e-3,
            fd_steps: 2000,
            fd_mode: FdMode::Substituted,
            fd_safety: 0.9,
            seed: None,
            tolerance: 1e-3,
            query_stride: 1,
            cases: 100,
            samples: 1000,
            steps: 100,
            paths: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub dir: String,
    pub svg: bool,
}

impl Default for Output {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            svg: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub problem: Problem,
    pub method: MethodBlock,
    pub output: Output,
}

impl ExperimentConfig {
    /// Whether the run draws random numbers (and hence needs a seed).
    pub fn is_stochastic(&self) -> bool {
        match self.kind {
            Kind::DerivativeCheck | Kind::Simulate => true,
            Kind::Solve | Kind::Table => self.method.solver.is_some_and(Method::is_stochastic),
            Kind::Validate => self.method.methods.iter().any(|m| m.is_stochastic()),
        }
    }

    pub fn seed(&self) -> u64 {
        self.method.seed.unwrap_or(0)
    }
}

const SECTIONS: [(&str, &[&str]); 4] = [
    ("", &["kind"]),
    (
        "problem",
        &[
            "generator", "alpha", "t", "domain", "length", "lo", "hi", "initial", "beta", "betas", "scale", "dim",
            "drift", "diffusion", "hurst",
        ],
    ),
    (
        "method",
        &[
            "solver", "methods", "grid_points", "modes", "tail_tol", "n_paths", "dt", "fd_steps", "fd_mode",
            "fd_safety", "seed", "tolerance", "query_stride", "cases", "samples", "steps", "paths",
        ],
    ),
    ("output", &["dir", "svg"]),
];

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
    key_col: usize,
    value_col: usize,
}

struct Reader {
    sections: BTreeMap<&'static str, BTreeMap<String, Entry>>,
    headers: BTreeMap<&'static str, usize>,
    errors: Vec<ConfigError>,
}

impl Reader {
    fn err(&mut self, line: usize, column: usize, message: impl Into<String>) {
        self.errors.push(ConfigError {
            line,
            column,
            message: message.into(),
        });
    }

    fn take(&mut self, section: &str, key: &str) -> Option<Entry> {
        self.sections.get_mut(section).and_then(|s| s.remove(key))
    }

    fn anchor(&self, section: &str) -> (usize, usize) {
        (self.headers.get(section).copied().unwrap_or(1), 1)
    }

    fn missing(&mut self, section: &str, key: &str, why: &str) {
        let (line, col) = self.anchor(section);
        let place = if section.is_empty() {
            String::new()
        } else {
            format!(" in [{section}]")
        };
        self.err(line, col, format!("missing key `{key}`{place}{why}"));
    }

    fn typed<T>(&mut self, section: &str, key: &str, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Option<(T, Entry)> {
        let e = self.take(section, key)?;
        match parse(&e.value) {
            Ok(v) => Some((v, e)),
            Err(msg) => {
                self.err(e.line, e.value_col, format!("`{key}`: {msg}"));
                None
            }
        }
    }
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let v = if s == "pi" {
        PI
    } else if let Some(k) = s.strip_suffix("*pi") {
        k.trim().parse::<f64>().map_err(|_| format!("expected a real number, got `{s}`"))? * PI
    } else if let Some(k) = s.strip_prefix("pi/") {
        PI / k.trim().parse::<f64>().map_err(|_| format!("expected a real number, got `{s}`"))?
    } else {
        s.parse::<f64>().map_err(|_| format!("expected a real number, got `{s}`"))?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a finite number, got `{s}`"))
    }
}

fn parse_reals(s: &str) -> std::result::Result<Vec<f64>, String> {
    let v = s.split(',').map(parse_real).collect::<std::result::Result<Vec<_>, _>>()?;
    if v.is_empty() {
        Err("expected at least one value".into())
    } else {
        Ok(v)
    }
}

fn parse_count(s: &str) -> std::result::Result<usize, String> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| format!("expected a nonnegative integer, got `{}`", s.trim()))
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("expected true or false, got `{other}`")),
    }
}

fn parse_string(s: &str) -> std::result::Result<String, String> {
    let s = s.trim();
    match s.strip_prefix('"').and_then(|r| r.strip_suffix('"')) {
        Some(inner) => Ok(inner.to_string()),
        None if !s.is_empty() && !s.contains('"') => Ok(s.to_string()),
        None => Err(format!("malformed string `{s}`")),
    }
}

fn parse_datum(s: &str) -> std::result::Result<Datum, String> {
    let s = s.trim();
    let (name, rest) = s
        .split_once('(')
        .ok_or_else(|| format!("expected name(arguments), got `{s}`"))?;
    let args = rest
        .strip_suffix(')')
        .ok_or_else(|| format!("missing `)` in `{s}`"))?;
    let vals = if args.trim().is_empty() { Vec::new() } else { parse_reals(args)? };
    let arity = |n: usize| {
        if vals.len() == n {
            Ok(())
        } else {
            Err(format!("`{}` takes {n} argument(s), got {}", name.trim(), vals.len()))
        }
    };
    match name.trim() {
        "gaussian" => {
            arity(1)?;
            if vals[0] <= 0.0 {
                return Err("gaussian width must be positive".into());
            }
            Ok(Datum::Gaussian { sigma: vals[0] })
        }
        "sine-mode" => {
            arity(2)?;
            if vals[0] < 1.0 || vals[0].fract() != 0.0 {
                return Err("sine-mode index must be a positive integer".into());
            }
            if vals[1] <= 0.0 {
                return Err("sine-mode length must be positive".into());
            }
            Ok(Datum::SineMode {
                n: vals[0] as u32,
                length: vals[1],
            })
        }
        "polynomial" => {
            if vals.is_empty() {
                return Err("polynomial needs at least one coefficient".into());
            }
            Ok(Datum::Polynomial { coeffs: vals })
        }
        "indicator" => {
            arity(2)?;
            if vals[0] >= vals[1] {
                return Err("indicator needs a < b".into());
            }
            Ok(Datum::Indicator { a: vals[0], b: vals[1] })
        }
        other => Err(format!(
            "unknown initial datum `{other}` (expected gaussian, sine-mode, polynomial or indicator)"
        )),
    }
}

fn split_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn lex(text: &str, r: &mut Reader) {
    let mut section: &'static str = "";
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let body = split_comment(raw);
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = body.len() - body.trim_start().len();
        if let Some(inner) = trimmed.strip_prefix('[') {
            let Some(name) = inner.strip_suffix(']') else {
                r.err(line_no, indent + 1, "malformed section header");
                continue;
            };
            let name = name.trim();
            match SECTIONS.iter().find(|(s, _)| !s.is_empty() && *s == name) {
                Some((s, _)) => {
                    if let Some(prev) = r.headers.get(s) {
                        let prev = *prev;
                        r.err(line_no, indent + 1, format!("section [{name}] repeated (first at line {prev})"));
                    } else {
                        r.headers.insert(s, line_no);
                    }
                    section = s;
                }
                None => {
                    r.err(
                        line_no,
                        indent + 1,
                        format!("unknown section [{name}] (expected problem, method or output)"),
                    );
                    section = "?";
                }
            }
            continue;
        }
        let Some(eq) = body.find('=') else {
            r.err(line_no, indent + 1, "expected `key = value`");
            continue;
        };
        let key = body[..eq].trim();
        let value_raw = &body[eq + 1..];
        let value = value_raw.trim();
        let value_col = eq + 2 + (value_raw.len() - value_raw.trim_start().len());
        if section == "?" {
            continue;
        }
        if key.is_empty() {
            r.err(line_no, indent + 1, "missing key before `=`");
            continue;
        }
        if value.is_empty() {
            r.err(line_no, value_col, format!("missing value for `{key}`"));
            continue;
        }
        let allowed = SECTIONS.iter().find(|(s, _)| *s == section).expect("known").1;
        if !allowed.contains(&key) {
            let place = if section.is_empty() {
                "at top level".to_string()
            } else {
                format!("in [{section}]")
            };
            r.err(line_no, indent + 1, format!("unknown key `{key}` {place}"));
            continue;
        }
        let entries = r.sections.entry(section).or_default();
        if let Some(prev) = entries.get(key) {
            let prev = prev.line;
            r.err(line_no, indent + 1, format!("duplicate key `{key}` at lines {prev} and {line_no}"));
            continue;
        }
        entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line: line_no,
                key_col: indent + 1,
                value_col,
            },
        );
    }
}

fn parse_generator(r: &mut Reader) -> Option<(Generator, Entry)> {
    let (name, entry) = r.typed("problem", "generator", parse_string)?;
    let mut ok = true;
    let mut real = |r: &mut Reader, key: &str, default: Option<f64>| -> f64 {
        match (r.typed("problem", key, parse_real), default) {
            (Some((v, _)), _) => v,
            (None, Some(d)) if r.errors.iter().all(|e| !e.message.starts_with(&format!("`{key}`"))) => d,
            (None, _) => {
                if r.errors.iter().all(|e| !e.message.starts_with(&format!("`{key}`"))) {
                    r.missing("problem", key, &format!(" for generator {name}"));
                }
                ok = false;
                f64::NAN
            }
        }
    };
    let list = |r: &mut Reader, key: &str, required: bool| -> Option<Vec<f64>> {
        match r.typed("problem", key, parse_reals) {
            Some((v, _)) => Some(v),
            None => {
                if required && r.errors.iter().all(|e| !e.message.starts_with(&format!("`{key}`"))) {
                    r.missing("problem", key, &format!(" for generator {name}"));
                }
                None
            }
        }
    };
    let gen = match name.as_str() {
        "laplacian" | "stable" | "fbm" => {
            let (dim, dim_entry) = r.typed("problem", "dim", parse_count).unzip();
            let dim = dim.unwrap_or(1);
            if !(1..=3).contains(&dim) {
                let e = dim_entry.expect("dim given");
                r.err(e.line, e.value_col, "dim must be 1, 2 or 3");
            }
            match name.as_str() {
                "laplacian" => Generator::Laplacian {
                    scale: real(r, "scale", Some(1.0)),
                    dim,
                },
                "stable" => Generator::Stable {
                    beta: real(r, "beta", None),
                    scale: real(r, "scale", Some(1.0)),
                    dim,
                },
                _ => Generator::Fbm {
                    hurst: real(r, "hurst", None),
                    dim,
                },
            }
        }
        "independent" => {
            let betas = list(r, "betas", true);
            let scale = real(r, "scale", Some(1.0));
            let betas = betas?;
            Generator::Independent { betas, scale }
        }
        "gaussian" => {
            let diffusion = list(r, "diffusion", true);
            let drift_entry = r.sections.get("problem").and_then(|m| m.get("drift")).cloned();
            let drift = list(r, "drift", false);
            let diffusion = diffusion?;
            let drift = match (drift, drift_entry) {
                (Some(v), Some(e)) if v.len() != diffusion.len() => {
                    r.err(e.line, e.value_col, "drift and diffusion must have the same length");
                    return None;
                }
                (Some(v), _) => v,
                (None, _) => vec![0.0; diffusion.len()],
            };
            Generator::Gaussian { drift, diffusion }
        }
        other => {
            r.err(
                entry.line,
                entry.value_col,
                format!("unknown generator `{other}` (expected laplacian, stable, independent, gaussian or fbm)"),
            );
            return None;
        }
    };
    // keys that belong to other generators
    for key in ["scale", "dim", "beta", "betas", "drift", "diffusion", "hurst"] {
        if !gen.keys().contains(&key) {
            if let Some(e) = r.take("problem", key) {
                r.err(e.line, e.key_col, format!("key `{key}` does not apply to generator {}", gen.name()));
            }
        }
    }
    if !ok {
        return None;
    }
    let range_err = |r: &mut Reader, msg: &str| r.err(entry.line, entry.value_col, msg.to_string());
    match &gen {
        Generator::Laplacian { scale, .. } if *scale <= 0.0 => range_err(r, "scale must be positive"),
        Generator::Stable { beta, scale, .. } => {
            if !(*beta > 0.0 && *beta <= 2.0) {
                range_err(r, "beta must lie in (0,2]");
            }
            if *scale <= 0.0 {
                range_err(r, "scale must be positive");
            }
        }
        Generator::Independent { betas, scale } => {
            if betas.iter().any(|b| !(*b > 1.0 && *b <= 2.0)) {
                range_err(r, "independent-marginal indices must lie in (1,2]");
            }
            if betas.len() > 3 {
                range_err(r, "at most three coordinates are supported");
            }
            if *scale <= 0.0 {
                range_err(r, "scale must be positive");
            }
        }
        Generator::Gaussian { diffusion, .. } if diffusion.iter().any(|q| *q < 0.0) => {
            range_err(r, "diffusion entries must be nonnegative")
        }
        Generator::Fbm { hurst, .. } if !(*hurst > 0.0 && *hurst < 1.0) => range_err(r, "hurst must lie in (0,1)"),
        _ => {}
    }
    Some((gen, entry))
}

fn parse_domain(r: &mut Reader) -> Option<(Domain, Entry)> {
    let (name, entry) = r.typed("problem", "domain", parse_string)?;
    match name.as_str() {
        "interval" => {
            for key in ["lo", "hi"] {
                if let Some(e) = r.take("problem", key) {
                    r.err(e.line, e.key_col, format!("key `{key}` does not apply to an interval domain"));
                }
            }
            let Some((length, e)) = r.typed("problem", "length", parse_real) else {
                r.missing("problem", "length", " for an interval domain");
                return None;
            };
            if length <= 0.0 {
                r.err(e.line, e.value_col, "length must be positive");
                return None;
            }
            Some((Domain::Interval { length }, entry))
        }
        "periodic" => {
            if let Some(e) = r.take("problem", "length") {
                r.err(e.line, e.key_col, "key `length` does not apply to a periodic domain (use lo and hi)");
            }
            let lo = r.typed("problem", "lo", parse_real);
            let hi = r.typed("problem", "hi", parse_real);
            match (lo, hi) {
                (Some((lo, _)), Some((hi, e))) => {
                    if hi <= lo {
                        r.err(e.line, e.value_col, "hi must exceed lo");
                        return None;
                    }
                    Some((Domain::Periodic { lo, hi }, entry))
                }
                (lo, hi) => {
                    if lo.is_none() {
                        r.missing("problem", "lo", " for a periodic domain");
                    }
                    if hi.is_none() {
                        r.missing("problem", "hi", " for a periodic domain");
                    }
                    None
                }
            }
        }
        other => {
            r.err(
                entry.line,
                entry.value_col,
                format!("unknown domain `{other}` (expected interval or periodic)"),
            );
            None
        }
    }
}

fn parse_method_name(s: &str) -> std::result::Result<Method, String> {
    Method::parse(s.trim()).ok_or_else(|| {
        format!(
            "unknown method `{}` (expected spectral, fourier, fd, mc or mc-killed)",
            s.trim()
        )
    })
}

/// Parses and validates a configuration document, collecting every error.
pub fn parse_config(text: &str) -> std::result::Result<ExperimentConfig, Vec<ConfigError>> {
    let mut r = Reader {
        sections: BTreeMap::new(),
        headers: BTreeMap::new(),
        errors: Vec::new(),
    };
    lex(text, &mut r);

    let kind = match r.typed("", "kind", |s| {
        Kind::parse(s.trim()).ok_or_else(|| {
            format!(
                "unknown kind `{}` (expected derivative-check, simulate, solve, validate or table)",
                s.trim()
            )
        })
    }) {
        Some((k, _)) => Some(k),
        None => {
            if r.errors.iter().all(|e| !e.message.starts_with("`kind`")) {
                r.missing("", "kind", "");
            }
            None
        }
    };

    // problem
    let generator = parse_generator(&mut r);
    let alpha = r.typed("problem", "alpha", parse_reals).and_then(|(v, e)| {
        let mut out = Vec::new();
        for a in v {
            match FractionalOrder::new(a) {
                Ok(o) => out.push(o),
                Err(_) => {
                    r.err(e.line, e.value_col, format!("alpha must lie in (0,1], got {a}"));
                    return None;
                }
            }
        }
        Some((out, e))
    });
    let t = r.typed("problem", "t", parse_reals).and_then(|(v, e)| {
        if v.iter().any(|t| *t < 0.0) {
            r.err(e.line, e.value_col, "times must be nonnegative");
            None
        } else {
            Some((v, e))
        }
    });
    let domain = parse_domain(&mut r);
    let initial = r.typed("problem", "initial", parse_datum);

    // method
    let mut m = MethodBlock::default();
    let solver = r.typed("method", "solver", parse_method_name);
    let methods = r.typed("method", "methods", |s| {
        s.split(',').map(parse_method_name).collect::<std::result::Result<Vec<_>, _>>()
    });
    macro_rules! field {
        ($key:literal, $parse:expr, $slot:expr, $check:expr, $msg:literal) => {
            if let Some((v, e)) = r.typed("method", $key, $parse) {
                #[allow(clippy::redundant_closure_call)]
                if ($check)(&v) {
                    $slot = v;
                } else {
                    r.err(e.line, e.value_col, $msg);
                }
            }
        };
    }
    field!("grid_points", parse_count, m.grid_points, |v: &usize| *v >= 3, "grid_points must be at least 3");
    field!("modes", parse_count, m.modes, |v: &usize| (1..=conformable::solvers::MAX_MODES).contains(v), "modes must lie in 1..=4096");
    field!("tail_tol", parse_real, m.tail_tol, |v: &f64| *v > 0.0, "tail_tol must be positive");
    field!("n_paths", parse_count, m.n_paths, |v: &usize| *v >= conformable::solvers::MIN_PATHS, "n_paths must be at least 100");
    field!("dt", parse_real, m.dt, |v: &f64| *v > 0.0, "dt must be positive");
    field!("fd_steps", parse_count, m.fd_steps, |v: &usize| *v >= 10, "fd_steps must be at least 10");
    field!("fd_mode", |s: &str| match s.trim() {
        "direct" => Ok(FdMode::Direct),
        "substituted" => Ok(FdMode::Substituted),
        o => Err(format!("expected direct or substituted, got `{o}`")),
    }, m.fd_mode, |_: &FdMode| true, "");
    field!("fd_safety", parse_real, m.fd_safety, |v: &f64| *v > 0.0 && *v <= 1.0, "fd_safety must lie in (0,1]");
    field!("tolerance", parse_real, m.tolerance, |v: &f64| *v >= 0.0, "tolerance must be nonnegative");
    field!("query_stride", parse_count, m.query_stride, |v: &usize| *v >= 1, "query_stride must be at least 1");
    field!("cases", parse_count, m.cases, |v: &usize| *v >= 1, "cases must be at least 1");
    field!("samples", parse_count, m.samples, |v: &usize| *v >= 1, "samples must be at least 1");
    field!("steps", parse_count, m.steps, |v: &usize| *v >= 1, "steps must be at least 1");
    field!("paths", parse_count, m.paths, |v: &usize| *v >= 1, "paths must be at least 1");
    let seed = r.typed("method", "seed", |s| {
        s.trim()
            .parse::<u64>()
            .map_err(|_| format!("expected an unsigned 64-bit integer, got `{}`", s.trim()))
    });
    m.seed = seed.as_ref().map(|(v, _)| *v);
    m.solver = solver.as_ref().map(|(v, _)| *v);
    m.methods = methods.as_ref().map(|(v, _)| v.clone()).unwrap_or_default();

    // output
    let mut out = Output::default();
    if let Some((v, _)) = r.typed("output", "dir", parse_string) {
        out.dir = v;
    }
    if let Some((v, _)) = r.typed("output", "svg", parse_bool) {
        out.svg = v;
    }

    let Some(kind) = kind else {
        return Err(sorted(r.errors));
    };

    // requirements per kind
    let needs_field = kind != Kind::DerivativeCheck && kind != Kind::Simulate;
    let require = |r: &mut Reader, present: bool, key: &str| {
        let reported = |m: &str| m.contains(&format!("`{key}`")) || m.starts_with(&format!("{key} "));
        if !present && !r.errors.iter().any(|e| reported(&e.message)) {
            r.missing("problem", key, &format!(" (required by {})", kind.name()));
        }
    };
    match kind {
        Kind::DerivativeCheck => {
            require(&mut r, alpha.is_some(), "alpha");
            require(&mut r, t.is_some(), "t");
        }
        Kind::Simulate => {
            require(&mut r, generator.is_some(), "generator");
            require(&mut r, t.is_some(), "t");
        }
        _ => {
            require(&mut r, generator.is_some(), "generator");
            require(&mut r, alpha.is_some(), "alpha");
            require(&mut r, t.is_some(), "t");
            require(&mut r, domain.is_some(), "domain");
            require(&mut r, initial.is_some(), "initial");
        }
    }
    match kind {
        Kind::Solve | Kind::Table if solver.is_none() && r.errors.iter().all(|e| !e.message.contains("`solver`")) => {
            r.missing("method", "solver", &format!(" (required by {})", kind.name()));
        }
        Kind::Validate => match &methods {
            Some((v, e)) if v.len() < 2 => r.err(e.line, e.value_col, "validate needs at least two methods"),
            None if r.errors.iter().all(|e| !e.message.contains("`methods`")) => {
                r.missing("method", "methods", " (required by validate)")
            }
            _ => {}
        },
        _ => {}
    }

    // method / problem compatibility
    if needs_field {
        if let (Some((g, ge)), Some((d, _))) = (&generator, &domain) {
            let chosen: Vec<(Method, usize, usize)> = match kind {
                Kind::Validate => methods
                    .as_ref()
                    .map(|(v, e)| v.iter().map(|m| (*m, e.line, e.value_col)).collect())
                    .unwrap_or_default(),
                _ => solver.as_ref().map(|(m, e)| vec![(*m, e.line, e.value_col)]).unwrap_or_default(),
            };
            for (method, line, col) in chosen {
                if let Err(msg) = compatible(method, g, d) {
                    r.err(line, col, msg);
                }
            }
            if g.dim() > 2 {
                r.err(ge.line, ge.value_col, "grid experiments support at most two dimensions");
            }
        }
        if let (Some((Domain::Interval { length }, _)), Some((datum, e))) = (&domain, &initial) {
            if datum.eval(0.0).abs() > 1e-12 || datum.eval(*length).abs() > 1e-12 {
                let uses_fd = m.solver == Some(Method::Fd) || m.methods.contains(&Method::Fd);
                if uses_fd {
                    r.err(e.line, e.value_col, "the finite-difference oracle needs data vanishing at both ends");
                }
            }
        }
    }
    if kind == Kind::Simulate {
        if let Some((g, e)) = &generator {
            if matches!(g, Generator::Gaussian { .. }) {
                r.err(e.line, e.value_col, "simulate supports laplacian, stable, independent and fbm");
            }
        }
    }
    if kind == Kind::Validate {
        if let Some((v, e)) = &methods {
            let mut seen = v.clone();
            seen.sort();
            seen.dedup();
            if seen.len() != v.len() {
                r.err(e.line, e.value_col, "methods must be distinct");
            }
        }
    }

    let config = ExperimentConfig {
        kind,
        problem: Problem {
            generator: generator.map(|(g, _)| g),
            alpha: alpha.map(|(a, _)| a).unwrap_or_else(|| vec![FractionalOrder::CLASSICAL]),
            t: t.map(|(t, _)| t).unwrap_or_default(),
            domain: domain.map(|(d, _)| d),
            initial: initial.map(|(i, _)| i),
        },
        method: m,
        output: out,
    };
    if config.is_stochastic() && config.method.seed.is_none() && r.errors.iter().all(|e| !e.message.contains("`seed`")) {
        r.missing("method", "seed", &format!(" ({} draws random numbers)", kind.name()));
    }
    if r.errors.is_empty() {
        Ok(config)
    } else {
        Err(sorted(r.errors))
    }
}

fn compatible(method: Method, g: &Generator, d: &Domain) -> std::result::Result<(), String> {
    let name = method.name();
    let unit_heat = g.stable_index() == Some((2.0, 1.0)) && g.dim() == 1;
    match (method, d) {
        (Method::Spectral, Domain::Interval { .. }) if unit_heat => Ok(()),
        (Method::Spectral, Domain::Interval { .. }) => {
            Err("spectral needs the one-dimensional generator d^2/dx^2 (laplacian with scale 1)".into())
        }
        (Method::McKilled, Domain::Interval { .. }) => match g.stable_index() {
            Some((_, scale)) if scale == 1.0 && g.dim() == 1 => Ok(()),
            _ => Err("mc-killed needs a one-dimensional laplacian or stable generator with scale 1".into()),
        },
        (Method::Fd, Domain::Interval { .. }) if unit_heat => Ok(()),
        (Method::Fd, Domain::Interval { .. }) => {
            Err("fd on an interval needs the generator d^2/dx^2 (laplacian with scale 1)".into())
        }
        (Method::Spectral | Method::McKilled, Domain::Periodic { .. }) => Err(format!("{name} needs an interval domain")),
        (Method::Fourier | Method::Mc, Domain::Interval { .. }) => Err(format!("{name} needs a periodic domain")),
        (Method::Fd, Domain::Periodic { .. }) if g.dim() != 1 || matches!(g, Generator::Fbm { .. }) => {
            Err("fd needs a one-dimensional Lévy generator".into())
        }
        (Method::Fourier, _) if matches!(g, Generator::Fbm { .. }) => Err("fourier needs a Lévy generator".into()),
        _ => Ok(()),
    }
}

fn sorted(mut errors: Vec<ConfigError>) -> Vec<ConfigError> {
    errors.sort_by(|a, b| (a.line, a.column, &a.message).cmp(&(b.line, b.column, &b.message)));
    errors.dedup();
    errors
}

/// Shortest round-trip rendering of a real.
fn real(x: f64) -> String {
    format!("{x}")
}

fn reals(v: &[f64]) -> String {
    v.iter().map(|x| real(*x)).collect::<Vec<_>>().join(", ")
}

/// Writes the canonical form of a configuration; parsing it back yields an equal value.
pub fn serialize_config(c: &ExperimentConfig) -> String {
    let mut s = format!("kind = {}\n\n[problem]\n", c.kind.name());
    let p = &c.problem;
    if let Some(g) = &p.generator {
        s += &format!("generator = {}\n", g.name());
        match g {
            Generator::Laplacian { scale, dim } => s += &format!("scale = {}\ndim = {dim}\n", real(*scale)),
            Generator::Stable { beta, scale, dim } => {
                s += &format!("beta = {}\nscale = {}\ndim = {dim}\n", real(*beta), real(*scale))
            }
            Generator::Independent { betas, scale } => {
                s += &format!("betas = {}\nscale = {}\n", reals(betas), real(*scale))
            }
            Generator::Gaussian { drift, diffusion } => {
                s += &format!("drift = {}\ndiffusion = {}\n", reals(drift), reals(diffusion))
            }
            Generator::Fbm { hurst, dim } => s += &format!("hurst = {}\ndim = {dim}\n", real(*hurst)),
        }
    }
    let alphas: Vec<f64> = p.alpha.iter().map(|o| o.alpha()).collect();
    s += &format!("alpha = {}\n", reals(&alphas));
    if !p.t.is_empty() {
        s += &format!("t = {}\n", reals(&p.t));
    }
    match p.domain {
        Some(Domain::Interval { length }) => s += &format!("domain = interval\nlength = {}\n", real(length)),
        Some(Domain::Periodic { lo, hi }) => s += &format!("domain = periodic\nlo = {}\nhi = {}\n", real(lo), real(hi)),
        None => {}
    }
    if let Some(d) = &p.initial {
        s += &format!("initial = {}\n", d.render());
    }

    let m = &c.method;
    s += "\n[method]\n";
    if let Some(sv) = m.solver {
        s += &format!("solver = {}\n", sv.name());
    }
    if !m.methods.is_empty() {
        let names: Vec<&str> = m.methods.iter().map(|x| x.name()).collect();
        s += &format!("methods = {}\n", names.join(", "));
    }
    if let Some(seed) = m.seed {
        s += &format!("seed = {seed}\n");
    }
    s += &format!(
        "grid_points = {}\nmodes = {}\ntail_tol = {}\nn_paths = {}\ndt = {}\nfd_steps = {}\nfd_mode = {}\nfd_safety = {}\ntolerance = {}\nquery_stride = {}\ncases = {}\nsamples = {}\nsteps = {}\npaths = {}\n",
        m.grid_points,
        m.modes,
        real(m.tail_tol),
        m.n_paths,
        real(m.dt),
        m.fd_steps,
        match m.fd_mode {
            FdMode::Direct => "direct",
            FdMode::Substituted => "substituted",
        },
        real(m.fd_safety),
        real(m.tolerance),
        m.query_stride,
        m.cases,
        m.samples,
        m.steps,
        m.paths,
    );
    s += &format!("\n[output]\ndir = \"{}\"\nsvg = {}\n", c.output.dir, c.output.svg);
    s
}
