//! Runs a parsed configuration and renders its output files.
//!
//! Computation is separated from writing: [`run_experiment`] returns every
//! output as a string keyed by file name, and [`write_outputs`] stores them
//! together with a JSON manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use conformable::export::{fmt_f64, svg_line_chart, CsvTable, Series};
use conformable::oracle::{compare_values, solve_fd, Boundary, FdOperator, SteppingMode, SteppingScheme, REPORT_HEADER};
use conformable::rng::derive_seed;
use conformable::solvers::{
    solve_fourier, solve_mc_free, solve_mc_killed, solve_spectral_interval, FreeProcess, SpectralBasis,
};
use conformable::{
    sample_fbm_marginal, sample_levy_path, sample_stable_increment, FbmSampler, FbmSpec, FractionalOrder, GridField,
    IntervalDomain, LevySymbol, PointCloud, SamplePath, StableSpec,
};
use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::config::{
    serialize_config, ConfigError, Datum, Domain, ExperimentConfig, FdMode, Generator, Kind, Method,
};
use crate::properties::{self, property_table};

#[derive(Debug)]
pub enum RunError {
    /// The configuration document is invalid.
    Config(Vec<ConfigError>),
    /// The configuration is well formed but an operation rejected its inputs.
    Invalid(String),
    /// A numerical routine failed.
    Numerical(conformable::Error),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(errs) => {
                for (i, e) in errs.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "config: {e}")?;
                }
                Ok(())
            }
            RunError::Invalid(m) => write!(f, "invalid input: {m}"),
            RunError::Numerical(e) => write!(f, "numerical failure: {e}"),
            RunError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<conformable::Error> for RunError {
    fn from(e: conformable::Error) -> Self {
        match e {
            conformable::Error::Contract(m) => RunError::Invalid(m),
            other => RunError::Numerical(other),
        }
    }
}

type Result<T> = std::result::Result<T, RunError>;

/// Files produced by a run, keyed by name, plus any tolerance failures.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub files: BTreeMap<String, String>,
    pub failures: Vec<String>,
}

impl RunOutcome {
    /// 0 when everything passed, 2 when a tolerance check failed.
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            2
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub quiet: bool,
}

/// Method-specific stream offsets for derived seeds.
fn method_tag(m: Method) -> u64 {
    match m {
        Method::Spectral => 1,
        Method::Fourier => 2,
        Method::Fd => 3,
        Method::Mc => 4,
        Method::McKilled => 5,
    }
}

/// Values of one method at one `(alpha, t)` cell.
struct Field {
    /// Flat grid indices of the evaluated points.
    index: Vec<usize>,
    u: Vec<f64>,
    std_error: Option<Vec<f64>>,
    bias: f64,
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    grid: GridField,
    datum: &'a Datum,
    symbol: Option<LevySymbol>,
    fbm: Option<FbmSpec>,
    basis: Option<SpectralBasis>,
    opts: RunOptions,
}

impl Context<'_> {
    fn note(&self, msg: &str) {
        if !self.opts.quiet {
            eprintln!("{msg}");
        }
    }

    fn all_points(&self) -> Vec<usize> {
        (0..self.grid.len()).collect()
    }

    fn strided(&self) -> Vec<usize> {
        (0..self.grid.len()).step_by(self.config.method.query_stride).collect()
    }

    fn initial(&self, index: Vec<usize>) -> Field {
        Field {
            u: index.iter().map(|&i| self.grid.values[i]).collect(),
            std_error: Some(vec![0.0; index.len()]),
            index,
            bias: 0.0,
        }
    }

    fn symbol(&self) -> Result<&LevySymbol> {
        self.symbol
            .as_ref()
            .ok_or_else(|| RunError::Invalid("this method needs a Lévy generator".into()))
    }

    fn solve(&self, method: Method, ia: usize, o: FractionalOrder, it: usize, t: f64) -> Result<Field> {
        let m = &self.config.method;
        let seed = derive_seed(self.config.seed(), &[method_tag(method), ia as u64, it as u64]);
        match method {
            Method::Spectral => {
                let basis = self.basis.as_ref().expect("projected for spectral runs");
                let xs: Vec<f64> = self.grid.points().iter().map(|p| p[0]).collect();
                let datum = self.datum;
                let sol = solve_spectral_interval(&|x| datum.eval(x), basis, o, t, &xs, m.tail_tol)?;
                if sol.truncated {
                    self.note(&format!(
                        "warning: spectral tail bound {:e} above {:e} with {} modes (alpha={}, t={t})",
                        sol.tail_bound,
                        m.tail_tol,
                        sol.n_modes,
                        o.alpha()
                    ));
                }
                Ok(Field {
                    index: self.all_points(),
                    u: sol.values,
                    std_error: None,
                    bias: 0.0,
                })
            }
            Method::Fourier => {
                let u = solve_fourier(&self.grid, self.symbol()?, o, t)?;
                Ok(Field {
                    index: self.all_points(),
                    u: u.values,
                    std_error: None,
                    bias: 0.0,
                })
            }
            Method::Fd => {
                let u = if t == 0.0 {
                    self.grid.clone()
                } else {
                    let mode = match m.fd_mode {
                        FdMode::Direct => SteppingMode::DirectT,
                        FdMode::Substituted => SteppingMode::SubstitutedS,
                    };
                    let scheme = SteppingScheme::new(mode, t, m.fd_steps, m.fd_safety)?;
                    match self.config.problem.domain {
                        Some(Domain::Interval { length }) => solve_fd(
                            &self.grid,
                            &FdOperator::Laplacian1d,
                            o,
                            &scheme,
                            Boundary::DirichletInterval(length),
                        )?,
                        _ => solve_fd(
                            &self.grid,
                            &FdOperator::SpectralMultiplier(self.symbol()?.clone()),
                            o,
                            &scheme,
                            Boundary::FreePeriodic,
                        )?,
                    }
                };
                Ok(Field {
                    index: self.all_points(),
                    u: u.values,
                    std_error: None,
                    bias: 0.0,
                })
            }
            Method::Mc => {
                let index = self.strided();
                if t == 0.0 {
                    return Ok(self.initial(index));
                }
                let query: Vec<Vec<f64>> = index.iter().map(|&i| self.grid.point(i)).collect();
                let datum = self.datum;
                let f = |x: &[f64]| datum.eval_point(x);
                let process = match (&self.fbm, &self.symbol) {
                    (Some(spec), _) => FreeProcess::Fbm(spec),
                    (None, Some(sym)) => FreeProcess::Levy(sym),
                    _ => unreachable!("generator is either fbm or Lévy"),
                };
                let est = solve_mc_free(&f, process, o, t, &query, m.n_paths, seed)?;
                Ok(Field {
                    index,
                    u: est.mean,
                    std_error: Some(est.std_error),
                    bias: 0.0,
                })
            }
            Method::McKilled => {
                let index = self.strided();
                if t == 0.0 {
                    return Ok(self.initial(index));
                }
                let Some(Domain::Interval { length }) = self.config.problem.domain else {
                    unreachable!("validated: mc-killed runs on intervals")
                };
                let domain = IntervalDomain::new(length)?;
                let beta = self
                    .config
                    .problem
                    .generator
                    .as_ref()
                    .and_then(Generator::stable_index)
                    .map(|(b, _)| b)
                    .expect("validated");
                let datum = self.datum;
                let (mut u, mut se, mut bias) = (Vec::new(), Vec::new(), 0.0f64);
                for (k, &i) in index.iter().enumerate() {
                    let x = self.grid.point(i)[0];
                    if !domain.contains_open(x) {
                        u.push(0.0);
                        se.push(0.0);
                        continue;
                    }
                    let est = solve_mc_killed(
                        &|y| datum.eval(y),
                        &domain,
                        o,
                        beta,
                        t,
                        x,
                        m.n_paths,
                        m.dt,
                        derive_seed(seed, &[k as u64]),
                    )?;
                    u.push(est.mean[0]);
                    se.push(est.std_error[0]);
                    bias = bias.max(est.bias_budget);
                }
                Ok(Field {
                    index,
                    u,
                    std_error: Some(se),
                    bias,
                })
            }
        }
    }

    fn field_csv(&self, field: &Field) -> Result<String> {
        match &field.std_error {
            None => Ok(self.grid.with_values(field.u.clone())?.to_csv()),
            Some(se) => {
                let mut header: Vec<&str> = if self.grid.dim() == 1 { vec!["x"] } else { vec!["x", "y"] };
                header.extend(["u", "std_error"]);
                let mut table = CsvTable::new(&header);
                for (k, &i) in field.index.iter().enumerate() {
                    let mut row = self.grid.point(i);
                    row.extend([field.u[k], se[k]]);
                    table.push_floats(&row);
                }
                Ok(table.into_string())
            }
        }
    }

    fn series(&self, label: String, field: &Field) -> Series {
        Series {
            label,
            x: field.index.iter().map(|&i| self.grid.point(i)[0]).collect(),
            y: field.u.clone(),
        }
    }
}

fn build_grid(config: &ExperimentConfig, datum: &Datum, dim: usize) -> Result<GridField> {
    let n = config.method.grid_points;
    let g = match (config.problem.domain.expect("validated"), dim) {
        (Domain::Interval { length }, _) => GridField::sample_1d(0.0, length, n, |x| datum.eval(x))?,
        (Domain::Periodic { lo, hi }, 1) => GridField::sample_periodic_1d(lo, hi, n, |x| datum.eval(x))?,
        (Domain::Periodic { lo, hi }, _) => {
            GridField::sample_periodic_2d(lo, hi, n, |x, y| datum.eval(x) * datum.eval(y))?
        }
    };
    Ok(g)
}

fn levy_symbol(g: &Generator) -> Result<Option<LevySymbol>> {
    Ok(match g {
        Generator::Laplacian { scale, dim } => Some(LevySymbol::heat(*dim, *scale)?),
        Generator::Stable { beta, scale, dim } => Some(LevySymbol::symmetric_stable(*dim, *scale, *beta)?),
        Generator::Independent { betas, scale } => Some(LevySymbol::independent_stable(*scale, betas.clone())?),
        Generator::Gaussian { drift, diffusion } => Some(LevySymbol::gaussian(
            drift.clone(),
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diffusion.clone())),
        )?),
        Generator::Fbm { .. } => None,
    })
}

fn stable_spec(g: &Generator) -> Result<StableSpec> {
    Ok(match g {
        Generator::Laplacian { scale, dim } => StableSpec::spherical(2.0, *scale, *dim)?,
        Generator::Stable { beta, scale, dim } => StableSpec::spherical(*beta, *scale, *dim)?,
        Generator::Independent { betas, scale } => StableSpec::independent(betas.clone(), *scale)?,
        _ => return Err(RunError::Invalid("simulate needs a stable-family or fbm generator".into())),
    })
}

fn context<'a>(config: &'a ExperimentConfig, opts: RunOptions, needs_basis: bool) -> Result<Context<'a>> {
    let generator = config.problem.generator.as_ref().expect("validated");
    let datum = config.problem.initial.as_ref().expect("validated");
    let grid = build_grid(config, datum, generator.dim())?;
    let fbm = match generator {
        Generator::Fbm { hurst, dim } => Some(FbmSpec::new(*hurst, *dim)?),
        _ => None,
    };
    let basis = match (needs_basis, config.problem.domain) {
        (true, Some(Domain::Interval { length })) => {
            Some(SpectralBasis::project(&|x| datum.eval(x), length, config.method.modes)?)
        }
        _ => None,
    };
    Ok(Context {
        config,
        grid,
        datum,
        symbol: levy_symbol(generator)?,
        fbm,
        basis,
        opts,
    })
}

fn cells(config: &ExperimentConfig) -> Vec<(usize, FractionalOrder, usize, f64)> {
    let mut out = Vec::new();
    for (ia, o) in config.problem.alpha.iter().enumerate() {
        for (it, t) in config.problem.t.iter().enumerate() {
            out.push((ia, *o, it, *t));
        }
    }
    out
}

fn cell_label(o: FractionalOrder, t: f64) -> String {
    format!("alpha={} t={}", o.alpha(), t)
}

/// Executes the experiment and returns the rendered outputs.
pub fn run_experiment(config: &ExperimentConfig, opts: RunOptions) -> Result<RunOutcome> {
    let mut files = BTreeMap::new();
    let mut failures = Vec::new();
    match config.kind {
        Kind::DerivativeCheck => derivative_check(config, &mut files, &mut failures)?,
        Kind::Simulate => simulate(config, &mut files)?,
        Kind::Solve => solve(config, opts, &mut files)?,
        Kind::Table => table(config, opts, &mut files)?,
        Kind::Validate => validate(config, opts, &mut files, &mut failures)?,
    }
    Ok(RunOutcome { files, failures })
}

fn derivative_check(
    config: &ExperimentConfig,
    files: &mut BTreeMap<String, String>,
    failures: &mut Vec<String>,
) -> Result<()> {
    let points: Vec<(FractionalOrder, f64)> = cells(config).into_iter().map(|(_, o, _, t)| (o, t)).collect();
    let rows = property_table(&points, config.method.cases, config.seed())?;
    let mut table = CsvTable::new(&properties::HEADER);
    for r in &rows {
        table.push_cells(&[
            r.property.to_string(),
            r.case.to_string(),
            fmt_f64(r.alpha),
            fmt_f64(r.t),
            fmt_f64(r.lhs),
            fmt_f64(r.rhs),
            fmt_f64(r.tolerance),
            r.pass().to_string(),
        ]);
        if !r.pass() {
            failures.push(format!(
                "{} case {} (alpha={}, t={}): |{} - {}| > {}",
                r.property, r.case, r.alpha, r.t, r.lhs, r.rhs, r.tolerance
            ));
        }
    }
    files.insert("derivative_check.csv".into(), table.into_string());
    Ok(())
}

fn simulate(config: &ExperimentConfig, files: &mut BTreeMap<String, String>) -> Result<()> {
    let m = &config.method;
    let generator = config.problem.generator.as_ref().expect("validated");
    let horizon = config.problem.t.iter().copied().fold(0.0, f64::max);
    if horizon <= 0.0 {
        return Err(RunError::Invalid("simulate needs a positive time horizon".into()));
    }
    let times: Vec<f64> = (0..=m.steps)
        .map(|i| if i == m.steps { horizon } else { horizon * i as f64 / m.steps as f64 })
        .collect();
    let seed = config.seed();
    let (paths, marginal): (Vec<SamplePath>, PointCloud) = match generator {
        Generator::Fbm { hurst, dim } => {
            let spec = FbmSpec::new(*hurst, *dim)?;
            let sampler = FbmSampler::new(spec, &times)?;
            let paths = (0..m.paths as u64).map(|i| sampler.sample(seed, i)).collect();
            (paths, sample_fbm_marginal(&spec, horizon, m.samples, seed)?)
        }
        g => {
            let spec = stable_spec(g)?;
            let paths = (0..m.paths as u64)
                .map(|i| sample_levy_path(&spec, &times, derive_seed(seed, &[i])))
                .collect::<conformable::Result<Vec<_>>>()?;
            (paths, sample_stable_increment(&spec, horizon, m.samples, seed)?)
        }
    };
    let width = (m.paths.max(2) - 1).to_string().len();
    let mut series = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        files.insert(format!("path_{i:0width$}.csv"), p.to_csv());
        series.push(Series {
            label: format!("path {i}"),
            x: p.times.clone(),
            y: (0..p.len()).map(|k| p.value(k)[0]).collect(),
        });
    }
    let header: Vec<String> = (1..=marginal.dim).map(|j| format!("x{j}")).collect();
    let mut table = CsvTable::new(&header);
    for i in 0..marginal.len() {
        table.push_floats(marginal.point(i));
    }
    files.insert("marginal.csv".into(), table.into_string());
    if config.output.svg {
        files.insert(
            "paths.svg".into(),
            svg_line_chart(&format!("{} sample paths", generator.name()), "t", "x1", &series),
        );
    }
    Ok(())
}

fn solve(config: &ExperimentConfig, opts: RunOptions, files: &mut BTreeMap<String, String>) -> Result<()> {
    let method = config.method.solver.expect("validated");
    let ctx = context(config, opts, method == Method::Spectral)?;
    let mut series = Vec::new();
    for (ia, o, it, t) in cells(config) {
        ctx.note(&format!("{} alpha={} t={t}", method.name(), o.alpha()));
        let field = ctx.solve(method, ia, o, it, t)?;
        files.insert(format!("{}_a{ia}_t{it}.csv", method.name()), ctx.field_csv(&field)?);
        series.push(ctx.series(cell_label(o, t), &field));
    }
    if config.output.svg && ctx.grid.dim() == 1 {
        files.insert(
            "solution.svg".into(),
            svg_line_chart(&format!("{} solution", method.name()), "x", "u", &series),
        );
    }
    Ok(())
}

fn table(config: &ExperimentConfig, opts: RunOptions, files: &mut BTreeMap<String, String>) -> Result<()> {
    let method = config.method.solver.expect("validated");
    let ctx = context(config, opts, method == Method::Spectral)?;
    let mut header = vec!["alpha", "t", "x"];
    if ctx.grid.dim() == 2 {
        header.push("y");
    }
    header.push("u");
    if method.is_stochastic() {
        header.push("std_error");
    }
    let mut out = CsvTable::new(&header);
    let mut series = Vec::new();
    for (ia, o, it, t) in cells(config) {
        ctx.note(&format!("{} alpha={} t={t}", method.name(), o.alpha()));
        let field = ctx.solve(method, ia, o, it, t)?;
        for (k, &i) in field.index.iter().enumerate() {
            let mut row = vec![o.alpha(), t];
            row.extend(ctx.grid.point(i));
            row.push(field.u[k]);
            if let Some(se) = &field.std_error {
                row.push(se[k]);
            }
            out.push_floats(&row);
        }
        series.push(ctx.series(cell_label(o, t), &field));
    }
    files.insert("table.csv".into(), out.into_string());
    if config.output.svg && ctx.grid.dim() == 1 {
        files.insert(
            "table.svg".into(),
            svg_line_chart(&format!("{} sweep", method.name()), "x", "u", &series),
        );
    }
    Ok(())
}

/// Restricts two fields to their common points.
fn common(a: &Field, b: &Field) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let pos: BTreeMap<usize, usize> = b.index.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let (mut ua, mut ub, mut sigma) = (Vec::new(), Vec::new(), Vec::new());
    for (ka, i) in a.index.iter().enumerate() {
        if let Some(&kb) = pos.get(i) {
            ua.push(a.u[ka]);
            ub.push(b.u[kb]);
            let sa = a.std_error.as_ref().map_or(0.0, |s| s[ka]);
            let sb = b.std_error.as_ref().map_or(0.0, |s| s[kb]);
            sigma.push(sa.hypot(sb));
        }
    }
    (ua, ub, sigma)
}

fn validate(
    config: &ExperimentConfig,
    opts: RunOptions,
    files: &mut BTreeMap<String, String>,
    failures: &mut Vec<String>,
) -> Result<()> {
    let methods = &config.method.methods;
    let ctx = context(config, opts, methods.contains(&Method::Spectral))?;
    let tol = config.method.tolerance;
    let mut header: Vec<&str> = REPORT_HEADER.to_vec();
    header.extend(["statistic", "limit", "pass"]);
    let mut report = CsvTable::new(&header);
    for (ia, o, it, t) in cells(config) {
        let mut fields = Vec::with_capacity(methods.len());
        for &method in methods {
            ctx.note(&format!("{} alpha={} t={t}", method.name(), o.alpha()));
            let field = ctx.solve(method, ia, o, it, t)?;
            files.insert(format!("{}_a{ia}_t{it}.csv", method.name()), ctx.field_csv(&field)?);
            fields.push(field);
        }
        let reference = &fields[0];
        for (method, field) in methods.iter().zip(&fields).skip(1) {
            let (u, r, sigma) = common(field, reference);
            let rep = compare_values(&u, &r)?;
            let stochastic = field.std_error.is_some() || reference.std_error.is_some();
            // deterministic pairs: relative l2; stochastic pairs: worst excess over 3 sigma + bias
            let statistic = if stochastic {
                let bias = field.bias + reference.bias;
                u.iter()
                    .zip(&r)
                    .zip(&sigma)
                    .map(|((a, b), s)| ((a - b).abs() - 3.0 * s - bias).max(0.0))
                    .fold(0.0, f64::max)
            } else {
                rep.rel_l2.unwrap_or(rep.l2)
            };
            let pass = statistic <= tol;
            let mut row = rep.csv_row(method.name(), methods[0].name(), o.alpha(), t);
            row.extend([fmt_f64(statistic), fmt_f64(tol), pass.to_string()]);
            report.push_cells(&row);
            if !pass {
                failures.push(format!(
                    "{} vs {} at alpha={}, t={t}: statistic {statistic:e} exceeds {tol:e}",
                    method.name(),
                    methods[0].name(),
                    o.alpha()
                ));
            }
        }
        if config.output.svg && ctx.grid.dim() == 1 {
            let series: Vec<Series> = methods
                .iter()
                .zip(&fields)
                .map(|(m, f)| ctx.series(m.name().to_string(), f))
                .collect();
            files.insert(
                format!("validate_a{ia}_t{it}.svg"),
                svg_line_chart(&cell_label(o, t), "x", "u", &series),
            );
        }
    }
    files.insert("comparison.csv".into(), report.into_string());
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Manifest recording the canonical config hash, seed, versions and a hash per file.
pub fn manifest(config: &ExperimentConfig, outcome: &RunOutcome) -> String {
    let files: serde_json::Map<String, serde_json::Value> = outcome
        .files
        .iter()
        .map(|(name, body)| (name.clone(), serde_json::Value::String(sha256_hex(body.as_bytes()))))
        .collect();
    let value = serde_json::json!({
        "tool": "conformable",
        "version": env!("CARGO_PKG_VERSION"),
        "kind": config.kind.name(),
        "seed": config.method.seed,
        "config_sha256": sha256_hex(serialize_config(config).as_bytes()),
        "passed": outcome.failures.is_empty(),
        "files": files,
    });
    serde_json::to_string_pretty(&value).expect("json values serialize") + "\n"
}

/// Writes every output and `manifest.json` under `dir`, returning the paths written.
pub fn write_outputs(dir: &Path, config: &ExperimentConfig, outcome: &RunOutcome) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let manifest = manifest(config, outcome);
    for (name, body) in outcome.files.iter().chain([(&"manifest.json".to_string(), &manifest)]) {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}
