//! Command-line driver: file schemas and the `iterate`, `verify`, `fmo` and
//! `phantom` subcommands.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 the computation ran
//! but did not succeed (no convergence, a condition failed, degenerate split).

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmo::{
    self, coefficient_percentile, FmoProblem, FmoReport, InnerParams, OuterParams, VoxelTag,
};
use crate::function_space::{
    check_metric_axioms, DiscreteFunction, Domain, DomainPoint, MetricKind,
};
use crate::iteration::{self, check_hypothesis_h, verify_fixed_function, IterationConfig};
use crate::operators::{
    check_alpha_admissible, check_alpha_psi_contractive, check_contraction, check_psi_family,
    check_reich_condition, estimate_contraction_constant, AlphaFunction, Interval, OperatorSpec,
    PsiSpec, ScalarMap,
};
use crate::phantom::{generate_phantom, PhantomSpec};
use crate::sparse::SparseDoseMatrix;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_NOT_SATISFIED: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "fixfn",
    version,
    about = "Fixed-function iteration and split-matrix fluence optimization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Input configuration file (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// `csv` additionally writes tabular outputs next to the JSON report.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Overrides the phantom seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run Picard iteration and write `iterate_report.json`.
    Iterate,
    /// Evaluate contraction-type conditions and write `verify_report.json`.
    Verify,
    /// Solve a split-matrix FMO problem and write `fmo_report.json`.
    Fmo,
    /// Generate a synthetic instance: `matrix.csv` and `problem.json`.
    Phantom,
}

/// Either a full function object or a scalar map sampled on a grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FunctionSource {
    Explicit(DiscreteFunction),
    Sampled(SampledFunction),
}

#[derive(Debug, Clone, Deserialize)]
pub struct SampledFunction {
    pub grid: GridSource,
    pub sample: Sampler,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridSource {
    /// Evenly spaced points with trapezoid weights.
    Uniform { start: f64, end: f64, points: usize },
    /// Explicit coordinates, optionally labeled; no weights.
    Points {
        coordinates: Vec<f64>,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
}

impl GridSource {
    fn build(&self) -> Result<Domain> {
        match self {
            GridSource::Uniform { start, end, points } => {
                Domain::uniform_grid(*start, *end, *points)
            }
            GridSource::Points {
                coordinates,
                labels: None,
            } => Domain::from_coordinates(coordinates),
            GridSource::Points {
                coordinates,
                labels: Some(labels),
            } => {
                if labels.len() != coordinates.len() {
                    return Err(Error::InvalidDomain(
                        "labels and coordinates differ in length".into(),
                    ));
                }
                let points = labels
                    .iter()
                    .zip(coordinates)
                    .map(|(l, &c)| DomainPoint {
                        label: l.clone(),
                        coordinate: c,
                    })
                    .collect();
                Domain::new(points, None)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampler {
    /// Any pointwise operator evaluated at the coordinate.
    Map {
        map: ScalarMap,
    },
    Constant {
        value: f64,
    },
    Indicator {
        interval: Interval,
        #[serde(default = "one")]
        inside: f64,
        #[serde(default)]
        outside: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl FunctionSource {
    /// Sampled sources with equal grids share one domain allocation.
    pub fn resolve(&self, cache: &mut Vec<(GridSource, Arc<Domain>)>) -> Result<DiscreteFunction> {
        match self {
            FunctionSource::Explicit(f) => Ok(f.clone()),
            FunctionSource::Sampled(s) => {
                let domain = match cache.iter().find(|(g, _)| *g == s.grid) {
                    Some((_, d)) => d.clone(),
                    None => {
                        let d = Arc::new(s.grid.build()?);
                        cache.push((s.grid.clone(), d.clone()));
                        d
                    }
                };
                match &s.sample {
                    Sampler::Map { map } => {
                        let op = OperatorSpec::Pointwise(map.clone());
                        op.validate()?;
                        DiscreteFunction::from_fn(domain, |u| op.eval_scalar(u))
                    }
                    Sampler::Constant { value } => DiscreteFunction::constant(domain, *value),
                    Sampler::Indicator {
                        interval,
                        inside,
                        outside,
                    } => DiscreteFunction::from_fn(domain, |u| {
                        if interval.contains(u) {
                            *inside
                        } else {
                            *outside
                        }
                    }),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct IterateConfigFile {
    pub schema_version: u32,
    pub operator: OperatorSpec,
    pub f0: FunctionSource,
    pub iteration: IterationConfig,
}

#[derive(Debug, Clone, Deserialize)]
pub struct VerifyConfigFile {
    pub schema_version: u32,
    pub checks: Vec<CheckSpec>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CheckSpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub check: Check,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    /// Without `lambda`, estimates the constant; with it, checks the inequality.
    Contraction {
        operator: OperatorSpec,
        #[serde(default)]
        metric: MetricKind,
        pairs: Vec<[FunctionSource; 2]>,
        #[serde(default)]
        lambda: Option<f64>,
    },
    Reich {
        operator: OperatorSpec,
        #[serde(default)]
        metric: MetricKind,
        a: f64,
        b: f64,
        c: f64,
        pairs: Vec<[FunctionSource; 2]>,
    },
    AlphaAdmissible {
        operator: OperatorSpec,
        alpha: AlphaFunction,
        pairs: Vec<[FunctionSource; 2]>,
    },
    PsiFamily {
        psi: PsiSpec,
        t_samples: Vec<f64>,
        #[serde(default = "default_n_max")]
        n_max: usize,
        #[serde(default = "default_tail_tol")]
        tail_tol: f64,
    },
    AlphaPsi {
        operator: OperatorSpec,
        alpha: AlphaFunction,
        psi: PsiSpec,
        #[serde(default)]
        metric: MetricKind,
        pairs: Vec<[FunctionSource; 2]>,
    },
    HypothesisH {
        alpha: AlphaFunction,
        candidates: Vec<FunctionSource>,
        pool: Vec<FunctionSource>,
    },
    FixedFunction {
        operator: OperatorSpec,
        function: FunctionSource,
        #[serde(default)]
        metric: MetricKind,
        #[serde(default = "default_fixed_tol")]
        tol: f64,
    },
    MetricAxioms {
        metric: MetricKind,
        sample: Vec<FunctionSource>,
    },
}

fn default_n_max() -> usize {
    60
}

fn default_tail_tol() -> f64 {
    1e-12
}

fn default_fixed_tol() -> f64 {
    1e-12
}

impl Check {
    fn kind(&self) -> &'static str {
        match self {
            Check::Contraction { .. } => "contraction",
            Check::Reich { .. } => "reich",
            Check::AlphaAdmissible { .. } => "alpha_admissible",
            Check::PsiFamily { .. } => "psi_family",
            Check::AlphaPsi { .. } => "alpha_psi",
            Check::HypothesisH { .. } => "hypothesis_h",
            Check::FixedFunction { .. } => "fixed_function",
            Check::MetricAxioms { .. } => "metric_axioms",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub kind: &'static str,
    pub satisfied: bool,
    pub report: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub all_satisfied: bool,
    pub checks: Vec<CheckOutcome>,
}

fn resolve_pairs(
    pairs: &[[FunctionSource; 2]],
    cache: &mut Vec<(GridSource, Arc<Domain>)>,
) -> Result<Vec<(DiscreteFunction, DiscreteFunction)>> {
    pairs
        .iter()
        .map(|[f, g]| Ok((f.resolve(cache)?, g.resolve(cache)?)))
        .collect()
}

fn resolve_all(
    list: &[FunctionSource],
    cache: &mut Vec<(GridSource, Arc<Domain>)>,
) -> Result<Vec<DiscreteFunction>> {
    list.iter().map(|f| f.resolve(cache)).collect()
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Runs every check in order. Errors abort the whole run.
pub fn run_checks(config: &VerifyConfigFile) -> Result<VerifyReport> {
    let mut cache = Vec::new();
    let mut checks = Vec::with_capacity(config.checks.len());
    for (i, spec) in config.checks.iter().enumerate() {
        let (satisfied, report) = match &spec.check {
            Check::Contraction {
                operator,
                metric,
                pairs,
                lambda,
            } => {
                let pairs = resolve_pairs(pairs, &mut cache)?;
                let r = match lambda {
                    Some(l) => check_contraction(operator, *metric, *l, &pairs)?,
                    None => estimate_contraction_constant(operator, *metric, &pairs)?,
                };
                (r.satisfied, to_value(&r))
            }
            Check::Reich {
                operator,
                metric,
                a,
                b,
                c,
                pairs,
            } => {
                let pairs = resolve_pairs(pairs, &mut cache)?;
                let r = check_reich_condition(operator, *metric, *a, *b, *c, &pairs)?;
                (r.satisfied, to_value(&r))
            }
            Check::AlphaAdmissible {
                operator,
                alpha,
                pairs,
            } => {
                let pairs = resolve_pairs(pairs, &mut cache)?;
                let r = check_alpha_admissible(operator, alpha, &pairs)?;
                (r.satisfied, to_value(&r))
            }
            Check::PsiFamily {
                psi,
                t_samples,
                n_max,
                tail_tol,
            } => {
                let r = check_psi_family(psi, t_samples, *n_max, *tail_tol)?;
                (r.satisfied, to_value(&r))
            }
            Check::AlphaPsi {
                operator,
                alpha,
                psi,
                metric,
                pairs,
            } => {
                let pairs = resolve_pairs(pairs, &mut cache)?;
                let r = check_alpha_psi_contractive(operator, alpha, psi, *metric, &pairs)?;
                (r.satisfied, to_value(&r))
            }
            Check::HypothesisH {
                alpha,
                candidates,
                pool,
            } => {
                let candidates = resolve_all(candidates, &mut cache)?;
                let pool = resolve_all(pool, &mut cache)?;
                let r = check_hypothesis_h(alpha, &candidates, &pool)?;
                (r.satisfied, to_value(&r))
            }
            Check::FixedFunction {
                operator,
                function,
                metric,
                tol,
            } => {
                let f = function.resolve(&mut cache)?;
                let r = verify_fixed_function(operator, &f, *metric, *tol)?;
                (r.is_fixed, to_value(&r))
            }
            Check::MetricAxioms { metric, sample } => {
                let sample = resolve_all(sample, &mut cache)?;
                let r = check_metric_axioms(*metric, &sample)?;
                (r.all_pass(), to_value(&r))
            }
        };
        checks.push(CheckOutcome {
            name: spec.name.clone().unwrap_or_else(|| format!("check_{i}")),
            kind: spec.check.kind(),
            satisfied,
            report,
        });
    }
    Ok(VerifyReport {
        schema_version: SCHEMA_VERSION,
        all_satisfied: checks.iter().all(|c| c.satisfied),
        checks,
    })
}

/// Threshold given directly or as a percentile of the positive coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauSpec {
    Value(f64),
    Percentile { percentile: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub schema_version: u32,
    /// Relative paths resolve against the problem file's directory.
    pub matrix_path: PathBuf,
    #[serde(rename = "T")]
    pub prescription: Vec<f64>,
    pub labels: Vec<VoxelTag>,
    pub tau: TauSpec,
    #[serde(default)]
    pub inner: InnerParams,
    #[serde(default)]
    pub outer: OuterParams,
    /// `fmo` exits 0 only if the reference gap is at most this.
    #[serde(default = "default_gap_bound")]
    pub max_reference_gap: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn default_gap_bound() -> f64 {
    1e-2
}

impl ProblemFile {
    pub fn into_problem(self, base: &Path) -> Result<FmoProblem> {
        let path = if self.matrix_path.is_absolute() {
            self.matrix_path.clone()
        } else {
            base.join(&self.matrix_path)
        };
        let file = fs::File::open(&path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let ddc = SparseDoseMatrix::read_csv(file).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })?;
        let tau = match self.tau {
            TauSpec::Value(v) => v,
            TauSpec::Percentile { percentile } => coefficient_percentile(&ddc, percentile)?,
        };
        let problem = FmoProblem {
            ddc,
            prescription: self.prescription,
            labels: self.labels,
            tau,
            inner: self.inner,
            outer: self.outer,
            warnings: self.warnings,
        };
        problem.validate()?;
        Ok(problem)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FmoOutput<'a> {
    pub schema_version: u32,
    pub tau: f64,
    pub max_reference_gap: f64,
    pub success: bool,
    #[serde(flatten)]
    pub report: &'a FmoReport,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PhantomFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub spec: PhantomSpec,
    /// Threshold written into `problem.json`; defaults to the 25th percentile.
    #[serde(default)]
    pub problem_tau: Option<TauSpec>,
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    inner: &'a T,
}

/// A configuration error with the JSON pointer of the offending value.
fn parse_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let value: T = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: format!("{}: {}", json_pointer(e.path()), e.inner()),
    })?;
    Ok(value)
}

pub fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

fn check_version(found: u32) -> Result<()> {
    if found == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(Error::Parse {
            path: "/schema_version".into(),
            message: format!("unsupported schema_version {found}, expected {SCHEMA_VERSION}"),
        })
    }
}

fn require_config(cli: &Cli) -> Result<&Path> {
    cli.config
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("--config is required for this subcommand".into()))
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    write_file(dir, name, text.as_bytes())
}

fn cmd_iterate(cli: &Cli) -> Result<u8> {
    let cfg: IterateConfigFile = parse_config(require_config(cli)?)?;
    check_version(cfg.schema_version)?;
    let f0 = cfg.f0.resolve(&mut Vec::new())?;
    let report = iteration::iterate(&cfg.operator, &f0, &cfg.iteration)?;
    write_json(
        &cli.out,
        "iterate_report.json",
        &Versioned {
            schema_version: SCHEMA_VERSION,
            inner: &report,
        },
    )?;
    if cli.format == Format::Csv {
        let mut buf = Vec::new();
        report.write_trace_csv(&mut buf)?;
        write_file(&cli.out, "iterate_trace.csv", &buf)?;
        let mut buf = Vec::new();
        report.final_function.write_csv(&mut buf)?;
        write_file(&cli.out, "iterate_final.csv", &buf)?;
    }
    Ok(if report.converged {
        EXIT_OK
    } else {
        EXIT_NOT_SATISFIED
    })
}

fn cmd_verify(cli: &Cli) -> Result<u8> {
    let cfg: VerifyConfigFile = parse_config(require_config(cli)?)?;
    check_version(cfg.schema_version)?;
    let report = run_checks(&cfg)?;
    write_json(&cli.out, "verify_report.json", &report)?;
    if cli.format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        let wrap = |e: csv::Error| Error::Io {
            path: "verify_report.csv".into(),
            source: std::io::Error::other(e),
        };
        w.write_record(["name", "kind", "satisfied"])
            .map_err(wrap)?;
        for c in &report.checks {
            w.write_record([
                c.name.as_str(),
                c.kind,
                if c.satisfied { "true" } else { "false" },
            ])
            .map_err(wrap)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io {
            path: "verify_report.csv".into(),
            source: std::io::Error::other(e.to_string()),
        })?;
        write_file(&cli.out, "verify_report.csv", &bytes)?;
    }
    Ok(if report.all_satisfied {
        EXIT_OK
    } else {
        EXIT_NOT_SATISFIED
    })
}

fn cmd_fmo(cli: &Cli) -> Result<u8> {
    let path = require_config(cli)?;
    let file: ProblemFile = parse_config(path)?;
    check_version(file.schema_version)?;
    let gap_bound = file.max_reference_gap;
    let base = path.parent().unwrap_or(Path::new("."));
    let problem = file.into_problem(base)?;
    let report = fmo::fmo_solve(&problem)?;
    let success = report.converged && report.reference_gap <= gap_bound;
    let out = FmoOutput {
        schema_version: SCHEMA_VERSION,
        tau: problem.tau,
        max_reference_gap: gap_bound,
        success,
        report: &report,
    };
    write_json(&cli.out, "fmo_report.json", &out)?;
    if cli.format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        let wrap = |e: csv::Error| Error::Io {
            path: "fmo_dose.csv".into(),
            source: std::io::Error::other(e),
        };
        w.write_record(["voxel", "tag", "prescription", "dose"])
            .map_err(wrap)?;
        for (i, ((t, l), d)) in problem
            .prescription
            .iter()
            .zip(&problem.labels)
            .zip(&report.dose)
            .enumerate()
        {
            let tag = match l {
                VoxelTag::Ptv => "ptv",
                VoxelTag::Oar => "oar",
            };
            w.write_record([i.to_string(), tag.to_string(), t.to_string(), d.to_string()])
                .map_err(wrap)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io {
            path: "fmo_dose.csv".into(),
            source: std::io::Error::other(e.to_string()),
        })?;
        write_file(&cli.out, "fmo_dose.csv", &bytes)?;
    }
    Ok(if success { EXIT_OK } else { EXIT_NOT_SATISFIED })
}

fn cmd_phantom(cli: &Cli) -> Result<u8> {
    let (mut spec, tau) = match &cli.config {
        Some(path) => {
            let file: PhantomFile = parse_config(path)?;
            check_version(file.schema_version)?;
            (file.spec, file.problem_tau)
        }
        None => (PhantomSpec::default(), None),
    };
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    let problem = generate_phantom(&spec)?;
    let mut matrix = Vec::new();
    problem.ddc.write_csv(&mut matrix)?;
    write_file(&cli.out, "matrix.csv", &matrix)?;
    let file = ProblemFile {
        schema_version: SCHEMA_VERSION,
        matrix_path: PathBuf::from("matrix.csv"),
        prescription: problem.prescription,
        labels: problem.labels,
        tau: tau.unwrap_or(TauSpec::Percentile { percentile: 25.0 }),
        inner: problem.inner,
        outer: problem.outer,
        max_reference_gap: default_gap_bound(),
        warnings: problem.warnings,
    };
    write_json(&cli.out, "problem.json", &file)?;
    Ok(EXIT_OK)
}

/// Parses nothing; dispatches an already-parsed command line. Input errors
/// are printed to stderr and mapped to exit code 1.
pub fn run(cli: &Cli) -> u8 {
    if let Err(e) = fs::create_dir_all(&cli.out) {
        eprintln!(
            "error: cannot create output directory {}: {e}",
            cli.out.display()
        );
        return EXIT_INPUT;
    }
    let result = match cli.command {
        Command::Iterate => cmd_iterate(cli),
        Command::Verify => cmd_verify(cli),
        Command::Fmo => cmd_fmo(cli),
        Command::Phantom => cmd_phantom(cli),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
