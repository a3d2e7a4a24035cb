//! Picard iteration `f_{n+1} = D f_n` under the three contraction regimes,
//! with convergence diagnostics and a-priori error bounds.
//!
//! Convergence is always declared on the uniform distance between successive
//! iterates: the cross-sup dissimilarity of two non-constant functions never
//! reaches zero. The configured metric is still used for the recorded trace,
//! the rate estimates and the regime-specific bounds.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{uniform_distance, DiscreteFunction, MetricKind};
use crate::operators::{
    apply_unchecked, validate_reich, AlphaFunction, ConditionReport, OperatorSpec, PsiSpec, Witness,
};

/// Any iterate value or successive distance above this magnitude counts as
/// divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Absolute slack on the per-step ratio and ψ-bound assertions.
pub const TRACE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IterationMode {
    Banach,
    Reich { a: f64, b: f64, c: f64 },
    AlphaPsi { alpha: AlphaFunction, psi: PsiSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationConfig {
    pub mode: IterationMode,
    #[serde(default)]
    pub metric: MetricKind,
    pub tol: f64,
    pub max_iters: usize,
    #[serde(default = "default_true")]
    pub record_trace: bool,
    /// Known contraction constant. Enables a-priori bounds and tightens the
    /// stopping rule so that the a-posteriori error `λ/(1-λ) d_n` of the
    /// returned iterate is also below `tol`.
    #[serde(default)]
    pub lambda_hint: Option<f64>,
}

fn default_true() -> bool {
    true
}

impl IterationConfig {
    pub fn banach(tol: f64, max_iters: usize) -> Self {
        Self {
            mode: IterationMode::Banach,
            metric: MetricKind::Uniform,
            tol,
            max_iters,
            record_trace: true,
            lambda_hint: None,
        }
    }

    pub fn with_mode(mut self, mode: IterationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_metric(mut self, metric: MetricKind) -> Self {
        self.metric = metric;
        self
    }

    pub fn with_lambda_hint(mut self, lambda: f64) -> Self {
        self.lambda_hint = Some(lambda);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        if let Some(l) = self.lambda_hint {
            if !(l.is_finite() && (0.0..1.0).contains(&l)) {
                return Err(Error::InvalidParameter(format!(
                    "lambda_hint {l} not in [0, 1)"
                )));
            }
        }
        match &self.mode {
            IterationMode::Banach => Ok(()),
            IterationMode::Reich { a, b, c } => validate_reich(*a, *b, *c),
            IterationMode::AlphaPsi { alpha, psi } => {
                alpha.validate()?;
                psi.validate()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationReport {
    pub converged: bool,
    pub diverged: bool,
    pub stop_reason: StopReason,
    pub iterations: usize,
    pub metric: MetricKind,
    /// `d(D f_final, f_final)` in the uniform metric; absent if the operator
    /// cannot be evaluated on the final iterate.
    pub residual: Option<f64>,
    /// Successive distances `d(f_n, f_{n+1})` in the configured metric.
    pub trace: Vec<f64>,
    /// Ratios `trace[n] / trace[n-1]`; steps with a zero predecessor are skipped.
    pub rate_estimates: Vec<f64>,
    /// `λ^q / (1-λ) d(f_0, f_1)` for `q = 0..=iterations`, when `lambda_hint` is set.
    pub apriori_bounds: Vec<f64>,
    /// Reich mode: `(a + c) / (1 - b)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_ratio: Option<f64>,
    /// Reich mode: whether the condition held on every consecutive trace pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_held_on_trace: Option<bool>,
    /// Reich and α-ψ modes: whether every trace distance respected its
    /// regime bound (`r d_{n-1}`, or `ψ^n(d_0)`) up to [`TRACE_SLACK`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_bound_held: Option<bool>,
    /// α-ψ mode: `ψ^n(d(f_0, f_1))` per step.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub psi_bounds: Vec<f64>,
    /// α-ψ mode: whether `α(f_n(u), f_{n+1}(v)) >= 1` held along the chain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_chain_held: Option<bool>,
    #[serde(rename = "final")]
    pub final_function: DiscreteFunction,
}

impl IterationReport {
    /// Writes `iter,distance,bound` rows; `bound` is the a-priori or ψ bound
    /// for that step when one exists.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let wrap = |e: csv::Error| Error::Io {
            path: "<trace csv>".into(),
            source: std::io::Error::other(e),
        };
        w.write_record(["iter", "distance", "bound"])
            .map_err(wrap)?;
        for (n, d) in self.trace.iter().enumerate() {
            let bound = self
                .apriori_bounds
                .get(n)
                .or_else(|| self.psi_bounds.get(n))
                .map(|b| b.to_string())
                .unwrap_or_default();
            w.write_record([n.to_string(), d.to_string(), bound])
                .map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<trace csv>".into(),
            source: e,
        })
    }
}

/// `λ^q d01 / (1 - λ)`: the a-priori distance from the q-th iterate to the
/// fixed function of a λ-contraction started with `d(f_0, f_1) = d01`.
pub fn apriori_bound(lambda: f64, d01: f64, q: usize) -> Result<f64> {
    if !(lambda.is_finite() && (0.0..1.0).contains(&lambda)) {
        return Err(Error::InvalidParameter(format!(
            "lambda {lambda} not in [0, 1)"
        )));
    }
    if !(d01.is_finite() && d01 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "d01 {d01} must be nonnegative"
        )));
    }
    let exp = i32::try_from(q).unwrap_or(i32::MAX);
    Ok(lambda.powi(exp) * d01 / (1.0 - lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedFunctionCheck {
    pub is_fixed: bool,
    /// `d(D f, f)` in the uniform metric.
    pub residual: f64,
    /// `d(D f, f)` in the requested metric, for reference.
    pub metric_distance: f64,
}

/// Tests `D f = f` up to `tol`. The verdict always uses the uniform metric;
/// `metric` only selects the additional distance reported alongside.
pub fn verify_fixed_function(
    op: &OperatorSpec,
    f: &DiscreteFunction,
    metric: MetricKind,
    tol: f64,
) -> Result<FixedFunctionCheck> {
    op.validate()?;
    let image = apply_unchecked(op, f)?;
    let residual = uniform_distance(&image, f)?;
    Ok(FixedFunctionCheck {
        is_fixed: residual <= tol,
        residual,
        metric_distance: metric.distance(&image, f)?,
    })
}

/// Runs the Picard loop for whatever mode `config` selects.
pub fn iterate(
    op: &OperatorSpec,
    f0: &DiscreteFunction,
    config: &IterationConfig,
) -> Result<IterationReport> {
    match &config.mode {
        IterationMode::Banach => picard_iterate(op, f0, config),
        IterationMode::Reich { .. } => reich_iterate(op, f0, config),
        IterationMode::AlphaPsi { .. } => alpha_psi_iterate(op, f0, config),
    }
}

/// Banach-regime Picard iteration. The mode in `config` is not consulted.
pub fn picard_iterate(
    op: &OperatorSpec,
    f0: &DiscreteFunction,
    config: &IterationConfig,
) -> Result<IterationReport> {
    config.validate()?;
    op.validate()?;
    let run = run_picard(op, f0, config, |_, _, _| Ok(()))?;
    Ok(run.into_report(op, config))
}

/// Picard iteration under the Reich condition with coefficients from
/// `config.mode`. Also records whether each trace step obeyed
/// `d_n <= r d_{n-1}` with `r = (a + c) / (1 - b)` where the condition held.
pub fn reich_iterate(
    op: &OperatorSpec,
    f0: &DiscreteFunction,
    config: &IterationConfig,
) -> Result<IterationReport> {
    config.validate()?;
    op.validate()?;
    let IterationMode::Reich { a, b, c } = config.mode else {
        return Err(Error::InvalidParameter(
            "reich_iterate needs a Reich mode".into(),
        ));
    };
    let ratio = (a + c) / (1.0 - b);
    let run = run_picard(op, f0, config, |_, _, _| Ok(()))?;

    let mut condition_held = true;
    let mut bound_held = true;
    for n in 1..run.trace.len() {
        let (prev, cur) = (run.trace[n - 1], run.trace[n]);
        // Pair (f_{n-1}, f_n): D f_{n-1} = f_n, D f_n = f_{n+1}.
        let reich_rhs = a * prev + b * cur + c * prev;
        if cur > reich_rhs + TRACE_SLACK {
            condition_held = false;
        } else if cur > ratio * prev + TRACE_SLACK {
            bound_held = false;
        }
    }
    let mut report = run.into_report(op, config);
    report.effective_ratio = Some(ratio);
    report.condition_held_on_trace = Some(condition_held);
    report.trace_bound_held = Some(bound_held);
    Ok(report)
}

/// Picard iteration in the α-ψ regime. Rejects a start `f_0` for which
/// `α(f_0(u), D f_0(v)) < 1` at some point pair.
pub fn alpha_psi_iterate(
    op: &OperatorSpec,
    f0: &DiscreteFunction,
    config: &IterationConfig,
) -> Result<IterationReport> {
    config.validate()?;
    op.validate()?;
    let IterationMode::AlphaPsi { alpha, psi } = &config.mode else {
        return Err(Error::InvalidParameter(
            "alpha_psi_iterate needs an alpha-psi mode".into(),
        ));
    };
    let f1 = apply_unchecked(op, f0)?;
    if let Some((i, j)) = alpha.first_below_one(f0, &f1) {
        let pts = f0.domain().points();
        return Err(Error::Precondition(format!(
            "alpha(f0({}), Df0({})) = {} < 1",
            pts[i].label,
            pts[j].label,
            alpha.eval(f0.values()[i], f1.values()[j])
        )));
    }

    let mut chain_held = true;
    let run = run_picard(op, f0, config, |_, cur, next| {
        if chain_held && alpha.first_below_one(cur, next).is_some() {
            chain_held = false;
        }
        Ok(())
    })?;

    let d0 = run.trace.first().copied().unwrap_or(0.0);
    let mut psi_bounds = Vec::with_capacity(run.trace.len());
    let mut bound = d0;
    for n in 0..run.trace.len() {
        if n > 0 {
            bound = psi.eval(bound);
        }
        psi_bounds.push(bound);
    }
    let bound_held = run
        .trace
        .iter()
        .zip(&psi_bounds)
        .all(|(d, b)| *d <= b + TRACE_SLACK);

    let mut report = run.into_report(op, config);
    report.alpha_chain_held = Some(chain_held);
    report.trace_bound_held = chain_held.then_some(bound_held);
    if config.record_trace {
        report.psi_bounds = psi_bounds;
    }
    Ok(report)
}

struct PicardRun {
    stop: StopReason,
    iterations: usize,
    trace: Vec<f64>,
    last: DiscreteFunction,
}

impl PicardRun {
    fn into_report(self, op: &OperatorSpec, config: &IterationConfig) -> IterationReport {
        let residual = apply_unchecked(op, &self.last)
            .ok()
            .and_then(|img| uniform_distance(&img, &self.last).ok());
        let (trace, rate_estimates, apriori_bounds) = if config.record_trace {
            let rates = self
                .trace
                .windows(2)
                .filter(|w| w[0] > 0.0)
                .map(|w| w[1] / w[0])
                .collect();
            let bounds = match (config.lambda_hint, self.trace.first()) {
                (Some(l), Some(&d01)) => (0..=self.iterations)
                    .map(|q| apriori_bound(l, d01, q).unwrap_or(f64::NAN))
                    .collect(),
                _ => Vec::new(),
            };
            (self.trace, rates, bounds)
        } else {
            (Vec::new(), Vec::new(), Vec::new())
        };
        IterationReport {
            converged: self.stop == StopReason::Converged,
            diverged: self.stop == StopReason::Diverged,
            stop_reason: self.stop,
            iterations: self.iterations,
            metric: config.metric,
            residual,
            trace,
            rate_estimates,
            apriori_bounds,
            effective_ratio: None,
            condition_held_on_trace: None,
            trace_bound_held: None,
            psi_bounds: Vec::new(),
            alpha_chain_held: None,
            final_function: self.last,
        }
    }
}

fn run_picard(
    op: &OperatorSpec,
    f0: &DiscreteFunction,
    config: &IterationConfig,
    mut on_step: impl FnMut(usize, &DiscreteFunction, &DiscreteFunction) -> Result<()>,
) -> Result<PicardRun> {
    if config.metric == MetricKind::GridL1 && f0.domain().weights().is_none() {
        return Err(Error::MissingWeights { metric: "grid_l1" });
    }
    // Stop once both d_n and the a-posteriori error λ/(1-λ) d_n are below tol.
    let error_factor = config.lambda_hint.map_or(1.0, |l| (l / (1.0 - l)).max(1.0));
    let mut current = f0.clone();
    let mut trace = Vec::new();
    for n in 0..config.max_iters {
        let next = match apply_unchecked(op, &current) {
            Ok(next) => next,
            Err(Error::NonFinite { .. }) => {
                return Ok(PicardRun {
                    stop: StopReason::Diverged,
                    iterations: n + 1,
                    trace,
                    last: current,
                });
            }
            Err(e) => return Err(e),
        };
        let step = uniform_distance(&current, &next)?;
        trace.push(config.metric.distance(&current, &next)?);
        on_step(n, &current, &next)?;
        let blown =
            next.values().iter().any(|v| v.abs() > DIVERGENCE_LIMIT) || step > DIVERGENCE_LIMIT;
        if blown {
            return Ok(PicardRun {
                stop: StopReason::Diverged,
                iterations: n + 1,
                trace,
                last: next,
            });
        }
        current = next;
        if step * error_factor < config.tol {
            return Ok(PicardRun {
                stop: StopReason::Converged,
                iterations: n + 1,
                trace,
                last: current,
            });
        }
    }
    Ok(PicardRun {
        stop: StopReason::MaxIterations,
        iterations: config.max_iters,
        trace,
        last: current,
    })
}

/// Hypothesis (H): every pair of candidates has a common α-partner in `pool`,
/// i.e. some `h` with `α(f(u), h(v)) >= 1` and `α(g(u), h(v)) >= 1` at every
/// point pair.
pub fn check_hypothesis_h(
    alpha: &AlphaFunction,
    candidates: &[DiscreteFunction],
    pool: &[DiscreteFunction],
) -> Result<ConditionReport> {
    alpha.validate()?;
    if pool.is_empty() {
        return Err(Error::Precondition(
            "hypothesis (H) needs a non-empty pool".into(),
        ));
    }
    if let Some(first) = candidates.first().or(pool.first()) {
        for h in candidates.iter().chain(pool) {
            first.ensure_same_domain(h)?;
        }
    }
    let mut report = ConditionReport::new("hypothesis (H)");
    let related: Vec<Vec<bool>> = candidates
        .iter()
        .map(|f| {
            pool.iter()
                .map(|h| alpha.first_below_one(f, h).is_none())
                .collect()
        })
        .collect();
    for i in 0..candidates.len() {
        for j in i..candidates.len() {
            report.pairs_checked += 1;
            let found = (0..pool.len()).any(|k| related[i][k] && related[j][k]);
            if !found {
                report.fail(Witness {
                    pair: Some(report.pairs_checked - 1),
                    detail: format!(
                        "no pool function is alpha-related to both candidates {i} and {j}"
                    ),
                    ..Witness::default()
                });
            }
        }
    }
    Ok(report)
}
