//! Self-maps on the function family and checkers for the contraction-type
//! hypotheses: plain contraction, the Reich condition, α-admissibility,
//! membership of a comparison function ψ in the summable family, and the
//! α-ψ contractive inequality.
//!
//! Every checker is empirical: it evaluates the condition on the pairs it is
//! handed and reports what it saw. Nothing here proves a condition over the
//! whole family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{le_with_slack, DiscreteFunction, MetricKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedMap {
    Identity,
    Square,
    Abs,
    Exp,
    Tanh,
}

impl NamedMap {
    fn eval(self, y: f64) -> f64 {
        match self {
            NamedMap::Identity => y,
            NamedMap::Square => y * y,
            NamedMap::Abs => y.abs(),
            NamedMap::Exp => y.exp(),
            NamedMap::Tanh => y.tanh(),
        }
    }
}

/// A scalar map applied at every point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarMap {
    /// `c0 + c1 y + c2 y^2 + ...`
    Poly {
        poly: Vec<f64>,
    },
    Named {
        name: NamedMap,
    },
}

impl ScalarMap {
    fn eval(&self, y: f64) -> f64 {
        match self {
            ScalarMap::Poly { poly } => poly.iter().rev().fold(0.0, |acc, c| acc * y + c),
            ScalarMap::Named { name } => name.eval(y),
        }
    }
}

/// An operator on functions. Composite operators apply their members left to
/// right: `Composite([A, B]) f = B(A(f))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorSpec {
    Pointwise(ScalarMap),
    Affine { scale: f64, shift: f64 },
    Composite { ops: Vec<OperatorSpec> },
}

impl OperatorSpec {
    pub fn poly(coefficients: Vec<f64>) -> Self {
        OperatorSpec::Pointwise(ScalarMap::Poly { poly: coefficients })
    }

    pub fn named(name: NamedMap) -> Self {
        OperatorSpec::Pointwise(ScalarMap::Named { name })
    }

    pub fn identity() -> Self {
        Self::named(NamedMap::Identity)
    }

    pub fn affine(scale: f64, shift: f64) -> Self {
        OperatorSpec::Affine { scale, shift }
    }

    pub fn composite(ops: Vec<OperatorSpec>) -> Self {
        OperatorSpec::Composite { ops }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OperatorSpec::Pointwise(ScalarMap::Poly { poly }) => {
                if poly.is_empty() {
                    return Err(Error::InvalidOperator(
                        "polynomial has no coefficients".into(),
                    ));
                }
                if poly.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidOperator(
                        "non-finite polynomial coefficient".into(),
                    ));
                }
                Ok(())
            }
            OperatorSpec::Pointwise(ScalarMap::Named { .. }) => Ok(()),
            OperatorSpec::Affine { scale, shift } => {
                if scale.is_finite() && shift.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidOperator("non-finite affine parameter".into()))
                }
            }
            OperatorSpec::Composite { ops } => {
                if ops.is_empty() {
                    return Err(Error::InvalidOperator("composite operator is empty".into()));
                }
                ops.iter().try_for_each(OperatorSpec::validate)
            }
        }
    }

    /// The scalar map this operator applies at each point.
    pub fn eval_scalar(&self, y: f64) -> f64 {
        match self {
            OperatorSpec::Pointwise(map) => map.eval(y),
            OperatorSpec::Affine { scale, shift } => scale * y + shift,
            OperatorSpec::Composite { ops } => ops.iter().fold(y, |acc, op| op.eval_scalar(acc)),
        }
    }
}

/// Applies `op` pointwise to `f`.
pub fn apply(op: &OperatorSpec, f: &DiscreteFunction) -> Result<DiscreteFunction> {
    op.validate()?;
    apply_unchecked(op, f)
}

pub(crate) fn apply_unchecked(op: &OperatorSpec, f: &DiscreteFunction) -> Result<DiscreteFunction> {
    let mut values = Vec::with_capacity(f.values().len());
    for (point, &y) in f.domain().points().iter().zip(f.values()) {
        let out = op.eval_scalar(y);
        if !out.is_finite() {
            return Err(Error::NonFinite {
                label: point.label.clone(),
                input: y,
            });
        }
        values.push(out);
    }
    DiscreteFunction::new(f.domain().clone(), values)
}

/// Closed real interval with optionally open ends; missing bounds are
/// unbounded.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Interval {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default)]
    pub lo_open: bool,
    #[serde(default)]
    pub hi_open: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo: Some(lo),
            hi: Some(hi),
            ..Self::default()
        }
    }

    pub fn at_least(lo: f64) -> Self {
        Self {
            lo: Some(lo),
            ..Self::default()
        }
    }

    pub fn greater_than(lo: f64) -> Self {
        Self {
            lo: Some(lo),
            lo_open: true,
            ..Self::default()
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = match self.lo {
            None => true,
            Some(lo) if self.lo_open => x > lo,
            Some(lo) => x >= lo,
        };
        let below = match self.hi {
            None => true,
            Some(hi) if self.hi_open => x < hi,
            Some(hi) => x <= hi,
        };
        above && below
    }
}

/// Predicate over a pair of function values `(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairPredicate {
    Always,
    First { interval: Interval },
    Second { interval: Interval },
    Both { interval: Interval },
}

impl PairPredicate {
    pub fn holds(&self, x: f64, y: f64) -> bool {
        match self {
            PairPredicate::Always => true,
            PairPredicate::First { interval } => interval.contains(x),
            PairPredicate::Second { interval } => interval.contains(y),
            PairPredicate::Both { interval } => interval.contains(x) && interval.contains(y),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaEntry {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// `α(x, y) >= 0`, evaluated on pairs of function values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaFunction {
    ConstantOnPredicate {
        predicate: PairPredicate,
        inside: f64,
        outside: f64,
    },
    /// Exact-match lookup; pairs not in the table take `default`.
    TableDriven {
        entries: Vec<AlphaEntry>,
        #[serde(default)]
        default: f64,
    },
}

impl AlphaFunction {
    pub fn constant(value: f64) -> Self {
        AlphaFunction::ConstantOnPredicate {
            predicate: PairPredicate::Always,
            inside: value,
            outside: value,
        }
    }

    pub fn on_predicate(predicate: PairPredicate, inside: f64, outside: f64) -> Self {
        AlphaFunction::ConstantOnPredicate {
            predicate,
            inside,
            outside,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        let valid = match self {
            AlphaFunction::ConstantOnPredicate {
                inside, outside, ..
            } => ok(*inside) && ok(*outside),
            AlphaFunction::TableDriven { entries, default } => {
                ok(*default) && entries.iter().all(|e| ok(e.value))
            }
        };
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "alpha values must be finite and nonnegative".into(),
            ))
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            AlphaFunction::ConstantOnPredicate {
                predicate,
                inside,
                outside,
            } => {
                if predicate.holds(x, y) {
                    *inside
                } else {
                    *outside
                }
            }
            AlphaFunction::TableDriven { entries, default } => entries
                .iter()
                .find(|e| e.x == x && e.y == y)
                .map_or(*default, |e| e.value),
        }
    }

    /// First point pair `(i, j)` with `α(f(u_i), g(u_j)) < 1`, if any.
    pub fn first_below_one(
        &self,
        f: &DiscreteFunction,
        g: &DiscreteFunction,
    ) -> Option<(usize, usize)> {
        for (i, &a) in f.values().iter().enumerate() {
            for (j, &b) in g.values().iter().enumerate() {
                if self.eval(a, b) < 1.0 {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// `max_{u,v} α(f(u), g(v))`.
    pub fn max_over(&self, f: &DiscreteFunction, g: &DiscreteFunction) -> f64 {
        let mut best = 0.0_f64;
        for &a in f.values() {
            for &b in g.values() {
                best = best.max(self.eval(a, b));
            }
        }
        best
    }
}

/// Comparison function ψ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PsiSpec {
    /// `ψ(t) = c t` with `0 <= c < 1`.
    LinearFraction { c: f64 },
    /// Piecewise-linear through `(0, 0)` and the given `[t, ψ(t)]` knots;
    /// beyond the last knot the final segment's slope is continued.
    UserTable { knots: Vec<[f64; 2]> },
}

impl PsiSpec {
    pub fn linear(c: f64) -> Self {
        PsiSpec::LinearFraction { c }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PsiSpec::LinearFraction { c } => {
                if c.is_finite() && (0.0..1.0).contains(c) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "psi fraction {c} not in [0, 1)"
                    )))
                }
            }
            PsiSpec::UserTable { knots } => {
                if knots.is_empty() {
                    return Err(Error::InvalidParameter("psi table is empty".into()));
                }
                if knots.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "psi table has non-finite entries".into(),
                    ));
                }
                if knots[0][0] <= 0.0 || knots[0][1] < 0.0 {
                    return Err(Error::InvalidParameter(
                        "psi table must start at t > 0 with psi >= 0".into(),
                    ));
                }
                for w in knots.windows(2) {
                    if w[1][0] <= w[0][0] {
                        return Err(Error::InvalidParameter(
                            "psi knots must strictly increase in t".into(),
                        ));
                    }
                    if w[1][1] < w[0][1] {
                        return Err(Error::InvalidParameter(
                            "psi table must be nondecreasing".into(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            PsiSpec::LinearFraction { c } => c * t,
            PsiSpec::UserTable { knots } => {
                let mut prev = [0.0, 0.0];
                for k in knots {
                    if t <= k[0] {
                        return lerp(prev, *k, t);
                    }
                    prev = *k;
                }
                let n = knots.len();
                let before = if n >= 2 { knots[n - 2] } else { [0.0, 0.0] };
                lerp(before, knots[n - 1], t)
            }
        }
    }

    /// `ψ^n(t)`, the n-fold iterate.
    pub fn iterate(&self, t: f64, n: usize) -> f64 {
        (0..n).fold(t, |acc, _| self.eval(acc))
    }
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> f64 {
    let span = b[0] - a[0];
    if span == 0.0 {
        return b[1];
    }
    a[1] + (b[1] - a[1]) * (t - a[0]) / span
}

/// Where a checked condition failed.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<usize>,
    /// Labels of the point pair `(u, v)` involved, when pointwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<[String; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<f64>,
    pub detail: String,
}

/// Left and right side of the checked inequality for one pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub pair: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiSeries {
    pub t: f64,
    pub psi_t: f64,
    pub partial_sum: f64,
    pub final_increment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    pub satisfied: bool,
    pub witness: Option<Witness>,
    pub estimated_constant: Option<f64>,
    pub pairs_checked: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub evaluations: Vec<Evaluation>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub criteria: Vec<Criterion>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<PsiSeries>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub(crate) fn new(condition: impl Into<String>) -> Self {
        Self {
            condition: condition.into(),
            satisfied: true,
            witness: None,
            estimated_constant: None,
            pairs_checked: 0,
            evaluations: Vec::new(),
            criteria: Vec::new(),
            series: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub(crate) fn fail(&mut self, witness: Witness) {
        self.satisfied = false;
        if self.witness.is_none() {
            self.witness = Some(witness);
        }
    }
}

pub type FunctionPair = (DiscreteFunction, DiscreteFunction);

fn point_labels(f: &DiscreteFunction, i: usize, j: usize) -> [String; 2] {
    let pts = f.domain().points();
    [pts[i].label.clone(), pts[j].label.clone()]
}

fn check_pairs(pairs: &[FunctionPair]) -> Result<()> {
    pairs.iter().try_for_each(|(f, g)| f.ensure_same_domain(g))
}

/// Estimates the contraction constant as the largest observed ratio
/// `d(Df, Dg) / d(f, g)`; pairs with `d(f, g) = 0` are skipped.
pub fn estimate_contraction_constant(
    op: &OperatorSpec,
    metric: MetricKind,
    pairs: &[FunctionPair],
) -> Result<ConditionReport> {
    op.validate()?;
    check_pairs(pairs)?;
    let mut report = ConditionReport::new(format!("contraction estimate ({metric})"));
    let mut best: Option<(usize, f64)> = None;
    for (idx, (f, g)) in pairs.iter().enumerate() {
        let before = metric.distance(f, g)?;
        let after = metric.distance(&apply_unchecked(op, f)?, &apply_unchecked(op, g)?)?;
        if before == 0.0 {
            report
                .notes
                .push(format!("pair {idx} skipped: zero distance"));
            continue;
        }
        let ratio = after / before;
        report.pairs_checked += 1;
        report.evaluations.push(Evaluation {
            pair: idx,
            lhs: after,
            rhs: before,
            holds: ratio < 1.0,
        });
        if best.is_none_or(|(_, r)| ratio > r) {
            best = Some((idx, ratio));
        }
    }
    let (idx, ratio) = best.ok_or(Error::DegeneratePairs)?;
    report.estimated_constant = Some(ratio);
    if ratio >= 1.0 {
        report.fail(Witness {
            pair: Some(idx),
            detail: format!("ratio d(Df,Dg)/d(f,g) = {ratio} is not below 1"),
            ..Witness::default()
        });
    }
    report
        .notes
        .push(format!("estimate over {} pairs", report.pairs_checked));
    Ok(report)
}

/// Checks `d(Df, Dg) <= λ d(f, g)` on every pair for a given `λ < 1`.
pub fn check_contraction(
    op: &OperatorSpec,
    metric: MetricKind,
    lambda: f64,
    pairs: &[FunctionPair],
) -> Result<ConditionReport> {
    if !(lambda.is_finite() && (0.0..1.0).contains(&lambda)) {
        return Err(Error::InvalidParameter(format!(
            "contraction constant {lambda} not in [0, 1)"
        )));
    }
    op.validate()?;
    check_pairs(pairs)?;
    let mut report = ConditionReport::new(format!("contraction with lambda = {lambda} ({metric})"));
    let mut ratio_max: Option<f64> = None;
    for (idx, (f, g)) in pairs.iter().enumerate() {
        let before = metric.distance(f, g)?;
        let lhs = metric.distance(&apply_unchecked(op, f)?, &apply_unchecked(op, g)?)?;
        let rhs = lambda * before;
        let holds = le_with_slack(lhs, rhs);
        if before > 0.0 {
            let r = lhs / before;
            ratio_max = Some(ratio_max.map_or(r, |m| m.max(r)));
        }
        report.pairs_checked += 1;
        report.evaluations.push(Evaluation {
            pair: idx,
            lhs,
            rhs,
            holds,
        });
        if !holds {
            report.fail(Witness {
                pair: Some(idx),
                detail: format!("d(Df,Dg) = {lhs} exceeds lambda d(f,g) = {rhs}"),
                ..Witness::default()
            });
        }
    }
    report.estimated_constant = ratio_max;
    Ok(report)
}

/// Checks `d(Df,Dg) <= a d(f,Df) + b d(g,Dg) + c d(f,g)` on every pair.
pub fn check_reich_condition(
    op: &OperatorSpec,
    metric: MetricKind,
    a: f64,
    b: f64,
    c: f64,
    pairs: &[FunctionPair],
) -> Result<ConditionReport> {
    validate_reich(a, b, c)?;
    op.validate()?;
    check_pairs(pairs)?;
    let mut report = ConditionReport::new(format!("reich a={a} b={b} c={c} ({metric})"));
    report.estimated_constant = Some((a + c) / (1.0 - b));
    for (idx, (f, g)) in pairs.iter().enumerate() {
        let df = apply_unchecked(op, f)?;
        let dg = apply_unchecked(op, g)?;
        let lhs = metric.distance(&df, &dg)?;
        let rhs = a * metric.distance(f, &df)?
            + b * metric.distance(g, &dg)?
            + c * metric.distance(f, g)?;
        let holds = le_with_slack(lhs, rhs);
        report.pairs_checked += 1;
        report.evaluations.push(Evaluation {
            pair: idx,
            lhs,
            rhs,
            holds,
        });
        if !holds {
            report.fail(Witness {
                pair: Some(idx),
                detail: format!("d(Df,Dg) = {lhs} exceeds Reich bound {rhs}"),
                ..Witness::default()
            });
        }
    }
    report
        .notes
        .push("estimated_constant is the effective ratio (a+c)/(1-b)".into());
    Ok(report)
}

pub(crate) fn validate_reich(a: f64, b: f64, c: f64) -> Result<()> {
    let finite = a.is_finite() && b.is_finite() && c.is_finite();
    if !finite || a < 0.0 || b < 0.0 || c < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Reich coefficients must be finite and nonnegative, got a={a} b={b} c={c}"
        )));
    }
    if a + b + c >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "Reich coefficients must satisfy a+b+c < 1, got {}",
            a + b + c
        )));
    }
    Ok(())
}

/// For each pair whose values are α-related everywhere (`α(f(u), g(v)) >= 1`
/// at all point pairs), checks the images stay α-related.
pub fn check_alpha_admissible(
    op: &OperatorSpec,
    alpha: &AlphaFunction,
    pairs: &[FunctionPair],
) -> Result<ConditionReport> {
    op.validate()?;
    alpha.validate()?;
    check_pairs(pairs)?;
    let mut report = ConditionReport::new("alpha-admissibility");
    let mut premise_count = 0;
    for (idx, (f, g)) in pairs.iter().enumerate() {
        report.pairs_checked += 1;
        if alpha.first_below_one(f, g).is_some() {
            continue;
        }
        premise_count += 1;
        let df = apply_unchecked(op, f)?;
        let dg = apply_unchecked(op, g)?;
        if let Some((i, j)) = alpha.first_below_one(&df, &dg) {
            let value = alpha.eval(df.values()[i], dg.values()[j]);
            report.fail(Witness {
                pair: Some(idx),
                points: Some(point_labels(f, i, j)),
                sample: Some(value),
                detail: format!("alpha(Df(u), Dg(v)) = {value} < 1"),
            });
        }
    }
    report.notes.push(format!(
        "{premise_count} of {} pairs met the premise",
        report.pairs_checked
    ));
    Ok(report)
}

/// Checks `α(f(u), g(v)) d(Df, Dg) <= ψ(d(f, g))` at every point pair of
/// every function pair.
pub fn check_alpha_psi_contractive(
    op: &OperatorSpec,
    alpha: &AlphaFunction,
    psi: &PsiSpec,
    metric: MetricKind,
    pairs: &[FunctionPair],
) -> Result<ConditionReport> {
    op.validate()?;
    alpha.validate()?;
    psi.validate()?;
    check_pairs(pairs)?;
    let mut report = ConditionReport::new(format!("alpha-psi contractive ({metric})"));
    for (idx, (f, g)) in pairs.iter().enumerate() {
        let df = apply_unchecked(op, f)?;
        let dg = apply_unchecked(op, g)?;
        let image_distance = metric.distance(&df, &dg)?;
        let rhs = psi.eval(metric.distance(f, g)?);
        let mut lhs_max = 0.0_f64;
        let mut violation = None;
        for (i, &a) in f.values().iter().enumerate() {
            for (j, &b) in g.values().iter().enumerate() {
                let lhs = alpha.eval(a, b) * image_distance;
                lhs_max = lhs_max.max(lhs);
                if violation.is_none() && !le_with_slack(lhs, rhs) {
                    violation = Some((i, j, lhs));
                }
            }
        }
        report.pairs_checked += 1;
        report.evaluations.push(Evaluation {
            pair: idx,
            lhs: lhs_max,
            rhs,
            holds: violation.is_none(),
        });
        if let Some((i, j, lhs)) = violation {
            report.fail(Witness {
                pair: Some(idx),
                points: Some(point_labels(f, i, j)),
                sample: Some(lhs),
                detail: format!("alpha * d(Df,Dg) = {lhs} exceeds psi(d(f,g)) = {rhs}"),
            });
        }
    }
    Ok(report)
}

/// Heuristic membership test for the summable comparison family.
///
/// Checks (i) monotonicity on the sorted samples, (ii) that the `n_max`-th
/// term of `Σ ψ^n(t)` is below `tail_tol`, (iii) `ψ(t) < t`, and (iv) that
/// `ψ` tends to 0 along a geometric probe sequence towards 0. Test (ii) is a
/// flatness heuristic; a finite evaluation cannot establish convergence.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn check_psi_family(
    psi: &PsiSpec,
    t_samples: &[f64],
    n_max: usize,
    tail_tol: f64,
) -> Result<ConditionReport> {
    psi.validate()?;
    if n_max < 10 {
        return Err(Error::InvalidParameter(format!(
            "n_max must be at least 10, got {n_max}"
        )));
    }
    if t_samples.is_empty() || t_samples.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::InvalidParameter(
            "t samples must be positive and finite".into(),
        ));
    }
    if !(tail_tol.is_finite() && tail_tol > 0.0) {
        return Err(Error::InvalidParameter("tail_tol must be positive".into()));
    }
    let mut report = ConditionReport::new("psi comparison family");
    let mut sorted = t_samples.to_vec();
    sorted.sort_by(f64::total_cmp);

    let values: Vec<f64> = sorted.iter().map(|&t| psi.eval(t)).collect();
    let monotone = values.windows(2).position(|w| w[1] < w[0]);
    if let Some(i) = monotone {
        report.fail(Witness {
            sample: Some(sorted[i + 1]),
            detail: format!(
                "psi decreases between t={} and t={}",
                sorted[i],
                sorted[i + 1]
            ),
            ..Witness::default()
        });
    }

    let mut tail_ok = true;
    let mut below_ok = true;
    for (&t, &psi_t) in sorted.iter().zip(&values) {
        let mut term = t;
        let mut sum = 0.0;
        for _ in 0..n_max {
            term = psi.eval(term);
            sum += term;
        }
        report.series.push(PsiSeries {
            t,
            psi_t,
            partial_sum: sum,
            final_increment: term,
        });
        if !(term.abs() < tail_tol) {
            tail_ok = false;
            report.fail(Witness {
                sample: Some(t),
                detail: format!("term psi^{n_max}(t) = {term} is not below {tail_tol}"),
                ..Witness::default()
            });
        }
        if !(psi_t < t) {
            below_ok = false;
            report.fail(Witness {
                sample: Some(t),
                detail: format!("psi(t) = {psi_t} is not below t"),
                ..Witness::default()
            });
        }
    }

    let mut probe = sorted[0];
    let mut continuity_ok = true;
    for _ in 0..12 {
        probe /= 10.0;
        let v = psi.eval(probe);
        if !(v >= 0.0 && v <= probe) {
            continuity_ok = false;
            report.fail(Witness {
                sample: Some(probe),
                detail: format!("psi({probe}) = {v} does not vanish towards 0"),
                ..Witness::default()
            });
            break;
        }
    }

    report.pairs_checked = sorted.len();
    report.criteria = vec![
        Criterion {
            name: "nondecreasing".into(),
            passed: monotone.is_none(),
        },
        Criterion {
            name: "series_tail".into(),
            passed: tail_ok,
        },
        Criterion {
            name: "psi_below_identity".into(),
            passed: below_ok,
        },
        Criterion {
            name: "continuous_at_zero".into(),
            passed: continuity_ok,
        },
    ];
    report.notes.push(format!(
        "series_tail is heuristic: finite partial sums up to n={n_max} with tail tolerance {tail_tol}"
    ));
    Ok(report)
}
