//! Bounded functions sampled on finite labeled domains, and the distances
//! used to compare them.
//!
//! Three distances are available:
//!
//! * [`cross_sup_distance`]: `max_{u,v} |f(u) - g(v)|` over every ordered
//!   pair of points. This is not a metric in the strict sense: for a
//!   non-constant `f` it is positive on the diagonal (`d*(f, f)` equals the
//!   value range of `f`).
//! * [`uniform_distance`]: `max_u |f(u) - g(u)|`, the usual sup metric.
//! * [`grid_l1_distance`]: `sum_u w_u |f(u) - g(u)|` with the domain's
//!   quadrature weights.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack used when checking inequalities between computed distances.
/// Absorbs rounding in values that are equal in exact arithmetic.
pub const COMPARISON_SLACK: f64 = 1e-12;

/// `lhs <= rhs` up to [`COMPARISON_SLACK`] relative to the operands' magnitude.
pub fn le_with_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + COMPARISON_SLACK * lhs.abs().max(rhs.abs()).max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainPoint {
    pub label: String,
    pub coordinate: f64,
}

/// An ordered, non-empty set of labeled sample points, optionally carrying a
/// positive quadrature weight per point.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    points: Vec<DomainPoint>,
    weights: Option<Vec<f64>>,
}

impl Domain {
    pub fn new(points: Vec<DomainPoint>, weights: Option<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidDomain("domain has no points".into()));
        }
        let mut seen = std::collections::HashSet::with_capacity(points.len());
        for p in &points {
            if !p.coordinate.is_finite() {
                return Err(Error::InvalidDomain(format!(
                    "point {} has non-finite coordinate",
                    p.label
                )));
            }
            if !seen.insert(p.label.as_str()) {
                return Err(Error::InvalidDomain(format!("duplicate label {}", p.label)));
            }
        }
        if let Some(w) = &weights {
            if w.len() != points.len() {
                return Err(Error::InvalidDomain(format!(
                    "{} weights for {} points",
                    w.len(),
                    points.len()
                )));
            }
            if let Some((i, bad)) = w
                .iter()
                .enumerate()
                .find(|(_, w)| !(w.is_finite() && **w > 0.0))
            {
                return Err(Error::InvalidDomain(format!(
                    "weight {bad} at point {} is not strictly positive",
                    points[i].label
                )));
            }
        }
        Ok(Self { points, weights })
    }

    /// Points labeled by their coordinate, no weights.
    pub fn from_coordinates(coords: &[f64]) -> Result<Self> {
        let points = coords
            .iter()
            .enumerate()
            .map(|(i, &c)| DomainPoint {
                label: format!("u{i}"),
                coordinate: c,
            })
            .collect();
        Self::new(points, None)
    }

    /// `n` evenly spaced points on `[start, end]` with composite trapezoid weights.
    pub fn uniform_grid(start: f64, end: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDomain(
                "a grid needs at least two points".into(),
            ));
        }
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::InvalidDomain(format!(
                "bad grid interval [{start}, {end}]"
            )));
        }
        let h = (end - start) / (n - 1) as f64;
        let points = (0..n)
            .map(|i| DomainPoint {
                label: format!("u{i}"),
                coordinate: start + h * i as f64,
            })
            .collect();
        let weights = (0..n)
            .map(|i| if i == 0 || i == n - 1 { h / 2.0 } else { h })
            .collect();
        Self::new(points, Some(weights))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DomainPoint] {
        &self.points
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn coordinates(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.coordinate)
    }

    /// Short human-readable description used in diagnostics.
    pub fn describe(&self) -> String {
        let first = &self.points[0].label;
        let last = &self.points[self.points.len() - 1].label;
        let w = if self.weights.is_some() {
            ", weighted"
        } else {
            ""
        };
        format!("domain[{} points {first}..{last}{w}]", self.points.len())
    }
}

/// A finite-valued function on a [`Domain`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionRepr", into = "FunctionRepr")]
pub struct DiscreteFunction {
    domain: Arc<Domain>,
    values: Vec<f64>,
}

impl DiscreteFunction {
    pub fn new(domain: Arc<Domain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::InvalidFunction(format!(
                "{} values for {} domain points",
                values.len(),
                domain.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction(format!(
                "value at point {} is not finite",
                domain.points()[i].label
            )));
        }
        Ok(Self { domain, values })
    }

    /// Samples `map` at every point coordinate.
    pub fn from_fn(domain: Arc<Domain>, map: impl Fn(f64) -> f64) -> Result<Self> {
        let values = domain.coordinates().map(map).collect();
        Self::new(domain, values)
    }

    pub fn constant(domain: Arc<Domain>, c: f64) -> Result<Self> {
        let values = vec![c; domain.len()];
        Self::new(domain, values)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn same_domain(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.domain, &other.domain) || *self.domain == *other.domain
    }

    pub fn ensure_same_domain(&self, other: &Self) -> Result<()> {
        if self.same_domain(other) {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                left: self.domain.describe(),
                right: other.domain.describe(),
            })
        }
    }

    /// Writes `label,coordinate,value` rows with a header line.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io {
            path: "<csv>".into(),
            source: std::io::Error::other(e),
        };
        w.write_record(["label", "coordinate", "value"])
            .map_err(io)?;
        for (p, v) in self.domain.points().iter().zip(&self.values) {
            w.write_record([p.label.clone(), p.coordinate.to_string(), v.to_string()])
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<csv>".into(),
            source: e,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    label: String,
    coordinate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct FunctionRepr {
    domain: Vec<PointRepr>,
    values: Vec<f64>,
}

impl TryFrom<FunctionRepr> for DiscreteFunction {
    type Error = Error;

    fn try_from(repr: FunctionRepr) -> Result<Self> {
        let weighted = repr.domain.iter().filter(|p| p.weight.is_some()).count();
        if weighted != 0 && weighted != repr.domain.len() {
            return Err(Error::InvalidDomain(
                "weights must be given for every point or for none".into(),
            ));
        }
        let weights = (weighted > 0).then(|| repr.domain.iter().filter_map(|p| p.weight).collect());
        let points = repr
            .domain
            .into_iter()
            .map(|p| DomainPoint {
                label: p.label,
                coordinate: p.coordinate,
            })
            .collect();
        let domain = Domain::new(points, weights)?;
        DiscreteFunction::new(Arc::new(domain), repr.values)
    }
}

impl From<DiscreteFunction> for FunctionRepr {
    fn from(f: DiscreteFunction) -> Self {
        let weights = f.domain.weights();
        let domain = f
            .domain
            .points()
            .iter()
            .enumerate()
            .map(|(i, p)| PointRepr {
                label: p.label.clone(),
                coordinate: p.coordinate,
                weight: weights.map(|w| w[i]),
            })
            .collect();
        FunctionRepr {
            domain,
            values: f.values,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    CrossSup,
    #[default]
    Uniform,
    GridL1,
}

impl MetricKind {
    pub fn distance(self, f: &DiscreteFunction, g: &DiscreteFunction) -> Result<f64> {
        match self {
            MetricKind::CrossSup => cross_sup_distance(f, g),
            MetricKind::Uniform => uniform_distance(f, g),
            MetricKind::GridL1 => grid_l1_distance(f, g),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::CrossSup => "cross_sup",
            MetricKind::Uniform => "uniform",
            MetricKind::GridL1 => "grid_l1",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `max_{u,v} |f(u) - g(v)|` over all ordered point pairs.
pub fn cross_sup_distance(f: &DiscreteFunction, g: &DiscreteFunction) -> Result<f64> {
    f.ensure_same_domain(g)?;
    let mut best = 0.0_f64;
    for &a in &f.values {
        for &b in &g.values {
            best = best.max((a - b).abs());
        }
    }
    Ok(best)
}

pub fn uniform_distance(f: &DiscreteFunction, g: &DiscreteFunction) -> Result<f64> {
    f.ensure_same_domain(g)?;
    Ok(f.values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

pub fn grid_l1_distance(f: &DiscreteFunction, g: &DiscreteFunction) -> Result<f64> {
    f.ensure_same_domain(g)?;
    let w = f
        .domain
        .weights()
        .ok_or(Error::MissingWeights { metric: "grid_l1" })?;
    Ok(f.values
        .iter()
        .zip(&g.values)
        .zip(w)
        .map(|((a, b), w)| w * (a - b).abs())
        .sum())
}

/// Index triple `(f, g, h)` into the sample where `d(f,g) > d(f,h) + d(h,g)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleViolation {
    pub triple: [usize; 3],
    pub direct: f64,
    pub detour: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub metric: MetricKind,
    pub sample_size: usize,
    pub nonnegativity: bool,
    pub symmetry: bool,
    pub triangle_inequality: bool,
    pub triples_checked: usize,
    pub triangle_violation: Option<TriangleViolation>,
    /// `d(f, f)` for every sample member, in sample order.
    pub diagonal: Vec<f64>,
    /// Sample indices whose self-distance is nonzero.
    pub nonzero_diagonal: Vec<usize>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.nonnegativity && self.symmetry && self.triangle_inequality
    }
}

/// Checks nonnegativity, symmetry and the triangle inequality over every
/// ordered triple in `sample`, and surveys the diagonal.
pub fn check_metric_axioms(metric: MetricKind, sample: &[DiscreteFunction]) -> Result<AxiomReport> {
    if sample.len() < 3 {
        return Err(Error::Precondition(format!(
            "axiom check needs at least 3 functions, got {}",
            sample.len()
        )));
    }
    for f in &sample[1..] {
        sample[0].ensure_same_domain(f)?;
    }
    let n = sample.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = metric.distance(&sample[i], &sample[j])?;
        }
    }
    let d = |i: usize, j: usize| dist[i * n + j];

    let nonnegativity = dist.iter().all(|&x| x >= 0.0);
    let symmetry = (0..n).all(|i| (0..n).all(|j| d(i, j) == d(j, i)));

    let mut triangle_violation: Option<TriangleViolation> = None;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let direct = d(i, j);
                let detour = d(i, k) + d(k, j);
                if !le_with_slack(direct, detour) {
                    let worse = triangle_violation
                        .as_ref()
                        .is_none_or(|v| direct - detour > v.direct - v.detour);
                    if worse {
                        triangle_violation = Some(TriangleViolation {
                            triple: [i, j, k],
                            direct,
                            detour,
                        });
                    }
                }
            }
        }
    }

    let diagonal: Vec<f64> = (0..n).map(|i| d(i, i)).collect();
    let nonzero_diagonal = diagonal
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect();

    Ok(AxiomReport {
        metric,
        sample_size: n,
        nonnegativity,
        symmetry,
        triangle_inequality: triangle_violation.is_none(),
        triples_checked: n * n * n,
        triangle_violation,
        diagonal,
        nonzero_diagonal,
    })
}
