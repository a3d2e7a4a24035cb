//! Two-loop fluence map optimization on a thresholded split of the dose
//! deposition matrix `D = D1 + D2`:
//!
//! ```text
//! x^(k+1) = argmin_{x >= 0} ||D1 x + δ^(k) - T||²     (inner loop)
//! δ^(k+1) = D2 x^(k+1)                               (outer loop)
//! ```
//!
//! `D1` holds the coefficients strictly above the threshold, `D2` the rest.
//! The outer loop is a fixed-function iteration on the scatter dose δ and
//! stops when successive δ differ by less than `outer_tol` in the uniform
//! norm. The inner problem is solved by projected gradient with a fixed step
//! `1/L`, where `L` is a power-iteration estimate of `||D1||₂²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseDoseMatrix;

/// Power iterations used to estimate `||D||₂²`.
pub const POWER_ITERATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoxelTag {
    Ptv,
    Oar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Fixed step `1/L` with `L` from power iteration.
    #[default]
    InverseLipschitz,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerParams {
    #[serde(default)]
    pub step_rule: StepRule,
    #[serde(default = "InnerParams::default_tol")]
    pub inner_tol: f64,
    #[serde(default = "InnerParams::default_max_iters")]
    pub inner_max_iters: usize,
}

impl InnerParams {
    fn default_tol() -> f64 {
        1e-8
    }

    fn default_max_iters() -> usize {
        100_000
    }

    /// Settings used for the unsplit reference solve.
    pub fn reference() -> Self {
        Self {
            step_rule: StepRule::InverseLipschitz,
            inner_tol: 1e-10,
            inner_max_iters: 100_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.inner_tol.is_finite() && self.inner_tol > 0.0) || self.inner_max_iters == 0 {
            return Err(Error::InvalidParameter(
                "inner_tol must be positive and inner_max_iters nonzero".into(),
            ));
        }
        Ok(())
    }
}

impl Default for InnerParams {
    fn default() -> Self {
        Self {
            step_rule: StepRule::InverseLipschitz,
            inner_tol: Self::default_tol(),
            inner_max_iters: Self::default_max_iters(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterParams {
    #[serde(default = "OuterParams::default_tol")]
    pub outer_tol: f64,
    #[serde(default = "OuterParams::default_max_iters")]
    pub outer_max_iters: usize,
}

impl OuterParams {
    fn default_tol() -> f64 {
        1e-8
    }

    fn default_max_iters() -> usize {
        500
    }
}

impl Default for OuterParams {
    fn default() -> Self {
        Self {
            outer_tol: Self::default_tol(),
            outer_max_iters: Self::default_max_iters(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FmoProblem {
    pub ddc: SparseDoseMatrix,
    /// Per-voxel prescription `T` in Gy.
    pub prescription: Vec<f64>,
    pub labels: Vec<VoxelTag>,
    pub tau: f64,
    pub inner: InnerParams,
    pub outer: OuterParams,
    /// Generation-time diagnostics (e.g. voxels no beamlet reaches).
    pub warnings: Vec<String>,
}

impl FmoProblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.ddc.n_voxels();
        if self.prescription.len() != n || self.labels.len() != n {
            return Err(Error::Dimension(format!(
                "{} prescriptions and {} labels for {n} voxels",
                self.prescription.len(),
                self.labels.len()
            )));
        }
        if let Some(i) = self
            .prescription
            .iter()
            .position(|t| !(t.is_finite() && *t >= 0.0))
        {
            return Err(Error::InvalidParameter(format!(
                "prescription at voxel {i} must be finite and nonnegative"
            )));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau {} must be nonnegative",
                self.tau
            )));
        }
        self.inner.validate()?;
        if !(self.outer.outer_tol.is_finite() && self.outer.outer_tol > 0.0)
            || self.outer.outer_max_iters == 0
        {
            return Err(Error::InvalidParameter(
                "outer_tol must be positive and outer_max_iters nonzero".into(),
            ));
        }
        Ok(())
    }
}

/// Entries strictly above `tau` go to the first matrix, the rest (ties
/// included) to the second.
pub fn split_matrix(d: &SparseDoseMatrix, tau: f64) -> (SparseDoseMatrix, SparseDoseMatrix) {
    d.partition(|v| v > tau)
}

/// Nearest-rank percentile (`p` in `[0, 100]`) of the strictly positive
/// coefficients.
pub fn coefficient_percentile(d: &SparseDoseMatrix, p: f64) -> Result<f64> {
    let mut nz: Vec<f64> = d.values().iter().copied().filter(|v| *v > 0.0).collect();
    if nz.is_empty() {
        return Err(Error::InvalidMatrix(
            "matrix has no positive coefficients".into(),
        ));
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "percentile {p} outside [0, 100]"
        )));
    }
    nz.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * nz.len() as f64).ceil() as usize;
    Ok(nz[rank.saturating_sub(1).min(nz.len() - 1)])
}

/// Power-iteration estimate of `||D||₂²` (largest eigenvalue of `DᵀD`),
/// started from the all-ones vector.
pub fn lipschitz_estimate(d: &SparseDoseMatrix) -> Result<f64> {
    let n = d.n_beamlets();
    if n == 0 || d.nnz() == 0 {
        return Ok(0.0);
    }
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = d.mul_transpose_vec(&d.mul_vec(&v)?)?;
        let norm = norm2(&w);
        if norm == 0.0 {
            return Ok(0.0);
        }
        estimate = norm;
        v = w.into_iter().map(|x| x / norm).collect();
    }
    Ok(estimate)
}

/// `D x + offset - target`.
fn residual(d: &SparseDoseMatrix, x: &[f64], offset: &[f64], target: &[f64]) -> Result<Vec<f64>> {
    let mut r = d.mul_vec(x)?;
    for ((ri, o), t) in r.iter_mut().zip(offset).zip(target) {
        *ri += o - t;
    }
    Ok(r)
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Norm of the projected gradient for the constraint `x >= 0`.
fn projected_gradient_norm(x: &[f64], grad: &[f64]) -> f64 {
    x.iter()
        .zip(grad)
        .map(|(&xi, &g)| if xi > 0.0 { g * g } else { g.min(0.0).powi(2) })
        .sum::<f64>()
        .sqrt()
}

/// `||D x - T||²`.
pub fn objective(d: &SparseDoseMatrix, x: &[f64], target: &[f64]) -> Result<f64> {
    let zero = vec![0.0; d.n_voxels()];
    Ok(sum_sq(&residual(d, x, &zero, target)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InnerOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub projected_gradient_norm: f64,
    pub lipschitz: f64,
    pub converged: bool,
    /// `D1` is empty: the objective does not depend on `x`.
    pub degenerate: bool,
    /// `||D1 x + δ - T||²` before the first step and after every step, when
    /// requested.
    pub objective_trace: Vec<f64>,
}

/// Approximately solves `min_{x >= 0} ||D1 x + δ - T||²` from `x_init`.
pub fn inner_solve(
    d1: &SparseDoseMatrix,
    delta: &[f64],
    target: &[f64],
    x_init: &[f64],
    params: &InnerParams,
) -> Result<InnerOutcome> {
    projected_gradient(d1, delta, target, x_init, params, false)
}

/// [`inner_solve`] recording the objective after every step.
pub fn inner_solve_traced(
    d1: &SparseDoseMatrix,
    delta: &[f64],
    target: &[f64],
    x_init: &[f64],
    params: &InnerParams,
) -> Result<InnerOutcome> {
    projected_gradient(d1, delta, target, x_init, params, true)
}

fn projected_gradient(
    d: &SparseDoseMatrix,
    offset: &[f64],
    target: &[f64],
    x_init: &[f64],
    params: &InnerParams,
    record: bool,
) -> Result<InnerOutcome> {
    params.validate()?;
    if offset.len() != d.n_voxels()
        || target.len() != d.n_voxels()
        || x_init.len() != d.n_beamlets()
    {
        return Err(Error::Dimension(format!(
            "matrix {}x{} with offset {}, target {}, start {}",
            d.n_voxels(),
            d.n_beamlets(),
            offset.len(),
            target.len(),
            x_init.len()
        )));
    }
    if x_init.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidParameter(
            "initial fluence must be finite and nonnegative".into(),
        ));
    }
    let lipschitz = lipschitz_estimate(d)?;
    let mut x = x_init.to_vec();
    let mut r = residual(d, &x, offset, target)?;
    let mut objective_trace = Vec::new();
    if record {
        objective_trace.push(sum_sq(&r));
    }
    if lipschitz == 0.0 {
        let grad = d.mul_transpose_vec(&r)?;
        return Ok(InnerOutcome {
            x,
            iterations: 0,
            projected_gradient_norm: projected_gradient_norm(x_init, &grad),
            lipschitz,
            converged: false,
            degenerate: true,
            objective_trace,
        });
    }
    let step = 1.0 / lipschitz;
    let mut iterations = 0;
    loop {
        let grad = d.mul_transpose_vec(&r)?;
        let pg = projected_gradient_norm(&x, &grad);
        if !pg.is_finite() {
            return Err(Error::Numerical(
                "projected gradient became non-finite".into(),
            ));
        }
        if pg < params.inner_tol || iterations >= params.inner_max_iters {
            return Ok(InnerOutcome {
                x,
                iterations,
                projected_gradient_norm: pg,
                lipschitz,
                converged: pg < params.inner_tol,
                degenerate: false,
                objective_trace,
            });
        }
        for (xi, g) in x.iter_mut().zip(&grad) {
            *xi = (*xi - step * g).max(0.0);
        }
        r = residual(d, &x, offset, target)?;
        if record {
            objective_trace.push(sum_sq(&r));
        }
        iterations += 1;
    }
}

/// `δ = D2 x`.
pub fn outer_update(d2: &SparseDoseMatrix, x: &[f64]) -> Result<Vec<f64>> {
    d2.mul_vec(x)
}

/// Unsplit oracle: `min_{x >= 0} ||D x - T||²` by projected gradient.
pub fn reference_solve(
    d: &SparseDoseMatrix,
    target: &[f64],
    params: &InnerParams,
) -> Result<Vec<f64>> {
    let zero_offset = vec![0.0; d.n_voxels()];
    let start = vec![0.0; d.n_beamlets()];
    Ok(projected_gradient(d, &zero_offset, target, &start, params, false)?.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoseStats {
    pub voxels: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FmoReport {
    pub converged: bool,
    pub degenerate_inner: bool,
    /// Fluence per beamlet.
    pub x: Vec<f64>,
    /// Full-matrix dose `D x` per voxel.
    pub dose: Vec<f64>,
    /// Scatter dose used by the final inner solve.
    pub scatter_dose: Vec<f64>,
    pub outer_iterations: usize,
    pub inner_iterations: Vec<usize>,
    /// Uniform distance between successive scatter doses.
    pub delta_trace: Vec<f64>,
    /// `||D1 x + δ - T||²` at the end of each inner solve.
    pub objective_trace: Vec<f64>,
    /// Successive ratios of `delta_trace`.
    pub delta_ratios: Vec<f64>,
    /// Geometric mean of the later half of `delta_ratios`.
    pub observed_contraction: Option<f64>,
    pub final_projected_gradient_norm: f64,
    pub lipschitz_d1: f64,
    pub nnz_d1: usize,
    pub nnz_d2: usize,
    /// `||D x - T||²` for the split solution.
    pub objective: f64,
    /// `||D x_ref - T||²` for the unsplit reference solution.
    pub reference_objective: f64,
    /// `|objective - reference_objective| / reference_objective`.
    pub reference_gap: f64,
    pub ptv_dose: Option<DoseStats>,
    pub oar_dose: Option<DoseStats>,
}

pub fn dose_stats(dose: &[f64], labels: &[VoxelTag], tag: VoxelTag) -> Option<DoseStats> {
    let picked: Vec<f64> = dose
        .iter()
        .zip(labels)
        .filter(|(_, l)| **l == tag)
        .map(|(d, _)| *d)
        .collect();
    if picked.is_empty() {
        return None;
    }
    Some(DoseStats {
        voxels: picked.len(),
        min: picked.iter().copied().fold(f64::INFINITY, f64::min),
        mean: picked.iter().sum::<f64>() / picked.len() as f64,
        max: picked.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

fn relative_gap(value: f64, reference: f64) -> f64 {
    let diff = (value - reference).abs();
    if reference > 0.0 {
        diff / reference
    } else {
        diff
    }
}

/// Runs the two-loop solver from `x = 0`, `δ = 0` and compares the result
/// against [`reference_solve`] on the unsplit matrix.
pub fn fmo_solve(problem: &FmoProblem) -> Result<FmoReport> {
    problem.validate()?;
    let d = &problem.ddc;
    let target = &problem.prescription;
    let (d1, d2) = split_matrix(d, problem.tau);

    let mut x = vec![0.0; d.n_beamlets()];
    let mut delta = vec![0.0; d.n_voxels()];
    let mut delta_trace = Vec::new();
    let mut objective_trace = Vec::new();
    let mut inner_iterations = Vec::new();
    let mut converged = false;
    let mut degenerate = false;
    let mut pg_norm = 0.0;
    let mut lipschitz = 0.0;
    let mut scatter_dose = delta.clone();

    for _ in 0..problem.outer.outer_max_iters {
        let inner = inner_solve(&d1, &delta, target, &x, &problem.inner)?;
        lipschitz = inner.lipschitz;
        pg_norm = inner.projected_gradient_norm;
        inner_iterations.push(inner.iterations);
        if inner.degenerate {
            degenerate = true;
            break;
        }
        x = inner.x;
        objective_trace.push(sum_sq(&residual(&d1, &x, &delta, target)?));
        let next = outer_update(&d2, &x)?;
        if next.iter().chain(&x).any(|v| !v.is_finite()) {
            return Err(Error::Numerical(
                "outer iteration produced non-finite values".into(),
            ));
        }
        let step = next
            .iter()
            .zip(&delta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        delta_trace.push(step);
        scatter_dose = std::mem::replace(&mut delta, next);
        if step < problem.outer.outer_tol {
            converged = true;
            break;
        }
    }

    let delta_ratios: Vec<f64> = delta_trace
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    let tail = &delta_ratios[delta_ratios.len() / 2..];
    let observed_contraction = (!tail.is_empty() && tail.iter().all(|r| *r > 0.0))
        .then(|| (tail.iter().map(|r| r.ln()).sum::<f64>() / tail.len() as f64).exp());

    let reference = reference_solve(d, target, &InnerParams::reference())?;
    let objective_value = objective(d, &x, target)?;
    let reference_objective = objective(d, &reference, target)?;
    let dose = d.mul_vec(&x)?;

    Ok(FmoReport {
        converged: converged && !degenerate,
        degenerate_inner: degenerate,
        outer_iterations: inner_iterations.len(),
        ptv_dose: dose_stats(&dose, &problem.labels, VoxelTag::Ptv),
        oar_dose: dose_stats(&dose, &problem.labels, VoxelTag::Oar),
        x,
        dose,
        scatter_dose,
        inner_iterations,
        delta_trace,
        objective_trace,
        delta_ratios,
        observed_contraction,
        final_projected_gradient_norm: pg_norm,
        lipschitz_d1: lipschitz,
        nnz_d1: d1.nnz(),
        nnz_d2: d2.nnz(),
        objective: objective_value,
        reference_objective,
        reference_gap: relative_gap(objective_value, reference_objective),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize) -> SparseDoseMatrix {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        SparseDoseMatrix::from_dense(&rows).unwrap()
    }

    fn toy_problem(rows: &[Vec<f64>], target: Vec<f64>, tau: f64) -> FmoProblem {
        let ddc = SparseDoseMatrix::from_dense(rows).unwrap();
        let n = ddc.n_voxels();
        FmoProblem {
            ddc,
            prescription: target,
            labels: vec![VoxelTag::Ptv; n],
            tau,
            inner: InnerParams::default(),
            outer: OuterParams::default(),
            warnings: Vec::new(),
        }
    }

    #[test]
    fn split_examples() {
        let d = SparseDoseMatrix::from_dense(&[vec![0.9, 0.05], vec![0.02, 0.8]]).unwrap();
        let (d1, d2) = split_matrix(&d, 0.1);
        assert_eq!(d1.to_dense(), vec![vec![0.9, 0.0], vec![0.0, 0.8]]);
        assert_eq!(d2.to_dense(), vec![vec![0.0, 0.05], vec![0.02, 0.0]]);

        let (d1, d2) = split_matrix(&d, 0.0);
        assert_eq!(d2.nnz(), 0);
        assert_eq!(d1, d);

        let (d1, d2) = split_matrix(&d, 0.9);
        assert_eq!(d1.nnz(), 0);
        assert_eq!(d2, d);
    }

    #[test]
    fn ties_go_to_minor_part() {
        let d = SparseDoseMatrix::from_dense(&[vec![0.5, 0.25]]).unwrap();
        let (d1, d2) = split_matrix(&d, 0.25);
        assert_eq!(d1.to_dense(), vec![vec![0.5, 0.0]]);
        assert_eq!(d2.to_dense(), vec![vec![0.0, 0.25]]);
    }

    #[test]
    fn inner_identity_clamps() {
        let p = InnerParams::default();
        let out = inner_solve(&identity(2), &[0.0, 0.0], &[3.0, -1.0], &[0.0, 0.0], &p).unwrap();
        assert!((out.x[0] - 3.0).abs() < 1e-12 && out.x[1] == 0.0);
        let out = inner_solve(&identity(2), &[1.0, 1.0], &[3.0, 0.5], &[0.0, 0.0], &p).unwrap();
        assert!((out.x[0] - 2.0).abs() < 1e-12 && out.x[1] == 0.0);
        assert!(out.converged);
    }

    #[test]
    fn inner_degenerate_on_empty_matrix() {
        let empty = SparseDoseMatrix::empty(2, 2);
        let out = inner_solve(
            &empty,
            &[0.0, 0.0],
            &[1.0, 1.0],
            &[0.5, 0.0],
            &InnerParams::default(),
        )
        .unwrap();
        assert!(out.degenerate);
        assert_eq!(out.x, vec![0.5, 0.0]);
    }

    #[test]
    fn inner_rejects_bad_input() {
        let p = InnerParams::default();
        assert!(inner_solve(&identity(2), &[0.0], &[1.0, 1.0], &[0.0, 0.0], &p).is_err());
        assert!(inner_solve(&identity(2), &[0.0, 0.0], &[1.0, 1.0], &[-1.0, 0.0], &p).is_err());
    }

    #[test]
    fn outer_update_examples() {
        assert_eq!(
            outer_update(&SparseDoseMatrix::empty(2, 2), &[1.0, 2.0]).unwrap(),
            vec![0.0, 0.0]
        );
        let d2 = SparseDoseMatrix::from_dense(&[vec![0.0, 0.05], vec![0.02, 0.0]]).unwrap();
        assert_eq!(outer_update(&d2, &[1.0, 2.0]).unwrap(), vec![0.1, 0.02]);
    }

    #[test]
    fn reference_identity() {
        let x = reference_solve(&identity(3), &[1.0, 2.0, 0.5], &InnerParams::reference()).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 0.5]);
        let x =
            reference_solve(&identity(3), &[1.0, -2.0, 0.5], &InnerParams::reference()).unwrap();
        assert_eq!(x, vec![1.0, 0.0, 0.5]);
    }

    #[test]
    fn power_iteration_on_diagonal() {
        let d = SparseDoseMatrix::from_dense(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((lipschitz_estimate(&d).unwrap() - 4.0).abs() < 1e-9);
        assert_eq!(
            lipschitz_estimate(&SparseDoseMatrix::empty(3, 3)).unwrap(),
            0.0
        );
    }

    #[test]
    fn two_voxel_toy() {
        // Closed form: D x = T with x1 = x2 gives x = 1 / 1.01.
        let exact = 1.0 / 1.01;
        let problem = toy_problem(&[vec![1.0, 0.01], vec![0.01, 1.0]], vec![1.0, 1.0], 0.1);
        let r = fmo_solve(&problem).unwrap();
        assert!(r.converged);
        assert_eq!(r.nnz_d1, 2);
        assert!(r.x.iter().all(|x| (x - exact).abs() < 1e-2));
        assert!(r.x.iter().all(|x| (x - exact).abs() < 1e-7));
    }

    #[test]
    fn zero_threshold_collapses_to_reference() {
        let mut problem = toy_problem(
            &[vec![1.0, 0.3], vec![0.2, 1.0], vec![0.5, 0.5]],
            vec![1.0, 2.0, 0.2],
            0.0,
        );
        problem.inner = InnerParams::reference();
        let r = fmo_solve(&problem).unwrap();
        assert!(r.converged);
        assert!(r.outer_iterations <= 2);
        assert_eq!(r.delta_trace, vec![0.0]);
        let reference = reference_solve(
            &problem.ddc,
            &problem.prescription,
            &InnerParams::reference(),
        )
        .unwrap();
        assert!(r
            .x
            .iter()
            .zip(&reference)
            .all(|(a, b)| (a - b).abs() <= 1e-10));
        assert!(r.reference_gap <= 1e-10);
    }

    #[test]
    fn huge_threshold_is_degenerate() {
        let problem = toy_problem(&[vec![1.0, 0.01], vec![0.01, 1.0]], vec![1.0, 1.0], 10.0);
        let r = fmo_solve(&problem).unwrap();
        assert!(r.degenerate_inner);
        assert!(!r.converged);
    }

    #[test]
    fn percentile_nearest_rank() {
        let d = SparseDoseMatrix::from_dense(&[vec![0.1, 0.2], vec![0.3, 0.4]]).unwrap();
        assert_eq!(coefficient_percentile(&d, 25.0).unwrap(), 0.1);
        assert_eq!(coefficient_percentile(&d, 50.0).unwrap(), 0.2);
        assert_eq!(coefficient_percentile(&d, 100.0).unwrap(), 0.4);
        assert_eq!(coefficient_percentile(&d, 0.0).unwrap(), 0.1);
        assert!(coefficient_percentile(&SparseDoseMatrix::empty(1, 1), 25.0).is_err());
    }

    #[test]
    fn problem_validation() {
        let mut p = toy_problem(&[vec![1.0]], vec![1.0], 0.0);
        p.prescription = vec![-1.0];
        assert!(fmo_solve(&p).is_err());
        let mut p = toy_problem(&[vec![1.0]], vec![1.0], 0.0);
        p.labels.clear();
        assert!(fmo_solve(&p).is_err());
        let mut p = toy_problem(&[vec![1.0]], vec![1.0], 0.0);
        p.tau = -0.5;
        assert!(fmo_solve(&p).is_err());
    }
}
