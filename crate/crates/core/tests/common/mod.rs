//! Test-only oracles, independent of the library's solvers.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense column-major-free helper: `rows[i][j]`.
pub type Dense = Vec<Vec<f64>>;

/// Exhaustive NNLS: for every support `S` of the columns, solve the
/// unconstrained least-squares problem restricted to `S` and keep the best
/// solution whose entries are all nonnegative. The minimum over supports is
/// the NNLS optimum. Returns `(x, ||A x - t||²)`.
///
/// Supports are visited depth-first with an incrementally extended Cholesky
/// factor of the Gram matrix, so each node costs O(k²).
pub fn brute_force_nnls(a: &Dense, t: &[f64]) -> (Vec<f64>, f64) {
    let m = a.len();
    let n = a[0].len();
    let mut gram = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    for i in 0..m {
        for j in 0..n {
            rhs[j] += a[i][j] * t[i];
            for k in 0..n {
                gram[j][k] += a[i][j] * a[i][k];
            }
        }
    }
    let t_sq: f64 = t.iter().map(|v| v * v).sum();

    struct Search<'a> {
        n: usize,
        gram: &'a [Vec<f64>],
        rhs: &'a [f64],
        t_sq: f64,
        support: Vec<usize>,
        chol: Vec<Vec<f64>>,
        y: Vec<f64>,
        best_obj: f64,
        best_x: Vec<f64>,
    }

    impl Search<'_> {
        fn visit(&mut self, start: usize, y_sq: f64) {
            for j in start..self.n {
                let k = self.support.len();
                // New Cholesky row: L[k][..k] solves L l = G[S, j].
                let mut row = vec![0.0; k + 1];
                for p in 0..k {
                    let mut s = self.gram[self.support[p]][j];
                    for q in 0..p {
                        s -= self.chol[p][q] * row[q];
                    }
                    row[p] = s / self.chol[p][p];
                }
                let diag_sq = self.gram[j][j] - row[..k].iter().map(|v| v * v).sum::<f64>();
                if diag_sq <= 1e-12 * self.gram[j][j].max(1.0) {
                    continue;
                }
                row[k] = diag_sq.sqrt();
                let mut yk = self.rhs[j];
                for q in 0..k {
                    yk -= row[q] * self.y[q];
                }
                yk /= row[k];

                if self.chol.len() <= k {
                    self.chol.push(row);
                    self.y.push(yk);
                } else {
                    self.chol[k] = row;
                    self.y[k] = yk;
                }
                self.support.push(j);
                let new_y_sq = y_sq + yk * yk;
                let obj = self.t_sq - new_y_sq;
                if obj < self.best_obj {
                    // Back substitution Lᵀ x = y.
                    let size = k + 1;
                    let mut x = vec![0.0; size];
                    for p in (0..size).rev() {
                        let mut s = self.y[p];
                        for q in p + 1..size {
                            s -= self.chol[q][p] * x[q];
                        }
                        x[p] = s / self.chol[p][p];
                    }
                    if x.iter().all(|v| *v >= 0.0) {
                        self.best_obj = obj;
                        self.best_x = vec![0.0; self.n];
                        for (p, &col) in self.support.iter().enumerate() {
                            self.best_x[col] = x[p];
                        }
                    }
                }
                self.visit(j + 1, new_y_sq);
                self.support.pop();
            }
        }
    }

    let mut search = Search {
        n,
        gram: &gram,
        rhs: &rhs,
        t_sq,
        support: Vec::new(),
        chol: Vec::new(),
        y: Vec::new(),
        best_obj: t_sq,
        best_x: vec![0.0; n],
    };
    search.visit(0, 0.0);
    // Recompute the objective directly rather than through the Gram identity.
    let x = search.best_x;
    let obj = a
        .iter()
        .zip(t)
        .map(|(row, ti)| {
            let r: f64 = row.iter().zip(&x).map(|(a, x)| a * x).sum::<f64>() - ti;
            r * r
        })
        .sum();
    (x, obj)
}

/// Random dense `m × n` NNLS instance with entries in `[0, 1)` and a target
/// built from a sparse nonnegative signal plus noise.
pub fn random_nnls_instance(seed: u64, m: usize, n: usize) -> (Dense, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Dense = (0..m)
        .map(|_| (0..n).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let signal: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(-1.0_f64..1.0).max(0.0))
        .collect();
    let t = a
        .iter()
        .map(|row| {
            row.iter().zip(&signal).map(|(a, s)| a * s).sum::<f64>() + rng.gen_range(-0.5..0.5)
        })
        .collect();
    (a, t)
}

pub fn dense_objective(a: &Dense, x: &[f64], t: &[f64]) -> f64 {
    a.iter()
        .zip(t)
        .map(|(row, ti)| {
            let r: f64 = row.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() - ti;
            r * r
        })
        .sum()
}
