mod common;

use std::sync::Arc;

use fixfn::fmo::{
    fmo_solve, inner_solve, outer_update, split_matrix, FmoProblem, InnerParams, OuterParams,
    VoxelTag,
};
use fixfn::function_space::{
    cross_sup_distance, grid_l1_distance, uniform_distance, DiscreteFunction, Domain, MetricKind,
};
use fixfn::iteration::{apriori_bound, picard_iterate, IterationConfig};
use fixfn::operators::{apply, check_reich_condition, estimate_contraction_constant, OperatorSpec};
use fixfn::sparse::{SparseDoseMatrix, Triplet};
use proptest::prelude::*;

fn values(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0..100.0f64, len)
}

/// Two functions on one shared domain of 1..=12 points.
fn function_pair() -> impl Strategy<Value = (DiscreteFunction, DiscreteFunction)> {
    (1usize..=12)
        .prop_flat_map(|n| (values(n), values(n)))
        .prop_map(|(a, b)| {
            let coords: Vec<f64> = (0..a.len()).map(|i| i as f64).collect();
            let d = Arc::new(Domain::from_coordinates(&coords).unwrap());
            (
                DiscreteFunction::new(d.clone(), a).unwrap(),
                DiscreteFunction::new(d, b).unwrap(),
            )
        })
}

fn weighted_pair() -> impl Strategy<Value = (DiscreteFunction, DiscreteFunction)> {
    (2usize..=40)
        .prop_flat_map(|n| (values(n), values(n)))
        .prop_map(|(a, b)| {
            let d = Arc::new(Domain::uniform_grid(0.0, 1.0, a.len()).unwrap());
            (
                DiscreteFunction::new(d.clone(), a).unwrap(),
                DiscreteFunction::new(d, b).unwrap(),
            )
        })
}

fn sparse_matrix() -> impl Strategy<Value = SparseDoseMatrix> {
    (0usize..8, 1usize..8)
        .prop_flat_map(|(r, c)| {
            (
                Just(r),
                Just(c),
                prop::collection::vec(prop::option::weighted(0.4, 0.0..2.0f64), r * c),
            )
        })
        .prop_map(|(r, c, cells)| {
            let triplets = cells
                .iter()
                .enumerate()
                .filter_map(|(k, v)| {
                    v.map(|value| Triplet {
                        row: k / c,
                        col: k % c,
                        value,
                    })
                })
                .collect();
            SparseDoseMatrix::from_triplets(r, c, triplets).unwrap()
        })
}

proptest! {
    #[test]
    fn uniform_is_below_cross_sup((f, g) in function_pair()) {
        prop_assert!(uniform_distance(&f, &g).unwrap() <= cross_sup_distance(&f, &g).unwrap());
    }

    #[test]
    fn cross_sup_diagonal_is_range((f, _) in function_pair()) {
        prop_assert_eq!(cross_sup_distance(&f, &f).unwrap(), f.max() - f.min());
    }

    #[test]
    fn grid_l1_on_unit_interval_is_below_uniform((f, g) in weighted_pair()) {
        let l1 = grid_l1_distance(&f, &g).unwrap();
        prop_assert!(l1 <= uniform_distance(&f, &g).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn distances_ignore_point_order((f, g) in function_pair(), seed in any::<u64>()) {
        let n = f.values().len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|i| (*i as u64).wrapping_mul(seed | 1).rotate_left(17));
        let coords: Vec<f64> = order.iter().map(|&i| i as f64).collect();
        let d = Arc::new(Domain::from_coordinates(&coords).unwrap());
        let pf = DiscreteFunction::new(d.clone(), order.iter().map(|&i| f.values()[i]).collect()).unwrap();
        let pg = DiscreteFunction::new(d, order.iter().map(|&i| g.values()[i]).collect()).unwrap();
        for m in [MetricKind::CrossSup, MetricKind::Uniform] {
            prop_assert_eq!(m.distance(&f, &g).unwrap(), m.distance(&pf, &pg).unwrap());
        }
    }

    #[test]
    fn apply_is_pointwise((f, _) in function_pair(), c0 in -2.0..2.0f64, c1 in -2.0..2.0f64) {
        let op = OperatorSpec::poly(vec![c0, c1]);
        let image = apply(&op, &f).unwrap();
        for (y, v) in f.values().iter().zip(image.values()) {
            prop_assert_eq!(*v, c1 * y + c0);
        }
    }

    #[test]
    fn affine_scales_uniform_distance((f, g) in function_pair(), k in 0.0..1.0f64) {
        let op = OperatorSpec::affine(k, 3.0);
        let d = uniform_distance(&f, &g).unwrap();
        let dd = uniform_distance(&apply(&op, &f).unwrap(), &apply(&op, &g).unwrap()).unwrap();
        prop_assert!((dd - k * d).abs() <= 1e-12 * (1.0 + d));
    }

    #[test]
    fn estimate_grows_with_pairs(pairs in prop::collection::vec(function_pair(), 2..6)) {
        let op = OperatorSpec::poly(vec![0.5, 0.1, 0.01]);
        let pairs: Vec<_> = pairs.into_iter().filter(|(f, g)| f != g).collect();
        prop_assume!(pairs.len() >= 2);
        let part = estimate_contraction_constant(&op, MetricKind::Uniform, &pairs[..1]);
        let all = estimate_contraction_constant(&op, MetricKind::Uniform, &pairs).unwrap();
        if let Ok(part) = part {
            prop_assert!(part.estimated_constant.unwrap() <= all.estimated_constant.unwrap());
        }
    }

    #[test]
    fn reich_with_c_only_matches_contraction((f, g) in function_pair(), k in 0.0..0.95f64) {
        prop_assume!(uniform_distance(&f, &g).unwrap() > 0.0);
        let op = OperatorSpec::affine(k, 1.0);
        let pairs = [(f, g)];
        let reich = check_reich_condition(&op, MetricKind::Uniform, 0.0, 0.0, k, &pairs).unwrap();
        let est = estimate_contraction_constant(&op, MetricKind::Uniform, &pairs).unwrap();
        prop_assert!(reich.satisfied);
        prop_assert!(est.estimated_constant.unwrap() <= k * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn iteration_is_deterministic((f, _) in function_pair(), k in 0.1..0.9f64) {
        let op = OperatorSpec::affine(k, 1.0);
        let cfg = IterationConfig::banach(1e-9, 500);
        prop_assert_eq!(picard_iterate(&op, &f, &cfg).unwrap(), picard_iterate(&op, &f, &cfg).unwrap());
    }

    #[test]
    fn apriori_bound_is_sound((f, _) in function_pair(), k in 0.05..0.95f64, shift in -5.0..5.0f64) {
        let op = OperatorSpec::affine(k, shift);
        let cfg = IterationConfig::banach(1e-9, 2000).with_lambda_hint(k);
        let report = picard_iterate(&op, &f, &cfg).unwrap();
        prop_assert!(report.converged);
        let limit = shift / (1.0 - k);
        let mut fq = f.clone();
        for q in 0..=report.iterations {
            let exact = fq.values().iter().map(|v| (v - limit).abs()).fold(0.0, f64::max);
            let bound = apriori_bound(k, report.trace[0], q).unwrap();
            prop_assert!(exact <= bound * (1.0 + 1e-9) + 1e-9, "q={} exact={} bound={}", q, exact, bound);
            fq = apply(&op, &fq).unwrap();
        }
    }

    #[test]
    fn limits_do_not_depend_on_start((f, g) in function_pair(), k in 0.1..0.9f64) {
        let op = OperatorSpec::affine(k, 2.0);
        let cfg = IterationConfig::banach(1e-10, 2000).with_lambda_hint(k);
        let a = picard_iterate(&op, &f, &cfg).unwrap();
        let b = picard_iterate(&op, &g, &cfg).unwrap();
        prop_assert!(uniform_distance(&a.final_function, &b.final_function).unwrap() <= 2e-10);
    }

    #[test]
    fn matrix_csv_round_trip(d in sparse_matrix()) {
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        prop_assert_eq!(SparseDoseMatrix::read_csv(buf.as_slice()).unwrap(), d);
    }

    #[test]
    fn split_recombines_exactly(d in sparse_matrix(), tau in 0.0..2.5f64) {
        let (d1, d2) = split_matrix(&d, tau);
        prop_assert_eq!(d1.nnz() + d2.nnz(), d.nnz());
        prop_assert!(d1.values().iter().all(|v| *v > tau));
        prop_assert!(d2.values().iter().all(|v| *v <= tau));
        for r in 0..d.n_voxels() {
            for c in 0..d.n_beamlets() {
                prop_assert!(!(d1.is_stored(r, c) && d2.is_stored(r, c)));
                prop_assert_eq!(d1.get(r, c) + d2.get(r, c), d.get(r, c));
            }
        }
    }

    #[test]
    fn inner_solution_is_feasible(seed in 0u64..1000) {
        let (a, t) = common::random_nnls_instance(seed, 12, 5);
        let d = SparseDoseMatrix::from_dense(&a).unwrap();
        let out = inner_solve(&d, &[0.0; 12], &t, &[0.0; 5], &InnerParams::default()).unwrap();
        prop_assert!(out.x.iter().all(|v| *v >= 0.0));
    }
}

fn random_problem(seed: u64, tau: f64) -> FmoProblem {
    let (a, t) = common::random_nnls_instance(seed, 30, 8);
    let a: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, v)| if i % 8 == j { 1.0 + v } else { 0.05 * v })
                .collect()
        })
        .collect();
    let ddc = SparseDoseMatrix::from_dense(&a).unwrap();
    FmoProblem {
        ddc,
        prescription: t.iter().map(|v| v.abs() + 1.0).collect(),
        labels: vec![VoxelTag::Oar; 30],
        tau,
        inner: InnerParams::default(),
        outer: OuterParams {
            outer_tol: 1e-8,
            outer_max_iters: 500,
        },
        warnings: Vec::new(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn converged_fmo_is_a_fixed_point(seed in 0u64..10_000) {
        let problem = random_problem(seed, 0.5);
        let report = fmo_solve(&problem).unwrap();
        prop_assume!(report.converged);
        let (_, d2) = split_matrix(&problem.ddc, problem.tau);
        let fresh = outer_update(&d2, &report.x).unwrap();
        let gap = fresh.iter().zip(&report.scatter_dose).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(gap <= problem.outer.outer_tol, "gap {}", gap);
        prop_assert!(report.final_projected_gradient_norm <= problem.inner.inner_tol);
    }

    #[test]
    fn tiny_tau_collapses_to_reference(seed in 0u64..10_000) {
        let mut problem = random_problem(seed, 1e-300);
        problem.inner = InnerParams::reference();
        let report = fmo_solve(&problem).unwrap();
        prop_assert_eq!(report.nnz_d2, 0);
        prop_assert!(report.outer_iterations <= 2);
        prop_assert!(report.reference_gap <= 1e-10, "gap {}", report.reference_gap);
    }
}
