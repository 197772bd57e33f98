//! Property tests for the library's structural invariants.

use csskm_core::*;
use proptest::prelude::*;

fn matrix_strategy(
    max_n: usize,
    max_p: usize,
) -> impl Strategy<Value = (DataMatrix, usize)> {
    (2usize..=max_n, 1usize..=max_p).prop_flat_map(|(n, p)| {
        (
            proptest::collection::vec(-10.0f64..10.0, n * p),
            Just(n),
            Just(p),
        )
            .prop_map(|(values, n, p)| (DataMatrix::new(values, n, p).unwrap(), n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// objective via pair stats equals the O(n^2) double sum.
    #[test]
    fn objective_identity((x, n) in matrix_strategy(30, 10), seed in any::<u64>()) {
        let mut rng = seeded_rng(seed, 0);
        let z_strategy_c = 2 + (seed % 3) as usize;
        let c = z_strategy_c.min(n);
        let mut labels: Vec<usize> = (0..n).map(|i| i % c).collect();
        use rand::Rng;
        for l in labels.iter_mut().skip(c) {
            *l = rng.random_range(0..c);
        }
        let z = Assignment::new(labels, c).unwrap();
        let w = WeightTensor::uniform(c, x.n_features());
        let fast = objective(&x, &z, &w).unwrap();
        let mut slow = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (ci, cj) = (z.cluster_of(i), z.cluster_of(j));
                if ci == cj { continue; }
                let weights = w.pair(ci, cj);
                for k in 0..x.n_features() {
                    let d = x.get(i, k) - x.get(j, k);
                    slow += 0.5 * weights[k] * d * d;
                }
            }
        }
        prop_assert!((fast - slow).abs() <= 1e-9 * slow.abs().max(1e-9));
    }

    /// Pair stats are non-negative and match the naive double loop.
    #[test]
    fn pair_stats_nonnegative_and_exact((x, n) in matrix_strategy(20, 6)) {
        let c = 2.min(n);
        if c < 2 { return Ok(()); }
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let z = Assignment::new(labels, 2).unwrap();
        let s = pair_sufficient_stats(&x, &z, 0, 1).unwrap();
        for k in 0..x.n_features() {
            prop_assert!(s[k] >= 0.0);
            let mut slow = 0.0;
            for i in (0..n).filter(|&i| z.cluster_of(i) == 0) {
                for j in (0..n).filter(|&j| z.cluster_of(j) == 1) {
                    let d = x.get(i, k) - x.get(j, k);
                    slow += d * d;
                }
            }
            prop_assert!((s[k] - slow).abs() <= 1e-9 * slow.max(1e-9));
        }
    }

    /// Solver output always satisfies the constraint set.
    #[test]
    fn solver_constraints_hold(
        s in proptest::collection::vec(0.0f64..100.0, 1..20),
        t_frac in 0.0f64..1.0,
    ) {
        let p = s.len();
        let t = 1.0 + t_frac * ((p as f64).sqrt() - 1.0);
        let sol = solve_pair_weights(&s, t, 64).unwrap();
        let l1: f64 = sol.weights.iter().sum();
        let l2: f64 = sol.weights.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(sol.weights.iter().all(|&w| w >= 0.0));
        prop_assert!(l1 <= t + 1e-6, "l1 = {l1}, t = {t}");
        prop_assert!(l2 == 0.0 || (l2 - 1.0).abs() <= 1e-6, "l2 = {l2}");
        prop_assert!(sol.delta >= 0.0);
    }

    /// Normalized-soft-threshold L1 is non-increasing in delta for stats with
    /// distinct positive entries.
    #[test]
    fn threshold_norm_monotone(
        raw in proptest::collection::vec(0.01f64..50.0, 2..12),
    ) {
        // make entries distinct by spreading with the index
        let s: Vec<f64> = raw.iter().enumerate().map(|(i, v)| v + i as f64 * 1e-4).collect();
        let max_s = s.iter().cloned().fold(0.0, f64::max);
        let g = |delta: f64| {
            let v = soft_threshold(&s, delta);
            let l2: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if l2 > 0.0 { v.iter().sum::<f64>() / l2 } else { 0.0 }
        };
        let mut last = f64::INFINITY;
        for step in 0..50 {
            let delta = max_s * (step as f64) / 50.0;
            let val = g(delta);
            if val == 0.0 { break; }
            prop_assert!(val <= last + 1e-9, "g({delta}) = {val} > {last}");
            last = val;
        }
    }

    /// Support shrinks as the budget shrinks (soft-threshold nesting).
    #[test]
    fn support_nested_in_budget(
        s in proptest::collection::vec(0.0f64..10.0, 4..16),
        t_lo_frac in 0.0f64..1.0,
        t_hi_frac in 0.0f64..1.0,
    ) {
        let p = s.len();
        let span = (p as f64).sqrt() - 1.0;
        let (lo_frac, hi_frac) = if t_lo_frac <= t_hi_frac {
            (t_lo_frac, t_hi_frac)
        } else {
            (t_hi_frac, t_lo_frac)
        };
        let t1 = 1.0 + lo_frac * span;
        let t2 = 1.0 + hi_frac * span;
        let w1 = solve_pair_weights(&s, t1, 64).unwrap().weights;
        let w2 = solve_pair_weights(&s, t2, 64).unwrap().weights;
        for k in 0..p {
            if w1[k] > 0.0 {
                prop_assert!(w2[k] > 0.0, "support not nested at {k}: t1={t1} t2={t2}");
            }
        }
    }

    /// The solver beats random feasible points.
    #[test]
    fn solver_optimal_vs_random_sample(
        s in proptest::collection::vec(0.0f64..10.0, 2..=6),
        t_frac in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let p = s.len();
        let t = 1.0 + t_frac * ((p as f64).sqrt() - 1.0);
        let sol = solve_pair_weights(&s, t, 64).unwrap();
        let own: f64 = sol.weights.iter().zip(&s).map(|(w, x)| w * x).sum();
        let mut rng = seeded_rng(seed, 0);
        use rand::Rng;
        for _ in 0..2000 {
            let raw: Vec<f64> = (0..p).map(|_| standard_normal(&mut rng).abs()).collect();
            let l1: f64 = raw.iter().sum();
            let l2: f64 = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            if l2 == 0.0 { continue; }
            let scale = (t / l1).min(1.0 / l2) * rng.random::<f64>();
            let other: f64 = raw.iter().zip(&s).map(|(w, x)| w * scale * x).sum();
            prop_assert!(own >= other - 1e-6 * own.abs().max(1e-12));
        }
    }

    /// Uniform-weight reduction: the weighted rule equals nearest-centroid.
    #[test]
    fn uniform_reduction_exact((x, n) in matrix_strategy(50, 8), c_pick in 2usize..=5) {
        let c = c_pick.min(n);
        if c < 2 { return Ok(()); }
        let labels: Vec<usize> = (0..n).map(|i| i % c).collect();
        let z = Assignment::new(labels, c).unwrap();
        let (mu, _) = compute_centroids(&x, &z, None);
        let w = WeightTensor::uniform(c, x.n_features());
        for i in 0..n {
            let weighted = assign_point(x.row(i), &mu, &w);
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for cand in 0..c {
                let d: f64 = x.row(i).iter().zip(mu.row(cand)).map(|(a, b)| (a - b) * (a - b)).sum();
                if d < best_d { best_d = d; best = cand; }
            }
            prop_assert_eq!(weighted, best, "sample {}", i);
        }
    }

    /// Permuting sample order permutes the assignment identically.
    #[test]
    fn permutation_equivariance((x, n) in matrix_strategy(24, 6), seed in any::<u64>()) {
        let c = 2.min(n);
        if c < 2 { return Ok(()); }
        let mut rng = seeded_rng(seed, 0);
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let rows: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).to_vec()).collect();
        let permuted_rows: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let xp = DataMatrix::from_rows(permuted_rows).unwrap();
        let w = WeightTensor::uniform(2, x.n_features());
        // shared fixed init centroids so only sample order differs
        let (init, _) = compute_centroids(
            &x,
            &Assignment::new((0..n).map(|i| i % 2).collect(), 2).unwrap(),
            None,
        );
        let a = weighted_kmeans(&x, &w, &init, 50).unwrap().assignment;
        let b = weighted_kmeans(&xp, &w, &init, 50).unwrap().assignment;
        for (pos, &orig) in perm.iter().enumerate() {
            prop_assert_eq!(b.cluster_of(pos), a.cluster_of(orig));
        }
    }

    /// Matched accuracy is invariant to relabeling either side.
    #[test]
    fn accuracy_relabel_invariant(
        labels in proptest::collection::vec(0usize..4, 8..40),
        swap in 0usize..4,
    ) {
        let c = 4;
        let mut covered = labels.clone();
        for (i, l) in covered.iter_mut().enumerate().take(c) { *l = i; }
        let truth = Assignment::new(covered.clone(), c).unwrap();
        // relabel by a cyclic shift
        let relabeled: Vec<usize> = covered.iter().map(|&l| (l + swap) % c).collect();
        let pred = Assignment::new(relabeled, c).unwrap();
        let (acc, _) = match_accuracy(&pred, &truth).unwrap();
        prop_assert!((acc - 1.0).abs() < 1e-12);
    }

    /// The hypergeometric pmf sums to one over its support.
    #[test]
    fn hypergeometric_pmf_normalized(
        population in 1u64..6000,
        k_frac in 0.0f64..1.0,
        n_frac in 0.0f64..1.0,
    ) {
        let successes = (population as f64 * k_frac) as u64;
        let draws = (population as f64 * n_frac) as u64;
        let lo = (successes + draws).saturating_sub(population);
        let hi = successes.min(draws);
        let mut total = 0.0;
        for j in lo..=hi {
            total += hypergeometric_pmf(population, successes, draws, j).unwrap();
        }
        prop_assert!((total - 1.0).abs() <= 1e-12, "sum = {total}");
    }
}

#[test]
fn mstep_dominates_any_feasible_tensor() {
    use rand::Rng;
    let mut rng = seeded_rng(2024, 0);
    for _ in 0..20 {
        let n = 6 + rng.random_range(0..12);
        let p = 2 + rng.random_range(0..6);
        let values: Vec<f64> = (0..n * p).map(|_| standard_normal(&mut rng)).collect();
        let x = DataMatrix::new(values, n, p).unwrap();
        let mut labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        for l in labels.iter_mut().skip(2) {
            *l = rng.random_range(0..2);
        }
        let z = Assignment::new(labels, 2).unwrap();
        let t = 1.0 + rng.random::<f64>() * ((p as f64).sqrt() - 1.0);
        let best = m_step(&x, &z, t, 64).unwrap();
        for _ in 0..50 {
            let mut other = WeightTensor::zero(2, p, t);
            let raw: Vec<f64> = (0..p).map(|_| standard_normal(&mut rng).abs()).collect();
            let l1: f64 = raw.iter().sum();
            let l2: f64 = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            let scale = (t / l1).min(1.0 / l2) * rng.random::<f64>();
            other.set_pair(0, 1, raw.into_iter().map(|v| v * scale).collect());
            let f_other = objective(&x, &z, &other).unwrap();
            assert!(best.objective >= f_other - 1e-9 * best.objective.abs().max(1.0));
        }
    }
}
