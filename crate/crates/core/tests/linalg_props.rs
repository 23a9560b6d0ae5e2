mod common;

use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use sigbandit::linalg::{
    chol_solve, eigenvalues, inv_quad_norm, max_eigen, min_eigen, rank1_update, SymMatrix,
};

/// `A Aᵀ + shift·I` for a Gaussian `A`.
fn random_spd(seed: u64, n: usize, shift: f64) -> SymMatrix {
    let mut rng = common::rng(seed);
    let a: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let mut m = SymMatrix::from_fn(n, |i, j| (0..n).map(|k| a[i][k] * a[j][k]).sum());
    m.add_diagonal(shift);
    m
}

fn random_vec(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = common::rng(seed ^ 0x5eed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

#[test]
fn cholesky_residual_up_to_order_64() {
    for n in [1, 2, 5, 17, 40, 64] {
        let m = random_spd(n as u64, n, 1.0);
        let b = random_vec(n as u64, n);
        let x = chol_solve(&m, &b).unwrap();
        let r = m.mul_vec(&x);
        let scale = m.frobenius_norm() * x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() <= 1e-10 * (1.0 + scale), "n={n}");
        }
    }
}

#[test]
fn two_by_two_eigen_quadratic_formula() {
    for seed in 0..50 {
        let m = random_spd(seed, 2, 0.0);
        let (a, b, c) = (m.get(0, 0), m.get(1, 0), m.get(1, 1));
        let mid = (a + c) / 2.0;
        let rad = (((a - c) / 2.0).powi(2) + b * b).sqrt();
        let eig = eigenvalues(&m);
        assert!(common::rel_close(eig[0], mid - rad, 1e-10));
        assert!(common::rel_close(eig[1], mid + rad, 1e-10));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inv_quad_norm_squared_is_quadratic_form(seed in 0u64..10_000, n in 1usize..12) {
        let m = random_spd(seed, n, 0.5);
        let x = random_vec(seed, n);
        let q = inv_quad_norm(&m, &x).unwrap();
        let y = chol_solve(&m, &x).unwrap();
        let want: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        prop_assert!(common::rel_close(q * q, want, 1e-10));
    }

    #[test]
    fn min_eigen_shifts_with_identity(seed in 0u64..10_000, n in 1usize..10, c in 0.0f64..5.0) {
        let m = random_spd(seed, n, 0.0);
        let mut shifted = m.clone();
        shifted.add_diagonal(c);
        prop_assert!((min_eigen(&shifted) - (min_eigen(&m) + c)).abs() <= 1e-9 * (1.0 + max_eigen(&m)));
    }

    #[test]
    fn rank1_update_interlaces(seed in 0u64..10_000, n in 1usize..10) {
        let m = random_spd(seed, n, 0.1);
        let x = random_vec(seed, n);
        let before = eigenvalues(&m);
        let after = eigenvalues(&rank1_update(&m, &x).unwrap());
        let tol = 1e-9 * (1.0 + after[n - 1]);
        for i in 0..n {
            prop_assert!(after[i] >= before[i] - tol);
            if i + 1 < n {
                prop_assert!(after[i] <= before[i + 1] + tol);
            }
        }
        let dx: f64 = x.iter().map(|v| v * v).sum();
        prop_assert!((after.iter().sum::<f64>() - before.iter().sum::<f64>() - dx).abs() <= tol * n as f64);
    }

    #[test]
    fn eigenvalues_sum_to_trace(seed in 0u64..10_000, n in 1usize..15) {
        let m = random_spd(seed, n, 0.0);
        let eig = eigenvalues(&m);
        prop_assert!(eig.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(common::rel_close(eig.iter().sum(), m.trace(), 1e-10));
    }
}
