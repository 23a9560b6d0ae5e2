#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sigbandit::path::DiscretePath;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gaussian random walk on a strictly increasing jittered grid starting at 0.
pub fn random_path(rng: &mut ChaCha8Rng, samples: usize, channels: usize) -> DiscretePath {
    let mut t = 0.0;
    let mut times = Vec::with_capacity(samples);
    let mut values = Vec::with_capacity(samples * channels);
    let mut x = vec![0.0; channels];
    for i in 0..samples {
        if i > 0 {
            t += 0.02 + 0.08 * rng.random::<f64>();
            for v in &mut x {
                *v += 0.3 * rng.sample::<f64, _>(StandardNormal);
            }
        }
        times.push(t);
        values.extend_from_slice(&x);
    }
    DiscretePath::from_flat(times, values, channels).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

pub fn vec_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| rel_close(*x, *y, tol))
}

/// Solves `(XᵀX + λI) β = Xᵀr` by Gaussian elimination with partial pivoting,
/// accumulating the normal equations column by column.
#[allow(clippy::needless_range_loop)]
pub fn ridge_batch(xs: &[Vec<f64>], rs: &[f64], lambda: f64) -> Vec<f64> {
    let dim = xs[0].len();
    let col = |j: usize| xs.iter().map(move |x| x[j]);
    let mut a: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let mut row: Vec<f64> = (0..dim)
                .map(|j| col(i).zip(col(j)).map(|(p, q)| p * q).sum::<f64>())
                .collect();
            row[i] += lambda;
            row.push(col(i).zip(rs).map(|(p, r)| p * r).sum());
            row
        })
        .collect();
    for k in 0..dim {
        let piv = (k..dim)
            .max_by(|&p, &q| a[p][k].abs().total_cmp(&a[q][k].abs()))
            .unwrap();
        a.swap(k, piv);
        for i in k + 1..dim {
            let f = a[i][k] / a[k][k];
            for j in k..=dim {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    let mut beta = vec![0.0; dim];
    for i in (0..dim).rev() {
        let s: f64 = (i + 1..dim).map(|j| a[i][j] * beta[j]).sum();
        beta[i] = (a[i][dim] - s) / a[i][i];
    }
    beta
}
