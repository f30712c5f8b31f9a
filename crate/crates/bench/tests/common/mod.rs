#![allow(dead_code)]

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use scsg::objectives::{FeatureMatrix, LeastSquares};
use scsg::FiniteSumProblem;

pub fn gaussian_rows(n: usize, p: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..p).map(|_| StandardNormal.sample(&mut *rng)).collect())
        .collect()
}

/// Rows `D g_i` with `D²` log-spaced from 1 down to `1/kappa`, targets
/// from a random planted model plus noise.
pub fn conditioned_least_squares(n: usize, p: usize, kappa: f64, noise: f64, seed: u64) -> LeastSquares {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d: Vec<f64> = (0..p)
        .map(|j| kappa.powf(-(j as f64) / (p.max(2) - 1) as f64).sqrt())
        .collect();
    let truth: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = d
            .iter()
            .map(|dj| {
                let z: f64 = StandardNormal.sample(&mut rng);
                dj * z
            })
            .collect();
        let e: f64 = StandardNormal.sample(&mut rng);
        targets.push(row.iter().zip(&truth).map(|(a, x)| a * x).sum::<f64>() + noise * e);
        rows.push(row);
    }
    LeastSquares::new(FeatureMatrix::from_dense(&rows).unwrap(), targets).unwrap()
}

pub fn problem(ls: &LeastSquares) -> FiniteSumProblem {
    FiniteSumProblem::new(Arc::new(ls.clone())).unwrap()
}

/// Solves `M x = r` by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Vec<f64> {
    let n = r.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for c in col..n {
                m[row][c] -= f * m[col][c];
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| m[row][c] * x[c]).sum();
        x[row] = (r[row] - s) / m[row][row];
    }
    x
}

/// Normal-equation minimizer of `(1/n) Σ ½(a_iᵀx − b_i)²` and its value.
pub fn least_squares_optimum(ls: &LeastSquares) -> (Vec<f64>, f64) {
    let a = ls.features();
    let (n, p) = (a.rows(), a.cols());
    let mut m = vec![vec![0.0; p]; p];
    let mut r = vec![0.0; p];
    for i in 0..n {
        let row = a.dense_row(i);
        for j in 0..p {
            r[j] += row[j] * ls.targets()[i] / n as f64;
            for k in 0..p {
                m[j][k] += row[j] * row[k] / n as f64;
            }
        }
    }
    let x = solve_dense(m, r);
    let f = least_squares_value(ls, &x);
    (x, f)
}

pub fn least_squares_value(ls: &LeastSquares, x: &[f64]) -> f64 {
    let a = ls.features();
    (0..a.rows())
        .map(|i| {
            let r = a.dense_row(i).iter().zip(x).map(|(u, v)| u * v).sum::<f64>() - ls.targets()[i];
            0.5 * r * r
        })
        .sum::<f64>()
        / a.rows() as f64
}

pub fn max_row_norm_sq(ls: &LeastSquares) -> f64 {
    let a = ls.features();
    (0..a.rows()).map(|i| a.row_sq_norm(i)).fold(0.0, f64::max)
}
