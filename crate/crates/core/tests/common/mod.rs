#![allow(dead_code)]

use std::sync::Arc;

use scsg::objectives::{FeatureMatrix, LeastSquares, MulticlassLogistic};
use scsg::{FiniteSumProblem, RngStream};

pub fn normal(rng: &mut RngStream) -> f64 {
    let u1 = rng.uniform_open01();
    let u2 = rng.uniform_open01();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn normal_vec(rng: &mut RngStream, len: usize) -> Vec<f64> {
    (0..len).map(|_| normal(rng)).collect()
}

pub fn random_least_squares(n: usize, p: usize, seed: u64) -> LeastSquares {
    let mut rng = RngStream::new(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| normal_vec(&mut rng, p)).collect();
    let targets = normal_vec(&mut rng, n);
    LeastSquares::new(FeatureMatrix::from_dense(&rows).unwrap(), targets).unwrap()
}

pub fn random_logistic(n: usize, p: usize, classes: u32, seed: u64) -> MulticlassLogistic {
    let mut rng = RngStream::new(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| normal_vec(&mut rng, p)).collect();
    let labels = (0..n).map(|_| 1 + rng.below(classes as usize) as u32).collect();
    MulticlassLogistic::new(FeatureMatrix::from_dense(&rows).unwrap(), labels, classes).unwrap()
}

/// Least squares whose Hessian `AᵀA/n` has eigenvalues spread over
/// `[1/kappa, 1]` (approximately, from the sample): row `i` is `D g_i` with
/// `g_i` standard normal and `D² = diag(logspace(0, −log10 kappa))`.
pub fn conditioned_least_squares(n: usize, p: usize, kappa: f64, noise: f64, seed: u64) -> LeastSquares {
    let mut rng = RngStream::new(seed);
    let d: Vec<f64> = (0..p)
        .map(|j| {
            let t = if p > 1 { j as f64 / (p - 1) as f64 } else { 0.0 };
            kappa.powf(-t).sqrt()
        })
        .collect();
    let x_true = normal_vec(&mut rng, p);
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = d.iter().map(|dj| dj * normal(&mut rng)).collect();
        let y = row.iter().zip(&x_true).map(|(a, x)| a * x).sum::<f64>() + noise * normal(&mut rng);
        rows.push(row);
        targets.push(y);
    }
    LeastSquares::new(FeatureMatrix::from_dense(&rows).unwrap(), targets).unwrap()
}

pub fn problem<L: scsg::ComponentLoss + 'static>(loss: L) -> FiniteSumProblem {
    FiniteSumProblem::new(Arc::new(loss)).unwrap()
}

/// Central finite differences of `f` at `x` with step `h`.
pub fn finite_difference<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|j| {
            let orig = xp[j];
            xp[j] = orig + h;
            let fp = f(&xp);
            xp[j] = orig - h;
            let fm = f(&xp);
            xp[j] = orig;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

pub fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt().max(1e-12);
    diff / scale
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Solves the dense system `M x = r` by Gaussian elimination with partial
/// pivoting.
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

/// Minimizer of `(1/n) Σ ½(a_iᵀx − b_i)² + ridge‖x‖²` from the normal
/// equations `(AᵀA/n + 2·ridge·I) x = Aᵀb/n`.
pub fn least_squares_optimum(ls: &LeastSquares, ridge: f64) -> Vec<f64> {
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
    for (j, mj) in m.iter_mut().enumerate() {
        mj[j] += 2.0 * ridge;
    }
    solve_dense(m, r)
}

/// Direct summation of the least-squares objective.
pub fn least_squares_objective(ls: &LeastSquares, x: &[f64]) -> f64 {
    let a = ls.features();
    let n = a.rows();
    (0..n)
        .map(|i| {
            let r: f64 = a.dense_row(i).iter().zip(x).map(|(u, v)| u * v).sum::<f64>() - ls.targets()[i];
            0.5 * r * r
        })
        .sum::<f64>()
        / n as f64
}
