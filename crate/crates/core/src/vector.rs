//! Small dense-vector kernels shared by the solvers.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// `‖x‖_r` for `r ≥ 1`; `r = ∞` gives the max norm.
pub fn lp_norm(x: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    } else if r == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if r == 2.0 {
        norm(x)
    } else {
        x.iter().map(|v| v.abs().powf(r)).sum::<f64>().powf(1.0 / r)
    }
}
