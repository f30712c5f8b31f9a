//! Distance-generating functions and the mirror-proximal step
//!
//! ```text
//! y⁺ = argmin_y ⟨ν, y⟩ + ψ(y) + B_w(y, x) / η
//! B_w(x, y) = w(x) − w(y) − ⟨∇w(y), x − y⟩
//! ```
//!
//! Two generators are provided. [`DistanceGenerator::Euclidean`] is
//! `w(x) = ½‖x‖²`, for which the step is a proximal gradient step and, with
//! no regularizer, the plain update `x − ην`. [`DistanceGenerator::QNorm`]
//! is `w(x) = (1/q)‖x‖₂^q`. Its gradient `‖x‖^{q−2} x` is radial, so the
//! step reduces to a scalar equation in the norm of `y⁺`.
//!
//! The domain is all of `R^d`; there is no projection.

use crate::error::{Error, Result};
use crate::objectives::{Regularizer, RegularizerKind};
use crate::vector;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DistanceGenerator {
    #[default]
    Euclidean,
    QNorm {
        q: f64,
    },
}

impl DistanceGenerator {
    pub fn q_norm(q: f64) -> Result<Self> {
        if !(q > 1.0 && q.is_finite()) {
            return Err(Error::invalid("q", format!("must be finite and > 1, got {q}")));
        }
        Ok(DistanceGenerator::QNorm { q })
    }

    /// Exponent `q` of `w(x) = (1/q)‖x‖^q`.
    pub fn exponent(&self) -> f64 {
        match *self {
            DistanceGenerator::Euclidean => 2.0,
            DistanceGenerator::QNorm { q } => q,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            DistanceGenerator::Euclidean => 0.5 * vector::norm_sq(x),
            DistanceGenerator::QNorm { q } => vector::norm(x).powf(q) / q,
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match *self {
            DistanceGenerator::Euclidean => x.to_vec(),
            DistanceGenerator::QNorm { q } => {
                let r = vector::norm(x);
                if r == 0.0 {
                    return vec![0.0; x.len()];
                }
                let s = r.powf(q - 2.0);
                x.iter().map(|v| s * v).collect()
            }
        }
    }
}

/// `B_w(x, y)`.
pub fn bregman(generator: &DistanceGenerator, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: x.len(),
        });
    }
    Ok(match generator {
        DistanceGenerator::Euclidean => 0.5 * vector::dist_sq(x, y),
        DistanceGenerator::QNorm { .. } => {
            let gy = generator.gradient(y);
            let lin: f64 = gy.iter().zip(x.iter().zip(y)).map(|(g, (a, b))| g * (a - b)).sum();
            generator.value(x) - generator.value(y) - lin
        }
    })
}

/// Step size, composite term and geometry of one mirror-proximal update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorStepSpec {
    eta: f64,
    regularizer: Regularizer,
    generator: DistanceGenerator,
}

impl MirrorStepSpec {
    pub fn new(eta: f64, regularizer: Regularizer, generator: DistanceGenerator) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::invalid("eta", format!("step size must be finite and > 0, got {eta}")));
        }
        if matches!(generator, DistanceGenerator::QNorm { .. }) && regularizer.kind() == RegularizerKind::L1 && !regularizer.is_none() {
            return Err(Error::Unsupported("q-norm distance generator with an l1 regularizer".into()));
        }
        Ok(Self {
            eta,
            regularizer,
            generator,
        })
    }

    pub fn euclidean(eta: f64, regularizer: Regularizer) -> Result<Self> {
        Self::new(eta, regularizer, DistanceGenerator::Euclidean)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn regularizer(&self) -> &Regularizer {
        &self.regularizer
    }

    pub fn generator(&self) -> &DistanceGenerator {
        &self.generator
    }
}

pub fn mirror_prox_step(spec: &MirrorStepSpec, x: &[f64], nu: &[f64]) -> Result<Vec<f64>> {
    let mut y = x.to_vec();
    mirror_prox_step_in_place(spec, &mut y, nu)?;
    Ok(y)
}

/// Replaces `x` by the mirror-proximal step from `x` along `nu`.
pub fn mirror_prox_step_in_place(spec: &MirrorStepSpec, x: &mut [f64], nu: &[f64]) -> Result<()> {
    if x.len() != nu.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: nu.len(),
        });
    }
    match spec.generator {
        DistanceGenerator::Euclidean => {
            vector::axpy(-spec.eta, nu, x);
            if !spec.regularizer.is_none() {
                spec.regularizer.prox_in_place(x, spec.eta)?;
            }
            Ok(())
        }
        DistanceGenerator::QNorm { q } => {
            // ∇w(y) + c·y = θ with θ = ∇w(x) − ην and c = 2ηλ for ψ = λ‖·‖².
            let mut theta = spec.generator.gradient(x);
            vector::axpy(-spec.eta, nu, &mut theta);
            let c = match spec.regularizer.kind() {
                RegularizerKind::L2Scaled => 2.0 * spec.eta * spec.regularizer.weight(),
                _ => 0.0,
            };
            let t = vector::norm(&theta);
            let r = solve_radial(q, c, t);
            let s = if t > 0.0 { r / t } else { 0.0 };
            for (xi, th) in x.iter_mut().zip(&theta) {
                *xi = s * th;
            }
            Ok(())
        }
    }
}

const RADIAL_MAX_ITER: usize = 200;

/// Root `r ≥ 0` of `r^{q−1} + c·r = t`, by Newton steps safeguarded with
/// bisection on the bracket `[0, t^{1/(q−1)}]`.
fn solve_radial(q: f64, c: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let phi = |r: f64| r.powf(q - 1.0) + c * r - t;
    let (mut lo, mut hi) = (0.0, t.powf(1.0 / (q - 1.0)));
    if phi(hi) <= 0.0 {
        return hi;
    }
    let tol = 1e-15 * t.max(1.0);
    let mut r = hi;
    for _ in 0..RADIAL_MAX_ITER {
        let f = phi(r);
        if f.abs() <= tol {
            break;
        }
        if f > 0.0 {
            hi = r;
        } else {
            lo = r;
        }
        let df = (q - 1.0) * r.powf(q - 2.0) + c;
        let newton = r - f / df;
        r = if newton > lo && newton < hi && newton.is_finite() {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    r
}

/// Smallest `‖∇w(y) − ∇w(x) + η(ν + s)‖₂` over subgradients `s ∈ ∂ψ(y)`.
///
/// Zero exactly when `y` solves the mirror-proximal step from `x`.
pub fn first_order_residual(spec: &MirrorStepSpec, x: &[f64], nu: &[f64], y: &[f64]) -> f64 {
    let gx = spec.generator.gradient(x);
    let gy = spec.generator.gradient(y);
    let eta = spec.eta;
    let reg = &spec.regularizer;
    let mut sum = 0.0;
    for j in 0..x.len() {
        let base = gy[j] - gx[j] + eta * nu[j];
        let r = match reg.kind() {
            RegularizerKind::None => base,
            RegularizerKind::L2Scaled => base + eta * 2.0 * reg.weight() * y[j],
            RegularizerKind::L1 => {
                let lam = reg.weight();
                if y[j] != 0.0 {
                    base + eta * lam * y[j].signum()
                } else {
                    // Choose s_j ∈ [−λ, λ] closest to cancelling `base`.
                    let s = (-base / eta).clamp(-lam, lam);
                    base + eta * s
                }
            }
        };
        sum += r * r;
    }
    sum.sqrt()
}

/// Hölder conjugate `r / (r − 1)`.
pub fn dual_exponent(r: f64) -> f64 {
    if r == 1.0 {
        f64::INFINITY
    } else if r.is_infinite() {
        1.0
    } else {
        r / (r - 1.0)
    }
}

/// Closed-form convex conjugate of `G(x) = (1/q)‖x‖_r^q`, namely
/// `(1/p)‖x‖_{r'}^p` with `p = q/(q−1)` and `r' = r/(r−1)`.
pub fn q_norm_conjugate(x: &[f64], q: f64, r: f64) -> f64 {
    let p = dual_exponent(q);
    vector::lp_norm(x, dual_exponent(r)).powf(p) / p
}
