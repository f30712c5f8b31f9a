//! Concrete losses, regularizers and smoothness estimation.
//!
//! Features are stored row-compressed so sparse datasets stay sparse;
//! parameters and gradients are always dense.

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::problem::ComponentLoss;
use crate::vector;

/// Row-compressed `rows × cols` feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl FeatureMatrix {
    /// Dense rows; exact zeros are not stored.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self {
            cols,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
        };
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    m.indices.push(j);
                    m.values.push(v);
                }
            }
            m.indptr.push(m.indices.len());
        }
        Ok(m)
    }

    /// Sparse rows of `(column, value)` pairs with 0-based columns.
    pub fn from_sparse_rows(cols: usize, rows: &[Vec<(usize, f64)>]) -> Result<Self> {
        let mut m = Self {
            cols,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
        };
        for row in rows {
            let mut row = row.clone();
            row.sort_by_key(|&(j, _)| j);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::invalid("features", format!("column {} repeated within a row", w[0].0)));
                }
            }
            for (j, v) in row {
                if j >= cols {
                    return Err(Error::IndexOutOfRange { index: j, n: cols });
                }
                m.indices.push(j);
                m.values.push(v);
            }
            m.indptr.push(m.indices.len());
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[s..e], &self.values[s..e])
    }

    #[inline]
    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (idx, val) = self.row(i);
        idx.iter().zip(val).map(|(&j, &v)| v * x[j]).sum()
    }

    /// `out += alpha * a_i`
    #[inline]
    pub fn row_axpy(&self, i: usize, alpha: f64, out: &mut [f64]) {
        let (idx, val) = self.row(i);
        for (&j, &v) in idx.iter().zip(val) {
            out[j] += alpha * v;
        }
    }

    pub fn row_sq_norm(&self, i: usize) -> f64 {
        self.row(i).1.iter().map(|v| v * v).sum()
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut r = vec![0.0; self.cols];
        self.row_axpy(i, 1.0, &mut r);
        r
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut m = Self {
            cols: self.cols,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
        };
        for &i in rows {
            let (idx, val) = self.row(i);
            m.indices.extend_from_slice(idx);
            m.values.extend_from_slice(val);
            m.indptr.push(m.indices.len());
        }
        m
    }
}

/// Data whose components are indexed by feature rows.
pub trait RowData: Sized {
    fn num_rows(&self) -> usize;
    fn row_sq_norm(&self, i: usize) -> f64;
    /// A copy restricted to `rows`, in the given order.
    fn select_rows(&self, rows: &[usize]) -> Self;
}

/// Multiclass logistic regression with class `K` as the reference class.
///
/// Component loss for a row `a` with label `y ∈ {1..K}`:
///
/// ```text
/// f(x) = log(1 + Σ_{k<K} exp(aᵀx_k)) − Σ_{k<K} I(y = k) aᵀx_k
/// ```
///
/// `x` is the concatenation `x_1, …, x_{K−1}` of `p`-dimensional class
/// blocks, so `dim = p·(K−1)` and coordinate `(k−1)·p + j` is feature `j`
/// of class `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassLogistic {
    features: FeatureMatrix,
    labels: Vec<u32>,
    classes: u32,
}

impl MulticlassLogistic {
    pub fn new(features: FeatureMatrix, labels: Vec<u32>, classes: u32) -> Result<Self> {
        if classes < 2 {
            return Err(Error::invalid("classes", format!("need at least 2 classes, got {classes}")));
        }
        if labels.len() != features.rows() {
            return Err(Error::DimensionMismatch {
                expected: features.rows(),
                found: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&y| y == 0 || y > classes) {
            return Err(Error::invalid("labels", format!("label {bad} outside 1..={classes}")));
        }
        Ok(Self {
            features,
            labels,
            classes,
        })
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn classes(&self) -> u32 {
        self.classes
    }

    fn logits(&self, i: usize, x: &[f64]) -> SmallVec<[f64; 16]> {
        let p = self.features.cols();
        (0..self.classes as usize - 1)
            .map(|k| self.features.row_dot(i, &x[k * p..(k + 1) * p]))
            .collect()
    }

    /// Value and dense gradient of component `i`.
    pub fn component(&self, i: usize, x: &[f64]) -> (f64, Vec<f64>) {
        let mut g = vec![0.0; x.len()];
        let v = self.add_gradient(i, x, 1.0, &mut g);
        (v, g)
    }
}

/// `log(1 + Σ exp(z_k))` with the max logit (including the implicit 0)
/// factored out.
fn log1p_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().fold(0.0_f64, |m, &v| m.max(v));
    let s = (-m).exp() + z.iter().map(|&v| (v - m).exp()).sum::<f64>();
    m + s.ln()
}

impl ComponentLoss for MulticlassLogistic {
    fn num_components(&self) -> usize {
        self.labels.len()
    }

    fn dim(&self) -> usize {
        self.features.cols() * (self.classes as usize - 1)
    }

    fn value(&self, i: usize, x: &[f64]) -> f64 {
        let z = self.logits(i, x);
        let y = self.labels[i] as usize;
        let own = if y < self.classes as usize { z[y - 1] } else { 0.0 };
        log1p_sum_exp(&z) - own
    }

    fn add_gradient(&self, i: usize, x: &[f64], scale: f64, out: &mut [f64]) -> f64 {
        let p = self.features.cols();
        let z = self.logits(i, x);
        let y = self.labels[i] as usize;
        let lse = log1p_sum_exp(&z);
        for (k, &zk) in z.iter().enumerate() {
            let indicator = if k + 1 == y { 1.0 } else { 0.0 };
            let coef = (zk - lse).exp() - indicator;
            self.features.row_axpy(i, scale * coef, &mut out[k * p..(k + 1) * p]);
        }
        let own = if y < self.classes as usize { z[y - 1] } else { 0.0 };
        lse - own
    }
}

impl RowData for MulticlassLogistic {
    fn num_rows(&self) -> usize {
        self.labels.len()
    }

    fn row_sq_norm(&self, i: usize) -> f64 {
        self.features.row_sq_norm(i)
    }

    fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(rows),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
        }
    }
}

/// `f_i(x) = ½(a_iᵀx − b_i)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    features: FeatureMatrix,
    targets: Vec<f64>,
}

impl LeastSquares {
    pub fn new(features: FeatureMatrix, targets: Vec<f64>) -> Result<Self> {
        if targets.len() != features.rows() {
            return Err(Error::DimensionMismatch {
                expected: features.rows(),
                found: targets.len(),
            });
        }
        Ok(Self { features, targets })
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn component(&self, i: usize, x: &[f64]) -> (f64, Vec<f64>) {
        let mut g = vec![0.0; x.len()];
        let v = self.add_gradient(i, x, 1.0, &mut g);
        (v, g)
    }
}

impl ComponentLoss for LeastSquares {
    fn num_components(&self) -> usize {
        self.targets.len()
    }

    fn dim(&self) -> usize {
        self.features.cols()
    }

    fn value(&self, i: usize, x: &[f64]) -> f64 {
        let r = self.features.row_dot(i, x) - self.targets[i];
        0.5 * r * r
    }

    fn add_gradient(&self, i: usize, x: &[f64], scale: f64, out: &mut [f64]) -> f64 {
        let r = self.features.row_dot(i, x) - self.targets[i];
        self.features.row_axpy(i, scale * r, out);
        0.5 * r * r
    }
}

impl RowData for LeastSquares {
    fn num_rows(&self) -> usize {
        self.targets.len()
    }

    fn row_sq_norm(&self, i: usize) -> f64 {
        self.features.row_sq_norm(i)
    }

    fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(rows),
            targets: rows.iter().map(|&i| self.targets[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularizerKind {
    None,
    /// `weight·‖x‖²`
    L2Scaled,
    /// `weight·‖x‖₁`
    L1,
}

/// Composite term `ψ`, always paired with its proximal map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularizer {
    kind: RegularizerKind,
    weight: f64,
}

impl Regularizer {
    pub fn new(kind: RegularizerKind, weight: f64) -> Result<Self> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::invalid("weight", format!("must be finite and >= 0, got {weight}")));
        }
        Ok(Self { kind, weight })
    }

    pub fn none() -> Self {
        Self {
            kind: RegularizerKind::None,
            weight: 0.0,
        }
    }

    pub fn l2_scaled(weight: f64) -> Result<Self> {
        Self::new(RegularizerKind::L2Scaled, weight)
    }

    pub fn l1(weight: f64) -> Result<Self> {
        Self::new(RegularizerKind::L1, weight)
    }

    pub fn kind(&self) -> RegularizerKind {
        self.kind
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn is_none(&self) -> bool {
        self.kind == RegularizerKind::None || self.weight == 0.0
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self.kind {
            RegularizerKind::None => 0.0,
            RegularizerKind::L2Scaled => self.weight * vector::norm_sq(x),
            RegularizerKind::L1 => self.weight * x.iter().map(|v| v.abs()).sum::<f64>(),
        }
    }

    /// `argmin_y ψ(y) + ‖y − z‖² / (2·step)`
    pub fn prox(&self, z: &[f64], step: f64) -> Result<Vec<f64>> {
        let mut y = z.to_vec();
        self.prox_in_place(&mut y, step)?;
        Ok(y)
    }

    pub fn prox_in_place(&self, z: &mut [f64], step: f64) -> Result<()> {
        if !(step > 0.0) {
            return Err(Error::invalid("step", format!("prox step must be > 0, got {step}")));
        }
        match self.kind {
            RegularizerKind::None => {}
            RegularizerKind::L2Scaled => vector::scale(1.0 / (1.0 + 2.0 * step * self.weight), z),
            RegularizerKind::L1 => {
                let t = step * self.weight;
                for v in z.iter_mut() {
                    *v = v.signum() * (v.abs() - t).max(0.0);
                }
            }
        }
        Ok(())
    }
}

/// Per-row smoothness constants `L_i = 2‖a_i‖²` and their trimmed mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessEstimate {
    /// `L_i` for every row of the input, before trimming.
    pub per_component: Vec<f64>,
    /// Rows that survived trimming, in original order.
    pub kept: Vec<usize>,
    /// Mean of `L_i` over the kept rows.
    pub aggregate: f64,
    pub trim_fraction: f64,
}

/// Computes `L_i = 2‖a_i‖²`, drops the `⌈trim·n⌉` rows with the largest
/// values and returns the estimate together with the reduced data.
///
/// Ties are broken towards dropping the later row.
pub fn estimate_smoothness<T: RowData>(data: &T, trim_fraction: f64) -> Result<(SmoothnessEstimate, T)> {
    if !(0.0..1.0).contains(&trim_fraction) {
        return Err(Error::invalid("trim_fraction", format!("must lie in [0, 1), got {trim_fraction}")));
    }
    let n = data.num_rows();
    let per_component: Vec<f64> = (0..n).map(|i| 2.0 * data.row_sq_norm(i)).collect();
    // Guard against 0.05 * 100 = 5.000000000000001 style rounding.
    let dropped = ((trim_fraction * n as f64) - 1e-9).ceil().max(0.0) as usize;
    if dropped >= n {
        return Err(Error::TrimLeavesNoRows { dropped, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| per_component[b].total_cmp(&per_component[a]).then(b.cmp(&a)));
    let mut kept: Vec<usize> = order[dropped..].to_vec();
    kept.sort_unstable();
    let aggregate = kept.iter().map(|&i| per_component[i]).sum::<f64>() / kept.len() as f64;
    let reduced = data.select_rows(&kept);
    Ok((
        SmoothnessEstimate {
            per_component,
            kept,
            aggregate,
            trim_fraction,
        },
        reduced,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ls(rows: &[Vec<f64>], targets: &[f64]) -> LeastSquares {
        LeastSquares::new(FeatureMatrix::from_dense(rows).unwrap(), targets.to_vec()).unwrap()
    }

    #[test]
    fn least_squares_examples() {
        let p = ls(&[vec![1.0, 0.0]], &[0.0]);
        assert_eq!(p.component(0, &[2.0, 0.0]), (2.0, vec![2.0, 0.0]));

        let p = ls(&[vec![1.0, 1.0]], &[1.0]);
        assert_eq!(p.component(0, &[1.0, 0.0]), (0.0, vec![0.0, 0.0]));

        let p = ls(&[vec![2.0, 0.0]], &[1.0]);
        assert_eq!(p.component(0, &[1.0, 1.0]), (0.5, vec![2.0, 0.0]));

        let p = ls(&[vec![3.0, -1.0]], &[0.0]);
        assert_eq!(p.component(0, &[0.0, 0.0]), (0.0, vec![0.0, 0.0]));
    }

    #[test]
    fn logistic_at_zero_is_uniform_softmax() {
        let a = vec![0.5, -2.0];
        let feats = FeatureMatrix::from_dense(&[a.clone(), a.clone(), a.clone()]).unwrap();
        let model = MulticlassLogistic::new(feats, vec![1, 2, 3], 3).unwrap();
        let x = vec![0.0; 4];
        for i in 0..3 {
            let (v, g) = model.component(i, &x);
            assert!((v - 3f64.ln()).abs() < 1e-15);
            for k in 0..2 {
                let ind = if i == k { 1.0 } else { 0.0 };
                for j in 0..2 {
                    assert!((g[k * 2 + j] - a[j] * (1.0 / 3.0 - ind)).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn logistic_is_stable_for_huge_logits() {
        let feats = FeatureMatrix::from_dense(&[vec![1.0]]).unwrap();
        let model = MulticlassLogistic::new(feats, vec![3], 3).unwrap();
        for x in [[1e4, -1e4], [-1e4, 1e4], [1e4, 1e4], [-1e4, -1e4]] {
            let (v, g) = model.component(0, &x);
            assert!(v.is_finite(), "value at {x:?}");
            assert!(g.iter().all(|v| v.is_finite()));
        }
        let (v, _) = model.component(0, &[1e4, -1e4]);
        assert!((v - 1e4).abs() < 1e-9);
    }

    #[test]
    fn labels_are_validated() {
        let feats = FeatureMatrix::from_dense(&[vec![1.0]]).unwrap();
        assert!(MulticlassLogistic::new(feats.clone(), vec![0], 3).is_err());
        assert!(MulticlassLogistic::new(feats.clone(), vec![4], 3).is_err());
        assert!(MulticlassLogistic::new(feats, vec![1], 1).is_err());
    }

    #[test]
    fn prox_examples() {
        let z = [3.0, 0.5, -3.0];
        assert_eq!(Regularizer::none().prox(&z, 0.7).unwrap(), z.to_vec());
        assert_eq!(Regularizer::l1(2.0).unwrap().prox(&z, 0.5).unwrap(), vec![2.0, 0.0, -2.0]);
        assert_eq!(Regularizer::l2_scaled(1.0).unwrap().prox(&[2.0, 2.0], 0.5).unwrap(), vec![1.0, 1.0]);
        assert!(Regularizer::l1(1.0).unwrap().prox(&z, 0.0).is_err());
        assert!(Regularizer::l1(-1.0).is_err());
    }

    #[test]
    fn smoothness_examples() {
        let single = ls(&[vec![1.0, 1.0]], &[0.0]);
        assert_eq!(estimate_smoothness(&single, 0.0).unwrap().0.aggregate, 4.0);

        let same = ls(&vec![vec![1.0, -2.0]; 7], &[0.0; 7]);
        for trim in [0.0, 0.1, 0.5] {
            assert_eq!(estimate_smoothness(&same, trim).unwrap().0.aggregate, 10.0);
        }

        // L_i = 2 a² = {1, 2, 3, 100}
        let rows: Vec<Vec<f64>> = [1.0f64, 2.0, 3.0, 100.0].iter().map(|l| vec![(l / 2.0).sqrt()]).collect();
        let data = ls(&rows, &[0.0, 1.0, 2.0, 3.0]);
        let (est, reduced) = estimate_smoothness(&data, 0.25).unwrap();
        assert!((est.aggregate - 2.0).abs() < 1e-12);
        assert_eq!(est.kept, vec![0, 1, 2]);
        assert_eq!(reduced.targets(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn trimming_rounds_up_and_rejects_empty() {
        let data = ls(&vec![vec![1.0]; 100], &[0.0; 100]);
        assert_eq!(estimate_smoothness(&data, 0.05).unwrap().0.kept.len(), 95);
        assert_eq!(estimate_smoothness(&data, 0.051).unwrap().0.kept.len(), 94);
        let one = ls(&[vec![1.0]], &[0.0]);
        assert!(matches!(estimate_smoothness(&one, 0.5), Err(Error::TrimLeavesNoRows { .. })));
        assert!(estimate_smoothness(&one, 1.0).is_err());
    }

    #[test]
    fn sparse_rows_reject_bad_columns() {
        assert!(FeatureMatrix::from_sparse_rows(3, &[vec![(3, 1.0)]]).is_err());
        assert!(FeatureMatrix::from_sparse_rows(3, &[vec![(1, 1.0), (1, 2.0)]]).is_err());
        let m = FeatureMatrix::from_sparse_rows(8, &[vec![(6, -1.0), (0, 0.5)]]).unwrap();
        assert_eq!(m.row(0), (&[0usize, 6][..], &[0.5, -1.0][..]));
    }
}
