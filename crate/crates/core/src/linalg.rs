//! Small dense helpers shared by the statistical modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Column means and sample standard deviations (`n − 1` denominator).
pub fn column_moments(x: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = x.nrows() as f64;
    let means: Vec<f64> = x.column_iter().map(|c| c.sum() / n).collect();
    let sds = x
        .column_iter()
        .zip(&means)
        .map(|(c, m)| (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
        .collect();
    (means, sds)
}

pub fn center_columns(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (means, _) = column_moments(x);
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] - means[j])
}

/// Sample covariance of the columns of `x`.
pub fn covariance(x: &DMatrix<f64>) -> DMatrix<f64> {
    let c = center_columns(x);
    (c.transpose() * &c) / (x.nrows() as f64 - 1.0)
}

/// Pearson correlation of two equally long slices; `None` when either has
/// zero variance.
pub fn correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation matrix between the columns of `a` and the columns of `b`.
pub fn cross_correlation(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let cols_a: Vec<Vec<f64>> = a.column_iter().map(|c| c.iter().copied().collect()).collect();
    let cols_b: Vec<Vec<f64>> = b.column_iter().map(|c| c.iter().copied().collect()).collect();
    let mut out = DMatrix::zeros(a.ncols(), b.ncols());
    for (i, ca) in cols_a.iter().enumerate() {
        for (j, cb) in cols_b.iter().enumerate() {
            out[(i, j)] = correlation(ca, cb)?;
        }
    }
    Some(out)
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// descending order (eigenvectors as matching columns).
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let values = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `S^{-1/2}` of a symmetric positive definite matrix via its
/// eigen-decomposition. Eigenvalues at or below `tol · λ_max` are treated
/// as singular.
pub fn inverse_sqrt(s: &DMatrix<f64>, tol: f64, label: &'static str) -> Result<DMatrix<f64>> {
    let (vals, vecs) = sorted_symmetric_eigen(s);
    let max = vals.iter().copied().fold(0.0_f64, f64::max);
    if max <= 0.0 || vals.iter().any(|&v| v <= tol * max) {
        return Err(Error::SingularCovariance(label));
    }
    let d = DMatrix::from_diagonal(&vals.map(|v| 1.0 / v.sqrt()));
    Ok(&vecs * d * vecs.transpose())
}

/// Flips the sign of a vector so its largest-magnitude entry is positive
/// (first such entry on ties). Returns the sign applied.
pub fn sign_normalizer(v: &[f64]) -> f64 {
    let mut best = 0.0_f64;
    let mut sign = 1.0;
    for &x in v {
        if x.abs() > best.abs() {
            best = x;
        }
    }
    if best < 0.0 {
        sign = -1.0;
    }
    sign
}
