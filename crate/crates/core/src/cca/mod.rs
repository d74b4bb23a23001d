//! Canonical correlation analysis between two variable sets, with the
//! usual diagnostic tables: eigenvalues of the canonical roots, Wilks'
//! lambda sequential tests, redundancy indices and cross-loadings.
//!
//! Variables are standardized before the decomposition, so every result is
//! invariant to the units of the inputs. The canonical problem is solved by
//! an SVD of the whitened cross-correlation
//! `(R_Y + ridge·I)^{-1/2} R_YZ (R_Z + ridge·I)^{-1/2}`.

mod tables;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{column_moments, correlation, inverse_sqrt, sign_normalizer};

pub use tables::{
    cross_loadings, eigen_table, eigen_table_from_correlations, eigen_table_from_eigenvalues, redundancy, wilks_from_correlations,
    wilks_lambda, EigenRow, RedundancyRow, WilksRow,
};

/// Eigenvalues of a covariance block at or below this fraction of the
/// largest are treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Means and scales used to standardize each variable, plus the ridge.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationRecord {
    pub y_means: Vec<f64>,
    pub y_scales: Vec<f64>,
    pub z_means: Vec<f64>,
    pub z_scales: Vec<f64>,
    pub ridge: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcaSolution {
    pub p: usize,
    pub q: usize,
    pub n_obs: usize,
    /// `ρ_1 ≥ … ≥ ρ_m ≥ 0`, `m = min(p, q)`.
    pub correlations: Vec<f64>,
    /// `p×m`; column `k` maps standardized Y to `U_k`.
    pub a_weights: DMatrix<f64>,
    /// `q×m`; column `k` maps standardized Z to `V_k`.
    pub b_weights: DMatrix<f64>,
    /// `T×m`, unit sample variance per column.
    pub u_scores: DMatrix<f64>,
    /// `T×m`, unit sample variance per column.
    pub v_scores: DMatrix<f64>,
    pub standardization: StandardizationRecord,
}

impl CcaSolution {
    pub fn m(&self) -> usize {
        self.correlations.len()
    }

    /// `λ_k = ρ_k² / (1 − ρ_k²)`.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eigen_table(self)?.into_iter().map(|r| r.eigenvalue).collect())
    }

    /// `100·λ_k / Σλ`.
    pub fn variance_percentages(&self) -> Result<Vec<f64>> {
        Ok(eigen_table(self)?.into_iter().map(|r| r.percentage).collect())
    }

    /// Canonical loadings: correlation of each Y variable with each `U_k`
    /// (`p×m`).
    pub fn y_loadings(&self, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        tables::correlate_with_scores(y, &self.u_scores, self.m())
    }
}

fn standardize(x: &DMatrix<f64>, label: &str) -> Result<(DMatrix<f64>, Vec<f64>, Vec<f64>)> {
    let (means, sds) = column_moments(x);
    if let Some(j) = sds.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::DegenerateSeries(format!("{label} column {} is constant", j + 1)));
    }
    let out = DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - means[j]) / sds[j]);
    Ok((out, means, sds))
}

/// Fits canonical correlations between the columns of `y` (`T×p`) and
/// `z` (`T×q`).
///
/// Sign convention: within each `a_k` the weight of largest magnitude is
/// positive, and `b_k` follows so that `Corr(U_k, V_k) ≥ 0`.
pub fn cca_fit(y: &DMatrix<f64>, z: &DMatrix<f64>, ridge: f64) -> Result<CcaSolution> {
    let (n, p) = y.shape();
    let q = z.ncols();
    if z.nrows() != n {
        return Err(Error::DimensionMismatch(format!("Y has {n} rows, Z has {}", z.nrows())));
    }
    if p == 0 || q == 0 {
        return Err(Error::InvalidArgument("both variable sets need at least one column".into()));
    }
    if n <= p + q {
        return Err(Error::InsufficientObservations(format!("{n} rows for {p} + {q} variables")));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge must be nonnegative, got {ridge}")));
    }
    if y.iter().chain(z.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite values".into()));
    }

    let (ys, y_means, y_scales) = standardize(y, "Y")?;
    let (zs, z_means, z_scales) = standardize(z, "Z")?;
    let denom = n as f64 - 1.0;
    let ryy = ys.transpose() * &ys / denom + DMatrix::identity(p, p) * ridge;
    let rzz = zs.transpose() * &zs / denom + DMatrix::identity(q, q) * ridge;
    let ryz = ys.transpose() * &zs / denom;

    let wy = inverse_sqrt(&ryy, SINGULAR_TOL, "Y")?;
    let wz = inverse_sqrt(&rzz, SINGULAR_TOL, "Z")?;
    let k = &wy * ryz * &wz;

    let svd = k.svd(true, true);
    let u = svd.u.expect("u requested");
    let v = svd.v_t.expect("v_t requested").transpose();
    let m = p.min(q);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]).then(i.cmp(&j)));
    order.truncate(m);

    let mut a_weights = DMatrix::zeros(p, m);
    let mut b_weights = DMatrix::zeros(q, m);
    for (c, &i) in order.iter().enumerate() {
        a_weights.set_column(c, &(&wy * u.column(i)));
        b_weights.set_column(c, &(&wz * v.column(i)));
    }

    let mut u_scores = &ys * &a_weights;
    let mut v_scores = &zs * &b_weights;
    let mut correlations = Vec::with_capacity(m);
    for c in 0..m {
        let su = (u_scores.column(c).norm_squared() / denom).sqrt();
        let sv = (v_scores.column(c).norm_squared() / denom).sqrt();
        let sign = sign_normalizer(a_weights.column(c).as_slice());
        for (w, s) in [(&mut a_weights, su), (&mut b_weights, sv)] {
            w.column_mut(c).scale_mut(sign / s);
        }
        u_scores.column_mut(c).scale_mut(sign / su);
        v_scores.column_mut(c).scale_mut(sign / sv);
        let rho = if ridge == 0.0 {
            svd.singular_values[order[c]]
        } else {
            correlation(u_scores.column(c).as_slice(), v_scores.column(c).as_slice()).unwrap_or(0.0)
        };
        correlations.push(rho.clamp(0.0, 1.0));
    }

    Ok(CcaSolution {
        p,
        q,
        n_obs: n,
        correlations,
        a_weights,
        b_weights,
        u_scores,
        v_scores,
        standardization: StandardizationRecord { y_means, y_scales, z_means, z_scales, ridge },
    })
}
