//! Ordinary least squares with classical inference, and AIC-driven
//! stepwise selection.

mod stepwise;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use stepwise::{stepwise_aic, StartModel, StepAction, StepwiseStep, StepwiseTrace};

pub const INTERCEPT: &str = "(Intercept)";

/// Reciprocal condition number (of the column-equilibrated design) below
/// which a design is rejected as rank deficient.
pub const RCOND_THRESHOLD: f64 = 1e-10;

/// Predictor matrix, without the intercept column, plus its labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub x: DMatrix<f64>,
    pub names: Vec<String>,
    pub intercept: bool,
}

impl Design {
    pub fn new(x: DMatrix<f64>, names: Vec<String>, intercept: bool) -> Result<Self> {
        if x.ncols() != names.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} predictor columns but {} names",
                x.ncols(),
                names.len()
            )));
        }
        Ok(Self { x, names, intercept })
    }

    /// Intercept-only design with `n` rows.
    pub fn intercept_only(n: usize) -> Self {
        Self { x: DMatrix::zeros(n, 0), names: Vec::new(), intercept: true }
    }

    pub fn n_obs(&self) -> usize {
        self.x.nrows()
    }

    /// Design restricted to the given predictor columns (in that order).
    pub fn subset(&self, cols: &[usize]) -> Self {
        Self {
            x: self.x.select_columns(cols),
            names: cols.iter().map(|&j| self.names[j].clone()).collect(),
            intercept: self.intercept,
        }
    }

    /// Design with one more predictor appended on the right.
    pub fn with_column(&self, name: &str, col: &DVector<f64>) -> Result<Self> {
        if col.len() != self.n_obs() {
            return Err(Error::DimensionMismatch(format!(
                "appended column has {} rows, design has {}",
                col.len(),
                self.n_obs()
            )));
        }
        let x = self.x.clone().insert_column(self.x.ncols(), 0.0);
        let mut x = x;
        x.set_column(self.x.ncols(), col);
        let mut names = self.names.clone();
        names.push(name.to_string());
        Ok(Self { x, names, intercept: self.intercept })
    }

    fn full_matrix(&self) -> DMatrix<f64> {
        if self.intercept {
            self.x.clone().insert_column(0, 1.0)
        } else {
            self.x.clone()
        }
    }

    fn full_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.names.len() + 1);
        if self.intercept {
            names.push(INTERCEPT.to_string());
        }
        names.extend(self.names.iter().cloned());
        names
    }
}

/// Result of one least-squares fit.
///
/// `predictor_names`, `coefficients`, `std_errors` and `t_statistics` are
/// parallel and start with [`INTERCEPT`] when the model has one.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub response_name: String,
    pub predictor_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_statistics: Vec<f64>,
    pub fitted: DVector<f64>,
    pub residuals: DVector<f64>,
    pub rss: f64,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    /// `T·ln(RSS/T) + 2k`, `k` counting every estimated coefficient.
    pub aic: f64,
    pub n_obs: usize,
    pub intercept: bool,
    /// Reciprocal condition number of the column-equilibrated design.
    pub rcond: f64,
}

impl RegressionFit {
    /// Number of predictors excluding the intercept.
    pub fn n_predictors(&self) -> usize {
        self.coefficients.len() - usize::from(self.intercept)
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.predictor_names.iter().position(|n| n == name).map(|i| self.coefficients[i])
    }

    /// The response reconstructed as fitted values plus residuals.
    pub fn response(&self) -> DVector<f64> {
        &self.fitted + &self.residuals
    }
}

/// Akaike information criterion in the constant-free form used throughout.
pub fn aic(rss: f64, n_obs: usize, n_coefficients: usize) -> f64 {
    let n = n_obs as f64;
    n * (rss / n).ln() + 2.0 * n_coefficients as f64
}

/// Least-squares fit of `y` on `design`.
///
/// Solved through an SVD of the column-equilibrated design, which also
/// yields the coefficient covariance `σ²(X'X)^{-1}` and the condition number.
pub fn ols(response_name: &str, y: &DVector<f64>, design: &Design) -> Result<RegressionFit> {
    let n = y.len();
    let p = design.x.ncols();
    let k = p + usize::from(design.intercept);
    if design.n_obs() != n {
        return Err(Error::DimensionMismatch(format!("response has {n} rows, design has {}", design.n_obs())));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("model has no coefficients".into()));
    }
    if n <= p + 1 || n <= k {
        return Err(Error::InsufficientObservations(format!("{n} observations for {p} predictors")));
    }
    if y.iter().chain(design.x.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite values in regression data".into()));
    }

    let a = design.full_matrix();
    let names = design.full_names();
    let scales: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    if let Some(j) = scales.iter().position(|&s| s == 0.0) {
        return Err(Error::RankDeficient { columns: vec![names[j].clone()], rcond: 0.0 });
    }
    let mut scaled = a.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = scaled.svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let sv = &svd.singular_values;
    let s_max = sv.max();
    let (imin, s_min) = sv.argmin();
    let rcond = s_min / s_max;
    if !(rcond >= RCOND_THRESHOLD) {
        let null = v_t.row(imin);
        let peak = null.amax();
        let columns = names
            .iter()
            .zip(null.iter())
            .filter(|(_, w)| w.abs() > 1e-3 * peak)
            .map(|(n, _)| n.clone())
            .collect();
        return Err(Error::RankDeficient { columns, rcond });
    }

    let inv_s = sv.map(|s| 1.0 / s);
    let uty = u.transpose() * y;
    let scaled_beta = v_t.transpose() * uty.component_mul(&inv_s);
    let mut beta: Vec<f64> = scaled_beta.iter().zip(&scales).map(|(b, s)| b / s).collect();

    let constant_response = design.intercept && y.iter().all(|&v| v == y[0]);
    if constant_response {
        beta.iter_mut().for_each(|b| *b = 0.0);
        beta[0] = y[0];
    }

    let beta_vec = DVector::from_column_slice(&beta);
    let fitted = &a * &beta_vec;
    let residuals = y - &fitted;
    let rss = residuals.norm_squared();
    let df = (n - k) as f64;
    let sigma2 = rss / df;

    // (A'A)^{-1} = D^{-1} V Σ^{-2} V' D^{-1}
    let v = v_t.transpose();
    let std_errors: Vec<f64> = (0..k)
        .map(|i| {
            let d: f64 = (0..k).map(|c| (v[(i, c)] * inv_s[c]).powi(2)).sum();
            (sigma2 * d).sqrt() / scales[i]
        })
        .collect();
    let t_statistics = beta
        .iter()
        .zip(&std_errors)
        .map(|(&b, &se)| if b == 0.0 { 0.0 } else { b / se })
        .collect();

    let tss = if design.intercept {
        let mean = y.mean();
        y.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
    } else {
        y.norm_squared()
    };
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };
    let nf = n as f64;
    let adj_r_squared = if design.intercept {
        1.0 - (1.0 - r_squared) * (nf - 1.0) / (nf - p as f64 - 1.0)
    } else {
        1.0 - (1.0 - r_squared) * nf / (nf - p as f64)
    };

    Ok(RegressionFit {
        response_name: response_name.to_string(),
        predictor_names: names,
        coefficients: beta,
        std_errors,
        t_statistics,
        fitted,
        residuals,
        rss,
        r_squared,
        adj_r_squared,
        aic: aic(rss, n, k),
        n_obs: n,
        intercept: design.intercept,
        rcond,
    })
}

/// Stacks the residual vectors of `fits` as columns, in the given order.
pub fn residual_matrix(fits: &[RegressionFit]) -> Result<DMatrix<f64>> {
    let Some(first) = fits.first() else {
        return Err(Error::InvalidArgument("no fits".into()));
    };
    let n = first.n_obs;
    if let Some(f) = fits.iter().find(|f| f.n_obs != n) {
        return Err(Error::DimensionMismatch(format!(
            "fit `{}` has {} observations, expected {n}",
            f.response_name, f.n_obs
        )));
    }
    Ok(DMatrix::from_fn(n, fits.len(), |t, j| fits[j].residuals[t]))
}
