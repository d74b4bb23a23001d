//! CCA factor regressions and the residual principal-component test for
//! missing factors.
//!
//! Responses are regressed on the first `r` Y-variate scores. If a common
//! factor uncorrelated with the proxies is driving the responses, it
//! survives in the residuals: their first principal component then adds
//! explanatory power to every regression. Idiosyncratic residual structure
//! only helps a few responses, or helps all of them a little.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cca::CcaSolution;
use crate::error::{Error, Result};
use crate::linalg::{center_columns, covariance, sign_normalizer, sorted_symmetric_eigen};
use crate::panel::AlignedPanel;
use crate::regress::{ols, residual_matrix, Design, RegressionFit};

pub const PC1_NAME: &str = "PC1";

/// Retained Y-variate scores used as regressors.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorScores {
    /// `T×r`, columns `Factor1..Factorr`.
    pub scores: DMatrix<f64>,
    pub names: Vec<String>,
    /// Canonical correlations of the retained variates.
    pub correlations: Vec<f64>,
}

impl FactorScores {
    pub fn from_solution(sol: &CcaSolution, r: usize) -> Result<Self> {
        if r == 0 || r > sol.m() {
            return Err(Error::InvalidArgument(format!("cannot retain {r} of {} canonical variates", sol.m())));
        }
        Ok(Self {
            scores: sol.u_scores.columns(0, r).into_owned(),
            names: (1..=r).map(|i| format!("Factor{i}")).collect(),
            correlations: sol.correlations[..r].to_vec(),
        })
    }

    pub fn r(&self) -> usize {
        self.scores.ncols()
    }

    pub fn n_obs(&self) -> usize {
        self.scores.nrows()
    }

    /// Regression design on the factors, with intercept.
    pub fn design(&self) -> Design {
        Design { x: self.scores.clone(), names: self.names.clone(), intercept: true }
    }

    /// The factor rows repeated `times` times, for responses stacked from
    /// several series observed on the same months.
    pub fn stacked(&self, times: usize) -> Self {
        let t = self.n_obs();
        Self {
            scores: DMatrix::from_fn(t * times, self.r(), |i, j| self.scores[(i % t, j)]),
            names: self.names.clone(),
            correlations: self.correlations.clone(),
        }
    }
}

/// One OLS fit per panel column on an intercept and the factors.
pub fn factor_regressions(spreads: &AlignedPanel, factors: &FactorScores) -> Result<Vec<RegressionFit>> {
    let y = spreads.to_matrix()?;
    if y.nrows() != factors.n_obs() {
        return Err(Error::DimensionMismatch(format!(
            "panel has {} rows, factors have {}",
            y.nrows(),
            factors.n_obs()
        )));
    }
    let names = spreads.names();
    let design = factors.design();
    (0..y.ncols())
        .into_par_iter()
        .map(|j| ols(&names[j], &y.column(j).into_owned(), &design))
        .collect()
}

/// First principal component of a residual matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Pc1 {
    /// Length `T`, unit sample variance.
    pub scores: DVector<f64>,
    /// Unit-norm eigenvector; its largest-magnitude entry is positive.
    pub loadings: DVector<f64>,
    /// `λ_1 / Σλ` of the residual covariance.
    pub variance_share: f64,
}

pub fn residual_pc1(residuals: &DMatrix<f64>) -> Result<Pc1> {
    if residuals.ncols() < 2 {
        return Err(Error::InvalidArgument("need at least two residual series".into()));
    }
    if residuals.nrows() < 3 {
        return Err(Error::InsufficientObservations(format!("{} residual rows", residuals.nrows())));
    }
    let centered = center_columns(residuals);
    if centered.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateResiduals);
    }
    let cov = covariance(residuals);
    let (vals, vecs) = sorted_symmetric_eigen(&cov);
    let total: f64 = vals.iter().map(|v| v.max(0.0)).sum();
    let lead = vals[0];
    if !(lead > 0.0) || !(total > 0.0) {
        return Err(Error::DegenerateResiduals);
    }
    let mut loadings = vecs.column(0).into_owned();
    loadings *= sign_normalizer(loadings.as_slice());
    let scores = (&centered * &loadings) / lead.sqrt();
    Ok(Pc1 { scores, loadings, variance_share: (lead / total).min(1.0) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// A gain at least this large counts as strong explanatory power.
    pub strong: f64,
    /// Mean gains at or below this are negligible.
    pub weak: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { strong: 0.30, weak: 0.10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NoMissingFactor,
    MissingFactor,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::NoMissingFactor => "no_missing_factor",
            Verdict::MissingFactor => "missing_factor",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseDelta {
    pub response_name: String,
    pub adj_r2_before: f64,
    pub adj_r2_after: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticReport {
    pub responses: Vec<ResponseDelta>,
    pub mean_delta: f64,
    pub pc1_variance_share: f64,
    pub verdict: Verdict,
    pub thresholds: Thresholds,
    /// The refits with [`PC1_NAME`] appended, in input order.
    pub augmented_fits: Vec<RegressionFit>,
    pub pc1: Pc1,
}

/// Verdict rule: `missing_factor` when every gain is at least
/// `strong`; `no_missing_factor` when the mean gain is at most `weak` or
/// at most `⌈n/3⌉` responses gain more than `strong`; otherwise
/// `inconclusive`.
pub fn classify(deltas: &[f64], thresholds: Thresholds) -> Verdict {
    let n = deltas.len();
    let mean = deltas.iter().sum::<f64>() / n as f64;
    let strong_count = deltas.iter().filter(|&&d| d > thresholds.strong).count();
    if deltas.iter().all(|&d| d >= thresholds.strong) {
        Verdict::MissingFactor
    } else if mean <= thresholds.weak || strong_count <= n.div_ceil(3) {
        Verdict::NoMissingFactor
    } else {
        Verdict::Inconclusive
    }
}

/// Appends the first principal component of the residuals of `fits` to
/// every regression and measures the adjusted-R² gains.
///
/// `designs[i]` must be the design `fits[i]` was estimated on.
pub fn missing_factor_diagnostic(
    fits: &[RegressionFit],
    designs: &[Design],
    thresholds: Thresholds,
) -> Result<DiagnosticReport> {
    if fits.len() < 2 {
        return Err(Error::InvalidArgument("diagnostic needs at least two regressions".into()));
    }
    if fits.len() != designs.len() {
        return Err(Error::DimensionMismatch(format!("{} fits but {} designs", fits.len(), designs.len())));
    }
    for (f, d) in fits.iter().zip(designs) {
        if d.n_obs() != f.n_obs || d.x.ncols() != f.n_predictors() || d.intercept != f.intercept {
            return Err(Error::DimensionMismatch(format!("design does not match fit `{}`", f.response_name)));
        }
    }
    let mut resid = residual_matrix(fits)?;
    // Residuals at rounding level of the response are exact fits.
    for (j, f) in fits.iter().enumerate() {
        let scale = f.response().norm().max(f64::MIN_POSITIVE);
        if f.residuals.norm() <= 1e-10 * scale {
            resid.column_mut(j).fill(0.0);
        }
    }
    let pc1 = residual_pc1(&resid)?;

    let augmented_fits = fits
        .par_iter()
        .zip(designs.par_iter())
        .map(|(f, d)| ols(&f.response_name, &f.response(), &d.with_column(PC1_NAME, &pc1.scores)?))
        .collect::<Result<Vec<_>>>()?;

    let responses: Vec<ResponseDelta> = fits
        .iter()
        .zip(&augmented_fits)
        .map(|(b, a)| ResponseDelta {
            response_name: b.response_name.clone(),
            adj_r2_before: b.adj_r_squared,
            adj_r2_after: a.adj_r_squared,
            delta: a.adj_r_squared - b.adj_r_squared,
        })
        .collect();
    let deltas: Vec<f64> = responses.iter().map(|r| r.delta).collect();
    let mean_delta = deltas.iter().sum::<f64>() / deltas.len() as f64;

    Ok(DiagnosticReport {
        verdict: classify(&deltas, thresholds),
        responses,
        mean_delta,
        pc1_variance_share: pc1.variance_share,
        thresholds,
        augmented_fits,
        pc1,
    })
}
