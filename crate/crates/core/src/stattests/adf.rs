use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regress::{ols, Design};

/// Deterministic terms in the ADF regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionKind {
    Constant,
    ConstantTrend,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdfResult {
    pub statistic: f64,
    /// Interpolated from the Dickey–Fuller tables, clamped to `[0.01, 0.99]`.
    pub p_value: f64,
    pub lag_order: usize,
    pub regression_kind: RegressionKind,
    /// Observations in the test regression.
    pub n_obs: usize,
}

pub const P_VALUE_FLOOR: f64 = 0.01;
pub const P_VALUE_CEIL: f64 = 0.99;

const TABLE_SIZES: [f64; 6] = [25.0, 50.0, 100.0, 250.0, 500.0, 100_000.0];
const TABLE_PROBS: [f64; 8] = [0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99];

// Fuller's quantiles of the tau statistic; rows follow TABLE_SIZES,
// columns TABLE_PROBS.
#[allow(clippy::approx_constant)]
const TAU_CONSTANT: [[f64; 8]; 6] = [
    [-3.75, -3.33, -3.00, -2.62, -0.37, 0.00, 0.34, 0.72],
    [-3.58, -3.22, -2.93, -2.60, -0.40, -0.03, 0.29, 0.66],
    [-3.51, -3.17, -2.89, -2.58, -0.42, -0.05, 0.26, 0.63],
    [-3.46, -3.14, -2.88, -2.57, -0.42, -0.06, 0.24, 0.62],
    [-3.44, -3.13, -2.87, -2.57, -0.43, -0.07, 0.24, 0.61],
    [-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60],
];

const TAU_TREND: [[f64; 8]; 6] = [
    [-4.38, -3.95, -3.60, -3.24, -1.14, -0.80, -0.50, -0.15],
    [-4.15, -3.80, -3.50, -3.18, -1.19, -0.87, -0.58, -0.24],
    [-4.04, -3.73, -3.45, -3.15, -1.22, -0.90, -0.62, -0.28],
    [-3.99, -3.69, -3.43, -3.13, -1.23, -0.92, -0.64, -0.31],
    [-3.98, -3.68, -3.42, -3.13, -1.24, -0.93, -0.65, -0.32],
    [-3.96, -3.66, -3.41, -3.12, -1.25, -0.94, -0.66, -0.33],
];

/// `floor((T − 1)^{1/3})`.
pub fn default_lag_order(len: usize) -> usize {
    ((len.saturating_sub(1)) as f64).cbrt().floor() as usize
}

/// Piecewise-linear interpolation with the end values held constant
/// outside `xs`. `xs` must be nondecreasing.
fn interp_clamped(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let i = xs.windows(2).position(|w| x >= w[0] && x <= w[1]).unwrap();
    let (x0, x1, y0, y1) = (xs[i], xs[i + 1], ys[i], ys[i + 1]);
    if x1 == x0 {
        return y0;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Dickey–Fuller p-value for a statistic at sample size `n`.
pub fn adf_p_value(statistic: f64, n: usize, kind: RegressionKind) -> f64 {
    let table = match kind {
        RegressionKind::Constant => &TAU_CONSTANT,
        RegressionKind::ConstantTrend => &TAU_TREND,
    };
    let quantiles: Vec<f64> = (0..TABLE_PROBS.len())
        .map(|c| {
            let col: Vec<f64> = table.iter().map(|row| row[c]).collect();
            interp_clamped(&TABLE_SIZES, &col, n as f64)
        })
        .collect();
    interp_clamped(&quantiles, &TABLE_PROBS, statistic).clamp(P_VALUE_FLOOR, P_VALUE_CEIL)
}

/// Augmented Dickey–Fuller test.
///
/// Regresses `Δy_t` on `y_{t−1}`, the deterministic terms and `lag`
/// lagged differences; the statistic is the t-ratio on `y_{t−1}`.
/// `lag_order` defaults to [`default_lag_order`].
pub fn adf_test(series: &[f64], lag_order: Option<usize>, kind: RegressionKind) -> Result<AdfResult> {
    let len = series.len();
    let lag = lag_order.unwrap_or_else(|| default_lag_order(len));
    if len < lag + 10 {
        return Err(Error::InsufficientObservations(format!(
            "ADF with {lag} lags needs at least {} observations, got {len}",
            lag + 10
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in series".into()));
    }
    if series.iter().all(|&v| v == series[0]) {
        return Err(Error::DegenerateSeries("series has zero variance".into()));
    }

    let diffs: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let rows: Vec<usize> = (lag..diffs.len()).collect();
    let n = rows.len();
    let trend = kind == RegressionKind::ConstantTrend;
    let p = 1 + usize::from(trend) + lag;

    let mut names = vec!["level_lag1".to_string()];
    if trend {
        names.push("trend".into());
    }
    names.extend((1..=lag).map(|l| format!("diff_lag{l}")));

    let x = DMatrix::from_fn(n, p, |r, c| {
        let i = rows[r];
        match (c, trend) {
            (0, _) => series[i],
            (1, true) => (i + 1) as f64,
            (c, _) => diffs[i - (c - usize::from(trend))],
        }
    });
    let y = DVector::from_iterator(n, rows.iter().map(|&i| diffs[i]));
    let design = Design::new(x, names, true)?;
    let fit = ols("diff", &y, &design).map_err(|e| match e {
        Error::RankDeficient { .. } => Error::DegenerateSeries("ADF regression is rank deficient".into()),
        other => other,
    })?;
    let statistic = fit.t_statistics[1];
    Ok(AdfResult {
        statistic,
        p_value: adf_p_value(statistic, diffs.len(), kind),
        lag_order: lag,
        regression_kind: kind,
        n_obs: n,
    })
}
