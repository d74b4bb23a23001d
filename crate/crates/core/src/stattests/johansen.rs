use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{inverse_sqrt, sorted_symmetric_eigen};

/// 5% trace critical values indexed by `k − r*` (number of common trends
/// under the null), for 1 through 6.
pub const TRACE_CRITICAL_5PCT: [f64; 6] = [8.18, 17.95, 31.52, 48.28, 70.60, 90.39];

pub const MAX_SERIES: usize = TRACE_CRITICAL_5PCT.len();

#[derive(Debug, Clone, PartialEq)]
pub struct JohansenResult {
    /// Null cointegration ranks `r*`, ordered `k−1, …, 0` (the `r ≤ r*`
    /// rows of the usual table, ending with `r = 0`).
    pub hypotheses: Vec<usize>,
    pub trace_statistics: Vec<f64>,
    pub critical_values_5pct: Vec<f64>,
    pub rejected: Vec<bool>,
    /// Squared canonical correlations of the reduced-rank problem,
    /// descending.
    pub eigenvalues: Vec<f64>,
    pub lag_order: usize,
    pub n_obs: usize,
}

impl JohansenResult {
    /// Human-readable label for hypothesis row `i`, e.g. `r <= 3` or `r = 0`.
    pub fn label(&self, i: usize) -> String {
        match self.hypotheses[i] {
            0 => "r = 0".to_string(),
            r => format!("r <= {r}"),
        }
    }
}

fn residualize(y: &DMatrix<f64>, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let zt = z.transpose();
    let gram = &zt * z;
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::RankDeficient { columns: vec!["lagged differences".into()], rcond: 0.0 })?;
    let coef = chol.solve(&(&zt * y));
    Ok(y - z * coef)
}

/// Johansen trace test on the `T×k` level matrix `levels`.
///
/// The VAR has `lag_order` lags in levels (`lag_order − 1` lagged
/// differences) and an unrestricted intercept. Eigenvalues come from the
/// two-residual canonical form: `Δy_t` and `y_{t−1}` are both regressed on
/// the lagged differences and the intercept, then
/// `S11^{-1/2} S10 S00^{-1} S01 S11^{-1/2}` is diagonalised.
pub fn johansen_trace(levels: &DMatrix<f64>, names: &[String], lag_order: usize) -> Result<JohansenResult> {
    let (t_len, k) = levels.shape();
    if names.len() != k {
        return Err(Error::DimensionMismatch(format!("{k} series but {} names", names.len())));
    }
    if !(2..=MAX_SERIES).contains(&k) {
        return Err(Error::InvalidArgument(format!("Johansen test supports 2 to {MAX_SERIES} series, got {k}")));
    }
    if lag_order == 0 {
        return Err(Error::InvalidArgument("lag order must be at least 1".into()));
    }
    if t_len < 5 * k || t_len <= lag_order + k + 1 {
        return Err(Error::InsufficientObservations(format!("{t_len} rows for {k} series")));
    }
    if levels.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite values".into()));
    }

    let diffs = DMatrix::from_fn(t_len - 1, k, |t, j| levels[(t + 1, j)] - levels[(t, j)]);
    // Levels index t runs over lag_order..t_len; diff row t−1 is Δy_t.
    let n = t_len - lag_order;
    let z0 = DMatrix::from_fn(n, k, |r, j| diffs[(r + lag_order - 1, j)]);
    let zk = DMatrix::from_fn(n, k, |r, j| levels[(r + lag_order - 1, j)]);
    let n_short = 1 + k * (lag_order - 1);
    let z1 = DMatrix::from_fn(n, n_short, |r, c| {
        if c == 0 {
            1.0
        } else {
            let lag = (c - 1) / k + 1;
            let j = (c - 1) % k;
            diffs[(r + lag_order - 1 - lag, j)]
        }
    });

    let r0 = residualize(&z0, &z1)?;
    let r1 = residualize(&zk, &z1)?;
    let nf = n as f64;
    let s00 = r0.transpose() * &r0 / nf;
    let s11 = r1.transpose() * &r1 / nf;
    let s01 = r0.transpose() * &r1 / nf;

    let rank_err = |_| Error::RankDeficient { columns: names.to_vec(), rcond: 0.0 };
    let s11_isqrt = inverse_sqrt(&s11, 1e-10, "levels").map_err(rank_err)?;
    let s00_inv = s00.clone().try_inverse().ok_or(Error::RankDeficient { columns: names.to_vec(), rcond: 0.0 })?;
    let m = &s11_isqrt * s01.transpose() * s00_inv * &s01 * &s11_isqrt;
    let (vals, _) = sorted_symmetric_eigen(&m);
    let eigenvalues: Vec<f64> = vals.iter().map(|&v| v.clamp(0.0, 1.0 - 1e-15)).collect();

    let mut hypotheses = Vec::with_capacity(k);
    let mut trace_statistics = Vec::with_capacity(k);
    let mut critical_values_5pct = Vec::with_capacity(k);
    for r_star in (0..k).rev() {
        let stat = -nf * eigenvalues[r_star..].iter().map(|l| (1.0 - l).ln()).sum::<f64>();
        hypotheses.push(r_star);
        trace_statistics.push(stat.max(0.0));
        critical_values_5pct.push(TRACE_CRITICAL_5PCT[k - r_star - 1]);
    }
    let rejected = trace_statistics.iter().zip(&critical_values_5pct).map(|(s, c)| s > c).collect();

    Ok(JohansenResult {
        hypotheses,
        trace_statistics,
        critical_values_5pct,
        rejected,
        eigenvalues,
        lag_order,
        n_obs: n,
    })
}
