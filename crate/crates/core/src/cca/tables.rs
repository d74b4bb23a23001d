use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::CcaSolution;
use crate::error::{Error, Result};
use crate::linalg::correlation;

/// One row of the canonical roots table.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenRow {
    pub index: usize,
    pub correlation: f64,
    pub squared: f64,
    pub eigenvalue: f64,
    pub percentage: f64,
    pub cumulative: f64,
}

fn finish_rows(pairs: Vec<(f64, f64)>) -> Vec<EigenRow> {
    let total: f64 = pairs.iter().map(|(_, l)| l).sum();
    let mut cumulative = 0.0;
    pairs
        .into_iter()
        .enumerate()
        .map(|(i, (rho, eigenvalue))| {
            let percentage = if total > 0.0 { 100.0 * eigenvalue / total } else { 0.0 };
            cumulative += percentage;
            EigenRow { index: i + 1, correlation: rho, squared: rho * rho, eigenvalue, percentage, cumulative }
        })
        .collect()
}

/// Eigenvalue table from canonical correlations:
/// `λ_k = ρ_k²/(1 − ρ_k²)`, `percentage_k = 100·λ_k/Σλ`, running sum.
pub fn eigen_table_from_correlations(correlations: &[f64]) -> Result<Vec<EigenRow>> {
    let mut pairs = Vec::with_capacity(correlations.len());
    for (i, &rho) in correlations.iter().enumerate() {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidArgument(format!("canonical correlation {rho} outside [0, 1]")));
        }
        if rho == 1.0 {
            return Err(Error::DegenerateCorrelation { index: i + 1 });
        }
        let sq = rho * rho;
        pairs.push((rho, sq / (1.0 - sq)));
    }
    Ok(finish_rows(pairs))
}

/// Eigenvalue table starting from the eigenvalue column itself; the
/// correlations are recovered as `sqrt(λ/(1 + λ))`.
pub fn eigen_table_from_eigenvalues(eigenvalues: &[f64]) -> Result<Vec<EigenRow>> {
    let mut pairs = Vec::with_capacity(eigenvalues.len());
    for &l in eigenvalues {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::InvalidArgument(format!("eigenvalue {l} must be finite and nonnegative")));
        }
        pairs.push(((l / (1.0 + l)).sqrt(), l));
    }
    Ok(finish_rows(pairs))
}

pub fn eigen_table(sol: &CcaSolution) -> Result<Vec<EigenRow>> {
    eigen_table_from_correlations(&sol.correlations)
}

/// Sequential likelihood-ratio test that variates `k..m` carry no
/// correlation, with Rao's F approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct WilksRow {
    pub k: usize,
    pub correlation: f64,
    /// `Λ_k = Π_{i≥k} (1 − ρ_i²)`.
    pub lambda: f64,
    pub f_approx: f64,
    pub num_df: f64,
    pub den_df: f64,
    pub p_value: f64,
}

/// Wilks' lambda rows for canonical correlations of a `p`-by-`q` problem
/// estimated on `n_obs` observations.
///
/// With `p_k = p − k + 1`, `q_k = q − k + 1`:
/// `s = sqrt((p_k²q_k² − 4)/(p_k² + q_k² − 5))` (1 when that is undefined
/// or the denominator is not positive),
/// `df1 = p_k·q_k`, `df2 = s·[(n − 1) − (p + q + 1)/2] − df1/2 + 1`,
/// `F = (1 − Λ^{1/s})/Λ^{1/s} · df2/df1`.
pub fn wilks_from_correlations(correlations: &[f64], p: usize, q: usize, n_obs: usize) -> Result<Vec<WilksRow>> {
    let m = correlations.len();
    if m > p.min(q) {
        return Err(Error::DimensionMismatch(format!("{m} correlations for a {p}x{q} problem")));
    }
    for (i, &rho) in correlations.iter().enumerate() {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidArgument(format!("canonical correlation {rho} outside [0, 1]")));
        }
        if rho == 1.0 {
            return Err(Error::DegenerateCorrelation { index: i + 1 });
        }
    }
    let w = (n_obs as f64 - 1.0) - (p + q + 1) as f64 / 2.0;
    let mut rows = Vec::with_capacity(m);
    for k in 1..=m {
        let lambda: f64 = correlations[k - 1..].iter().map(|r| 1.0 - r * r).product();
        let pk = (p - k + 1) as f64;
        let qk = (q - k + 1) as f64;
        let num = pk * pk * qk * qk - 4.0;
        let den = pk * pk + qk * qk - 5.0;
        let s = if den > 0.0 && num > 0.0 { (num / den).sqrt() } else { 1.0 };
        let num_df = pk * qk;
        let den_df = s * w - num_df / 2.0 + 1.0;
        if !(den_df > 0.0) {
            return Err(Error::InsufficientObservations(format!(
                "Wilks F approximation needs more than {n_obs} observations"
            )));
        }
        let root = lambda.powf(1.0 / s);
        let f_approx = (1.0 - root) / root * den_df / num_df;
        let p_value = if f_approx <= 0.0 {
            1.0
        } else {
            FisherSnedecor::new(num_df, den_df)
                .map_err(|e| Error::InvalidArgument(format!("F distribution: {e}")))?
                .sf(f_approx)
        };
        rows.push(WilksRow { k, correlation: correlations[k - 1], lambda, f_approx, num_df, den_df, p_value });
    }
    Ok(rows)
}

pub fn wilks_lambda(sol: &CcaSolution) -> Result<Vec<WilksRow>> {
    wilks_from_correlations(&sol.correlations, sol.p, sol.q, sol.n_obs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyRow {
    pub index: usize,
    /// Mean over Y variables of the squared loading on `U_k`.
    pub mean_squared_loading: f64,
    /// `ρ_k² · mean_squared_loading`.
    pub redundancy: f64,
}

pub(crate) fn correlate_with_scores(x: &DMatrix<f64>, scores: &DMatrix<f64>, k_max: usize) -> Result<DMatrix<f64>> {
    if x.nrows() != scores.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows, scores have {}",
            x.nrows(),
            scores.nrows()
        )));
    }
    if k_max > scores.ncols() {
        return Err(Error::InvalidArgument(format!("asked for {k_max} variates, only {} exist", scores.ncols())));
    }
    let mut out = DMatrix::zeros(x.ncols(), k_max);
    for j in 0..x.ncols() {
        let xj: Vec<f64> = x.column(j).iter().copied().collect();
        for k in 0..k_max {
            out[(j, k)] = correlation(&xj, scores.column(k).as_slice())
                .ok_or_else(|| Error::DegenerateSeries(format!("column {} is constant", j + 1)))?;
        }
    }
    Ok(out)
}

/// Redundancy of the Y set through each Y variate. `y` may be raw or
/// standardized; loadings are correlations.
pub fn redundancy(sol: &CcaSolution, y: &DMatrix<f64>) -> Result<Vec<RedundancyRow>> {
    if y.ncols() != sol.p {
        return Err(Error::DimensionMismatch(format!("Y has {} columns, solution has p = {}", y.ncols(), sol.p)));
    }
    let loadings = correlate_with_scores(y, &sol.u_scores, sol.m())?;
    Ok((0..sol.m())
        .map(|k| {
            let mean_sq = loadings.column(k).iter().map(|l| l * l).sum::<f64>() / sol.p as f64;
            let rho = sol.correlations[k];
            RedundancyRow { index: k + 1, mean_squared_loading: mean_sq, redundancy: rho * rho * mean_sq }
        })
        .collect())
}

/// `q×k_max` matrix of correlations between each Z variable and the first
/// `k_max` Y-variate scores.
pub fn cross_loadings(sol: &CcaSolution, z: &DMatrix<f64>, k_max: usize) -> Result<DMatrix<f64>> {
    if k_max > sol.m() {
        return Err(Error::InvalidArgument(format!("k_max {k_max} exceeds m = {}", sol.m())));
    }
    correlate_with_scores(z, &sol.u_scores, k_max)
}
