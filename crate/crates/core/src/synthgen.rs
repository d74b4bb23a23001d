//! Seeded generator for linear latent factor models with planted structure.
//!
//! Responses follow `y_t = α + B1 f1_t + B2 f2_t + u_t` where the proxied
//! factors are `f1_t = Θ' z_t + v_t`, the missing factors `f2_t` are
//! independent of the proxies `z_t`, and `u_t` has diagonal covariance.
//! All innovations are Gaussian: `z`, `f2` standard, `v` with scale
//! `proxy_noise_scale`, `u_j` with variance `idio_variances[j]`.

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::sorted_symmetric_eigen;

#[derive(Debug, Clone, PartialEq)]
pub struct FactorModelSpec {
    /// Intercepts, length `n`.
    pub alpha: Vec<f64>,
    /// `n×r` loadings on the proxied factors.
    pub b1: DMatrix<f64>,
    /// `n×(m−r)` loadings on the missing factors.
    pub b2: DMatrix<f64>,
    /// `k×r` projection of the proxied factors on the proxies.
    pub theta: DMatrix<f64>,
    /// Standard deviation of the projection error `v`.
    pub proxy_noise_scale: f64,
    /// Diagonal of `Var(u)`, length `n`.
    pub idio_variances: Vec<f64>,
    /// Number of time periods to draw.
    pub t: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    /// `T×n` responses.
    pub y: DMatrix<f64>,
    /// `T×k` proxies.
    pub z: DMatrix<f64>,
    pub true_f1: DMatrix<f64>,
    pub true_f2: DMatrix<f64>,
    pub true_u: DMatrix<f64>,
    /// Projection errors `f1 − Θ'z`.
    pub true_v: DMatrix<f64>,
}

impl FactorModelSpec {
    pub fn n(&self) -> usize {
        self.b1.nrows()
    }

    pub fn r(&self) -> usize {
        self.b1.ncols()
    }

    pub fn m_minus_r(&self) -> usize {
        self.b2.ncols()
    }

    pub fn k(&self) -> usize {
        self.theta.nrows()
    }

    /// Checks shapes and value ranges. Zero idiosyncratic variances are
    /// allowed here (the noiseless limit); see [`Self::assumption_violations`].
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if n == 0 || self.r() == 0 || self.k() == 0 {
            return bad("n, r and k must be positive".into());
        }
        if self.alpha.len() != n {
            return bad(format!("alpha has length {}, expected n = {n}", self.alpha.len()));
        }
        if self.idio_variances.len() != n {
            return bad(format!("idio_variances has length {}, expected n = {n}", self.idio_variances.len()));
        }
        if self.b2.nrows() != n {
            return bad(format!("B2 has {} rows, expected n = {n}", self.b2.nrows()));
        }
        if self.theta.ncols() != self.r() {
            return bad(format!("Theta has {} columns, expected r = {}", self.theta.ncols(), self.r()));
        }
        if self.t < 2 {
            return bad("T must be at least 2".into());
        }
        let finite = self
            .alpha
            .iter()
            .chain(self.b1.iter())
            .chain(self.b2.iter())
            .chain(self.theta.iter())
            .chain(&self.idio_variances)
            .all(|v| v.is_finite());
        if !finite || !self.proxy_noise_scale.is_finite() {
            return bad("non-finite parameter".into());
        }
        if self.proxy_noise_scale < 0.0 || self.idio_variances.iter().any(|&v| v < 0.0) {
            return bad("noise scales must be nonnegative".into());
        }
        Ok(())
    }

    /// Model assumptions the parameters violate: full column rank of the
    /// loading blocks and strictly positive idiosyncratic variances.
    pub fn assumption_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if rank(&self.b1) != self.r() {
            out.push(format!("rank(B1) < r = {}", self.r()));
        }
        if self.m_minus_r() > 0 && rank(&self.b2) != self.m_minus_r() {
            out.push(format!("rank(B2) < m - r = {}", self.m_minus_r()));
        }
        if self.idio_variances.iter().any(|&v| v <= 0.0) {
            out.push("idiosyncratic variances must be positive".into());
        }
        out
    }
}

fn rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    sv.iter().filter(|&&s| s > 1e-10 * max.max(1e-300)).count()
}

/// Draws a dataset. Identical specs give bit-identical output.
pub fn generate(spec: &FactorModelSpec) -> Result<SyntheticDataset> {
    spec.validate()?;
    let (n, r, m2, k, t) = (spec.n(), spec.r(), spec.m_minus_r(), spec.k(), spec.t);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut z = DMatrix::zeros(t, k);
    let mut v = DMatrix::zeros(t, r);
    let mut f2 = DMatrix::zeros(t, m2);
    let mut u = DMatrix::zeros(t, n);
    let idio_sd: Vec<f64> = spec.idio_variances.iter().map(|v| v.sqrt()).collect();
    for i in 0..t {
        for j in 0..k {
            z[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
        for j in 0..r {
            v[(i, j)] = spec.proxy_noise_scale * rng.sample::<f64, _>(StandardNormal);
        }
        for j in 0..m2 {
            f2[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
        for j in 0..n {
            u[(i, j)] = idio_sd[j] * rng.sample::<f64, _>(StandardNormal);
        }
    }
    let f1 = &z * &spec.theta + &v;
    let mut y = &f1 * spec.b1.transpose() + &f2 * spec.b2.transpose() + &u;
    for (j, a) in spec.alpha.iter().enumerate() {
        y.column_mut(j).add_scalar_mut(*a);
    }
    Ok(SyntheticDataset { y, z, true_f1: f1, true_f2: f2, true_u: u, true_v: v })
}

/// Exact population covariance blocks `(Σ_Y, Σ_Z, Σ_YZ)` implied by a spec.
pub fn population_covariance(spec: &FactorModelSpec) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    spec.validate()?;
    let r = spec.r();
    let s2 = spec.proxy_noise_scale * spec.proxy_noise_scale;
    let sigma_f1 = spec.theta.transpose() * &spec.theta + DMatrix::identity(r, r) * s2;
    let sigma_y = &spec.b1 * sigma_f1 * spec.b1.transpose()
        + &spec.b2 * spec.b2.transpose()
        + DMatrix::from_diagonal(&DVector::from_column_slice(&spec.idio_variances));
    let sigma_z = DMatrix::identity(spec.k(), spec.k());
    let sigma_yz = &spec.b1 * spec.theta.transpose();
    Ok((sigma_y, sigma_z, sigma_yz))
}

/// Population canonical correlations, descending, `min(n, k)` of them.
///
/// Uses Cholesky whitening of `Σ_Y` and the symmetric eigenproblem
/// `L^{-1} Σ_YZ Σ_Z^{-1} Σ_ZY L^{-T}`, independent of the sample route in
/// [`crate::cca::cca_fit`].
pub fn population_cca(spec: &FactorModelSpec) -> Result<Vec<f64>> {
    let (sigma_y, sigma_z, sigma_yz) = population_covariance(spec)?;
    let singular = || {
        Error::InvalidSpec("population covariance of Y is singular; use nonzero idio_variances".into())
    };
    let chol = sigma_y.cholesky().ok_or_else(singular)?;
    let l = chol.l();
    let lower = l.solve_lower_triangular(&sigma_yz).ok_or_else(singular)?;
    let z_inv = sigma_z.try_inverse().ok_or_else(singular)?;
    let m = &lower * z_inv * lower.transpose();
    let (vals, _) = sorted_symmetric_eigen(&m);
    let count = spec.n().min(spec.k());
    Ok(vals.iter().take(count).map(|v| v.clamp(0.0, 1.0).sqrt()).collect())
}

/// Parameter draw used by the preset scenarios: loadings of magnitude in
/// `[lo, hi]` with random signs.
fn loading_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let mag = lo + (hi - lo) * rng.random::<f64>();
        if rng.random::<bool>() { mag } else { -mag }
    })
}

/// Shape of a randomly parameterised spec.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecShape {
    pub n: usize,
    pub r: usize,
    pub m_minus_r: usize,
    pub k: usize,
    pub t: usize,
    pub proxy_noise_scale: f64,
    pub idio_variance: f64,
    /// Magnitude range of `B1` entries.
    pub b1_range: (f64, f64),
    /// Magnitude range of `B2` entries.
    pub b2_range: (f64, f64),
}

impl FactorModelSpec {
    /// Random parameters from `param_seed`: `B1` and `B2` entries with
    /// magnitudes uniform in the shape's ranges and random signs, `Θ`
    /// Gaussian with variance `1/k` (so each proxied factor has variance
    /// near `1 + proxy_noise_scale²`), intercepts in [0, 10]. `seed` drives
    /// the data draw.
    pub fn random(shape: SpecShape, param_seed: u64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(param_seed);
        let alpha = (0..shape.n).map(|_| 10.0 * rng.random::<f64>()).collect();
        let b1 = loading_matrix(&mut rng, shape.n, shape.r, shape.b1_range.0, shape.b1_range.1);
        let b2 = loading_matrix(&mut rng, shape.n, shape.m_minus_r, shape.b2_range.0, shape.b2_range.1);
        let theta_sd = 1.0 / (shape.k as f64).sqrt();
        let theta = DMatrix::from_fn(shape.k, shape.r, |_, _| theta_sd * rng.sample::<f64, _>(StandardNormal));
        Self {
            alpha,
            b1,
            b2,
            theta,
            proxy_noise_scale: shape.proxy_noise_scale,
            idio_variances: vec![shape.idio_variance; shape.n],
            t: shape.t,
            seed,
        }
    }

    /// Desk-scale default: 12 responses, 10 proxies, 3 proxied factors,
    /// no missing factor, 63 periods.
    pub fn desk_default(seed: u64) -> Self {
        Self::random(DESK_DEFAULT, DESK_PARAM_SEED, seed)
    }

    /// Six responses fully explained by three proxied factors plus
    /// idiosyncratic noise.
    pub fn scenario_a(seed: u64) -> Self {
        Self::random(SCENARIO_A, SCENARIO_PARAM_SEED, seed)
    }

    /// As [`Self::scenario_a`] with one extra factor, independent of the
    /// proxies, loading on all six responses.
    pub fn scenario_b(seed: u64) -> Self {
        Self::random(SCENARIO_B, SCENARIO_PARAM_SEED, seed)
    }
}

const SCENARIO_PARAM_SEED: u64 = 7;
const DESK_PARAM_SEED: u64 = 2016;

pub const DESK_DEFAULT: SpecShape = SpecShape {
    n: 12,
    r: 3,
    m_minus_r: 0,
    k: 10,
    t: 63,
    proxy_noise_scale: 0.3,
    idio_variance: 0.2,
    b1_range: (0.5, 1.5),
    b2_range: (1.0, 1.5),
};

pub const SCENARIO_A: SpecShape = SpecShape {
    n: 6,
    r: 3,
    m_minus_r: 0,
    k: 5,
    t: 240,
    proxy_noise_scale: 0.3,
    idio_variance: 0.1,
    b1_range: (0.5, 1.0),
    b2_range: (1.5, 2.0),
};

pub const SCENARIO_B: SpecShape = SpecShape { m_minus_r: 1, ..SCENARIO_A };
