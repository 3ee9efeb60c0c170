//! Channel primitives: deterministic path gain `β/d^α`, log-normal shadowing,
//! i.i.d. Rayleigh fading matrices, and the zero-forcing effective gain
//! `[(h h⁺)⁻¹_kk]⁻¹`, which is Gamma(N_T − S + 1, 1) distributed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{erlang_cdf, ln_factorial};

/// Gram matrices with a larger 2-norm condition number are treated as
/// singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Large-scale channel: `β` (stored linear), path-loss exponent `α`, and the
/// shadowing spread `σ_s` in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    beta: f64,
    alpha: f64,
    sigma_s: f64,
}

impl ChannelParams {
    pub fn new(beta: f64, alpha: f64, sigma_s: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::param("beta", format!("must be positive (linear), got {beta}")));
        }
        if !(alpha > 2.0 && alpha.is_finite()) {
            return Err(Error::Divergence(format!(
                "path-loss exponent alpha = {alpha}: the interference tail integral diverges unless alpha > 2"
            )));
        }
        if !(sigma_s >= 0.0 && sigma_s.is_finite()) {
            return Err(Error::param("sigma_s", format!("must be non-negative, got {sigma_s}")));
        }
        Ok(ChannelParams { beta, alpha, sigma_s })
    }

    pub fn from_db(beta_db: f64, alpha: f64, sigma_s: f64) -> Result<Self> {
        Self::new(db_to_linear(beta_db), alpha, sigma_s)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn beta_db(&self) -> f64 {
        10.0 * self.beta.log10()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma_s(&self) -> f64 {
        self.sigma_s
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        Self::new(self.beta, alpha, self.sigma_s)
    }

    pub fn with_beta(self, beta: f64) -> Result<Self> {
        Self::new(beta, self.alpha, self.sigma_s)
    }

    pub fn with_sigma_s(self, sigma_s: f64) -> Result<Self> {
        Self::new(self.beta, self.alpha, sigma_s)
    }
}

impl Default for ChannelParams {
    /// Urban macro defaults: β = −31.54 dB, α = 3.8, σ_s = 6 dB.
    fn default() -> Self {
        ChannelParams::from_db(-31.54, 3.8, 6.0).expect("defaults are valid")
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `β / d^α`.
pub fn path_gain(params: &ChannelParams, distance: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::param("distance", format!("must be positive, got {distance}")));
    }
    Ok(params.beta * distance.powf(-params.alpha))
}

/// One shadowing factor `w = 10^{s/10}`, `s ~ N(0, σ_s²)`.
pub fn sample_shadowing<R: Rng + ?Sized>(sigma_s: f64, rng: &mut R) -> f64 {
    if sigma_s == 0.0 {
        return 1.0;
    }
    let s = Normal::new(0.0, sigma_s)
        .expect("sigma_s validated non-negative")
        .sample(rng);
    db_to_linear(s)
}

/// `E(w) = exp((σ_s ln10 / 10)² / 2)`.
pub fn mean_shadowing(sigma_s: f64) -> f64 {
    let s = sigma_s * std::f64::consts::LN_10 / 10.0;
    (0.5 * s * s).exp()
}

/// `S × N_T` small-scale fading matrix: rows are UE antennas, columns BS
/// antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingMatrix(DMatrix<Complex64>);

impl FadingMatrix {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::param("fading matrix", "must be non-empty"));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::param("fading matrix", "entries must be finite"));
        }
        Ok(FadingMatrix(m))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }
}

/// Circularly-symmetric complex Gaussian entries with unit total variance
/// (real and imaginary parts each of variance 1/2).
pub fn sample_fading_matrix<R: Rng + ?Sized>(n_rows: usize, n_cols: usize, rng: &mut R) -> Result<FadingMatrix> {
    if n_rows == 0 || n_cols == 0 {
        return Err(Error::param(
            "fading matrix",
            format!("dimensions must be positive, got {n_rows}x{n_cols}"),
        ));
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let m = DMatrix::from_fn(n_rows, n_cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(scale * re, scale * im)
    });
    Ok(FadingMatrix(m))
}

/// `(H H⁺)⁻¹` through a Cholesky factorisation, refusing ill-conditioned
/// Gram matrices.
pub(crate) fn gram_inverse(h: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    if h.nrows() > h.ncols() {
        return Err(Error::param(
            "channel",
            format!("need at least as many columns as rows, got {}x{}", h.nrows(), h.ncols()),
        ));
    }
    let gram = h * h.adjoint();
    let eig = gram.clone().symmetric_eigenvalues();
    let (lo, hi) = eig
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if !(lo > 0.0) || hi / lo > CONDITION_LIMIT {
        return Err(Error::Numerical(format!(
            "Gram matrix is singular or ill-conditioned (eigenvalues in [{lo:e}, {hi:e}])"
        )));
    }
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Numerical("Cholesky factorisation of the Gram matrix failed".into()))?;
    Ok(chol.inverse())
}

/// Density of the zero-forcing gain: Gamma(N_T − S + 1, 1),
/// `ℓ^{N_T−S} e^{−ℓ} / (N_T − S)!`.
pub fn zf_gain_pdf(ell: f64, n_t: usize, s: usize) -> Result<f64> {
    let k = zf_gain_shape(n_t, s)?;
    if ell < 0.0 {
        return Ok(0.0);
    }
    if k == 1 {
        return Ok((-ell).exp());
    }
    if ell == 0.0 {
        return Ok(0.0);
    }
    let m = (k - 1) as f64;
    Ok((m * ell.ln() - ell - ln_factorial(k - 1)).exp())
}

/// CDF matching [`zf_gain_pdf`].
pub fn zf_gain_cdf(ell: f64, n_t: usize, s: usize) -> Result<f64> {
    let k = zf_gain_shape(n_t, s)?;
    Ok(erlang_cdf(k, ell))
}

/// Gamma shape `N_T − S + 1` of the zero-forcing gain.
pub fn zf_gain_shape(n_t: usize, s: usize) -> Result<u32> {
    if s == 0 || n_t < s {
        return Err(Error::param(
            "antennas",
            format!("need N_T >= S >= 1, got N_T={n_t}, S={s}"),
        ));
    }
    Ok((n_t - s + 1) as u32)
}

/// `[(H H⁺)⁻¹_kk]⁻¹` for one channel draw.
pub fn zf_gain_sample(h: &FadingMatrix, k: usize) -> Result<f64> {
    if k >= h.rows() {
        return Err(Error::param(
            "k",
            format!("subchannel {k} out of range for {} rows", h.rows()),
        ));
    }
    if h.rows() == 1 {
        return Ok(h.0.iter().map(|z| z.norm_sqr()).sum());
    }
    let inv = gram_inverse(&h.0)?;
    Ok(1.0 / inv[(k, k)].re)
}

/// Draws fresh `S × N_T` channels until the Gram matrix is well conditioned
/// and returns the zero-forcing gain of subchannel `k`.
pub fn sample_zf_gain<R: Rng + ?Sized>(n_t: usize, s: usize, k: usize, rng: &mut R) -> Result<f64> {
    zf_gain_shape(n_t, s)?;
    for _ in 0..1000 {
        let h = sample_fading_matrix(s, n_t, rng)?;
        match zf_gain_sample(&h, k) {
            Err(Error::Numerical(msg)) => log::warn!("resampling channel: {msg}"),
            other => return other,
        }
    }
    Err(Error::Numerical(
        "could not draw a well-conditioned channel in 1000 attempts".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_to_infinity, Tolerance};
    use crate::rng::stream;
    use crate::stats::RunningStats;

    #[test]
    fn beta_db_round_trip() {
        let c = ChannelParams::default();
        assert!((c.beta() - 7.0146e-4).abs() < 1e-7, "{}", c.beta());
        assert!((c.beta_db() + 31.54).abs() < 1e-12);
    }

    #[test]
    fn invariants_rejected() {
        assert!(ChannelParams::new(0.0, 3.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, 2.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, 1.9, 1.0).is_err());
        assert!(ChannelParams::new(1.0, 3.0, -1.0).is_err());
    }

    #[test]
    fn path_gain_examples() {
        let c = ChannelParams::default();
        let g = path_gain(&c, 500.0).unwrap();
        // 7.0146e-4 · 500^-3.8
        assert!((g / 3.8897e-14 - 1.0).abs() < 1e-4, "{g:e}");
        assert_eq!(path_gain(&c, 1.0).unwrap(), c.beta());
        let ratio = path_gain(&c, 800.0).unwrap() / path_gain(&c, 400.0).unwrap();
        assert!((ratio - 2f64.powf(-3.8)).abs() < 1e-14);
        assert!(path_gain(&c, 0.0).is_err());
        assert!(path_gain(&c, -3.0).is_err());
    }

    #[test]
    fn path_gain_monotone() {
        let c = ChannelParams::default();
        let mut prev = f64::INFINITY;
        for d in [1.0, 10.0, 100.0, 1e3, 1e4] {
            let g = path_gain(&c, d).unwrap();
            assert!(g < prev);
            prev = g;
        }
        let bigger = c.with_beta(2.0 * c.beta()).unwrap();
        assert!(path_gain(&bigger, 300.0).unwrap() > path_gain(&c, 300.0).unwrap());
    }

    #[test]
    fn shadowing_mean_closed_form() {
        assert_eq!(mean_shadowing(0.0), 1.0);
        assert!((mean_shadowing(6.0) - 2.596960).abs() < 1e-6);
        assert!((mean_shadowing(4.0) - 1.528294).abs() < 1e-6);
        for s in [0.5, 2.0, 9.0] {
            assert!(mean_shadowing(s) > 1.0);
        }
    }

    #[test]
    fn shadowing_samples() {
        let mut rng = stream(4, 4);
        assert!((0..100).all(|_| sample_shadowing(0.0, &mut rng) == 1.0));
        let n = 1_000_000;
        let mut xs: Vec<f64> = (0..n).map(|_| sample_shadowing(6.0, &mut rng)).collect();
        let s: RunningStats = xs.iter().copied().collect();
        assert!((s.mean() / mean_shadowing(6.0) - 1.0).abs() < 0.01, "{}", s.mean());
        xs.sort_by(f64::total_cmp);
        let median = xs[n / 2];
        assert!((median - 1.0).abs() < 0.01, "{median}");
    }

    #[test]
    fn fading_second_moments() {
        let mut rng = stream(8, 0);
        let n = 100_000;
        let s: RunningStats = (0..n)
            .map(|_| sample_fading_matrix(1, 1, &mut rng).unwrap().as_matrix()[(0, 0)].norm_sqr())
            .collect();
        assert!((s.mean() - 1.0).abs() < 0.01, "{}", s.mean());

        // E[hᵏ⁺ hᵏ] over a 1 x 4 row is I₄
        let n_cols = 4;
        let mut acc = DMatrix::<Complex64>::zeros(n_cols, n_cols);
        for _ in 0..n {
            let h = sample_fading_matrix(1, n_cols, &mut rng).unwrap();
            let row = h.as_matrix();
            acc += row.adjoint() * row;
        }
        acc /= Complex64::new(n as f64, 0.0);
        for i in 0..n_cols {
            for j in 0..n_cols {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (acc[(i, j)] - Complex64::new(target, 0.0)).norm() < 0.02,
                    "({i},{j}) = {}",
                    acc[(i, j)]
                );
            }
        }
    }

    #[test]
    fn fading_seeds_differ() {
        let a = sample_fading_matrix(2, 3, &mut stream(1, 0)).unwrap();
        let b = sample_fading_matrix(2, 3, &mut stream(2, 0)).unwrap();
        assert_ne!(a, b);
        assert!(sample_fading_matrix(0, 3, &mut stream(1, 0)).is_err());
    }

    #[test]
    fn gain_pdf_examples() {
        for ell in [0.0, 0.3, 2.0, 7.5] {
            assert!((zf_gain_pdf(ell, 4, 4).unwrap() - (-ell).exp()).abs() < 1e-15);
        }
        assert!(zf_gain_pdf(1.0, 2, 3).is_err());
        let total = integrate_to_infinity(|l| zf_gain_pdf(l, 8, 1).unwrap(), 0.0, Tolerance::relative(1e-10));
        assert!((total.value - 1.0).abs() < 1e-6);
        let mean = integrate_to_infinity(|l| l * zf_gain_pdf(l, 8, 3).unwrap(), 0.0, Tolerance::relative(1e-10));
        assert!((mean.value - 6.0).abs() < 1e-6);
    }

    #[test]
    fn gain_single_row_is_squared_norm() {
        let h = sample_fading_matrix(1, 6, &mut stream(9, 9)).unwrap();
        let direct: f64 = h.as_matrix().iter().map(|z| z.norm_sqr()).sum();
        assert_eq!(zf_gain_sample(&h, 0).unwrap(), direct);
    }

    #[test]
    fn gain_mean_matches_gamma_shape() {
        let mut rng = stream(10, 0);
        let s: RunningStats = (0..100_000)
            .map(|_| sample_zf_gain(8, 4, 2, &mut rng).unwrap())
            .collect();
        // sd of the mean is sqrt(5/1e5) ≈ 0.007
        assert!((s.mean() - 5.0).abs() < 0.03, "{}", s.mean());
    }

    #[test]
    fn singular_channel_is_reported() {
        let row = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        let m = DMatrix::from_fn(2, 2, |_, j| row[j]);
        let h = FadingMatrix::from_matrix(m).unwrap();
        assert!(matches!(zf_gain_sample(&h, 0), Err(Error::Numerical(_))));
    }
}
