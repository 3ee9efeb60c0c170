//! Zero-forcing multi-user downlink: precoder, power split, per-subchannel
//! capacity and spectral efficiency of a user-equipment group (UEG).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::channel::{gram_inverse, path_gain, sample_fading_matrix, zf_gain_shape, ChannelParams, FadingMatrix};
use crate::error::{Error, Result};
use crate::stats::{Estimate, RunningStats};

/// `N_T` transmit antennas at the BS serving `S` single-antenna UEs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntennaConfig {
    n_t: usize,
    s: usize,
}

impl AntennaConfig {
    pub fn new(n_t: usize, s: usize) -> Result<Self> {
        zf_gain_shape(n_t, s)?;
        Ok(AntennaConfig { n_t, s })
    }

    /// `N_T = S`, the full-load configuration.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Shape `N_T − S + 1` of the Gamma-distributed zero-forcing gain.
    pub fn gain_shape(&self) -> u32 {
        (self.n_t - self.s + 1) as u32
    }
}

/// Large-scale SINR environment factor `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SinrFactor(f64);

impl SinrFactor {
    pub fn new(xi: f64) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::param("xi", format!("must be positive and finite, got {xi}")));
        }
        Ok(SinrFactor(xi))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Precoder `F = H⁺ (H H⁺)⁻¹`, so that `H F = I_S`.
pub fn zf_precoder(h: &FadingMatrix) -> Result<DMatrix<Complex64>> {
    let h = h.as_matrix();
    let inv = gram_inverse(h)?;
    Ok(h.adjoint() * inv)
}

/// Transmit power needed to deliver the per-stream received powers `Q_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TxPower {
    pub total: f64,
    pub per_stream: Vec<f64>,
}

/// `P_k = Q_k (H H⁺)⁻¹_kk` and their sum.
pub fn tx_power(h: &FadingMatrix, rx_power: &[f64]) -> Result<TxPower> {
    if rx_power.len() != h.rows() {
        return Err(Error::param(
            "rx_power",
            format!("expected {} per-stream powers, got {}", h.rows(), rx_power.len()),
        ));
    }
    if let Some(q) = rx_power.iter().find(|q| !(**q >= 0.0 && q.is_finite())) {
        return Err(Error::param(
            "rx_power",
            format!("powers must be non-negative, got {q}"),
        ));
    }
    let inv = gram_inverse(h.as_matrix())?;
    let per_stream: Vec<f64> = rx_power.iter().enumerate().map(|(k, q)| q * inv[(k, k)].re).collect();
    Ok(TxPower {
        total: per_stream.iter().sum(),
        per_stream,
    })
}

/// Large-scale terms of one subchannel: path loss at `x_off`, the shadowing
/// realisation `w` of the serving link and the average interference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub channel: ChannelParams,
    pub x_off: f64,
    pub shadowing: f64,
    pub i_avg: f64,
}

impl LinkBudget {
    pub fn new(channel: ChannelParams, x_off: f64, shadowing: f64, i_avg: f64) -> Result<Self> {
        if !(i_avg > 0.0 && i_avg.is_finite()) {
            return Err(Error::param(
                "i_avg",
                format!("average interference must be positive, got {i_avg}"),
            ));
        }
        if !(shadowing > 0.0 && shadowing.is_finite()) {
            return Err(Error::param("shadowing", format!("must be positive, got {shadowing}")));
        }
        path_gain(&channel, x_off)?;
        Ok(LinkBudget {
            channel,
            x_off,
            shadowing,
            i_avg,
        })
    }

    /// `β w / (‖x_off‖^α I_avg)`: received SIR per Watt at unit fading gain.
    pub fn sir_per_watt(&self) -> f64 {
        let g = path_gain(&self.channel, self.x_off).expect("validated in LinkBudget::new");
        g * self.shadowing / self.i_avg
    }
}

/// `S B_W log₂(1 + P β w ‖x_off‖^{−α} G / I_avg)` in bits/s.
pub fn subchannel_capacity(cfg: AntennaConfig, b_w: f64, p_ik: f64, link: &LinkBudget, gain: f64) -> Result<f64> {
    if !(b_w > 0.0) {
        return Err(Error::param("b_w", format!("bandwidth must be positive, got {b_w}")));
    }
    if !(gain >= 0.0) {
        return Err(Error::param("gain", format!("must be non-negative, got {gain}")));
    }
    if !(p_ik >= 0.0) {
        return Err(Error::param("p_ik", format!("must be non-negative, got {p_ik}")));
    }
    let sir = p_ik * link.sir_per_watt() * gain;
    Ok(cfg.s as f64 * b_w * sir.ln_1p() / std::f64::consts::LN_2)
}

/// `ξ = P S β w ‖x_off‖^{−α} / I_avg`.
pub fn sinr_factor(p_ik: f64, cfg: AntennaConfig, link: &LinkBudget) -> Result<SinrFactor> {
    SinrFactor::new(p_ik * cfg.s as f64 * link.sir_per_watt())
}

fn se_term(cfg: AntennaConfig, xi: SinrFactor, gain: f64) -> f64 {
    (xi.0 / cfg.s as f64 * gain).ln_1p() / std::f64::consts::LN_2
}

/// Monte Carlo spectral efficiency in bits/s/Hz using the Gamma law of the
/// zero-forcing gain: `S · E log₂(1 + (ξ/S) G)`.
pub fn spectral_efficiency_mc<R: Rng + ?Sized>(
    cfg: AntennaConfig,
    xi: SinrFactor,
    draws: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if draws == 0 {
        return Err(Error::param("draws", "need at least one draw"));
    }
    let gamma = Gamma::new(cfg.gain_shape() as f64, 1.0).expect("positive shape");
    let s = cfg.s as f64;
    let stats: RunningStats = (0..draws).map(|_| s * se_term(cfg, xi, gamma.sample(rng))).collect();
    Ok(stats.estimate())
}

/// Same estimator from explicit `S × N_T` channel matrices, summing
/// `log₂(1 + (ξ/S) G_k)` over all subchannels of each draw.
pub fn spectral_efficiency_matrix_mc<R: Rng + ?Sized>(
    cfg: AntennaConfig,
    xi: SinrFactor,
    draws: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if draws == 0 {
        return Err(Error::param("draws", "need at least one draw"));
    }
    let mut stats = RunningStats::new();
    while stats.count() < draws as u64 {
        let h = sample_fading_matrix(cfg.s, cfg.n_t, rng)?;
        let inv = match gram_inverse(h.as_matrix()) {
            Ok(inv) => inv,
            Err(Error::Numerical(msg)) => {
                log::warn!("resampling channel: {msg}");
                continue;
            }
            Err(e) => return Err(e),
        };
        stats.push((0..cfg.s).map(|k| se_term(cfg, xi, 1.0 / inv[(k, k)].re)).sum());
    }
    Ok(stats.estimate())
}

/// Jensen upper bound `S log₂(1 + (ξ/S)(N_T − S + 1))`.
pub fn spectral_efficiency_bound(cfg: AntennaConfig, xi: SinrFactor) -> f64 {
    cfg.s as f64 * se_term(cfg, xi, cfg.gain_shape() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::zf_gain_pdf;
    use crate::quad::{integrate_to_infinity, Tolerance};
    use crate::rng::stream;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_residual(h: &FadingMatrix, f: &DMatrix<Complex64>) -> f64 {
        let hf = h.as_matrix() * f;
        let eye = DMatrix::<Complex64>::identity(h.rows(), h.rows());
        (hf - eye).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    // E log2(1 + a G), G ~ Gamma(k, 1), by quadrature
    fn gamma_log_oracle(a: f64, n_t: usize, s: usize) -> f64 {
        let f = |g: f64| (a * g).ln_1p() / std::f64::consts::LN_2 * zf_gain_pdf(g, n_t, s).unwrap();
        integrate_to_infinity(f, 0.0, Tolerance::relative(1e-10)).value
    }

    #[test]
    fn config_invariants() {
        assert!(AntennaConfig::new(4, 5).is_err());
        assert!(AntennaConfig::new(4, 0).is_err());
        assert_eq!(AntennaConfig::new(8, 3).unwrap().gain_shape(), 6);
        assert!(SinrFactor::new(0.0).is_err());
        assert!(SinrFactor::new(-1.0).is_err());
    }

    #[test]
    fn scalar_precoder() {
        let h = FadingMatrix::from_matrix(DMatrix::from_element(1, 1, c(2.0, 0.0))).unwrap();
        let f = zf_precoder(&h).unwrap();
        assert!((f[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn unitary_precoder_is_adjoint() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(0.0, s), c(0.0, s), c(s, 0.0)]);
        let h = FadingMatrix::from_matrix(m.clone()).unwrap();
        let f = zf_precoder(&h).unwrap();
        assert!((f - m.adjoint()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn random_precoder_residual() {
        let mut rng = stream(3, 0);
        let h = sample_fading_matrix(2, 4, &mut rng).unwrap();
        assert!(max_residual(&h, &zf_precoder(&h).unwrap()) < 1e-10);
    }

    #[test]
    fn rank_deficient_channel_is_numerical_error() {
        let row = [c(1.0, 0.0), c(0.5, -0.5), c(0.0, 1.0)];
        let m = DMatrix::from_fn(2, 3, |_, j| row[j]);
        let h = FadingMatrix::from_matrix(m).unwrap();
        assert!(matches!(zf_precoder(&h), Err(Error::Numerical(_))));
        assert!(matches!(tx_power(&h, &[1.0, 1.0]), Err(Error::Numerical(_))));
    }

    #[test]
    fn single_stream_power() {
        let m = DMatrix::from_row_slice(1, 3, &[c(1.0, 1.0), c(0.0, 2.0), c(-1.0, 0.0)]);
        let h = FadingMatrix::from_matrix(m).unwrap();
        let p = tx_power(&h, &[3.5]).unwrap();
        assert!((p.total - 3.5 / 7.0).abs() < 1e-14);
        assert_eq!(tx_power(&h, &[0.0]).unwrap().total, 0.0);
    }

    #[test]
    fn tx_power_matches_precoder_column_norms() {
        let mut rng = stream(4, 0);
        let h = sample_fading_matrix(2, 4, &mut rng).unwrap();
        let q = [1.0, 1.0];
        let f = zf_precoder(&h).unwrap();
        // x = F diag(√Q) s with unit-power streams: E‖x‖² = Σ_k Q_k ‖F_k‖²
        let direct: f64 = (0..2).map(|k| q[k] * f.column(k).norm_squared()).sum();
        let p = tx_power(&h, &q).unwrap();
        assert!((p.total / direct - 1.0).abs() < 1e-12);
        assert_eq!(p.per_stream.len(), 2);
    }

    #[test]
    fn tx_power_rejects_bad_input() {
        let mut rng = stream(5, 0);
        let h = sample_fading_matrix(2, 4, &mut rng).unwrap();
        assert!(tx_power(&h, &[1.0]).is_err());
        assert!(tx_power(&h, &[1.0, -1.0]).is_err());
    }

    fn unit_link() -> LinkBudget {
        // β = 1, x_off = 1 so the path gain is exactly one
        LinkBudget::new(ChannelParams::new(1.0, 4.0, 0.0).unwrap(), 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn capacity_examples() {
        let link = unit_link();
        let one = AntennaConfig::new(1, 1).unwrap();
        let two = AntennaConfig::new(2, 2).unwrap();
        assert_eq!(subchannel_capacity(one, 1e4, 5.0, &link, 0.0).unwrap(), 0.0);
        assert!((subchannel_capacity(one, 1e4, 1.0, &link, 1.0).unwrap() - 1e4).abs() < 1e-9);
        assert!((subchannel_capacity(two, 1e4, 3.0, &link, 1.0).unwrap() - 4e4).abs() < 1e-8);
        assert!(LinkBudget::new(ChannelParams::default(), 100.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn sinr_factor_examples() {
        let one = AntennaConfig::new(1, 1).unwrap();
        assert_eq!(sinr_factor(1.0, one, &unit_link()).unwrap().value(), 1.0);
        let link = LinkBudget::new(ChannelParams::default(), 300.0, 2.0, 1e-12).unwrap();
        let cfg = AntennaConfig::new(8, 2).unwrap();
        let a = sinr_factor(1.0, cfg, &link).unwrap().value();
        let b = sinr_factor(2.0, cfg, &link).unwrap().value();
        assert!((b / a - 2.0).abs() < 1e-14);
    }

    #[test]
    fn bound_examples() {
        let xi = SinrFactor::new(1.0).unwrap();
        assert!((spectral_efficiency_bound(AntennaConfig::new(1, 1).unwrap(), xi) - 1.0).abs() < 1e-15);
        let b = spectral_efficiency_bound(AntennaConfig::new(8, 1).unwrap(), xi);
        assert!((b - 9f64.log2()).abs() < 1e-14);
    }

    #[test]
    fn mc_matches_gamma_quadrature_and_bound() {
        let cfg = AntennaConfig::new(8, 1).unwrap();
        let xi = SinrFactor::new(10.0).unwrap();
        let est = spectral_efficiency_mc(cfg, xi, 200_000, &mut stream(6, 0)).unwrap();
        let oracle = gamma_log_oracle(10.0, 8, 1);
        assert!(est.z_score(oracle).abs() < 3.0, "{est:?} vs {oracle}");
        let bound = spectral_efficiency_bound(cfg, xi);
        assert!((bound - 81f64.log2()).abs() < 1e-12);
        assert!(est.mean <= bound + 3.0 * est.std_error);
    }

    #[test]
    fn exponential_reduction() {
        let cfg = AntennaConfig::new(1, 1).unwrap();
        let xi = SinrFactor::new(3.0).unwrap();
        let est = spectral_efficiency_mc(cfg, xi, 200_000, &mut stream(7, 0)).unwrap();
        // E log2(1 + ξE) = e^{1/ξ} E1(1/ξ) / ln 2 for E ~ Exp(1)
        let x = 1.0f64 / 3.0;
        let exact = x.exp() * crate::quad::exp_integral_e1(x) / std::f64::consts::LN_2;
        assert!(est.z_score(exact).abs() < 3.0);
    }

    #[test]
    fn vanishing_xi_gives_vanishing_se() {
        let cfg = AntennaConfig::new(4, 2).unwrap();
        let est = spectral_efficiency_mc(cfg, SinrFactor::new(1e-9).unwrap(), 1000, &mut stream(8, 0)).unwrap();
        assert!(est.mean < 1e-8);
    }

    #[test]
    fn matrix_and_gamma_paths_agree() {
        for (n_t, s) in [(4, 2), (8, 4), (3, 3)] {
            let cfg = AntennaConfig::new(n_t, s).unwrap();
            let xi = SinrFactor::new(20.0).unwrap();
            let a = spectral_efficiency_mc(cfg, xi, 40_000, &mut stream(9, 0)).unwrap();
            let b = spectral_efficiency_matrix_mc(cfg, xi, 40_000, &mut stream(9, 1)).unwrap();
            let z = (a.mean - b.mean) / (a.std_error.hypot(b.std_error));
            assert!(z.abs() < 3.5, "N_T={n_t} S={s}: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn crossover_in_stream_count() {
        let grid = [1, 2, 4, 8];
        let exact = |s: usize, xi: f64| s as f64 * gamma_log_oracle(xi / s as f64, 8, s);
        let bound = |s: usize, xi: f64| {
            spectral_efficiency_bound(AntennaConfig::new(8, s).unwrap(), SinrFactor::new(xi).unwrap())
        };
        let monotone = |v: &[f64], increasing: bool| v.windows(2).all(|w| (w[1] > w[0]) == increasing);
        for xi in [100.0, 1e3, 1e4] {
            let b: Vec<f64> = grid.iter().map(|&s| bound(s, xi)).collect();
            assert!(monotone(&b, true), "bound xi={xi}: {b:?}");
        }
        // the exact mean still dips from S = 4 to S = 8 at ξ = 100
        let e: Vec<f64> = grid.iter().map(|&s| exact(s, 100.0)).collect();
        assert!(e[3] < e[2], "{e:?}");
        for (xi, increasing) in [(1e3, true), (1e4, true), (0.01, false)] {
            let e: Vec<f64> = grid.iter().map(|&s| exact(s, xi)).collect();
            assert!(monotone(&e, increasing), "xi={xi}: {e:?}");
            let mut rng = stream(10, 0);
            let mc: Vec<f64> = grid
                .iter()
                .map(|&s| {
                    let cfg = AntennaConfig::new(8, s).unwrap();
                    spectral_efficiency_mc(cfg, SinrFactor::new(xi).unwrap(), 100_000, &mut rng)
                        .unwrap()
                        .mean
                })
                .collect();
            assert!(monotone(&mc, increasing), "xi={xi}: {mc:?}");
        }
        let b: Vec<f64> = grid.iter().map(|&s| bound(s, 0.01)).collect();
        assert!(monotone(&b, false));
    }

    #[test]
    fn se_increasing_in_xi_and_antennas() {
        let mut prev = 0.0;
        for xi in [0.1, 1.0, 10.0, 100.0] {
            let cfg = AntennaConfig::new(4, 2).unwrap();
            let v = spectral_efficiency_mc(cfg, SinrFactor::new(xi).unwrap(), 20_000, &mut stream(11, 0)).unwrap();
            assert!(v.mean > prev);
            prev = v.mean;
        }
        let mut prev = 0.0;
        for n_t in [2, 4, 8] {
            let cfg = AntennaConfig::new(n_t, 2).unwrap();
            let v = spectral_efficiency_mc(cfg, SinrFactor::new(5.0).unwrap(), 20_000, &mut stream(12, 0)).unwrap();
            assert!(v.mean > prev);
            prev = v.mean;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn zero_forcing_residual(s in 1usize..6, extra in 0usize..5, seed in any::<u64>()) {
            let mut rng = stream(seed, 0);
            let h = sample_fading_matrix(s, s + extra, &mut rng).unwrap();
            if let Ok(f) = zf_precoder(&h) {
                prop_assert!(max_residual(&h, &f) < 1e-10);
            }
        }

        #[test]
        fn bound_dominates_quadrature(n_t in 1usize..10, s_frac in 0.0f64..1.0, log_xi in -2.0f64..4.0) {
            let s = 1 + ((n_t - 1) as f64 * s_frac) as usize;
            let cfg = AntennaConfig::new(n_t, s).unwrap();
            let xi = 10f64.powf(log_xi);
            let exact = s as f64 * gamma_log_oracle(xi / s as f64, n_t, s);
            prop_assert!(spectral_efficiency_bound(cfg, SinrFactor::new(xi).unwrap()) >= exact * (1.0 - 1e-9));
        }
    }
}
