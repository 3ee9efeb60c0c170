//! Pareto traffic, rate-adaptive link power and network energy efficiency.
//!
//! Each link adapts its power so that the zero-forcing capacity equals its
//! traffic rate. Links that would need more than the power cap are in outage
//! and are dropped from both the served traffic and the consumed power.

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::channel::{mean_shadowing, path_gain, sample_shadowing, ChannelParams};
use crate::error::{Error, Result};
use crate::interference::{avg_interference_hcpp, avg_interference_ppp, InterferenceScenario};
use crate::point_process::first_moment;
use crate::quad::{erlang_sf, exp_integral_e1, integrate, Tolerance};
use crate::stats::{Estimate, RunningStats};
use crate::zf::{AntennaConfig, LinkBudget};

/// Pareto traffic per UE: heaviness `θ`, minimum rate `ρ_min` (bits/s) and
/// per-UE bandwidth `B_W` (Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficModel {
    theta: f64,
    rho_min: f64,
    b_w: f64,
}

impl TrafficModel {
    pub fn new(theta: f64, rho_min: f64, b_w: f64) -> Result<Self> {
        if !(theta > 1.0 && theta <= 2.0) {
            return Err(Error::param("theta", format!("must lie in (1, 2], got {theta}")));
        }
        if !(rho_min > 0.0 && rho_min.is_finite()) {
            return Err(Error::param("rho_min", format!("must be positive, got {rho_min}")));
        }
        if !(b_w > 0.0 && b_w.is_finite()) {
            return Err(Error::param("b_w", format!("must be positive, got {b_w}")));
        }
        Ok(TrafficModel { theta, rho_min, b_w })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn rho_min(&self) -> f64 {
        self.rho_min
    }

    pub fn b_w(&self) -> f64 {
        self.b_w
    }

    pub fn with_theta(self, theta: f64) -> Result<Self> {
        Self::new(theta, self.rho_min, self.b_w)
    }
}

impl Default for TrafficModel {
    fn default() -> Self {
        TrafficModel {
            theta: 1.8,
            rho_min: 20e3,
            b_w: 10e3,
        }
    }
}

/// `θ ρ_min^θ / x^{θ+1}` on `x ≥ ρ_min`.
pub fn traffic_pdf(x: f64, tm: &TrafficModel) -> f64 {
    if x < tm.rho_min {
        return 0.0;
    }
    tm.theta / tm.rho_min * (tm.rho_min / x).powf(tm.theta + 1.0)
}

/// `θ ρ_min / (θ − 1)`.
pub fn traffic_mean(tm: &TrafficModel) -> f64 {
    tm.theta * tm.rho_min / (tm.theta - 1.0)
}

/// Inverse CDF `ρ_min u^{−1/θ}` for `u ∈ (0, 1]`.
pub fn traffic_from_uniform(tm: &TrafficModel, u: f64) -> f64 {
    tm.rho_min * u.powf(-1.0 / tm.theta)
}

pub fn traffic_sample<R: Rng + ?Sized>(tm: &TrafficModel, rng: &mut R) -> f64 {
    // random() is in [0, 1); flip it so u = 0 never occurs
    let u = 1.0 - rng.random::<f64>();
    traffic_from_uniform(tm, u)
}

/// How the number of links per BS is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkSource {
    /// Fixed average number of links per BS.
    PerBs(f64),
    /// UE intensity per m²; links per BS are `λ_M / ζ⁽¹⁾`.
    UeIntensity(f64),
}

/// Whether the serving-link shadowing is drawn per link or replaced by its
/// mean `E(w)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShadowingTreatment {
    Sampled,
    Mean,
}

/// BS power model and link power cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    eta: f64,
    p_rf_chain: f64,
    p_sta: f64,
    links: LinkSource,
    p_link_max: f64,
    shadowing: ShadowingTreatment,
}

impl EnergyModel {
    pub fn new(
        eta: f64,
        p_rf_chain: f64,
        p_sta: f64,
        links: LinkSource,
        p_link_max: f64,
        shadowing: ShadowingTreatment,
    ) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::param("eta", format!("must lie in (0, 1], got {eta}")));
        }
        if !(p_rf_chain >= 0.0 && p_rf_chain.is_finite()) {
            return Err(Error::param(
                "p_rf_chain",
                format!("must be non-negative, got {p_rf_chain}"),
            ));
        }
        if !(p_sta >= 0.0 && p_sta.is_finite()) {
            return Err(Error::param("p_sta", format!("must be non-negative, got {p_sta}")));
        }
        match links {
            LinkSource::PerBs(n) if !(n > 0.0 && n.is_finite()) => {
                return Err(Error::param("n_link", format!("must be positive, got {n}")));
            }
            LinkSource::UeIntensity(l) if !(l > 0.0 && l.is_finite()) => {
                return Err(Error::param("lambda_m", format!("must be positive, got {l}")));
            }
            _ => {}
        }
        if !(p_link_max > 0.0) {
            return Err(Error::param(
                "p_link_max",
                format!("must be positive, got {p_link_max}"),
            ));
        }
        Ok(EnergyModel {
            eta,
            p_rf_chain,
            p_sta,
            links,
            p_link_max,
            shadowing,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn p_rf_chain(&self) -> f64 {
        self.p_rf_chain
    }

    pub fn p_sta(&self) -> f64 {
        self.p_sta
    }

    pub fn links(&self) -> LinkSource {
        self.links
    }

    pub fn p_link_max(&self) -> f64 {
        self.p_link_max
    }

    pub fn shadowing(&self) -> ShadowingTreatment {
        self.shadowing
    }

    pub fn with_p_sta(self, p_sta: f64) -> Result<Self> {
        Self::new(
            self.eta,
            self.p_rf_chain,
            p_sta,
            self.links,
            self.p_link_max,
            self.shadowing,
        )
    }

    pub fn with_p_link_max(self, p_link_max: f64) -> Result<Self> {
        Self::new(
            self.eta,
            self.p_rf_chain,
            self.p_sta,
            self.links,
            p_link_max,
            self.shadowing,
        )
    }

    pub fn with_shadowing(self, shadowing: ShadowingTreatment) -> Self {
        EnergyModel { shadowing, ..self }
    }

    /// Average links per BS given the BS density.
    pub fn n_link(&self, bs_density: f64) -> f64 {
        match self.links {
            LinkSource::PerBs(n) => n,
            LinkSource::UeIntensity(lambda_m) => lambda_m / bs_density,
        }
    }
}

impl Default for EnergyModel {
    fn default() -> Self {
        EnergyModel {
            eta: 0.38,
            p_rf_chain: 0.05,
            p_sta: 45.5,
            links: LinkSource::PerBs(30.0),
            p_link_max: 2.0,
            shadowing: ShadowingTreatment::Sampled,
        }
    }
}

/// Power needed to carry `rho` bits/s over one zero-forcing subchannel:
/// `‖x_off‖^α I_avg (2^{ρ/(S B_W)} − 1) / (β w G)`. A zero gain is an outage
/// and yields `+∞`.
pub fn required_link_power(rho: f64, cfg: AntennaConfig, tm: &TrafficModel, link: &LinkBudget, gain: f64) -> f64 {
    if !(gain > 0.0) {
        return f64::INFINITY;
    }
    let spectral = rho / (cfg.s() as f64 * tm.b_w);
    (spectral * LN_2).exp_m1() / (link.sir_per_watt() * gain)
}

/// Everything the link-power model needs about the serving link and the
/// network around it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkEnvironment {
    pub channel: ChannelParams,
    pub x_off: f64,
    /// Average interference at the UE, Watts.
    pub i_avg: f64,
    /// BS intensity per m², used to turn a UE intensity into links per BS.
    pub bs_density: f64,
}

impl LinkEnvironment {
    pub fn new(channel: ChannelParams, x_off: f64, i_avg: f64, bs_density: f64) -> Result<Self> {
        LinkBudget::new(channel, x_off, 1.0, i_avg)?;
        if !(bs_density > 0.0) {
            return Err(Error::param(
                "bs_density",
                format!("must be positive, got {bs_density}"),
            ));
        }
        Ok(LinkEnvironment {
            channel,
            x_off,
            i_avg,
            bs_density,
        })
    }

    /// Hard-core network: analytic interference and BS density `ζ⁽¹⁾`.
    pub fn hcpp(s: &InterferenceScenario) -> Result<Self> {
        Self::new(s.channel, s.x_off, avg_interference_hcpp(s)?, first_moment(s.hcpp))
    }

    /// PPP baseline with intensity `λ_P`.
    pub fn ppp(s: &InterferenceScenario) -> Result<Self> {
        Self::new(s.channel, s.x_off, avg_interference_ppp(s)?, s.hcpp.lambda_p())
    }

    pub fn link(&self, shadowing: f64) -> Result<LinkBudget> {
        LinkBudget::new(self.channel, self.x_off, shadowing, self.i_avg)
    }

    /// `β ‖x_off‖^{−α} / I_avg` at unit shadowing and fading.
    fn sir_per_watt(&self) -> f64 {
        path_gain(&self.channel, self.x_off).expect("validated on construction") / self.i_avg
    }
}

/// Served-link statistics: power and rate averaged over links that are not in
/// outage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkPowerStats {
    /// `E(P | served)`, Watts.
    pub mean_power: f64,
    /// `E(ρ | served)`, bits/s.
    pub mean_rate: f64,
    /// Fraction of links whose required power exceeds the cap.
    pub outage: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct ServedSums {
    power: f64,
    rate: f64,
    served: u64,
    total: u64,
}

impl ServedSums {
    fn push(&mut self, power: f64, rate: f64, cap: f64) {
        self.total += 1;
        if power <= cap {
            self.served += 1;
            self.power += power;
            self.rate += rate;
        }
    }

    fn merge(&mut self, o: &ServedSums) {
        self.power += o.power;
        self.rate += o.rate;
        self.served += o.served;
        self.total += o.total;
    }

    fn stats(&self) -> Result<LinkPowerStats> {
        if self.served == 0 {
            return Err(Error::Numerical(format!(
                "all {} sampled links are in outage",
                self.total
            )));
        }
        let n = self.served as f64;
        Ok(LinkPowerStats {
            mean_power: self.power / n,
            mean_rate: self.rate / n,
            outage: 1.0 - n / self.total as f64,
        })
    }
}

fn sample_link<R: Rng + ?Sized>(
    cfg: AntennaConfig,
    tm: &TrafficModel,
    env: &LinkEnvironment,
    energy: &EnergyModel,
    gamma: &Gamma<f64>,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let rho = traffic_sample(tm, rng);
    let w = match energy.shadowing {
        ShadowingTreatment::Sampled => sample_shadowing(env.channel.sigma_s(), rng),
        ShadowingTreatment::Mean => mean_shadowing(env.channel.sigma_s()),
    };
    let gain = gamma.sample(rng);
    Ok((required_link_power(rho, cfg, tm, &env.link(w)?, gain), rho))
}

fn gain_law(cfg: AntennaConfig) -> Gamma<f64> {
    Gamma::new(cfg.gain_shape() as f64, 1.0).expect("positive shape")
}

/// Monte Carlo served-link statistics over joint draws of traffic,
/// shadowing and zero-forcing gain.
pub fn avg_link_power<R: Rng + ?Sized>(
    cfg: AntennaConfig,
    tm: &TrafficModel,
    env: &LinkEnvironment,
    energy: &EnergyModel,
    draws: usize,
    rng: &mut R,
) -> Result<LinkPowerStats> {
    if draws == 0 {
        return Err(Error::param("draws", "need at least one draw"));
    }
    let gamma = gain_law(cfg);
    let mut sums = ServedSums::default();
    for _ in 0..draws {
        let (p, rho) = sample_link(cfg, tm, env, energy, &gamma, rng)?;
        sums.push(p, rho, energy.p_link_max);
    }
    sums.stats()
}

/// Served-link statistics by deterministic quadrature.
///
/// For fixed rate and shadowing the required power is `c / G` with
/// `G ~ Gamma(k, 1)`, so the fading average is closed form: the link is
/// served with probability `Q(k, t)` where `t = c / P_max`, and
/// `E[G⁻¹; G ≥ t]` is `Q(k−1, t)/(k−1)` (or `E₁(t)` when `k = 1`). The rate
/// and shadowing averages are done numerically.
pub fn avg_link_power_numeric(
    cfg: AntennaConfig,
    tm: &TrafficModel,
    env: &LinkEnvironment,
    energy: &EnergyModel,
) -> Result<LinkPowerStats> {
    let k = cfg.gain_shape();
    let a0 = env.sir_per_watt();
    let s_bw = cfg.s() as f64 * tm.b_w;
    let cap = energy.p_link_max;
    let tol = Tolerance::relative(1e-9);

    // (served probability, E[P; served], E[ρ; served]) at shadowing w
    let given_w = |w: f64, which: usize| -> f64 {
        let integrand = |u: f64| {
            let rho = traffic_from_uniform(tm, u);
            let c = (rho / s_bw * LN_2).exp_m1() / (a0 * w);
            if !c.is_finite() {
                return 0.0;
            }
            let t = c / cap;
            match which {
                0 => erlang_sf(k, t),
                1 if k == 1 => c * exp_integral_e1(t),
                1 => c * erlang_sf(k - 1, t) / (k - 1) as f64,
                _ => rho * erlang_sf(k, t),
            }
        };
        integrate(integrand, 0.0, 1.0, tol).value
    };

    let moments: Vec<f64> = (0..3)
        .map(|which| match energy.shadowing {
            ShadowingTreatment::Mean => given_w(mean_shadowing(env.channel.sigma_s()), which),
            ShadowingTreatment::Sampled => {
                let scale = env.channel.sigma_s() * std::f64::consts::LN_10 / 10.0;
                let gauss = |z: f64| (-0.5 * z * z).exp() / (2.0 * PI).sqrt() * given_w((scale * z).exp(), which);
                integrate(gauss, -9.0, 9.0, tol).value
            }
        })
        .collect();

    let served = moments[0];
    if !(served > 0.0) {
        return Err(Error::Numerical("every link is in outage".into()));
    }
    Ok(LinkPowerStats {
        mean_power: moments[1] / served,
        mean_rate: moments[2] / served,
        outage: 1.0 - served,
    })
}

/// `N_link (E(P)/η + N_T P_RF) + P_sta`, Watts.
pub fn avg_bs_power(e_pik: f64, cfg: AntennaConfig, energy: &EnergyModel, bs_density: f64) -> f64 {
    energy.n_link(bs_density) * (e_pik / energy.eta + cfg.n_t() as f64 * energy.p_rf_chain) + energy.p_sta
}

/// Energy efficiency in bits/Hz/Joule from served-link statistics:
/// `(E(ρ)/B_W) / (E(P)/η + N_T P_RF + P_sta / N_link)`.
pub fn energy_efficiency_from(
    stats: &LinkPowerStats,
    cfg: AntennaConfig,
    tm: &TrafficModel,
    energy: &EnergyModel,
    bs_density: f64,
) -> f64 {
    let per_link_power =
        stats.mean_power / energy.eta + cfg.n_t() as f64 * energy.p_rf_chain + energy.p_sta / energy.n_link(bs_density);
    stats.mean_rate / tm.b_w / per_link_power
}

/// Number of batches used for the energy-efficiency standard error.
pub const EE_BATCHES: usize = 16;

/// Monte Carlo energy efficiency. The point estimate uses all draws; its
/// standard error comes from [`EE_BATCHES`] equal batches.
pub fn energy_efficiency<R: Rng + ?Sized>(
    cfg: AntennaConfig,
    tm: &TrafficModel,
    env: &LinkEnvironment,
    energy: &EnergyModel,
    draws: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if draws < EE_BATCHES {
        return Err(Error::param(
            "draws",
            format!("need at least {EE_BATCHES} draws, got {draws}"),
        ));
    }
    let gamma = gain_law(cfg);
    let mut total = ServedSums::default();
    let mut batch_ee = RunningStats::new();
    for b in 0..EE_BATCHES {
        let n = draws / EE_BATCHES + usize::from(b < draws % EE_BATCHES);
        let mut sums = ServedSums::default();
        for _ in 0..n {
            let (p, rho) = sample_link(cfg, tm, env, energy, &gamma, rng)?;
            sums.push(p, rho, energy.p_link_max);
        }
        total.merge(&sums);
        let ee = sums
            .stats()
            .map(|s| energy_efficiency_from(&s, cfg, tm, energy, env.bs_density))
            .unwrap_or(0.0);
        batch_ee.push(ee);
    }
    let stats = total.stats()?;
    Ok(Estimate {
        mean: energy_efficiency_from(&stats, cfg, tm, energy, env.bs_density),
        std_error: batch_ee.std_error(),
        replications: draws as u64,
    })
}

/// Energy efficiency from [`avg_link_power_numeric`].
pub fn energy_efficiency_numeric(
    cfg: AntennaConfig,
    tm: &TrafficModel,
    env: &LinkEnvironment,
    energy: &EnergyModel,
) -> Result<f64> {
    let stats = avg_link_power_numeric(cfg, tm, env, energy)?;
    Ok(energy_efficiency_from(&stats, cfg, tm, energy, env.bs_density))
}
