//! Average downlink interference at a UE located `‖x_off‖` from its serving
//! BS.
//!
//! The analytic evaluator integrates the Palm density of interferers,
//! `ζ⁽²⁾(‖x‖)/ζ⁽¹⁾`, against the path loss `‖x + x_off‖^{−α}` in polar
//! coordinates around the serving BS. The Monte Carlo estimator simulates the
//! same quantity directly: it draws hard-core patterns conditioned on a
//! retained BS at the origin and sums the interference power at the UE.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::channel::{mean_shadowing, sample_shadowing, ChannelParams};
use crate::error::{Error, Result};
use crate::point_process::{
    first_moment, matern2_retained, sample_marked_ppp, second_moment, HcppParams, MarkedPoint, Point, Window,
};
use crate::quad::{integrate, Tolerance};
use crate::stats::{Estimate, RunningStats};

/// Inputs of the average-interference model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceScenario {
    pub hcpp: HcppParams,
    pub channel: ChannelParams,
    /// Distance between the serving BS and the tagged UE, meters.
    pub x_off: f64,
    /// Mean total transmit power of an interfering BS, Watts.
    pub mean_tx_power: f64,
}

impl InterferenceScenario {
    pub fn new(hcpp: HcppParams, channel: ChannelParams, x_off: f64, mean_tx_power: f64) -> Result<Self> {
        if !(x_off >= 0.0 && x_off.is_finite()) {
            return Err(Error::param("x_off", format!("must be non-negative, got {x_off}")));
        }
        if !(mean_tx_power > 0.0 && mean_tx_power.is_finite()) {
            return Err(Error::param(
                "mean_tx_power",
                format!("must be positive, got {mean_tx_power}"),
            ));
        }
        Ok(InterferenceScenario {
            hcpp,
            channel,
            x_off,
            mean_tx_power,
        })
    }

    /// `β E(w) E(P_u)`: the mean received power at unit distance.
    fn unit_power(&self) -> f64 {
        self.channel.beta() * mean_shadowing(self.channel.sigma_s()) * self.mean_tx_power
    }
}

impl Default for InterferenceScenario {
    fn default() -> Self {
        InterferenceScenario {
            hcpp: HcppParams::default(),
            channel: ChannelParams::default(),
            x_off: 0.0,
            mean_tx_power: 2.0,
        }
    }
}

/// Knobs of the analytic evaluator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Radial truncation in units of `1/sqrt(λ_P)`; the remainder is added in
    /// closed form.
    pub r_max_factor: f64,
    pub rel_tol: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            r_max_factor: 40.0,
            rel_tol: 1e-9,
        }
    }
}

/// `(1/2π) ∫₀^{2π} (r² + x² + 2 r x cos φ)^{−α/2} dφ` for `r > x ≥ 0`.
///
/// The integrand is periodic and analytic, so the trapezoid rule converges
/// geometrically; the node count is doubled until successive estimates agree.
pub fn angular_mean(r: f64, x: f64, alpha: f64) -> f64 {
    debug_assert!(r > x && x >= 0.0);
    if x == 0.0 {
        return r.powf(-alpha);
    }
    let f = |phi: f64| (r * r + x * x + 2.0 * r * x * phi.cos()).powf(-0.5 * alpha);
    // trapezoid on [0, π] with both endpoints at half weight
    let mut m = 8usize;
    let mut interior: f64 = (1..m).map(|j| f(PI * j as f64 / m as f64)).sum();
    let ends = 0.5 * (f(0.0) + f(PI));
    let mut est = (ends + interior) / m as f64;
    while m < (1 << 20) {
        let fresh: f64 = (0..m).map(|j| f(PI * (2 * j + 1) as f64 / (2 * m) as f64)).sum();
        interior += fresh;
        m *= 2;
        let next = (ends + interior) / m as f64;
        let done = (next - est).abs() <= 1e-13 * next;
        est = next;
        if done {
            break;
        }
    }
    est
}

/// `∫_{‖y‖>R} ‖y + x‖^{−α} dy` for `R > ‖x‖`, by termwise integration of the
/// angular-mean series `Σ_n [(α/2)_n / n!]² (x/r)^{2n} r^{−α}`.
pub fn far_field_integral(radius: f64, x: f64, alpha: f64) -> f64 {
    debug_assert!(radius > x && alpha > 2.0);
    let q2 = (x / radius).powi(2);
    let mut coef = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    for n in 0..200 {
        let term = coef * power / (alpha + 2.0 * n as f64 - 2.0);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
        let a = 0.5 * alpha + n as f64;
        coef *= (a / (n as f64 + 1.0)).powi(2);
        power *= q2;
    }
    2.0 * PI * radius.powf(2.0 - alpha) * sum
}

fn check_hcpp_domain(s: &InterferenceScenario) -> Result<()> {
    let delta = s.hcpp.delta();
    if s.x_off >= delta {
        return Err(Error::Domain(format!(
            "x_off = {} m must be below the hard-core distance δ = {delta} m: otherwise interferers can sit \
             arbitrarily close to the UE and the mean interference diverges for α > 2",
            s.x_off
        )));
    }
    Ok(())
}

/// Mean interference at the UE under hard-core BS placement, Watts.
pub fn avg_interference_hcpp(s: &InterferenceScenario) -> Result<f64> {
    avg_interference_hcpp_with(s, QuadratureSettings::default())
}

pub fn avg_interference_hcpp_with(s: &InterferenceScenario, settings: QuadratureSettings) -> Result<f64> {
    check_hcpp_domain(s)?;
    let params = s.hcpp;
    let alpha = s.channel.alpha();
    let delta = params.delta();
    let x = s.x_off;
    let z1 = first_moment(params);
    let r_max = (settings.r_max_factor / params.lambda_p().sqrt()).max(4.0 * delta);
    let tol = Tolerance {
        rel: settings.rel_tol,
        abs: 0.0,
        max_intervals: 4000,
    };

    let radial = |r: f64| 2.0 * PI * r * second_moment(r, params) * angular_mean(r, x, alpha);
    let core = integrate(radial, delta, 2.0 * delta, tol);
    let mid = integrate(
        |u: f64| {
            let r = u.exp();
            r * radial(r)
        },
        (2.0 * delta).ln(),
        r_max.ln(),
        tol,
    );
    if !core.converged || !mid.converged {
        log::warn!(
            "interference quadrature did not reach rel tol {} (errors {:e}, {:e})",
            settings.rel_tol,
            core.abs_error,
            mid.abs_error
        );
    }
    // ζ⁽²⁾ is flat at ζ⁽¹⁾² beyond 2δ
    let tail = z1 * z1 * far_field_integral(r_max, x, alpha);
    Ok(s.unit_power() / z1 * (core.value + mid.value + tail))
}

/// Mean interference for PPP interferers of intensity `λ_P` outside the disc
/// of radius `x_off` around the UE (nearest-BS association):
/// `2π λ_P β E(w) E(P_u) x_off^{2−α} / (α − 2)`.
pub fn avg_interference_ppp(s: &InterferenceScenario) -> Result<f64> {
    if s.x_off == 0.0 {
        return Err(Error::Divergence(
            "PPP interferers may lie arbitrarily close to a UE at its serving BS (x_off = 0)".into(),
        ));
    }
    let alpha = s.channel.alpha();
    Ok(2.0 * PI * s.hcpp.lambda_p() * s.unit_power() * s.x_off.powf(2.0 - alpha) / (alpha - 2.0))
}

/// Simulation geometry of the Monte Carlo estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McGeometry {
    /// Interferers within this distance of the serving BS are simulated;
    /// farther ones enter through their exact mean.
    pub summation_radius: f64,
    /// Extra margin of parent points simulated around the summation disc so
    /// that thinning decisions near its edge are exact.
    pub guard: f64,
}

/// Smallest expected number of retained BSs inside the summation disc.
pub const MIN_EXPECTED_BS: f64 = 100.0;

impl McGeometry {
    pub fn for_scenario(s: &InterferenceScenario) -> Self {
        let delta = s.hcpp.delta();
        McGeometry {
            summation_radius: (7.0 / s.hcpp.lambda_p().sqrt()).max(4.0 * delta).max(2.0 * s.x_off),
            guard: 2.0 * delta,
        }
    }

    pub fn validate(&self, s: &InterferenceScenario, density: f64) -> Result<()> {
        let r = self.summation_radius;
        let expected = density * PI * r * r;
        if expected < MIN_EXPECTED_BS {
            return Err(Error::Config(format!(
                "summation radius {r} m holds only {expected:.1} BSs on average; need at least {MIN_EXPECTED_BS} \
                 (radius of order 6/sqrt(λ_P) = {:.0} m)",
                6.0 / s.hcpp.lambda_p().sqrt()
            )));
        }
        if r < 2.0 * s.hcpp.delta() || r <= s.x_off {
            return Err(Error::Config(format!(
                "summation radius {r} m must be at least 2δ and exceed x_off"
            )));
        }
        if !(self.guard >= s.hcpp.delta()) {
            return Err(Error::Config(format!("guard margin {} m is below δ", self.guard)));
        }
        Ok(())
    }
}

const MAX_PALM_ATTEMPTS: usize = 100_000;

/// Hard-core pattern seen from a typical retained point at the origin.
///
/// A parent point with a uniform mark is added at the origin to a PPP on
/// `[-half_width, half_width]²`; draws in which it is thinned away are
/// rejected. Returns the other retained points.
pub fn sample_palm_hcpp<R: Rng + ?Sized>(params: HcppParams, half_width: f64, rng: &mut R) -> Result<Vec<Point>> {
    let window = Window::centered_square(half_width)?;
    let delta = params.delta();
    for _ in 0..MAX_PALM_ATTEMPTS {
        let mut parent = sample_marked_ppp(params.lambda_p(), window, rng)?;
        let origin_mark: f64 = rng.random();
        let suppressed = parent
            .iter()
            .any(|p| p.mark < origin_mark && p.position.norm() <= delta);
        if suppressed {
            continue;
        }
        parent.push(MarkedPoint {
            position: Point::ORIGIN,
            mark: origin_mark,
        });
        let keep = matern2_retained(&parent, delta)?;
        debug_assert!(keep[parent.len() - 1]);
        parent.pop();
        return Ok(parent
            .into_iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(p, _)| p.position)
            .collect());
    }
    Err(Error::Numerical(format!(
        "typical point was thinned in {MAX_PALM_ATTEMPTS} consecutive draws"
    )))
}

fn interference_power<R: Rng + ?Sized>(channel: &ChannelParams, tx_power: f64, distance: f64, rng: &mut R) -> f64 {
    let w = sample_shadowing(channel.sigma_s(), rng);
    let fading: f64 = Exp1.sample(rng);
    channel.beta() * w * fading * tx_power * distance.powf(-channel.alpha())
}

/// Monte Carlo estimate of the mean interference with hard-core BSs.
pub fn mc_interference<R: Rng + ?Sized>(
    s: &InterferenceScenario,
    realizations: usize,
    rng: &mut R,
) -> Result<Estimate> {
    mc_interference_with(s, realizations, McGeometry::for_scenario(s), rng)
}

pub fn mc_interference_with<R: Rng + ?Sized>(
    s: &InterferenceScenario,
    realizations: usize,
    geometry: McGeometry,
    rng: &mut R,
) -> Result<Estimate> {
    if realizations == 0 {
        return Err(Error::param("realizations", "must be at least 1"));
    }
    let z1 = first_moment(s.hcpp);
    geometry.validate(s, z1)?;
    let radius = geometry.summation_radius;
    let alpha = s.channel.alpha();
    let far = s.unit_power() * z1 * far_field_integral(radius, s.x_off, alpha);

    let mut stats = RunningStats::new();
    for _ in 0..realizations {
        let others = sample_palm_hcpp(s.hcpp, radius + geometry.guard, rng)?;
        let psi = 2.0 * PI * rng.random::<f64>();
        let ue = Point::new(s.x_off * psi.cos(), s.x_off * psi.sin());
        let near: f64 = others
            .iter()
            .filter(|p| p.norm() <= radius)
            .map(|p| interference_power(&s.channel, s.mean_tx_power, p.distance(&ue), rng))
            .sum();
        stats.push(near + far);
    }
    Ok(stats.estimate())
}

/// Monte Carlo counterpart of [`avg_interference_ppp`]: PPP interferers
/// around a UE at the origin, excluding the disc of radius `x_off`.
pub fn mc_interference_ppp<R: Rng + ?Sized>(
    s: &InterferenceScenario,
    realizations: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if realizations == 0 {
        return Err(Error::param("realizations", "must be at least 1"));
    }
    if s.x_off == 0.0 {
        return Err(Error::Divergence("PPP baseline needs x_off > 0".into()));
    }
    let lambda = s.hcpp.lambda_p();
    let geometry = McGeometry::for_scenario(s);
    geometry.validate(s, lambda)?;
    let radius = geometry.summation_radius;
    let alpha = s.channel.alpha();
    let far = s.unit_power() * lambda * far_field_integral(radius, 0.0, alpha);
    let window = Window::centered_square(radius)?;

    let mut stats = RunningStats::new();
    for _ in 0..realizations {
        let pattern = crate::point_process::sample_ppp(lambda, window, rng)?;
        let near: f64 = pattern
            .points
            .iter()
            .map(Point::norm)
            .filter(|&d| d >= s.x_off && d <= radius)
            .map(|d| interference_power(&s.channel, s.mean_tx_power, d, rng))
            .sum();
        stats.push(near + far);
    }
    Ok(stats.estimate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn scenario(x_off: f64) -> InterferenceScenario {
        InterferenceScenario {
            x_off,
            ..Default::default()
        }
    }

    /// ₂F₁(a, a; 1; z) by direct summation.
    fn hyp_aa1(a: f64, z: f64) -> f64 {
        let (mut term, mut sum) = (1.0, 1.0);
        for n in 0..10_000 {
            let k = n as f64;
            term *= ((a + k) / (k + 1.0)).powi(2) * z;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum
    }

    #[test]
    fn angular_mean_matches_hypergeometric_series() {
        for (r, x, alpha) in [
            (1.0f64, 0.3, 3.8),
            (500.0, 400.0, 4.2),
            (1.0, 0.95, 3.4),
            (2.0, 1.0, 2.5),
        ] {
            let series = r.powf(-alpha) * hyp_aa1(0.5 * alpha, (x / r).powi(2));
            let trap = angular_mean(r, x, alpha);
            assert!((trap / series - 1.0).abs() < 1e-11, "r={r} x={x}: {trap} vs {series}");
        }
    }

    #[test]
    fn far_field_at_zero_offset() {
        let v = far_field_integral(1000.0, 0.0, 4.0);
        assert!((v - 2.0 * PI * 1000f64.powi(-2) / 2.0).abs() < 1e-18);
    }

    #[test]
    fn zero_offset_equals_radial_oracle() {
        // at x_off = 0 the angular integral is exactly 2π r^{-α}
        let s = scenario(0.0);
        let p = s.hcpp;
        let alpha = s.channel.alpha();
        let tol = Tolerance::relative(1e-11);
        let inner = integrate(
            |r| second_moment(r, p) * r.powf(1.0 - alpha),
            p.delta(),
            2.0 * p.delta(),
            tol,
        );
        let z1 = first_moment(p);
        let outer = z1 * z1 * (2.0 * p.delta()).powf(2.0 - alpha) / (alpha - 2.0);
        let oracle = s.unit_power() / z1 * 2.0 * PI * (inner.value + outer);
        let value = avg_interference_hcpp(&s).unwrap();
        assert!((value / oracle - 1.0).abs() < 1e-7, "{value:e} vs {oracle:e}");
    }

    #[test]
    fn hcpp_orderings() {
        let at = |x: f64| avg_interference_hcpp(&scenario(x)).unwrap();
        assert!(at(400.0) > at(0.0));
        let mut small_core = scenario(100.0);
        small_core.hcpp = HcppParams::new(small_core.hcpp.lambda_p(), 300.0).unwrap();
        assert!(avg_interference_hcpp(&small_core).unwrap() > at(100.0));
        let mut dense = scenario(100.0);
        dense.hcpp = HcppParams::new(2.0 * dense.hcpp.lambda_p(), 500.0).unwrap();
        assert!(avg_interference_hcpp(&dense).unwrap() > at(100.0));
    }

    #[test]
    fn hcpp_linear_in_beta_and_power() {
        let s = scenario(250.0);
        let base = avg_interference_hcpp(&s).unwrap();
        let mut t = s;
        t.channel = s.channel.with_beta(3.0 * s.channel.beta()).unwrap();
        assert!((avg_interference_hcpp(&t).unwrap() / base - 3.0).abs() < 1e-12);
        let mut u = s;
        u.mean_tx_power = 5.0;
        assert!((avg_interference_hcpp(&u).unwrap() / base - 2.5).abs() < 1e-12);
    }

    #[test]
    fn truncation_radius_converged() {
        for x in [0.0, 300.0, 450.0] {
            let s = scenario(x);
            let a = avg_interference_hcpp(&s).unwrap();
            let b = avg_interference_hcpp_with(
                &s,
                QuadratureSettings {
                    r_max_factor: 80.0,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!((a / b - 1.0).abs() < 1e-4, "x={x}");
        }
    }

    #[test]
    fn offset_at_or_beyond_core_is_rejected() {
        assert!(matches!(avg_interference_hcpp(&scenario(500.0)), Err(Error::Domain(_))));
        assert!(matches!(avg_interference_hcpp(&scenario(650.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn ppp_baseline_shape() {
        assert!(matches!(
            avg_interference_ppp(&scenario(0.0)),
            Err(Error::Divergence(_))
        ));
        let mut prev = f64::INFINITY;
        for x in [50.0, 100.0, 200.0, 400.0] {
            let v = avg_interference_ppp(&scenario(x)).unwrap();
            assert!(v < prev);
            prev = v;
        }
        let mut lo = scenario(300.0);
        lo.channel = lo.channel.with_alpha(3.4).unwrap();
        let mut hi = scenario(300.0);
        hi.channel = hi.channel.with_alpha(4.2).unwrap();
        assert!(avg_interference_ppp(&lo).unwrap() > avg_interference_ppp(&hi).unwrap());
    }

    #[test]
    fn mc_scales_linearly_in_power_with_paired_seeds() {
        let s = scenario(300.0);
        let mut t = s;
        t.mean_tx_power *= 2.0;
        let a = mc_interference(&s, 200, &mut stream(42, 0)).unwrap();
        let b = mc_interference(&t, 200, &mut stream(42, 0)).unwrap();
        assert!((b.mean / a.mean - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mc_rejects_tiny_summation_disc() {
        let s = scenario(0.0);
        let geometry = McGeometry {
            summation_radius: 2000.0,
            guard: 1000.0,
        };
        let err = mc_interference_with(&s, 10, geometry, &mut stream(1, 0)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn palm_sample_respects_hard_core_around_origin() {
        let p = HcppParams::default();
        let mut rng = stream(3, 0);
        for _ in 0..50 {
            let pts = sample_palm_hcpp(p, 6000.0, &mut rng).unwrap();
            assert!(pts.iter().all(|q| q.norm() > p.delta()));
        }
    }
}
