//! TOML experiment configuration and its validation.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::energy::{EnergyModel, LinkSource, ShadowingTreatment, TrafficModel};
use crate::error::{Error, Result};
use crate::interference::{InterferenceScenario, McGeometry};
use crate::point_process::{first_moment, HcppParams};

/// Serving distance used by the energy-efficiency figures when the config
/// does not set one, meters.
pub const DEFAULT_X_OFF: f64 = 185.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; every grid point draws from its own stream of it.
    pub seed: u64,
    /// Monte Carlo replications per grid point. Each figure has its own
    /// default when this is absent.
    pub replications: Option<usize>,
    /// When false only the analytic column is computed.
    pub monte_carlo: bool,
    pub network: NetworkSection,
    pub channel: ChannelSection,
    pub link: LinkSection,
    pub traffic: TrafficSection,
    pub energy: EnergySection,
    /// Replaces the primary sweep axis of the figure.
    pub sweep: Option<SweepSection>,
    pub output: OutputSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 20_160_101,
            replications: None,
            monte_carlo: true,
            network: NetworkSection::default(),
            channel: ChannelSection::default(),
            link: LinkSection::default(),
            traffic: TrafficSection::default(),
            energy: EnergySection::default(),
            sweep: None,
            output: OutputSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    /// Parent PPP intensity, BSs per m².
    pub lambda_p: f64,
    /// Hard-core distance, meters.
    pub delta: f64,
}

impl Default for NetworkSection {
    fn default() -> Self {
        let p = HcppParams::default();
        NetworkSection {
            lambda_p: p.lambda_p(),
            delta: p.delta(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub beta_db: f64,
    pub alpha: f64,
    /// Shadowing spread, dB.
    pub sigma_s: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        let c = ChannelParams::default();
        ChannelSection {
            beta_db: c.beta_db(),
            alpha: c.alpha(),
            sigma_s: c.sigma_s(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    /// Serving BS to UE distance, meters.
    pub x_off: f64,
    /// Mean transmit power of an interfering BS, Watts.
    pub mean_tx_power: f64,
}

impl Default for LinkSection {
    fn default() -> Self {
        LinkSection {
            x_off: DEFAULT_X_OFF,
            mean_tx_power: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficSection {
    pub theta: f64,
    /// bits/s
    pub rho_min: f64,
    /// Hz
    pub b_w: f64,
}

impl Default for TrafficSection {
    fn default() -> Self {
        let t = TrafficModel::default();
        TrafficSection {
            theta: t.theta(),
            rho_min: t.rho_min(),
            b_w: t.b_w(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySection {
    pub eta: f64,
    /// Watts per RF chain.
    pub p_rf_chain: f64,
    /// Watts
    pub p_sta: f64,
    /// Links per BS. Mutually exclusive with `lambda_m`; 30 when neither is set.
    pub n_link: Option<f64>,
    /// UE intensity per m².
    pub lambda_m: Option<f64>,
    /// Watts
    pub p_link_max: f64,
    pub shadowing: ShadowingTreatment,
}

pub const DEFAULT_N_LINK: f64 = 30.0;

impl Default for EnergySection {
    fn default() -> Self {
        let e = EnergyModel::default();
        EnergySection {
            eta: e.eta(),
            p_rf_chain: e.p_rf_chain(),
            p_sta: e.p_sta(),
            n_link: None,
            lambda_m: None,
            p_link_max: e.p_link_max(),
            shadowing: e.shadowing(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// CSV destination; the metadata sidecar goes next to it with a `.json`
    /// extension.
    pub path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn hcpp(&self) -> Result<HcppParams> {
        HcppParams::new(self.network.lambda_p, self.network.delta)
    }

    pub fn channel(&self) -> Result<ChannelParams> {
        ChannelParams::from_db(self.channel.beta_db, self.channel.alpha, self.channel.sigma_s)
    }

    pub fn scenario(&self) -> Result<InterferenceScenario> {
        InterferenceScenario::new(self.hcpp()?, self.channel()?, self.link.x_off, self.link.mean_tx_power)
    }

    pub fn traffic(&self) -> Result<TrafficModel> {
        TrafficModel::new(self.traffic.theta, self.traffic.rho_min, self.traffic.b_w)
    }

    pub fn energy(&self) -> Result<EnergyModel> {
        let e = &self.energy;
        let links = match (e.n_link, e.lambda_m) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "set at most one of energy.n_link and energy.lambda_m".into(),
                ));
            }
            (None, Some(l)) => LinkSource::UeIntensity(l),
            (Some(n), None) => LinkSource::PerBs(n),
            (None, None) => LinkSource::PerBs(DEFAULT_N_LINK),
        };
        EnergyModel::new(e.eta, e.p_rf_chain, e.p_sta, links, e.p_link_max, e.shadowing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// What kind of problem a diagnostic reports; decides the error raised when
/// a figure is run on an invalid config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagnosticKind {
    Range,
    Divergence,
    Domain,
    Window,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.field, self.message)
    }
}

impl Diagnostic {
    fn error(kind: DiagnosticKind, field: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            kind,
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn from_error(field: &str, e: Error) -> Self {
        let kind = match e {
            Error::Divergence(_) => DiagnosticKind::Divergence,
            Error::Domain(_) => DiagnosticKind::Domain,
            _ => DiagnosticKind::Range,
        };
        Self::error(kind, field, e.to_string())
    }

    /// The error a figure run reports for this diagnostic.
    pub fn to_error(&self) -> Error {
        let msg = format!("{}: {}", self.field, self.message);
        match self.kind {
            DiagnosticKind::Divergence => Error::Divergence(msg),
            DiagnosticKind::Domain => Error::Domain(msg),
            DiagnosticKind::Range | DiagnosticKind::Window => Error::Config(msg),
        }
    }
}

/// Checks a config without running anything. An empty list means every
/// figure can run with it.
pub fn validate_config(cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let hcpp = cfg
        .hcpp()
        .map_err(|e| out.push(Diagnostic::from_error("network", e)))
        .ok();
    let channel = cfg
        .channel()
        .map_err(|e| out.push(Diagnostic::from_error("channel", e)))
        .ok();
    if let Err(e) = cfg.traffic() {
        out.push(Diagnostic::from_error("traffic", e));
    }
    if let Err(e) = cfg.energy() {
        out.push(Diagnostic::from_error("energy", e));
    }
    if cfg.replications == Some(0) {
        out.push(Diagnostic::error(
            DiagnosticKind::Range,
            "replications",
            "must be at least 1",
        ));
    }
    if let Some(sweep) = &cfg.sweep {
        if sweep.values.is_empty() {
            out.push(Diagnostic::error(
                DiagnosticKind::Range,
                "sweep.values",
                "grid is empty",
            ));
        } else if sweep.values.windows(2).any(|w| !(w[1] > w[0])) || sweep.values.iter().any(|v| !v.is_finite()) {
            out.push(Diagnostic::error(
                DiagnosticKind::Range,
                "sweep.values",
                "grid must be finite and strictly increasing",
            ));
        }
    }

    let x_off = cfg.link.x_off;
    if !(x_off > 0.0 && x_off.is_finite()) {
        out.push(Diagnostic::error(
            DiagnosticKind::Range,
            "link.x_off",
            format!("serving distance must be positive, got {x_off}"),
        ));
    }
    if let Some(h) = hcpp {
        if x_off >= h.delta() {
            out.push(Diagnostic::error(
                DiagnosticKind::Domain,
                "link.x_off",
                format!(
                    "x_off = {x_off} m is not below δ = {} m; the mean hard-core interference is infinite there",
                    h.delta()
                ),
            ));
        }
    }
    if let (Some(h), Some(c)) = (hcpp, channel) {
        match InterferenceScenario::new(h, c, x_off.max(0.0), cfg.link.mean_tx_power) {
            Ok(s) => {
                if let Err(e) = McGeometry::for_scenario(&s).validate(&s, first_moment(h)) {
                    out.push(Diagnostic::error(DiagnosticKind::Window, "network", e.to_string()));
                }
            }
            Err(e) => out.push(Diagnostic::from_error("link", e)),
        }
    }
    out
}
