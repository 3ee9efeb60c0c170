//! Parameter sweeps behind each figure.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::config::{validate_config, ExperimentConfig, Severity};
use super::table::{Axis, ResultTable, Row};
use crate::energy::{energy_efficiency, energy_efficiency_numeric, EnergyModel, LinkEnvironment, TrafficModel};
use crate::error::{Error, Result};
use crate::interference::{
    avg_interference_hcpp, avg_interference_ppp, mc_interference, mc_interference_ppp, InterferenceScenario,
};
use crate::point_process::HcppParams;
use crate::rng::stream;
use crate::stats::Estimate;
use crate::zf::{spectral_efficiency_bound, spectral_efficiency_mc, AntennaConfig, SinrFactor};

/// Figures that can be reproduced.
pub const FIGURES: [u32; 9] = [2, 3, 4, 6, 7, 8, 9, 10, 11];

/// Environment variable selecting the number of worker threads.
pub const THREADS_ENV: &str = "HCPP_SIM_THREADS";

/// Default Monte Carlo replications per grid point.
pub fn default_replications(figure: u32) -> usize {
    match figure {
        2..=4 => 10_000,
        6 | 7 => 100_000,
        _ => 200_000,
    }
}

enum Job {
    Interference {
        scenario: InterferenceScenario,
        ppp: bool,
    },
    Se {
        cfg: AntennaConfig,
        xi: SinrFactor,
    },
    Ee {
        cfg: AntennaConfig,
        traffic: TrafficModel,
        env: LinkEnvironment,
        energy: EnergyModel,
    },
}

struct Task {
    series: String,
    axis_value: f64,
    job: Job,
}

impl Task {
    fn run(&self, seed: u64, index: u64, reps: usize, monte_carlo: bool) -> Result<Row> {
        let mut rng = stream(seed, index);
        let (analytic, mc): (f64, Option<Estimate>) = match &self.job {
            Job::Interference { scenario, ppp: false } => (
                avg_interference_hcpp(scenario)?,
                monte_carlo
                    .then(|| mc_interference(scenario, reps, &mut rng))
                    .transpose()?,
            ),
            Job::Interference { scenario, ppp: true } => (
                avg_interference_ppp(scenario)?,
                monte_carlo
                    .then(|| mc_interference_ppp(scenario, reps, &mut rng))
                    .transpose()?,
            ),
            Job::Se { cfg, xi } => (
                spectral_efficiency_bound(*cfg, *xi),
                monte_carlo
                    .then(|| spectral_efficiency_mc(*cfg, *xi, reps, &mut rng))
                    .transpose()?,
            ),
            Job::Ee {
                cfg,
                traffic,
                env,
                energy,
            } => (
                energy_efficiency_numeric(*cfg, traffic, env, energy)?,
                monte_carlo
                    .then(|| energy_efficiency(*cfg, traffic, env, energy, reps, &mut rng))
                    .transpose()?,
            ),
        };
        Ok(Row {
            series: self.series.clone(),
            axis_value: self.axis_value,
            analytic: Some(analytic),
            mc,
        })
    }
}

struct Plan {
    title: &'static str,
    axis: Axis,
    value_unit: &'static str,
    analytic_source: &'static str,
    tasks: Vec<Task>,
}

fn axis(name: &str, unit: &str) -> Axis {
    Axis {
        name: name.into(),
        unit: unit.into(),
    }
}

fn grid(cfg: &ExperimentConfig, default: Vec<f64>) -> Vec<f64> {
    cfg.sweep.as_ref().map(|s| s.values.clone()).unwrap_or(default)
}

fn count_grid(cfg: &ExperimentConfig, default: Vec<usize>) -> Result<Vec<usize>> {
    match &cfg.sweep {
        None => Ok(default),
        Some(s) => s
            .values
            .iter()
            .map(|&v| {
                if v >= 1.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(Error::Config(format!(
                        "antenna sweep values must be positive integers, got {v}"
                    )))
                }
            })
            .collect(),
    }
}

fn half_decades(lo_exp: i32, hi_exp: i32) -> Vec<f64> {
    (2 * lo_exp..=2 * hi_exp).map(|k| 10f64.powf(k as f64 / 2.0)).collect()
}

fn label(kind: &str, key: &str, value: f64) -> String {
    format!("{kind} {key}={value}")
}

fn interference_plan(figure: u32, cfg: &ExperimentConfig) -> Result<Plan> {
    let base = cfg.scenario()?;
    let mut tasks = Vec::new();
    let (title, ax) = match figure {
        2 => {
            for alpha in [3.4, 3.8, 4.2] {
                let channel = base.channel.with_alpha(alpha)?;
                for x in grid(cfg, (0..10).map(|i| 50.0 * i as f64).collect()) {
                    let scenario = InterferenceScenario::new(base.hcpp, channel, x, base.mean_tx_power)?;
                    tasks.push(Task {
                        series: label("hcpp", "alpha", alpha),
                        axis_value: x,
                        job: Job::Interference { scenario, ppp: false },
                    });
                    if x > 0.0 {
                        tasks.push(Task {
                            series: label("ppp", "alpha", alpha),
                            axis_value: x,
                            job: Job::Interference { scenario, ppp: true },
                        });
                    }
                }
            }
            ("average interference vs serving distance", axis("x_off", "m"))
        }
        3 => {
            for x in [0.0, 100.0, 200.0] {
                for delta in grid(cfg, (0..7).map(|i| 300.0 + 50.0 * i as f64).collect()) {
                    let hcpp = HcppParams::new(base.hcpp.lambda_p(), delta)?;
                    let scenario = InterferenceScenario::new(hcpp, base.channel, x, base.mean_tx_power)?;
                    tasks.push(Task {
                        series: label("hcpp", "x_off", x),
                        axis_value: delta,
                        job: Job::Interference { scenario, ppp: false },
                    });
                }
            }
            ("average interference vs hard-core distance", axis("delta", "m"))
        }
        4 => {
            let radii = [1200.0, 1000.0, 900.0, 800.0, 700.0, 600.0];
            let default: Vec<f64> = radii.iter().map(|r: &f64| 1.0 / (PI * r * r)).collect();
            for x in [0.0, 100.0, 200.0, 300.0, 400.0] {
                for lambda in grid(cfg, default.clone()) {
                    let hcpp = HcppParams::new(lambda, base.hcpp.delta())?;
                    let scenario = InterferenceScenario::new(hcpp, base.channel, x, base.mean_tx_power)?;
                    tasks.push(Task {
                        series: label("hcpp", "x_off", x),
                        axis_value: lambda,
                        job: Job::Interference { scenario, ppp: false },
                    });
                }
            }
            ("average interference vs parent intensity", axis("lambda_p", "1/m^2"))
        }
        _ => unreachable!(),
    };
    Ok(Plan {
        title,
        axis: ax,
        value_unit: "W",
        analytic_source: "quadrature",
        tasks,
    })
}

fn se_plan(figure: u32, cfg: &ExperimentConfig) -> Result<Plan> {
    let configs: Vec<(String, AntennaConfig)> = match figure {
        6 => [1, 2, 4, 8]
            .iter()
            .map(|&n| Ok((format!("N_T={n} S=1"), AntennaConfig::new(n, 1)?)))
            .collect::<Result<_>>()?,
        _ => [1, 2, 4, 8]
            .iter()
            .map(|&s| Ok((format!("N_T=8 S={s}"), AntennaConfig::new(8, s)?)))
            .collect::<Result<_>>()?,
    };
    let mut tasks = Vec::new();
    for (series, ac) in configs {
        for xi in grid(cfg, half_decades(-2, 4)) {
            tasks.push(Task {
                series: series.clone(),
                axis_value: xi,
                job: Job::Se {
                    cfg: ac,
                    xi: SinrFactor::new(xi)?,
                },
            });
        }
    }
    Ok(Plan {
        title: if figure == 6 {
            "spectral efficiency vs SINR factor, varying BS antennas"
        } else {
            "spectral efficiency vs SINR factor, varying UEG antennas"
        },
        axis: axis("xi", "1"),
        value_unit: "bit/s/Hz",
        analytic_source: "jensen_bound",
        tasks,
    })
}

/// HCPP and PPP link environments for one EE series.
fn environments(scenario: &InterferenceScenario) -> Result<[(&'static str, LinkEnvironment); 2]> {
    Ok([
        ("hcpp", LinkEnvironment::hcpp(scenario)?),
        ("ppp", LinkEnvironment::ppp(scenario)?),
    ])
}

fn ee_plan(figure: u32, cfg: &ExperimentConfig) -> Result<Plan> {
    let base = cfg.scenario()?;
    let traffic = cfg.traffic()?;
    let energy = cfg.energy()?;
    let mut tasks = Vec::new();
    let square = |n: usize| AntennaConfig::square(n);
    let push_square = |tasks: &mut Vec<Task>, series: String, env: LinkEnvironment, tm: TrafficModel| -> Result<()> {
        for n in count_grid(cfg, (1..=16).collect())? {
            tasks.push(Task {
                series: series.clone(),
                axis_value: n as f64,
                job: Job::Ee {
                    cfg: square(n)?,
                    traffic: tm,
                    env,
                    energy,
                },
            });
        }
        Ok(())
    };
    let ax = match figure {
        8 => {
            for (kind, env) in environments(&base)? {
                for n_t in [8, 12, 16] {
                    for s in count_grid(cfg, (1..=n_t).collect())?.into_iter().filter(|&s| s <= n_t) {
                        tasks.push(Task {
                            series: format!("{kind} N_T={n_t}"),
                            axis_value: s as f64,
                            job: Job::Ee {
                                cfg: AntennaConfig::new(n_t, s)?,
                                traffic,
                                env,
                                energy,
                            },
                        });
                    }
                }
            }
            axis("S", "antennas")
        }
        9 => {
            for delta in [300.0, 400.0, 500.0] {
                let hcpp = HcppParams::new(base.hcpp.lambda_p(), delta)?;
                let s = InterferenceScenario { hcpp, ..base };
                push_square(
                    &mut tasks,
                    label("hcpp", "delta", delta),
                    LinkEnvironment::hcpp(&s)?,
                    traffic,
                )?;
            }
            // the PPP baseline does not depend on δ
            push_square(&mut tasks, "ppp".into(), LinkEnvironment::ppp(&base)?, traffic)?;
            axis("N_T=S", "antennas")
        }
        10 => {
            for (kind, env) in environments(&base)? {
                for theta in [1.2, 1.5, 1.8] {
                    push_square(&mut tasks, label(kind, "theta", theta), env, traffic.with_theta(theta)?)?;
                }
            }
            axis("N_T=S", "antennas")
        }
        11 => {
            for kind in ["hcpp", "ppp"] {
                for alpha in [4.2, 4.0, 3.8] {
                    let s = InterferenceScenario {
                        channel: base.channel.with_alpha(alpha)?,
                        ..base
                    };
                    let env = if kind == "hcpp" {
                        LinkEnvironment::hcpp(&s)?
                    } else {
                        LinkEnvironment::ppp(&s)?
                    };
                    push_square(&mut tasks, label(kind, "alpha", alpha), env, traffic)?;
                }
            }
            axis("N_T=S", "antennas")
        }
        _ => unreachable!(),
    };
    let title = match figure {
        8 => "energy efficiency vs UEG antennas, varying BS antennas",
        9 => "energy efficiency vs antennas, varying hard-core distance",
        10 => "energy efficiency vs antennas, varying traffic heaviness",
        _ => "energy efficiency vs antennas, varying path-loss exponent",
    };
    Ok(Plan {
        title,
        axis: ax,
        value_unit: "bit/Hz/J",
        analytic_source: "quadrature",
        tasks,
    })
}

/// Worker pool sized by [`THREADS_ENV`], or by rayon's default when unset.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))
}

/// Runs the sweep behind `figure`. Grid point `i` always draws from stream
/// `i` of the master seed, so the output does not depend on the number of
/// workers.
pub fn run_figure(figure: u32, cfg: &ExperimentConfig) -> Result<ResultTable> {
    if let Some(d) = validate_config(cfg).into_iter().find(|d| d.severity == Severity::Error) {
        return Err(d.to_error());
    }
    let plan = match figure {
        2..=4 => interference_plan(figure, cfg)?,
        6 | 7 => se_plan(figure, cfg)?,
        8..=11 => ee_plan(figure, cfg)?,
        _ => {
            return Err(Error::param(
                "figure",
                format!("unknown figure {figure}; expected one of {FIGURES:?}"),
            ))
        }
    };
    let reps = cfg.replications.unwrap_or_else(|| default_replications(figure));
    let pool = worker_pool()?;
    let rows: Vec<Row> = pool.install(|| {
        plan.tasks
            .par_iter()
            .enumerate()
            .map(|(i, t)| t.run(cfg.seed, i as u64, reps, cfg.monte_carlo))
            .collect::<Result<_>>()
    })?;
    Ok(ResultTable {
        figure,
        title: plan.title.into(),
        axis: plan.axis,
        value_unit: plan.value_unit.into(),
        analytic_source: plan.analytic_source.into(),
        rows,
        seed: cfg.seed,
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::SweepSection;

    fn quick() -> ExperimentConfig {
        ExperimentConfig {
            replications: Some(200),
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn unknown_figure_rejected() {
        assert!(matches!(run_figure(5, &quick()), Err(Error::Parameter { .. })));
    }

    #[test]
    fn invalid_config_maps_to_error_kind() {
        let mut cfg = quick();
        cfg.channel.alpha = 2.0;
        assert!(matches!(run_figure(2, &cfg), Err(Error::Divergence(_))));
        let mut cfg = quick();
        cfg.link.x_off = 500.0;
        assert!(matches!(run_figure(8, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn grid_shapes() {
        let mut cfg = quick();
        cfg.monte_carlo = false;
        let t = run_figure(2, &cfg).unwrap();
        assert_eq!(t.rows.len(), 3 * 10 + 3 * 9);
        let t = run_figure(6, &cfg).unwrap();
        assert_eq!(t.rows.len(), 4 * 13);
        assert!(t.rows.iter().all(|r| r.mc.is_none()));
        cfg.sweep = Some(SweepSection {
            values: vec![2.0, 4.0, 10.0],
        });
        let t = run_figure(8, &cfg).unwrap();
        // S = 10 only fits N_T = 12 and 16
        assert_eq!(t.rows.len(), 2 * (2 + 3 + 3));
        cfg.sweep = Some(SweepSection { values: vec![1.5] });
        assert!(matches!(run_figure(9, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let cfg = ExperimentConfig {
            sweep: Some(SweepSection {
                values: vec![0.1, 10.0],
            }),
            ..quick()
        };
        let a = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let one = a.install(|| run_figure(7, &cfg)).unwrap();
        let four = b.install(|| run_figure(7, &cfg)).unwrap();
        assert_eq!(one.to_csv_string(), four.to_csv_string());
    }
}
