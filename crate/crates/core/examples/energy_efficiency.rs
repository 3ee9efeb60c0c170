//! Energy efficiency of an N_T = 8 base station against the number of served
//! streams, for the hard-core network and the PPP baseline.
//!
//! cargo run --release --example energy_efficiency -- [x_off_m]

use hcpp_energy::energy::{energy_efficiency, energy_efficiency_numeric, EnergyModel, LinkEnvironment, TrafficModel};
use hcpp_energy::experiment::DEFAULT_X_OFF;
use hcpp_energy::interference::InterferenceScenario;
use hcpp_energy::rng::stream;
use hcpp_energy::zf::AntennaConfig;

fn main() -> Result<(), hcpp_energy::Error> {
    let x_off = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(DEFAULT_X_OFF);
    let scenario = InterferenceScenario {
        x_off,
        ..InterferenceScenario::default()
    };
    let hcpp = LinkEnvironment::hcpp(&scenario)?;
    let ppp = LinkEnvironment::ppp(&scenario)?;
    let (traffic, energy) = (TrafficModel::default(), EnergyModel::default());

    println!("x_off = {x_off} m, EE in bit/Hz/J");
    println!("  S    hcpp   hcpp mc     ppp");
    for s in 1..=8 {
        let cfg = AntennaConfig::new(8, s)?;
        let a = energy_efficiency_numeric(cfg, &traffic, &hcpp, &energy)?;
        let mc = energy_efficiency(cfg, &traffic, &hcpp, &energy, 50_000, &mut stream(5, s as u64))?;
        let b = energy_efficiency_numeric(cfg, &traffic, &ppp, &energy)?;
        println!("{s:3}  {a:6.3}  {:8.3}  {b:6.3}", mc.mean);
    }
    Ok(())
}
