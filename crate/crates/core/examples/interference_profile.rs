//! Mean interference against serving distance for the hard-core network and
//! the PPP baseline, analytic next to Monte Carlo.
//!
//! cargo run --release --example interference_profile

use hcpp_energy::interference::{avg_interference_hcpp, avg_interference_ppp, mc_interference, InterferenceScenario};
use hcpp_energy::rng::stream;

fn main() -> Result<(), hcpp_energy::Error> {
    println!("x_off[m]   hcpp[W]      mc[W]        ±se          ppp[W]");
    for (i, x_off) in [0.0, 100.0, 200.0, 300.0, 400.0].into_iter().enumerate() {
        let s = InterferenceScenario {
            x_off,
            ..InterferenceScenario::default()
        };
        let analytic = avg_interference_hcpp(&s)?;
        let mc = mc_interference(&s, 20_000, &mut stream(7, i as u64))?;
        // the PPP mean diverges at x_off = 0
        let ppp = avg_interference_ppp(&s)
            .map(|v| format!("{v:.4e}"))
            .unwrap_or_else(|e| e.to_string());
        println!(
            "{x_off:8.0}   {analytic:.4e}   {:.4e}   {:.2e}     {ppp}",
            mc.mean, mc.std_error
        );
    }
    Ok(())
}
