//! Zero-forcing on one random channel, then spectral efficiency against the
//! number of streams at a low and a high SINR factor.
//!
//! cargo run --release --example spectral_efficiency

use hcpp_energy::channel::sample_fading_matrix;
use hcpp_energy::rng::stream;
use hcpp_energy::zf::{
    spectral_efficiency_bound, spectral_efficiency_mc, tx_power, zf_precoder, AntennaConfig, SinrFactor,
};

fn main() -> Result<(), hcpp_energy::Error> {
    let mut rng = stream(3, 0);
    let h = sample_fading_matrix(4, 8, &mut rng)?;
    let w = zf_precoder(&h)?;
    let residual = (h.as_matrix() * &w).map(|z| z.norm()).sum() - 4.0;
    println!("4x8 channel: |H W| sums to 4 + {residual:.1e}");
    let p = tx_power(&h, &[1.0; 4])?;
    println!("unit received power per stream needs {:.3} W in total", p.total);

    for xi in [0.01, 1e4] {
        println!("\nxi = {xi}");
        println!("  S  bound[bit/s/Hz]  mc[bit/s/Hz]");
        for s in [1, 2, 4, 8] {
            let cfg = AntennaConfig::new(8, s)?;
            let xi = SinrFactor::new(xi)?;
            let mc = spectral_efficiency_mc(cfg, xi, 50_000, &mut rng)?;
            println!("{s:3}  {:15.4}  {:12.4}", spectral_efficiency_bound(cfg, xi), mc.mean);
        }
    }
    Ok(())
}
