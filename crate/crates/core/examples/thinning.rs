//! Samples a Matérn II hard-core network, checks its density against the
//! closed form and prints the pair-retention profile.
//!
//! cargo run --release --example thinning -- [delta_m]

use hcpp_energy::point_process::{first_moment, pair_retention, sample_hcpp, HcppParams, Window};
use hcpp_energy::rng::stream;

fn main() -> Result<(), hcpp_energy::Error> {
    let delta = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(500.0);
    let params = HcppParams::with_parent_radius(800.0, delta)?;
    let window = Window::centered_square(20_000.0)?;
    let pattern = sample_hcpp(params, window, &mut stream(1, 0))?;

    println!("lambda_p = {:.4e} /m², delta = {delta} m", params.lambda_p());
    println!("retained {} BSs on {:.0} km²", pattern.len(), window.area() / 1e6);
    println!(
        "density {:.4e} vs first moment {:.4e}",
        pattern.density(),
        first_moment(params)
    );
    if let Some(d) = pattern.min_pairwise_distance() {
        println!("closest pair {d:.1} m");
    }

    println!("\n r/delta  pair retention");
    for i in 0..=10 {
        let r = delta * (1.0 + 0.1 * i as f64) + 1e-9;
        println!("{:7.2}  {:.6}", r / delta, pair_retention(r, params));
    }
    Ok(())
}
