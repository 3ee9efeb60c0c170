//! Scans the serving distance used by the energy-efficiency figures. For each
//! candidate it prints the peak EE of every hard-core series next to its
//! reference peak, and whether every HCPP curve stays above its PPP baseline.
//!
//! cargo run --release --example calibrate_x_off -- [x_off ...]

use hcpp_energy::experiment::{run_figure, ExperimentConfig, ResultTable};

const REFERENCE: [(u32, [(&str, f64); 3]); 4] = [
    (8, [("hcpp N_T=8", 1.9), ("hcpp N_T=12", 1.84), ("hcpp N_T=16", 1.72)]),
    (
        9,
        [
            ("hcpp delta=300", 1.85),
            ("hcpp delta=400", 1.73),
            ("hcpp delta=500", 1.63),
        ],
    ),
    (
        10,
        [
            ("hcpp theta=1.2", 2.06),
            ("hcpp theta=1.5", 1.81),
            ("hcpp theta=1.8", 1.64),
        ],
    ),
    (
        11,
        [
            ("hcpp alpha=4.2", 1.78),
            ("hcpp alpha=4", 1.71),
            ("hcpp alpha=3.8", 1.63),
        ],
    ),
];

fn hcpp_dominates(table: &ResultTable) -> bool {
    table.rows.iter().filter(|r| r.series.starts_with("ppp")).all(|p| {
        table
            .rows
            .iter()
            .filter(|h| h.axis_value == p.axis_value)
            .filter(|h| {
                h.series == p.series.replacen("ppp", "hcpp", 1) || (p.series == "ppp" && h.series.starts_with("hcpp"))
            })
            .all(|h| h.analytic >= p.analytic)
    })
}

fn main() -> Result<(), hcpp_energy::Error> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let candidates = if args.is_empty() {
        (0..=8).map(|i| 150.0 + 5.0 * i as f64).collect()
    } else {
        args
    };
    for x_off in candidates {
        let mut cfg = ExperimentConfig {
            monte_carlo: false,
            ..ExperimentConfig::default()
        };
        cfg.link.x_off = x_off;
        println!("x_off = {x_off} m");
        for (figure, refs) in REFERENCE {
            let table = run_figure(figure, &cfg)?;
            let mut worst: f64 = 0.0;
            let mut peaks = Vec::new();
            for (series, target) in refs {
                let (at, peak) = table.analytic_max(series).expect("series present");
                worst = worst.max((peak / target - 1.0).abs());
                peaks.push(format!("{series}: {peak:.3} at {at} (ref {target})"));
            }
            println!(
                "  fig {figure}: worst deviation {:.1}%, hcpp >= ppp: {}",
                100.0 * worst,
                hcpp_dominates(&table)
            );
            println!("    {}", peaks.join("; "));
        }
    }
    Ok(())
}
