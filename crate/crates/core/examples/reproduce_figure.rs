//! Computes one figure's table and writes it as CSV plus JSON sidecar.
//!
//! cargo run --release --example reproduce_figure -- <figure> [config.toml] [out.csv]

use std::path::{Path, PathBuf};

use hcpp_energy::experiment::{run_figure, ExperimentConfig, FIGURES};

fn main() -> Result<(), hcpp_energy::Error> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let figure: u32 = args.first().and_then(|a| a.parse().ok()).unwrap_or(8);
    if !FIGURES.contains(&figure) {
        eprintln!("figure must be one of {FIGURES:?}");
        std::process::exit(2);
    }
    let cfg = match args.get(1) {
        Some(p) => ExperimentConfig::load(Path::new(p))?,
        None => ExperimentConfig::default(),
    };
    let out = args
        .get(2)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(format!("fig{figure}.csv")));
    let table = run_figure(figure, &cfg)?;
    let sidecar = table.write_files(&out)?;
    for name in table.series_names() {
        if let Some((at, peak)) = table.analytic_max(&name) {
            println!(
                "{name}: analytic max {peak:.4e} {} at {} = {at}",
                table.value_unit, table.axis.name
            );
        }
    }
    println!("wrote {} and {}", out.display(), sidecar.display());
    Ok(())
}
