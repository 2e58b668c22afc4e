//! A small robustness run: every attack in the default grid over a few
//! hundred trials, written to CSV and rendered as an SVG chart.

use qtag::harness::{plot, run_robustness_bench, write_results, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig {
        trials: 200,
        master_seed: 1,
        ..ExperimentConfig::default()
    };
    let rows = run_robustness_bench(&cfg)?;

    println!(
        "{:<10} {:>5} {:>7} {:>11} {:>11}",
        "attack", "count", "tpr", "tpr no SRM", "candidates"
    );
    for r in &rows {
        println!(
            "{:<10} {:>5} {:>7.3} {:>11.3} {:>11.1}",
            r.attack, r.count, r.tpr, r.tpr_no_srm, r.mean_candidates
        );
    }

    let dir = std::env::temp_dir();
    let csv = dir.join("robustness.csv");
    write_results(&csv, &rows)?;
    std::fs::write(dir.join("robustness.svg"), plot::tpr_chart(&rows))?;
    println!("\nwrote {} and robustness.svg", csv.display());
    Ok(())
}
