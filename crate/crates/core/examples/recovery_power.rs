//! Power curves: how often a single injected break is found at the right
//! date, and how well its size is estimated.
//!
//!   cargo run --release --example recovery_power -- [reps]

use breakscope::saturation::SelectionConfig;
use breakscope::simgen::{recovery_benchmark, DgpSpec, RecoveryCell};

fn main() -> breakscope::Result<()> {
    let reps: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100);
    let base = DgpSpec::null(10, 15, 0.05, 5);
    let mut grid = Vec::new();
    for sigma in [0.05, 0.2] {
        for tau_abs in [0.02, 0.05, 0.1, 0.2, 0.5] {
            grid.push(RecoveryCell {
                tau_abs,
                sigma,
                post_len: 6,
            });
        }
    }
    let out = recovery_benchmark(&base, &grid, &SelectionConfig::default(), reps)?;
    println!(
        "{:>6} {:>6} {:>7} {:>7} {:>7} {:>8} {:>7}",
        "|tau|", "sigma", "exact", "+-1", "missed", "bias", "rmse"
    );
    for o in out {
        println!(
            "{:>6.2} {:>6.2} {:>7.2} {:>7.2} {:>7.2} {:>8.4} {:>7.4}",
            o.cell.tau_abs, o.cell.sigma, o.exact, o.within_one, o.missed, o.bias, o.rmse
        );
    }
    Ok(())
}
