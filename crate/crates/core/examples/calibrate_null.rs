//! False-positive calibration of the block search on a null panel.
//!
//!   cargo run --release --example calibrate_null -- [reps]
//!
//! No breaks are injected, so every retained step is spurious. The retained
//! share of candidates should sit near gamma.

use std::time::Instant;

use breakscope::saturation::SelectionConfig;
use breakscope::simgen::{calibrate_false_positives, DgpSpec};

fn main() -> breakscope::Result<()> {
    let reps: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(200);
    let spec = DgpSpec::null(10, 15, 0.05, 11);
    for gamma in [0.01, 0.001] {
        let start = Instant::now();
        let config = SelectionConfig::default().with_gamma(gamma);
        let stats = calibrate_false_positives(&spec, &config, reps)?;
        println!(
            "gamma {gamma}: {} reps, K = {}, mean retained {:.3}, rate {:.5}, q95 {:.1}, max {}, non-converged {} ({:.1?})",
            stats.reps,
            stats.n_candidates,
            stats.mean_retained,
            stats.retention_rate,
            stats.q95,
            stats.max,
            stats.non_converged,
            start.elapsed()
        );
    }
    Ok(())
}
