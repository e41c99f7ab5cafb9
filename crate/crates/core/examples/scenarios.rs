//! Runs every bundled scenario with and without agents and prints a one-line summary of each.

use stormctl_core::datasets::{bundled_scenario, BUNDLED_SCENARIOS};
use stormctl_core::sim::{run_with, RunOptions};

fn main() {
    for (name, _) in BUNDLED_SCENARIOS {
        let scenario = bundled_scenario(name).expect("bundled scenarios parse");
        for agents in [true, false] {
            let options = RunOptions {
                agents,
                ..RunOptions::default()
            };
            let s = run_with(&scenario, options).expect("bundled scenarios run").summary();
            println!(
                "{name:<15} agents={agents:<5} max {:>8.4} MB at {:>7.2} ms  max util {:.3}  tickets {}",
                s.max_tnbp_mb, s.max_tnbp_t_ms, s.max_utilization, s.tickets_total
            );
        }
    }
}
