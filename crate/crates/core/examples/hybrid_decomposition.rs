//! Solve the 14-city instance by splitting it into annealer-sized parts and
//! merging the sub-tours.

use qatsp::hybrid::{decompose, solve_hybrid};
use qatsp::instance::Instance;
use qatsp::qubo::{Penalties, QuboKind};
use qatsp::sweep::{PipelineConfig, Topology};

fn main() -> qatsp::Result<()> {
    let inst = Instance::burma14();
    let parts = decompose(&inst, 7)?;
    println!("parts {:?}", parts.parts);
    for (kind, a, b) in [
        (QuboKind::Reference, 0.65, 0.25),
        (QuboKind::Heuristic, 0.4, 0.01),
    ] {
        let cfg = PipelineConfig {
            kind,
            penalties: Penalties {
                a,
                b,
                chain_strength: 1.0,
            },
            num_reads: 200,
            sweeps: None,
            topology: Topology::Logical,
            seed: 1,
        };
        let res = solve_hybrid(&inst, &cfg, 7)?;
        println!(
            "{}: length {} ({} of {} parts fell back to exact search) {:?}",
            kind.short(),
            res.tour.length,
            res.fallback_count,
            res.parts.len(),
            res.tour.order
        );
    }
    Ok(())
}
