//! Energy histogram of one annealing run, split into feasible tours,
//! penalized tours and infeasible states.

use qatsp::instance::Instance;
use qatsp::qubo::{Penalties, QuboKind};
use qatsp::sweep::{run_pipeline, PipelineConfig, Topology};

fn main() -> qatsp::Result<()> {
    let inst = Instance::burma(6)?;
    let cfg = PipelineConfig {
        kind: QuboKind::Heuristic,
        penalties: Penalties {
            a: 0.55,
            b: 0.138,
            chain_strength: 1.0,
        },
        num_reads: 1000,
        sweeps: None,
        topology: Topology::Logical,
        seed: 3,
    };
    let run = run_pipeline(&inst, &cfg)?;
    let h = run.histogram(12)?;
    println!(
        "{:>10} {:>10} {:>9} {:>9} {:>10}",
        "from", "to", "feasible", "penalized", "infeasible"
    );
    for i in 0..h.feasible.len() {
        println!(
            "{:>10.4} {:>10.4} {:>9} {:>9} {:>10}",
            h.edges[i],
            h.edges[i + 1],
            h.feasible[i],
            h.penalized[i],
            h.infeasible[i]
        );
    }
    if let Some((rec, d)) = run.best_feasible() {
        println!(
            "lowest feasible energy {:.4}: {:?}",
            run.qubo_energy(rec),
            d.order
        );
    }
    Ok(())
}
