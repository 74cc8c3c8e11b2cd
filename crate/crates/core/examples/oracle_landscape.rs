//! Exhaustive energy landscape of the seven-city models: feasible counts,
//! best and worst tours, and the lowest-energy column function.

use qatsp::instance::Instance;
use qatsp::oracle::summarize;
use qatsp::qubo::{build_qubo, QuboKind};

fn main() -> qatsp::Result<()> {
    let inst = Instance::burma(7)?;
    for kind in QuboKind::ALL {
        let q = build_qubo(kind, &inst.dist_norm, 0.55, 0.138)?;
        let s = summarize(&inst, &q)?;
        println!(
            "{} ({} tours, {} non-penalized)",
            kind.short(),
            s.n_feasible,
            s.n_nonpenalized
        );
        println!(
            "  best feasible   {:.5} B  {:?}",
            s.best_feasible.b_coefficient, s.best_feasible.order
        );
        println!(
            "  worst feasible  {:.5} B  {:?}",
            s.worst_feasible.b_coefficient, s.worst_feasible.order
        );
        if let Some(inf) = &s.best_infeasible {
            println!(
                "  best infeasible {:.5} B  {:?} (constraint {:.3})",
                inf.b_coefficient, inf.assignment, inf.constraint_energy
            );
        }
    }
    Ok(())
}
