//! Build both QUBO formulations for a five-city instance and convert them to
//! Ising form, checking that a tour has the same energy in both frames.

use qatsp::instance::Instance;
use qatsp::qubo::{
    bits_to_spins, build_qubo, penalized_edges, permutation_state, qubo_to_ising, QuboKind,
};

fn main() -> qatsp::Result<()> {
    let inst = Instance::burma(5)?;
    let (a, b) = (0.55, 0.138);
    let pruned = penalized_edges(&inst.dist_norm)
        .iter()
        .flatten()
        .filter(|&&p| p)
        .count();
    println!("{} directed edges above the departure median", pruned);

    let tour = permutation_state(&[0, 1, 2, 3, 4]);
    for kind in QuboKind::ALL {
        let q = build_qubo(kind, &inst.dist_norm, a, b)?;
        let m = qubo_to_ising(&q);
        let e_qubo = q.energy(&tour) + q.offset;
        let e_ising = m.energy(&bits_to_spins(&tour)) + m.offset;
        println!(
            "{}: {} vars, {} couplings, max |h| {:.3}, max |J| {:.3}, tour energy {e_qubo:.6} / {e_ising:.6}",
            kind.short(),
            q.n_vars,
            q.quadratic.len(),
            m.max_abs_h(),
            m.max_abs_j()
        );
    }
    Ok(())
}
