//! Clique-embed the 49-variable model into the smallest fitting Chimera graph
//! and inspect chains, couplers and the effect of chain strength.

use qatsp::anneal::default_schedule;
use qatsp::embedding::{
    chimera_graph, clique_embedding, embed_ising, min_chimera_size, sample_embedded,
};
use qatsp::instance::Instance;
use qatsp::qubo::{build_qubo, qubo_to_ising, QuboKind};

fn main() -> qatsp::Result<()> {
    let inst = Instance::burma(7)?;
    let logical = qubo_to_ising(&build_qubo(
        QuboKind::Heuristic,
        &inst.dist_norm,
        0.55,
        0.138,
    )?);
    let m = min_chimera_size(logical.n_spins());
    let g = chimera_graph(m)?;
    let e = clique_embedding(logical.n_spins(), &g)?;
    let longest = e.chains.iter().map(Vec::len).max().unwrap_or(0);
    println!(
        "C({m}): {} qubits, {} couplers; chains up to {longest} qubits",
        g.num_nodes(),
        g.num_edges()
    );

    for cs in [0.55, 0.775, 1.0] {
        let emb = embed_ising(&logical, &e, &g, cs)?;
        let schedule = default_schedule(&emb.model)?;
        let set = sample_embedded(&emb.model, &emb, &logical, 20, &schedule, 11)?;
        println!(
            "chain strength {cs}: {} physical qubits, {} chain bonds, mean chain break {:.3}",
            emb.qubits.len(),
            emb.num_chain_bonds(),
            set.mean_chain_break()
        );
    }
    Ok(())
}
