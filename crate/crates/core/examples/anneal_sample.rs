//! Simulated annealing on the logical five-city model with the default
//! schedule, decoding every distinct sample.

use qatsp::anneal::{default_schedule, sample};
use qatsp::instance::Instance;
use qatsp::oracle::brute_optimum;
use qatsp::qubo::{
    auto_scale, build_qubo, decode_state, qubo_to_ising, spins_to_bits, Penalties, QuboKind,
};

fn main() -> qatsp::Result<()> {
    let inst = Instance::burma(5)?;
    let opt = brute_optimum(&inst)?.length;
    let p = Penalties {
        a: 0.65,
        b: 0.25,
        chain_strength: 1.0,
    };
    let q = build_qubo(QuboKind::Reference, &inst.dist_norm, p.a, p.b)?;
    let (m, params) = auto_scale(&qubo_to_ising(&q), p)?;
    let schedule = default_schedule(&m)?;
    println!(
        "scale {:.3}, beta {:.3} -> {:.3} over {} sweeps",
        params.scale, schedule.beta_hot, schedule.beta_cold, schedule.sweeps
    );

    let set = sample(&m, 500, &schedule, 7)?;
    let meta = q.meta.as_ref().expect("TSP models carry metadata");
    for rec in set.records.iter().take(8) {
        let d = decode_state(&spins_to_bits(&rec.state), meta)?;
        let label = match &d.order {
            Some(order) => {
                let len = inst.tour_length(order)?;
                format!(
                    "tour {order:?} length {len}{}",
                    if len == opt { " (optimal)" } else { "" }
                )
            }
            None => format!("infeasible: {:?}", d.violation),
        };
        println!(
            "{:>4} x  energy {:>9.4}  {label}",
            rec.occurrences, rec.energy
        );
    }
    Ok(())
}
