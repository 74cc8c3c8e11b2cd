//! Load burma14, print its distance matrix and the optimum of a few prefixes.
//!
//! cargo run --example tsplib_instance [path/to/file.tsp]

use qatsp::instance::{parse_tsplib, Instance};
use qatsp::oracle::brute_optimum;

fn main() -> qatsp::Result<()> {
    let inst = match std::env::args().nth(1) {
        Some(path) => parse_tsplib(&std::fs::read_to_string(path)?)?,
        None => Instance::burma14(),
    };
    println!("{}: {} cities", inst.name, inst.n());
    for row in &inst.dist {
        let cells: Vec<String> = row.iter().map(|d| format!("{d:>5}")).collect();
        println!("{}", cells.join(""));
    }
    for k in [5, 7, 9] {
        if k > inst.n() {
            break;
        }
        let sub = inst.subset(&(0..k).collect::<Vec<_>>())?;
        let best = brute_optimum(&sub)?;
        println!(
            "first {k} cities: optimum {} via {:?}",
            best.length, best.order
        );
    }
    Ok(())
}
