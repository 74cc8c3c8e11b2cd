//! Sweep the penalty grid for one A value on the logical five-city models and
//! write the run records and a feasibility landscape.
//!
//! cargo run --release --example parameter_sweep [out_dir]

use std::fs::File;
use std::path::PathBuf;

use qatsp::instance::Instance;
use qatsp::oracle::brute_optimum;
use qatsp::qubo::QuboKind;
use qatsp::sweep::{landscape_grid, run_sweep, GridSpec, Metric, RecordFilter, Topology};

fn main() -> qatsp::Result<()> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "sweep-out".into()),
    );
    std::fs::create_dir_all(&out)?;
    let inst = Instance::burma(5)?;
    let opt = brute_optimum(&inst)?.length;
    let spec = GridSpec {
        a_values: vec![0.55, 0.85],
        kinds: QuboKind::ALL.to_vec(),
        num_reads: 100,
        sweeps: None,
        topology: Topology::Logical,
        seed: 42,
    };
    let result = run_sweep(&inst, &spec, opt)?;
    result.write_csv(File::create(out.join("sweep.csv"))?)?;
    println!(
        "{} runs, {} distinct real configurations",
        result.records.len(),
        result.distinct_real_configs
    );

    for kind in QuboKind::ALL {
        let filter = RecordFilter {
            kind: Some(kind),
            min_cs_real: None,
        };
        let grid = landscape_grid(&result.records, Metric::FeasibleRatio, filter)?;
        let name = format!("landscape_{}", kind.short());
        grid.write_csv(File::create(out.join(format!("{name}.csv")))?)?;
        std::fs::write(out.join(format!("{name}.svg")), grid.to_svg())?;
        let best = result
            .records
            .iter()
            .filter(|r| r.qubo_type == kind)
            .max_by(|x, y| x.optimum_ratio.total_cmp(&y.optimum_ratio))
            .expect("non-empty sweep");
        println!(
            "{}: best optimum ratio {:.3} at A={} B={} cs={}",
            kind.short(),
            best.optimum_ratio,
            best.a,
            best.b,
            best.chain_strength
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}
