//! Command-line front end. Every run writes its outputs plus a
//! `manifest.json` into the output directory; `qatsp replay --manifest`
//! re-executes a run from that manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use qatsp::anneal::Schedule;
use qatsp::hybrid::solve_hybrid;
use qatsp::instance::{parse_node_list, parse_tsplib, Instance};
use qatsp::io::write_atomic;
use qatsp::oracle::{
    brute_optimum, enumerate_column_functions, summarize, write_column_function_energies,
};
use qatsp::qubo::{build_qubo, qubo_to_ising, Penalties, QuboKind};
use qatsp::stats::{write_table_csv, TableRow};
use qatsp::sweep::{
    landscape_grid, run_pipeline, run_sweep, GridSpec, Metric, PipelineConfig, RecordFilter,
    RunRecord, SweepResult, Topology, DEFAULT_A_VALUES,
};
use qatsp::{Error, Result};

#[derive(Parser)]
#[command(
    name = "qatsp",
    version,
    about = "TSP QUBO models, annealing sweeps and hybrid solving"
)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "QATSP_OUT", default_value = "qatsp-out")]
    out: PathBuf,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: TopCommand,
}

#[derive(Subcommand)]
enum TopCommand {
    #[command(flatten)]
    Run(Command),
    /// Re-execute a run from its manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Subcommand, Serialize, Deserialize, Clone, Debug)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Build a QUBO and its Ising form.
    BuildQubo {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Exhaustive energy landscape of a small model.
    Oracle {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Also search all non-permutation column functions.
        #[arg(long)]
        column_functions: bool,
        /// Also write the energy of every column function.
        #[arg(long)]
        energies: bool,
    },
    /// Sample one configuration.
    Sample {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 1.0)]
        chain_strength: f64,
        /// Histogram bins.
        #[arg(long, default_value_t = 40)]
        bins: usize,
    },
    /// Sample the full parameter grid.
    Sweep {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated A values.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_A_VALUES.to_vec())]
        a_values: Vec<f64>,
        /// Comma-separated QUBO types.
        #[arg(long = "types", value_delimiter = ',', default_value = "r,h")]
        kinds: Vec<QuboKind>,
    },
    /// Decompose, solve parts and merge, for several seeds.
    Hybrid {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 1.0)]
        chain_strength: f64,
        /// Largest sub-instance.
        #[arg(long, default_value_t = 7)]
        max_size: usize,
        /// Number of runs; run i uses seed + i.
        #[arg(long, default_value_t = 10)]
        runs: u64,
    },
    /// Rank-sum comparison of two tour-length samples.
    Stats {
        /// Reference-model lengths (CSV, last column).
        #[arg(long)]
        reference: PathBuf,
        /// Heuristic-model lengths (CSV, last column).
        #[arg(long)]
        heuristic: PathBuf,
        #[arg(long, default_value = "instance")]
        name: String,
        #[arg(long)]
        optimum: Option<i64>,
    },
    /// Binned landscape of a sweep metric.
    PlotData {
        /// `sweep.json` written by the sweep command.
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long, default_value = "feasible_ratio")]
        metric: Metric,
        #[arg(long = "type")]
        kind: Option<QuboKind>,
        /// Keep cells with cs_real strictly above this value.
        #[arg(long)]
        min_cs_real: Option<f64>,
    },
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct InstanceArgs {
    /// TSPLIB file or `builtin:burma14`.
    #[arg(long, default_value = "builtin:burma14")]
    instance: String,
    /// Node list such as `0..6` or `0,3,5`.
    #[arg(long)]
    subset: Option<String>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct ModelArgs {
    #[arg(long = "type", default_value = "h")]
    kind: QuboKind,
    #[arg(long, default_value_t = 0.55)]
    a: f64,
    #[arg(long, default_value_t = 0.138)]
    b: f64,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct RunArgs {
    #[arg(long, default_value_t = 200)]
    reads: usize,
    #[arg(long, default_value_t = 1000)]
    sweeps: usize,
    /// Chimera grid size; 0 samples the logical model directly.
    #[arg(long, default_value_t = 13)]
    chimera_m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optimum tour length; computed exactly when omitted (n <= 12).
    #[arg(long)]
    optimum: Option<i64>,
}

impl RunArgs {
    fn topology(&self) -> Topology {
        match self.chimera_m {
            0 => Topology::Logical,
            m => Topology::Chimera { m: Some(m) },
        }
    }

    fn optimum(&self, inst: &Instance) -> Result<i64> {
        match self.optimum {
            Some(o) => Ok(o),
            None => Ok(brute_optimum(inst)?.length),
        }
    }

    fn config(&self, kind: QuboKind, penalties: Penalties, seed: u64) -> PipelineConfig {
        PipelineConfig {
            kind,
            penalties,
            num_reads: self.reads,
            sweeps: Some(self.sweeps),
            topology: self.topology(),
            seed,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    tool: String,
    version: String,
    #[serde(flatten)]
    command: Command,
}

fn load_instance(args: &InstanceArgs) -> Result<Instance> {
    let base = if args.instance == "builtin:burma14" {
        Instance::burma14()
    } else {
        parse_tsplib(&fs::read_to_string(&args.instance)?)?
    };
    match &args.subset {
        Some(spec) => base.subset(&parse_node_list(spec)?),
        None => Ok(base),
    }
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        write_atomic(&self.dir.join(name), bytes.as_ref())?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, buf)
    }
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn execute(command: &Command, out: &mut Output) -> Result<serde_json::Value> {
    match command {
        Command::BuildQubo { instance, model } => {
            let inst = load_instance(instance)?;
            let qubo = build_qubo(model.kind, &inst.dist_norm, model.a, model.b)?;
            let ising = qubo_to_ising(&qubo);
            out.write("instance.json", inst.to_json()?)?;
            out.write("qubo.json", qubo.to_json()?)?;
            out.write("ising.json", ising.to_json()?)?;
            Ok(json!({
                "instance": inst.name,
                "n_vars": qubo.n_vars,
                "n_quadratic": qubo.quadratic.len(),
                "offset": qubo.offset,
            }))
        }
        Command::Oracle {
            instance,
            model,
            column_functions,
            energies,
        } => {
            let inst = load_instance(instance)?;
            let qubo = build_qubo(model.kind, &inst.dist_norm, model.a, model.b)?;
            let mut summary = summarize(&inst, &qubo)?;
            if *column_functions {
                summary.best_infeasible = Some(enumerate_column_functions(&inst, &qubo)?);
            }
            if *energies {
                out.write_with("energies.csv", |buf| {
                    write_column_function_energies(&qubo, buf)
                })?;
            }
            out.write("oracle.json", pretty(&summary)?)?;
            out.write("oracle.txt", summary.to_string())?;
            Ok(json!({
                "n_feasible": summary.n_feasible,
                "n_nonpenalized": summary.n_nonpenalized,
                "best_b_coefficient": summary.best_feasible.b_coefficient,
                "worst_b_coefficient": summary.worst_feasible.b_coefficient,
            }))
        }
        Command::Sample {
            instance,
            model,
            run,
            chain_strength,
            bins,
        } => {
            let inst = load_instance(instance)?;
            let optimum = run.optimum(&inst)?;
            let penalties = Penalties {
                a: model.a,
                b: model.b,
                chain_strength: *chain_strength,
            };
            let cfg = run.config(model.kind, penalties, run.seed);
            let result = run_pipeline(&inst, &cfg)?;
            let record = RunRecord::from_run(&cfg, &inst, &result, optimum);
            let best = result.best_feasible().map(|(_, d)| d.order.clone());
            out.write_with("samples.csv", |buf| result.samples.write_csv(buf))?;
            out.write_with("histogram.csv", |buf| {
                result.histogram(*bins)?.write_csv(buf)
            })?;
            out.write(
                "run.json",
                pretty(&json!({"record": record, "schedule": schedule_json(&result.schedule), "best_tour": best}))?,
            )?;
            Ok(json!({
                "feasible_ratio": record.feasible_ratio,
                "optimum_ratio": record.optimum_ratio,
                "min_energy": record.min_energy,
            }))
        }
        Command::Sweep {
            instance,
            run,
            a_values,
            kinds,
        } => {
            let inst = load_instance(instance)?;
            let optimum = run.optimum(&inst)?;
            let spec = GridSpec {
                a_values: a_values.clone(),
                kinds: kinds.clone(),
                num_reads: run.reads,
                sweeps: Some(run.sweeps),
                topology: run.topology(),
                seed: run.seed,
            };
            let result = run_sweep(&inst, &spec, optimum)?;
            out.write_with("sweep.csv", |buf| result.write_csv(buf))?;
            out.write("sweep.json", pretty(&result)?)?;
            Ok(json!({
                "cells": result.cells,
                "distinct_real_configs": result.distinct_real_configs,
                "failed_cells": result.records.iter().filter(|r| r.error.is_some()).count(),
            }))
        }
        Command::Hybrid {
            instance,
            model,
            run,
            chain_strength,
            max_size,
            runs,
        } => {
            let inst = load_instance(instance)?;
            if *runs == 0 {
                return Err(Error::Argument("runs must be at least 1".into()));
            }
            let penalties = Penalties {
                a: model.a,
                b: model.b,
                chain_strength: *chain_strength,
            };
            let mut csv = String::from("seed,length\n");
            let mut lengths = Vec::new();
            for i in 0..*runs {
                let seed = run.seed + i;
                let res = solve_hybrid(&inst, &run.config(model.kind, penalties, seed), *max_size)?;
                out.write(&format!("hybrid_{seed}.json"), pretty(&res)?)?;
                csv.push_str(&format!("{seed},{}\n", res.tour.length));
                lengths.push(res.tour.length);
            }
            out.write("lengths.csv", csv)?;
            Ok(json!({ "lengths": lengths }))
        }
        Command::Stats {
            reference,
            heuristic,
            name,
            optimum,
        } => {
            let r = read_lengths(reference)?;
            let h = read_lengths(heuristic)?;
            let row = TableRow::compare(name.clone(), *optimum, &r, &h)?;
            out.write_with("table.csv", |buf| {
                write_table_csv(std::slice::from_ref(&row), buf)
            })?;
            out.write("stats.json", pretty(&row)?)?;
            Ok(serde_json::to_value(&row)?)
        }
        Command::PlotData {
            sweep,
            metric,
            kind,
            min_cs_real,
        } => {
            let result: SweepResult = serde_json::from_str(&fs::read_to_string(sweep)?)?;
            let filter = RecordFilter {
                kind: *kind,
                min_cs_real: *min_cs_real,
            };
            let grid = landscape_grid(&result.records, *metric, filter)?;
            out.write_with("landscape.csv", |buf| grid.write_csv(buf))?;
            out.write("landscape.svg", grid.to_svg())?;
            Ok(json!({
                "a_bins": grid.a_edges.len() - 1,
                "b_bins": grid.b_edges.len() - 1,
            }))
        }
    }
}

fn schedule_json(s: &Schedule) -> serde_json::Value {
    json!({"beta_hot": s.beta_hot, "beta_cold": s.beta_cold, "sweeps": s.sweeps})
}

/// Last comma-separated field of every line that parses as a number.
fn read_lengths(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let values: Vec<f64> = text
        .lines()
        .filter_map(|l| l.rsplit(',').next()?.trim().parse().ok())
        .collect();
    if values.is_empty() {
        return Err(Error::Argument(format!(
            "no numeric values in {}",
            path.display()
        )));
    }
    Ok(values)
}

fn run(command: Command, out_dir: PathBuf, jobs: Option<usize>) -> Result<serde_json::Value> {
    if jobs == Some(0) {
        return Err(Error::Argument("--jobs must be at least 1".into()));
    }
    let mut out = Output {
        dir: out_dir,
        files: Vec::new(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Argument(e.to_string()))?;
    let summary = pool.install(|| execute(&command, &mut out))?;
    let manifest = Manifest {
        tool: "qatsp".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command,
    };
    out.write("manifest.json", pretty(&manifest)?)?;
    Ok(json!({
        "status": "ok",
        "out": out.dir,
        "files": out.files,
        "summary": summary,
    }))
}

fn report(result: Result<serde_json::Value>) -> ExitCode {
    match result {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            println!("{}", json!({"status": "error", "message": e.to_string()}));
            if e.is_argument_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        TopCommand::Run(command) => report(run(command, cli.out, cli.jobs)),
        TopCommand::Replay { manifest } => {
            let loaded = fs::read_to_string(&manifest)
                .map_err(Error::from)
                .and_then(|t| serde_json::from_str::<Manifest>(&t).map_err(Error::from));
            report(loaded.and_then(|m| run(m.command, cli.out, cli.jobs)))
        }
    }
}
