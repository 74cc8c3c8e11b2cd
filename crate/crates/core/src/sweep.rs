//! Parameter grid, end-to-end pipeline and run metrics.
//!
//! For every `A` the grid holds five `B` values from `0.001` to `A/2` and five
//! chain strengths from `A` to `1`, both linearly spaced. A cell runs
//! build -> Ising -> embed -> auto-scale -> anneal -> unembed -> decode, and
//! is summarized as a [`RunRecord`].

use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anneal::{anneal_reads, default_schedule, Read, SampleRecord, SampleSet, Schedule};
use crate::embedding::{
    chimera_graph, clique_embedding, embed_ising, min_chimera_size, sample_embedded,
};
use crate::instance::Instance;
use crate::io::{fmt_f64, round_sig};
use crate::qubo::{
    auto_scale, build_qubo, decode_state, qubo_to_ising, spins_to_bits, IsingModel, Penalties,
    Qubo, QuboKind, ScaledParams, TourDecode,
};
use crate::{derive_seed, Error, Result};

/// `A` values of the full study.
pub const DEFAULT_A_VALUES: [f64; 5] = [0.4, 0.55, 0.7, 0.85, 1.0];
/// Points per `B` and chain-strength axis.
pub const GRID_POINTS: usize = 5;
/// Smallest `B` of every axis.
pub const B_FLOOR: f64 = 0.001;
/// Reads per configuration in the full study.
pub const DEFAULT_NUM_READS: usize = 2000;
/// Landscape resolution per axis.
pub const LANDSCAPE_BINS: usize = 20;

/// `B_k = 0.001 + k * (A/2 - 0.001) / 4`.
pub fn b_values(a: f64) -> Vec<f64> {
    let step = (a / 2.0 - B_FLOOR) / (GRID_POINTS - 1) as f64;
    (0..GRID_POINTS)
        .map(|k| B_FLOOR + k as f64 * step)
        .collect()
}

/// `cs_k = A + k * (1 - A) / 4`.
pub fn chain_values(a: f64) -> Vec<f64> {
    let step = (1.0 - a) / (GRID_POINTS - 1) as f64;
    (0..GRID_POINTS).map(|k| a + k as f64 * step).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub a_index: usize,
    pub b_index: usize,
    pub cs_index: usize,
    pub a: f64,
    pub b: f64,
    pub chain_strength: f64,
}

impl GridCell {
    pub fn penalties(&self) -> Penalties {
        Penalties {
            a: self.a,
            b: self.b,
            chain_strength: self.chain_strength,
        }
    }

    /// Seed shared by both QUBO types so their cells see the same random streams.
    pub fn seed(&self, master: u64) -> u64 {
        derive_seed(
            master,
            &[
                self.a_index as u64,
                self.b_index as u64,
                self.cs_index as u64,
            ],
        )
    }
}

/// Full `A x B x chain_strength` cross product, `A`-major.
pub fn build_grid(a_values: &[f64]) -> Result<Vec<GridCell>> {
    if a_values.is_empty() {
        return Err(Error::arg("grid needs at least one A value"));
    }
    let mut cells = Vec::with_capacity(a_values.len() * GRID_POINTS * GRID_POINTS);
    for (a_index, &a) in a_values.iter().enumerate() {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::arg(format!("A must lie in (0, 1], got {a}")));
        }
        if a / 2.0 <= B_FLOOR {
            return Err(Error::arg(format!(
                "A = {a} leaves no room above B = {B_FLOOR}"
            )));
        }
        for (b_index, b) in b_values(a).into_iter().enumerate() {
            for (cs_index, chain_strength) in chain_values(a).into_iter().enumerate() {
                cells.push(GridCell {
                    a_index,
                    b_index,
                    cs_index,
                    a,
                    b,
                    chain_strength,
                });
            }
        }
    }
    Ok(cells)
}

/// Where the logical model is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "topology", rename_all = "snake_case")]
pub enum Topology {
    /// Directly on the logical graph; chain strength is bookkeeping only.
    Logical,
    /// Clique-embedded on `C(m)`; `None` picks the smallest grid that fits.
    Chimera { m: Option<usize> },
}

/// Everything needed to run one configuration end to end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub kind: QuboKind,
    pub penalties: Penalties,
    pub num_reads: usize,
    /// Overrides the default sweep count when set.
    pub sweeps: Option<usize>,
    pub topology: Topology,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let p = self.penalties;
        for (name, v) in [("A", p.a), ("B", p.b), ("chain strength", p.chain_strength)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::arg(format!("{name} must be positive, got {v}")));
            }
        }
        if self.num_reads == 0 {
            return Err(Error::arg("num_reads must be at least 1"));
        }
        if self.sweeps == Some(0) {
            return Err(Error::arg("sweeps must be at least 1"));
        }
        if let Topology::Chimera { m: Some(0) } = self.topology {
            return Err(Error::arg("Chimera grid size must be at least 1"));
        }
        Ok(())
    }
}

/// Artifacts of one pipeline execution.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub qubo: Qubo,
    pub logical: IsingModel,
    pub scaled: ScaledParams,
    pub schedule: Schedule,
    /// Logical states with logical (unscaled) Ising energies.
    pub samples: SampleSet,
    /// Decode of each sample record, same order.
    pub decodes: Vec<TourDecode>,
    /// Physical qubits used (logical spins when unembedded).
    pub num_qubits: usize,
}

impl PipelineRun {
    /// Reported QUBO energy of a record.
    pub fn qubo_energy(&self, rec: &SampleRecord) -> f64 {
        rec.energy + self.logical.offset - self.qubo.offset
    }

    /// Lowest-energy feasible read, if any.
    pub fn best_feasible(&self) -> Option<(&SampleRecord, &TourDecode)> {
        self.samples
            .records
            .iter()
            .zip(&self.decodes)
            .find(|(_, d)| d.feasible)
    }

    pub fn histogram(&self, bins: usize) -> Result<Histogram> {
        energy_histogram(
            &self.samples,
            |i, rec| (self.qubo_energy(rec), EnergyClass::of(&self.decodes[i])),
            bins,
        )
    }
}

/// Runs one configuration on `instance`.
pub fn run_pipeline(instance: &Instance, cfg: &PipelineConfig) -> Result<PipelineRun> {
    cfg.validate()?;
    let qubo = build_qubo(
        cfg.kind,
        &instance.dist_norm,
        cfg.penalties.a,
        cfg.penalties.b,
    )?;
    let logical = qubo_to_ising(&qubo);
    let (samples, scaled, schedule, num_qubits) = match cfg.topology {
        Topology::Logical => {
            let (physical, scaled) = auto_scale(&logical, cfg.penalties)?;
            let schedule = schedule_for(&physical, cfg.sweeps)?;
            let states = anneal_reads(&physical, cfg.num_reads, &schedule, cfg.seed)?;
            let reads = states.into_iter().map(|state| Read {
                state,
                broken_chains: 0,
                total_chains: 0,
            });
            let samples = SampleSet::aggregate(&logical, reads, cfg.seed);
            (samples, scaled, schedule, logical.n_spins())
        }
        Topology::Chimera { m } => {
            let m = m.unwrap_or_else(|| min_chimera_size(qubo.n_vars));
            let graph = chimera_graph(m)?;
            let embedding = clique_embedding(qubo.n_vars, &graph)?;
            let emb = embed_ising(&logical, &embedding, &graph, cfg.penalties.chain_strength)?;
            let (physical, scaled) = auto_scale(&emb.model, cfg.penalties)?;
            let schedule = schedule_for(&physical, cfg.sweeps)?;
            let samples = sample_embedded(
                &physical,
                &emb,
                &logical,
                cfg.num_reads,
                &schedule,
                cfg.seed,
            )?;
            (samples, scaled, schedule, emb.qubits.len())
        }
    };
    let meta = qubo.meta.as_ref().expect("TSP builders attach metadata");
    let decodes = samples
        .records
        .iter()
        .map(|r| decode_state(&spins_to_bits(&r.state), meta))
        .collect::<Result<Vec<_>>>()?;
    Ok(PipelineRun {
        qubo,
        logical,
        scaled,
        schedule,
        samples,
        decodes,
        num_qubits,
    })
}

fn schedule_for(m: &IsingModel, sweeps: Option<usize>) -> Result<Schedule> {
    let s = default_schedule(m)?;
    Ok(match sweeps {
        Some(k) => s.with_sweeps(k),
        None => s,
    })
}

/// Metrics of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub qubo_type: QuboKind,
    pub a: f64,
    pub b: f64,
    pub chain_strength: f64,
    pub a_real: Option<f64>,
    pub b_real: Option<f64>,
    pub cs_real: Option<f64>,
    pub scale: Option<f64>,
    pub num_reads: u64,
    pub n_feasible: u64,
    pub n_optimum: u64,
    pub n_nonpenalized: u64,
    pub feasible_ratio: f64,
    pub optimum_ratio: f64,
    /// Undefined when nothing feasible was read.
    pub optimum_by_feasible: Option<f64>,
    /// Lowest reported QUBO energy among the reads.
    pub min_energy: Option<f64>,
    pub mean_chain_break: Option<f64>,
    pub seed: u64,
    /// Reason the cell produced no samples.
    pub error: Option<String>,
}

pub const RUN_RECORD_HEADER: &str = "qubo_type,A,B,chain_strength,A_real,B_real,cs_real,scale,num_reads,n_feasible,n_optimum,n_nonpenalized,feasible_ratio,optimum_ratio,optimum_by_feasible,min_energy,mean_chain_break,seed";

impl RunRecord {
    /// Counts feasible, optimal (tour length equal to `optimum`) and
    /// non-penalized reads.
    pub fn from_run(
        cfg: &PipelineConfig,
        instance: &Instance,
        run: &PipelineRun,
        optimum: i64,
    ) -> RunRecord {
        let mut n_feasible = 0;
        let mut n_optimum = 0;
        let mut n_nonpenalized = 0;
        for (rec, dec) in run.samples.records.iter().zip(&run.decodes) {
            if let Some(order) = &dec.order {
                n_feasible += rec.occurrences;
                if !dec.penalized {
                    n_nonpenalized += rec.occurrences;
                }
                if instance.cycle_length_unchecked(order) == optimum {
                    n_optimum += rec.occurrences;
                }
            }
        }
        let reads = run.samples.num_reads;
        RunRecord {
            qubo_type: cfg.kind,
            a: cfg.penalties.a,
            b: cfg.penalties.b,
            chain_strength: cfg.penalties.chain_strength,
            a_real: Some(run.scaled.a_real),
            b_real: Some(run.scaled.b_real),
            cs_real: Some(run.scaled.cs_real),
            scale: Some(run.scaled.scale),
            num_reads: reads,
            n_feasible,
            n_optimum,
            n_nonpenalized,
            feasible_ratio: n_feasible as f64 / reads as f64,
            optimum_ratio: n_optimum as f64 / reads as f64,
            optimum_by_feasible: (n_feasible > 0).then(|| n_optimum as f64 / n_feasible as f64),
            min_energy: run.samples.lowest().map(|r| run.qubo_energy(r)),
            mean_chain_break: Some(run.samples.mean_chain_break()),
            seed: cfg.seed,
            error: None,
        }
    }

    pub fn failed(cfg: &PipelineConfig, err: &Error) -> RunRecord {
        RunRecord {
            qubo_type: cfg.kind,
            a: cfg.penalties.a,
            b: cfg.penalties.b,
            chain_strength: cfg.penalties.chain_strength,
            a_real: None,
            b_real: None,
            cs_real: None,
            scale: None,
            num_reads: 0,
            n_feasible: 0,
            n_optimum: 0,
            n_nonpenalized: 0,
            feasible_ratio: 0.0,
            optimum_ratio: 0.0,
            optimum_by_feasible: None,
            min_energy: None,
            mean_chain_break: None,
            seed: cfg.seed,
            error: Some(err.to_string()),
        }
    }

    pub fn metric(&self, metric: Metric) -> Option<f64> {
        if self.error.is_some() {
            return None;
        }
        match metric {
            Metric::FeasibleRatio => Some(self.feasible_ratio),
            Metric::OptimumRatio => Some(self.optimum_ratio),
            Metric::OptimumByFeasible => self.optimum_by_feasible,
        }
    }

    fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.qubo_type.short(),
            fmt_f64(self.a),
            fmt_f64(self.b),
            fmt_f64(self.chain_strength),
            opt(self.a_real),
            opt(self.b_real),
            opt(self.cs_real),
            opt(self.scale),
            self.num_reads,
            self.n_feasible,
            self.n_optimum,
            self.n_nonpenalized,
            fmt_f64(self.feasible_ratio),
            fmt_f64(self.optimum_ratio),
            opt(self.optimum_by_feasible),
            opt(self.min_energy),
            opt(self.mean_chain_break),
            self.seed
        )
    }
}

/// Sweep inputs besides the instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub a_values: Vec<f64>,
    pub kinds: Vec<QuboKind>,
    pub num_reads: usize,
    pub sweeps: Option<usize>,
    pub topology: Topology,
    pub seed: u64,
}

impl GridSpec {
    /// The full study grid at the given read count.
    pub fn standard(num_reads: usize, topology: Topology, seed: u64) -> GridSpec {
        GridSpec {
            a_values: DEFAULT_A_VALUES.to_vec(),
            kinds: QuboKind::ALL.to_vec(),
            num_reads,
            sweeps: None,
            topology,
            seed,
        }
    }

    /// `(kind, cell)` jobs in canonical order.
    pub fn jobs(&self) -> Result<Vec<PipelineConfig>> {
        let cells = build_grid(&self.a_values)?;
        let mut jobs = Vec::with_capacity(cells.len() * self.kinds.len());
        for &kind in &self.kinds {
            for cell in &cells {
                jobs.push(PipelineConfig {
                    kind,
                    penalties: cell.penalties(),
                    num_reads: self.num_reads,
                    sweeps: self.sweeps,
                    topology: self.topology,
                    seed: cell.seed(self.seed),
                });
            }
        }
        Ok(jobs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub instance: String,
    pub optimum: i64,
    pub records: Vec<RunRecord>,
    /// Raw grid cells executed.
    pub cells: usize,
    /// Distinct `(type, A_real, B_real, cs_real)` after rounding to 3 decimals.
    pub distinct_real_configs: usize,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{RUN_RECORD_HEADER}")?;
        for r in &self.records {
            writeln!(out, "{}", r.csv_row())?;
        }
        Ok(())
    }
}

fn distinct_real_configs(records: &[RunRecord]) -> usize {
    let key = |v: Option<f64>| v.map(|x| (x * 1000.0).round() as i64);
    records
        .iter()
        .filter(|r| r.error.is_none())
        .map(|r| (r.qubo_type, key(r.a_real), key(r.b_real), key(r.cs_real)))
        .collect::<BTreeSet<_>>()
        .len()
}

/// Executes every cell of `spec`; cells that fail keep a record with the reason.
pub fn run_sweep(instance: &Instance, spec: &GridSpec, optimum: i64) -> Result<SweepResult> {
    if spec.kinds.is_empty() {
        return Err(Error::arg("sweep needs at least one QUBO type"));
    }
    let jobs = spec.jobs()?;
    for job in &jobs {
        job.validate()?;
    }
    let records: Vec<RunRecord> = jobs
        .par_iter()
        .map(|cfg| match run_pipeline(instance, cfg) {
            Ok(run) => RunRecord::from_run(cfg, instance, &run, optimum),
            Err(e) => RunRecord::failed(cfg, &e),
        })
        .collect();
    Ok(SweepResult {
        instance: instance.name.clone(),
        optimum,
        cells: records.len(),
        distinct_real_configs: distinct_real_configs(&records),
        records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    FeasibleRatio,
    OptimumRatio,
    OptimumByFeasible,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "feasible_ratio" => Ok(Metric::FeasibleRatio),
            "optimum_ratio" => Ok(Metric::OptimumRatio),
            "optimum_by_feasible" => Ok(Metric::OptimumByFeasible),
            _ => Err(Error::arg(format!("unknown metric `{s}`"))),
        }
    }
}

/// Which records enter a landscape.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordFilter {
    pub kind: Option<QuboKind>,
    /// Keep records with `cs_real` strictly above this value.
    pub min_cs_real: Option<f64>,
}

impl RecordFilter {
    pub fn accepts(&self, r: &RunRecord) -> bool {
        self.kind.is_none_or(|k| k == r.qubo_type)
            && self
                .min_cs_real
                .is_none_or(|c| r.cs_real.is_some_and(|cs| cs > c))
    }
}

/// Binned mean of a metric over `(A_real, B_real)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub metric: Metric,
    pub a_edges: Vec<f64>,
    pub b_edges: Vec<f64>,
    /// `values[a_bin][b_bin]`, `None` for empty bins.
    pub values: Vec<Vec<Option<f64>>>,
    pub counts: Vec<Vec<usize>>,
}

fn edges(lo: f64, hi: f64) -> Vec<f64> {
    if hi > lo {
        (0..=LANDSCAPE_BINS)
            .map(|i| lo + (hi - lo) * i as f64 / LANDSCAPE_BINS as f64)
            .collect()
    } else {
        vec![lo, hi]
    }
}

fn bin_of(x: f64, edges: &[f64]) -> usize {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    if hi <= lo {
        return 0;
    }
    (((x - lo) / (hi - lo) * bins as f64).floor() as usize).min(bins - 1)
}

/// 20 x 20 uniform bins over the observed range (one bin on a flat axis).
pub fn landscape_grid(
    records: &[RunRecord],
    metric: Metric,
    filter: RecordFilter,
) -> Result<LandscapeGrid> {
    let points: Vec<(f64, f64, f64)> = records
        .iter()
        .filter(|r| filter.accepts(r))
        .filter_map(|r| Some((r.a_real?, r.b_real?, r.metric(metric)?)))
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyGrid(format!(
            "no records match {filter:?} with a defined {metric:?}"
        )));
    }
    let range = |f: fn(&(f64, f64, f64)) -> f64| {
        points
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            })
    };
    let (a_lo, a_hi) = range(|p| p.0);
    let (b_lo, b_hi) = range(|p| p.1);
    let a_edges = edges(a_lo, a_hi);
    let b_edges = edges(b_lo, b_hi);
    let (na, nb) = (a_edges.len() - 1, b_edges.len() - 1);
    let mut sums = vec![vec![0.0; nb]; na];
    let mut counts = vec![vec![0usize; nb]; na];
    for &(a, b, v) in &points {
        let (i, j) = (bin_of(a, &a_edges), bin_of(b, &b_edges));
        sums[i][j] += v;
        counts[i][j] += 1;
    }
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(row, crow)| {
            row.iter()
                .zip(crow)
                .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
                .collect()
        })
        .collect();
    Ok(LandscapeGrid {
        metric,
        a_edges,
        b_edges,
        values,
        counts,
    })
}

impl LandscapeGrid {
    /// `a_lo,a_hi,b_lo,b_hi,count,mean`, one row per bin.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "a_lo,a_hi,b_lo,b_hi,count,mean")?;
        for i in 0..self.values.len() {
            for j in 0..self.values[i].len() {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    fmt_f64(round_sig(self.a_edges[i], 12)),
                    fmt_f64(round_sig(self.a_edges[i + 1], 12)),
                    fmt_f64(round_sig(self.b_edges[j], 12)),
                    fmt_f64(round_sig(self.b_edges[j + 1], 12)),
                    self.counts[i][j],
                    self.values[i][j].map(fmt_f64).unwrap_or_default()
                )?;
            }
        }
        Ok(())
    }

    /// Minimal SVG heatmap (white = 0, dark red = 1, grey = empty).
    pub fn to_svg(&self) -> String {
        let cell = 20;
        let (na, nb) = (self.values.len(), self.values.first().map_or(0, Vec::len));
        let (w, h) = (nb * cell + 80, na * cell + 60);
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"10\">\n"
        );
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let fill = match v {
                    Some(v) => {
                        let t = v.clamp(0.0, 1.0);
                        let g = (255.0 * (1.0 - t)).round() as u8;
                        format!("rgb(255,{g},{g})")
                    }
                    None => "#ccc".to_string(),
                };
                // A_real grows upward
                let y = 20 + (na - 1 - i) * cell;
                s.push_str(&format!(
                    "<rect x=\"{}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"{fill}\"/>\n",
                    60 + j * cell
                ));
            }
        }
        s.push_str(&format!(
            "<text x=\"60\" y=\"{}\">B_real {:.4} .. {:.4}</text>\n",
            h - 20,
            self.b_edges[0],
            self.b_edges[self.b_edges.len() - 1]
        ));
        s.push_str(&format!(
            "<text x=\"2\" y=\"14\">A_real {:.4} .. {:.4}</text>\n",
            self.a_edges[0],
            self.a_edges[self.a_edges.len() - 1]
        ));
        s.push_str("</svg>\n");
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyClass {
    /// Valid tour avoiding penalized edges (all valid tours for r-QUBO).
    Feasible,
    /// Valid tour using a penalized edge.
    Penalized,
    Infeasible,
}

impl EnergyClass {
    pub fn of(d: &TourDecode) -> EnergyClass {
        match (d.feasible, d.penalized) {
            (false, _) => EnergyClass::Infeasible,
            (true, true) => EnergyClass::Penalized,
            (true, false) => EnergyClass::Feasible,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub feasible: Vec<u64>,
    pub penalized: Vec<u64>,
    pub infeasible: Vec<u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.feasible
            .iter()
            .chain(&self.penalized)
            .chain(&self.infeasible)
            .sum()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "bin_lo,bin_hi,feasible,penalized,infeasible")?;
        for i in 0..self.feasible.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(round_sig(self.edges[i], 12)),
                fmt_f64(round_sig(self.edges[i + 1], 12)),
                self.feasible[i],
                self.penalized[i],
                self.infeasible[i]
            )?;
        }
        Ok(())
    }
}

/// Occurrence histogram of sample energies split by class. `classify` maps a
/// record (with its index) to the energy to bin and its class.
pub fn energy_histogram(
    samples: &SampleSet,
    classify: impl Fn(usize, &SampleRecord) -> (f64, EnergyClass),
    bins: usize,
) -> Result<Histogram> {
    if bins < 2 {
        return Err(Error::arg("histogram needs at least 2 bins"));
    }
    let entries: Vec<(f64, EnergyClass, u64)> = samples
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let (e, c) = classify(i, r);
            (e, c, r.occurrences)
        })
        .collect();
    let (mut lo, mut hi) = entries
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
            (lo.min(e.0), hi.max(e.0))
        });
    if entries.is_empty() {
        (lo, hi) = (0.0, 1.0);
    } else if hi <= lo {
        (lo, hi) = (lo - 0.5, hi + 0.5);
    }
    let edges: Vec<f64> = (0..=bins)
        .map(|i| lo + (hi - lo) * i as f64 / bins as f64)
        .collect();
    let mut h = Histogram {
        edges,
        feasible: vec![0; bins],
        penalized: vec![0; bins],
        infeasible: vec![0; bins],
    };
    for (e, class, occ) in entries {
        let i = (((e - lo) / (hi - lo) * bins as f64).floor() as usize).min(bins - 1);
        match class {
            EnergyClass::Feasible => h.feasible[i] += occ,
            EnergyClass::Penalized => h.penalized[i] += occ,
            EnergyClass::Infeasible => h.infeasible[i] += occ,
        }
    }
    Ok(h)
}
