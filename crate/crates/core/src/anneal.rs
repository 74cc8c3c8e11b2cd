//! Simulated annealing over Ising models.
//!
//! Each read is an independent restart: uniform random spins, then Metropolis
//! sweeps under an increasing inverse temperature. Read `r` draws from ChaCha
//! stream `r` of the master seed, so a sample set depends only on the model,
//! the schedule and the seed, never on how reads are spread over threads.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::fmt_f64;
use crate::qubo::IsingModel;
use crate::{Error, Result};

pub const DEFAULT_SWEEPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Geometric,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    /// Fresh random permutation of the spins every sweep.
    RandomPermutation,
    /// Spins in index order.
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub beta_hot: f64,
    pub beta_cold: f64,
    pub sweeps: usize,
    pub interpolation: Interpolation,
    pub order: SweepOrder,
}

impl Schedule {
    pub fn new(beta_hot: f64, beta_cold: f64, sweeps: usize) -> Result<Self> {
        let s = Schedule {
            beta_hot,
            beta_cold,
            sweeps,
            interpolation: Interpolation::Geometric,
            order: SweepOrder::RandomPermutation,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_sweeps(mut self, sweeps: usize) -> Self {
        self.sweeps = sweeps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_hot > 0.0 && self.beta_hot < self.beta_cold && self.beta_cold.is_finite()) {
            return Err(Error::arg(format!(
                "schedule needs 0 < beta_hot < beta_cold, got {} and {}",
                self.beta_hot, self.beta_cold
            )));
        }
        if self.sweeps == 0 {
            return Err(Error::arg("schedule needs at least one sweep"));
        }
        Ok(())
    }

    /// Inverse temperature of every sweep, from hot to cold.
    pub fn betas(&self) -> Vec<f64> {
        let k = self.sweeps;
        if k == 1 {
            return vec![self.beta_cold];
        }
        (0..k)
            .map(|i| {
                let t = i as f64 / (k - 1) as f64;
                match self.interpolation {
                    Interpolation::Geometric => {
                        (self.beta_hot.ln() + t * (self.beta_cold.ln() - self.beta_hot.ln())).exp()
                    }
                    Interpolation::Linear => self.beta_hot + t * (self.beta_cold - self.beta_hot),
                }
            })
            .collect()
    }
}

/// Per-spin bound on the single-flip energy change, `2(|h_i| + sum_j |J_ij|)`.
pub fn flip_energy_bounds(m: &IsingModel) -> Vec<f64> {
    let mut bound: Vec<f64> = m.h.iter().map(|h| h.abs()).collect();
    for (&(u, v), &j) in &m.j {
        bound[u] += j.abs();
        bound[v] += j.abs();
    }
    bound.iter_mut().for_each(|b| *b *= 2.0);
    bound
}

/// Per-spin estimate of the smallest nonzero flip energy, `2 min(|h_i|, |J_ij|)`
/// over the nonzero terms touching the spin; zero for isolated spins.
pub fn flip_energy_floors(m: &IsingModel) -> Vec<f64> {
    let mut floor: Vec<f64> =
        m.h.iter()
            .map(|h| if *h != 0.0 { h.abs() } else { f64::INFINITY })
            .collect();
    for (&(u, v), &j) in &m.j {
        if j != 0.0 {
            floor[u] = floor[u].min(j.abs());
            floor[v] = floor[v].min(j.abs());
        }
    }
    floor
        .into_iter()
        .map(|f| if f.is_finite() { 2.0 * f } else { 0.0 })
        .collect()
}

/// Hot end flips the stiffest spin with probability 1/2, cold end makes the
/// smallest nonzero excitation with probability 1/100; 1000 geometric sweeps.
pub fn default_schedule(m: &IsingModel) -> Result<Schedule> {
    if m.n_spins() == 0 {
        return Err(Error::DegenerateModel("model has no spins".into()));
    }
    let max = flip_energy_bounds(m).into_iter().fold(0.0, f64::max);
    let min = flip_energy_floors(m)
        .into_iter()
        .filter(|&b| b > 0.0)
        .fold(f64::INFINITY, f64::min);
    if max <= 0.0 {
        return Err(Error::DegenerateModel(
            "all biases and couplings are zero".into(),
        ));
    }
    Schedule::new(2f64.ln() / max, 100f64.ln() / min, DEFAULT_SWEEPS)
}

/// Compressed adjacency of an Ising model.
#[derive(Debug, Clone)]
pub(crate) struct Adjacency {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<f64>,
}

impl Adjacency {
    pub(crate) fn new(m: &IsingModel) -> Self {
        let n = m.n_spins();
        let mut degree = vec![0usize; n];
        for &(u, v) in m.j.keys() {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![0u32; offsets[n]];
        let mut weights = vec![0.0; offsets[n]];
        for (&(u, v), &j) in &m.j {
            neighbors[fill[u]] = v as u32;
            weights[fill[u]] = j;
            fill[u] += 1;
            neighbors[fill[v]] = u as u32;
            weights[fill[v]] = j;
            fill[v] += 1;
        }
        Adjacency {
            offsets,
            neighbors,
            weights,
        }
    }
}

/// One annealing run from a random start; returns the final spins.
pub(crate) fn anneal_once<R: Rng>(
    h: &[f64],
    adj: &Adjacency,
    betas: &[f64],
    order: SweepOrder,
    rng: &mut R,
) -> Vec<i8> {
    let n = h.len();
    let mut s: Vec<i8> = (0..n)
        .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
        .collect();
    let mut field: Vec<f64> = h.to_vec();
    for i in 0..n {
        for k in adj.offsets[i]..adj.offsets[i + 1] {
            field[i] += adj.weights[k] * s[adj.neighbors[k] as usize] as f64;
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for &beta in betas {
        if order == SweepOrder::RandomPermutation {
            perm.shuffle(rng);
        }
        for &i in &perm {
            let delta = -2.0 * s[i] as f64 * field[i];
            if delta > 0.0 && rng.gen::<f64>() >= (-beta * delta).exp() {
                continue;
            }
            s[i] = -s[i];
            let twice = 2.0 * s[i] as f64;
            for k in adj.offsets[i]..adj.offsets[i + 1] {
                field[adj.neighbors[k] as usize] += twice * adj.weights[k];
            }
        }
    }
    s
}

pub(crate) fn read_rng(seed: u64, read: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(read as u64);
    rng
}

/// Runs `num_reads` independent anneals; states are returned in read order.
pub fn anneal_reads(
    m: &IsingModel,
    num_reads: usize,
    schedule: &Schedule,
    seed: u64,
) -> Result<Vec<Vec<i8>>> {
    schedule.validate()?;
    if num_reads == 0 {
        return Err(Error::arg("num_reads must be at least 1"));
    }
    if m.n_spins() == 0 {
        return Err(Error::DegenerateModel("model has no spins".into()));
    }
    let adj = Adjacency::new(m);
    let betas = schedule.betas();
    Ok((0..num_reads)
        .into_par_iter()
        .map(|r| anneal_once(&m.h, &adj, &betas, schedule.order, &mut read_rng(seed, r)))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub state: Vec<i8>,
    pub energy: f64,
    pub occurrences: u64,
    pub chain_break_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    /// Sorted by energy, then state.
    pub records: Vec<SampleRecord>,
    pub num_reads: u64,
    pub seed: u64,
}

/// One read after post-processing: logical state plus chain-break tally.
#[derive(Debug, Clone)]
pub struct Read {
    pub state: Vec<i8>,
    pub broken_chains: usize,
    pub total_chains: usize,
}

impl SampleSet {
    /// Merges identical `(state, broken chain count)` reads; energies are
    /// evaluated on `m`.
    pub fn aggregate(
        m: &IsingModel,
        reads: impl IntoIterator<Item = Read>,
        seed: u64,
    ) -> SampleSet {
        let mut groups: BTreeMap<(Vec<i8>, usize), (u64, usize)> = BTreeMap::new();
        let mut num_reads = 0;
        for r in reads {
            num_reads += 1;
            let e = groups
                .entry((r.state, r.broken_chains))
                .or_insert((0, r.total_chains));
            e.0 += 1;
        }
        let mut records: Vec<SampleRecord> = groups
            .into_iter()
            .map(|((state, broken), (occ, total))| SampleRecord {
                energy: m.energy(&state),
                chain_break_fraction: if total == 0 {
                    0.0
                } else {
                    broken as f64 / total as f64
                },
                state,
                occurrences: occ,
            })
            .collect();
        records.sort_by(|a, b| {
            a.energy
                .total_cmp(&b.energy)
                .then_with(|| a.state.cmp(&b.state))
        });
        SampleSet {
            records,
            num_reads,
            seed,
        }
    }

    pub fn lowest(&self) -> Option<&SampleRecord> {
        self.records.first()
    }

    /// Occurrence-weighted mean chain-break fraction.
    pub fn mean_chain_break(&self) -> f64 {
        let total: f64 = self
            .records
            .iter()
            .map(|r| r.chain_break_fraction * r.occurrences as f64)
            .sum();
        total / self.num_reads as f64
    }

    /// `state,energy,occurrences,chain_break_fraction`, state as a bitstring
    /// with `1` for spin up.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "state,energy,occurrences,chain_break_fraction")?;
        for r in &self.records {
            let bits: String = r
                .state
                .iter()
                .map(|&s| if s > 0 { '1' } else { '0' })
                .collect();
            writeln!(
                out,
                "{bits},{},{},{}",
                fmt_f64(r.energy),
                r.occurrences,
                fmt_f64(r.chain_break_fraction)
            )?;
        }
        Ok(())
    }
}

/// Samples `m` directly (no embedding).
pub fn sample(
    m: &IsingModel,
    num_reads: usize,
    schedule: &Schedule,
    seed: u64,
) -> Result<SampleSet> {
    let states = anneal_reads(m, num_reads, schedule, seed)?;
    let reads = states.into_iter().map(|state| Read {
        state,
        broken_chains: 0,
        total_chains: 0,
    });
    Ok(SampleSet::aggregate(m, reads, seed))
}
