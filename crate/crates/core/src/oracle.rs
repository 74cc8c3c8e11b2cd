//! Exhaustive ground truth for small instances.
//!
//! Tours are enumerated as raw position sequences (all `n!` of them, rotations
//! and reflections counted separately). The infeasible search space is the set
//! of *column functions*: states where every position holds exactly one city,
//! i.e. maps `position -> city`. Non-injective maps are exactly the states
//! violating only row constraints, which contains the cheapest `-(2n-2)A`
//! stratum.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::instance::{Instance, Tour};
use crate::qubo::{var, DenseQubo, Qubo, QuboKind, QuboMeta};
use crate::{Error, Result};

/// Largest `n` for which all `n!` sequences are enumerated.
pub const MAX_TOUR_ENUMERATION: usize = 10;
/// Largest `n^n` accepted by [`enumerate_column_functions`].
pub const MAX_COLUMN_FUNCTIONS: u64 = 100_000_000;
/// Largest `n` accepted by [`brute_optimum`].
pub const MAX_BRUTE_FORCE: usize = 12;

const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourExtreme {
    /// Reported QUBO energy.
    pub energy: f64,
    /// `(energy + 2nA) / B`: the distance part in units of `B`.
    pub b_coefficient: f64,
    pub order: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibleRecord {
    pub energy: f64,
    /// `(energy - constraint_energy) / B`.
    pub b_coefficient: f64,
    /// Energy of the `H_A` part alone (offset excluded).
    pub constraint_energy: f64,
    /// City placed at each position.
    pub assignment: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeSummary {
    pub instance: String,
    pub kind: QuboKind,
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub n_feasible: u64,
    pub n_nonpenalized: u64,
    pub n_penalized: u64,
    pub best_feasible: TourExtreme,
    pub worst_feasible: TourExtreme,
    pub best_nonpenalized: Option<TourExtreme>,
    pub worst_nonpenalized: Option<TourExtreme>,
    pub best_infeasible: Option<InfeasibleRecord>,
    /// Every sequence reaching the best feasible energy.
    pub optimal_orders: Vec<Vec<usize>>,
}

fn meta_of(qubo: &Qubo) -> Result<&QuboMeta> {
    qubo.meta
        .as_ref()
        .ok_or_else(|| Error::arg("QUBO carries no TSP layout"))
}

/// Advances `v` to the next lexicographic permutation; false when exhausted.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[derive(Clone)]
struct Extreme {
    energy: f64,
    order: Vec<usize>,
}

#[derive(Clone, Default)]
struct TourScan {
    count: u64,
    nonpenalized: u64,
    best: Option<Extreme>,
    worst: Option<Extreme>,
    best_np: Option<Extreme>,
    worst_np: Option<Extreme>,
    optimal: Vec<(f64, Vec<usize>)>,
}

fn keep_min(slot: &mut Option<Extreme>, cand: &Extreme) {
    if slot.as_ref().is_none_or(|s| cand.energy < s.energy) {
        *slot = Some(cand.clone());
    }
}

fn keep_max(slot: &mut Option<Extreme>, cand: &Extreme) {
    if slot.as_ref().is_none_or(|s| cand.energy > s.energy) {
        *slot = Some(cand.clone());
    }
}

impl TourScan {
    fn push(&mut self, energy: f64, order: &[usize], penalized: bool) {
        self.count += 1;
        let cand = Extreme {
            energy,
            order: order.to_vec(),
        };
        keep_min(&mut self.best, &cand);
        keep_max(&mut self.worst, &cand);
        if !penalized {
            self.nonpenalized += 1;
            keep_min(&mut self.best_np, &cand);
            keep_max(&mut self.worst_np, &cand);
        }
        let best = self.best.as_ref().map(|b| b.energy).unwrap_or(energy);
        if energy <= best + TIE_TOLERANCE {
            self.optimal.push((energy, order.to_vec()));
            self.optimal.retain(|(e, _)| *e <= best + TIE_TOLERANCE);
        }
    }

    /// Merges a later partition; ties keep the earlier (lexicographically
    /// smaller) order.
    fn merge(mut self, other: TourScan) -> TourScan {
        self.count += other.count;
        self.nonpenalized += other.nonpenalized;
        for (mine, theirs, is_min) in [
            (&mut self.best, &other.best, true),
            (&mut self.worst, &other.worst, false),
            (&mut self.best_np, &other.best_np, true),
            (&mut self.worst_np, &other.worst_np, false),
        ] {
            if let Some(t) = theirs {
                if is_min {
                    keep_min(mine, t);
                } else {
                    keep_max(mine, t);
                }
            }
        }
        self.optimal.extend(other.optimal);
        if let Some(best) = &self.best {
            let cut = best.energy + TIE_TOLERANCE;
            self.optimal.retain(|(e, _)| *e <= cut);
        }
        self
    }
}

/// Evaluates the QUBO on all `n!` position sequences.
pub fn enumerate_tours(instance: &Instance, qubo: &Qubo) -> Result<LandscapeSummary> {
    let meta = meta_of(qubo)?;
    let n = meta.n;
    if n != instance.n() {
        return Err(Error::arg(format!(
            "QUBO is for {n} cities, instance has {}",
            instance.n()
        )));
    }
    if n > MAX_TOUR_ENUMERATION {
        return Err(Error::Budget(format!(
            "{n}! sequences exceed the n <= {MAX_TOUR_ENUMERATION} enumeration budget"
        )));
    }
    let dense = qubo.dense();
    let scan = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut scan = TourScan::default();
            let mut rest: Vec<usize> = (0..n).filter(|&c| c != first).collect();
            let mut order = vec![0usize; n];
            let mut ones = vec![0usize; n];
            loop {
                order[0] = first;
                order[1..].copy_from_slice(&rest);
                for (j, &c) in order.iter().enumerate() {
                    ones[j] = var(n, c, j);
                }
                let e = dense.energy_of_support(&ones);
                let penalized = (0..n).any(|j| meta.penalized[order[j]][order[(j + 1) % n]]);
                scan.push(e, &order, penalized);
                if !next_permutation(&mut rest) {
                    break;
                }
            }
            scan
        })
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(TourScan::merge)
        .expect("n >= 1");

    let shift = 2.0 * n as f64 * meta.a;
    let extreme = |e: &Extreme| TourExtreme {
        energy: e.energy,
        b_coefficient: (e.energy + shift) / meta.b,
        order: e.order.clone(),
    };
    Ok(LandscapeSummary {
        instance: instance.name.clone(),
        kind: meta.kind,
        n,
        a: meta.a,
        b: meta.b,
        n_feasible: scan.count,
        n_nonpenalized: scan.nonpenalized,
        n_penalized: scan.count - scan.nonpenalized,
        best_feasible: extreme(scan.best.as_ref().expect("at least one tour")),
        worst_feasible: extreme(scan.worst.as_ref().expect("at least one tour")),
        best_nonpenalized: scan.best_np.as_ref().map(extreme),
        worst_nonpenalized: scan.worst_np.as_ref().map(extreme),
        best_infeasible: None,
        optimal_orders: scan.optimal.into_iter().map(|(_, o)| o).collect(),
    })
}

/// Row-constraint energy of a column function: `A * sum_i (1 - r_i)^2 - 2nA`
/// where `r_i` counts the positions holding city `i` (columns are satisfied).
fn column_function_constraint_energy(assignment: &[usize], a: f64) -> f64 {
    let n = assignment.len();
    let mut counts = vec![0i64; n];
    for &c in assignment {
        counts[c] += 1;
    }
    let rows: i64 = counts.iter().map(|&r| (1 - r) * (1 - r)).sum();
    a * rows as f64 - 2.0 * n as f64 * a
}

fn column_function_budget(n: usize) -> Result<()> {
    let states = (n as u64).checked_pow(n as u32);
    match states {
        Some(s) if s <= MAX_COLUMN_FUNCTIONS => Ok(()),
        _ => Err(Error::Budget(format!(
            "{n}^{n} column functions exceed the {MAX_COLUMN_FUNCTIONS} budget"
        ))),
    }
}

/// Calls `f(assignment)` for every map position -> city with `assignment[0] == first`.
fn for_each_column_function(n: usize, first: usize, mut f: impl FnMut(&[usize])) {
    let mut assignment = vec![0usize; n];
    assignment[0] = first;
    loop {
        f(&assignment);
        // odometer over positions 1..n
        let mut k = n - 1;
        loop {
            if k == 0 {
                return;
            }
            assignment[k] += 1;
            if assignment[k] < n {
                break;
            }
            assignment[k] = 0;
            k -= 1;
        }
    }
}

fn is_permutation(assignment: &[usize]) -> bool {
    let mut seen = 0u64;
    for &c in assignment {
        seen |= 1 << c;
    }
    seen.count_ones() as usize == assignment.len()
}

/// Minimum-energy column function that is not a permutation.
pub fn enumerate_column_functions(instance: &Instance, qubo: &Qubo) -> Result<InfeasibleRecord> {
    let meta = meta_of(qubo)?;
    let n = meta.n;
    if n != instance.n() {
        return Err(Error::arg("QUBO and instance sizes differ"));
    }
    column_function_budget(n)?;
    let dense = qubo.dense();
    let best = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut best: Option<(f64, Vec<usize>)> = None;
            let mut ones = vec![0usize; n];
            for_each_column_function(n, first, |asg| {
                if is_permutation(asg) {
                    return;
                }
                for (j, &c) in asg.iter().enumerate() {
                    ones[j] = var(n, c, j);
                }
                let e = dense.energy_of_support(&ones);
                if best.as_ref().is_none_or(|(b, _)| e < *b) {
                    best = Some((e, asg.to_vec()));
                }
            });
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .reduce(|acc, cand| if cand.0 < acc.0 { cand } else { acc })
        .ok_or_else(|| Error::arg("no non-permutation column function exists"))?;

    let (energy, assignment) = best;
    let constraint_energy = column_function_constraint_energy(&assignment, meta.a);
    Ok(InfeasibleRecord {
        energy,
        b_coefficient: (energy - constraint_energy) / meta.b,
        constraint_energy,
        assignment,
    })
}

/// Tours plus the best column-function infeasible state.
pub fn summarize(instance: &Instance, qubo: &Qubo) -> Result<LandscapeSummary> {
    let mut summary = enumerate_tours(instance, qubo)?;
    summary.best_infeasible = Some(enumerate_column_functions(instance, qubo)?);
    Ok(summary)
}

/// Writes `state,energy,class` for every column function (permutations
/// included), with the state as an `n^2` bitstring.
pub fn write_column_function_energies<W: Write>(qubo: &Qubo, mut out: W) -> Result<()> {
    let meta = meta_of(qubo)?;
    let n = meta.n;
    column_function_budget(n)?;
    let dense: DenseQubo = qubo.dense();
    writeln!(out, "state,energy,class")?;
    let mut ones = vec![0usize; n];
    let mut bits = vec![b'0'; n * n];
    let mut err = None;
    for first in 0..n {
        for_each_column_function(n, first, |asg| {
            if err.is_some() {
                return;
            }
            bits.iter_mut().for_each(|b| *b = b'0');
            for (j, &c) in asg.iter().enumerate() {
                ones[j] = var(n, c, j);
                bits[ones[j]] = b'1';
            }
            let e = dense.energy_of_support(&ones);
            let class = if !is_permutation(asg) {
                "infeasible"
            } else if (0..n).any(|j| meta.penalized[asg[j]][asg[(j + 1) % n]]) {
                "penalized"
            } else {
                "feasible"
            };
            if let Err(e) = writeln!(
                out,
                "{},{},{}",
                std::str::from_utf8(&bits).unwrap(),
                e,
                class
            ) {
                err = Some(e);
            }
        });
    }
    match err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn dfs_best(
    inst: &Instance,
    order: &mut Vec<usize>,
    used: &mut [bool],
    length: i64,
    best: &mut Option<(i64, Vec<usize>)>,
) {
    let n = inst.n();
    let last = *order.last().expect("start city placed");
    if order.len() == n {
        let total = length + inst.dist[last][order[0]];
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            *best = Some((total, order.clone()));
        }
        return;
    }
    for next in 1..n {
        if used[next] {
            continue;
        }
        used[next] = true;
        order.push(next);
        dfs_best(inst, order, used, length + inst.dist[last][next], best);
        order.pop();
        used[next] = false;
    }
}

/// Exact minimum-length cyclic tour by exhaustive enumeration of the
/// `(n-1)!` sequences starting at city 0. Ties resolve to the
/// lexicographically smallest order.
pub fn brute_optimum(instance: &Instance) -> Result<Tour> {
    let n = instance.n();
    if n > MAX_BRUTE_FORCE {
        return Err(Error::Budget(format!(
            "{n}-node instance exceeds the n <= {MAX_BRUTE_FORCE} brute-force budget"
        )));
    }
    let (length, order) = (1..n)
        .into_par_iter()
        .map(|second| {
            let mut order = vec![0, second];
            let mut used = vec![false; n];
            used[0] = true;
            used[second] = true;
            let mut best = None;
            dfs_best(
                instance,
                &mut order,
                &mut used,
                instance.dist[0][second],
                &mut best,
            );
            best.expect("n >= 3")
        })
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|acc, cand| if cand.0 < acc.0 { cand } else { acc })
        .expect("n >= 3");
    Ok(Tour { order, length })
}

impl fmt::Display for LandscapeSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lvl = 2 * self.n;
        writeln!(
            f,
            "{} on {} (A = {}, B = {})",
            self.kind, self.instance, self.a, self.b
        )?;
        writeln!(
            f,
            "  feasible sequences: {} (non-penalized {}, penalized {})",
            self.n_feasible, self.n_nonpenalized, self.n_penalized
        )?;
        writeln!(
            f,
            "  best feasible:      {:.5} x B - {lvl} x A",
            self.best_feasible.b_coefficient
        )?;
        writeln!(
            f,
            "  worst feasible:     {:.5} x B - {lvl} x A",
            self.worst_feasible.b_coefficient
        )?;
        match &self.worst_nonpenalized {
            Some(w) => writeln!(
                f,
                "  worst non-penalized: {:.5} x B - {lvl} x A",
                w.b_coefficient
            )?,
            None => writeln!(f, "  worst non-penalized: none")?,
        }
        if let Some(inf) = &self.best_infeasible {
            writeln!(
                f,
                "  best infeasible:    {:.5} x B - {} x A",
                inf.b_coefficient,
                (-inf.constraint_energy / self.a).round()
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::{build_h_qubo, build_r_qubo};

    #[test]
    fn permutations_are_lexicographic_and_complete() {
        let mut v = vec![0, 1, 2, 3];
        let mut count = 1;
        let mut prev = v.clone();
        while next_permutation(&mut v) {
            assert!(v > prev);
            prev = v.clone();
            count += 1;
        }
        assert_eq!(count, 24);
    }

    #[test]
    fn triangle_optimum_is_perimeter() {
        let inst = Instance::burma(3).unwrap();
        let t = brute_optimum(&inst).unwrap();
        assert_eq!(
            t.length,
            inst.dist[0][1] + inst.dist[1][2] + inst.dist[0][2]
        );
    }

    #[test]
    fn seven_cities_have_5040_sequences() {
        let inst = Instance::burma(7).unwrap();
        let q = build_r_qubo(&inst.dist_norm, 1.0, 0.3).unwrap();
        let s = enumerate_tours(&inst, &q).unwrap();
        assert_eq!(s.n_feasible, 5040);
        assert_eq!(s.n_nonpenalized, 5040);
        // optimum cycle appears in every rotation and both directions
        assert_eq!(s.optimal_orders.len(), 14);
    }

    #[test]
    fn budgets_are_enforced() {
        let inst = Instance::burma14();
        let q = build_r_qubo(&inst.dist_norm, 1.0, 0.3).unwrap();
        assert!(matches!(enumerate_tours(&inst, &q), Err(Error::Budget(_))));
        assert!(matches!(
            enumerate_column_functions(&inst, &q),
            Err(Error::Budget(_))
        ));
        assert!(matches!(brute_optimum(&inst), Err(Error::Budget(_))));
    }

    #[test]
    fn column_function_constraint_levels() {
        assert_eq!(column_function_constraint_energy(&[0, 1, 2], 1.0), -6.0);
        assert_eq!(column_function_constraint_energy(&[0, 0, 2], 1.0), -4.0);
        assert_eq!(
            column_function_constraint_energy(&[0, 0, 0], 1.0),
            -6.0 + 6.0
        );
    }

    #[test]
    fn heuristic_counts_partition_feasible_set() {
        let inst = Instance::burma(6).unwrap();
        let q = build_h_qubo(&inst.dist_norm, 0.4, 0.1).unwrap();
        let s = enumerate_tours(&inst, &q).unwrap();
        assert_eq!(s.n_feasible, 720);
        assert_eq!(s.n_nonpenalized + s.n_penalized, s.n_feasible);
    }

    #[test]
    fn energy_csv_has_one_row_per_column_function() {
        let inst = Instance::burma(3).unwrap();
        let q = build_h_qubo(&inst.dist_norm, 0.4, 0.1).unwrap();
        let mut buf = Vec::new();
        write_column_function_energies(&q, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 27);
        assert_eq!(
            text.lines().filter(|l| l.ends_with("infeasible")).count(),
            21
        );
    }
}
