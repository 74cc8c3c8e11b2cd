//! Decomposition of a large instance into annealer-sized sub-instances.
//!
//! Cities are ordered by a nearest-neighbour tour from city 0 and cut into
//! contiguous segments of at most `max_size` cities. Each segment is solved
//! with the sampling pipeline and the closed sub-tours are merged one after
//! another by the cheapest two-edge exchange.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::instance::{Instance, Tour};
use crate::oracle::brute_optimum;
use crate::sweep::{run_pipeline, PipelineConfig};
use crate::{derive_seed, Error, Result};

/// Greedy tour: always move to the closest unvisited city (lowest index on ties).
pub fn nearest_neighbor_tour(instance: &Instance, start: usize) -> Vec<usize> {
    let n = instance.n();
    let mut used = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut cur = start;
    used[cur] = true;
    order.push(cur);
    while order.len() < n {
        let next = (0..n)
            .filter(|&v| !used[v])
            .min_by_key(|&v| (instance.dist[cur][v], v))
            .expect("unvisited city remains");
        used[next] = true;
        order.push(next);
        cur = next;
    }
    order
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub max_size: usize,
    /// City sets in nearest-neighbour segment order, each sorted ascending.
    pub parts: Vec<Vec<usize>>,
}

/// Splits into `ceil(n / max_size)` segments whose sizes differ by at most one.
pub fn decompose(instance: &Instance, max_size: usize) -> Result<Decomposition> {
    if max_size < 3 {
        return Err(Error::arg(format!(
            "max sub-instance size must be at least 3, got {max_size}"
        )));
    }
    let n = instance.n();
    let tour = nearest_neighbor_tour(instance, 0);
    let k = n.div_ceil(max_size);
    let (base, extra) = (n / k, n % k);
    let mut parts = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let len = base + usize::from(i < extra);
        let mut part = tour[start..start + len].to_vec();
        part.sort_unstable();
        parts.push(part);
        start += len;
    }
    Ok(Decomposition { max_size, parts })
}

/// Cheapest insertion of cycle `sub` into cycle `tour`: one edge of each is
/// removed and the two gaps are reconnected in the cheaper orientation.
pub fn merge_tours(instance: &Instance, tour: &[usize], sub: &[usize]) -> Vec<usize> {
    if tour.is_empty() {
        return sub.to_vec();
    }
    if sub.is_empty() {
        return tour.to_vec();
    }
    let d = |u: usize, v: usize| instance.dist[u][v];
    let (nt, ns) = (tour.len(), sub.len());
    // (delta, i, k, reversed)
    let mut best: Option<(i64, usize, usize, bool)> = None;
    for i in 0..nt {
        let (t0, t1) = (tour[i], tour[(i + 1) % nt]);
        let cut_t = if nt > 1 { d(t0, t1) } else { 0 };
        for k in 0..ns {
            let (s0, s1) = (sub[k], sub[(k + 1) % ns]);
            let cut_s = if ns > 1 { d(s0, s1) } else { 0 };
            let rev = d(t0, s0) + d(s1, t1) - cut_t - cut_s;
            let fwd = d(t0, s1) + d(s0, t1) - cut_t - cut_s;
            for (delta, reversed) in [(fwd, false), (rev, true)] {
                if best.is_none_or(|b| delta < b.0) {
                    best = Some((delta, i, k, reversed));
                }
            }
        }
    }
    let (_, i, k, reversed) = best.expect("both tours are non-empty");
    let mut out = Vec::with_capacity(nt + ns);
    out.extend_from_slice(&tour[..=i]);
    if reversed {
        // s_k, s_{k-1}, ..., s_{k+1}
        out.extend((0..ns).map(|j| sub[(k + ns - j) % ns]));
    } else {
        // s_{k+1}, s_{k+2}, ..., s_k
        out.extend((0..ns).map(|j| sub[(k + 1 + j) % ns]));
    }
    out.extend_from_slice(&tour[i + 1..]);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubSolution {
    /// Global city ids of the sub-instance.
    pub cities: Vec<usize>,
    /// Closed sub-tour in global ids.
    pub tour: Vec<usize>,
    /// Feasible reads out of all reads (zero for trivial segments).
    pub n_feasible: u64,
    /// True when no feasible read existed and the exact solver stepped in.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridResult {
    pub instance: String,
    pub config: PipelineConfig,
    pub max_size: usize,
    pub parts: Vec<SubSolution>,
    pub tour: Tour,
    pub fallback_count: usize,
}

/// Samples `instance` directly and returns the lowest-energy feasible read,
/// or the exact optimum when no read is feasible.
pub fn solve_direct(instance: &Instance, cfg: &PipelineConfig) -> Result<SubSolution> {
    let cities: Vec<usize> = (0..instance.n()).collect();
    if instance.n() < 3 {
        return Ok(SubSolution {
            tour: cities.clone(),
            cities,
            n_feasible: 0,
            fallback: false,
        });
    }
    let run = run_pipeline(instance, cfg)?;
    let n_feasible = run
        .samples
        .records
        .iter()
        .zip(&run.decodes)
        .filter(|(_, d)| d.feasible)
        .map(|(r, _)| r.occurrences)
        .sum();
    let (tour, fallback) = match run.best_feasible() {
        Some((_, dec)) => (
            dec.order.clone().expect("feasible decode has an order"),
            false,
        ),
        None => (brute_optimum(instance)?.order, true),
    };
    Ok(SubSolution {
        cities,
        tour,
        n_feasible,
        fallback,
    })
}

fn solve_part(instance: &Instance, cities: &[usize], cfg: &PipelineConfig) -> Result<SubSolution> {
    if cities.len() < 3 {
        return Ok(SubSolution {
            cities: cities.to_vec(),
            tour: cities.to_vec(),
            n_feasible: 0,
            fallback: false,
        });
    }
    let sub = instance.subset(cities)?;
    let local = solve_direct(&sub, cfg)?;
    Ok(SubSolution {
        cities: cities.to_vec(),
        tour: local.tour.iter().map(|&v| cities[v]).collect(),
        n_feasible: local.n_feasible,
        fallback: local.fallback,
    })
}

/// Decomposes, solves every part and merges the sub-tours. With a single part
/// this is exactly [`solve_direct`] with the same configuration.
pub fn solve_hybrid(
    instance: &Instance,
    cfg: &PipelineConfig,
    max_size: usize,
) -> Result<HybridResult> {
    cfg.validate()?;
    let dec = decompose(instance, max_size)?;
    let single = dec.parts.len() == 1;
    let parts = dec
        .parts
        .par_iter()
        .enumerate()
        .map(|(i, cities)| {
            let mut sub_cfg = *cfg;
            if !single {
                sub_cfg.seed = derive_seed(cfg.seed, &[i as u64]);
            }
            solve_part(instance, cities, &sub_cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = Vec::with_capacity(instance.n());
    for p in &parts {
        order = merge_tours(instance, &order, &p.tour);
    }
    let tour = instance.tour(order)?;
    Ok(HybridResult {
        instance: instance.name.clone(),
        config: *cfg,
        max_size,
        fallback_count: parts.iter().filter(|p| p.fallback).count(),
        parts,
        tour,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposition_covers_all_cities() {
        let inst = Instance::burma14();
        for max in 3..=14 {
            let d = decompose(&inst, max).unwrap();
            assert_eq!(d.parts.len(), 14usize.div_ceil(max));
            assert!(d.parts.iter().all(|p| p.len() <= max));
            let mut all: Vec<usize> = d.parts.concat();
            all.sort_unstable();
            assert_eq!(all, (0..14).collect::<Vec<_>>());
        }
        assert!(decompose(&inst, 2).is_err());
    }

    #[test]
    fn nearest_neighbor_is_permutation() {
        let inst = Instance::burma14();
        let mut t = nearest_neighbor_tour(&inst, 0);
        assert_eq!(t[0], 0);
        t.sort_unstable();
        assert_eq!(t, (0..14).collect::<Vec<_>>());
    }

    #[test]
    fn merge_is_cheapest_exchange() {
        let inst = Instance::burma14();
        let a = vec![0, 1, 2, 3, 4, 5, 6];
        let b = vec![7, 8, 9, 10, 11, 12, 13];
        let merged = merge_tours(&inst, &a, &b);
        let len = inst.tour_length(&merged).unwrap();
        let base = inst.cycle_length_unchecked(&a) + inst.cycle_length_unchecked(&b);
        let mut best = i64::MAX;
        for i in 0..7 {
            for k in 0..7 {
                let (t0, t1, s0, s1) = (a[i], a[(i + 1) % 7], b[k], b[(k + 1) % 7]);
                let cut = inst.dist[t0][t1] + inst.dist[s0][s1];
                best = best
                    .min(inst.dist[t0][s0] + inst.dist[s1][t1] - cut)
                    .min(inst.dist[t0][s1] + inst.dist[s0][t1] - cut);
            }
        }
        assert_eq!(len, base + best);
    }

    #[test]
    fn merge_single_city() {
        let inst = Instance::burma14();
        let merged = merge_tours(&inst, &[0, 1, 2], &[5]);
        assert_eq!(merged.len(), 4);
        assert!(merged.contains(&5));
    }
}
