//! Chimera topology, clique minor-embedding and chain handling.
//!
//! `C(m)` is an `m x m` grid of `K_{4,4}` cells. Qubit `(row, col, side, k)` has
//! id `8 * (row * m + col) + 4 * side + k`. Side-0 qubits link vertically to the
//! same `k` in the cell below, side-1 qubits horizontally to the cell on the
//! right.
//!
//! The clique embedding places logical variable `4c + k` on the side-0 qubits
//! `k` of column `c` in rows `0..=c` and the side-1 qubits `k` of row `c` in
//! columns `c..m`; the two runs meet inside cell `(c, c)`. Every chain has
//! length `m + 1` and every pair of chains touches in cell `(min, max)` of
//! their column indices.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anneal::{anneal_reads, read_rng, Read, SampleSet, Schedule};
use crate::qubo::IsingModel;
use crate::{derive_seed, Error, Result};

const TIE_BREAK_STREAM: u64 = 0x7469_6573;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChimeraGraph {
    pub m: usize,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl ChimeraGraph {
    pub fn node_id(&self, row: usize, col: usize, side: usize, k: usize) -> usize {
        8 * (row * self.m + col) + 4 * side + k
    }

    /// `(row, col, side, k)` of a qubit id.
    pub fn coordinates(&self, id: usize) -> (usize, usize, usize, usize) {
        let cell = id / 8;
        ((cell / self.m), cell % self.m, (id % 8) / 4, id % 4)
    }

    pub fn num_nodes(&self) -> usize {
        8 * self.m * self.m
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, id: usize) -> &[usize] {
        &self.adjacency[id]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }
}

/// Builds `C(m)`: `8m^2` qubits and `16m^2 + 8m(m-1)` couplers.
pub fn chimera_graph(m: usize) -> Result<ChimeraGraph> {
    if m < 1 {
        return Err(Error::arg("Chimera grid size must be at least 1"));
    }
    let mut g = ChimeraGraph {
        m,
        edges: BTreeSet::new(),
        adjacency: vec![Vec::new(); 8 * m * m],
    };
    let add = |g: &mut ChimeraGraph, u: usize, v: usize| {
        g.edges.insert((u.min(v), u.max(v)));
        g.adjacency[u].push(v);
        g.adjacency[v].push(u);
    };
    for row in 0..m {
        for col in 0..m {
            for a in 0..4 {
                for b in 0..4 {
                    let (u, v) = (g.node_id(row, col, 0, a), g.node_id(row, col, 1, b));
                    add(&mut g, u, v);
                }
                if row + 1 < m {
                    let (u, v) = (g.node_id(row, col, 0, a), g.node_id(row + 1, col, 0, a));
                    add(&mut g, u, v);
                }
                if col + 1 < m {
                    let (u, v) = (g.node_id(row, col, 1, a), g.node_id(row, col + 1, 1, a));
                    add(&mut g, u, v);
                }
            }
        }
    }
    for adj in &mut g.adjacency {
        adj.sort_unstable();
    }
    Ok(g)
}

/// Smallest Chimera grid whose clique embedding holds `num_logical` variables.
pub fn min_chimera_size(num_logical: usize) -> usize {
    num_logical.div_ceil(4).max(1)
}

/// Logical variable -> chain of physical qubit ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub chains: Vec<Vec<usize>>,
}

impl Embedding {
    pub fn num_logical(&self) -> usize {
        self.chains.len()
    }

    /// Checks disjointness, chain connectivity and that every logical edge has
    /// at least one coupler between its chains.
    pub fn validate(
        &self,
        g: &ChimeraGraph,
        logical_edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<()> {
        let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
        for (var, chain) in self.chains.iter().enumerate() {
            if chain.is_empty() {
                return Err(Error::EmbeddingInfeasible(format!("chain {var} is empty")));
            }
            for &q in chain {
                if q >= g.num_nodes() {
                    return Err(Error::EmbeddingInfeasible(format!(
                        "qubit {q} not in graph"
                    )));
                }
                if let Some(prev) = owner.insert(q, var) {
                    return Err(Error::EmbeddingInfeasible(format!(
                        "qubit {q} shared by chains {prev} and {var}"
                    )));
                }
            }
            // breadth-first search restricted to the chain
            let members: BTreeSet<usize> = chain.iter().copied().collect();
            let mut seen = BTreeSet::from([chain[0]]);
            let mut queue = VecDeque::from([chain[0]]);
            while let Some(q) = queue.pop_front() {
                for &nb in g.neighbors(q) {
                    if members.contains(&nb) && seen.insert(nb) {
                        queue.push_back(nb);
                    }
                }
            }
            if seen.len() != members.len() {
                return Err(Error::EmbeddingInfeasible(format!(
                    "chain {var} is disconnected"
                )));
            }
        }
        for (u, v) in logical_edges {
            if u >= self.chains.len() || v >= self.chains.len() {
                return Err(Error::EmbeddingInfeasible(format!(
                    "logical edge ({u}, {v}) has no chain"
                )));
            }
            if couplers_between(g, &self.chains[u], &self.chains[v]).is_empty() {
                return Err(Error::EmbeddingInfeasible(format!(
                    "no coupler between chains {u} and {v}"
                )));
            }
        }
        Ok(())
    }

    /// `{"<logical var>": [qubit ids]}`.
    pub fn to_json(&self) -> Result<String> {
        // written by hand so keys stay in numeric rather than string order
        let mut out = String::from("{\n");
        for (i, chain) in self.chains.iter().enumerate() {
            let sep = if i + 1 == self.chains.len() { "" } else { "," };
            out.push_str(&format!(
                "  \"{i}\": {}{sep}\n",
                serde_json::to_string(chain)?
            ));
        }
        out.push('}');
        Ok(out)
    }
}

fn couplers_between(g: &ChimeraGraph, a: &[usize], b: &[usize]) -> Vec<(usize, usize)> {
    let bset: BTreeSet<usize> = b.iter().copied().collect();
    let mut out = Vec::new();
    for &p in a {
        for &q in g.neighbors(p) {
            if bset.contains(&q) {
                out.push((p, q));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Triangular clique embedding of `K_{num_logical}` on `C(m)`, `num_logical <= 4m`.
pub fn clique_embedding(num_logical: usize, g: &ChimeraGraph) -> Result<Embedding> {
    let capacity = 4 * g.m;
    if num_logical > capacity {
        return Err(Error::Capacity {
            needed: num_logical,
            capacity,
        });
    }
    let chains: Vec<Vec<usize>> = (0..num_logical)
        .map(|var| {
            let (c, k) = (var / 4, var % 4);
            let mut chain: Vec<usize> = (0..=c).map(|row| g.node_id(row, c, 0, k)).collect();
            chain.extend((c..g.m).map(|col| g.node_id(c, col, 1, k)));
            chain
        })
        .collect();
    let e = Embedding { chains };
    let all_pairs = (0..num_logical).flat_map(|u| ((u + 1)..num_logical).map(move |v| (u, v)));
    e.validate(g, all_pairs)?;
    Ok(e)
}

/// What a physical coupler implements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum CouplerRole {
    /// Carries `share` of the logical coupling between `u` and `v`.
    Logical { u: usize, v: usize, share: f64 },
    /// Ferromagnetic bond inside the chain of `var`.
    ChainBond { var: usize },
}

/// Physical model over the qubits used by an embedding, indexed compactly:
/// chain members in chain order, chain after chain.
#[derive(Debug, Clone)]
pub struct EmbeddedIsing {
    pub model: IsingModel,
    /// Compact index -> Chimera qubit id.
    pub qubits: Vec<usize>,
    /// Chains in compact indices.
    pub chains: Vec<Vec<usize>>,
    pub chain_strength: f64,
    /// Keyed by compact `(u, v)` with `u < v`.
    pub provenance: BTreeMap<(usize, usize), CouplerRole>,
}

impl EmbeddedIsing {
    pub fn num_chain_bonds(&self) -> usize {
        self.provenance
            .values()
            .filter(|r| matches!(r, CouplerRole::ChainBond { .. }))
            .count()
    }
}

/// Spreads a logical model over its chains: biases split equally over chain
/// members, couplings split equally over all couplers between the two chains,
/// and every edge inside a chain set to `-chain_strength`.
///
/// With all chains intact the physical reported energy equals the logical one
/// minus `chain_strength * bonds`; the physical offset absorbs that constant.
pub fn embed_ising(
    m: &IsingModel,
    e: &Embedding,
    g: &ChimeraGraph,
    chain_strength: f64,
) -> Result<EmbeddedIsing> {
    if !(chain_strength.is_finite() && chain_strength > 0.0) {
        return Err(Error::arg(format!(
            "chain strength must be positive, got {chain_strength}"
        )));
    }
    if e.num_logical() != m.n_spins() {
        return Err(Error::EmbeddingInfeasible(format!(
            "embedding has {} chains for {} logical variables",
            e.num_logical(),
            m.n_spins()
        )));
    }
    let qubits: Vec<usize> = e.chains.iter().flatten().copied().collect();
    let compact: BTreeMap<usize, usize> = qubits.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    if compact.len() != qubits.len() {
        return Err(Error::EmbeddingInfeasible("chains overlap".into()));
    }
    let mut chains = Vec::with_capacity(e.num_logical());
    let mut next = 0;
    for chain in &e.chains {
        chains.push((next..next + chain.len()).collect::<Vec<_>>());
        next += chain.len();
    }

    let mut phys = IsingModel::new(qubits.len());
    let mut provenance = BTreeMap::new();
    for (var, chain) in chains.iter().enumerate() {
        let share = m.h[var] / chain.len() as f64;
        for &p in chain {
            phys.h[p] += share;
        }
    }
    for (&(u, v), &j) in &m.j {
        if j == 0.0 {
            continue;
        }
        let couplers = couplers_between(g, &e.chains[u], &e.chains[v]);
        if couplers.is_empty() {
            return Err(Error::EmbeddingInfeasible(format!(
                "no coupler between chains {u} and {v}"
            )));
        }
        let share = j / couplers.len() as f64;
        for (p, q) in couplers {
            let (a, b) = (compact[&p], compact[&q]);
            phys.add_coupling(a, b, share);
            provenance.insert((a.min(b), a.max(b)), CouplerRole::Logical { u, v, share });
        }
    }
    let mut bonds = 0usize;
    for (var, chain) in e.chains.iter().enumerate() {
        for (i, &p) in chain.iter().enumerate() {
            for &q in &chain[i + 1..] {
                if g.has_edge(p, q) {
                    let (a, b) = (compact[&p], compact[&q]);
                    phys.add_coupling(a, b, -chain_strength);
                    provenance.insert((a.min(b), a.max(b)), CouplerRole::ChainBond { var });
                    bonds += 1;
                }
            }
        }
    }
    phys.offset = m.offset + chain_strength * bonds as f64;
    Ok(EmbeddedIsing {
        model: phys,
        qubits,
        chains,
        chain_strength,
        provenance,
    })
}

/// Majority vote per chain; ties drawn from `rng`. Returns the logical state
/// and the number of chains whose members disagree.
pub fn unembed_with<R: Rng>(
    physical: &[i8],
    chains: &[Vec<usize>],
    rng: &mut R,
) -> (Vec<i8>, usize) {
    let mut broken = 0;
    let logical = chains
        .iter()
        .map(|chain| {
            let sum: i64 = chain.iter().map(|&p| physical[p] as i64).sum();
            if sum.unsigned_abs() as usize != chain.len() {
                broken += 1;
            }
            match sum.signum() {
                1 => 1,
                -1 => -1,
                _ => {
                    if rng.gen::<bool>() {
                        1
                    } else {
                        -1
                    }
                }
            }
        })
        .collect();
    (logical, broken)
}

/// Unembeds a state indexed by Chimera qubit id. Returns the logical state
/// and the fraction of broken chains.
pub fn unembed(physical: &[i8], e: &Embedding, seed: u64) -> (Vec<i8>, f64) {
    let mut rng = read_rng(derive_seed(seed, &[TIE_BREAK_STREAM]), 0);
    let (state, broken) = unembed_with(physical, &e.chains, &mut rng);
    let frac = if e.chains.is_empty() {
        0.0
    } else {
        broken as f64 / e.chains.len() as f64
    };
    (state, frac)
}

/// Anneals `physical` (an auto-scaled copy of `emb.model`), unembeds every
/// read and scores the logical states on `logical`.
pub fn sample_embedded(
    physical: &IsingModel,
    emb: &EmbeddedIsing,
    logical: &IsingModel,
    num_reads: usize,
    schedule: &Schedule,
    seed: u64,
) -> Result<SampleSet> {
    if physical.n_spins() != emb.qubits.len() {
        return Err(Error::arg("physical model does not match the embedding"));
    }
    let states = anneal_reads(physical, num_reads, schedule, seed)?;
    let tie_seed = derive_seed(seed, &[TIE_BREAK_STREAM]);
    let reads: Vec<Read> = states
        .into_par_iter()
        .enumerate()
        .map(|(r, s)| {
            let (state, broken) = unembed_with(&s, &emb.chains, &mut read_rng(tie_seed, r));
            Read {
                state,
                broken_chains: broken,
                total_chains: emb.chains.len(),
            }
        })
        .collect();
    Ok(SampleSet::aggregate(logical, reads, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell() {
        let g = chimera_graph(1).unwrap();
        assert_eq!(g.num_nodes(), 8);
        assert_eq!(g.num_edges(), 16);
    }

    #[test]
    fn two_by_two() {
        let g = chimera_graph(2).unwrap();
        assert_eq!(g.num_nodes(), 32);
        assert_eq!(g.num_edges(), 80);
    }

    #[test]
    fn degree_at_most_six() {
        let g = chimera_graph(4).unwrap();
        for q in 0..g.num_nodes() {
            assert!(g.neighbors(q).len() <= 6);
            assert!(g.neighbors(q).len() >= 5);
        }
    }

    #[test]
    fn coordinates_round_trip() {
        let g = chimera_graph(3).unwrap();
        for q in 0..g.num_nodes() {
            let (r, c, s, k) = g.coordinates(q);
            assert_eq!(g.node_id(r, c, s, k), q);
        }
    }

    #[test]
    fn zero_grid_rejected() {
        assert!(chimera_graph(0).is_err());
    }

    #[test]
    fn k4_on_one_cell() {
        let g = chimera_graph(1).unwrap();
        let e = clique_embedding(4, &g).unwrap();
        assert!(e.chains.iter().all(|c| c.len() == 2));
    }

    #[test]
    fn single_variable_chain() {
        let g = chimera_graph(3).unwrap();
        let e = clique_embedding(1, &g).unwrap();
        assert_eq!(e.chains.len(), 1);
        assert_eq!(e.chains[0].len(), 4);
    }

    #[test]
    fn capacity_error() {
        let g = chimera_graph(12).unwrap();
        assert!(matches!(
            clique_embedding(49, &g),
            Err(Error::Capacity {
                needed: 49,
                capacity: 48
            })
        ));
        assert_eq!(min_chimera_size(49), 13);
    }

    #[test]
    fn validator_catches_overlap_and_gaps() {
        let g = chimera_graph(2).unwrap();
        let overlap = Embedding {
            chains: vec![vec![0, 4], vec![4, 1]],
        };
        assert!(overlap.validate(&g, []).is_err());
        // 0 and 1 are both side 0 in one cell: not adjacent
        let split = Embedding {
            chains: vec![vec![0, 1]],
        };
        assert!(split.validate(&g, []).is_err());
        let uncovered = Embedding {
            chains: vec![vec![0], vec![1]],
        };
        assert!(uncovered.validate(&g, [(0, 1)]).is_err());
    }

    #[test]
    fn bias_splits_over_chain() {
        let g = chimera_graph(3).unwrap();
        let e = clique_embedding(1, &g).unwrap();
        let mut m = IsingModel::new(1);
        m.h[0] = 1.0;
        let emb = embed_ising(&m, &e, &g, 1.0).unwrap();
        assert_eq!(emb.model.h, vec![0.25; 4]);
        assert_eq!(emb.num_chain_bonds(), 3);
    }

    #[test]
    fn majority_vote() {
        let chains = vec![vec![0, 1, 2]];
        let mut rng = read_rng(1, 0);
        assert_eq!(unembed_with(&[1, 1, -1], &chains, &mut rng), (vec![1], 1));
        assert_eq!(
            unembed_with(&[-1, -1, -1], &chains, &mut rng),
            (vec![-1], 0)
        );
    }

    #[test]
    fn tie_break_is_reproducible() {
        let e = Embedding {
            chains: vec![vec![0, 1]; 1],
        };
        let a = unembed(&[1, -1], &e, 42);
        assert_eq!(a, unembed(&[1, -1], &e, 42));
        assert_eq!(a.1, 1.0);
        let draws: BTreeSet<i8> = (0..64).map(|s| unembed(&[1, -1], &e, s).0[0]).collect();
        assert_eq!(draws.len(), 2);
    }

    #[test]
    fn embedding_json_in_variable_order() {
        let g = chimera_graph(1).unwrap();
        let e = clique_embedding(2, &g).unwrap();
        let v: serde_json::Value = serde_json::from_str(&e.to_json().unwrap()).unwrap();
        assert_eq!(v["0"], serde_json::json!([0, 4]));
        assert_eq!(v["1"], serde_json::json!([1, 5]));
    }
}
