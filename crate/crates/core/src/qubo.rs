//! Binary quadratic models for the TSP.
//!
//! Variable `v(i, j) = i * n + j` is 1 when city `i` sits at tour position `j`.
//! Both formulations share the permutation constraints
//!
//! ```text
//! A * sum_i (1 - sum_j x_ij)^2 + A * sum_j (1 - sum_i x_ij)^2
//! ```
//!
//! plus a distance term `B * sum_{u != i} W[u][i] * sum_j x_{u,j} x_{i,j+1}` with
//! cyclic positions. The reference model uses `W = D` (normalized distances);
//! the heuristic model replaces every edge longer than the departure median of
//! its source city by `C = 2A/B`, so a penalized step costs exactly as much as a
//! violated constraint.
//!
//! Constants produced by expanding the squares are kept in `offset` and are not
//! part of the reported energy, so every permutation state has constraint
//! energy `-2nA`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::io::round_sig;
use crate::{Error, Result};

/// Device bias range, `|h| <= H_RANGE`.
pub const H_RANGE: f64 = 2.0;
/// Device coupler range, `|J| <= J_RANGE`.
pub const J_RANGE: f64 = 1.0;

const JSON_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuboKind {
    /// r-QUBO: plain distance objective.
    Reference,
    /// h-QUBO: edges above the per-city median distance are penalized with `C`.
    Heuristic,
}

impl QuboKind {
    pub const ALL: [QuboKind; 2] = [QuboKind::Reference, QuboKind::Heuristic];

    pub fn short(self) -> &'static str {
        match self {
            QuboKind::Reference => "r",
            QuboKind::Heuristic => "h",
        }
    }
}

impl fmt::Display for QuboKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuboKind::Reference => "r-QUBO",
            QuboKind::Heuristic => "h-QUBO",
        })
    }
}

impl FromStr for QuboKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "r" | "ref" | "reference" | "r-qubo" => Ok(QuboKind::Reference),
            "h" | "heuristic" | "h-qubo" => Ok(QuboKind::Heuristic),
            _ => Err(Error::arg(format!(
                "unknown QUBO type `{s}` (expected r or h)"
            ))),
        }
    }
}

/// TSP bookkeeping attached to a QUBO.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboMeta {
    pub kind: QuboKind,
    /// Number of cities; the model has `n * n` variables.
    pub n: usize,
    pub a: f64,
    pub b: f64,
    /// Heuristic edge penalty `2A/B`, heuristic models only.
    pub c: Option<f64>,
    /// Directed penalized edge set `E_p` as an `n x n` mask (all false for the
    /// reference model).
    pub penalized: Vec<Vec<bool>>,
}

/// Index of the variable "city `city` at position `pos`".
#[inline]
pub fn var(n: usize, city: usize, pos: usize) -> usize {
    city * n + pos
}

#[derive(Debug, Clone, PartialEq)]
pub struct Qubo {
    pub n_vars: usize,
    pub linear: Vec<f64>,
    /// Keys are ordered pairs `(u, v)` with `u < v`.
    pub quadratic: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
    pub meta: Option<QuboMeta>,
}

impl Qubo {
    pub fn new(n_vars: usize) -> Self {
        Qubo {
            n_vars,
            linear: vec![0.0; n_vars],
            quadratic: BTreeMap::new(),
            offset: 0.0,
            meta: None,
        }
    }

    pub fn add_linear(&mut self, v: usize, a: f64) {
        self.linear[v] += a;
    }

    /// Adds `b * x_u * x_v`; `u == v` folds into the linear term since `x^2 = x`.
    pub fn add_quadratic(&mut self, u: usize, v: usize, b: f64) {
        if u == v {
            self.linear[u] += b;
            return;
        }
        let key = if u < v { (u, v) } else { (v, u) };
        *self.quadratic.entry(key).or_insert(0.0) += b;
    }

    /// Accumulates another model with the same variable count.
    pub fn add_model(&mut self, other: &Qubo) {
        assert_eq!(self.n_vars, other.n_vars, "variable count mismatch");
        for (a, b) in self.linear.iter_mut().zip(&other.linear) {
            *a += b;
        }
        for (&(u, v), &b) in &other.quadratic {
            self.add_quadratic(u, v, b);
        }
        self.offset += other.offset;
    }

    /// Reported energy (offset excluded) of a 0/1 state.
    pub fn energy(&self, x: &[u8]) -> f64 {
        debug_assert_eq!(x.len(), self.n_vars);
        let lin: f64 = self
            .linear
            .iter()
            .zip(x)
            .filter(|(_, &xi)| xi != 0)
            .map(|(a, _)| a)
            .sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .filter(|(&(u, v), _)| x[u] != 0 && x[v] != 0)
            .map(|(_, b)| b)
            .sum();
        lin + quad
    }

    /// Dense evaluator for repeated energy queries.
    pub fn dense(&self) -> DenseQubo {
        let n = self.n_vars;
        let mut mat = vec![0.0; n * n];
        for (&(u, v), &b) in &self.quadratic {
            mat[u * n + v] = b;
            mat[v * n + u] = b;
        }
        DenseQubo {
            n,
            linear: self.linear.clone(),
            mat,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let rec = QuboRecord {
            n_vars: self.n_vars,
            linear: self
                .linear
                .iter()
                .enumerate()
                .filter(|(_, &a)| a != 0.0)
                .map(|(v, &a)| (v, round_sig(a, JSON_DIGITS)))
                .collect(),
            quadratic: self
                .quadratic
                .iter()
                .map(|(&(u, v), &b)| (u, v, round_sig(b, JSON_DIGITS)))
                .collect(),
            offset: round_sig(self.offset, JSON_DIGITS),
            meta: self.meta.clone(),
        };
        Ok(serde_json::to_string_pretty(&rec)?)
    }

    pub fn from_json(text: &str) -> Result<Qubo> {
        let rec: QuboRecord = serde_json::from_str(text)?;
        let mut q = Qubo::new(rec.n_vars);
        for (v, a) in rec.linear {
            if v >= rec.n_vars {
                return Err(Error::arg(format!("linear index {v} out of range")));
            }
            q.add_linear(v, a);
        }
        for (u, v, b) in rec.quadratic {
            if u >= rec.n_vars || v >= rec.n_vars {
                return Err(Error::arg(format!(
                    "quadratic index ({u}, {v}) out of range"
                )));
            }
            q.add_quadratic(u, v, b);
        }
        q.offset = rec.offset;
        q.meta = rec.meta;
        Ok(q)
    }
}

#[derive(Serialize, Deserialize)]
struct QuboRecord {
    n_vars: usize,
    linear: Vec<(usize, f64)>,
    quadratic: Vec<(usize, usize, f64)>,
    offset: f64,
    meta: Option<QuboMeta>,
}

/// Dense copy of a QUBO for fast evaluation of sparse 0/1 states.
#[derive(Debug, Clone)]
pub struct DenseQubo {
    n: usize,
    linear: Vec<f64>,
    mat: Vec<f64>,
}

impl DenseQubo {
    /// Energy of the state whose set variables are exactly `ones` (distinct).
    pub fn energy_of_support(&self, ones: &[usize]) -> f64 {
        let mut e = 0.0;
        for (k, &u) in ones.iter().enumerate() {
            e += self.linear[u];
            let row = &self.mat[u * self.n..(u + 1) * self.n];
            for &v in &ones[k + 1..] {
                e += row[v];
            }
        }
        e
    }

    pub fn energy(&self, x: &[u8]) -> f64 {
        let ones: Vec<usize> = x
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0)
            .map(|(i, _)| i)
            .collect();
        self.energy_of_support(&ones)
    }
}

fn validate_matrix(dist_norm: &[Vec<f64>]) -> Result<usize> {
    let n = dist_norm.len();
    if n < 3 {
        return Err(Error::arg(format!(
            "distance matrix needs at least 3 nodes, got {n}"
        )));
    }
    for row in dist_norm {
        if row.len() != n {
            return Err(Error::arg("distance matrix is not square"));
        }
        if row.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::arg(
                "distance matrix has negative or non-finite entries",
            ));
        }
    }
    Ok(n)
}

fn validate_penalties(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::arg(format!(
            "A must be positive and finite, got {a}"
        )));
    }
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::arg(format!(
            "B must be positive and finite, got {b}"
        )));
    }
    Ok(())
}

/// Row and column one-hot constraints `H_A` for an `n`-city tour.
pub fn constraint_qubo(n: usize, a: f64) -> Qubo {
    let mut q = Qubo::new(n * n);
    for fixed in 0..n {
        // row: city `fixed` over all positions; column: position `fixed` over all cities
        let groups: [Vec<usize>; 2] = [
            (0..n).map(|j| var(n, fixed, j)).collect(),
            (0..n).map(|i| var(n, i, fixed)).collect(),
        ];
        for members in &groups {
            for (k, &u) in members.iter().enumerate() {
                q.add_linear(u, -a);
                for &v in &members[k + 1..] {
                    q.add_quadratic(u, v, 2.0 * a);
                }
            }
            q.offset += a;
        }
    }
    q
}

/// Cyclic distance term `B * sum_{u != i} w[u][i] * sum_j x_{u,j} x_{i,j+1}`.
pub fn distance_qubo(weights: &[Vec<f64>], b: f64) -> Qubo {
    let n = weights.len();
    let mut q = Qubo::new(n * n);
    for u in 0..n {
        for i in 0..n {
            if u == i {
                continue;
            }
            let w = b * weights[u][i];
            for j in 0..n {
                q.add_quadratic(var(n, u, j), var(n, i, (j + 1) % n), w);
            }
        }
    }
    q
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|x, y| x.total_cmp(y));
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// Directed penalized edge set: `(u, i)` with `D[u][i]` strictly above the
/// median of the `n - 1` distances departing from `u`.
pub fn penalized_edges(dist_norm: &[Vec<f64>]) -> Vec<Vec<bool>> {
    let n = dist_norm.len();
    (0..n)
        .map(|u| {
            let mut departing: Vec<f64> = (0..n)
                .filter(|&i| i != u)
                .map(|i| dist_norm[u][i])
                .collect();
            let m_u = median(&mut departing);
            (0..n).map(|i| i != u && dist_norm[u][i] > m_u).collect()
        })
        .collect()
}

/// Reference formulation `H_A + H_B(D)`.
pub fn build_r_qubo(dist_norm: &[Vec<f64>], a: f64, b: f64) -> Result<Qubo> {
    let n = validate_matrix(dist_norm)?;
    validate_penalties(a, b)?;
    let mut q = constraint_qubo(n, a);
    q.add_model(&distance_qubo(dist_norm, b));
    q.meta = Some(QuboMeta {
        kind: QuboKind::Reference,
        n,
        a,
        b,
        c: None,
        penalized: vec![vec![false; n]; n],
    });
    Ok(q)
}

/// Heuristic formulation `H_A + H_B(D~)` with `D~[u][i] = C = 2A/B` on `E_p`.
pub fn build_h_qubo(dist_norm: &[Vec<f64>], a: f64, b: f64) -> Result<Qubo> {
    let n = validate_matrix(dist_norm)?;
    validate_penalties(a, b)?;
    let c = 2.0 * a / b;
    if !c.is_finite() || !(b * c).is_finite() {
        return Err(Error::arg(format!(
            "B = {b} is too small: C = 2A/B is not representable"
        )));
    }
    let penalized = penalized_edges(dist_norm);
    let weights: Vec<Vec<f64>> = (0..n)
        .map(|u| {
            (0..n)
                .map(|i| if penalized[u][i] { c } else { dist_norm[u][i] })
                .collect()
        })
        .collect();
    let mut q = constraint_qubo(n, a);
    q.add_model(&distance_qubo(&weights, b));
    q.meta = Some(QuboMeta {
        kind: QuboKind::Heuristic,
        n,
        a,
        b,
        c: Some(c),
        penalized,
    });
    Ok(q)
}

pub fn build_qubo(kind: QuboKind, dist_norm: &[Vec<f64>], a: f64, b: f64) -> Result<Qubo> {
    match kind {
        QuboKind::Reference => build_r_qubo(dist_norm, a, b),
        QuboKind::Heuristic => build_h_qubo(dist_norm, a, b),
    }
}

/// Ising model `sum h_i s_i + sum J_ij s_i s_j` over spins `s in {-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    pub h: Vec<f64>,
    /// Keys are `(u, v)` with `u < v`.
    pub j: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl IsingModel {
    pub fn new(n_spins: usize) -> Self {
        IsingModel {
            h: vec![0.0; n_spins],
            j: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn n_spins(&self) -> usize {
        self.h.len()
    }

    pub fn add_coupling(&mut self, u: usize, v: usize, value: f64) {
        assert_ne!(u, v, "self-coupling");
        let key = if u < v { (u, v) } else { (v, u) };
        *self.j.entry(key).or_insert(0.0) += value;
    }

    /// Reported energy (offset excluded).
    pub fn energy(&self, s: &[i8]) -> f64 {
        debug_assert_eq!(s.len(), self.h.len());
        let lin: f64 = self.h.iter().zip(s).map(|(h, &si)| h * si as f64).sum();
        let quad: f64 = self
            .j
            .iter()
            .map(|(&(u, v), &j)| j * (s[u] * s[v]) as f64)
            .sum();
        lin + quad
    }

    pub fn max_abs_h(&self) -> f64 {
        self.h.iter().fold(0.0, |m, h| m.max(h.abs()))
    }

    pub fn max_abs_j(&self) -> f64 {
        self.j.values().fold(0.0, |m, j| m.max(j.abs()))
    }

    /// Multiplies every coefficient, including the offset, by `factor`.
    pub fn scaled(&self, factor: f64) -> IsingModel {
        IsingModel {
            h: self.h.iter().map(|h| h * factor).collect(),
            j: self.j.iter().map(|(&k, &v)| (k, v * factor)).collect(),
            offset: self.offset * factor,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let rec = IsingRecord {
            n_spins: self.n_spins(),
            h: self
                .h
                .iter()
                .enumerate()
                .filter(|(_, &h)| h != 0.0)
                .map(|(i, &h)| (i, round_sig(h, JSON_DIGITS)))
                .collect(),
            j: self
                .j
                .iter()
                .map(|(&(u, v), &j)| (u, v, round_sig(j, JSON_DIGITS)))
                .collect(),
            offset: round_sig(self.offset, JSON_DIGITS),
        };
        Ok(serde_json::to_string_pretty(&rec)?)
    }
}

#[derive(Serialize)]
struct IsingRecord {
    n_spins: usize,
    h: Vec<(usize, f64)>,
    j: Vec<(usize, usize, f64)>,
    offset: f64,
}

/// Substitutes `x = (1 + s) / 2`. The returned offset is chosen so that
/// `qubo.energy(x) + qubo.offset == ising.energy(s) + ising.offset`.
pub fn qubo_to_ising(q: &Qubo) -> IsingModel {
    let mut m = IsingModel::new(q.n_vars);
    let mut offset = q.offset;
    for (i, &a) in q.linear.iter().enumerate() {
        m.h[i] += a / 2.0;
        offset += a / 2.0;
    }
    for (&(u, v), &b) in &q.quadratic {
        m.h[u] += b / 4.0;
        m.h[v] += b / 4.0;
        if b != 0.0 {
            m.add_coupling(u, v, b / 4.0);
        }
        offset += b / 4.0;
    }
    m.offset = offset;
    m
}

/// `x_i = (1 + s_i) / 2`.
pub fn spins_to_bits(s: &[i8]) -> Vec<u8> {
    s.iter().map(|&si| u8::from(si > 0)).collect()
}

pub fn bits_to_spins(x: &[u8]) -> Vec<i8> {
    x.iter().map(|&xi| if xi != 0 { 1 } else { -1 }).collect()
}

/// User-facing penalty parameters of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Penalties {
    pub a: f64,
    pub b: f64,
    pub chain_strength: f64,
}

/// Parameters after auto-scaling: the values the device actually applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams {
    pub scale: f64,
    pub a_real: f64,
    pub b_real: f64,
    pub cs_real: f64,
}

/// Divides the whole model by `s = max(1, max|h|/2, max|J|/1)` so it fits the
/// device ranges. Models already inside the ranges are left untouched.
pub fn auto_scale(m: &IsingModel, p: Penalties) -> Result<(IsingModel, ScaledParams)> {
    if m.n_spins() == 0 {
        return Err(Error::arg("cannot auto-scale an empty model"));
    }
    let scale = 1f64
        .max(m.max_abs_h() / H_RANGE)
        .max(m.max_abs_j() / J_RANGE);
    let scaled = if scale == 1.0 {
        m.clone()
    } else {
        m.scaled(1.0 / scale)
    };
    Ok((
        scaled,
        ScaledParams {
            scale,
            a_real: p.a / scale,
            b_real: p.b / scale,
            cs_real: p.chain_strength / scale,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    RowSum { city: usize, sum: usize },
    ColumnSum { position: usize, sum: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TourDecode {
    pub feasible: bool,
    /// City at each position, when feasible.
    pub order: Option<Vec<usize>>,
    pub violation: Option<Violation>,
    /// Feasible heuristic-model tour using at least one edge of `E_p`.
    pub penalized: bool,
}

impl TourDecode {
    pub fn nonpenalized(&self) -> bool {
        self.feasible && !self.penalized
    }
}

/// Interprets an `n^2` bit state as a tour.
pub fn decode_state(bits: &[u8], meta: &QuboMeta) -> Result<TourDecode> {
    let n = meta.n;
    if bits.len() != n * n {
        return Err(Error::arg(format!(
            "state has {} bits, expected {}",
            bits.len(),
            n * n
        )));
    }
    let infeasible = |v| TourDecode {
        feasible: false,
        order: None,
        violation: Some(v),
        penalized: false,
    };
    for city in 0..n {
        let sum = (0..n).filter(|&j| bits[var(n, city, j)] != 0).count();
        if sum != 1 {
            return Ok(infeasible(Violation::RowSum { city, sum }));
        }
    }
    let mut order = Vec::with_capacity(n);
    for position in 0..n {
        let cities: Vec<usize> = (0..n).filter(|&i| bits[var(n, i, position)] != 0).collect();
        if cities.len() != 1 {
            return Ok(infeasible(Violation::ColumnSum {
                position,
                sum: cities.len(),
            }));
        }
        order.push(cities[0]);
    }
    let penalized = meta.kind == QuboKind::Heuristic
        && (0..n).any(|j| meta.penalized[order[j]][order[(j + 1) % n]]);
    Ok(TourDecode {
        feasible: true,
        order: Some(order),
        violation: None,
        penalized,
    })
}

/// Bit state placing city `order[j]` at position `j`.
pub fn permutation_state(order: &[usize]) -> Vec<u8> {
    let n = order.len();
    let mut x = vec![0u8; n * n];
    for (j, &city) in order.iter().enumerate() {
        x[var(n, city, j)] = 1;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;

    fn meta_for(n: usize) -> QuboMeta {
        QuboMeta {
            kind: QuboKind::Reference,
            n,
            a: 1.0,
            b: 1.0,
            c: None,
            penalized: vec![vec![false; n]; n],
        }
    }

    #[test]
    fn single_linear_term_converts() {
        let mut q = Qubo::new(1);
        q.add_linear(0, 1.0);
        let m = qubo_to_ising(&q);
        assert_eq!(m.h, vec![0.5]);
        assert!(m.j.is_empty());
        assert_eq!(m.offset, 0.5);
    }

    #[test]
    fn single_pair_converts() {
        let mut q = Qubo::new(2);
        q.add_quadratic(0, 1, 4.0);
        let m = qubo_to_ising(&q);
        assert_eq!(m.j[&(0, 1)], 1.0);
        assert_eq!(m.h, vec![1.0, 1.0]);
        assert_eq!(m.offset, 1.0);
    }

    #[test]
    fn offset_is_two_n_a() {
        let d = Instance::burma(7).unwrap().dist_norm;
        for kind in QuboKind::ALL {
            let q = build_qubo(kind, &d, 0.7, 0.2).unwrap();
            assert!((q.offset - 2.0 * 7.0 * 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn permutation_state_constraint_energy() {
        let q = constraint_qubo(7, 1.0);
        let x = permutation_state(&[3, 1, 4, 0, 6, 5, 2]);
        assert!((q.energy(&x) + 14.0).abs() < 1e-12);
    }

    #[test]
    fn missing_city_costs_two_a() {
        // city 6 absent, city 0 twice: rows 0 and 6 violated, columns intact
        let q = constraint_qubo(7, 1.0);
        let x = permutation_state(&[0, 1, 2, 3, 4, 5, 0]);
        assert!((q.energy(&x) + 12.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_penalties() {
        let d = Instance::burma(5).unwrap().dist_norm;
        assert!(build_r_qubo(&d, 0.0, 1.0).is_err());
        assert!(build_r_qubo(&d, 1.0, -1.0).is_err());
        assert!(build_h_qubo(&d, 1.0, 0.0).is_err());
        assert!(matches!(
            build_h_qubo(&d, 1.0, 1e-320),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn even_count_median_uses_midpoint() {
        // n = 5: four departing distances per row
        let d = vec![
            vec![0.0, 0.1, 0.2, 0.3, 0.4],
            vec![0.1, 0.0, 0.5, 0.6, 0.7],
            vec![0.2, 0.5, 0.0, 0.8, 0.9],
            vec![0.3, 0.6, 0.8, 0.0, 1.0],
            vec![0.4, 0.7, 0.9, 1.0, 0.0],
        ];
        let p = penalized_edges(&d);
        // row 0: median 0.25 -> 0.3 and 0.4 penalized
        assert_eq!(p[0], vec![false, false, false, true, true]);
        for row in &p {
            assert_eq!(row.iter().filter(|&&b| b).count(), 2);
        }
    }

    #[test]
    fn penalized_step_costs_two_a() {
        let d = Instance::burma(7).unwrap().dist_norm;
        let (a, b) = (0.55, 0.138);
        let q = build_h_qubo(&d, a, b).unwrap();
        let meta = q.meta.as_ref().unwrap();
        for u in 0..7 {
            for i in 0..7 {
                if meta.penalized[u][i] {
                    let (x, y) = (var(7, u, 0), var(7, i, 1));
                    let coeff = q.quadratic[&(x.min(y), x.max(y))];
                    assert!((coeff - 2.0 * a).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn scale_is_one_inside_ranges() {
        let mut m = IsingModel::new(2);
        m.h = vec![1.5, -2.0];
        m.add_coupling(0, 1, -1.0);
        let p = Penalties {
            a: 0.4,
            b: 0.1,
            chain_strength: 0.9,
        };
        let (s, params) = auto_scale(&m, p).unwrap();
        assert_eq!(s, m);
        assert_eq!(params.scale, 1.0);
        assert_eq!(
            (params.a_real, params.b_real, params.cs_real),
            (0.4, 0.1, 0.9)
        );
    }

    #[test]
    fn bias_three_scales_by_one_and_a_half() {
        let mut m = IsingModel::new(1);
        m.h = vec![3.0];
        let (s, params) = auto_scale(
            &m,
            Penalties {
                a: 1.5,
                b: 0.3,
                chain_strength: 1.5,
            },
        )
        .unwrap();
        assert_eq!(params.scale, 1.5);
        assert_eq!(s.h, vec![2.0]);
        assert!((params.a_real - 1.0).abs() < 1e-15);
        assert!((params.cs_real - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_model_cannot_scale() {
        let p = Penalties {
            a: 1.0,
            b: 1.0,
            chain_strength: 1.0,
        };
        assert!(auto_scale(&IsingModel::new(0), p).is_err());
    }

    #[test]
    fn decode_identity() {
        let x = permutation_state(&[0, 1, 2]);
        let d = decode_state(&x, &meta_for(3)).unwrap();
        assert!(d.feasible);
        assert_eq!(d.order, Some(vec![0, 1, 2]));
    }

    #[test]
    fn decode_all_zero() {
        let d = decode_state(&[0; 9], &meta_for(3)).unwrap();
        assert!(!d.feasible);
        assert_eq!(d.violation, Some(Violation::RowSum { city: 0, sum: 0 }));
    }

    #[test]
    fn decode_column_violation() {
        // each city once, but cities 0 and 1 share position 0
        let mut x = vec![0u8; 9];
        x[var(3, 0, 0)] = 1;
        x[var(3, 1, 0)] = 1;
        x[var(3, 2, 2)] = 1;
        let d = decode_state(&x, &meta_for(3)).unwrap();
        assert_eq!(
            d.violation,
            Some(Violation::ColumnSum {
                position: 0,
                sum: 2
            })
        );
    }

    #[test]
    fn decode_wrong_length() {
        assert!(decode_state(&[0; 8], &meta_for(3)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let d = Instance::burma(4).unwrap().dist_norm;
        let q = build_h_qubo(&d, 0.4, 0.1).unwrap();
        let back = Qubo::from_json(&q.to_json().unwrap()).unwrap();
        assert_eq!(back.meta, q.meta);
        for (k, v) in &q.quadratic {
            assert!((back.quadratic[k] - v).abs() <= 1e-11 * v.abs());
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("h".parse::<QuboKind>().unwrap(), QuboKind::Heuristic);
        assert_eq!("r-QUBO".parse::<QuboKind>().unwrap(), QuboKind::Reference);
        assert!("x".parse::<QuboKind>().is_err());
    }
}
