//! TSPLIB `GEO` instances, sub-instances and tour lengths.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// TSPLIB `burma14`, shipped with the crate.
pub const BURMA14_TSP: &str = include_str!("../data/burma14.tsp");

#[allow(clippy::approx_constant)]
const GEO_PI: f64 = 3.141592;
const EARTH_RADIUS: f64 = 6378.388;

/// A symmetric TSP instance with integer kilometre distances and a copy
/// normalized by the largest off-diagonal entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    /// `(latitude, longitude)` in TSPLIB `DD.MM` notation.
    pub coords: Vec<(f64, f64)>,
    pub dist: Vec<Vec<i64>>,
    #[serde(skip_serializing, default)]
    pub dist_norm: Vec<Vec<f64>>,
}

/// JSON archive form: `{name, n, coords, dist}`.
#[derive(Serialize)]
struct InstanceRecord<'a> {
    name: &'a str,
    n: usize,
    coords: &'a [(f64, f64)],
    dist: &'a [Vec<i64>],
}

/// A closed tour and its cyclic length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tour {
    pub order: Vec<usize>,
    pub length: i64,
}

fn geo_radians(x: f64) -> f64 {
    let deg = x.trunc();
    let min = x - deg;
    GEO_PI * (deg + 5.0 * min / 3.0) / 180.0
}

/// TSPLIB `GEO` distance between two `(lat, lon)` points in `DD.MM` format.
///
/// Coincident points are at distance 0 (the raw TSPLIB expression would
/// round them up to 1).
pub fn geo_distance(a: (f64, f64), b: (f64, f64)) -> i64 {
    if a == b {
        return 0;
    }
    let (lat_a, lon_a) = (geo_radians(a.0), geo_radians(a.1));
    let (lat_b, lon_b) = (geo_radians(b.0), geo_radians(b.1));
    let q1 = (lon_a - lon_b).cos();
    let q2 = (lat_a - lat_b).cos();
    let q3 = (lat_a + lat_b).cos();
    let arg = (0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)).clamp(-1.0, 1.0);
    (EARTH_RADIUS * arg.acos() + 1.0) as i64
}

impl Instance {
    /// Builds an instance from coordinates, computing `GEO` distances.
    pub fn from_coords(name: impl Into<String>, coords: Vec<(f64, f64)>) -> Result<Self> {
        let n = coords.len();
        if n < 3 {
            return Err(Error::arg(format!(
                "instance needs at least 3 nodes, got {n}"
            )));
        }
        let mut dist = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = geo_distance(coords[i], coords[j]);
                dist[i][j] = d;
                dist[j][i] = d;
            }
        }
        Self::from_matrix(name, coords, dist)
    }

    fn from_matrix(
        name: impl Into<String>,
        coords: Vec<(f64, f64)>,
        dist: Vec<Vec<i64>>,
    ) -> Result<Self> {
        let max = dist
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .filter(move |(j, _)| *j != i)
                    .map(|(_, &d)| d)
            })
            .max()
            .unwrap_or(0);
        if max <= 0 {
            return Err(Error::arg("all nodes coincide; cannot normalize distances"));
        }
        let dist_norm = dist
            .iter()
            .map(|row| row.iter().map(|&d| d as f64 / max as f64).collect())
            .collect();
        Ok(Instance {
            name: name.into(),
            coords,
            dist,
            dist_norm,
        })
    }

    /// The bundled `burma14` instance.
    pub fn burma14() -> Self {
        parse_tsplib(BURMA14_TSP).expect("bundled burma14 parses")
    }

    /// `Burma'k`: the first `k` nodes of `burma14` in file order.
    pub fn burma(k: usize) -> Result<Self> {
        let base = Self::burma14();
        if k > base.n() {
            return Err(Error::arg(format!("burma14 has 14 nodes, requested {k}")));
        }
        let mut sub = base.subset(&(0..k).collect::<Vec<_>>())?;
        sub.name = format!("burma{k}");
        Ok(sub)
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Restricts the instance to `nodes` (in the given order); distances are
    /// recomputed and re-normalized over the subset.
    pub fn subset(&self, nodes: &[usize]) -> Result<Instance> {
        let n = self.n();
        if nodes.len() < 3 {
            return Err(Error::arg(format!(
                "subset needs at least 3 nodes, got {}",
                nodes.len()
            )));
        }
        let mut seen = vec![false; n];
        for &v in nodes {
            if v >= n {
                return Err(Error::arg(format!(
                    "node {v} out of range for {n}-node instance"
                )));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::arg(format!("duplicate node {v} in subset")));
            }
        }
        let coords = nodes.iter().map(|&v| self.coords[v]).collect();
        Instance::from_coords(format!("{}[{}]", self.name, nodes.len()), coords)
    }

    /// Cyclic tour length in integer kilometres.
    pub fn tour_length(&self, order: &[usize]) -> Result<i64> {
        check_permutation(order, self.n())?;
        Ok(self.cycle_length_unchecked(order))
    }

    pub(crate) fn cycle_length_unchecked(&self, order: &[usize]) -> i64 {
        let k = order.len();
        (0..k)
            .map(|j| self.dist[order[j]][order[(j + 1) % k]])
            .sum()
    }

    pub fn tour(&self, order: Vec<usize>) -> Result<Tour> {
        let length = self.tour_length(&order)?;
        Ok(Tour { order, length })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&InstanceRecord {
            name: &self.name,
            n: self.n(),
            coords: &self.coords,
            dist: &self.dist,
        })?)
    }

    /// Reads the archive form written by [`Instance::to_json`].
    pub fn from_json(text: &str) -> Result<Instance> {
        #[derive(Deserialize)]
        struct Rec {
            name: String,
            coords: Vec<(f64, f64)>,
            dist: Vec<Vec<i64>>,
        }
        let rec: Rec = serde_json::from_str(text)?;
        let n = rec.coords.len();
        if rec.dist.len() != n || rec.dist.iter().any(|r| r.len() != n) {
            return Err(Error::arg(
                "distance matrix shape does not match coordinates",
            ));
        }
        if n < 3 {
            return Err(Error::arg("instance needs at least 3 nodes"));
        }
        Instance::from_matrix(rec.name, rec.coords, rec.dist)
    }
}

pub(crate) fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::arg(format!(
            "tour has {} entries, expected {n}",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::arg(format!("tour is not a permutation of 0..{n}")));
        }
    }
    Ok(())
}

/// Parses a TSPLIB file with `EDGE_WEIGHT_TYPE: GEO` and a `NODE_COORD_SECTION`.
pub fn parse_tsplib(text: &str) -> Result<Instance> {
    let mut name = String::from("unnamed");
    let mut dimension: Option<usize> = None;
    let mut weight_type: Option<String> = None;
    let mut coords: Vec<(f64, f64)> = Vec::new();
    let mut in_coords = false;
    let mut saw_coord_section = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        if in_coords {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                // a new section ends the coordinate block
                if fields[0]
                    .chars()
                    .all(|c| c.is_ascii_uppercase() || c == '_')
                {
                    in_coords = false;
                    continue;
                }
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected `id lat lon`, got `{line}`"),
                });
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("invalid number `{s}`"),
                })
            };
            let id: usize = fields[0].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid node id `{}`", fields[0]),
            })?;
            if id != coords.len() + 1 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!(
                        "node id {id} out of sequence, expected {}",
                        coords.len() + 1
                    ),
                });
            }
            coords.push((parse(fields[1])?, parse(fields[2])?));
            continue;
        }
        if line.starts_with("NODE_COORD_SECTION") {
            in_coords = true;
            saw_coord_section = true;
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected `KEY : VALUE` header, got `{line}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "NAME" => name = value.to_string(),
            "TYPE" => {
                if value != "TSP" {
                    return Err(Error::UnsupportedFormat(format!("problem type {value}")));
                }
            }
            "DIMENSION" => {
                dimension = Some(value.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("invalid DIMENSION `{value}`"),
                })?)
            }
            "EDGE_WEIGHT_TYPE" => {
                if value != "GEO" {
                    return Err(Error::UnsupportedFormat(format!(
                        "edge weight type {value}"
                    )));
                }
                weight_type = Some(value.to_string());
            }
            _ => {}
        }
    }

    if weight_type.is_none() {
        return Err(Error::UnsupportedFormat(
            "missing EDGE_WEIGHT_TYPE (GEO required)".into(),
        ));
    }
    if !saw_coord_section {
        return Err(Error::UnsupportedFormat(
            "missing NODE_COORD_SECTION".into(),
        ));
    }
    if let Some(d) = dimension {
        if d != coords.len() {
            return Err(Error::Parse {
                line: text.lines().count(),
                msg: format!(
                    "DIMENSION is {d} but {} coordinates were read",
                    coords.len()
                ),
            });
        }
    }
    Instance::from_coords(name, coords)
}

/// Parses a node list: `a..b` (inclusive) or comma-separated ids.
pub fn parse_node_list(spec: &str) -> Result<Vec<usize>> {
    let spec = spec.trim();
    let bad = || Error::arg(format!("invalid node list `{spec}`"));
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if hi < lo {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Instance {
        Instance::from_coords("t", vec![(16.47, 96.10), (16.47, 94.44), (20.09, 92.54)]).unwrap()
    }

    #[test]
    fn identical_coordinates_are_zero_apart() {
        assert_eq!(geo_distance((16.47, 96.10), (16.47, 96.10)), 0);
        let inst = Instance::from_coords("dup", vec![(1.0, 1.0), (1.0, 1.0), (2.0, 2.0)]).unwrap();
        assert_eq!(inst.dist[0][1], 0);
    }

    #[test]
    fn burma14_is_symmetric_with_zero_diagonal() {
        let b = Instance::burma14();
        assert_eq!(b.n(), 14);
        for i in 0..14 {
            assert_eq!(b.dist[i][i], 0);
            for j in 0..14 {
                assert_eq!(b.dist[i][j], b.dist[j][i]);
            }
        }
    }

    #[test]
    fn normalized_matrix_peaks_at_one() {
        let b = Instance::burma(7).unwrap();
        let mut max: f64 = 0.0;
        for row in &b.dist_norm {
            for &v in row {
                assert!((0.0..=1.0).contains(&v));
                max = max.max(v);
            }
        }
        assert_eq!(max, 1.0);
    }

    #[test]
    fn triangle_length_is_sum_of_edges() {
        let t = tiny();
        let total = t.dist[0][1] + t.dist[1][2] + t.dist[0][2];
        assert_eq!(t.tour_length(&[0, 1, 2]).unwrap(), total);
        assert_eq!(t.tour_length(&[2, 0, 1]).unwrap(), total);
        assert_eq!(t.tour_length(&[2, 1, 0]).unwrap(), total);
    }

    #[test]
    fn non_permutations_are_rejected() {
        let t = tiny();
        assert!(t.tour_length(&[0, 0, 1]).is_err());
        assert!(t.tour_length(&[0, 1]).is_err());
        assert!(t.tour_length(&[0, 1, 3]).is_err());
    }

    #[test]
    fn full_subset_is_identity() {
        let b = Instance::burma14();
        let all = b.subset(&(0..14).collect::<Vec<_>>()).unwrap();
        assert_eq!(all.dist, b.dist);
        assert_eq!(all.dist_norm, b.dist_norm);
    }

    #[test]
    fn subset_argument_errors() {
        let b = Instance::burma14();
        assert!(matches!(b.subset(&[0, 1, 1]), Err(Error::Argument(_))));
        assert!(matches!(b.subset(&[0, 1, 14]), Err(Error::Argument(_))));
        assert!(matches!(b.subset(&[0, 1]), Err(Error::Argument(_))));
    }

    #[test]
    fn rejects_other_weight_types() {
        let text = "NAME: x\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 1\n3 2 2\nEOF\n";
        assert!(matches!(
            parse_tsplib(text),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn malformed_coordinate_names_line() {
        let text = "NAME: x\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: GEO\nNODE_COORD_SECTION\n1 16.47 96.10\n2 16.47 abc\n3 20.09 92.54\nEOF\n";
        match parse_tsplib(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_header_names_line() {
        let text = "NAME: x\ngarbage here\nEDGE_WEIGHT_TYPE: GEO\n";
        match parse_tsplib(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn node_lists() {
        assert_eq!(parse_node_list("0..6").unwrap(), (0..7).collect::<Vec<_>>());
        assert_eq!(parse_node_list("3, 1,2").unwrap(), vec![3, 1, 2]);
        assert!(parse_node_list("5..2").is_err());
        assert!(parse_node_list("a,b").is_err());
    }

    #[test]
    fn json_round_trip_keeps_matrix() {
        let b = Instance::burma(5).unwrap();
        let back = Instance::from_json(&b.to_json().unwrap()).unwrap();
        assert_eq!(back, b);
    }
}
