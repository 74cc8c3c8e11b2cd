//! Library results checked against independent reference computations
//! written directly from the textbook definitions.

use qatsp::instance::Instance;
use qatsp::oracle::{brute_optimum, enumerate_column_functions, enumerate_tours};
use qatsp::qubo::{build_h_qubo, build_r_qubo, constraint_qubo, qubo_to_ising, Qubo};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BURMA14: [(f64, f64); 14] = [
    (16.47, 96.10),
    (16.47, 94.44),
    (20.09, 92.54),
    (22.39, 93.37),
    (25.23, 97.24),
    (22.00, 96.05),
    (20.47, 97.02),
    (17.20, 96.29),
    (16.30, 97.38),
    (14.05, 98.12),
    (16.53, 97.38),
    (21.52, 95.59),
    (19.41, 97.13),
    (20.09, 94.55),
];

/// TSPLIB GEO: degrees.minutes to radians with PI = 3.141592, then the
/// spherical formula with RRR = 6378.388, truncated plus one.
#[allow(clippy::approx_constant)]
fn tsplib_geo(i: (f64, f64), j: (f64, f64)) -> i64 {
    let rad = |x: f64| {
        let deg = x as i64 as f64;
        let min = x - deg;
        3.141592 * (deg + 5.0 * min / 3.0) / 180.0
    };
    let (lat_i, lon_i, lat_j, lon_j) = (rad(i.0), rad(i.1), rad(j.0), rad(j.1));
    let q1 = (lon_i - lon_j).cos();
    let q2 = (lat_i - lat_j).cos();
    let q3 = (lat_i + lat_j).cos();
    (6378.388 * (0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)).acos() + 1.0) as i64
}

fn reference_matrix(k: usize) -> Vec<Vec<i64>> {
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        0
                    } else {
                        tsplib_geo(BURMA14[i], BURMA14[j])
                    }
                })
                .collect()
        })
        .collect()
}

/// Held-Karp dynamic program over subsets containing city 0.
fn held_karp(d: &[Vec<i64>]) -> i64 {
    let n = d.len();
    let full = 1usize << n;
    let mut dp = vec![vec![i64::MAX; n]; full];
    dp[1][0] = 0;
    for mask in 1..full {
        if mask & 1 == 0 {
            continue;
        }
        for last in 0..n {
            let cur = dp[mask][last];
            if cur == i64::MAX {
                continue;
            }
            for next in 0..n {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let m2 = mask | (1 << next);
                dp[m2][next] = dp[m2][next].min(cur + d[last][next]);
            }
        }
    }
    (1..n)
        .map(|last| dp[full - 1][last] + d[last][0])
        .min()
        .unwrap()
}

fn normalized(d: &[Vec<i64>]) -> Vec<Vec<f64>> {
    let max = d.iter().flatten().copied().max().unwrap() as f64;
    d.iter()
        .map(|r| r.iter().map(|&x| x as f64 / max).collect())
        .collect()
}

/// Directed penalty set from first principles: above the median of the
/// `n - 1` departing distances.
fn reference_penalized(d: &[Vec<f64>]) -> Vec<Vec<bool>> {
    let n = d.len();
    (0..n)
        .map(|u| {
            let mut row: Vec<f64> = (0..n).filter(|&i| i != u).map(|i| d[u][i]).collect();
            row.sort_by(f64::total_cmp);
            let m = row.len();
            let median = if m % 2 == 1 {
                row[m / 2]
            } else {
                (row[m / 2 - 1] + row[m / 2]) / 2.0
            };
            (0..n).map(|i| i != u && d[u][i] > median).collect()
        })
        .collect()
}

/// `A sum_rows (1 - r)^2 + A sum_cols (1 - c)^2 - 2nA + B sum W[u][i] x_{u,j} x_{i,j+1}`.
fn reference_energy(x: &[u8], w: &[Vec<f64>], a: f64, b: f64) -> f64 {
    let n = w.len();
    let at = |c: usize, p: usize| x[c * n + p] as f64;
    let mut e = -2.0 * n as f64 * a;
    for k in 0..n {
        let row: f64 = (0..n).map(|p| at(k, p)).sum();
        let col: f64 = (0..n).map(|c| at(c, k)).sum();
        e += a * (1.0 - row).powi(2) + a * (1.0 - col).powi(2);
    }
    for u in 0..n {
        for i in 0..n {
            if u != i {
                for j in 0..n {
                    e += b * w[u][i] * at(u, j) * at(i, (j + 1) % n);
                }
            }
        }
    }
    e
}

fn heuristic_weights(d: &[Vec<f64>], a: f64, b: f64) -> Vec<Vec<f64>> {
    let p = reference_penalized(d);
    let c = 2.0 * a / b;
    d.iter()
        .zip(&p)
        .map(|(row, prow)| {
            row.iter()
                .zip(prow)
                .map(|(&x, &pen)| if pen { c } else { x })
                .collect()
        })
        .collect()
}

#[test]
fn geo_matrix_matches_reference() {
    assert_eq!(Instance::burma14().dist, reference_matrix(14));
}

#[test]
fn burma14_optimum_is_3323() {
    assert_eq!(held_karp(&reference_matrix(14)), 3323);
    let tsplib_opt = [1, 2, 14, 3, 4, 5, 6, 12, 7, 13, 8, 11, 9, 10];
    let order: Vec<usize> = tsplib_opt.iter().map(|v| v - 1).collect();
    assert_eq!(Instance::burma14().tour_length(&order).unwrap(), 3323);
}

#[test]
fn first_k_optima_match_held_karp() {
    for k in 4..=12 {
        let expected = held_karp(&reference_matrix(k));
        assert_eq!(
            brute_optimum(&Instance::burma(k).unwrap()).unwrap().length,
            expected,
            "k = {k}"
        );
    }
}

#[test]
fn qubo_energies_match_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in [4, 5, 7] {
        let inst = Instance::burma(n).unwrap();
        let d = normalized(&reference_matrix(n));
        for (a, b) in [(0.55, 0.138), (0.4, 0.01), (1.0, 0.5)] {
            let models: [(Qubo, Vec<Vec<f64>>); 2] = [
                (build_r_qubo(&inst.dist_norm, a, b).unwrap(), d.clone()),
                (
                    build_h_qubo(&inst.dist_norm, a, b).unwrap(),
                    heuristic_weights(&d, a, b),
                ),
            ];
            for (q, w) in &models {
                for _ in 0..200 {
                    let x: Vec<u8> = (0..n * n).map(|_| u8::from(rng.gen_bool(0.2))).collect();
                    let want = reference_energy(&x, w, a, b);
                    assert!((q.energy(&x) - want).abs() < 1e-9, "n = {n}");
                }
            }
        }
    }
}

#[test]
fn penalized_sets_match_definition() {
    for n in [5, 6, 7, 12] {
        let inst = Instance::burma(n).unwrap();
        let q = build_h_qubo(&inst.dist_norm, 0.55, 0.138).unwrap();
        let want = reference_penalized(&normalized(&reference_matrix(n)));
        assert_eq!(q.meta.unwrap().penalized, want);
    }
}

/// Every 0/1 state for n = 3 and n = 4: permutations sit at -2nA and the next
/// constraint level is -(2n-2)A.
#[test]
fn constraint_strata_exhaustive() {
    let a = 0.7;
    for n in [3usize, 4] {
        let q = constraint_qubo(n, a);
        let mut levels: Vec<(i64, u64)> = Vec::new();
        for bits in 0u32..(1 << (n * n)) {
            let x: Vec<u8> = (0..n * n).map(|k| ((bits >> k) & 1) as u8).collect();
            let level = (q.energy(&x) / a).round() as i64;
            assert!((q.energy(&x) - level as f64 * a).abs() < 1e-9);
            match levels.iter_mut().find(|(l, _)| *l == level) {
                Some((_, c)) => *c += 1,
                None => levels.push((level, 1)),
            }
        }
        levels.sort();
        let factorial: u64 = (1..=n as u64).product();
        assert_eq!(levels[0], (-2 * n as i64, factorial));
        assert_eq!(levels[1].0, -(2 * n as i64 - 2));
    }
}

/// Tour stratum of the full model: enumeration agrees with all 2^16 states.
#[test]
fn tour_enumeration_matches_exhaustive_n4() {
    let inst = Instance::burma(4).unwrap();
    let (a, b) = (0.55, 0.138);
    for q in [
        build_r_qubo(&inst.dist_norm, a, b).unwrap(),
        build_h_qubo(&inst.dist_norm, a, b).unwrap(),
    ] {
        let mut best_perm = f64::INFINITY;
        let mut worst_perm = f64::NEG_INFINITY;
        let mut perms = 0;
        let mut best_column_function = f64::INFINITY;
        for bits in 0u32..(1 << 16) {
            let x: Vec<u8> = (0..16).map(|k| ((bits >> k) & 1) as u8).collect();
            let rows: Vec<u32> = (0..4)
                .map(|c| (0..4).map(|p| x[c * 4 + p] as u32).sum())
                .collect();
            let cols: Vec<u32> = (0..4)
                .map(|p| (0..4).map(|c| x[c * 4 + p] as u32).sum())
                .collect();
            let e = q.energy(&x);
            if cols.iter().all(|&c| c == 1) {
                if rows.iter().all(|&r| r == 1) {
                    perms += 1;
                    best_perm = best_perm.min(e);
                    worst_perm = worst_perm.max(e);
                } else {
                    best_column_function = best_column_function.min(e);
                }
            }
        }
        let s = enumerate_tours(&inst, &q).unwrap();
        assert_eq!(s.n_feasible, perms);
        assert!((s.best_feasible.energy - best_perm).abs() < 1e-12);
        assert!((s.worst_feasible.energy - worst_perm).abs() < 1e-12);
        let inf = enumerate_column_functions(&inst, &q).unwrap();
        assert!((inf.energy - best_column_function).abs() < 1e-12);
    }
}

/// QUBO and Ising frames agree on every state of a 3-city model.
#[test]
fn frame_equivalence_exhaustive_n3() {
    let inst = Instance::burma(3).unwrap();
    for q in [
        build_r_qubo(&inst.dist_norm, 0.55, 0.138).unwrap(),
        build_h_qubo(&inst.dist_norm, 0.4, 0.01).unwrap(),
    ] {
        let m = qubo_to_ising(&q);
        for bits in 0u32..512 {
            let x: Vec<u8> = (0..9).map(|k| ((bits >> k) & 1) as u8).collect();
            let s: Vec<i8> = x.iter().map(|&b| 2 * b as i8 - 1).collect();
            let eq = q.energy(&x) + q.offset;
            let ei = m.energy(&s) + m.offset;
            assert!((eq - ei).abs() < 1e-9);
        }
    }
}

/// Distance part of the best and worst Burma'7 tours in units of `B`.
#[test]
fn burma7_tour_extremes_by_direct_search() {
    let d = normalized(&reference_matrix(7));
    let mut rest: Vec<usize> = (1..7).collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    permute(&mut rest, 0, &mut |p| {
        let order: Vec<usize> = std::iter::once(0).chain(p.iter().copied()).collect();
        let len: f64 = (0..7).map(|j| d[order[j]][order[(j + 1) % 7]]).sum();
        lo = lo.min(len);
        hi = hi.max(len);
    });
    let inst = Instance::burma(7).unwrap();
    let s = enumerate_tours(&inst, &build_r_qubo(&inst.dist_norm, 0.55, 0.138).unwrap()).unwrap();
    assert!((s.best_feasible.b_coefficient - lo).abs() < 1e-9);
    assert!((s.worst_feasible.b_coefficient - hi).abs() < 1e-9);
    assert!((lo - 2.385155).abs() < 5e-6);
    assert!((hi - 4.517553).abs() < 5e-6);
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

/// No Burma'7 tour avoids every above-median departing edge.
#[test]
fn burma7_has_no_unpenalized_tour() {
    let p = reference_penalized(&normalized(&reference_matrix(7)));
    let mut rest: Vec<usize> = (1..7).collect();
    let mut clean = 0;
    permute(&mut rest, 0, &mut |perm| {
        let order: Vec<usize> = std::iter::once(0).chain(perm.iter().copied()).collect();
        if (0..7).all(|j| !p[order[j]][order[(j + 1) % 7]]) {
            clean += 1;
        }
    });
    assert_eq!(clean, 0);
}
