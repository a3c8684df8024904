// SPDX-License-Identifier: Apache-2.0

//! Reference-point survivor selection.
//!
//! Reference directions follow the Das-Dennis simplex lattice. The number of
//! divisions is the largest `H` whose point count `C(H + m - 1, m - 1)` does
//! not exceed the population size:
//!
//! | objectives | population 100 | points |
//! |-----------|----------------|--------|
//! | 1 | any | 1 |
//! | 2 | H = 99 | 100 |
//! | 3 | H = 12 | 91 |
//! | 4 | H = 6 | 84 |

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Divisions for `m` objectives and population `pop` (at least 1).
pub fn divisions(m: usize, pop: usize) -> usize {
    if m <= 1 {
        return 1;
    }
    let mut h = 1;
    while binomial(h + 1 + m - 1, m - 1) <= pop {
        h += 1;
    }
    h
}

/// All points of the simplex lattice with `h` divisions in `m` dimensions.
pub fn das_dennis(m: usize, h: usize) -> Vec<Vec<f64>> {
    if m == 1 {
        return vec![vec![1.0]];
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; m];
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, h: usize, out: &mut Vec<Vec<f64>>) {
        let m = cur.len();
        if k == m - 1 {
            cur[k] = left;
            out.push(cur.iter().map(|&c| c as f64 / h as f64).collect());
            return;
        }
        for v in 0..=left {
            cur[k] = v;
            rec(k + 1, left - v, cur, h, out);
        }
    }
    rec(0, h, &mut cur, h, &mut out);
    out
}

/// Objectives translated by the ideal point and divided by the hyperplane
/// intercepts, falling back to the per-objective maximum when the extreme
/// points are degenerate.
pub fn normalize(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = points[0].len();
    let ideal: Vec<f64> = (0..m)
        .map(|k| points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min))
        .collect();
    let shifted: Vec<Vec<f64>> = points.iter().map(|p| p.iter().zip(&ideal).map(|(x, z)| x - z).collect()).collect();
    let worst: Vec<f64> = (0..m)
        .map(|k| shifted.iter().map(|p| p[k]).fold(0.0, f64::max))
        .collect();
    let intercepts = intercepts(&shifted).unwrap_or_else(|| worst.clone());
    shifted
        .iter()
        .map(|p| {
            p.iter()
                .zip(&intercepts)
                .zip(&worst)
                .map(|((x, a), w)| {
                    let a = if *a > 1e-12 { *a } else if *w > 1e-12 { *w } else { 1.0 };
                    x / a
                })
                .collect()
        })
        .collect()
}

/// Intercepts of the hyperplane through the achievement-scalarizing extreme
/// points, or `None` when the system is singular or an intercept is not
/// positive.
fn intercepts(shifted: &[Vec<f64>]) -> Option<Vec<f64>> {
    let m = shifted[0].len();
    let mut extremes = Vec::with_capacity(m);
    for k in 0..m {
        let asf = |p: &Vec<f64>| {
            (0..m)
                .map(|j| p[j] / if j == k { 1.0 } else { 1e-6 })
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let best = shifted
            .iter()
            .min_by(|a, b| asf(a).total_cmp(&asf(b)))
            .expect("non-empty");
        extremes.push(best.clone());
    }
    // Solve E x = 1; intercept_k = 1 / x_k.
    let mut a: Vec<Vec<f64>> = extremes.iter().map(|r| r.iter().copied().chain([1.0]).collect()).collect();
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..m {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=m {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let x = a[k][m] / a[k][k];
        if !(x > 1e-12) {
            return None;
        }
        out.push(1.0 / x);
    }
    Some(out)
}

/// Closest reference direction and perpendicular distance to it.
pub fn associate(p: &[f64], refs: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, r) in refs.iter().enumerate() {
        let norm2: f64 = r.iter().map(|v| v * v).sum();
        let dot: f64 = p.iter().zip(r).map(|(a, b)| a * b).sum();
        let t = dot / norm2;
        let d2: f64 = p.iter().zip(r).map(|(a, b)| (a - t * b).powi(2)).sum();
        let d = d2.max(0.0).sqrt();
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Picks `k` members of `last` given the already selected `chosen`; both
/// index into `points`. Returns the picked indices and every index's
/// perpendicular distance.
pub fn niche_select(
    points: &[Vec<f64>],
    chosen: &[usize],
    last: &[usize],
    k: usize,
    refs: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<f64>) {
    let pool: Vec<usize> = chosen.iter().chain(last).copied().collect();
    let sub: Vec<Vec<f64>> = pool.iter().map(|&i| points[i].clone()).collect();
    let normed = normalize(&sub);
    let mut niche = vec![0usize; refs.len()];
    let mut assoc = vec![(0usize, 0.0f64); pool.len()];
    let mut dist = vec![f64::INFINITY; points.len()];
    for (slot, p) in normed.iter().enumerate() {
        assoc[slot] = associate(p, refs);
        dist[pool[slot]] = assoc[slot].1;
        if slot < chosen.len() {
            niche[assoc[slot].0] += 1;
        }
    }
    let mut remaining: Vec<usize> = (chosen.len()..pool.len()).collect();
    let mut excluded = vec![false; refs.len()];
    let mut picked = Vec::with_capacity(k);
    while picked.len() < k && !remaining.is_empty() {
        let min = (0..refs.len())
            .filter(|&j| !excluded[j])
            .map(|j| niche[j])
            .min()
            .expect("some reference point stays available while candidates remain");
        let ties: Vec<usize> = (0..refs.len()).filter(|&j| !excluded[j] && niche[j] == min).collect();
        let j = ties[rng.gen_range(0..ties.len())];
        let members: Vec<usize> = remaining.iter().copied().filter(|&s| assoc[s].0 == j).collect();
        if members.is_empty() {
            excluded[j] = true;
            continue;
        }
        let s = if niche[j] == 0 {
            *members
                .iter()
                .min_by(|&&a, &&b| assoc[a].1.total_cmp(&assoc[b].1).then(a.cmp(&b)))
                .expect("non-empty")
        } else {
            members[rng.gen_range(0..members.len())]
        };
        picked.push(pool[s]);
        remaining.retain(|&r| r != s);
        niche[j] += 1;
    }
    (picked, dist)
}
