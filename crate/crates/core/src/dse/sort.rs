// SPDX-License-Identifier: Apache-2.0

//! Non-dominated sorting and crowding distance (minimization).

/// `a` is no worse in every objective and strictly better in one.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Feasible beats infeasible; two infeasible points compare by total
/// violation; two feasible points compare by Pareto dominance.
pub fn constrained_dominates(a: &[f64], va: f64, b: &[f64], vb: f64) -> bool {
    match (va > 0.0, vb > 0.0) {
        (false, true) => true,
        (true, false) => false,
        (true, true) => va < vb,
        (false, false) => dominates(a, b),
    }
}

/// Fast non-dominated sorting over an arbitrary dominance relation on
/// `0..n`. Fronts hold indices in increasing order.
pub fn sort_by(n: usize, dom: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut dominated: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if dom(i, j) {
                dominated[i].push(j);
                count[j] += 1;
            } else if dom(j, i) {
                dominated[j].push(i);
                count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

pub fn non_dominated_sort(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    sort_by(points.len(), |i, j| dominates(&points[i], &points[j]))
}

pub fn constrained_sort(points: &[Vec<f64>], violation: &[f64]) -> Vec<Vec<usize>> {
    sort_by(points.len(), |i, j| constrained_dominates(&points[i], violation[i], &points[j], violation[j]))
}

/// Crowding distance of each point of one front. Boundary points of every
/// objective get infinity; interior points sum the neighbour gap divided by
/// the objective's range.
pub fn crowding_distance(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    let mut d = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].len();
    for k in 0..m {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| front[a][k].total_cmp(&front[b][k]).then(a.cmp(&b)));
        let lo = front[order[0]][k];
        let hi = front[order[n - 1]][k];
        d[order[0]] = f64::INFINITY;
        d[order[n - 1]] = f64::INFINITY;
        if hi <= lo {
            continue;
        }
        for w in 1..n - 1 {
            let gap = front[order[w + 1]][k] - front[order[w - 1]][k];
            d[order[w]] += gap / (hi - lo);
        }
    }
    d
}
