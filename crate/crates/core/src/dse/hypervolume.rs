// SPDX-License-Identifier: Apache-2.0

//! Exact hypervolume of a set of minimization points.

use crate::error::{Error, Result};

/// Volume dominated by `points` and bounded by `reference`. Two objectives
/// use a sweep; three objectives sweep slices along the last axis and solve
/// each slice in two dimensions.
pub fn hypervolume(points: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    let m = reference.len();
    if !(2..=3).contains(&m) {
        return Err(Error::InvalidReference(format!("{m} objectives; 2 or 3 are supported")));
    }
    for p in points {
        if p.len() != m {
            return Err(Error::InvalidReference(format!("point has {} objectives, reference {m}", p.len())));
        }
        if p.iter().zip(reference).any(|(x, r)| x > r) {
            return Err(Error::InvalidReference(format!("point {p:?} lies beyond the reference {reference:?}")));
        }
    }
    Ok(match m {
        2 => {
            let pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
            sweep2(pts, reference[0], reference[1])
        }
        _ => {
            let mut pts: Vec<&Vec<f64>> = points.iter().collect();
            pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
            let mut total = 0.0;
            for i in 0..pts.len() {
                let z_next = if i + 1 < pts.len() { pts[i + 1][2] } else { reference[2] };
                let depth = z_next - pts[i][2];
                if depth > 0.0 {
                    let slice: Vec<(f64, f64)> = pts[..=i].iter().map(|p| (p[0], p[1])).collect();
                    total += depth * sweep2(slice, reference[0], reference[1]);
                }
            }
            total
        }
    })
}

fn sweep2(mut pts: Vec<(f64, f64)>, rx: f64, ry: f64) -> f64 {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut best_y = ry;
    for (x, y) in pts {
        if y < best_y {
            area += (rx - x) * (best_y - y);
            best_y = y;
        }
    }
    area
}

/// Hypervolume by inclusion-exclusion over all subsets; exponential, for
/// cross-checking on small sets.
pub fn hypervolume_inclusion_exclusion(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let n = points.len();
    assert!(n <= 20, "inclusion-exclusion is exponential in the point count");
    let mut total = 0.0;
    for mask in 1u32..(1 << n) {
        let mut corner = vec![f64::NEG_INFINITY; reference.len()];
        for (i, p) in points.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for (c, &v) in corner.iter_mut().zip(p) {
                    *c = c.max(v);
                }
            }
        }
        let vol: f64 = corner.iter().zip(reference).map(|(c, r)| (r - c).max(0.0)).product();
        total += if mask.count_ones() % 2 == 1 { vol } else { -vol };
    }
    total
}
