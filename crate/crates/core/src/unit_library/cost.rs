// SPDX-License-Identifier: Apache-2.0

//! Analytic gate-level cost model.
//!
//! Units are abstract gate equivalents (area), abstract power units and
//! gate delays (latency). With `W` the operand width and `r = W - k` the
//! retained width:
//!
//! | unit | area | latency | power |
//! |------|------|---------|-------|
//! | ripple adder, exact / truncated / set_one | `5r` | `2r + 1` | `2.5r` |
//! | adder lower_or | `5r + k` | `2r + 1` | `2.5r + 0.25k` |
//! | adder lower_or_carry | `5r + k + 1` | `2r + 2` | `2.5r + 0.25(k + 1)` |
//! | saturating subtractor, exact / truncated | `6r` | `2r + 2` | `2.75r` |
//! | subtractor lower_or | `6r + k` | `2r + 2` | `2.75r + 0.25k` |
//! | array multiplier `Wa x Wb` over `c` kept partial-product cells | `5c` | see below | `2c` |
//! | digit-recurrence sqrt, `R = W/2` digits, `n = R - k` kept | `6W n / R` | `(2W / R) n` | `0.45 area` |
//!
//! Multiplier latency is `2(Wa + Wb)` for the exact array, `2(Wa + Wb - 2k)`
//! when both operands are truncated, `2(Wa + Wb - k)` for broken rows or a
//! truncated multiplicand, and `2(Wa + Wb) - k` when columns below `k` are
//! removed. The compensated column variant adds 2 area, 0.5 power and one
//! gate delay for the injected constant. Exact units (`k = 0`) fall out of
//! the same formulas.

use super::{OpKind, PpaVector, Scheme, UnitCandidate};

pub const FA_AREA: f64 = 5.0;
pub const FA_DELAY: f64 = 2.0;

pub fn estimate_ppa(c: &UnitCandidate) -> PpaVector {
    let k = c.k as f64;
    match c.kind {
        OpKind::Add => {
            let r = (c.width_a - c.k) as f64;
            match c.family {
                Scheme::LowerOr => ppa(5.0 * r + k, 2.0 * r + 1.0, 2.5 * r + 0.25 * k),
                Scheme::LowerOrCarry => {
                    ppa(5.0 * r + k + 1.0, 2.0 * r + 2.0, 2.5 * r + 0.25 * (k + 1.0))
                }
                _ => ppa(FA_AREA * r, FA_DELAY * r + 1.0, 2.5 * r),
            }
        }
        OpKind::Sub => {
            let r = (c.width_a - c.k) as f64;
            match c.family {
                Scheme::LowerOr => ppa(6.0 * r + k, 2.0 * r + 2.0, 2.75 * r + 0.25 * k),
                _ => ppa(6.0 * r, 2.0 * r + 2.0, 2.75 * r),
            }
        }
        OpKind::Mul => {
            let (wa, wb) = (c.width_a as f64, c.width_b as f64);
            match c.family {
                Scheme::Truncated => {
                    let cells = (wa - k) * (wb - k);
                    ppa(5.0 * cells, 2.0 * (wa + wb - 2.0 * k), 2.0 * cells)
                }
                Scheme::BrokenArray => {
                    let cells = wa * (wb - k);
                    ppa(5.0 * cells, 2.0 * (wa + wb - k), 2.0 * cells)
                }
                Scheme::MultiplicandTruncated => {
                    let cells = (wa - k) * wb;
                    ppa(5.0 * cells, 2.0 * (wa + wb - k), 2.0 * cells)
                }
                Scheme::ColumnTruncated => {
                    let cells = kept_cells(c.width_a, c.width_b, c.k) as f64;
                    ppa(5.0 * cells, 2.0 * (wa + wb) - k, 2.0 * cells)
                }
                Scheme::ColumnCompensated => {
                    let cells = kept_cells(c.width_a, c.width_b, c.k) as f64;
                    ppa(5.0 * cells + 2.0, 2.0 * (wa + wb) - k + 1.0, 2.0 * cells + 0.5)
                }
                _ => {
                    let cells = wa * wb;
                    ppa(5.0 * cells, 2.0 * (wa + wb), 2.0 * cells)
                }
            }
        }
        OpKind::Sqrt => {
            let w = c.width_a as f64;
            let digits = c.width_a.div_ceil(2) as f64;
            let kept = digits - k;
            let area = 6.0 * w * kept / digits;
            ppa(area, 2.0 * w / digits * kept, 0.45 * area)
        }
    }
}

/// Partial-product cells `(i, j)` with `i + j >= k`.
fn kept_cells(width_a: u32, width_b: u32, k: u32) -> u32 {
    (0..width_a)
        .flat_map(|i| (0..width_b).map(move |j| i + j))
        .filter(|&col| col >= k)
        .count() as u32
}

fn ppa(area: f64, latency: f64, power: f64) -> PpaVector {
    PpaVector { area, power, latency }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unit_library::{GroupKey, LibrarySpec};

    #[test]
    fn exact_ripple_adder() {
        let p = UnitCandidate::exact(GroupKey::add(8)).ppa;
        assert_eq!(p.area, 40.0);
        assert_eq!(p.latency, 17.0);
        assert_eq!(p.power, 20.0);
    }

    #[test]
    fn adder_area_is_linear_in_width() {
        let a8 = UnitCandidate::exact(GroupKey::add(8)).ppa.area;
        let a16 = UnitCandidate::exact(GroupKey::add(16)).ppa.area;
        assert_eq!(a16, 2.0 * a8);
    }

    #[test]
    fn truncation_removes_area() {
        let exact = UnitCandidate::exact(GroupKey::add(8)).ppa.area;
        for k in 1..8 {
            let t = UnitCandidate::new(GroupKey::add(8), Scheme::Truncated, k);
            assert!(t.ppa.area < exact);
        }
    }

    #[test]
    fn exact_unit_is_largest_and_cost_is_monotone_in_k() {
        let spec = LibrarySpec::default_spec();
        let cands = spec.enumerate().unwrap();
        for c in &cands {
            let exact = UnitCandidate::exact(c.group());
            assert!(c.ppa.area <= exact.ppa.area, "{}", c.id);
            assert!(c.ppa.area > 0.0 && c.ppa.latency > 0.0 && c.ppa.power > 0.0);
            for d in &cands {
                if d.group() == c.group() && d.family == c.family && d.k > c.k {
                    assert!(d.ppa.area <= c.ppa.area, "{} vs {}", d.id, c.id);
                    assert!(d.ppa.latency <= c.ppa.latency);
                    assert!(d.ppa.power <= c.ppa.power);
                }
            }
        }
    }

    #[test]
    fn sqrt_cost() {
        let p = UnitCandidate::exact(GroupKey::sqrt(18)).ppa;
        assert_eq!(p.area, 108.0);
        assert_eq!(p.latency, 36.0);
        let t = UnitCandidate::new(GroupKey::sqrt(18), Scheme::IterSqrt, 3).ppa;
        assert_eq!(t.area, 72.0);
        assert_eq!(t.latency, 24.0);
    }

    #[test]
    fn kept_cell_count() {
        assert_eq!(kept_cells(8, 4, 0), 32);
        assert_eq!(kept_cells(8, 4, 1), 31);
        assert_eq!(kept_cells(8, 4, 2), 29);
    }
}
