// SPDX-License-Identifier: Apache-2.0

//! Bit-accurate behavioral models of the unit families.

use super::{OpKind, Scheme, UnitCandidate};
use crate::error::{Error, Result};

/// True integer arithmetic for a kind. Subtraction saturates at zero and the
/// square root ignores `b`.
#[inline]
pub fn exact_result(kind: OpKind, a: u64, b: u64) -> u64 {
    match kind {
        OpKind::Add => a + b,
        OpKind::Sub => a.saturating_sub(b),
        OpKind::Mul => a * b,
        OpKind::Sqrt => a.isqrt(),
    }
}

/// Evaluates `c` on `(a, b)` after checking both operands against the unit widths.
pub fn evaluate_unit(c: &UnitCandidate, a: u64, b: u64) -> Result<u64> {
    check_operand(c, "a", a, c.width_a)?;
    if c.kind != OpKind::Sqrt {
        check_operand(c, "b", b, c.width_b)?;
    }
    Ok(c.compile().apply(a, b))
}

fn check_operand(c: &UnitCandidate, operand: &'static str, value: u64, width: u32) -> Result<()> {
    if width < 64 && value >> width != 0 {
        return Err(Error::InputDomain {
            unit: c.id.clone(),
            operand,
            value,
            width,
        });
    }
    Ok(())
}

/// A unit with its masks and constants precomputed for repeated evaluation.
#[derive(Clone, Copy, Debug)]
pub struct CompiledUnit {
    kind: OpKind,
    family: Scheme,
    k: u32,
    width_a: u32,
    width_b: u32,
    low_mask: u64,
    compensation: u64,
}

impl CompiledUnit {
    pub fn new(c: &UnitCandidate) -> Self {
        let compensation = if c.family == Scheme::ColumnCompensated {
            column_compensation(c.width_a, c.width_b, c.k)
        } else {
            0
        };
        Self {
            kind: c.kind,
            family: c.family,
            k: c.k,
            width_a: c.width_a,
            width_b: c.width_b,
            low_mask: (1u64 << c.k) - 1,
            compensation,
        }
    }

    /// Evaluates without range checks; operands must fit the unit widths.
    #[inline]
    pub fn apply(&self, a: u64, b: u64) -> u64 {
        let k = self.k;
        let m = self.low_mask;
        match (self.kind, self.family) {
            (kind, Scheme::Exact) => exact_result(kind, a, b),

            (OpKind::Add, Scheme::Truncated) => (a & !m) + (b & !m),
            (OpKind::Add, Scheme::LowerOr) => (((a >> k) + (b >> k)) << k) | ((a | b) & m),
            (OpKind::Add, Scheme::LowerOrCarry) => {
                let carry = (a >> (k - 1)) & (b >> (k - 1)) & 1;
                (((a >> k) + (b >> k) + carry) << k) | ((a | b) & m)
            }
            (OpKind::Add, Scheme::SetOne) => (((a >> k) + (b >> k)) << k) | m,

            (OpKind::Sub, Scheme::Truncated) => (a & !m).saturating_sub(b & !m),
            (OpKind::Sub, Scheme::LowerOr) => {
                let (ha, hb) = (a >> k, b >> k);
                if ha < hb {
                    0
                } else {
                    ((ha - hb) << k) | ((a | b) & m)
                }
            }

            (OpKind::Mul, Scheme::Truncated) => (a & !m) * (b & !m),
            (OpKind::Mul, Scheme::BrokenArray) => a * (b & !m),
            (OpKind::Mul, Scheme::MultiplicandTruncated) => (a & !m) * b,
            (OpKind::Mul, Scheme::ColumnTruncated) => column_product(a, b, self.width_b, m),
            (OpKind::Mul, Scheme::ColumnCompensated) => {
                column_product(a, b, self.width_b, m) + self.compensation
            }

            (OpKind::Sqrt, Scheme::IterSqrt) => {
                let iterations = self.width_a.div_ceil(2) - k;
                nonrestoring_sqrt(a, self.width_a, iterations) << k
            }

            (kind, family) => unreachable!("{family:?} does not apply to {kind:?}"),
        }
    }

    pub fn width_a(&self) -> u32 {
        self.width_a
    }
}

/// Sum of the partial-product rows with every bit below column `k` removed
/// (`m = 2^k - 1`).
#[inline]
fn column_product(a: u64, b: u64, width_b: u32, m: u64) -> u64 {
    let mut acc = 0;
    for j in 0..width_b {
        if (b >> j) & 1 == 1 {
            acc += (a << j) & !m;
        }
    }
    acc
}

/// Expected value of the discarded partial-product bits under uniform
/// operands, rounded half-up: `round(sum_{i+j<k} 2^(i+j) / 4)`.
fn column_compensation(width_a: u32, width_b: u32, k: u32) -> u64 {
    let mut quarter_units = 0u64;
    for i in 0..width_a {
        for j in 0..width_b {
            if i + j < k {
                quarter_units += 1 << (i + j);
            }
        }
    }
    (quarter_units + 2) / 4
}

/// Non-restoring digit recurrence for `floor(sqrt(x))` of a `width`-bit
/// radicand, stopped after `iterations` of the `ceil(width/2)` result digits.
/// Returns the partial root (its top `iterations` bits).
pub fn nonrestoring_sqrt(x: u64, width: u32, iterations: u32) -> u64 {
    let digits = width.div_ceil(2);
    let mut q: u64 = 0;
    let mut r: i64 = 0;
    for step in 0..iterations {
        let i = digits - 1 - step;
        let pair = ((x >> (2 * i)) & 3) as i64;
        if r >= 0 {
            r = (r << 2 | pair) - ((q << 2 | 1) as i64);
        } else {
            r = (r << 2 | pair) + ((q << 2 | 3) as i64);
        }
        q = if r >= 0 { q << 1 | 1 } else { q << 1 };
    }
    q
}
